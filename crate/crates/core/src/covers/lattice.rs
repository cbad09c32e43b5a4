//! Orbit ball covers `{B(g x₀, 2R)}` of the interior.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Cover, CoverSet};
use crate::error::{invalid, Error, Result};
use crate::space::{self, tree, ExtendedPoint, Letter, Point, Space, SpaceKind, TreePoint};
use crate::value::{exact, int, Value};

/// Largest Euclidean dimension for which lattice neighbourhoods are enumerated.
const MAX_LATTICE_DIM: usize = 4;

/// The orbit of the basepoint under the acting group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orbit {
    /// `x₀ + ℤᵈ`.
    IntegerLattice,
    /// All vertices of the tree.
    TreeVertices,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Center {
    Lattice(Vec<i64>),
    Vertex(Vec<Letter>),
}

impl fmt::Display for Center {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Center::Lattice(v) => {
                let parts: Vec<String> = v.iter().map(i64::to_string).collect();
                write!(f, "({})", parts.join(","))
            }
            Center::Vertex(w) => write!(f, "{}", TreePoint::vertex(w.clone())),
        }
    }
}

/// Open balls of radius `2R` about every orbit point.
#[derive(Clone, Debug, PartialEq)]
pub struct BallFamily {
    space: Space,
    orbit: Orbit,
    r: f64,
}

impl BallFamily {
    /// Requires `R` at least the covering radius of the orbit (`√d/2` or `1/2`).
    pub fn new(space: &Space, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid("R", format!("must be positive, got {r}")));
        }
        let (orbit, covering) = match space.kind() {
            SpaceKind::Euclidean { dim } if *dim <= MAX_LATTICE_DIM => {
                (Orbit::IntegerLattice, 0.5 * (*dim as f64).sqrt())
            }
            SpaceKind::Euclidean { dim } => {
                return Err(Error::Unsupported(format!("lattice covers above dimension {MAX_LATTICE_DIM}, got {dim}")))
            }
            SpaceKind::Tree { .. } => (Orbit::TreeVertices, 0.5),
            SpaceKind::HyperbolicPlane => {
                return Err(Error::Unsupported("no lattice is provided for the hyperbolic plane".into()))
            }
        };
        if r < covering {
            return Err(invalid(
                "R",
                format!("orbit balls of radius {r} do not cover; need at least {covering}"),
            ));
        }
        if let Point::Tree(o) = space.basepoint() {
            if !o.is_vertex() {
                return Err(invalid("basepoint", "tree orbit needs a vertex basepoint"));
            }
        }
        Ok(BallFamily {
            space: space.clone(),
            orbit,
            r,
        })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn orbit(&self) -> Orbit {
        self.orbit
    }

    /// The parameter `R`; balls have radius `2R`.
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn radius(&self) -> f64 {
        2.0 * self.r
    }

    pub fn center_point(&self, c: &Center) -> Point {
        match (c, self.space.basepoint()) {
            (Center::Lattice(v), Point::Euclidean(o)) => {
                Point::Euclidean(o.iter().zip(v).map(|(a, b)| a + *b as f64).collect())
            }
            (Center::Vertex(w), _) => Point::Tree(TreePoint::vertex(w.clone())),
            _ => unreachable!("center kind follows the orbit"),
        }
    }

    /// Centers whose ball contains `p`, with `d(p, center)`.
    pub fn centers_near(&self, p: &Point) -> Vec<(Center, Value)> {
        let rad = self.radius();
        match (p, self.space.basepoint()) {
            (Point::Euclidean(x), Point::Euclidean(o)) => {
                let rel: Vec<f64> = x.iter().zip(o).map(|(a, b)| a - b).collect();
                let ranges: Vec<(i64, i64)> = rel
                    .iter()
                    .map(|c| ((c - rad).floor() as i64, (c + rad).ceil() as i64))
                    .collect();
                let mut out = Vec::new();
                let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
                loop {
                    let d2: f64 = rel.iter().zip(&cur).map(|(a, b)| (a - *b as f64).powi(2)).sum();
                    let d = d2.sqrt();
                    if d < rad {
                        out.push((Center::Lattice(cur.clone()), Value::Float(d)));
                    }
                    // odometer over the box
                    let mut i = 0;
                    loop {
                        if i == cur.len() {
                            return out;
                        }
                        if cur[i] < ranges[i].1 {
                            cur[i] += 1;
                            break;
                        }
                        cur[i] = ranges[i].0;
                        i += 1;
                    }
                }
            }
            (Point::Tree(x), _) => {
                let valence = self.space.valence().expect("tree");
                let rad = exact(rad).expect("finite");
                tree::vertices_within(valence, x, &rad)
                    .into_iter()
                    .map(|(w, d)| (Center::Vertex(w), Value::Rational(d)))
                    .collect()
            }
            _ => unreachable!("points validated against the family's space"),
        }
    }

    pub fn multiplicity(&self, p: &Point) -> usize {
        self.centers_near(p).len()
    }

    /// Continuum Lebesgue number at `p`: `max (2R - d(p, g))` over the balls.
    pub fn lebesgue_at(&self, p: &Point) -> Value {
        let two_r = Value::from(exact(self.radius()).expect("finite"));
        self.centers_near(p)
            .into_iter()
            .map(|(_, d)| two_r.add(&d.mul(&Value::Rational(int(-1)))))
            .fold(Value::zero(), |best, v| if v > best { v } else { best })
    }

    /// Group `points` by the balls containing them.
    pub fn cover_of(&self, points: &[Point]) -> Result<Cover> {
        let mut sets: BTreeMap<Center, Vec<usize>> = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            self.space.check_point(p)?;
            for (c, _) in self.centers_near(p) {
                sets.entry(c).or_default().push(i);
            }
        }
        let sets = sets
            .into_iter()
            .map(|(c, m)| CoverSet::new(m, format!("B({c}, {})", self.radius())))
            .collect();
        let ground = points.iter().cloned().map(ExtendedPoint::Interior).collect();
        Cover::new(&self.space, ground, sets)
    }
}

/// The orbit ball cover restricted to `n` sampled points within `window` of the basepoint.
pub fn lattice_ball_cover(space: &Space, r: f64, window: f64, n: usize, seed: u64) -> Result<(BallFamily, Cover)> {
    if n == 0 || !(window > 0.0) {
        return Err(invalid("window", "sample window is empty"));
    }
    let family = BallFamily::new(space, r)?;
    let points = space::sample_interior(space, window, n, seed)?;
    let cover = family.cover_of(&points)?;
    Ok((family, cover))
}
