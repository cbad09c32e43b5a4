//! Covers of finite samples and their order, mesh and Lebesgue number.
//!
//! Everything here is measured on a sample: the Lebesgue number of a set at a
//! point is the distance to the nearest *sample* point outside the set, so it
//! can only overestimate the continuum value. Constructions that know their
//! continuum Lebesgue number (ball families) report it separately.

mod colored;
mod elldim;
mod lattice;
mod pushin;
mod pushout;

pub use colored::{colored_boundary_cover, ColoredCover, Region};
pub use elldim::{ell_dim_estimate, EllDimReport, ScaleRow};
pub use lattice::{lattice_ball_cover, BallFamily, Center, Orbit};
pub use pushin::{annular_pushin_cover, PushinReport, ScaleSchedule, TubeLevel};
pub use pushout::{boundary_pushout_cover, Pushout, PushoutCheck};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::space::{self, ExtendedPoint, Point, Space};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverSet {
    pub members: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<u32>,
    pub descriptor: String,
}

impl CoverSet {
    pub fn new(members: Vec<usize>, descriptor: impl Into<String>) -> Self {
        CoverSet {
            members,
            color: None,
            descriptor: descriptor.into(),
        }
    }

    pub fn colored(mut self, color: u32) -> Self {
        self.color = Some(color);
        self
    }
}

/// A family of subsets of a finite ground sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub space: Space,
    pub ground: Vec<ExtendedPoint>,
    pub sets: Vec<CoverSet>,
}

impl Cover {
    pub fn new(space: &Space, ground: Vec<ExtendedPoint>, sets: Vec<CoverSet>) -> Result<Self> {
        let n = ground.len();
        for (k, s) in sets.iter().enumerate() {
            if let Some(&bad) = s.members.iter().find(|&&i| i >= n) {
                return Err(invalid("cover", format!("set {k} names ground index {bad} of {n}")));
            }
        }
        Ok(Cover {
            space: space.clone(),
            ground,
            sets,
        })
    }

    /// Number of sets containing each ground point.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut m = vec![0; self.ground.len()];
        for s in &self.sets {
            for &i in &s.members {
                m[i] += 1;
            }
        }
        m
    }

    pub fn order(&self) -> usize {
        self.multiplicities().into_iter().max().unwrap_or(0)
    }

    /// Ground points in no set.
    pub fn uncovered(&self) -> Vec<usize> {
        self.multiplicities()
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn colors(&self) -> Vec<u32> {
        let mut c: Vec<u32> = self.sets.iter().filter_map(|s| s.color).collect();
        c.sort_unstable();
        c.dedup();
        c
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cover serializes")
    }
}

/// Order, mesh and Lebesgue number of a cover of a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverStats {
    pub order: usize,
    pub mesh: Value,
    /// `None` when every point lies in a set containing the whole sample (infinite on the sample).
    pub lebesgue: Option<Value>,
    pub uncovered: usize,
}

impl CoverStats {
    pub fn lebesgue_f64(&self) -> f64 {
        self.lebesgue.as_ref().map_or(f64::INFINITY, Value::to_f64)
    }
}

impl Serialize for CoverStats {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("CoverStats", 4)?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("mesh", &self.mesh.to_f64())?;
        match &self.lebesgue {
            Some(v) => st.serialize_field("lebesgue", &v.to_f64())?,
            None => st.serialize_field("lebesgue", "inf")?,
        }
        st.serialize_field("uncovered", &self.uncovered)?;
        st.end()
    }
}

fn cmp_values(a: &Value, b: &Value) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Stats of `cover` under the symmetric distance matrix `dist` of its ground.
///
/// The Lebesgue minimum runs over `core` when given (points far enough from
/// the edge of a sampling window), over all covered points otherwise.
pub fn cover_stats(cover: &Cover, dist: &[Vec<Value>], core: Option<&[usize]>) -> Result<CoverStats> {
    let n = cover.ground.len();
    if cover.sets.is_empty() {
        return Err(invalid("cover", "has no sets"));
    }
    if dist.len() != n || dist.iter().any(|row| row.len() != n) {
        return Err(invalid("dist", format!("expected a {n}x{n} matrix")));
    }
    let mut member = vec![vec![false; n]; cover.sets.len()];
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, s) in cover.sets.iter().enumerate() {
        for &i in &s.members {
            if !member[k][i] {
                member[k][i] = true;
                containing[i].push(k);
            }
        }
    }
    let order = containing.iter().map(Vec::len).max().unwrap_or(0);
    let uncovered = containing.iter().filter(|c| c.is_empty()).count();

    let mut mesh = Value::zero();
    for s in &cover.sets {
        for (a, &i) in s.members.iter().enumerate() {
            for &j in &s.members[..a] {
                if cmp_values(&dist[i][j], &mesh) == Ordering::Greater {
                    mesh = dist[i][j].clone();
                }
            }
        }
    }

    let all: Vec<usize> = (0..n).collect();
    let core = core.unwrap_or(&all);
    // Minimum over points of their finite depths; points with infinite depth don't lower it.
    let mut lebesgue: Option<Value> = None;
    for &i in core {
        if containing[i].is_empty() {
            continue;
        }
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| cmp_values(&dist[i][a], &dist[i][b]));
        // Best depth of `i` inside any of its sets; `None` means infinite.
        let mut best: Option<Value> = Some(Value::zero());
        for &k in &containing[i] {
            match others.iter().find(|&&j| !member[k][j]) {
                None => {
                    best = None;
                    break;
                }
                Some(&j) => {
                    if let Some(b) = &best {
                        if cmp_values(&dist[i][j], b) == Ordering::Greater {
                            best = Some(dist[i][j].clone());
                        }
                    }
                }
            }
        }
        match (best, &lebesgue) {
            (None, _) => {}
            (Some(b), None) => lebesgue = Some(b),
            (Some(b), Some(cur)) => {
                if cmp_values(&b, cur) == Ordering::Less {
                    lebesgue = Some(b);
                }
            }
        }
    }
    Ok(CoverStats {
        order,
        mesh,
        lebesgue,
        uncovered,
    })
}

/// Distance matrix of interior ground points in the space's own metric (exact on trees).
pub fn interior_matrix(space: &Space, points: &[Point]) -> Result<Vec<Vec<Value>>> {
    for p in points {
        space.check_point(p)?;
    }
    let n = points.len();
    let mut m = vec![vec![Value::zero(); n]; n];
    for i in 0..n {
        for j in 0..i {
            let d = space::dist_unchecked(&points[i], &points[j]);
            m[j][i] = d.clone();
            m[i][j] = d;
        }
    }
    Ok(m)
}

/// CSV row helpers shared by the per-scale tables.
pub fn stats_csv_header() -> &'static str {
    "lambda,order,mesh,lebesgue,bound_mesh,bound_lebesgue,pass\n"
}

pub fn stats_csv_row(lambda: f64, stats: &CoverStats, bound_mesh: f64, bound_lebesgue: f64, pass: bool) -> String {
    let leb = match &stats.lebesgue {
        Some(v) => crate::fmt_real(v.to_f64()),
        None => "inf".to_string(),
    };
    format!(
        "{},{},{},{},{},{},{}\n",
        crate::fmt_real(lambda),
        stats.order,
        crate::fmt_real(stats.mesh.to_f64()),
        leb,
        crate::fmt_real(bound_mesh),
        crate::fmt_real(bound_lebesgue),
        pass
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{BoundaryMetric, MetricSpec};
    use crate::space::BoundaryPoint;
    use crate::value::int;
    use num_rational::BigRational;

    fn line(xs: &[f64]) -> (Space, Vec<ExtendedPoint>, Vec<Vec<Value>>) {
        let e1 = Space::euclidean(1).unwrap();
        let pts: Vec<Point> = xs.iter().map(|&x| Point::Euclidean(vec![x])).collect();
        let m = interior_matrix(&e1, &pts).unwrap();
        (e1, pts.into_iter().map(ExtendedPoint::Interior).collect(), m)
    }

    #[test]
    fn single_set_has_infinite_lebesgue() {
        let (e1, ground, m) = line(&[0.0, 1.0, 3.0]);
        let cover = Cover::new(&e1, ground, vec![CoverSet::new(vec![0, 1, 2], "all")]).unwrap();
        let s = cover_stats(&cover, &m, None).unwrap();
        assert_eq!(s.order, 1);
        assert_eq!(s.lebesgue, None);
        assert_eq!(s.mesh.to_f64(), 3.0);
    }

    #[test]
    fn partition_has_order_one() {
        let (e1, ground, m) = line(&[0.0, 1.0, 3.0, 4.5]);
        let sets = vec![CoverSet::new(vec![0, 1], "left"), CoverSet::new(vec![2, 3], "right")];
        let cover = Cover::new(&e1, ground, sets).unwrap();
        let s = cover_stats(&cover, &m, None).unwrap();
        assert_eq!(s.order, 1);
        assert_eq!(s.lebesgue_f64(), 2.0);
        assert_eq!(s.mesh.to_f64(), 1.5);
        assert_eq!(s.uncovered, 0);
    }

    #[test]
    fn bad_indices_rejected() {
        let (e1, ground, _) = line(&[0.0]);
        assert!(Cover::new(&e1, ground, vec![CoverSet::new(vec![1], "x")]).is_err());
    }

    #[test]
    fn depth_one_cylinders_under_dbar() {
        let t = Space::tree(4).unwrap();
        let mut pts = Vec::new();
        let mut sets = Vec::new();
        for l in 0..4u8 {
            let a = pts.len();
            pts.push(BoundaryPoint::tree(vec![l, 0], vec![1]).unwrap());
            pts.push(BoundaryPoint::tree(vec![l, 1], vec![2]).unwrap());
            sets.push(CoverSet::new(vec![a, a + 1], format!("cylinder {l}")));
        }
        let metric = BoundaryMetric::new(&t, MetricSpec::dbar(&t)).unwrap();
        let m = metric.matrix(&pts).unwrap();
        let ground = pts.into_iter().map(ExtendedPoint::Boundary).collect();
        let s = cover_stats(&Cover::new(&t, ground, sets).unwrap(), &m, None).unwrap();
        let two_over_e = Value::ExpDecay {
            coeff: int(2),
            exponent: BigRational::from_integer(1.into()),
        };
        assert_eq!(s.mesh, two_over_e);
        assert_eq!(s.lebesgue.unwrap().exact_cmp(&Value::Rational(int(2))), Some(Ordering::Equal));
        assert_eq!(s.order, 1);
    }
}
