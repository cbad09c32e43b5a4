//! Concrete CAT(0) model spaces: Euclidean space, regular trees and the hyperbolic plane.
//!
//! Every space carries a distinguished basepoint. Tree geometry is exact (rational
//! times and distances); the other two spaces work in `f64`.

pub mod euclidean;
pub mod hyperbolic;
pub mod tree;

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::value::{exact, ratio, to_f64, Value};
pub use hyperbolic::Polar;
pub use tree::{Letter, TreeEnd, TreePoint};

/// Tolerance on the norm of a Euclidean boundary direction.
pub const DIRECTION_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    Euclidean { dim: usize },
    Tree { valence: u32 },
    HyperbolicPlane,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Space {
    kind: SpaceKind,
    basepoint: Point,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Euclidean(Vec<f64>),
    Tree(TreePoint),
    Hyperbolic(Polar),
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryPoint {
    /// Unit direction vector.
    Euclidean(Vec<f64>),
    Tree(TreeEnd),
    /// Ideal point at angle `φ ∈ [0, 2π)` as seen from the pole.
    Hyperbolic(f64),
}

/// A point of the bordification `X ∪ ∂X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendedPoint {
    Interior(Point),
    Boundary(BoundaryPoint),
}

/// The unit-speed geodesic ray from `origin` asymptotic to `target`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ray {
    space: Space,
    origin: Point,
    target: BoundaryPoint,
}

impl Space {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("euclidean dimension must be >= 1".into()));
        }
        Ok(Space {
            kind: SpaceKind::Euclidean { dim },
            basepoint: Point::Euclidean(vec![0.0; dim]),
        })
    }

    pub fn tree(valence: u32) -> Result<Self> {
        if !(3..=256).contains(&valence) {
            return Err(Error::InvalidSpace(format!(
                "tree valence must lie in 3..=256, got {valence}"
            )));
        }
        Ok(Space {
            kind: SpaceKind::Tree { valence },
            basepoint: Point::Tree(TreePoint::root()),
        })
    }

    pub fn hyperbolic_plane() -> Self {
        Space {
            kind: SpaceKind::HyperbolicPlane,
            basepoint: Point::Hyperbolic(Polar::pole()),
        }
    }

    /// Same space with a different distinguished basepoint.
    pub fn with_basepoint(&self, basepoint: Point) -> Result<Self> {
        self.check_point(&basepoint)?;
        if let Point::Tree(p) = &basepoint {
            if !p.is_vertex() {
                return Err(Error::InvalidPoint(format!(
                    "tree basepoint must be a vertex, got {p}"
                )));
            }
        }
        Ok(Space {
            kind: self.kind.clone(),
            basepoint,
        })
    }

    pub fn kind(&self) -> &SpaceKind {
        &self.kind
    }

    pub fn basepoint(&self) -> &Point {
        &self.basepoint
    }

    pub fn valence(&self) -> Option<u32> {
        match self.kind {
            SpaceKind::Tree { valence } => Some(valence),
            _ => None,
        }
    }

    pub fn is_tree(&self) -> bool {
        matches!(self.kind, SpaceKind::Tree { .. })
    }

    /// Short identifier used in line-oriented records.
    pub fn id(&self) -> String {
        match self.kind {
            SpaceKind::Euclidean { dim } => format!("euclidean{dim}"),
            SpaceKind::Tree { valence } => format!("tree{valence}"),
            SpaceKind::HyperbolicPlane => "hyperbolic".into(),
        }
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        match (&self.kind, p) {
            (SpaceKind::Euclidean { dim }, Point::Euclidean(x)) => {
                if x.len() != *dim {
                    return Err(Error::SpaceMismatch(format!(
                        "point has {} coordinates, space has dimension {dim}",
                        x.len()
                    )));
                }
                if x.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidPoint("non-finite coordinate".into()));
                }
                Ok(())
            }
            (SpaceKind::Tree { valence }, Point::Tree(t)) => t.check(*valence),
            (SpaceKind::HyperbolicPlane, Point::Hyperbolic(h)) => {
                if !(h.r >= 0.0 && h.r.is_finite() && h.phi.is_finite()) {
                    return Err(Error::InvalidPoint(format!("bad polar point {h:?}")));
                }
                Ok(())
            }
            _ => Err(Error::SpaceMismatch(format!(
                "point {p} does not belong to {}",
                self.id()
            ))),
        }
    }

    pub fn check_boundary(&self, b: &BoundaryPoint) -> Result<()> {
        match (&self.kind, b) {
            (SpaceKind::Euclidean { dim }, BoundaryPoint::Euclidean(u)) => {
                if u.len() != *dim {
                    return Err(Error::SpaceMismatch(format!(
                        "direction has {} coordinates, space has dimension {dim}",
                        u.len()
                    )));
                }
                if (euclidean::norm(u) - 1.0).abs() > DIRECTION_TOL {
                    return Err(Error::InvalidPoint("direction is not a unit vector".into()));
                }
                Ok(())
            }
            (SpaceKind::Tree { valence }, BoundaryPoint::Tree(e)) => e.check(*valence),
            (SpaceKind::HyperbolicPlane, BoundaryPoint::Hyperbolic(phi)) => {
                if !phi.is_finite() {
                    return Err(Error::InvalidPoint("non-finite angle".into()));
                }
                Ok(())
            }
            _ => Err(Error::SpaceMismatch(format!(
                "boundary point {b} does not belong to {}",
                self.id()
            ))),
        }
    }

    pub fn check_extended(&self, z: &ExtendedPoint) -> Result<()> {
        match z {
            ExtendedPoint::Interior(p) => self.check_point(p),
            ExtendedPoint::Boundary(b) => self.check_boundary(b),
        }
    }
}

impl BoundaryPoint {
    /// Euclidean boundary point in the direction of `v` (normalized).
    pub fn direction(v: Vec<f64>) -> Result<Self> {
        let n = euclidean::norm(&v);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidPoint("zero or non-finite direction".into()));
        }
        Ok(BoundaryPoint::Euclidean(v.into_iter().map(|x| x / n).collect()))
    }

    /// Point of the circle at infinity of the Euclidean plane at angle `theta`.
    pub fn circle(theta: f64) -> Self {
        BoundaryPoint::Euclidean(vec![theta.cos(), theta.sin()])
    }

    pub fn ideal(phi: f64) -> Self {
        BoundaryPoint::Hyperbolic(hyperbolic::normalize_angle(phi))
    }

    pub fn tree(pre: Vec<Letter>, period: Vec<Letter>) -> Result<Self> {
        Ok(BoundaryPoint::Tree(TreeEnd::new(pre, period)?))
    }

    pub fn as_tree(&self) -> Option<&TreeEnd> {
        match self {
            BoundaryPoint::Tree(e) => Some(e),
            _ => None,
        }
    }

    /// Angle of a planar boundary point (Euclidean plane or hyperbolic plane).
    pub fn planar_angle(&self) -> Option<f64> {
        match self {
            BoundaryPoint::Euclidean(u) if u.len() == 2 => {
                Some(hyperbolic::normalize_angle(u[1].atan2(u[0])))
            }
            BoundaryPoint::Hyperbolic(phi) => Some(*phi),
            _ => None,
        }
    }
}

impl Point {
    pub fn as_tree(&self) -> Option<&TreePoint> {
        match self {
            Point::Tree(t) => Some(t),
            _ => None,
        }
    }
}

impl Ray {
    pub fn new(space: &Space, origin: Point, target: BoundaryPoint) -> Result<Self> {
        space.check_point(&origin)?;
        space.check_boundary(&target)?;
        Ok(Ray {
            space: space.clone(),
            origin,
            target,
        })
    }

    /// The ray from the space's basepoint.
    pub fn from_basepoint(space: &Space, target: BoundaryPoint) -> Result<Self> {
        Ray::new(space, space.basepoint().clone(), target)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn origin(&self) -> &Point {
        &self.origin
    }

    pub fn target(&self) -> &BoundaryPoint {
        &self.target
    }

    pub fn point(&self, t: f64) -> Result<Point> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::NegativeParameter(t));
        }
        Ok(raw_ray_point(&self.origin, &self.target, t))
    }

    /// Exact evaluation on trees; other spaces go through `f64`.
    pub fn point_exact(&self, t: &BigRational) -> Result<Point> {
        if t.is_negative() {
            return Err(Error::NegativeParameter(to_f64(t)));
        }
        match (&self.origin, &self.target) {
            (Point::Tree(o), BoundaryPoint::Tree(e)) => Ok(Point::Tree(tree::geodesic_point(
                o,
                tree::Path::Infinite(e),
                t,
            ))),
            _ => self.point(to_f64(t)),
        }
    }
}

fn raw_ray_point(origin: &Point, target: &BoundaryPoint, t: f64) -> Point {
    match (origin, target) {
        (Point::Euclidean(o), BoundaryPoint::Euclidean(u)) => Point::Euclidean(euclidean::along(o, u, t)),
        (Point::Tree(o), BoundaryPoint::Tree(e)) => {
            let t = exact(t).expect("finite ray parameter");
            Point::Tree(tree::geodesic_point(o, tree::Path::Infinite(e), &t))
        }
        (Point::Hyperbolic(o), BoundaryPoint::Hyperbolic(phi)) => {
            Point::Hyperbolic(hyperbolic::ray_point(*o, *phi, t))
        }
        _ => unreachable!("ray endpoints validated against one space"),
    }
}

/// `ray(t)`, the unit-speed parametrization.
pub fn ray_point(ray: &Ray, t: f64) -> Result<Point> {
    ray.point(t)
}

/// Distance in the space: exact rational on trees, `f64` elsewhere.
pub fn dist(space: &Space, p: &Point, q: &Point) -> Result<Value> {
    space.check_point(p)?;
    space.check_point(q)?;
    Ok(dist_unchecked(p, q))
}

pub(crate) fn dist_unchecked(p: &Point, q: &Point) -> Value {
    match (p, q) {
        (Point::Euclidean(a), Point::Euclidean(b)) => Value::Float(euclidean::dist(a, b)),
        (Point::Tree(a), Point::Tree(b)) => Value::Rational(tree::dist(a, b)),
        (Point::Hyperbolic(a), Point::Hyperbolic(b)) => Value::Float(hyperbolic::dist(*a, *b)),
        _ => unreachable!("points validated against one space"),
    }
}

pub(crate) fn dist_f64(p: &Point, q: &Point) -> f64 {
    dist_unchecked(p, q).to_f64()
}

/// Branch time of the basepoint rays to two distinct tree ends.
pub fn branch_time(space: &Space, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<BigRational> {
    branch_time_at(space, space.basepoint(), xi, eta)
}

/// Branch time of the rays from `origin` to two distinct tree ends.
pub fn branch_time_at(
    space: &Space,
    origin: &Point,
    xi: &BoundaryPoint,
    eta: &BoundaryPoint,
) -> Result<BigRational> {
    space.check_point(origin)?;
    space.check_boundary(xi)?;
    space.check_boundary(eta)?;
    match (origin, xi, eta) {
        (Point::Tree(o), BoundaryPoint::Tree(a), BoundaryPoint::Tree(b)) => {
            tree::branch_time_from(o, a, b)
        }
        _ => Err(Error::Unsupported(format!(
            "branch time is only defined on trees, not on {}",
            space.id()
        ))),
    }
}

/// The unique ray from `new_origin` asymptotic to `xi`.
pub fn rebase_ray(space: &Space, new_origin: &Point, xi: &BoundaryPoint) -> Result<Ray> {
    Ray::new(space, new_origin.clone(), xi.clone())
}

/// Point at distance `min(r, d(x0, z))` on the geodesic from `x0` towards `z`.
pub fn project_to_sphere(space: &Space, x0: &Point, z: &ExtendedPoint, r: f64) -> Result<Point> {
    if !(r > 0.0) {
        return Err(invalid("r", format!("projection radius must be > 0, got {r}")));
    }
    space.check_point(x0)?;
    space.check_extended(z)?;
    Ok(geodesic_point(x0, z, r))
}

/// `project_to_sphere` without validation; also accepts `r = 0`.
pub(crate) fn geodesic_point(x0: &Point, z: &ExtendedPoint, r: f64) -> Point {
    match (x0, z) {
        (_, ExtendedPoint::Boundary(b)) => raw_ray_point(x0, b, r),
        (Point::Euclidean(o), ExtendedPoint::Interior(Point::Euclidean(x))) => {
            let d = euclidean::dist(o, x);
            if r >= d {
                Point::Euclidean(x.clone())
            } else {
                let dir: Vec<f64> = x.iter().zip(o).map(|(a, b)| (a - b) / d).collect();
                Point::Euclidean(euclidean::along(o, &dir, r))
            }
        }
        (Point::Tree(o), ExtendedPoint::Interior(Point::Tree(x))) => {
            let r = exact(r).expect("finite radius");
            Point::Tree(tree::geodesic_point(o, tree::Path::Finite(x), &r))
        }
        (Point::Hyperbolic(o), ExtendedPoint::Interior(Point::Hyperbolic(x))) => {
            Point::Hyperbolic(hyperbolic::segment_point(*o, *x, r))
        }
        _ => unreachable!("points validated against one space"),
    }
}

/// Exact tree version of [`geodesic_point`].
pub(crate) fn tree_geodesic_point(x0: &TreePoint, z: &ExtendedPoint, r: &BigRational) -> TreePoint {
    match z {
        ExtendedPoint::Interior(Point::Tree(x)) => tree::geodesic_point(x0, tree::Path::Finite(x), r),
        ExtendedPoint::Boundary(BoundaryPoint::Tree(e)) => {
            tree::geodesic_point(x0, tree::Path::Infinite(e), r)
        }
        _ => unreachable!("tree points only"),
    }
}

/// Distance from `x0` to `z`, infinite for boundary points.
pub(crate) fn radius_of(x0: &Point, z: &ExtendedPoint) -> f64 {
    match z {
        ExtendedPoint::Interior(p) => dist_f64(x0, p),
        ExtendedPoint::Boundary(_) => f64::INFINITY,
    }
}

/// `t ↦ d(α(t), β(t))` for the rays from `origin` to `xi` and `eta`, in `f64`.
///
/// This is the generic path used by the root finder and the quadrature; it only
/// evaluates rays and distances, never a closed form for the separation.
pub(crate) fn separation_fn<'a>(
    origin: &'a Point,
    xi: &'a BoundaryPoint,
    eta: &'a BoundaryPoint,
) -> Box<dyn Fn(f64) -> f64 + 'a> {
    match (origin, xi, eta) {
        (Point::Tree(o), BoundaryPoint::Tree(a), BoundaryPoint::Tree(b)) => {
            let ra = tree::FloatRay::new(o, a);
            let rb = tree::FloatRay::new(o, b);
            Box::new(move |t| ra.separation(&rb, t))
        }
        (Point::Euclidean(o), BoundaryPoint::Euclidean(u), BoundaryPoint::Euclidean(v)) => {
            Box::new(move |t| euclidean::dist(&euclidean::along(o, u, t), &euclidean::along(o, v, t)))
        }
        (Point::Hyperbolic(o), BoundaryPoint::Hyperbolic(a), BoundaryPoint::Hyperbolic(b)) => {
            let (o, a, b) = (*o, *a, *b);
            Box::new(move |t| {
                hyperbolic::dist(hyperbolic::ray_point(o, a, t), hyperbolic::ray_point(o, b, t))
            })
        }
        _ => unreachable!("validated by caller"),
    }
}

/// `r ↦ d(c'_x(r), c'_y(r))` where `c'` follows the geodesic from `x0` and freezes at interior endpoints.
pub(crate) fn extended_separation_fn<'a>(
    x0: &'a Point,
    x: &'a ExtendedPoint,
    y: &'a ExtendedPoint,
) -> Box<dyn Fn(f64) -> f64 + 'a> {
    match (x, y) {
        (ExtendedPoint::Boundary(a), ExtendedPoint::Boundary(b)) => separation_fn(x0, a, b),
        _ => Box::new(move |r| dist_f64(&geodesic_point(x0, x, r), &geodesic_point(x0, y, r))),
    }
}

fn tree_letter<R: Rng>(rng: &mut R, valence: u32, index: usize) -> Letter {
    rng.random_range(0..tree::letter_count(valence, index)) as Letter
}

/// Deterministic sample of `n` boundary points.
///
/// Directions and angles are uniform; tree ends get a geometric-length
/// preperiod and a period of length 1 to 3, with duplicates resampled.
pub fn sample_boundary(space: &Space, n: usize, seed: u64) -> Result<Vec<BoundaryPoint>> {
    if n == 0 {
        return Err(invalid("n", "boundary sample must be nonempty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    match space.kind {
        SpaceKind::Euclidean { dim } => {
            while out.len() < n {
                let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                if euclidean::norm(&v) > 1e-9 {
                    out.push(BoundaryPoint::direction(v)?);
                }
            }
        }
        SpaceKind::HyperbolicPlane => {
            for _ in 0..n {
                out.push(BoundaryPoint::ideal(rng.random_range(0.0..TAU)));
            }
        }
        SpaceKind::Tree { valence } => {
            let mut seen = HashSet::new();
            while out.len() < n {
                let end = random_tree_end(&mut rng, valence);
                if seen.insert(end.clone()) {
                    out.push(BoundaryPoint::Tree(end));
                }
            }
        }
    }
    Ok(out)
}

fn random_tree_end<R: Rng>(rng: &mut R, valence: u32) -> TreeEnd {
    let mut pre_len = 0;
    while pre_len < 24 && rng.random_bool(0.75) {
        pre_len += 1;
    }
    let period_len = rng.random_range(1..=3);
    let pre: Vec<Letter> = (0..pre_len).map(|i| tree_letter(rng, valence, i)).collect();
    let period: Vec<Letter> = (0..period_len).map(|_| tree_letter(rng, valence, 1)).collect();
    TreeEnd::new(pre, period).expect("nonempty period")
}

/// Deterministic sample of `n` interior points at distance `< radius` from the basepoint.
///
/// Tree samples sit on a 1/8 grid of depths so that they stay exact.
pub fn sample_interior(space: &Space, radius: f64, n: usize, seed: u64) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(invalid("n", "interior sample must be nonempty"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid("radius", format!("window radius must be > 0, got {radius}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = space.basepoint().clone();
    let mut out = Vec::with_capacity(n);
    match (&space.kind, &base) {
        (SpaceKind::Euclidean { dim }, Point::Euclidean(o)) => {
            while out.len() < n {
                let v: Vec<f64> = (0..*dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let nv = euclidean::norm(&v);
                if nv < 1e-9 {
                    continue;
                }
                let u: f64 = rng.random();
                let r = radius * u.powf(1.0 / *dim as f64);
                let dir: Vec<f64> = v.iter().map(|x| x / nv).collect();
                out.push(Point::Euclidean(euclidean::along(o, &dir, r)));
            }
        }
        (SpaceKind::HyperbolicPlane, Point::Hyperbolic(o)) => {
            for _ in 0..n {
                let r = rng.random_range(0.0..radius);
                let phi = rng.random_range(0.0..TAU);
                out.push(Point::Hyperbolic(hyperbolic::ray_point(*o, phi, r)));
            }
        }
        (SpaceKind::Tree { valence }, Point::Tree(o)) => {
            let steps = (radius * 8.0).ceil() as i64;
            for _ in 0..n {
                let mut k = rng.random_range(0..steps);
                if k as f64 / 8.0 >= radius {
                    k = steps - 1;
                }
                let end = random_tree_end(&mut rng, *valence);
                let s = ratio(k, 8);
                out.push(Point::Tree(tree::geodesic_point(
                    o,
                    tree::Path::Infinite(&end),
                    &s,
                )));
            }
        }
        _ => unreachable!("basepoint matches space kind"),
    }
    Ok(out)
}

fn fmt_floats(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{t}`")))
        })
        .collect()
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Euclidean(x) => write!(f, "e:{}", fmt_floats(x)),
            Point::Tree(t) => write!(f, "t:{t}"),
            Point::Hyperbolic(h) => write!(f, "h:{},{}", h.r, h.phi),
        }
    }
}

impl FromStr for Point {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("point `{s}` lacks a kind tag")))?;
        match tag {
            "e" => Ok(Point::Euclidean(parse_floats(body)?)),
            "t" => Ok(Point::Tree(body.parse()?)),
            "h" => match parse_floats(body)?.as_slice() {
                [r, phi] => Ok(Point::Hyperbolic(Polar::new(*r, *phi))),
                _ => Err(Error::Parse(format!("hyperbolic point `{s}` needs r,phi"))),
            },
            _ => Err(Error::Parse(format!("unknown point kind `{tag}`"))),
        }
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPoint::Euclidean(u) => write!(f, "e:{}", fmt_floats(u)),
            BoundaryPoint::Tree(e) => write!(f, "t:{e}"),
            BoundaryPoint::Hyperbolic(phi) => write!(f, "h:{phi}"),
        }
    }
}

impl FromStr for BoundaryPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("boundary point `{s}` lacks a kind tag")))?;
        match tag {
            "e" => Ok(BoundaryPoint::Euclidean(parse_floats(body)?)),
            "t" => Ok(BoundaryPoint::Tree(body.parse()?)),
            "h" => Ok(BoundaryPoint::ideal(
                body.parse()
                    .map_err(|_| Error::Parse(format!("bad angle `{body}`")))?,
            )),
            _ => Err(Error::Parse(format!("unknown boundary kind `{tag}`"))),
        }
    }
}

macro_rules! serde_via_str {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_via_str!(Point);
serde_via_str!(BoundaryPoint);

/// Key-value text form: one `key=value` per line (`kind`, parameters, `basepoint`).
impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SpaceKind::Euclidean { dim } => writeln!(f, "kind=euclidean\ndim={dim}")?,
            SpaceKind::Tree { valence } => writeln!(f, "kind=tree\nvalence={valence}")?,
            SpaceKind::HyperbolicPlane => writeln!(f, "kind=hyperbolic")?,
        }
        writeln!(f, "basepoint={}", self.basepoint)
    }
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut kind = None;
        let mut dim = None;
        let mut valence = None;
        let mut basepoint = None;
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{line}`")))?;
            let num = |v: &str| {
                v.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad integer `{v}` for `{k}`")))
            };
            match k.trim() {
                "kind" => kind = Some(v.trim().to_string()),
                "dim" => dim = Some(num(v)?),
                "valence" => valence = Some(num(v)?),
                "basepoint" => basepoint = Some(v.trim().parse::<Point>()?),
                other => return Err(Error::Parse(format!("unknown space key `{other}`"))),
            }
        }
        let space = match kind.as_deref() {
            Some("euclidean") => Space::euclidean(
                dim.ok_or_else(|| Error::Parse("euclidean space needs dim".into()))? as usize,
            )?,
            Some("tree") => {
                Space::tree(valence.ok_or_else(|| Error::Parse("tree needs valence".into()))?)?
            }
            Some("hyperbolic") => Space::hyperbolic_plane(),
            Some(other) => return Err(Error::Parse(format!("unknown space kind `{other}`"))),
            None => return Err(Error::Parse("space descriptor lacks `kind`".into())),
        };
        match basepoint {
            Some(b) => space.with_basepoint(b),
            None => Ok(space),
        }
    }
}

/// One line per boundary point: `space_id<TAB>representation`.
pub fn boundary_records(space: &Space, points: &[BoundaryPoint]) -> String {
    let id = space.id();
    points.iter().map(|p| format!("{id}\t{p}\n")).collect()
}

pub fn parse_boundary_records(space: &Space, text: &str) -> Result<Vec<BoundaryPoint>> {
    let id = space.id();
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let (sid, repr) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse(format!("record `{line}` lacks a tab")))?;
            if sid != id {
                return Err(Error::SpaceMismatch(format!(
                    "record for `{sid}` read into `{id}`"
                )));
            }
            let p: BoundaryPoint = repr.parse()?;
            space.check_boundary(&p)?;
            Ok(p)
        })
        .collect()
}

/// Exact tree distance from the basepoint, or `f64` elsewhere.
pub fn radius(space: &Space, p: &Point) -> Result<Value> {
    dist(space, space.basepoint(), p)
}
