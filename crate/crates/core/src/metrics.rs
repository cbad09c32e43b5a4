//! The boundary metrics `d_{A,x₀}` and `d̄_{x₀}`, the Gromov product, and cone neighbourhoods.
//!
//! For two boundary points let `f(t) = d(α(t), β(t))` where `α`, `β` are the rays
//! from the basepoint. `f` is convex with `f(0) = 0`, so
//!
//! * `d_A = 1/a` where `a` solves `f(a) = A` (and `0` when the points coincide);
//! * `d̄ = ∫₀^∞ f(r) e^{-r} dr`.
//!
//! On trees `f(t) = 2 max(0, t - b)` with `b` the branch time, which gives the
//! exact forms `1/(b + A/2)` and `2e^{-b}`. The generic kernels (bisection and
//! adaptive Simpson) only evaluate rays and distances and serve as the
//! independent route on trees.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric;
use crate::space::{self, BoundaryPoint, ExtendedPoint, Point, Ray, Space};
use crate::value::{exact, int, to_f64, Value};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `d_{A,x₀}` with separation parameter `A > 0`.
    #[serde(rename = "d_a")]
    DA { a: f64 },
    /// `d̄_{x₀}`.
    #[serde(rename = "dbar")]
    DBar,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::DA { .. } => "d_a",
            Family::DBar => "dbar",
        }
    }

    pub fn parameter(&self) -> Option<f64> {
        match self {
            Family::DA { a } => Some(*a),
            Family::DBar => None,
        }
    }
}

/// Which boundary metric to evaluate, from which basepoint, to what tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub family: Family,
    pub basepoint: Point,
    pub tol: f64,
}

/// Closed forms on trees, or always the generic root finder / quadrature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Kernel {
    #[default]
    Auto,
    Generic,
}

impl MetricSpec {
    pub fn d_a(space: &Space, a: f64) -> Result<Self> {
        let spec = MetricSpec {
            family: Family::DA { a },
            basepoint: space.basepoint().clone(),
            tol: DEFAULT_TOL,
        };
        spec.validate(space)?;
        Ok(spec)
    }

    pub fn dbar(space: &Space) -> Self {
        MetricSpec {
            family: Family::DBar,
            basepoint: space.basepoint().clone(),
            tol: DEFAULT_TOL,
        }
    }

    pub fn with_basepoint(mut self, basepoint: Point) -> Self {
        self.basepoint = basepoint;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self, space: &Space) -> Result<()> {
        if let Family::DA { a } = self.family {
            if !(a > 0.0 && a.is_finite()) {
                return Err(invalid("A", format!("must be a positive length, got {a}")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tol", format!("must be positive, got {}", self.tol)));
        }
        space.check_point(&self.basepoint)
    }

    /// Quadrature horizon `T` with tail bound `2(T+1)e^{-T} < tol/2`.
    pub fn tail_horizon(&self) -> f64 {
        numeric::tail_horizon(0.5 * self.tol, 0.0)
    }

    fn a_exact(&self) -> Option<BigRational> {
        match self.family {
            Family::DA { a } => exact(a),
            Family::DBar => None,
        }
    }
}

fn check_pair(space: &Space, spec: &MetricSpec, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<()> {
    spec.validate(space)?;
    space.check_boundary(xi)?;
    space.check_boundary(eta)
}

fn tree_branch(spec: &MetricSpec, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Option<Result<BigRational>> {
    match (&spec.basepoint, xi, eta) {
        (Point::Tree(o), BoundaryPoint::Tree(a), BoundaryPoint::Tree(b)) => {
            Some(space::tree::branch_time_from(o, a, b))
        }
        _ => None,
    }
}

/// `d_{A,x₀}(ξ, η)`: exact `1/(b + A/2)` on trees, root finding elsewhere.
pub fn eval_da(space: &Space, spec: &MetricSpec, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<Value> {
    check_pair(space, spec, xi, eta)?;
    let Family::DA { .. } = spec.family else {
        return Err(invalid("family", "eval_da needs a d_A spec"));
    };
    if xi == eta {
        return Ok(Value::zero());
    }
    if let Some(b) = tree_branch(spec, xi, eta) {
        let half_a = spec.a_exact().expect("validated A") / int(2);
        return Ok(Value::Rational(BigRational::one() / (b? + half_a)));
    }
    eval_da_generic(space, spec, xi, eta).map(Value::Float)
}

/// `d_{A,x₀}` by bracketing and bisection on `f(a) = A`, on any space.
///
/// The bisection runs to relative width `tol·min(1, A)/4` on `a`, which keeps the
/// absolute error of `1/a <= 2/A` below `tol`.
pub fn eval_da_generic(
    space: &Space,
    spec: &MetricSpec,
    xi: &BoundaryPoint,
    eta: &BoundaryPoint,
) -> Result<f64> {
    check_pair(space, spec, xi, eta)?;
    let Family::DA { a: big_a } = spec.family else {
        return Err(invalid("family", "eval_da_generic needs a d_A spec"));
    };
    if xi == eta {
        return Ok(0.0);
    }
    let f = space::separation_fn(&spec.basepoint, xi, eta);
    let rel = 0.25 * spec.tol * big_a.min(1.0);
    let hi = numeric::solve_increasing(&f, big_a, rel)?;
    // Midpoint of the final bracket [hi(1 - rel), hi] up to rounding.
    let a = hi * (1.0 - 0.5 * rel);
    Ok(1.0 / a)
}

/// `d̄_{x₀}(ξ, η)`: exact `2e^{-b}` on trees, quadrature elsewhere.
pub fn eval_dbar(space: &Space, spec: &MetricSpec, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<Value> {
    check_pair(space, spec, xi, eta)?;
    if xi == eta {
        return Ok(Value::zero());
    }
    if let Some(b) = tree_branch(spec, xi, eta) {
        return Ok(Value::ExpDecay {
            coeff: int(2),
            exponent: b?,
        });
    }
    eval_dbar_quadrature(space, spec, xi, eta).map(Value::Float)
}

/// `∫₀^T f(r) e^{-r} dr` by adaptive Simpson to `tol/2`, with `T` from the tail bound.
pub fn eval_dbar_quadrature(
    space: &Space,
    spec: &MetricSpec,
    xi: &BoundaryPoint,
    eta: &BoundaryPoint,
) -> Result<f64> {
    check_pair(space, spec, xi, eta)?;
    if xi == eta {
        return Ok(0.0);
    }
    let f = space::separation_fn(&spec.basepoint, xi, eta);
    let g = |r: f64| f(r) * (-r).exp();
    Ok(numeric::adaptive_simpson(&g, 0.0, spec.tail_horizon(), 0.5 * spec.tol))
}

/// `d̄_{x₀}` on `X ∪ ∂X`: interior points follow the geodesic from `x₀` and then stay put.
pub fn eval_dbar_extended(space: &Space, spec: &MetricSpec, x: &ExtendedPoint, y: &ExtendedPoint) -> Result<f64> {
    spec.validate(space)?;
    space.check_extended(x)?;
    space.check_extended(y)?;
    if x == y {
        return Ok(0.0);
    }
    if let (ExtendedPoint::Boundary(a), ExtendedPoint::Boundary(b)) = (x, y) {
        return eval_dbar(space, spec, a, b).map(|v| v.to_f64());
    }
    let x0 = &spec.basepoint;
    let rx = space::radius_of(x0, x);
    let ry = space::radius_of(x0, y);
    let f = space::extended_separation_fn(x0, x, y);
    let g = |r: f64| f(r) * (-r).exp();
    let (near, far) = (rx.min(ry), rx.max(ry));
    if far.is_finite() {
        // Both frozen beyond `far`: the tail is d(x, y) e^{-far} exactly.
        let breaks = [0.0, near, far];
        let head = numeric::adaptive_simpson_panels(&g, &breaks, spec.tol);
        let dxy = f(far);
        return Ok(head + dxy * (-far).exp());
    }
    // One interior endpoint at radius `near`: f(r) <= r + near.
    let horizon = numeric::tail_horizon(0.5 * spec.tol, 0.5 * near).max(near + 1.0);
    let breaks = [0.0, near, horizon];
    Ok(numeric::adaptive_simpson_panels(&g, &breaks, 0.5 * spec.tol))
}

/// Either metric according to `spec.family`.
pub fn evaluate(space: &Space, spec: &MetricSpec, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<Value> {
    match spec.family {
        Family::DA { .. } => eval_da(space, spec, xi, eta),
        Family::DBar => eval_dbar(space, spec, xi, eta),
    }
}

/// Either metric through the generic kernels only.
pub fn evaluate_generic(space: &Space, spec: &MetricSpec, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<f64> {
    match spec.family {
        Family::DA { .. } => eval_da_generic(space, spec, xi, eta),
        Family::DBar => eval_dbar_quadrature(space, spec, xi, eta),
    }
}

/// A boundary metric bound to a space, ready for repeated evaluation.
#[derive(Clone, Debug)]
pub struct BoundaryMetric {
    space: Space,
    spec: MetricSpec,
    kernel: Kernel,
}

impl BoundaryMetric {
    pub fn new(space: &Space, spec: MetricSpec) -> Result<Self> {
        spec.validate(space)?;
        Ok(BoundaryMetric {
            space: space.clone(),
            spec,
            kernel: Kernel::Auto,
        })
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    /// Uses exact arithmetic throughout (tree closed forms).
    pub fn is_exact(&self) -> bool {
        self.kernel == Kernel::Auto && self.space.is_tree()
    }

    pub fn distance(&self, xi: &BoundaryPoint, eta: &BoundaryPoint) -> Result<Value> {
        match self.kernel {
            Kernel::Auto => evaluate(&self.space, &self.spec, xi, eta),
            Kernel::Generic => evaluate_generic(&self.space, &self.spec, xi, eta).map(Value::Float),
        }
    }

    /// Distances for the listed index pairs, evaluated in parallel.
    pub fn pair_distances(
        &self,
        points: &[BoundaryPoint],
        pairs: &[(usize, usize)],
    ) -> Result<HashMap<(usize, usize), Value>> {
        pairs
            .par_iter()
            .map(|&(i, j)| Ok(((i, j), self.distance(&points[i], &points[j])?)))
            .collect()
    }

    /// Symmetric matrix of pairwise distances.
    pub fn matrix(&self, points: &[BoundaryPoint]) -> Result<Vec<Vec<Value>>> {
        let n = points.len();
        let pairs: Vec<_> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        let mut found = self.pair_distances(points, &pairs)?;
        let mut m = vec![vec![Value::zero(); n]; n];
        for (i, j) in pairs {
            let d = found.remove(&(i, j)).expect("computed above");
            m[j][i] = d.clone();
            m[i][j] = d;
        }
        Ok(m)
    }
}

/// Largest value of `t - f(t)/2` tried before declaring divergence is at `t = 2^MAX_DOUBLINGS`.
pub const MAX_DOUBLINGS: i32 = 60;

/// Gromov product `(ξ, η)_{x₀}` of two boundary points.
///
/// Exact branch time on trees. Elsewhere `t - f(t)/2` is evaluated at `t = 2^j`,
/// `j = 0..=60`, and returned once two successive values differ by less than
/// `tol`; otherwise the product is reported as divergent (as on Euclidean space
/// for non-opposite directions). Equal points give `+∞`.
pub fn gromov_product(space: &Space, x0: &Point, xi: &BoundaryPoint, eta: &BoundaryPoint, tol: f64) -> Result<f64> {
    space.check_point(x0)?;
    space.check_boundary(xi)?;
    space.check_boundary(eta)?;
    if xi == eta {
        return Ok(f64::INFINITY);
    }
    if let Some(b) = gromov_product_exact(space, x0, xi, eta)? {
        return Ok(to_f64(&b));
    }
    let f = space::separation_fn(x0, xi, eta);
    let mut prev = f64::NAN;
    let mut t = 1.0;
    for j in 0..=MAX_DOUBLINGS {
        t = 2f64.powi(j);
        let g = t - 0.5 * f(t);
        if (g - prev).abs() < tol {
            return Ok(g.max(0.0));
        }
        prev = g;
    }
    Err(Error::DivergentProduct { horizon: t, last: prev })
}

/// The exact Gromov product on trees, `None` on the floating spaces.
pub fn gromov_product_exact(
    space: &Space,
    x0: &Point,
    xi: &BoundaryPoint,
    eta: &BoundaryPoint,
) -> Result<Option<BigRational>> {
    if !space.is_tree() {
        return Ok(None);
    }
    space::branch_time_at(space, x0, xi, eta).map(Some)
}

/// The cone-topology basic set `U(c, r, ε)` around the ray `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeNeighborhood {
    ray: Ray,
    r: f64,
    eps: f64,
}

impl ConeNeighborhood {
    pub fn new(ray: Ray, r: f64, eps: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid("r", format!("must be positive, got {r}")));
        }
        if !(eps > 0.0) {
            return Err(invalid("eps", format!("must be positive, got {eps}")));
        }
        Ok(ConeNeighborhood { ray, r, eps })
    }

    pub fn ray(&self) -> &Ray {
        &self.ray
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

/// Membership of `z` in `U(c, r, ε)`: beyond radius `r` from `c(0)`, and projecting
/// to within `ε` of `c(r)`. Exact on trees.
pub fn cone_contains(nbhd: &ConeNeighborhood, z: &ExtendedPoint) -> Result<bool> {
    let space = nbhd.ray.space();
    space.check_extended(z)?;
    let c0 = nbhd.ray.origin();
    if let (Point::Tree(o), Some(r), Some(eps)) = (c0, exact(nbhd.r), exact(nbhd.eps)) {
        if let ExtendedPoint::Interior(Point::Tree(x)) = z {
            if space::tree::dist(o, x) <= r {
                return Ok(false);
            }
        }
        let proj = space::tree_geodesic_point(o, z, &r);
        let Point::Tree(cr) = nbhd.ray.point_exact(&r)? else {
            unreachable!("tree ray yields tree points")
        };
        return Ok(space::tree::dist(&proj, &cr) < eps);
    }
    if let ExtendedPoint::Interior(x) = z {
        if space::dist_f64(c0, x) <= nbhd.r {
            return Ok(false);
        }
    }
    let proj = space::geodesic_point(c0, z, nbhd.r);
    let cr = nbhd.ray.point(nbhd.r)?;
    Ok(space::dist_f64(&proj, &cr) < nbhd.eps)
}

impl std::fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.family {
            Family::DA { a } => write!(f, "d_{{{a},{}}}", self.basepoint),
            Family::DBar => write!(f, "dbar_{{{}}}", self.basepoint),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::TreePoint;
    use crate::value::ratio;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn t4() -> Space {
        Space::tree(4).unwrap()
    }

    fn end(pre: &[u8], period: &[u8]) -> BoundaryPoint {
        BoundaryPoint::tree(pre.to_vec(), period.to_vec()).unwrap()
    }

    /// Rays through `n` shared letters of zeros, then splitting into 1s and 2s.
    fn branching_at(n: usize) -> (BoundaryPoint, BoundaryPoint) {
        let pre = vec![0u8; n];
        (end(&pre, &[1]), end(&pre, &[2]))
    }

    #[test]
    fn d1_on_t4_is_reciprocal_of_branch_plus_half() {
        let t = t4();
        let spec = MetricSpec::d_a(&t, 1.0).unwrap();
        for n in 0..10 {
            let (a, b) = branching_at(n);
            let v = eval_da(&t, &spec, &a, &b).unwrap();
            assert_eq!(v, Value::Rational(BigRational::one() / (int(n as i64) + ratio(1, 2))));
        }
        let (a, _) = branching_at(3);
        assert_eq!(eval_da(&t, &spec, &a, &a).unwrap(), Value::zero());
    }

    #[test]
    fn euclidean_da_matches_chord_formula() {
        let e2 = Space::euclidean(2).unwrap();
        for big_a in [0.5, 1.0, 3.0] {
            let spec = MetricSpec::d_a(&e2, big_a).unwrap();
            for theta in [0.1, 1.0, 2.0, PI] {
                let v = eval_da(&e2, &spec, &BoundaryPoint::circle(0.0), &BoundaryPoint::circle(theta))
                    .unwrap()
                    .to_f64();
                let oracle = 2.0 * (0.5 * theta).sin() / big_a;
                assert!((v - oracle).abs() < 1e-10, "A={big_a} θ={theta}: {v} vs {oracle}");
            }
        }
    }

    #[test]
    fn dbar_examples() {
        let t = t4();
        let spec = MetricSpec::dbar(&t);
        let (a, b) = branching_at(0);
        assert_eq!(eval_dbar(&t, &spec, &a, &b).unwrap().to_f64(), 2.0);
        let (a, b) = branching_at(3);
        let v = eval_dbar(&t, &spec, &a, &b).unwrap();
        assert!((v.to_f64() - 2.0 * (-3f64).exp()).abs() < 1e-15);
        let q = eval_dbar_quadrature(&t, &spec, &a, &b).unwrap();
        assert!((q - 2.0 * (-3f64).exp()).abs() < 1e-10);

        let e2 = Space::euclidean(2).unwrap();
        let spec = MetricSpec::dbar(&e2);
        let theta = 1.3;
        let v = eval_dbar(&e2, &spec, &BoundaryPoint::circle(0.2), &BoundaryPoint::circle(0.2 + theta))
            .unwrap()
            .to_f64();
        assert!((v - 2.0 * (0.5 * theta).sin()).abs() < 1e-10);
    }

    #[test]
    fn extended_dbar_examples() {
        let t = t4();
        let spec = MetricSpec::dbar(&t);
        let xi = end(&[], &[0]);
        let x0 = ExtendedPoint::Interior(t.basepoint().clone());
        let v = eval_dbar_extended(&t, &spec, &x0, &ExtendedPoint::Boundary(xi.clone())).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{v}");
        for s in [0.5, 2.0, 3.25] {
            let ray = Ray::from_basepoint(&t, xi.clone()).unwrap();
            let x = ExtendedPoint::Interior(ray.point(s).unwrap());
            let v = eval_dbar_extended(&t, &spec, &x, &ExtendedPoint::Boundary(xi.clone())).unwrap();
            assert!((v - (-s).exp()).abs() < 1e-10, "s={s}: {v}");
        }
        assert_eq!(eval_dbar_extended(&t, &spec, &x0, &x0).unwrap(), 0.0);
        // Two interior points on different branches at depth 1: ∫₀¹ 2r e^{-r} + 2e^{-1}.
        let p = ExtendedPoint::Interior(Point::Tree(TreePoint::vertex(vec![0])));
        let q = ExtendedPoint::Interior(Point::Tree(TreePoint::vertex(vec![1])));
        let v = eval_dbar_extended(&t, &spec, &p, &q).unwrap();
        let oracle = 2.0 * (1.0 - 2.0 * (-1f64).exp()) + 2.0 * (-1f64).exp();
        assert!((v - oracle).abs() < 1e-10);
    }

    #[test]
    fn gromov_product_examples() {
        let t = t4();
        let (a, b) = branching_at(3);
        assert_eq!(gromov_product(&t, t.basepoint(), &a, &b, 1e-10).unwrap(), 3.0);
        assert_eq!(
            gromov_product(&t, t.basepoint(), &a, &a, 1e-10).unwrap(),
            f64::INFINITY
        );
        let h = Space::hyperbolic_plane();
        let g = gromov_product(
            &h,
            h.basepoint(),
            &BoundaryPoint::ideal(0.0),
            &BoundaryPoint::ideal(PI),
            1e-10,
        )
        .unwrap();
        assert!(g.abs() < 1e-10);
        // From the pole, the product converges to -ln sin(Δφ/2).
        let g = gromov_product(
            &h,
            h.basepoint(),
            &BoundaryPoint::ideal(0.3),
            &BoundaryPoint::ideal(1.0),
            1e-10,
        )
        .unwrap();
        assert!((g + (0.35f64).sin().ln()).abs() < 1e-8);
        let e2 = Space::euclidean(2).unwrap();
        let r = gromov_product(
            &e2,
            e2.basepoint(),
            &BoundaryPoint::circle(0.0),
            &BoundaryPoint::circle(1.0),
            1e-10,
        );
        assert!(matches!(r, Err(Error::DivergentProduct { .. })));
    }

    #[test]
    fn cone_membership_examples() {
        let t = t4();
        let c = Ray::from_basepoint(&t, end(&[], &[0])).unwrap();
        let own = ExtendedPoint::Boundary(end(&[], &[0]));
        for (r, eps) in [(1.0, 0.1), (5.0, 1e-6), (0.5, 3.0)] {
            let n = ConeNeighborhood::new(c.clone(), r, eps).unwrap();
            assert!(cone_contains(&n, &own).unwrap());
        }
        let z = ExtendedPoint::Boundary(end(&[0, 0], &[1]));
        let n = ConeNeighborhood::new(c.clone(), 1.0, 1e-9).unwrap();
        assert!(cone_contains(&n, &z).unwrap());
        let n = ConeNeighborhood::new(c, 3.0, 1.5).unwrap();
        assert!(!cone_contains(&n, &z).unwrap());

        let e2 = Space::euclidean(2).unwrap();
        let c = Ray::from_basepoint(&e2, BoundaryPoint::circle(0.0)).unwrap();
        let n = ConeNeighborhood::new(c.clone(), 1.0, 0.5).unwrap();
        let z = ExtendedPoint::Interior(Point::Euclidean(vec![10.0, 10.0]));
        assert!(!cone_contains(&n, &z).unwrap());
        assert!(2.0 * (FRAC_PI_4 / 2.0).sin() > 0.5);
        let n = ConeNeighborhood::new(c, 1.0, 0.8).unwrap();
        assert!(cone_contains(&n, &z).unwrap());
        // interior points inside the ball are excluded
        let near = ExtendedPoint::Interior(Point::Euclidean(vec![0.5, 0.0]));
        assert!(!cone_contains(&n, &near).unwrap());
    }

    #[test]
    fn spec_validation() {
        let t = t4();
        assert!(MetricSpec::d_a(&t, 0.0).is_err());
        assert!(MetricSpec::d_a(&t, -1.0).is_err());
        let bad = MetricSpec::dbar(&t).with_tol(0.0);
        assert!(bad.validate(&t).is_err());
        let wrong = MetricSpec::dbar(&Space::euclidean(2).unwrap());
        assert!(wrong.validate(&t).is_err());
    }
}
