//! Pushing an interior ball cover out to the boundary at time `1/λ`.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{cover_stats, BallFamily, Center, Cover, CoverSet, CoverStats};
use crate::error::{invalid, Result};
use crate::metrics::{BoundaryMetric, MetricSpec};
use crate::space::{BoundaryPoint, ExtendedPoint, Point, Ray};
use crate::value::exact;

/// `U_g = {ξ : γ_ξ(1/λ) ∈ B(g, 2R)}` over a boundary sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Pushout {
    pub cover: Cover,
    pub lambda: f64,
    pub a: f64,
    pub r: f64,
    /// Largest multiplicity of the interior cover, over the pushed points and the given window.
    pub order_v: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PushoutCheck {
    pub stats: CoverStats,
    pub order_v: usize,
    pub bound_mesh: f64,
    pub bound_lebesgue: f64,
    pub order_ok: bool,
    pub mesh_ok: bool,
    pub lebesgue_ok: bool,
}

impl PushoutCheck {
    pub fn pass(&self) -> bool {
        self.order_ok && self.mesh_ok && self.lebesgue_ok
    }
}

/// Relative slack for bounds checked in floating point.
pub const BOUND_SLACK: f64 = 1e-9;

impl Pushout {
    /// `(4R/A)·λ`.
    pub fn mesh_bound(&self) -> f64 {
        4.0 * self.r / self.a * self.lambda
    }

    /// Measure the cover in `d_A` and compare against order(V), `λ` and `(4R/A)λ`.
    pub fn check(&self) -> Result<PushoutCheck> {
        let space = &self.cover.space;
        let metric = BoundaryMetric::new(space, MetricSpec::d_a(space, self.a)?)?;
        let points: Vec<BoundaryPoint> = self
            .cover
            .ground
            .iter()
            .map(|g| match g {
                ExtendedPoint::Boundary(b) => b.clone(),
                ExtendedPoint::Interior(_) => unreachable!("pushout ground is on the boundary"),
            })
            .collect();
        let m = metric.matrix(&points)?;
        let stats = cover_stats(&self.cover, &m, None)?;
        let bound_mesh = self.mesh_bound();
        let mesh_ok = stats.mesh.le_bound(bound_mesh, BOUND_SLACK);
        let lebesgue_ok = stats.lebesgue.as_ref().is_none_or(|l| l.ge_bound(self.lambda, BOUND_SLACK));
        Ok(PushoutCheck {
            order_ok: stats.order <= self.order_v,
            order_v: self.order_v,
            bound_mesh,
            bound_lebesgue: self.lambda,
            mesh_ok,
            lebesgue_ok,
            stats,
        })
    }
}

/// Push the ball family `family` out to the boundary sample at time `t_λ = 1/λ`.
///
/// `window` only contributes to the measured order of the interior cover.
pub fn boundary_pushout_cover(
    family: &BallFamily,
    lambda: f64,
    a: f64,
    boundary: &[BoundaryPoint],
    window: &[Point],
) -> Result<Pushout> {
    let space = family.space();
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", format!("must be positive, got {lambda}")));
    }
    if !(a > 0.0) {
        return Err(invalid("A", format!("must be positive, got {a}")));
    }
    if family.r() <= a {
        return Err(invalid("R", format!("must exceed A = {a}, got {}", family.r())));
    }
    if boundary.is_empty() {
        return Err(invalid("boundary", "sample is empty"));
    }
    let t_exact = exact(1.0 / lambda).filter(|_| space.is_tree());
    let mut sets: BTreeMap<Center, Vec<usize>> = BTreeMap::new();
    let mut order_v = 0;
    for (i, xi) in boundary.iter().enumerate() {
        let ray = Ray::from_basepoint(space, xi.clone())?;
        let p = match &t_exact {
            Some(t) => ray.point_exact(t)?,
            None => ray.point(1.0 / lambda)?,
        };
        let near = family.centers_near(&p);
        order_v = order_v.max(near.len());
        for (c, _) in near {
            sets.entry(c).or_default().push(i);
        }
    }
    for p in window {
        space.check_point(p)?;
        order_v = order_v.max(family.multiplicity(p));
    }
    let sets = sets
        .into_iter()
        .map(|(c, m)| CoverSet::new(m, format!("γ(1/λ) ∈ B({c}, {})", family.radius())))
        .collect();
    let ground = boundary.iter().cloned().map(ExtendedPoint::Boundary).collect();
    Ok(Pushout {
        cover: Cover::new(space, ground, sets)?,
        lambda,
        a,
        r: family.r(),
        order_v,
    })
}
