//! Pulling colored boundary covers into annular tubes of the interior.
//!
//! For a scale schedule `λ_k = 4e^{-kR}` and colored covers `𝒰_k` of the
//! boundary, each `U ∈ 𝒰_k` gives the tube of points `γ(s)`, `kR < s < (k+2)R`,
//! on rays `γ` from the basepoint ending in `U`. Together with the open ball
//! `B(x₀, 2R)` these tubes cover the ball of radius `(K+2)R`.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{ColoredCover, Cover, CoverSet, Region};
use crate::error::{invalid, Result};
use crate::metrics::BoundaryMetric;
use crate::space::{self, BoundaryPoint, ExtendedPoint, Letter, Point, Ray, TreePoint};
use crate::value::{exact, Value};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    /// Annulus step `R`.
    pub r: f64,
    /// Number of levels `K`.
    pub k_max: usize,
    /// Linear control constant: `mesh(𝒰_k) <= c λ_k`.
    pub c: f64,
    /// Scale below which the boundary covers are available; needs `4/e^R < λ₀`.
    pub lambda0: f64,
}

impl ScaleSchedule {
    pub fn new(r: f64, k_max: usize, c: f64, lambda0: f64) -> Result<Self> {
        let s = ScaleSchedule { r, k_max, c, lambda0 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(invalid("R", format!("must be positive, got {}", self.r)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid("c", format!("must be positive, got {}", self.c)));
        }
        if !(4.0 * (-self.r).exp() < self.lambda0) {
            return Err(invalid(
                "R",
                format!("4/e^R = {} must be below lambda0 = {}", 4.0 * (-self.r).exp(), self.lambda0),
            ));
        }
        Ok(())
    }

    /// `λ_k = 4 e^{-kR}`.
    pub fn lambda(&self, k: usize) -> f64 {
        4.0 * (-(k as f64) * self.r).exp()
    }

    /// `4c e^{2R} + 2R`.
    pub fn mesh_bound(&self) -> f64 {
        4.0 * self.c * (2.0 * self.r).exp() + 2.0 * self.r
    }

    /// `4c e^{2R}`.
    pub fn claim2_bound(&self) -> f64 {
        4.0 * self.c * (2.0 * self.r).exp()
    }
}

/// Per-level verdicts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeLevel {
    pub k: usize,
    pub lambda: f64,
    pub sets: usize,
    pub colors: usize,
    /// Same-color tubes share no sample point.
    pub claim1_disjoint: bool,
    /// `2e^{-d(x,x₀)} < λ_k/2` for every sample point in a tube of this level.
    pub claim1_inequality: bool,
    /// Largest distance between same-tube ray points at radius `(k+2)R`.
    pub claim2_max: f64,
    pub claim2_ok: bool,
    /// Largest diameter of a tube on the sample.
    pub mesh: f64,
    /// `mesh(𝒰_k) <= c λ_k` on the boundary sample.
    pub boundary_mesh_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PushinReport {
    pub cover: Cover,
    pub levels: Vec<TubeLevel>,
    pub order: usize,
    /// `n` for `(n+1)`-colored boundary covers.
    pub n: usize,
    pub order_within_2n_plus_1: bool,
    pub order_within_2n_plus_2: bool,
    pub mesh: f64,
    pub mesh_bound: f64,
    pub mesh_ok: bool,
    pub claim1_ok: bool,
    pub claim2_ok: bool,
    /// Sample points outside every set (beyond radius `(K+2)R`).
    pub uncovered: usize,
    /// Radial comparisons and distances were exact.
    pub exact: bool,
}

/// Radius comparisons, exact on trees.
enum Radius {
    Exact(BigRational),
    Float(f64),
}

impl Radius {
    fn of(x0: &Point, x: &Point) -> Radius {
        match space::dist_unchecked(x0, x) {
            Value::Rational(r) => Radius::Exact(r),
            v => Radius::Float(v.to_f64()),
        }
    }

    fn between(&self, lo: f64, hi: f64) -> bool {
        match (self, exact(lo), exact(hi)) {
            (Radius::Exact(r), Some(l), Some(h)) => *r > l && *r < h,
            _ => {
                let r = self.to_f64();
                r > lo && r < hi
            }
        }
    }

    fn below(&self, hi: f64) -> bool {
        match (self, exact(hi)) {
            (Radius::Exact(r), Some(h)) => *r < h,
            _ => self.to_f64() < hi,
        }
    }

    fn to_f64(&self) -> f64 {
        match self {
            Radius::Exact(r) => crate::value::to_f64(r),
            Radius::Float(x) => *x,
        }
    }
}

/// Assemble the tube cover of `interior` and check the three claims on the samples.
///
/// `covers[k-1]` is the colored cover `𝒰_k`; its ground sample serves for the
/// radius-`(k+2)R` check.
pub fn annular_pushin_cover(
    metric: &BoundaryMetric,
    schedule: &ScaleSchedule,
    covers: &[ColoredCover],
    interior: &[Point],
) -> Result<PushinReport> {
    schedule.validate()?;
    if covers.len() < schedule.k_max {
        return Err(invalid(
            "covers",
            format!("need one cover per level 1..={}, got {}", schedule.k_max, covers.len()),
        ));
    }
    let space = metric.space();
    let x0 = &metric.spec().basepoint;
    for p in interior {
        space.check_point(p)?;
    }
    let r = schedule.r;
    let radii: Vec<Radius> = interior.iter().map(|p| Radius::of(x0, p)).collect();
    let mut exact_run = metric.is_exact() && exact(r).is_some();

    let mut sets = vec![CoverSet::new(
        (0..interior.len()).filter(|&i| radii[i].below(2.0 * r)).collect(),
        format!("B(x0, {})", 2.0 * r),
    )];
    let mut levels = Vec::new();
    let mut claim1_ok = true;
    let mut claim2_ok = true;
    let mut n = 0;

    for k in 1..=schedule.k_max {
        let cc = &covers[k - 1];
        let lambda = schedule.lambda(k);
        let (lo, hi) = (k as f64 * r, (k + 2) as f64 * r);
        let mut level_sets = Vec::new();
        for (set, region) in cc.cover.sets.iter().zip(&cc.regions) {
            let mut members = Vec::new();
            for (i, p) in interior.iter().enumerate() {
                if radii[i].between(lo, hi) && region.meets_ray_through(metric, p)? {
                    members.push(i);
                }
            }
            let color = set.color.unwrap_or(0);
            level_sets.push((members, color, set.descriptor.clone()));
        }
        if let Some(m) = cc.cylinder_depth {
            // Cylinders missing from the boundary sample can still carry interior points.
            let mut covered = vec![false; interior.len()];
            for (members, _, _) in &level_sets {
                for &i in members {
                    covered[i] = true;
                }
            }
            let mut extra: BTreeSet<Vec<Letter>> = BTreeSet::new();
            for (i, p) in interior.iter().enumerate() {
                if let (false, true, Point::Tree(tp)) = (covered[i], radii[i].between(lo, hi), p) {
                    let mut path = tp.word().to_vec();
                    if let Some(e) = tp.edge() {
                        path.push(e.letter);
                    }
                    path.resize(m, 0);
                    extra.insert(path);
                }
            }
            for prefix in extra {
                let region = Region::Cylinder { prefix: prefix.clone() };
                let mut members = Vec::new();
                for (i, p) in interior.iter().enumerate() {
                    if radii[i].between(lo, hi) && region.meets_ray_through(metric, p)? {
                        members.push(i);
                    }
                }
                level_sets.push((members, 0, format!("cylinder {}", TreePoint::vertex(prefix))));
            }
        }

        // Claim 1: same-color tubes are disjoint on the sample.
        let mut seen: BTreeMap<(usize, u32), usize> = BTreeMap::new();
        let mut disjoint = true;
        for (members, color, _) in &level_sets {
            for &i in members {
                let e = seen.entry((i, *color)).or_insert(0);
                *e += 1;
                disjoint &= *e == 1;
            }
        }
        // and the arithmetic behind it: 2e^{-d(x,x₀)} < λ_k/2, i.e. d(x,x₀) > kR.
        let mut inequality = true;
        for (members, _, _) in &level_sets {
            for &i in members {
                inequality &= match (&radii[i], exact(lo)) {
                    (Radius::Exact(d), Some(l)) => *d > l,
                    (rad, _) => 2.0 * (-rad.to_f64()).exp() < 0.5 * lambda,
                };
            }
        }

        // Claim 2: ray points of one boundary set at radius (k+2)R stay 4c e^{2R} apart.
        let ground: Vec<&BoundaryPoint> = cc
            .cover
            .ground
            .iter()
            .map(|g| match g {
                ExtendedPoint::Boundary(b) => b,
                ExtendedPoint::Interior(_) => unreachable!("boundary covers"),
            })
            .collect();
        let t = exact(hi).filter(|_| space.is_tree());
        let mut far_points = Vec::with_capacity(ground.len());
        for xi in &ground {
            let ray = Ray::new(space, x0.clone(), (*xi).clone())?;
            far_points.push(match &t {
                Some(t) => ray.point_exact(t)?,
                None => ray.point(hi)?,
            });
        }
        let boundary_m = metric.matrix(&ground.iter().map(|b| (*b).clone()).collect::<Vec<_>>())?;
        let mut claim2_max: f64 = 0.0;
        let mut boundary_mesh_ok = true;
        for s in &cc.cover.sets {
            for (a, &i) in s.members.iter().enumerate() {
                for &j in &s.members[..a] {
                    let d = space::dist_unchecked(&far_points[i], &far_points[j]);
                    exact_run &= d.is_exact();
                    claim2_max = claim2_max.max(d.to_f64());
                    boundary_mesh_ok &= boundary_m[i][j].le_bound(schedule.c * lambda, 1e-9);
                }
            }
        }
        let level_claim2 = claim2_max <= schedule.claim2_bound();

        // Tube diameters on the interior sample.
        let mut mesh: f64 = 0.0;
        for (members, _, _) in &level_sets {
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[..a] {
                    mesh = mesh.max(space::dist_f64(&interior[i], &interior[j]));
                }
            }
        }

        claim1_ok &= disjoint && inequality;
        claim2_ok &= level_claim2;
        n = n.max(cc.n());
        levels.push(TubeLevel {
            k,
            lambda,
            sets: level_sets.len(),
            colors: cc.color_count(),
            claim1_disjoint: disjoint,
            claim1_inequality: inequality,
            claim2_max,
            claim2_ok: level_claim2,
            mesh,
            boundary_mesh_ok,
        });
        for (members, color, descriptor) in level_sets {
            if !members.is_empty() {
                sets.push(CoverSet::new(members, format!("tube k={k} over {descriptor}")).colored(color));
            }
        }
    }

    let ground: Vec<ExtendedPoint> = interior.iter().cloned().map(ExtendedPoint::Interior).collect();
    let cover = Cover::new(space, ground, sets)?;
    let order = cover.order();
    let uncovered = cover.uncovered().len();
    let mut mesh: f64 = 0.0;
    for s in &cover.sets {
        for (a, &i) in s.members.iter().enumerate() {
            for &j in &s.members[..a] {
                mesh = mesh.max(space::dist_f64(&interior[i], &interior[j]));
            }
        }
    }
    let mesh_bound = schedule.mesh_bound();
    Ok(PushinReport {
        levels,
        order,
        n,
        order_within_2n_plus_1: order <= 2 * n + 1,
        order_within_2n_plus_2: order <= 2 * n + 2,
        mesh,
        mesh_bound,
        mesh_ok: mesh <= mesh_bound,
        claim1_ok,
        claim2_ok,
        uncovered,
        exact: exact_run,
        cover,
    })
}
