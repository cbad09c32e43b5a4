//! Colored covers of the boundary: each color class is `λ/2`-disjoint.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_traits::Zero;

use serde::{Deserialize, Serialize};

use super::{Cover, CoverSet};
use crate::error::{Error, Result};
use crate::metrics::{BoundaryMetric, Family};
use crate::space::{BoundaryPoint, ExtendedPoint, Letter, Point, SpaceKind, TreeEnd, TreePoint};
use crate::value::Value;

/// Relative slack when choosing a cylinder depth from a floating `λ`.
const DEPTH_SLACK: f64 = 1e-9;

/// The continuum set a cover element stands for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Region {
    Whole,
    /// Ends whose word starts with `prefix`.
    Cylinder { prefix: Vec<Letter> },
    /// Open arc of directions `(start, start + width)`.
    Arc { start: f64, width: f64 },
    /// Open metric ball in the boundary metric.
    Ball { center: BoundaryPoint, radius: f64 },
}

fn angle_in_arc(phi: f64, start: f64, width: f64) -> bool {
    let off = (phi - start).rem_euclid(TAU);
    off > 0.0 && off < width
}

impl Region {
    pub fn contains(&self, metric: &BoundaryMetric, xi: &BoundaryPoint) -> Result<bool> {
        Ok(match (self, xi) {
            (Region::Whole, _) => true,
            (Region::Cylinder { prefix }, BoundaryPoint::Tree(e)) => e.starts_with(prefix),
            (Region::Arc { start, width }, _) => {
                let phi = xi
                    .planar_angle()
                    .ok_or_else(|| Error::Unsupported("arcs need a planar boundary".into()))?;
                angle_in_arc(phi, *start, *width)
            }
            (Region::Ball { center, radius }, _) => metric.distance(center, xi)?.to_f64() < *radius,
            _ => return Err(Error::Unsupported("cylinders live on tree boundaries".into())),
        })
    }

    /// Whether some ray from the metric's basepoint through `x` ends in the region.
    pub fn meets_ray_through(&self, metric: &BoundaryMetric, x: &Point) -> Result<bool> {
        let x0 = &metric.spec().basepoint;
        match (self, x, x0) {
            (Region::Whole, _, _) => Ok(true),
            (Region::Cylinder { prefix }, Point::Tree(p), Point::Tree(o)) if o.depth().is_zero() => {
                let mut path = p.word().to_vec();
                if let Some(e) = p.edge() {
                    path.push(e.letter);
                }
                let k = path.len().min(prefix.len());
                Ok(path[..k] == prefix[..k])
            }
            (Region::Cylinder { .. }, _, _) => Err(Error::Unsupported(
                "tube membership for cylinders needs a tree rooted at the basepoint".into(),
            )),
            (_, Point::Tree(_), _) => Err(Error::Unsupported("tree tubes need cylinder regions".into())),
            _ => match direction_end(x0, x)? {
                None => Ok(false),
                Some(end) => self.contains(metric, &end),
            },
        }
    }
}

/// Endpoint of the ray from `x0` through `x` on the planar spaces.
fn direction_end(x0: &Point, x: &Point) -> Result<Option<BoundaryPoint>> {
    match (x0, x) {
        (Point::Euclidean(o), Point::Euclidean(p)) => {
            let v: Vec<f64> = p.iter().zip(o).map(|(a, b)| a - b).collect();
            if v.iter().all(|c| *c == 0.0) {
                return Ok(None);
            }
            BoundaryPoint::direction(v).map(Some)
        }
        (Point::Hyperbolic(o), Point::Hyperbolic(p)) if o.r == 0.0 => {
            Ok((p.r > 0.0).then(|| BoundaryPoint::ideal(p.phi)))
        }
        _ => Err(Error::Unsupported("tube membership off the pole".into())),
    }
}

/// A colored cover of a boundary sample together with the regions behind its sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoredCover {
    pub cover: Cover,
    pub regions: Vec<Region>,
    pub lambda: f64,
    pub construction: String,
    /// Set for tree cylinders: the cover stands for every cylinder of this depth,
    /// listing only those that meet the sample.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cylinder_depth: Option<usize>,
}

impl ColoredCover {
    pub fn color_count(&self) -> usize {
        self.cover.colors().len().max(1)
    }

    /// `n` in "(n+1)-colored".
    pub fn n(&self) -> usize {
        self.color_count() - 1
    }
}

/// Build a colored cover of `sample` at scale `λ`.
///
/// * trees rooted at the basepoint: cylinders of the smallest depth `m` whose
///   elements have diameter `<= λ/2` (for `d̄` this is `⌈ln(4/λ)⌉`), one color;
/// * the circle at infinity of the plane, basepoint at the origin: two colors of
///   alternating overlapping arcs, same-color gaps at least `λ/2`;
/// * otherwise: balls of radius `λ` about a greedy net, greedily colored so that
///   same-color sets are `λ/2` apart on the sample.
///
/// `λ` at least the diameter gives a single set.
pub fn colored_boundary_cover(metric: &BoundaryMetric, lambda: f64, sample: &[BoundaryPoint]) -> Result<ColoredCover> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(crate::error::invalid("lambda", format!("must be positive, got {lambda}")));
    }
    let space = metric.space();
    for xi in sample {
        space.check_boundary(xi)?;
    }
    let ground: Vec<ExtendedPoint> = sample.iter().cloned().map(ExtendedPoint::Boundary).collect();
    let spec = metric.spec();
    let whole = |construction: &str| -> Result<ColoredCover> {
        let all = CoverSet::new((0..sample.len()).collect(), "whole boundary").colored(0);
        Ok(ColoredCover {
            cover: Cover::new(space, ground.clone(), vec![all])?,
            regions: vec![Region::Whole],
            lambda,
            construction: construction.to_string(),
            cylinder_depth: None,
        })
    };

    match (space.kind(), &spec.basepoint) {
        (SpaceKind::Tree { valence }, Point::Tree(o)) if o.depth().is_zero() => {
            let probe = TreeEnd::new(vec![], vec![0])?;
            let at = |m: usize| -> Result<Value> {
                metric.distance(&BoundaryPoint::Tree(probe.clone()), &BoundaryPoint::Tree(probe.branch_partner(*valence, m)?))
            };
            // at(0) is the diameter
            if at(0)?.le_bound(lambda, 0.0) {
                return whole("tree cylinders");
            }
            let half = 0.5 * lambda;
            let mut m = 0;
            while !at(m)?.le_bound(half, DEPTH_SLACK) {
                m += 1;
            }
            let mut groups: BTreeMap<Vec<Letter>, Vec<usize>> = BTreeMap::new();
            for (i, xi) in sample.iter().enumerate() {
                let end = xi.as_tree().expect("tree boundary");
                groups.entry(end.prefix(m)).or_default().push(i);
            }
            let mut sets = Vec::new();
            let mut regions = Vec::new();
            for (prefix, members) in groups {
                sets.push(CoverSet::new(members, format!("cylinder {}", TreePoint::vertex(prefix.clone()))).colored(0));
                regions.push(Region::Cylinder { prefix });
            }
            Ok(ColoredCover {
                cover: Cover::new(space, ground, sets)?,
                regions,
                lambda,
                construction: format!("tree cylinders of depth {m}"),
                cylinder_depth: Some(m),
            })
        }
        (SpaceKind::Euclidean { dim: 2 }, Point::Euclidean(o)) if o.iter().all(|c| *c == 0.0) => {
            // d(θ) = 2 s sin(θ/2) between directions at angle θ.
            let s = match spec.family {
                Family::DA { a } => 1.0 / a,
                Family::DBar => 1.0,
            };
            if lambda >= 2.0 * s {
                return whole("circle arcs");
            }
            let gap = 2.0 * (lambda / (4.0 * s)).asin();
            let mut n = (TAU / (3.0 * gap)).floor() as usize;
            n -= n % 2;
            let w = TAU / n as f64;
            let mut sets = Vec::new();
            let mut regions = Vec::new();
            for i in 0..n {
                let start = i as f64 * w - gap;
                let width = w + 2.0 * gap;
                let members: Vec<usize> = sample
                    .iter()
                    .enumerate()
                    .filter(|(_, xi)| angle_in_arc(xi.planar_angle().expect("planar"), start, width))
                    .map(|(j, _)| j)
                    .collect();
                if members.is_empty() {
                    continue;
                }
                sets.push(CoverSet::new(members, format!("arc {i} of {n}")).colored((i % 2) as u32));
                regions.push(Region::Arc { start, width });
            }
            Ok(ColoredCover {
                cover: Cover::new(space, ground, sets)?,
                regions,
                lambda,
                construction: format!("{n} alternating arcs"),
                cylinder_depth: None,
            })
        }
        _ => net_cover(metric, lambda, sample, ground),
    }
}

fn net_cover(
    metric: &BoundaryMetric,
    lambda: f64,
    sample: &[BoundaryPoint],
    ground: Vec<ExtendedPoint>,
) -> Result<ColoredCover> {
    let n = sample.len();
    let m = metric.matrix(sample)?;
    let d = |i: usize, j: usize| m[i][j].to_f64();
    let mut centers: Vec<usize> = Vec::new();
    for i in 0..n {
        if centers.iter().all(|&c| d(c, i) >= lambda) {
            centers.push(i);
        }
    }
    let members: Vec<Vec<usize>> = centers
        .iter()
        .map(|&c| (0..n).filter(|&j| d(c, j) < lambda).collect())
        .collect();
    // Greedy coloring: sets conflict when some members are closer than λ/2.
    let conflict = |a: &[usize], b: &[usize]| a.iter().any(|&i| b.iter().any(|&j| d(i, j) < 0.5 * lambda));
    let mut colors: Vec<u32> = Vec::with_capacity(centers.len());
    for k in 0..centers.len() {
        let used: Vec<u32> = (0..k)
            .filter(|&l| conflict(&members[k], &members[l]))
            .map(|l| colors[l])
            .collect();
        let c = (0..).find(|c| !used.contains(c)).expect("unbounded");
        colors.push(c);
    }
    let mut sets = Vec::new();
    let mut regions = Vec::new();
    for ((c, mem), color) in centers.iter().zip(members).zip(colors) {
        sets.push(CoverSet::new(mem, format!("ball about sample point {c}")).colored(color));
        regions.push(Region::Ball {
            center: sample[*c].clone(),
            radius: lambda,
        });
    }
    Ok(ColoredCover {
        cover: Cover::new(metric.space(), ground, sets)?,
        regions,
        lambda,
        construction: "greedy net balls".into(),
        cylinder_depth: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::cover_stats;
    use crate::metrics::MetricSpec;
    use crate::space::{sample_boundary, Space};

    fn min_same_color_gap(cc: &ColoredCover, m: &[Vec<Value>]) -> f64 {
        let sets = &cc.cover.sets;
        let mut best = f64::INFINITY;
        for (a, s) in sets.iter().enumerate() {
            for t in &sets[..a] {
                if s.color != t.color {
                    continue;
                }
                for &i in &s.members {
                    for &j in &t.members {
                        best = best.min(m[i][j].to_f64());
                    }
                }
            }
        }
        best
    }

    #[test]
    fn depth_three_cylinders() {
        let t = Space::tree(4).unwrap();
        let metric = BoundaryMetric::new(&t, MetricSpec::dbar(&t)).unwrap();
        // every depth-3 cylinder represented
        let mut pts = Vec::new();
        for a in 0..4u8 {
            for b in 0..3u8 {
                for c in 0..3u8 {
                    pts.push(BoundaryPoint::tree(vec![a, b, c], vec![0]).unwrap());
                }
            }
        }
        let lambda = 4.0 * (-3f64).exp();
        let cc = colored_boundary_cover(&metric, lambda, &pts).unwrap();
        assert_eq!(cc.cover.sets.len(), 36);
        assert_eq!(cc.color_count(), 1);
        let m = metric.matrix(&pts).unwrap();
        assert!(min_same_color_gap(&cc, &m) >= 2.0 * (-3f64).exp() * (1.0 - 1e-12));
        assert_eq!(cover_stats(&cc.cover, &m, None).unwrap().order, 1);
    }

    #[test]
    fn big_scale_is_one_set() {
        let t = Space::tree(4).unwrap();
        let metric = BoundaryMetric::new(&t, MetricSpec::dbar(&t)).unwrap();
        let pts = sample_boundary(&t, 20, 1).unwrap();
        let cc = colored_boundary_cover(&metric, 2.0, &pts).unwrap();
        assert_eq!(cc.cover.sets.len(), 1);
        assert_eq!(cc.regions, vec![Region::Whole]);
    }

    #[test]
    fn circle_arcs_use_two_colors() {
        let e2 = Space::euclidean(2).unwrap();
        let metric = BoundaryMetric::new(&e2, MetricSpec::d_a(&e2, 1.0).unwrap()).unwrap();
        let pts: Vec<_> = (0..300).map(|i| BoundaryPoint::circle(i as f64 * TAU / 300.0 + 0.001)).collect();
        for lambda in [0.5, 0.1, 0.03] {
            let cc = colored_boundary_cover(&metric, lambda, &pts).unwrap();
            assert_eq!(cc.color_count(), 2);
            let m = metric.matrix(&pts).unwrap();
            assert!(min_same_color_gap(&cc, &m) >= 0.5 * lambda * (1.0 - 1e-9));
            let s = cover_stats(&cc.cover, &m, None).unwrap();
            assert_eq!(s.uncovered, 0);
            assert!(s.order <= 2);
        }
    }

    #[test]
    fn hyperbolic_falls_back_to_net() {
        let h = Space::hyperbolic_plane();
        let metric = BoundaryMetric::new(&h, MetricSpec::d_a(&h, 1.0).unwrap()).unwrap();
        let pts = sample_boundary(&h, 60, 4).unwrap();
        let cc = colored_boundary_cover(&metric, 0.3, &pts).unwrap();
        assert_eq!(cc.construction, "greedy net balls");
        assert!(cc.cover.uncovered().is_empty());
    }
}
