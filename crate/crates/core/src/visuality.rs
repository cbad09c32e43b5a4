//! Visual-metric fits against the Gromov product, and the witness families
//! showing where boundary metrics on the 4-valent tree fail to be visual or
//! quasi-symmetric to each other.
//!
//! A boundary metric `d` is visual with parameter `a > 1` when
//! `k₁ a^{-(ξ,η)} <= d(ξ, η) <= k₂ a^{-(ξ,η)}` for all pairs.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::metrics::{self, BoundaryMetric, MetricSpec};
use crate::space::{sample_boundary, BoundaryPoint, Point, Space, TreeEnd};
use crate::value::{exact, int, to_f64, Value};

/// Default growth factor before a monotone witness family counts as unbounded.
pub const DEFAULT_GROWTH_FACTOR: f64 = 1e3;

/// The parameter `a` of a visual metric. `E` keeps tree computations exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum VisualParameter {
    E,
    Real(f64),
}

impl VisualParameter {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 1.0 && a.is_finite()) {
            return Err(invalid("a", format!("must exceed 1, got {a}")));
        }
        Ok(if a == std::f64::consts::E {
            VisualParameter::E
        } else {
            VisualParameter::Real(a)
        })
    }

    pub fn value(&self) -> f64 {
        match self {
            VisualParameter::E => std::f64::consts::E,
            VisualParameter::Real(a) => *a,
        }
    }

    /// `x · a^p`, exact when `a = e` and both inputs are exact.
    fn scale(&self, x: &Value, p: Option<&BigRational>, p_f64: f64) -> Value {
        match (self, p) {
            (VisualParameter::E, Some(p)) if x.is_exact() => x.mul_exp(p),
            _ => Value::Float(x.to_f64() * self.value().powf(p_f64)),
        }
    }
}

impl fmt::Display for VisualParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VisualParameter::E => write!(f, "e"),
            VisualParameter::Real(a) => write!(f, "{a}"),
        }
    }
}

impl FromStr for VisualParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "e" | "E" => Ok(VisualParameter::E),
            t => {
                let a: f64 = t.parse().map_err(|_| invalid("a", format!("expected `e` or a number, got {t:?}")))?;
                VisualParameter::new(a)
            }
        }
    }
}

impl From<VisualParameter> for String {
    fn from(a: VisualParameter) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for VisualParameter {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Fits,
    UnboundedEvidence,
}

/// One pair's contribution `d(ξ, η) · a^{(ξ,η)}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairScore {
    pub index: usize,
    pub product: f64,
    pub distance: Value,
    pub scaled: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VisualFit {
    pub a: VisualParameter,
    pub k1: Value,
    pub k2: Value,
    pub argmin: PairScore,
    pub argmax: PairScore,
    pub verdict: Verdict,
    pub pairs: usize,
    /// Every scaled distance was computed without rounding.
    pub exact: bool,
    /// Scores in pair order; kept for witness families, empty for samples.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub family: Vec<PairScore>,
}

impl VisualFit {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit serializes")
    }
}

fn score(
    metric: &BoundaryMetric,
    a: VisualParameter,
    index: usize,
    xi: &BoundaryPoint,
    eta: &BoundaryPoint,
) -> Result<PairScore> {
    if xi == eta {
        return Err(invalid("pairs", format!("pair {index} repeats a point")));
    }
    let space = metric.space();
    let x0 = &metric.spec().basepoint;
    let exact_product = metrics::gromov_product_exact(space, x0, xi, eta)?;
    let product = match &exact_product {
        Some(b) => to_f64(b),
        None => metrics::gromov_product(space, x0, xi, eta, metric.spec().tol)?,
    };
    let distance = metric.distance(xi, eta)?;
    let scaled = a.scale(&distance, exact_product.as_ref(), product);
    Ok(PairScore {
        index,
        product,
        distance,
        scaled,
    })
}

fn extremes(scores: &[PairScore]) -> (PairScore, PairScore) {
    let mut lo = &scores[0];
    let mut hi = &scores[0];
    for s in &scores[1..] {
        if s.scaled.partial_cmp(&lo.scaled) == Some(Ordering::Less) {
            lo = s;
        }
        if s.scaled.partial_cmp(&hi.scaled) == Some(Ordering::Greater) {
            hi = s;
        }
    }
    (lo.clone(), hi.clone())
}

fn scores_of(
    space: &Space,
    spec: &MetricSpec,
    a: VisualParameter,
    pairs: &[(BoundaryPoint, BoundaryPoint)],
) -> Result<Vec<PairScore>> {
    if pairs.is_empty() {
        return Err(invalid("pairs", "no pairs given"));
    }
    let metric = BoundaryMetric::new(space, spec.clone())?;
    pairs
        .iter()
        .enumerate()
        .map(|(i, (x, y))| score(&metric, a, i, x, y))
        .collect()
}

/// Best constants `k₁ = min d·a^{(ξ,η)}`, `k₂ = max` over `pairs`.
///
/// Random pairs never produce an unbounded verdict; see [`visual_fit_family`].
pub fn visual_fit(
    space: &Space,
    spec: &MetricSpec,
    a: VisualParameter,
    pairs: &[(BoundaryPoint, BoundaryPoint)],
) -> Result<VisualFit> {
    let scores = scores_of(space, spec, a, pairs)?;
    let (argmin, argmax) = extremes(&scores);
    Ok(VisualFit {
        a,
        k1: argmin.scaled.clone(),
        k2: argmax.scaled.clone(),
        exact: scores.iter().all(|s| s.scaled.is_exact()),
        argmin,
        argmax,
        verdict: Verdict::Fits,
        pairs: pairs.len(),
        family: Vec::new(),
    })
}

/// Fit over a nested witness family, listed in order.
///
/// The verdict is unbounded evidence when the scaled distances strictly
/// increase along the family and the last is at least `factor` times the first.
pub fn visual_fit_family(
    space: &Space,
    spec: &MetricSpec,
    a: VisualParameter,
    family: &[(BoundaryPoint, BoundaryPoint)],
    factor: f64,
) -> Result<VisualFit> {
    if !(factor > 1.0) {
        return Err(invalid("factor", format!("must exceed 1, got {factor}")));
    }
    let scores = scores_of(space, spec, a, family)?;
    let (argmin, argmax) = extremes(&scores);
    let increasing = scores
        .windows(2)
        .all(|w| w[1].scaled.partial_cmp(&w[0].scaled) == Some(Ordering::Greater));
    let first = scores[0].scaled.to_f64();
    let last = scores[scores.len() - 1].scaled.to_f64();
    let verdict = if scores.len() >= 2 && increasing && last >= factor * first {
        Verdict::UnboundedEvidence
    } else {
        Verdict::Fits
    };
    Ok(VisualFit {
        a,
        k1: argmin.scaled.clone(),
        k2: argmax.scaled.clone(),
        exact: scores.iter().all(|s| s.scaled.is_exact()),
        argmin,
        argmax,
        verdict,
        pairs: family.len(),
        family: scores,
    })
}

/// `n` pairs of distinct boundary points, from `2n` deterministic samples.
pub fn sample_pairs(space: &Space, n: usize, seed: u64) -> Result<Vec<(BoundaryPoint, BoundaryPoint)>> {
    let pts = sample_boundary(space, 2 * n, seed)?;
    Ok(pts.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect())
}

fn rooted_tree(space: &Space) -> Result<u32> {
    let valence = space
        .valence()
        .ok_or_else(|| Error::Unsupported("witness families live on trees".into()))?;
    match space.basepoint() {
        Point::Tree(o) if o.depth().is_zero() => Ok(valence),
        _ => Err(invalid("basepoint", "witness families need the basepoint at the root")),
    }
}

/// The end `000…` and its partner leaving it after `n` letters.
pub fn branch_pair(valence: u32, n: usize) -> Result<(BoundaryPoint, BoundaryPoint)> {
    let spine = TreeEnd::checked(valence, vec![], vec![0])?;
    let partner = spine.branch_partner(valence, n)?;
    Ok((BoundaryPoint::Tree(spine), BoundaryPoint::Tree(partner)))
}

/// `⌈x⌉` clamped below at zero.
fn ceil_nonneg(x: &BigRational) -> BigInt {
    let c = x.ceil().to_integer();
    if c.is_negative() {
        BigInt::zero()
    } else {
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonVisualRow {
    pub n: u64,
    /// `max(0, ⌈n - A/2⌉)`.
    pub branch: u64,
    pub d_a: Value,
    pub product: f64,
    /// `d_A · a^n`.
    pub growth: Value,
}

pub fn nonvisual_csv(rows: &[NonVisualRow]) -> String {
    let mut out = String::from("n,branch,d_a,product,growth\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            r.branch,
            crate::fmt_real(r.d_a.to_f64()),
            crate::fmt_real(r.product),
            crate::fmt_real(r.growth.to_f64())
        ));
    }
    out
}

/// Rays branching at `⌈n - A/2⌉` and the growth of `d_A · a^n` along them.
pub fn nonvisual_witness_da(
    space: &Space,
    a_param: f64,
    a: VisualParameter,
    n_range: std::ops::RangeInclusive<u64>,
) -> Result<Vec<NonVisualRow>> {
    let valence = rooted_tree(space)?;
    let spec = MetricSpec::d_a(space, a_param)?;
    let metric = BoundaryMetric::new(space, spec)?;
    let half = exact(a_param).ok_or_else(|| invalid("A", "must be finite"))? / int(2);
    let mut rows = Vec::new();
    for n in n_range {
        let branch = ceil_nonneg(&(BigRational::from_integer(n.into()) - &half));
        let branch: u64 = branch.try_into().map_err(|_| invalid("n", "branch time overflows"))?;
        let (xi, eta) = branch_pair(valence, branch as usize)?;
        let d_a = metric.distance(&xi, &eta)?;
        let product = metrics::gromov_product_exact(space, space.basepoint(), &xi, &eta)?
            .expect("tree products are exact");
        let n_q = int(n as i64);
        let growth = a.scale(&d_a, Some(&n_q), n as f64);
        rows.push(NonVisualRow {
            n,
            branch,
            d_a,
            product: to_f64(&product),
            growth,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonQsRow {
    pub n: u64,
    /// `d_1(α,γ) / d_1(β,γ)`.
    pub t: Value,
    /// `d̄(α,γ) / d̄(β,γ)`.
    pub rho: Value,
    /// Least `c` with `ρ <= c · t^{1/δ}`.
    pub c_lower: f64,
}

pub fn nonqs_csv(rows: &[NonQsRow]) -> String {
    let mut out = String::from("n,t,rho,c_lower\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.n,
            crate::fmt_real(r.t.to_f64()),
            crate::fmt_real(r.rho.to_f64()),
            crate::fmt_real(r.c_lower)
        ));
    }
    out
}

/// Triples `α, β, γ` with `α, γ` branching at the root and `β, γ` at depth `n`,
/// and the ratios they force on `id: (∂T, d_1) → (∂T, d̄)`.
pub fn nonqs_witness(space: &Space, n_range: std::ops::RangeInclusive<u64>, delta: f64) -> Result<Vec<NonQsRow>> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid("delta", format!("must lie in (0, 1], got {delta}")));
    }
    let valence = rooted_tree(space)?;
    let d1 = BoundaryMetric::new(space, MetricSpec::d_a(space, 1.0)?)?;
    let dbar = BoundaryMetric::new(space, MetricSpec::dbar(space))?;
    let mut rows = Vec::new();
    for n in n_range {
        let (gamma, alpha) = branch_pair(valence, 0)?;
        let (_, beta) = branch_pair(valence, n as usize)?;
        let ratio = |m: &BoundaryMetric| -> Result<Value> {
            let num = m.distance(&alpha, &gamma)?;
            let den = m.distance(&beta, &gamma)?;
            Ok(num.div(&den).expect("distinct ends are at positive distance"))
        };
        let t = ratio(&d1)?;
        let rho = ratio(&dbar)?;
        let c_lower = rho.to_f64() / t.to_f64().powf(1.0 / delta);
        rows.push(NonQsRow { n, t, rho, c_lower });
    }
    Ok(rows)
}

/// Whether `values` strictly increase, deciding exactly wherever possible.
pub fn strictly_increasing(values: &[Value]) -> bool {
    values
        .windows(2)
        .all(|w| w[1].partial_cmp(&w[0]) == Some(Ordering::Greater))
}
