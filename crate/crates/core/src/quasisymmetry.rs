//! Control functions, quasi-symmetry envelopes, and uniform perfectness.
//!
//! A map between metric spaces is `η`-quasi-symmetric when
//! `d(x, z) <= t d(y, z)` implies `d(fx, fz) <= η(t) d(fy, fz)`. Here the map is
//! always the identity of a boundary carrying two different metrics, so each
//! sampled triple contributes one pair `(t, ρ)` of distance ratios.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::metrics::{BoundaryMetric, Family, MetricSpec};
use crate::space::{self, BoundaryPoint, Point, SpaceKind};
use crate::value::{exact, int, rational_text, ratio, to_f64, Value};
use crate::Space;

/// Relative slack for violations decided in floating point.
pub const DEFAULT_SLACK: f64 = 1e-8;

/// A control function `η: [0, ∞) → [0, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ControlFunction {
    /// `η(t) = slope · t`.
    Linear {
        #[serde(with = "rational_text")]
        slope: BigRational,
    },
    /// `η(t) = c · max{t^δ, t^{1/δ}}`.
    Power { c: f64, delta: f64 },
    /// Stages applied innermost first.
    Composite { stages: Vec<ControlFunction> },
}

impl ControlFunction {
    pub fn identity() -> Self {
        ControlFunction::Linear {
            slope: BigRational::one(),
        }
    }

    pub fn linear(slope: BigRational) -> Result<Self> {
        if !slope.is_positive() {
            return Err(invalid("slope", format!("must be positive, got {slope}")));
        }
        Ok(ControlFunction::Linear { slope })
    }

    pub fn linear_f64(slope: f64) -> Result<Self> {
        let s = exact(slope).ok_or_else(|| invalid("slope", format!("must be finite, got {slope}")))?;
        Self::linear(s)
    }

    pub fn power(c: f64, delta: f64) -> Result<Self> {
        let f = ControlFunction::Power { c, delta };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ControlFunction::Linear { slope } if !slope.is_positive() => {
                Err(invalid("slope", format!("must be positive, got {slope}")))
            }
            ControlFunction::Power { c, delta } => {
                if !(*c >= 1.0 && c.is_finite()) {
                    return Err(invalid("c", format!("must be at least 1, got {c}")));
                }
                if !(*delta > 0.0 && *delta <= 1.0) {
                    return Err(invalid("delta", format!("must lie in (0, 1], got {delta}")));
                }
                Ok(())
            }
            ControlFunction::Composite { stages } => stages.iter().try_for_each(|s| s.validate()),
            _ => Ok(()),
        }
    }

    pub fn slope(&self) -> Option<&BigRational> {
        match self {
            ControlFunction::Linear { slope } => Some(slope),
            _ => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.slope().is_some_and(|s| s.is_one())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ControlFunction::Linear { slope } => to_f64(slope) * t,
            ControlFunction::Power { c, delta } => c * t.powf(*delta).max(t.powf(1.0 / delta)),
            ControlFunction::Composite { stages } => stages.iter().fold(t, |acc, s| s.eval(acc)),
        }
    }

    /// `η(t)`, exact when `η` is linear and `t` exact.
    pub fn eval_value(&self, t: &Value) -> Value {
        match self {
            ControlFunction::Linear { slope } => Value::Rational(slope.clone()).mul(t),
            ControlFunction::Composite { stages } => {
                stages.iter().fold(t.clone(), |acc, s| s.eval_value(&acc))
            }
            ControlFunction::Power { .. } => Value::Float(self.eval(t.to_f64())),
        }
    }

    /// The control function `t ↦ 1/η⁻¹(1/t)` of the inverse map.
    pub fn dual_inverse(&self) -> ControlFunction {
        match self {
            ControlFunction::Linear { .. } => self.clone(),
            // 1/η⁻¹(1/t) = max{(ct)^δ, (ct)^{1/δ}}
            ControlFunction::Power { c, delta } => ControlFunction::Composite {
                stages: vec![
                    ControlFunction::linear_f64(*c).expect("validated c"),
                    ControlFunction::Power { c: 1.0, delta: *delta },
                ],
            },
            ControlFunction::Composite { stages } => ControlFunction::Composite {
                stages: stages.iter().rev().map(|s| s.dual_inverse()).collect(),
            },
        }
    }
}

impl std::fmt::Display for ControlFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ControlFunction::Linear { slope } => write!(f, "linear({slope})"),
            ControlFunction::Power { c, delta } => write!(f, "power({c},{delta})"),
            ControlFunction::Composite { stages } => {
                let parts: Vec<String> = stages.iter().rev().map(|s| s.to_string()).collect();
                write!(f, "{}", parts.join("∘"))
            }
        }
    }
}

/// `outer ∘ inner`. Linear stages multiply out and identities drop.
pub fn compose_eta(inner: &ControlFunction, outer: &ControlFunction) -> ControlFunction {
    if let (Some(a), Some(b)) = (inner.slope(), outer.slope()) {
        return ControlFunction::Linear { slope: a * b };
    }
    if inner.is_identity() {
        return outer.clone();
    }
    if outer.is_identity() {
        return inner.clone();
    }
    let mut stages = Vec::new();
    for f in [inner, outer] {
        match f {
            ControlFunction::Composite { stages: s } => stages.extend(s.iter().cloned()),
            other => stages.push(other.clone()),
        }
    }
    ControlFunction::Composite { stages }
}

fn positive_length(name: &'static str, x: f64) -> Result<BigRational> {
    match exact(x) {
        Some(r) if r.is_positive() => Ok(r),
        _ => Err(invalid(name, format!("must be positive, got {x}"))),
    }
}

/// Control function between `d_A` and `d_{A'}`: `linear(max/min)`, either direction.
pub fn eta_change_a(a: f64, a_prime: f64) -> Result<ControlFunction> {
    let a = positive_length("A", a)?;
    let b = positive_length("A'", a_prime)?;
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    ControlFunction::linear(hi / lo)
}

/// Number of pieces the basepoint segment is cut into: `⌈D / (0.49 A)⌉`, each shorter than `A/2`.
pub fn basepoint_steps(a: f64, d: f64) -> Result<u64> {
    let a = positive_length("A", a)?;
    let d = exact(d)
        .filter(|d| !d.is_negative())
        .ok_or_else(|| invalid("D", format!("must be a nonnegative distance, got {d}")))?;
    if d.is_zero() {
        return Ok(0);
    }
    if d < &a / int(2) {
        return Ok(1);
    }
    let n = (d / (a * ratio(49, 100))).ceil();
    n.to_integer()
        .to_u64()
        .ok_or_else(|| invalid("D", "too many basepoint steps"))
}

/// Control function between `d_{A,x₀}` and `d_{A,x₀'}` with `d(x₀, x₀') = D`.
///
/// `linear((A/(A-2D))²)` when `D < A/2`; otherwise the composite of one such
/// factor per step of length `D/n < A/2`.
pub fn eta_change_basepoint(a: f64, d: f64) -> Result<ControlFunction> {
    let n = basepoint_steps(a, d)?;
    if n == 0 {
        return Ok(ControlFunction::identity());
    }
    let big_a = positive_length("A", a)?;
    let step = exact(d).expect("checked") / int(n as i64);
    let factor = &big_a / (&big_a - int(2) * step);
    let per_step = ControlFunction::linear(&factor * &factor)?;
    let mut eta = ControlFunction::identity();
    for _ in 0..n {
        eta = compose_eta(&eta, &per_step);
    }
    Ok(eta)
}

/// How to draw triples for an envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleSample {
    pub n_triples: usize,
    /// Number of boundary points the triples are drawn from.
    pub pool: usize,
    pub seed: u64,
}

impl TripleSample {
    pub fn new(n_triples: usize, seed: u64) -> Self {
        TripleSample {
            n_triples,
            pool: n_triples.clamp(3, 600),
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopePair {
    pub t: Value,
    pub rho: Value,
    /// Indices of `(x, y, z)` into the envelope's points.
    pub triple: [usize; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub space: String,
    pub source: String,
    pub target: String,
    pub seed: Option<u64>,
    pub samples: usize,
}

/// Ratio pairs `(t, ρ)` with `t = d₁(x,z)/d₁(y,z)` and `ρ = d₂(x,z)/d₂(y,z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub points: Vec<BoundaryPoint>,
    pub pairs: Vec<EnvelopePair>,
    pub discarded: usize,
    pub provenance: Provenance,
}

impl Envelope {
    /// Evaluate the given triples; degenerate ones are dropped and counted.
    pub fn from_triples(
        source: &BoundaryMetric,
        target: &BoundaryMetric,
        points: Vec<BoundaryPoint>,
        triples: &[[usize; 3]],
        seed: Option<u64>,
    ) -> Result<Envelope> {
        let key = |i: usize, j: usize| (i.min(j), i.max(j));
        let mut discarded = 0;
        let mut kept = Vec::new();
        let mut needed = BTreeSet::new();
        for &[x, y, z] in triples {
            let distinct = x != y && y != z && x != z;
            if !distinct || points[x] == points[y] || points[y] == points[z] || points[x] == points[z] {
                discarded += 1;
                continue;
            }
            needed.insert(key(x, z));
            needed.insert(key(y, z));
            kept.push([x, y, z]);
        }
        let needed: Vec<_> = needed.into_iter().collect();
        let d1 = source.pair_distances(&points, &needed)?;
        let d2 = target.pair_distances(&points, &needed)?;
        let mut pairs = Vec::with_capacity(kept.len());
        for [x, y, z] in kept {
            let (xz, yz) = (key(x, z), key(y, z));
            match (d1[&xz].div(&d1[&yz]), d2[&xz].div(&d2[&yz])) {
                (Some(t), Some(rho)) if !t.is_zero() && !rho.is_zero() => pairs.push(EnvelopePair {
                    t,
                    rho,
                    triple: [x, y, z],
                }),
                _ => discarded += 1,
            }
        }
        let provenance = Provenance {
            space: source.space().id(),
            source: source.spec().to_string(),
            target: target.spec().to_string(),
            seed,
            samples: triples.len(),
        };
        Ok(Envelope {
            points,
            pairs,
            discarded,
            provenance,
        })
    }

    pub fn ratios(&self) -> Vec<(f64, f64)> {
        self.pairs.iter().map(|p| (p.t.to_f64(), p.rho.to_f64())).collect()
    }

    /// CSV with columns `t,rho,triple_ids`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,rho,triple_ids\n");
        for p in &self.pairs {
            let [x, y, z] = p.triple;
            out.push_str(&format!(
                "{},{},{x}-{y}-{z}\n",
                crate::fmt_real(p.t.to_f64()),
                crate::fmt_real(p.rho.to_f64())
            ));
        }
        out
    }
}

/// Sample a pool of boundary points and `n_triples` triples of distinct indices.
pub fn qs_envelope(space: &Space, source: &MetricSpec, target: &MetricSpec, sample: &TripleSample) -> Result<Envelope> {
    if sample.pool < 3 {
        return Err(invalid("pool", "need at least 3 points"));
    }
    let m1 = BoundaryMetric::new(space, source.clone())?;
    let m2 = BoundaryMetric::new(space, target.clone())?;
    let points = space::sample_boundary(space, sample.pool, sample.seed)?;
    let n = points.len();
    if n < 3 {
        return Err(invalid("pool", format!("only {n} distinct boundary points available")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sample.seed);
    rng.set_stream(1);
    let mut triples = Vec::with_capacity(sample.n_triples);
    let mut repeats = 0;
    while triples.len() < sample.n_triples {
        let t = [rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n)];
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            repeats += 1;
            continue;
        }
        triples.push(t);
    }
    let mut env = Envelope::from_triples(&m1, &m2, points, &triples, Some(sample.seed))?;
    env.discarded += repeats;
    Ok(env)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub triple: [usize; 3],
    pub t: f64,
    pub rho: f64,
    pub bound: f64,
}

/// Outcome of testing `ρ <= η(t)` over an envelope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlReport {
    pub violations: usize,
    /// Smallest relative headroom `(η(t)(1+slack) - ρ)/η(t)`; negative iff violated.
    pub worst_margin: f64,
    pub discarded: usize,
    pub checked: usize,
    /// Comparisons decided in exact arithmetic (with zero slack).
    pub exact: usize,
    pub slack: f64,
    pub seed: Option<u64>,
    /// The first violations found, at most [`MAX_WITNESSES`].
    pub witnesses: Vec<Violation>,
}

pub const MAX_WITNESSES: usize = 64;

pub fn check_control(env: &Envelope, eta: &ControlFunction, slack: f64) -> ControlReport {
    let mut report = ControlReport {
        violations: 0,
        worst_margin: f64::INFINITY,
        discarded: env.discarded,
        checked: env.pairs.len(),
        exact: 0,
        slack,
        seed: env.provenance.seed,
        witnesses: Vec::new(),
    };
    for p in &env.pairs {
        let bound = eta.eval_value(&p.t);
        let (violated, margin) = match (bound.exact_cmp(&p.rho), &bound, &p.rho) {
            (Some(ord), b, r) => {
                report.exact += 1;
                let margin = match (b, r) {
                    (Value::Rational(b), Value::Rational(r)) => to_f64(&((b - r) / b)),
                    _ => 1.0 - r.to_f64() / b.to_f64(),
                };
                (ord == Ordering::Less, margin)
            }
            (None, b, r) => {
                let (b, r) = (b.to_f64(), r.to_f64());
                (r > b * (1.0 + slack), (b * (1.0 + slack) - r) / b)
            }
        };
        report.worst_margin = report.worst_margin.min(margin);
        if violated {
            report.violations += 1;
            if report.witnesses.len() < MAX_WITNESSES {
                report.witnesses.push(Violation {
                    triple: p.triple,
                    t: p.t.to_f64(),
                    rho: p.rho.to_f64(),
                    bound: bound.to_f64(),
                });
            }
        }
    }
    report
}

/// Sample triples and count violations of `ρ <= η(t)` with the default slack.
pub fn verify_control(
    space: &Space,
    source: &MetricSpec,
    target: &MetricSpec,
    eta: &ControlFunction,
    sample: &TripleSample,
) -> Result<ControlReport> {
    eta.validate()?;
    let env = qs_envelope(space, source, target, sample)?;
    Ok(check_control(&env, eta, DEFAULT_SLACK))
}

/// Best power law `c·max{t^δ, t^{1/δ}}` dominating an envelope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub c: f64,
    pub delta: f64,
    /// Spread of `ln ρ - ln max{t^δ, t^{1/δ}}` at the chosen `δ`: zero for an exact power law.
    pub residual: f64,
}

impl PowerFit {
    pub fn control(&self) -> ControlFunction {
        ControlFunction::Power {
            c: self.c,
            delta: self.delta,
        }
    }
}

/// Grid resolution for `δ` in [`power_law_fit`].
pub const DELTA_GRID: u32 = 1000;

/// Fit `ρ <= c·max{t^δ, t^{1/δ}}` over `δ ∈ {1/1000, …, 1}`.
///
/// For each `δ` the log-excess `h = ln ρ - ln max{t^δ, t^{1/δ}}` is computed; the
/// chosen `δ` minimizes its spread `max h - min h` (ties go to the larger `δ`),
/// and `c = max(1, e^{max h})` is then the smallest admissible constant.
pub fn power_law_fit(pairs: &[(f64, f64)]) -> Result<PowerFit> {
    if pairs.is_empty() {
        return Err(invalid("envelope", "is empty"));
    }
    if let Some(&(t, rho)) = pairs.iter().find(|(t, r)| !(*t > 0.0 && *r > 0.0 && t.is_finite() && r.is_finite())) {
        return Err(invalid("envelope", format!("non-positive ratio pair ({t}, {rho})")));
    }
    let logs: Vec<(f64, f64)> = pairs.iter().map(|&(t, r)| (t.ln(), r.ln())).collect();
    let mut best: Option<(f64, f64, f64)> = None;
    for j in (1..=DELTA_GRID).rev() {
        let delta = j as f64 / DELTA_GRID as f64;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(lt, lr) in &logs {
            let lm = if lt >= 0.0 { lt / delta } else { lt * delta };
            let h = lr - lm;
            lo = lo.min(h);
            hi = hi.max(h);
        }
        let spread = hi - lo;
        if best.is_none_or(|(s, _, _)| spread < s) {
            best = Some((spread, delta, hi));
        }
    }
    let (residual, delta, hi) = best.expect("grid is nonempty");
    Ok(PowerFit {
        c: hi.exp().max(1.0),
        delta,
        residual,
    })
}

/// How an annulus witness was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessMethod {
    /// Branch from the center at `⌈1/r⌉` (the `d_1` construction on trees).
    CeilingBranch,
    /// Branch at the smallest integer time whose distance drops below `r`.
    SmallestBranch,
    /// Rotate the center along the circle until the distance lands in the annulus.
    Rotation,
    /// Found among the supplied witness pool.
    Search,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PerfectOutcome {
    /// The complement of `B(x, r)` is empty, nothing to witness.
    Vacuous,
    Witness {
        point: BoundaryPoint,
        distance: f64,
        method: WitnessMethod,
    },
    Failure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfectCase {
    pub center: BoundaryPoint,
    pub r: f64,
    pub outcome: PerfectOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfectReport {
    pub c: f64,
    pub cases: usize,
    pub vacuous: usize,
    pub witnessed: usize,
    pub failures: usize,
    /// Witnesses decided in exact arithmetic.
    pub exact: usize,
    pub details: Vec<PerfectCase>,
}

/// Centers from `sample_boundary` with radii uniform in `(0, r_max)`.
pub fn sample_perfect_cases(space: &Space, n: usize, r_max: f64, seed: u64) -> Result<Vec<(BoundaryPoint, f64)>> {
    if !(r_max > 0.0) {
        return Err(invalid("r_max", format!("must be positive, got {r_max}")));
    }
    let centers = space::sample_boundary(space, n, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    Ok(centers
        .into_iter()
        .map(|x| {
            let mut r = 0.0;
            while r <= 0.0 {
                r = rng.random::<f64>() * r_max;
            }
            (x, r)
        })
        .collect())
}

/// Membership of `d` in the annulus `[r/c, r)`.
fn in_annulus(d: &Value, r: &BigRational, c: &BigRational) -> (bool, bool) {
    let outer = Value::Rational(r.clone());
    let inner = Value::Rational(r / c);
    match (d.exact_cmp(&outer), d.exact_cmp(&inner)) {
        (Some(o), Some(i)) => (o == Ordering::Less && i != Ordering::Less, true),
        _ => {
            let x = d.to_f64();
            (x < to_f64(r) && x >= to_f64(r) / to_f64(c), false)
        }
    }
}

/// An end agreeing with `center` for exactly `m` letters.
/// Search for points in `B(x, r) - B(x, r/c)` whenever the complement of `B(x, r)` is nonempty.
///
/// On trees with the basepoint at the root the witness is built by branching
/// from the center; on the circle at infinity of the plane (basepoint at the
/// origin) by rotation. Everywhere else, and as a fallback, the `pool` is searched.
pub fn uniformly_perfect_check(
    space: &Space,
    spec: &MetricSpec,
    cases: &[(BoundaryPoint, f64)],
    c: f64,
    pool: &[BoundaryPoint],
) -> Result<PerfectReport> {
    if !(c > 1.0 && c.is_finite()) {
        return Err(invalid("c", format!("must exceed 1, got {c}")));
    }
    let c_exact = exact(c).expect("finite");
    let metric = BoundaryMetric::new(space, spec.clone())?;
    let mut report = PerfectReport {
        c,
        cases: cases.len(),
        vacuous: 0,
        witnessed: 0,
        failures: 0,
        exact: 0,
        details: Vec::with_capacity(cases.len()),
    };
    for (center, r) in cases {
        space.check_boundary(center)?;
        let r_exact = exact(*r)
            .filter(|r| r.is_positive())
            .ok_or_else(|| invalid("r", format!("must be positive, got {r}")))?;
        let outcome = perfect_case(&metric, center, &r_exact, &c_exact, pool, &mut report.exact)?;
        match outcome {
            PerfectOutcome::Vacuous => report.vacuous += 1,
            PerfectOutcome::Witness { .. } => report.witnessed += 1,
            PerfectOutcome::Failure => report.failures += 1,
        }
        report.details.push(PerfectCase {
            center: center.clone(),
            r: *r,
            outcome,
        });
    }
    Ok(report)
}

fn perfect_case(
    metric: &BoundaryMetric,
    center: &BoundaryPoint,
    r: &BigRational,
    c: &BigRational,
    pool: &[BoundaryPoint],
    exact_count: &mut usize,
) -> Result<PerfectOutcome> {
    let space = metric.space();
    let spec = metric.spec();
    let witness = |point: BoundaryPoint, method, exact_count: &mut usize| -> Result<Option<PerfectOutcome>> {
        let d = metric.distance(center, &point)?;
        let (inside, decided_exactly) = in_annulus(&d, r, c);
        if !inside {
            return Ok(None);
        }
        if decided_exactly {
            *exact_count += 1;
        }
        Ok(Some(PerfectOutcome::Witness {
            distance: d.to_f64(),
            point,
            method,
        }))
    };

    match (space.kind(), center, &spec.basepoint) {
        (SpaceKind::Tree { valence }, BoundaryPoint::Tree(end), Point::Tree(o)) if o.depth().is_zero() => {
            // From the root, branch time equals the shared prefix length and the
            // farthest points branch at 0.
            let far = BoundaryPoint::Tree(end.branch_partner(*valence, 0)?);
            let diam = metric.distance(center, &far)?;
            if diam < Value::Rational(r.clone()) {
                return Ok(PerfectOutcome::Vacuous);
            }
            if matches!(spec.family, Family::DA { a } if a == 1.0) {
                let m = (BigRational::one() / r).ceil().to_integer();
                if let Some(m) = m.to_usize() {
                    let p = BoundaryPoint::Tree(end.branch_partner(*valence, m)?);
                    if let Some(found) = witness(p, WitnessMethod::CeilingBranch, exact_count)? {
                        return Ok(found);
                    }
                }
            }
            let mut m = 0usize;
            loop {
                let p = BoundaryPoint::Tree(end.branch_partner(*valence, m)?);
                let d = metric.distance(center, &p)?;
                if d < Value::Rational(r.clone()) {
                    if let Some(found) = witness(p, WitnessMethod::SmallestBranch, exact_count)? {
                        return Ok(found);
                    }
                    break;
                }
                m += 1;
                if m > 1 << 20 {
                    break;
                }
            }
        }
        (SpaceKind::Euclidean { dim: 2 }, BoundaryPoint::Euclidean(_), Point::Euclidean(o))
            if o.iter().all(|x| *x == 0.0) =>
        {
            if let Some(found) = rotation_witness(metric, center, r, c)? {
                return Ok(found);
            }
            let theta = center.planar_angle().expect("planar");
            let far = metric.distance(center, &BoundaryPoint::circle(theta + std::f64::consts::PI))?;
            if far.to_f64() < to_f64(r) {
                return Ok(PerfectOutcome::Vacuous);
            }
        }
        _ => {}
    }

    let mut complement = false;
    for p in pool {
        if p == center {
            continue;
        }
        let d = metric.distance(center, p)?;
        if d.to_f64() >= to_f64(r) {
            complement = true;
            continue;
        }
        if let Some(found) = witness(p.clone(), WitnessMethod::Search, exact_count)? {
            return Ok(found);
        }
    }
    Ok(if complement {
        PerfectOutcome::Failure
    } else {
        PerfectOutcome::Vacuous
    })
}

/// Bisect the rotation angle until the distance falls in `[r/c, r)`.
fn rotation_witness(
    metric: &BoundaryMetric,
    center: &BoundaryPoint,
    r: &BigRational,
    c: &BigRational,
) -> Result<Option<PerfectOutcome>> {
    let theta = center.planar_angle().expect("planar");
    let (outer, inner) = (to_f64(r), to_f64(r) / to_f64(c));
    let at = |phi: f64| -> Result<f64> { Ok(metric.distance(center, &BoundaryPoint::circle(theta + phi))?.to_f64()) };
    let (mut lo, mut hi) = (0.0, std::f64::consts::PI);
    if at(hi)? < outer {
        return Ok(None);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let d = at(mid)?;
        if d >= outer {
            hi = mid;
        } else if d < inner {
            lo = mid;
        } else {
            return Ok(Some(PerfectOutcome::Witness {
                point: BoundaryPoint::circle(theta + mid),
                distance: d,
                method: WitnessMethod::Rotation,
            }));
        }
    }
    Ok(None)
}
