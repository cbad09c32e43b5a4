//! One function per subcommand, each filling an [`Artifacts`] from a validated config.

use anyhow::{bail, Context, Result};
use cat0_boundary::covers::{
    annular_pushin_cover, boundary_pushout_cover, colored_boundary_cover, ell_dim_estimate, stats_csv_header,
    stats_csv_row, BallFamily, CoverSet, ScaleSchedule,
};
use cat0_boundary::metrics::BoundaryMetric;
use cat0_boundary::quasisymmetry::{
    check_control, eta_change_a, eta_change_basepoint, power_law_fit, qs_envelope, sample_perfect_cases,
    uniformly_perfect_check, ControlFunction, TripleSample, DEFAULT_SLACK,
};
use cat0_boundary::space::{self, boundary_records, sample_boundary, sample_interior};
use cat0_boundary::visuality::{
    branch_pair, nonqs_csv, nonqs_witness, nonvisual_csv, nonvisual_witness_da, sample_pairs, strictly_increasing,
    visual_fit, visual_fit_family, Verdict,
};
use cat0_boundary::{fmt_real, Family, MetricSpec, Space, Value};
use serde::Serialize;
use serde_json::json;

use crate::config::{Experiment, RunConfig};
use crate::output::{substream, Artifacts};

/// Relative slack for floating-point triangle checks.
const TRIANGLE_SLACK: f64 = 1e-9;

pub fn run(config: &RunConfig) -> Result<Artifacts> {
    let space = config.space.build()?;
    let metric = config.metric.build(&space, "metric")?;
    let mut out = Artifacts::default();
    match config.experiment {
        Experiment::Metric => metric_table(config, &space, &metric, &mut out)?,
        Experiment::Compare => compare(config, &space, &metric, &mut out)?,
        Experiment::CoverPushout => cover_pushout(config, &space, &mut out)?,
        Experiment::CoverPushin => cover_pushin(config, &space, &metric, &mut out)?,
        Experiment::EllDim => ell_dim(config, &space, &metric, &mut out)?,
        Experiment::VisualFit => fit(config, &space, &metric, &mut out)?,
        Experiment::DemoT4 => demo_t4(config, &space, &mut out)?,
    }
    Ok(out)
}

fn boundary_sample(config: &RunConfig, space: &Space) -> Result<Vec<cat0_boundary::BoundaryPoint>> {
    sample_boundary(space, config.sample.points, substream(config.seed, "boundary")).context("sample.points")
}

fn metric_table(config: &RunConfig, space: &Space, spec: &MetricSpec, out: &mut Artifacts) -> Result<()> {
    let pts = boundary_sample(config, space)?;
    let m = BoundaryMetric::new(space, spec.clone())?.matrix(&pts)?;
    let n = pts.len();
    let mut csv = String::from("i,j,distance,exact\n");
    for i in 0..n {
        for j in i + 1..n {
            let d = &m[i][j];
            let exact = if d.is_exact() { d.to_string() } else { String::new() };
            csv.push_str(&format!("{i},{j},{},{exact}\n", fmt_real(d.to_f64())));
        }
    }
    let f: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(Value::to_f64).collect()).collect();
    let mut violations = 0usize;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if f[i][k] > (f[i][j] + f[j][k]) * (1.0 + TRIANGLE_SLACK) {
                    violations += 1;
                }
            }
        }
    }
    out.file("points.tsv", boundary_records(space, &pts));
    out.file("distances.csv", csv);
    out.verdict("triangle", violations == 0);
    out.note(format!("{spec} on {}: {n} points, {violations} triangle violations", space.id()));
    Ok(())
}

/// The control function the theory provides between two metrics, if any.
fn derived_control(space: &Space, src: &MetricSpec, dst: &MetricSpec) -> Result<Option<ControlFunction>> {
    if src == dst {
        return Ok(Some(ControlFunction::identity()));
    }
    let same_base = src.basepoint == dst.basepoint;
    Ok(match (src.family, dst.family) {
        (Family::DA { a }, Family::DA { a: b }) if same_base => Some(eta_change_a(a, b)?),
        (Family::DA { a }, Family::DA { a: b }) if a == b => {
            let d = space::dist(space, &src.basepoint, &dst.basepoint)?.to_f64();
            Some(eta_change_basepoint(a, d)?)
        }
        (Family::DBar, Family::DBar) if same_base => Some(ControlFunction::identity()),
        _ => None,
    })
}

fn compare(config: &RunConfig, space: &Space, src: &MetricSpec, out: &mut Artifacts) -> Result<()> {
    let dst = config.target.as_ref().context("target")?.build(space, "target")?;
    let sample = TripleSample {
        n_triples: config.sample.triples,
        pool: config.sample.points,
        seed: substream(config.seed, "triples"),
    };
    let env = qs_envelope(space, src, &dst, &sample)?;
    let eta = derived_control(space, src, &dst)?;
    let control = eta.as_ref().map(|eta| check_control(&env, eta, DEFAULT_SLACK));
    let fit = power_law_fit(&env.ratios()).ok();
    out.file("envelope.csv", env.to_csv());
    out.json(
        "report.json",
        &json!({
            "provenance": env.provenance,
            "pairs": env.pairs.len(),
            "discarded": env.discarded,
            "eta": eta.as_ref().map(|e| e.to_string()),
            "control": control,
            "power_fit": fit,
        }),
    );
    match (&eta, &control) {
        (Some(eta), Some(rep)) => {
            out.verdict("control", rep.violations == 0);
            out.note(format!(
                "{src} -> {dst}: eta = {eta}, {} checked, {} violations",
                rep.checked, rep.violations
            ));
        }
        _ => out.note(format!("{src} -> {dst}: no derived control function, envelope only")),
    }
    if let Some(f) = fit {
        out.note(format!("power fit: c = {}, delta = {}, residual = {}", f.c, f.delta, f.residual));
    }
    Ok(())
}

fn pushout_scales(config: &RunConfig) -> Vec<f64> {
    if config.scales.is_empty() {
        (1..=6).map(|j| 0.5f64.powi(j)).collect()
    } else {
        config.scales.clone()
    }
}

#[derive(Serialize)]
struct PushoutEntry<'a> {
    lambda: f64,
    order_v: usize,
    check: cat0_boundary::covers::PushoutCheck,
    sets: &'a [CoverSet],
}

fn cover_pushout(config: &RunConfig, space: &Space, out: &mut Artifacts) -> Result<()> {
    let family = BallFamily::new(space, config.cover.r).context("cover.r")?;
    let boundary = boundary_sample(config, space)?;
    let mut csv = String::from(stats_csv_header());
    let pushouts = pushout_scales(config)
        .into_iter()
        .map(|l| boundary_pushout_cover(&family, l, config.cover.a, &boundary, &[]))
        .collect::<Result<Vec<_>, _>>()?;
    let mut entries = Vec::new();
    let mut all = true;
    for p in &pushouts {
        let check = p.check()?;
        csv.push_str(&stats_csv_row(p.lambda, &check.stats, check.bound_mesh, check.bound_lebesgue, check.pass()));
        all &= check.pass();
        entries.push(PushoutEntry {
            lambda: p.lambda,
            order_v: p.order_v,
            check,
            sets: &p.cover.sets,
        });
    }
    out.file("points.tsv", boundary_records(space, &boundary));
    out.file("pushout.csv", csv);
    out.json("covers.json", &entries);
    out.verdict("bounds", all);
    out.note(format!(
        "pushout of R = {} balls measured in d_{}: {} scales, all within bounds = {all}",
        config.cover.r,
        config.cover.a,
        entries.len()
    ));
    Ok(())
}

fn cover_pushin(config: &RunConfig, space: &Space, spec: &MetricSpec, out: &mut Artifacts) -> Result<()> {
    let c = &config.cover;
    let schedule = ScaleSchedule::new(c.r, c.k_max, c.c.unwrap_or(1.0), c.lambda0).context("cover")?;
    let metric = BoundaryMetric::new(space, spec.clone())?;
    let boundary = boundary_sample(config, space)?;
    let covers = (1..=schedule.k_max)
        .map(|k| colored_boundary_cover(&metric, schedule.lambda(k), &boundary))
        .collect::<Result<Vec<_>, _>>()?;
    let interior = sample_interior(space, config.sample.window, config.sample.interior, substream(config.seed, "interior"))
        .context("sample.interior")?;
    let rep = annular_pushin_cover(&metric, &schedule, &covers, &interior)?;
    let mut csv = String::from("k,lambda,sets,colors,claim1_disjoint,claim1_inequality,claim2_max,claim2_ok,mesh,boundary_mesh_ok\n");
    for l in &rep.levels {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            l.k,
            fmt_real(l.lambda),
            l.sets,
            l.colors,
            l.claim1_disjoint,
            l.claim1_inequality,
            fmt_real(l.claim2_max),
            l.claim2_ok,
            fmt_real(l.mesh),
            l.boundary_mesh_ok
        ));
    }
    let mut report = serde_json::to_value(&rep)?;
    report.as_object_mut().expect("report is an object").remove("cover");
    let mut cover = rep.cover.to_json();
    cover.push('\n');
    out.file("cover.json", cover);
    out.file("levels.csv", csv);
    out.json("report.json", &report);
    out.verdict("claim1", rep.claim1_ok);
    out.verdict("claim2", rep.claim2_ok);
    out.verdict("mesh", rep.mesh_ok);
    out.verdict("order", rep.order_within_2n_plus_2);
    out.note(format!(
        "push-in over {} levels: n = {}, order = {}, mesh = {} (bound {}), uncovered = {}",
        rep.levels.len(),
        rep.n,
        rep.order,
        rep.mesh,
        rep.mesh_bound,
        rep.uncovered
    ));
    Ok(())
}

fn ell_dim(config: &RunConfig, space: &Space, spec: &MetricSpec, out: &mut Artifacts) -> Result<()> {
    let pts = boundary_sample(config, space)?;
    let m = BoundaryMetric::new(space, spec.clone())?.matrix(&pts)?;
    let d: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(Value::to_f64).collect()).collect();
    let scales = if config.scales.is_empty() {
        (1..=8).map(|k| 4.0 * (-(k as f64)).exp()).collect()
    } else {
        config.scales.clone()
    };
    let rep = ell_dim_estimate(&d, &scales, config.cover.c.unwrap_or(8.0), substream(config.seed, "net"))?;
    out.file("ell_dim.csv", rep.to_csv());
    out.json("ell_dim.json", &rep);
    out.verdict("bounds", rep.all_pass);
    out.note(format!(
        "{spec} on {}: orders {:?}, estimate {}",
        space.id(),
        rep.rows.iter().map(|r| r.order).collect::<Vec<_>>(),
        rep.estimate
    ));
    Ok(())
}

fn family_csv(fit: &cat0_boundary::visuality::VisualFit) -> String {
    let mut csv = String::from("index,product,distance,scaled\n");
    for s in &fit.family {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            s.index,
            fmt_real(s.product),
            fmt_real(s.distance.to_f64()),
            fmt_real(s.scaled.to_f64())
        ));
    }
    csv
}

fn fit(config: &RunConfig, space: &Space, spec: &MetricSpec, out: &mut Artifacts) -> Result<()> {
    let pairs = sample_pairs(space, config.sample.pairs, substream(config.seed, "pairs")).context("sample.pairs")?;
    // as a family, to keep every pair's score
    let fit = visual_fit_family(space, spec, config.visual.a, &pairs, config.visual.factor)?;
    let summary = visual_fit(space, spec, config.visual.a, &pairs)?;
    out.file("scores.csv", family_csv(&fit));
    out.json("fit.json", &summary);
    out.verdict("fits", summary.verdict == Verdict::Fits);
    out.note(format!(
        "{spec} against {}^-(x,y) over {} pairs: k1 = {}, k2 = {}, exact = {}",
        config.visual.a, summary.pairs, summary.k1, summary.k2, summary.exact
    ));
    Ok(())
}

fn demo_t4(config: &RunConfig, space: &Space, out: &mut Artifacts) -> Result<()> {
    let Some(valence) = space.valence() else {
        bail!("space.kind: demo-t4 needs a tree");
    };
    let v = &config.visual;

    // dbar is visual with parameter e and constants exactly 2
    let dbar = MetricSpec::dbar(space);
    let pairs = sample_pairs(space, config.sample.pairs, substream(config.seed, "pairs")).context("sample.pairs")?;
    let ex1 = visual_fit(space, &dbar, v.a, &pairs)?;
    let two = Value::Rational(cat0_boundary::value::int(2));
    let ex1_ok = ex1.exact && ex1.k1 == two && ex1.k2 == two;
    out.json("example1_fit.json", &ex1);
    out.verdict("dbar_visual_constants_2", ex1_ok);
    out.note(format!("dbar: k1 = {}, k2 = {}, exact = {}", ex1.k1, ex1.k2, ex1.exact));

    // d_1 is not visual: d_1 · a^{(x,y)} grows along branching pairs
    let rows = nonvisual_witness_da(space, 1.0, v.a, 1..=v.n_max)?;
    let growth: Vec<Value> = rows.iter().map(|r| r.growth.clone()).collect();
    let family = (1..=v.n_max as usize)
        .map(|n| branch_pair(valence, n))
        .collect::<Result<Vec<_>, _>>()?;
    let d1 = MetricSpec::d_a(space, 1.0)?;
    let nonvisual = visual_fit_family(space, &d1, v.a, &family, v.factor)?;
    out.file("nonvisual.csv", nonvisual_csv(&rows));
    out.json("nonvisual_fit.json", &nonvisual);
    out.verdict(
        "d1_not_visual",
        strictly_increasing(&growth) && nonvisual.verdict == Verdict::UnboundedEvidence,
    );
    out.note(format!(
        "d_1: growth {} -> {} over n = 1..={}, verdict {:?}",
        fmt_real(growth[0].to_f64()),
        fmt_real(growth[growth.len() - 1].to_f64()),
        v.n_max,
        nonvisual.verdict
    ));

    // the identity is not quasi-symmetric from d_1 to dbar
    let rows = nonqs_witness(space, 1..=v.n_max, v.delta)?;
    let c: Vec<f64> = rows.iter().map(|r| r.c_lower).collect();
    let unbounded = c.windows(2).all(|w| w[1] > w[0]) && c[c.len() - 1] >= v.factor * c[0];
    out.file("nonqs.csv", nonqs_csv(&rows));
    out.verdict("d1_dbar_not_quasisymmetric", unbounded);
    out.note(format!(
        "d_1 -> dbar: c_lower {} -> {} at delta = {}",
        fmt_real(c[0]),
        fmt_real(c[c.len() - 1]),
        v.delta
    ));

    // d_1 is uniformly perfect
    let cases = sample_perfect_cases(space, config.sample.points, 2.0, substream(config.seed, "perfect"))?;
    let pool = sample_boundary(space, 50, substream(config.seed, "pool"))?;
    let perfect = uniformly_perfect_check(space, &d1, &cases, v.perfect_c, &pool)?;
    out.json("perfect.json", &perfect);
    out.verdict("d1_uniformly_perfect", perfect.failures == 0);
    out.note(format!(
        "d_1 uniformly perfect with c = {}: {} witnessed, {} vacuous, {} failures",
        perfect.c, perfect.witnessed, perfect.vacuous, perfect.failures
    ));

    out.json("verdicts.json", &out.verdicts.clone());
    Ok(())
}
