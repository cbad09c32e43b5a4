//! Run configuration: a TOML file, overridden field by field from the command line.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use cat0_boundary::covers::{BallFamily, ScaleSchedule};
use cat0_boundary::metrics::DEFAULT_TOL;
use cat0_boundary::visuality::VisualParameter;
use cat0_boundary::{MetricSpec, Point, Space};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Metric,
    Compare,
    CoverPushout,
    CoverPushin,
    EllDim,
    VisualFit,
    DemoT4,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Metric => "metric",
            Experiment::Compare => "compare",
            Experiment::CoverPushout => "cover-pushout",
            Experiment::CoverPushin => "cover-pushin",
            Experiment::EllDim => "ell-dim",
            Experiment::VisualFit => "visual-fit",
            Experiment::DemoT4 => "demo-t4",
        }
    }
}

/// `tree:4`, `euclidean:2` or `hyperbolic`, with an optional basepoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<String>,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        SpaceConfig {
            kind: "tree:4".into(),
            basepoint: None,
        }
    }
}

impl SpaceConfig {
    pub fn build(&self) -> Result<Space> {
        let space = match self.kind.split_once(':') {
            Some(("tree", v)) => Space::tree(v.parse().map_err(|_| anyhow!("space.kind: bad valence `{v}`"))?),
            Some(("euclidean", d)) => Space::euclidean(d.parse().map_err(|_| anyhow!("space.kind: bad dimension `{d}`"))?),
            None if self.kind == "hyperbolic" => Ok(Space::hyperbolic_plane()),
            _ => bail!("space.kind: expected tree:<valence>, euclidean:<dim> or hyperbolic, got `{}`", self.kind),
        }
        .context("space.kind")?;
        match &self.basepoint {
            None => Ok(space),
            Some(b) => {
                let p: Point = b.parse().context("space.basepoint")?;
                space.with_basepoint(p).context("space.basepoint")
            }
        }
    }
}

/// `d_a:<A>` or `dbar`, optionally from another basepoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<String>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl MetricConfig {
    pub fn parse(text: &str) -> Self {
        MetricConfig {
            family: text.to_string(),
            basepoint: None,
            tol: DEFAULT_TOL,
        }
    }

    pub fn build(&self, space: &Space, field: &str) -> Result<MetricSpec> {
        let spec = match self.family.split_once(':') {
            Some(("d_a", a)) => {
                let a: f64 = a.parse().map_err(|_| anyhow!("{field}.family: bad A `{a}`"))?;
                MetricSpec::d_a(space, a).with_context(|| format!("{field}.family"))?
            }
            None if self.family == "dbar" => MetricSpec::dbar(space),
            _ => bail!("{field}.family: expected d_a:<A> or dbar, got `{}`", self.family),
        };
        let spec = spec.with_tol(self.tol);
        let spec = match &self.basepoint {
            None => spec,
            Some(b) => spec.with_basepoint(b.parse().with_context(|| format!("{field}.basepoint"))?),
        };
        spec.validate(space).context(field.to_string())?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    /// Boundary sample size.
    pub points: usize,
    pub triples: usize,
    pub pairs: usize,
    /// Interior sample size and the radius it is drawn from.
    pub interior: usize,
    pub window: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            points: 300,
            triples: 10_000,
            pairs: 1000,
            interior: 1500,
            window: 14.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverConfig {
    pub r: f64,
    pub k_max: usize,
    /// Linear control constant of the boundary covers (push-in, default 1) or of
    /// the measured covers (ell-dim, default 8).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub lambda0: f64,
    /// `A` of the metric the pushout is measured in.
    pub a: f64,
}

impl Default for CoverConfig {
    fn default() -> Self {
        CoverConfig {
            r: 2.0,
            k_max: 5,
            c: None,
            lambda0: 1.0,
            a: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VisualConfig {
    pub a: VisualParameter,
    pub n_max: u64,
    pub factor: f64,
    pub delta: f64,
    /// Perfectness constant for the witness search.
    pub perfect_c: f64,
}

impl Default for VisualConfig {
    fn default() -> Self {
        VisualConfig {
            a: VisualParameter::E,
            n_max: 30,
            factor: cat0_boundary::visuality::DEFAULT_GROWTH_FACTOR,
            delta: 1.0,
            perfect_c: 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub space: SpaceConfig,
    #[serde(default = "default_metric")]
    pub metric: MetricConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<MetricConfig>,
    /// Empty means the experiment's default scales.
    #[serde(default)]
    pub scales: Vec<f64>,
    #[serde(default)]
    pub sample: SampleConfig,
    #[serde(default)]
    pub cover: CoverConfig,
    #[serde(default)]
    pub visual: VisualConfig,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_metric() -> MetricConfig {
    MetricConfig::parse("dbar")
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        RunConfig {
            experiment,
            seed: 0,
            out_dir: default_out(),
            space: SpaceConfig::default(),
            metric: default_metric(),
            target: None,
            scales: Vec::new(),
            sample: SampleConfig::default(),
            cover: CoverConfig::default(),
            visual: VisualConfig::default(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The text recorded with a run: everything but `out_dir`, so the same run
    /// gives the same bytes wherever it is written.
    pub fn recorded(&self) -> String {
        let mut table = toml::Table::try_from(self).expect("config serializes");
        table.remove("out_dir");
        toml::to_string(&table).expect("table serializes")
    }

    /// Check every referenced parameter, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let space = self.space.build()?;
        self.metric.build(&space, "metric")?;
        if let Some(t) = &self.target {
            t.build(&space, "target")?;
        }
        if self.experiment == Experiment::Compare && self.target.is_none() {
            bail!("target: compare needs a target metric");
        }
        if let Some(bad) = self.scales.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            bail!("scales: every scale must be positive, got {bad}");
        }
        let s = &self.sample;
        for (name, v) in [("sample.points", s.points), ("sample.pairs", s.pairs), ("sample.interior", s.interior)] {
            if v == 0 {
                bail!("{name}: must be positive");
            }
        }
        if s.triples == 0 {
            bail!("sample.triples: must be positive");
        }
        if self.experiment == Experiment::Compare && s.points < 3 {
            bail!("sample.points: compare needs at least 3 points");
        }
        if !(s.window > 0.0 && s.window.is_finite()) {
            bail!("sample.window: must be positive, got {}", s.window);
        }
        let c = &self.cover;
        if !(c.r > 0.0 && c.r.is_finite()) {
            bail!("cover.r: must be positive, got {}", c.r);
        }
        if let Some(k) = c.c.filter(|k| !(*k > 0.0 && k.is_finite())) {
            bail!("cover.c: must be positive, got {k}");
        }
        if !(c.a > 0.0 && c.a.is_finite()) {
            bail!("cover.a: must be positive, got {}", c.a);
        }
        let v = &self.visual;
        if !(v.factor > 1.0) {
            bail!("visual.factor: must exceed 1, got {}", v.factor);
        }
        if !(v.delta > 0.0 && v.delta <= 1.0) {
            bail!("visual.delta: must lie in (0, 1], got {}", v.delta);
        }
        if !(v.perfect_c > 1.0) {
            bail!("visual.perfect_c: must exceed 1, got {}", v.perfect_c);
        }
        if v.n_max == 0 {
            bail!("visual.n_max: must be positive");
        }
        match self.experiment {
            Experiment::CoverPushout => {
                if c.r <= c.a {
                    bail!("cover.r: must exceed cover.a = {}, got {}", c.a, c.r);
                }
                BallFamily::new(&space, c.r).context("cover.r")?;
            }
            Experiment::CoverPushin => {
                ScaleSchedule::new(c.r, c.k_max, c.c.unwrap_or(1.0), c.lambda0).context("cover")?;
            }
            Experiment::DemoT4 if space.valence().is_none() => bail!("space.kind: demo-t4 needs a tree"),
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_toml())
    }
}

impl FromStr for RunConfig {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| anyhow!("config: {}", e.to_string().trim_end()))
    }
}
