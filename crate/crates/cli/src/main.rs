//! `cat0vis`: seeded experiments on boundary metrics of model CAT(0) spaces.
//!
//! Every run resolves a [`RunConfig`] (file, then flags), validates it, computes
//! in memory and only then writes its outputs and a `manifest.json`.
//! Exit status: 0 when every verdict passes, 2 when one fails, 1 on usage,
//! configuration or computation errors.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use cat0_boundary::visuality::VisualParameter;
use clap::{Args, Parser, Subcommand};

use config::{Experiment, MetricConfig, RunConfig};

#[derive(Parser)]
#[command(name = "cat0vis", version, about = "Boundary metrics of CAT(0) model spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pairwise distances of a boundary sample, with a triangle check.
    Metric(Overrides),
    /// Ratio envelope between two metrics and the control function relating them.
    Compare(Overrides),
    /// Push an interior ball cover out to the boundary at several scales.
    CoverPushout(Overrides),
    /// Push boundary covers into annular tubes and check the tube claims.
    CoverPushin(Overrides),
    /// Order of controlled covers across scales.
    EllDim(Overrides),
    /// Fit a metric against a^-(x,y) over random pairs.
    VisualFit(Overrides),
    /// The 4-valent tree demonstrations: visual dbar, non-visual d_1, non-QS, uniform perfectness.
    DemoT4(Overrides),
    /// Run whatever experiment a config file names.
    Run(Overrides),
}

#[derive(Args, Default)]
struct Overrides {
    /// TOML run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "out")]
    out_dir: Option<PathBuf>,
    /// tree:<valence>, euclidean:<dim> or hyperbolic.
    #[arg(long)]
    space: Option<String>,
    /// Basepoint of the space, e.g. `t:0`, `e:1,0`, `h:0.5,0`.
    #[arg(long)]
    basepoint: Option<String>,
    /// d_a:<A> or dbar.
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    metric_basepoint: Option<String>,
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    target_basepoint: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated scales.
    #[arg(long, value_delimiter = ',')]
    scales: Option<Vec<f64>>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    triples: Option<usize>,
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    interior: Option<usize>,
    #[arg(long)]
    window: Option<f64>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long = "K")]
    k_max: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    lambda0: Option<f64>,
    /// `A` of the metric a pushout is measured in.
    #[arg(long = "A")]
    cover_a: Option<f64>,
    /// Visual parameter: `e` or a number above 1.
    #[arg(long = "a")]
    visual_a: Option<VisualParameter>,
    #[arg(long)]
    n_max: Option<u64>,
    #[arg(long)]
    factor: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    perfect_c: Option<f64>,
    /// Print the resolved configuration and exit without running.
    #[arg(long)]
    print_config: bool,
}

impl Overrides {
    fn resolve(&self, experiment: Option<Experiment>) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                text.parse::<RunConfig>().with_context(|| format!("in {}", path.display()))?
            }
            None => RunConfig::new(experiment.unwrap_or(Experiment::Metric)),
        };
        if let Some(e) = experiment {
            c.experiment = e;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.out_dir {
            c.out_dir = v.clone();
        }
        if let Some(v) = &self.space {
            c.space.kind = v.clone();
        }
        if let Some(v) = &self.basepoint {
            c.space.basepoint = Some(v.clone());
        }
        if let Some(v) = &self.metric {
            c.metric.family = v.clone();
        }
        if let Some(v) = &self.metric_basepoint {
            c.metric.basepoint = Some(v.clone());
        }
        if let Some(v) = &self.target {
            c.target.get_or_insert_with(|| MetricConfig::parse(v)).family = v.clone();
        }
        if let Some(v) = &self.target_basepoint {
            c.target.get_or_insert_with(|| c.metric.clone()).basepoint = Some(v.clone());
        }
        if let Some(v) = self.tol {
            c.metric.tol = v;
            if let Some(t) = &mut c.target {
                t.tol = v;
            }
        }
        if let Some(v) = &self.scales {
            c.scales = v.clone();
        }
        let s = &mut c.sample;
        set(&mut s.points, self.points);
        set(&mut s.triples, self.triples);
        set(&mut s.pairs, self.pairs);
        set(&mut s.interior, self.interior);
        set(&mut s.window, self.window);
        let k = &mut c.cover;
        set(&mut k.r, self.r);
        set(&mut k.k_max, self.k_max);
        set(&mut k.lambda0, self.lambda0);
        set(&mut k.a, self.cover_a);
        if self.c.is_some() {
            k.c = self.c;
        }
        let v = &mut c.visual;
        set(&mut v.a, self.visual_a);
        set(&mut v.n_max, self.n_max);
        set(&mut v.factor, self.factor);
        set(&mut v.delta, self.delta);
        set(&mut v.perfect_c, self.perfect_c);
        Ok(c)
    }
}

fn set<T>(field: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *field = v;
    }
}

fn execute(cli: Cli) -> Result<bool> {
    let (experiment, flags) = match cli.command {
        Command::Metric(o) => (Some(Experiment::Metric), o),
        Command::Compare(o) => (Some(Experiment::Compare), o),
        Command::CoverPushout(o) => (Some(Experiment::CoverPushout), o),
        Command::CoverPushin(o) => (Some(Experiment::CoverPushin), o),
        Command::EllDim(o) => (Some(Experiment::EllDim), o),
        Command::VisualFit(o) => (Some(Experiment::VisualFit), o),
        Command::DemoT4(o) => (Some(Experiment::DemoT4), o),
        Command::Run(o) => {
            anyhow::ensure!(o.config.is_some(), "config: `run` needs --config");
            (None, o)
        }
    };
    let config = flags.resolve(experiment)?;
    config.validate()?;
    if flags.print_config {
        print!("{config}");
        return Ok(true);
    }
    let artifacts = experiments::run(&config)?;
    for line in &artifacts.summary {
        println!("{line}");
    }
    for (name, pass) in &artifacts.verdicts {
        println!("verdict {name}: {}", if *pass { "pass" } else { "FAIL" });
    }
    let pass = artifacts.pass();
    let written = artifacts.write(&config)?;
    println!("wrote {} files to {}", written.len(), config.out_dir.display());
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
