//! `tukey experiment rate|net|tail`. Settings come from flags, then from the
//! `--config` JSON file, then from defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde::Deserialize;
use serde_json::Value;
use tukey_levelsets::bounds::{theorem2_domain, AssumptionParams, ExponentVariant};
use tukey_levelsets::distr::DistributionSpec;
use tukey_levelsets::experiments::{
    run_net_experiment, run_rate_experiment, run_tail_experiment, write_net_outputs, write_rate_outputs,
    write_tail_outputs, DirectionsRule, RateExperimentConfig,
};
use tukey_levelsets::{Error, LevelSpec};

use crate::format::sig12;

#[derive(Subcommand, Debug)]
pub enum ExperimentCmd {
    /// Log-log fit of the mean Hausdorff error against n.
    Rate(RateArgs),
    /// Failure frequency of uniform directions as a δ-net against its bound.
    Net(NetArgs),
    /// Empirical deviation tails against the closed-form bound.
    Tail(TailArgs),
}

#[derive(Args, Debug)]
pub struct Common {
    /// JSON file with any of the settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
    /// Worker threads; all available cores when absent.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Distribution kind with standard parameters; use --config for others.
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    /// Fixed number of sampled directions.
    #[arg(long, conflicts_with = "corollary4_k")]
    directions: Option<u64>,
    /// Take the number of directions from the sample-size rule with this k.
    #[arg(long)]
    corollary4_k: Option<f64>,
    /// Covering radius of the net used for Hausdorff estimation.
    #[arg(long)]
    net_delta: Option<f64>,
}

#[derive(Args, Debug)]
pub struct RateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sample: SampleArgs,
}

#[derive(Args, Debug)]
pub struct NetArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    m_grid: Option<Vec<u64>>,
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Args, Debug)]
pub struct TailArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sample: SampleArgs,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x_grid: Option<Vec<f64>>,
    #[arg(long)]
    exponent_variant: Option<ExponentVariant>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    dist: Option<DistributionSpec>,
    alpha: Option<f64>,
    n_grid: Option<Vec<usize>>,
    reps: Option<usize>,
    directions: Option<DirectionsRule>,
    net_delta: Option<f64>,
    seed: Option<u64>,
    threads: Option<usize>,
    dim: Option<usize>,
    delta: Option<f64>,
    m_grid: Option<Vec<u64>>,
    x_grid: Option<Vec<f64>>,
    params: Option<AssumptionParams>,
    exponent_variant: Option<ExponentVariant>,
}

fn load(path: Option<&Path>) -> Result<FileConfig, Error> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        msg: e.to_string(),
    })
}

fn set_threads(flag: Option<usize>, file: Option<usize>) -> Result<(), Error> {
    if let Some(n) = flag.or(file) {
        if n == 0 {
            return Err(Error::invalid("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

struct Defaults {
    n_grid: Vec<usize>,
    reps: usize,
}

fn rate_config(s: &SampleArgs, seed: Option<u64>, f: &FileConfig, def: Defaults) -> Result<RateExperimentConfig, Error> {
    let spec = match (&s.dist, s.dim, &f.dist) {
        (None, None, Some(spec)) => spec.clone(),
        (kind, dim, file) => {
            let kind = kind.clone().or(file.as_ref().map(|x| x.kind.clone())).unwrap_or_else(|| "gaussian".into());
            let dim = dim.or(file.as_ref().map(|x| x.dim)).unwrap_or(2);
            // keep file parameters only when they still describe the same family and dimension
            let params = match file {
                Some(x) if x.kind == kind && x.dim == dim => x.params.clone(),
                _ => Value::Null,
            };
            DistributionSpec {
                kind,
                dim,
                params,
                seed: None,
            }
        }
    };
    let directions_rule = match (s.directions, s.corollary4_k) {
        (Some(m), _) => DirectionsRule::Fixed { m },
        (None, Some(k)) => DirectionsRule::Corollary4 { k },
        (None, None) => f.directions.unwrap_or(DirectionsRule::Fixed { m: 4000 }),
    };
    Ok(RateExperimentConfig {
        dist: spec.build()?,
        alpha: LevelSpec::new(s.alpha.or(f.alpha).unwrap_or(0.2))?,
        n_grid: s.n_grid.clone().or(f.n_grid.clone()).unwrap_or(def.n_grid),
        reps: s.reps.or(f.reps).unwrap_or(def.reps),
        directions_rule,
        net_delta: s.net_delta.or(f.net_delta).unwrap_or(0.01),
        base_seed: seed.or(f.seed).unwrap_or(0),
    })
}

pub fn run(cmd: ExperimentCmd) -> Result<(), Error> {
    match cmd {
        ExperimentCmd::Rate(a) => rate(a),
        ExperimentCmd::Net(a) => net(a),
        ExperimentCmd::Tail(a) => tail(a),
    }
}

fn rate(a: RateArgs) -> Result<(), Error> {
    let f = load(a.common.config.as_deref())?;
    let def = Defaults {
        n_grid: vec![250, 1000, 4000],
        reps: 50,
    };
    let cfg = rate_config(&a.sample, a.common.seed, &f, def)?;
    cfg.validate()?;
    set_threads(a.common.threads, f.threads)?;
    let out = run_rate_experiment(&cfg)?;
    write_rate_outputs(&a.common.output_dir, &cfg, &out)?;
    println!(
        "slope {} intercept {} stderr {}",
        sig12(out.fit.slope),
        sig12(out.fit.intercept),
        sig12(out.fit.stderr)
    );
    for p in &out.fit.per_n {
        println!("n {} mean {} median {} sd {}", p.n, sig12(p.mean), sig12(p.median), sig12(p.sd));
    }
    Ok(())
}

fn net(a: NetArgs) -> Result<(), Error> {
    let f = load(a.common.config.as_deref())?;
    let d = a.dim.or(f.dim).unwrap_or(2);
    let delta = a.delta.or(f.delta).unwrap_or(1.0);
    let m_grid = a.m_grid.or(f.m_grid).unwrap_or_else(|| vec![10, 30, 100, 300, 1000]);
    let reps = a.reps.or(f.reps).unwrap_or(500);
    let seed = a.common.seed.or(f.seed).unwrap_or(0);
    set_threads(a.common.threads, f.threads)?;
    let rows = run_net_experiment(d, delta, &m_grid, reps, seed)?;
    write_net_outputs(&a.common.output_dir, &rows)?;
    for r in &rows {
        println!(
            "M {} failures {}/{} frequency {} bound {} within-bound {}",
            r.m,
            r.failures,
            r.reps,
            sig12(r.frequency),
            sig12(r.bound),
            if r.within_bound() { "yes" } else { "no" }
        );
    }
    Ok(())
}

fn tail(a: TailArgs) -> Result<(), Error> {
    let f = load(a.common.config.as_deref())?;
    let def = Defaults {
        n_grid: vec![1000],
        reps: 200,
    };
    let cfg = rate_config(&a.sample, a.common.seed, &f, def)?;
    let d = cfg.dist.dim();
    let params = match (f.params.clone(), cfg.dist.isotropic_sigma()) {
        (Some(p), _) => p,
        (None, Some(sigma)) => AssumptionParams::for_isotropic_gaussian(d, sigma, cfg.alpha)?,
        (None, None) => {
            return Err(Error::invalid(
                "no default constants for this distribution; give \"params\" in --config",
            ))
        }
    };
    params.validate()?;
    let x_grid = match a.x_grid.or(f.x_grid.clone()) {
        Some(x) => x,
        None => {
            let (lo, hi) = theorem2_domain(&params, d, *cfg.n_grid.first().unwrap_or(&1));
            if lo < hi {
                (0..6).map(|i| lo + (hi - lo) * i as f64 / 6.0).collect()
            } else {
                vec![0.5, 1.0, 2.0, 4.0, 8.0]
            }
        }
    };
    let variant = a.exponent_variant.or(f.exponent_variant).unwrap_or_default();
    set_threads(a.common.threads, f.threads)?;
    let rows = run_tail_experiment(&cfg, &params, &x_grid, variant)?;
    write_tail_outputs(&a.common.output_dir, &rows)?;
    for r in &rows {
        println!(
            "n {} x {} threshold {} empirical {} bound {} satisfied {}",
            r.n,
            sig12(r.x),
            sig12(r.threshold),
            sig12(r.empirical),
            r.bound.map(sig12).unwrap_or_else(|| "out-of-domain".into()),
            if r.satisfied() { "yes" } else { "no" }
        );
    }
    Ok(())
}
