//! Monte Carlo experiments: convergence rate of sampled level sets, δ-net
//! failure frequencies, and deviation tails against closed-form bounds.
//!
//! Replication `(i, r)` of an experiment with `reps` replications per grid
//! value uses seed `base_seed + i * reps + r`; results are gathered in
//! `(i, r)` order whatever the thread schedule.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{corollary4_directions, net_failure_bound, theorem2_bound, AssumptionParams, ExponentVariant};
use crate::depth::{levelset_sampled, truncate, Emptiness};
use crate::distr::{oracle_net_delta, population_levelset, sample, DistributionSpec, ReferenceDistribution};
use crate::error::{Error, Result};
use crate::geom::{deterministic_net, is_delta_net, uniform_directions, SphereNet};
use crate::metric::{hausdorff_profiles, support_profile, SupportProfile};
use crate::quantile::LevelSpec;

/// Mixed into a replication seed to get its direction stream.
pub const DIRECTION_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;
/// Largest direction count a replication will allocate.
pub const MAX_DIRECTIONS: u64 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum DirectionsRule {
    Corollary4 { k: f64 },
    Fixed { m: u64 },
}

impl DirectionsRule {
    pub fn directions(&self, d: usize, n: usize) -> Result<u64> {
        let m = match *self {
            DirectionsRule::Corollary4 { k } => corollary4_directions(d, n as u64, k)?,
            DirectionsRule::Fixed { m } => m,
        };
        if m == 0 {
            return Err(Error::invalid("number of directions must be at least 1"));
        }
        if m > MAX_DIRECTIONS {
            return Err(Error::invalid(format!(
                "{m} directions requested at n = {n}; the limit is {MAX_DIRECTIONS}"
            )));
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateExperimentConfig {
    pub dist: ReferenceDistribution,
    pub alpha: LevelSpec,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub directions_rule: DirectionsRule,
    pub net_delta: f64,
    pub base_seed: u64,
}

impl RateExperimentConfig {
    fn validate_common(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::invalid("n_grid is empty"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("n_grid must be strictly increasing"));
        }
        if self.n_grid[0] < 2 {
            return Err(Error::invalid("sample sizes must be at least 2"));
        }
        if !(self.net_delta > 0.0 && self.net_delta < 1.0) {
            return Err(Error::invalid(format!("net_delta must lie in (0, 1), got {}", self.net_delta)));
        }
        Ok(())
    }

    /// Rate fits need at least two sample sizes and two replications each.
    pub fn validate(&self) -> Result<()> {
        self.validate_common()?;
        if self.n_grid.len() < 2 {
            return Err(Error::invalid("n_grid needs at least 2 values"));
        }
        if self.reps < 2 {
            return Err(Error::invalid(format!("reps must be at least 2, got {}", self.reps)));
        }
        Ok(())
    }

    fn seed(&self, n_index: usize, rep: usize) -> u64 {
        self.base_seed.wrapping_add((n_index * self.reps + rep) as u64)
    }
}

/// Outcome of one replication.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    pub m: u64,
    pub hausdorff: f64,
    pub certified_error: f64,
}

/// Distance between the sampled level set and the population level set.
pub struct HausdorffMeasure {
    dist: ReferenceDistribution,
    alpha: LevelSpec,
    rule: DirectionsRule,
    net: SphereNet,
    oracle: SupportProfile,
    conversion_error: f64,
    oracle_radius: f64,
}

impl HausdorffMeasure {
    pub fn new(cfg: &RateExperimentConfig) -> Result<Self> {
        let d = cfg.dist.dim();
        let pop = population_levelset(&cfg.dist, cfg.alpha)?;
        let (poly, conversion_error) = pop.to_polytope(oracle_net_delta(d))?;
        let net = deterministic_net(d, cfg.net_delta)?;
        let oracle = support_profile(&poly, &net)?;
        Ok(HausdorffMeasure {
            dist: cfg.dist.clone(),
            alpha: cfg.alpha,
            rule: cfg.directions_rule,
            net,
            oracle,
            conversion_error,
            oracle_radius: pop.outer_radius()?,
        })
    }

    /// Outer radius of the population level set.
    pub fn oracle_radius(&self) -> f64 {
        self.oracle_radius
    }

    pub fn measure(&self, n: usize, seed: u64) -> Result<Measurement> {
        let d = self.dist.dim();
        let cloud = sample(&self.dist, n, seed)?;
        let m = self.rule.directions(d, n)?;
        let dirs = uniform_directions(d, m as usize, seed ^ DIRECTION_STREAM)?;
        let mut set = levelset_sampled(&cloud, self.alpha, &dirs)?;
        if set.emptiness != Emptiness::Nonempty {
            set = truncate(&set, (n as f64).ln())?;
        }
        let prof = support_profile(&set.polytope, &self.net)?;
        let est = hausdorff_profiles(&self.oracle, &prof)?;
        Ok(Measurement {
            m,
            hausdorff: est.value,
            certified_error: est.certified_error + self.conversion_error,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub hausdorff: f64,
    pub certified_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerN {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub sd: f64,
    /// Mean of the squared distances.
    pub second_moment: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub per_n: Vec<PerN>,
    pub median_fit: LineFit,
    pub second_moment_fit: LineFit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateOutcome {
    pub fit: RateFit,
    pub rows: Vec<RateRow>,
}

/// Ordinary least squares; the slope's standard error is 0 with two points.
pub fn ols(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let k = x.len();
    if k < 2 || y.len() != k {
        return Err(Error::invalid("a line fit needs at least two paired points"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("line fit data must be finite"));
    }
    let mx = x.iter().sum::<f64>() / k as f64;
    let my = y.iter().sum::<f64>() / k as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("line fit needs distinct abscissas"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if k > 2 {
        let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
        (ssr / (k - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        stderr,
    })
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

fn summarize(n: usize, vals: &[f64]) -> PerN {
    let k = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / k;
    let var = if vals.len() > 1 {
        vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    PerN {
        n,
        mean,
        median: median(vals),
        sd: var.sqrt(),
        second_moment: vals.iter().map(|v| v * v).sum::<f64>() / k,
    }
}

fn log_fit(per_n: &[PerN], pick: impl Fn(&PerN) -> f64) -> Result<LineFit> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for p in per_n {
        let v = pick(p);
        if !(v > 0.0) {
            return Err(Error::invalid(format!("cannot fit logarithms: value {v} at n = {}", p.n)));
        }
        x.push((p.n as f64).ln());
        y.push(v.ln());
    }
    ols(&x, &y)
}

pub fn fit_rows(n_grid: &[usize], rows: &[RateRow]) -> Result<RateFit> {
    let per_n: Vec<PerN> = n_grid
        .iter()
        .map(|&n| {
            let vals: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.hausdorff).collect();
            summarize(n, &vals)
        })
        .collect();
    let mean_fit = log_fit(&per_n, |p| p.mean)?;
    Ok(RateFit {
        slope: mean_fit.slope,
        intercept: mean_fit.intercept,
        stderr: mean_fit.stderr,
        median_fit: log_fit(&per_n, |p| p.median)?,
        second_moment_fit: log_fit(&per_n, |p| p.second_moment)?,
        per_n,
    })
}

fn replicate(
    cfg: &RateExperimentConfig,
    measure: &(dyn Fn(usize, u64) -> Result<Measurement> + Sync),
) -> Result<Vec<RateRow>> {
    let tasks: Vec<(usize, usize)> = (0..cfg.n_grid.len())
        .flat_map(|i| (0..cfg.reps).map(move |r| (i, r)))
        .collect();
    tasks
        .par_iter()
        .map(|&(i, rep)| {
            let n = cfg.n_grid[i];
            let seed = cfg.seed(i, rep);
            let m = measure(n, seed)?;
            Ok(RateRow {
                n,
                rep,
                seed,
                m: m.m,
                hausdorff: m.hausdorff,
                certified_error: m.certified_error,
            })
        })
        .collect()
}

/// Rate experiment with a caller-supplied measurement `(n, seed) -> Measurement`.
pub fn run_rate_with(
    cfg: &RateExperimentConfig,
    measure: impl Fn(usize, u64) -> Result<Measurement> + Sync,
) -> Result<RateOutcome> {
    cfg.validate()?;
    let rows = replicate(cfg, &measure)?;
    let fit = fit_rows(&cfg.n_grid, &rows)?;
    Ok(RateOutcome { fit, rows })
}

pub fn run_rate_experiment(cfg: &RateExperimentConfig) -> Result<RateOutcome> {
    cfg.validate()?;
    let hm = HausdorffMeasure::new(cfg)?;
    run_rate_with(cfg, |n, seed| hm.measure(n, seed))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetRow {
    #[serde(rename = "M")]
    pub m: u64,
    pub reps: usize,
    pub failures: usize,
    pub frequency: f64,
    pub bound: f64,
    /// `sqrt(q (1 - q) / reps)` with `q = min(bound, 1)`.
    pub binomial_se: f64,
}

impl NetRow {
    /// Frequency at most `bound + 3 se`.
    pub fn within_bound(&self) -> bool {
        self.frequency <= self.bound + 3.0 * self.binomial_se
    }
}

/// For each `M`, how often `M` uniform directions fail the conservative δ-net check.
pub fn run_net_experiment(d: usize, delta: f64, m_grid: &[u64], reps: usize, seed: u64) -> Result<Vec<NetRow>> {
    if !(d == 2 || d == 3) {
        return Err(Error::invalid(format!("net experiment supports d = 2 or 3, got {d}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1], got {delta}")));
    }
    if reps == 0 || m_grid.is_empty() {
        return Err(Error::invalid("need reps >= 1 and a nonempty M grid"));
    }
    if m_grid.iter().any(|&m| m == 0 || m > MAX_DIRECTIONS) {
        return Err(Error::invalid(format!("M values must lie in [1, {MAX_DIRECTIONS}]")));
    }
    let probe = deterministic_net(d, delta / 4.0)?;
    m_grid
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let failures = (0..reps)
                .into_par_iter()
                .map(|r| -> Result<bool> {
                    let s = seed.wrapping_add((i * reps + r) as u64);
                    let dirs = uniform_directions(d, m as usize, s)?;
                    Ok(!is_delta_net(&dirs, delta, &probe)?)
                })
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .filter(|f| *f)
                .count();
            let bound = net_failure_bound(d, m, delta)?;
            let q = bound.min(1.0);
            Ok(NetRow {
                m,
                reps,
                failures,
                frequency: failures as f64 / reps as f64,
                bound,
                binomial_se: (q * (1.0 - q) / reps as f64).sqrt(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailRow {
    pub n: usize,
    pub x: f64,
    /// `C x / √n`.
    pub threshold: f64,
    pub exceedances: usize,
    pub reps: usize,
    pub empirical: f64,
    /// Empty when `x` lies outside the bound's domain.
    pub bound: Option<f64>,
    pub log_bound: Option<f64>,
    pub in_domain: bool,
}

impl TailRow {
    pub fn satisfied(&self) -> bool {
        self.empirical <= self.bound.unwrap_or(1.0).max(1.0)
    }
}

/// Empirical `P[d_H > C x / √n]` for each `n` of the grid and each `x`.
pub fn run_tail_experiment(
    cfg: &RateExperimentConfig,
    params: &AssumptionParams,
    x_grid: &[f64],
    variant: ExponentVariant,
) -> Result<Vec<TailRow>> {
    check_tail(cfg, params, x_grid)?;
    let hm = HausdorffMeasure::new(cfg)?;
    run_tail_with(cfg, params, x_grid, variant, |n, seed| hm.measure(n, seed))
}

fn check_tail(cfg: &RateExperimentConfig, params: &AssumptionParams, x_grid: &[f64]) -> Result<()> {
    cfg.validate_common()?;
    if cfg.reps == 0 {
        return Err(Error::invalid("reps must be at least 1"));
    }
    if x_grid.is_empty() || x_grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("x grid must be a nonempty list of finite values"));
    }
    params.validate()
}

pub fn run_tail_with(
    cfg: &RateExperimentConfig,
    params: &AssumptionParams,
    x_grid: &[f64],
    variant: ExponentVariant,
    measure: impl Fn(usize, u64) -> Result<Measurement> + Sync,
) -> Result<Vec<TailRow>> {
    check_tail(cfg, params, x_grid)?;
    let d = cfg.dist.dim();
    let c = params.c_constant();
    let rows = replicate(cfg, &measure)?;
    let mut out = Vec::new();
    for &n in &cfg.n_grid {
        let vals: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.hausdorff).collect();
        for &x in x_grid {
            let threshold = c * x / (n as f64).sqrt();
            let exceedances = vals.iter().filter(|&&v| v > threshold).count();
            let (bound, log_bound, in_domain) = match theorem2_bound(params, d, n, x, variant) {
                Ok(b) => (Some(b.probability_bound), Some(b.log_probability_bound), true),
                Err(Error::OutOfDomain { .. }) => (None, None, false),
                Err(e) => return Err(e),
            };
            out.push(TailRow {
                n,
                x,
                threshold,
                exceedances,
                reps: vals.len(),
                empirical: exceedances as f64 / vals.len() as f64,
                bound,
                log_bound,
                in_domain,
            });
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct RateSummary<'a> {
    slope: f64,
    intercept: f64,
    stderr: f64,
    per_n: &'a [PerN],
    median_fit: LineFit,
    second_moment_fit: LineFit,
    config: ConfigEcho,
}

#[derive(Serialize)]
struct ConfigEcho {
    dist: DistributionSpec,
    alpha: f64,
    n_grid: Vec<usize>,
    reps: usize,
    directions: DirectionsRule,
    net_delta: f64,
    base_seed: u64,
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let io = |e: csv::Error| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes `rate_raw.csv` and `rate_summary.json`.
pub fn write_rate_outputs(dir: &Path, cfg: &RateExperimentConfig, out: &RateOutcome) -> Result<()> {
    ensure_dir(dir)?;
    write_csv(&dir.join("rate_raw.csv"), &out.rows)?;
    let summary = RateSummary {
        slope: out.fit.slope,
        intercept: out.fit.intercept,
        stderr: out.fit.stderr,
        per_n: &out.fit.per_n,
        median_fit: out.fit.median_fit,
        second_moment_fit: out.fit.second_moment_fit,
        config: ConfigEcho {
            dist: cfg.dist.to_spec(),
            alpha: cfg.alpha.alpha(),
            n_grid: cfg.n_grid.clone(),
            reps: cfg.reps,
            directions: cfg.directions_rule,
            net_delta: cfg.net_delta,
            base_seed: cfg.base_seed,
        },
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    crate::io::write_text(&dir.join("rate_summary.json"), &text)
}

pub fn write_net_outputs(dir: &Path, rows: &[NetRow]) -> Result<()> {
    ensure_dir(dir)?;
    write_csv(&dir.join("net_raw.csv"), rows)
}

pub fn write_tail_outputs(dir: &Path, rows: &[TailRow]) -> Result<()> {
    ensure_dir(dir)?;
    write_csv(&dir.join("tail_raw.csv"), rows)
}
