//! `tukey`: depth queries, depth level sets, Hausdorff distances between
//! H-polytopes, and the Monte Carlo experiments.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 when an input is
//! empty or unbounded where a bounded body is required.

mod experiment;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tukey_levelsets::depth::{
    depth_exact_2d, depth_upper_bound, depth_upper_bound_net, levelset_exact_2d, levelset_sampled, truncate,
};
use tukey_levelsets::geom::{deterministic_net, uniform_directions};
use tukey_levelsets::io::{polytope_csv, read_point_cloud, read_polytope, write_polytope};
use tukey_levelsets::metric::hausdorff_support;
use tukey_levelsets::{Direction, Error, LevelSpec};

use crate::experiment::ExperimentCmd;
use crate::format::{sig12, sig12_trimmed};

#[derive(Parser, Debug)]
#[command(name = "tukey", version, about = "Tukey depth level sets and their sampled approximations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Halfspace depth of one point in a point cloud.
    Depth(DepthArgs),
    /// H-representation of the empirical depth level set.
    Levelset(LevelsetArgs),
    /// Hausdorff distance between two H-polytopes.
    Hausdorff(HausdorffArgs),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DepthMethod {
    Exact2d,
    Net,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LevelsetMethod {
    Exact2d,
    Sampled,
}

#[derive(clap::Args, Debug)]
struct DepthArgs {
    /// Point cloud CSV, one point per row.
    #[arg(long)]
    input: PathBuf,
    /// Query point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    point: Vec<f64>,
    #[arg(long, value_enum, default_value = "exact2d")]
    method: DepthMethod,
    /// Covering radius of the deterministic net used by `--method net`.
    #[arg(long, default_value_t = 0.01)]
    net_delta: f64,
    /// Use this many seeded uniform directions instead of the deterministic net.
    #[arg(long)]
    directions: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// First line of the input is a header.
    #[arg(long)]
    header: bool,
}

#[derive(clap::Args, Debug)]
struct LevelsetArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "exact2d")]
    method: LevelsetMethod,
    /// Number of uniform directions for `--method sampled`.
    #[arg(long, default_value_t = 1000)]
    directions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Intersect with the ball of radius ln n; an empty set becomes {0}.
    #[arg(long)]
    truncate_log_n: bool,
    /// Where to write the constraints; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    header: bool,
    /// Use the coordinate directions ±e_i as the sampled directions.
    #[arg(long, hide = true)]
    axes: bool,
}

#[derive(clap::Args, Debug)]
struct HausdorffArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    net_delta: f64,
}

pub(crate) fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotABody(_) | Error::EmptyPolytope | Error::EmptyOrDegenerate(_) => 3,
        Error::SolverFailure(_) | Error::NotOptimal(_) => 1,
        _ => 2,
    }
}

fn run_depth(a: DepthArgs) -> Result<(), Error> {
    if let Some(0) = a.directions {
        return Err(Error::invalid("--directions must be at least 1"));
    }
    let cloud = read_point_cloud(&a.input, a.header)?;
    if a.point.len() != cloud.dim() {
        return Err(Error::DimensionMismatch {
            expected: cloud.dim(),
            found: a.point.len(),
        });
    }
    let (depth, note) = match a.method {
        DepthMethod::Exact2d => (depth_exact_2d(&cloud, &a.point)?, ""),
        DepthMethod::Net => {
            let r = match a.directions {
                Some(m) => depth_upper_bound(&cloud, &a.point, &uniform_directions(cloud.dim(), m, a.seed)?)?,
                None => depth_upper_bound_net(&cloud, &a.point, &deterministic_net(cloud.dim(), a.net_delta)?)?,
            };
            (r, " upper-bound")
        }
    };
    println!("depth {} ({}){note}", depth, sig12_trimmed(depth.value()));
    Ok(())
}

fn run_levelset(a: LevelsetArgs) -> Result<(), Error> {
    let level = LevelSpec::new(a.alpha)?;
    if matches!(a.method, LevelsetMethod::Sampled) && a.directions == 0 && !a.axes {
        return Err(Error::invalid("--directions must be at least 1"));
    }
    let cloud = read_point_cloud(&a.input, a.header)?;
    let mut set = match a.method {
        LevelsetMethod::Exact2d => levelset_exact_2d(&cloud, level)?,
        LevelsetMethod::Sampled => {
            let dirs = if a.axes {
                Direction::canonical(cloud.dim())?
            } else {
                uniform_directions(cloud.dim(), a.directions, a.seed)?
            };
            levelset_sampled(&cloud, level, &dirs)?
        }
    };
    if a.truncate_log_n {
        let r = (cloud.n() as f64).ln();
        if r <= 0.0 {
            return Err(Error::invalid("--truncate-log-n needs at least 2 points"));
        }
        set = truncate(&set, r)?;
    }
    let status = format!("status {} constraints {}", set.emptiness, set.polytope.len());
    match &a.output {
        Some(path) => {
            write_polytope(path, &set.polytope)?;
            println!("{status}");
        }
        None => {
            print!("{}", polytope_csv(&set.polytope));
            eprintln!("{status}");
        }
    }
    Ok(())
}

fn run_hausdorff(a: HausdorffArgs) -> Result<(), Error> {
    if !(a.net_delta > 0.0 && a.net_delta < 1.0) {
        return Err(Error::invalid(format!("--net-delta must lie in (0, 1), got {}", a.net_delta)));
    }
    let p = read_polytope(&a.a)?;
    let q = read_polytope(&a.b)?;
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let net = deterministic_net(p.dim(), a.net_delta)?;
    let est = hausdorff_support(&p, &q, &net)?;
    println!("{} {}", sig12(est.value), sig12(est.certified_error));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Depth(a) => run_depth(a),
        Command::Levelset(a) => run_levelset(a),
        Command::Hausdorff(a) => run_hausdorff(a),
        Command::Experiment(e) => experiment::run(e),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Error::NotABody(status) = &e {
                println!("{status}");
            }
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
