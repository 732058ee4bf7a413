//! Reference distributions, their samplers and population level sets.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::depth::{classify, Emptiness};
use crate::error::{Error, Result};
use crate::geom::{self, Direction, HPolytope, Halfspace, PointCloud};
use crate::linprog::SupportEvaluator;
use crate::quantile::{normal_inverse_cdf, uniform_ball_quantile, Gaussian, LevelSpec};

const CALIBRATION_TRIALS: usize = 100_000;
const MIN_ACCEPTANCE: f64 = 1e-4;
const CALIBRATION_STREAM: u64 = 0xC0FF_EE00_D15E_A5E5;

#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceDistribution {
    Gaussian(Gaussian),
    UniformBall {
        center: Vec<f64>,
        radius: f64,
    },
    UniformPolytope(HPolytope),
    AtomMixture {
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
        background: Option<Box<ReferenceDistribution>>,
    },
}

impl ReferenceDistribution {
    pub fn gaussian(mean: Vec<f64>, cov: &[Vec<f64>]) -> Result<Self> {
        Ok(ReferenceDistribution::Gaussian(Gaussian::new(mean, cov)?))
    }

    pub fn standard_gaussian(d: usize) -> Result<Self> {
        Ok(ReferenceDistribution::Gaussian(Gaussian::isotropic(vec![0.0; d], 1.0)?))
    }

    pub fn uniform_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.len() < 2 {
            return Err(Error::invalid("uniform ball needs d >= 2"));
        }
        if !(radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("invalid ball center/radius (radius {radius})")));
        }
        Ok(ReferenceDistribution::UniformBall { center, radius })
    }

    /// Requires a bounded nonempty polytope.
    pub fn uniform_polytope(polytope: HPolytope) -> Result<Self> {
        match classify(&polytope)? {
            Emptiness::Nonempty => Ok(ReferenceDistribution::UniformPolytope(polytope)),
            e => Err(Error::NotABody(e.as_str())),
        }
    }

    pub fn atom_mixture(
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
        background: Option<ReferenceDistribution>,
    ) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::invalid("atom mixture needs one weight per atom and at least one atom"));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d || p.iter().any(|v| !v.is_finite())) {
            return Err(Error::invalid("atoms must be finite points of one dimension"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::invalid("atom weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::invalid(format!("atom weights sum to {total} > 1")));
        }
        if let Some(b) = &background {
            if b.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: b.dim(),
                });
            }
        } else if total < 1.0 - 1e-12 {
            return Err(Error::invalid("atom weights sum below 1 but no background is given"));
        }
        Ok(ReferenceDistribution::AtomMixture {
            points,
            weights,
            background: background.map(Box::new),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ReferenceDistribution::Gaussian(g) => g.dim(),
            ReferenceDistribution::UniformBall { center, .. } => center.len(),
            ReferenceDistribution::UniformPolytope(p) => p.dim(),
            ReferenceDistribution::AtomMixture { points, .. } => points[0].len(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ReferenceDistribution::Gaussian(_) => "gaussian",
            ReferenceDistribution::UniformBall { .. } => "uniform-ball",
            ReferenceDistribution::UniformPolytope(_) => "uniform-polytope",
            ReferenceDistribution::AtomMixture { .. } => "atom-mixture",
        }
    }

    pub fn to_spec(&self) -> DistributionSpec {
        let params = match self {
            ReferenceDistribution::Gaussian(g) => {
                let d = g.dim();
                let cov: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| g.cov()[(i, j)]).collect()).collect();
                json!({ "mean": g.mean(), "cov": cov })
            }
            ReferenceDistribution::UniformBall { center, radius } => {
                json!({ "center": center, "radius": radius })
            }
            ReferenceDistribution::UniformPolytope(p) => {
                let a: Vec<&[f64]> = p.halfspaces().iter().map(|h| h.normal.coords()).collect();
                let b: Vec<f64> = p.halfspaces().iter().map(|h| h.offset).collect();
                json!({ "a": a, "b": b })
            }
            ReferenceDistribution::AtomMixture {
                points,
                weights,
                background,
            } => {
                let bg = background.as_ref().map(|b| serde_json::to_value(b.to_spec()).expect("spec serializes"));
                json!({ "points": points, "weights": weights, "background": bg })
            }
        };
        DistributionSpec {
            kind: self.kind().to_string(),
            dim: self.dim(),
            params,
            seed: None,
        }
    }

    /// `Some(σ)` when the covariance is exactly `σ² I`.
    pub fn isotropic_sigma(&self) -> Option<f64> {
        let ReferenceDistribution::Gaussian(g) = self else {
            return None;
        };
        let c = g.cov();
        let d = g.dim();
        let s2 = c[(0, 0)];
        let iso = (0..d).all(|i| (0..d).all(|j| c[(i, j)] == if i == j { s2 } else { 0.0 }));
        iso.then(|| s2.sqrt())
    }
}

/// `{"kind": ..., "dim": ..., "params": {...}}` description of a distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub kind: String,
    pub dim: usize,
    #[serde(default)]
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GaussianParams {
    mean: Option<Vec<f64>>,
    cov: Option<Vec<Vec<f64>>>,
    sigma: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BallParams {
    center: Option<Vec<f64>>,
    radius: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolytopeParams {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureParams {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    background: Option<DistributionSpec>,
}

fn params<T: for<'de> Deserialize<'de>>(v: &Value) -> Result<T> {
    let v = if v.is_null() { json!({}) } else { v.clone() };
    serde_json::from_value(v).map_err(|e| Error::invalid(format!("bad distribution params: {e}")))
}

impl DistributionSpec {
    pub fn build(&self) -> Result<ReferenceDistribution> {
        let d = self.dim;
        if d < 1 {
            return Err(Error::invalid("distribution dim must be at least 1"));
        }
        let dist = match self.kind.as_str() {
            "gaussian" => {
                let p: GaussianParams = params(&self.params)?;
                let mean = p.mean.unwrap_or_else(|| vec![0.0; d]);
                match (p.cov, p.sigma) {
                    (Some(_), Some(_)) => return Err(Error::invalid("give either cov or sigma, not both")),
                    (Some(cov), None) => ReferenceDistribution::gaussian(mean, &cov)?,
                    (None, sigma) => {
                        let s = sigma.unwrap_or(1.0);
                        if !(s > 0.0) {
                            return Err(Error::invalid(format!("sigma must be positive, got {s}")));
                        }
                        ReferenceDistribution::Gaussian(Gaussian::isotropic(mean, s)?)
                    }
                }
            }
            "uniform-ball" => {
                let p: BallParams = params(&self.params)?;
                ReferenceDistribution::uniform_ball(p.center.unwrap_or_else(|| vec![0.0; d]), p.radius.unwrap_or(1.0))?
            }
            "uniform-polytope" => {
                let p: PolytopeParams = params(&self.params)?;
                if p.a.len() != p.b.len() {
                    return Err(Error::invalid("polytope params need as many offsets as normals"));
                }
                let hs = p
                    .a
                    .into_iter()
                    .zip(p.b)
                    .map(|(a, t)| Halfspace::from_raw(a, t))
                    .collect::<Result<Vec<_>>>()?;
                ReferenceDistribution::uniform_polytope(HPolytope::new(d, hs)?)?
            }
            "atom-mixture" => {
                let p: MixtureParams = params(&self.params)?;
                let bg = p.background.map(|b| b.build()).transpose()?;
                ReferenceDistribution::atom_mixture(p.points, p.weights, bg)?
            }
            other => return Err(Error::UnsupportedDistribution(format!("unknown kind '{other}'"))),
        };
        if dist.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: dist.dim(),
            });
        }
        Ok(dist)
    }
}

enum Prepared<'a> {
    Gaussian {
        mean: &'a [f64],
        chol: DMatrix<f64>,
    },
    Ball {
        center: &'a [f64],
        radius: f64,
    },
    Polytope {
        poly: &'a HPolytope,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Mixture {
        points: &'a [Vec<f64>],
        cumulative: Vec<f64>,
        background: Option<Box<Prepared<'a>>>,
    },
}

fn bounding_box(poly: &HPolytope) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = poly.dim();
    let mut ev = SupportEvaluator::new(poly)?;
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for i in 0..d {
        let up = ev.support(&Direction::axis(d, i, true)?)?;
        let down = ev.support(&Direction::axis(d, i, false)?)?;
        match (up.finite(), down.finite()) {
            (Some(h), Some(l)) => {
                hi[i] = h;
                lo[i] = -l;
            }
            _ => return Err(Error::NotABody("unbounded")),
        }
    }
    Ok((lo, hi))
}

fn prepare(dist: &ReferenceDistribution, seed: u64) -> Result<Prepared<'_>> {
    Ok(match dist {
        ReferenceDistribution::Gaussian(g) => Prepared::Gaussian {
            mean: g.mean(),
            chol: g.cov().clone().cholesky().expect("validated SPD").l(),
        },
        ReferenceDistribution::UniformBall { center, radius } => Prepared::Ball {
            center,
            radius: *radius,
        },
        ReferenceDistribution::UniformPolytope(poly) => {
            let (lo, hi) = bounding_box(poly)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ CALIBRATION_STREAM);
            let mut x = vec![0.0; poly.dim()];
            let mut hits = 0usize;
            for _ in 0..CALIBRATION_TRIALS {
                fill_box(&mut rng, &lo, &hi, &mut x);
                hits += poly.min_slack(&x).ge(&0.0) as usize;
            }
            let rate = hits as f64 / CALIBRATION_TRIALS as f64;
            if rate < MIN_ACCEPTANCE {
                return Err(Error::DegeneratePolytope { rate });
            }
            Prepared::Polytope { poly, lo, hi }
        }
        ReferenceDistribution::AtomMixture {
            points,
            weights,
            background,
        } => {
            let mut acc = 0.0;
            let cumulative = weights
                .iter()
                .map(|w| {
                    acc += w;
                    acc
                })
                .collect();
            Prepared::Mixture {
                points,
                cumulative,
                background: background.as_ref().map(|b| prepare(b, seed).map(Box::new)).transpose()?,
            }
        }
    })
}

fn fill_box(rng: &mut ChaCha8Rng, lo: &[f64], hi: &[f64], x: &mut [f64]) {
    for ((xi, l), h) in x.iter_mut().zip(lo).zip(hi) {
        *xi = if h > l { rng.random_range(*l..*h) } else { *l };
    }
}

impl Prepared<'_> {
    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) {
        match self {
            Prepared::Gaussian { mean, chol } => {
                let d = mean.len();
                let z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
                for i in 0..d {
                    let s: f64 = (0..=i).map(|k| chol[(i, k)] * z[k]).sum();
                    out.push(mean[i] + s);
                }
            }
            Prepared::Ball { center, radius } => {
                let d = center.len();
                let (z, nz) = loop {
                    let z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
                    let nz = geom::norm(&z);
                    if nz > 0.0 {
                        break (z, nz);
                    }
                };
                let u: f64 = rng.random();
                let r = radius * u.powf(1.0 / d as f64);
                out.extend(center.iter().zip(&z).map(|(c, zi)| c + r * zi / nz));
            }
            Prepared::Polytope { poly, lo, hi } => {
                let mut x = vec![0.0; poly.dim()];
                loop {
                    fill_box(rng, lo, hi, &mut x);
                    if poly.min_slack(&x) >= 0.0 {
                        break;
                    }
                }
                out.extend_from_slice(&x);
            }
            Prepared::Mixture {
                points,
                cumulative,
                background,
            } => {
                let t: f64 = rng.random();
                match cumulative.iter().position(|&c| t < c) {
                    Some(k) => out.extend_from_slice(&points[k]),
                    None => match background {
                        Some(b) => b.draw(rng, out),
                        // Weights sum to one up to rounding.
                        None => out.extend_from_slice(&points[points.len() - 1]),
                    },
                }
            }
        }
    }
}

/// `n` independent draws; the same seed gives the same cloud.
pub fn sample(dist: &ReferenceDistribution, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    let prep = prepare(dist, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * dist.dim());
    for _ in 0..n {
        prep.draw(&mut rng, &mut data);
    }
    PointCloud::new(dist.dim(), data)
}

#[derive(Clone, Debug, PartialEq)]
pub enum PopulationShape {
    Ball { center: Vec<f64>, radius: f64 },
    Polytope(HPolytope),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PopulationLevelSet {
    pub shape: PopulationShape,
    pub alpha: LevelSpec,
}

/// Net radius used when a level set has no closed form.
pub fn oracle_net_delta(d: usize) -> f64 {
    if d == 2 {
        0.001
    } else {
        0.02
    }
}

impl PopulationLevelSet {
    /// H-polytope circumscribing the level set on a covering net of radius
    /// `delta`, with the Hausdorff error of that replacement.
    pub fn to_polytope(&self, delta: f64) -> Result<(HPolytope, f64)> {
        match &self.shape {
            PopulationShape::Ball { center, radius } => {
                let net = geom::deterministic_net(center.len(), delta)?;
                let p = HPolytope::circumscribing_ball(center, *radius, &net.directions)?;
                Ok((p, 2.0 * radius * delta / (1.0 - delta)))
            }
            PopulationShape::Polytope(p) => Ok((p.clone(), 0.0)),
        }
    }

    /// `|center| + radius`, or the outer radius estimate of the polytope.
    pub fn outer_radius(&self) -> Result<f64> {
        match &self.shape {
            PopulationShape::Ball { center, radius } => Ok(geom::norm(center) + radius),
            PopulationShape::Polytope(p) => {
                let (lo, hi) = bounding_box(p)?;
                Ok(lo.iter().zip(&hi).map(|(l, h)| l.abs().max(h.abs()).powi(2)).sum::<f64>().sqrt())
            }
        }
    }
}

/// Depth level set of an oracle distribution. Centrally symmetric kinds have
/// maximal depth 1/2, so `α > 1/2` is refused; `α = 1/2` gives the center.
pub fn population_levelset(dist: &ReferenceDistribution, level: LevelSpec) -> Result<PopulationLevelSet> {
    let a = level.alpha();
    let symmetric = matches!(
        dist,
        ReferenceDistribution::Gaussian(_) | ReferenceDistribution::UniformBall { .. }
    );
    if symmetric && a > 0.5 {
        return Err(Error::EmptyOrDegenerate(format!(
            "alpha = {a} exceeds the maximal depth 1/2 of a {} distribution",
            dist.kind()
        )));
    }
    let shape = match dist {
        ReferenceDistribution::Gaussian(g) => {
            if let Some(sigma) = dist.isotropic_sigma() {
                PopulationShape::Ball {
                    center: g.mean().to_vec(),
                    radius: (normal_inverse_cdf(1.0 - a)? * sigma).max(0.0),
                }
            } else {
                let net = geom::deterministic_net(g.dim(), oracle_net_delta(g.dim()))?;
                let hs = net
                    .directions
                    .iter()
                    .map(|u| Ok(Halfspace::new(u.clone(), g.upper_quantile(u, level)?)))
                    .collect::<Result<Vec<_>>>()?;
                PopulationShape::Polytope(HPolytope::new(g.dim(), hs)?)
            }
        }
        ReferenceDistribution::UniformBall { center, radius } => PopulationShape::Ball {
            center: center.clone(),
            radius: uniform_ball_quantile(*radius, center.len(), level)?.max(0.0),
        },
        other => {
            return Err(Error::UnsupportedDistribution(format!(
                "no population level set oracle for {}",
                other.kind()
            )))
        }
    };
    Ok(PopulationLevelSet { shape, alpha: level })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CentroidDepthReport {
    pub centroid: Vec<f64>,
    pub directions: usize,
    pub trials: usize,
    pub min_mass: f64,
    pub standard_error: f64,
    pub threshold: f64,
    pub passes: bool,
}

/// Area centroid of a planar polygon given by counterclockwise vertices.
pub fn polygon_centroid(vertices: &[[f64; 2]]) -> Result<[f64; 2]> {
    let k = vertices.len();
    let (mut a2, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..k {
        let p = vertices[i];
        let q = vertices[(i + 1) % k];
        let c = p[0] * q[1] - q[0] * p[1];
        a2 += c;
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    if !(a2.abs() > 0.0) {
        return Err(Error::NotABody("degenerate polygon"));
    }
    Ok([cx / (3.0 * a2), cy / (3.0 * a2)])
}

/// Monte Carlo estimate of the smallest halfspace mass through the centroid.
/// Directions: a covering net of radius 0.01 for `d = 2`, 2000 uniform draws otherwise.
pub fn logconcave_centroid_depth_check(
    dist: &ReferenceDistribution,
    trials: usize,
    seed: u64,
) -> Result<CentroidDepthReport> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let d = dist.dim();
    let centroid = match dist {
        ReferenceDistribution::Gaussian(g) => g.mean().to_vec(),
        ReferenceDistribution::UniformBall { center, .. } => center.clone(),
        ReferenceDistribution::UniformPolytope(p) if d == 2 => polygon_centroid(&p.vertices_2d(1e-9)?)?.to_vec(),
        ReferenceDistribution::UniformPolytope(_) => sample(dist, 1_000_000, seed ^ CALIBRATION_STREAM.rotate_left(17))?.mean(),
        ReferenceDistribution::AtomMixture { .. } => {
            return Err(Error::UnsupportedDistribution("atom mixtures are not log-concave".into()))
        }
    };
    let cloud = sample(dist, trials, seed)?.translated(&centroid.iter().map(|c| -c).collect::<Vec<_>>());
    let dirs = if d == 2 {
        geom::deterministic_net(2, 0.01)?.directions
    } else {
        geom::uniform_directions(d, 2000, seed.wrapping_add(1))?
    };
    let min_count = dirs
        .par_iter()
        .map(|u| cloud.points().filter(|x| u.dot(x) >= 0.0).count())
        .min()
        .expect("nonempty direction set");
    let m = min_count as f64 / trials as f64;
    let se = (m * (1.0 - m) / trials as f64).sqrt();
    let threshold = (-1.0f64).exp();
    Ok(CentroidDepthReport {
        centroid,
        directions: dirs.len(),
        trials,
        min_mass: m,
        standard_error: se,
        threshold,
        passes: m >= threshold - 3.0 * se,
    })
}
