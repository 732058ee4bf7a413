//! Directional quantiles of point clouds and reference distributions.

use std::f64::consts::SQRT_2;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::geom::{self, Direction, PointCloud};

/// The level `α` in `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LevelSpec(f64);

impl LevelSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(LevelSpec(alpha))
        } else {
            Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")))
        }
    }

    pub fn alpha(self) -> f64 {
        self.0
    }

    /// Smallest count `c` with `c / n >= α`, i.e. `ceil(nα)` without the
    /// rounding noise of forming `nα` in floating point.
    pub fn upper_count(self, n: usize) -> usize {
        smallest_count(n, self.0)
    }

    /// Smallest count `c` with `c / n >= 1 - α`.
    pub fn lower_count(self, n: usize) -> usize {
        smallest_count(n, 1.0 - self.0)
    }

    /// 1-based rank of the upper quantile among sorted projections.
    pub fn upper_rank(self, n: usize) -> usize {
        n - self.upper_count(n) + 1
    }
}

impl TryFrom<f64> for LevelSpec {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        LevelSpec::new(v)
    }
}

impl From<LevelSpec> for f64 {
    fn from(l: LevelSpec) -> f64 {
        l.0
    }
}

impl fmt::Display for LevelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn smallest_count(n: usize, frac: f64) -> usize {
    let nf = n as f64;
    let mut c = ((nf * frac).ceil() as usize).min(n).max(1);
    while c > 1 && (c - 1) as f64 / nf >= frac {
        c -= 1;
    }
    while c < n && (c as f64) / nf < frac {
        c += 1;
    }
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upper,
    Lower,
}

/// Upper quantile `sup{t : #{v_i >= t} >= nα}` of a sample, reordering it in place.
pub fn upper_quantile_of(values: &mut [f64], level: LevelSpec) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("quantile of an empty sample"));
    }
    let k = level.upper_rank(values.len());
    Ok(kth_smallest(values, k))
}

/// Lower quantile `inf{t : #{v_i <= t} >= n(1-α)}` of a sample, reordering it in place.
pub fn lower_quantile_of(values: &mut [f64], level: LevelSpec) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("quantile of an empty sample"));
    }
    let k = level.lower_count(values.len());
    Ok(kth_smallest(values, k))
}

fn kth_smallest(values: &mut [f64], k: usize) -> f64 {
    let (_, v, _) = values.select_nth_unstable_by(k - 1, f64::total_cmp);
    *v
}

pub fn empirical_upper_quantile(cloud: &PointCloud, u: &Direction, level: LevelSpec) -> Result<f64> {
    check_dim(cloud.dim(), u)?;
    upper_quantile_of(&mut cloud.projections(u), level)
}

pub fn empirical_lower_quantile(cloud: &PointCloud, u: &Direction, level: LevelSpec) -> Result<f64> {
    check_dim(cloud.dim(), u)?;
    lower_quantile_of(&mut cloud.projections(u), level)
}

fn check_dim(d: usize, u: &Direction) -> Result<()> {
    if u.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: u.dim(),
        });
    }
    Ok(())
}

/// Standard normal CDF.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * erfc(-t / SQRT_2)
}

/// `Φ^{-1}(p)` by bisection on [`normal_cdf`].
pub fn normal_inverse_cdf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("probability must lie in (0, 1), got {p}")));
    }
    Ok(bisect_decreasing(|t| -normal_cdf(t), -p, -40.0, 40.0, 1e-13))
}

/// Root of `f(t) = target` for nonincreasing `f` on `[lo, hi]`.
fn bisect_decreasing(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gaussian `N(m, Σ)` with a validated covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct Gaussian {
    mean: Vec<f64>,
    cov: DMatrix<f64>,
}

impl Gaussian {
    pub fn new(mean: Vec<f64>, cov: &[Vec<f64>]) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::invalid("Gaussian needs d >= 1"));
        }
        if cov.len() != d || cov.iter().any(|r| r.len() != d) {
            return Err(Error::invalid(format!("covariance must be {d}x{d}")));
        }
        if mean.iter().chain(cov.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("Gaussian parameters must be finite"));
        }
        let m = DMatrix::from_fn(d, d, |i, j| cov[i][j]);
        let asym = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .any(|(i, j)| (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * (1.0 + m[(i, j)].abs()));
        if asym {
            return Err(Error::invalid("covariance is not symmetric"));
        }
        if m.clone().cholesky().is_none() {
            return Err(Error::invalid("covariance is not positive definite"));
        }
        Ok(Gaussian { mean, cov: m })
    }

    pub fn isotropic(mean: Vec<f64>, sigma: f64) -> Result<Self> {
        let d = mean.len();
        let cov: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { sigma * sigma } else { 0.0 }).collect())
            .collect();
        Gaussian::new(mean, &cov)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// `sqrt(Σ(u, u))`.
    pub fn spread(&self, u: &[f64]) -> f64 {
        let v = DVector::from_column_slice(u);
        (v.dot(&(&self.cov * &v))).max(0.0).sqrt()
    }

    pub fn upper_quantile(&self, u: &Direction, level: LevelSpec) -> Result<f64> {
        check_dim(self.dim(), u)?;
        let z = normal_inverse_cdf(1.0 - level.alpha())?;
        Ok(u.dot(&self.mean) + z * self.spread(u.coords()))
    }
}

pub fn gaussian_quantile(mean: &[f64], cov: &[Vec<f64>], u: &Direction, level: LevelSpec) -> Result<f64> {
    Gaussian::new(mean.to_vec(), cov)?.upper_quantile(u, level)
}

/// `q` with `P[<u, X> >= q] = α` for `X` uniform on the centered ball of the given radius.
pub fn uniform_ball_quantile(radius: f64, d: usize, level: LevelSpec) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    if d < 2 {
        return Err(Error::invalid(format!("uniform ball quantile needs d >= 2, got {d}")));
    }
    let b = (d as f64 + 1.0) / 2.0;
    // Tail of one coordinate of the unit ball: |T|^2 ~ Beta(1/2, (d+1)/2).
    let tail = |t: f64| -> f64 {
        let t = t.clamp(-1.0, 1.0);
        let i = beta_reg(0.5, b, t * t);
        0.5 * (1.0 - t.signum() * i)
    };
    let t = bisect_decreasing(tail, level.alpha(), -1.0, 1.0, 1e-14);
    Ok(radius * t)
}

type Evaluator = Box<dyn Fn(&Direction) -> f64 + Send + Sync>;

/// A map `u ↦ q_u` on the sphere, extended to `R^d` by positive homogeneity.
pub struct QuantileProfile {
    dim: usize,
    level: LevelSpec,
    side: Side,
    eval: Evaluator,
}

impl fmt::Debug for QuantileProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuantileProfile")
            .field("dim", &self.dim)
            .field("level", &self.level)
            .field("side", &self.side)
            .finish_non_exhaustive()
    }
}

impl QuantileProfile {
    pub fn from_fn(
        dim: usize,
        level: LevelSpec,
        side: Side,
        f: impl Fn(&Direction) -> f64 + Send + Sync + 'static,
    ) -> Self {
        QuantileProfile {
            dim,
            level,
            side,
            eval: Box::new(f),
        }
    }

    pub fn empirical(cloud: PointCloud, level: LevelSpec, side: Side) -> Result<Self> {
        if cloud.n() == 0 {
            return Err(Error::invalid("empirical profile of an empty cloud"));
        }
        let dim = cloud.dim();
        Ok(Self::from_fn(dim, level, side, move |u| {
            let mut p = cloud.projections(u);
            match side {
                Side::Upper => upper_quantile_of(&mut p, level),
                Side::Lower => lower_quantile_of(&mut p, level),
            }
            .expect("cloud is nonempty")
        }))
    }

    pub fn gaussian(g: Gaussian, level: LevelSpec) -> Result<Self> {
        let z = normal_inverse_cdf(1.0 - level.alpha())?;
        Ok(Self::from_fn(g.dim(), level, Side::Upper, move |u| {
            u.dot(g.mean()) + z * g.spread(u.coords())
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> LevelSpec {
        self.level
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn at(&self, u: &Direction) -> f64 {
        (self.eval)(u)
    }

    /// `Q(z) = |z| q_{z/|z|}`, with `Q(0) = 0`.
    pub fn extended(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: z.len(),
            });
        }
        let r = geom::norm(z);
        if r == 0.0 {
            return Ok(0.0);
        }
        Ok(r * self.at(&Direction::new(z.to_vec())?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubadditivityReport {
    pub pairs: usize,
    pub violations: usize,
    /// Largest `Q(u+v) - Q(u) - Q(v)` seen.
    pub worst_gap: f64,
}

/// Tests `Q(u + v) <= Q(u) + Q(v) + tol` on random pairs of unit vectors.
pub fn subadditivity_probe(
    profile: &QuantileProfile,
    pairs: usize,
    seed: u64,
    tol: f64,
) -> Result<SubadditivityReport> {
    if pairs == 0 {
        return Err(Error::invalid("pairs must be at least 1"));
    }
    let dirs = geom::uniform_directions(profile.dim(), 2 * pairs, seed)?;
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for pair in dirs.chunks_exact(2) {
        let (u, v) = (&pair[0], &pair[1]);
        let w: Vec<f64> = u.coords().iter().zip(v.coords()).map(|(a, b)| a + b).collect();
        let gap = profile.extended(&w)? - profile.at(u) - profile.at(v);
        if gap > tol {
            violations += 1;
        }
        worst = worst.max(gap);
    }
    Ok(SubadditivityReport {
        pairs,
        violations,
        worst_gap: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(values: &[f64]) -> PointCloud {
        let rows: Vec<Vec<f64>> = values.iter().map(|&v| vec![v, 0.0]).collect();
        PointCloud::from_rows(&rows).unwrap()
    }

    fn e1() -> Direction {
        Direction::axis(2, 0, true).unwrap()
    }

    fn lvl(a: f64) -> LevelSpec {
        LevelSpec::new(a).unwrap()
    }

    // Scan every candidate threshold and keep the largest one with enough mass above it.
    fn counting_upper(p: &[f64], alpha: f64) -> f64 {
        let n = p.len() as f64;
        p.iter()
            .copied()
            .filter(|&t| p.iter().filter(|&&x| x >= t).count() as f64 / n >= alpha)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn counting_lower(p: &[f64], alpha: f64) -> f64 {
        let n = p.len() as f64;
        p.iter()
            .copied()
            .filter(|&t| p.iter().filter(|&&x| x <= t).count() as f64 / n >= 1.0 - alpha)
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn level_range() {
        assert!(LevelSpec::new(0.0).is_err());
        assert!(LevelSpec::new(1.0).is_err());
        assert!(LevelSpec::new(f64::NAN).is_err());
        assert_eq!(lvl(0.3).upper_count(10), 3);
        assert_eq!(lvl(0.2).upper_count(5), 1);
    }

    #[test]
    fn upper_examples() {
        let c = line(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(empirical_upper_quantile(&c, &e1(), lvl(0.2)).unwrap(), 5.0);
        assert_eq!(empirical_upper_quantile(&c, &e1(), lvl(0.3)).unwrap(), 4.0);
        let t = line(&[2.0, 2.0, 2.0]);
        assert_eq!(empirical_upper_quantile(&t, &e1(), lvl(0.5)).unwrap(), 2.0);
    }

    #[test]
    fn lower_examples() {
        let c = line(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(empirical_lower_quantile(&c, &e1(), lvl(0.2)).unwrap(), 4.0);
        assert_eq!(empirical_lower_quantile(&c, &e1(), lvl(0.999)).unwrap(), 1.0);
    }

    #[test]
    fn order_statistic_matches_counting_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.random_range(1..=50);
            // Values on a coarse grid so ties are common.
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    vec![
                        rng.random_range(-4i32..=4) as f64 * 0.5,
                        rng.random_range(-4i32..=4) as f64 * 0.5,
                    ]
                })
                .collect();
            let cloud = PointCloud::from_rows(&rows).unwrap();
            let alpha = if rng.random_bool(0.3) {
                // Levels hitting nα exactly.
                rng.random_range(1..n.max(2)) as f64 / n as f64
            } else {
                rng.random_range(0.01..0.99)
            };
            let Ok(level) = LevelSpec::new(alpha) else { continue };
            for u in [e1(), Direction::new(vec![1.0, 1.0]).unwrap(), Direction::new(vec![-1.0, 2.0]).unwrap()] {
                let p = cloud.projections(&u);
                let up = empirical_upper_quantile(&cloud, &u, level).unwrap();
                let lo = empirical_lower_quantile(&cloud, &u, level).unwrap();
                assert_eq!(up, counting_upper(&p, alpha), "n={n} alpha={alpha}");
                assert_eq!(lo, counting_lower(&p, alpha), "n={n} alpha={alpha}");
            }
        }
    }

    #[test]
    fn lower_never_exceeds_upper() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let rows: Vec<Vec<f64>> = (0..17).map(|_| vec![rng.random(), rng.random()]).collect();
            let cloud = PointCloud::from_rows(&rows).unwrap();
            let u = Direction::new(vec![rng.random::<f64>() - 0.5, 0.3]).unwrap();
            for a in [0.1, 0.3, 0.5, 0.8] {
                assert!(
                    empirical_lower_quantile(&cloud, &u, lvl(a)).unwrap()
                        <= empirical_upper_quantile(&cloud, &u, lvl(a)).unwrap()
                );
            }
        }
    }

    #[test]
    fn inverse_normal_against_statrs() {
        use statrs::distribution::{ContinuousCDF, Normal};
        let n = Normal::new(0.0, 1.0).unwrap();
        for p in [1e-8, 0.001, 0.1, 0.2, 0.5, 0.8, 0.9, 0.975, 0.999999] {
            let a = normal_inverse_cdf(p).unwrap();
            assert!((a - n.inverse_cdf(p)).abs() < 1e-9, "p={p}");
        }
        assert!((normal_inverse_cdf(0.8).unwrap() - 0.8416212335729143).abs() < 1e-10);
        assert!((normal_inverse_cdf(0.9).unwrap() - 1.2815515655446004).abs() < 1e-10);
        assert!(normal_inverse_cdf(1.0).is_err());
    }

    #[test]
    fn gaussian_examples() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let u = Direction::new(vec![0.6, 0.8]).unwrap();
        assert!(gaussian_quantile(&[0.0, 0.0], &id, &u, lvl(0.5)).unwrap().abs() < 1e-12);
        let q = gaussian_quantile(&[0.0, 0.0], &id, &u, lvl(0.2)).unwrap();
        assert!((q - 0.8416212335729143).abs() < 1e-10);
        let q = gaussian_quantile(&[1.0, 0.0], &id, &e1(), lvl(0.2)).unwrap();
        assert!((q - 1.8416212335729143).abs() < 1e-10);
    }

    #[test]
    fn gaussian_rejects_bad_cov() {
        let u = e1();
        let not_pd = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(gaussian_quantile(&[0.0, 0.0], &not_pd, &u, lvl(0.2)).is_err());
        let asym = vec![vec![1.0, 0.5], vec![0.0, 1.0]];
        assert!(gaussian_quantile(&[0.0, 0.0], &asym, &u, lvl(0.2)).is_err());
    }

    #[test]
    fn ball_quantile_closed_form_disk() {
        // d = 2: P[x_1 >= t] = (acos t - t sqrt(1 - t^2)) / π.
        for a in [0.05, 0.2, 0.5, 0.7] {
            let q = uniform_ball_quantile(1.0, 2, lvl(a)).unwrap();
            let tail = (q.acos() - q * (1.0 - q * q).sqrt()) / std::f64::consts::PI;
            assert!((tail - a).abs() < 1e-10, "alpha={a}");
        }
        assert!(uniform_ball_quantile(1.0, 2, lvl(0.5)).unwrap().abs() < 1e-10);
        let q1 = uniform_ball_quantile(1.0, 2, lvl(0.2)).unwrap();
        let q2 = uniform_ball_quantile(2.0, 2, lvl(0.2)).unwrap();
        assert!((q2 - 2.0 * q1).abs() < 1e-10);
        assert!(uniform_ball_quantile(0.0, 2, lvl(0.2)).is_err());
    }

    #[test]
    fn ball_quantile_monte_carlo() {
        let q = uniform_ball_quantile(1.0, 2, lvl(0.2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut hits, mut total) = (0u64, 0u64);
        while total < 10_000_000 {
            let x: f64 = rng.random_range(-1.0..1.0);
            let y: f64 = rng.random_range(-1.0..1.0);
            if x * x + y * y <= 1.0 {
                total += 1;
                hits += (x >= q) as u64;
            }
        }
        assert!((hits as f64 / total as f64 - 0.2).abs() < 3e-4);
    }

    #[test]
    fn ball_quantile_3d_closed_form() {
        // d = 3: the projection density is (3/4)(1 - t^2) on [-1, 1].
        let q = uniform_ball_quantile(1.0, 3, lvl(0.2)).unwrap();
        let tail = 0.75 * ((1.0 - q) - (1.0 - q.powi(3)) / 3.0);
        assert!((tail - 0.2).abs() < 1e-10);
    }

    #[test]
    fn gaussian_profile_is_subadditive() {
        let g = Gaussian::new(vec![0.5, -1.0], &[vec![2.0, 0.7], vec![0.7, 0.5]]).unwrap();
        let prof = QuantileProfile::gaussian(g, lvl(0.1)).unwrap();
        let rep = subadditivity_probe(&prof, 10_000, 1, 1e-9).unwrap();
        assert_eq!(rep.violations, 0);
        assert_eq!(rep.pairs, 10_000);
    }

    #[test]
    fn norm_profile_is_subadditive() {
        let prof = QuantileProfile::from_fn(3, lvl(0.5), Side::Upper, |_| 1.0);
        let rep = subadditivity_probe(&prof, 100, 2, 1e-12).unwrap();
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn empirical_probe_reports() {
        let cloud = PointCloud::from_rows(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let prof = QuantileProfile::empirical(cloud, lvl(0.5), Side::Upper).unwrap();
        let rep = subadditivity_probe(&prof, 1000, 3, 1e-9).unwrap();
        assert_eq!(rep.pairs, 1000);
        assert!(rep.violations <= 1000);
        assert!(rep.worst_gap.is_finite());
        assert!(subadditivity_probe(&prof, 0, 3, 1e-9).is_err());
    }

    #[test]
    fn homogeneous_extension() {
        let prof = QuantileProfile::from_fn(2, lvl(0.5), Side::Upper, |u| u.coords()[0] + 2.0);
        assert_eq!(prof.extended(&[0.0, 0.0]).unwrap(), 0.0);
        assert!((prof.extended(&[3.0, 0.0]).unwrap() - 9.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn translation_equivariance(
            pts in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..40),
            v in (-5.0f64..5.0, -5.0f64..5.0),
            theta in 0.0f64..std::f64::consts::TAU,
            alpha in 0.01f64..0.99,
        ) {
            let rows: Vec<[f64; 2]> = pts.iter().map(|&(a, b)| [a, b]).collect();
            let cloud = PointCloud::from_rows(&rows).unwrap();
            let u = Direction::new(vec![theta.cos(), theta.sin()]).unwrap();
            let level = lvl(alpha);
            let shifted = cloud.translated(&[v.0, v.1]);
            let a = empirical_upper_quantile(&shifted, &u, level).unwrap();
            let b = empirical_upper_quantile(&cloud, &u, level).unwrap() + u.dot(&[v.0, v.1]);
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }

        #[test]
        fn scale_equivariance(
            pts in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..40),
            c in 0.01f64..100.0,
            alpha in 0.01f64..0.99,
        ) {
            let rows: Vec<[f64; 2]> = pts.iter().map(|&(a, b)| [a, b]).collect();
            let cloud = PointCloud::from_rows(&rows).unwrap();
            let u = Direction::new(vec![0.6, -0.8]).unwrap();
            let a = empirical_upper_quantile(&cloud.scaled(c), &u, lvl(alpha)).unwrap();
            let b = c * empirical_upper_quantile(&cloud, &u, lvl(alpha)).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }

        #[test]
        fn monotone_in_alpha(
            pts in proptest::collection::vec(-10.0f64..10.0, 1..40),
            a1 in 0.01f64..0.99,
            a2 in 0.01f64..0.99,
        ) {
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let cloud = line(&pts);
            let q_lo = empirical_upper_quantile(&cloud, &e1(), lvl(lo)).unwrap();
            let q_hi = empirical_upper_quantile(&cloud, &e1(), lvl(hi)).unwrap();
            prop_assert!(q_lo >= q_hi);
        }
    }
}
