//! Closed-form deviation bounds and sample-size rules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantile::{normal_inverse_cdf, LevelSpec};

/// Regularity constants of the target level set and the directional
/// distributions around their quantiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionParams {
    pub epsilon: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
}

impl AssumptionParams {
    pub fn new(epsilon: f64, l: f64, r: f64, big_r: f64, a: Vec<f64>, tau: Option<f64>) -> Result<Self> {
        let p = AssumptionParams {
            epsilon,
            l,
            r,
            big_r,
            a,
            tau,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.epsilon > 0.0 && self.epsilon < self.r && self.r <= self.big_r && self.big_r.is_finite();
        if !ok {
            return Err(Error::invalid(format!(
                "need 0 < epsilon < r <= R, got epsilon = {}, r = {}, R = {}",
                self.epsilon, self.r, self.big_r
            )));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(Error::invalid(format!("L must be positive, got {}", self.l)));
        }
        Ok(())
    }

    /// Constants for `N(0, σ² I)` at level `α < 1/2`: the level set is the
    /// ball of radius `ρ = Φ^{-1}(1-α) σ`, `r = R = ρ`, `ε = ρ/2`, and `L` is
    /// the smallest projected density on `[ρ - ε, ρ + ε]`.
    pub fn for_isotropic_gaussian(d: usize, sigma: f64, level: LevelSpec) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
        }
        let rho = normal_inverse_cdf(1.0 - level.alpha())? * sigma;
        if !(rho > 0.0) {
            return Err(Error::invalid("level set has empty interior for alpha >= 1/2"));
        }
        let eps = rho / 2.0;
        let z = (rho + eps) / sigma;
        let density = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt() / sigma;
        AssumptionParams::new(eps, density, rho, rho, vec![0.0; d], None)
    }

    /// `C = (R/r)(1 + ε/r)/(1 - ε/r)`.
    pub fn c_constant(&self) -> f64 {
        let s = self.epsilon / self.r;
        self.big_r / self.r * (1.0 + s) / (1.0 - s)
    }
}

/// Which form of the linear term in the exponent to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentVariant {
    /// `10 √(5(d+1)) x`.
    Theorem,
    /// `10 √(5(d+1)) L x`.
    #[default]
    Lemma,
}

impl FromStr for ExponentVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem" => Ok(ExponentVariant::Theorem),
            "lemma" => Ok(ExponentVariant::Lemma),
            _ => Err(Error::invalid(format!("exponent variant must be theorem or lemma, got '{s}'"))),
        }
    }
}

impl fmt::Display for ExponentVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExponentVariant::Theorem => "theorem",
            ExponentVariant::Lemma => "lemma",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundEval {
    pub x: f64,
    pub probability_bound: f64,
    pub log_probability_bound: f64,
    /// `C x / √n`.
    pub radius_bound: f64,
    pub c: f64,
    /// `ln A = -250 (d + 1)`; `A` itself underflows for `d >= 2`.
    pub log_a: f64,
    pub vacuous: bool,
}

fn linear_coefficient(d: usize) -> f64 {
    10.0 * (5.0 * (d as f64 + 1.0)).sqrt()
}

/// Interval `[10 √(5(d+1)) / L, ε √n)` of admissible `x`; may be empty.
pub fn theorem2_domain(params: &AssumptionParams, d: usize, n: usize) -> (f64, f64) {
    (linear_coefficient(d) / params.l, params.epsilon * (n as f64).sqrt())
}

/// `P[d_H > C x / √n] <= A exp(-L² x² / 2 + b x)` with `b` per [`ExponentVariant`].
pub fn theorem2_bound(
    params: &AssumptionParams,
    d: usize,
    n: usize,
    x: f64,
    variant: ExponentVariant,
) -> Result<BoundEval> {
    params.validate()?;
    if d < 1 || n < 1 {
        return Err(Error::invalid("need d >= 1 and n >= 1"));
    }
    let (lo, hi) = theorem2_domain(params, d, n);
    if !(x >= lo && x < hi) {
        return Err(Error::OutOfDomain { x, lo, hi });
    }
    let log_a = -250.0 * (d as f64 + 1.0);
    let b = match variant {
        ExponentVariant::Theorem => linear_coefficient(d),
        ExponentVariant::Lemma => linear_coefficient(d) * params.l,
    };
    let log_p = log_a - params.l * params.l * x * x / 2.0 + b * x;
    let p = log_p.exp();
    let c = params.c_constant();
    Ok(BoundEval {
        x,
        probability_bound: p,
        log_probability_bound: log_p,
        radius_bound: c * x / (n as f64).sqrt(),
        c,
        log_a,
        vacuous: log_p >= -1e-12,
    })
}

/// `6^d exp(-M δ^{d-1} / (2d 8^{(d-1)/2}) + d ln(1/δ))`, not clamped to 1.
pub fn net_failure_bound(d: usize, m: u64, delta: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::invalid(format!("need d >= 2, got {d}")));
    }
    if m < 1 {
        return Err(Error::invalid("need M >= 1"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1], got {delta}")));
    }
    let df = d as f64;
    let rate = delta.powi(d as i32 - 1) / (2.0 * df * 8f64.powf((df - 1.0) / 2.0));
    Ok(6f64.powi(d as i32) * (-(m as f64) * rate + df * (1.0 / delta).ln()).exp())
}

/// `2d 8^{(d-1)/2} (d+k)/2 n^{d-1} ln n`.
pub fn corollary4_threshold(d: usize, n: u64, k: f64) -> Result<f64> {
    if d < 1 {
        return Err(Error::invalid("need d >= 1"));
    }
    if n < 2 {
        return Err(Error::invalid(format!("need n >= 2, got {n}")));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::invalid(format!("k must be a nonnegative number, got {k}")));
    }
    let df = d as f64;
    let nf = n as f64;
    Ok(2.0 * df * 8f64.powf((df - 1.0) / 2.0) * (df + k) / 2.0 * nf.powf(df - 1.0) * nf.ln())
}

/// Smallest integer `M` strictly above [`corollary4_threshold`].
pub fn corollary4_directions(d: usize, n: u64, k: f64) -> Result<u64> {
    let t = corollary4_threshold(d, n, k)?;
    // 2^64 as f64; anything at or above it has no u64 successor.
    if !t.is_finite() || t >= 18_446_744_073_709_551_616.0 {
        return Err(Error::Capacity { threshold: t });
    }
    let f = t.floor();
    if f >= u64::MAX as f64 {
        return Err(Error::Capacity { threshold: t });
    }
    Ok(f as u64 + 1)
}
