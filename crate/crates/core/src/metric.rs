//! Hausdorff distance between convex polytopes through support functions.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{Direction, HPolytope, SphereNet};
use crate::linprog::{Support, SupportEvaluator};

const CHUNK: usize = 256;

/// Support values of a bounded nonempty polytope on a net.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportProfile {
    pub values: Vec<f64>,
    pub delta: f64,
    /// `√d · max |h(±e_i)|`, a radius of a centered ball containing the body.
    pub r_out: f64,
    /// `max(0, min_u h(u))` over the net.
    pub r_in: f64,
}

pub fn support_profile(polytope: &HPolytope, net: &SphereNet) -> Result<SupportProfile> {
    if net.is_empty() {
        return Err(Error::invalid("net has no directions"));
    }
    let d = polytope.dim();
    if net.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: net.dim(),
        });
    }
    let mut ev = SupportEvaluator::new(polytope)?;
    if !ev.is_feasible() {
        return Err(Error::NotABody("empty"));
    }
    let mut r = 0.0f64;
    for u in Direction::canonical(d)? {
        r = r.max(finite(ev.support(&u)?)?.abs());
    }
    let values: Vec<f64> = net
        .directions
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<Vec<f64>> {
            let mut ev = SupportEvaluator::new(polytope)?;
            chunk.iter().map(|u| finite(ev.support(u)?)).collect()
        })
        .collect::<Result<Vec<_>>>()?
        .concat();
    let r_in = values.iter().copied().fold(f64::INFINITY, f64::min).max(0.0);
    Ok(SupportProfile {
        values,
        delta: net.delta,
        r_out: (d as f64).sqrt() * r,
        r_in,
    })
}

fn finite(s: Support) -> Result<f64> {
    s.finite().ok_or(Error::NotABody("unbounded"))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HausdorffEstimate {
    pub value: f64,
    pub certified_error: f64,
    pub net_delta: f64,
    pub r_in: f64,
    pub r_out: f64,
}

/// `max_u |h_P(u) - h_Q(u)|` over the net, with the slack
/// `2 max(R_P, R_Q) δ / (1 - δ)` bounding how far the true distance can exceed it.
pub fn hausdorff_support(p: &HPolytope, q: &HPolytope, net: &SphereNet) -> Result<HausdorffEstimate> {
    let a = support_profile(p, net)?;
    let b = support_profile(q, net)?;
    hausdorff_profiles(&a, &b)
}

pub fn hausdorff_profiles(a: &SupportProfile, b: &SupportProfile) -> Result<HausdorffEstimate> {
    if a.values.len() != b.values.len() || a.delta != b.delta {
        return Err(Error::invalid("support profiles were taken on different nets"));
    }
    if !(a.delta < 1.0) {
        return Err(Error::invalid(format!("net delta must be below 1, got {}", a.delta)));
    }
    let value = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let r_out = a.r_out.max(b.r_out);
    Ok(HausdorffEstimate {
        value,
        certified_error: 2.0 * r_out * a.delta / (1.0 - a.delta),
        net_delta: a.delta,
        r_in: a.r_in.min(b.r_in),
        r_out,
    })
}

fn check_radii(eta: f64, r: f64, big_r: f64) -> Result<()> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("eta must be nonnegative, got {eta}")));
    }
    if !(eta < r) {
        return Err(Error::invalid(format!("need eta < r, got eta = {eta}, r = {r}")));
    }
    if !(r <= big_r && big_r.is_finite()) {
        return Err(Error::invalid(format!("need r <= R, got r = {r}, R = {big_r}")));
    }
    Ok(())
}

/// `(ηR/r) (1 + η/r) / (1 - η/r)`.
pub fn quantile_deviation_to_hausdorff(eta: f64, r: f64, big_r: f64) -> Result<f64> {
    check_radii(eta, r, big_r)?;
    let s = eta / r;
    Ok(eta * big_r / r * (1.0 + s) / (1.0 - s))
}

/// The previous bound plus `2Rδ / (1 - δ)`.
pub fn discretized_deviation_bound(eta: f64, r: f64, big_r: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(quantile_deviation_to_hausdorff(eta, r, big_r)? + 2.0 * big_r * delta / (1.0 - delta))
}
