//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tukey_levelsets::depth::{classify, Emptiness};
use tukey_levelsets::{Direction, HPolytope, Halfspace};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Vertices of a planar H-polytope from all pairwise line intersections
/// that satisfy every constraint.
pub fn vertices_by_enumeration(p: &HPolytope) -> Vec<[f64; 2]> {
    let hs = p.halfspaces();
    let mut out: Vec<[f64; 2]> = Vec::new();
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            let (a, b) = (hs[i].normal.coords(), hs[j].normal.coords());
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = (hs[i].offset * b[1] - hs[j].offset * a[1]) / det;
            let y = (a[0] * hs[j].offset - b[0] * hs[i].offset) / det;
            let feasible = hs.iter().all(|h| h.normal.coords()[0] * x + h.normal.coords()[1] * y <= h.offset + 1e-9);
            if feasible && !out.iter().any(|v| (v[0] - x).abs() < 1e-9 && (v[1] - y).abs() < 1e-9) {
                out.push([x, y]);
            }
        }
    }
    out
}

pub fn support_by_vertices(vertices: &[[f64; 2]], u: &[f64]) -> f64 {
    vertices
        .iter()
        .map(|v| v[0] * u[0] + v[1] * u[1])
        .fold(f64::NEG_INFINITY, f64::max)
}

fn hull_order(vertices: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let k = vertices.len() as f64;
    let cx = vertices.iter().map(|v| v[0]).sum::<f64>() / k;
    let cy = vertices.iter().map(|v| v[1]).sum::<f64>() / k;
    let mut vs = vertices.to_vec();
    vs.sort_by(|a, b| (a[1] - cy).atan2(a[0] - cx).total_cmp(&(b[1] - cy).atan2(b[0] - cx)));
    vs
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    ((p[0] - a[0] - t * dx).powi(2) + (p[1] - a[1] - t * dy).powi(2)).sqrt()
}

fn distance_to_polygon(p: [f64; 2], poly: &HPolytope, hull: &[[f64; 2]]) -> f64 {
    if poly.contains(&p, 1e-12).unwrap() {
        return 0.0;
    }
    (0..hull.len())
        .map(|i| segment_distance(p, hull[i], hull[(i + 1) % hull.len()]))
        .fold(f64::INFINITY, f64::min)
}

/// Hausdorff distance of two planar polygons from their vertices.
pub fn hausdorff_by_vertices(p: &HPolytope, q: &HPolytope) -> f64 {
    let vp = hull_order(&vertices_by_enumeration(p));
    let vq = hull_order(&vertices_by_enumeration(q));
    let a = vp.iter().map(|&v| distance_to_polygon(v, q, &vq)).fold(0.0, f64::max);
    let b = vq.iter().map(|&v| distance_to_polygon(v, p, &vp)).fold(0.0, f64::max);
    a.max(b)
}

/// A bounded nonempty random polygon around a random center.
pub fn random_polygon(rng: &mut ChaCha8Rng) -> HPolytope {
    loop {
        let k = rng.random_range(3..12);
        let c = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let hs: Vec<Halfspace> = (0..k)
            .map(|_| {
                let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let u = Direction::new(vec![t.cos(), t.sin()]).unwrap();
                let off = rng.random_range(0.3..2.0) + u.dot(&c);
                Halfspace::new(u, off)
            })
            .collect();
        let p = HPolytope::new(2, hs).unwrap();
        if classify(&p).unwrap() == Emptiness::Nonempty {
            return p;
        }
    }
}

/// Halfplane depth on integer points with exact arithmetic: every closed
/// halfplane whose boundary passes through `x` and some sample point, turned
/// infinitesimally either way.
pub fn lattice_depth(pts: &[[i64; 2]], x: [i64; 2]) -> usize {
    let vs: Vec<[i64; 2]> = pts.iter().map(|p| [p[0] - x[0], p[1] - x[1]]).collect();
    let zero = vs.iter().filter(|v| **v == [0, 0]).count();
    let nonzero: Vec<[i64; 2]> = vs.iter().copied().filter(|v| *v != [0, 0]).collect();
    if nonzero.is_empty() {
        return pts.len();
    }
    let mut best = usize::MAX;
    for vk in &nonzero {
        for sign in [1i64, -1] {
            let u = [-vk[1] * sign, vk[0] * sign];
            for turn in [1i64, -1] {
                let c = nonzero
                    .iter()
                    .filter(|w| {
                        let ip = u[0] * w[0] + u[1] * w[1];
                        ip < 0 || (ip == 0 && turn * (vk[0] * w[0] + vk[1] * w[1]) <= 0)
                    })
                    .count();
                best = best.min(c);
            }
        }
    }
    best + zero
}

/// `sup{t : #{p_i >= t} >= nα}` by scanning candidate thresholds.
pub fn counting_upper(p: &[f64], alpha: f64) -> f64 {
    let n = p.len() as f64;
    p.iter()
        .copied()
        .filter(|&t| p.iter().filter(|&&x| x >= t).count() as f64 / n >= alpha)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `inf{t : #{p_i <= t} >= n(1-α)}` by scanning candidate thresholds.
pub fn counting_lower(p: &[f64], alpha: f64) -> f64 {
    let n = p.len() as f64;
    p.iter()
        .copied()
        .filter(|&t| p.iter().filter(|&&x| x <= t).count() as f64 / n >= 1.0 - alpha)
        .fold(f64::INFINITY, f64::min)
}
