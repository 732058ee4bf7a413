//! Tukey depth and depth level sets.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use robust::{orient2d, Coord};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{self, Direction, HPolytope, Halfspace, PointCloud, SphereNet};
use crate::linprog::{Support, SupportEvaluator};
use crate::quantile::{upper_quantile_of, LevelSpec};

/// Depth `count / n` kept as integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DepthRatio {
    pub count: usize,
    pub n: usize,
}

impl DepthRatio {
    pub fn value(self) -> f64 {
        self.count as f64 / self.n as f64
    }

    /// `count / n >= α`, compared the same way quantile ranks are chosen.
    pub fn meets(self, level: LevelSpec) -> bool {
        self.value() >= level.alpha()
    }
}

impl fmt::Display for DepthRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.count, self.n)
    }
}

impl PartialOrd for DepthRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DepthRatio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.count as u128 * other.n as u128).cmp(&(other.count as u128 * self.n as u128))
    }
}

fn require_2d(d: usize) -> Result<()> {
    if d != 2 {
        return Err(Error::invalid(format!("this operation needs d = 2, got d = {d}")));
    }
    Ok(())
}

fn coord(p: &[f64]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

/// Exact halfspace depth of `x` in a planar cloud by an angular sweep.
pub fn depth_exact_2d(cloud: &PointCloud, x: &[f64]) -> Result<DepthRatio> {
    require_2d(cloud.dim())?;
    cloud.check_point(x)?;
    let n = cloud.n();
    let pts: Vec<&[f64]> = cloud.points().filter(|p| *p != x).collect();
    let coincident = n - pts.len();
    if pts.is_empty() {
        return Ok(DepthRatio { count: n, n });
    }
    let origin = coord(x);

    // Each entry is ±(X_i - x); `true` marks the positive copy.
    let mut events: Vec<(usize, bool)> = (0..pts.len()).flat_map(|i| [(i, true), (i, false)]).collect();
    let upper = |i: usize, pos: bool| -> bool {
        let (dx, dy) = (pts[i][0] - x[0], pts[i][1] - x[1]);
        let (dx, dy) = if pos { (dx, dy) } else { (-dx, -dy) };
        dy > 0.0 || (dy == 0.0 && dx > 0.0)
    };
    // Sign of cross(s_a v_a, s_b v_b), exact.
    let cross = |a: (usize, bool), b: (usize, bool)| -> f64 {
        let o = orient2d(origin, coord(pts[a.0]), coord(pts[b.0]));
        if a.1 == b.1 {
            o
        } else {
            -o
        }
    };
    let cmp = |a: &(usize, bool), b: &(usize, bool)| -> Ordering {
        let (ha, hb) = (upper(a.0, a.1), upper(b.0, b.1));
        if ha != hb {
            return if ha { Ordering::Less } else { Ordering::Greater };
        }
        let c = cross(*a, *b);
        if c > 0.0 {
            Ordering::Less
        } else if c < 0.0 {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    };
    events.sort_by(cmp);

    // Open half-circle just before the first angle w: angles in [w, w + π).
    let w = events[0];
    let mut count = 0usize;
    for i in 0..pts.len() {
        let c = cross(w, (i, true));
        if c > 0.0 {
            count += 1;
        } else if c == 0.0 {
            let v = [pts[i][0] - x[0], pts[i][1] - x[1]];
            let wv = [pts[w.0][0] - x[0], pts[w.0][1] - x[1]];
            let same = geom::dot(&v, &wv) > 0.0;
            if same == w.1 {
                count += 1;
            }
        }
    }

    let mut best = usize::MAX;
    let mut g = 0;
    while g < events.len() {
        let mut h = g;
        let (mut plus, mut minus) = (0usize, 0usize);
        while h < events.len() && cmp(&events[g], &events[h]) == Ordering::Equal {
            if events[h].1 {
                plus += 1;
            } else {
                minus += 1;
            }
            h += 1;
        }
        count = count + minus - plus;
        best = best.min(count);
        g = h;
    }
    Ok(DepthRatio {
        count: best + coincident,
        n,
    })
}

/// Minimum halfspace count over the given directions; an upper bound on the depth.
pub fn depth_upper_bound(cloud: &PointCloud, x: &[f64], directions: &[Direction]) -> Result<DepthRatio> {
    cloud.check_point(x)?;
    if directions.is_empty() {
        return Err(Error::invalid("direction set is empty"));
    }
    let diffs: Vec<Vec<f64>> = cloud
        .points()
        .map(|p| p.iter().zip(x).map(|(a, b)| a - b).collect())
        .collect();
    let mut best = usize::MAX;
    for u in directions {
        if u.dim() != cloud.dim() {
            return Err(Error::DimensionMismatch {
                expected: cloud.dim(),
                found: u.dim(),
            });
        }
        let c = diffs.iter().filter(|v| u.dot(v) <= 0.0).count();
        best = best.min(c);
    }
    Ok(DepthRatio {
        count: best,
        n: cloud.n(),
    })
}

pub fn depth_upper_bound_net(cloud: &PointCloud, x: &[f64], net: &SphereNet) -> Result<DepthRatio> {
    depth_upper_bound(cloud, x, &net.directions)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Emptiness {
    Nonempty,
    Empty,
    Unbounded,
}

impl Emptiness {
    pub fn as_str(self) -> &'static str {
        match self {
            Emptiness::Nonempty => "nonempty",
            Emptiness::Empty => "empty",
            Emptiness::Unbounded => "unbounded",
        }
    }
}

impl fmt::Display for Emptiness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Empty by the Farkas test, unbounded if some `±e_i` or `±(1,…,1)/√d`
/// support value is infinite, nonempty otherwise.
pub fn classify(polytope: &HPolytope) -> Result<Emptiness> {
    let mut ev = SupportEvaluator::new(polytope)?;
    if !ev.is_feasible() {
        return Ok(Emptiness::Empty);
    }
    let d = polytope.dim();
    let mut probes = Direction::canonical(d)?;
    let diag = Direction::new(vec![1.0; d])?;
    probes.push(diag.neg());
    probes.push(diag);
    for u in &probes {
        if ev.support(u)? == Support::Unbounded {
            return Ok(Emptiness::Unbounded);
        }
    }
    Ok(Emptiness::Nonempty)
}

#[derive(Clone, Debug)]
pub struct LevelSetResult {
    pub polytope: HPolytope,
    pub alpha: LevelSpec,
    pub directions_used: usize,
    pub truncation: Option<f64>,
    pub emptiness: Emptiness,
}

/// One constraint `<u, x> <= q̂_u` per direction.
pub fn levelset_sampled(cloud: &PointCloud, level: LevelSpec, directions: &[Direction]) -> Result<LevelSetResult> {
    if directions.is_empty() {
        return Err(Error::invalid("at least one direction is required"));
    }
    if cloud.n() == 0 {
        return Err(Error::invalid("level set of an empty cloud"));
    }
    if let Some(u) = directions.iter().find(|u| u.dim() != cloud.dim()) {
        return Err(Error::DimensionMismatch {
            expected: cloud.dim(),
            found: u.dim(),
        });
    }
    let offsets: Vec<f64> = directions
        .par_iter()
        .map(|u| upper_quantile_of(&mut cloud.projections(u), level))
        .collect::<Result<_>>()?;
    let halfspaces = directions
        .iter()
        .zip(offsets)
        .map(|(u, t)| Halfspace::new(u.clone(), t))
        .collect();
    let polytope = HPolytope::new(cloud.dim(), halfspaces)?;
    let emptiness = classify(&polytope)?;
    Ok(LevelSetResult {
        polytope,
        alpha: level,
        directions_used: directions.len(),
        truncation: None,
        emptiness,
    })
}

/// Directions at which the order of projections of a planar cloud can
/// change, plus one direction inside every arc between them.
pub fn critical_directions_2d(cloud: &PointCloud) -> Result<Vec<Direction>> {
    require_2d(cloud.dim())?;
    let pts: Vec<&[f64]> = cloud.points().collect();
    let mut normals = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (wx, wy) = (pts[j][0] - pts[i][0], pts[j][1] - pts[i][1]);
            if wx == 0.0 && wy == 0.0 {
                continue;
            }
            let nrm = Direction::new(vec![-wy, wx])?;
            normals.push(nrm.neg());
            normals.push(nrm);
        }
    }
    if normals.is_empty() {
        return Direction::canonical(2);
    }
    let mut angles: Vec<f64> = normals.iter().map(|u| u.coords()[1].atan2(u.coords()[0])).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup();
    for k in 0..angles.len() {
        let a = angles[k];
        let b = if k + 1 < angles.len() { angles[k + 1] } else { angles[0] + 2.0 * PI };
        if b > a {
            let m = 0.5 * (a + b);
            normals.push(Direction::new(vec![m.cos(), m.sin()])?);
        }
    }
    Ok(normals)
}

/// The empirical level set of a planar cloud through its critical directions.
pub fn levelset_exact_2d(cloud: &PointCloud, level: LevelSpec) -> Result<LevelSetResult> {
    let dirs = critical_directions_2d(cloud)?;
    levelset_sampled(cloud, level, &dirs)
}

/// Cuts a level set down to the ball of the given radius, approximated from
/// outside by the cube `|x_i| <= radius` and, for `d <= 3`, the `2^d`
/// diagonal faces. An empty input becomes the singleton `{0}`.
pub fn truncate(result: &LevelSetResult, radius: f64) -> Result<LevelSetResult> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid(format!("truncation radius must be positive, got {radius}")));
    }
    let d = result.polytope.dim();
    if result.emptiness == Emptiness::Empty {
        let polytope = HPolytope::cube(d, 0.0, 0.0)?;
        return Ok(LevelSetResult {
            polytope,
            alpha: result.alpha,
            directions_used: result.directions_used,
            truncation: Some(radius),
            emptiness: Emptiness::Nonempty,
        });
    }
    let mut polytope = result.polytope.clone();
    for u in Direction::canonical(d)? {
        polytope.push(Halfspace::new(u, radius))?;
    }
    if d <= 3 {
        for mask in 0..(1usize << d) {
            let v: Vec<f64> = (0..d).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
            polytope.push(Halfspace::new(Direction::new(v)?, radius))?;
        }
    }
    let emptiness = classify(&polytope)?;
    Ok(LevelSetResult {
        polytope,
        alpha: result.alpha,
        directions_used: result.directions_used,
        truncation: Some(radius),
        emptiness,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgreementReport {
    pub points: usize,
    pub excluded: usize,
    pub disagreements: usize,
    pub inside_by_depth: usize,
    pub inside_by_quantiles: usize,
}

/// Compares depth-based membership with quantile-constraint membership on a
/// planar grid. The constraint side uses the critical directions of the
/// cloud together with a covering net of radius 0.01. Points whose smallest
/// constraint slack is within `tol` of zero are not compared.
pub fn representations_agree(
    cloud: &PointCloud,
    level: LevelSpec,
    grid: &[[f64; 2]],
    tol: f64,
) -> Result<AgreementReport> {
    require_2d(cloud.dim())?;
    let mut dirs = critical_directions_2d(cloud)?;
    dirs.extend(geom::deterministic_net(2, 0.01)?.directions);
    let offsets: Vec<f64> = dirs
        .iter()
        .map(|u| upper_quantile_of(&mut cloud.projections(u), level))
        .collect::<Result<_>>()?;

    let rows: Vec<(bool, bool, f64)> = grid
        .par_iter()
        .map(|x| {
            let by_depth = depth_exact_2d(cloud, x)?.meets(level);
            let slack = dirs
                .iter()
                .zip(&offsets)
                .map(|(u, t)| t - u.dot(x))
                .fold(f64::INFINITY, f64::min);
            Ok((by_depth, slack >= 0.0, slack))
        })
        .collect::<Result<_>>()?;

    let mut rep = AgreementReport {
        points: grid.len(),
        excluded: 0,
        disagreements: 0,
        inside_by_depth: 0,
        inside_by_quantiles: 0,
    };
    for (a, b, slack) in rows {
        rep.inside_by_depth += a as usize;
        rep.inside_by_quantiles += b as usize;
        if slack.abs() <= tol {
            rep.excluded += 1;
        } else if a != b {
            rep.disagreements += 1;
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtomCheck {
    pub holds: bool,
    pub atom: Vec<f64>,
    pub multiplicity: usize,
    pub atom_depth: DepthRatio,
    pub emptiness: Emptiness,
}

/// For a planar cloud whose most frequent point `x₀` carries more than half
/// the mass and a level `α > 1/2`: the empirical level set should be empty or
/// exactly `{x₀}`. `holds` is true when `x₀` reaches depth `α` and every
/// support value of the level set on a fine net equals `<u, x₀>` within 1e-6.
pub fn atom_levelset_check(cloud: &PointCloud, level: LevelSpec) -> Result<AtomCheck> {
    require_2d(cloud.dim())?;
    let n = cloud.n();
    if n == 0 {
        return Err(Error::invalid("empty cloud"));
    }
    let mut freq: HashMap<[u64; 2], usize> = HashMap::new();
    for p in cloud.points() {
        *freq.entry([p[0].to_bits(), p[1].to_bits()]).or_default() += 1;
    }
    let (key, mult) = freq
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(k, v)| (*k, *v))
        .expect("nonempty");
    if 2 * mult <= n {
        return Err(Error::invalid(format!(
            "most frequent point has mass {mult}/{n}, need more than 1/2"
        )));
    }
    if level.alpha() <= 0.5 {
        return Err(Error::invalid(format!("alpha must exceed 1/2, got {level}")));
    }
    let atom = vec![f64::from_bits(key[0]), f64::from_bits(key[1])];
    let atom_depth = depth_exact_2d(cloud, &atom)?;
    let set = levelset_exact_2d(cloud, level)?;
    let mut holds = atom_depth.meets(level) && set.emptiness == Emptiness::Nonempty;
    if holds {
        let mut ev = SupportEvaluator::new(&set.polytope)?;
        for u in &geom::deterministic_net(2, 0.01)?.directions {
            match ev.support(u)? {
                Support::Finite(h) if (h - u.dot(&atom)).abs() <= 1e-6 => {}
                _ => {
                    holds = false;
                    break;
                }
            }
        }
    }
    Ok(AtomCheck {
        holds,
        atom,
        multiplicity: mult,
        atom_depth,
        emptiness: set.emptiness,
    })
}
