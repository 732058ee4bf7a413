//! Directions, sphere nets, halfspaces, H-polytopes and point clouds.
//!
//! Distances between directions are Euclidean chords, never geodesic arcs.
//! A chord `c` corresponds to the angle `2·asin(c/2)`.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Default absolute tolerance for membership predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A unit vector on the sphere `S^(d-1)`, `d >= 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `coords` onto the sphere.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid(format!(
                "directions need d >= 2, got d = {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("direction has non-finite coordinates"));
        }
        let len = norm(&coords);
        if len == 0.0 || !len.is_finite() {
            return Err(Error::invalid("cannot normalize the zero vector"));
        }
        Ok(Direction(coords.into_iter().map(|c| c / len).collect()))
    }

    /// `sign · e_axis` in dimension `d`.
    pub fn axis(d: usize, axis: usize, positive: bool) -> Result<Self> {
        if axis >= d {
            return Err(Error::invalid(format!("axis {axis} out of range for d = {d}")));
        }
        let mut c = vec![0.0; d];
        c[axis] = if positive { 1.0 } else { -1.0 };
        Direction::new(c)
    }

    /// The `2d` directions `±e_i`.
    pub fn canonical(d: usize) -> Result<Vec<Self>> {
        let mut out = Vec::with_capacity(2 * d);
        for i in 0..d {
            out.push(Direction::axis(d, i, true)?);
            out.push(Direction::axis(d, i, false)?);
        }
        Ok(out)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        dot(&self.0, x)
    }

    pub fn neg(&self) -> Direction {
        Direction(self.0.iter().map(|c| -c).collect())
    }

    /// Euclidean chord length `|u - v|`.
    pub fn chord(&self, other: &Direction) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// The closed halfspace `{x : <normal, x> <= offset}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    pub normal: Direction,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Direction, offset: f64) -> Self {
        Halfspace { normal, offset }
    }

    /// Builds `<a, x> <= t` for an arbitrary nonzero `a`, rescaling `t`.
    pub fn from_raw(a: Vec<f64>, t: f64) -> Result<Self> {
        let len = norm(&a);
        let normal = Direction::new(a)?;
        if !t.is_finite() {
            return Err(Error::invalid("halfspace offset is not finite"));
        }
        Ok(Halfspace {
            normal,
            offset: t / len,
        })
    }

    pub fn slack(&self, x: &[f64]) -> f64 {
        self.offset - self.normal.dot(x)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.normal.dot(x) <= self.offset + tol
    }
}

/// A finite intersection of closed halfspaces in `R^dim`.
///
/// The empty list is the whole space. Near-duplicate normals are kept as is.
#[derive(Clone, Debug, PartialEq)]
pub struct HPolytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
}

impl HPolytope {
    pub fn new(dim: usize, halfspaces: Vec<Halfspace>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid(format!("polytopes need d >= 2, got {dim}")));
        }
        for h in &halfspaces {
            if h.normal.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: h.normal.dim(),
                });
            }
        }
        Ok(HPolytope { dim, halfspaces })
    }

    /// Whole space.
    pub fn unconstrained(dim: usize) -> Result<Self> {
        HPolytope::new(dim, Vec::new())
    }

    /// The box `[lo, hi]^d`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        let mut hs = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            hs.push(Halfspace::new(Direction::axis(dim, i, true)?, hi));
            hs.push(Halfspace::new(Direction::axis(dim, i, false)?, -lo));
        }
        HPolytope::new(dim, hs)
    }

    /// Outer polytope of the ball `B(center, radius)`: one tangent halfspace per direction.
    pub fn circumscribing_ball(center: &[f64], radius: f64, directions: &[Direction]) -> Result<Self> {
        let hs = directions
            .iter()
            .map(|u| Halfspace::new(u.clone(), u.dot(center) + radius))
            .collect();
        HPolytope::new(center.len(), hs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn len(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.halfspaces.is_empty()
    }

    pub fn push(&mut self, h: Halfspace) -> Result<()> {
        if h.normal.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: h.normal.dim(),
            });
        }
        self.halfspaces.push(h);
        Ok(())
    }

    /// Translates the polytope by `v`.
    pub fn translated(&self, v: &[f64]) -> HPolytope {
        HPolytope {
            dim: self.dim,
            halfspaces: self
                .halfspaces
                .iter()
                .map(|h| Halfspace::new(h.normal.clone(), h.offset + h.normal.dot(v)))
                .collect(),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self.halfspaces.iter().all(|h| h.contains(x, tol)))
    }

    /// Smallest slack `t_j - <u_j, x>` over all constraints (`+inf` without constraints).
    pub fn min_slack(&self, x: &[f64]) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.slack(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Vertices of a bounded planar polytope in counterclockwise order.
    ///
    /// Pairwise intersections of boundary lines filtered by feasibility. Near
    /// coincident vertices (closer than `tol`) are merged. Returns an empty list
    /// for an empty polygon; a degenerate polygon yields one or two points.
    pub fn vertices_2d(&self, tol: f64) -> Result<Vec<[f64; 2]>> {
        if self.dim != 2 {
            return Err(Error::invalid("vertex enumeration is only provided in d = 2"));
        }
        let hs = &self.halfspaces;
        let mut pts: Vec<[f64; 2]> = Vec::new();
        for i in 0..hs.len() {
            for j in (i + 1)..hs.len() {
                let (a, b) = (hs[i].normal.coords(), hs[j].normal.coords());
                let det = a[0] * b[1] - a[1] * b[0];
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = (hs[i].offset * b[1] - a[1] * hs[j].offset) / det;
                let y = (a[0] * hs[j].offset - hs[i].offset * b[0]) / det;
                let p = [x, y];
                if hs.iter().all(|h| h.contains(&p, tol)) && !pts.iter().any(|q| dist2(q, &p) <= tol * tol) {
                    pts.push(p);
                }
            }
        }
        if pts.len() > 2 {
            let cx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
            let cy = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
            pts.sort_by(|p, q| {
                let ap = (p[1] - cy).atan2(p[0] - cx);
                let aq = (q[1] - cy).atan2(q[0] - cx);
                ap.total_cmp(&aq)
            });
        }
        Ok(pts)
    }
}

fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Membership of `x` in `polytope` with absolute tolerance `tol`.
pub fn polytope_contains(polytope: &HPolytope, x: &[f64], tol: f64) -> Result<bool> {
    polytope.contains(x, tol)
}

/// `n` sample points in `R^d`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    data: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("point cloud dimension must be positive"));
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "point cloud needs n >= 1 rows of {dim} coordinates, got {} values",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("point cloud contains non-finite values"));
        }
        Ok(PointCloud { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(dim * rows.len());
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        PointCloud::new(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// `<u, X_i>` for every sample point.
    pub fn projections(&self, u: &Direction) -> Vec<f64> {
        self.points().map(|p| u.dot(p)).collect()
    }

    pub fn translated(&self, v: &[f64]) -> PointCloud {
        let data = self
            .points()
            .flat_map(|p| p.iter().zip(v).map(|(a, b)| a + b).collect::<Vec<_>>())
            .collect();
        PointCloud { dim: self.dim, data }
    }

    pub fn scaled(&self, c: f64) -> PointCloud {
        PointCloud {
            dim: self.dim,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for p in self.points() {
            for (mi, pi) in m.iter_mut().zip(p) {
                *mi += pi;
            }
        }
        let n = self.n() as f64;
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NetKind {
    DeterministicCovering,
    UniformRandom,
}

/// A finite direction set with its claimed covering radius (chord).
#[derive(Clone, Debug)]
pub struct SphereNet {
    pub directions: Vec<Direction>,
    pub delta: f64,
    pub kind: NetKind,
}

impl SphereNet {
    pub fn dim(&self) -> usize {
        self.directions.first().map_or(0, Direction::dim)
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// `m` i.i.d. uniform directions, obtained by normalizing standard Gaussian vectors.
pub fn uniform_directions(d: usize, m: usize, seed: u64) -> Result<Vec<Direction>> {
    if d < 2 {
        return Err(Error::invalid(format!("uniform directions need d >= 2, got {d}")));
    }
    if m == 0 {
        return Err(Error::invalid("need at least one direction"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Ok(u) = Direction::new(v) {
            out.push(u);
        }
    }
    Ok(out)
}

/// A covering net of `S^(d-1)`: every unit vector lies within chord `δ/2`
/// of a net point, so it is a δ-net with room to spare.
///
/// For `d = 2` the net is `K = ceil(2π / (2·asin(δ/2)))` equally spaced angles.
/// For `d >= 3` the sphere is cut into latitude bands of angular half-width
/// at most `δ/4`; each band circle carries a scaled net of `S^(d-2)` with
/// covering radius `δ/4`, and the two legs add up to `δ/2`.
pub fn deterministic_net(d: usize, delta: f64) -> Result<SphereNet> {
    if d < 2 {
        return Err(Error::invalid(format!("nets need d >= 2, got {d}")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!("net delta must lie in (0, 1], got {delta}")));
    }
    let directions = sphere_cover(d, delta)
        .into_iter()
        .map(Direction::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(SphereNet {
        directions,
        delta,
        kind: NetKind::DeterministicCovering,
    })
}

// Covering radius of the output is at most `radius / 2`.
fn sphere_cover(d: usize, radius: f64) -> Vec<Vec<f64>> {
    if d == 2 {
        let spacing = 2.0 * (radius.min(2.0) / 2.0).asin();
        let k = ((2.0 * PI) / spacing).ceil().max(3.0) as usize;
        return (0..k)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / k as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
    }
    if radius >= 4.0 {
        let mut pole = vec![0.0; d];
        pole[d - 1] = 1.0;
        return vec![pole];
    }
    let bands = (2.0 * PI / radius).ceil() as usize;
    let mut out = Vec::new();
    for k in 0..bands {
        let phi = -PI / 2.0 + (k as f64 + 0.5) * PI / bands as f64;
        let (s, c) = phi.sin_cos();
        for v in sphere_cover(d - 1, (radius / 2.0) / c) {
            let mut p: Vec<f64> = v.iter().map(|x| x * c).collect();
            p.push(s);
            out.push(p);
        }
    }
    out
}

/// Conservative δ-net check: every probe direction must be within `δ/2` of a
/// candidate. The probe must have covering radius at most `δ/4`, so a pass
/// certifies covering radius `<= 3δ/4` for the candidate set.
pub fn is_delta_net(candidate: &[Direction], delta: f64, probe: &SphereNet) -> Result<bool> {
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("delta must be positive, got {delta}")));
    }
    if probe.delta > delta / 4.0 * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "probe covering radius {} exceeds delta/4 = {}",
            probe.delta,
            delta / 4.0
        )));
    }
    if candidate.is_empty() {
        return Ok(false);
    }
    let d = candidate[0].dim();
    if candidate.iter().any(|u| u.dim() != d) || probe.dim() != d {
        return Err(Error::invalid("candidate and probe directions differ in dimension"));
    }

    let reach = delta / 2.0;
    let cell = |x: &[f64]| -> Vec<i64> { x.iter().map(|c| (c / reach).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, u) in candidate.iter().enumerate() {
        grid.entry(cell(u.coords())).or_default().push(i);
    }

    let offsets = neighbor_offsets(d);
    let covered = |p: &Direction| -> bool {
        let base = cell(p.coords());
        offsets.iter().any(|off| {
            let key: Vec<i64> = base.iter().zip(off).map(|(b, o)| b + o).collect();
            grid.get(&key)
                .is_some_and(|ids| ids.iter().any(|&i| candidate[i].chord(p) <= reach))
        })
    };
    Ok(probe.directions.iter().all(covered))
}

fn neighbor_offsets(d: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-1..=1).map(move |o| {
                    let mut w = v.clone();
                    w.push(o);
                    w
                })
            })
            .collect();
    }
    out
}
