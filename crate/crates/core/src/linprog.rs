//! Dense simplex for `max <c, x>` subject to `A x <= b` with `x` free.
//!
//! The solver works on the standard-form dual
//!
//! ```text
//!     min <b, y>   s.t.   A^T y = c,   y >= 0
//! ```
//!
//! whose tableau has `d` rows and `m` columns, so problems with many
//! constraints in low dimension stay cheap. The primal optimum is read off
//! the simplex multipliers; the basic dual values are the nonnegative weights
//! of the active cone `c = Σ y_j a_j`.
//!
//! Feasibility of `A x <= b` is decided first through the Farkas system
//! `A^T y = 0, 1^T y = 1, y >= 0, <b, y> < 0`. Every pivot uses Bland's rule.
//! [`SupportEvaluator`] keeps the last optimal tableau and re-optimizes for a
//! new objective with dual simplex pivots, which only changes the right-hand
//! side of the dual.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geom::{Direction, HPolytope};

/// Threshold on the Farkas objective below which `A x <= b` is declared empty.
pub const INFEASIBILITY_TOL: f64 = 1e-9;
/// Constraints with `|<a_j, x*> - b_j|` below this are reported active.
pub const ACTIVE_TOL: f64 = 1e-8;

const PIVOT_EPS: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

impl LpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Unbounded => "unbounded",
            LpStatus::Infeasible => "infeasible",
        }
    }
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `max <objective, x>` subject to `A x <= b`, with `A` stored row-major.
#[derive(Clone, Debug)]
pub struct LpProblem {
    objective: Vec<f64>,
    constraints: Constraints,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, rows: &[Vec<f64>], b: Vec<f64>) -> Result<Self> {
        let dim = objective.len();
        if dim == 0 {
            return Err(Error::invalid("objective must have at least one coordinate"));
        }
        if rows.len() != b.len() {
            return Err(Error::invalid(format!(
                "{} constraint rows but {} right-hand sides",
                rows.len(),
                b.len()
            )));
        }
        let mut a = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            a.extend_from_slice(r);
        }
        let constraints = Constraints { dim, a, b };
        let lp = LpProblem {
            objective,
            constraints,
        };
        lp.check_finite()?;
        Ok(lp)
    }

    pub fn from_polytope(polytope: &HPolytope, objective: &[f64]) -> Result<Self> {
        if objective.len() != polytope.dim() {
            return Err(Error::DimensionMismatch {
                expected: polytope.dim(),
                found: objective.len(),
            });
        }
        let lp = LpProblem {
            objective: objective.to_vec(),
            constraints: Constraints::from_polytope(polytope),
        };
        lp.check_finite()?;
        Ok(lp)
    }

    fn check_finite(&self) -> Result<()> {
        let c = &self.constraints;
        if self
            .objective
            .iter()
            .chain(&c.a)
            .chain(&c.b)
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("LP data contains NaN or infinite values"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.constraints.dim
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.m()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub value: f64,
    pub point: Vec<f64>,
    /// All constraints tight at `point` within [`ACTIVE_TOL`].
    pub active_set: Vec<usize>,
    /// Basic constraints of the final tableau (at most `d`).
    pub basis: Vec<usize>,
    /// Nonnegative dual values for `basis`: `Σ weights_j a_j = c`.
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpSolution {
    Optimal(Optimum),
    Unbounded,
    Infeasible,
}

impl LpSolution {
    pub fn status(&self) -> LpStatus {
        match self {
            LpSolution::Optimal(_) => LpStatus::Optimal,
            LpSolution::Unbounded => LpStatus::Unbounded,
            LpSolution::Infeasible => LpStatus::Infeasible,
        }
    }

    pub fn optimum(&self) -> Option<&Optimum> {
        match self {
            LpSolution::Optimal(o) => Some(o),
            _ => None,
        }
    }
}

/// Solves one LP from scratch.
pub fn solve(problem: &LpProblem) -> Result<LpSolution> {
    let mut solver = Solver::new(problem.constraints.clone())?;
    solver.maximize(&problem.objective)
}

/// Value of a support function evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Finite(f64),
    Unbounded,
}

impl Support {
    pub fn finite(self) -> Option<f64> {
        match self {
            Support::Finite(v) => Some(v),
            Support::Unbounded => None,
        }
    }
}

/// `h_P(u) = max_{x in P} <u, x>`.
pub fn support_function(polytope: &HPolytope, u: &Direction) -> Result<Support> {
    SupportEvaluator::new(polytope)?.support(u)
}

/// Active cone at the maximizer of `<u, x>` over `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct ActiveCone {
    pub point: Vec<f64>,
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Maximizer `x*` with at most `d` tight constraints whose normals generate `u`
/// with nonnegative weights. When more than `d` constraints are tight the
/// returned subset is one valid choice among several.
pub fn active_cone_certificate(polytope: &HPolytope, u: &Direction) -> Result<ActiveCone> {
    let mut ev = SupportEvaluator::new(polytope)?;
    match ev.maximize(u.coords())? {
        LpSolution::Optimal(opt) => {
            let (indices, weights) = opt
                .basis
                .iter()
                .zip(&opt.weights)
                .filter(|(_, &w)| w > 1e-12)
                .map(|(&j, &w)| (j, w))
                .unzip();
            Ok(ActiveCone {
                point: opt.point,
                indices,
                weights,
            })
        }
        other => Err(Error::NotOptimal(other.status())),
    }
}

/// Repeated support-function queries on one polytope, warm-started between calls.
pub struct SupportEvaluator {
    solver: Solver,
}

impl SupportEvaluator {
    pub fn new(polytope: &HPolytope) -> Result<Self> {
        let constraints = Constraints::from_polytope(polytope);
        if constraints.a.iter().chain(&constraints.b).any(|v| !v.is_finite()) {
            return Err(Error::invalid("polytope has non-finite data"));
        }
        Ok(SupportEvaluator {
            solver: Solver::new(constraints)?,
        })
    }

    pub fn is_feasible(&self) -> bool {
        self.solver.feasible
    }

    pub fn maximize(&mut self, objective: &[f64]) -> Result<LpSolution> {
        if objective.len() != self.solver.cons.dim {
            return Err(Error::DimensionMismatch {
                expected: self.solver.cons.dim,
                found: objective.len(),
            });
        }
        if objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("objective contains NaN or infinite values"));
        }
        self.solver.maximize(objective)
    }

    /// Errors with [`Error::EmptyPolytope`] when the polytope is empty.
    pub fn support(&mut self, u: &Direction) -> Result<Support> {
        match self.maximize(u.coords())? {
            LpSolution::Optimal(o) => Ok(Support::Finite(o.value)),
            LpSolution::Unbounded => Ok(Support::Unbounded),
            LpSolution::Infeasible => Err(Error::EmptyPolytope),
        }
    }
}

/// Emptiness test for `{x : A x <= b}` through the Farkas alternative.
pub fn is_feasible(polytope: &HPolytope) -> Result<bool> {
    Ok(SupportEvaluator::new(polytope)?.is_feasible())
}

#[derive(Clone, Debug)]
struct Constraints {
    dim: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Constraints {
    fn from_polytope(p: &HPolytope) -> Self {
        let dim = p.dim();
        let mut a = Vec::with_capacity(p.len() * dim);
        let mut b = Vec::with_capacity(p.len());
        for h in p.halfspaces() {
            a.extend_from_slice(h.normal.coords());
            b.push(h.offset);
        }
        Constraints { dim, a, b }
    }

    fn m(&self) -> usize {
        self.b.len()
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.a[j * self.dim..(j + 1) * self.dim]
    }

    /// True when `A^T y = 0, 1^T y = 1, y >= 0` admits `<b, y>` below the threshold.
    fn farkas_infeasible(&self) -> Result<bool> {
        let m = self.m();
        if m == 0 {
            return Ok(false);
        }
        let rows = self.dim + 1;
        let mut rhs = vec![0.0; rows];
        rhs[self.dim] = 1.0;
        let mut tab = Tableau::new(rows, m, &rhs, |i, j| {
            if i < self.dim {
                self.a[j * self.dim + i]
            } else {
                1.0
            }
        });
        let mut budget = 50 * (m + rows);
        if !tab.phase_one(&mut budget)? {
            return Ok(false);
        }
        tab.drive_out_artificials();
        tab.set_costs(&self.b);
        match tab.primal(&mut budget)? {
            PrimalEnd::Optimal => Ok(-tab.z[tab.width] < -INFEASIBILITY_TOL),
            // The feasible region of the Farkas system is a simplex slice.
            PrimalEnd::Unbounded => Err(Error::SolverFailure(
                "Farkas system reported unbounded".into(),
            )),
        }
    }
}

struct Solver {
    cons: Constraints,
    feasible: bool,
    warm: Option<Tableau>,
}

impl Solver {
    fn new(cons: Constraints) -> Result<Self> {
        let feasible = !cons.farkas_infeasible()?;
        Ok(Solver {
            cons,
            feasible,
            warm: None,
        })
    }

    fn maximize(&mut self, c: &[f64]) -> Result<LpSolution> {
        if !self.feasible {
            return Ok(LpSolution::Infeasible);
        }
        if self.cons.m() == 0 {
            return Ok(if c.iter().all(|v| *v == 0.0) {
                LpSolution::Optimal(Optimum {
                    value: 0.0,
                    point: vec![0.0; self.cons.dim],
                    active_set: Vec::new(),
                    basis: Vec::new(),
                    weights: Vec::new(),
                })
            } else {
                LpSolution::Unbounded
            });
        }
        if let Some(mut tab) = self.warm.take() {
            let mut budget = 50 * (self.cons.m() + self.cons.dim);
            match tab.resolve_rhs(c, &mut budget) {
                Ok(DualEnd::Optimal) => {
                    let opt = tab.extract(&self.cons, c);
                    self.warm = Some(tab);
                    return Ok(LpSolution::Optimal(opt));
                }
                Ok(DualEnd::Infeasible) => {
                    self.warm = Some(tab);
                    return Ok(LpSolution::Unbounded);
                }
                // Iteration cap on the warm path: fall back to a cold solve.
                Err(_) => {}
            }
        }
        self.cold(c)
    }

    fn cold(&mut self, c: &[f64]) -> Result<LpSolution> {
        let cons = &self.cons;
        let (m, d) = (cons.m(), cons.dim);
        let mut tab = Tableau::new(d, m, c, |i, j| cons.a[j * d + i]);
        let mut budget = 50 * (m + d);
        if !tab.phase_one(&mut budget)? {
            return Ok(LpSolution::Unbounded);
        }
        tab.drive_out_artificials();
        tab.set_costs(&cons.b);
        match tab.primal(&mut budget)? {
            PrimalEnd::Optimal => {
                let opt = tab.extract(cons, c);
                self.warm = Some(tab);
                Ok(LpSolution::Optimal(opt))
            }
            PrimalEnd::Unbounded => Ok(LpSolution::Infeasible),
        }
    }
}

enum PrimalEnd {
    Optimal,
    Unbounded,
}

enum DualEnd {
    Optimal,
    Infeasible,
}

/// Dense tableau `B^{-1} [M | S]` with `S = diag(signs)` on the artificial block.
#[derive(Clone, Debug)]
struct Tableau {
    rows: usize,
    real: usize,
    width: usize,
    /// `rows × (width + 1)`, last column is the right-hand side.
    t: Vec<f64>,
    /// Reduced costs; `z[width]` holds minus the objective value.
    z: Vec<f64>,
    basis: Vec<usize>,
    signs: Vec<f64>,
    costs: Vec<f64>,
}

impl Tableau {
    fn new(rows: usize, real: usize, rhs: &[f64], entry: impl Fn(usize, usize) -> f64) -> Self {
        let width = real + rows;
        let stride = width + 1;
        let mut t = vec![0.0; rows * stride];
        let signs: Vec<f64> = rhs.iter().map(|&r| if r < 0.0 { -1.0 } else { 1.0 }).collect();
        for i in 0..rows {
            let row = &mut t[i * stride..(i + 1) * stride];
            for (j, cell) in row.iter_mut().take(real).enumerate() {
                *cell = signs[i] * entry(i, j);
            }
            row[real + i] = 1.0;
            row[width] = rhs[i].abs();
        }
        Tableau {
            rows,
            real,
            width,
            t,
            z: vec![0.0; stride],
            basis: (real..real + rows).collect(),
            signs,
            costs: Vec::new(),
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.width + 1) + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let stride = self.width + 1;
        let p = self.t[r * stride + c];
        for v in &mut self.t[r * stride..(r + 1) * stride] {
            *v /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * stride);
        let (prow, after) = rest.split_at_mut(stride);
        for row in before.chunks_exact_mut(stride).chain(after.chunks_exact_mut(stride)) {
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.z[c];
        if f != 0.0 {
            for (v, pv) in self.z.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
            self.z[c] = 0.0;
        }
        self.basis[r] = c;
    }

    fn cost_of(&self, var: usize) -> f64 {
        if var < self.real {
            self.costs.get(var).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    }

    /// Minimizes the sum of artificials. Returns whether a feasible basis exists.
    fn phase_one(&mut self, budget: &mut usize) -> Result<bool> {
        let stride = self.width + 1;
        self.z = vec![0.0; stride];
        for i in 0..self.rows {
            for j in 0..self.real {
                self.z[j] -= self.at(i, j);
            }
            self.z[self.width] -= self.rhs(i);
        }
        self.run_primal(budget, self.width)?;
        Ok(-self.z[self.width] <= PHASE1_TOL)
    }

    /// Pivots basic artificials out on any usable real column; rows that are
    /// zero on every real column stay inert with their artificial at zero.
    fn drive_out_artificials(&mut self) {
        for i in 0..self.rows {
            if self.basis[i] < self.real {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.real {
                let v = self.at(i, j).abs();
                if v > PIVOT_EPS && best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                self.pivot(i, j);
            }
        }
        let stride = self.width + 1;
        for i in 0..self.rows {
            let cell = &mut self.t[i * stride + self.width];
            if *cell < 0.0 && *cell > -PHASE1_TOL {
                *cell = 0.0;
            }
        }
    }

    fn set_costs(&mut self, costs: &[f64]) {
        self.costs = costs.to_vec();
        let stride = self.width + 1;
        let mut z = vec![0.0; stride];
        z[..self.real].copy_from_slice(costs);
        for i in 0..self.rows {
            let cb = self.cost_of(self.basis[i]);
            if cb != 0.0 {
                for (zj, tj) in z.iter_mut().zip(&self.t[i * stride..(i + 1) * stride]) {
                    *zj -= cb * tj;
                }
            }
        }
        for i in 0..self.rows {
            z[self.basis[i]] = 0.0;
        }
        self.z = z;
    }

    fn cost_eps(&self) -> f64 {
        let scale = self.costs.iter().fold(1.0f64, |a, c| a.max(c.abs()));
        1e-11 * scale
    }

    fn primal(&mut self, budget: &mut usize) -> Result<PrimalEnd> {
        self.run_primal(budget, self.real)
    }

    /// Bland's rule primal simplex over columns `< limit`.
    fn run_primal(&mut self, budget: &mut usize, limit: usize) -> Result<PrimalEnd> {
        let eps = self.cost_eps();
        loop {
            let Some(enter) = (0..limit).find(|&j| self.z[j] < -eps) else {
                return Ok(PrimalEnd::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, enter);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-12 * br.abs().max(1.0)
                                || (ratio <= br + 1e-12 * br.abs().max(1.0)
                                    && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(PrimalEnd::Unbounded);
            };
            self.spend(budget)?;
            self.pivot(r, enter);
        }
    }

    fn spend(&self, budget: &mut usize) -> Result<()> {
        if *budget == 0 {
            return Err(Error::SolverFailure(
                "simplex iteration cap reached (cycling)".into(),
            ));
        }
        *budget -= 1;
        Ok(())
    }

    /// Replaces the right-hand side by `B^{-1} c` and restores primal
    /// feasibility with Bland-ordered dual simplex pivots.
    fn resolve_rhs(&mut self, c: &[f64], budget: &mut usize) -> Result<DualEnd> {
        let stride = self.width + 1;
        let sc: Vec<f64> = c.iter().zip(&self.signs).map(|(v, s)| v * s).collect();
        for i in 0..self.rows {
            let row = &self.t[i * stride..(i + 1) * stride];
            let v: f64 = row[self.real..self.width].iter().zip(&sc).map(|(a, b)| a * b).sum();
            self.t[i * stride + self.width] = v;
        }
        for i in 0..self.rows {
            if self.basis[i] >= self.real {
                let v = self.rhs(i);
                if v.abs() > PHASE1_TOL {
                    return Ok(DualEnd::Infeasible);
                }
                self.t[i * stride + self.width] = 0.0;
            }
        }
        self.z[self.width] = -(0..self.rows)
            .map(|i| self.cost_of(self.basis[i]) * self.rhs(i))
            .sum::<f64>();

        let rhs_eps = 1e-11 * c.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        loop {
            let leave = (0..self.rows)
                .filter(|&i| self.basis[i] < self.real && self.rhs(i) < -rhs_eps)
                .min_by_key(|&i| self.basis[i]);
            let Some(r) = leave else {
                return Ok(DualEnd::Optimal);
            };
            let mut enter: Option<(usize, f64)> = None;
            for j in 0..self.real {
                let a = self.at(r, j);
                if a < -PIVOT_EPS {
                    let ratio = self.z[j].max(0.0) / -a;
                    if enter.is_none_or(|(_, br)| ratio < br - 1e-12 * br.abs().max(1.0)) {
                        enter = Some((j, ratio));
                    }
                }
            }
            let Some((j, _)) = enter else {
                return Ok(DualEnd::Infeasible);
            };
            self.spend(budget)?;
            self.pivot(r, j);
        }
    }

    /// Primal point from the multipliers, polished on the basic constraints.
    fn extract(&self, cons: &Constraints, c: &[f64]) -> Optimum {
        let d = cons.dim;
        let mut x: Vec<f64> = (0..d)
            .map(|k| -self.z[self.real + k] * self.signs[k])
            .collect();
        let basic: Vec<usize> = (0..self.rows)
            .filter(|&i| self.basis[i] < self.real)
            .collect();
        let cols: Vec<usize> = basic.iter().map(|&i| self.basis[i]).collect();
        let mut weights: Vec<f64> = basic.iter().map(|&i| self.rhs(i).max(0.0)).collect();

        if !cols.is_empty() {
            let n = DMatrix::from_fn(d, cols.len(), |i, k| cons.row(cols[k])[i]);
            let gram = n.transpose() * &n;
            if let Some(chol) = gram.clone().cholesky() {
                let xv = DVector::from_column_slice(&x);
                let resid =
                    n.transpose() * &xv - DVector::from_iterator(cols.len(), cols.iter().map(|&j| cons.b[j]));
                let fix = &n * chol.solve(&resid);
                for (xi, f) in x.iter_mut().zip(fix.iter()) {
                    *xi -= f;
                }
                let w = chol.solve(&(n.transpose() * DVector::from_column_slice(c)));
                weights = w.iter().map(|v| v.max(0.0)).collect();
            }
        }

        let value = c.iter().zip(&x).map(|(a, b)| a * b).sum();
        let active_set = (0..cons.m())
            .filter(|&j| {
                let r = cons.row(j);
                let ax: f64 = r.iter().zip(&x).map(|(a, b)| a * b).sum();
                (ax - cons.b[j]).abs() <= ACTIVE_TOL
            })
            .collect();
        Optimum {
            value,
            point: x,
            active_set,
            basis: cols,
            weights,
        }
    }
}
