//! Two-phase revised simplex with dual values and infeasibility / unboundedness
//! certificates.
//!
//! Problems are `min cᵀx` subject to sparse rows `aᵢx {≥, ≤, =} bᵢ` and finite
//! lower bounds `x ≥ l` (zero by default). The basis inverse is kept dense and
//! updated in product form, with periodic refactorization.

use super::{Residuals, SolveOutcome, SolveStatus, TOL_FEAS, TOL_GAP};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
    lower: Vec<f64>,
}

impl LinearProgram {
    /// `n` variables, zero objective, no rows, all lower bounds zero.
    pub fn new(n: usize) -> Self {
        LinearProgram { objective: vec![0.0; n], rows: Vec::new(), lower: vec![0.0; n] }
    }

    pub fn with_objective(mut self, c: Vec<f64>) -> Result<Self> {
        if c.len() != self.objective.len() {
            return Err(Error::SizeMismatch { expected: self.objective.len(), got: c.len() });
        }
        self.objective = c;
        Ok(self)
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Result<()> {
        let n = self.objective.len();
        if let Some(&(index, _)) = coeffs.iter().find(|c| c.0 >= n) {
            return Err(Error::BadIndex { index, len: n });
        }
        self.rows.push(Row { coeffs, sense, rhs });
        Ok(())
    }

    pub fn set_lower(&mut self, j: usize, l: f64) -> Result<()> {
        let n = self.objective.len();
        if j >= n {
            return Err(Error::BadIndex { index: j, len: n });
        }
        self.lower[j] = l;
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        if !self.objective.iter().copied().all(finite) || !self.lower.iter().copied().all(finite) {
            return Err(Error::InvalidInput("objective and lower bounds must be finite".into()));
        }
        for row in &self.rows {
            if !row.rhs.is_finite() || !row.coeffs.iter().all(|c| c.1.is_finite()) {
                return Err(Error::InvalidInput("constraint data must be finite".into()));
            }
        }
        Ok(())
    }

    /// Right-hand sides after shifting out the lower bounds, `b − A l`.
    pub fn shifted_rhs(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.rhs - r.coeffs.iter().map(|&(j, a)| a * self.lower[j]).sum::<f64>())
            .collect()
    }

    /// Row activities `A x`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.coeffs.iter().map(|&(j, a)| a * x[j]).sum()).collect()
    }

    /// Checks a Farkas certificate: sign-correct `y` with `Aᵀy ≤ 0` and
    /// `yᵀ(b − A l) > 0`. Returns the worst violation (≤ 0 means valid) scaled
    /// against `yᵀ(b − A l)`.
    pub fn farkas_violation(&self, y: &[f64]) -> f64 {
        let rhs = self.shifted_rhs();
        let by: f64 = rhs.iter().zip(y).map(|(b, y)| b * y).sum();
        if !(by > 0.0) {
            return f64::INFINITY;
        }
        let mut aty = vec![0.0; self.num_vars()];
        let mut worst: f64 = 0.0;
        for (row, &yi) in self.rows.iter().zip(y) {
            let sign_violation = match row.sense {
                Sense::Ge => -yi,
                Sense::Le => yi,
                Sense::Eq => 0.0,
            };
            worst = worst.max(sign_violation);
            for &(j, a) in &row.coeffs {
                aty[j] += a * yi;
            }
        }
        for v in aty {
            worst = worst.max(v);
        }
        worst / by
    }

    /// Checks an unbounded ray: `d ≥ 0`, `A d` respects the row senses and
    /// `cᵀd < 0`. Returns the worst violation relative to `|cᵀd|`.
    pub fn ray_violation(&self, d: &[f64]) -> f64 {
        let cd: f64 = self.objective.iter().zip(d).map(|(c, d)| c * d).sum();
        if !(cd < 0.0) {
            return f64::INFINITY;
        }
        let mut worst: f64 = d.iter().map(|v| -v).fold(0.0, f64::max);
        for (row, act) in self.rows.iter().zip(self.activities(d)) {
            let v = match row.sense {
                Sense::Ge => -act,
                Sense::Le => act,
                Sense::Eq => act.abs(),
            };
            worst = worst.max(v);
        }
        worst / cd.abs()
    }

    /// Primal/dual residuals and relative gap for a candidate pair.
    pub fn residuals(&self, x: &[f64], y: &[f64]) -> Residuals {
        let mut primal: f64 = 0.0;
        for (xj, lj) in x.iter().zip(&self.lower) {
            primal = primal.max(lj - xj);
        }
        for (row, act) in self.rows.iter().zip(self.activities(x)) {
            let v = match row.sense {
                Sense::Ge => row.rhs - act,
                Sense::Le => act - row.rhs,
                Sense::Eq => (act - row.rhs).abs(),
            };
            primal = primal.max(v);
        }
        let mut reduced = self.objective.clone();
        let mut dual: f64 = 0.0;
        for (row, &yi) in self.rows.iter().zip(y) {
            dual = dual.max(match row.sense {
                Sense::Ge => -yi,
                Sense::Le => yi,
                Sense::Eq => 0.0,
            });
            for &(j, a) in &row.coeffs {
                reduced[j] -= a * yi;
            }
        }
        for &d in &reduced {
            dual = dual.max(-d);
        }
        let pobj: f64 = self.objective.iter().zip(x).map(|(c, x)| c * x).sum();
        let dobj: f64 = self.rows.iter().zip(y).map(|(r, y)| r.rhs * y).sum::<f64>()
            + self.lower.iter().zip(&reduced).map(|(l, d)| l * d).sum::<f64>();
        Residuals { primal, dual, gap: (pobj - dobj).abs() / (1.0 + pobj.abs()) }
    }

    /// `1 + ‖b‖∞`, the scale of the primal feasibility tolerance.
    pub fn rhs_scale(&self) -> f64 {
        1.0 + self.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max)
    }
}

/// Solves `lp` to optimality or proves infeasibility / unboundedness.
///
/// Pivoting is Dantzig's rule with a two-pass ratio test; after
/// `2·(rows + cols)` consecutive degenerate pivots the solver switches to
/// Bland's rule until a nondegenerate pivot occurs. The run is deterministic.
pub fn solve_lp(lp: &LinearProgram) -> Result<SolveOutcome> {
    lp.validate()?;
    if lp.rows.is_empty() {
        return solve_unconstrained(lp);
    }
    let mut simplex = Simplex::new(lp);
    simplex.run()
}

fn solve_unconstrained(lp: &LinearProgram) -> Result<SolveOutcome> {
    let n = lp.num_vars();
    if let Some(j) = lp.objective.iter().position(|&c| c < 0.0) {
        let mut d = vec![0.0; n];
        d[j] = 1.0;
        return Ok(SolveOutcome::unbounded(n, 0, d));
    }
    let x = lp.lower.clone();
    let obj = lp.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
    Ok(SolveOutcome {
        status: SolveStatus::Optimal,
        primal: x,
        dual: Vec::new(),
        objective: Some(obj),
        residuals: Residuals::default(),
        certificate: None,
        iterations: 0,
    })
}

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    m: usize,
    n: usize,
    /// row sign flips making the shifted rhs nonnegative
    sigma: Vec<f64>,
    rhs: Vec<f64>,
    /// structural columns in CSC form, already sign-flipped
    col_ptr: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    /// slack column k sits on row slack_row[k] with coefficient slack_coef[k]
    slack_row: Vec<usize>,
    slack_coef: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    pivots_since_refactor: usize,
    iterations: usize,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.num_vars();
        let shifted = lp.shifted_rhs();
        let sigma: Vec<f64> = shifted.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
        let rhs: Vec<f64> = shifted.iter().zip(&sigma).map(|(b, s)| b * s).collect();

        let mut counts = vec![0usize; n + 1];
        for row in &lp.rows {
            for &(j, _) in &row.coeffs {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_ptr = counts.clone();
        let mut fill = counts;
        let nnz = col_ptr[n];
        let mut col_row = vec![0usize; nnz];
        let mut col_val = vec![0.0; nnz];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                let k = fill[j];
                col_row[k] = i;
                col_val[k] = a * sigma[i];
                fill[j] += 1;
            }
        }

        let mut slack_row = Vec::new();
        let mut slack_coef = Vec::new();
        for (i, row) in lp.rows.iter().enumerate() {
            let coef = match row.sense {
                Sense::Ge => -1.0,
                Sense::Le => 1.0,
                Sense::Eq => continue,
            };
            slack_row.push(i);
            slack_coef.push(coef * sigma[i]);
        }
        let ns = slack_row.len();
        let total = n + ns + m;

        // initial basis: a +1 slack where available, otherwise the artificial
        let mut basis: Vec<usize> = (0..m).map(|i| n + ns + i).collect();
        for (k, (&i, &c)) in slack_row.iter().zip(&slack_coef).enumerate() {
            if c > 0.0 {
                basis[i] = n + k;
            }
        }
        let mut in_basis = vec![false; total];
        for &j in &basis {
            in_basis[j] = true;
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let xb = rhs.clone();
        Simplex {
            lp,
            m,
            n,
            sigma,
            rhs,
            col_ptr,
            col_row,
            col_val,
            slack_row,
            slack_coef,
            basis,
            in_basis,
            binv,
            xb,
            pivots_since_refactor: 0,
            iterations: 0,
        }
    }

    fn ns(&self) -> usize {
        self.slack_row.len()
    }

    fn total_cols(&self) -> usize {
        self.n + self.ns() + self.m
    }

    fn kind(&self, j: usize) -> ColKind {
        if j < self.n {
            ColKind::Structural
        } else if j < self.n + self.ns() {
            ColKind::Slack
        } else {
            ColKind::Artificial
        }
    }

    fn for_each_entry(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        match self.kind(j) {
            ColKind::Structural => {
                for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                    f(self.col_row[k], self.col_val[k]);
                }
            }
            ColKind::Slack => {
                let k = j - self.n;
                f(self.slack_row[k], self.slack_coef[k]);
            }
            ColKind::Artificial => f(j - self.n - self.ns(), 1.0),
        }
    }

    fn cost(&self, j: usize, phase_one: bool) -> f64 {
        match (self.kind(j), phase_one) {
            (ColKind::Artificial, true) => 1.0,
            (ColKind::Structural, false) => self.lp.objective[j],
            _ => 0.0,
        }
    }

    fn duals(&self, phase_one: bool) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (k, &j) in self.basis.iter().enumerate() {
            let c = self.cost(j, phase_one);
            if c != 0.0 {
                let row = &self.binv[k * m..(k + 1) * m];
                for (yi, b) in y.iter_mut().zip(row) {
                    *yi += c * b;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64], phase_one: bool) -> f64 {
        let mut d = self.cost(j, phase_one);
        self.for_each_entry(j, |i, a| d -= y[i] * a);
        d
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut w = vec![0.0; m];
        self.for_each_entry(j, |i, a| {
            for (k, wk) in w.iter_mut().enumerate() {
                *wk += self.binv[k * m + i] * a;
            }
        });
        w
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut b = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            self.for_each_entry(j, |i, a| b[i * m + k] = a);
        }
        self.binv = invert(&mut b, m).ok_or_else(|| Error::NumericFailure("singular basis matrix".into()))?;
        let mut xb = vec![0.0; m];
        for (k, x) in xb.iter_mut().enumerate() {
            *x = self.binv[k * m..(k + 1) * m].iter().zip(&self.rhs).map(|(a, b)| a * b).sum();
        }
        self.xb = xb;
        self.pivots_since_refactor = 0;
        Ok(())
    }

    fn pivot(&mut self, r: usize, q: usize, w: &[f64]) {
        let m = self.m;
        let piv = w[r];
        let theta = self.xb[r] / piv;
        for k in 0..m {
            if k != r && w[k] != 0.0 {
                self.xb[k] -= theta * w[k];
                if self.xb[k] < 0.0 && self.xb[k] > -TOL_FEAS {
                    self.xb[k] = 0.0;
                }
            }
        }
        self.xb[r] = theta.max(0.0);
        let (head, rest) = self.binv.split_at_mut(r * m);
        let (prow, tail) = rest.split_at_mut(m);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        for (k, chunk) in head.chunks_mut(m).chain(tail.chunks_mut(m)).enumerate() {
            let wk = if k < r { w[k] } else { w[k + 1] };
            if wk != 0.0 {
                for (v, p) in chunk.iter_mut().zip(prow.iter()) {
                    *v -= wk * p;
                }
            }
        }
        let leaving = self.basis[r];
        self.in_basis[leaving] = false;
        self.in_basis[q] = true;
        self.basis[r] = q;
        self.pivots_since_refactor += 1;
        self.iterations += 1;
    }

    /// Runs simplex iterations for the given phase; returns the entering
    /// column of an unbounded ray, if one is found.
    fn iterate(&mut self, phase_one: bool) -> Result<Option<(usize, Vec<f64>)>> {
        let total = self.total_cols();
        let bland_after = 2 * (self.m + total);
        let max_iter = 50 * (self.m + total) + 10_000;
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations > max_iter {
                return Err(Error::NumericFailure("simplex iteration limit reached".into()));
            }
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let bland = degenerate_run > bland_after;
            let y = self.duals(phase_one);
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..total {
                if self.in_basis[j] || self.kind(j) == ColKind::Artificial {
                    continue;
                }
                let d = self.reduced_cost(j, &y, phase_one);
                if d < -OPT_TOL {
                    if bland {
                        entering = Some((j, d));
                        break;
                    }
                    if entering.is_none_or(|(_, best)| d < best) {
                        entering = Some((j, d));
                    }
                }
            }
            let Some((q, _)) = entering else {
                return Ok(None);
            };
            let w = self.ftran(q);
            let Some(r) = self.ratio_test(&w, bland, phase_one) else {
                return Ok(Some((q, w)));
            };
            let step = self.xb[r] / w[r];
            if step.abs() <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, q, &w);
        }
    }

    fn ratio_test(&self, w: &[f64], bland: bool, phase_one: bool) -> Option<usize> {
        let wmax = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let tol = PIVOT_TOL * wmax.max(1.0);
        // a basic artificial stuck at zero in phase two must never move
        let is_stuck = |k: usize| !phase_one && self.kind(self.basis[k]) == ColKind::Artificial;
        let mut forced: Option<usize> = None;
        for k in 0..self.m {
            if is_stuck(k) && w[k].abs() > tol && forced.is_none_or(|f| w[k].abs() > w[f].abs()) {
                forced = Some(k);
            }
        }
        if forced.is_some() {
            return forced;
        }
        if bland {
            let mut best: Option<(usize, f64)> = None;
            for k in 0..self.m {
                if w[k] > tol {
                    let ratio = self.xb[k].max(0.0) / w[k];
                    let better = match best {
                        None => true,
                        Some((b, br)) => ratio < br || (ratio == br && self.basis[k] < self.basis[b]),
                    };
                    if better {
                        best = Some((k, ratio));
                    }
                }
            }
            return best.map(|b| b.0);
        }
        // two-pass (Harris) ratio test
        let mut bound = f64::INFINITY;
        for k in 0..self.m {
            if w[k] > tol {
                bound = bound.min((self.xb[k].max(0.0) + TOL_FEAS) / w[k]);
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let mut best: Option<usize> = None;
        for k in 0..self.m {
            if w[k] > tol && self.xb[k].max(0.0) / w[k] <= bound && best.is_none_or(|b| w[k] > w[b]) {
                best = Some(k);
            }
        }
        best
    }

    /// Pivots basic artificials out where a structural or slack column can
    /// replace them. Rows where none can are redundant and keep their
    /// artificial at zero.
    fn drive_out_artificials(&mut self) -> Result<()> {
        let m = self.m;
        for r in 0..m {
            if self.kind(self.basis[r]) != ColKind::Artificial {
                continue;
            }
            let row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n + self.ns() {
                if self.in_basis[j] {
                    continue;
                }
                let mut alpha = 0.0;
                self.for_each_entry(j, |i, a| alpha += row[i] * a);
                if alpha.abs() > 1e-7 && best.is_none_or(|(_, b)| alpha.abs() > b.abs()) {
                    best = Some((j, alpha));
                }
            }
            if let Some((j, _)) = best {
                let w = self.ftran(j);
                self.xb[r] = 0.0;
                self.pivot(r, j, &w);
            }
        }
        self.refactor()
    }

    fn structural_primal(&self) -> Vec<f64> {
        let mut x = self.lp.lower.clone();
        for (k, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                x[j] += self.xb[k].max(0.0);
            }
        }
        x
    }

    fn original_duals(&self, y: &[f64]) -> Vec<f64> {
        y.iter().zip(&self.sigma).map(|(y, s)| y * s).collect()
    }

    fn run(&mut self) -> Result<SolveOutcome> {
        let scale = self.lp.rhs_scale();
        // phase one
        if self.iterate(true)?.is_some() {
            return Err(Error::NumericFailure("phase one reported an unbounded ray".into()));
        }
        self.refactor()?;
        let infeasibility: f64 = self
            .basis
            .iter()
            .zip(&self.xb)
            .filter(|(j, _)| self.kind(**j) == ColKind::Artificial)
            .map(|(_, x)| x.max(0.0))
            .sum();
        if infeasibility > TOL_FEAS * scale {
            let y = self.original_duals(&self.duals(true));
            let violation = self.lp.farkas_violation(&y);
            if violation > TOL_FEAS {
                return Err(Error::NumericFailure(format!(
                    "infeasibility certificate does not verify (violation {violation:e})"
                )));
            }
            return Ok(SolveOutcome::infeasible(self.lp.num_vars(), self.iterations, y));
        }
        self.drive_out_artificials()?;

        // phase two, with a few refactor-and-resume rounds if residuals drift
        for _round in 0..4 {
            if let Some((q, w)) = self.iterate(false)? {
                let mut dir = vec![0.0; self.n];
                if q < self.n {
                    dir[q] = 1.0;
                }
                for (k, &j) in self.basis.iter().enumerate() {
                    if j < self.n {
                        dir[j] -= w[k];
                    }
                }
                dir.iter_mut().for_each(|v| *v = v.max(0.0));
                let top = dir.iter().fold(0.0f64, |a, v| a.max(*v));
                if top > 0.0 {
                    dir.iter_mut().for_each(|v| *v /= top);
                }
                let violation = self.lp.ray_violation(&dir);
                if violation > TOL_FEAS {
                    return Err(Error::NumericFailure(format!(
                        "unbounded ray does not verify (violation {violation:e})"
                    )));
                }
                return Ok(SolveOutcome::unbounded(self.lp.num_vars(), self.iterations, dir));
            }
            self.refactor()?;
            let x = self.structural_primal();
            let y = self.original_duals(&self.duals(false));
            let residuals = self.lp.residuals(&x, &y);
            if residuals.primal <= TOL_FEAS * scale && residuals.dual <= TOL_FEAS && residuals.gap <= TOL_GAP {
                let obj = self.lp.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
                return Ok(SolveOutcome {
                    status: SolveStatus::Optimal,
                    primal: x,
                    dual: y,
                    objective: Some(obj),
                    residuals,
                    certificate: None,
                    iterations: self.iterations,
                });
            }
        }
        let x = self.structural_primal();
        let y = self.original_duals(&self.duals(false));
        let r = self.lp.residuals(&x, &y);
        Err(Error::NumericFailure(format!(
            "residuals above tolerance after refactorization: primal {:e}, dual {:e}, gap {:e}",
            r.primal, r.dual, r.gap
        )))
    }
}

/// Gauss–Jordan inverse with partial pivoting; `a` is destroyed.
fn invert(a: &mut [f64], m: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for col in 0..m {
        let (mut best, mut best_abs) = (col, a[col * m + col].abs());
        for r in col + 1..m {
            let v = a[r * m + col].abs();
            if v > best_abs {
                best = r;
                best_abs = v;
            }
        }
        if best_abs < 1e-14 {
            return None;
        }
        if best != col {
            for k in 0..m {
                a.swap(col * m + k, best * m + k);
                inv.swap(col * m + k, best * m + k);
            }
        }
        let piv = a[col * m + col];
        for k in 0..m {
            a[col * m + k] /= piv;
            inv[col * m + k] /= piv;
        }
        for r in 0..m {
            if r == col {
                continue;
            }
            let f = a[r * m + col];
            if f == 0.0 {
                continue;
            }
            for k in 0..m {
                a[r * m + k] -= f * a[col * m + k];
                inv[r * m + k] -= f * inv[col * m + k];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Certificate;

    #[test]
    fn single_bound() {
        let mut lp = LinearProgram::new(1).with_objective(vec![1.0]).unwrap();
        lp.add_row(vec![(0, 1.0)], Sense::Ge, 1.0).unwrap();
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.objective.unwrap() - 1.0).abs() < 1e-12);
        assert!((out.dual[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_with_certificate() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![(0, 1.0)], Sense::Ge, 1.0).unwrap();
        lp.add_row(vec![(0, 1.0)], Sense::Le, 0.0).unwrap();
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.status, SolveStatus::Infeasible);
        let Some(Certificate::Farkas { y }) = &out.certificate else { panic!("no certificate") };
        assert!(lp.farkas_violation(y) <= 1e-9);
        assert!(out.objective.is_none());
    }

    #[test]
    fn unbounded_with_ray() {
        let mut lp = LinearProgram::new(2).with_objective(vec![-1.0, 0.0]).unwrap();
        lp.add_row(vec![(0, 1.0), (1, -1.0)], Sense::Le, 1.0).unwrap();
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.status, SolveStatus::Unbounded);
        let Some(Certificate::Ray { direction }) = &out.certificate else { panic!("no ray") };
        assert!(lp.ray_violation(direction) <= 1e-9);
    }

    #[test]
    fn equality_and_lower_bounds() {
        // min x + 2y, x + y = 3, x ≥ 1, y ≥ 0.5  →  x = 2.5, y = 0.5
        let mut lp = LinearProgram::new(2).with_objective(vec![1.0, 2.0]).unwrap();
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 3.0).unwrap();
        lp.set_lower(0, 1.0).unwrap();
        lp.set_lower(1, 0.5).unwrap();
        let out = solve_lp(&lp).unwrap();
        assert!((out.objective.unwrap() - 3.5).abs() < 1e-12);
        assert!((out.primal[0] - 2.5).abs() < 1e-12);
        assert!(out.residuals.gap <= 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2).with_objective(vec![1.0, 1.0]).unwrap();
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 2.0).unwrap();
        lp.add_row(vec![(0, 2.0), (1, 2.0)], Sense::Eq, 4.0).unwrap();
        lp.add_row(vec![(0, 1.0)], Sense::Ge, 0.5).unwrap();
        let out = solve_lp(&lp).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.objective.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn no_rows() {
        let lp = LinearProgram::new(2).with_objective(vec![1.0, 0.0]).unwrap();
        assert_eq!(solve_lp(&lp).unwrap().objective, Some(0.0));
        let lp = LinearProgram::new(2).with_objective(vec![1.0, -1.0]).unwrap();
        assert_eq!(solve_lp(&lp).unwrap().status, SolveStatus::Unbounded);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under the textbook rule without
        // anti-cycling safeguards.
        let mut lp = LinearProgram::new(4).with_objective(vec![-0.75, 150.0, -0.02, 6.0]).unwrap();
        lp.add_row(vec![(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)], Sense::Le, 0.0).unwrap();
        lp.add_row(vec![(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)], Sense::Le, 0.0).unwrap();
        lp.add_row(vec![(2, 1.0)], Sense::Le, 1.0).unwrap();
        let out = solve_lp(&lp).unwrap();
        assert!((out.objective.unwrap() + 0.05).abs() < 1e-10);
    }

    #[test]
    fn rejects_non_finite() {
        let mut lp = LinearProgram::new(1);
        lp.add_row(vec![(0, f64::NAN)], Sense::Ge, 1.0).unwrap();
        assert!(matches!(solve_lp(&lp), Err(Error::InvalidInput(_))));
    }
}
