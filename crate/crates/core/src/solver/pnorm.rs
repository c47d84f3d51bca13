//! Minimization of `Σ m(x) ρ(x)^p` over `ρ ≥ 0` subject to linear rows
//! `gᵢ·ρ ≥ hᵢ`, for `p > 1`.
//!
//! The solver runs exact coordinate ascent on the concave dual
//!
//! ```text
//! D(η) = Σᵢ ηᵢ hᵢ − (1/q) Σₓ b(x)₊ ρ_η(x),   b = Σᵢ ηᵢ gᵢ,   ρ_η(x) = (b(x)₊ / (p m(x)))^{1/(p−1)}
//! ```
//!
//! with `η ≥ 0`. Each coordinate step solves the scalar equation
//! `gᵢ·ρ_η = hᵢ` (or clamps at zero). Iteration stops on a relative
//! primal/dual gap.

use super::{Certificate, Residuals, SolveOutcome, SolveStatus, TOL_FEAS, TOL_PNORM};
use crate::measures::Measure;
use crate::{Error, Result};

/// One constraint `Σ coeffs · ρ ≥ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct PnormRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PnormOptions {
    /// Relative gap at which iteration stops.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for PnormOptions {
    fn default() -> Self {
        PnormOptions { tol: 0.1 * TOL_PNORM, max_sweeps: 200_000 }
    }
}

/// `min Σ m ρ^p` subject to `⟨μⱼ, ρ⟩ ≥ 1` for every row measure.
pub fn solve_pnorm_min(weights: &[f64], rows: &[Measure], p: f64) -> Result<SolveOutcome> {
    let rows: Vec<PnormRow> = rows
        .iter()
        .map(|mu| {
            if mu.space_len() != weights.len() {
                return Err(Error::SpaceMismatch);
            }
            Ok(PnormRow { coeffs: mu.entries().to_vec(), rhs: 1.0 })
        })
        .collect::<Result<_>>()?;
    solve_pnorm_general(weights, &rows, p, &PnormOptions::default())
}

/// General form with arbitrary-sign rows. Rows with only nonnegative
/// coefficients that touch a zero-weight point are satisfied for free by
/// raising `ρ` there; rows with negative coefficients must avoid
/// zero-weight points.
pub fn solve_pnorm_general(
    weights: &[f64],
    rows: &[PnormRow],
    p: f64,
    opts: &PnormOptions,
) -> Result<SolveOutcome> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidInput(format!("p-norm solver needs p > 1, got {p}")));
    }
    let n = weights.len();
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
    }
    for row in rows {
        if !row.rhs.is_finite() {
            return Err(Error::InvalidInput("row right-hand side must be finite".into()));
        }
        for &(j, a) in &row.coeffs {
            if j >= n {
                return Err(Error::BadIndex { index: j, len: n });
            }
            if !a.is_finite() {
                return Err(Error::InvalidInput("row coefficients must be finite".into()));
            }
        }
    }

    // rows settled by a zero-weight point, and the values fixed there
    let mut free_fix = vec![0.0; n];
    let mut active = vec![true; rows.len()];
    for (i, row) in rows.iter().enumerate() {
        let nonneg = row.coeffs.iter().all(|c| c.1 >= 0.0);
        let mut best: Option<(usize, f64)> = None;
        for &(j, a) in &row.coeffs {
            if weights[j] == 0.0 && a != 0.0 {
                if !nonneg {
                    return Err(Error::InvalidInput(format!(
                        "row {i} has negative coefficients and touches zero-weight point {j}"
                    )));
                }
                if best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
        }
        if let Some((j, a)) = best {
            if row.rhs > 0.0 {
                free_fix[j] = f64::max(free_fix[j], row.rhs / a);
            }
            active[i] = false;
        } else if nonneg && row.rhs <= 0.0 {
            active[i] = false;
        }
    }

    for (i, row) in rows.iter().enumerate() {
        if active[i] && row.rhs > 0.0 && !row.coeffs.iter().any(|c| c.1 > 0.0) {
            let mut y = vec![0.0; rows.len()];
            y[i] = 1.0;
            return Ok(SolveOutcome {
                status: SolveStatus::Infeasible,
                primal: vec![0.0; n],
                dual: Vec::new(),
                objective: None,
                residuals: Residuals::default(),
                certificate: Some(Certificate::Farkas { y }),
                iterations: 0,
            });
        }
    }

    let membership = rows.iter().zip(&active).all(|(r, &a)| !a || r.coeffs.iter().all(|c| c.1 >= 0.0));
    let mut dual = DualState::new(weights, rows, &active, p);
    let h_scale = 1.0 + rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
    let active_rows = active.iter().filter(|a| **a).count();
    if p < IPM_BELOW_P && active_rows <= IPM_MAX_ROWS {
        if let Some((eta, rho)) = interior_point(weights, rows, &active, p) {
            dual.warm_start(eta);
            dual.candidate = Some(rho);
        }
    }

    let first = dual.check(membership);
    let mut done = first.rel_gap <= opts.tol && first.violation <= TOL_FEAS * h_scale;
    let mut last = first;
    let mut sweep = 0;
    while !done && sweep < opts.max_sweeps {
        for i in 0..rows.len() {
            if active[i] {
                dual.coordinate_step(i);
            }
        }
        sweep += 1;
        if sweep % 4 != 0 && sweep != opts.max_sweeps && sweep > 2 {
            continue;
        }
        last = dual.check(membership);
        done = last.rel_gap <= opts.tol && last.violation <= TOL_FEAS * h_scale;
    }
    let check = last;
    if !(check.rel_gap <= opts.tol && check.violation <= TOL_FEAS * h_scale) {
        return Err(Error::NumericFailure(format!(
            "p-norm dual ascent did not converge: relative gap {:e}, violation {:e}",
            check.rel_gap, check.violation
        )));
    }
    let mut rho = check.rho;
    for (r, f) in rho.iter_mut().zip(&free_fix) {
        if *f > 0.0 {
            *r = r.max(*f);
        }
    }
    let primal_violation = rows
        .iter()
        .map(|row| row.rhs - row.coeffs.iter().map(|&(j, a)| a * rho[j]).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(SolveOutcome {
        status: SolveStatus::Optimal,
        objective: Some(check.primal),
        primal: rho,
        dual: dual.eta.clone(),
        residuals: Residuals { primal: primal_violation.max(0.0), dual: 0.0, gap: check.rel_gap },
        certificate: None,
        iterations: dual.steps,
    })
}

/// Below this exponent the dual is close to a linear program and coordinate
/// ascent stalls; an interior-point solve provides the starting point.
const IPM_BELOW_P: f64 = 1.2;
/// Largest active row count for the dense interior-point normal equations.
const IPM_MAX_ROWS: usize = 600;

struct Check {
    rho: Vec<f64>,
    primal: f64,
    rel_gap: f64,
    violation: f64,
}

struct DualState<'a> {
    weights: &'a [f64],
    rows: &'a [PnormRow],
    active: &'a [bool],
    p: f64,
    q: f64,
    eta: Vec<f64>,
    b: Vec<f64>,
    steps: usize,
    /// Extra primal point offered to the feasibility repair.
    candidate: Option<Vec<f64>>,
}

impl<'a> DualState<'a> {
    fn new(weights: &'a [f64], rows: &'a [PnormRow], active: &'a [bool], p: f64) -> Self {
        DualState {
            weights,
            rows,
            active,
            p,
            q: p / (p - 1.0),
            eta: vec![0.0; rows.len()],
            b: vec![0.0; weights.len()],
            steps: 0,
            candidate: None,
        }
    }

    fn warm_start(&mut self, eta: Vec<f64>) {
        self.b.iter_mut().for_each(|b| *b = 0.0);
        for ((row, &e), &act) in self.rows.iter().zip(&eta).zip(self.active) {
            if act && e > 0.0 {
                for &(j, a) in &row.coeffs {
                    self.b[j] += e * a;
                }
            }
        }
        self.eta = eta;
    }

    /// `ρ` at a point with barycentric load `b` and weight `w > 0`.
    fn rho_of(&self, b: f64, w: f64) -> f64 {
        if b <= 0.0 || w <= 0.0 {
            0.0
        } else {
            (b / (self.p * w)).powf(1.0 / (self.p - 1.0))
        }
    }

    /// `hᵢ − gᵢ·ρ` when `ηᵢ` is moved to `tau`.
    fn slope(&self, i: usize, tau: f64) -> f64 {
        let row = &self.rows[i];
        let delta = tau - self.eta[i];
        let mut acc = row.rhs;
        for &(j, a) in &row.coeffs {
            acc -= a * self.rho_of(self.b[j] + delta * a, self.weights[j]);
        }
        acc
    }

    fn coordinate_step(&mut self, i: usize) {
        self.steps += 1;
        let f0 = self.slope(i, 0.0);
        let tau = if f0 <= 0.0 {
            0.0
        } else {
            let mut lo = 0.0;
            let mut flo = f0;
            let mut hi = if self.eta[i] > 0.0 { 2.0 * self.eta[i] } else { 1.0 };
            let mut fhi = self.slope(i, hi);
            let mut guard = 0;
            while fhi > 0.0 && guard < 2000 {
                lo = hi;
                flo = fhi;
                hi *= 2.0;
                fhi = self.slope(i, hi);
                guard += 1;
            }
            if fhi > 0.0 {
                // cannot happen for a row with a positive coefficient
                return;
            }
            // Illinois-modified regula falsi on a nonincreasing function
            let mut side = 0i8;
            let mut mid = hi;
            for _ in 0..200 {
                mid = if fhi.is_finite() && flo.is_finite() && flo > fhi {
                    lo + (hi - lo) * flo / (flo - fhi)
                } else {
                    0.5 * (lo + hi)
                };
                if !(mid > lo && mid < hi) {
                    mid = 0.5 * (lo + hi);
                }
                if hi - lo <= 1e-15 * hi {
                    break;
                }
                let fm = self.slope(i, mid);
                if fm == 0.0 {
                    break;
                }
                if fm > 0.0 {
                    lo = mid;
                    flo = fm;
                    if side == 1 {
                        fhi *= 0.5;
                    }
                    side = 1;
                } else {
                    hi = mid;
                    fhi = fm;
                    if side == -1 {
                        flo *= 0.5;
                    }
                    side = -1;
                }
            }
            mid
        };
        let delta = tau - self.eta[i];
        if delta != 0.0 {
            for &(j, a) in &self.rows[i].coeffs {
                self.b[j] += delta * a;
            }
            self.eta[i] = tau;
        }
    }

    /// Raises `ρ` row by row at the point with the largest `a/w` until every
    /// active membership row holds.
    fn repair(&self, mut rho: Vec<f64>) -> Vec<f64> {
        for (row, &act) in self.rows.iter().zip(self.active) {
            if !act {
                continue;
            }
            let g: f64 = row.coeffs.iter().map(|&(j, a)| a * rho[j]).sum();
            let deficit = row.rhs - g;
            if deficit > 0.0 {
                let best = row
                    .coeffs
                    .iter()
                    .filter(|c| c.1 > 0.0)
                    .max_by(|x, y| (x.1 / self.weights[x.0]).total_cmp(&(y.1 / self.weights[y.0])));
                if let Some(&(j, a)) = best {
                    rho[j] += deficit / a;
                }
            }
        }
        rho
    }

    fn check(&self, membership: bool) -> Check {
        let rho: Vec<f64> = self.b.iter().zip(self.weights).map(|(&b, &w)| self.rho_of(b, w)).collect();
        let conj: f64 = self.b.iter().zip(&rho).map(|(b, r)| if *b > 0.0 { b * r } else { 0.0 }).sum();
        let dual_value: f64 =
            self.eta.iter().zip(self.rows).map(|(e, r)| e * r.rhs).sum::<f64>() - conj / self.q;
        let mut worst_ratio = f64::INFINITY;
        let mut violation: f64 = 0.0;
        for (row, &act) in self.rows.iter().zip(self.active) {
            if !act {
                continue;
            }
            let g: f64 = row.coeffs.iter().map(|&(j, a)| a * rho[j]).sum();
            violation = violation.max(row.rhs - g);
            if row.rhs > 0.0 {
                worst_ratio = worst_ratio.min(g / row.rhs);
            }
        }
        let objective = |r: &[f64]| -> f64 {
            r.iter().zip(self.weights).map(|(r, w)| if *r > 0.0 { w * r.powf(self.p) } else { 0.0 }).sum()
        };
        if membership {
            // scaling up by the worst ratio restores exact feasibility when every row is touched
            let scaled = (worst_ratio > 0.0).then(|| {
                let factor = if worst_ratio < 1.0 { 1.0 / worst_ratio } else { 1.0 };
                rho.iter().map(|r| r * factor).collect::<Vec<f64>>()
            });
            let repaired = self.repair(rho);
            let extra = self.candidate.clone().map(|c| self.repair(c));
            let (best, upper) = [scaled, Some(repaired), extra]
                .into_iter()
                .flatten()
                .map(|r| {
                    let v = objective(&r);
                    (r, v)
                })
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("repaired candidate");
            let rel_gap = if upper > 0.0 { ((upper - dual_value) / upper).max(0.0) } else { 0.0 };
            Check { rho: best, primal: upper, rel_gap, violation: 0.0 }
        } else {
            let primal = objective(&rho);
            let rel_gap = if primal > 0.0 { (primal - dual_value).abs() / primal } else { 0.0 };
            Check { rho, primal, rel_gap, violation: violation.max(0.0) }
        }
    }
}

/// Primal-dual interior-point method for the active rows, with the normal
/// equations `A D Aᵀ + S/Y` solved densely. Returns row multipliers and the
/// primal point, or `None` when it does not converge.
fn interior_point(weights: &[f64], rows: &[PnormRow], active: &[bool], p: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let row_ids: Vec<usize> = (0..rows.len()).filter(|&i| active[i]).collect();
    let mut var_of = vec![usize::MAX; weights.len()];
    let mut vars: Vec<usize> = Vec::new();
    for &i in &row_ids {
        for &(j, _) in &rows[i].coeffs {
            if var_of[j] == usize::MAX {
                if weights[j] <= 0.0 {
                    return None;
                }
                var_of[j] = vars.len();
                vars.push(j);
            }
        }
    }
    let (m, n) = (row_ids.len(), vars.len());
    if m == 0 {
        return Some((vec![0.0; rows.len()], vec![0.0; weights.len()]));
    }
    let a: Vec<Vec<(usize, f64)>> =
        row_ids.iter().map(|&i| rows[i].coeffs.iter().map(|&(j, v)| (var_of[j], v)).collect()).collect();
    let h: Vec<f64> = row_ids.iter().map(|&i| rows[i].rhs).collect();
    let w: Vec<f64> = vars.iter().map(|&j| weights[j]).collect();
    let at_mul = |y: &[f64]| {
        let mut out = vec![0.0; n];
        for (row, &yi) in a.iter().zip(y) {
            for &(j, v) in row {
                out[j] += v * yi;
            }
        }
        out
    };
    let a_mul = |x: &[f64]| a.iter().map(|row| row.iter().map(|&(j, v)| v * x[j]).sum::<f64>()).collect::<Vec<f64>>();

    let mut rho = vec![1.0; n];
    let mut s: Vec<f64> = a_mul(&rho).iter().zip(&h).map(|(g, h)| (g - h).max(1.0)).collect();
    let mut y = vec![1.0; m];
    let mut z = vec![1.0; n];
    for _ in 0..300 {
        let grad: Vec<f64> = rho.iter().zip(&w).map(|(r, w)| p * w * r.powf(p - 1.0)).collect();
        let hess: Vec<f64> = rho.iter().zip(&w).map(|(r, w)| p * (p - 1.0) * w * r.powf(p - 2.0)).collect();
        let aty = at_mul(&y);
        let r_d: Vec<f64> = (0..n).map(|j| grad[j] - aty[j] - z[j]).collect();
        let ar = a_mul(&rho);
        let r_p: Vec<f64> = (0..m).map(|i| ar[i] - s[i] - h[i]).collect();
        let mu = (y.iter().zip(&s).map(|(a, b)| a * b).sum::<f64>() + z.iter().zip(&rho).map(|(a, b)| a * b).sum::<f64>())
            / (m + n) as f64;
        let scale = 1.0 + grad.iter().map(|g| g.abs()).fold(0.0, f64::max);
        let res = r_d.iter().chain(&r_p).map(|v| v.abs()).fold(0.0, f64::max);
        if mu <= 1e-14 * scale && res <= 1e-12 * scale {
            break;
        }
        let sigma = 0.1;
        let d: Vec<f64> = (0..n).map(|j| 1.0 / (hess[j] + z[j] / rho[j])).collect();
        // Δρ = D (AᵀΔy + g), g = −r_d − r_z/ρ with r_z = zρ − σμ
        let g: Vec<f64> = (0..n).map(|j| -r_d[j] - (z[j] * rho[j] - sigma * mu) / rho[j]).collect();
        let dg: Vec<f64> = (0..n).map(|j| d[j] * g[j]).collect();
        let adg = a_mul(&dg);
        let rhs: Vec<f64> = (0..m).map(|i| -r_p[i] - (y[i] * s[i] - sigma * mu) / y[i] - adg[i]).collect();
        let mut mat = vec![0.0; m * m];
        for (i1, row1) in a.iter().enumerate() {
            let mut dense = vec![0.0; n];
            for &(j, v) in row1 {
                dense[j] += v * d[j];
            }
            for (i2, row2) in a.iter().enumerate().skip(i1) {
                let v: f64 = row2.iter().map(|&(j, v)| v * dense[j]).sum();
                mat[i1 * m + i2] = v;
                mat[i2 * m + i1] = v;
            }
            mat[i1 * m + i1] += s[i1] / y[i1];
        }
        let dy = cholesky_solve(&mut mat, m, rhs)?;
        let atdy = at_mul(&dy);
        let drho: Vec<f64> = (0..n).map(|j| d[j] * (atdy[j] + g[j])).collect();
        let dz: Vec<f64> = (0..n).map(|j| (sigma * mu - z[j] * rho[j] - z[j] * drho[j]) / rho[j]).collect();
        let ds: Vec<f64> = (0..m).map(|i| (sigma * mu - y[i] * s[i] - s[i] * dy[i]) / y[i]).collect();
        let step = |x: &[f64], dx: &[f64]| {
            x.iter().zip(dx).filter(|(_, d)| **d < 0.0).map(|(x, d)| -x / d).fold(1.0f64, f64::min)
        };
        let alpha_p = (0.995 * step(&rho, &drho).min(step(&s, &ds))).min(1.0);
        let alpha_d = (0.995 * step(&z, &dz).min(step(&y, &dy))).min(1.0);
        rho.iter_mut().zip(&drho).for_each(|(x, d)| *x += alpha_p * d);
        s.iter_mut().zip(&ds).for_each(|(x, d)| *x += alpha_p * d);
        y.iter_mut().zip(&dy).for_each(|(x, d)| *x += alpha_d * d);
        z.iter_mut().zip(&dz).for_each(|(x, d)| *x += alpha_d * d);
        if rho.iter().chain(&y).any(|v| !v.is_finite()) {
            return None;
        }
    }
    let mut eta = vec![0.0; rows.len()];
    for (&i, &v) in row_ids.iter().zip(&y) {
        eta[i] = v.max(0.0);
    }
    let mut primal = vec![0.0; weights.len()];
    for (&j, &v) in vars.iter().zip(&rho) {
        primal[j] = v.max(0.0);
    }
    Some((eta, primal))
}

/// Solves `M x = b` for symmetric positive definite `M` (row-major, `m × m`).
fn cholesky_solve(mat: &mut [f64], m: usize, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let max_diag = (0..m).map(|i| mat[i * m + i]).fold(0.0, f64::max);
    for k in 0..m {
        let mut d = mat[k * m + k] - (0..k).map(|j| mat[k * m + j] * mat[k * m + j]).sum::<f64>();
        if !(d > 1e-300) {
            d = 1e-14 * max_diag.max(1e-300);
        }
        let d = d.sqrt();
        mat[k * m + k] = d;
        for i in k + 1..m {
            let v = mat[i * m + k] - (0..k).map(|j| mat[i * m + j] * mat[k * m + j]).sum::<f64>();
            mat[i * m + k] = v / d;
        }
    }
    for i in 0..m {
        b[i] = (b[i] - (0..i).map(|j| mat[i * m + j] * b[j]).sum::<f64>()) / mat[i * m + i];
    }
    for i in (0..m).rev() {
        b[i] = (b[i] - (i + 1..m).map(|j| mat[j * m + i] * b[j]).sum::<f64>()) / mat[i * m + i];
    }
    b.iter().all(|v| v.is_finite()).then_some(b)
}
