//! Plan content `Ct_p` of finite families, computed over atomic plans.
//!
//! A plan puts a weight `ηⱼ ≥ 0` on each member; its barycenter is
//! `η^# = Σⱼ ηⱼ μⱼ`. The content is the largest total weight `Σⱼ ηⱼ` whose
//! barycenter is absolutely continuous with respect to the reference mass and
//! has density of `L^q(m)` norm at most one, `q` the dual exponent of `p`.

use std::collections::HashMap;

use crate::measures::{FamilySequence, Measure, MeasureFamily};
use crate::modulus::{check_nondecreasing, is_admissible, m_p, DensityFunction, FunctionClass, ModulusResult};
use crate::solver::{solve_lp, Certificate, LinearProgram, Residuals, Sense, SolveStatus, TOL_PNORM};
use crate::space::ExtendedValue;
use crate::{Error, Result};

/// Nonnegative weights, one per family member.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan(Vec<f64>);

impl Plan {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidInput(format!("plan weight {w} is not finite and nonnegative")));
        }
        Ok(Plan(weights))
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `Σⱼ ηⱼ μⱼ`.
pub fn barycenter(plan: &Plan, family: &MeasureFamily) -> Result<Measure> {
    if plan.len() != family.len() {
        return Err(Error::SizeMismatch { expected: family.len(), got: plan.len() });
    }
    let entries = plan
        .weights()
        .iter()
        .zip(family.members())
        .filter(|(w, _)| **w > 0.0)
        .flat_map(|(&w, mu)| mu.entries().iter().map(move |&(i, m)| (i, w * m)));
    Measure::from_entries(family.space().len(), entries)
}

/// `‖dη^#/dm‖_q` and the mass `η^#` puts on null points.
pub fn barycenter_norm(plan: &Plan, family: &MeasureFamily, q: f64) -> Result<(f64, f64)> {
    let bary = barycenter(plan, family)?;
    let mass = family.space().mass();
    let mut acc: f64 = 0.0;
    let mut on_null = 0.0;
    for &(i, b) in bary.entries() {
        if mass[i] == 0.0 {
            on_null += b;
        } else if q.is_infinite() {
            acc = acc.max(b / mass[i]);
        } else {
            acc += mass[i] * (b / mass[i]).powf(q);
        }
    }
    let norm = if q.is_infinite() { acc } else { acc.powf(1.0 / q) };
    Ok((norm, on_null))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContentResult {
    pub value: ExtendedValue,
    pub plan: Option<Plan>,
    /// An admissible density certifying the value from above.
    pub dual_density: Option<DensityFunction>,
    pub p: f64,
    /// Unboundedness ray (a zero member) when the value is infinite.
    pub certificate: Option<Certificate>,
    pub residuals: Residuals,
    /// Violation of the barycenter norm constraint by the returned plan.
    pub constraint_residual: f64,
}

/// `Ct_p` of a finite family.
///
/// `p = 1` is a linear program (duplicate point constraints merged). `p = 2`
/// searches the multiplier of the norm constraint by bisection; other `p > 1`
/// normalize the solution of the penalized problem. Both `p > 1` routes use
/// projected gradient ascent and stop on the Hölder gap between the plan and
/// an admissible density.
pub fn ct_p(family: &MeasureFamily, p: f64) -> Result<ContentResult> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidInput(format!("p must be at least 1, got {p}")));
    }
    if family.is_empty() {
        return Ok(ContentResult {
            value: ExtendedValue::Finite(0.0),
            plan: Some(Plan::new(Vec::new())?),
            dual_density: Some(DensityFunction::constant(family.space().len(), 0.0)?),
            p,
            certificate: None,
            residuals: Residuals::default(),
            constraint_residual: 0.0,
        });
    }
    if let Some(j) = family.members().iter().position(Measure::is_zero) {
        let mut direction = vec![0.0; family.len()];
        direction[j] = 1.0;
        return Ok(ContentResult {
            value: ExtendedValue::Infinity,
            plan: None,
            dual_density: None,
            p,
            certificate: Some(Certificate::Ray { direction }),
            residuals: Residuals::default(),
            constraint_residual: 0.0,
        });
    }
    if p == 1.0 {
        ct_one(family)
    } else {
        ct_smooth(family, p)
    }
}

fn ct_one(family: &MeasureFamily) -> Result<ContentResult> {
    let space = family.space();
    let mass = space.mass();
    let n = space.len();
    let members = family.len();

    // row of point x: (j, μⱼ(x)); normalized by m(x), or by its largest entry on null points
    let mut point_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (j, mu) in family.members().iter().enumerate() {
        for &(i, a) in mu.entries() {
            point_rows[i].push((j, a));
        }
    }
    let mut groups: Vec<(usize, Vec<(usize, f64)>, f64, f64)> = Vec::new();
    let mut seen: HashMap<Vec<(usize, u64)>, usize> = HashMap::new();
    for (i, row) in point_rows.into_iter().enumerate() {
        if row.is_empty() {
            continue;
        }
        let (norm, rhs): (f64, f64) = if mass[i] > 0.0 {
            (mass[i], 1.0)
        } else {
            (row.iter().map(|e| e.1).fold(0.0, f64::max), 0.0)
        };
        let scaled: Vec<(usize, f64)> = row.iter().map(|&(j, a)| (j, a / norm)).collect();
        let key: Vec<(usize, u64)> = scaled.iter().map(|&(j, a)| (j, a.to_bits())).chain([(usize::MAX, rhs.to_bits())]).collect();
        if seen.contains_key(&key) {
            continue;
        }
        seen.insert(key, groups.len());
        groups.push((i, scaled, rhs, norm));
    }

    let mut lp = LinearProgram::new(members).with_objective(vec![-1.0; members])?;
    for (_, row, rhs, _) in &groups {
        lp.add_row(row.clone(), Sense::Le, *rhs)?;
    }
    let out = solve_lp(&lp)?;
    match out.status {
        SolveStatus::Optimal => {
            let plan = Plan::new(out.primal.iter().map(|v| v.max(0.0)).collect())?;
            let mut rho = vec![0.0; n];
            for ((i, _, _, norm), y) in groups.iter().zip(&out.dual) {
                rho[*i] = (-y).max(0.0) / norm;
            }
            let (sup, on_null) = barycenter_norm(&plan, family, f64::INFINITY)?;
            Ok(ContentResult {
                value: ExtendedValue::finite((-out.objective.unwrap_or(0.0)).max(0.0))?,
                plan: Some(plan),
                dual_density: Some(DensityFunction::new(rho)?),
                p: 1.0,
                certificate: None,
                residuals: out.residuals,
                constraint_residual: (sup - 1.0).max(0.0).max(on_null),
            })
        }
        SolveStatus::Unbounded => Ok(ContentResult {
            value: ExtendedValue::Infinity,
            plan: None,
            dual_density: None,
            p: 1.0,
            certificate: out.certificate,
            residuals: Residuals::default(),
            constraint_residual: 0.0,
        }),
        SolveStatus::Infeasible => Err(Error::NumericFailure("content LP reported infeasible".into())),
    }
}

/// Data for the `p > 1` content problem over the members allowed positive
/// weight (those not charging null points).
struct SmoothProblem<'a> {
    family: &'a MeasureFamily,
    mass: &'a [f64],
    /// positions of the members that may carry weight
    vars: Vec<usize>,
    q: f64,
    p: f64,
}

struct Bounds {
    lower: f64,
    upper: f64,
    rho: Vec<f64>,
}

impl SmoothProblem<'_> {
    fn load(&self, theta: &[f64]) -> Vec<f64> {
        let mut b = vec![0.0; self.mass.len()];
        for (&t, &j) in theta.iter().zip(&self.vars) {
            if t > 0.0 {
                for &(i, a) in self.family.members()[j].entries() {
                    b[i] += t * a;
                }
            }
        }
        b
    }

    /// `‖b/m‖_q^q`.
    fn norm_q_pow(&self, b: &[f64]) -> f64 {
        b.iter().zip(self.mass).map(|(b, m)| if *b > 0.0 && *m > 0.0 { m * (b / m).powf(self.q) } else { 0.0 }).sum()
    }

    /// Value and gradient of `Σθ − λ‖b/m‖_q^q`.
    fn value_grad(&self, theta: &[f64], lambda: f64) -> (f64, Vec<f64>) {
        let b = self.load(theta);
        let dens: Vec<f64> = b
            .iter()
            .zip(self.mass)
            .map(|(b, m)| if *b > 0.0 && *m > 0.0 { (b / m).powf(self.q - 1.0) } else { 0.0 })
            .collect();
        let grad = self
            .vars
            .iter()
            .map(|&j| {
                let s: f64 = self.family.members()[j].entries().iter().map(|&(i, a)| a * dens[i]).sum();
                1.0 - lambda * self.q * s
            })
            .collect();
        (theta.iter().sum::<f64>() - lambda * self.norm_q_pow(&b), grad)
    }

    /// Lower bound from the normalized plan, upper bound from an admissible
    /// density `∝ (b/m)^{q−1}` (Hölder).
    fn bounds(&self, theta: &[f64]) -> Bounds {
        let b = self.load(theta);
        let norm = self.norm_q_pow(&b).powf(1.0 / self.q);
        let total: f64 = theta.iter().sum();
        let lower = if norm > 0.0 { total / norm } else { 0.0 };
        let mut rho: Vec<f64> = b
            .iter()
            .zip(self.mass)
            .map(|(b, m)| if *b > 0.0 && *m > 0.0 { (b / m).powf(self.q - 1.0) } else { 0.0 })
            .collect();
        let mut worst = f64::INFINITY;
        for &j in &self.vars {
            let g: f64 = self.family.members()[j].pair(&rho).unwrap_or(0.0);
            worst = worst.min(g);
        }
        if !(worst > 0.0 && worst.is_finite()) {
            return Bounds { lower, upper: f64::INFINITY, rho };
        }
        rho.iter_mut().for_each(|r| *r /= worst);
        let upper = rho
            .iter()
            .zip(self.mass)
            .map(|(r, m)| m * r.powf(self.p))
            .sum::<f64>()
            .powf(1.0 / self.p);
        Bounds { lower, upper, rho }
    }

    fn rel_gap(bounds: &Bounds) -> f64 {
        if bounds.upper.is_finite() && bounds.upper > 0.0 {
            ((bounds.upper - bounds.lower) / bounds.upper).max(0.0)
        } else {
            f64::INFINITY
        }
    }

    /// Largest violation of the optimality conditions of the penalized
    /// problem: `g = 0` where `θ > 0`, `g ≤ 0` where `θ = 0`.
    fn stationarity(&self, theta: &[f64], lambda: f64) -> f64 {
        let (_, grad) = self.value_grad(theta, lambda);
        let floor = 1e-12 * theta.iter().cloned().fold(0.0, f64::max);
        theta
            .iter()
            .zip(&grad)
            .map(|(t, g)| if *t > floor { g.abs() } else { g.max(0.0) })
            .fold(0.0, f64::max)
    }

    /// Accelerated projected gradient ascent on `Σθ − λ‖b/m‖_q^q`, `θ ≥ 0`,
    /// with backtracking and adaptive restart.
    fn maximize(&self, start: Vec<f64>, lambda: f64, tol: f64, max_iter: usize) -> Vec<f64> {
        let mut x = start;
        let mut y = x.clone();
        let mut t = 1.0f64;
        let mut step = 1.0f64;
        let (mut fx, _) = self.value_grad(&x, lambda);
        for it in 0..max_iter {
            if it % 25 == 0 && Self::rel_gap(&self.bounds(&x)) <= tol && self.stationarity(&x, lambda) <= tol {
                break;
            }
            let (fy, gy) = self.value_grad(&y, lambda);
            let mut next;
            loop {
                next = y.iter().zip(&gy).map(|(v, g)| (v + step * g).max(0.0)).collect::<Vec<f64>>();
                let (fn_, _) = self.value_grad(&next, lambda);
                let diff: Vec<f64> = next.iter().zip(&y).map(|(a, b)| a - b).collect();
                let lin: f64 = gy.iter().zip(&diff).map(|(g, d)| g * d).sum();
                let sq: f64 = diff.iter().map(|d| d * d).sum();
                if fn_ >= fy + lin - sq / (2.0 * step) - 1e-15 * fy.abs() || step < 1e-300 {
                    break;
                }
                step *= 0.5;
            }
            let (fnext, _) = self.value_grad(&next, lambda);
            if fnext < fx {
                // restart momentum
                t = 1.0;
                y = x.clone();
                step *= 1.5;
                continue;
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            y = next.iter().zip(&x).map(|(n, o)| n + (t - 1.0) / t_next * (n - o)).collect();
            y.iter_mut().for_each(|v| *v = v.max(0.0));
            x = next;
            fx = fnext;
            t = t_next;
            step *= 1.1;
        }
        x
    }
}

fn ct_smooth(family: &MeasureFamily, p: f64) -> Result<ContentResult> {
    let space = family.space();
    let mass = space.mass();
    let vars: Vec<usize> = (0..family.len())
        .filter(|&j| family.members()[j].entries().iter().all(|&(i, _)| mass[i] > 0.0))
        .collect();
    let q = p / (p - 1.0);
    let problem = SmoothProblem { family, mass, vars, q, p };
    if problem.vars.is_empty() {
        // every member charges a null point: only the zero plan is allowed
        return Ok(ContentResult {
            value: ExtendedValue::Finite(0.0),
            plan: Some(Plan::new(vec![0.0; family.len()])?),
            dual_density: None,
            p,
            certificate: None,
            residuals: Residuals::default(),
            constraint_residual: 0.0,
        });
    }
    let tol = 0.1 * TOL_PNORM;
    let max_iter = 400_000;
    let start = vec![1.0 / problem.vars.len() as f64; problem.vars.len()];

    let (theta, kkt) = if p == 2.0 {
        // bisection on the multiplier λ of ‖b/m‖_2 ≤ 1
        let mut theta = problem.maximize(start, 1.0, tol, max_iter);
        let mut lambda = 1.0;
        let norm_at = |th: &[f64]| problem.norm_q_pow(&problem.load(th)).sqrt();
        let (mut lo, mut hi) = (1e-12f64, 1e12f64);
        for _ in 0..200 {
            if hi / lo - 1.0 <= 1e-13 {
                break;
            }
            let mid = (lo * hi).sqrt();
            let warm: Vec<f64> = theta.iter().map(|t| t * lambda / mid).collect();
            theta = problem.maximize(warm, mid, tol, max_iter);
            lambda = mid;
            if norm_at(&theta) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let norm = norm_at(&theta);
        let theta: Vec<f64> = theta.iter().map(|t| t / norm).collect();
        // stationarity of Σθ − λ(‖b/m‖² − 1) at the normalized plan
        let kkt = problem.stationarity(&theta, lambda * norm);
        (theta, Some(kkt))
    } else {
        (problem.maximize(start, 1.0 / q, tol, max_iter), None)
    };

    let bounds = problem.bounds(&theta);
    let gap = SmoothProblem::rel_gap(&bounds);
    if !(gap <= TOL_PNORM) {
        return Err(Error::NumericFailure(format!("content ascent stopped at relative gap {gap:e}")));
    }
    if let Some(k) = kkt {
        if !(k <= 1e-3) {
            return Err(Error::NumericFailure(format!("content KKT residual {k:e}")));
        }
    }
    let norm = problem.norm_q_pow(&problem.load(&theta)).powf(1.0 / q);
    let mut weights = vec![0.0; family.len()];
    for (&t, &j) in theta.iter().zip(&problem.vars) {
        weights[j] = if norm > 0.0 { t / norm } else { 0.0 };
    }
    let plan = Plan::new(weights)?;
    let (plan_norm, on_null) = barycenter_norm(&plan, family, q)?;
    Ok(ContentResult {
        value: ExtendedValue::finite(bounds.lower)?,
        plan: Some(plan),
        dual_density: Some(DensityFunction::new(bounds.rho)?),
        p,
        certificate: None,
        residuals: Residuals { primal: kkt.unwrap_or(0.0), dual: 0.0, gap },
        constraint_residual: (plan_norm - 1.0).abs().max(on_null),
    })
}

/// Difference between the two sides of a duality identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gap {
    Finite(f64),
    /// Both sides infinite.
    MatchedInfinite,
    /// Exactly one side infinite.
    Mismatched,
}

impl Gap {
    pub fn value(&self) -> f64 {
        match *self {
            Gap::Finite(g) => g,
            Gap::MatchedInfinite => 0.0,
            Gap::Mismatched => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    pub p: f64,
    pub modulus: ModulusResult,
    pub content: ContentResult,
    /// `M_p^{1/p}`.
    pub modulus_root: ExtendedValue,
    /// `|M_1 − Ct_1|` for `p = 1`, `|M_p^{1/p} − Ct_p| / max(1, M_p^{1/p})` for `p > 1`.
    pub gap: Gap,
    /// Worst disagreement between the two certificate pairs: the modulus dual
    /// plan must be feasible for the content problem with the same value, and
    /// the content dual density must be admissible with the same value.
    pub cross_check: f64,
}

/// Solves both sides of `Ct_p = M_p^{1/p}` independently and compares them.
pub fn duality_gap(family: &MeasureFamily, p: f64) -> Result<DualityReport> {
    let modulus = m_p(family, p, FunctionClass::All)?;
    let content = ct_p(family, p)?;
    let modulus_root = match modulus.value {
        ExtendedValue::Finite(v) => ExtendedValue::Finite(v.powf(1.0 / p)),
        ExtendedValue::Infinity => ExtendedValue::Infinity,
    };
    let gap = match (modulus_root, content.value) {
        (ExtendedValue::Infinity, ExtendedValue::Infinity) => Gap::MatchedInfinite,
        (ExtendedValue::Finite(m), ExtendedValue::Finite(c)) => {
            if p == 1.0 {
                Gap::Finite((m - c).abs())
            } else {
                Gap::Finite((m - c).abs() / m.max(1.0))
            }
        }
        _ => Gap::Mismatched,
    };
    let mut cross_check: f64 = 0.0;
    if let (Some(plan), Some(rho), ExtendedValue::Finite(m), ExtendedValue::Finite(c)) =
        (&modulus.dual_plan, &content.dual_density, modulus.value, content.value)
    {
        if p == 1.0 {
            let (sup, on_null) = barycenter_norm(plan, family, f64::INFINITY)?;
            let scale = m.max(1.0);
            cross_check = cross_check.max((sup - 1.0).max(0.0)).max(on_null);
            cross_check = cross_check.max((plan.total() - c).abs() / scale);
            let adm = is_admissible(rho, family, 0.0)?;
            cross_check = cross_check.max((-adm.min_margin()).max(0.0));
            let energy = rho.p_energy(family.space(), 1.0)?;
            cross_check = cross_check.max((energy - m).abs() / scale);
        } else {
            let adm = is_admissible(rho, family, 0.0)?;
            cross_check = cross_check.max((-adm.min_margin()).max(0.0));
        }
    }
    Ok(DualityReport { p, modulus, content, modulus_root, gap, cross_check })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContentLimitReport {
    /// `Ct_p(E_k)` for `k = 1..=K`.
    pub values: Vec<ExtendedValue>,
    /// `Ct_p` of the union of the materialized families.
    pub union_value: ExtendedValue,
    /// `|Ct_p(E_K) − Ct_p(union)|`, zero when both are infinite.
    pub difference: f64,
}

/// `Ct_p(E_k)` along a verified increasing sequence, compared with the
/// content of the union up to `K`.
pub fn ct_increasing_limit(seq: &FamilySequence, horizon: usize, p: f64) -> Result<ContentLimitReport> {
    let horizon = horizon.clamp(1, seq.horizon());
    seq.verify_monotone(horizon)?;
    let values =
        (1..=horizon).map(|k| seq.family(k).and_then(|f| ct_p(f, p)).map(|r| r.value)).collect::<Result<Vec<_>>>()?;
    check_nondecreasing(&values, "Ct_p(E_k)")?;
    let union_value = ct_p(&seq.union_up_to(horizon)?, p)?.value;
    let last = *values.last().expect("horizon >= 1");
    let difference = match (last, union_value) {
        (ExtendedValue::Infinity, ExtendedValue::Infinity) => 0.0,
        (a, b) => (a.to_f64() - b.to_f64()).abs(),
    };
    Ok(ContentLimitReport { values, union_value, difference })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::dirac;
    use crate::space::{grid_1d, MeasureSpace};
    use std::sync::Arc;

    fn family(space: &Arc<MeasureSpace>, members: Vec<Measure>) -> MeasureFamily {
        MeasureFamily::from_members(space.clone(), members.into_iter().enumerate().map(|(i, m)| (format!("m{i}"), m)))
            .unwrap()
    }

    #[test]
    fn barycenter_basics() {
        let s = Arc::new(grid_1d(0.0, 1.0, 3).unwrap());
        let f = family(&s, vec![dirac(&s, 0).unwrap(), Measure::from_dense(&[0.0, 1.0, 2.0]).unwrap()]);
        let one = barycenter(&Plan::new(vec![0.0, 1.0]).unwrap(), &f).unwrap();
        assert_eq!(one, f.members()[1]);
        assert!(barycenter(&Plan::new(vec![0.0, 0.0]).unwrap(), &f).unwrap().is_zero());
        let a = Plan::new(vec![0.3, 0.7]).unwrap();
        let b = Plan::new(vec![1.1, 0.2]).unwrap();
        let sum = Plan::new(vec![1.4, 0.9]).unwrap();
        let lhs = barycenter(&sum, &f).unwrap();
        let rhs = barycenter(&a, &f).unwrap().add(&barycenter(&b, &f).unwrap()).unwrap();
        assert!(lhs.approx_eq(&rhs, 1e-15));
        assert!(matches!(barycenter(&Plan::new(vec![1.0]).unwrap(), &f), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn single_member_content() {
        let s = Arc::new(grid_1d(0.0, 1.0, 5).unwrap());
        let g = [0.5, 2.0, 3.0, 1.0, 0.0];
        let mu = Measure::from_dense(&g.iter().map(|g| g * 0.2).collect::<Vec<_>>()).unwrap();
        let f = family(&s, vec![mu]);
        let c = ct_p(&f, 1.0).unwrap();
        assert!((c.value.as_finite().unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let m = m_p(&f, 1.0, FunctionClass::All).unwrap();
        assert!((c.value.as_finite().unwrap() - m.value.as_finite().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn special_families() {
        let s = Arc::new(grid_1d(0.0, 1.0, 4).unwrap());
        assert_eq!(ct_p(&MeasureFamily::new(s.clone()), 1.0).unwrap().value, ExtendedValue::Finite(0.0));
        let f = family(&s, vec![dirac(&s, 1).unwrap(), Measure::zero(4)]);
        for p in [1.0, 2.0] {
            let c = ct_p(&f, p).unwrap();
            assert!(c.value.is_infinite());
            assert!(matches!(c.certificate, Some(Certificate::Ray { .. })));
            let d = duality_gap(&f, p).unwrap();
            assert_eq!(d.gap, Gap::MatchedInfinite);
        }
    }

    #[test]
    fn null_points_force_zero_weight() {
        let s = Arc::new(MeasureSpace::new(vec![1.0, 0.0, 2.0]).unwrap());
        let f = family(&s, vec![Measure::from_dense(&[0.0, 1.0, 1.0]).unwrap(), dirac(&s, 0).unwrap()]);
        let c = ct_p(&f, 1.0).unwrap();
        assert_eq!(c.plan.as_ref().unwrap().weights()[0], 0.0);
        assert!((c.value.as_finite().unwrap() - 1.0).abs() < 1e-12);
        let m = m_p(&f, 1.0, FunctionClass::All).unwrap();
        assert!((m.value.as_finite().unwrap() - 1.0).abs() < 1e-12);
        let c2 = ct_p(&f, 2.0).unwrap();
        let m2 = m_p(&f, 2.0, FunctionClass::All).unwrap();
        assert!((c2.value.as_finite().unwrap() - m2.value.as_finite().unwrap().sqrt()).abs() < 1e-5);
    }

    #[test]
    fn p_two_single_restriction() {
        // μ = m on A: Ct_2 = m(A)^{-1/2}
        let s = Arc::new(grid_1d(0.0, 1.0, 8).unwrap());
        let mu = crate::measures::restriction(&s, [1, 2, 5]).unwrap();
        let c = ct_p(&family(&s, vec![mu]), 2.0).unwrap();
        assert!((c.value.as_finite().unwrap() - (8.0f64 / 3.0).sqrt()).abs() < 1e-6);
        assert!(c.constraint_residual < 1e-8);
    }

    #[test]
    fn p_three_matches_modulus_root() {
        let s = Arc::new(grid_1d(0.0, 1.0, 6).unwrap());
        let f = family(
            &s,
            vec![
                Measure::from_dense(&[0.2, 0.1, 0.0, 0.0, 0.3, 0.0]).unwrap(),
                Measure::from_dense(&[0.0, 0.4, 0.4, 0.1, 0.0, 0.0]).unwrap(),
                Measure::from_dense(&[0.0, 0.0, 0.0, 0.2, 0.2, 0.5]).unwrap(),
            ],
        );
        let d = duality_gap(&f, 3.0).unwrap();
        assert!(d.gap.value() < 1e-5, "{:?}", d.gap);
    }
}
