//! `M_p` moduli of finite families, admissibility checks and `AM` estimates.

use std::fmt;

use crate::content::{ct_p, Plan};
use crate::measures::{FamilySequence, Measure, MeasureFamily};
use crate::solver::{
    solve_lp, solve_pnorm_general, Certificate, LinearProgram, PnormOptions, PnormRow, Residuals, Sense,
    SolveStatus,
};
use crate::space::{ExtendedValue, MeasureSpace};
use crate::{Error, Result};

/// Tolerance used when comparing successive values of a monotone sweep.
pub const MONOTONE_TOL: f64 = 1e-8;

/// A nonnegative function on the points of a space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityFunction(Vec<f64>);

impl DensityFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidInput(format!("density value {v} is not finite and nonnegative")));
        }
        Ok(DensityFunction(values))
    }

    pub fn constant(len: usize, c: f64) -> Result<Self> {
        DensityFunction::new(vec![c; len])
    }

    /// Samples `f` at the coordinates of every point.
    pub fn from_fn(space: &MeasureSpace, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..space.len())
            .map(|i| space.coord(i).map(&f).ok_or(Error::NoCoords))
            .collect::<Result<Vec<_>>>()?;
        DensityFunction::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sup(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    /// `Σ m(x) ρ(x)^p`.
    pub fn p_energy(&self, space: &MeasureSpace, p: f64) -> Result<f64> {
        if space.len() != self.len() {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.0.iter().zip(space.mass()).map(|(r, m)| if *r > 0.0 { m * r.powf(p) } else { 0.0 }).sum())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        DensityFunction::new(self.0.iter().map(|v| v * c).collect())
    }
}

/// Restriction on the admissible densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionClass {
    /// Every nonnegative function.
    All,
    /// `|ρ(x) − ρ(y)| ≤ L·d(x, y)` on neighboring points.
    Lipschitz(f64),
    /// `ρ = 0` on boundary-flagged points.
    BoundaryVanishing,
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionClass::All => write!(f, "all"),
            FunctionClass::Lipschitz(l) => write!(f, "lip:{l}"),
            FunctionClass::BoundaryVanishing => write!(f, "bv"),
        }
    }
}

impl FunctionClass {
    fn check(&self, space: &MeasureSpace) -> Result<()> {
        match *self {
            FunctionClass::All => Ok(()),
            FunctionClass::Lipschitz(l) => {
                if !(l.is_finite() && l > 0.0) {
                    return Err(Error::InvalidInput(format!("Lipschitz constant must be positive, got {l}")));
                }
                if !space.has_coords() {
                    return Err(Error::NoCoords);
                }
                Ok(())
            }
            FunctionClass::BoundaryVanishing => {
                if !space.has_boundary() {
                    return Err(Error::NoBoundary);
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusResult {
    pub value: ExtendedValue,
    pub minimizer: Option<DensityFunction>,
    /// LP dual (`p = 1`) or coordinate-ascent dual (`p > 1`) weights, one per member.
    pub dual_plan: Option<Plan>,
    pub class: FunctionClass,
    pub p: f64,
    /// Infeasibility proof when the value is infinite.
    pub certificate: Option<Certificate>,
    pub residuals: Residuals,
}

/// `∫ ρ dμ`.
pub fn integrate(rho: &DensityFunction, mu: &Measure) -> Result<f64> {
    mu.pair(rho.values())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    /// `⟨μⱼ, ρ⟩ − 1` per member.
    pub margins: Vec<f64>,
    pub admissible: bool,
}

impl AdmissibilityReport {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Margins of `ρ` against each member; admissible when all are `≥ −tol`.
pub fn is_admissible(rho: &DensityFunction, family: &MeasureFamily, tol: f64) -> Result<AdmissibilityReport> {
    if rho.len() != family.space().len() {
        return Err(Error::SpaceMismatch);
    }
    let margins = family.members().iter().map(|mu| integrate(rho, mu).map(|v| v - 1.0)).collect::<Result<Vec<_>>>()?;
    let admissible = margins.iter().all(|&m| m >= -tol);
    Ok(AdmissibilityReport { margins, admissible })
}

/// Points where `ρ` may be nonzero for the given class.
fn free_points(family: &MeasureFamily, class: FunctionClass) -> Vec<bool> {
    let space = family.space();
    let mut free = vec![false; space.len()];
    match class {
        FunctionClass::Lipschitz(_) => free.iter_mut().for_each(|f| *f = true),
        FunctionClass::All | FunctionClass::BoundaryVanishing => {
            for mu in family.members() {
                for &(i, _) in mu.entries() {
                    free[i] = true;
                }
            }
            if class == FunctionClass::BoundaryVanishing {
                for &i in space.boundary() {
                    free[i] = false;
                }
            }
        }
    }
    free
}

fn lipschitz_pairs(space: &MeasureSpace, l: f64) -> Result<Vec<(usize, usize, f64)>> {
    space.edges().iter().map(|&(i, j)| Ok((i, j, l * space.distance(i, j)?))).collect()
}

/// `M_p` of a finite family under a function class.
///
/// `p = 1` is solved as a linear program whose dual is returned as a plan;
/// `p > 1` goes through the `p`-norm solver. A family without admissible
/// functions has value [`ExtendedValue::Infinity`] with a Farkas certificate;
/// the empty family has value zero.
pub fn m_p(family: &MeasureFamily, p: f64, class: FunctionClass) -> Result<ModulusResult> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidInput(format!("p must be at least 1, got {p}")));
    }
    let space = family.space().clone();
    class.check(&space)?;
    let n = space.len();
    if family.is_empty() {
        return Ok(ModulusResult {
            value: ExtendedValue::Finite(0.0),
            minimizer: Some(DensityFunction::constant(n, 0.0)?),
            dual_plan: Some(Plan::new(Vec::new())?),
            class,
            p,
            certificate: None,
            residuals: Residuals::default(),
        });
    }
    let free = free_points(family, class);
    let columns: Vec<usize> = (0..n).filter(|&i| free[i]).collect();
    let mut col_of = vec![usize::MAX; n];
    for (k, &i) in columns.iter().enumerate() {
        col_of[i] = k;
    }
    let member_rows: Vec<Vec<(usize, f64)>> = family
        .members()
        .iter()
        .map(|mu| mu.entries().iter().filter(|e| free[e.0]).map(|&(i, a)| (col_of[i], a)).collect())
        .collect();
    let lip = match class {
        FunctionClass::Lipschitz(l) => lipschitz_pairs(&space, l)?,
        _ => Vec::new(),
    };
    let members = family.len();

    if p == 1.0 {
        let cost: Vec<f64> = columns.iter().map(|&i| space.mass()[i]).collect();
        let mut lp = LinearProgram::new(columns.len()).with_objective(cost)?;
        for row in &member_rows {
            lp.add_row(row.clone(), Sense::Ge, 1.0)?;
        }
        for &(i, j, bound) in &lip {
            lp.add_row(vec![(col_of[i], 1.0), (col_of[j], -1.0)], Sense::Le, bound)?;
            lp.add_row(vec![(col_of[j], 1.0), (col_of[i], -1.0)], Sense::Le, bound)?;
        }
        let out = solve_lp(&lp)?;
        return match out.status {
            SolveStatus::Optimal => {
                let mut rho = vec![0.0; n];
                for (k, &i) in columns.iter().enumerate() {
                    rho[i] = out.primal[k];
                }
                Ok(ModulusResult {
                    value: ExtendedValue::finite(out.objective.unwrap_or(0.0).max(0.0))?,
                    minimizer: Some(DensityFunction::new(rho)?),
                    dual_plan: Some(Plan::new(out.dual[..members].iter().map(|y| y.max(0.0)).collect())?),
                    class,
                    p,
                    certificate: None,
                    residuals: out.residuals,
                })
            }
            SolveStatus::Infeasible => Ok(infinite(class, p, out.certificate)),
            SolveStatus::Unbounded => Err(Error::NumericFailure("modulus LP reported unbounded".into())),
        };
    }

    let mut rows: Vec<PnormRow> = member_rows
        .iter()
        .map(|r| PnormRow { coeffs: r.iter().map(|&(k, a)| (columns[k], a)).collect(), rhs: 1.0 })
        .collect();
    for &(i, j, bound) in &lip {
        rows.push(PnormRow { coeffs: vec![(i, -1.0), (j, 1.0)], rhs: -bound });
        rows.push(PnormRow { coeffs: vec![(j, -1.0), (i, 1.0)], rhs: -bound });
    }
    let weights: Vec<f64> = (0..n).map(|i| if free[i] { space.mass()[i] } else { 0.0 }).collect();
    // points outside the free set carry no row coefficients, so ρ stays 0 there
    let out = solve_pnorm_general(&weights, &rows, p, &PnormOptions::default())?;
    match out.status {
        SolveStatus::Optimal => Ok(ModulusResult {
            value: ExtendedValue::finite(out.objective.unwrap_or(0.0).max(0.0))?,
            minimizer: Some(DensityFunction::new(out.primal)?),
            dual_plan: Some(Plan::new(out.dual[..members].to_vec())?),
            class,
            p,
            certificate: None,
            residuals: out.residuals,
        }),
        SolveStatus::Infeasible => Ok(infinite(class, p, out.certificate)),
        SolveStatus::Unbounded => Err(Error::NumericFailure("p-norm problem reported unbounded".into())),
    }
}

fn infinite(class: FunctionClass, p: f64, certificate: Option<Certificate>) -> ModulusResult {
    ModulusResult {
        value: ExtendedValue::Infinity,
        minimizer: None,
        dual_plan: None,
        class,
        p,
        certificate,
        residuals: Residuals::default(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceReport {
    /// Per member, `min_{j ≥ J0} ⟨μ, ρⱼ⟩`.
    pub tail_minimum: Vec<f64>,
    /// 0-based index of the first density in the window.
    pub window_start: usize,
    pub admissible: bool,
}

/// Finite stand-in for `liminf_j ⟨μ, ρⱼ⟩ ≥ 1`: the minimum over the window
/// `j ≥ J0` must be at least `1 − tol` for every member.
pub fn check_admissible_sequence(
    seq: &[DensityFunction],
    family: &MeasureFamily,
    window_start: usize,
    tol: f64,
) -> Result<SequenceReport> {
    if seq.len() <= window_start {
        return Err(Error::InvalidInput(format!(
            "sequence of length {} has no densities from index {window_start}",
            seq.len()
        )));
    }
    let n = family.space().len();
    if seq.iter().any(|r| r.len() != n) {
        return Err(Error::SpaceMismatch);
    }
    let tail = &seq[window_start..];
    let tail_minimum = family
        .members()
        .iter()
        .map(|mu| {
            tail.iter().map(|rho| integrate(rho, mu)).try_fold(f64::INFINITY, |acc, v| v.map(|v| acc.min(v)))
        })
        .collect::<Result<Vec<_>>>()?;
    let admissible = tail_minimum.iter().all(|&v| v >= 1.0 - tol);
    Ok(SequenceReport { tail_minimum, window_start, admissible })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmUpperReport {
    /// `M_1(E_k)` for `k = 1..=K`.
    pub values: Vec<ExtendedValue>,
    /// Last value: an upper bound for `AM` of the union, never `AM` itself.
    pub estimate: ExtendedValue,
    pub note: String,
}

/// `M_1(E_k)` along a verified increasing sequence.
pub fn am_upper(seq: &FamilySequence, horizon: usize) -> Result<AmUpperReport> {
    let horizon = horizon.clamp(1, seq.horizon());
    seq.verify_monotone(horizon)?;
    let mut values = Vec::with_capacity(horizon);
    for k in 1..=horizon {
        values.push(m_p(seq.family(k)?, 1.0, FunctionClass::All)?.value);
    }
    check_nondecreasing(&values, "M_1(E_k)")?;
    let estimate = *values.last().expect("horizon >= 1");
    // monotonicity is verified, so equal sizes mean the family never grew
    let constant = seq.families()[..horizon].windows(2).all(|w| w[0].len() == w[1].len());
    let note = if constant {
        "single finite family: AM equals M_1 on finite (compact) families".to_string()
    } else {
        format!("upper bound for AM of the union of E_1..E_{horizon}; attained in the limit only for an optimal exhaustion")
    };
    Ok(AmUpperReport { values, estimate, note })
}

pub(crate) fn check_nondecreasing(values: &[ExtendedValue], what: &str) -> Result<()> {
    for (k, w) in values.windows(2).enumerate() {
        let ok = match (w[0], w[1]) {
            (_, ExtendedValue::Infinity) => true,
            (ExtendedValue::Infinity, ExtendedValue::Finite(_)) => false,
            (ExtendedValue::Finite(a), ExtendedValue::Finite(b)) => b >= a - MONOTONE_TOL * (1.0 + a.abs()),
        };
        if !ok {
            return Err(Error::NumericFailure(format!(
                "{what} decreased from k = {} to k = {}: {} > {}",
                k + 1,
                k + 2,
                w[0],
                w[1]
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmBracket {
    /// `Ct_1(E_K)`.
    pub lower: ExtendedValue,
    /// `M_1(E_K)`.
    pub upper: ExtendedValue,
}

/// Brackets `AM(E_K)` between the plan content and `M_1`.
pub fn am_bracket(seq: &FamilySequence, horizon: usize) -> Result<AmBracket> {
    let horizon = horizon.clamp(1, seq.horizon());
    seq.verify_monotone(horizon)?;
    let family = seq.family(horizon)?;
    let lower = ct_p(family, 1.0)?.value;
    let upper = m_p(family, 1.0, FunctionClass::All)?.value;
    let consistent = match (lower, upper) {
        (ExtendedValue::Infinity, ExtendedValue::Finite(_)) => false,
        (ExtendedValue::Finite(l), ExtendedValue::Finite(u)) => l <= u + MONOTONE_TOL * (1.0 + u),
        _ => true,
    };
    if !consistent {
        return Err(Error::NumericFailure(format!("content {lower} exceeds modulus {upper}")));
    }
    Ok(AmBracket { lower, upper })
}

/// Triangular bump `ω` on `[0, 1]` with unit integral (peak 2 at 1/2).
pub fn omega(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        0.0
    } else if t <= 0.5 {
        4.0 * t
    } else {
        4.0 * (1.0 - t)
    }
}

/// Triangular bump `η` on `[0, 1/2]` with unit integral (peak 4 at 1/4).
pub fn eta(t: f64) -> f64 {
    2.0 * omega(2.0 * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{dirac, restriction};
    use crate::space::grid_1d;
    use std::sync::Arc;

    fn family_of(space: &Arc<MeasureSpace>, members: Vec<Measure>) -> MeasureFamily {
        MeasureFamily::from_members(space.clone(), members.into_iter().enumerate().map(|(i, m)| (format!("m{i}"), m)))
            .unwrap()
    }

    #[test]
    fn integrate_basics() {
        let mu = Measure::from_dense(&[0.5, 0.0, 2.0]).unwrap();
        let one = DensityFunction::constant(3, 1.0).unwrap();
        assert_eq!(integrate(&one, &mu).unwrap(), mu.total());
        assert_eq!(integrate(&DensityFunction::constant(3, 0.0).unwrap(), &mu).unwrap(), 0.0);
        let rho = DensityFunction::new(vec![1.0, 2.0, 3.0]).unwrap();
        let lhs = integrate(&rho.scaled(2.0).unwrap(), &mu.scale(3.0).unwrap()).unwrap();
        assert!((lhs - 6.0 * integrate(&rho, &mu).unwrap()).abs() < 1e-12);
        assert_eq!(integrate(&DensityFunction::constant(2, 1.0).unwrap(), &mu), Err(Error::SpaceMismatch));
    }

    #[test]
    fn zero_density_is_not_admissible() {
        let s = Arc::new(grid_1d(0.0, 1.0, 4).unwrap());
        let f = family_of(&s, vec![dirac(&s, 1).unwrap()]);
        let rep = is_admissible(&DensityFunction::constant(4, 0.0).unwrap(), &f, 1e-9).unwrap();
        assert!(!rep.admissible);
        assert_eq!(rep.margins, vec![-1.0]);
    }

    #[test]
    fn empty_family_has_zero_modulus() {
        let s = Arc::new(grid_1d(0.0, 1.0, 4).unwrap());
        let r = m_p(&MeasureFamily::new(s), 1.0, FunctionClass::All).unwrap();
        assert_eq!(r.value, ExtendedValue::Finite(0.0));
    }

    #[test]
    fn zero_measure_gives_infinity_with_certificate() {
        let s = Arc::new(grid_1d(0.0, 1.0, 4).unwrap());
        let f = family_of(&s, vec![dirac(&s, 1).unwrap(), Measure::zero(4)]);
        for p in [1.0, 2.0] {
            let r = m_p(&f, p, FunctionClass::All).unwrap();
            assert_eq!(r.value, ExtendedValue::Infinity);
            assert!(matches!(r.certificate, Some(Certificate::Farkas { .. })));
        }
    }

    #[test]
    fn single_density_measure() {
        // μ = g·m: M_1 = 1 / max g
        let s = Arc::new(grid_1d(0.0, 1.0, 5).unwrap());
        let g = [0.5, 2.0, 3.0, 1.0, 0.0];
        let mu = Measure::from_dense(&g.iter().map(|g| g * 0.2).collect::<Vec<_>>()).unwrap();
        let r = m_p(&family_of(&s, vec![mu]), 1.0, FunctionClass::All).unwrap();
        assert!((r.value.as_finite().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_dirac_is_infinite_under_bv() {
        let s = Arc::new(grid_1d(0.0, 1.0, 16).unwrap());
        let f = family_of(&s, vec![dirac(&s, 13).unwrap(), dirac(&s, 14).unwrap(), dirac(&s, 15).unwrap()]);
        let bv = m_p(&f, 1.0, FunctionClass::BoundaryVanishing).unwrap();
        assert!(bv.value.is_infinite());
        let all = m_p(&f, 1.0, FunctionClass::All).unwrap();
        assert!((all.value.as_finite().unwrap() - 3.0 / 16.0).abs() < 1e-12);
        let interior = family_of(&s, vec![dirac(&s, 13).unwrap(), dirac(&s, 14).unwrap()]);
        let bv_in = m_p(&interior, 1.0, FunctionClass::BoundaryVanishing).unwrap();
        assert!((bv_in.value.as_finite().unwrap() - 2.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn class_requirements() {
        let bare = Arc::new(MeasureSpace::new(vec![1.0, 1.0]).unwrap());
        let f = family_of(&bare, vec![Measure::from_dense(&[1.0, 0.0]).unwrap()]);
        assert_eq!(m_p(&f, 1.0, FunctionClass::Lipschitz(1.0)).unwrap_err(), Error::NoCoords);
        assert_eq!(m_p(&f, 1.0, FunctionClass::BoundaryVanishing).unwrap_err(), Error::NoBoundary);
        assert!(m_p(&f, 0.5, FunctionClass::All).is_err());
    }

    #[test]
    fn lipschitz_raises_the_modulus() {
        let s = Arc::new(grid_1d(0.0, 1.0, 32).unwrap());
        let f = family_of(&s, vec![restriction(&s, 0..2).unwrap()]);
        let all = m_p(&f, 1.0, FunctionClass::All).unwrap().value.as_finite().unwrap();
        let tight = m_p(&f, 1.0, FunctionClass::Lipschitz(1.0)).unwrap().value.as_finite().unwrap();
        let loose = m_p(&f, 1.0, FunctionClass::Lipschitz(1e4)).unwrap().value.as_finite().unwrap();
        assert!((all - 1.0).abs() < 1e-12);
        assert!(tight > loose - 1e-12);
        assert!(loose >= all - 1e-12);
        let p2 = m_p(&f, 2.0, FunctionClass::Lipschitz(1.0)).unwrap().value.as_finite().unwrap();
        let p2_all = m_p(&f, 2.0, FunctionClass::All).unwrap().value.as_finite().unwrap();
        assert!(p2 >= p2_all * (1.0 - 1e-6));
    }

    #[test]
    fn sequence_windows() {
        let s = Arc::new(grid_1d(0.0, 1.0, 4).unwrap());
        let f = family_of(&s, vec![restriction(&s, [0, 1]).unwrap()]);
        let good = DensityFunction::constant(4, 2.0).unwrap();
        let bad = DensityFunction::constant(4, 0.5).unwrap();
        let rep = check_admissible_sequence(&[bad.clone(), good.clone(), good.clone()], &f, 1, 1e-9).unwrap();
        assert!(rep.admissible);
        assert_eq!(rep.tail_minimum, vec![1.0]);
        let rep = check_admissible_sequence(&[good.clone(), bad, good], &f, 1, 1e-9).unwrap();
        assert!(!rep.admissible);
        assert!(check_admissible_sequence(&[DensityFunction::constant(4, 1.0).unwrap()], &f, 1, 1e-9).is_err());
    }

    #[test]
    fn mollifiers_have_unit_integral() {
        let n = 100_000;
        let h = 1.0 / n as f64;
        let w: f64 = (0..n).map(|i| omega((i as f64 + 0.5) * h) * h).sum();
        let e: f64 = (0..n).map(|i| eta((i as f64 + 0.5) * h) * h).sum();
        assert!((w - 1.0).abs() < 1e-8);
        assert!((e - 1.0).abs() < 1e-8);
        assert_eq!(eta(0.6), 0.0);
    }
}
