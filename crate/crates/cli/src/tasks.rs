//! Solving one instance and turning the results into report sections.

use serde_json::{json, Map, Value};

use modlab_core::content::{ct_p, duality_gap, ContentResult, DualityReport, Gap};
use modlab_core::measures::{FamilySequence, MeasureFamily};
use modlab_core::modulus::{am_bracket, am_upper, m_p, FunctionClass, ModulusResult};
use modlab_core::solver::{Residuals, TOL_PNORM};
use modlab_core::ExtendedValue;

use crate::fail::{Fail, Outcome};
use crate::instance::Task;
use crate::report::{certificate, digest, extended, num, residuals};

/// Accepted `(primal, dual, gap)` residuals for an optimal value.
fn limits(p: f64) -> (f64, f64, f64) {
    if p == 1.0 {
        (1e-8, 1e-8, 1e-8)
    } else {
        // the primal slot of the p = 2 content holds the KKT residual
        (1e-3, 1e-8, TOL_PNORM)
    }
}

fn check_residuals(what: &str, p: f64, value: ExtendedValue, r: &Residuals) -> Outcome<()> {
    let (pr, du, ga) = limits(p);
    if value.is_infinite() || (r.primal <= pr && r.dual <= du && r.gap <= ga) {
        Ok(())
    } else {
        Err(Fail::Numeric(format!(
            "{what} residuals out of tolerance: primal {:e}, dual {:e}, gap {:e}",
            r.primal, r.dual, r.gap
        )))
    }
}

fn infinite_needs_certificate(what: &str, value: ExtendedValue, has: bool) -> Outcome<()> {
    if value.is_infinite() && !has {
        return Err(Fail::Invariant(format!("{what} is infinite without a certificate")));
    }
    Ok(())
}

pub fn modulus_section(family: &MeasureFamily, r: &ModulusResult) -> Outcome<Value> {
    check_residuals("modulus", r.p, r.value, &r.residuals)?;
    infinite_needs_certificate("modulus", r.value, r.certificate.is_some())?;
    let mut m = Map::new();
    m.insert("value".into(), extended(r.value));
    m.insert("p".into(), num(r.p));
    m.insert("class".into(), Value::String(r.class.to_string()));
    m.insert("members".into(), json!(family.len()));
    m.insert("points".into(), json!(family.space().len()));
    m.insert("residuals".into(), residuals(&r.residuals));
    if let Some(rho) = &r.minimizer {
        m.insert(
            "minimizer".into(),
            json!({
                "digest": digest(rho.values()),
                "sup": num(rho.sup()),
                "energy": num(rho.p_energy(family.space(), r.p)?),
            }),
        );
    }
    if let Some(plan) = &r.dual_plan {
        m.insert("dual_plan".into(), json!({ "digest": digest(plan.weights()), "total": num(plan.total()) }));
    }
    if let Some(c) = &r.certificate {
        m.insert("certificate".into(), certificate(c));
    }
    Ok(Value::Object(m))
}

pub fn content_section(r: &ContentResult) -> Outcome<Value> {
    check_residuals("content", r.p, r.value, &r.residuals)?;
    infinite_needs_certificate("content", r.value, r.certificate.is_some())?;
    let mut m = Map::new();
    m.insert("value".into(), extended(r.value));
    m.insert("p".into(), num(r.p));
    m.insert("residuals".into(), residuals(&r.residuals));
    m.insert("constraint_residual".into(), num(r.constraint_residual));
    if let Some(plan) = &r.plan {
        m.insert("plan".into(), json!({ "digest": digest(plan.weights()), "total": num(plan.total()) }));
    }
    if let Some(rho) = &r.dual_density {
        m.insert("dual_density".into(), json!({ "digest": digest(rho.values()), "sup": num(rho.sup()) }));
    }
    if let Some(c) = &r.certificate {
        m.insert("certificate".into(), certificate(c));
    }
    Ok(Value::Object(m))
}

pub fn gap_value(g: Gap) -> Value {
    match g {
        Gap::Finite(x) => num(x),
        Gap::MatchedInfinite => Value::String("matched-inf".into()),
        Gap::Mismatched => Value::String("mismatched".into()),
    }
}

/// Default duality threshold: the LP identity is exact, `p > 1` is solved
/// to first-order accuracy.
pub fn default_duality_tol(p: f64) -> f64 {
    if p == 1.0 {
        1e-6
    } else {
        1e-3
    }
}

pub fn duality_ok(r: &DualityReport, tol: f64) -> bool {
    match r.gap {
        Gap::Finite(g) => g <= tol,
        Gap::MatchedInfinite => true,
        Gap::Mismatched => false,
    }
}

pub fn duality_section(family: &MeasureFamily, r: &DualityReport, tol: f64) -> Outcome<Value> {
    Ok(json!({
        "p": num(r.p),
        "modulus": modulus_section(family, &r.modulus)?,
        "content": content_section(&r.content)?,
        "modulus_root": extended(r.modulus_root),
        "gap": gap_value(r.gap),
        "cross_check": num(r.cross_check),
        "threshold": num(tol),
        "pass": duality_ok(r, tol),
    }))
}

pub fn am_section(seq: &FamilySequence, horizon: usize) -> Outcome<Value> {
    let bracket = am_bracket(seq, horizon)?;
    let upper = am_upper(seq, horizon)?;
    Ok(json!({
        "horizon": horizon,
        "lower": extended(bracket.lower),
        "upper": extended(bracket.upper),
        "m1_along_sequence": Value::Array(upper.values.iter().map(|&v| extended(v)).collect()),
        "estimate": extended(upper.estimate),
        "note": upper.note,
    }))
}

/// The `results` section of a compute report and whether every recorded
/// check passed.
pub fn run_task(
    task: Task,
    family: &MeasureFamily,
    sequence: impl FnOnce() -> Outcome<FamilySequence>,
    p: f64,
    class: FunctionClass,
    tol: Option<f64>,
    horizon: Option<usize>,
) -> Outcome<(Value, bool)> {
    Ok(match task {
        Task::Modulus => (modulus_section(family, &m_p(family, p, class)?)?, true),
        Task::Content => (content_section(&ct_p(family, p)?)?, true),
        Task::Duality => {
            if class != FunctionClass::All {
                return Err(Fail::Schema("duality compares against the unrestricted class only".into()));
            }
            let tol = tol.unwrap_or_else(|| default_duality_tol(p));
            let r = duality_gap(family, p)?;
            (duality_section(family, &r, tol)?, duality_ok(&r, tol))
        }
        Task::AmBracket => {
            let seq = sequence()?;
            let k = horizon.unwrap_or(seq.horizon()).clamp(1, seq.horizon());
            (am_section(&seq, k)?, true)
        }
    })
}
