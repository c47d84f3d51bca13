//! The adversary against candidate admissible sequences for `⋃_m E_m`.
//!
//! Given `h_1, …, h_K` with `‖h_k‖₁ < 2(1 − ε)`, it builds a member
//! `ν = μ_{m₀,q}` of the union whose integrals `∫ h_k dν` all stay at most
//! `1 − ε/2`, so the candidate is not admissible for it.

use rand::Rng;

use crate::measures::Measure;
use crate::modulus::{integrate, DensityFunction};
use crate::{Error, Result};

use super::spiky::GSystem;

/// Slack allowed on the bound `1 − ε/2`.
pub const WITNESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// A witness defeats the candidate on the whole horizon.
    Broken,
    /// No start index produced a witness at this truncation depth.
    AdversaryFailedAtDepth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub epsilon: f64,
    /// Start index `m₀` of the reported attempt (1-based).
    pub start: usize,
    /// `p_m` for `m = m₀..=M`: first `k` from which
    /// `∫_{⋃_{n≥m} G_{n,1}} h_k > 1 − ε` holds up to the horizon.
    pub thresholds: Vec<Option<usize>>,
    /// Chosen depths `q_m`, `m = m₀..=M`.
    pub depths: Vec<usize>,
    /// Whether `q_m` was capped at `I` without meeting its target.
    pub depth_limited: Vec<bool>,
    pub witness: Measure,
    /// `∫ h_k dν`, `k = 1..=K`.
    pub integrals: Vec<f64>,
    pub verdict: Verdict,
}

impl WitnessReport {
    pub fn max_integral(&self) -> f64 {
        self.integrals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn bound(&self) -> f64 {
        1.0 - self.epsilon / 2.0
    }
}

fn integral_over(h: &DensityFunction, mass: &[f64], set: &[usize]) -> f64 {
    set.iter().map(|&x| mass[x] * h.values()[x]).sum()
}

fn attempt(system: &GSystem, h: &[DensityFunction], epsilon: f64, start: usize) -> Result<WitnessReport> {
    let big_m = system.count();
    let depth = system.depth();
    let horizon = h.len();
    let mass = system.space().mass();

    // a_m(k) = ∫_{⋃_{n≥m} G_{n,1}} h_k, and its tail threshold p_m
    let thresholds = (start..=big_m)
        .map(|m| {
            let tail = system.tail_union(m)?;
            let a = h.iter().map(|hk| integrate(hk, &tail)).collect::<Result<Vec<_>>>()?;
            let first_bad = a.iter().rposition(|&v| v <= 1.0 - epsilon);
            Ok(match first_bad {
                None => Some(1),
                Some(k) if k + 1 < horizon => Some(k + 2),
                Some(_) => None,
            })
        })
        .collect::<Result<Vec<Option<usize>>>>()?;

    // q_m must make ∫_{G_{m,q_m}} h_k small for every k ≤ r_m, where
    // r_m = max(p_{m+1}, r_{m−1}) and r_M = K; a missing p_{m+1} counts as K
    let mut depths = Vec::with_capacity(thresholds.len());
    let mut depth_limited = Vec::with_capacity(thresholds.len());
    let mut reach = 0usize;
    let mut prev_q = 1usize;
    for (offset, m) in (start..=big_m).enumerate() {
        let r = if m == big_m { horizon } else { thresholds[offset + 1].unwrap_or(horizon) };
        reach = reach.max(r).min(horizon);
        let target = epsilon * 0.5f64.powi(m as i32 + 1);
        let chosen = (prev_q..=depth).find(|&q| {
            let set = system.set(m, q).expect("q within depth");
            h[..reach].iter().all(|hk| integral_over(hk, mass, set) < target)
        });
        let q = chosen.unwrap_or(depth);
        depth_limited.push(chosen.is_none());
        depths.push(q);
        prev_q = q;
    }

    let mut s = vec![1; big_m];
    for (offset, &q) in depths.iter().enumerate() {
        s[start - 1 + offset] = q;
    }
    let witness = system.h_measure(start, &s)?;
    let integrals = h.iter().map(|hk| integrate(hk, &witness)).collect::<Result<Vec<_>>>()?;
    let ok = integrals.iter().all(|&v| v <= 1.0 - epsilon / 2.0 + WITNESS_TOL);
    Ok(WitnessReport {
        epsilon,
        start,
        thresholds,
        depths,
        depth_limited,
        witness,
        integrals,
        verdict: if ok { Verdict::Broken } else { Verdict::AdversaryFailedAtDepth },
    })
}

/// Runs the adversary from every start index `m₀ = 1..=M` and reports the
/// first witness found, or the attempt with the smallest worst integral.
pub fn construction_witness(system: &GSystem, h: &[DensityFunction], epsilon: f64) -> Result<WitnessReport> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidInput(format!("ε must lie in (0, 1/2), got {epsilon}")));
    }
    if h.is_empty() {
        return Err(Error::InvalidInput("empty candidate sequence".into()));
    }
    let n = system.space().len();
    if h.iter().any(|hk| hk.len() != n) {
        return Err(Error::SpaceMismatch);
    }
    let bound = 2.0 * (1.0 - epsilon);
    for (k, hk) in h.iter().enumerate() {
        let norm = hk.p_energy(system.space(), 1.0)?;
        if !(norm < bound) {
            return Err(Error::RejectInput(format!("‖h_{}‖₁ = {norm} is not below 2(1 − ε) = {bound}", k + 1)));
        }
    }
    let mut best: Option<WitnessReport> = None;
    for start in 1..=system.count() {
        let report = attempt(system, h, epsilon, start)?;
        if report.verdict == Verdict::Broken {
            return Ok(report);
        }
        if best.as_ref().is_none_or(|b| report.max_integral() < b.max_integral()) {
            best = Some(report);
        }
    }
    Ok(best.expect("M >= 1"))
}

/// A random candidate sequence: each `h_k` is a log-uniform positive
/// background plus a few bumps on `G`-sets carrying at most half of the
/// norm, rescaled to `‖h_k‖₁` uniform in `[1, max_norm)`.
pub fn random_candidate<R: Rng>(system: &GSystem, horizon: usize, max_norm: f64, rng: &mut R) -> Result<Vec<DensityFunction>> {
    if !(max_norm > 1.0) {
        return Err(Error::InvalidInput(format!("max norm {max_norm} must exceed 1")));
    }
    let space = system.space();
    let mass = space.mass();
    (0..horizon)
        .map(|_| {
            let mut base: Vec<f64> = (0..space.len()).map(|_| 10f64.powf(rng.gen_range(-2.0..1.0))).collect();
            let base_norm: f64 = base.iter().zip(mass).map(|(h, m)| h * m).sum();
            let bump_share = rng.gen_range(0.0..0.5);
            base.iter_mut().for_each(|v| *v *= (1.0 - bump_share) / base_norm);
            let bumps = rng.gen_range(1..=3);
            for _ in 0..bumps {
                let m = rng.gen_range(1..=system.count());
                let i = rng.gen_range(1..=system.depth());
                let g = system.g(m, i)?;
                base.iter_mut().zip(g.values()).for_each(|(v, g)| *v += bump_share / bumps as f64 * g);
            }
            let target = rng.gen_range(1.0..max_norm);
            base.iter_mut().for_each(|v| *v *= target);
            DensityFunction::new(base)
        })
        .collect()
}
