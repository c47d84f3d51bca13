//! Interval paths on `[0, 1]` and radial paths in the square `[−1, 1]²`.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::sync::Arc;

use crate::measures::{path_measure, restriction, FamilySequence, MeasureFamily};
use crate::modulus::{m_p, FunctionClass};
use crate::space::{Layout, MeasureSpace};
use crate::{Error, Result};

/// Lengths `r` of the interval paths `[0, r]`, four per octave.
const PER_OCTAVE: usize = 4;

fn unit_grid(space: &MeasureSpace) -> Result<(usize, f64)> {
    match *space.layout() {
        Layout::Grid1d { a, h, n } if a == 0.0 && (h * n as f64 - 1.0).abs() < 1e-12 => Ok((n, h)),
        _ => Err(Error::InvalidInput("interval paths need a uniform grid on [0, 1]".into())),
    }
}

/// Cell counts `c` (so `r = c·h`) of the lengths in `[lo, 1]` on the geometric
/// grid `2^{−j}(1 + t/4)`, snapped to cell edges.
fn interval_lengths(n: usize, lo: f64) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    out.insert(n);
    let mut j = 0;
    loop {
        let base = 0.5f64.powi(j + 1);
        if base * 2.0 < lo * (1.0 - 1e-12) {
            break;
        }
        for t in 0..PER_OCTAVE {
            let r = base * (1.0 + t as f64 / PER_OCTAVE as f64);
            if r >= lo * (1.0 - 1e-12) && r <= 1.0 {
                let c = (r * n as f64).round() as usize;
                if c >= 1 {
                    out.insert(c);
                }
            }
        }
        j += 1;
    }
    out.insert((lo * n as f64).round() as usize);
    out
}

/// `Γ_k`: the restrictions of `m` to `[0, r]` for `r ∈ [2^{−k}, 1]` on a fixed
/// geometric grid, so that `Γ_k ⊆ Γ_{k+1}`.
pub fn interval_family(k: usize, space: &Arc<MeasureSpace>) -> Result<MeasureFamily> {
    let (n, h) = unit_grid(space)?;
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let scale = 0.5f64.powi(k as i32);
    if scale < h * (1.0 - 1e-12) {
        return Err(Error::TooFineK { k, scale, cell: h });
    }
    let mut family = MeasureFamily::new(space.clone());
    for c in interval_lengths(n, scale) {
        family.push(format!("r={}", c as f64 * h), restriction(space, 0..c)?)?;
    }
    Ok(family)
}

pub fn interval_sequence(horizon: usize, space: &Arc<MeasureSpace>) -> Result<FamilySequence> {
    FamilySequence::generate(horizon, true, |k| interval_family(k, space))
}

/// Direction and radius resolution of [`radial_family`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    pub directions: usize,
    /// Radii are `1/(j + t/subdivisions)`, `t < subdivisions`.
    pub subdivisions: usize,
}

impl Default for RadialGrid {
    fn default() -> Self {
        RadialGrid { directions: 64, subdivisions: 8 }
    }
}

/// `1/r` values of the radii used for `k`: `1 + t/s` up to `k`.
fn radial_inverse_radii(k: usize, subdivisions: usize) -> Vec<(usize, f64)> {
    let s = subdivisions.max(1);
    (0..=(k - 1) * s).map(|t| (t, 1.0 + t as f64 / s as f64)).collect()
}

/// `Γ_k`: segments from the origin to `z` with `1/k ≤ |z| ≤ 1`, on a fixed
/// direction grid and the nested radius grid of [`RadialGrid`].
pub fn radial_family(k: usize, space: &Arc<MeasureSpace>, grid: RadialGrid) -> Result<MeasureFamily> {
    if k == 0 || grid.directions == 0 {
        return Err(Error::InvalidInput("k and the direction count must be positive".into()));
    }
    match *space.layout() {
        Layout::Grid2d { a, c, hx, hy, nx, ny }
            if a <= -1.0 + 1e-12
                && c <= -1.0 + 1e-12
                && a + hx * nx as f64 >= 1.0 - 1e-12
                && c + hy * ny as f64 >= 1.0 - 1e-12 => {}
        _ => return Err(Error::InvalidInput("radial paths need a grid covering [-1, 1]^2".into())),
    }
    let mut family = MeasureFamily::new(space.clone());
    for (t, inv) in radial_inverse_radii(k, grid.subdivisions) {
        let r = 1.0 / inv;
        for d in 0..grid.directions {
            let theta = TAU * d as f64 / grid.directions as f64;
            let z = vec![r * theta.cos(), r * theta.sin()];
            family.push(format!("d{d}t{t}"), path_measure(space, &[vec![0.0, 0.0], z])?)?;
        }
    }
    Ok(family)
}

pub fn radial_sequence(horizon: usize, space: &Arc<MeasureSpace>, grid: RadialGrid) -> Result<FamilySequence> {
    FamilySequence::generate(horizon, true, |k| radial_family(k, space, grid))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonouterReport {
    /// `δ₁ > δ₂ > … > δ_j`, `δ_{i+1} = δ_i / 2`.
    pub deltas: Vec<f64>,
    /// Truncation of the interval family: `2^{−k} ≤ δ_j`.
    pub k: usize,
    /// `M_1` of the interval family alone.
    pub base_value: f64,
    /// `M_1` with the extra members `[δ₁, 1]`, `[δ₂, δ₁]`, ….
    pub value: f64,
    pub expected: f64,
}

/// `M_1` of `Γ_k ∪ {[δ₁,1], [δ₂,δ₁], …, [δ_j,δ_{j−1}]}`: `j + 1` disjoint
/// binding constraints.
pub fn nonouter_experiment(space: &Arc<MeasureSpace>, delta1: f64, extra: usize) -> Result<NonouterReport> {
    let (n, _) = unit_grid(space)?;
    if extra == 0 || !(delta1 > 0.0 && delta1 < 1.0) {
        return Err(Error::InvalidInput("need at least one extra member and 0 < δ₁ < 1".into()));
    }
    let deltas: Vec<f64> = (0..extra).map(|i| delta1 * 0.5f64.powi(i as i32)).collect();
    let edges = deltas
        .iter()
        .map(|d| {
            let c = d * n as f64;
            if (c - c.round()).abs() > 1e-9 || c.round() < 1.0 {
                Err(Error::InvalidInput(format!("δ = {d} is not a grid point")))
            } else {
                Ok(c.round() as usize)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let smallest = *deltas.last().expect("extra >= 1");
    let k = (1.0 / smallest).log2().ceil() as usize;
    let mut family = interval_family(k, space)?;
    let base_value = m_p(&family, 1.0, FunctionClass::All)?.value.to_f64();
    let mut hi = n;
    for (i, &lo) in edges.iter().enumerate() {
        family.push(format!("extra{}", i + 1), restriction(space, lo..hi)?)?;
        hi = lo;
    }
    let value = m_p(&family, 1.0, FunctionClass::All)?.value.to_f64();
    Ok(NonouterReport { deltas, k, base_value, value, expected: (extra + 1) as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{grid_1d, grid_2d, Rect};

    #[test]
    fn interval_lengths_nested_and_bounded() {
        let s = Arc::new(grid_1d(0.0, 1.0, 256).unwrap());
        for k in 1..8 {
            let a = interval_family(k, &s).unwrap();
            let b = interval_family(k + 1, &s).unwrap();
            assert!(a.members().iter().all(|m| b.contains(m)));
            let totals: Vec<f64> = a.members().iter().map(|m| m.total()).collect();
            let min = totals.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!((min - 0.5f64.powi(k as i32)).abs() < 1e-12);
            assert!(totals.iter().all(|&t| t <= 1.0 + 1e-12));
        }
        assert!(matches!(interval_family(9, &s), Err(Error::TooFineK { .. })));
    }

    #[test]
    fn interval_modulus_is_one() {
        let s = Arc::new(grid_1d(0.0, 1.0, 512).unwrap());
        for k in [1, 3, 6] {
            let r = m_p(&interval_family(k, &s).unwrap(), 1.0, FunctionClass::All).unwrap();
            assert!((r.value.to_f64() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn radial_radii() {
        assert_eq!(radial_inverse_radii(1, 8), vec![(0, 1.0)]);
        let s = Arc::new(grid_2d(Rect::square(-1.0, 1.0), 16, 16).unwrap());
        let grid = RadialGrid { directions: 8, subdivisions: 2 };
        let f1 = radial_family(1, &s, grid).unwrap();
        let f3 = radial_family(3, &s, grid).unwrap();
        assert_eq!(f1.len(), 8);
        assert_eq!(f3.len(), 8 * 5);
        assert!(f1.members().iter().all(|m| f3.contains(m)));
        for m in f3.members() {
            assert!(m.total() >= 1.0 / 3.0 - 1e-6 && m.total() <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn nonouter_small() {
        let s = Arc::new(grid_1d(0.0, 1.0, 64).unwrap());
        let r = nonouter_experiment(&s, 0.5, 2).unwrap();
        assert_eq!(r.k, 2);
        assert!((r.base_value - 1.0).abs() < 1e-9);
        assert!((r.value - 3.0).abs() < 1e-9);
        assert!(nonouter_experiment(&s, 0.3, 1).is_err());
    }
}
