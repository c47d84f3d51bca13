//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use modlab_core::measures::MeasureFamily;

/// `min cᵀx` subject to `Ax ≥ b`, `x ≥ 0`, by enumerating every basic
/// solution. `None` when no vertex is feasible.
pub fn vertex_min(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let n = c.len();
    // all constraints as gᵀx ≥ h, the bounds last
    let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().cloned()).collect();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        rows.push((e, 0.0));
    }
    let mut best: Option<f64> = None;
    let mut pick = Vec::with_capacity(n);
    subsets(rows.len(), n, 0, &mut pick, &mut |chosen| {
        let mut m: Vec<Vec<f64>> = chosen.iter().map(|&r| rows[r].0.clone()).collect();
        let mut rhs: Vec<f64> = chosen.iter().map(|&r| rows[r].1).collect();
        if let Some(x) = gauss(&mut m, &mut rhs) {
            let feasible = rows.iter().all(|(g, h)| g.iter().zip(&x).map(|(g, x)| g * x).sum::<f64>() >= h - 1e-9);
            if feasible {
                let v: f64 = c.iter().zip(&x).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
    });
    best
}

fn subsets(total: usize, k: usize, from: usize, pick: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if pick.len() == k {
        f(pick);
        return;
    }
    for i in from..total {
        if total - i < k - pick.len() {
            break;
        }
        pick.push(i);
        subsets(total, k, i + 1, pick, f);
        pick.pop();
    }
}

fn gauss(m: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                if f != 0.0 {
                    for k in col..n {
                        m[r][k] -= f * m[col][k];
                    }
                    rhs[r] -= f * rhs[col];
                }
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

/// `M_1` by vertex enumeration of `min Σ m ρ`, `⟨μⱼ, ρ⟩ ≥ 1`.
pub fn m1_oracle(family: &MeasureFamily) -> Option<f64> {
    let c = family.space().mass().to_vec();
    let a: Vec<Vec<f64>> = family.members().iter().map(|mu| mu.to_dense()).collect();
    vertex_min(&c, &a, &vec![1.0; a.len()])
}

/// `Ct_1` by vertex enumeration of `max Σ η`, `Σ ηⱼ μⱼ ≤ m`.
pub fn ct1_oracle(family: &MeasureFamily) -> Option<f64> {
    let mass = family.space().mass();
    let dense: Vec<Vec<f64>> = family.members().iter().map(|mu| mu.to_dense()).collect();
    let a: Vec<Vec<f64>> = (0..mass.len()).map(|x| dense.iter().map(|d| -d[x]).collect()).collect();
    let b: Vec<f64> = mass.iter().map(|m| -m).collect();
    vertex_min(&vec![-1.0; dense.len()], &a, &b).map(|v| -v)
}

/// `m(B(x, 2r)) / m(B(x, r))` maximized by direct pairwise distances.
pub fn doubling_oracle(coords: &[Vec<f64>], mass: &[f64], radii: &[f64]) -> f64 {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let mut best: f64 = 1.0;
    for x in coords {
        for &r in radii {
            let ball = |rad: f64| -> f64 {
                coords.iter().zip(mass).filter(|(y, _)| dist(x, y) <= rad * (1.0 + 1e-12)).map(|(_, m)| m).sum()
            };
            let inner = ball(r);
            if inner > 0.0 {
                best = best.max(ball(2.0 * r) / inner);
            }
        }
    }
    best
}
