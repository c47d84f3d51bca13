mod common;

use std::sync::Arc;

use proptest::prelude::*;

use modlab_core::measures::{dirac, path_measure, restriction, union_families, Measure, MeasureFamily};
use modlab_core::modulus::{integrate, is_admissible, m_p, DensityFunction, FunctionClass};
use modlab_core::random::{random_family, rng, RandomShape};
use modlab_core::space::{grid_1d, grid_2d, MeasureSpace, Rect};

fn unit_square(n: usize) -> Arc<MeasureSpace> {
    Arc::new(grid_2d(Rect::square(0.0, 1.0), n, n).unwrap())
}

fn labelled(space: &Arc<MeasureSpace>, members: Vec<Measure>) -> MeasureFamily {
    MeasureFamily::from_members(space.clone(), members.into_iter().enumerate().map(|(i, m)| (format!("m{i}"), m)))
        .unwrap()
}

fn polyline() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 2..6).prop_map(|v| v.into_iter().map(|(x, y)| vec![x, y]).collect())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn path_mass_is_length(poly in polyline()) {
        let space = unit_square(20);
        let length: f64 = poly.windows(2).map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt()).sum();
        prop_assume!(length > 1e-9);
        let mu = path_measure(&space, &poly).unwrap();
        prop_assert!((mu.total() - length).abs() <= 1e-12 * length.max(1.0));
    }

    #[test]
    fn restriction_is_additive(bits in prop::collection::vec(0u8..3, 36)) {
        let space = unit_square(6);
        let a: Vec<usize> = (0..36).filter(|&i| bits[i] == 1).collect();
        let b: Vec<usize> = (0..36).filter(|&i| bits[i] == 2).collect();
        let both: Vec<usize> = a.iter().chain(&b).copied().collect();
        let sum = restriction(&space, a).unwrap().add(&restriction(&space, b).unwrap()).unwrap();
        prop_assert!(sum.approx_eq(&restriction(&space, both).unwrap(), 1e-15));
    }

    #[test]
    fn integration_is_bilinear(
        f in prop::collection::vec(0.0..5.0f64, 16),
        g in prop::collection::vec(0.0..5.0f64, 16),
        a in 0.0..3.0f64,
        b in 0.0..3.0f64,
        seed in 0u64..1000,
    ) {
        let mut r = rng(seed);
        let mu = modlab_core::random::random_measure(&mut r, 16, 6).unwrap();
        let nu = modlab_core::random::random_measure(&mut r, 16, 6).unwrap();
        let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        let (f, g, combo) = (DensityFunction::new(f).unwrap(), DensityFunction::new(g).unwrap(), DensityFunction::new(combo).unwrap());
        let lhs = integrate(&combo, &mu).unwrap();
        let rhs = a * integrate(&f, &mu).unwrap() + b * integrate(&g, &mu).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        let sum = mu.add(&nu).unwrap();
        let split = integrate(&f, &mu).unwrap() + integrate(&f, &nu).unwrap();
        prop_assert!((integrate(&f, &sum).unwrap() - split).abs() <= 1e-12 * (1.0 + split.abs()));
    }

    #[test]
    fn lp_minimizer_is_admissible(seed in 0u64..10_000) {
        let family = random_family(&mut rng(seed), RandomShape::default()).unwrap();
        let out = m_p(&family, 1.0, FunctionClass::All).unwrap();
        if let Some(rho) = out.minimizer {
            let report = is_admissible(&rho, &family, 1e-8).unwrap();
            prop_assert!(report.admissible, "margin {}", report.min_margin());
            let cost = rho.p_energy(family.space(), 1.0).unwrap();
            prop_assert!((cost - out.value.to_f64()).abs() <= 1e-8 * cost.max(1.0));
        } else {
            prop_assert!(out.value.is_infinite());
        }
    }

    #[test]
    fn scaling_members_and_mass(seed in 0u64..10_000, c in 0.2..5.0f64) {
        let family = random_family(&mut rng(seed), RandomShape { max_points: 10, max_members: 6, max_support: 4 }).unwrap();
        let base = m_p(&family, 1.0, FunctionClass::All).unwrap().value;
        prop_assume!(!base.is_infinite());
        let base = base.to_f64();
        // M_p(cΓ) = c^{−p} M_p(Γ)
        let members = m_p(&family.scaled(c).unwrap(), 1.0, FunctionClass::All).unwrap().value.to_f64();
        prop_assert!((members - base / c).abs() <= 1e-8 * base.max(1.0));
        // rescaling the reference mass scales the cost
        let space = Arc::new(family.space().scaled_mass(c).unwrap());
        let heavier = m_p(&family.on_space(space).unwrap(), 1.0, FunctionClass::All).unwrap().value.to_f64();
        prop_assert!((heavier - c * base).abs() <= 1e-8 * (c * base).max(1.0));
    }
}

#[test]
fn lp_agrees_with_vertex_oracle() {
    let shape = RandomShape { max_points: 7, max_members: 5, max_support: 3 };
    for seed in 0..40u64 {
        let family = random_family(&mut rng(3000 + seed), shape).unwrap();
        let got = m_p(&family, 1.0, FunctionClass::All).unwrap().value;
        match common::m1_oracle(&family) {
            Some(v) => assert!((got.to_f64() - v).abs() <= 1e-8 * v.max(1.0), "seed {seed}: {got:?} vs {v}"),
            None => assert!(got.is_infinite(), "seed {seed}"),
        }
    }
}

#[test]
fn union_is_subadditive_and_monotone() {
    let space = unit_square(5);
    let f1 = labelled(&space, vec![restriction(&space, [0, 1, 2]).unwrap(), restriction(&space, [7, 8]).unwrap()]);
    let f2 = labelled(&space, vec![restriction(&space, [2, 3, 4]).unwrap(), dirac(&space, 24).unwrap()]);
    let v = |f: &MeasureFamily| m_p(f, 1.0, FunctionClass::All).unwrap().value.to_f64();
    let u = union_families(&f1, &f2).unwrap();
    assert_eq!(u.len(), 4);
    let (a, b, c) = (v(&f1), v(&f2), v(&u));
    assert!(c <= a + b + 1e-10 && c >= a.max(b) - 1e-10, "{a} {b} {c}");
    // disjoint supports: additive
    let f3 = labelled(&space, vec![restriction(&space, [12, 13]).unwrap()]);
    let d = v(&f3);
    let w = v(&union_families(&f1, &f3).unwrap());
    assert!((w - (a + d)).abs() <= 1e-10, "{w} vs {}", a + d);
    // a member's own union with itself changes nothing
    assert_eq!(union_families(&f1, &f1).unwrap().len(), f1.len());
}

#[test]
fn single_member_values() {
    // one member μ: M_1 = min_x m(x)/μ(x) over its support
    let space = Arc::new(grid_1d(0.0, 1.0, 10).unwrap());
    let mu = Measure::from_entries(10, [(2, 0.5), (5, 0.05)]).unwrap();
    let fam = labelled(&space, vec![mu]);
    let v = m_p(&fam, 1.0, FunctionClass::All).unwrap().value.to_f64();
    assert!((v - 0.1 / 0.5).abs() <= 1e-12, "{v}");
    // M_2 of a restriction to c cells: (m(A))^{−1}
    let r = labelled(&space, vec![restriction(&space, 0..4).unwrap()]);
    let v2 = m_p(&r, 2.0, FunctionClass::All).unwrap().value.to_f64();
    assert!((v2 - 1.0 / 0.4).abs() <= 1e-5, "{v2}");
}
