mod common;

use std::sync::Arc;

use modlab_core::content::ct_increasing_limit;
use modlab_core::counterexamples::{
    construction_families, construction_witness, interval_family, nonincr_measures_family, nonouter_experiment,
    radial_family, spiky_space, RadialGrid,
};
use modlab_core::modulus::{check_admissible_sequence, eta, is_admissible, m_p, omega, DensityFunction, FunctionClass};
use modlab_core::space::{doubling_constant, grid_1d, grid_2d, MeasureSpace, Rect};
use modlab_core::Error;

fn line(n: usize) -> Arc<MeasureSpace> {
    Arc::new(grid_1d(0.0, 1.0, n).unwrap())
}

fn disc_grid(n: usize) -> Arc<MeasureSpace> {
    Arc::new(grid_2d(Rect::square(-1.0, 1.0), n, n).unwrap())
}

#[test]
fn flat_density_is_an_optimal_interval_minimizer() {
    let space = line(4096);
    let h = 1.0 / 4096.0;
    for k in 1..=10 {
        let family = interval_family(k, &space).unwrap();
        let value = m_p(&family, 1.0, FunctionClass::All).unwrap().value.to_f64();
        assert!((value - 1.0).abs() <= 1e-9, "k = {k}: {value}");
        let cells = 4096 >> k;
        let flat: Vec<f64> = (0..4096).map(|i| if i < cells { 2f64.powi(k as i32) } else { 0.0 }).collect();
        let flat = DensityFunction::new(flat).unwrap();
        assert!(is_admissible(&flat, &family, 1e-12).unwrap().admissible, "k = {k}");
        let cost = flat.p_energy(&space, 1.0).unwrap();
        assert!((cost / value - 1.0).abs() <= 1e-12, "k = {k}: {cost}");
        assert!((flat.sup() * 0.5f64.powi(k as i32) - 1.0).abs() <= 1e-12);
        assert!(cells as f64 * h >= 0.5f64.powi(k as i32) - 1e-15);
    }
    assert!(matches!(interval_family(13, &space), Err(Error::TooFineK { .. })));
}

#[test]
fn rescaled_bumps_are_admissible_on_intervals() {
    // ρ_k(x) = 2^k η(2^k x) has unit mass on every [0, r] with r ≥ 2^{−k−1}
    let space = line(4096);
    for k in 1..=8 {
        let family = interval_family(k, &space).unwrap();
        let s = 2f64.powi(k as i32);
        let rho = DensityFunction::from_fn(&space, |x| s * eta(s * x[0])).unwrap();
        let report = is_admissible(&rho, &family, 1e-3).unwrap();
        assert!(report.admissible, "k = {k}: margin {}", report.min_margin());
        assert!((rho.p_energy(&space, 1.0).unwrap() - 1.0).abs() <= 1e-3);
    }
}

#[test]
fn nonouter_counts_disjoint_members() {
    let space = line(2048);
    for j in 1..=4 {
        let r = nonouter_experiment(&space, 0.5, j).unwrap();
        assert!((r.base_value - 1.0).abs() <= 1e-9);
        assert_eq!(r.expected, (j + 1) as f64);
        assert!((r.value - r.expected).abs() <= 1e-9, "j = {j}: {}", r.value);
    }
}

#[test]
fn radial_values_shrink_with_the_grid() {
    let grid = RadialGrid { directions: 16, subdivisions: 2 };
    let values: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&n| m_p(&radial_family(2, &disc_grid(n), grid).unwrap(), 1.0, FunctionClass::All).unwrap().value.to_f64())
        .collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{values:?}");
}

#[test]
fn radial_values_grow_with_k() {
    let space = disc_grid(32);
    let grid = RadialGrid { directions: 16, subdivisions: 2 };
    let mut prev = 0.0;
    for k in 1..=4 {
        let family = radial_family(k, &space, grid).unwrap();
        let v = m_p(&family, 1.0, FunctionClass::All).unwrap().value.to_f64();
        assert!(v >= prev - 1e-9, "k = {k}: {v} < {prev}");
        prev = v;
    }
    // the Lipschitz class only adds constraints
    let coarse = disc_grid(12);
    let mut prev = 0.0;
    for k in 1..=3 {
        let family = radial_family(k, &coarse, grid).unwrap();
        let v = m_p(&family, 1.0, FunctionClass::All).unwrap().value.to_f64();
        let lip = m_p(&family, 1.0, FunctionClass::Lipschitz(24.0)).unwrap().value.to_f64();
        assert!(lip >= v - 1e-9 && lip >= prev - 1e-9, "k = {k}: {lip} vs {v}, {prev}");
        prev = lip;
    }
}

#[test]
fn mollifiers_are_admissible_on_radial_paths() {
    // ρ_j(x) = j ω(j|x|) integrates to 1 along every segment from 0 of length ≥ 1/j
    let space = disc_grid(128);
    let grid = RadialGrid { directions: 16, subdivisions: 2 };
    let k = 2;
    let family = radial_family(k, &space, grid).unwrap();
    let seq: Vec<DensityFunction> = (1..=6)
        .map(|j| {
            let j = j as f64;
            DensityFunction::from_fn(&space, |x| j * omega(j * x[0].hypot(x[1]))).unwrap()
        })
        .collect();
    let report = check_admissible_sequence(&seq, &family, k - 1, 0.05).unwrap();
    assert!(report.admissible, "{:?}", report.tail_minimum);
    // costs 2π/j ∫ ω(s) s ds = π/j
    let costs: Vec<f64> = seq.iter().map(|r| r.p_energy(&space, 1.0).unwrap()).collect();
    for (j, c) in costs.iter().enumerate() {
        let target = std::f64::consts::PI / (j + 1) as f64;
        assert!((c - target).abs() <= 0.02 * target, "j = {}: {c} vs {target}", j + 1);
    }
}

#[test]
fn spiky_doubling_matches_oracle() {
    let sp = spiky_space(3, 3, 9).unwrap();
    let space = sp.system.space();
    let coords: Vec<Vec<f64>> = (0..space.len()).map(|i| space.coord(i).unwrap().to_vec()).collect();
    let radii = modlab_core::counterexamples::spiky_radii(3, 3);
    let oracle = common::doubling_oracle(&coords, space.mass(), &radii);
    assert!((sp.doubling.constant - oracle).abs() <= 1e-9 * oracle, "{} vs {oracle}", sp.doubling.constant);
}

#[test]
fn grid_doubling_matches_oracle() {
    let space = grid_1d(0.0, 1.0, 40).unwrap();
    let coords: Vec<Vec<f64>> = (0..40).map(|i| space.coord(i).unwrap().to_vec()).collect();
    let radii: Vec<f64> = (1..8).map(|k| 0.5f64.powi(k)).collect();
    let got = doubling_constant(&space, &radii).unwrap().constant;
    let oracle = common::doubling_oracle(&coords, space.mass(), &radii);
    assert!((got - oracle).abs() <= 1e-12 * oracle && got <= 3.0 + 1e-12, "{got} vs {oracle}");
}

#[test]
fn construction_families_have_cheap_admissible_density() {
    let sp = spiky_space(4, 3, 12).unwrap();
    let system = &sp.system;
    let seq = construction_families(system, &system.default_index_sequences()).unwrap();
    // every member contains the deepest set of the last segment
    let g = system.g(system.count(), system.depth()).unwrap();
    for m in 1..=system.count() {
        let family = seq.family(m).unwrap();
        assert!(is_admissible(&g, family, 1e-12).unwrap().admissible);
        let v = m_p(family, 1.0, FunctionClass::All).unwrap().value.to_f64();
        assert!(v <= 1.0 + 1e-9, "m = {m}: {v}");
    }
    let limit = ct_increasing_limit(&seq, system.count(), 1.0).unwrap();
    assert!(limit.values.windows(2).all(|w| w[0].to_f64() <= w[1].to_f64() + 1e-9));
    assert!(limit.difference <= 1e-8);
}

#[test]
fn witness_members_have_expected_mass() {
    let sp = spiky_space(3, 4, 16).unwrap();
    let system = &sp.system;
    for start in 1..=3 {
        let s = vec![2, 3, 4];
        let mu = system.h_measure(start, &s).unwrap();
        let expected: f64 = (start..=3).map(|n| system.mass(n, s[n - 1]).unwrap()).sum();
        assert!((mu.total() - expected).abs() <= 1e-14);
    }
}

#[test]
fn prime_power_system() {
    let space = line(12);
    let sets: Vec<Vec<usize>> = (0..12).map(|i| vec![i]).collect();
    // p_2 = 3 and 3^2 = 9 sets are needed
    let (system, seq) = nonincr_measures_family(space.clone(), &sets[..9], 2, 2).unwrap();
    assert_eq!(system.set(1, 1).unwrap(), &[1, 3, 7]);
    assert_eq!(system.set(1, 2).unwrap(), &[3, 7]);
    assert_eq!(system.set(2, 1).unwrap(), &[2, 8]);
    assert_eq!(system.set(2, 2).unwrap(), &[8]);
    seq.verify_monotone(2).unwrap();
    assert!(matches!(
        nonincr_measures_family(space, &sets[..8], 2, 2),
        Err(Error::InsufficientSets { needed: 9, available: 8 })
    ));
}

#[test]
fn heavy_candidates_are_rejected() {
    let sp = spiky_space(3, 3, 9).unwrap();
    let total = sp.system.space().total_mass();
    let eps = 0.1;
    let h = vec![DensityFunction::constant(sp.system.space().len(), 2.0 * (1.0 - eps) / total).unwrap()];
    assert!(matches!(construction_witness(&sp.system, &h, eps), Err(Error::RejectInput(_))));
    let light = vec![DensityFunction::constant(sp.system.space().len(), 1.7 / total).unwrap()];
    assert!(construction_witness(&sp.system, &light, eps).is_ok());
}
