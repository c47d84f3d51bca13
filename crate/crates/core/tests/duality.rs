use modlab_core::content::{ct_increasing_limit, ct_p, duality_gap, Gap};
use modlab_core::modulus::{am_bracket, m_p, FunctionClass};
use modlab_core::random::{random_family, random_nested, rng, RandomShape};
use modlab_core::ExtendedValue;

#[test]
fn random_p1_duality_and_certificates() {
    for seed in 0..50u64 {
        let family = random_family(&mut rng(seed), RandomShape::default()).unwrap();
        let d = duality_gap(&family, 1.0).unwrap();
        let m = d.modulus.value.as_finite().unwrap();
        let c = d.content.value.as_finite().unwrap();
        assert!(c <= m + 1e-9 * m.max(1.0), "seed {seed}: weak duality {c} > {m}");
        assert!(d.gap.value() <= 1e-6 * m.max(1.0), "seed {seed}: {:?}", d.gap);
        assert!(d.cross_check <= 1e-7, "seed {seed}: cross check {}", d.cross_check);
        assert!(d.content.constraint_residual <= 1e-8);
    }
}

#[test]
fn random_p2_duality() {
    for seed in 100..120u64 {
        let family = random_family(&mut rng(seed), RandomShape::default()).unwrap();
        let d = duality_gap(&family, 2.0).unwrap();
        assert!(matches!(d.gap, Gap::Finite(g) if g <= 1e-3), "seed {seed}: {:?}", d.gap);
    }
}

#[test]
fn other_exponents_agree() {
    for (seed, p) in [(7u64, 1.5), (8, 3.0), (9, 1.2)] {
        let shape = RandomShape { max_points: 15, max_members: 10, max_support: 5 };
        let family = random_family(&mut rng(seed), shape).unwrap();
        let d = duality_gap(&family, p).unwrap();
        assert!(d.gap.value() <= 1e-4, "p = {p}: {:?}", d.gap);
    }
}

#[test]
fn saturated_point_exists() {
    // complementary slackness: the optimal barycenter density reaches 1 somewhere
    for seed in 200..230u64 {
        let family = random_family(&mut rng(seed), RandomShape::default()).unwrap();
        let c = ct_p(&family, 1.0).unwrap();
        let plan = c.plan.unwrap();
        let bary = modlab_core::content::barycenter(&plan, &family).unwrap();
        let mass = family.space().mass();
        let sup = bary.entries().iter().map(|&(i, b)| b / mass[i]).fold(0.0, f64::max);
        assert!((sup - 1.0).abs() <= 1e-8, "seed {seed}: {sup}");
    }
}

#[test]
fn nested_sequences_content_limit() {
    for seed in 0..20u64 {
        let seq = random_nested(&mut rng(seed), 25, 6).unwrap();
        let r = ct_increasing_limit(&seq, 6, 1.0).unwrap();
        assert!(r.difference <= 1e-8, "seed {seed}: {}", r.difference);
        let b = am_bracket(&seq, 6).unwrap();
        let (lo, hi) = (b.lower.as_finite().unwrap(), b.upper.as_finite().unwrap());
        assert!((lo - hi).abs() <= 1e-6 * hi.max(1.0));
    }
}

#[test]
fn zero_member_both_infinite() {
    let mut family = random_family(&mut rng(5), RandomShape::default()).unwrap();
    let n = family.space().len();
    family.push("zero", modlab_core::measures::Measure::zero(n)).unwrap();
    let d = duality_gap(&family, 1.0).unwrap();
    assert_eq!(d.gap, Gap::MatchedInfinite);
    assert_eq!(m_p(&family, 2.0, FunctionClass::All).unwrap().value, ExtendedValue::Infinity);
}
