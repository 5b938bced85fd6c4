use doublephase_core::mesh::{build_rect_mesh, integrate, VALUE_RULE};
use doublephase_core::modular::{
    check_section2_props, luxemburg_norm, modular_h, modular_px, norm_h, norm_px, norm_w1h0, notation_pow, Bracket,
    ModularMode, ModularSamples, PROPERTY_IDS,
};
use doublephase_core::{DiscreteFunction, DoublePhase, Mesh, SampledField, ScalarField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn square(n: usize) -> Mesh {
    build_rect_mesh(0.0, 0.0, 1.0, 1.0, n, n).unwrap()
}

fn variable_dp(m: &Mesh) -> DoublePhase {
    DoublePhase::sample(
        m,
        &ScalarField::parse("p", "2.2 + 0.3*sin(3*x)").unwrap(),
        &ScalarField::parse("q", "2.9 + 0.2*cos(2*y)").unwrap(),
        &ScalarField::parse("mu", "1 + 0.5*sin(x*y)").unwrap(),
    )
    .unwrap()
}

fn random_field<'m>(m: &'m Mesh, rng: &mut impl Rng) -> DiscreteFunction<'m> {
    let amp = 10f64.powf(rng.gen_range(-2.0..2.0));
    let vals = (0..m.num_vertices()).map(|_| amp * rng.gen_range(-1.0..1.0)).collect();
    DiscreteFunction::from_values(m, vals).unwrap()
}

/// `(int |u|^p)^{1/p}` by direct quadrature of the P1 function.
fn classical_lp(u: &DiscreteFunction<'_>, p: f64) -> f64 {
    let rho = integrate(u.mesh(), VALUE_RULE, |x, _| u.eval_point(x).unwrap().abs().powf(p)).unwrap();
    rho.powf(1.0 / p)
}

#[test]
fn notation_examples() {
    assert_eq!(notation_pow(0.5, 1.0, 2.0, Bracket::Join).unwrap(), 0.5);
    assert_eq!(notation_pow(0.5, 1.0, 2.0, Bracket::Meet).unwrap(), 0.25);
    assert_eq!(notation_pow(2.0, 1.0, 2.0, Bracket::Join).unwrap(), 4.0);
    assert_eq!(notation_pow(2.0, 1.0, 2.0, Bracket::Meet).unwrap(), 2.0);
    assert_eq!(notation_pow(1.0, 1.3, 7.0, Bracket::Join).unwrap(), 1.0);
    assert_eq!(notation_pow(1.0, 1.3, 7.0, Bracket::Meet).unwrap(), 1.0);
    assert!(notation_pow(-0.1, 1.0, 2.0, Bracket::Join).is_err());
}

proptest! {
    #[test]
    fn join_and_meet_are_max_and_min(t in 1e-3f64..1e3, a in 0.5f64..4.0, b in 0.5f64..4.0) {
        let j = notation_pow(t, a, b, Bracket::Join).unwrap();
        let m = notation_pow(t, a, b, Bracket::Meet).unwrap();
        let (hi, lo) = (t.powf(a).max(t.powf(b)), t.powf(a).min(t.powf(b)));
        prop_assert!((j - hi).abs() <= 1e-14 * hi);
        prop_assert!((m - lo).abs() <= 1e-14 * lo);
    }
}

#[test]
fn modular_examples() {
    let m = square(4);
    let two = DiscreteFunction::interpolate(&m, |_| 2.0);
    let p2 = SampledField::constant("p", &m, 2.0);
    assert!((modular_px(&two, &p2) - 4.0).abs() < 1e-10);
    assert_eq!(modular_px(&DiscreteFunction::zeros(&m), &p2), 0.0);
    let x = DiscreteFunction::interpolate(&m, |p| p[0]);
    assert!((modular_px(&x, &p2) - 1.0 / 3.0).abs() < 1e-12);

    let one = DiscreteFunction::interpolate(&m, |_| 1.0);
    let dp = DoublePhase::constant(&m, 2.5, 2.8, 1.0).unwrap();
    assert!((modular_h(&one, ModularMode::Value, &dp) - 2.0).abs() < 1e-10);
    let dp23 = DoublePhase::constant(&m, 2.0, 3.0, 1.0).unwrap();
    assert!((modular_h(&x, ModularMode::Gradient, &dp23) - 2.0).abs() < 1e-12);
}

#[test]
fn mu_zero_reduces_bitwise() {
    let m = square(6);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = ScalarField::parse("p", "2 + 0.5*x*y").unwrap();
    let dp = DoublePhase::sample(&m, &p, &ScalarField::constant("q", 3.1), &ScalarField::constant("mu", 0.0)).unwrap();
    for _ in 0..20 {
        let u = random_field(&m, &mut rng);
        assert_eq!(modular_h(&u, ModularMode::Value, &dp).to_bits(), modular_px(&u, &dp.p).to_bits());
    }
}

#[test]
fn constant_exponent_norms_match_classical_lp() {
    let m = square(8);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..100 {
        let p = [1.5, 2.0, 2.5, 3.0][i % 4];
        let pf = SampledField::constant("p", &m, p);
        let u = random_field(&m, &mut rng);
        let got = norm_px(&u, &pf).unwrap();
        let want = classical_lp(&u, p);
        assert!((got - want).abs() <= 1e-8 * want.max(1.0), "p={p}: {got} vs {want}");
    }
}

#[test]
fn plastic_number_norm() {
    // rho(1/z) = z^-2 + z^-3 = 1, solved independently by scalar bisection.
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid.powi(3) - mid - 1.0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let m = square(3);
    let dp = DoublePhase::constant(&m, 2.0, 3.0, 1.0).unwrap();
    let one = DiscreteFunction::interpolate(&m, |_| 1.0);
    let z = norm_h(&one, ModularMode::Value, &dp).unwrap();
    assert!((z - lo).abs() < 1e-6);
    assert!((z - 1.324_717_9).abs() < 1e-6);
}

#[test]
fn gradient_norm_examples() {
    let m = square(5);
    let dp = DoublePhase::constant(&m, 2.0, 3.0, 0.0).unwrap();
    assert_eq!(norm_w1h0(&DiscreteFunction::zeros(&m), &dp).unwrap(), 0.0);
    let x = DiscreteFunction::interpolate(&m, |p| p[0]);
    assert!((norm_w1h0(&x, &dp).unwrap() - 1.0).abs() < 1e-8);
    let u = DiscreteFunction::interpolate_zero_trace(&m, |p| (p[0] * 3.0).sin() * p[1]);
    let a = norm_w1h0(&u, &dp).unwrap();
    let b = norm_w1h0(&u.scaled(2.0), &dp).unwrap();
    assert!((b - 2.0 * a).abs() < 1e-8 * b);
}

#[test]
fn property_examples() {
    let m = square(6);
    let dp = variable_dp(&m);
    let u = DiscreteFunction::interpolate(&m, |p| 1.0 + p[0] * p[1]);
    let n = norm_h(&u, ModularMode::Value, &dp).unwrap();
    assert!((modular_h(&u.scaled(1.0 / n), ModularMode::Value, &dp) - 1.0).abs() < 1e-6);

    let big = u.scaled(5.0);
    let r = &check_section2_props(std::slice::from_ref(&big), &dp)[0];
    assert!(r.norm > 1.0);
    let c = r.checks.iter().find(|c| c.id == "h_large_norm_bounds").unwrap();
    assert!(c.applicable && c.slack >= 0.0);

    // Constant outer power with p1 = 2.
    let px = ModularSamples::variable_exponent(&u, &dp.p);
    let lhs = luxemburg_norm(&px.powered(2.0)).unwrap();
    let rhs = luxemburg_norm(&px.exponents_scaled(2.0)).unwrap();
    assert!((lhs - rhs * rhs).abs() < 1e-7);
}

#[test]
fn zero_sample_has_no_checks() {
    let m = square(3);
    let dp = variable_dp(&m);
    let r = &check_section2_props(&[DiscreteFunction::zeros(&m)], &dp)[0];
    assert_eq!((r.rho, r.norm), (0.0, 0.0));
    assert!(r.checks.is_empty());
}

#[test]
fn random_fields_satisfy_all_relations() {
    let m = square(6);
    let dp = variable_dp(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let samples: Vec<_> = (0..200).map(|_| random_field(&m, &mut rng)).collect();
    for (i, r) in check_section2_props(&samples, &dp).iter().enumerate() {
        assert_eq!(r.rho > 0.0, r.norm > 0.0);
        assert_eq!(r.checks.len(), PROPERTY_IDS.len());
        for c in &r.checks {
            assert!(c.holds, "sample {i} {}: slack {}", c.id, c.slack);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unit_modular_identity_and_zeta_monotonicity(seed in any::<u64>(), grad in any::<bool>()) {
        let m = square(5);
        let dp = variable_dp(&m);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = random_field(&m, &mut rng);
        u.apply_dirichlet();
        prop_assume!(!u.is_zero());
        let mode = if grad { ModularMode::Gradient } else { ModularMode::Value };
        let s = ModularSamples::double_phase(&u, mode, &dp);
        let n = luxemburg_norm(&s).unwrap();
        prop_assert!((s.rho_scaled(n) - 1.0).abs() <= 1e-8);
        let zetas: Vec<f64> = (0..40).map(|k| n * 2f64.powf((k as f64 - 20.0) / 4.0)).collect();
        for w in zetas.windows(2) {
            prop_assert!(s.rho_scaled(w[1]) < s.rho_scaled(w[0]));
        }
    }
}
