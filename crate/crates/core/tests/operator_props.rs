use doublephase_core::mesh::{build_rect_mesh, VALUE_RULE};
use doublephase_core::nonvar::monotonicity_parts;
use doublephase_core::operator::{
    apply_t, energy_l, energy_phi, energy_psi, grad_l, grad_phi, grad_psi, ineq_kernel_36, ineq_kernel_37, pairing,
    Nonlinearity,
};
use doublephase_core::{parse_expr, DiscreteFunction, DoublePhase, Mesh, Reaction, SampledField, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mesh() -> Mesh {
    build_rect_mesh(0.0, 0.0, 1.0, 1.0, 7, 7).unwrap()
}

fn fields(m: &Mesh) -> (DoublePhase, Reaction) {
    let dp = DoublePhase::sample(
        m,
        &ScalarField::parse("p", "2.3 + 0.2*sin(2*x)").unwrap(),
        &ScalarField::parse("q", "2.8 + 0.1*y").unwrap(),
        &ScalarField::parse("mu", "0.5 + x*y").unwrap(),
    )
    .unwrap();
    let re = Reaction::sample(
        m,
        &ScalarField::constant("alpha", 1.5),
        &ScalarField::parse("gamma", "1 + 0.2*x").unwrap(),
        &ScalarField::parse("r", "2.4 + 0.3*cos(y)").unwrap(),
    )
    .unwrap();
    (dp, re)
}

fn random_zero_trace<'m>(m: &'m Mesh, amp: f64, rng: &mut impl Rng) -> DiscreteFunction<'m> {
    let vals = (0..m.num_vertices()).map(|_| amp * rng.gen_range(-1.0..1.0)).collect();
    let mut u = DiscreteFunction::from_values(m, vals).unwrap();
    u.apply_dirichlet();
    u
}

/// Central-difference check of `grad` against `value` at 20 seeded points.
fn fd_check<'m>(
    m: &'m Mesh,
    seed: u64,
    value: impl Fn(&DiscreteFunction<'m>) -> f64,
    grad: impl Fn(&DiscreteFunction<'m>) -> Vec<f64>,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let u = random_zero_trace(m, 2.0, &mut rng);
        let v = random_zero_trace(m, 1.0, &mut rng);
        let norm = u.values().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let h = 1e-6 * (1.0 + norm);
        let g = pairing(&grad(&u), v.values());
        let fd = (value(&u.axpy(h, &v)) - value(&u.axpy(-h, &v))) / (2.0 * h);
        worst = worst.max((g - fd).abs() / (1.0 + g.abs()));
    }
    worst
}

#[test]
fn phi_derivative_matches_central_differences() {
    let m = mesh();
    let (dp, _) = fields(&m);
    let err = fd_check(&m, 1, |u| energy_phi(u, &dp), |u| grad_phi(u, &dp));
    assert!(err < 1e-5, "{err}");
    // Exponents below 2 as well.
    let low = DoublePhase::constant(&m, 1.5, 1.8, 2.0).unwrap();
    let err = fd_check(&m, 2, |u| energy_phi(u, &low), |u| grad_phi(u, &low));
    assert!(err < 1e-5, "{err}");
}

#[test]
fn l_derivative_matches_central_differences() {
    let m = mesh();
    let (_, re) = fields(&m);
    let err = fd_check(&m, 3, |u| energy_l(u, &re), |u| grad_l(u, &re));
    assert!(err < 1e-5, "{err}");
}

#[test]
fn psi_derivative_matches_central_differences() {
    let m = mesh();
    let s = SampledField::sample(&ScalarField::parse("s", "1.5 + 0.3*x").unwrap(), &m).unwrap();
    let nl = Nonlinearity::paper_f1(1.0, 1.0, s.clone()).unwrap();
    let err = fd_check(&m, 4, |u| energy_psi(u, &nl).unwrap(), |u| grad_psi(u, &nl).unwrap());
    assert!(err < 1e-5, "{err}");
    // Polynomial expression: Simpson is exact, so the primitive is smooth in t.
    let e = parse_expr("(1 + x) * t^3 - y * t + 0.5").unwrap();
    let nl = Nonlinearity::expression(e, (1.0, 2.0), s);
    let err = fd_check(&m, 5, |u| energy_psi(u, &nl).unwrap(), |u| grad_psi(u, &nl).unwrap());
    assert!(err < 1e-5, "{err}");
}

#[test]
fn zero_map_and_baselines() {
    let m = mesh();
    let (dp, re) = fields(&m);
    let z = DiscreteFunction::zeros(&m);
    assert!(apply_t(&z, &dp, &re).iter().all(|&v| v == 0.0));
    assert_eq!(energy_phi(&z, &dp), 0.0);
    let s = SampledField::constant("s", &m, 1.5);
    let nl = Nonlinearity::paper_f1(1.0, 1.0, s).unwrap();
    assert_eq!(energy_psi(&z, &nl).unwrap(), 0.0);
}

#[test]
fn psi_with_constant_f_is_the_integral() {
    let m = mesh();
    let nl = Nonlinearity::paper_f1(1.0, 0.0, SampledField::constant("s", &m, 1.5)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u = random_zero_trace(&m, 1.0, &mut rng);
    let integral: f64 = m
        .geometry()
        .iter()
        .enumerate()
        .map(|(t, g)| g.area * (0..3).map(|k| u.values()[m.triangles()[t][k]]).sum::<f64>() / 3.0)
        .sum();
    assert!((energy_psi(&u, &nl).unwrap() - integral).abs() < 1e-12);
    let a = energy_psi(&u.scaled(2.0), &nl).unwrap();
    assert!((a - 2.0 * integral).abs() < 1e-12);
}

#[test]
fn well_derivative_matches_direct_loop() {
    // r = 2, gamma = 1, alpha = 1: int (u^2/2 - 1) u phi_i, assembled vertex by vertex.
    let m = build_rect_mesh(0.0, 0.0, 1.0, 1.0, 4, 4).unwrap();
    let re = Reaction::constant(&m, 1.0, 1.0, 2.0).unwrap();
    let u = DiscreteFunction::interpolate_zero_trace(&m, |p| 3.0 * p[0] * (1.0 - p[0]) + p[1]);
    let g = grad_l(&u, &re);
    for i in m.free_vertices() {
        let mut want = 0.0;
        for (t, tri) in m.triangles().iter().enumerate() {
            let Some(j) = tri.iter().position(|&v| v == i) else { continue };
            for &(b, w) in VALUE_RULE.points() {
                let v = u.value_at(t, b);
                want += m.geometry()[t].area * w * (v * v / 2.0 - 1.0) * v * b[j];
            }
        }
        assert!((g[i] - want).abs() < 1e-12);
    }
}

#[test]
fn degenerate_operator_is_the_p_laplacian() {
    let m = mesh();
    let p = ScalarField::parse("p", "2.3 + 0.2*sin(2*x)").unwrap();
    let dp = DoublePhase::sample(&m, &p, &ScalarField::constant("q", 3.0), &ScalarField::constant("mu", 0.0)).unwrap();
    let re = Reaction::none(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let u = random_zero_trace(&m, 1.0, &mut rng);
    // Direct flux assembly of |grad u|^{p-2} grad u . grad phi_i.
    let mut want = vec![0.0; m.num_vertices()];
    for (t, (tri, geo)) in m.triangles().iter().zip(m.geometry()).enumerate() {
        let d = u.element_gradient(t);
        let n = d[0].hypot(d[1]);
        let c = if n == 0.0 { 0.0 } else { n.powf(dp.p.centroid[t] - 2.0) };
        for &v in tri {
            let mut e = vec![0.0; m.num_vertices()];
            e[v] = 1.0;
            let gi = DiscreteFunction::from_values(&m, e).unwrap().element_gradient(t);
            want[v] += geo.area * c * (d[0] * gi[0] + d[1] * gi[1]);
        }
    }
    let got = apply_t(&u, &dp, &re);
    for i in m.free_vertices() {
        assert!((got[i] - want[i]).abs() < 1e-12);
    }
}

fn random_vec(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.gen_range(-3.0..2.0));
    (0..dim).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn kernel_examples() {
    assert!((ineq_kernel_36(&[1.0, 0.0], &[0.0, 0.0], 2.0) - 3.0).abs() < 1e-15);
    assert!(ineq_kernel_36(&[0.3, -2.0], &[0.3, -2.0], 2.5) >= 0.0);
    assert!((ineq_kernel_37(&[1.0, 0.0], &[-1.0, 0.0], 2.0) - 3.0).abs() < 1e-15);
    assert_eq!(ineq_kernel_37(&[0.4, 0.1], &[0.4, 0.1], 2.8), 0.0);
}

#[test]
fn kernel_36_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    for &mm in &[1.5, 2.0, 2.5, 2.8] {
        for _ in 0..100_000 {
            let dim = rng.gen_range(1..4);
            let a = random_vec(&mut rng, dim);
            let b = if rng.gen_bool(0.1) { a.clone() } else { random_vec(&mut rng, dim) };
            let s = ineq_kernel_36(&a, &b, mm);
            assert!(s >= -1e-12, "m={mm} a={a:?} b={b:?} slack={s}");
        }
    }
}

#[test]
fn kernel_37_sweep_for_s_at_least_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for &s in &[2.0, 2.5, 2.8] {
        for _ in 0..100_000 {
            let dim = rng.gen_range(1..4);
            let x = random_vec(&mut rng, dim);
            let y = random_vec(&mut rng, dim);
            let v = ineq_kernel_37(&x, &y, s);
            assert!(v >= -1e-12, "s={s} x={x:?} y={y:?} slack={v}");
        }
    }
}

#[test]
fn kernel_37_fails_below_two() {
    // Nearby points far from the origin: the left side scales like |x-y|^2.
    let v = ineq_kernel_37(&[10.0, 0.0], &[10.01, 0.0], 1.5);
    assert!(v < 0.0);
}

#[test]
fn phi_part_is_monotone_on_random_pairs() {
    let m = mesh();
    let (dp, re) = fields(&m);
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for _ in 0..500 {
        let amp = 10f64.powf(rng.gen_range(-2.0..1.0));
        let u = random_zero_trace(&m, amp, &mut rng);
        let v = random_zero_trace(&m, amp, &mut rng);
        let parts = monotonicity_parts(&u, &v, &dp, &re);
        assert!(parts.phi >= -1e-10, "{}", parts.phi);
        assert!(parts.l.is_finite());
    }
}

#[test]
fn well_part_is_not_monotone_at_small_amplitude() {
    let m = build_rect_mesh(0.0, 0.0, 1.0, 1.0, 4, 4).unwrap();
    let re = Reaction::constant(&m, 1.0, 1.0, 2.0).unwrap();
    let dp = DoublePhase::constant(&m, 2.0, 3.0, 0.0).unwrap();
    let u = DiscreteFunction::interpolate_zero_trace(&m, |_| 0.1);
    let parts = monotonicity_parts(&u, &DiscreteFunction::zeros(&m), &dp, &re);
    assert!(parts.l < 0.0);
    assert!(parts.phi > 0.0);
}
