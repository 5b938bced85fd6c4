//! Standing hypotheses on field data and the analytic constants of the
//! parametric existence argument.
//!
//! `N` here is the analytic dimension; it enters formulas only. The meshes
//! are always planar.

use alloc::vec::Vec;

use rand::Rng;

use crate::expr::{extrema_of, field_extrema, DomainSpec, Env, Expr, ExtremaError, ScalarField};
use crate::field::{DoublePhase, SampledField};
use crate::math;
use crate::mesh::{DiscreteFunction, Mesh};
use crate::modular::{luxemburg_norm, norm_w1h0, notation_pow, Bracket, ModularSamples};
use crate::operator::Nonlinearity;

/// `N p / (N - p)` for `p < N`, `+inf` otherwise.
pub fn sobolev_conjugate(p: f64, n: u32) -> f64 {
    let nf = n as f64;
    if p < nf {
        nf * p / (nf - p)
    } else {
        f64::INFINITY
    }
}

/// Volume of the unit ball, `pi^{N/2} / ((N/2) Gamma(N/2))`.
pub fn unit_ball_volume(n: u32) -> f64 {
    let h = 0.5 * n as f64;
    math::powf(core::f64::consts::PI, h) / (h * math::gamma(h))
}

/// Upper bound on the plateau height of the cut-off:
/// `min{1, (p- / ((1 + |mu|) omega_N (R^N - (R/2)^N) (2/R)^{p- v q+}))^{1/p-}}`.
pub fn r_lambda_bound(p_minus: f64, q_plus: f64, mu_sup: f64, radius: f64, n: u32) -> f64 {
    let nf = n as f64;
    let shell = unit_ball_volume(n) * (math::powf(radius, nf) - math::powf(0.5 * radius, nf));
    let join = notation_pow(2.0 / radius, p_minus, q_plus, Bracket::Join).expect("radius > 0");
    let inner = p_minus / ((1.0 + mu_sup) * shell * join);
    1f64.min(math::powf(inner, 1.0 / p_minus))
}

/// `1 / (c1 c_H (q+)^{1/p-} + c2 c_H^{s+} (q+)^{s+/p-})`.
pub fn lambda_star(c1_hat: f64, c2_hat: f64, c_h: f64, s_plus: f64, p_minus: f64, q_plus: f64) -> f64 {
    1.0 / (c1_hat * c_h * math::powf(q_plus, 1.0 / p_minus)
        + c2_hat * math::powf(c_h, s_plus) * math::powf(q_plus, s_plus / p_minus))
}

/// How the exponent of `(2 r_lambda / R)` in the energy ratio is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentConvention {
    /// `max(p-, q+)` regardless of the base, as in the worked example.
    WorkedExample,
    /// The bracket join `t^{p- v q+}`, which is `t^{min}` for `t < 1`.
    Notation,
}

impl ExponentConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            ExponentConvention::WorkedExample => "worked_example",
            ExponentConvention::Notation => "notation",
        }
    }
}

/// Inputs of the constant computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantsInput {
    pub n: u32,
    pub p_minus: f64,
    pub p_plus: f64,
    pub q_minus: f64,
    pub q_plus: f64,
    pub s_plus: f64,
    pub mu_sup: f64,
    pub radius: f64,
    pub r_lambda: f64,
    pub lambda0: f64,
    pub c1_hat: f64,
    pub c2_hat: f64,
    /// Embedding constant, when known or estimated.
    pub c_h: Option<f64>,
}

impl ConstantsInput {
    /// The worked example: `N = 3`, `mu = 1`, `p = 2.5`, `q = 2.8`, `R = 2`,
    /// `r_lambda = 0.2`, `s+ = 1.5`, unit coefficients.
    pub fn worked_example(lambda0: f64) -> Self {
        ConstantsInput {
            n: 3,
            p_minus: 2.5,
            p_plus: 2.5,
            q_minus: 2.8,
            q_plus: 2.8,
            s_plus: 1.5,
            mu_sup: 1.0,
            radius: 2.0,
            r_lambda: 0.2,
            lambda0,
            c1_hat: 1.0,
            c2_hat: 1.0,
            c_h: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    /// No embedding constant available.
    Unknown,
    Nonempty { lower: f64, upper: f64 },
    Empty { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsReport {
    pub input: ConstantsInput,
    pub omega_n: f64,
    pub r_lambda_bound: f64,
    /// `r_lambda < r_lambda_bound`.
    pub r_lambda_admissible: bool,
    /// Lower bound `(lambda0 / p-) r_lambda^{p-}` on `inf_x F(x, r_lambda)`.
    pub f_inf: f64,
    /// `f_inf / lambda0`.
    pub f_inf_coeff: f64,
    pub convention: ExponentConvention,
    /// `p- f_inf / ((1 + |mu|)(2^N - 1)(2 r_lambda / R)^e)` under `convention`.
    pub ratio: f64,
    /// `ratio / lambda0`.
    pub ratio_coeff: f64,
    /// The same ratio under the other convention.
    pub ratio_alt: f64,
    /// Smallest admissible `lambda`: `1 / ratio`.
    pub lambda_lower: f64,
    /// Smallest positive integer with `ratio > 1 / lambda1`.
    pub lambda1: u64,
    /// `lambda0 * lambda1`.
    pub lambda: f64,
    pub c_h: Option<f64>,
    pub lambda_star: Option<f64>,
    pub window: Window,
}

fn ratio_with(input: &ConstantsInput, f_inf: f64, convention: ExponentConvention) -> f64 {
    let t = 2.0 * input.r_lambda / input.radius;
    let pow = match convention {
        ExponentConvention::WorkedExample => math::powf(t, input.p_minus.max(input.q_plus)),
        ExponentConvention::Notation => {
            notation_pow(t, input.p_minus, input.q_plus, Bracket::Join).expect("t >= 0")
        }
    };
    let dim_factor = math::powf(2.0, input.n as f64) - 1.0;
    input.p_minus * f_inf / ((1.0 + input.mu_sup) * dim_factor * pow)
}

/// Computes every constant of the existence argument for `input`.
pub fn constants(input: &ConstantsInput, convention: ExponentConvention) -> ConstantsReport {
    let omega_n = unit_ball_volume(input.n);
    let bound = r_lambda_bound(input.p_minus, input.q_plus, input.mu_sup, input.radius, input.n);
    let f_inf_coeff = math::powf(input.r_lambda, input.p_minus) / input.p_minus;
    let f_inf = input.lambda0 * f_inf_coeff;
    let ratio = ratio_with(input, f_inf, convention);
    let other = match convention {
        ExponentConvention::WorkedExample => ExponentConvention::Notation,
        ExponentConvention::Notation => ExponentConvention::WorkedExample,
    };
    let ratio_alt = ratio_with(input, f_inf, other);
    let lambda_lower = 1.0 / ratio;
    let lambda1 = math::floor(lambda_lower) as u64 + 1;
    let star = input
        .c_h
        .map(|c| lambda_star(input.c1_hat, input.c2_hat, c, input.s_plus, input.p_minus, input.q_plus));
    let window = match star {
        None => Window::Unknown,
        Some(upper) if lambda_lower < upper => Window::Nonempty {
            lower: lambda_lower,
            upper,
        },
        Some(upper) => Window::Empty {
            lower: lambda_lower,
            upper,
        },
    };
    ConstantsReport {
        input: *input,
        omega_n,
        r_lambda_bound: bound,
        r_lambda_admissible: input.r_lambda < bound,
        f_inf,
        f_inf_coeff,
        convention,
        ratio,
        ratio_coeff: ratio / input.lambda0,
        ratio_alt,
        lambda_lower,
        lambda1,
        lambda: input.lambda0 * lambda1 as f64,
        c_h: input.c_h,
        lambda_star: star,
        window,
    }
}

/// The worked example with the given `lambda0`, exponent read as in the
/// example (`(0.2)^{2.8}`).
pub fn example_4_1_constants(lambda0: f64) -> ConstantsReport {
    constants(&ConstantsInput::worked_example(lambda0), ExponentConvention::WorkedExample)
}

/// Result of [`estimate_embedding_constant`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingEstimate {
    /// Largest observed `|u|_{h(x)} / ||u||_{1,H,0}`; a lower bound on the
    /// embedding constant.
    pub value: f64,
    /// Nodal values of the maximizing candidate.
    pub maximizer: Vec<f64>,
}

fn embedding_ratio(u: &DiscreteFunction<'_>, h: &SampledField, dp: &DoublePhase) -> f64 {
    if u.is_zero() {
        return 0.0;
    }
    let num = luxemburg_norm(&ModularSamples::variable_exponent(u, h));
    let den = norm_w1h0(u, dp);
    match (num, den) {
        (Ok(a), Ok(b)) if b > 0.0 && a.is_finite() => a / b,
        _ => 0.0,
    }
}

/// Lower bound on the embedding constant of the zero-trace double-phase
/// Sobolev space into `L^{h(x)}`.
///
/// Candidates: `trials` random interior nodal fields, the field equal to 1 at
/// every interior vertex, the products `sin(k pi x~) sin(l pi y~)` on the
/// bounding box for `k, l` in `1..=2`, and `extra` (nodal vectors, the
/// boundary is zeroed). The best candidate then seeds 20 sweeps of coordinate
/// ascent over the coefficients of the sine products with `k, l <= 3`.
pub fn estimate_embedding_constant<R: Rng + ?Sized>(
    mesh: &Mesh,
    h: &SampledField,
    dp: &DoublePhase,
    trials: usize,
    extra: &[Vec<f64>],
    rng: &mut R,
) -> EmbeddingEstimate {
    let mut best = EmbeddingEstimate {
        value: 0.0,
        maximizer: alloc::vec![0.0; mesh.num_vertices()],
    };
    let consider = |vals: Vec<f64>, best: &mut EmbeddingEstimate| {
        let mut u = DiscreteFunction::from_values(mesh, vals).expect("nodal length");
        u.apply_dirichlet();
        let r = embedding_ratio(&u, h, dp);
        if r > best.value {
            best.value = r;
            best.maximizer = u.into_values();
        }
        r
    };

    consider(alloc::vec![1.0; mesh.num_vertices()], &mut best);
    for _ in 0..trials {
        let vals = (0..mesh.num_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        consider(vals, &mut best);
    }
    for e in extra {
        if e.len() == mesh.num_vertices() {
            consider(e.clone(), &mut best);
        }
    }

    let [x0, y0, x1, y1] = mesh.bounding_box();
    let pi = core::f64::consts::PI;
    let modes: Vec<(usize, usize)> = (1..=3).flat_map(|k| (1..=3).map(move |l| (k, l))).collect();
    let basis: Vec<Vec<f64>> = modes
        .iter()
        .map(|&(k, l)| {
            mesh.vertices()
                .iter()
                .map(|v| {
                    math::sin(k as f64 * pi * (v[0] - x0) / (x1 - x0))
                        * math::sin(l as f64 * pi * (v[1] - y0) / (y1 - y0))
                })
                .collect()
        })
        .collect();
    let combine = |c: &[f64]| -> Vec<f64> {
        let mut v = alloc::vec![0.0; mesh.num_vertices()];
        for (ci, b) in c.iter().zip(&basis) {
            if *ci != 0.0 {
                for (a, bv) in v.iter_mut().zip(b) {
                    *a += ci * bv;
                }
            }
        }
        v
    };

    let mut coeffs = alloc::vec![0.0; modes.len()];
    let mut current = 0.0;
    for (i, &(k, l)) in modes.iter().enumerate() {
        if k <= 2 && l <= 2 {
            let mut c = alloc::vec![0.0; modes.len()];
            c[i] = 1.0;
            let r = consider(combine(&c), &mut best);
            if r > current {
                current = r;
                coeffs = c;
            }
        }
    }
    let mut delta = 0.25;
    for _ in 0..20 {
        let mut improved = false;
        for i in 0..coeffs.len() {
            for sign in [1.0, -1.0] {
                let mut c = coeffs.clone();
                c[i] += sign * delta;
                let r = consider(combine(&c), &mut best);
                if r > current {
                    current = r;
                    coeffs = c;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            delta *= 0.5;
        }
    }
    best
}

/// Outcome of a single hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub id: &'static str,
    /// Positive when the hypothesis holds with room to spare.
    pub margin: f64,
    /// Strict inequalities need `margin > 0`, the others `margin >= 0`.
    pub strict: bool,
    pub pass: bool,
}

impl HypothesisCheck {
    fn new(id: &'static str, margin: f64, strict: bool) -> Self {
        let pass = if strict { margin > 0.0 } else { margin >= 0.0 };
        HypothesisCheck {
            id,
            margin,
            strict,
            pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum F2Verdict {
    Pass,
    Fail,
    Undetermined,
}

impl F2Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            F2Verdict::Pass => "pass",
            F2Verdict::Fail => "fail",
            F2Verdict::Undetermined => "undetermined",
        }
    }
}

/// Superlinearity at zero and the growth witness.
#[derive(Debug, Clone, PartialEq)]
pub struct F2Check {
    pub verdict: F2Verdict,
    /// `lambda0` with `F(x, t) >= (lambda0 / p-) t^{p-}` for small `t > 0`.
    pub lambda0: Option<f64>,
}

/// Nonlinearity data for [`check_hypotheses`].
#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearityData<'a> {
    PaperF1 { c1: f64, c2: f64, s: &'a ScalarField },
    Expression { f: &'a Expr, c1: f64, c2: f64, s: &'a ScalarField },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisInput<'a> {
    pub domain: DomainSpec,
    pub n: u32,
    pub p: &'a ScalarField,
    pub q: &'a ScalarField,
    pub mu: &'a ScalarField,
    /// `(alpha, gamma, r)` of the well term.
    pub reaction: Option<(&'a ScalarField, &'a ScalarField, &'a ScalarField)>,
    pub nonlinearity: Option<NonlinearityData<'a>>,
    /// Sampling grid resolution per axis.
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
    pub f2: Option<F2Check>,
    /// Every check passes and `f2` (if present) is not a failure.
    pub pass: bool,
}

impl HypothesisReport {
    pub fn get(&self, id: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.id == id)
    }
}

/// Grid `t = 2^{-k}`, `k = 1..=40`, used for superlinearity at zero.
pub fn f2_grid() -> Vec<f64> {
    (1..=40).map(|k| math::powf(2.0, -(k as f64))).collect()
}

fn f2_expression(f: &Expr, domain: &DomainSpec, p_minus: f64, res: usize) -> Result<F2Check, ExtremaError> {
    let ratios: Vec<f64> = f2_grid()
        .into_iter()
        .map(|t| {
            extrema_of(|x| f.eval(&Env::with_t(x, t)), domain, res)
                .map(|(lo, _)| lo * t / math::powf(t, p_minus))
        })
        .collect::<Result<_, _>>()?;
    let growing = ratios[30..].windows(2).all(|w| w[1] > w[0]);
    let last = ratios[ratios.len() - 1];
    let verdict = if growing && last > 1e6 * ratios[0].abs().max(1.0) {
        F2Verdict::Pass
    } else {
        F2Verdict::Undetermined
    };
    Ok(F2Check {
        verdict,
        lambda0: None,
    })
}

fn minmax(f: &ScalarField, domain: &DomainSpec, res: usize) -> Result<(f64, f64), ExtremaError> {
    field_extrema(f, domain, res)
}

/// Evaluates the standing hypotheses on sampled extrema of the fields.
///
/// Margins (positive means satisfied):
/// `p_cplus = p- - 1`, `q_cplus = q- - 1`, `p_below_q = q- - p+`,
/// `q_below_n = N - q+`, `q_below_pstar = p*(p-) - q+`,
/// `r_below_half_pstar = p*(p-)/2 - r+`, `s_below_p = p- - s+`,
/// `mu_nonneg = mu-`, `alpha_pos = alpha-`, `gamma_pos = gamma-`,
/// `r_cplus = r- - 1`, `s_cplus = s- - 1`, `f1_constants = min(c1, c2)`.
pub fn check_hypotheses(input: &HypothesisInput<'_>) -> Result<HypothesisReport, ExtremaError> {
    let res = input.resolution;
    let (p_lo, p_hi) = minmax(input.p, &input.domain, res)?;
    let (q_lo, q_hi) = minmax(input.q, &input.domain, res)?;
    let (mu_lo, _) = minmax(input.mu, &input.domain, res)?;
    let nf = input.n as f64;
    let pstar_min = sobolev_conjugate(p_lo, input.n);
    let mut checks = alloc::vec![
        HypothesisCheck::new("p_cplus", p_lo - 1.0, true),
        HypothesisCheck::new("q_cplus", q_lo - 1.0, true),
        HypothesisCheck::new("p_below_q", q_lo - p_hi, true),
        HypothesisCheck::new("q_below_n", nf - q_hi, true),
        HypothesisCheck::new("q_below_pstar", pstar_min - q_hi, true),
        HypothesisCheck::new("mu_nonneg", mu_lo, false),
    ];
    if let Some((alpha, gamma, r)) = input.reaction {
        let (a_lo, _) = minmax(alpha, &input.domain, res)?;
        let (g_lo, _) = minmax(gamma, &input.domain, res)?;
        let (r_lo, r_hi) = minmax(r, &input.domain, res)?;
        checks.push(HypothesisCheck::new("r_cplus", r_lo - 1.0, true));
        checks.push(HypothesisCheck::new("r_below_half_pstar", 0.5 * pstar_min - r_hi, true));
        checks.push(HypothesisCheck::new("alpha_pos", a_lo, true));
        checks.push(HypothesisCheck::new("gamma_pos", g_lo, true));
    }
    let mut f2 = None;
    if let Some(nl) = &input.nonlinearity {
        let (c1, c2, s) = match nl {
            NonlinearityData::PaperF1 { c1, c2, s } => (*c1, *c2, *s),
            NonlinearityData::Expression { c1, c2, s, .. } => (*c1, *c2, *s),
        };
        let (s_lo, s_hi) = minmax(s, &input.domain, res)?;
        checks.push(HypothesisCheck::new("s_cplus", s_lo - 1.0, true));
        checks.push(HypothesisCheck::new("s_below_p", p_lo - s_hi, true));
        checks.push(HypothesisCheck::new("f1_constants", c1.min(c2), false));
        f2 = Some(match nl {
            NonlinearityData::PaperF1 { .. } => f2_paper_f1(c1, c2, s_hi, p_lo),
            NonlinearityData::Expression { f, .. } => f2_expression(f, &input.domain, p_lo, res)?,
        });
    }
    let pass = checks.iter().all(|c| c.pass) && f2.as_ref().is_none_or(|f| f.verdict != F2Verdict::Fail);
    Ok(HypothesisReport { checks, f2, pass })
}

/// Superlinearity of `c1 + c2 |t|^{s-2} t` at zero: holds when `c1 > 0`
/// (witness `c1 p-`) or `c2 > 0` and `s+ < p-` (witness `c2 p- / s+`).
pub fn f2_paper_f1(c1: f64, c2: f64, s_plus: f64, p_minus: f64) -> F2Check {
    if c1 > 0.0 {
        F2Check {
            verdict: F2Verdict::Pass,
            lambda0: Some(c1 * p_minus),
        }
    } else if c2 > 0.0 && s_plus < p_minus {
        F2Check {
            verdict: F2Verdict::Pass,
            lambda0: Some(c2 * p_minus / s_plus),
        }
    } else {
        F2Check {
            verdict: F2Verdict::Fail,
            lambda0: None,
        }
    }
}

/// `min (F(x, t) - (lambda0 / p-) t^{p-})` over the quadrature samples of
/// `mesh` and the given `t` values; nonnegative when the growth witness holds.
pub fn growth_witness_slack(
    nl: &Nonlinearity,
    mesh: &Mesh,
    p_minus: f64,
    lambda0: f64,
    ts: &[f64],
) -> Result<f64, crate::operator::NonlinearityError> {
    let mut worst = f64::INFINITY;
    for t in 0..mesh.num_triangles() {
        for (k, &(b, _)) in crate::mesh::VALUE_RULE.points().iter().enumerate() {
            let x = mesh.map_point(t, b);
            let s = nl.s.quad[t][k];
            for &tv in ts {
                let f = nl.primitive(x, s, tv)?;
                worst = worst.min(f - lambda0 / p_minus * math::powf(tv, p_minus));
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_and_ball() {
        assert!((sobolev_conjugate(2.5, 3) - 15.0).abs() < 1e-12);
        assert!(sobolev_conjugate(3.0, 3).is_infinite());
        assert!((sobolev_conjugate(2.0, 4) - 4.0).abs() < 1e-12);
        let pi = core::f64::consts::PI;
        assert!((unit_ball_volume(3) - 4.0 * pi / 3.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - pi).abs() < 1e-12);
        assert!((unit_ball_volume(4) - pi * pi / 2.0).abs() < 1e-12);
    }

    #[test]
    fn r_lambda_examples() {
        let b = r_lambda_bound(2.5, 2.8, 1.0, 2.0, 3);
        assert!((b - 0.2831).abs() < 1e-3, "{}", b);
        assert_eq!(r_lambda_bound(2.5, 2.8, 0.0, 0.01, 4), 1.0);
        assert!(r_lambda_bound(2.5, 2.8, 0.0, 2.0, 3) > b);
    }

    #[test]
    fn lambda_star_examples() {
        let v = lambda_star(1.0, 1.0, 1.0, 2.0, 2.5, 2.8);
        let oracle = 1.0 / (math::powf(2.8, 0.4) + math::powf(2.8, 0.8));
        assert!((v - oracle).abs() < 1e-14);
        assert!((v - 0.2639).abs() < 1e-4);
        assert!((lambda_star(2.0, 0.0, 1.3, 2.0, 2.5, 2.8) - 1.0 / (2.0 * 1.3 * math::powf(2.8, 0.4))).abs() < 1e-14);
        assert!((lambda_star(2.0, 2.0, 1.0, 2.0, 2.5, 2.8) - 0.5 * v).abs() < 1e-14);
    }

    #[test]
    fn worked_example_figures() {
        let r = example_4_1_constants(1.0);
        assert!((r.f_inf - 0.0071554).abs() < 1e-6);
        assert!((r.ratio - 0.11).abs() <= 0.01);
        assert!((r.lambda_lower - 1.0 / r.ratio).abs() < 1e-12);
        assert!(r.lambda1 as f64 > r.lambda_lower);
        assert!((r.lambda1 as f64 - 1.0) <= r.lambda_lower);
        let r2 = example_4_1_constants(2.0);
        assert_eq!(r2.f_inf, 2.0 * r.f_inf);
        assert_eq!(r2.ratio, 2.0 * r.ratio);
        // notation reading: 0.2^{2.5} in the denominator
        assert!((r.ratio_alt - 1.0 / 14.0).abs() < 1e-12);
    }
}
