//! Discrete energies and their derivatives.
//!
//! Residual vectors have one entry per mesh vertex. Entries at Dirichlet
//! (boundary) vertices are always zero; entry `i` at a free vertex is the
//! pairing of the derivative with the hat function `phi_i`.

use alloc::vec;
use alloc::vec::Vec;

use crate::expr::{Env, EvalError, Expr, Var};
use crate::field::{DoublePhase, Reaction, SampledField};
use crate::math;
use crate::mesh::{DiscreteFunction, Mesh, VALUE_RULE};
use crate::modular::{norm_w1h0, NormError};

fn zero_boundary(mesh: &Mesh, r: &mut [f64]) {
    for (v, b) in mesh.boundary_mask().iter().enumerate() {
        if *b {
            r[v] = 0.0;
        }
    }
}

/// `|g|^{p-2} + mu |g|^{q-2}`, with the flux coefficient taken as 0 at `g = 0`.
#[inline]
fn flux_coeff(g: f64, p: f64, mu: f64, q: f64) -> f64 {
    if g == 0.0 {
        0.0
    } else {
        math::powf(g, p - 2.0) + mu * math::powf(g, q - 2.0)
    }
}

/// `Phi(u) = int |grad u|^p / p + mu |grad u|^q / q`.
pub fn energy_phi(u: &DiscreteFunction<'_>, dp: &DoublePhase) -> f64 {
    let mesh = u.mesh();
    let mut sum = 0.0;
    for (t, geo) in mesh.geometry().iter().enumerate() {
        let d = u.element_gradient(t);
        let g = math::hypot(d[0], d[1]);
        if g == 0.0 {
            continue;
        }
        let (p, q, mu) = (dp.p.centroid[t], dp.q.centroid[t], dp.mu.centroid[t]);
        sum += geo.area * (math::powf(g, p) / p + mu * math::powf(g, q) / q);
    }
    sum
}

/// Nodal derivative of [`energy_phi`].
pub fn grad_phi(u: &DiscreteFunction<'_>, dp: &DoublePhase) -> Vec<f64> {
    let mesh = u.mesh();
    let mut r = vec![0.0; mesh.num_vertices()];
    for (t, (tri, geo)) in mesh.triangles().iter().zip(mesh.geometry()).enumerate() {
        let d = u.element_gradient(t);
        let c = flux_coeff(
            math::hypot(d[0], d[1]),
            dp.p.centroid[t],
            dp.mu.centroid[t],
            dp.q.centroid[t],
        );
        if c == 0.0 {
            continue;
        }
        let flux = [c * d[0], c * d[1]];
        for k in 0..3 {
            let gk = geo.basis_gradients[k];
            r[tri[k]] += geo.area * (flux[0] * gk[0] + flux[1] * gk[1]);
        }
    }
    zero_boundary(mesh, &mut r);
    r
}

/// `L(u) = int alpha/2 (|u|^r / r - gamma)^2`.
pub fn energy_l(u: &DiscreteFunction<'_>, re: &Reaction) -> f64 {
    let mesh = u.mesh();
    let mut sum = 0.0;
    for (t, geo) in mesh.geometry().iter().enumerate() {
        for (k, &(b, w)) in VALUE_RULE.points().iter().enumerate() {
            let a = re.alpha.quad[t][k];
            if a == 0.0 {
                continue;
            }
            let r = re.r.quad[t][k];
            let well = math::powf(u.value_at(t, b).abs(), r) / r - re.gamma.quad[t][k];
            sum += geo.area * w * 0.5 * a * well * well;
        }
    }
    sum
}

/// Nodal derivative of [`energy_l`]:
/// `int alpha (|u|^r / r - gamma) |u|^{r-2} u phi_i`.
pub fn grad_l(u: &DiscreteFunction<'_>, re: &Reaction) -> Vec<f64> {
    let mesh = u.mesh();
    let mut res = vec![0.0; mesh.num_vertices()];
    for (t, (tri, geo)) in mesh.triangles().iter().zip(mesh.geometry()).enumerate() {
        for (k, &(b, w)) in VALUE_RULE.points().iter().enumerate() {
            let a = re.alpha.quad[t][k];
            if a == 0.0 {
                continue;
            }
            let r = re.r.quad[t][k];
            let v = u.value_at(t, b);
            let dens = a * (math::powf(v.abs(), r) / r - re.gamma.quad[t][k]) * math::signed_pow(v, r);
            for j in 0..3 {
                res[tri[j]] += geo.area * w * dens * b[j];
            }
        }
    }
    zero_boundary(mesh, &mut res);
    res
}

/// `T(u) = Phi'(u) + L'(u)`.
pub fn apply_t(u: &DiscreteFunction<'_>, dp: &DoublePhase, re: &Reaction) -> Vec<f64> {
    let mut r = grad_phi(u, dp);
    for (a, b) in r.iter_mut().zip(grad_l(u, re)) {
        *a += b;
    }
    r
}

/// Comparison of `L(u)` with `C |alpha|_inf / (r-)^2 ||u||^{2 r_M}`,
/// `r_M = max(r-, r+)`, for a given embedding constant `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct LBoundReport {
    pub value: f64,
    pub bound: f64,
    /// `bound - value`.
    pub slack: f64,
}

pub fn l_bound_report(
    u: &DiscreteFunction<'_>,
    re: &Reaction,
    dp: &DoublePhase,
    embedding_constant: f64,
) -> Result<LBoundReport, NormError> {
    let value = energy_l(u, re);
    let (r_lo, r_hi) = re.r.range();
    let r_m = r_lo.max(r_hi);
    let norm = norm_w1h0(u, dp)?;
    let bound = embedding_constant * re.alpha.sup_abs() / (r_lo * r_lo) * math::powf(norm, 2.0 * r_m);
    Ok(LBoundReport {
        value,
        bound,
        slack: bound - value,
    })
}

/// Right-hand side nonlinearity `f(x, t)` of the parametric problem.
#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearityKind {
    /// `f = c1 + c2 |t|^{s-2} t`, `F = c1 t + c2 |t|^s / s`.
    PaperF1 { c1: f64, c2: f64 },
    /// `f` given as an expression in `x`, `y`, `t`; `F` by adaptive quadrature.
    Expression(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    pub kind: NonlinearityKind,
    /// Growth exponent `s(x)` of the bound `|f| <= c1 + c2 |t|^{s-1}`.
    pub s: SampledField,
    /// Growth constants `(c1, c2)` of that bound.
    pub growth: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NonlinearityError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("adaptive quadrature of the primitive did not converge at t = {t}")]
    Quadrature { t: f64 },
    #[error("growth constants must be nonnegative, got c1 = {c1}, c2 = {c2}")]
    NegativeGrowth { c1: f64, c2: f64 },
    #[error("growth exponent must exceed 1, got {0}")]
    Exponent(f64),
}

/// Tolerance of the adaptive Simpson rule for `F(x, t) = int_0^t f(x, tau)`.
pub const PRIMITIVE_TOLERANCE: f64 = 1e-9;

impl Nonlinearity {
    pub fn paper_f1(c1: f64, c2: f64, s: SampledField) -> Result<Self, NonlinearityError> {
        if !(c1 >= 0.0 && c2 >= 0.0) {
            return Err(NonlinearityError::NegativeGrowth { c1, c2 });
        }
        let (lo, _) = s.range();
        if !(lo > 1.0) {
            return Err(NonlinearityError::Exponent(lo));
        }
        Ok(Nonlinearity {
            kind: NonlinearityKind::PaperF1 { c1, c2 },
            s,
            growth: (c1, c2),
        })
    }

    /// An expression nonlinearity; `growth` and `s` describe its claimed
    /// growth bound and are used only by the hypothesis checks.
    pub fn expression(expr: Expr, growth: (f64, f64), s: SampledField) -> Self {
        Nonlinearity {
            kind: NonlinearityKind::Expression(expr),
            s,
            growth,
        }
    }

    /// `f(x, t)` where `s` is the growth exponent sampled at `x`.
    pub fn f(&self, x: [f64; 2], s: f64, t: f64) -> Result<f64, NonlinearityError> {
        match &self.kind {
            NonlinearityKind::PaperF1 { c1, c2 } => Ok(c1 + c2 * math::signed_pow(t, s)),
            NonlinearityKind::Expression(e) => Ok(e.eval(&Env::with_t(x, t))?),
        }
    }

    /// `F(x, t) = int_0^t f(x, tau) dtau`.
    pub fn primitive(&self, x: [f64; 2], s: f64, t: f64) -> Result<f64, NonlinearityError> {
        match &self.kind {
            NonlinearityKind::PaperF1 { c1, c2 } => Ok(c1 * t + c2 * math::powf(t.abs(), s) / s),
            NonlinearityKind::Expression(e) => {
                if t == 0.0 {
                    return Ok(0.0);
                }
                if !e.mentions(Var::T) {
                    return Ok(t * e.eval(&Env::with_t(x, 0.0))?);
                }
                let mut err = None;
                let mut f = |tau: f64| match e.eval(&Env::with_t(x, tau)) {
                    Ok(v) => v,
                    Err(ev) => {
                        err.get_or_insert(ev);
                        0.0
                    }
                };
                let v = adaptive_simpson(&mut f, 0.0, t, PRIMITIVE_TOLERANCE);
                if let Some(ev) = err {
                    return Err(ev.into());
                }
                v.ok_or(NonlinearityError::Quadrature { t })
            }
        }
    }
}

fn adaptive_simpson(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Option<f64> {
    fn rec(
        f: &mut impl FnMut(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Option<f64> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if !delta.is_finite() {
            return None;
        }
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return if delta.abs() <= 15.0 * tol || depth == 0 && delta.abs() <= 1e3 * tol {
                Some(left + right + delta / 15.0)
            } else {
                None
            };
        }
        Some(
            rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
                + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?,
        )
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// `Psi(u) = int F(x, u)`.
pub fn energy_psi(u: &DiscreteFunction<'_>, nl: &Nonlinearity) -> Result<f64, NonlinearityError> {
    let mesh = u.mesh();
    let mut sum = 0.0;
    for (t, geo) in mesh.geometry().iter().enumerate() {
        for (k, &(b, w)) in VALUE_RULE.points().iter().enumerate() {
            let v = u.value_at(t, b);
            if v == 0.0 {
                continue;
            }
            sum += geo.area * w * nl.primitive(mesh.map_point(t, b), nl.s.quad[t][k], v)?;
        }
    }
    Ok(sum)
}

/// Nodal derivative of [`energy_psi`]: `int f(x, u) phi_i`.
pub fn grad_psi(u: &DiscreteFunction<'_>, nl: &Nonlinearity) -> Result<Vec<f64>, NonlinearityError> {
    let mesh = u.mesh();
    let mut res = vec![0.0; mesh.num_vertices()];
    for (t, (tri, geo)) in mesh.triangles().iter().zip(mesh.geometry()).enumerate() {
        for (k, &(b, w)) in VALUE_RULE.points().iter().enumerate() {
            let f = nl.f(mesh.map_point(t, b), nl.s.quad[t][k], u.value_at(t, b))?;
            for j in 0..3 {
                res[tri[j]] += geo.area * w * f * b[j];
            }
        }
    }
    zero_boundary(mesh, &mut res);
    Ok(res)
}

/// `int g phi_i` for a sampled source `g`.
pub fn load_vector(mesh: &Mesh, g: &SampledField) -> Vec<f64> {
    let mut res = vec![0.0; mesh.num_vertices()];
    for (t, (tri, geo)) in mesh.triangles().iter().zip(mesh.geometry()).enumerate() {
        for (k, &(b, w)) in VALUE_RULE.points().iter().enumerate() {
            let gv = g.quad[t][k];
            for j in 0..3 {
                res[tri[j]] += geo.area * w * gv * b[j];
            }
        }
    }
    zero_boundary(mesh, &mut res);
    res
}

/// `int (nu . grad u) phi_i`.
pub fn convection_vector(u: &DiscreteFunction<'_>, nu: [f64; 2]) -> Vec<f64> {
    let mesh = u.mesh();
    let mut res = vec![0.0; mesh.num_vertices()];
    for (t, (tri, geo)) in mesh.triangles().iter().zip(mesh.geometry()).enumerate() {
        let d = u.element_gradient(t);
        let c = (nu[0] * d[0] + nu[1] * d[1]) * geo.area / 3.0;
        for j in 0..3 {
            res[tri[j]] += c;
        }
    }
    zero_boundary(mesh, &mut res);
    res
}

fn norm(a: &[f64]) -> f64 {
    math::sqrt(a.iter().map(|x| x * x).sum())
}

fn signed_power_vec(a: &[f64], m: f64) -> Vec<f64> {
    let n = norm(a);
    if n == 0.0 {
        return vec![0.0; a.len()];
    }
    let c = math::powf(n, m - 2.0);
    a.iter().map(|x| c * x).collect()
}

/// Slack of `| |a|^{m-2}a - |b|^{m-2}b | <= c_m |a-b| (|a|+|b|)^{m-2}`
/// with `c_m = 2^m`. The right side is 0 when `a = b`.
pub fn ineq_kernel_36(a: &[f64], b: &[f64], m: f64) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let d = norm(&diff);
    let sa = signed_power_vec(a, m);
    let sb = signed_power_vec(b, m);
    let lhs = norm(&sa.iter().zip(&sb).map(|(x, y)| x - y).collect::<Vec<_>>());
    let rhs = if d == 0.0 {
        0.0
    } else {
        math::powf(2.0, m) * d * math::powf(norm(a) + norm(b), m - 2.0)
    };
    rhs - lhs
}

/// Slack of `(|x|^{s-2}x - |y|^{s-2}y) . (x-y) >= 2^{-s} |x-y|^s`.
pub fn ineq_kernel_37(x: &[f64], y: &[f64], s: f64) -> f64 {
    let sx = signed_power_vec(x, s);
    let sy = signed_power_vec(y, s);
    let mut dot = 0.0;
    let mut d2 = 0.0;
    for i in 0..x.len() {
        let dx = x[i] - y[i];
        dot += (sx[i] - sy[i]) * dx;
        d2 += dx * dx;
    }
    dot - math::powf(2.0, -s) * math::powf(math::sqrt(d2), s)
}

/// `sum_i a_i b_i`.
pub fn pairing(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
