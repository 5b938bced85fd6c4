//! Modulars and Luxemburg norms on P1 functions.
//!
//! For a P1 function `u` the variable-exponent modular
//! `rho_p(u) = int |u|^p(x)` and the double-phase modular
//! `rho_H(u) = int |u|^p(x) + mu(x) |u|^q(x)` are evaluated with the
//! three-point rule; in gradient mode `|grad u|` is constant per element and
//! the centroid rule is used. The Luxemburg norm `inf { z > 0 : rho(u/z) <= 1 }`
//! is the unique root of `rho(u/z) = 1`, since `z -> rho(u/z)` is continuous
//! and strictly decreasing for `u != 0`.

use alloc::vec::Vec;

use crate::field::{DoublePhase, SampledField};
use crate::math;
use crate::mesh::{DiscreteFunction, VALUE_RULE};
use crate::operator;

/// Selects `t^(a v b)` or `t^(a ^ b)` in the bracket notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bracket {
    /// `t^min(a,b)` for `t < 1`, `t^max(a,b)` for `t >= 1`: the larger power.
    Join,
    /// `t^max(a,b)` for `t < 1`, `t^min(a,b)` for `t >= 1`: the smaller power.
    Meet,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum NotationError {
    #[error("bracket power needs t >= 0, got {0}")]
    NegativeBase(f64),
}

pub fn notation_pow(t: f64, a: f64, b: f64, mode: Bracket) -> Result<f64, NotationError> {
    if !(t >= 0.0) {
        return Err(NotationError::NegativeBase(t));
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let e = match (mode, t < 1.0) {
        (Bracket::Join, true) | (Bracket::Meet, false) => lo,
        (Bracket::Join, false) | (Bracket::Meet, true) => hi,
    };
    Ok(math::powf(t, e))
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum NormError {
    #[error("could not bracket the unit level of the modular within 200 doublings/halvings")]
    Bracket,
}

/// Whether a modular integrates `|u|` or `|grad u|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModularMode {
    Value,
    Gradient,
}

/// Quadrature samples `(weight, |u|, p, mu, q)` of a modular integrand, so
/// that `rho(u / z)` can be re-evaluated cheaply during root finding.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModularSamples {
    weight: Vec<f64>,
    magnitude: Vec<f64>,
    p: Vec<f64>,
    mu: Vec<f64>,
    q: Vec<f64>,
}

impl ModularSamples {
    fn push(&mut self, w: f64, t: f64, p: f64, mu: f64, q: f64) {
        self.weight.push(w);
        self.magnitude.push(t);
        self.p.push(p);
        self.mu.push(mu);
        self.q.push(q);
    }

    /// Samples of `|u|^p(x)` (no second phase).
    pub fn variable_exponent(u: &DiscreteFunction<'_>, p: &SampledField) -> Self {
        let mut s = ModularSamples::default();
        let mesh = u.mesh();
        for (t, g) in mesh.geometry().iter().enumerate() {
            for (k, &(b, w)) in VALUE_RULE.points().iter().enumerate() {
                let e = p.quad[t][k];
                s.push(g.area * w, u.value_at(t, b).abs(), e, 0.0, e);
            }
        }
        s
    }

    /// Samples of `H(x, |u|)` or `H(x, |grad u|)`.
    pub fn double_phase(u: &DiscreteFunction<'_>, mode: ModularMode, dp: &DoublePhase) -> Self {
        let mut s = ModularSamples::default();
        let mesh = u.mesh();
        for (t, g) in mesh.geometry().iter().enumerate() {
            match mode {
                ModularMode::Value => {
                    for (k, &(b, w)) in VALUE_RULE.points().iter().enumerate() {
                        s.push(
                            g.area * w,
                            u.value_at(t, b).abs(),
                            dp.p.quad[t][k],
                            dp.mu.quad[t][k],
                            dp.q.quad[t][k],
                        );
                    }
                }
                ModularMode::Gradient => {
                    let d = u.element_gradient(t);
                    s.push(
                        g.area,
                        math::hypot(d[0], d[1]),
                        dp.p.centroid[t],
                        dp.mu.centroid[t],
                        dp.q.centroid[t],
                    );
                }
            }
        }
        s
    }

    /// Replaces every magnitude `t` by `t^k` (used for `| |u|^k |_p`).
    pub fn powered(&self, k: f64) -> Self {
        let mut s = self.clone();
        for t in &mut s.magnitude {
            *t = math::powf(*t, k);
        }
        s
    }

    /// Multiplies every exponent by `k` (used for `|u|_{k p(x)}`).
    pub fn exponents_scaled(&self, k: f64) -> Self {
        let mut s = self.clone();
        for e in s.p.iter_mut().chain(s.q.iter_mut()) {
            *e *= k;
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.magnitude.iter().all(|&t| t == 0.0)
    }

    pub fn rho(&self) -> f64 {
        self.rho_scaled(1.0)
    }

    /// `rho(u / zeta)`.
    pub fn rho_scaled(&self, zeta: f64) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.weight.len() {
            let t = self.magnitude[i] / zeta;
            if t == 0.0 {
                continue;
            }
            sum += self.weight[i] * (math::powf(t, self.p[i]) + self.mu[i] * math::powf(t, self.q[i]));
        }
        sum
    }

    /// Exponent range `(min p, max p, min q, max q)` over the samples.
    pub fn exponent_range(&self) -> (f64, f64, f64, f64) {
        let mut r = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (&p, &q) in self.p.iter().zip(&self.q) {
            r.0 = r.0.min(p);
            r.1 = r.1.max(p);
            r.2 = r.2.min(q);
            r.3 = r.3.max(q);
        }
        r
    }
}

/// Root of `rho(u / zeta) = 1` for a nonzero `u`, given `zeta -> rho(u/zeta)`.
///
/// Brackets by doubling or halving from `zeta = 1`, then bisects to a relative
/// width of `1e-10`.
pub fn luxemburg_root(mut rho_scaled: impl FnMut(f64) -> f64) -> Result<f64, NormError> {
    const MAX_STEPS: usize = 200;
    let r1 = rho_scaled(1.0);
    let (mut lo, mut hi);
    if r1 > 1.0 || r1.is_nan() {
        lo = 1.0;
        hi = 2.0;
        let mut n = 0;
        while !(rho_scaled(hi) <= 1.0) {
            lo = hi;
            hi *= 2.0;
            n += 1;
            if n >= MAX_STEPS {
                return Err(NormError::Bracket);
            }
        }
    } else if r1 < 1.0 {
        hi = 1.0;
        lo = 0.5;
        let mut n = 0;
        while rho_scaled(lo) < 1.0 {
            hi = lo;
            lo *= 0.5;
            n += 1;
            if n >= MAX_STEPS {
                return Err(NormError::Bracket);
            }
        }
    } else {
        return Ok(1.0);
    }
    // invariant: rho(lo) >= 1 >= rho(hi)
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if rho_scaled(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Luxemburg norm of a sampled modular; 0 for the zero function.
pub fn luxemburg_norm(samples: &ModularSamples) -> Result<f64, NormError> {
    if samples.is_zero() {
        return Ok(0.0);
    }
    luxemburg_root(|z| samples.rho_scaled(z))
}

pub fn modular_px(u: &DiscreteFunction<'_>, p: &SampledField) -> f64 {
    ModularSamples::variable_exponent(u, p).rho()
}

pub fn modular_h(u: &DiscreteFunction<'_>, mode: ModularMode, dp: &DoublePhase) -> f64 {
    ModularSamples::double_phase(u, mode, dp).rho()
}

/// `|u|_{p(x)}`.
pub fn norm_px(u: &DiscreteFunction<'_>, p: &SampledField) -> Result<f64, NormError> {
    luxemburg_norm(&ModularSamples::variable_exponent(u, p))
}

/// `||u||_H` (value mode) or `|| |grad u| ||_H` (gradient mode).
pub fn norm_h(u: &DiscreteFunction<'_>, mode: ModularMode, dp: &DoublePhase) -> Result<f64, NormError> {
    luxemburg_norm(&ModularSamples::double_phase(u, mode, dp))
}

/// The norm of the zero-trace Sobolev space: the Luxemburg norm of `|grad u|`.
pub fn norm_w1h0(u: &DiscreteFunction<'_>, dp: &DoublePhase) -> Result<f64, NormError> {
    norm_h(u, ModularMode::Gradient, dp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    BelowOne,
    EqualOne,
    AboveOne,
}

impl Regime {
    fn of(norm: f64) -> Regime {
        if (norm - 1.0).abs() <= 1e-12 {
            Regime::EqualOne
        } else if norm < 1.0 {
            Regime::BelowOne
        } else {
            Regime::AboveOne
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::BelowOne => "below_one",
            Regime::EqualOne => "equal_one",
            Regime::AboveOne => "above_one",
        }
    }
}

/// Verdicts are `slack >= -PROPERTY_TOLERANCE`.
pub const PROPERTY_TOLERANCE: f64 = 1e-8;

/// One norm-modular relation evaluated on one sample.
///
/// Inequality slacks are `(larger side - smaller side) / max(1, |sides|)`, so
/// a true inequality has slack `>= 0` up to rounding. Sign-agreement checks
/// report `(norm - 1)(rho - 1)`; identities report `-|lhs - rhs|` (relative).
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub id: &'static str,
    /// False when the hypothesis of the implication does not hold for this
    /// sample; such checks trivially hold and carry slack 0.
    pub applicable: bool,
    pub holds: bool,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModularReport {
    /// `rho_H(u)`.
    pub rho: f64,
    /// `||u||_H`.
    pub norm: f64,
    pub regime: Regime,
    pub checks: Vec<PropertyCheck>,
}

fn rel_gap(small: f64, large: f64) -> f64 {
    (large - small) / 1f64.max(small.abs()).max(large.abs())
}

fn check(id: &'static str, slack: f64) -> PropertyCheck {
    PropertyCheck {
        id,
        applicable: true,
        holds: slack >= -PROPERTY_TOLERANCE,
        slack,
    }
}

fn not_applicable(id: &'static str) -> PropertyCheck {
    PropertyCheck {
        id,
        applicable: false,
        holds: true,
        slack: 0.0,
    }
}

fn failed(id: &'static str) -> PropertyCheck {
    PropertyCheck {
        id,
        applicable: true,
        holds: false,
        slack: f64::NAN,
    }
}

/// Property ids emitted by [`check_section2_props`], in emission order.
pub const PROPERTY_IDS: [&str; 9] = [
    "px_regime",
    "px_power_bounds",
    "h_unit_modular",
    "h_regime",
    "h_small_norm_bounds",
    "h_large_norm_bounds",
    "power_composition",
    "energy_small_norm_bounds",
    "energy_large_norm_bounds",
];

/// Evaluates the standard norm-modular relations on each sample:
///
/// - `px_regime`: `|u|_p` and `rho_p(u)` lie on the same side of 1;
/// - `px_power_bounds`: `|u|^{p+} <= rho_p(u) <= |u|^{p-}` if `|u|_p <= 1`,
///   `|u|^{p-} <= rho_p(u) <= |u|^{p+}` otherwise;
/// - `h_unit_modular`: `rho_H(u / ||u||_H) = 1`;
/// - `h_regime`: `||u||_H` and `rho_H(u)` lie on the same side of 1;
/// - `h_small_norm_bounds` / `h_large_norm_bounds`: `rho_H(u)` between
///   `||u||^{q+}` and `||u||^{p-}` (resp. `||u||^{p-}` and `||u||^{q+}`);
/// - `power_composition`: `| |u|^2 |_{p(x)} = |u|_{2p(x)}^2`;
/// - `energy_small_norm_bounds` / `energy_large_norm_bounds`: with
///   `n = ||grad u||_H`, `n^{q+}/q+ <= Phi(u) <= n^{p-}/p-` when `n < 1` and
///   `n^{p-}/q+ <= Phi(u) <= n^{q+}/p-` when `n > 1`.
///
/// The exponent bounds are taken over the sampled exponent values, which is
/// what the discrete modulars see. Zero samples produce a report without
/// checks.
pub fn check_section2_props(
    samples: &[DiscreteFunction<'_>],
    dp: &DoublePhase,
) -> Vec<ModularReport> {
    let (p_lo, p_hi, _q_lo, q_hi) = dp.exponent_bounds();
    samples
        .iter()
        .map(|u| {
            let h = ModularSamples::double_phase(u, ModularMode::Value, dp);
            let rho = h.rho();
            let norm = luxemburg_norm(&h);
            let mut checks = Vec::with_capacity(PROPERTY_IDS.len());
            let Ok(norm) = norm else {
                for id in PROPERTY_IDS {
                    checks.push(failed(id));
                }
                return ModularReport {
                    rho,
                    norm: f64::NAN,
                    regime: Regime::AboveOne,
                    checks,
                };
            };
            if h.is_zero() {
                return ModularReport {
                    rho,
                    norm,
                    regime: Regime::BelowOne,
                    checks,
                };
            }

            // variable exponent space
            let px = ModularSamples::variable_exponent(u, &dp.p);
            let rho_p = px.rho();
            match luxemburg_norm(&px) {
                Ok(n) => {
                    checks.push(check("px_regime", (n - 1.0) * (rho_p - 1.0)));
                    let slack = if n <= 1.0 {
                        rel_gap(math::powf(n, p_hi), rho_p).min(rel_gap(rho_p, math::powf(n, p_lo)))
                    } else {
                        rel_gap(math::powf(n, p_lo), rho_p).min(rel_gap(rho_p, math::powf(n, p_hi)))
                    };
                    checks.push(check("px_power_bounds", slack));
                }
                Err(_) => {
                    checks.push(failed("px_regime"));
                    checks.push(failed("px_power_bounds"));
                }
            }

            // double phase space
            let unit = h.rho_scaled(norm);
            checks.push(check("h_unit_modular", -(unit - 1.0).abs()));
            checks.push(check("h_regime", (norm - 1.0) * (rho - 1.0)));
            if norm < 1.0 {
                let s = rel_gap(math::powf(norm, q_hi), rho).min(rel_gap(rho, math::powf(norm, p_lo)));
                checks.push(check("h_small_norm_bounds", s));
            } else {
                checks.push(not_applicable("h_small_norm_bounds"));
            }
            if norm > 1.0 {
                let s = rel_gap(math::powf(norm, p_lo), rho).min(rel_gap(rho, math::powf(norm, q_hi)));
                checks.push(check("h_large_norm_bounds", s));
            } else {
                checks.push(not_applicable("h_large_norm_bounds"));
            }

            // constant outer power
            let lhs = luxemburg_norm(&px.powered(2.0));
            let rhs = luxemburg_norm(&px.exponents_scaled(2.0));
            match (lhs, rhs) {
                (Ok(a), Ok(b)) => {
                    let b2 = b * b;
                    checks.push(check("power_composition", -(a - b2).abs() / 1f64.max(b2)));
                }
                _ => checks.push(failed("power_composition")),
            }

            // energy sandwich
            match norm_w1h0(u, dp) {
                Ok(n) => {
                    let phi = operator::energy_phi(u, dp);
                    if n < 1.0 {
                        let s = rel_gap(math::powf(n, q_hi) / q_hi, phi)
                            .min(rel_gap(phi, math::powf(n, p_lo) / p_lo));
                        checks.push(check("energy_small_norm_bounds", s));
                    } else {
                        checks.push(not_applicable("energy_small_norm_bounds"));
                    }
                    if n > 1.0 {
                        let s = rel_gap(math::powf(n, p_lo) / q_hi, phi)
                            .min(rel_gap(phi, math::powf(n, q_hi) / p_lo));
                        checks.push(check("energy_large_norm_bounds", s));
                    } else {
                        checks.push(not_applicable("energy_large_norm_bounds"));
                    }
                }
                Err(_) => {
                    checks.push(failed("energy_small_norm_bounds"));
                    checks.push(failed("energy_large_norm_bounds"));
                }
            }

            ModularReport {
                rho,
                norm,
                regime: Regime::of(norm),
                checks,
            }
        })
        .collect()
}
