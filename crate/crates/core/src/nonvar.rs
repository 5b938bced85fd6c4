//! The operator equation `T(u) = f(x, u, grad u)` with a convective right-hand
//! side.
//!
//! For fixed data `f`, `T = Phi' + L'` is the derivative of `Phi + L`, so the
//! inner problem is solved by minimizing `J(u) = Phi(u) + L(u) - <f, u>`. The
//! dependence of `f` on `grad u` is handled by a damped Picard iteration
//! `u_{k+1} = (1 - theta) u_k + theta S(f(u_k))`.

use alloc::vec::Vec;
use core::convert::Infallible;

use crate::descent::{minimize, DescentError, DescentParams};
use crate::field::{DoublePhase, Reaction, SampledField};
use crate::math;
use crate::mesh::{DiscreteFunction, Mesh};
use crate::modular::{norm_w1h0, NormError};
use crate::operator::{apply_t, convection_vector, energy_l, energy_phi, grad_l, grad_phi, load_vector, pairing};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsMode {
    /// `f = g`.
    Fixed,
    /// `f = g - nu . grad u`.
    Convective,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhsSpec {
    pub g: SampledField,
    pub nu: [f64; 2],
    pub mode: RhsMode,
}

impl RhsSpec {
    /// Nodal load vector of `f(u)`.
    pub fn load(&self, u: &DiscreteFunction<'_>) -> Vec<f64> {
        let mut f = load_vector(u.mesh(), &self.g);
        if self.mode == RhsMode::Convective && (self.nu[0] != 0.0 || self.nu[1] != 0.0) {
            for (a, c) in f.iter_mut().zip(convection_vector(u, self.nu)) {
                *a -= c;
            }
        }
        f
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveParams {
    pub inner: DescentParams,
    /// Relative tolerance on `||u_{k+1} - u_k|| / ||u_{k+1}||`.
    pub tol_fix: f64,
    pub max_outer: usize,
    /// Damping in `(0, 1]`.
    pub theta: f64,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            inner: DescentParams::default(),
            tol_fix: 1e-7,
            max_outer: 200,
            theta: 1.0,
        }
    }
}

/// One outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterRecord {
    pub iter: usize,
    /// `J` at the end of the inner solve.
    pub energy: f64,
    /// `max_i |T(u_{k+1})_i - f(u_{k+1})_i|`.
    pub residual_inf: f64,
    /// `||u_{k+1} - u_k||` in the zero-trace Sobolev norm.
    pub delta_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<'m> {
    pub u: DiscreteFunction<'m>,
    pub outer_iters: usize,
    pub inner_iters: usize,
    pub residual_inf: f64,
    pub delta_norm: f64,
    /// Inner `J` values, concatenated over outer iterations.
    pub energy_trace: Vec<f64>,
    pub outer_trace: Vec<OuterRecord>,
    pub converged: bool,
    /// The `delta_norm` trace decreases strictly at every step.
    pub contractive: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError<'m> {
    #[error("inner descent did not reach the residual tolerance ({reason}); best residual {residual_inf:e} after {iters} iterations")]
    Inner {
        reason: &'static str,
        best: DiscreteFunction<'m>,
        residual_inf: f64,
        iters: usize,
    },
    #[error("fixed-point iteration did not converge in {} outer iterations (last delta {:e}); try a smaller damping theta", .0.outer_iters, .0.delta_norm)]
    Outer(alloc::boxed::Box<SolveReport<'m>>),
    #[error(transparent)]
    Norm(#[from] NormError),
}

/// Result of one inner solve.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneSolution<'m> {
    pub u: DiscreteFunction<'m>,
    pub energy: f64,
    pub residual_inf: f64,
    pub iters: usize,
    pub energy_trace: Vec<f64>,
}

/// Solves `T(u) = fvec` by minimizing `Phi + L - <fvec, .>` from `start`.
///
/// `fvec` is a nodal residual-shaped vector; entries at boundary vertices are
/// ignored. The returned `u` has zero trace and
/// `max_i |T(u)_i - fvec_i| < params.tol_res`.
pub fn solve_monotone<'m>(
    fvec: &[f64],
    dp: &DoublePhase,
    re: &Reaction,
    start: &DiscreteFunction<'m>,
    params: &DescentParams,
) -> Result<MonotoneSolution<'m>, SolveError<'m>> {
    let mesh = start.mesh();
    let mut f = fvec.to_vec();
    for (v, b) in mesh.boundary_mask().iter().enumerate() {
        if *b {
            f[v] = 0.0;
        }
    }
    let mut x0 = start.clone();
    x0.apply_dirichlet();
    let value = |x: &[f64]| -> Result<f64, Infallible> {
        let u = DiscreteFunction::from_values(mesh, x.to_vec()).expect("length preserved");
        Ok(energy_phi(&u, dp) + energy_l(&u, re) - pairing(&f, x))
    };
    let grad = |x: &[f64]| -> Result<Vec<f64>, Infallible> {
        let u = DiscreteFunction::from_values(mesh, x.to_vec()).expect("length preserved");
        let mut g = apply_t(&u, dp, re);
        for (a, b) in g.iter_mut().zip(&f) {
            *a -= b;
        }
        Ok(g)
    };
    match minimize(x0.into_values(), value, grad, params) {
        Ok(out) => Ok(MonotoneSolution {
            u: DiscreteFunction::from_values(mesh, out.x).expect("length preserved"),
            energy: out.value,
            residual_inf: out.residual_inf,
            iters: out.iters,
            energy_trace: out.trace.iter().map(|r| r.value).collect(),
        }),
        Err(DescentError::Objective(e)) => match e {},
        Err(DescentError::NonConvergence { reason, best }) => Err(SolveError::Inner {
            reason,
            best: DiscreteFunction::from_values(mesh, best.x).expect("length preserved"),
            residual_inf: best.residual_inf,
            iters: best.iters,
        }),
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `max_i |T(u)_i - f(u)_i|`.
pub fn residual_inf(u: &DiscreteFunction<'_>, rhs: &RhsSpec, dp: &DoublePhase, re: &Reaction) -> f64 {
    let t = apply_t(u, dp, re);
    let f = rhs.load(u);
    inf_norm(&t.iter().zip(&f).map(|(a, b)| a - b).collect::<Vec<_>>())
}

/// Damped Picard iteration on the convective right-hand side, starting at 0.
///
/// Inner solves use a tenth of `params.inner.tol_res` so that a converged
/// report satisfies `residual_inf < tol_res` against its own right-hand side.
/// Convergence requires both the relative update and that residual to be
/// below tolerance.
pub fn solve_convection<'m>(
    mesh: &'m Mesh,
    rhs: &RhsSpec,
    dp: &DoublePhase,
    re: &Reaction,
    params: &SolveParams,
) -> Result<SolveReport<'m>, SolveError<'m>> {
    let inner = DescentParams {
        tol_res: 0.1 * params.inner.tol_res,
        ..params.inner
    };
    let theta = params.theta;
    let mut u = DiscreteFunction::zeros(mesh);
    let mut energy_trace = Vec::new();
    let mut outer_trace = Vec::new();
    let mut inner_iters = 0;
    for k in 1..=params.max_outer {
        let f = rhs.load(&u);
        let sol = solve_monotone(&f, dp, re, &u, &inner)?;
        inner_iters += sol.iters;
        energy_trace.extend_from_slice(&sol.energy_trace);
        let next = if theta == 1.0 {
            sol.u
        } else {
            u.scaled(1.0 - theta).axpy(theta, &sol.u)
        };
        let delta = norm_w1h0(&next.axpy(-1.0, &u), dp)?;
        let size = norm_w1h0(&next, dp)?;
        u = next;
        let res = residual_inf(&u, rhs, dp, re);
        outer_trace.push(OuterRecord {
            iter: k,
            energy: sol.energy,
            residual_inf: res,
            delta_norm: delta,
        });
        let fixed = delta == 0.0 || delta <= params.tol_fix * size;
        if fixed && res < params.inner.tol_res {
            return Ok(finish(u, k, inner_iters, energy_trace, outer_trace, true));
        }
    }
    let report = finish(u, params.max_outer, inner_iters, energy_trace, outer_trace, false);
    Err(SolveError::Outer(alloc::boxed::Box::new(report)))
}

fn finish<'m>(
    u: DiscreteFunction<'m>,
    outer_iters: usize,
    inner_iters: usize,
    energy_trace: Vec<f64>,
    outer_trace: Vec<OuterRecord>,
    converged: bool,
) -> SolveReport<'m> {
    let last = outer_trace.last().copied();
    let contractive = outer_trace.len() >= 2
        && outer_trace
            .windows(2)
            .all(|w| w[1].delta_norm < w[0].delta_norm || w[1].delta_norm == 0.0);
    SolveReport {
        u,
        outer_iters,
        inner_iters,
        residual_inf: last.map_or(0.0, |r| r.residual_inf),
        delta_norm: last.map_or(0.0, |r| r.delta_norm),
        energy_trace,
        outer_trace,
        converged,
        contractive,
    }
}

/// Below this zero-trace norm a solution counts as trivial.
pub const TRIVIAL_NORM: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GlReport<'m> {
    pub report: SolveReport<'m>,
    pub solution_norm: f64,
    pub nontrivial: bool,
    /// Largest ratio `|int (nu . grad psi) phi| / (|nu| |grad psi|_2 |phi|_2)`
    /// over all hat functions `phi` and `phi = psi`; at most 1.
    pub convection_bound_ratio: f64,
}

/// Ginzburg-Landau type problem `-div grad psi + alpha (psi^2/2 - 1) psi = g - nu . grad psi`
/// with zero trace (`p = r = 2`, `mu = 0`, `gamma = 1`).
pub fn gl_solve<'m>(
    mesh: &'m Mesh,
    nu: [f64; 2],
    alpha: f64,
    g: SampledField,
    params: &SolveParams,
) -> Result<GlReport<'m>, SolveError<'m>> {
    let dp = gl_double_phase(mesh);
    let re = Reaction::constant(mesh, alpha, 1.0, 2.0).expect("alpha checked by caller");
    let rhs = RhsSpec {
        g,
        nu,
        mode: RhsMode::Convective,
    };
    let report = solve_convection(mesh, &rhs, &dp, &re, params)?;
    let solution_norm = norm_w1h0(&report.u, &dp)?;
    let ratio = convection_bound_ratio(&report.u, nu);
    Ok(GlReport {
        nontrivial: solution_norm >= TRIVIAL_NORM,
        solution_norm,
        convection_bound_ratio: ratio,
        report,
    })
}

/// `p = 2`, `mu = 0`; `q` is irrelevant and set to 3.
pub fn gl_double_phase(mesh: &Mesh) -> DoublePhase {
    DoublePhase::constant(mesh, 2.0, 3.0, 0.0).expect("valid constants")
}

fn convection_bound_ratio(psi: &DiscreteFunction<'_>, nu: [f64; 2]) -> f64 {
    let mesh = psi.mesh();
    let nu_abs = math::hypot(nu[0], nu[1]);
    let mut grad_l2 = 0.0;
    let mut hat_mass = alloc::vec![0.0; mesh.num_vertices()];
    for (t, (tri, geo)) in mesh.triangles().iter().zip(mesh.geometry()).enumerate() {
        let d = psi.element_gradient(t);
        grad_l2 += geo.area * (d[0] * d[0] + d[1] * d[1]);
        for &v in tri {
            hat_mass[v] += geo.area / 6.0;
        }
    }
    let grad_l2 = math::sqrt(grad_l2);
    let denom_base = nu_abs * grad_l2;
    if denom_base == 0.0 {
        return 0.0;
    }
    let conv = convection_vector(psi, nu);
    let mut worst: f64 = 0.0;
    for v in mesh.free_vertices() {
        worst = worst.max(conv[v].abs() / (denom_base * math::sqrt(hat_mass[v])));
    }
    let psi_l2 = math::sqrt(l2_sq(psi));
    if psi_l2 > 0.0 {
        worst = worst.max(pairing(&conv, psi.values()).abs() / (denom_base * psi_l2));
    }
    worst
}

fn l2_sq(u: &DiscreteFunction<'_>) -> f64 {
    let mesh = u.mesh();
    let mut s = 0.0;
    for (t, geo) in mesh.geometry().iter().enumerate() {
        for &(b, w) in crate::mesh::VALUE_RULE.points() {
            let v = u.value_at(t, b);
            s += geo.area * w * v * v;
        }
    }
    s
}

/// `<Phi'(u) - Phi'(v), u - v>` and `<L'(u) - L'(v), u - v>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityParts {
    pub phi: f64,
    pub l: f64,
}

impl MonotonicityParts {
    pub fn total(&self) -> f64 {
        self.phi + self.l
    }
}

pub fn monotonicity_parts(
    u: &DiscreteFunction<'_>,
    v: &DiscreteFunction<'_>,
    dp: &DoublePhase,
    re: &Reaction,
) -> MonotonicityParts {
    let d: Vec<f64> = u.values().iter().zip(v.values()).map(|(a, b)| a - b).collect();
    let diff = |a: Vec<f64>, b: Vec<f64>| pairing(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>(), &d);
    MonotonicityParts {
        phi: diff(grad_phi(u, dp), grad_phi(v, dp)),
        l: diff(grad_l(u, re), grad_l(v, re)),
    }
}

/// `<T(u) - T(v), u - v>`.
pub fn monotonicity_probe(
    u: &DiscreteFunction<'_>,
    v: &DiscreteFunction<'_>,
    dp: &DoublePhase,
    re: &Reaction,
) -> f64 {
    monotonicity_parts(u, v, dp, re).total()
}

/// `<T(t w), t w> / ||t w||` for each `t` in the grid.
pub fn coercivity_probe(
    w: &DiscreteFunction<'_>,
    t_grid: &[f64],
    dp: &DoublePhase,
    re: &Reaction,
) -> Result<Vec<f64>, NormError> {
    t_grid
        .iter()
        .map(|&t| {
            let tw = w.scaled(t);
            let n = norm_w1h0(&tw, dp)?;
            Ok(pairing(&apply_t(&tw, dp, re), tw.values()) / n)
        })
        .collect()
}

/// Largest jump `|Y(theta_{i+1}) - Y(theta_i)|` of `Y(theta) = <T(u + theta w), v>`.
pub fn hemicontinuity_probe(
    u: &DiscreteFunction<'_>,
    w: &DiscreteFunction<'_>,
    v: &DiscreteFunction<'_>,
    theta_grid: &[f64],
    dp: &DoublePhase,
    re: &Reaction,
) -> f64 {
    let ys: Vec<f64> = theta_grid
        .iter()
        .map(|&th| pairing(&apply_t(&u.axpy(th, w), dp, re), v.values()))
        .collect();
    ys.windows(2).fold(0.0, |m, p| m.max((p[1] - p[0]).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_rect_mesh;

    #[test]
    fn zero_data_is_fixed() {
        let m = build_rect_mesh(0.0, 0.0, 1.0, 1.0, 6, 6).unwrap();
        let dp = DoublePhase::constant(&m, 2.5, 2.8, 1.0).unwrap();
        let re = Reaction::none(&m);
        let f = alloc::vec![0.0; m.num_vertices()];
        let sol = solve_monotone(&f, &dp, &re, &DiscreteFunction::zeros(&m), &DescentParams::default()).unwrap();
        assert!(sol.u.is_zero());

        let rep = gl_solve(&m, [0.0, 0.0], 1.0, SampledField::constant("g", &m, 0.0), &SolveParams::default()).unwrap();
        assert!(rep.report.u.is_zero());
        assert_eq!(rep.report.outer_iters, 1);
        assert!(!rep.nontrivial);
    }

    #[test]
    fn probes_trivial_cases() {
        let m = build_rect_mesh(0.0, 0.0, 1.0, 1.0, 4, 4).unwrap();
        let dp = DoublePhase::constant(&m, 2.5, 2.8, 1.0).unwrap();
        let re = Reaction::constant(&m, 1.0, 1.0, 2.0).unwrap();
        let u = DiscreteFunction::interpolate_zero_trace(&m, |p| math::sin(3.0 * p[0]) * p[1]);
        assert_eq!(monotonicity_probe(&u, &u, &dp, &re), 0.0);
    }
}
