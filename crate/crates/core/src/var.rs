//! The parametric problem `I_lambda(u) = Phi(u) - lambda Psi(u)`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::analysis::unit_ball_volume;
use crate::descent::{minimize_observed, DescentError, DescentParams};
use crate::field::DoublePhase;
use crate::math;
use crate::mesh::{DiscreteFunction, Mesh};
use crate::modular::{notation_pow, Bracket};
use crate::operator::{energy_phi, energy_psi, grad_phi, grad_psi, Nonlinearity, NonlinearityError};

/// Radial cut-off: `r_lambda` on `B(x0, R/2)`, linear decay to 0 on the
/// annulus, 0 outside `B(x0, R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    pub center: [f64; 2],
    pub radius: f64,
    pub r_lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum CutoffError {
    #[error("plateau height must lie in (0, 1), got {0}")]
    Height(f64),
    #[error("radius must be positive and finite, got {0}")]
    Radius(f64),
    #[error("ball of radius {radius} is not inside the mesh: boundary vertex at distance {distance}")]
    NotContained { radius: f64, distance: f64 },
}

impl CutoffSpec {
    /// Checks `0 < r_lambda < 1` and that no boundary vertex lies strictly
    /// inside the ball (relative slack `1e-9`).
    pub fn validate(&self, mesh: &Mesh) -> Result<(), CutoffError> {
        if !(self.r_lambda > 0.0 && self.r_lambda < 1.0) {
            return Err(CutoffError::Height(self.r_lambda));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(CutoffError::Radius(self.radius));
        }
        for (v, x) in mesh.vertices().iter().enumerate() {
            if !mesh.is_boundary(v) {
                continue;
            }
            let d = math::hypot(x[0] - self.center[0], x[1] - self.center[1]);
            if d < self.radius * (1.0 - 1e-9) {
                return Err(CutoffError::NotContained {
                    radius: self.radius,
                    distance: d,
                });
            }
        }
        Ok(())
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        let d = math::hypot(x[0] - self.center[0], x[1] - self.center[1]);
        if d >= self.radius {
            0.0
        } else if d <= 0.5 * self.radius {
            self.r_lambda
        } else {
            2.0 * self.r_lambda / self.radius * (self.radius - d)
        }
    }
}

/// Nodal interpolant of the cut-off function.
pub fn cutoff_u_bar<'m>(spec: &CutoffSpec, mesh: &'m Mesh) -> Result<DiscreteFunction<'m>, CutoffError> {
    spec.validate(mesh)?;
    let mut u = DiscreteFunction::interpolate(mesh, |x| spec.value(x));
    u.apply_dirichlet();
    Ok(u)
}

/// Analytic lower and upper bounds on `Phi(u_bar)` in dimension `n`, from
/// the bracket powers of `2 r_lambda / R`:
///
/// `lower = omega_n (R^n - (R/2)^n) t^{p- ^ p+} / q+`,
/// `upper = (1 + |mu|) omega_n (R^n - (R/2)^n) t^{p- v q+} / p-`.
pub fn cutoff_energy_bounds(spec: &CutoffSpec, dp: &DoublePhase, n: u32) -> (f64, f64) {
    let (p_lo, p_hi, _, q_hi) = dp.exponent_bounds();
    let t = 2.0 * spec.r_lambda / spec.radius;
    let shell = unit_ball_volume(n)
        * (math::powf(spec.radius, n as f64) - math::powf(0.5 * spec.radius, n as f64));
    let meet = notation_pow(t, p_lo, p_hi, Bracket::Meet).expect("t >= 0");
    let join = notation_pow(t, p_lo, q_hi, Bracket::Join).expect("t >= 0");
    let lower = shell * meet / q_hi;
    let upper = (1.0 + dp.mu.sup_abs()) * shell * join / p_lo;
    (lower, upper)
}

/// One accepted iterate of the descent on `I_lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsRecord {
    pub iter: usize,
    pub i_value: f64,
    pub phi: f64,
    /// `max_i |Phi'(u)_i - lambda Psi'(u)_i|`.
    pub grad_inf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarSolveReport<'m> {
    pub u: DiscreteFunction<'m>,
    pub lambda: f64,
    pub i_value: f64,
    pub phi_value: f64,
    pub psi_value: f64,
    pub residual_inf: f64,
    pub nontrivial: bool,
    pub iters: usize,
    pub converged: bool,
    pub ps_trace: Vec<PsRecord>,
    /// `Phi(u_n) < 1` held at every iterate.
    pub phi_below_one: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VarError<'m> {
    #[error("lambda must be positive, got {0}")]
    Lambda(f64),
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
    #[error("descent on the energy did not converge ({reason}); best residual {:e}", .best.residual_inf)]
    NonConvergence {
        reason: &'static str,
        best: Box<VarSolveReport<'m>>,
    },
}

/// Parameters of [`minimize_i`]: tolerance `1e-8`, 20000 iterations.
pub fn default_var_params() -> DescentParams {
    DescentParams {
        tol_res: 1e-8,
        max_iters: 20_000,
        ..DescentParams::default()
    }
}

/// Strictly negative energy certifies a nontrivial critical point.
pub const NONTRIVIAL_THRESHOLD: f64 = -1e-12;

/// `I(u*) < -1e-12`; since `I(0) = 0`, such a `u*` is not the zero function.
pub fn certify_nontrivial(report: &VarSolveReport<'_>) -> bool {
    report.i_value < NONTRIVIAL_THRESHOLD
}

/// Armijo descent on `I_lambda` from `start` (zero trace is enforced).
pub fn minimize_i<'m>(
    lambda: f64,
    nl: &Nonlinearity,
    dp: &DoublePhase,
    start: &DiscreteFunction<'m>,
    params: &DescentParams,
) -> Result<VarSolveReport<'m>, VarError<'m>> {
    if !(lambda > 0.0) {
        return Err(VarError::Lambda(lambda));
    }
    let mesh = start.mesh();
    let mut x0 = start.clone();
    x0.apply_dirichlet();
    let mut phis: Vec<f64> = Vec::new();
    let value = |x: &[f64]| -> Result<f64, NonlinearityError> {
        let u = DiscreteFunction::from_values(mesh, x.to_vec()).expect("length preserved");
        Ok(energy_phi(&u, dp) - lambda * energy_psi(&u, nl)?)
    };
    let grad = |x: &[f64]| -> Result<Vec<f64>, NonlinearityError> {
        let u = DiscreteFunction::from_values(mesh, x.to_vec()).expect("length preserved");
        let mut g = grad_phi(&u, dp);
        for (a, b) in g.iter_mut().zip(grad_psi(&u, nl)?) {
            *a -= lambda * b;
        }
        Ok(g)
    };
    let observe = |x: &[f64]| {
        let u = DiscreteFunction::from_values(mesh, x.to_vec()).expect("length preserved");
        phis.push(energy_phi(&u, dp));
    };
    let outcome = minimize_observed(x0.into_values(), value, grad, observe, params);
    let (out, reason) = match outcome {
        Ok(out) => (out, None),
        Err(DescentError::Objective(e)) => return Err(e.into()),
        Err(DescentError::NonConvergence { reason, best }) => (best, Some(reason)),
    };
    let ps_trace: Vec<PsRecord> = out
        .trace
        .iter()
        .zip(&phis)
        .map(|(r, &phi)| PsRecord {
            iter: r.iter,
            i_value: r.value,
            phi,
            grad_inf: r.residual_inf,
        })
        .collect();
    let u = DiscreteFunction::from_values(mesh, out.x).expect("length preserved");
    let phi_value = energy_phi(&u, dp);
    let psi_value = energy_psi(&u, nl)?;
    let mut report = VarSolveReport {
        lambda,
        i_value: out.value,
        phi_value,
        psi_value,
        residual_inf: out.residual_inf,
        nontrivial: false,
        iters: out.iters,
        converged: reason.is_none(),
        phi_below_one: ps_trace.iter().all(|r| r.phi < 1.0),
        ps_trace,
        u,
    };
    report.nontrivial = certify_nontrivial(&report);
    match reason {
        None => Ok(report),
        Some(reason) => Err(VarError::NonConvergence {
            reason,
            best: Box::new(report),
        }),
    }
}
