//! Steepest descent with Armijo backtracking.
//!
//! Each iteration tries a Barzilai-Borwein step first (step 1 on the first
//! iteration) and halves it until the Armijo condition holds. When the
//! predicted decrease is below the rounding level of the objective, the
//! Armijo test is replaced by its slope form
//! `<g(x - a g), g> >= -(1 - 2c) |g|^2` together with
//! `J(x - a g) <= J(x) + ROUNDING_SLACK |J(x)|`, so the objective trace is
//! nonincreasing up to that slack.

use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentParams {
    /// Stop once `max_i |grad_i| < tol_res`.
    pub tol_res: f64,
    pub max_iters: usize,
    /// Sufficient-decrease constant.
    pub armijo_c: f64,
    /// Backtracking factor.
    pub backtrack: f64,
    pub initial_step: f64,
    /// Use the Barzilai-Borwein step as the first trial step.
    pub bb_trial: bool,
}

impl Default for DescentParams {
    fn default() -> Self {
        DescentParams {
            tol_res: 1e-8,
            max_iters: 10_000,
            armijo_c: 1e-4,
            backtrack: 0.5,
            initial_step: 1.0,
            bb_trial: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub value: f64,
    pub residual_inf: f64,
    /// Euclidean length of the accepted update (0 on the initial row).
    pub step_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub residual_inf: f64,
    pub iters: usize,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DescentError<E> {
    #[error("objective evaluation failed: {0}")]
    Objective(E),
    #[error("descent stopped after {} iterations with residual {} ({reason})", .best.iters, .best.residual_inf)]
    NonConvergence {
        reason: &'static str,
        /// Best (last, since values decrease) iterate.
        best: DescentOutcome,
    },
}

/// Relative rounding allowance on the objective, in units of `|J|`.
pub const ROUNDING_SLACK: f64 = 64.0 * f64::EPSILON;

fn inf_norm(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `value` starting from `x0`; `grad` must return the gradient with
/// zeros at frozen coordinates, which then keep their starting values.
pub fn minimize<E>(
    x0: Vec<f64>,
    value: impl FnMut(&[f64]) -> Result<f64, E>,
    grad: impl FnMut(&[f64]) -> Result<Vec<f64>, E>,
    params: &DescentParams,
) -> Result<DescentOutcome, DescentError<E>> {
    minimize_observed(x0, value, grad, |_| {}, params)
}

/// [`minimize`] calling `observe` on the start point and on every accepted
/// iterate, in trace order.
pub fn minimize_observed<E>(
    x0: Vec<f64>,
    mut value: impl FnMut(&[f64]) -> Result<f64, E>,
    mut grad: impl FnMut(&[f64]) -> Result<Vec<f64>, E>,
    mut observe: impl FnMut(&[f64]),
    params: &DescentParams,
) -> Result<DescentOutcome, DescentError<E>> {
    let mut x = x0;
    observe(&x);
    let mut j = value(&x).map_err(DescentError::Objective)?;
    let mut g = grad(&x).map_err(DescentError::Objective)?;
    let mut res = inf_norm(&g);
    let mut trace = Vec::new();
    trace.push(TraceRow {
        iter: 0,
        value: j,
        residual_inf: res,
        step_norm: 0.0,
    });
    let mut step = params.initial_step;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut trial = x.clone();
    let done = |x: Vec<f64>, j: f64, res: f64, iters: usize, trace: Vec<TraceRow>| DescentOutcome {
        x,
        value: j,
        residual_inf: res,
        iters,
        trace,
    };

    for it in 1..=params.max_iters {
        if res < params.tol_res {
            return Ok(done(x, j, res, it - 1, trace));
        }
        if !j.is_finite() {
            let best = done(x, j, res, it - 1, trace);
            return Err(DescentError::NonConvergence {
                reason: "non-finite objective",
                best,
            });
        }
        if params.bb_trial {
            if let Some((xp, gp)) = &prev {
                let mut ss = 0.0;
                let mut sy = 0.0;
                for i in 0..x.len() {
                    let s = x[i] - xp[i];
                    let y = g[i] - gp[i];
                    ss += s * s;
                    sy += s * y;
                }
                let bb = ss / sy;
                step = if bb.is_finite() && bb > 0.0 { bb } else { params.initial_step };
            }
        } else {
            step = params.initial_step;
        }
        let g2 = dot(&g, &g);
        let noise = ROUNDING_SLACK * j.abs();
        let mut accepted = None;
        for _ in 0..200 {
            for i in 0..x.len() {
                trial[i] = x[i] - step * g[i];
            }
            let jt = value(&trial).map_err(DescentError::Objective)?;
            if jt <= j - params.armijo_c * step * g2 {
                accepted = Some((jt, None));
                break;
            }
            if jt <= j + noise {
                // Decrease below the resolution of J: test the slope instead.
                let gt = grad(&trial).map_err(DescentError::Objective)?;
                if dot(&gt, &g) >= -(1.0 - 2.0 * params.armijo_c) * g2 {
                    accepted = Some((jt, Some(gt)));
                    break;
                }
            }
            step *= params.backtrack;
            if step * math::sqrt(g2) < 1e-300 {
                break;
            }
        }
        let Some((jt, gt)) = accepted else {
            let best = done(x, j, res, it - 1, trace);
            return Err(DescentError::NonConvergence {
                reason: "line search failed",
                best,
            });
        };
        let gt = match gt {
            Some(gt) => gt,
            None => grad(&trial).map_err(DescentError::Objective)?,
        };
        let old_x = core::mem::replace(&mut x, trial.clone());
        let old_g = core::mem::replace(&mut g, gt);
        prev = Some((old_x, old_g));
        observe(&x);
        j = jt;
        res = inf_norm(&g);
        trace.push(TraceRow {
            iter: it,
            value: j,
            residual_inf: res,
            step_norm: step * math::sqrt(g2),
        });
    }
    if res < params.tol_res {
        let n = params.max_iters;
        return Ok(done(x, j, res, n, trace));
    }
    let best = done(x, j, res, params.max_iters, trace);
    Err(DescentError::NonConvergence {
        reason: "iteration budget exhausted",
        best,
    })
}
