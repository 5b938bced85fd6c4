//! Scalar fields frozen at the quadrature points of a mesh.
//!
//! Energies are evaluated thousands of times per solve, so exponent and
//! coefficient expressions are evaluated once here. Gradient terms use the
//! centroid value (one-point rule); terms nonlinear in `u` use the three
//! interior points of [`crate::mesh::VALUE_RULE`].

use alloc::string::String;
use alloc::vec::Vec;

use crate::expr::{EvalError, ScalarField};
use crate::mesh::{Mesh, VALUE_RULE};

#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub label: String,
    pub centroid: Vec<f64>,
    pub quad: Vec<[f64; 3]>,
}

impl SampledField {
    pub fn sample(field: &ScalarField, mesh: &Mesh) -> Result<Self, EvalError> {
        let mut centroid = Vec::with_capacity(mesh.num_triangles());
        let mut quad = Vec::with_capacity(mesh.num_triangles());
        let pts = VALUE_RULE.points();
        for (t, g) in mesh.geometry().iter().enumerate() {
            centroid.push(field.eval(g.centroid)?);
            let mut q = [0.0; 3];
            for (k, &(b, _)) in pts.iter().enumerate() {
                q[k] = field.eval(mesh.map_point(t, b))?;
            }
            quad.push(q);
        }
        Ok(SampledField {
            label: field.label.clone(),
            centroid,
            quad,
        })
    }

    pub fn constant(label: impl Into<String>, mesh: &Mesh, value: f64) -> Self {
        SampledField {
            label: label.into(),
            centroid: alloc::vec![value; mesh.num_triangles()],
            quad: alloc::vec![[value; 3]; mesh.num_triangles()],
        }
    }

    /// Smallest and largest sampled value (centroids and quadrature points).
    pub fn range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in self.centroid.iter().chain(self.quad.iter().flatten()) {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        (lo, hi)
    }

    pub fn sup_abs(&self) -> f64 {
        let (lo, hi) = self.range();
        lo.abs().max(hi.abs())
    }
}

/// Tolerance above 1 required of sampled exponents.
pub const EXPONENT_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("exponent `{label}` takes value {value} <= 1 at a sample point")]
    NotCPlus { label: String, value: f64 },
    #[error("weight `{label}` takes negative value {value} at a sample point")]
    Negative { label: String, value: f64 },
}

fn check_exponent(f: &SampledField) -> Result<(), FieldError> {
    let (lo, _) = f.range();
    if !(lo > 1.0 + EXPONENT_MARGIN) {
        return Err(FieldError::NotCPlus {
            label: f.label.clone(),
            value: lo,
        });
    }
    Ok(())
}

fn check_nonnegative(f: &SampledField) -> Result<(), FieldError> {
    let (lo, _) = f.range();
    if !(lo >= 0.0) {
        return Err(FieldError::Negative {
            label: f.label.clone(),
            value: lo,
        });
    }
    Ok(())
}

/// The exponents and weight of `H(x, t) = t^p(x) + mu(x) t^q(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublePhase {
    pub p: SampledField,
    pub q: SampledField,
    pub mu: SampledField,
}

impl DoublePhase {
    /// Requires `p, q > 1` and `mu >= 0` at every sample.
    pub fn new(p: SampledField, q: SampledField, mu: SampledField) -> Result<Self, FieldError> {
        check_exponent(&p)?;
        check_exponent(&q)?;
        check_nonnegative(&mu)?;
        Ok(DoublePhase { p, q, mu })
    }

    pub fn sample(
        mesh: &Mesh,
        p: &ScalarField,
        q: &ScalarField,
        mu: &ScalarField,
    ) -> Result<Self, FieldError> {
        Self::new(
            SampledField::sample(p, mesh)?,
            SampledField::sample(q, mesh)?,
            SampledField::sample(mu, mesh)?,
        )
    }

    pub fn constant(mesh: &Mesh, p: f64, q: f64, mu: f64) -> Result<Self, FieldError> {
        Self::new(
            SampledField::constant("p", mesh, p),
            SampledField::constant("q", mesh, q),
            SampledField::constant("mu", mesh, mu),
        )
    }

    /// `(p-, p+, q-, q+)` over the samples.
    pub fn exponent_bounds(&self) -> (f64, f64, f64, f64) {
        let (pl, ph) = self.p.range();
        let (ql, qh) = self.q.range();
        (pl, ph, ql, qh)
    }
}

/// Coefficients of the well term `alpha/2 (|u|^r / r - gamma)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub alpha: SampledField,
    pub gamma: SampledField,
    pub r: SampledField,
}

impl Reaction {
    /// Requires `r > 1` and `alpha >= 0`. Strict positivity of `alpha` and
    /// `gamma` is a standing hypothesis checked by
    /// [`crate::analysis::check_hypotheses`], not a precondition of assembly.
    pub fn new(alpha: SampledField, gamma: SampledField, r: SampledField) -> Result<Self, FieldError> {
        check_exponent(&r)?;
        check_nonnegative(&alpha)?;
        Ok(Reaction { alpha, gamma, r })
    }

    pub fn sample(
        mesh: &Mesh,
        alpha: &ScalarField,
        gamma: &ScalarField,
        r: &ScalarField,
    ) -> Result<Self, FieldError> {
        Self::new(
            SampledField::sample(alpha, mesh)?,
            SampledField::sample(gamma, mesh)?,
            SampledField::sample(r, mesh)?,
        )
    }

    pub fn constant(mesh: &Mesh, alpha: f64, gamma: f64, r: f64) -> Result<Self, FieldError> {
        Self::new(
            SampledField::constant("alpha", mesh, alpha),
            SampledField::constant("gamma", mesh, gamma),
            SampledField::constant("r", mesh, r),
        )
    }

    /// No well term at all (`alpha = 0`).
    pub fn none(mesh: &Mesh) -> Self {
        Reaction {
            alpha: SampledField::constant("alpha", mesh, 0.0),
            gamma: SampledField::constant("gamma", mesh, 1.0),
            r: SampledField::constant("r", mesh, 2.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_rect_mesh;

    #[test]
    fn sampling_and_checks() {
        let m = build_rect_mesh(0.0, 0.0, 1.0, 1.0, 2, 2).unwrap();
        let p = ScalarField::parse("p", "2 + x").unwrap();
        let s = SampledField::sample(&p, &m).unwrap();
        let (lo, hi) = s.range();
        assert!(lo > 2.0 && hi < 3.0);
        assert!(DoublePhase::constant(&m, 2.5, 2.8, 1.0).is_ok());
        assert!(matches!(
            DoublePhase::constant(&m, 2.5, 2.8, -1.0),
            Err(FieldError::Negative { .. })
        ));
        assert!(matches!(
            DoublePhase::constant(&m, 1.0, 2.8, 1.0),
            Err(FieldError::NotCPlus { .. })
        ));
        let bad = ScalarField::parse("p", "1/(x-x)").unwrap();
        assert!(matches!(SampledField::sample(&bad, &m), Err(_)));
    }
}
