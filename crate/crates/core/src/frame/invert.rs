use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;

use super::model::FramePair;
use super::span::WorkingSpan;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InversionMethod {
    Neumann,
    Direct,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Inversion {
    pub solution: GridFunction,
    pub method: InversionMethod,
    pub iterations: usize,
    /// `‖S(x) − rhs‖_p / ‖rhs‖_p`.
    pub residual: f64,
}

const MAX_NEUMANN_TERMS: usize = 10_000;

/// Spectral norm of `I − S_W`; below one the Neumann series converges.
pub fn neumann_contraction(span: &WorkingSpan) -> f64 {
    let w = span.dim_core();
    if w == 0 {
        return f64::INFINITY;
    }
    (DMatrix::identity(w, w) - &span.core_op).singular_values().max()
}

/// Solves `S(x) = rhs` inside the core span, by the Neumann series when
/// `‖I − S‖ < 1` there and by a direct solve otherwise.
pub fn invert_frame_operator(frame: &FramePair, rhs: &GridFunction, tol: f64) -> Result<Inversion> {
    if !(tol > 0.0) {
        return Err(Error::Parameter("tolerance must be positive".into()));
    }
    if rhs.spec() != frame.spec() {
        return Err(Error::SpecMismatch);
    }
    let span = WorkingSpan::new(frame.exponents, &frame.functions, &frame.functionals, std::slice::from_ref(rhs))?;
    invert_on(&span, &span.vector(rhs)?, tol)
}

pub(crate) fn invert_on(span: &WorkingSpan, rhs: &DVector<f64>, tol: f64) -> Result<Inversion> {
    let rhs_norm = span.norm(rhs);
    if rhs_norm == 0.0 {
        return Ok(Inversion {
            solution: span.function(rhs),
            method: InversionMethod::Neumann,
            iterations: 0,
            residual: 0.0,
        });
    }
    let b = span.core_coords(rhs)?;
    let residual_of = |y: &DVector<f64>| span.norm(&(&span.core * (&b - &span.core_op * y))) / rhs_norm;

    if neumann_contraction(span) < 1.0 {
        let mut y = DVector::zeros(b.len());
        for k in 1..=MAX_NEUMANN_TERMS {
            y += &b - &span.core_op * &y;
            let r = residual_of(&y);
            if r <= tol {
                return Ok(Inversion {
                    solution: span.function(&(&span.core * &y)),
                    method: InversionMethod::Neumann,
                    iterations: k,
                    residual: r,
                });
            }
        }
    }
    let lu = span.core_solver()?;
    let y = lu.solve(&b).ok_or_else(|| Error::Inversion {
        reason: "direct solve failed".into(),
        condition: span.condition,
    })?;
    let r = residual_of(&y);
    if r > tol {
        return Err(Error::Inversion {
            reason: format!("residual {r:e} above tolerance {tol:e}"),
            condition: span.condition,
        });
    }
    Ok(Inversion {
        solution: span.function(&(&span.core * &y)),
        method: InversionMethod::Direct,
        iterations: 1,
        residual: r,
    })
}

#[derive(Clone, Debug)]
pub struct Promotion {
    pub frame: FramePair,
    /// Working span of the operator that was inverted.
    pub span: WorkingSpan,
    pub max_residual: f64,
}

/// Reconstruction samples checked inside `promote_to_schauder_frame`.
const PROMOTION_CHECKS: usize = 8;

/// Replaces every functional by `f_i' ∘ S^{-1}` on the core span; the new
/// functionals are materialized as elements of that span.
pub fn promote_to_schauder_frame(frame: &FramePair, tol: f64) -> Result<Promotion> {
    let span = frame.working_span()?;
    promote_with(frame, &frame.functionals, span, tol)
}

/// Promotion of `{f_i, G_i'}` for the operator assembled in `span`.
pub(crate) fn promote_with(
    frame: &FramePair,
    functionals: &[GridFunction],
    span: WorkingSpan,
    tol: f64,
) -> Result<Promotion> {
    if !(tol > 0.0) {
        return Err(Error::Parameter("tolerance must be positive".into()));
    }
    let lu_t = span.core_op.transpose().lu();
    span.core_solver()?;
    let projected = span.core.transpose() * &span.analysis;
    let mut promoted = Vec::with_capacity(functionals.len());
    for j in 0..projected.ncols() {
        let z = lu_t.solve(&projected.column(j).into_owned()).ok_or_else(|| Error::Inversion {
            reason: "transposed solve failed".into(),
            condition: span.condition,
        })?;
        promoted.push(span.function(&(&span.core * z)));
    }
    let out = FramePair {
        exponents: frame.exponents,
        functions: frame.functions.clone(),
        functionals: promoted,
        unconditional_claimed: frame.unconditional_claimed,
    };

    let new_analysis = span.cells.matrix(&out.functionals)?;
    let mut worst = 0.0f64;
    for g in span.sample_core(0x5eed, 0x9a, PROMOTION_CHECKS) {
        let coeffs = new_analysis.transpose() * &g * span.measure();
        let r = span.norm(&(&span.synth * coeffs - &g)) / span.norm(&g);
        worst = worst.max(r);
    }
    if worst > tol {
        return Err(Error::Inversion {
            reason: format!("reconstruction residual {worst:e} above tolerance {tol:e}"),
            condition: span.condition,
        });
    }
    Ok(Promotion {
        frame: out,
        span,
        max_residual: worst,
    })
}
