//! Certified brackets for `‖Φ‖ = sup_{‖a‖_2 = 1} ‖Σ a_k f_k‖_p` over a short list of functions.
//!
//! The unit sphere is covered by the radial images of the faces `x_j = 1` of
//! the cube `[-1, 1]^n` (the faces `x_j = −1` are redundant by symmetry). On a
//! box `B` with center `c` and half-widths `r`,
//! `‖Φ(x)‖ ≤ ‖Φ(c)‖ + Σ r_k ‖f_k‖` and `‖x‖_2 ≥ dist(0, B)`, which bounds the
//! ratio over the box. Boxes are refined best-first until the bracket closes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dense::CellSet;
use crate::error::{Error, Result};
use crate::grid::GridFunction;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    pub boxes: usize,
}

impl NormBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

struct Patch {
    upper: f64,
    center: Vec<f64>,
    half: Vec<f64>,
}

impl PartialEq for Patch {
    fn eq(&self, other: &Self) -> bool {
        self.upper == other.upper
    }
}
impl Eq for Patch {}
impl PartialOrd for Patch {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Patch {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.total_cmp(&other.upper)
    }
}

/// Bracket for the `ℓ_2 → L_p` synthesis norm of `fs`, refined until
/// `upper − lower <= rel_tol · lower` or `max_boxes` boxes were processed.
pub fn synthesis_norm_bracket(fs: &[GridFunction], p: f64, rel_tol: f64, max_boxes: usize) -> Result<NormBracket> {
    let n = fs.len();
    let Some(first) = fs.first() else {
        return Err(Error::Parameter("no functions to synthesize".into()));
    };
    let cells = CellSet::covering(first.spec(), fs)?;
    let synth = cells.matrix(fs)?;
    let norms: Vec<f64> = fs.iter().map(|f| f.lp_norm(p)).collect();
    let eval = |x: &[f64]| cells.norm(&(&synth * DVector::from_column_slice(x)), p);

    let mut lower = 0.0f64;
    let mut heap = BinaryHeap::new();
    let push = |center: Vec<f64>, half: Vec<f64>, lower: &mut f64, heap: &mut BinaryHeap<Patch>| {
        let value = eval(&center);
        let c2: f64 = center.iter().map(|v| v * v).sum();
        *lower = lower.max(value / c2.sqrt());
        let spread: f64 = half.iter().zip(&norms).map(|(r, nk)| r * nk).sum();
        let dist2: f64 = center
            .iter()
            .zip(&half)
            .map(|(c, r)| (c.abs() - r).max(0.0).powi(2))
            .sum();
        heap.push(Patch {
            upper: (value + spread) / dist2.sqrt(),
            center,
            half,
        });
    };
    for j in 0..n {
        let mut center = vec![0.0; n];
        center[j] = 1.0;
        let mut half = vec![1.0; n];
        half[j] = 0.0;
        push(center, half, &mut lower, &mut heap);
    }

    let mut processed = 0;
    while let Some(top) = heap.peek() {
        if top.upper - lower <= rel_tol * lower || processed >= max_boxes {
            break;
        }
        let cell = heap.pop().expect("peeked");
        processed += 1;
        let (axis, _) = cell
            .half
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let h = cell.half[axis] / 2.0;
        for sign in [-1.0, 1.0] {
            let mut center = cell.center.clone();
            center[axis] += sign * h;
            let mut half = cell.half.clone();
            half[axis] = h;
            push(center, half, &mut lower, &mut heap);
        }
    }
    let upper = heap.peek().map_or(lower, |c| c.upper.max(lower));
    Ok(NormBracket {
        lower,
        upper,
        boxes: processed,
    })
}
