use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{pair, Exponents, GridFunction, GridSpec};
use crate::sweep::{self, SweepMode};

use super::span::WorkingSpan;

/// Paired sequences `{f_i, f_i'}` with their exponent context.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FramePair {
    pub exponents: Exponents,
    pub functions: Vec<GridFunction>,
    pub functionals: Vec<GridFunction>,
    #[serde(default)]
    pub unconditional_claimed: bool,
}

impl FramePair {
    pub fn new(p: f64, functions: Vec<GridFunction>, functionals: Vec<GridFunction>) -> Result<Self> {
        let exponents = Exponents::new(p)?;
        if functions.is_empty() {
            return Err(Error::Parameter("a frame needs at least one pair".into()));
        }
        if functions.len() != functionals.len() {
            return Err(Error::LengthMismatch {
                expected: functions.len(),
                got: functionals.len(),
            });
        }
        let spec = functions[0].spec();
        if functions.iter().chain(&functionals).any(|f| f.spec() != spec) {
            return Err(Error::SpecMismatch);
        }
        Ok(FramePair {
            exponents,
            functions,
            functionals,
            unconditional_claimed: false,
        })
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn spec(&self) -> &GridSpec {
        self.functions[0].spec()
    }

    pub fn p(&self) -> f64 {
        self.exponents.p
    }

    pub fn working_span(&self) -> Result<WorkingSpan> {
        WorkingSpan::new(self.exponents, &self.functions, &self.functionals, &[])
    }

    /// `(f_i'(g))_i`.
    pub fn coefficients(&self, g: &GridFunction) -> Result<Vec<f64>> {
        self.functionals.iter().map(|fp| pair(fp, g)).collect()
    }
}

/// `S(g) = Σ f_i'(g) f_i`.
pub fn apply_frame_operator(frame: &FramePair, g: &GridFunction) -> Result<GridFunction> {
    if g.spec() != frame.spec() {
        return Err(Error::SpecMismatch);
    }
    let mut out = GridFunction::zero(frame.spec());
    for (f, fp) in frame.functions.iter().zip(&frame.functionals) {
        out.add_scaled(pair(fp, g)?, f)?;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameConstants {
    pub k: f64,
    pub k_u: f64,
    pub mode: SweepMode,
    pub seed: u64,
    pub inputs: usize,
    pub sign_vectors: usize,
    /// Input and prefix length attaining `k`.
    pub k_witness: (usize, usize),
    /// Input and sign vector attaining `k_u`.
    pub k_u_witness: (usize, Vec<f64>),
}

/// Random test inputs drawn from the span of the frame functions.
pub const DEFAULT_INPUTS: usize = 16;
const INPUT_STREAM: u64 = 0x1f;

/// Lower bounds for the frame and unconditional frame constants over
/// the functions themselves and seeded random elements of their span.
pub fn frame_constants(frame: &FramePair, mode: SweepMode, seed: u64) -> Result<FrameConstants> {
    let span = frame.working_span()?;
    let mut inputs: Vec<DVector<f64>> = (0..frame.len()).map(|j| span.synth.column(j).into_owned()).collect();
    inputs.extend(span.sample_span(seed, INPUT_STREAM, DEFAULT_INPUTS));
    constants_for(&span, &inputs, mode, seed, &[])
}

/// Same estimate over caller-supplied inputs.
pub fn frame_constants_on(
    frame: &FramePair,
    inputs: &[GridFunction],
    mode: SweepMode,
    seed: u64,
) -> Result<FrameConstants> {
    let span = WorkingSpan::new(frame.exponents, &frame.functions, &frame.functionals, inputs)?;
    let vectors = inputs.iter().map(|g| span.vector(g)).collect::<Result<Vec<_>>>()?;
    constants_for(&span, &vectors, mode, seed, &[])
}

pub(crate) fn constants_for(
    span: &WorkingSpan,
    inputs: &[DVector<f64>],
    mode: SweepMode,
    seed: u64,
    extra_signs: &[Vec<f64>],
) -> Result<FrameConstants> {
    let p = span.exponents.p;
    let m = span.measure();
    let coeffs: Vec<DVector<f64>> = inputs.iter().map(|g| span.analysis.transpose() * g * m).collect();
    let norms: Vec<f64> = inputs.iter().map(|g| span.norm(g)).collect();
    let n = span.synth.ncols();
    let signs = sweep::sign_set(n, mode, seed, extra_signs)?;
    let (k, gk, mk) = sweep::max_prefix_ratio(&span.synth, &coeffs, &norms, p, m);
    let ku = sweep::max_signed_ratio(&span.synth, &coeffs, &norms, &signs, p, m);
    let k = k.max(1.0);
    Ok(FrameConstants {
        k,
        k_u: ku.value.max(k),
        mode,
        seed,
        inputs: inputs.len(),
        sign_vectors: signs.len(),
        k_witness: (gk, mk),
        k_u_witness: (ku.input, ku.signs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_indicator;

    fn bumps(n: usize, p: f64) -> FramePair {
        let spec = GridSpec::centered(1, 1, 16.0).unwrap();
        let fs: Vec<_> = (0..n)
            .map(|i| make_indicator(&spec, &[2.0 * i as f64], &[2.0 * i as f64 + 1.0], 1.0).unwrap())
            .collect();
        FramePair::new(p, fs.clone(), fs).unwrap()
    }

    #[test]
    fn basis_pair_reproduces_its_span() {
        let frame = bumps(3, 3.0);
        let g = crate::grid::linear_combination(&[1.0, -2.0, 0.5], &frame.functions).unwrap();
        assert_eq!(apply_frame_operator(&frame, &g).unwrap(), g);
        let z = GridFunction::zero(frame.spec());
        assert!(apply_frame_operator(&frame, &z).unwrap().is_zero());
    }

    #[test]
    fn single_pair_constants_are_one() {
        let c = frame_constants(&bumps(1, 3.0), SweepMode::Exhaustive, 0).unwrap();
        assert!((c.k - 1.0).abs() < 1e-14 && (c.k_u - 1.0).abs() < 1e-14);
        let c = frame_constants(&bumps(4, 2.0), SweepMode::Exhaustive, 0).unwrap();
        assert!((c.k - 1.0).abs() < 1e-12 && (c.k_u - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let frame = bumps(2, 3.0);
        assert!(FramePair::new(3.0, frame.functions.clone(), vec![]).is_err());
        let other = GridFunction::zero(&GridSpec::centered(1, 2, 1.0).unwrap());
        assert_eq!(apply_frame_operator(&frame, &other), Err(Error::SpecMismatch));
    }
}
