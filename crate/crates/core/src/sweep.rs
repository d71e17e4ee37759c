//! Seeded sampling and sign sweeps shared by the constant estimators.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense::dense_lp_norm;
use crate::error::{Error, Result};

/// Largest sequence length for which every sign vector is enumerated.
pub const EXHAUSTIVE_LIMIT: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Exhaustive,
    Sampled { trials: usize },
}

impl SweepMode {
    /// Exhaustive up to `limit` elements, sampled beyond.
    pub fn auto(n: usize, limit: usize, trials: usize) -> Self {
        if n <= limit.min(EXHAUSTIVE_LIMIT) {
            SweepMode::Exhaustive
        } else {
            SweepMode::Sampled { trials }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepMode::Exhaustive => "exhaustive",
            SweepMode::Sampled { .. } => "sampled",
        }
    }
}

/// Independent deterministic stream `stream` of the generator seeded with `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

pub fn random_signs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

/// Sign vectors to test.
///
/// Exhaustive mode fixes the first sign to `+1` (the norm is even). Sampled
/// mode lists the all-ones vector, every prefix pattern `(+…+, −…−)`, the
/// caller's `extra` vectors, and then `trials` random vectors, so a larger
/// `trials` always tests a superset.
pub fn sign_set(n: usize, mode: SweepMode, seed: u64, extra: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Ok(vec![Vec::new()]);
    }
    match mode {
        SweepMode::Exhaustive => {
            if n > EXHAUSTIVE_LIMIT {
                return Err(Error::Parameter(format!(
                    "exhaustive sweep limited to n <= {EXHAUSTIVE_LIMIT}, got {n}"
                )));
            }
            Ok((0..1u64 << (n - 1))
                .map(|mask| (0..n).map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 }).collect())
                .collect())
        }
        SweepMode::Sampled { trials } => {
            let mut out = vec![vec![1.0; n]];
            for m in 1..n {
                out.push((0..n).map(|i| if i < m { 1.0 } else { -1.0 }).collect());
            }
            out.extend(extra.iter().filter(|e| e.len() == n).cloned());
            let mut r = rng(seed, 0x5167);
            for _ in 0..trials {
                out.push(random_signs(&mut r, n));
            }
            Ok(out)
        }
    }
}

/// Maximum of `‖F (c ∘ α_g)‖_p / ‖g‖_p` over test inputs `g` and sign vectors `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepMax {
    pub value: f64,
    pub input: usize,
    pub signs: Vec<f64>,
}

pub fn max_signed_ratio(
    synth: &DMatrix<f64>,
    coeffs: &[DVector<f64>],
    input_norms: &[f64],
    signs: &[Vec<f64>],
    p: f64,
    measure: f64,
) -> SweepMax {
    let best = signs
        .par_iter()
        .enumerate()
        .map(|(si, c)| {
            let mut best = (0.0f64, 0usize, si);
            let mut scaled = DVector::zeros(synth.ncols());
            for (gi, (alpha, gn)) in coeffs.iter().zip(input_norms).enumerate() {
                if *gn == 0.0 {
                    continue;
                }
                for i in 0..alpha.len() {
                    scaled[i] = c[i] * alpha[i];
                }
                let v = synth * &scaled;
                let r = dense_lp_norm(v.as_slice(), p, measure) / gn;
                if r > best.0 {
                    best = (r, gi, si);
                }
            }
            best
        })
        .reduce(
            || (0.0, 0, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.2 < a.2) {
                    b
                } else {
                    a
                }
            },
        );
    SweepMax {
        value: best.0,
        input: best.1,
        signs: signs.get(best.2).cloned().unwrap_or_default(),
    }
}

/// Maximum of `‖Σ_{i≤m} α_i f_i‖_p / ‖g‖_p` over inputs and prefixes `m`.
pub fn max_prefix_ratio(
    synth: &DMatrix<f64>,
    coeffs: &[DVector<f64>],
    input_norms: &[f64],
    p: f64,
    measure: f64,
) -> (f64, usize, usize) {
    coeffs
        .par_iter()
        .zip(input_norms.par_iter())
        .enumerate()
        .map(|(gi, (alpha, gn))| {
            let mut best = (0.0f64, gi, 0usize);
            if *gn == 0.0 {
                return best;
            }
            let mut acc = DVector::zeros(synth.nrows());
            for m in 0..alpha.len() {
                acc.axpy(alpha[m], &synth.column(m), 1.0);
                let r = dense_lp_norm(acc.as_slice(), p, measure) / gn;
                if r > best.0 {
                    best = (r, gi, m + 1);
                }
            }
            best
        })
        .reduce(|| (0.0, 0, 0), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
}
