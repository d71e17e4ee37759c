//! `L_p`-normalized tensor Haar system on a reference cube at the origin.
//!
//! The reference cube is `[0, σ)^d` with `σ = 2^{-⌈log2(d)/2⌉}`, the largest
//! dyadic side whose diagonal does not exceed one. Elements are listed coarse
//! to fine: the normalized indicator of the cube, then for each dyadic level
//! the `2^d − 1` tensor wavelets on every subcube in lexicographic order.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dense::CellSet;
use crate::error::{Error, Result};
use crate::grid::{Exponents, GridFunction, GridSpec, LatticeBox};
use crate::sweep::{self, SweepMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisElement {
    /// 1-based position in the system.
    pub index: usize,
    pub function: GridFunction,
    pub dual: GridFunction,
    pub diameter: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisSystem {
    pub spec: GridSpec,
    pub exponents: Exponents,
    pub elements: Vec<BasisElement>,
    pub ku_lower: f64,
    pub ku_upper: Option<f64>,
}

/// Dyadic exponent `c` of the reference side `2^{-c}`.
pub fn reference_side_exponent(dim: usize) -> i32 {
    let mut c = 0;
    while 4usize.pow(c as u32) < dim {
        c += 1;
    }
    c
}

/// The reference cube `[0, σ)^d` as a lattice box of `spec`.
pub fn reference_cube(spec: &GridSpec) -> Result<LatticeBox> {
    let c = reference_side_exponent(spec.dim);
    let cells = spec.level - c;
    if cells < 0 {
        return Err(Error::Resolution(format!(
            "cell width {} exceeds the reference cube side",
            spec.cell_width()
        )));
    }
    let side = 1i64 << cells;
    let b = LatticeBox::new(vec![0; spec.dim], vec![side; spec.dim]);
    if !spec.bounds.contains_box(&b) {
        return Err(Error::Domain("reference cube at the origin is outside the grid box".into()));
    }
    Ok(b)
}

/// Bound on the unconditional constant of the Haar system in `L_p`.
pub fn haar_unconditional_bound(e: &Exponents) -> f64 {
    (e.p.max(e.p_dual) - 1.0).max(1.0)
}

/// Haar wavelet with sign pattern `pattern` (bit k set: wavelet in axis k) on the
/// subcube `origin + [0, side)^d`, in cells.
fn tensor_element(
    spec: &GridSpec,
    origin: &[i64],
    side: i64,
    pattern: u32,
    amplitude: f64,
) -> Result<GridFunction> {
    let cube = LatticeBox::new(
        origin.to_vec(),
        origin.iter().map(|o| o + side).collect(),
    );
    let half = side / 2;
    let cells = cube.cells().map(|c| {
        let mut sign = 1.0;
        for (k, (ck, ok)) in c.iter().zip(origin).enumerate() {
            if pattern >> k & 1 == 1 && ck - ok >= half {
                sign = -sign;
            }
        }
        (c, sign * amplitude)
    });
    GridFunction::from_cells(spec, cells.collect::<Vec<_>>())
}

/// The first `n` elements of the Haar system with their coordinate functionals.
pub fn haar_system(spec: &GridSpec, p: f64, n: usize) -> Result<BasisSystem> {
    let exponents = Exponents::new(p)?;
    if n == 0 {
        return Err(Error::Parameter("a basis needs at least one element".into()));
    }
    let cube = reference_cube(spec)?;
    let d = spec.dim;
    let c = reference_side_exponent(d);
    let cube_cells = cube.hi[0];
    let reference_side = 2f64.powi(-c);

    let mut elements = Vec::with_capacity(n);
    let push = |function: GridFunction, dual: GridFunction, elements: &mut Vec<BasisElement>| {
        let diameter = function.support_diameter();
        elements.push(BasisElement {
            index: elements.len() + 1,
            function,
            dual,
            diameter,
        });
    };

    let measure_exp = |side: f64, r: f64| if r.is_infinite() { 1.0 } else { side.powf(-(d as f64) / r) };
    push(
        tensor_element(spec, &vec![0; d], cube_cells, 0, measure_exp(reference_side, p))?,
        tensor_element(spec, &vec![0; d], cube_cells, 0, measure_exp(reference_side, exponents.p_dual))?,
        &mut elements,
    );

    let mut level = 0u32;
    while elements.len() < n {
        let side = cube_cells >> level;
        if side < 2 {
            return Err(Error::Resolution(format!(
                "{n} Haar elements need finer cells than {}",
                spec.cell_width()
            )));
        }
        let per_axis = 1i64 << level;
        let sub = LatticeBox::new(vec![0; d], vec![per_axis; d]);
        let sigma = reference_side / per_axis as f64;
        'cubes: for q in sub.cells() {
            let origin: Vec<i64> = q.iter().map(|x| x * side).collect();
            for pattern in 1u32..(1 << d) {
                if elements.len() == n {
                    break 'cubes;
                }
                push(
                    tensor_element(spec, &origin, side, pattern, measure_exp(sigma, p))?,
                    tensor_element(spec, &origin, side, pattern, measure_exp(sigma, exponents.p_dual))?,
                    &mut elements,
                );
            }
        }
        level += 1;
    }

    Ok(BasisSystem {
        spec: spec.clone(),
        exponents,
        elements,
        ku_lower: 1.0,
        ku_upper: Some(haar_unconditional_bound(&exponents)),
    })
}

impl BasisSystem {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn functions(&self) -> Vec<GridFunction> {
        self.elements.iter().map(|e| e.function.clone()).collect()
    }

    pub fn duals(&self) -> Vec<GridFunction> {
        self.elements.iter().map(|e| e.dual.clone()).collect()
    }

    /// Replaces the rigorous upper bound; it must dominate the current estimate.
    pub fn with_upper_bound(mut self, bound: f64) -> Result<Self> {
        if bound < self.ku_lower {
            return Err(Error::Parameter(format!(
                "upper bound {bound} below the estimated lower bound {}",
                self.ku_lower
            )));
        }
        self.ku_upper = Some(bound);
        Ok(self)
    }
}

/// `h_i'` for a 1-based index.
pub fn coordinate_functional(system: &BasisSystem, i: usize) -> Result<GridFunction> {
    if i == 0 || i > system.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: system.len(),
        });
    }
    Ok(system.elements[i - 1].dual.clone())
}

/// Test inputs per prefix length.
const INPUTS_PER_PREFIX: usize = 6;

/// Certified lower bound for the unconditional constant: the largest
/// `‖Σ c_i h_i'(g) h_i‖_p / ‖g‖_p` over the tested inputs and signs, at least 1.
///
/// Inputs are the basis elements and, for every prefix length `m`, a few
/// random combinations of `h_1..h_m` drawn from a stream that depends only on
/// `m`, so growing the system only adds inputs.
pub fn unconditional_constant_estimate(
    system: &BasisSystem,
    mode: SweepMode,
    seed: u64,
) -> Result<f64> {
    let n = system.len();
    let fs = system.functions();
    let duals = system.duals();
    let cells = CellSet::covering(&system.spec, fs.iter().chain(&duals))?;
    let synth = cells.matrix(&fs)?;
    let analysis = cells.matrix(&duals)?;
    let p = system.exponents.p;

    let mut inputs: Vec<DVector<f64>> = Vec::new();
    for m in 1..=n {
        let mut e = DVector::zeros(n);
        e[m - 1] = 1.0;
        inputs.push(e);
        let mut r = sweep::rng(seed, m as u64);
        for _ in 0..INPUTS_PER_PREFIX {
            let head = sweep::gaussian_vector(&mut r, m);
            let mut a = DVector::zeros(n);
            a.rows_mut(0, m).copy_from(&head);
            inputs.push(a);
        }
    }
    let mut coeffs = Vec::with_capacity(inputs.len());
    let mut norms = Vec::with_capacity(inputs.len());
    for a in &inputs {
        let g = &synth * a;
        norms.push(cells.norm(&g, p));
        coeffs.push(analysis.transpose() * &g * cells.measure());
    }
    let signs = sweep::sign_set(n, mode, seed, &[])?;
    let best = sweep::max_signed_ratio(&synth, &coeffs, &norms, &signs, p, cells.measure());
    Ok(best.value.max(1.0))
}
