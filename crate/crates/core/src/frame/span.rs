//! Finite-dimensional working spaces of a frame operator.
//!
//! `V` is the span of the frame functions and `W = S(V)` the core on which
//! the truncated operator acts invertibly. Both are stored through
//! orthonormal cell-space bases, so coordinates carry the `L_2` geometry up
//! to the cell measure and every `L_p` norm is one matrix-vector product away.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dense::{dense_lp_norm, CellSet};
use crate::error::{Error, Result};
use crate::grid::{Exponents, GridFunction};
use crate::sweep;

/// Relative eigenvalue cut for the span of the frame functions.
const SPAN_RANK_TOL: f64 = 1e-12;
/// Relative singular value cut for the core `S(V)`.
const CORE_RANK_TOL: f64 = 1e-10;
/// Largest condition number accepted for the core operator.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug)]
pub struct WorkingSpan {
    pub cells: CellSet,
    pub exponents: Exponents,
    /// Frame functions as columns.
    pub synth: DMatrix<f64>,
    /// Functionals as columns.
    pub analysis: DMatrix<f64>,
    /// Orthonormal basis of `V`.
    pub basis: DMatrix<f64>,
    /// Orthonormal basis of `W`.
    pub core: DMatrix<f64>,
    /// `S` restricted to `W`, in `core` coordinates.
    pub core_op: DMatrix<f64>,
    pub condition: f64,
}

impl WorkingSpan {
    pub fn new(
        exponents: Exponents,
        functions: &[GridFunction],
        functionals: &[GridFunction],
        extra: &[GridFunction],
    ) -> Result<Self> {
        let spec = functions
            .first()
            .ok_or_else(|| Error::Parameter("frame has no functions".into()))?
            .spec()
            .clone();
        let cells = CellSet::covering(&spec, functions.iter().chain(functionals).chain(extra))?;
        let synth = cells.matrix(functions)?;
        let analysis = cells.matrix(functionals)?;
        let basis = orthonormal_range(&synth);
        if basis.ncols() == 0 {
            return Err(Error::Inversion {
                reason: "frame functions span the zero space".into(),
                condition: f64::INFINITY,
            });
        }
        let m = cells.measure();
        let a = (basis.transpose() * &synth) * (analysis.transpose() * &basis) * m;
        let svd = a.clone().svd(true, false);
        let smax = svd.singular_values.max();
        let mut order: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > CORE_RANK_TOL * smax.max(f64::MIN_POSITIVE))
            .collect();
        order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
        let u = svd.u.as_ref().expect("left singular vectors requested");
        let u_core = DMatrix::from_fn(a.nrows(), order.len(), |r, c| u[(r, order[c])]);
        let core = &basis * &u_core;
        let core_op = u_core.transpose() * &a * &u_core;
        let condition = if core_op.ncols() == 0 {
            f64::INFINITY
        } else {
            let s = core_op.singular_values();
            s.max() / s.min()
        };
        Ok(WorkingSpan {
            cells,
            exponents,
            synth,
            analysis,
            basis,
            core,
            core_op,
            condition,
        })
    }

    pub fn dim_span(&self) -> usize {
        self.basis.ncols()
    }

    pub fn dim_core(&self) -> usize {
        self.core.ncols()
    }

    pub fn measure(&self) -> f64 {
        self.cells.measure()
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        self.cells.norm(x, self.exponents.p)
    }

    pub fn dual_norm(&self, x: &DVector<f64>) -> f64 {
        self.cells.norm(x, self.exponents.p_dual)
    }

    /// `S x` for a cell vector.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.synth * (self.analysis.transpose() * x * self.measure())
    }

    /// Transpose of `apply` for the Euclidean cell product.
    pub fn apply_adjoint(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.analysis * (self.synth.transpose() * y * self.measure())
    }

    /// Checks `S_W` is usable, returning its LU factors.
    pub fn core_solver(&self) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> {
        if self.dim_core() == 0 || !(self.condition <= MAX_CONDITION) {
            return Err(Error::Inversion {
                reason: "frame operator is singular on its core span".into(),
                condition: self.condition,
            });
        }
        Ok(self.core_op.clone().lu())
    }

    /// Coordinates in `core`, failing when `x` is not in `W`.
    pub fn core_coords(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        let y = self.core.transpose() * x;
        let back = &self.core * &y;
        let scale = x.norm().max(f64::MIN_POSITIVE);
        let residual = (x - back).norm() / scale;
        if residual > 1e-8 {
            return Err(Error::NotInSpan { residual });
        }
        Ok(y)
    }

    /// `count` seeded gaussian elements of `W`, as cell vectors.
    pub fn sample_core(&self, seed: u64, stream: u64, count: usize) -> Vec<DVector<f64>> {
        sample_columns(&self.core, seed, stream, count)
    }

    /// `count` seeded gaussian elements of `V`, as cell vectors.
    pub fn sample_span(&self, seed: u64, stream: u64, count: usize) -> Vec<DVector<f64>> {
        sample_columns(&self.basis, seed, stream, count)
    }

    pub fn function(&self, x: &DVector<f64>) -> GridFunction {
        self.cells.function(x)
    }

    pub fn vector(&self, f: &GridFunction) -> Result<DVector<f64>> {
        self.cells.embed(f)
    }
}

fn sample_columns(basis: &DMatrix<f64>, seed: u64, stream: u64, count: usize) -> Vec<DVector<f64>> {
    let mut r = sweep::rng(seed, stream);
    (0..count)
        .map(|_| basis * sweep::gaussian_vector(&mut r, basis.ncols()))
        .collect()
}

/// Orthonormal basis for the column space of `m`, via its Gram matrix.
pub fn orthonormal_range(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let gram = m.transpose() * m;
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.max();
    let mut keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > SPAN_RANK_TOL * top.max(f64::MIN_POSITIVE))
        .collect();
    keep.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut q = DMatrix::zeros(m.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let v = m * eig.eigenvectors.column(i);
        q.set_column(c, &(&v / eig.eigenvalues[i].sqrt()));
    }
    // one Gram-Schmidt pass removes the rounding left by the eigen route
    q.qr().q().columns(0, keep.len()).into_owned()
}

/// `x ↦ sign(x)|x|^{r−1}`, the norming direction of `x` in `L_r`.
fn duality_map(x: &DVector<f64>, r: f64) -> DVector<f64> {
    if r.is_infinite() {
        let top = x.amax();
        return x.map(|v| if v.abs() == top { v.signum() } else { 0.0 });
    }
    if r == 1.0 {
        return x.map(f64::signum);
    }
    x.map(|v| v.signum() * v.abs().powf(r - 1.0))
}

/// Lower estimate of `sup ‖A x‖_p / ‖x‖_p` over `x` in the column span of the
/// orthonormal `domain`. Seeded gaussian starts are refined by the duality
/// power method, every iterate is evaluated exactly and the largest ratio
/// is returned, so the value is a certified lower bound.
#[allow(clippy::too_many_arguments)]
pub fn lp_norm_estimate(
    cells: &CellSet,
    p: f64,
    domain: &DMatrix<f64>,
    op: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    adjoint: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    seed: u64,
    starts: usize,
    iterations: usize,
) -> f64 {
    if domain.ncols() == 0 {
        return 0.0;
    }
    let m = cells.measure();
    let p_dual = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
    let ratio = |x: &DVector<f64>| {
        let nx = dense_lp_norm(x.as_slice(), p, m);
        if nx == 0.0 {
            0.0
        } else {
            dense_lp_norm(op(x).as_slice(), p, m) / nx
        }
    };
    let mut candidates: Vec<DVector<f64>> = (0..domain.ncols()).map(|j| domain.column(j).into_owned()).collect();
    candidates.extend(sample_columns(domain, seed, 0x0b0d, starts));
    let mut best = 0.0f64;
    for mut x in candidates {
        let mut current = ratio(&x);
        best = best.max(current);
        for _ in 0..iterations {
            let y = op(&x);
            if y.iter().all(|v| *v == 0.0) {
                break;
            }
            let z = adjoint(&duality_map(&y, p));
            let next = domain * (domain.transpose() * duality_map(&z, p_dual));
            let r = ratio(&next);
            if !(r > current * (1.0 + 1e-12)) {
                best = best.max(r);
                break;
            }
            current = r;
            best = best.max(r);
            x = next;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_indicator, GridSpec};

    #[test]
    fn orthonormal_range_drops_dependent_columns() {
        let m = DMatrix::from_column_slice(3, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        let q = orthonormal_range(&m);
        assert_eq!(q.ncols(), 2);
        assert!((q.transpose() * &q - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn identity_frame_has_full_core() {
        let spec = GridSpec::centered(1, 1, 4.0).unwrap();
        let fs: Vec<_> = (0..3)
            .map(|i| make_indicator(&spec, &[i as f64], &[i as f64 + 1.0], 1.0).unwrap())
            .collect();
        let w = WorkingSpan::new(Exponents::new(3.0).unwrap(), &fs, &fs, &[]).unwrap();
        assert_eq!((w.dim_span(), w.dim_core()), (3, 3));
        assert!((w.condition - 1.0).abs() < 1e-12);
        let op = |x: &DVector<f64>| w.apply(x);
        let adj = |x: &DVector<f64>| w.apply_adjoint(x);
        let n = lp_norm_estimate(&w.cells, 3.0, &w.basis, &op, &adj, 1, 4, 5);
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_estimate_finds_diagonal_peak() {
        let spec = GridSpec::centered(1, 0, 4.0).unwrap();
        let fs: Vec<_> = (0..2)
            .map(|i| make_indicator(&spec, &[i as f64], &[i as f64 + 1.0], 1.0).unwrap())
            .collect();
        let duals = vec![fs[0].scaled(3.0), fs[1].scaled(0.5)];
        let w = WorkingSpan::new(Exponents::new(4.0).unwrap(), &fs, &duals, &[]).unwrap();
        let op = |x: &DVector<f64>| w.apply(x);
        let adj = |x: &DVector<f64>| w.apply_adjoint(x);
        let n = lp_norm_estimate(&w.cells, 4.0, &w.basis, &op, &adj, 2, 3, 10);
        assert!((n - 3.0).abs() < 1e-9);
        assert!((w.condition - 6.0).abs() < 1e-9);
    }
}
