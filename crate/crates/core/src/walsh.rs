//! Walsh system in Paley order on the unit cube `Q₀ = [0, 1)^d`.
//!
//! `wal_k` depends on the first coordinate only; the remaining axes carry the
//! constant profile. Every element takes the values `±1` on a set of measure
//! one, so its norm is 1 in every `L_r`.

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec, LatticeBox};

/// Number of binary digits needed to index `n` Walsh functions.
pub fn walsh_depth(n: usize) -> u32 {
    n.max(1).next_power_of_two().trailing_zeros()
}

/// Sign of `wal_k` on the dyadic interval `[c 2^{-depth}, (c+1) 2^{-depth})`.
pub fn walsh_sign(k: u64, c: u64, depth: u32) -> f64 {
    if depth == 0 {
        return 1.0;
    }
    let rev = c.reverse_bits() >> (64 - depth);
    if (k & rev).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `wal_0, …, wal_{n−1}` as grid functions.
pub fn walsh_system(spec: &GridSpec, n: usize) -> Result<Vec<GridFunction>> {
    let depth = walsh_depth(n);
    if spec.level < depth as i32 {
        return Err(Error::Resolution(format!(
            "{n} Walsh functions need cell width at most 2^-{depth}"
        )));
    }
    let side = spec.cells_per_unit();
    let cube = LatticeBox::new(vec![0; spec.dim], vec![side; spec.dim]);
    if !spec.bounds.contains_box(&cube) {
        return Err(Error::Domain("unit cube at the origin is outside the grid box".into()));
    }
    let coarsen = spec.level as u32 - depth;
    (0..n as u64)
        .map(|k| {
            GridFunction::from_cells(
                spec,
                cube.cells().map(|c| {
                    let v = walsh_sign(k, (c[0] as u64) >> coarsen, depth);
                    (c, v)
                }),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::pair;

    #[test]
    fn paley_order_in_one_dimension() {
        let spec = GridSpec::centered(1, 2, 2.0).unwrap();
        let w = walsh_system(&spec, 4).unwrap();
        let values: Vec<Vec<f64>> = w
            .iter()
            .map(|f| (0..4).map(|c| f.value_at(&[c])).collect())
            .collect();
        assert_eq!(values[0], vec![1.0, 1.0, 1.0, 1.0]);
        assert_eq!(values[1], vec![1.0, 1.0, -1.0, -1.0]);
        assert_eq!(values[2], vec![1.0, -1.0, 1.0, -1.0]);
        assert_eq!(values[3], vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn orthonormal_and_unit_in_every_norm() {
        let spec = GridSpec::centered(2, 3, 2.0).unwrap();
        let w = walsh_system(&spec, 7).unwrap();
        for (i, a) in w.iter().enumerate() {
            for r in [1.0, 1.5, 3.0, f64::INFINITY] {
                assert_eq!(a.lp_norm(r), 1.0);
            }
            for (j, b) in w.iter().enumerate() {
                assert_eq!(pair(a, b).unwrap(), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let spec = GridSpec::centered(1, 1, 2.0).unwrap();
        assert!(matches!(walsh_system(&spec, 3), Err(Error::Resolution(_))));
    }
}
