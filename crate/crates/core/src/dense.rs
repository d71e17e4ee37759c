//! Dense coordinates over a finite set of lattice cells.
//!
//! The frame algorithms work with a few dozen functions whose supports are
//! scattered over a huge box. Collecting the union of their supports once
//! turns every norm, pairing and synthesis into small vector arithmetic.

use std::collections::{BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{Cell, GridFunction, GridSpec};

#[derive(Clone, Debug)]
pub struct CellSet {
    spec: GridSpec,
    cells: Vec<Cell>,
    index: HashMap<Cell, usize>,
}

impl CellSet {
    /// Union of the supports of `fs`, in lattice order.
    pub fn covering<'a, I>(spec: &GridSpec, fs: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a GridFunction>,
    {
        let mut all = BTreeSet::new();
        for f in fs {
            if f.spec() != spec {
                return Err(Error::SpecMismatch);
            }
            all.extend(f.iter().map(|(c, _)| c.clone()));
        }
        let cells: Vec<Cell> = all.into_iter().collect();
        let index = cells.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Ok(CellSet {
            spec: spec.clone(),
            cells,
            index,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.spec.cell_measure()
    }

    /// Dense vector of `f`; values outside the set are dropped.
    pub fn project(&self, f: &GridFunction) -> DVector<f64> {
        let mut v = DVector::zeros(self.cells.len());
        for (c, x) in f.iter() {
            if let Some(&i) = self.index.get(c) {
                v[i] = x;
            }
        }
        v
    }

    /// Dense vector of `f`, failing if part of its support lies outside the set.
    pub fn embed(&self, f: &GridFunction) -> Result<DVector<f64>> {
        if f.spec() != &self.spec {
            return Err(Error::SpecMismatch);
        }
        if f.iter().any(|(c, _)| !self.index.contains_key(c)) {
            return Err(Error::Domain("function support leaves the working cell set".into()));
        }
        Ok(self.project(f))
    }

    pub fn matrix(&self, fs: &[GridFunction]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.cells.len(), fs.len());
        for (j, f) in fs.iter().enumerate() {
            m.set_column(j, &self.embed(f)?);
        }
        Ok(m)
    }

    pub fn function(&self, v: &DVector<f64>) -> GridFunction {
        GridFunction::from_cells(
            &self.spec,
            self.cells
                .iter()
                .zip(v.iter())
                .filter(|(_, x)| **x != 0.0)
                .map(|(c, x)| (c.clone(), *x)),
        )
        .expect("cells come from the spec")
    }

    pub fn norm(&self, v: &DVector<f64>, p: f64) -> f64 {
        dense_lp_norm(v.as_slice(), p, self.measure())
    }

    pub fn pair(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(b) * self.measure()
    }
}

/// `L_p` norm of a dense cell vector with cell measure `measure`.
pub fn dense_lp_norm(values: &[f64], p: f64, measure: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    if p == 1.0 {
        return values.iter().map(|v| v.abs()).sum::<f64>() * measure;
    }
    let s: f64 = if p == 2.0 {
        values.iter().map(|v| v * v).sum()
    } else {
        values.iter().map(|v| v.abs().powf(p)).sum()
    };
    if p == 2.0 {
        (s * measure).sqrt()
    } else {
        (s * measure).powf(1.0 / p)
    }
}
