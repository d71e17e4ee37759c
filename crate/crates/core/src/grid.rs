//! Piecewise-constant model of `L_p(R^d)` on a dyadic lattice.
//!
//! A cell with index `c ∈ Z^d` covers `Π_k [c_k h, (c_k + 1) h)` where `h = 2^{-level}`.
//! Functions store only their nonzero cells, so translates placed far apart
//! cost nothing for the empty space between them. Functions and functionals
//! share one representation; the exponent is supplied at each norm or pairing
//! site.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice cell index.
pub type Cell = Vec<i64>;

/// Half-open box of cells `lo[k] <= c[k] < hi[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl LatticeBox {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        LatticeBox { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l >= h)
    }

    pub fn contains_cell(&self, cell: &[i64]) -> bool {
        cell.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(c, (l, h))| l <= c && c < h)
    }

    pub fn contains_box(&self, other: &LatticeBox) -> bool {
        other.is_empty()
            || self
                .lo
                .iter()
                .zip(&self.hi)
                .zip(other.lo.iter().zip(&other.hi))
                .all(|((l, h), (ol, oh))| l <= ol && oh <= h)
    }

    pub fn intersects(&self, other: &LatticeBox) -> bool {
        !self.is_empty()
            && !other.is_empty()
            && self
                .lo
                .iter()
                .zip(&self.hi)
                .zip(other.lo.iter().zip(&other.hi))
                .all(|((l, h), (ol, oh))| l.max(ol) < h.min(oh))
    }

    pub fn shifted(&self, shift: &[i64]) -> LatticeBox {
        LatticeBox {
            lo: self.lo.iter().zip(shift).map(|(a, s)| a + s).collect(),
            hi: self.hi.iter().zip(shift).map(|(a, s)| a + s).collect(),
        }
    }

    /// Number of cells, saturating.
    pub fn cell_count(&self) -> u128 {
        if self.is_empty() {
            return 0;
        }
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l) as u128)
            .fold(1u128, |acc, n| acc.saturating_mul(n))
    }

    /// Row-major iteration over every cell of the box.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let total = self.cell_count() as usize;
        let d = self.dim();
        (0..total).map(move |mut flat| {
            let mut cell = vec![0i64; d];
            for k in (0..d).rev() {
                let len = (self.hi[k] - self.lo[k]) as usize;
                cell[k] = self.lo[k] + (flat % len) as i64;
                flat /= len;
            }
            cell
        })
    }
}

/// Dimension, cell width `2^{-level}` and the bounding box every function must live in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub level: i32,
    pub bounds: LatticeBox,
}

impl GridSpec {
    /// Builds a spec from real box endpoints, which must be multiples of the cell width.
    pub fn new(dim: usize, level: i32, lo: &[f64], hi: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        if !(-30..=30).contains(&level) {
            return Err(Error::Parameter(format!("grid level {level} outside -30..=30")));
        }
        let proto = GridSpec {
            dim,
            level,
            bounds: LatticeBox::new(vec![0; dim], vec![0; dim]),
        };
        let bounds = proto.lattice_box(lo, hi)?;
        if bounds.is_empty() {
            return Err(Error::Parameter("grid box is empty".into()));
        }
        Ok(GridSpec { bounds, ..proto })
    }

    /// Symmetric box `[-half_width, half_width]^d`.
    pub fn centered(dim: usize, level: i32, half_width: f64) -> Result<Self> {
        GridSpec::new(dim, level, &vec![-half_width; dim], &vec![half_width; dim])
    }

    pub fn cell_width(&self) -> f64 {
        2f64.powi(-self.level)
    }

    pub fn cell_measure(&self) -> f64 {
        2f64.powi(-self.level * self.dim as i32)
    }

    /// Cells per unit length; zero when cells are wider than one.
    pub fn cells_per_unit(&self) -> i64 {
        if self.level >= 0 {
            1i64 << self.level
        } else {
            0
        }
    }

    fn to_cells(&self, x: f64) -> Result<i64> {
        let scaled = x * 2f64.powi(self.level);
        if !scaled.is_finite() || scaled.abs() > 9.0e15 {
            return Err(Error::Scale(format!("coordinate {x} not representable on the lattice")));
        }
        if scaled.fract() != 0.0 {
            return Err(Error::Alignment(format!(
                "{x} is not a multiple of the cell width {}",
                self.cell_width()
            )));
        }
        Ok(scaled as i64)
    }

    /// Converts real endpoints `[lo, hi]` into the covered cell range.
    pub fn lattice_box(&self, lo: &[f64], hi: &[f64]) -> Result<LatticeBox> {
        if lo.len() != self.dim || hi.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: lo.len().min(hi.len()),
            });
        }
        let lo = lo.iter().map(|&x| self.to_cells(x)).collect::<Result<Vec<_>>>()?;
        let hi = hi.iter().map(|&x| self.to_cells(x)).collect::<Result<Vec<_>>>()?;
        Ok(LatticeBox::new(lo, hi))
    }

    /// Nearest lattice point to `point`, in cell units, and the Euclidean snap distance.
    pub fn snap(&self, point: &[f64]) -> Result<(Vec<i64>, f64)> {
        if point.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        let scale = 2f64.powi(self.level);
        let mut shift = Vec::with_capacity(self.dim);
        let mut dist2 = 0.0;
        for &x in point {
            let scaled = x * scale;
            if !scaled.is_finite() || scaled.abs() > 9.0e15 {
                return Err(Error::Scale(format!("coordinate {x} not representable on the lattice")));
            }
            let r = scaled.round();
            let delta = (r - scaled) / scale;
            dist2 += delta * delta;
            shift.push(r as i64);
        }
        Ok((shift, dist2.sqrt()))
    }

    /// Real coordinates of a lattice shift.
    pub fn shift_to_point(&self, shift: &[i64]) -> Vec<f64> {
        shift.iter().map(|&s| s as f64 * self.cell_width()).collect()
    }
}

/// `p`, its conjugate `p'`, `s = max{2, p}` and `q = max{2, p'}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub p: f64,
    pub p_dual: f64,
    pub s: f64,
    pub q: f64,
}

impl Exponents {
    /// `p = 1` is accepted for the `ℓ_1` diagnostics; its conjugate is `∞`.
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::Parameter(format!("exponent p = {p} must lie in [1, ∞)")));
        }
        let p_dual = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
        Ok(Exponents {
            p,
            p_dual,
            s: p.max(2.0),
            q: p_dual.max(2.0),
        })
    }
}

/// Finite sequence of signs `±1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignVector(Vec<f64>);

impl SignVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|c| c.abs() != 1.0) {
            return Err(Error::Parameter("sign entries must be ±1".into()));
        }
        Ok(SignVector(entries))
    }

    /// Bit `i` of `mask` set means entry `i` is `-1`.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        SignVector((0..len).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect())
    }

    pub fn ones(len: usize) -> Self {
        SignVector(vec![1.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `ℓ_r` norm of a finite sequence; `r = ∞` gives the sup norm.
pub fn seq_norm(values: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    } else if r == 1.0 {
        values.iter().map(|v| v.abs()).sum()
    } else if r == 2.0 {
        values.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        values.iter().map(|v| v.abs().powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// Compactly supported piecewise-constant function; absent cells are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "GridFunctionRepr", try_from = "GridFunctionRepr")]
pub struct GridFunction {
    spec: GridSpec,
    cells: BTreeMap<Cell, f64>,
}

impl GridFunction {
    pub fn zero(spec: &GridSpec) -> Self {
        GridFunction {
            spec: spec.clone(),
            cells: BTreeMap::new(),
        }
    }

    /// Collects `(cell, value)` pairs; zero values are dropped, repeated cells add up.
    pub fn from_cells<I>(spec: &GridSpec, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Cell, f64)>,
    {
        let mut map = BTreeMap::new();
        for (cell, value) in cells {
            if cell.len() != spec.dim {
                return Err(Error::LengthMismatch {
                    expected: spec.dim,
                    got: cell.len(),
                });
            }
            if !spec.bounds.contains_cell(&cell) {
                return Err(Error::Domain(format!("cell {cell:?} outside the grid box")));
            }
            if !value.is_finite() {
                return Err(Error::Parameter("cell values must be finite".into()));
            }
            *map.entry(cell).or_insert(0.0) += value;
        }
        map.retain(|_, v| *v != 0.0);
        Ok(GridFunction {
            spec: spec.clone(),
            cells: map,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.cells.len()
    }

    pub fn value_at(&self, cell: &[i64]) -> f64 {
        self.cells.get(cell).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Cell, f64)> {
        self.cells.iter().map(|(c, v)| (c, *v))
    }

    /// Smallest lattice box containing the support, if any.
    pub fn support_bounds(&self) -> Option<LatticeBox> {
        let mut cells = self.cells.keys();
        let first = cells.next()?;
        let mut lo = first.clone();
        let mut hi: Vec<i64> = first.iter().map(|c| c + 1).collect();
        for c in cells {
            for k in 0..c.len() {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k] + 1);
            }
        }
        Some(LatticeBox::new(lo, hi))
    }

    /// Largest `|x|` over the closure of the support.
    pub fn support_radius(&self) -> f64 {
        let h = self.spec.cell_width();
        self.cells
            .keys()
            .map(|c| {
                c.iter()
                    .map(|&ck| {
                        let a = (ck as f64 * h).abs();
                        let b = ((ck + 1) as f64 * h).abs();
                        let m = a.max(b);
                        m * m
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Euclidean diameter of the support bounding box.
    pub fn support_diameter(&self) -> f64 {
        let h = self.spec.cell_width();
        self.support_bounds()
            .map(|b| {
                b.lo.iter()
                    .zip(&b.hi)
                    .map(|(l, u)| ((u - l) as f64 * h).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .unwrap_or(0.0)
    }

    /// `Σ |v|^p h^d`, the `p`-th power of the norm.
    pub fn lp_norm_pow(&self, p: f64) -> f64 {
        let sum: f64 = if p == 1.0 {
            self.cells.values().map(|v| v.abs()).sum()
        } else if p == 2.0 {
            self.cells.values().map(|v| v * v).sum()
        } else {
            self.cells.values().map(|v| v.abs().powf(p)).sum()
        };
        sum * self.spec.cell_measure()
    }

    /// `L_p` norm for `p ∈ [1, ∞]`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.cells.values().fold(0.0, |m, v| m.max(v.abs()));
        }
        let pow = self.lp_norm_pow(p);
        if p == 1.0 {
            pow
        } else if p == 2.0 {
            pow.sqrt()
        } else {
            pow.powf(1.0 / p)
        }
    }

    /// `T_λ f` for a lattice shift given in cell units.
    pub fn translate(&self, shift: &[i64]) -> Result<GridFunction> {
        if shift.len() != self.spec.dim {
            return Err(Error::LengthMismatch {
                expected: self.spec.dim,
                got: shift.len(),
            });
        }
        if let Some(b) = self.support_bounds() {
            if !self.spec.bounds.contains_box(&b.shifted(shift)) {
                return Err(Error::Domain(format!(
                    "translate by {shift:?} leaves the grid box"
                )));
            }
        }
        let cells = self
            .cells
            .iter()
            .map(|(c, v)| (c.iter().zip(shift).map(|(a, s)| a + s).collect(), *v))
            .collect();
        Ok(GridFunction {
            spec: self.spec.clone(),
            cells,
        })
    }

    pub fn scaled(&self, a: f64) -> GridFunction {
        if a == 0.0 {
            return GridFunction::zero(&self.spec);
        }
        GridFunction {
            spec: self.spec.clone(),
            cells: self.cells.iter().map(|(c, v)| (c.clone(), a * v)).collect(),
        }
    }

    /// `self + a·other`.
    pub fn add_scaled(&mut self, a: f64, other: &GridFunction) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        if a == 0.0 {
            return Ok(());
        }
        for (c, v) in &other.cells {
            *self.cells.entry(c.clone()).or_insert(0.0) += a * v;
        }
        self.cells.retain(|_, v| *v != 0.0);
        Ok(())
    }

    /// `f·1_D`.
    pub fn restrict(&self, region: &LatticeBox) -> GridFunction {
        GridFunction {
            spec: self.spec.clone(),
            cells: self
                .cells
                .iter()
                .filter(|(c, _)| region.contains_cell(c))
                .map(|(c, v)| (c.clone(), *v))
                .collect(),
        }
    }
}

/// Indicator of the real box `[lo, hi)` times `value`.
pub fn make_indicator(spec: &GridSpec, lo: &[f64], hi: &[f64], value: f64) -> Result<GridFunction> {
    let region = spec.lattice_box(lo, hi)?;
    if !spec.bounds.contains_box(&region) {
        return Err(Error::Domain("indicator box outside the grid box".into()));
    }
    if value == 0.0 {
        return Ok(GridFunction::zero(spec));
    }
    GridFunction::from_cells(spec, region.cells().map(|c| (c, value)))
}

/// Pointwise `Σ a_i f_i`.
pub fn linear_combination(coeffs: &[f64], fs: &[GridFunction]) -> Result<GridFunction> {
    if coeffs.len() != fs.len() {
        return Err(Error::LengthMismatch {
            expected: fs.len(),
            got: coeffs.len(),
        });
    }
    let Some(first) = fs.first() else {
        return Err(Error::Parameter("empty linear combination has no grid".into()));
    };
    let mut out = GridFunction::zero(first.spec());
    for (a, f) in coeffs.iter().zip(fs) {
        out.add_scaled(*a, f)?;
    }
    Ok(out)
}

/// Duality pairing `∫ f'·g`.
pub fn pair(fprime: &GridFunction, g: &GridFunction) -> Result<f64> {
    if fprime.spec != g.spec {
        return Err(Error::SpecMismatch);
    }
    let (small, large) = if fprime.cells.len() <= g.cells.len() {
        (fprime, g)
    } else {
        (g, fprime)
    };
    let sum: f64 = small
        .cells
        .iter()
        .filter_map(|(c, v)| large.cells.get(c).map(|w| v * w))
        .sum();
    Ok(sum * fprime.spec.cell_measure())
}

#[derive(Serialize, Deserialize)]
struct RowRepr {
    offset: Vec<i64>,
    values: Vec<f64>,
}

/// Serialized form: the spec plus maximal runs of consecutive cells along the
/// last axis, each stored as an anchor cell and its row-major values.
#[derive(Serialize, Deserialize)]
struct GridFunctionRepr {
    spec: GridSpec,
    rows: Vec<RowRepr>,
}

impl From<GridFunction> for GridFunctionRepr {
    fn from(f: GridFunction) -> Self {
        let mut rows: Vec<RowRepr> = Vec::new();
        let mut prev: Option<Cell> = None;
        for (cell, value) in f.cells {
            let extends = prev.as_ref().is_some_and(|p| {
                let d = p.len();
                p[..d - 1] == cell[..d - 1] && p[d - 1] + 1 == cell[d - 1]
            });
            if extends {
                rows.last_mut().expect("row exists").values.push(value);
            } else {
                rows.push(RowRepr {
                    offset: cell.clone(),
                    values: vec![value],
                });
            }
            prev = Some(cell);
        }
        GridFunctionRepr { spec: f.spec, rows }
    }
}

impl TryFrom<GridFunctionRepr> for GridFunction {
    type Error = Error;

    fn try_from(repr: GridFunctionRepr) -> Result<Self> {
        let spec = repr.spec;
        let cells = repr.rows.into_iter().flat_map(|row| {
            let offset = row.offset;
            row.values.into_iter().enumerate().map(move |(i, v)| {
                let mut c = offset.clone();
                if let Some(last) = c.last_mut() {
                    *last += i as i64;
                }
                (c, v)
            })
        });
        GridFunction::from_cells(&spec, cells)
    }
}
