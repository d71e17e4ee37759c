//! Unconditional frame of translates of a single generator for `L_p`, `p > 2`.
//!
//! Block `k` uses `N_k` far-apart copies of the Haar element `h_k` scaled by
//! `N_k^{-1/2}`; the generator is the sum of all copies and its translates by
//! the selected ladder points bring each copy back to the origin.

use std::collections::HashMap;

use nalgebra::DVector;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dense::CellSet;
use crate::error::{Error, Result};
use crate::frame::{
    apply_frame_operator, frame_constants_on, seminormalize, FrameConstants, FramePair, SeminormalizationAuxiliary,
    SeminormalizeSettings, Seminormalized,
};
use crate::grid::{linear_combination, Cell, GridFunction, GridSpec, LatticeBox};
use crate::haar::{haar_system, reference_side_exponent, BasisElement, BasisSystem};
use crate::lambda::LambdaSource;
use crate::norms::{synthesis_norm_bracket, NormBracket};
use crate::report::{num, Provenance, ReportEntry};
use crate::sweep::{self, SweepMode};
use crate::walsh::{walsh_depth, walsh_system};

/// Whether the unconditional constant entering the block plan is rigorous.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    Strict,
    Demo,
}

impl BoundMode {
    pub fn provenance(self) -> Provenance {
        match self {
            BoundMode::Strict => Provenance::Strict,
            BoundMode::Demo => Provenance::Surrogate,
        }
    }
}

/// Largest block size accepted before the plan is reported as out of scale.
pub const MAX_BLOCK_SIZE: u64 = 1 << 40;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPlan {
    pub p: f64,
    pub ku_bound: f64,
    pub mode: BoundMode,
    pub sizes: Vec<u64>,
    /// `Σ N_k^{1−p/2}`.
    pub sum: f64,
    /// `(2 K_u)^{-p}`.
    pub target: f64,
    /// Exact rational comparison `sum < target`, available when `p/2 − 1` is an integer.
    pub exact: Option<bool>,
}

impl BlockPlan {
    pub fn levels(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> u64 {
        self.sizes.iter().sum()
    }

    pub fn margin(&self) -> f64 {
        self.target - self.sum
    }

    pub fn holds(&self) -> bool {
        self.exact.unwrap_or(self.sum < self.target)
    }
}

fn integer_exponent(p: f64) -> Option<u32> {
    let e = p / 2.0 - 1.0;
    (p.fract() == 0.0 && e.fract() == 0.0 && (1.0..=64.0).contains(&e)).then_some(e as u32)
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// `N_k = ⌈(2^{k+1} (2 K_u)^p)^{1/(p/2−1)}⌉`, the smallest integer with
/// `N_k^{p/2−1} ≥ 2^{k+1} (2 K_u)^p`, so `Σ_k N_k^{1−p/2} ≤ (2K_u)^{-p} Σ_k 2^{-k-1}`.
pub fn choose_block_sizes(p: f64, ku_bound: f64, levels: usize, mode: BoundMode) -> Result<BlockPlan> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::Parameter(format!("the construction needs p > 2, got {p}")));
    }
    if levels == 0 {
        return Err(Error::Parameter("at least one block is required".into()));
    }
    if !(ku_bound > 0.0) || !ku_bound.is_finite() {
        return Err(Error::Parameter(format!("unconditional bound {ku_bound} must be positive")));
    }
    if mode == BoundMode::Strict && ku_bound < 1.0 {
        return Err(Error::Parameter(format!(
            "strict mode needs a rigorous unconditional bound >= 1, got {ku_bound}"
        )));
    }
    let e = p / 2.0 - 1.0;
    let int_e = integer_exponent(p);
    let two_k = rational(ku_bound) * BigRational::from_integer(BigInt::from(2));
    let mut sizes = Vec::with_capacity(levels);
    for k in 1..=levels {
        let rhs = 2f64.powi(k as i32 + 1) * (2.0 * ku_bound).powf(p);
        let guess = rhs.powf(1.0 / e).ceil();
        if !guess.is_finite() || guess > MAX_BLOCK_SIZE as f64 {
            return Err(Error::Scale(format!(
                "block {k} needs about {guess:e} translates; use demo mode or fewer levels"
            )));
        }
        let mut n = guess.max(1.0) as u64;
        match int_e {
            Some(ie) => {
                let rhs = two_k.pow(p as i32) * BigRational::from_integer(BigInt::from(2u64 << k));
                let pow = |n: u64| BigRational::from_integer(BigInt::from(n).pow(ie));
                while n > 1 && pow(n - 1) >= rhs {
                    n -= 1;
                }
                while pow(n) < rhs {
                    n += 1;
                }
            }
            None => {
                while n > 1 && ((n - 1) as f64).powf(e) >= rhs {
                    n -= 1;
                }
                while (n as f64).powf(e) < rhs {
                    n += 1;
                }
            }
        }
        sizes.push(n);
    }
    let sum: f64 = sizes.iter().map(|&n| (n as f64).powf(-e)).sum();
    let target = (2.0 * ku_bound).powf(-p);
    let exact = int_e.map(|ie| {
        let mut s = BigRational::zero();
        for &n in &sizes {
            s += BigRational::new(BigInt::one(), BigInt::from(n).pow(ie));
        }
        s < two_k.pow(p as i32).recip()
    });
    Ok(BlockPlan {
        p,
        ku_bound,
        mode,
        sizes,
        sum,
        target,
        exact,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderSlot {
    /// 1-based block number `k`.
    pub block: usize,
    /// 1-based position `s` inside the block.
    pub s: usize,
    /// 1-based index `j` in the source sequence.
    pub index: usize,
    pub point: Vec<f64>,
    /// Lattice shift of the snapped point, in cells.
    pub shift: Vec<i64>,
    pub magnitude: f64,
    pub threshold: f64,
    pub snap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexLadder {
    pub slots: Vec<LadderSlot>,
    pub scanned: usize,
}

impl IndexLadder {
    /// `J_k` as lists of source indices.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let k = self.slots.iter().map(|s| s.block).max().unwrap_or(0);
        let mut out = vec![Vec::new(); k];
        for s in &self.slots {
            out[s.block - 1].push(s.index);
        }
        out
    }

    /// `𝔇 = {m_i}` in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s.index).collect()
    }

    pub fn max_snap(&self) -> f64 {
        self.slots.iter().map(|s| s.snap).fold(0.0, f64::max)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.slots.iter().map(|s| s.magnitude).fold(0.0, f64::max)
    }
}

pub const DEFAULT_MAX_SCAN: usize = 5_000_000;

/// Greedy scan: fills blocks `1..K` in order with the next point whose
/// magnitude exceeds the current threshold. The first slot needs `|λ| > 1`;
/// every later slot in block `k` needs `|λ| > 3 max_prev |λ| + 2 max_{j≤k} ρ_j`.
pub fn select_index_ladder(
    source: &LambdaSource,
    sizes: &[u64],
    radii: &[f64],
    spec: &GridSpec,
    max_scan: usize,
) -> Result<IndexLadder> {
    if radii.len() < sizes.len() {
        return Err(Error::LengthMismatch {
            expected: sizes.len(),
            got: radii.len(),
        });
    }
    if source.dim() != spec.dim {
        return Err(Error::LengthMismatch {
            expected: spec.dim,
            got: source.dim(),
        });
    }
    let required: usize = sizes.iter().map(|&n| n as usize).sum();
    let lattice_limit = 9.0e15 * spec.cell_width();
    let mut slots: Vec<LadderSlot> = Vec::with_capacity(required.min(1 << 20));
    let mut block = 0usize;
    let mut in_block = 0u64;
    let mut prev_max = 0.0f64;
    let mut rho_max = 0.0f64;
    let mut scanned = 0usize;
    let mut points = source.iter();
    while slots.len() < required {
        while in_block == sizes[block] {
            block += 1;
            in_block = 0;
        }
        rho_max = rho_max.max(radii[block]);
        let threshold = if slots.is_empty() { 1.0 } else { 3.0 * prev_max + 2.0 * rho_max };
        if threshold > lattice_limit {
            return Err(Error::Scale(format!(
                "ladder threshold {threshold:e} after {} slots exceeds the lattice range; \
                 use demo mode or fewer levels",
                slots.len()
            )));
        }
        let Some(point) = points.next() else {
            return Err(Error::Unbounded {
                scanned,
                filled: slots.len(),
                required,
            });
        };
        scanned += 1;
        if scanned > max_scan {
            return Err(Error::Unbounded {
                scanned: max_scan,
                filled: slots.len(),
                required,
            });
        }
        let (shift, snap) = spec.snap(&point)?;
        let snapped = spec.shift_to_point(&shift);
        let magnitude = snapped.iter().map(|x| x * x).sum::<f64>().sqrt();
        if magnitude > threshold {
            in_block += 1;
            prev_max = prev_max.max(magnitude);
            slots.push(LadderSlot {
                block: block + 1,
                s: in_block as usize,
                index: scanned,
                point,
                shift,
                magnitude,
                threshold,
                snap,
            });
        }
    }
    Ok(IndexLadder { slots, scanned })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructedFrame {
    pub spec: GridSpec,
    pub p: f64,
    pub plan: BlockPlan,
    pub ladder: IndexLadder,
    /// `h_1, …, h_K` with their functionals.
    pub basis: Vec<BasisElement>,
    pub generator: GridFunction,
    /// `T_{λ_{m_i}} f`.
    pub translates: Vec<GridFunction>,
    /// `N_{k_i}^{-1/2} h_{k_i}'`.
    pub coordinates: Vec<GridFunction>,
    /// Block label `k_i` of each translate, 1-based.
    pub blocks: Vec<usize>,
}

impl ConstructedFrame {
    pub fn len(&self) -> usize {
        self.translates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.translates.is_empty()
    }

    pub fn frame_pair(&self) -> Result<FramePair> {
        let mut frame = FramePair::new(self.p, self.translates.clone(), self.coordinates.clone())?;
        frame.unconditional_claimed = true;
        Ok(frame)
    }

    pub fn basis_functions(&self) -> Vec<GridFunction> {
        self.basis.iter().map(|b| b.function.clone()).collect()
    }
}

fn scale_error(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Scale(format!("grid box too small for the construction: {m}")),
        other => other,
    }
}

/// `f = Σ_k Σ_{j∈J_k} N_k^{-1/2} T_{−λ_j} h_k` with its translates and coordinates.
pub fn build_generator(ladder: &IndexLadder, plan: &BlockPlan, basis: &BasisSystem) -> Result<ConstructedFrame> {
    if basis.len() < plan.levels() {
        return Err(Error::LengthMismatch {
            expected: plan.levels(),
            got: basis.len(),
        });
    }
    let spec = &basis.spec;
    let weight = |k: usize| (plan.sizes[k - 1] as f64).powf(-0.5);
    let mut generator = GridFunction::zero(spec);
    for slot in &ladder.slots {
        let back: Vec<i64> = slot.shift.iter().map(|s| -s).collect();
        let term = basis.elements[slot.block - 1].function.translate(&back).map_err(scale_error)?;
        generator.add_scaled(weight(slot.block), &term)?;
    }
    let translates = ladder
        .slots
        .iter()
        .map(|s| generator.translate(&s.shift).map_err(scale_error))
        .collect::<Result<Vec<_>>>()?;
    let coordinates = ladder
        .slots
        .iter()
        .map(|s| basis.elements[s.block - 1].dual.scaled(weight(s.block)))
        .collect();
    Ok(ConstructedFrame {
        spec: spec.clone(),
        p: basis.exponents.p,
        plan: plan.clone(),
        ladder: ladder.clone(),
        basis: basis.elements[..plan.levels()].to_vec(),
        generator,
        translates,
        coordinates,
        blocks: ladder.slots.iter().map(|s| s.block).collect(),
    })
}

/// Result of the exact support test.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportCheck {
    pub terms: usize,
    pub collision: Option<((usize, usize), (usize, usize))>,
    pub min_gap: f64,
}

/// Exact lattice test that the off-diagonal terms `T_{λ_i − λ_j} h_{k_j}`, `i ≠ j`,
/// have pairwise disjoint supports; indices in the result are 1-based ladder positions.
pub fn disjoint_support_check(c: &ConstructedFrame) -> SupportCheck {
    let n = c.len();
    let slots = &c.ladder.slots;
    let mut owner: HashMap<Cell, (usize, usize)> = HashMap::new();
    let mut boxes: Vec<LatticeBox> = Vec::new();
    let mut collision = None;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let h = &c.basis[slots[j].block - 1].function;
            let shift: Vec<i64> = slots[i].shift.iter().zip(&slots[j].shift).map(|(a, b)| a - b).collect();
            for (cell, _) in h.iter() {
                let moved: Cell = cell.iter().zip(&shift).map(|(a, s)| a + s).collect();
                if let Some(prev) = owner.insert(moved, (i + 1, j + 1)) {
                    if collision.is_none() && prev != (i + 1, j + 1) {
                        collision = Some((prev, (i + 1, j + 1)));
                    }
                }
            }
            if let Some(b) = h.support_bounds() {
                boxes.push(b.shifted(&shift));
            }
        }
    }
    let width = c.spec.cell_width();
    let mut min_gap = f64::INFINITY;
    for (a, ba) in boxes.iter().enumerate() {
        for bb in &boxes[a + 1..] {
            let d2: f64 = (0..ba.dim())
                .map(|k| {
                    let gap = (bb.lo[k] - ba.hi[k]).max(ba.lo[k] - bb.hi[k]).max(0);
                    (gap as f64 * width).powi(2)
                })
                .sum();
            min_gap = min_gap.min(d2.sqrt());
        }
    }
    SupportCheck {
        terms: boxes.len(),
        collision,
        min_gap,
    }
}

pub fn verify_disjoint_supports(c: &ConstructedFrame) -> ReportEntry {
    let check = disjoint_support_check(c);
    let entry = ReportEntry::check(
        "disjoint_supports",
        check.collision.is_none(),
        check.min_gap,
        c.plan.mode.provenance(),
    )
    .with_detail("terms", json!(check.terms))
    .with_detail("min_gap", num(check.min_gap));
    match check.collision {
        Some((a, b)) => entry.with_witness(json!({"first": [a.0, a.1], "second": [b.0, b.1]})),
        None => entry,
    }
}

/// `‖Φ₂‖` for `a ↦ Σ a_k h_k` on the first `K` basis elements.
pub fn phi2_bracket(c: &ConstructedFrame) -> Result<NormBracket> {
    synthesis_norm_bracket(&c.basis_functions(), c.p, 1e-10, 2_000_000)
}

/// Seeded draws of `A ⊆ 𝔇` and `b`, checking
/// `‖Σ_{i∈A} b_i T_{λ_i} f‖_p ≤ (1 + ‖Φ₂‖) ‖b‖_2 + 1e-9`.
pub fn verify_l2_synthesis_bound(c: &ConstructedFrame, phi2: f64, draws: usize, seed: u64) -> Result<ReportEntry> {
    let cells = CellSet::covering(&c.spec, &c.translates)?;
    let synth = cells.matrix(&c.translates)?;
    let n = c.len();
    let mut r = sweep::rng(seed, 0x12);
    let mut worst = (f64::INFINITY, Vec::new());
    let mut max_ratio = 0.0f64;
    for draw in 0..draws {
        let b: Vec<f64> = if draw == 0 {
            (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect()
        } else {
            let g = sweep::gaussian_vector(&mut r, n);
            let mut mask: Vec<bool> = (0..n).map(|_| r.random::<bool>()).collect();
            if !mask.iter().any(|m| *m) {
                mask[r.random_range(0..n)] = true;
            }
            (0..n).map(|i| if mask[i] { g[i] } else { 0.0 }).collect()
        };
        let bv = DVector::from_vec(b.clone());
        let lhs = cells.norm(&(&synth * &bv), c.p);
        let l2 = bv.norm();
        let rhs = (1.0 + phi2) * l2 + 1e-9;
        if l2 > 0.0 {
            max_ratio = max_ratio.max(lhs / l2);
        }
        if rhs - lhs < worst.0 {
            worst = (rhs - lhs, b);
        }
    }
    let entry = ReportEntry::check_le("l2_synthesis_bound", max_ratio, 1.0 + phi2, c.plan.mode.provenance())
        .with_detail("draws", json!(draws))
        .with_detail("phi2_truncated_upper", num(phi2))
        .with_detail("worst_margin", num(worst.0));
    Ok(if entry.passed() {
        entry
    } else {
        entry.with_witness(json!({"b": worst.1}))
    })
}

/// Seeded elements of `span{h_1, …, h_K}`.
pub fn sample_basis_span(c: &ConstructedFrame, count: usize, seed: u64) -> Result<Vec<GridFunction>> {
    let hs = c.basis_functions();
    let mut r = sweep::rng(seed, 0x4e);
    (0..count)
        .map(|_| {
            let a = sweep::gaussian_vector(&mut r, hs.len());
            linear_combination(a.as_slice(), &hs)
        })
        .collect()
}

/// Largest `‖S(g) − g‖_p / ‖g‖_p` over the inputs, with its position.
pub fn near_identity_ratio(frame: &FramePair, inputs: &[GridFunction]) -> Result<(f64, usize)> {
    let mut best = (0.0f64, 0usize);
    for (i, g) in inputs.iter().enumerate() {
        let mut d = apply_frame_operator(frame, g)?;
        d.add_scaled(-1.0, g)?;
        let r = d.lp_norm(frame.p()) / g.lp_norm(frame.p());
        if r > best.0 {
            best = (r, i);
        }
    }
    Ok(best)
}

/// `(Σ_k N_k^{1−p/2})^{2/p} · max_k ‖h_k'‖_{p'}`, a bound for `‖S − I‖` on the basis span
/// that follows from the disjointness of the off-diagonal terms.
pub fn near_identity_bound(c: &ConstructedFrame) -> f64 {
    let p_dual = c.p / (c.p - 1.0);
    let dual_max = c.basis.iter().map(|b| b.dual.lp_norm(p_dual)).fold(0.0, f64::max);
    c.plan.sum.powf(2.0 / c.p) * dual_max
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionConfig {
    pub p: f64,
    pub dim: usize,
    pub levels: usize,
    pub mode: BoundMode,
    pub ku_bound: f64,
    pub lambda: LambdaSource,
    /// Cell width exponent; the smallest level that resolves everything when absent.
    pub level: Option<i32>,
    /// Lower bound for the half-width of the grid box; the box grows to fit the ladder.
    pub half_width: Option<f64>,
    pub seed: u64,
    pub tol: f64,
    pub draws: usize,
    pub samples: usize,
    pub sign_trials: usize,
    pub max_scan: usize,
}

impl ConstructionConfig {
    pub fn demo(p: f64, levels: usize) -> Self {
        ConstructionConfig {
            p,
            dim: 1,
            levels,
            mode: BoundMode::Demo,
            ku_bound: 0.5,
            lambda: LambdaSource::Linear { dim: 1 },
            level: None,
            half_width: None,
            seed: 2024,
            tol: 1e-6,
            draws: 200,
            samples: 50,
            sign_trials: 500,
            max_scan: DEFAULT_MAX_SCAN,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Construction {
    pub constructed: ConstructedFrame,
    pub approximate: FramePair,
    pub phi2: NormBracket,
    pub seminormalized: Seminormalized,
    pub constants: FrameConstants,
    pub entries: Vec<ReportEntry>,
}

/// Smallest level resolving `levels` Haar elements and the Walsh auxiliary of length `n`.
pub fn minimal_level(dim: usize, levels: usize, n: usize) -> i32 {
    let c = reference_side_exponent(dim);
    let mut haar = 0;
    while (1usize << (haar * dim)) < levels {
        haar += 1;
    }
    (c + haar as i32).max(walsh_depth(n) as i32)
}

/// `Σ N_k^{1−p/2} < (2K_u)^{-p}`, plus a failing entry when the exact comparison disagrees.
pub fn block_plan_entries(plan: &BlockPlan) -> Vec<ReportEntry> {
    let prov = plan.mode.provenance();
    let mut entry = ReportEntry::check("block_plan", plan.holds(), plan.sum, prov);
    entry.bound = Some(plan.target);
    let mut out = vec![entry
        .with_detail("sizes", json!(plan.sizes))
        .with_detail("exact", json!(plan.exact))
        .with_detail("surrogate_only", json!(plan.mode == BoundMode::Demo))];
    if plan.exact.is_some_and(|e| e != (plan.sum < plan.target)) {
        out.push(ReportEntry::check("block_plan_float_agrees", false, plan.sum, prov));
    }
    out
}

/// Stages 1–3: plan, ladder and generator.
pub fn build_construction(cfg: &ConstructionConfig) -> Result<ConstructedFrame> {
    let plan = choose_block_sizes(cfg.p, cfg.ku_bound, cfg.levels, cfg.mode)?;
    let n = plan.total() as usize;
    let level = cfg.level.unwrap_or(0).max(minimal_level(cfg.dim, cfg.levels, n));
    let probe = GridSpec::centered(cfg.dim, level, 2.0)?;
    let radii: Vec<f64> = haar_system(&probe, cfg.p, cfg.levels)?
        .elements
        .iter()
        .map(|e| e.function.support_radius())
        .collect();
    let ladder = select_index_ladder(&cfg.lambda, &plan.sizes, &radii, &probe, cfg.max_scan)?;
    let reach = 2.0 * ladder.max_magnitude() + 2.0 * radii.iter().fold(0.0f64, |a, b| a.max(*b)) + 1.0;
    let reach = reach.ceil().max(cfg.half_width.unwrap_or(0.0).ceil());
    let spec = GridSpec::centered(cfg.dim, level, reach).map_err(scale_error)?;
    let basis = haar_system(&spec, cfg.p, cfg.levels)?;
    build_generator(&ladder, &plan, &basis)
}

/// Runs the full pipeline and collects one report entry per check.
pub fn construct_frame(cfg: &ConstructionConfig) -> Result<Construction> {
    let c = build_construction(cfg)?;
    let prov = cfg.mode.provenance();
    let mut entries = Vec::new();
    let plan = &c.plan;

    entries.extend(block_plan_entries(plan));
    let recursion_ok = c.ladder.slots.iter().all(|s| s.magnitude > s.threshold)
        && c.ladder.slots.windows(2).all(|w| w[0].index < w[1].index && w[0].threshold <= w[1].threshold);
    entries.push(
        ReportEntry::check("ladder_recursion", recursion_ok, c.ladder.max_magnitude(), prov)
            .with_detail("indices", json!(c.ladder.indices()))
            .with_detail("scanned", json!(c.ladder.scanned)),
    );
    entries.push(ReportEntry::check_le(
        "lambda_snap",
        c.ladder.max_snap(),
        0.5 * c.spec.cell_width() * (c.spec.dim as f64).sqrt(),
        prov,
    ));

    let norm_pow = c.generator.lp_norm_pow(c.p);
    entries.push(
        ReportEntry::check_le("generator_norm", ((norm_pow - plan.sum) / plan.sum).abs(), 1e-12, prov)
            .with_detail("norm_p_pow", num(norm_pow))
            .with_detail("block_sum", num(plan.sum)),
    );
    let support = verify_disjoint_supports(&c);
    entries.push(support);

    let phi2 = phi2_bracket(&c)?;
    entries.push(
        verify_l2_synthesis_bound(&c, phi2.upper, cfg.draws, cfg.seed)?
            .with_detail("phi2_truncated_lower", num(phi2.lower)),
    );

    let approximate = c.frame_pair()?;
    let inputs = sample_basis_span(&c, cfg.samples, cfg.seed)?;
    let (ratio, at) = near_identity_ratio(&approximate, &inputs)?;
    let derived = near_identity_bound(&c);
    entries.push(
        ReportEntry::check_le("near_identity", ratio, derived + 1e-9, prov)
            .with_detail("samples", json!(cfg.samples))
            .with_detail("argmax", json!(at)),
    );
    entries.push(
        ReportEntry::info("near_identity_half_margin", ratio, prov)
            .with_detail("target", num(0.5))
            .with_detail("within", json!(ratio <= 0.5 + 1e-9)),
    );

    let aux = SeminormalizationAuxiliary::new(walsh_system(&c.spec, c.len())?);
    let settings = SeminormalizeSettings {
        tol: cfg.tol,
        seed: cfg.seed,
        ..SeminormalizeSettings::default()
    };
    let semi = seminormalize(&approximate, &aux, settings)?;
    entries.push(
        ReportEntry::check_le("perturbation", semi.perturbation, semi.auxiliary.delta0, prov)
            .with_detail("k1", num(semi.auxiliary.k1))
            .with_detail("b_nonzero", json!(semi.auxiliary.b.iter().filter(|b| **b != 0.0).count())),
    );

    let span = &semi.promotion.span;
    let final_frame = &semi.frame;
    let analysis = span.cells.matrix(&final_frame.functionals)?;
    let mut worst = 0.0f64;
    for g in span.sample_core(cfg.seed, 0x77, cfg.samples) {
        let coeffs = analysis.transpose() * &g * span.measure();
        worst = worst.max(span.norm(&(&span.synth * coeffs - &g)) / span.norm(&g));
    }
    entries.push(
        ReportEntry::check_le("reconstruction", worst, cfg.tol, prov)
            .with_detail("core_dim", json!(span.dim_core()))
            .with_detail("span_dim", json!(span.dim_span())),
    );
    entries.push(
        ReportEntry::check_ge("seminormalized", semi.min_functional_norm, semi.functional_lower_bound, prov)
            .with_detail("threshold", num(semi.auxiliary.threshold))
            .with_detail("t_norm", num(semi.t_norm)),
    );

    let core_inputs: Vec<GridFunction> =
        span.sample_core(cfg.seed, 0x78, 8).iter().map(|g| span.function(g)).collect();
    let mode = SweepMode::auto(c.len(), 12, cfg.sign_trials);
    let constants = frame_constants_on(final_frame, &core_inputs, mode, cfg.seed)?;
    entries.push(
        ReportEntry::check(
            "unconditional_constant",
            constants.k_u.is_finite() && constants.k <= constants.k_u,
            constants.k_u,
            prov,
        )
        .with_detail("k", num(constants.k))
        .with_detail("mode", json!(constants.mode.name()))
        .with_detail("sign_vectors", json!(constants.sign_vectors)),
    );
    entries.push(ReportEntry::info("min_pairing", min_pairing(&approximate)?, prov));

    Ok(Construction {
        constructed: c,
        approximate,
        phi2,
        seminormalized: semi,
        constants,
        entries,
    })
}

/// `min_i |f_i'(f_i)|`.
pub fn min_pairing(frame: &FramePair) -> Result<f64> {
    let mut m = f64::INFINITY;
    for (f, fp) in frame.functions.iter().zip(&frame.functionals) {
        m = m.min(crate::grid::pair(fp, f)?.abs());
    }
    Ok(m)
}

/// Reports the magnitude of `Σ_k N_k^{1−p/2}` in exact arithmetic as a float,
/// for plans whose exponent is an integer.
pub fn exact_block_sum(plan: &BlockPlan) -> Option<f64> {
    let ie = integer_exponent(plan.p)?;
    let mut s = BigRational::zero();
    for &n in &plan.sizes {
        s += BigRational::new(BigInt::one(), BigInt::from(n).pow(ie));
    }
    let (num, den) = (s.numer().abs(), s.denom().clone());
    Some(num.to_f64()? / den.to_f64()?)
}
