//! Numerical probes of analysis and synthesis operators, the coefficient
//! projection, disjoint-support coefficient bounds and restriction tails.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dense::CellSet;
use crate::error::{Error, Result};
use crate::frame::{FramePair, WorkingSpan};
use crate::grid::{linear_combination, seq_norm, Exponents, GridFunction, LatticeBox};
use crate::report::{num, Provenance, ReportEntry};
use crate::sweep::{self, SweepMode};

/// Which exponent an `ℓ_r` norm of coefficients is taken in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentTag {
    P,
    S,
    Q,
    QDual,
    Two,
}

impl ExponentTag {
    pub fn value(self, e: &Exponents) -> f64 {
        match self {
            ExponentTag::P => e.p,
            ExponentTag::S => e.s,
            ExponentTag::Q => e.q,
            ExponentTag::QDual => {
                if e.q == 2.0 {
                    2.0
                } else {
                    e.q / (e.q - 1.0)
                }
            }
            ExponentTag::Two => 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientProfile {
    pub coefficients: Vec<f64>,
    pub tag: ExponentTag,
    pub r: f64,
    pub norm: f64,
    /// `‖coefficients‖_r / ‖g‖_p`, zero for `g = 0`.
    pub ratio: f64,
}

fn check_analysis_tag(tag: ExponentTag) -> Result<()> {
    match tag {
        ExponentTag::P | ExponentTag::S | ExponentTag::Two => Ok(()),
        other => Err(Error::Parameter(format!("analysis norms use p, s or 2, not {other:?}"))),
    }
}

/// `(f_i'(g))_i` with its `ℓ_r` norm.
pub fn analysis_operator(frame: &FramePair, g: &GridFunction, tag: ExponentTag) -> Result<CoefficientProfile> {
    check_analysis_tag(tag)?;
    let coefficients = frame.coefficients(g)?;
    let r = tag.value(&frame.exponents);
    let norm = seq_norm(&coefficients, r);
    let gn = g.lp_norm(frame.p());
    Ok(CoefficientProfile {
        coefficients,
        tag,
        r,
        norm,
        ratio: if gn > 0.0 { norm / gn } else { 0.0 },
    })
}

/// `Σ a_i f_i`.
pub fn synthesis_operator(frame: &FramePair, a: &[f64]) -> Result<GridFunction> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parameter("coefficients must be finite".into()));
    }
    linear_combination(a, &frame.functions)
}

/// `Σ a_i f_i'`, the adjoint of the analysis operator.
pub fn dual_synthesis(frame: &FramePair, a: &[f64]) -> Result<GridFunction> {
    linear_combination(a, &frame.functionals)
}

/// Sampled lower bound for `‖Ψ‖ : L_p → ℓ_r` over seeded elements of the span.
pub fn analysis_norm_estimate(frame: &FramePair, tag: ExponentTag, trials: usize, seed: u64) -> Result<f64> {
    check_analysis_tag(tag)?;
    let span = frame.working_span()?;
    let r = tag.value(&frame.exponents);
    let m = span.measure();
    let mut best = 0.0f64;
    for g in span.sample_span(seed, 0x3a, trials) {
        let a = span.analysis.transpose() * &g * m;
        let gn = span.norm(&g);
        if gn > 0.0 {
            best = best.max(seq_norm(a.as_slice(), r) / gn);
        }
    }
    Ok(best)
}

/// Sampled lower bound for the least `M₀` with `‖Σ a_i f_i‖_p ≤ M₀ ‖a‖_r`,
/// over the unit vectors followed by seeded gaussian vectors on random supports.
pub fn synthesis_norm_estimate(frame: &FramePair, tag: ExponentTag, trials: usize, seed: u64) -> Result<f64> {
    let r = match tag {
        ExponentTag::P | ExponentTag::Two => tag.value(&frame.exponents),
        other => return Err(Error::Parameter(format!("synthesis norms use p or 2, not {other:?}"))),
    };
    let n = frame.len();
    if n == 0 {
        return Ok(0.0);
    }
    let cells = CellSet::covering(frame.spec(), &frame.functions)?;
    let synth = cells.matrix(&frame.functions)?;
    let p = frame.p();
    let mut best = frame.functions.iter().map(|f| f.lp_norm(p)).fold(0.0, f64::max);
    let mut rng = sweep::rng(seed, 0x3b);
    for _ in 0..trials {
        let mut a = sweep::gaussian_vector(&mut rng, n);
        for x in a.iter_mut() {
            if rng.random::<bool>() {
                *x = 0.0;
            }
        }
        let an = seq_norm(a.as_slice(), r);
        if an > 0.0 {
            best = best.max(cells.norm(&(&synth * &a), p) / an);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrliczSums {
    pub s: f64,
    pub q: f64,
    /// Partial sums of `‖f_i‖_p^s`.
    pub functions: Vec<f64>,
    /// Partial sums of `‖f_i'‖_{p'}^q`.
    pub functionals: Vec<f64>,
}

impl OrliczSums {
    pub fn total_functions(&self) -> f64 {
        self.functions.last().copied().unwrap_or(0.0)
    }

    pub fn total_functionals(&self) -> f64 {
        self.functionals.last().copied().unwrap_or(0.0)
    }
}

pub fn orlicz_sums(frame: &FramePair) -> OrliczSums {
    let e = frame.exponents;
    let partial = |fs: &[GridFunction], norm_exp: f64, power: f64| {
        let mut acc = 0.0;
        fs.iter()
            .map(|f| {
                acc += f.lp_norm(norm_exp).powf(power);
                acc
            })
            .collect::<Vec<_>>()
    };
    OrliczSums {
        s: e.s,
        q: e.q,
        functions: partial(&frame.functions, e.p, e.s),
        functionals: partial(&frame.functionals, e.p_dual, e.q),
    }
}

fn riesz_thorin(m: &DMatrix<f64>, p: f64) -> f64 {
    let one = (0..m.ncols()).map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let inf = (0..m.nrows()).map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    if one == 0.0 || inf == 0.0 {
        return 0.0;
    }
    one.powf(1.0 / p) * inf.powf(1.0 - 1.0 / p)
}

/// `P = Ψ ∘ S^# ∘ Φ` on `ℝ^n`, where `S^# = S_W^{-2} S` agrees with `S^{-1}` on the core span.
pub fn projection_matrix(span: &WorkingSpan) -> Result<DMatrix<f64>> {
    let lu = span.core_solver()?;
    let m = span.measure();
    let gram = span.analysis.transpose() * &span.synth * m;
    let right = span.core.transpose() * &span.synth * &gram;
    let once = lu.solve(&right).ok_or_else(|| Error::Inversion {
        reason: "core solve failed".into(),
        condition: span.condition,
    })?;
    let twice = lu.solve(&once).ok_or_else(|| Error::Inversion {
        reason: "core solve failed".into(),
        condition: span.condition,
    })?;
    Ok(span.analysis.transpose() * &span.core * twice * m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResiduals {
    /// Riesz–Thorin bound for `‖P² − P‖` on `ℓ_p`.
    pub idempotence: f64,
    pub idempotence_l2: f64,
    /// Largest `‖P²a − Pa‖_p / ‖a‖_p` over seeded vectors.
    pub sampled: f64,
    /// Largest `‖P(Ψg) − Ψg‖_p / ‖Ψg‖_p` over seeded `g` in the core span.
    pub range: f64,
    pub norm_l2: f64,
}

pub fn projection_residuals(frame: &FramePair, trials: usize, seed: u64) -> Result<ProjectionResiduals> {
    let span = frame.working_span()?;
    let proj = projection_matrix(&span)?;
    let p = frame.p();
    let defect = &proj * &proj - &proj;
    let n = proj.nrows();
    let mut rng = sweep::rng(seed, 0x3c);
    let mut sampled = 0.0f64;
    for _ in 0..trials {
        let a = sweep::gaussian_vector(&mut rng, n);
        sampled = sampled.max(seq_norm((&defect * &a).as_slice(), p) / seq_norm(a.as_slice(), p));
    }
    let m = span.measure();
    let mut range = 0.0f64;
    for g in span.sample_core(seed, 0x3d, trials) {
        let a = span.analysis.transpose() * &g * m;
        let an = seq_norm(a.as_slice(), p);
        if an > 0.0 {
            range = range.max(seq_norm((&proj * &a - &a).as_slice(), p) / an);
        }
    }
    Ok(ProjectionResiduals {
        idempotence: riesz_thorin(&defect, p),
        idempotence_l2: defect.singular_values().max(),
        sampled,
        range,
        norm_l2: proj.singular_values().max(),
    })
}

pub fn projection_check(frame: &FramePair, trials: usize, seed: u64, tol: f64) -> Result<ReportEntry> {
    let r = projection_residuals(frame, trials, seed)?;
    let measured = r.idempotence.max(r.idempotence_l2).max(r.sampled).max(r.range);
    Ok(ReportEntry::check_le("projection", measured, tol, Provenance::Strict)
        .with_detail("idempotence", num(r.idempotence))
        .with_detail("idempotence_l2", num(r.idempotence_l2))
        .with_detail("sampled", num(r.sampled))
        .with_detail("range", num(r.range))
        .with_detail("norm_l2", num(r.norm_l2))
        .with_detail("trials", json!(trials)))
}

/// Partition of the indices into classes, each index paired with a box `D_{i,k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointnessCertificate {
    pub classes: Vec<Vec<(usize, LatticeBox)>>,
    pub epsilon: f64,
}

impl DisjointnessCertificate {
    pub fn k0(&self) -> usize {
        self.classes.len()
    }

    /// Checks that the classes partition `0..n`, boxes in a class are disjoint
    /// and every `∫_D |f_i|^p` is at least `ε`.
    pub fn validate(&self, functions: &[GridFunction], p: f64) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Certificate(format!("epsilon {} must be positive", self.epsilon)));
        }
        let mut seen = vec![false; functions.len()];
        for (k, class) in self.classes.iter().enumerate() {
            for (pos, (i, d)) in class.iter().enumerate() {
                let f = functions.get(*i).ok_or_else(|| Error::Certificate(format!("index {i} out of range")))?;
                if std::mem::replace(&mut seen[*i], true) {
                    return Err(Error::Certificate(format!("index {i} appears twice")));
                }
                for (j, e) in &class[..pos] {
                    if d.intersects(e) {
                        return Err(Error::Certificate(format!("boxes of {j} and {i} meet in class {k}")));
                    }
                }
                let mass = f.restrict(d).lp_norm_pow(p);
                if mass < self.epsilon * (1.0 - 1e-12) {
                    return Err(Error::Certificate(format!(
                        "mass {mass:e} of function {i} on its box is below epsilon {:e}",
                        self.epsilon
                    )));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Certificate(format!("index {i} is in no class")));
        }
        Ok(())
    }
}

/// Checks `Σ|a_i|^p ≤ k₀ K^p / ε` with `K = max_c ‖Σ c_i a_i f_i‖_p` over signs.
pub fn disjoint_support_coefficient_bound(
    functions: &[GridFunction],
    p: f64,
    certificate: &DisjointnessCertificate,
    a: &[f64],
    mode: SweepMode,
    seed: u64,
) -> Result<ReportEntry> {
    certificate.validate(functions, p)?;
    if a.len() != functions.len() {
        return Err(Error::LengthMismatch {
            expected: functions.len(),
            got: a.len(),
        });
    }
    let lhs: f64 = a.iter().map(|x| x.abs().powf(p)).sum();
    let (k, signs) = if functions.is_empty() {
        (0.0, Vec::new())
    } else {
        let cells = CellSet::covering(functions[0].spec(), functions)?;
        let synth = cells.matrix(functions)?;
        let set = sweep::sign_set(functions.len(), mode, seed, &[])?;
        let best =
            sweep::max_signed_ratio(&synth, &[DVector::from_column_slice(a)], &[1.0], &set, p, cells.measure());
        (best.value, best.signs)
    };
    let bound = certificate.k0() as f64 * k.powf(p) / certificate.epsilon;
    let entry = ReportEntry::check_le("disjoint_coefficient_bound", lhs, bound + 1e-9, Provenance::Strict)
        .with_detail("k", num(k))
        .with_detail("k0", json!(certificate.k0()))
        .with_detail("epsilon", num(certificate.epsilon))
        .with_detail("mode", json!(mode.name()));
    Ok(if entry.passed() {
        entry
    } else {
        entry.with_witness(json!({"a": a, "signs": signs}))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub n: usize,
    /// `Σ_{i>n} ‖f_i|_D‖_p^p`.
    pub t_n: f64,
    /// Inflated Hölder bound for the tail of the restricted expansion.
    pub bound: f64,
    /// Largest `‖Σ_{i>n} f_i'(g) f_i|_D‖_p / ‖g‖_p` over the samples.
    pub measured: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailProfile {
    pub rows: Vec<TailRow>,
    pub restricted_norms: Vec<f64>,
    pub analysis_estimate: f64,
    pub inflation: f64,
    pub samples: usize,
}

impl TailProfile {
    pub fn dominated(&self) -> bool {
        self.rows.iter().all(|r| r.measured <= r.bound + 1e-12)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,t_n,bound\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:.16e},{:.16e}\n", r.n, r.t_n, r.bound));
        }
        out
    }
}

pub const DEFAULT_INFLATION: f64 = 1.1;

/// Tail sums of the restrictions to `region` and measured tails of the
/// restricted expansions of seeded elements of the span.
pub fn restriction_tail_profile(
    frame: &FramePair,
    region: &LatticeBox,
    samples: usize,
    seed: u64,
    inflation: f64,
) -> Result<TailProfile> {
    if region.dim() != frame.spec().dim {
        return Err(Error::LengthMismatch {
            expected: frame.spec().dim,
            got: region.dim(),
        });
    }
    let e = frame.exponents;
    let n = frame.len();
    let restricted: Vec<GridFunction> = frame.functions.iter().map(|f| f.restrict(region)).collect();
    let norms: Vec<f64> = restricted.iter().map(|f| f.lp_norm(e.p)).collect();
    let r = if e.p <= 2.0 { e.p } else { e.p_dual };

    let span = frame.working_span()?;
    let m = span.measure();
    let local = span.cells.matrix(&restricted)?;
    let inputs = span.sample_span(seed, 0x3e, samples);
    let mut psi = 0.0f64;
    let mut coeffs = Vec::with_capacity(inputs.len());
    for g in &inputs {
        let a = span.analysis.transpose() * g * m;
        let gn = span.norm(g);
        psi = psi.max(seq_norm(a.as_slice(), e.p) / gn);
        coeffs.push((a, gn));
    }

    let mut rows = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t_n: f64 = norms[k..].iter().map(|x| x.powf(e.p)).sum();
        let tail_r = seq_norm(&norms[k..], r);
        let mut measured = 0.0f64;
        for (a, gn) in &coeffs {
            let mut tail = a.clone();
            tail.rows_mut(0, k).fill(0.0);
            measured = measured.max(span.norm(&(&local * tail)) / gn);
        }
        rows.push(TailRow {
            n: k,
            t_n,
            bound: inflation * psi * tail_r,
            measured,
        });
    }
    Ok(TailProfile {
        rows,
        restricted_norms: norms,
        analysis_estimate: psi,
        inflation,
        samples,
    })
}

pub fn restriction_tail_entry(profile: &TailProfile) -> ReportEntry {
    let worst = profile
        .rows
        .iter()
        .map(|r| r.measured - r.bound)
        .fold(f64::NEG_INFINITY, f64::max);
    ReportEntry::check("restriction_tails", profile.dominated(), worst, Provenance::Strict)
        .with_detail("analysis_estimate", num(profile.analysis_estimate))
        .with_detail("inflation", num(profile.inflation))
        .with_detail("samples", json!(profile.samples))
        .with_detail("t_0", num(profile.rows.first().map_or(0.0, |r| r.t_n)))
}

/// `min_i |f_i'(f_i)| ≥ r_lower`, followed by the analysis and projection
/// probes at `p` and again at `p = 1`.
pub fn translate_frame_scenario_check(
    frame: &FramePair,
    r_lower: f64,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<ReportEntry>> {
    let mut min = f64::INFINITY;
    let mut at = 0;
    for (i, (f, fp)) in frame.functions.iter().zip(&frame.functionals).enumerate() {
        let v = crate::grid::pair(fp, f)?.abs();
        if v < min {
            min = v;
            at = i;
        }
    }
    let head = ReportEntry::check_ge("pairing_lower_bound", min, r_lower, Provenance::Strict)
        .with_detail("argmin", json!(at));
    let holds = head.passed();
    let mut out = vec![head];
    if !holds || frame.is_empty() {
        return Ok(out);
    }
    for p in [frame.p(), 1.0] {
        let at_p = FramePair {
            exponents: Exponents::new(p)?,
            ..frame.clone()
        };
        let psi = analysis_norm_estimate(&at_p, ExponentTag::P, trials, seed)?;
        let label = if p == 1.0 { "_p1" } else { "" };
        out.push(ReportEntry::info(&format!("analysis_bound{label}"), psi, Provenance::Strict).with_detail("p", num(p)));
        let mut proj = projection_check(&at_p, trials, seed, tol)?;
        proj.name = format!("projection{label}");
        out.push(proj);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_indicator, GridSpec};

    fn bumps(n: usize, p: f64, width: f64) -> FramePair {
        let spec = GridSpec::centered(1, 0, 64.0).unwrap();
        let fs: Vec<_> = (1..=n)
            .map(|i| make_indicator(&spec, &[i as f64], &[i as f64 + width], 1.0).unwrap())
            .collect();
        let duals: Vec<_> = (1..=n)
            .map(|i| make_indicator(&spec, &[i as f64], &[i as f64 + 1.0], 1.0).unwrap())
            .collect();
        FramePair::new(p, fs, duals).unwrap()
    }

    #[test]
    fn unit_profiles_and_synthesis() {
        let frame = bumps(4, 3.0, 1.0);
        let prof = analysis_operator(&frame, &frame.functions[2], ExponentTag::P).unwrap();
        assert_eq!(prof.coefficients, vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(prof.norm, 1.0);
        let zero = GridFunction::zero(frame.spec());
        assert_eq!(analysis_operator(&frame, &zero, ExponentTag::S).unwrap().norm, 0.0);
        assert!(analysis_operator(&frame, &zero, ExponentTag::Q).is_err());
        assert_eq!(synthesis_operator(&frame, &[0.0, 1.0, 0.0, 0.0]).unwrap(), frame.functions[1]);
        assert!(synthesis_operator(&frame, &[1.0]).is_err());
        let a = [1.0, -2.0, 0.5, 3.0];
        let g = synthesis_operator(&frame, &a).unwrap();
        assert!((g.lp_norm(3.0) - seq_norm(&a, 3.0)).abs() < 1e-12);
        assert!((synthesis_norm_estimate(&frame, ExponentTag::P, 50, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analysis_and_dual_synthesis_are_adjoint() {
        let frame = bumps(5, 2.5, 2.0);
        let g = linear_combination(&[0.3, -1.0, 2.0, 0.5, 1.5], &frame.functions).unwrap();
        let a = [1.0, 0.25, -0.5, 2.0, -1.0];
        let psi = frame.coefficients(&g).unwrap();
        let lhs: f64 = psi.iter().zip(&a).map(|(x, y)| x * y).sum();
        let rhs = crate::grid::pair(&dual_synthesis(&frame, &a).unwrap(), &g).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn estimates_are_monotone_in_trials() {
        let frame = bumps(5, 3.0, 2.0);
        let a = analysis_norm_estimate(&frame, ExponentTag::P, 10, 3).unwrap();
        let b = analysis_norm_estimate(&frame, ExponentTag::P, 40, 3).unwrap();
        assert!(a <= b);
        let c = synthesis_norm_estimate(&frame, ExponentTag::Two, 10, 3).unwrap();
        let d = synthesis_norm_estimate(&frame, ExponentTag::Two, 40, 3).unwrap();
        assert!(c <= d);
    }

    #[test]
    fn orlicz_partial_sums() {
        let frame = bumps(6, 3.0, 1.0);
        let s = orlicz_sums(&frame);
        assert_eq!(s.functions, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert!((s.total_functionals() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn biorthogonal_projection_is_exact() {
        let frame = bumps(4, 3.0, 1.0);
        let r = projection_residuals(&frame, 20, 1).unwrap();
        assert!(r.idempotence < 1e-14 && r.range < 1e-14);
        assert!((r.norm_l2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_frame_projection_is_idempotent() {
        let frame = bumps(6, 3.0, 3.0);
        let r = projection_residuals(&frame, 20, 2).unwrap();
        assert!(r.idempotence < 1e-8, "{r:?}");
        assert!(r.range < 1e-8, "{r:?}");
    }

    fn two_bump_certificate() -> (Vec<GridFunction>, DisjointnessCertificate) {
        let frame = bumps(2, 1.5, 1.0);
        let boxes: Vec<_> = (1..=2).map(|i| LatticeBox::new(vec![i], vec![i + 1])).collect();
        let cert = DisjointnessCertificate {
            classes: vec![vec![(0, boxes[0].clone()), (1, boxes[1].clone())]],
            epsilon: 1.0,
        };
        (frame.functions, cert)
    }

    #[test]
    fn two_bump_equality() {
        let (fs, cert) = two_bump_certificate();
        let e = disjoint_support_coefficient_bound(&fs, 1.5, &cert, &[1.0, 1.0], SweepMode::Exhaustive, 0).unwrap();
        assert!(e.passed());
        assert!((e.measured - 2.0).abs() < 1e-12);
        assert!(e.margin().unwrap().abs() < 1e-9 + 1e-12);
        let z = disjoint_support_coefficient_bound(&fs, 1.5, &cert, &[0.0, 0.0], SweepMode::Exhaustive, 0).unwrap();
        assert!(z.passed());
    }

    #[test]
    fn invalid_certificates_are_rejected() {
        let (fs, mut cert) = two_bump_certificate();
        cert.classes[0][1].1 = LatticeBox::new(vec![1], vec![2]);
        let err = disjoint_support_coefficient_bound(&fs, 1.5, &cert, &[1.0, 1.0], SweepMode::Exhaustive, 0);
        assert!(matches!(err, Err(Error::Certificate(_))));
        let (fs, mut cert) = two_bump_certificate();
        cert.epsilon = 2.0;
        assert!(cert.validate(&fs, 1.5).is_err());
        cert.epsilon = 1.0;
        cert.classes[0].pop();
        assert!(cert.validate(&fs, 1.5).is_err());
    }

    #[test]
    fn indicator_tails_vanish_past_the_box() {
        let frame = bumps(20, 3.0, 1.0);
        let d = LatticeBox::new(vec![0], vec![10]);
        let prof = restriction_tail_profile(&frame, &d, 20, 5, DEFAULT_INFLATION).unwrap();
        assert_eq!(prof.rows[9].t_n, 0.0);
        assert_eq!(prof.rows[8].t_n, 1.0);
        assert!(prof.dominated());
        let outside = LatticeBox::new(vec![-20], vec![-10]);
        let none = restriction_tail_profile(&frame, &outside, 5, 5, DEFAULT_INFLATION).unwrap();
        assert!(none.rows.iter().all(|r| r.t_n == 0.0 && r.measured == 0.0));
        assert!(prof.to_csv().starts_with("n,t_n,bound\n0,"));
    }

    #[test]
    fn overlapping_tails_match_direct_sums() {
        let frame = bumps(20, 3.0, 3.0);
        let d = LatticeBox::new(vec![0], vec![10]);
        let prof = restriction_tail_profile(&frame, &d, 50, 9, DEFAULT_INFLATION).unwrap();
        let mass = |i: usize| match i {
            1..=7 => 3.0,
            8 => 2.0,
            9 => 1.0,
            _ => 0.0,
        };
        for row in &prof.rows {
            let direct: f64 = (row.n + 1..=20).map(mass).sum();
            assert!((row.t_n - direct).abs() < 1e-12);
        }
        assert_eq!(prof.rows[9].t_n, 0.0);
        assert!(prof.dominated());
    }

    #[test]
    fn scenario_check_runs_both_exponents() {
        let frame = bumps(4, 3.0, 1.0);
        let entries = translate_frame_scenario_check(&frame, 1.0, 10, 1, 1e-8).unwrap();
        let names: Vec<_> = entries.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, ["pairing_lower_bound", "analysis_bound", "projection", "analysis_bound_p1", "projection_p1"]);
        assert!(entries.iter().all(ReportEntry::passed));
        let vacuous = translate_frame_scenario_check(&frame, 0.0, 10, 1, 1e-8).unwrap();
        assert!(vacuous[0].passed());
        let failing = translate_frame_scenario_check(&frame, 2.0, 10, 1, 1e-8).unwrap();
        assert_eq!(failing.len(), 1);
        assert!(!failing[0].passed());
    }
}
