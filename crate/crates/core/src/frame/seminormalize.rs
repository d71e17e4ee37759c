use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{seq_norm, GridFunction};
use crate::sweep;

use super::invert::{promote_with, Promotion};
use super::model::FramePair;
use super::span::{lp_norm_estimate, orthonormal_range, WorkingSpan};

/// Auxiliary functionals `g_i'` together with the constants derived from them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormalizationAuxiliary {
    pub functionals: Vec<GridFunction>,
    pub k1: f64,
    pub delta0: f64,
    pub b: Vec<f64>,
    pub threshold: f64,
}

impl SeminormalizationAuxiliary {
    /// Unfilled auxiliary system; the constants are set by `seminormalize`.
    pub fn new(functionals: Vec<GridFunction>) -> Self {
        SeminormalizationAuxiliary {
            functionals,
            k1: f64::NAN,
            delta0: f64::NAN,
            b: Vec::new(),
            threshold: f64::NAN,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormalizeSettings {
    pub tol: f64,
    pub seed: u64,
    /// Random starts for each operator-norm estimate.
    pub starts: usize,
    /// Random inputs for the sampled precondition and perturbation checks.
    pub samples: usize,
}

impl Default for SeminormalizeSettings {
    fn default() -> Self {
        SeminormalizeSettings {
            tol: 1e-9,
            seed: 7,
            starts: 12,
            samples: 32,
        }
    }
}

/// Which term attains the numerator of `K_1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum K1Source {
    FrameOperator,
    AuxiliaryUnconditional,
    AuxiliaryNorm(usize),
    AuxiliaryInverseNorm(usize),
    FunctionNorm(usize),
    FunctionalNorm(usize),
}

#[derive(Clone, Debug)]
pub struct Seminormalized {
    pub frame: FramePair,
    pub auxiliary: SeminormalizationAuxiliary,
    pub promotion: Promotion,
    pub k1_source: K1Source,
    pub s_norm: f64,
    pub s_inverse_norm: f64,
    pub t_norm: f64,
    /// Bound `(Σ‖f_i‖²)^{1/2}` used for the square-summable synthesis precondition.
    pub m0: f64,
    /// Rigorous bound for `K_u({f_i, g_i'})` entering `K_1`.
    pub aux_unconditional_bound: f64,
    /// Sampled lower estimate of the same constant.
    pub aux_unconditional_sampled: f64,
    pub min_perturbed_norm: f64,
    /// Largest measured `‖(S − T) g‖ / ‖g‖`.
    pub perturbation: f64,
    pub min_functional_norm: f64,
    /// `threshold / ‖T‖_est`.
    pub functional_lower_bound: f64,
}

const NORM_ITERATIONS: usize = 25;

fn norm_of(
    span: &WorkingSpan,
    domain: &DMatrix<f64>,
    op: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    adjoint: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    settings: &SeminormalizeSettings,
    stream: u64,
) -> f64 {
    lp_norm_estimate(
        &span.cells,
        span.exponents.p,
        domain,
        op,
        adjoint,
        settings.seed ^ stream,
        settings.starts,
        NORM_ITERATIONS,
    )
}

/// Perturbs small functionals by `b_i g_i'` and promotes the perturbed
/// approximate frame, giving functionals bounded away from zero.
pub fn seminormalize(
    frame: &FramePair,
    auxiliary: &SeminormalizationAuxiliary,
    settings: SeminormalizeSettings,
) -> Result<Seminormalized> {
    let n = frame.len();
    let aux = &auxiliary.functionals;
    if aux.len() != n {
        return Err(Error::Auxiliary(format!("{} auxiliary functionals for {n} pairs", aux.len())));
    }
    let e = frame.exponents;
    let aux_norms: Vec<f64> = aux.iter().map(|g| g.lp_norm(e.p_dual)).collect();
    if let Some((i, v)) = aux_norms.iter().enumerate().find(|(_, v)| (**v - 1.0).abs() > 1e-12) {
        return Err(Error::Auxiliary(format!("auxiliary functional {} has norm {v}", i + 1)));
    }

    let s_span = WorkingSpan::new(e, &frame.functions, &frame.functionals, aux)?;
    let m = s_span.measure();
    let aux_mat = s_span.cells.matrix(aux)?;
    let mut stacked = DMatrix::zeros(s_span.cells.len(), 3 * n);
    stacked.columns_mut(0, n).copy_from(&s_span.synth);
    stacked.columns_mut(n, n).copy_from(&s_span.analysis);
    stacked.columns_mut(2 * n, n).copy_from(&aux_mat);
    let domain = orthonormal_range(&stacked);

    // test inputs: seeded elements of the joint span plus pure noise on the cells
    let mut r = sweep::rng(settings.seed, 0x5a);
    let mut inputs: Vec<DVector<f64>> = (0..settings.samples)
        .map(|_| &domain * sweep::gaussian_vector(&mut r, domain.ncols()))
        .collect();
    inputs.extend((0..settings.samples / 4).map(|_| sweep::gaussian_vector(&mut r, s_span.cells.len())));

    let function_norms: Vec<f64> = frame.functions.iter().map(|f| f.lp_norm(e.p)).collect();
    let m0 = seq_norm(&function_norms, 2.0);
    for g in &inputs {
        let a = aux_mat.transpose() * g * m;
        let mask: Vec<bool> = (0..n).map(|_| r.random::<bool>()).collect();
        let chosen = DVector::from_fn(n, |i, _| if mask[i] { a[i] } else { 0.0 });
        let lhs = s_span.norm(&(&s_span.synth * &chosen));
        if lhs > m0 * chosen.norm() * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::Auxiliary(format!(
                "square-summable synthesis bound fails: {lhs} > {m0}·{}",
                chosen.norm()
            )));
        }
    }

    let op_s = |x: &DVector<f64>| s_span.apply(x);
    let adj_s = |x: &DVector<f64>| s_span.apply_adjoint(x);
    let s_norm = norm_of(&s_span, &domain, &op_s, &adj_s, &settings, 1);

    let lu = s_span.core_solver()?;
    let lu_t = s_span.core_op.transpose().lu();
    let core = &s_span.core;
    let op_inv = |x: &DVector<f64>| core * lu.solve(&(core.transpose() * x)).unwrap_or_else(|| DVector::zeros(core.ncols()));
    let adj_inv =
        |x: &DVector<f64>| core * lu_t.solve(&(core.transpose() * x)).unwrap_or_else(|| DVector::zeros(core.ncols()));
    let s_inverse_norm = norm_of(&s_span, core, &op_inv, &adj_inv, &settings, 2);
    let delta0 = (1.0 / (2.0 * s_inverse_norm)).min(0.9);

    // K_u({f_i, g_i'}): Bessel + Hölder on a unit-measure support for orthonormal g_i',
    // the triangle inequality otherwise
    let gram = aux_mat.transpose() * &aux_mat * m;
    let support: f64 = (0..aux_mat.nrows())
        .filter(|&c| aux_mat.row(c).iter().any(|v| *v != 0.0))
        .count() as f64
        * m;
    let orthonormal = (gram - DMatrix::identity(n, n)).amax() <= 1e-12 && support <= 1.0 + 1e-12;
    let l1: f64 = function_norms.iter().sum();
    let aux_unconditional_bound = if orthonormal && e.p >= 2.0 { m0.min(l1) } else { l1 }.max(1.0);
    let aux_frame = WorkingSpan::new(e, &frame.functions, aux, &frame.functionals)?;
    let sampled = super::model::constants_for(
        &aux_frame,
        &inputs,
        sweep::SweepMode::auto(n, sweep::EXHAUSTIVE_LIMIT, 256),
        settings.seed,
        &[],
    )?;
    let aux_unconditional_sampled = sampled.k_u;

    let functional_norms: Vec<f64> = frame.functionals.iter().map(|f| f.lp_norm(e.p_dual)).collect();
    let mut numerator = (s_norm, K1Source::FrameOperator);
    let mut consider = |v: f64, src: K1Source| {
        if v > numerator.0 {
            numerator = (v, src);
        }
    };
    consider(aux_unconditional_bound, K1Source::AuxiliaryUnconditional);
    for j in 0..n {
        consider(aux_norms[j], K1Source::AuxiliaryNorm(j + 1));
        consider(1.0 / aux_norms[j], K1Source::AuxiliaryInverseNorm(j + 1));
        consider(function_norms[j], K1Source::FunctionNorm(j + 1));
        consider(functional_norms[j], K1Source::FunctionalNorm(j + 1));
    }
    let k1 = numerator.0 / delta0;
    let threshold = 1.0 / (2.0 * k1 * k1);
    let b: Vec<f64> = functional_norms
        .iter()
        .map(|v| if *v < threshold { 1.0 / k1 } else { 0.0 })
        .collect();

    let perturbed: Vec<GridFunction> = frame
        .functionals
        .iter()
        .zip(aux)
        .zip(&b)
        .map(|((f, g), bi)| {
            let mut out = f.clone();
            out.add_scaled(*bi, g)?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let min_perturbed_norm = perturbed.iter().map(|g| g.lp_norm(e.p_dual)).fold(f64::INFINITY, f64::min);
    if min_perturbed_norm < threshold {
        return Err(Error::Auxiliary(format!(
            "perturbed functional norm {min_perturbed_norm} below {threshold}"
        )));
    }

    let t_span = WorkingSpan::new(e, &frame.functions, &perturbed, aux)?;
    let b_vec = DVector::from_vec(b.clone());
    let op_d = |x: &DVector<f64>| &s_span.synth * (aux_mat.transpose() * x * m).component_mul(&b_vec);
    let adj_d = |y: &DVector<f64>| &aux_mat * (s_span.synth.transpose() * y * m).component_mul(&b_vec);
    let mut perturbation = norm_of(&s_span, &domain, &op_d, &adj_d, &settings, 3);
    for g in &inputs {
        perturbation = perturbation.max(s_span.norm(&op_d(g)) / s_span.norm(g));
    }
    if perturbation > delta0 {
        return Err(Error::Auxiliary(format!("‖S − T‖ ≈ {perturbation} exceeds δ₀ = {delta0}")));
    }

    let op_t = |x: &DVector<f64>| t_span.apply(x);
    let adj_t = |x: &DVector<f64>| t_span.apply_adjoint(x);
    let t_norm = norm_of(&s_span, &domain, &op_t, &adj_t, &settings, 4);

    let g_frame = FramePair {
        functionals: perturbed.clone(),
        ..frame.clone()
    };
    let promotion = promote_with(&g_frame, &perturbed, t_span, settings.tol)?;
    let min_functional_norm = promotion
        .frame
        .functionals
        .iter()
        .map(|f| f.lp_norm(e.p_dual))
        .fold(f64::INFINITY, f64::min);

    Ok(Seminormalized {
        frame: promotion.frame.clone(),
        auxiliary: SeminormalizationAuxiliary {
            functionals: aux.clone(),
            k1,
            delta0,
            b,
            threshold,
        },
        promotion,
        k1_source: numerator.1,
        s_norm,
        s_inverse_norm,
        t_norm,
        m0,
        aux_unconditional_bound,
        aux_unconditional_sampled,
        min_perturbed_norm,
        perturbation,
        min_functional_norm,
        functional_lower_bound: threshold / t_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::invert::promote_to_schauder_frame;
    use crate::grid::{make_indicator, GridSpec};
    use crate::walsh::walsh_system;

    fn frame_with(scales: &[f64]) -> FramePair {
        let spec = GridSpec::centered(1, 3, 16.0).unwrap();
        let fs: Vec<_> = (0..scales.len())
            .map(|i| make_indicator(&spec, &[2.0 * i as f64], &[2.0 * i as f64 + 1.0], 1.0).unwrap())
            .collect();
        let duals = fs.iter().zip(scales).map(|(f, s)| f.scaled(*s)).collect();
        FramePair::new(3.0, fs, duals).unwrap()
    }

    fn walsh_aux(frame: &FramePair) -> SeminormalizationAuxiliary {
        SeminormalizationAuxiliary::new(walsh_system(frame.spec(), frame.len()).unwrap())
    }

    #[test]
    fn large_functionals_are_left_alone() {
        let frame = frame_with(&[1.0, 1.0, 1.0]);
        let out = seminormalize(&frame, &walsh_aux(&frame), SeminormalizeSettings::default()).unwrap();
        assert!(out.auxiliary.b.iter().all(|b| *b == 0.0));
        let plain = promote_to_schauder_frame(&frame, 1e-9).unwrap();
        for (a, b) in out.frame.functionals.iter().zip(&plain.frame.functionals) {
            let mut d = a.clone();
            d.add_scaled(-1.0, b).unwrap();
            assert!(d.lp_norm(1.5) < 1e-12);
        }
    }

    #[test]
    fn vanishing_functional_gets_the_auxiliary_term() {
        let mut frame = frame_with(&[1.0, 1.0, 1.0]);
        frame.functionals[2] = GridFunction::zero(frame.spec());
        let out = seminormalize(&frame, &walsh_aux(&frame), SeminormalizeSettings::default()).unwrap();
        let a = &out.auxiliary;
        assert_eq!(a.b[2], 1.0 / a.k1);
        assert_eq!(&a.b[..2], &[0.0, 0.0]);
        assert!(out.min_perturbed_norm >= a.threshold);
        assert!(out.perturbation <= a.delta0);
        assert!(a.delta0 > 0.0 && a.delta0 < 1.0);
        assert!(out.min_functional_norm > 0.0);
    }

    #[test]
    fn auxiliary_norms_are_checked() {
        let frame = frame_with(&[1.0, 1.0]);
        let mut aux = walsh_aux(&frame);
        aux.functionals[0] = aux.functionals[0].scaled(2.0);
        assert!(matches!(
            seminormalize(&frame, &aux, SeminormalizeSettings::default()),
            Err(Error::Auxiliary(_))
        ));
        aux.functionals.pop();
        assert!(seminormalize(&frame, &aux, SeminormalizeSettings::default()).is_err());
    }
}
