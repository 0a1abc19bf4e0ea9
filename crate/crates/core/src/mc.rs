//! Independent Monte Carlo oracle: samples field fluctuations from the
//! Gaussian phase-space distribution of a state and estimates Stokes
//! statistics either through the linearized forms or from the exact
//! bilinear Stokes expressions on sampled complex fields.
//!
//! Sampling targets the Gaussian quasi-probability distribution whose second
//! moments are the state covariance, which reproduces symmetric-ordered
//! moments exactly. Reported exact-mode means and variances include the
//! constant commutator offsets that map symmetric-ordered to operator-ordered
//! moments (`-1/2` per constituent mode on intensity means, `-1/2` per unit
//! combination weight on variances), so they are directly comparable with
//! the linearized predictions. The offsets are exact for any Gaussian state
//! whose coherent modes are fresh vacua, which is how beams are compiled.
//!
//! Draws are counter based: a seed plus the sample index fully determine
//! each vector, so batches are reproducible and independent of how a range
//! of indices is partitioned across workers.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::criteria::{
    combination_indices, Criterion, CriteriaError, GainVector,
};
use crate::gaussian::{GaussianState, PSD_TOL};
use crate::polarization::{
    combination_form, snl_denominator, BrightBeam, FormMode, PolarizationError, StokesIndex,
};

/// Fewer samples than this make variance standard errors meaningless.
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Error)]
pub enum McError {
    #[error("need at least {min} samples for meaningful standard errors, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("invalid state: covariance is not positive semidefinite (min eigenvalue {0:.3e})")]
    InvalidState(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Polarization(#[from] PolarizationError),
    #[error(transparent)]
    State(#[from] crate::gaussian::StateError),
}

/// A reproducible batch of quadrature samples, row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub n_samples: usize,
    pub seed: u64,
    pub dim: usize,
    data: Vec<f64>,
}

impl SampleBatch {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Draws quadrature vectors `mean + F z` with `F` the symmetric square root
/// of the covariance and `z` standard normal, one counter-mode stream per
/// sample index.
pub struct QuadratureSampler {
    factor: DMatrix<f64>,
    mean: DVector<f64>,
    base: ChaCha8Rng,
    dim: usize,
}

impl QuadratureSampler {
    pub fn new(state: &GaussianState, seed: u64) -> Result<Self, McError> {
        let eigen = state.cov().clone().symmetric_eigen();
        let mut min_eig = f64::INFINITY;
        for v in eigen.eigenvalues.iter() {
            min_eig = min_eig.min(*v);
        }
        if min_eig < -PSD_TOL {
            return Err(McError::InvalidState(min_eig));
        }
        let dim = state.dim();
        let mut scaled = eigen.eigenvectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= eigen.eigenvalues[k].max(0.0).sqrt();
        }
        let factor = &scaled * eigen.eigenvectors.transpose();
        Ok(Self { factor, mean: state.mean().clone(), base: ChaCha8Rng::seed_from_u64(seed), dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Fills `out` with sample number `index`. The draw depends only on the
    /// seed and the index.
    pub fn sample_into(&self, index: u64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        let mut rng = self.base.clone();
        rng.set_stream(index);
        let z: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.mean[i];
            for (j, zj) in z.iter().enumerate() {
                acc += self.factor[(i, j)] * zj;
            }
            *o = acc;
        }
    }
}

/// Draws `n` quadrature vectors from the state's phase-space distribution.
pub fn sample_quadratures(
    state: &GaussianState,
    n: usize,
    seed: u64,
) -> Result<SampleBatch, McError> {
    if n == 0 {
        return Err(McError::InvalidArgument("need at least one sample".to_string()));
    }
    let sampler = QuadratureSampler::new(state, seed)?;
    let dim = sampler.dim();
    let mut data = vec![0.0; n * dim];
    for i in 0..n {
        sampler.sample_into(i as u64, &mut data[i * dim..(i + 1) * dim]);
    }
    Ok(SampleBatch { n_samples: n, seed, dim, data })
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// How Stokes fluctuations are computed from the samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StokesSampling {
    /// Dot the samples with the linearized fluctuation forms.
    Linearized(FormMode),
    /// Evaluate the exact bilinear Stokes expressions on complex fields
    /// `a = alpha + (x+ + i x-)`.
    Exact,
}

/// Monte Carlo estimates of the three criteria.
#[derive(Debug, Clone, PartialEq)]
pub struct McCriteriaResult {
    pub criteria: [MomentEstimate; 3],
    pub n_samples: usize,
    pub seed: u64,
    pub snl: f64,
    pub sampling: StokesSampling,
}

/// Per-beam Stokes sample statistics (exact sampling, operator-ordered).
#[derive(Debug, Clone, PartialEq)]
pub struct BeamStokesStats {
    pub name: String,
    pub means: [MomentEstimate; 4],
    pub variances: [MomentEstimate; 4],
}

/// Relative deviation of exact-mode Stokes variances from the linearized
/// bright-beam forms, per beam and Stokes component, at one power ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizationRow {
    pub ratio: f64,
    /// `deviations[beam][k]` for `k` indexing `S0..S3`.
    pub deviations: Vec<[f64; 4]>,
    pub max_deviation: f64,
}

fn exact_stokes_sample(beam: &BrightBeam, x: &[f64]) -> [f64; 4] {
    let h = 2 * beam.h_mode.index();
    let v = 2 * beam.v_mode.index();
    let (ah_re, ah_im) = (beam.alpha_a + x[h], x[h + 1]);
    let (av_re, av_im) = (beam.alpha_c + x[v], x[v + 1]);
    // z = conj(a_H) a_V e^{i theta}
    let zr0 = ah_re * av_re + ah_im * av_im;
    let zi0 = ah_re * av_im - ah_im * av_re;
    let (ct, st) = (beam.theta.cos(), beam.theta.sin());
    let zr = zr0 * ct - zi0 * st;
    let zi = zr0 * st + zi0 * ct;
    let nh = ah_re * ah_re + ah_im * ah_im;
    let nv = av_re * av_re + av_im * av_im;
    // -1/2 per constituent mode converts the sampled intensities to
    // operator-ordered photon numbers.
    [nh + nv - 1.0, nh - nv, 2.0 * zr, 2.0 * zi]
}

fn stokes_value(k: StokesIndex, s: &[f64; 4]) -> f64 {
    match k {
        StokesIndex::S0 => s[0],
        StokesIndex::S1 => s[1],
        StokesIndex::S2 => s[2],
        StokesIndex::S3 => s[3],
    }
}

/// Estimates the three criteria by sampling: sample variances of the six
/// correlation combinations, normalized by the shared shot-noise unit.
/// Standard errors come from the spread of the per-sample squared residuals.
pub fn mc_criteria(
    state: &GaussianState,
    beams: &[BrightBeam],
    gains: GainVector,
    n: usize,
    seed: u64,
    sampling: StokesSampling,
) -> Result<McCriteriaResult, McError> {
    if n < MIN_SAMPLES {
        return Err(McError::TooFewSamples { got: n, min: MIN_SAMPLES });
    }
    if beams.len() != 3 {
        return Err(McError::Criteria(CriteriaError::WrongBeamCount(beams.len())));
    }
    let refs: Vec<&BrightBeam> = beams.iter().collect();
    let snl = snl_denominator(&refs)?;
    if snl <= crate::criteria::SNL_DEGENERACY_TOL {
        return Err(McError::Criteria(CriteriaError::DegenerateSnl));
    }
    let sampler = QuadratureSampler::new(state, seed)?;
    let dim = sampler.dim();

    // Six combinations: the S2 difference and the gain-weighted S3 sum of
    // each criterion, as (beam, index, weight) terms.
    let mut combos: Vec<Vec<(usize, StokesIndex, f64)>> = Vec::with_capacity(6);
    for criterion in Criterion::ALL {
        let (s2, s3) = combination_indices(criterion, &gains);
        combos.push(s2.iter().map(|&(b, g)| (b, StokesIndex::S2, g)).collect());
        combos.push(s3.iter().map(|&(b, g)| (b, StokesIndex::S3, g)).collect());
    }
    let forms: Option<Vec<Vec<f64>>> = match sampling {
        StokesSampling::Linearized(mode) => {
            let mut forms = Vec::with_capacity(6);
            for combo in &combos {
                let terms: Vec<_> = combo.iter().map(|&(b, k, g)| (&beams[b], k, g)).collect();
                forms.push(combination_form(state.n_modes(), &terms, mode)?);
            }
            Some(forms)
        }
        StokesSampling::Exact => None,
    };

    let combo_values = |x: &[f64], out: &mut [f64; 6]| match &forms {
        Some(forms) => {
            for (slot, form) in out.iter_mut().zip(forms.iter()) {
                *slot = form.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
            }
        }
        None => {
            let stokes: Vec<[f64; 4]> = beams.iter().map(|b| exact_stokes_sample(b, x)).collect();
            for (slot, combo) in out.iter_mut().zip(combos.iter()) {
                *slot = combo.iter().map(|&(b, k, g)| g * stokes_value(k, &stokes[b])).sum();
            }
        }
    };

    // Pass 1: combination means.
    let mut x = vec![0.0; dim];
    let mut values = [0.0f64; 6];
    let mut means = [0.0f64; 6];
    for i in 0..n {
        sampler.sample_into(i as u64, &mut x);
        combo_values(&x, &mut values);
        for (m, v) in means.iter_mut().zip(values.iter()) {
            *m += v;
        }
    }
    for m in means.iter_mut() {
        *m /= n as f64;
    }

    // Pass 2: centered second moments per combination, and the spread of the
    // per-sample sum of squared residuals per criterion for standard errors.
    let mut m2 = [0.0f64; 6];
    let mut q_sum = [0.0f64; 3];
    let mut q_sumsq = [0.0f64; 3];
    for i in 0..n {
        sampler.sample_into(i as u64, &mut x);
        combo_values(&x, &mut values);
        let mut q = [0.0f64; 3];
        for (slot, (v, m)) in values.iter().zip(means.iter()).enumerate() {
            let c = (v - m) * (v - m);
            m2[slot] += c;
            q[slot / 2] += c;
        }
        for (j, qj) in q.iter().enumerate() {
            q_sum[j] += qj;
            q_sumsq[j] += qj * qj;
        }
    }

    // Exact sampling estimates symmetric-ordered variances; subtract the
    // constant commutator offset (1/2 per squared combination weight).
    let corrections: [f64; 6] = match sampling {
        StokesSampling::Exact => {
            let mut c = [0.0f64; 6];
            for (slot, combo) in combos.iter().enumerate() {
                c[slot] = 0.5 * combo.iter().map(|&(_, _, g)| g * g).sum::<f64>();
            }
            c
        }
        StokesSampling::Linearized(_) => [0.0; 6],
    };

    let denom = (n - 1) as f64;
    let mut criteria = [MomentEstimate { value: 0.0, std_error: 0.0 }; 3];
    for (j, est) in criteria.iter_mut().enumerate() {
        let var2 = m2[2 * j] / denom - corrections[2 * j];
        let var3 = m2[2 * j + 1] / denom - corrections[2 * j + 1];
        let q_mean = q_sum[j] / n as f64;
        let q_var = (q_sumsq[j] / n as f64 - q_mean * q_mean).max(0.0);
        est.value = (var2 + var3) / snl;
        est.std_error = (q_var / n as f64).sqrt() / snl;
    }
    Ok(McCriteriaResult { criteria, n_samples: n, seed, snl, sampling })
}

/// Exact-mode per-beam Stokes means and variances with standard errors.
/// Variance standard errors use the sample fourth moments, so they hold for
/// the non-Gaussian exact Stokes distributions too.
pub fn exact_stokes_stats(
    state: &GaussianState,
    beams: &[BrightBeam],
    n: usize,
    seed: u64,
) -> Result<Vec<BeamStokesStats>, McError> {
    if n < MIN_SAMPLES {
        return Err(McError::TooFewSamples { got: n, min: MIN_SAMPLES });
    }
    let sampler = QuadratureSampler::new(state, seed)?;
    let dim = sampler.dim();
    let n_beams = beams.len();

    let mut x = vec![0.0; dim];
    let mut sums = vec![[0.0f64; 4]; n_beams];
    for i in 0..n {
        sampler.sample_into(i as u64, &mut x);
        for (b, beam) in beams.iter().enumerate() {
            let s = exact_stokes_sample(beam, &x);
            for (acc, v) in sums[b].iter_mut().zip(s.iter()) {
                *acc += v;
            }
        }
    }
    let means: Vec<[f64; 4]> = sums.iter().map(|s| s.map(|v| v / n as f64)).collect();

    let mut m2 = vec![[0.0f64; 4]; n_beams];
    let mut m4 = vec![[0.0f64; 4]; n_beams];
    for i in 0..n {
        sampler.sample_into(i as u64, &mut x);
        for (b, beam) in beams.iter().enumerate() {
            let s = exact_stokes_sample(beam, &x);
            for k in 0..4 {
                let c = s[k] - means[b][k];
                m2[b][k] += c * c;
                m4[b][k] += c * c * c * c;
            }
        }
    }

    let mut out = Vec::with_capacity(n_beams);
    for (b, beam) in beams.iter().enumerate() {
        let mut mean_est = [MomentEstimate { value: 0.0, std_error: 0.0 }; 4];
        let mut var_est = [MomentEstimate { value: 0.0, std_error: 0.0 }; 4];
        for k in 0..4 {
            let var_sym = m2[b][k] / (n - 1) as f64;
            let mu4 = m4[b][k] / n as f64;
            mean_est[k] = MomentEstimate {
                value: means[b][k],
                std_error: (var_sym / n as f64).sqrt(),
            };
            var_est[k] = MomentEstimate {
                // Symmetric-to-operator ordering offset: -1/4 per mode for
                // the intensity components, -1/2 for the polarization ones.
                value: var_sym - 0.5,
                std_error: ((mu4 - var_sym * var_sym).max(0.0) / n as f64).sqrt(),
            };
        }
        out.push(BeamStokesStats { name: beam.name.clone(), means: mean_est, variances: var_est });
    }
    Ok(out)
}

/// Compares exact-mode Stokes variances with the bright-beam linearized
/// forms while scanning the weak/strong power ratio: for each ratio the
/// beams' weak amplitudes are rescaled to `alpha_a = sqrt(ratio) alpha_c`,
/// the exact statistics re-estimated with the same seed, and the relative
/// deviation from the linearized prediction reported per beam and component.
pub fn validate_linearization(
    state: &GaussianState,
    beams: &[BrightBeam],
    n: usize,
    seed: u64,
    ratios: &[f64],
    reference: FormMode,
) -> Result<Vec<LinearizationRow>, McError> {
    for r in ratios {
        if !(*r > 0.0 && *r <= 1.0) {
            return Err(McError::InvalidArgument(format!(
                "power ratios must lie in (0, 1], got {r}"
            )));
        }
    }
    let mut rows = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let scaled: Vec<BrightBeam> = beams
            .iter()
            .map(|b| {
                let mut b = b.clone();
                b.alpha_a = ratio.sqrt() * b.alpha_c;
                b
            })
            .collect();
        let stats = exact_stokes_stats(state, &scaled, n, seed)?;
        let mut deviations = Vec::with_capacity(scaled.len());
        let mut max_dev = 0.0f64;
        for (beam, stat) in scaled.iter().zip(stats.iter()) {
            let mut per_beam = [0.0f64; 4];
            for (k, index) in StokesIndex::ALL.iter().enumerate() {
                let lin = crate::polarization::stokes_combination_variance(
                    state,
                    &[(beam, *index, 1.0)],
                    reference,
                )?;
                per_beam[k] = (stat.variances[k].value - lin).abs() / lin;
                max_dev = max_dev.max(per_beam[k]);
            }
            deviations.push(per_beam);
        }
        rows.push(LinearizationRow { ratio, deviations, max_deviation: max_dev });
    }
    Ok(rows)
}
