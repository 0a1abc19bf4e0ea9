//! Stokes operators of bright two-polarization beams, linearized onto the
//! quadratures of a weak horizontal mode and a strong coherent vertical mode.
//!
//! For a beam with mean amplitudes `alpha_a` (H) and `alpha_c` (V) and
//! relative phase `theta`, the operator means are
//!
//! ```text
//! <S0> = alpha_a^2 + alpha_c^2      <S2> = 2 alpha_a alpha_c cos(theta)
//! <S1> = alpha_a^2 - alpha_c^2      <S3> = 2 alpha_a alpha_c sin(theta)
//! ```
//!
//! and the fluctuations are linear forms over the quadrature vector. In the
//! bright-beam regime (`alpha_a^2 << alpha_c^2`) only the `alpha_c`-weighted
//! terms survive; [`FormMode::Full`] keeps the `alpha_a`-weighted terms to
//! quantify that approximation.

use thiserror::Error;

use crate::gaussian::{GaussianState, ModeId, StateError};

/// Tolerance for the equal-powers precondition of the shot-noise unit.
pub const POWER_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PolarizationError {
    #[error("invalid beam '{name}': {msg}")]
    InvalidBeam { name: String, msg: String },
    #[error("beams have unequal powers; the normalized criteria assume shared alpha_c and alpha_a")]
    UnequalPowers,
    #[error("shot-noise unit is degenerate: alpha_a equals alpha_c")]
    DegenerateSnl,
    #[error(transparent)]
    State(#[from] StateError),
}

/// A polarization beam: a weak H-polarized quantum mode and a strong
/// coherent V mode, tracked as an explicit vacuum-noise mode of the state.
#[derive(Debug, Clone, PartialEq)]
pub struct BrightBeam {
    pub name: String,
    pub h_mode: ModeId,
    pub v_mode: ModeId,
    pub alpha_c: f64,
    pub alpha_a: f64,
    pub theta: f64,
}

impl BrightBeam {
    pub fn new(
        name: impl Into<String>,
        h_mode: ModeId,
        v_mode: ModeId,
        alpha_c: f64,
        alpha_a: f64,
        theta: f64,
    ) -> Result<Self, PolarizationError> {
        let name = name.into();
        let invalid = |msg: String| PolarizationError::InvalidBeam { name: name.clone(), msg };
        if !alpha_c.is_finite() || alpha_c <= 0.0 {
            return Err(invalid(format!("alpha_c must be positive, got {alpha_c}")));
        }
        if !alpha_a.is_finite() || alpha_a < 0.0 {
            return Err(invalid(format!("alpha_a must be nonnegative, got {alpha_a}")));
        }
        if !theta.is_finite() {
            return Err(invalid(format!("theta must be finite, got {theta}")));
        }
        if h_mode == v_mode {
            return Err(invalid("h and v must be distinct modes".to_string()));
        }
        Ok(Self { name, h_mode, v_mode, alpha_c, alpha_a, theta })
    }

    /// Ratio of weak-beam to coherent-beam power.
    pub fn power_ratio(&self) -> f64 {
        (self.alpha_a / self.alpha_c).powi(2)
    }

    /// The linearized forms assume a weak H beam; a ratio above 0.1 is worth
    /// flagging to the caller.
    pub fn regime_warning(&self) -> Option<String> {
        (self.power_ratio() > 0.1).then(|| {
            format!(
                "beam '{}' has weak/strong power ratio {:.3}; linearized Stokes forms degrade",
                self.name,
                self.power_ratio()
            )
        })
    }
}

/// The four Stokes components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StokesIndex {
    S0,
    S1,
    S2,
    S3,
}

impl StokesIndex {
    pub const ALL: [StokesIndex; 4] = [Self::S0, Self::S1, Self::S2, Self::S3];
}

/// Which terms of the linearized Stokes fluctuations to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FormMode {
    /// Only the `alpha_c`-weighted terms; exact in the `alpha_a -> 0` limit.
    #[default]
    PaperApprox,
    /// Also the `alpha_a`-weighted terms riding on the coherent mode's noise.
    Full,
}

/// Mean values of the four Stokes operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesMeans {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesMeans {
    pub fn get(&self, k: StokesIndex) -> f64 {
        match k {
            StokesIndex::S0 => self.s0,
            StokesIndex::S1 => self.s1,
            StokesIndex::S2 => self.s2,
            StokesIndex::S3 => self.s3,
        }
    }
}

pub fn stokes_means(beam: &BrightBeam) -> StokesMeans {
    let (a, c) = (beam.alpha_a, beam.alpha_c);
    StokesMeans {
        s0: a * a + c * c,
        s1: a * a - c * c,
        s2: 2.0 * a * c * beam.theta.cos(),
        s3: 2.0 * a * c * beam.theta.sin(),
    }
}

/// Linear form `c` such that `delta S_k ~= c . delta q` over a state with
/// `n_modes` modes. The H quadrature seen by `S2` is rotated by `theta`
/// (`X_H(theta) = X+ cos + X- sin`) and `S3` sees the conjugate rotation.
/// Signs are a frozen convention; they drop out of every variance used here.
pub fn stokes_fluctuation_form(
    beam: &BrightBeam,
    k: StokesIndex,
    n_modes: usize,
    mode: FormMode,
) -> Result<Vec<f64>, PolarizationError> {
    for m in [beam.h_mode, beam.v_mode] {
        if m.index() >= n_modes {
            return Err(PolarizationError::State(StateError::ModeOutOfRange {
                mode: m.index(),
                n_modes,
            }));
        }
    }
    let mut c = vec![0.0; 2 * n_modes];
    let (hp, hm) = (2 * beam.h_mode.index(), 2 * beam.h_mode.index() + 1);
    let (vp, vm) = (2 * beam.v_mode.index(), 2 * beam.v_mode.index() + 1);
    let (wc, wa) = (2.0 * beam.alpha_c, 2.0 * beam.alpha_a);
    let (cos_t, sin_t) = (beam.theta.cos(), beam.theta.sin());
    let full = mode == FormMode::Full;
    match k {
        StokesIndex::S0 => {
            c[vp] += wc;
            if full {
                c[hp] += wa;
            }
        }
        StokesIndex::S1 => {
            c[vp] -= wc;
            if full {
                c[hp] += wa;
            }
        }
        StokesIndex::S2 => {
            c[hp] += wc * cos_t;
            c[hm] += wc * sin_t;
            if full {
                c[vp] += wa * cos_t;
                c[vm] -= wa * sin_t;
            }
        }
        StokesIndex::S3 => {
            c[hp] -= wc * sin_t;
            c[hm] += wc * cos_t;
            if full {
                c[vp] -= wa * sin_t;
                c[vm] -= wa * cos_t;
            }
        }
    }
    Ok(c)
}

/// Variance of a gain-weighted sum of Stokes fluctuations,
/// `delta^2 (sum_j gain_j S_{k_j})`, including every cross covariance the
/// state carries between the beams.
pub fn stokes_combination_variance(
    state: &GaussianState,
    terms: &[(&BrightBeam, StokesIndex, f64)],
    mode: FormMode,
) -> Result<f64, PolarizationError> {
    let form = combination_form(state.n_modes(), terms, mode)?;
    Ok(state.linear_form_variance(&form)?)
}

/// The combined linear form behind [`stokes_combination_variance`].
pub fn combination_form(
    n_modes: usize,
    terms: &[(&BrightBeam, StokesIndex, f64)],
    mode: FormMode,
) -> Result<Vec<f64>, PolarizationError> {
    let mut total = vec![0.0; 2 * n_modes];
    for (beam, k, gain) in terms {
        let form = stokes_fluctuation_form(beam, *k, n_modes, mode)?;
        for (t, f) in total.iter_mut().zip(form.iter()) {
            *t += gain * f;
        }
    }
    Ok(total)
}

/// Shot-noise unit shared by the normalized criteria, `4 |alpha_c^2 -
/// alpha_a^2|`. All beams entering one criterion must carry the same powers.
pub fn snl_denominator(beams: &[&BrightBeam]) -> Result<f64, PolarizationError> {
    let first = beams.first().ok_or(PolarizationError::UnequalPowers)?;
    for beam in &beams[1..] {
        if (beam.alpha_c - first.alpha_c).abs() > POWER_MATCH_TOL
            || (beam.alpha_a - first.alpha_a).abs() > POWER_MATCH_TOL
        {
            return Err(PolarizationError::UnequalPowers);
        }
    }
    Ok(4.0 * (first.alpha_c * first.alpha_c - first.alpha_a * first.alpha_a).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{SqueezeAxis, SqueezerSpec};
    use approx::assert_relative_eq;

    fn beam(alpha_c: f64, alpha_a: f64, theta: f64) -> BrightBeam {
        BrightBeam::new("test", ModeId(0), ModeId(1), alpha_c, alpha_a, theta).unwrap()
    }

    #[test]
    fn stokes_means_match_definitions() {
        let pure_v = stokes_means(&beam(1.0, 0.0, 0.0));
        assert_relative_eq!(pure_v.s0, 1.0);
        assert_relative_eq!(pure_v.s1, -1.0);
        assert_relative_eq!(pure_v.s2, 0.0);
        assert_relative_eq!(pure_v.s3, 0.0);

        let diagonal = stokes_means(&beam(1.0, 1.0, 0.0));
        assert_relative_eq!(diagonal.s0, 2.0);
        assert_relative_eq!(diagonal.s1, 0.0);
        assert_relative_eq!(diagonal.s2, 2.0);
        assert_relative_eq!(diagonal.s3, 0.0);

        let operating = stokes_means(&beam(1.0, 1.0 / 30.0f64.sqrt(), 0.0));
        assert_relative_eq!(operating.s0, 31.0 / 30.0, epsilon = 1e-15);
        assert_relative_eq!(operating.s2, 2.0 / 30.0f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn coherent_beam_sits_at_shot_noise() {
        let state = GaussianState::vacuum(2).unwrap();
        let b = beam(1.0, 0.0, 0.0);
        let v2 = stokes_combination_variance(&state, &[(&b, StokesIndex::S2, 1.0)], FormMode::PaperApprox)
            .unwrap();
        let means = stokes_means(&b);
        assert_relative_eq!(v2, means.s0, epsilon = 1e-15);
        assert_relative_eq!(v2, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn squeezed_h_mode_drops_s2_below_shot_noise() {
        let state = GaussianState::vacuum(2)
            .unwrap()
            .with_dopa_output(ModeId(0), &SqueezerSpec::new(0.5, 0.0, SqueezeAxis::Amplitude).unwrap())
            .unwrap();
        let b = beam(1.0, 0.0, 0.0);
        let v2 = stokes_combination_variance(&state, &[(&b, StokesIndex::S2, 1.0)], FormMode::PaperApprox)
            .unwrap();
        assert_relative_eq!(v2, (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn s0_and_s1_ride_on_the_coherent_mode() {
        let state = GaussianState::vacuum(2)
            .unwrap()
            .with_dopa_output(ModeId(0), &SqueezerSpec::new(0.9, 0.3, SqueezeAxis::Phase).unwrap())
            .unwrap();
        let b = beam(1.7, 0.0, 0.0);
        for k in [StokesIndex::S0, StokesIndex::S1] {
            let v = stokes_combination_variance(&state, &[(&b, k, 1.0)], FormMode::PaperApprox).unwrap();
            assert_relative_eq!(v, 4.0 * 1.7 * 1.7 * 0.25, epsilon = 1e-13);
        }
    }

    #[test]
    fn forms_at_zero_theta_follow_the_frozen_convention() {
        let b = beam(1.5, 0.25, 0.0);
        let s2 = stokes_fluctuation_form(&b, StokesIndex::S2, 2, FormMode::Full).unwrap();
        assert_relative_eq!(s2[0], 3.0);
        assert_relative_eq!(s2[1], 0.0);
        assert_relative_eq!(s2[2], 0.5);
        assert_relative_eq!(s2[3], 0.0);
        let s3 = stokes_fluctuation_form(&b, StokesIndex::S3, 2, FormMode::Full).unwrap();
        assert_relative_eq!(s3[0], 0.0);
        assert_relative_eq!(s3[1], 3.0);
        assert_relative_eq!(s3[2], 0.0);
        assert_relative_eq!(s3[3], -0.5);
    }

    #[test]
    fn two_coherent_beams_with_opposite_gains() {
        let state = GaussianState::vacuum(4).unwrap();
        let b1 = BrightBeam::new("b1", ModeId(0), ModeId(1), 2.0, 0.0, 0.0).unwrap();
        let b2 = BrightBeam::new("b2", ModeId(2), ModeId(3), 2.0, 0.0, 0.0).unwrap();
        let v = stokes_combination_variance(
            &state,
            &[(&b1, StokesIndex::S2, 1.0), (&b2, StokesIndex::S2, -1.0)],
            FormMode::PaperApprox,
        )
        .unwrap();
        assert_relative_eq!(v, 2.0 * 4.0, epsilon = 1e-13);

        let zero = stokes_combination_variance(
            &state,
            &[(&b1, StokesIndex::S2, 0.0), (&b2, StokesIndex::S2, 0.0)],
            FormMode::PaperApprox,
        )
        .unwrap();
        assert_relative_eq!(zero, 0.0);
    }

    #[test]
    fn theta_rotation_preserves_s2_plus_s3() {
        let state = GaussianState::vacuum(2)
            .unwrap()
            .with_dopa_output(ModeId(0), &SqueezerSpec::new(0.8, 0.2, SqueezeAxis::Amplitude).unwrap())
            .unwrap();
        let reference: f64 = [StokesIndex::S2, StokesIndex::S3]
            .iter()
            .map(|&k| {
                stokes_combination_variance(&state, &[(&beam(1.3, 0.2, 0.0), k, 1.0)], FormMode::Full)
                    .unwrap()
            })
            .sum();
        for theta in [0.3, 1.0, 2.2, -0.7] {
            let b = beam(1.3, 0.2, theta);
            let total: f64 = [StokesIndex::S2, StokesIndex::S3]
                .iter()
                .map(|&k| {
                    stokes_combination_variance(&state, &[(&b, k, 1.0)], FormMode::Full).unwrap()
                })
                .sum();
            assert_relative_eq!(total, reference, epsilon = 1e-12);
        }
    }

    #[test]
    fn snl_denominator_cases() {
        let b1 = beam(1.0, 0.0, 0.0);
        assert_relative_eq!(snl_denominator(&[&b1, &b1]).unwrap(), 4.0);

        let b2 = beam(30.0f64.sqrt(), 1.0, 0.0);
        assert_relative_eq!(snl_denominator(&[&b2, &b2, &b2]).unwrap(), 116.0, epsilon = 1e-12);

        let degenerate = beam(1.0, 1.0, 0.0);
        assert_relative_eq!(snl_denominator(&[&degenerate]).unwrap(), 0.0);

        let other = beam(2.0, 0.0, 0.0);
        assert!(matches!(snl_denominator(&[&b1, &other]), Err(PolarizationError::UnequalPowers)));
    }

    #[test]
    fn regime_warning_on_strong_weak_beam() {
        assert!(beam(1.0, 0.2, 0.0).regime_warning().is_none());
        assert!(beam(1.0, 0.5, 0.0).regime_warning().is_some());
    }
}
