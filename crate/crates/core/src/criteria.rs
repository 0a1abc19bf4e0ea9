//! Tripartite inseparability criteria over Stokes operators, their closed
//! forms for the standard GHZ network, optimal gains, and the genuine
//! entanglement bound.
//!
//! For three beams `d1, d2, d3` with equal powers the normalized correlation
//! variances are
//!
//! ```text
//! I1 = [d2(S2_d2 - S2_d3) + d2(g1 S3_d1 + S3_d2 + S3_d3)] / (4 |ac^2 - aa^2|)
//! I2 = [d2(S2_d1 - S2_d3) + d2(S3_d1 + g2 S3_d2 + S3_d3)] / (4 |ac^2 - aa^2|)
//! I3 = [d2(S2_d1 - S2_d2) + d2(S3_d1 + S3_d2 + g3 S3_d3)] / (4 |ac^2 - aa^2|)
//! ```
//!
//! Violating any two of `I_j >= 1` certifies full tripartite inseparability;
//! `I1 + I2 + I3 < 2` certifies genuine tripartite entanglement.

use thiserror::Error;

use crate::gaussian::GaussianState;
use crate::polarization::{
    combination_form, snl_denominator, BrightBeam, FormMode, PolarizationError, StokesIndex,
};

/// Shot-noise denominators below this are treated as degenerate.
pub const SNL_DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CriteriaError {
    #[error("criteria need exactly three beams, got {0}")]
    WrongBeamCount(usize),
    #[error("degenerate shot-noise unit (alpha_a = alpha_c); the normalized criteria are undefined")]
    DegenerateSnl,
    #[error("gain quadratic is degenerate (variance coefficient {0:.3e} <= 0); covariance is not physical")]
    DegenerateQuadratic(f64),
    #[error(transparent)]
    Polarization(#[from] PolarizationError),
    #[error(transparent)]
    State(#[from] crate::gaussian::StateError),
}

/// Classical gains applied to one beam in each correlation combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainVector {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
}

impl GainVector {
    pub const ZERO: GainVector = GainVector { g1: 0.0, g2: 0.0, g3: 0.0 };

    pub fn uniform(g: f64) -> Self {
        Self { g1: g, g2: g, g3: g }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.g1, self.g2, self.g3]
    }

    pub fn from_array(g: [f64; 3]) -> Self {
        Self { g1: g[0], g2: g[1], g3: g[2] }
    }
}

/// Squeezing parameters of the three sources feeding the GHZ network, in
/// network order (source 1 phase squeezed, sources 2 and 3 amplitude
/// squeezed). `r[k]` is the squeezing parameter and `r_prime[k]` the excess
/// antisqueezed noise of source `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezingTriple {
    pub r: [f64; 3],
    pub r_prime: [f64; 3],
}

impl SqueezingTriple {
    pub fn new(r: [f64; 3], r_prime: [f64; 3]) -> Self {
        Self { r, r_prime }
    }

    pub fn symmetric(r: f64, r_prime: f64) -> Self {
        Self { r: [r; 3], r_prime: [r_prime; 3] }
    }
}

/// One of the three criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    I1,
    I2,
    I3,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Self::I1, Self::I2, Self::I3];

    pub fn index(self) -> usize {
        match self {
            Self::I1 => 0,
            Self::I2 => 1,
            Self::I3 => 2,
        }
    }
}

/// Result of evaluating the three criteria on a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriteriaResult {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub gains: GainVector,
    pub snl: f64,
    pub inseparable: bool,
    pub genuine: bool,
    pub sum: f64,
}

impl CriteriaResult {
    pub fn values(&self) -> [f64; 3] {
        [self.i1, self.i2, self.i3]
    }

    fn from_values(values: [f64; 3], gains: GainVector, snl: f64) -> Self {
        let sum = values.iter().sum();
        Self {
            i1: values[0],
            i2: values[1],
            i3: values[2],
            gains,
            snl,
            inseparable: inseparable_verdict(values),
            genuine: sum < 2.0,
            sum,
        }
    }
}

/// At least two of the three inequalities `I_j >= 1` must be violated.
pub fn inseparable_verdict(values: [f64; 3]) -> bool {
    values.iter().filter(|v| **v < 1.0).count() >= 2
}

/// Sum bound separating genuine tripartite entanglement from mixtures of
/// bipartite splits: any mixture satisfies `I1 + I2 + I3 >= 2`.
pub fn genuine_bound_check(i1: f64, i2: f64, i3: f64) -> (f64, bool) {
    let sum = i1 + i2 + i3;
    (sum, sum < 2.0)
}

/// The S2 difference pair and S3 gain-weighted triple for one criterion,
/// as (beam index, gain) lists. The gained beam of criterion `j` is beam `j`.
pub fn combination_indices(
    criterion: Criterion,
    gains: &GainVector,
) -> ([(usize, f64); 2], [(usize, f64); 3]) {
    match criterion {
        Criterion::I1 => ([(1, 1.0), (2, -1.0)], [(0, gains.g1), (1, 1.0), (2, 1.0)]),
        Criterion::I2 => ([(0, 1.0), (2, -1.0)], [(0, 1.0), (1, gains.g2), (2, 1.0)]),
        Criterion::I3 => ([(0, 1.0), (1, -1.0)], [(0, 1.0), (1, 1.0), (2, gains.g3)]),
    }
}

fn checked_snl(beams: &[BrightBeam]) -> Result<f64, CriteriaError> {
    if beams.len() != 3 {
        return Err(CriteriaError::WrongBeamCount(beams.len()));
    }
    let refs: Vec<&BrightBeam> = beams.iter().collect();
    let snl = snl_denominator(&refs)?;
    if snl <= SNL_DEGENERACY_TOL {
        return Err(CriteriaError::DegenerateSnl);
    }
    Ok(snl)
}

/// Evaluates the three criteria by propagating the state covariance through
/// the linearized Stokes forms (default bright-beam approximation).
pub fn evaluate_criteria(
    state: &GaussianState,
    beams: &[BrightBeam],
    gains: GainVector,
) -> Result<CriteriaResult, CriteriaError> {
    evaluate_criteria_in_mode(state, beams, gains, FormMode::PaperApprox)
}

/// [`evaluate_criteria`] with an explicit choice of linearized form.
pub fn evaluate_criteria_in_mode(
    state: &GaussianState,
    beams: &[BrightBeam],
    gains: GainVector,
    mode: FormMode,
) -> Result<CriteriaResult, CriteriaError> {
    let snl = checked_snl(beams)?;
    let mut values = [0.0; 3];
    for criterion in Criterion::ALL {
        let (s2, s3) = combination_indices(criterion, &gains);
        let s2_terms: Vec<_> =
            s2.iter().map(|&(b, g)| (&beams[b], StokesIndex::S2, g)).collect();
        let s3_terms: Vec<_> =
            s3.iter().map(|&(b, g)| (&beams[b], StokesIndex::S3, g)).collect();
        let v2 = state.linear_form_variance(&combination_form(state.n_modes(), &s2_terms, mode)?)?;
        let v3 = state.linear_form_variance(&combination_form(state.n_modes(), &s3_terms, mode)?)?;
        values[criterion.index()] = (v2 + v3) / snl;
    }
    Ok(CriteriaResult::from_values(values, gains, snl))
}

/// Closed-form criteria for the GHZ network (1:2 then 1:1 splitters, source
/// 1 phase squeezed), in the bright-beam limit where the shot-noise unit is
/// `4 alpha_c^2`:
///
/// ```text
/// I1 = [12 e^{-2 r3} + 2 (g1+2)^2 e^{-2 r1} + 4 (g1-1)^2 e^{2(r2+r2')}] / 24
/// I2 = [3 e^{-2 r3} + 9 e^{-2 r2} + 2 (g2+2)^2 e^{-2 r1}
///       + 3 (g2-1)^2 e^{2(r3+r3')} + (g2-1)^2 e^{2(r2+r2')}] / 24
/// I3 = I2 with g3 in place of g2
/// ```
pub fn closed_form_criteria(params: &SqueezingTriple, gains: GainVector) -> [f64; 3] {
    let [r1, r2, r3] = params.r;
    let [_, rp2, rp3] = params.r_prime;
    let e1 = (-2.0 * r1).exp();
    let e2 = (-2.0 * r2).exp();
    let e3 = (-2.0 * r3).exp();
    let a2 = (2.0 * (r2 + rp2)).exp();
    let a3 = (2.0 * (r3 + rp3)).exp();
    let sq = |x: f64| x * x;
    let i1 = (12.0 * e3 + 2.0 * sq(gains.g1 + 2.0) * e1 + 4.0 * sq(gains.g1 - 1.0) * a2) / 24.0;
    let i23 = |g: f64| {
        (3.0 * e3 + 9.0 * e2 + 2.0 * sq(g + 2.0) * e1 + 3.0 * sq(g - 1.0) * a3 + sq(g - 1.0) * a2)
            / 24.0
    };
    [i1, i23(gains.g2), i23(gains.g3)]
}

/// Gains minimizing the closed-form criteria:
///
/// ```text
/// g1       = (2 E2 - 2) / (2 E2 + 1)
/// g2 = g3  = (E2 + 3 E3 - 4) / (E2 + 3 E3 + 2)
/// ```
///
/// with `E2 = e^{2 r1 + 2 r2 + 2 r2'}` and `E3 = e^{2 r1 + 2 r3 + 2 r3'}`.
pub fn optimal_gains_closed_form(params: &SqueezingTriple) -> GainVector {
    let [r1, r2, r3] = params.r;
    let [_, rp2, rp3] = params.r_prime;
    let e2 = (2.0 * r1 + 2.0 * r2 + 2.0 * rp2).exp();
    let e3 = (2.0 * r1 + 2.0 * r3 + 2.0 * rp3).exp();
    let g1 = (2.0 * e2 - 2.0) / (2.0 * e2 + 1.0);
    let g23 = (e2 + 3.0 * e3 - 4.0) / (e2 + 3.0 * e3 + 2.0);
    GainVector { g1, g2: g23, g3: g23 }
}

/// Gain minimizing one criterion, found from the exact quadratic structure:
/// `I_j(g)` is `(A g^2 + B g + C) / snl` with `A` the variance of the gained
/// beam's S3 fluctuation, so the vertex is `g* = -B / (2A)`. Returns
/// `(g*, I_j(g*))`.
pub fn optimal_gain_numeric(
    state: &GaussianState,
    beams: &[BrightBeam],
    criterion: Criterion,
) -> Result<(f64, f64), CriteriaError> {
    optimal_gain_numeric_in_mode(state, beams, criterion, FormMode::PaperApprox)
}

pub fn optimal_gain_numeric_in_mode(
    state: &GaussianState,
    beams: &[BrightBeam],
    criterion: Criterion,
    mode: FormMode,
) -> Result<(f64, f64), CriteriaError> {
    checked_snl(beams)?;
    let (_, s3) = combination_indices(criterion, &GainVector::ZERO);
    let gained = criterion.index();
    let n = state.n_modes();
    let gained_form = combination_form(n, &[(&beams[gained], StokesIndex::S3, 1.0)], mode)?;
    let rest_terms: Vec<_> = s3
        .iter()
        .filter(|(b, _)| *b != gained)
        .map(|&(b, _)| (&beams[b], StokesIndex::S3, 1.0))
        .collect();
    let rest_form = combination_form(n, &rest_terms, mode)?;
    let a = state.linear_form_variance(&gained_form)?;
    if a <= 0.0 {
        return Err(CriteriaError::DegenerateQuadratic(a));
    }
    let cov = state.linear_form_covariance(&gained_form, &rest_form)?;
    let g_opt = -cov / a;
    let mut gains = GainVector::ZERO;
    match criterion {
        Criterion::I1 => gains.g1 = g_opt,
        Criterion::I2 => gains.g2 = g_opt,
        Criterion::I3 => gains.g3 = g_opt,
    }
    let result = evaluate_criteria_in_mode(state, beams, gains, mode)?;
    Ok((g_opt, result.values()[criterion.index()]))
}

/// All three optimal gains from the quadratic vertex, plus the criteria
/// evaluated at them.
pub fn optimal_gains_numeric(
    state: &GaussianState,
    beams: &[BrightBeam],
) -> Result<(GainVector, CriteriaResult), CriteriaError> {
    let mut gains = GainVector::ZERO;
    gains.g1 = optimal_gain_numeric(state, beams, Criterion::I1)?.0;
    gains.g2 = optimal_gain_numeric(state, beams, Criterion::I2)?.0;
    gains.g3 = optimal_gain_numeric(state, beams, Criterion::I3)?.0;
    let result = evaluate_criteria(state, beams, gains)?;
    Ok((gains, result))
}

/// Sum of the closed-form criteria at the optimal gains for symmetric
/// squeezing `r` with `r' = 0`; decreasing in `r`.
pub fn symmetric_optimal_sum(r: f64) -> f64 {
    let params = SqueezingTriple::symmetric(r, 0.0);
    let gains = optimal_gains_closed_form(&params);
    closed_form_criteria(&params, gains).iter().sum()
}

/// Bisects `symmetric_optimal_sum(r) = 2` inside `[r_lo, r_hi]`; `None` if
/// the bracket does not straddle the bound.
pub fn genuine_sum_crossing(r_lo: f64, r_hi: f64, tol: f64) -> Option<f64> {
    let f = |r: f64| symmetric_optimal_sum(r) - 2.0;
    let (mut lo, mut hi) = (r_lo, r_hi);
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Some(lo);
    }
    if flo * fhi > 0.0 {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) * flo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{ghz_preset, GhzParams};
    use approx::assert_relative_eq;

    fn compiled_symmetric(r: f64, r_prime: f64) -> (GaussianState, Vec<BrightBeam>) {
        let compiled = ghz_preset(&GhzParams::symmetric(r, r_prime, 1.0, 0.0, 0.0))
            .compile()
            .unwrap();
        (compiled.state, compiled.beams)
    }

    #[test]
    fn coherent_beams_at_zero_gain_sit_exactly_at_one() {
        let (state, beams) = compiled_symmetric(0.0, 0.0);
        let res = evaluate_criteria(&state, &beams, GainVector::ZERO).unwrap();
        for v in res.values() {
            assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        }
        assert!(!res.inseparable);
        assert!(!res.genuine);
        assert_relative_eq!(res.snl, 4.0, epsilon = 1e-15);
    }

    #[test]
    fn coherent_beams_at_unit_gain_give_five_quarters() {
        let (state, beams) = compiled_symmetric(0.0, 0.0);
        let res = evaluate_criteria(&state, &beams, GainVector::uniform(1.0)).unwrap();
        for v in res.values() {
            assert_relative_eq!(v, 1.25, epsilon = 1e-12);
        }
        let closed = closed_form_criteria(&SqueezingTriple::symmetric(0.0, 0.0), GainVector::uniform(1.0));
        for v in closed {
            assert_relative_eq!(v, 1.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn symmetric_squeezing_hits_the_reference_point() {
        let params = SqueezingTriple::symmetric(0.6, 0.0);
        let gains = optimal_gains_closed_form(&params);
        assert_relative_eq!(gains.g1, 0.8698275587866615, epsilon = 1e-12);
        assert_relative_eq!(gains.g2, gains.g1, epsilon = 1e-15);

        let closed = closed_form_criteria(&params, gains);
        for v in closed {
            assert_relative_eq!(v, 0.36669096842926785, epsilon = 1e-12);
        }

        let (state, beams) = compiled_symmetric(0.6, 0.0);
        let res = evaluate_criteria(&state, &beams, gains).unwrap();
        for (a, b) in res.values().iter().zip(closed.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
        assert!(res.inseparable);
        assert!(res.genuine);
        assert_relative_eq!(res.sum, 3.0 * 0.36669096842926785, epsilon = 1e-10);
    }

    #[test]
    fn fixed_gain_closed_form_against_rounded_reference() {
        // The gain value rounded to five digits still lands on the rounded
        // criterion value.
        let params = SqueezingTriple::symmetric(0.6, 0.0);
        let closed = closed_form_criteria(&params, GainVector::uniform(0.86983));
        for v in closed {
            assert_relative_eq!(v, 0.36669, epsilon = 5e-6);
        }
    }

    #[test]
    fn zero_squeezing_gives_zero_gains() {
        let g = optimal_gains_closed_form(&SqueezingTriple::symmetric(0.0, 0.0));
        assert_relative_eq!(g.g1, 0.0);
        assert_relative_eq!(g.g2, 0.0);
        assert_relative_eq!(g.g3, 0.0);

        let (state, beams) = compiled_symmetric(0.0, 0.0);
        for criterion in Criterion::ALL {
            let (g, i_min) = optimal_gain_numeric(&state, &beams, criterion).unwrap();
            assert_relative_eq!(g, 0.0, epsilon = 1e-12);
            assert_relative_eq!(i_min, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn numeric_vertex_matches_closed_form_gains() {
        let (state, beams) = compiled_symmetric(0.6, 0.0);
        let closed = optimal_gains_closed_form(&SqueezingTriple::symmetric(0.6, 0.0));
        for criterion in Criterion::ALL {
            let (g, _) = optimal_gain_numeric(&state, &beams, criterion).unwrap();
            assert_relative_eq!(g, closed.as_array()[criterion.index()], epsilon = 1e-9);
        }
    }

    #[test]
    fn vertex_is_a_minimum_against_probe_gains() {
        let (state, beams) = compiled_symmetric(0.45, 0.1);
        let (g_opt, i_min) = optimal_gain_numeric(&state, &beams, Criterion::I1).unwrap();
        for k in 0..100 {
            let g = -1.0 + 3.0 * (k as f64) / 99.0;
            let res = evaluate_criteria(&state, &beams, GainVector { g1: g, g2: 0.0, g3: 0.0 }).unwrap();
            assert!(res.i1 + 1e-12 >= i_min, "I1({g}) = {} < {}", res.i1, i_min);
        }
        let res = evaluate_criteria(&state, &beams, GainVector { g1: g_opt, g2: 0.0, g3: 0.0 }).unwrap();
        assert_relative_eq!(res.i1, i_min, epsilon = 1e-13);
    }

    #[test]
    fn genuine_bound_cases() {
        let (sum, genuine) = genuine_bound_check(1.0, 1.0, 1.0);
        assert_relative_eq!(sum, 3.0);
        assert!(!genuine);

        let (sum, genuine) = genuine_bound_check(0.42, 0.41, 0.42);
        assert_relative_eq!(sum, 1.25, epsilon = 1e-12);
        assert!(genuine);

        // Each criterion below one, yet not genuine.
        let values = [0.9, 0.9, 0.9];
        let (sum, genuine) = genuine_bound_check(values[0], values[1], values[2]);
        assert!(inseparable_verdict(values));
        assert_relative_eq!(sum, 2.7, epsilon = 1e-12);
        assert!(!genuine);
    }

    #[test]
    fn degenerate_snl_is_rejected() {
        let compiled = ghz_preset(&GhzParams::symmetric(0.0, 0.0, 1.0, 1.0, 0.0))
            .compile()
            .unwrap();
        assert!(matches!(
            evaluate_criteria(&compiled.state, &compiled.beams, GainVector::ZERO),
            Err(CriteriaError::DegenerateSnl)
        ));
    }

    #[test]
    fn crossing_of_the_genuine_bound() {
        let root = genuine_sum_crossing(0.0, 1.5, 1e-9).unwrap();
        assert_relative_eq!(root, 0.26849957964384913, epsilon = 1e-6);
        assert!(symmetric_optimal_sum(root - 1e-3) > 2.0);
        assert!(symmetric_optimal_sum(root + 1e-3) < 2.0);
    }

    #[test]
    fn scale_invariance_of_criteria() {
        for scale in [0.5, 2.0, 7.5] {
            let compiled = ghz_preset(&GhzParams::symmetric(0.6, 0.1, scale, 0.0, 0.0))
                .compile()
                .unwrap();
            let res = evaluate_criteria(
                &compiled.state,
                &compiled.beams,
                GainVector::uniform(0.7),
            )
            .unwrap();
            let reference = {
                let (state, beams) = compiled_symmetric(0.6, 0.1);
                evaluate_criteria(&state, &beams, GainVector::uniform(0.7)).unwrap()
            };
            for (a, b) in res.values().iter().zip(reference.values().iter()) {
                assert_relative_eq!(a, b, epsilon = 1e-12);
            }
        }
    }
}
