//! Squeezing-parameter estimation from measured criterion values.
//!
//! Three observed values cannot identify six source parameters, so fits run
//! under declared reduced models only, and the result records which model
//! produced it. The search is a derivative-free simplex over a bounded
//! parameter box, multi-started from a fixed grid for determinism.

use thiserror::Error;

use crate::criteria::{closed_form_criteria, optimal_gains_closed_form, GainVector, SqueezingTriple};

/// Parameter box for squeezing parameters.
pub const R_BOUNDS: (f64, f64) = (0.0, 2.0);
/// Parameter box for excess-noise factors.
pub const R_PRIME_BOUNDS: (f64, f64) = (0.0, 2.0);
/// Parameter box for the detection efficiency.
pub const ETA_BOUNDS: (f64, f64) = (1e-6, 1.0);
/// The simplex stops once its diameter falls below this.
pub const SIMPLEX_DIAMETER_TOL: f64 = 1e-8;
/// Hard cap on objective evaluations per start.
pub const MAX_EVALUATIONS: usize = 10_000;
/// A fit counts as converged when the best RMS residual is at most this.
pub const CONVERGENCE_RMS: f64 = 0.02;
/// Fractions of the box diagonal used as multi-start points.
const START_FRACTIONS: [f64; 5] = [0.05, 0.275, 0.5, 0.725, 0.95];

#[derive(Debug, Error)]
pub enum FitError {
    #[error("target criterion values must lie in (0, 4), got {0}")]
    TargetOutOfRange(f64),
    #[error("target uncertainties must be positive, got {0}")]
    NonpositiveUncertainty(f64),
    #[error("fixed-gain policy needs finite gains")]
    InvalidGains,
}

/// Reduced forward models for the inverse problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// One `(r, r')` shared by all three sources.
    Symmetric,
    /// `(r1, r1')` for source 1 and a shared `(r23, r23')` for sources 2, 3.
    TwoGroup,
    /// Symmetric squeezing plus a shared detection efficiency `eta`; each
    /// criterion relaxes toward its vacuum level as `eta` drops:
    /// `I_j(eta) = eta I_j + (1 - eta) (4 + g_j^2) / 4`.
    WithLoss,
}

impl FitModel {

    fn bounds(self) -> Vec<(f64, f64)> {
        match self {
            FitModel::Symmetric => vec![R_BOUNDS, R_PRIME_BOUNDS],
            FitModel::TwoGroup => vec![R_BOUNDS, R_PRIME_BOUNDS, R_BOUNDS, R_PRIME_BOUNDS],
            FitModel::WithLoss => vec![R_BOUNDS, R_PRIME_BOUNDS, ETA_BOUNDS],
        }
    }

    fn unpack(self, x: &[f64]) -> (SqueezingTriple, Option<f64>) {
        match self {
            FitModel::Symmetric => (SqueezingTriple::symmetric(x[0], x[1]), None),
            FitModel::TwoGroup => (
                SqueezingTriple::new([x[0], x[2], x[2]], [x[1], x[3], x[3]]),
                None,
            ),
            FitModel::WithLoss => (SqueezingTriple::symmetric(x[0], x[1]), Some(x[2])),
        }
    }
}

/// How gains are chosen while fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainPolicy {
    /// Re-optimize gains at every candidate parameter set.
    Optimal,
    /// Hold the given gains fixed.
    Fixed(GainVector),
}

/// Measured criterion values, optionally with one-sigma uncertainties used
/// as inverse-variance weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitTargets {
    pub values: [f64; 3],
    pub uncertainties: Option<[f64; 3]>,
}

impl FitTargets {
    pub fn new(values: [f64; 3]) -> Self {
        Self { values, uncertainties: None }
    }

    pub fn with_uncertainties(values: [f64; 3], uncertainties: [f64; 3]) -> Self {
        Self { values, uncertainties: Some(uncertainties) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    pub params: SqueezingTriple,
    pub eta: Option<f64>,
    pub gains: GainVector,
    pub predicted: [f64; 3],
    /// Root-mean-square error over the three criterion values, unweighted.
    pub residual_rms: f64,
    /// Total objective evaluations across all starts.
    pub evaluations: usize,
    pub converged: bool,
}

/// Forward model: criterion values and gains for one parameter point.
pub fn forward_model(
    model: FitModel,
    params: &SqueezingTriple,
    eta: Option<f64>,
    policy: GainPolicy,
) -> ([f64; 3], GainVector) {
    let gains = match policy {
        GainPolicy::Optimal => optimal_gains_closed_form(params),
        GainPolicy::Fixed(g) => g,
    };
    let mut values = closed_form_criteria(params, gains);
    if model == FitModel::WithLoss {
        let eta = eta.unwrap_or(1.0);
        let g = gains.as_array();
        for (v, gj) in values.iter_mut().zip(g.iter()) {
            *v = eta * *v + (1.0 - eta) * (4.0 + gj * gj) / 4.0;
        }
    }
    (values, gains)
}

/// Fits model parameters to target criterion values by weighted least
/// squares. Non-convergence (no model point within [`CONVERGENCE_RMS`] of
/// the targets) is reported through `converged`, not as an error.
pub fn fit_parameters(
    targets: &FitTargets,
    model: FitModel,
    policy: GainPolicy,
) -> Result<FitResult, FitError> {
    for v in targets.values {
        if !v.is_finite() || v <= 0.0 || v >= 4.0 {
            return Err(FitError::TargetOutOfRange(v));
        }
    }
    let weights = match targets.uncertainties {
        Some(sigmas) => {
            for s in sigmas {
                if !s.is_finite() || s <= 0.0 {
                    return Err(FitError::NonpositiveUncertainty(s));
                }
            }
            sigmas.map(|s| 1.0 / (s * s))
        }
        None => [1.0; 3],
    };
    if let GainPolicy::Fixed(g) = policy {
        if !g.g1.is_finite() || !g.g2.is_finite() || !g.g3.is_finite() {
            return Err(FitError::InvalidGains);
        }
    }

    let bounds = model.bounds();
    let objective = |x: &[f64]| -> f64 {
        let (params, eta) = model.unpack(x);
        let (values, _) = forward_model(model, &params, eta, policy);
        values
            .iter()
            .zip(targets.values.iter())
            .zip(weights.iter())
            .map(|((m, t), w)| w * (m - t) * (m - t))
            .sum()
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut evaluations = 0;
    for frac in START_FRACTIONS {
        let start: Vec<f64> =
            bounds.iter().map(|(lo, hi)| lo + frac * (hi - lo)).collect();
        let (x, value, evals) = nelder_mead(&objective, &start, &bounds);
        evaluations += evals;
        let better = match &best {
            None => true,
            Some((bv, _)) => value < *bv,
        };
        if better {
            best = Some((value, x));
        }
    }

    let (_, x) = best.expect("at least one start ran");
    let (params, eta) = model.unpack(&x);
    let (predicted, gains) = forward_model(model, &params, eta, policy);
    let residual_rms = (predicted
        .iter()
        .zip(targets.values.iter())
        .map(|(m, t)| (m - t) * (m - t))
        .sum::<f64>()
        / 3.0)
        .sqrt();
    Ok(FitResult {
        model,
        params,
        eta,
        gains,
        predicted,
        residual_rms,
        evaluations,
        converged: residual_rms <= CONVERGENCE_RMS,
    })
}

fn clamp_to(bounds: &[(f64, f64)], x: &mut [f64]) {
    for (v, (lo, hi)) in x.iter_mut().zip(bounds.iter()) {
        *v = v.clamp(*lo, *hi);
    }
}

/// Standard Nelder-Mead with projection onto the box, returning
/// `(best point, best value, evaluations)`.
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    start: &[f64],
    bounds: &[(f64, f64)],
) -> (Vec<f64>, f64, usize) {
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let dim = start.len();
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &mut Vec<f64>| -> f64 {
        clamp_to(bounds, x);
        evals.set(evals.get() + 1);
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let mut first = start.to_vec();
    let v = eval(&mut first);
    simplex.push((first, v));
    for k in 0..dim {
        let mut point = start.to_vec();
        let span = bounds[k].1 - bounds[k].0;
        point[k] += 0.1 * span;
        let v = eval(&mut point);
        simplex.push((point, v));
    }

    loop {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("objective is finite"));
        let diameter = simplex[1..]
            .iter()
            .map(|(p, _)| {
                p.iter()
                    .zip(simplex[0].0.iter())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        if diameter < SIMPLEX_DIAMETER_TOL || evals.get() >= MAX_EVALUATIONS {
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(p, _)| p[k]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let mut reflected: Vec<f64> = centroid
            .iter()
            .zip(worst.0.iter())
            .map(|(c, w)| c + ALPHA * (c - w))
            .collect();
        let fr = eval(&mut reflected);

        if fr < simplex[0].1 {
            let mut expanded: Vec<f64> = centroid
                .iter()
                .zip(worst.0.iter())
                .map(|(c, w)| c + GAMMA * ALPHA * (c - w))
                .collect();
            let fe = eval(&mut expanded);
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
        } else {
            let (base, fb) = if fr < worst.1 { (&reflected, fr) } else { (&worst.0, worst.1) };
            let mut contracted: Vec<f64> = centroid
                .iter()
                .zip(base.iter())
                .map(|(c, w)| c + RHO * (w - c))
                .collect();
            let fc = eval(&mut contracted);
            if fc < fb {
                simplex[dim] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let mut shrunk: Vec<f64> = best
                        .iter()
                        .zip(entry.0.iter())
                        .map(|(b, p)| b + SIGMA * (p - b))
                        .collect();
                    let fv = eval(&mut shrunk);
                    *entry = (shrunk, fv);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("objective is finite"));
    let (x, v) = simplex.swap_remove(0);
    (x, v, evals.get())
}
