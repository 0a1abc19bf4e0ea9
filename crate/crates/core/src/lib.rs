//! Numerical workbench for tripartite polarization entanglement of bright
//! optical beams.
//!
//! The crate models the full chain of a tabletop continuous-variable
//! experiment: impure squeezed sources, a 1:2 / 1:1 beam-splitter network
//! producing a three-mode GHZ-like state, Stokes-operator linearization onto
//! bright two-polarization beams, and the normalized tripartite
//! inseparability criteria with their optimal gains and genuine-entanglement
//! bound. Every closed-form expression is checkable against independent
//! covariance propagation and Monte Carlo sampling.
//!
//! Module map:
//!
//! - [`gaussian`]: multimode Gaussian states, symplectic transforms, loss.
//! - [`circuit`]: a small circuit description language, its compiler, and
//!   the GHZ network preset.
//! - [`polarization`]: Stokes means and linearized fluctuation forms.
//! - [`criteria`]: criterion evaluation, closed forms, optimal gains,
//!   verdicts.
//! - [`fit`]: squeezing-parameter estimation from measured criterion values.
//! - [`mc`]: seeded Monte Carlo oracle for variances and criteria.

pub mod circuit;
pub mod criteria;
pub mod fit;
pub mod gaussian;
pub mod mc;
pub mod polarization;

pub use circuit::{ghz_preset, CircuitSpec, CompiledCircuit, GhzParams};
pub use criteria::{
    evaluate_criteria, genuine_bound_check, optimal_gains_closed_form, CriteriaResult, GainVector,
    SqueezingTriple,
};
pub use gaussian::{GaussianState, ModeId, SqueezeAxis, SqueezerSpec, SymplecticTransform};
pub use polarization::{BrightBeam, FormMode, StokesIndex};
