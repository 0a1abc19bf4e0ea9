//! Multimode Gaussian optical states in the quadrature representation.
//!
//! A state over `n` modes is a mean vector of length `2n` and a real
//! symmetric covariance matrix of size `2n x 2n`, ordered mode by mode as
//! `(X+_1, X-_1, X+_2, X-_2, ...)` with the convention `X+ = (a + a†)/2`,
//! `X- = (a - a†)/(2i)`, so the vacuum variance of each quadrature is 1/4.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Variance of each vacuum quadrature in the chosen convention.
pub const VACUUM_VARIANCE: f64 = 0.25;
/// Maximum tolerated asymmetry of a covariance matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Covariance eigenvalues in `[-PSD_TOL, 0)` are treated as zero.
pub const PSD_TOL: f64 = 1e-10;
/// Slack on the per-mode uncertainty product `var(X+) * var(X-) >= 1/16`.
pub const UNCERTAINTY_TOL: f64 = 1e-12;
/// Maximum tolerated deviation from the symplectic identity.
pub const SYMPLECTIC_TOL: f64 = 1e-12;

/// Index of one optical mode within a multimode state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId(pub usize);

impl ModeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which quadrature of the source output is squeezed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqueezeAxis {
    /// `X+` squeezed, `X-` antisqueezed.
    Amplitude,
    /// `X-` squeezed, `X+` antisqueezed.
    Phase,
}

/// Output noise model of a squeezed-light source: the squeezed quadrature
/// variance is `e^{-2r}/4` and the antisqueezed one is `e^{2(r+r')}/4`,
/// where `r'` accounts for excess noise above the minimum-uncertainty level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezerSpec {
    pub r: f64,
    pub r_prime: f64,
    pub axis: SqueezeAxis,
}

impl SqueezerSpec {
    pub fn new(r: f64, r_prime: f64, axis: SqueezeAxis) -> Result<Self, StateError> {
        if !r.is_finite() || r < 0.0 {
            return Err(StateError::InvalidArgument(format!(
                "squeezing parameter r must be finite and nonnegative, got {r}"
            )));
        }
        if !r_prime.is_finite() || r_prime < 0.0 {
            return Err(StateError::InvalidArgument(format!(
                "excess-noise factor r' must be finite and nonnegative, got {r_prime}"
            )));
        }
        Ok(Self { r, r_prime, axis })
    }

    pub fn vacuum(axis: SqueezeAxis) -> Self {
        Self { r: 0.0, r_prime: 0.0, axis }
    }

    pub fn squeezed_variance(&self) -> f64 {
        (-2.0 * self.r).exp() * VACUUM_VARIANCE
    }

    pub fn antisqueezed_variance(&self) -> f64 {
        (2.0 * (self.r + self.r_prime)).exp() * VACUUM_VARIANCE
    }
}

#[derive(Debug, Error)]
pub enum StateError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("mode index {mode} out of range for {n_modes} modes")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("mode {0} is correlated with other modes; squeezed sources replace uncorrelated modes only")]
    CorrelatedMode(usize),
    #[error("covariance is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
    #[error("matrix is not symplectic (max deviation {max_deviation:.3e})")]
    NotSymplectic { max_deviation: f64 },
}

/// A linear transform of the quadrature vector preserving the canonical
/// commutation structure: `S J S^T = J` with `J` block diagonal in
/// `[[0, 1], [-1, 0]]` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    matrix: DMatrix<f64>,
}

impl SymplecticTransform {
    pub fn identity(n_modes: usize) -> Self {
        Self { matrix: DMatrix::identity(2 * n_modes, 2 * n_modes) }
    }

    /// Wraps a raw matrix, rejecting anything that violates the symplectic
    /// identity beyond [`SYMPLECTIC_TOL`].
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self, StateError> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() % 2 != 0 {
            return Err(StateError::InvalidArgument(format!(
                "symplectic matrix must be square with even dimension, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = symplectic_deviation(&matrix);
        if dev > SYMPLECTIC_TOL {
            return Err(StateError::NotSymplectic { max_deviation: dev });
        }
        Ok(Self { matrix })
    }

    /// Beam splitter mixing modes `m1` and `m2` with reflectivity `R` and a
    /// relative phase on the reflected amplitude. At `phase = 0` the action
    /// on annihilation operators is
    /// `out1 = sqrt(T) in1 + sqrt(R) in2`, `out2 = sqrt(R) in1 - sqrt(T) in2`
    /// with `T = 1 - R`, which is orthogonal on the quadratures.
    pub fn beamsplitter(
        n_modes: usize,
        m1: ModeId,
        m2: ModeId,
        reflectivity: f64,
        phase: f64,
    ) -> Result<Self, StateError> {
        check_mode(m1, n_modes)?;
        check_mode(m2, n_modes)?;
        if m1 == m2 {
            return Err(StateError::InvalidArgument(format!(
                "beam splitter needs two distinct modes, got {m1} and {m1}"
            )));
        }
        if !(0.0..=1.0).contains(&reflectivity) {
            return Err(StateError::InvalidArgument(format!(
                "reflectivity must lie in [0, 1], got {reflectivity}"
            )));
        }
        if !phase.is_finite() {
            return Err(StateError::InvalidArgument(format!("phase must be finite, got {phase}")));
        }
        let t = (1.0 - reflectivity).sqrt();
        let r = reflectivity.sqrt();
        let (c, s) = (phase.cos(), phase.sin());
        let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
        let (i, j) = (2 * m1.index(), 2 * m2.index());
        // Complex amplitude u acts on a quadrature pair as [[Re u, -Im u], [Im u, Re u]].
        m[(i, i)] = t;
        m[(i + 1, i + 1)] = t;
        m[(i, j)] = r * c;
        m[(i, j + 1)] = -r * s;
        m[(i + 1, j)] = r * s;
        m[(i + 1, j + 1)] = r * c;
        m[(j, i)] = r * c;
        m[(j, i + 1)] = r * s;
        m[(j + 1, i)] = -r * s;
        m[(j + 1, i + 1)] = r * c;
        m[(j, j)] = -t;
        m[(j + 1, j + 1)] = -t;
        Self::from_matrix(m)
    }

    /// Phase shift `a -> a e^{i phi}` on one mode.
    pub fn phase_shift(n_modes: usize, mode: ModeId, phi: f64) -> Result<Self, StateError> {
        check_mode(mode, n_modes)?;
        if !phi.is_finite() {
            return Err(StateError::InvalidArgument(format!("phase must be finite, got {phi}")));
        }
        let (c, s) = (phi.cos(), phi.sin());
        let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
        let i = 2 * mode.index();
        m[(i, i)] = c;
        m[(i, i + 1)] = -s;
        m[(i + 1, i)] = s;
        m[(i + 1, i + 1)] = c;
        Self::from_matrix(m)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// Composition applying `self` first and `later` second.
    pub fn then(&self, later: &SymplecticTransform) -> Result<Self, StateError> {
        if later.matrix.ncols() != self.matrix.nrows() {
            return Err(StateError::DimensionMismatch {
                expected: later.matrix.ncols(),
                actual: self.matrix.nrows(),
            });
        }
        Self::from_matrix(&later.matrix * &self.matrix)
    }

    pub fn symplectic_deviation(&self) -> f64 {
        symplectic_deviation(&self.matrix)
    }
}

fn check_mode(mode: ModeId, n_modes: usize) -> Result<(), StateError> {
    if mode.index() >= n_modes {
        Err(StateError::ModeOutOfRange { mode: mode.index(), n_modes })
    } else {
        Ok(())
    }
}

/// Max absolute entry of `S J S^T - J`.
fn symplectic_deviation(m: &DMatrix<f64>) -> f64 {
    let dim = m.nrows();
    let mut j = DMatrix::zeros(dim, dim);
    for k in 0..dim / 2 {
        j[(2 * k, 2 * k + 1)] = 1.0;
        j[(2 * k + 1, 2 * k)] = -1.0;
    }
    let res = m * &j * m.transpose() - &j;
    res.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Gaussian state over `n` optical modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Vacuum in all modes: zero mean, covariance `I/4`.
    pub fn vacuum(n_modes: usize) -> Result<Self, StateError> {
        if n_modes == 0 {
            return Err(StateError::InvalidArgument(
                "a state needs at least one mode".to_string(),
            ));
        }
        Ok(Self {
            n_modes,
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes) * VACUUM_VARIANCE,
        })
    }

    /// Builds a state from raw parts, symmetrizing the covariance.
    pub fn from_parts(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self, StateError> {
        if cov.nrows() != cov.ncols() || cov.nrows() % 2 != 0 || cov.nrows() == 0 {
            return Err(StateError::InvalidArgument(format!(
                "covariance must be square with positive even dimension, got {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.len() != cov.nrows() {
            return Err(StateError::DimensionMismatch { expected: cov.nrows(), actual: mean.len() });
        }
        let n_modes = cov.nrows() / 2;
        let mut state = Self { n_modes, mean, cov };
        state.symmetrize();
        Ok(state)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// `(var X+, cov(X+, X-), var X-)` of one mode.
    pub fn mode_block(&self, mode: ModeId) -> Result<(f64, f64, f64), StateError> {
        check_mode(mode, self.n_modes)?;
        let i = 2 * mode.index();
        Ok((self.cov[(i, i)], self.cov[(i, i + 1)], self.cov[(i + 1, i + 1)]))
    }

    /// Replaces one uncorrelated mode by the output of a squeezed-light
    /// source. The mode's 2x2 covariance block becomes
    /// `diag(e^{-2r}, e^{2(r+r')})/4` for the amplitude axis and the swapped
    /// diagonal for the phase axis; the mean is left unchanged.
    ///
    /// Sources with `r' > 0` produce impure blocks, so this is a state
    /// constructor rather than a symplectic channel.
    pub fn with_dopa_output(&self, mode: ModeId, spec: &SqueezerSpec) -> Result<Self, StateError> {
        check_mode(mode, self.n_modes)?;
        SqueezerSpec::new(spec.r, spec.r_prime, spec.axis)?;
        let i = 2 * mode.index();
        for row in [i, i + 1] {
            for col in 0..self.dim() {
                if col != i && col != i + 1 && self.cov[(row, col)].abs() > SYMMETRY_TOL {
                    return Err(StateError::CorrelatedMode(mode.index()));
                }
            }
        }
        let (sq, anti) = (spec.squeezed_variance(), spec.antisqueezed_variance());
        let (vp, vm) = match spec.axis {
            SqueezeAxis::Amplitude => (sq, anti),
            SqueezeAxis::Phase => (anti, sq),
        };
        let mut out = self.clone();
        out.cov[(i, i)] = vp;
        out.cov[(i + 1, i + 1)] = vm;
        out.cov[(i, i + 1)] = 0.0;
        out.cov[(i + 1, i)] = 0.0;
        out.symmetrize();
        Ok(out)
    }

    /// Pure-loss channel with transmission `eta` on one mode: the mode block
    /// becomes `eta * block + (1 - eta) * I/4`, cross covariances scale by
    /// `sqrt(eta)` and so do the mode's mean components.
    pub fn with_loss(&self, mode: ModeId, eta: f64) -> Result<Self, StateError> {
        check_mode(mode, self.n_modes)?;
        if !(0.0..=1.0).contains(&eta) {
            return Err(StateError::InvalidArgument(format!(
                "transmission must lie in [0, 1], got {eta}"
            )));
        }
        let i = 2 * mode.index();
        let root = eta.sqrt();
        let mut out = self.clone();
        for row in [i, i + 1] {
            for col in 0..self.dim() {
                if col == i || col == i + 1 {
                    continue;
                }
                out.cov[(row, col)] *= root;
                out.cov[(col, row)] *= root;
            }
        }
        for (a, b) in [(i, i), (i, i + 1), (i + 1, i), (i + 1, i + 1)] {
            out.cov[(a, b)] = eta * self.cov[(a, b)]
                + if a == b { (1.0 - eta) * VACUUM_VARIANCE } else { 0.0 };
        }
        out.mean[i] *= root;
        out.mean[i + 1] *= root;
        out.symmetrize();
        Ok(out)
    }

    /// Applies a symplectic transform: `mean -> S mean`, `cov -> S cov S^T`.
    pub fn transformed(&self, s: &SymplecticTransform) -> Result<Self, StateError> {
        if s.matrix.ncols() != self.dim() {
            return Err(StateError::DimensionMismatch {
                expected: self.dim(),
                actual: s.matrix.ncols(),
            });
        }
        let mut out = Self {
            n_modes: self.n_modes,
            mean: &s.matrix * &self.mean,
            cov: &s.matrix * &self.cov * s.matrix.transpose(),
        };
        out.symmetrize();
        Ok(out)
    }

    /// Appends fresh vacuum modes, leaving existing modes untouched.
    pub fn with_appended_vacuum(&self, extra_modes: usize) -> Self {
        if extra_modes == 0 {
            return self.clone();
        }
        let n = self.n_modes + extra_modes;
        let mut mean = DVector::zeros(2 * n);
        let mut cov = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..self.dim() {
            mean[i] = self.mean[i];
            for j in 0..self.dim() {
                cov[(i, j)] = self.cov[(i, j)];
            }
        }
        for i in self.dim()..2 * n {
            cov[(i, i)] = VACUUM_VARIANCE;
        }
        Self { n_modes: n, mean, cov }
    }

    /// Variance of the scalar `c . dq`, i.e. `c^T cov c`, clamped at zero.
    pub fn linear_form_variance(&self, form: &[f64]) -> Result<f64, StateError> {
        if form.len() != self.dim() {
            return Err(StateError::DimensionMismatch { expected: self.dim(), actual: form.len() });
        }
        let c = DVector::from_column_slice(form);
        let v = (c.transpose() * &self.cov * &c)[(0, 0)];
        Ok(v.max(0.0))
    }

    /// Covariance of two linear forms, `a^T cov b`.
    pub fn linear_form_covariance(&self, a: &[f64], b: &[f64]) -> Result<f64, StateError> {
        if a.len() != self.dim() {
            return Err(StateError::DimensionMismatch { expected: self.dim(), actual: a.len() });
        }
        if b.len() != self.dim() {
            return Err(StateError::DimensionMismatch { expected: self.dim(), actual: b.len() });
        }
        let va = DVector::from_column_slice(a);
        let vb = DVector::from_column_slice(b);
        Ok((va.transpose() * &self.cov * &vb)[(0, 0)])
    }

    pub fn min_cov_eigenvalue(&self) -> f64 {
        self.cov
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |acc, v| acc.min(*v))
    }

    /// Checks symmetry, positive semidefiniteness and the per-mode
    /// uncertainty product against the module tolerances.
    pub fn validate(&self) -> Result<(), StateError> {
        let mut max_asym = 0.0f64;
        for i in 0..self.dim() {
            for j in (i + 1)..self.dim() {
                max_asym = max_asym.max((self.cov[(i, j)] - self.cov[(j, i)]).abs());
            }
        }
        if max_asym > SYMMETRY_TOL {
            return Err(StateError::InvalidArgument(format!(
                "covariance asymmetry {max_asym:.3e} exceeds tolerance"
            )));
        }
        let min_eig = self.min_cov_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(StateError::NotPositiveSemidefinite { min_eigenvalue: min_eig });
        }
        for m in 0..self.n_modes {
            let (vp, _, vm) = self.mode_block(ModeId(m))?;
            if vp * vm < 1.0 / 16.0 - UNCERTAINTY_TOL {
                return Err(StateError::InvalidArgument(format!(
                    "mode {m} violates the uncertainty product: {:.6e} < 1/16",
                    vp * vm
                )));
            }
        }
        Ok(())
    }

    fn symmetrize(&mut self) {
        for i in 0..self.dim() {
            for j in (i + 1)..self.dim() {
                let v = 0.5 * (self.cov[(i, j)] + self.cov[(j, i)]);
                self.cov[(i, j)] = v;
                self.cov[(j, i)] = v;
            }
        }
    }
}
