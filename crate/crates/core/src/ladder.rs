//! Truncated ladder operators and the rotating-frame Hamiltonian of a driven
//! Kerr (transmon-like) emitter.
//!
//! Basis ordering is fixed: index 0 = |g⟩, 1 = |e⟩, 2 = |f⟩, 3 = |h⟩.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

pub const MIN_LEVELS: usize = 2;
pub const MAX_LEVELS: usize = 4;

/// Physical configuration of the driven emitter. All frequencies are angular
/// (rad/s); `delta` is the drive detuning from the two-photon transition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderParams {
    pub n_levels: usize,
    pub alpha: f64,
    pub delta: f64,
    pub omega: f64,
    pub gamma: f64,
}

impl LadderParams {
    pub fn new(n_levels: usize, alpha: f64, delta: f64, omega: f64, gamma: f64) -> Result<Self> {
        let p = Self {
            n_levels,
            alpha,
            delta,
            omega,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_LEVELS..=MAX_LEVELS).contains(&self.n_levels) {
            return Err(Error::InvalidParams(format!(
                "n_levels must be 2, 3 or 4 (got {})",
                self.n_levels
            )));
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("delta", self.delta),
            ("omega", self.omega),
            ("gamma", self.gamma),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "gamma must be > 0 (got {})",
                self.gamma
            )));
        }
        if self.omega < 0.0 {
            return Err(Error::InvalidParams(format!(
                "omega must be >= 0 (got {})",
                self.omega
            )));
        }
        Ok(())
    }

    /// Soft diagnostics that do not prevent a run.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.alpha >= 0.0 {
            out.push(format!(
                "alpha = {} rad/s is not negative; transmon-like emitters have alpha < 0",
                self.alpha
            ));
        }
        out
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    /// Drive strength relative to the anharmonicity, Ω/|α|.
    pub fn epsilon(&self) -> f64 {
        self.omega / self.alpha.abs()
    }
}

/// Truncated annihilation operator with `⟨k-1|b|k⟩ = √k`.
pub fn lowering_operator(n_levels: usize) -> Result<ComplexMatrix> {
    if n_levels < MIN_LEVELS {
        return Err(Error::InvalidDimension(n_levels));
    }
    let mut b = ComplexMatrix::zeros(n_levels, n_levels);
    for k in 1..n_levels {
        b[(k - 1, k)] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    Ok(b)
}

pub fn number_operator(n_levels: usize) -> Result<ComplexMatrix> {
    let b = lowering_operator(n_levels)?;
    Ok(b.adjoint() * b)
}

/// H = −(δ+α/2) b†b + (α/2) b†b†bb + i(Ω/2)(b − b†), in a frame rotating at
/// the drive frequency.
pub fn hamiltonian(params: &LadderParams) -> Result<ComplexMatrix> {
    params.validate()?;
    let b = lowering_operator(params.n_levels)?;
    let bd = b.adjoint();
    let num = &bd * &b;
    let kerr = &bd * &bd * &b * &b;
    let drive = (&b - &bd) * Complex64::new(0.0, params.omega / 2.0);
    Ok(num * Complex64::from(-(params.delta + params.alpha / 2.0))
        + kerr * Complex64::from(params.alpha / 2.0)
        + drive)
}

/// Output field b_out = √Γ b.
pub fn output_field(params: &LadderParams) -> Result<ComplexMatrix> {
    params.validate()?;
    Ok(lowering_operator(params.n_levels)? * Complex64::from(params.gamma.sqrt()))
}

/// Largest |M − M†| entry.
pub fn hermiticity_deviation(m: &ComplexMatrix) -> f64 {
    (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn check_square(m: &ComplexMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::ShapeMismatch {
            expected: dim,
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}
