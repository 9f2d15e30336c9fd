//! A driven, damped ladder with its steady state cached.

use num_complex::Complex64;

use crate::correlations::{
    correlation_g1, correlation_g2, fluctuation_operator, g2_zero, power_spectrum_windowed,
    CorrelationTrace, Normalization, Spectrum, Window,
};
use crate::dressed::{
    decompose, default_grouping_tolerance, diagonalize, DressedBasis, Line, LineDecomposition,
};
use crate::error::{Error, Result};
use crate::ladder::{hamiltonian, lowering_operator, ComplexMatrix, LadderParams};
use crate::lindblad::{liouvillian_matrix, steady_state, DensityMatrix, Superoperator};

#[derive(Clone, Debug)]
pub struct Emitter {
    params: LadderParams,
    hamiltonian: ComplexMatrix,
    lowering: ComplexMatrix,
    liouvillian: Superoperator,
    steady: DensityMatrix,
}

impl Emitter {
    pub fn new(params: LadderParams) -> Result<Self> {
        let h = hamiltonian(&params)?;
        let b = lowering_operator(params.n_levels)?;
        let l = liouvillian_matrix(&h, &[(params.gamma, b.clone())])?;
        let steady = steady_state(&l)?;
        Ok(Self {
            params,
            hamiltonian: h,
            lowering: b,
            liouvillian: l,
            steady,
        })
    }

    pub fn params(&self) -> &LadderParams {
        &self.params
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn lowering(&self) -> &ComplexMatrix {
        &self.lowering
    }

    pub fn liouvillian(&self) -> &Superoperator {
        &self.liouvillian
    }

    pub fn steady_state(&self) -> &DensityMatrix {
        &self.steady
    }

    pub fn dressed(&self) -> Result<DressedBasis> {
        diagonalize(&self.hamiltonian)
    }

    pub fn lines(&self) -> Result<LineDecomposition> {
        let alpha = self.params.alpha;
        decompose(
            &self.lowering,
            &self.dressed()?,
            alpha,
            default_grouping_tolerance(alpha),
        )
    }

    /// √Γ times the lowering operator, or the line-resolved part of it.
    pub fn field(&self, line: Line) -> Result<ComplexMatrix> {
        let op = match line {
            Line::Full => self.lowering.clone(),
            _ => {
                if self.params.n_levels != 3 {
                    return Err(Error::DecompositionLevels(self.params.n_levels));
                }
                let lines = self.lines()?;
                lines.get(line).expect("secular line").bare.clone()
            }
        };
        Ok(op * Complex64::from(self.params.gamma.sqrt()))
    }

    /// Photon flux ⟨F†F⟩ of one line, in photons per second.
    pub fn flux(&self, line: Line) -> Result<f64> {
        let f = self.field(line)?;
        Ok(self.steady.expectation(&(f.adjoint() * &f)).re)
    }

    pub fn g2_zero(&self, line: Line) -> Result<f64> {
        g2_zero(&self.steady, &self.field(line)?)
    }

    /// First-order correlation of the fluctuations δF = F − ⟨F⟩.
    pub fn g1_inelastic(
        &self,
        line: Line,
        delays: &[f64],
    ) -> Result<(CorrelationTrace, Complex64)> {
        let (df, mean) = fluctuation_operator(&self.field(line)?, &self.steady);
        Ok((
            correlation_g1(&self.liouvillian, &self.steady, &df, delays)?,
            mean,
        ))
    }

    pub fn g2(
        &self,
        line: Line,
        delays: &[f64],
        normalization: Normalization,
    ) -> Result<CorrelationTrace> {
        correlation_g2(
            &self.liouvillian,
            &self.steady,
            &self.field(line)?,
            delays,
            normalization,
        )
    }

    /// Inelastic spectrum of one line.
    pub fn spectrum(&self, line: Line, delays: &[f64], window: Window) -> Result<Spectrum> {
        let (g1, mean) = self.g1_inelastic(line, delays)?;
        power_spectrum_windowed(&g1, mean, window)
    }
}
