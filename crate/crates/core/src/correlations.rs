//! First/second-order correlation functions via the quantum regression theorem
//! and inelastic emission spectra via Fourier transform of g1.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ladder::{max_abs, ComplexMatrix};
use crate::lindblad::{
    expectation, propagator, unvectorize, vectorize, DensityMatrix, Superoperator,
};

pub const DEFAULT_TAU_MAX_OVER_GAMMA: f64 = 20.0;
pub const DEFAULT_DELAY_POINTS: usize = 4096;
/// Stationarity tolerance relative to ‖L‖_F.
pub const STALE_TOL: f64 = 1e-9;
/// Relative threshold on ⟨F†F⟩ / ‖F†F‖ below which g2 cannot be normalized.
pub const DEGENERATE_FLUX_TOL: f64 = 1e-14;
const GRID_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelationKind {
    G1,
    G2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    Raw,
    Normalized,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    None,
    Hann,
}

/// Correlation function sampled on a delay grid (seconds).
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTrace {
    pub kind: CorrelationKind,
    pub delays: Vec<f64>,
    pub values: Vec<Complex64>,
    pub normalization: Normalization,
    /// Tr[F ρ_st] of the operator the trace was computed from.
    pub field_mean: Complex64,
}

impl CorrelationTrace {
    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn max_imaginary(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Grid spacing if the delays are uniform.
    pub fn uniform_step(&self) -> Result<f64> {
        uniform_step(&self.delays)
    }
}

/// Uniform grid `0, τ_max/(n−1), …, τ_max`.
pub fn uniform_delays(tau_max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !tau_max.is_finite() || tau_max <= 0.0 {
        return Err(Error::Grid(format!(
            "need tau_max > 0 and at least 2 points (got {tau_max}, {points})"
        )));
    }
    let step = tau_max / (points - 1) as f64;
    Ok((0..points).map(|k| k as f64 * step).collect())
}

pub fn uniform_step(delays: &[f64]) -> Result<f64> {
    if delays.len() < 2 {
        return Err(Error::Grid("fewer than 2 delays".into()));
    }
    let step = (delays[delays.len() - 1] - delays[0]) / (delays.len() - 1) as f64;
    if step.is_nan() || step <= 0.0 {
        return Err(Error::Grid("delays are not increasing".into()));
    }
    for (k, w) in delays.windows(2).enumerate() {
        if ((w[1] - w[0]) - step).abs() > GRID_TOL * step {
            return Err(Error::Grid(format!("non-uniform spacing at index {k}")));
        }
    }
    Ok(step)
}

fn check_delays(delays: &[f64]) -> Result<()> {
    if delays.is_empty() {
        return Err(Error::Grid("empty delay grid".into()));
    }
    if delays[0].is_nan() || delays[0] < 0.0 {
        return Err(Error::Grid("negative delay".into()));
    }
    if delays
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::Grid("delays must be strictly increasing".into()));
    }
    Ok(())
}

pub fn check_stationary(l: &Superoperator, rho: &DensityMatrix) -> Result<()> {
    let residual = l.residual(rho.matrix());
    if residual > STALE_TOL * l.frobenius_norm() {
        return Err(Error::StaleState { residual });
    }
    Ok(())
}

/// δF = F − ⟨F⟩ 1 together with ⟨F⟩.
pub fn fluctuation_operator(f: &ComplexMatrix, rho: &DensityMatrix) -> (ComplexMatrix, Complex64) {
    let mean = rho.expectation(f);
    let n = f.nrows();
    (f - ComplexMatrix::identity(n, n) * mean, mean)
}

/// Tr[obs · e^{Lτ}(x)] for each delay τ, stepping with cached propagators.
fn regression_series(
    l: &Superoperator,
    x: &ComplexMatrix,
    observable: &ComplexMatrix,
    delays: &[f64],
) -> Result<Vec<Complex64>> {
    check_delays(delays)?;
    let dim = l.dim();
    let mut step: Option<(f64, DMatrix<Complex64>)> = None;
    let mut v = vectorize(x);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(delays.len());
    for &tau in delays {
        let dt = tau - t;
        if dt > 0.0 {
            // uniform grids reuse one propagator despite round-off in the delays
            let reuse = matches!(&step, Some((h, _)) if (h - dt).abs() <= 1e-12 * dt);
            if !reuse {
                step = Some((dt, propagator(l, dt)?));
            }
            v = &step.as_ref().unwrap().1 * v;
        }
        t = tau;
        out.push(expectation(observable, &unvectorize(&v, dim)));
    }
    Ok(out)
}

/// g1(τ) = Tr[F† e^{Lτ}(F ρ_st)].
pub fn correlation_g1(
    l: &Superoperator,
    rho_st: &DensityMatrix,
    f: &ComplexMatrix,
    delays: &[f64],
) -> Result<CorrelationTrace> {
    check_stationary(l, rho_st)?;
    let x = f * rho_st.matrix();
    let values = regression_series(l, &x, &f.adjoint(), delays)?;
    Ok(CorrelationTrace {
        kind: CorrelationKind::G1,
        delays: delays.to_vec(),
        values,
        normalization: Normalization::Raw,
        field_mean: rho_st.expectation(f),
    })
}

/// g2(τ) = Tr[F†F e^{Lτ}(F ρ_st F†)], optionally divided by ⟨F†F⟩².
pub fn correlation_g2(
    l: &Superoperator,
    rho_st: &DensityMatrix,
    f: &ComplexMatrix,
    delays: &[f64],
    normalization: Normalization,
) -> Result<CorrelationTrace> {
    check_stationary(l, rho_st)?;
    let fd = f.adjoint();
    let number = &fd * f;
    let denom = match normalization {
        Normalization::Raw => 1.0,
        Normalization::Normalized => {
            let n = normalization_flux(&number, rho_st)?;
            n * n
        }
    };
    let x = f * rho_st.matrix() * &fd;
    let values = regression_series(l, &x, &number, delays)?
        .into_iter()
        .map(|z| z / denom)
        .collect();
    Ok(CorrelationTrace {
        kind: CorrelationKind::G2,
        delays: delays.to_vec(),
        values,
        normalization,
        field_mean: rho_st.expectation(f),
    })
}

fn normalization_flux(number: &ComplexMatrix, rho: &DensityMatrix) -> Result<f64> {
    let n = rho.expectation(number).re;
    if n < DEGENERATE_FLUX_TOL * max_abs(number).max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateNormalization { flux: n });
    }
    Ok(n)
}

/// Equal-time ⟨F†F†FF⟩ / ⟨F†F⟩².
pub fn g2_zero(rho: &DensityMatrix, f: &ComplexMatrix) -> Result<f64> {
    let fd = f.adjoint();
    let number = &fd * f;
    let n = normalization_flux(&number, rho)?;
    let pair = &fd * &number * f;
    Ok(rho.expectation(&pair).re / (n * n))
}

/// Inelastic power spectral density on an angular-frequency grid relative to
/// the drive. Normalized so that `Σ psd · Δω / 2π = g1(0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub psd: Vec<f64>,
    /// |⟨F⟩|², the weight of the elastic delta peak excluded from `psd`.
    pub coherent_flux: f64,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        self.frequencies[1] - self.frequencies[0]
    }

    /// ∫ psd dω/2π over all bins whose frequency lies in `[lo, hi]`.
    pub fn integrate_between(&self, lo: f64, hi: f64) -> f64 {
        let dw = self.bin_width();
        self.frequencies
            .iter()
            .zip(&self.psd)
            .filter(|(w, _)| **w >= lo && **w <= hi)
            .map(|(_, s)| s * dw / std::f64::consts::TAU)
            .sum()
    }

    pub fn integrated(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.bin_width() / std::f64::consts::TAU
    }
}

pub fn power_spectrum(g1: &CorrelationTrace, mean_field: Complex64) -> Result<Spectrum> {
    power_spectrum_windowed(g1, mean_field, Window::None)
}

/// S(ω) = ∫ g1(τ) e^{−iωτ} dτ over the symmetric extension g1(−τ) = g1(τ)*.
pub fn power_spectrum_windowed(
    g1: &CorrelationTrace,
    mean_field: Complex64,
    window: Window,
) -> Result<Spectrum> {
    if g1.kind != CorrelationKind::G1 {
        return Err(Error::WrongTraceKind { expected: "g1" });
    }
    let dt = g1.uniform_step()?;
    if g1.delays[0].abs() > GRID_TOL * dt {
        return Err(Error::Grid(
            "spectrum needs a grid starting at tau = 0".into(),
        ));
    }
    let n = g1.values.len();
    let scale = mean_field
        .norm()
        .max(g1.values[0].norm().sqrt())
        .max(f64::MIN_POSITIVE);
    let residual = g1.field_mean.norm();
    if residual > 1e-10 * scale.max(1.0) {
        return Err(Error::ElasticContamination { residual });
    }

    let tau_max = g1.delays[n - 1];
    let weight = |k: usize| match window {
        Window::None => 1.0,
        Window::Hann => 0.5 * (1.0 + (std::f64::consts::PI * g1.delays[k] / tau_max).cos()),
    };
    let m = 2 * n - 1;
    let mut buf = vec![Complex64::from(0.0); m];
    buf[0] = g1.values[0] * weight(0);
    for k in 1..n {
        let v = g1.values[k] * weight(k);
        buf[k] = v;
        buf[m - k] = v.conj();
    }
    FftPlanner::<f64>::new()
        .plan_fft_forward(m)
        .process(&mut buf);

    let dw = std::f64::consts::TAU / (m as f64 * dt);
    let half = (m - 1) / 2;
    let mut frequencies = Vec::with_capacity(m);
    let mut psd = Vec::with_capacity(m);
    for j in 0..m {
        // ascending order: bins −half..=half
        let k = (j + m - half) % m;
        let signed = j as i64 - half as i64;
        frequencies.push(signed as f64 * dw);
        psd.push(buf[k].re * dt);
    }
    Ok(Spectrum {
        frequencies,
        psd,
        coherent_flux: mean_field.norm_sqr(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub frequency: f64,
    pub height: f64,
}

/// Local maxima above `rel_threshold · max(psd)`, in ascending frequency.
pub fn find_peaks(spectrum: &Spectrum, rel_threshold: f64) -> Vec<Peak> {
    let s = &spectrum.psd;
    let top = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top.is_nan() || top <= 0.0 {
        return Vec::new();
    }
    (1..s.len().saturating_sub(1))
        .filter(|&i| s[i] > s[i - 1] && s[i] >= s[i + 1] && s[i] > rel_threshold * top)
        .map(|i| Peak {
            frequency: spectrum.frequencies[i],
            height: s[i],
        })
        .collect()
}
