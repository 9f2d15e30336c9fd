//! Finite detection bandwidth (digital filtering of g2) and the
//! drive-power → Rabi-rate calibration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::correlations::{CorrelationKind, CorrelationTrace};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Default detection bandwidth, Hz.
pub const DEFAULT_BANDWIDTH_HZ: f64 = 12e6;

/// Real impulse response with unit DC gain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterKernel {
    taps: Vec<f64>,
    /// Seconds between taps.
    sample_period: f64,
    /// Nominal two-sided bandwidth in Hz, informational.
    bandwidth_hint: f64,
}

impl FilterKernel {
    /// Normalizes `taps` to unit sum.
    pub fn from_taps(taps: Vec<f64>, sample_period: f64, bandwidth_hint: f64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Kernel("no taps".into()));
        }
        if !sample_period.is_finite() || sample_period <= 0.0 {
            return Err(Error::Kernel(format!(
                "invalid sample period {sample_period}"
            )));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::Kernel("non-finite tap".into()));
        }
        let sum: f64 = taps.iter().sum();
        if sum.abs() < 1e-300 {
            return Err(Error::Kernel("taps sum to zero".into()));
        }
        Ok(Self {
            taps: taps.into_iter().map(|t| t / sum).collect(),
            sample_period,
            bandwidth_hint,
        })
    }

    pub fn delta(sample_period: f64) -> Self {
        Self::from_taps(vec![1.0], sample_period, f64::INFINITY).expect("valid delta kernel")
    }

    /// Boxcar of duration 1/B (noise-equivalent two-sided bandwidth B).
    pub fn boxcar(bandwidth_hz: f64, sample_period: f64) -> Result<Self> {
        let len = tap_count(1.0 / bandwidth_hz, sample_period)?;
        Self::from_taps(vec![1.0; len], sample_period, bandwidth_hz)
    }

    /// Hann-shaped kernel of duration 1.5/B (same noise-equivalent bandwidth).
    pub fn raised_cosine(bandwidth_hz: f64, sample_period: f64) -> Result<Self> {
        let len = tap_count(1.5 / bandwidth_hz, sample_period)?;
        let taps = (0..len)
            .map(|k| {
                let x = (k as f64 + 0.5) / len as f64;
                0.5 * (1.0 - (std::f64::consts::TAU * x).cos())
            })
            .collect();
        Self::from_taps(taps, sample_period, bandwidth_hz)
    }

    /// One tap per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, sample_period: f64) -> Result<Self> {
        let mut taps = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|e| Error::Kernel(format!("line {}: {e}", i + 1)))?;
            taps.push(v);
        }
        Self::from_taps(taps, sample_period, f64::NAN)
    }

    pub fn from_file(path: impl AsRef<Path>, sample_period: f64) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, sample_period)
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn bandwidth_hint(&self) -> f64 {
        self.bandwidth_hint
    }

    /// Squared taps resampled onto a grid of spacing `step` and normalized.
    fn squared_on_grid(&self, step: f64) -> Result<Vec<f64>> {
        let ratio = step / self.sample_period;
        let m = ratio.round();
        if m < 1.0 || (ratio - m).abs() > 1e-6 * ratio {
            return Err(Error::Kernel(format!(
                "kernel sample period {:e} s does not divide the trace step {step:e} s",
                self.sample_period
            )));
        }
        let m = m as usize;
        let sq: Vec<f64> = self
            .taps
            .chunks(m)
            .map(|c| c.iter().map(|t| t * t).sum())
            .collect();
        let sum: f64 = sq.iter().sum();
        Ok(sq.into_iter().map(|w| w / sum).collect())
    }
}

fn tap_count(duration: f64, sample_period: f64) -> Result<usize> {
    if !duration.is_finite() || duration <= 0.0 {
        return Err(Error::Kernel(format!("invalid kernel duration {duration}")));
    }
    Ok(((duration / sample_period).round() as usize).max(1))
}

/// Filters a normalized g2 trace: the symmetric extension g2(−τ) = g2(τ) is
/// convolved with the squared kernel and then correlated with it (one pass per
/// photon-detection time), with edge values held constant beyond the trace.
pub fn filter_g2(trace: &CorrelationTrace, kernel: &FilterKernel) -> Result<CorrelationTrace> {
    let w = prepare(trace, kernel)?;
    let x = symmetric_extension(trace);
    let k = w.len() as isize;
    let len = x.len() as isize;
    let at = |i: isize| x[i.clamp(0, len - 1) as usize];

    // y[j] = Σ_b w[b] x[j − b], needed for j ∈ [0, len − 1 + k − 1]
    let y: Vec<f64> = (0..len + k - 1)
        .map(|j| (0..k).map(|b| w[b as usize] * at(j - b)).sum())
        .collect();
    // z[i] = Σ_a w[a] y[i + a] = Σ_{a,b} w[a] w[b] x[i + a − b]
    let z: Vec<f64> = (0..len)
        .map(|i| (0..k).map(|a| w[a as usize] * y[(i + a) as usize]).sum())
        .collect();
    Ok(rebuild(trace, &z))
}

/// Single-pass filtering with the self-correlated squared kernel.
pub fn filter_g2_combined(
    trace: &CorrelationTrace,
    kernel: &FilterKernel,
) -> Result<CorrelationTrace> {
    let w = prepare(trace, kernel)?;
    let x = symmetric_extension(trace);
    let k = w.len() as isize;
    let len = x.len() as isize;
    let at = |i: isize| x[i.clamp(0, len - 1) as usize];
    // c[s] for lag s = a − b ∈ [−(k−1), k−1]
    let combined: Vec<f64> = (-(k - 1)..k)
        .map(|s| {
            (0..k)
                .filter_map(|a| {
                    let b = a - s;
                    (0..k).contains(&b).then(|| w[a as usize] * w[b as usize])
                })
                .sum()
        })
        .collect();
    let z: Vec<f64> = (0..len)
        .map(|i| {
            combined
                .iter()
                .enumerate()
                .map(|(idx, c)| c * at(i + idx as isize - (k - 1)))
                .sum()
        })
        .collect();
    Ok(rebuild(trace, &z))
}

fn prepare(trace: &CorrelationTrace, kernel: &FilterKernel) -> Result<Vec<f64>> {
    if trace.kind != CorrelationKind::G2 {
        return Err(Error::WrongTraceKind { expected: "g2" });
    }
    let step = trace.uniform_step()?;
    let w = kernel.squared_on_grid(step)?;
    let half_trace = 0.5 * (trace.delays[trace.delays.len() - 1] - trace.delays[0]);
    let kernel_span = (w.len() - 1) as f64 * step;
    if kernel_span > half_trace {
        return Err(Error::KernelTooWide {
            kernel_span,
            half_trace,
        });
    }
    Ok(w)
}

fn symmetric_extension(trace: &CorrelationTrace) -> Vec<f64> {
    let v = trace.real_values();
    v.iter().skip(1).rev().chain(v.iter()).copied().collect()
}

fn rebuild(trace: &CorrelationTrace, z: &[f64]) -> CorrelationTrace {
    let n = trace.values.len();
    CorrelationTrace {
        kind: CorrelationKind::G2,
        delays: trace.delays.clone(),
        values: z[n - 1..].iter().map(|&v| Complex64::from(v)).collect(),
        normalization: trace.normalization,
        field_mean: trace.field_mean,
    }
}

/// Ω = k √(P_in 10^(−attenuation/10)).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerCalibration {
    /// rad/s per √W at the device.
    pub k: f64,
    /// dB between the quoted input power and the device.
    pub reference_attenuation: f64,
}

impl PowerCalibration {
    pub fn new(k: f64, reference_attenuation: f64) -> Result<Self> {
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "calibration constant must be > 0 (got {k})"
            )));
        }
        Ok(Self {
            k,
            reference_attenuation,
        })
    }

    fn transmission(&self) -> f64 {
        10f64.powf(-self.reference_attenuation / 10.0)
    }
}

pub fn omega_from_power(p_in: f64, cal: &PowerCalibration) -> Result<f64> {
    if p_in.is_nan() || p_in < 0.0 {
        return Err(Error::InvalidPower(p_in));
    }
    Ok(cal.k * (p_in * cal.transmission()).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CalibrationFit {
    pub calibration: PowerCalibration,
    /// ‖Ω_obs − k√P_eff‖₂.
    pub residual_norm: f64,
}

/// Least-squares slope of Ω against √P_eff through the origin.
pub fn fit_calibration(
    points: &[(f64, f64)],
    reference_attenuation: f64,
) -> Result<CalibrationFit> {
    if points.len() < 2 {
        return Err(Error::Underdetermined(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some(&(p, _)) = points.iter().find(|(p, _)| p.is_nan() || *p < 0.0) {
        return Err(Error::InvalidPower(p));
    }
    let first = points[0].0;
    if points.iter().all(|(p, _)| *p == first) {
        return Err(Error::Underdetermined("all powers are identical".into()));
    }
    let t = 10f64.powf(-reference_attenuation / 10.0);
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), &(p, omega)| {
        let x = (p * t).sqrt();
        (sxy + x * omega, sxx + x * x)
    });
    let k = sxy / sxx;
    let residual_norm = points
        .iter()
        .map(|&(p, omega)| (omega - k * (p * t).sqrt()).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(CalibrationFit {
        calibration: PowerCalibration::new(k, reference_attenuation)?,
        residual_norm,
    })
}
