#![allow(dead_code)]

use rand::Rng;
use tprf_core::correlations::{uniform_delays, DEFAULT_DELAY_POINTS, DEFAULT_TAU_MAX_OVER_GAMMA};
use tprf_core::units::mhz_to_angular;
use tprf_core::{Complex64, ComplexMatrix, DensityMatrix, Emitter, LadderParams};

pub fn alpha() -> f64 {
    mhz_to_angular(-233.0)
}

pub fn gamma() -> f64 {
    mhz_to_angular(2.5)
}

/// Three-level ladder at Ω = ε|α| and detuning δ (rad/s).
pub fn params(epsilon: f64, delta: f64) -> LadderParams {
    LadderParams::new(3, alpha(), delta, epsilon * alpha().abs(), gamma()).unwrap()
}

pub fn emitter(epsilon: f64, delta: f64) -> Emitter {
    Emitter::new(params(epsilon, delta)).unwrap()
}

/// Two-level emitter driven on resonance at Ω/2π = `omega_mhz`.
pub fn mollow(omega_mhz: f64) -> Emitter {
    let p = LadderParams::new(
        2,
        alpha(),
        -alpha() / 2.0,
        mhz_to_angular(omega_mhz),
        gamma(),
    )
    .unwrap();
    Emitter::new(p).unwrap()
}

pub fn default_delays() -> Vec<f64> {
    uniform_delays(DEFAULT_TAU_MAX_OVER_GAMMA / gamma(), DEFAULT_DELAY_POINTS).unwrap()
}

/// ρ = G G† / Tr(G G†) with Gaussian-ish complex entries.
pub fn random_density(rng: &mut impl Rng, n: usize) -> DensityMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::try_new(m / tr).unwrap()
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Half the distance between the strongest sidebands on either side of the
/// drive, ignoring anything within `guard` of the centre.
pub fn sideband_half_splitting(s: &tprf_core::Spectrum, guard: f64) -> f64 {
    let peaks = tprf_core::correlations::find_peaks(s, 1e-3);
    let strongest = |side: f64| {
        peaks
            .iter()
            .filter(|p| p.frequency * side > guard)
            .max_by(|a, b| a.height.partial_cmp(&b.height).unwrap())
            .expect("sideband present")
            .frequency
    };
    (strongest(1.0) - strongest(-1.0)) / 2.0
}
