//! Shared fixtures for the benchmarks.

use tprf_core::units::mhz_to_angular;
use tprf_core::LadderParams;

/// Three-level transmon-like ladder (α/2π = −233 MHz, Γ/2π = 2.5 MHz) driven
/// resonantly at Ω = ε|α|.
pub fn reference_params(epsilon: f64) -> LadderParams {
    let alpha = mhz_to_angular(-233.0);
    LadderParams::new(3, alpha, 0.0, epsilon * alpha.abs(), mhz_to_angular(2.5))
        .expect("reference parameters are valid")
}
