//! Conversion between ordinary frequencies quoted as `value/2π` in MHz and the
//! angular frequencies (rad/s) used everywhere inside the crate.

use std::f64::consts::TAU;

/// `f/2π` in MHz → angular frequency in rad/s.
pub fn mhz_to_angular(mhz: f64) -> f64 {
    TAU * mhz * 1e6
}

/// Angular frequency in rad/s → `ω/2π` in MHz.
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / (TAU * 1e6)
}

pub fn seconds_to_ns(t: f64) -> f64 {
    t * 1e9
}

pub fn ns_to_seconds(t: f64) -> f64 {
    t * 1e-9
}
