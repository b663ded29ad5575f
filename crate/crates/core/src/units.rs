//! Unit conventions, collected in one place.
//!
//! Internally, time is measured in nanoseconds and every rate, decay constant,
//! and Rabi term is an angular frequency in rad/ns. Quantities quoted as
//! ordinary frequencies ("1 GHz") convert with a factor of 2π; quantities
//! quoted as lifetimes ("100 us") convert as exact reciprocals with no angular
//! factor. All conversions go through this module so the 2π bookkeeping lives
//! in exactly one place.

use std::f64::consts::TAU;

/// Ordinary frequency in GHz to an angular rate in rad/ns.
pub fn angular_from_ghz(f_ghz: f64) -> f64 {
    TAU * f_ghz
}

/// Angular rate in rad/ns back to an ordinary frequency in GHz.
pub fn ghz_from_angular(omega: f64) -> f64 {
    omega / TAU
}

/// Lifetime in ns to the corresponding decay rate in 1/ns.
pub fn rate_from_lifetime_ns(t_ns: f64) -> f64 {
    1.0 / t_ns
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz_round_trip_is_exact() {
        for f in [1.0, 0.001, 0.1, 5e-3] {
            assert_eq!(ghz_from_angular(angular_from_ghz(f)), f);
        }
    }

    #[test]
    fn lifetime_conversion() {
        assert_eq!(rate_from_lifetime_ns(5.0), 0.2);
        assert_eq!(rate_from_lifetime_ns(100_000.0), 1e-5);
    }
}
