//! Unit conversions. Everything inside the crate is SI (meters, seconds,
//! m/s); imperial units appear only at parse and report boundaries.

/// Meters per statute mile-per-hour (exact: 1609.344 m per mile).
pub const MPS_PER_MPH: f64 = 0.44704;

/// Meters per km/h.
pub const MPS_PER_KMH: f64 = 1.0 / 3.6;

/// Meters per foot.
pub const M_PER_FT: f64 = 0.3048;

pub fn mph_to_mps(mph: f64) -> f64 {
    mph * MPS_PER_MPH
}

pub fn mps_to_mph(mps: f64) -> f64 {
    mps / MPS_PER_MPH
}

pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh * MPS_PER_KMH
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mph_round_trip() {
        assert!((mph_to_mps(25.0) - 11.176).abs() < 1e-9);
        assert!((mps_to_mph(mph_to_mps(63.2)) - 63.2).abs() < 1e-12);
    }
}
