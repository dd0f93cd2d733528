//! Great-circle distance and small-scale planar projection helpers.

use serde::{Deserialize, Serialize};

/// Mean Earth radius in meters, the sphere used for all distance math.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// A timestamped GPS position. `t` is epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpsFix {
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
}

impl GpsFix {
    pub fn new(t: f64, lat: f64, lon: f64) -> Self {
        Self { t, lat, lon }
    }
}

/// Great-circle distance in meters between two fixes (haversine formula).
pub fn haversine(a: &GpsFix, b: &GpsFix) -> f64 {
    haversine_deg(a.lat, a.lon, b.lat, b.lon)
}

/// Haversine distance in meters from raw degree coordinates.
pub fn haversine_deg(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let lat1r = lat1.to_radians();
    let lat2r = lat2.to_radians();
    let dlat = (lat2 - lat1).to_radians();
    let dlon = (lon2 - lon1).to_radians();

    let sin_dlat = (dlat / 2.0).sin();
    let sin_dlon = (dlon / 2.0).sin();
    let h = sin_dlat * sin_dlat + lat1r.cos() * lat2r.cos() * sin_dlon * sin_dlon;
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Project `(lat, lon)` into a local planar frame centered on
/// `(lat0, lon0)` using an equirectangular approximation. Returns
/// `(x_east_m, y_north_m)`. Accurate to well below a meter at the
/// segment scales (tens of meters) this crate works with.
pub fn local_xy(lat0: f64, lon0: f64, lat: f64, lon: f64) -> (f64, f64) {
    let x = (lon - lon0).to_radians() * lat0.to_radians().cos() * EARTH_RADIUS_M;
    let y = (lat - lat0).to_radians() * EARTH_RADIUS_M;
    (x, y)
}

/// Linear interpolation between two coordinates. Good enough for
/// placing a point a few hundred meters along a road segment.
pub fn interpolate(lat1: f64, lon1: f64, lat2: f64, lon2: f64, frac: f64) -> (f64, f64) {
    (lat1 + (lat2 - lat1) * frac, lon1 + (lon2 - lon1) * frac)
}
