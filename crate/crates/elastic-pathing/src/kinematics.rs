//! Turn feasibility physics.
//!
//! Two radii decide whether a vehicle at speed v can take a turn: the
//! minimum safe radius implied by the speed (side friction plus
//! superelevation), and the largest radius the junction geometry
//! allows (sweeping from the outer edge of the entry road to the outer
//! edge of the exit road). The turn is possible when the geometric
//! radius is at least the safe radius.

use serde::{Deserialize, Serialize};

use crate::map::{TurnDescriptor, STRAIGHT_ALPHA_EPS};
use crate::units::M_PER_FT;

/// The safe-turn-radius equation is stated in mph and feet with a
/// unit-bound constant of 15; this is the mph-to-m/s factor its
/// arithmetic assumes (30 mph == 13.41 m/s). Kept distinct from the
/// exact boundary conversion in [`crate::units`].
const EQ_MPS_PER_MPH: f64 = 0.447;

/// Parameters of the turn model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnModelParams {
    /// Dry coefficient of sliding side friction for tires.
    pub friction: f64,
    /// Superelevation, percent. 8 is the maximum where road ice can
    /// form, which maximizes the allowed radius and so rejects the
    /// fewest paths.
    pub elevation_pct: f64,
    /// Lane width, meters.
    pub lane_width: f64,
    /// Extra slack for a car waiting ahead at an intersection, meters.
    pub car_offset: f64,
}

impl Default for TurnModelParams {
    fn default() -> Self {
        Self {
            friction: 0.30,
            elevation_pct: 8.0,
            lane_width: 3.65,
            car_offset: 5.0,
        }
    }
}

/// Minimum radius (meters) a vehicle at `v` m/s can safely turn on.
///
/// Evaluates `r = speed^2 / (15 (0.01 e + f))` with speed in mph and r
/// in feet, converting explicitly on both sides.
pub fn safe_turn_radius(v: f64, p: &TurnModelParams) -> f64 {
    let mph = v / EQ_MPS_PER_MPH;
    let r_ft = (mph * mph) / (15.0 * (0.01 * p.elevation_pct + p.friction));
    r_ft * M_PER_FT
}

/// Highest speed (m/s) at which a turn of radius `r` meters is safe.
/// Exact algebraic inverse of [`safe_turn_radius`].
pub fn max_turn_speed(r: f64, p: &TurnModelParams) -> f64 {
    let r_ft = r.max(0.0) / M_PER_FT;
    let mph = (r_ft * 15.0 * (0.01 * p.elevation_pct + p.friction)).sqrt();
    mph * EQ_MPS_PER_MPH
}

/// Largest turning radius the junction geometry admits: enter at the
/// outer edge of a road `x` meters wide, leave at the outer edge of
/// one `y` meters wide, meeting at interior angle `alpha`.
///
/// Returns `None` for straight continuations (alpha within 1e-9 of
/// pi), which callers treat as unconstrained.
pub fn intersection_turn_radius(x: f64, y: f64, alpha: f64) -> Option<f64> {
    if alpha >= std::f64::consts::PI - STRAIGHT_ALPHA_EPS {
        return None;
    }
    let c = alpha.cos();
    Some((x + y + (2.0 * x * y * (1.0 + c)).sqrt()) / (1.0 - c))
}

/// Can a vehicle at speed `v` take this turn? Straight continuations
/// are always possible.
pub fn can_make_turn(v: f64, turn: &TurnDescriptor, p: &TurnModelParams) -> bool {
    match intersection_turn_radius(turn.entry_width_x, turn.exit_width_y, turn.alpha) {
        None => true,
        Some(r_actual) => r_actual >= safe_turn_radius(v, p),
    }
}
