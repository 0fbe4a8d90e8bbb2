//! Katic-Jensen wake combination: root-sum-square deficits weighted by the
//! rotor area actually covered by each upwind wake.

use super::TurbineSpec;

/// Overlap area in m^2 between a wake disc of radius `wake_radius` and a
/// rotor disc of radius `rotor_radius` whose centers are `center_offset`
/// apart.
///
/// Full containment returns the whole rotor disc, disjoint discs return zero,
/// and partial overlap uses the two-circular-segment lens formula.
pub fn kj_partial_overlap_area(rotor_radius: f64, wake_radius: f64, center_offset: f64) -> f64 {
    debug_assert!(rotor_radius > 0.0 && wake_radius > 0.0 && center_offset >= 0.0);
    let (rt, rw, d) = (rotor_radius, wake_radius, center_offset);
    if d + rt <= rw {
        return std::f64::consts::PI * rt * rt;
    }
    if d >= rt + rw {
        return 0.0;
    }
    // Central angle of each circle's chord, then segment area (R^2/2)(phi - sin phi).
    let phi_w = 2.0 * (((rw * rw + d * d - rt * rt) / (2.0 * rw * d)).clamp(-1.0, 1.0)).acos();
    let phi_t = 2.0 * (((rt * rt + d * d - rw * rw) / (2.0 * rt * d)).clamp(-1.0, 1.0)).acos();
    0.5 * rw * rw * (phi_w - phi_w.sin()) + 0.5 * rt * rt * (phi_t - phi_t.sin())
}

/// Waked windspeed at a turbine with the given upwind interferers, each given
/// as (downwind distance, crosswind offset) in meters.
///
/// Each interferer contributes
/// `U_k = (1 - sqrt(1 - C_T)) * (1 + a d / r_t)^-2 * A_overlap / A_rotor`
/// and the total deficit is the root sum of squares; the result is
/// `v * (1 - deficit)` clamped at zero.
pub fn kj_waked_speed(
    turbine: &TurbineSpec,
    free_speed: f64,
    interferers: &[(f64, f64)],
) -> f64 {
    let rt = turbine.rotor_radius;
    let rotor_area = std::f64::consts::PI * rt * rt;
    let ct = turbine.thrust_coefficient(free_speed);
    let mut sum_sq = 0.0;
    for &(downwind, crosswind) in interferers {
        debug_assert!(downwind > 0.0);
        let decay = (1.0 + turbine.wake_expansion * downwind / rt).powi(-2);
        let rw = rt + turbine.wake_expansion * downwind;
        let overlap = kj_partial_overlap_area(rt, rw, crosswind.abs());
        let u_k = (1.0 - (1.0 - ct).sqrt()) * decay * overlap / rotor_area;
        sum_sq += u_k * u_k;
    }
    (free_speed * (1.0 - sum_sq.sqrt())).max(0.0)
}
