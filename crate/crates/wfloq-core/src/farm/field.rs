//! Windspeed field evaluation for wake visualizations.

use super::{JensenInterpretation, TurbineSpec, WindRegime};
use crate::error::{Error, Result};

/// Effective windspeed on a `resolution x resolution` raster over the square
/// field `[0, side_length]^2`, with turbines at the given coordinates.
///
/// Per cell the regime-averaged speed is
/// `sum_d p_d * max(0, v_d - sum_upwind (v_d - u))`, summing the speed
/// deficits of every turbine whose wake covers the cell. Row 0 of the result
/// is the northern edge, matching the site numbering.
pub fn windspeed_field(
    turbine: &TurbineSpec,
    regime: &WindRegime,
    jensen: JensenInterpretation,
    side_length: f64,
    turbines: &[(f64, f64)],
    resolution: usize,
) -> Result<Vec<Vec<f64>>> {
    if resolution < 2 {
        return Err(Error::Config(format!(
            "field resolution must be >= 2, got {resolution}"
        )));
    }
    if !(side_length > 0.0) {
        return Err(Error::Config("field side length must be positive".into()));
    }
    for &(x, y) in turbines {
        if !(0.0..=side_length).contains(&x) || !(0.0..=side_length).contains(&y) {
            return Err(Error::Domain(format!(
                "turbine at ({x}, {y}) lies outside the {side_length} m field"
            )));
        }
    }
    let step = side_length / (resolution - 1) as f64;
    let mut field = vec![vec![0.0; resolution]; resolution];
    for (row, field_row) in field.iter_mut().enumerate() {
        let y = row as f64 * step;
        for (col, cell) in field_row.iter_mut().enumerate() {
            let x = col as f64 * step;
            let mut speed = 0.0;
            for arrangement in regime.arrangements() {
                let v = arrangement.free_speed;
                let (fx, fy) = arrangement.flow_vector();
                let (px, py) = (-fy, fx);
                let mut deficit = 0.0;
                for &(tx, ty) in turbines {
                    let (dx, dy) = (x - tx, y - ty);
                    let downwind = dx * fx + dy * fy;
                    if downwind <= 0.0 {
                        continue;
                    }
                    let crosswind = (dx * px + dy * py).abs();
                    if crosswind <= turbine.wake_radius(downwind)? {
                        deficit += v - turbine.waked_windspeed(jensen, v, downwind)?;
                    }
                }
                speed += arrangement.probability * (v - deficit).max(0.0);
            }
            *cell = speed;
        }
    }
    Ok(field)
}
