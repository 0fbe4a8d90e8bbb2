//! Windfarm model: grids, turbines, wind regimes, wake geometry and layout power.
//!
//! The farm is an `L x L` grid of candidate sites numbered row-major from the
//! top-left corner. Coordinates are in meters, `x` to the east (increasing
//! column) and `y` to the south (increasing row). Wind directions are compass
//! bearings of where the wind blows *from*, measured clockwise from north
//! (grid up), so a `0` degree arrangement pushes wakes down the columns.

mod field;
mod kj;
pub mod presets;

pub use field::windspeed_field;
pub use kj::{kj_partial_overlap_area, kj_waked_speed};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for requiring regime probabilities to sum to one.
pub const REGIME_PROBABILITY_TOL: f64 = 1e-6;

/// One wind arrangement: a direction, a free windspeed and its probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindArrangement {
    /// Bearing the wind blows from, degrees clockwise from north, in [0, 360).
    pub direction_deg: f64,
    /// Free-stream windspeed in m/s.
    pub free_speed: f64,
    /// Probability of this arrangement.
    pub probability: f64,
}

impl WindArrangement {
    pub fn new(direction_deg: f64, free_speed: f64, probability: f64) -> Result<Self> {
        if !free_speed.is_finite() || free_speed < 0.0 {
            return Err(Error::Domain(format!(
                "free windspeed must be >= 0, got {free_speed}"
            )));
        }
        if !probability.is_finite() || probability < 0.0 {
            return Err(Error::Domain(format!(
                "arrangement probability must be >= 0, got {probability}"
            )));
        }
        if !direction_deg.is_finite() {
            return Err(Error::Domain("direction must be finite".into()));
        }
        Ok(Self {
            direction_deg: direction_deg.rem_euclid(360.0),
            free_speed,
            probability,
        })
    }

    /// Unit vector of the flow (the direction the wind travels), in grid
    /// coordinates (x east, y south).
    pub(crate) fn flow_vector(&self) -> (f64, f64) {
        let alpha = self.direction_deg.to_radians();
        // Bearing vector points where the wind comes from; flow is opposite.
        (-alpha.sin(), alpha.cos())
    }
}

/// A discrete wind regime: a probability distribution over arrangements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<WindArrangement>", into = "Vec<WindArrangement>")]
pub struct WindRegime {
    arrangements: Vec<WindArrangement>,
}

impl WindRegime {
    /// Builds a regime, requiring probabilities to sum to one within
    /// [`REGIME_PROBABILITY_TOL`].
    pub fn new(arrangements: Vec<WindArrangement>) -> Result<Self> {
        if arrangements.is_empty() {
            return Err(Error::Config("wind regime must be non-empty".into()));
        }
        let total: f64 = arrangements.iter().map(|a| a.probability).sum();
        if (total - 1.0).abs() > REGIME_PROBABILITY_TOL {
            return Err(Error::Config(format!(
                "regime probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { arrangements })
    }

    /// Builds a regime after rescaling probabilities to sum to exactly one.
    ///
    /// Published regime tables are sometimes rounded so that the raw
    /// probabilities sum to slightly less than one; presets load through this
    /// constructor.
    pub fn normalized(mut arrangements: Vec<WindArrangement>) -> Result<Self> {
        if arrangements.is_empty() {
            return Err(Error::Config("wind regime must be non-empty".into()));
        }
        let total: f64 = arrangements.iter().map(|a| a.probability).sum();
        if total <= 0.0 {
            return Err(Error::Config(
                "regime probabilities must have a positive sum".into(),
            ));
        }
        for a in &mut arrangements {
            a.probability /= total;
        }
        Self::new(arrangements)
    }

    pub fn arrangements(&self) -> &[WindArrangement] {
        &self.arrangements
    }

    pub fn len(&self) -> usize {
        self.arrangements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrangements.is_empty()
    }

    /// Probability-weighted mean of `v^3 / 3`, the model power of a single
    /// unwaked turbine.
    pub fn unwaked_site_power(&self) -> f64 {
        self.arrangements
            .iter()
            .map(|a| a.probability * a.free_speed.powi(3) / 3.0)
            .sum()
    }
}

impl TryFrom<Vec<WindArrangement>> for WindRegime {
    type Error = Error;
    fn try_from(v: Vec<WindArrangement>) -> Result<Self> {
        WindRegime::new(v)
    }
}

impl From<WindRegime> for Vec<WindArrangement> {
    fn from(r: WindRegime) -> Self {
        r.arrangements
    }
}

/// Which reading of the printed top-hat deficit equation to use.
///
/// The wake equation can be read two ways: either the printed expression *is*
/// the waked windspeed ratio `u/v` ([`AsPrinted`](Self::AsPrinted)), or it is
/// the conventional Jensen velocity deficit so that
/// `u = v * (1 - expression)` ([`OneMinusDeficit`](Self::OneMinusDeficit)).
/// The conventional reading is the default: under the literal one the waked
/// speed decays to zero far downwind instead of recovering to the free
/// stream, which inverts the economics of dense layouts (see the preset
/// regression tests).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JensenInterpretation {
    /// `u = v * (1 - sqrt(1 - C_T)) * (r_t / r_w)^2`, literally as printed.
    AsPrinted,
    /// `u = v * (1 - deficit)` with the printed expression as the deficit.
    #[default]
    OneMinusDeficit,
}

/// Physical description of one turbine model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurbineSpec {
    /// Rotor radius `r_t` in meters.
    pub rotor_radius: f64,
    /// Hub height in meters (informational; the wake expansion factor is
    /// derived from it upstream of this struct).
    pub hub_height: f64,
    /// Dimensionless wake expansion factor `a`.
    pub wake_expansion: f64,
    /// Thrust coefficient curve as (windspeed m/s, C_T) pairs with strictly
    /// increasing speeds and C_T in (0, 1).
    thrust_table: Vec<(f64, f64)>,
}

impl TurbineSpec {
    pub fn new(
        rotor_radius: f64,
        hub_height: f64,
        wake_expansion: f64,
        thrust_table: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if rotor_radius <= 0.0 {
            return Err(Error::Config("rotor radius must be positive".into()));
        }
        if wake_expansion <= 0.0 {
            return Err(Error::Config("wake expansion factor must be positive".into()));
        }
        if thrust_table.is_empty() {
            return Err(Error::Config("thrust table must be non-empty".into()));
        }
        for pair in thrust_table.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::Config(
                    "thrust table speeds must be strictly increasing".into(),
                ));
            }
        }
        for &(speed, ct) in &thrust_table {
            if !(0.0..1.0).contains(&ct) || ct == 0.0 {
                return Err(Error::Config(format!(
                    "thrust coefficient at {speed} m/s must lie in (0, 1), got {ct}"
                )));
            }
        }
        Ok(Self {
            rotor_radius,
            hub_height,
            wake_expansion,
            thrust_table,
        })
    }

    pub fn thrust_table(&self) -> &[(f64, f64)] {
        &self.thrust_table
    }

    /// Thrust coefficient at `speed`, linearly interpolated between table
    /// nodes and clamped to the end values outside the tabulated range.
    pub fn thrust_coefficient(&self, speed: f64) -> f64 {
        let table = &self.thrust_table;
        if speed <= table[0].0 {
            return table[0].1;
        }
        if speed >= table[table.len() - 1].0 {
            return table[table.len() - 1].1;
        }
        for pair in table.windows(2) {
            let (s0, c0) = pair[0];
            let (s1, c1) = pair[1];
            if speed <= s1 {
                return c0 + (speed - s0) / (s1 - s0) * (c1 - c0);
            }
        }
        unreachable!("speed bracketed by table bounds");
    }

    /// Wake radius `r_t + a * distance` at `distance` meters downwind.
    pub fn wake_radius(&self, distance: f64) -> Result<f64> {
        if distance < 0.0 {
            return Err(Error::Domain(format!(
                "wake distance must be >= 0, got {distance}"
            )));
        }
        Ok(self.rotor_radius + self.wake_expansion * distance)
    }

    /// The printed top-hat expression
    /// `(1 - sqrt(1 - C_T(v))) * (r_t / (r_t + a d))^2`.
    fn deficit_expression(&self, free_speed: f64, distance: f64) -> Result<f64> {
        if distance < 0.0 {
            return Err(Error::Domain(format!(
                "wake distance must be >= 0, got {distance}"
            )));
        }
        if free_speed < 0.0 {
            return Err(Error::Domain(format!(
                "free windspeed must be >= 0, got {free_speed}"
            )));
        }
        let ct = self.thrust_coefficient(free_speed);
        if ct >= 1.0 {
            return Err(Error::Domain(format!(
                "thrust coefficient must be < 1 for a real deficit, got {ct}"
            )));
        }
        let ratio = self.rotor_radius / (self.rotor_radius + self.wake_expansion * distance);
        Ok((1.0 - (1.0 - ct).sqrt()) * ratio * ratio)
    }

    /// Reduced windspeed at `distance` downwind of a turbine in free stream
    /// `free_speed`, using the wake equation literally as printed:
    /// `u = v * (1 - sqrt(1 - C_T)) * (r_t / r_w)^2`.
    pub fn reduced_windspeed(&self, free_speed: f64, distance: f64) -> Result<f64> {
        self.waked_windspeed(JensenInterpretation::AsPrinted, free_speed, distance)
    }

    /// Reduced windspeed under the requested deficit interpretation.
    pub fn waked_windspeed(
        &self,
        interpretation: JensenInterpretation,
        free_speed: f64,
        distance: f64,
    ) -> Result<f64> {
        let expr = self.deficit_expression(free_speed, distance)?;
        Ok(match interpretation {
            JensenInterpretation::AsPrinted => free_speed * expr,
            JensenInterpretation::OneMinusDeficit => free_speed * (1.0 - expr),
        })
    }
}

/// Square grid of candidate sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Sites per side, `L >= 2`.
    pub side_count: usize,
    /// Physical side length `W_L` in meters.
    pub side_length: f64,
}

impl GridSpec {
    pub fn new(side_count: usize, side_length: f64) -> Result<Self> {
        if side_count < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 sites per side, got {side_count}"
            )));
        }
        if !(side_length > 0.0) {
            return Err(Error::Config(format!(
                "grid side length must be positive, got {side_length}"
            )));
        }
        Ok(Self {
            side_count,
            side_length,
        })
    }

    /// Distance between neighbouring sites: `W_L / (L - 1)`.
    pub fn spacing(&self) -> f64 {
        self.side_length / (self.side_count - 1) as f64
    }

    /// Total number of sites `N = L^2`.
    pub fn site_count(&self) -> usize {
        self.side_count * self.side_count
    }

    /// Row and column of a site index (row 0 at the top).
    pub fn row_col(&self, index: usize) -> Result<(usize, usize)> {
        if index >= self.site_count() {
            return Err(Error::OutOfRange {
                index,
                len: self.site_count(),
            });
        }
        Ok((index / self.side_count, index % self.side_count))
    }

    /// Physical coordinates of a site in meters, `(x east, y south)`.
    pub fn site_position(&self, index: usize) -> Result<(f64, f64)> {
        let (row, col) = self.row_col(index)?;
        let s = self.spacing();
        Ok((col as f64 * s, row as f64 * s))
    }

    /// Euclidean distance in meters between two sites.
    pub fn site_distance(&self, i: usize, j: usize) -> Result<f64> {
        let (xi, yi) = self.site_position(i)?;
        let (xj, yj) = self.site_position(j)?;
        Ok(((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt())
    }
}

/// Penalty weights for the three constraint terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    /// Weight on the turbine count constraint.
    pub count: f64,
    /// Weight on the minimum spacing constraint.
    pub spacing: f64,
    /// Weight on the avoidance constraint.
    pub avoidance: f64,
}

impl PenaltyWeights {
    /// The same weight on all three terms.
    pub fn uniform(lambda: f64) -> Self {
        Self {
            count: lambda,
            spacing: lambda,
            avoidance: lambda,
        }
    }
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        Self::uniform(presets::DEFAULT_LAMBDA)
    }
}

/// A complete layout-optimization problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarmProblem {
    pub grid: GridSpec,
    pub turbine: TurbineSpec,
    pub regime: WindRegime,
    /// Maximum (targeted) number of turbines `M`.
    pub max_turbines: usize,
    /// Minimum spacing `E` in meters, if enforced.
    #[serde(default)]
    pub min_spacing: Option<f64>,
    /// Per-site avoidance weights `P_i` in `[0, 1]`, if present.
    #[serde(default)]
    pub avoidance: Option<Vec<f64>>,
    #[serde(default)]
    pub weights: PenaltyWeights,
    #[serde(default)]
    pub jensen: JensenInterpretation,
}

impl FarmProblem {
    pub fn new(
        grid: GridSpec,
        turbine: TurbineSpec,
        regime: WindRegime,
        max_turbines: usize,
        min_spacing: Option<f64>,
        avoidance: Option<Vec<f64>>,
        weights: PenaltyWeights,
        jensen: JensenInterpretation,
    ) -> Result<Self> {
        let problem = Self {
            grid,
            turbine,
            regime,
            max_turbines,
            min_spacing,
            avoidance,
            weights,
            jensen,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.site_count();
        if self.max_turbines > n {
            return Err(Error::Config(format!(
                "turbine budget {} exceeds {} sites",
                self.max_turbines, n
            )));
        }
        if let Some(e) = self.min_spacing {
            if !(e >= 0.0) {
                return Err(Error::Config(format!("min spacing must be >= 0, got {e}")));
            }
        }
        if let Some(p) = &self.avoidance {
            if p.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: p.len(),
                });
            }
            if p.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::Config("avoidance weights must lie in [0, 1]".into()));
            }
        }
        if self.weights.count < 0.0 || self.weights.spacing < 0.0 || self.weights.avoidance < 0.0 {
            return Err(Error::Config("penalty weights must be >= 0".into()));
        }
        Ok(())
    }

    pub fn site_count(&self) -> usize {
        self.grid.site_count()
    }

    /// Sites downwind of `source` for one arrangement, paired with their
    /// downwind distance in meters. See [`wake_sites`].
    pub fn wake_set(
        &self,
        source: usize,
        arrangement: &WindArrangement,
    ) -> Result<Vec<(usize, f64)>> {
        wake_sites(&self.grid, &self.turbine, source, arrangement, None)
    }

    /// Waked windspeed at `distance` downwind under this problem's deficit
    /// interpretation.
    pub fn waked_windspeed(&self, free_speed: f64, distance: f64) -> Result<f64> {
        self.turbine
            .waked_windspeed(self.jensen, free_speed, distance)
    }

    /// Linear-superposition model power of a layout:
    /// `sum_d sum_i p_d [v_d^3/3 - sum_{j occupied, in wake of i} (v_d^3 - u_ij^3)/3]`.
    ///
    /// Only occupied waked sites contribute to the deficit sum.
    pub fn layout_power(&self, layout: &Layout) -> Result<f64> {
        let n = self.site_count();
        if layout.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: layout.len(),
            });
        }
        let mut power = 0.0;
        for arrangement in self.regime.arrangements() {
            let p = arrangement.probability;
            let v = arrangement.free_speed;
            let v3 = v.powi(3);
            for i in 0..n {
                if !layout.is_occupied(i) {
                    continue;
                }
                let mut site_power = v3 / 3.0;
                for (j, distance) in self.wake_set(i, arrangement)? {
                    if layout.is_occupied(j) {
                        let u = self.waked_windspeed(v, distance)?;
                        site_power -= (v3 - u.powi(3)) / 3.0;
                    }
                }
                power += p * site_power;
            }
        }
        Ok(power)
    }

    /// Writes the problem as a JSON document.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Reads a problem from a JSON document and validates it.
    pub fn from_json(text: &str) -> Result<Self> {
        let problem: FarmProblem = serde_json::from_str(text)?;
        problem.validate()?;
        Ok(problem)
    }
}

/// A binary occupancy vector over the grid sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Layout(Vec<bool>);

impl Layout {
    pub fn empty(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn full(n: usize) -> Self {
        Self(vec![true; n])
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Layout from the indices of occupied sites.
    pub fn from_occupied(n: usize, occupied: &[usize]) -> Result<Self> {
        let mut bits = vec![false; n];
        for &i in occupied {
            *bits.get_mut(i).ok_or(Error::OutOfRange { index: i, len: n })? = true;
        }
        Ok(Self(bits))
    }

    /// Layout from the low `n` bits of an integer, site `i` at bit `i`.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        Self((0..n).map(|i| bits >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_occupied(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, occupied: bool) {
        self.0[i] = occupied;
    }

    pub fn turbine_count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn occupied_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn as_bools(&self) -> &[bool] {
        &self.0
    }

    /// `"0101..."` string in site order (site 0 first).
    pub fn to_bit_string(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Integer with site `i` at bit `i`. Only valid for up to 64 sites.
    pub fn to_bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (b as u64) << i)
    }
}

/// Sites downwind of `source` under `arrangement`, each paired with its
/// downwind distance.
///
/// A site `j != source` is in the wake when its downwind distance along the
/// flow is positive and its crosswind offset does not exceed the wake radius
/// at that distance. `max_length` optionally caps the downwind reach; the
/// physical model leaves wakes uncapped, the cap exists for the illustrative
/// capped-wake grid fixture used in tests.
pub fn wake_sites(
    grid: &GridSpec,
    turbine: &TurbineSpec,
    source: usize,
    arrangement: &WindArrangement,
    max_length: Option<f64>,
) -> Result<Vec<(usize, f64)>> {
    let n = grid.site_count();
    if source >= n {
        return Err(Error::OutOfRange {
            index: source,
            len: n,
        });
    }
    let (sx, sy) = grid.site_position(source)?;
    let (fx, fy) = arrangement.flow_vector();
    // Perpendicular to the flow, for the crosswind offset.
    let (px, py) = (-fy, fx);
    let mut wake = Vec::new();
    for j in 0..n {
        if j == source {
            continue;
        }
        let (x, y) = grid.site_position(j)?;
        let (dx, dy) = (x - sx, y - sy);
        let downwind = dx * fx + dy * fy;
        if downwind <= 0.0 {
            continue;
        }
        if let Some(cap) = max_length {
            if downwind > cap {
                continue;
            }
        }
        let crosswind = (dx * px + dy * py).abs();
        if crosswind <= turbine.wake_radius(downwind)? {
            wake.push((j, downwind));
        }
    }
    Ok(wake)
}

#[cfg(test)]
mod tests {
    use super::presets::{load_preset, Preset};
    use super::*;
    use approx::assert_relative_eq;

    fn windfarm_a_turbine() -> TurbineSpec {
        load_preset(Preset::WindfarmA, 4).unwrap().turbine
    }

    fn unit_regime(direction_deg: f64, speed: f64) -> WindRegime {
        WindRegime::new(vec![WindArrangement::new(direction_deg, speed, 1.0).unwrap()]).unwrap()
    }

    #[test]
    fn site_position_origin() {
        let grid = GridSpec::new(10, 9.0).unwrap();
        assert_eq!(grid.site_position(0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn site_position_matches_row_major_numbering() {
        // Site 15 in 1-based labels (index 14) sits at column 5, row 2 of the
        // figure, i.e. zero-based column 4, row 1.
        let grid = GridSpec::new(10, 9.0).unwrap();
        assert_eq!(grid.site_position(14).unwrap(), (4.0, 1.0));
    }

    #[test]
    fn site_position_derived_spacing() {
        let grid = GridSpec::new(4, 3940.0).unwrap();
        let expected = 3940.0 / 3.0;
        let (x, y) = grid.site_position(5).unwrap();
        assert_relative_eq!(x, expected, max_relative = 1e-12);
        assert_relative_eq!(y, expected, max_relative = 1e-12);
    }

    #[test]
    fn site_position_out_of_range() {
        let grid = GridSpec::new(4, 3940.0).unwrap();
        assert!(matches!(
            grid.site_position(16),
            Err(Error::OutOfRange { index: 16, len: 16 })
        ));
    }

    #[test]
    fn wake_radius_at_zero_is_rotor_radius() {
        assert_eq!(windfarm_a_turbine().wake_radius(0.0).unwrap(), 82.0);
    }

    #[test]
    fn wake_radius_published_values() {
        assert_relative_eq!(
            windfarm_a_turbine().wake_radius(1000.0).unwrap(),
            176.0,
            max_relative = 1e-12
        );
        let alltwalis = load_preset(Preset::Alltwalis, 7).unwrap().turbine;
        assert_relative_eq!(
            alltwalis.wake_radius(100.0).unwrap(),
            61.9,
            max_relative = 1e-12
        );
    }

    #[test]
    fn wake_radius_rejects_negative_distance() {
        assert!(windfarm_a_turbine().wake_radius(-1.0).is_err());
    }

    #[test]
    fn wake_radius_is_affine_increasing() {
        let t = windfarm_a_turbine();
        let r0 = t.wake_radius(0.0).unwrap();
        let r1 = t.wake_radius(500.0).unwrap();
        let r2 = t.wake_radius(1000.0).unwrap();
        assert!(r1 > r0 && r2 > r1);
        assert_relative_eq!(r2 - r1, r1 - r0, max_relative = 1e-12);
    }

    #[test]
    fn thrust_coefficient_table_node() {
        assert_eq!(windfarm_a_turbine().thrust_coefficient(12.0), 0.500046699);
    }

    #[test]
    fn thrust_coefficient_clamps_below_table() {
        assert_eq!(windfarm_a_turbine().thrust_coefficient(3.0), 0.70);
    }

    #[test]
    fn thrust_coefficient_interpolates_midpoint() {
        // Midpoint of the 4 and 5 m/s rows: (0.7 + 0.722386304) / 2.
        assert_relative_eq!(
            windfarm_a_turbine().thrust_coefficient(4.5),
            0.711193152,
            max_relative = 1e-12
        );
    }

    #[test]
    fn thrust_coefficient_reproduces_every_node() {
        let t = windfarm_a_turbine();
        for &(speed, ct) in t.thrust_table() {
            assert_eq!(t.thrust_coefficient(speed), ct);
        }
    }

    #[test]
    fn empty_thrust_table_rejected() {
        assert!(TurbineSpec::new(82.0, 107.0, 0.094, vec![]).is_err());
    }

    #[test]
    fn reduced_windspeed_at_zero_distance() {
        // Independent scalar oracle: 12 * (1 - sqrt(1 - 0.500046699)).
        let expected = 12.0 * (1.0 - (1.0 - 0.500046699f64).sqrt());
        let got = windfarm_a_turbine().reduced_windspeed(12.0, 0.0).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-12);
        assert_relative_eq!(got, 3.5151148891690935, max_relative = 1e-12);
    }

    #[test]
    fn reduced_windspeed_zero_free_speed() {
        assert_eq!(windfarm_a_turbine().reduced_windspeed(0.0, 100.0).unwrap(), 0.0);
    }

    #[test]
    fn reduced_windspeed_vanishes_far_downwind() {
        let u = windfarm_a_turbine().reduced_windspeed(12.0, 1e12).unwrap();
        assert!(u.abs() < 1e-12);
    }

    #[test]
    fn reduced_windspeed_monotone_in_distance() {
        let t = windfarm_a_turbine();
        let mut last = f64::INFINITY;
        for step in 0..200 {
            let u = t.reduced_windspeed(12.0, step as f64 * 50.0).unwrap();
            assert!(u <= last + 1e-15);
            last = u;
        }
    }

    #[test]
    fn one_minus_deficit_recovers_downwind() {
        let t = windfarm_a_turbine();
        let near = t
            .waked_windspeed(JensenInterpretation::OneMinusDeficit, 12.0, 100.0)
            .unwrap();
        let far = t
            .waked_windspeed(JensenInterpretation::OneMinusDeficit, 12.0, 1e9)
            .unwrap();
        assert!(near < far);
        assert_relative_eq!(far, 12.0, max_relative = 1e-6);
    }

    #[test]
    fn wake_set_empty_for_most_downwind_row() {
        let problem = load_preset(Preset::WindfarmA, 4).unwrap();
        let from_north = WindArrangement::new(0.0, 12.0, 1.0).unwrap();
        // Bottom row sites are the most downwind for wind from the north.
        for source in 12..16 {
            assert!(problem.wake_set(source, &from_north).unwrap().is_empty());
        }
    }

    #[test]
    fn wake_set_matches_capped_grid_figure() {
        // Unit-spacing 10x10 grid, artificial wake radius of one grid unit per
        // unit distance, wake capped at length 3, wind from the north. The
        // turbine at 1-based label 15 (index 14) shades 3 + 5 + 7 sites.
        let grid = GridSpec::new(10, 9.0).unwrap();
        let turbine = TurbineSpec::new(1e-9, 1.0, 1.0, vec![(1.0, 0.5)]).unwrap();
        let arrangement = WindArrangement::new(0.0, 12.0, 1.0).unwrap();
        let wake = wake_sites(&grid, &turbine, 14, &arrangement, Some(3.0)).unwrap();
        let mut sites: Vec<usize> = wake.iter().map(|&(j, _)| j).collect();
        sites.sort_unstable();
        let expected: Vec<usize> = vec![
            23, 24, 25, // one row down, labels 24..26
            32, 33, 34, 35, 36, // two rows down, labels 33..37
            41, 42, 43, 44, 45, 46, 47, // three rows down, labels 42..48
        ];
        assert_eq!(sites, expected);
    }

    #[test]
    fn wake_set_ignores_probability() {
        let problem = load_preset(Preset::WindfarmA, 4).unwrap();
        let p1 = WindArrangement::new(90.0, 10.0, 1.0).unwrap();
        let p0 = WindArrangement::new(90.0, 10.0, 0.0).unwrap();
        assert_eq!(
            problem.wake_set(0, &p1).unwrap(),
            problem.wake_set(0, &p0).unwrap()
        );
    }

    #[test]
    fn wake_set_translation_equivariant_for_interior_sites() {
        let grid = GridSpec::new(7, 3940.0).unwrap();
        let turbine = windfarm_a_turbine();
        let arrangement = WindArrangement::new(0.0, 12.0, 1.0).unwrap();
        // Sources one row apart in the interior; wakes shift by one row.
        let a = wake_sites(&grid, &turbine, 8, &arrangement, None).unwrap();
        let b = wake_sites(&grid, &turbine, 15, &arrangement, None).unwrap();
        let shifted: Vec<(usize, f64)> = a
            .iter()
            .map(|&(j, d)| (j + 7, d))
            .filter(|&(j, _)| j < 49)
            .collect();
        // Every shifted member that stays on the grid must appear in b.
        for entry in &shifted {
            assert!(b
                .iter()
                .any(|&(j, d)| j == entry.0 && (d - entry.1).abs() < 1e-9));
        }
    }

    #[test]
    fn reversing_wind_swaps_upwind_and_downwind() {
        let problem = load_preset(Preset::WindfarmA, 4).unwrap();
        let north = WindArrangement::new(0.0, 12.0, 1.0).unwrap();
        let south = WindArrangement::new(180.0, 12.0, 1.0).unwrap();
        for source in 0..16 {
            let down: Vec<usize> = problem
                .wake_set(source, &north)
                .unwrap()
                .iter()
                .map(|&(j, _)| j)
                .collect();
            for &j in &down {
                let back: Vec<usize> = problem
                    .wake_set(j, &south)
                    .unwrap()
                    .iter()
                    .map(|&(k, _)| k)
                    .collect();
                assert!(back.contains(&source));
            }
        }
    }

    #[test]
    fn layout_power_empty_layout() {
        let problem = load_preset(Preset::WindfarmA, 4).unwrap();
        assert_eq!(problem.layout_power(&Layout::empty(16)).unwrap(), 0.0);
    }

    #[test]
    fn layout_power_single_turbine_no_wakes() {
        let grid = GridSpec::new(4, 3940.0).unwrap();
        let problem = FarmProblem::new(
            grid,
            windfarm_a_turbine(),
            unit_regime(0.0, 12.0),
            16,
            None,
            None,
            PenaltyWeights::uniform(0.0),
            JensenInterpretation::OneMinusDeficit,
        )
        .unwrap();
        let layout = Layout::from_occupied(16, &[5]).unwrap();
        assert_relative_eq!(
            problem.layout_power(&layout).unwrap(),
            12.0f64.powi(3) / 3.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn layout_power_full_preset_grid() {
        // Regression pin for the fully-occupied 4x4 preset under both deficit
        // readings; values cross-checked against an independent script.
        let problem = load_preset(Preset::WindfarmA, 4).unwrap();
        let full = Layout::full(16);
        assert_relative_eq!(
            problem.layout_power(&full).unwrap(),
            5218.548337013102,
            max_relative = 1e-9
        );
        let mut literal = problem.clone();
        literal.jensen = JensenInterpretation::AsPrinted;
        assert_relative_eq!(
            literal.layout_power(&full).unwrap(),
            864.2091157390215,
            max_relative = 1e-9
        );
    }

    #[test]
    fn layout_power_superset_never_exceeds_single_site_sum() {
        let problem = load_preset(Preset::WindfarmA, 4).unwrap();
        let n = problem.site_count();
        let mut singles = 0.0;
        for i in 0..n {
            singles += problem
                .layout_power(&Layout::from_occupied(n, &[i]).unwrap())
                .unwrap();
        }
        let full = problem.layout_power(&Layout::full(n)).unwrap();
        assert!(full <= singles + 1e-9);
    }

    #[test]
    fn regime_must_sum_to_one() {
        let arrangements = vec![
            WindArrangement::new(0.0, 10.0, 0.4).unwrap(),
            WindArrangement::new(90.0, 10.0, 0.4).unwrap(),
        ];
        assert!(WindRegime::new(arrangements.clone()).is_err());
        let normalized = WindRegime::normalized(arrangements).unwrap();
        let total: f64 = normalized
            .arrangements()
            .iter()
            .map(|a| a.probability)
            .sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn direction_normalized_into_range() {
        let a = WindArrangement::new(-90.0, 5.0, 1.0).unwrap();
        assert_eq!(a.direction_deg, 270.0);
        let b = WindArrangement::new(720.5, 5.0, 1.0).unwrap();
        assert_relative_eq!(b.direction_deg, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn problem_json_round_trip() {
        let problem = load_preset(Preset::Alltwalis, 7).unwrap();
        let text = problem.to_json().unwrap();
        let back = FarmProblem::from_json(&text).unwrap();
        assert_eq!(problem, back);
    }
}
