//! Built-in test models: two offshore scaling farms, the Alltwalis onshore
//! farm, and the 36-direction single-windspeed benchmark regime.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    FarmProblem, GridSpec, JensenInterpretation, PenaltyWeights, TurbineSpec, WindArrangement,
    WindRegime,
};
use crate::error::{Error, Result};

/// Default penalty weight applied to all constraint terms in presets.
pub const DEFAULT_LAMBDA: f64 = 200.0;

/// Names of the built-in problem instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    WindfarmA,
    WindfarmB,
    Alltwalis,
    MosettiSwr,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::WindfarmA,
        Preset::WindfarmB,
        Preset::Alltwalis,
        Preset::MosettiSwr,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::WindfarmA => "windfarm_a",
            Preset::WindfarmB => "windfarm_b",
            Preset::Alltwalis => "alltwalis",
            Preset::MosettiSwr => "mosetti_swr",
        }
    }

    /// Grid sides this preset is defined for. `None` means any `L >= 2`.
    pub fn supported_sides(&self) -> Option<&'static [usize]> {
        match self {
            Preset::WindfarmA => Some(&[4, 7, 9]),
            Preset::WindfarmB => Some(&[7, 9]),
            Preset::Alltwalis => Some(&[7, 8, 9]),
            Preset::MosettiSwr => None,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "windfarm_a" | "a" => Ok(Preset::WindfarmA),
            "windfarm_b" | "b" => Ok(Preset::WindfarmB),
            "alltwalis" => Ok(Preset::Alltwalis),
            "mosetti_swr" | "mosetti" => Ok(Preset::MosettiSwr),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (expected windfarm_a, windfarm_b, alltwalis or mosetti_swr)"
            ))),
        }
    }
}

/// North Sea wind data: (direction from, m/s, probability). Sums to 1.
const NORTH_SEA_REGIME: [(f64, f64, f64); 12] = [
    (0.0, 9.77, 0.063),
    (30.0, 8.34, 0.059),
    (60.0, 7.93, 0.055),
    (90.0, 10.18, 0.078),
    (120.0, 8.14, 0.083),
    (150.0, 8.24, 0.065),
    (180.0, 9.05, 0.114),
    (210.0, 11.59, 0.146),
    (240.0, 12.11, 0.121),
    (270.0, 11.90, 0.085),
    (300.0, 10.38, 0.064),
    (330.0, 8.14, 0.067),
];

/// Alltwalis wind atlas data. The published probabilities sum to 0.99 and are
/// rescaled on load.
const ALLTWALIS_REGIME: [(f64, f64, f64); 12] = [
    (0.0, 4.65, 0.08),
    (30.0, 1.55, 0.03),
    (60.0, 1.55, 0.04),
    (90.0, 4.65, 0.07),
    (120.0, 3.10, 0.05),
    (150.0, 6.20, 0.08),
    (180.0, 7.97, 0.12),
    (210.0, 9.30, 0.14),
    (240.0, 7.97, 0.12),
    (270.0, 4.65, 0.08),
    (300.0, 6.20, 0.09),
    (330.0, 6.20, 0.09),
];

/// Thrust curve of the 164 m rotor used by windfarms A and B.
const OFFSHORE_THRUST: [(f64, f64); 22] = [
    (4.0, 0.7000000000),
    (5.0, 0.722386304),
    (6.0, 0.773588333),
    (7.0, 0.773285946),
    (8.0, 0.767899317),
    (9.0, 0.732727569),
    (10.0, 0.688896343),
    (11.0, 0.623028669),
    (12.0, 0.500046699),
    (13.0, 0.373661747),
    (14.0, 0.293230676),
    (15.0, 0.238407400),
    (16.0, 0.196441644),
    (17.0, 0.163774674),
    (18.0, 0.137967245),
    (19.0, 0.117309371),
    (20.0, 0.100578122),
    (21.0, 0.086883163),
    (22.0, 0.075565832),
    (23.0, 0.066131748),
    (24.0, 0.058204932),
    (25.0, 0.051495998),
];

/// Thrust curve of the SWT-2.3-93 turbines at Alltwalis.
const ALLTWALIS_THRUST: [(f64, f64); 15] = [
    (2.5, 0.85),
    (3.75, 0.85),
    (5.0, 0.82),
    (6.25, 0.82),
    (7.5, 0.82),
    (8.75, 0.82),
    (10.0, 0.8),
    (11.25, 0.62),
    (12.5, 0.4),
    (13.75, 0.3),
    (15.0, 0.2),
    (16.25, 0.15),
    (17.5, 0.1),
    (18.75, 0.08),
    (20.0, 0.05),
];

/// Unusable-site masks for Alltwalis, hand-traced approximations of the red
/// terrain regions at each resolution. Shipped as editable flat data files.
const ALLTWALIS_P7: &str = include_str!("../../data/alltwalis_p7.txt");
const ALLTWALIS_P8: &str = include_str!("../../data/alltwalis_p8.txt");
const ALLTWALIS_P9: &str = include_str!("../../data/alltwalis_p9.txt");

fn regime_from(table: &[(f64, f64, f64)]) -> Result<WindRegime> {
    WindRegime::normalized(
        table
            .iter()
            .map(|&(d, v, p)| WindArrangement::new(d, v, p))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// North Sea wind regime used by windfarms A and B.
pub fn north_sea_regime() -> WindRegime {
    regime_from(&NORTH_SEA_REGIME).expect("static regime data is valid")
}

/// Alltwalis wind regime, normalized from the published table.
pub fn alltwalis_regime() -> WindRegime {
    regime_from(&ALLTWALIS_REGIME).expect("static regime data is valid")
}

/// The 36-direction benchmark regime: 12 m/s every 10 degrees, equal odds.
pub fn single_windspeed_regime() -> WindRegime {
    WindRegime::normalized(
        (0..36)
            .map(|k| WindArrangement::new(10.0 * k as f64, 12.0, 1.0 / 36.0))
            .collect::<Result<Vec<_>>>()
            .expect("static regime data is valid"),
    )
    .expect("static regime data is valid")
}

/// The 164 m offshore turbine of windfarms A and B.
pub fn offshore_turbine() -> TurbineSpec {
    TurbineSpec::new(82.0, 107.0, 0.094, OFFSHORE_THRUST.to_vec())
        .expect("static turbine data is valid")
}

/// The SWT-2.3-93 turbine at Alltwalis.
pub fn alltwalis_turbine() -> TurbineSpec {
    TurbineSpec::new(46.5, 90.0, 0.154, ALLTWALIS_THRUST.to_vec())
        .expect("static turbine data is valid")
}

/// Parses an avoidance vector from flat text: whitespace-separated values in
/// site order, each in `[0, 1]`.
pub fn parse_avoidance_text(text: &str) -> Result<Vec<f64>> {
    let values = text
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad avoidance value '{tok}': {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(Error::Parse("avoidance vector is empty".into()));
    }
    if values.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::Parse("avoidance values must lie in [0, 1]".into()));
    }
    Ok(values)
}

fn alltwalis_avoidance(side: usize) -> Result<Vec<f64>> {
    let text = match side {
        7 => ALLTWALIS_P7,
        8 => ALLTWALIS_P8,
        9 => ALLTWALIS_P9,
        other => {
            return Err(Error::Config(format!(
                "no avoidance data for alltwalis at L={other}"
            )))
        }
    };
    let p = parse_avoidance_text(text)?;
    if p.len() != side * side {
        return Err(Error::Config(format!(
            "avoidance data for L={side} has {} entries, expected {}",
            p.len(),
            side * side
        )));
    }
    Ok(p)
}

/// Loads a fully populated problem instance for a preset at grid side `side`.
///
/// All presets default to uniform penalty weights of [`DEFAULT_LAMBDA`] and
/// the conventional deficit reading.
pub fn load_preset(preset: Preset, side: usize) -> Result<FarmProblem> {
    if let Some(supported) = preset.supported_sides() {
        if !supported.contains(&side) {
            return Err(Error::Config(format!(
                "preset {} supports L in {:?}, got {side}",
                preset.name(),
                supported
            )));
        }
    } else if side < 2 {
        return Err(Error::Config(format!(
            "grid side must be >= 2, got {side}"
        )));
    }
    let weights = PenaltyWeights::uniform(DEFAULT_LAMBDA);
    let jensen = JensenInterpretation::OneMinusDeficit;
    match preset {
        Preset::WindfarmA => FarmProblem::new(
            GridSpec::new(side, 3940.0)?,
            offshore_turbine(),
            north_sea_regime(),
            16,
            None,
            None,
            weights,
            jensen,
        ),
        Preset::WindfarmB => FarmProblem::new(
            GridSpec::new(side, 7872.0)?,
            offshore_turbine(),
            north_sea_regime(),
            49,
            None,
            None,
            weights,
            jensen,
        ),
        Preset::Alltwalis => FarmProblem::new(
            GridSpec::new(side, 1581.13)?,
            alltwalis_turbine(),
            alltwalis_regime(),
            10,
            Some(465.0),
            Some(alltwalis_avoidance(side)?),
            weights,
            jensen,
        ),
        // The benchmark regime mounted on the windfarm A geometry; the source
        // material fixes only the regime, so the physical host is the simple
        // offshore toy farm.
        Preset::MosettiSwr => FarmProblem::new(
            GridSpec::new(side, 3940.0)?,
            offshore_turbine(),
            single_windspeed_regime(),
            16,
            None,
            None,
            weights,
            jensen,
        ),
    }
}
