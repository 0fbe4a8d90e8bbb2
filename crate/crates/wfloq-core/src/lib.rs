//! Windfarm layout optimization as a QUBO, solved with qubit-efficient
//! variational encodings on a built-in statevector simulator.
//!
//! The crate covers the full pipeline:
//!
//! - [`farm`]: grids, turbines, wind regimes, wake geometry and layout power
//!   (linear-superposition model plus the root-sum-square variant).
//! - [`qubo`]: cost-matrix assembly from the physics and the penalty terms,
//!   the spin (Ising) form, and the penalty-weight scan.
//! - [`sim`]: a seeded shot-based statevector simulator with multi-operator
//!   measurement from a single counts table.
//! - [`encoding`]: the correlator encoding (PCE) with its layered ansatz and
//!   the single-qubit operator encoding (SQOE).
//! - [`optimize`]: Nelder-Mead over the PCE ansatz and random-step
//!   central-difference SGD over the SQOE parameters, with warm starts.
//! - [`solvers`]: exhaustive search and simulated annealing baselines.
//! - [`bench`]: the sampled benchmark harness with raw/trimmed summaries,
//!   time-scaling fits and CSV/SVG emitters.
//!
//! ```
//! use wfloq_core::farm::presets::{load_preset, Preset};
//! use wfloq_core::qubo::assemble_qubo;
//! use wfloq_core::solvers::brute_force;
//!
//! let problem = load_preset(Preset::WindfarmA, 4).unwrap();
//! let q = assemble_qubo(&problem).unwrap();
//! let solution = brute_force(&q).unwrap();
//! assert_eq!(solution.best_layout.turbine_count(), 16);
//! ```

pub mod bench;
pub mod encoding;
pub mod error;
pub mod farm;
pub mod optimize;
pub mod qubo;
pub mod report;
pub mod sim;
pub mod solvers;

pub use error::{Error, Result};
pub use farm::{
    FarmProblem, GridSpec, JensenInterpretation, Layout, PenaltyWeights, TurbineSpec,
    WindArrangement, WindRegime,
};
pub use qubo::{IsingModel, QuboMatrix, SpinVector};
pub use report::RunReport;
