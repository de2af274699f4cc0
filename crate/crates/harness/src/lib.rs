//! Configuration, scenario runs, ensembles and file output for the
//! chemostat models in `chemostat-core`.

pub mod compare;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod export;
pub mod presets;
pub mod scenario;

pub use compare::{compare_models, Comparison};
pub use config::{load_config, parse_config, Format, ModelKind, ScenarioConfig};
pub use ensemble::{run_ensemble, EnsembleSummary};
pub use error::{HarnessError, Result};
pub use presets::{load_preset, PRESETS};
pub use scenario::{run_scenario, ScenarioResult};
