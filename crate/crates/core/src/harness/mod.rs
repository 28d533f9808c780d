//! Experiment orchestration: scenario files, seeded ensembles, sweeps,
//! paired statistics and result files.

mod ensemble;
mod export;
mod scenario;
mod simulate;
pub mod stats;

pub use ensemble::{aggregate, read_external_series, run_ensemble, run_sweep, RunRecord, SweepPoint, SweepSpec};
pub use export::{
    export_csv, export_json, export_results, fmt_sig17, import_csv, import_json, write_csv, write_json, CsvBlock, Format,
    CSV_HEADER,
};
pub use scenario::{Estimated, Geometry, Scenario, ScenarioSpec, ZosgaSettings};
pub use simulate::{estimate_constants, run_simulation, sim_seed, stream_rng, Method, SimulationOutput, Stream};
