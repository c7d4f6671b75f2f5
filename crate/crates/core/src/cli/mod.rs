//! Scenario files, runs, sweeps and their output files. The `diskbeam`
//! binary is a thin wrapper over this module.

mod config;
mod output;
mod run;
mod sweep;

pub use config::{
    validate_config, validate_scenario, AnalysisSection, ConfigReport, DampingSpec, GridSection, InitialSection,
    LawSection, ParamsSection, ProfileSpec, Scenario, ScenarioFile, TimeSection, TorqueSpec, SCHEMA_VERSION,
};
pub use output::{content_hash, envelope_csv, sha256_hex, trace_csv, TRACE_HEADER};
pub use run::{
    run, run_scenario, Compatibility, EnvelopeOutcome, Monotonicity, NamedFit, RunStatus, RunSummary,
    SpectralSummary, MONOTONE_TOL,
};
pub use sweep::{load_sweep, sweep, Axis, BaseSpec, CellResult, SweepFile};

use crate::error::Error;

/// Process exit status for an error raised before or during a run.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain(_) => 2,
        Error::Step { .. } | Error::Numerical(_) => 3,
        Error::Fit(_) | Error::NotApplicable(_) | Error::Data(_) => 4,
        Error::Io(_) => 1,
    }
}
