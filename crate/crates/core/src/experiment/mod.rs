//! Configured end-to-end runs: solve, measure rates, write reproducible
//! artifacts with a hashed manifest.

mod commands;
mod config;
mod output;
mod presets;
mod run;
mod single;

pub use commands::{
    extend_command, extended_signal_csv, pencil_command, read_signal_csv, smoothness_command, ExtensionReport,
    PencilReport,
};
pub use config::{
    manufactured_solution, manufactured_source, ExperimentConfig, GradedSpec, MeshSpec, PencilSpec, ProblemSpec,
    SemilinearSpec, SmoothnessSpec, SourceSpec, StepRule,
};
pub use output::{num, output_root, parallel_map, sha256_hex, ManifestEntry, OutputDir, Table, OUT_ENV};
pub use presets::{preset, presets, PRESET_NAMES};
pub use run::{
    run_experiment, CornerPencil, EnergyRate, LevelRecord, MeshFamily, RunReport, SemilinearReport, StageTiming,
};
pub use single::{load_run, run_single, MeshChoice, RunConfig, SingleRunReport};
