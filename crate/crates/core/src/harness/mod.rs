//! Declarative experiments, deterministic runs and the identity suite.

mod run;
mod snap;
mod spec;
mod verify;

pub use run::{emit_plot_data, execute, output_dir, run, spec_hash, summary_text, OutputFile, PlotData, RunRecord, VERSION};
pub use snap::{best_rational, snap_frequency, SnapReport, SNAP_TOLERANCE};
pub use spec::{primitive_module, ExperimentSpec, Kind, SymbolSpec, SymbolTermSpec, XiBoxSpec};
pub use verify::{
    brute_force_stabilizer, density_quadrature, random_symbol, random_x_symbol, standard_modules, verify_identities,
    IdentityCheck,
};
