//! Scenario files, the builtin program registry, experiment execution and
//! report/plot emission behind the command-line tool.

pub mod builtins;
pub mod experiment;
pub mod plot;
pub mod scenario;

pub use builtins::{builtin, delay, resolve_program, BUILTINS};
pub use experiment::{
    c_alone_closed_form, evaluate_trace, run_all, run_experiment, run_kpp, run_levin,
    trace_file_name, write_experiment, Check, Experiment, KppReport, LevinReport, Report,
    RunOptions, RunReport,
};
pub use plot::{emit_plot_data, plot_rows, PlotData, PlotError};
pub use scenario::{load_scenario, parse_scenario, Diagnostic, Scenario, ScenarioError};
