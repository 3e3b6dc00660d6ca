//! Experiment driver, identity checks and theorem suites.

mod experiment;
mod identities;
mod plot;
mod report;
mod suites;

pub use experiment::{
    rows_to_csv, rows_to_json, run_experiment, run_experiments, write_csv, ArrivalKind,
    ExperimentSpec, ResultRow,
};
pub use identities::{
    binomials, crazy_lhs, geometric_holds, identity_suite, inner_lhs, outer_lhs, partial_sum_exact,
    partial_sum_numeric_error,
};
pub use plot::{emit_plotdata, PlotAxes};
pub use report::{CheckResult, SuiteReport};
pub use suites::{
    chain_ratio, ladder_closed_form, ladder_opt_weight, pair_formed, single_edge_game,
    theorem_suite, unique_max_edge, Scale, SUITES,
};
