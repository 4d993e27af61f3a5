//! Instance files, seeded generators and experiment suites.

mod experiment;
mod format;
mod generate;

pub use experiment::{
    ccfl_records, csv_header, ompc_record, ompc_stats, run_experiment, tree_record, ExperimentConfig, ExperimentRecord,
    ExperimentReport, OmpcStats, Suite, REPORT_TOLERANCE, TREE_GRID,
};
pub use format::{emit_instance, parse_instance, Instance, OmpcInstance};
pub use generate::{gen_random_ccfl, gen_random_ompc, CcflGenConfig};
