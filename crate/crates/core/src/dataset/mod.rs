//! Experiment tables, model specs, scaling and pool partitioning.

mod partition;
mod scaling;
mod spec;
mod synth;
mod table;

pub use partition::{partition, PoolPartition};
pub use scaling::{fit_scaling, ScalingParams};
pub use spec::{load_spec_config, parse_spec_config, ModelSpec};
pub use synth::{synth_response, synth_table, synth_table_with_columns};
pub use table::{load_table, read_header, ExperimentTable, Schema, NIMS_FEATURES, NIMS_RESPONSE};
