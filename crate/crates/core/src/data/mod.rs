//! Survival datasets, ingestion, interval partitions and the risk-table
//! sufficient statistics consumed by every likelihood evaluation.

mod dataset;
mod io;
mod partition;
mod risk;
mod summary;

pub use dataset::{check_compatible, DatasetRole, StratumMap, SurvivalDataset};
pub use io::{load_dataset, read_dataset, write_dataset, Schema};
pub use partition::{default_partition, IntervalPartition};
pub(crate) use partition::quantile_type7;
pub use risk::{build_risk_table, RiskGroup, RiskTable, SubjectRisk};
pub use summary::{summarize, SummaryRow};
