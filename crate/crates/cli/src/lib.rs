//! Scenario loading, dispatch and report emission behind the `flatlab` binary.

pub mod error;
pub mod report;
pub mod run;
pub mod scenario;

pub use error::{CliError, CliResult};
pub use report::{Report, Verdict};
pub use run::{execute, Overrides};
pub use scenario::{list_examples, load, CatalogEntry, Scenario, Task};

pub const REPORT_SCHEMA: &str = include_str!("../../../schemas/report.schema.json");
pub const SCENARIO_SCHEMA: &str = include_str!("../../../schemas/scenario.schema.json");
