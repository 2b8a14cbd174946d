//! Scenario runner for the fermionic forced-oscillator library: loads a
//! JSON scenario, runs the requested tasks, and emits CSV series plus a
//! residual report.

pub mod ledger;
pub mod report;
pub mod run;
pub mod scenario;
pub mod table;

pub use report::{RunReport, Status, TaskReport};
pub use run::{run, RunOutput};
pub use scenario::{load_scenario, parse_scenario, LoadError, Scenario, Task};
