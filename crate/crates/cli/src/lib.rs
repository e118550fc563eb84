//! Library surface of the scenario runner, shared by the `blockade` binary
//! and the test suites.

pub mod csvout;
pub mod plot;
pub mod run;
pub mod scenario;
