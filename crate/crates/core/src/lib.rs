//! Planning core for virtualised RAN deployments.

pub mod benders;
pub mod instance;
pub mod lp;
pub mod model;
pub mod net;
pub mod oracle;
pub mod scenario;
pub mod solve;

pub use instance::{Binaries, Choice, CostBreakdown, Instance, InstanceConfig, Solution, Split};
pub use model::{DelayMode, Force, ModelOptions};
pub use net::{PathSet, Topology};
pub use solve::{solve, Method, SolveOptions, SolveReport, SolveStatus};
