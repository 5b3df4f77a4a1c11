//! Manufactured solutions, initial data, error norms, a monolithic direct
//! oracle, stability checks and the convergence-study driver.

pub mod errors;
pub mod init;
pub mod manufactured;
pub mod oracle;
pub mod stability;
pub mod study;

pub use errors::{error_norms, ErrorReport};
pub use init::{elliptic_projection_init, InitialProjection};
pub use manufactured::{example1, example2, ManufacturedCase};
pub use oracle::{monolithic_oracle, OracleSolution};
pub use stability::{stability_monitor, summation_in_time, StabilityMonitor};
pub use study::{convergence_study, ConvergenceTable, MortarKind, StudyRow};
