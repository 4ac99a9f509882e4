pub mod asa_log;
pub mod bodies;
pub mod convex_core;
pub mod entropy;
pub mod error;
pub mod legendre;
pub mod quadrature;
pub mod report;
pub mod sconcave;

pub use convex_core::{BoundingBox, ConvexFunction, DomainStatus, Jet, Oracle, QuadraticForm, SmoothConvexFamily};
pub use error::{Error, Result};
pub use quadrature::{IntegrationResult, IntegrationSpec, Method};
pub use report::{Comparison, Relation, ReportRow, Verdict};
