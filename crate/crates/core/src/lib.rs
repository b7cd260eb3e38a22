//! Directional UAV charging schedules for sensor nodes scattered in 3D.
//!
//! The planning pipeline synthesizes a small set of charging directions per
//! candidate position, solves a linear program for the charging times, and
//! orders the surviving positions into a closed flight tour.

pub mod baselines;
pub mod charge_time;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod lp;
pub mod oracle;
pub mod scenario;
pub mod schedule;
pub mod scheduler;
pub mod synthesis;
pub mod tour;

pub use error::{Error, Result};
pub use geometry::{ConeParams, Vec3};
pub use scenario::{Node, Scenario};
pub use schedule::{CtsItem, CtsSchedule, ItemState};
pub use synthesis::{cmfeds, NodeSet, PosDirPair};
