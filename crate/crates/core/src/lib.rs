//! Guaranteed adaptive approximation for linear problems whose inputs lie
//! in cones of weighted series spaces.

pub mod approximation;
pub mod enumeration;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod inference;
pub mod spaces;
pub mod tractability;
pub mod weights;

pub use enumeration::{brute_force_order, WavenumberStream};
pub use error::{Error, Result};
pub use exec::Execution;
pub use weights::{zeta, Smoothness, WeightModel};
