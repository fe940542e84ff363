//! Exact, verifiable computations with approximate groups.
//!
//! Every construction returns data together with the checks it passed, so
//! results can be re-verified by the plain set primitives in [`setops`].

pub mod catalogue;
pub mod cli;
pub mod context;
pub mod descriptor;
pub mod fourier;
pub mod error;
pub mod group;
pub mod gleason;
pub mod growth;
pub mod local;
pub mod metric;
pub mod nilprog;
pub mod report;
pub mod sanders;
pub mod set;
pub mod setops;

pub use context::Ctx;
pub use error::{Error, Result};
pub use group::{Elem, Group, Ring};
pub use set::ElementSet;
