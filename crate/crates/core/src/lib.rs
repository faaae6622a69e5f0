//! Steady states, full counting statistics and thermodynamic uncertainty of
//! a three-level maser driven between two thermal baths, and of its
//! classical rate-equation twin.

pub mod config;
pub mod error;
pub mod explorer;
pub mod fcs;
pub mod generator;
pub mod linalg;
pub mod output;
pub mod params;
pub mod pipeline;
pub mod qtur;
pub mod run;
pub mod steady;
pub mod tur;
pub mod verify;

pub use error::{Error, Result};
pub use generator::Model;
pub use params::{EngineParams, Param};
