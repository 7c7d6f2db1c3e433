//! Simulation and estimation toolkit for the persistence of local times of
//! H-self-similar processes with stationary increments.
//!
//! The pipeline runs sample path → occupation-density local time →
//! inverse local time → marked point process of excursions, and estimates
//! `P(l(0, T] <= 1)` together with the distributional invariances it rests on.

pub mod error;
pub mod generators;
pub mod invariance;
pub mod localtime;
pub mod orchestration;
pub mod persistence;
pub mod pointprocess;

pub use error::{Error, Result};
