//! Scaled-graph dominance analysis of MIMO LTI feedback systems.

pub mod analysis;
pub mod linalg;
pub mod lti;
pub mod principal;
pub mod ratpoly;
mod serde_float;
pub mod sgraph;
