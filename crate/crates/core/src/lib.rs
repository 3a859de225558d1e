//! Laminar duct-flow data generation, evolutionary symbolic regression over
//! expression trees with a Pareto archive, and a declarative filter that
//! keeps only physically plausible equations.

pub mod expr;
pub mod filterlang;
pub mod flowgen;
pub mod metrics;
pub mod sr;
