//! Linear support vector machines trained through a QUBO encoding of the
//! Lagrangian dual.
//!
//! The pipeline is: load or generate a [`dataset::Dataset`], encode its dual
//! with [`qubo::build_qubo`], minimize the QUBO with a [`solver`], decode the
//! bits into multipliers and recover a classifier with
//! [`svm::recover_model`]. [`baseline`] provides a classical SMO trainer for
//! comparison and [`bench`] drives the accuracy and scaling experiments.

pub mod baseline;
pub mod bench;
pub mod dataset;
pub mod error;
pub mod gram;
pub mod qubo;
pub mod solver;
pub mod svm;

pub use error::{Error, Result};
