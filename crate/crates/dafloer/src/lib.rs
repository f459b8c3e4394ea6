//! Exact F₂ engine for genus-2 bordered Floer DA bimodules of mapping
//! classes: box tensor, cancellation, Hochschild homology, and a cellular
//! model for the fixed point Floer side.

pub mod algebra;
pub mod bimodule;
pub mod calculus;
pub mod cli;
pub mod fpfloer;
pub mod hochschild;
pub mod mcg;
pub mod seeddata;
