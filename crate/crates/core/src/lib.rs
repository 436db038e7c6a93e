//! Symbolic and numeric computation of second heat-trace densities, scalar
//! curvature and Ricci density on noncommutative 2- and 3-tori.

pub mod cli;
pub mod coeff;
pub mod curvature;
pub mod error;
pub mod logk;
pub mod metric;
pub mod notation;
pub mod par;
pub mod quad;
pub mod rearrange;
pub mod reference;
pub mod reduce;
pub mod resolvent;
pub mod symbols;
pub mod verify;

pub use error::{Error, Result};
