//! Simulation and analysis toolkit for CSI-free multi-antenna wireless
//! energy transfer over correlated Rician channels.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod error;
pub mod harvester;
pub mod montecarlo;
pub mod optimize;
pub mod quadrature;
pub mod rng;
pub mod scenario;
pub mod schemes;

pub use error::{Error, Result};
