//! Design and analysis toolkit for OAM (orbital angular momentum) radio
//! links: UCA vortex-beam far-field modeling, empirical divergence-angle
//! model fitting, single-focal and bifocal dielectric lens synthesis,
//! patch element sizing, and SNR / Shannon-capacity link budgets.

pub mod beam;
pub mod bifocal;
pub mod cli;
pub mod error;
pub mod lens;
pub mod link;
pub mod numerics;
pub mod patch;

pub use error::{Error, Result};
