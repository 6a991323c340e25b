//! Random walks on nilpotent covering graphs: quotient graphs with
//! group-valued voltages, modified harmonic realizations, and samplers for the
//! walk and its limiting diffusion.

pub mod cli;
pub mod error;
pub mod graph;
pub mod harmonic;
pub mod liegroup;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
