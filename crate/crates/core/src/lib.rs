//! Classification, synthesis and simulation of locally checkable labelling
//! problems on directed cycles and oriented toroidal grids.

pub mod cycle;
pub mod error;
pub mod lcl;
pub mod sat;
pub mod sim;
pub mod synth;
pub mod tiles;

pub use error::{Error, Result};
