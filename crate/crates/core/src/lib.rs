//! Interpolating exclusion process between fast diffusion and porous-medium
//! dynamics on the discrete torus.

pub mod error;
pub mod exactgen;
pub mod genbinom;
pub mod harness;
pub mod kernels;
pub mod kmc;
pub mod lattice;
pub mod pde;
pub mod profile;

pub use error::{Error, Result};
pub use genbinom::{BinomialTable, TailMass};
pub use kernels::{EdgeRates, GapTable, RateKernel};
pub use kmc::{EmpiricalMeasure, RunOutput, SimState};
pub use lattice::{Configuration, GapPair, View};
pub use profile::Profile;
