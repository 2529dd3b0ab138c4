//! Non-relativistic quantum models whose kinetic term carries a gradient
//! correction `a |psi'|^2` in the norm.
//!
//! The crate computes presence densities, stationary spectra, time evolution
//! with conservation-law diagnostics, transfer-matrix scattering, WKB
//! profiles and Dirac-equation cross-checks on a uniform 1-D lattice.
//! Units have `hbar = 1`.

pub mod analytic;
pub mod cli;
pub mod dirac;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod fit;
pub mod grid;
pub mod model;
pub mod norm;
pub mod operators;
pub mod output;
pub mod par;
pub mod potential;
pub mod scattering;
pub mod stencil;
pub mod tridiag;
pub mod wavefunction;
pub mod wkb;

pub use error::{Error, Result};
pub use grid::{Boundary, Grid1D};
pub use model::{ModelParams, Variant};
pub use norm::{bra_map, normalize, presence_density, sobolev_inner};
pub use potential::{Potential, Segment};
pub use stencil::laplacian;
pub use wavefunction::{Label, WaveFunction};
