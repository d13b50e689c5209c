//! Emergent ("mock") quantum dynamics for classical systems on 1-D grids.

pub mod bohm;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod hamiltonian;
pub mod hydro;
pub mod interp;
pub mod io;
pub mod lv;
pub mod spectral;
pub mod stats;
pub mod stochastic;
pub mod variety;
pub mod wave;

pub use error::{Error, Result};
pub use grid::{Grid1D, MockPlanck};
pub use hamiltonian::HamiltonianSpec;
pub use wave::{from_madelung, normalize, to_madelung, MadelungFields, WaveFunction};
