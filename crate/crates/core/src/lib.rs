//! Density-matrix simulation of polarization decoherence caused by
//! frequency-dependent birefringence, and of its suppression by bang-bang
//! exchange control and decoherence-free two-photon encodings.
//!
//! - [`qmat`]: 2×2 / 4×4 complex matrices, density matrices, Hermitian eigen-solver.
//! - [`spectra`]: Gaussian and tabulated spectra with their coherence functions.
//! - [`onephoton`]: optical elements and multi-pass single-photon evolution.
//! - [`twophoton`]: frequency-anticorrelated pairs through crystals in both paths.
//! - [`measure`]: visibility, Stokes parameters, fidelity, counting and tomography.

pub mod error;
pub mod measure;
pub mod onephoton;
pub mod qmat;
pub mod quadrature;
pub mod spectra;
pub mod twophoton;

pub use error::{Error, Result};
pub use qmat::{DensityMatrix, Mat2, Mat4, Rho2, Rho4, C64};
pub use spectra::{Gaussian, Spectrum, Tabulated, SPEED_OF_LIGHT};
