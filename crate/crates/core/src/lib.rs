//! Fractional-order variational registration of diffusion tensor images.
//!
//! A velocity field `v(x, t)` on a box is regularised by the fractional
//! energy `int_0^tau |grad^alpha v|^2 dt`; its flow `h` warps a tensor image `T`
//! with finite-strain reorientation, and the misfit `|T<>h - D|^2` against a
//! target `D` completes the energy that [`optimize::register`] minimises.
//!
//! Modules:
//! - [`fields`]: grids, sampled fields, interpolation, boundary window, file I/O
//! - [`fraccalc`]: Riemann–Liouville derivatives and integrals, seminorms
//! - [`spd`]: SPD(3) algebra and tensor image warping
//! - [`flow`]: characteristic and Jacobian ODEs
//! - [`energy`]: velocity basis, Gram matrix, data term, gradient
//! - [`optimize`]: Armijo steepest descent
//! - [`verify`]: numerical checks of the identities the model relies on

pub mod energy;
pub mod error;
pub mod fields;
pub mod flow;
pub mod fraccalc;
pub mod linalg;
pub mod optimize;
pub mod spd;
pub mod synthetic;
pub mod verify;

pub use error::{Error, ErrorKind, Result};
