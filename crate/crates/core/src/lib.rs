//! Numerical toolkit for monotone Hopf-harmonic mappings between planar
//! Jordan domains.
//!
//! The crate is `no_std` with `alloc`. File formats and the command-line
//! front end live in the `hopfharm` companion crate.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod alternating;
pub mod gallery;
pub mod geometry;
pub mod harmonic;
pub mod hopf;
pub mod mesh;
pub mod quaddiff;
pub mod sum;

pub use num_complex::Complex64;

/// Points of the plane are complex numbers `x + iy`.
pub type Point2 = Complex64;

#[allow(unused_imports)]
pub(crate) mod prelude {
    pub use num_traits::Float;
}
