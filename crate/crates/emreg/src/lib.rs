//! Finite regularized values, with rigorous error bounds, for divergent
//! electromagnetic mode sums via the generalized Euler-Maclaurin scheme.
//!
//! The library covers two benchmark systems end to end:
//!
//! * a perfectly conducting cuboid filled with a homogeneous dielectric,
//!   whose regulated energy and integrated-stress sums have exact closed
//!   forms (the per-sector constants are -1/180 and -1/60), and
//! * an open waveguide filled with the epsilon-near-zero profile
//!   kappa(z) = kappa0 sech^2(z/a), which supports only evanescent modes;
//!   its regulated TE/TM energy constants are extracted both analytically
//!   (series constants of the kernel-integral combination) and numerically
//!   (double-double sampling of Gamma plus a Laurent-log least-squares fit),
//!   with the Euler-Maclaurin remainder bounded rigorously.
//!
//! Modules follow the pipeline: [`special`] (Bernoulli/zeta/kernel series),
//! [`calculus`] (quadrature and differentiation), [`euler_maclaurin`] (the
//! engine), [`spectra`] (eigenmodes), [`summands`] (the concrete families),
//! [`fit`] (coefficient extraction), and [`dos`] (mode counting).

pub mod calculus;
pub mod dd;
pub mod dos;
pub mod error;
pub mod euler_maclaurin;
pub mod fit;
pub mod jets;
pub mod scalar;
pub mod special;
pub mod spectra;
pub mod summands;

pub use error::{Error, Result};
