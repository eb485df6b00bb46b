//! Concrete sigma-regulated summand families: homogeneous-cavity closed
//! forms, open-guide energy kernels, and the integrated-stress summands.

mod enz;
mod homogeneous;
mod polyexp;
mod stress;

pub use enz::{i_pq, EnzAssembly, EnzEnergyFamily, IpqSpec};
pub use homogeneous::{CuboidFamily, CuboidQuadraticRegulator, Quantity};
pub use polyexp::{ExpLaurent, LaurentPoly, PolyExp};
pub use stress::{
    f_stress_enz, gauss_legendre_f64, stress_integrand, stress_mode_weight, StressFamily,
};
