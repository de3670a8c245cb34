//! Special functions and adaptive quadrature.

mod bessel;
mod marcum;
mod quadrature;
mod special;

pub use bessel::{bessel_i0, bessel_i0e, bessel_j0, I0_MAX_ARG};
pub use marcum::{marcum_q1, marcum_q1_complement};
pub use quadrature::{integrate_finite, try_integrate, Integral, QuadratureSpec};
pub use special::{erf, erfc, gamma_cdf, gamma_pdf, gamma_sf};

pub(crate) use bessel::{i0e_unchecked, j0_unchecked};
pub(crate) use marcum::marcum_q1_pair;
pub(crate) use special::gamma_log_density_in_log;
