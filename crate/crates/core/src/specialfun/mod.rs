//! Characteristic kernel integrals, their inverses, and the elliptic
//! integrals used by the p = 2 closed forms.

mod closed_form;
mod elliptic;
mod kernel;
mod quadrature;

pub use closed_form::{mass_integral_p2, norm_integral_p2, quarter_period_p2};
pub use elliptic::{elliptic_e1, elliptic_e2};
pub use kernel::{
    conjugate, invert_quarter_period, mass_integral, norm_integral, phi, quarter_period,
    KernelArgs, Kernels, WALL_MARGIN,
};
pub use quadrature::Quadrature;
