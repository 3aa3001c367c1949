//! Closed-form elastostatic kernels.

pub mod dual;
mod kelvin;
mod mindlin;

pub use kelvin::{kelvin, kelvin_grad, kelvin_traction, traction_from_grad};
pub(crate) use kelvin::{kelvin_traction_unchecked, kelvin_unchecked};
pub use mindlin::{
    appendix_neumann, neumann, neumann_grad, neumann_traction, regular_grad, regular_part,
    regular_terms, regular_traction,
};
pub(crate) use mindlin::{add_tensors, regular_grad_signed};
