//! Exact linear algebra over `Z_D`.

mod howell;
mod matrix;
mod ring;

pub use howell::{element_order, howell_form, inverse, kernel, solve, span_intersection, span_membership, HowellForm};
pub(crate) use matrix::dot;
pub use matrix::{ModMatrix, ModVec};
pub use ring::{ext_gcd, factorize, gcd, is_prime, RingParams, DEFAULT_MODULUS_CAP};
