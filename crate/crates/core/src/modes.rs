//! Special functions and radial field primitives for Laguerre–Gauss modes.
//!
//! Fields are separable: radial samples on a quadrature rule times an
//! analytic `e^{i l φ}`. Azimuthal integrals are therefore Kronecker deltas
//! and never sampled.

mod field;
mod laguerre;
mod quadrature;

pub use field::{lg_field, lg_radial, mode_support_radius, overlap_conj, overlap_plain, ComplexRadialField, LgBasis, ModeIndex};
pub use laguerre::{laguerre, laguerre_zeros};
pub use quadrature::{make_quadrature, QuadratureRule, PANEL_ORDER};

pub(crate) use laguerre::laguerre_unchecked;
