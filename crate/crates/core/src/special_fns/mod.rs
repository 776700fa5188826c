//! Special functions and numeric kernels.

pub mod erf;
pub mod inversion;
pub mod mittag_leffler;
pub mod pchip;
pub mod quadrature;

pub use erf::{erfc, erfcx, erfcx_gap, ln_erfcx};
pub use inversion::{laplace_invert, laplace_invert_damped, laplace_invert_shifted, InversionMethod, InversionSpec};
pub use mittag_leffler::{mittag_leffler, mittag_leffler_scaled};
pub use quadrature::{convolve, integrate, integrate_left_singular, integrate_to_infinity, QuadResult, QuadratureSpec};
pub use pchip::Pchip;
