//! Exact leading-order coefficients for joint moments of derivatives of
//! characteristic polynomials over Sp(2N), SO(2N) and O^-(2N), with symbolic
//! identity checks and a Haar Monte Carlo engine to validate them.

pub mod coefficients;
pub mod enumeration;
pub mod error;
pub mod exact;
pub mod oracle;
pub mod rmt;

pub use coefficients::{
    b_comb, b_det, b_ominus, coefficient, first_moment_closed_form, scaling_exponent, Backend,
    CoeffQuery, CoeffResult, Ensemble, FormulaTag,
};
pub use error::{Error, Result};
pub use exact::Rational;
