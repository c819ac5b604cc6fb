//! Scalar abstraction over the floating-point element type.
//!
//! All tensor, solver and instance arithmetic is generic over [`Scalar`],
//! implemented for `f32` and `f64`. Concrete aliases at the crate root pin
//! the default (`f64`) precision used by the CLI and the test suites.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps};

/// Real floating-point scalar for tensors and solvers.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumAssignOps
    + Sum
    + ndarray::LinalgScalar
    + ndarray::ScalarOperand
    + Display
    + LowerExp
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Lossless for `f64`; rounds to nearest for `f32`.
    fn from_real(x: f64) -> Self;

    fn to_real(self) -> f64;

    /// Parses the exact `Display` output back; `Display` for both `f32` and
    /// `f64` emits the shortest string that round-trips bit-exactly.
    fn parse_text(s: &str) -> Option<Self>;
}

impl Scalar for f64 {
    fn from_real(x: f64) -> Self {
        x
    }

    fn to_real(self) -> f64 {
        self
    }

    fn parse_text(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

impl Scalar for f32 {
    fn from_real(x: f64) -> Self {
        x as f32
    }

    fn to_real(self) -> f64 {
        f64::from(self)
    }

    fn parse_text(s: &str) -> Option<Self> {
        s.parse().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trips_exactly() {
        let xs = [0.1f64, -1.0 / 3.0, 2e-308, 1.0 + f64::EPSILON, -0.0];
        for x in xs {
            let s = format!("{x}");
            let y = f64::parse_text(&s).unwrap();
            assert_eq!(x.to_bits(), y.to_bits(), "{s}");
        }
        let xs = [0.1f32, -1.0 / 3.0, 1e-38, 1.0 + f32::EPSILON];
        for x in xs {
            let s = format!("{x}");
            let y = f32::parse_text(&s).unwrap();
            assert_eq!(x.to_bits(), y.to_bits(), "{s}");
        }
    }
}
