//! Numeric type used for swap scores.
//!
//! Routing only needs a small arithmetic surface (sums of integer-valued
//! terms, a few divisions, a max and a comparison), so the scorer is generic
//! over [`Score`]. `f64` is the production type; `f32` trades precision for
//! footprint; [`Exact`] evaluates the cost function without rounding and is
//! used to pin reference values.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Exact rational score.
pub type Exact = Ratio<i128>;

pub trait Score:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Send + Sync + 'static
{
    /// Whether two scores should be treated as a tie during selection.
    ///
    /// Floating-point types allow a small relative slack so that candidates
    /// whose exact costs coincide are not separated by summation order.
    fn ties(a: Self, b: Self) -> bool {
        a == b
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in score type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Score for f64 {
    fn ties(a: Self, b: Self) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
    }
}

impl Score for f32 {
    fn ties(a: Self, b: Self) -> bool {
        (a - b).abs() <= 1e-5 * a.abs().max(b.abs()).max(1.0)
    }
}

impl Score for Exact {}

/// Larger of two scores (`PartialOrd` only, so no `Ord::max`).
#[inline]
pub fn max<S: Score>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_decay_increment_is_one_thousandth() {
        let inc = Exact::from_f64(0.001).unwrap();
        assert_eq!(inc, Exact::new(1, 1000));
    }

    #[test]
    fn float_ties_are_relative() {
        assert!(f64::ties(1e6, 1e6 + 1e-4));
        assert!(!f64::ties(1.0, 1.0 + 1e-6));
        assert!(Exact::ties(Exact::new(1, 3), Exact::new(2, 6)));
    }
}
