use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar used for probabilities and spreads.
pub trait Probability:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + FromStr + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant. Panics only for values the type cannot hold,
    /// which never happens for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("probability representable as f64")
    }
}

impl Probability for f32 {}
impl Probability for f64 {}

/// `1 - (1 - p)^beta`.
pub fn beta_boost<P: Probability>(p: P, beta: P) -> P {
    P::one() - (P::one() - p).powf(beta)
}
