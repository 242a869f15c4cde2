use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Element type for feature vectors and hyperplanes.
///
/// Satisfied by `f32` and `f64` through the blanket impl. Simulated clock
/// values stay `f64` seconds regardless of the feature scalar.
pub trait Scalar:
    Float
    + FromPrimitive
    + Debug
    + Display
    + Default
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + Debug
        + Display
        + Default
        + Serialize
        + DeserializeOwned
        + Send
        + Sync
        + 'static
{
}

#[cfg(test)]
mod tests {
    use super::Scalar;

    fn mean<S: Scalar>(values: &[S]) -> S {
        let sum = values.iter().fold(S::zero(), |acc, x| acc + *x);
        sum / S::from_usize(values.len()).unwrap()
    }

    #[test]
    fn both_float_widths_satisfy_the_bound() {
        assert_eq!(mean::<f32>(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(mean::<f64>(&[1.0, 2.0, 3.0]), 2.0);
    }
}
