//! The real scalar abstraction every numerical routine is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn count(k: usize) -> Self {
        Self::from_usize(k).expect("count representable")
    }

    /// A tolerance stated for `f64`, floored at a small multiple of machine
    /// epsilon so that the same call sites stay meaningful for `f32`.
    #[inline]
    fn tol(f64_value: f64) -> Self {
        Self::lit(f64_value).max(Self::lit(64.0) * Self::epsilon())
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`].
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cre<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

/// Deterministic pairwise summation.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    match values.len() {
        0 => T::zero(),
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// Deterministic pairwise summation of equal-length complex vectors.
pub fn pairwise_sum_vecs<T: Real>(values: &[Vec<C<T>>]) -> Vec<C<T>> {
    match values.len() {
        0 => Vec::new(),
        1 => values[0].clone(),
        n => {
            let (lo, hi) = values.split_at(n / 2);
            let mut a = pairwise_sum_vecs(lo);
            let b = pairwise_sum_vecs(hi);
            if a.is_empty() {
                return b;
            }
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        }
    }
}

/// Binomial coefficient.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
