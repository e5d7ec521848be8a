//! Exact density thresholds of the form `(1 - a / 2^n) * 2^r`.

use crate::rational::Rational;

/// `(1 - a / 2^n) * 2^r` as an exact rational.
pub fn density_threshold(a: u64, n: u32, r: u32) -> Rational {
    Rational::one_minus_over_pow2(a, n) * Rational::pow2(r)
}

/// `size * 2^n` and `(2^n - a) * 2^r`, the two sides of the comparison
/// `size ? (1 - a/2^n) 2^r` scaled by `2^n`.
#[inline]
fn scaled(size: usize, a: u64, n: u32, r: u32) -> (i128, i128) {
    let lhs = (size as i128) << n;
    let rhs = ((1i128 << n) - a as i128) << r;
    (lhs, rhs)
}

/// `size > (1 - a/2^n) 2^r`
#[inline]
pub fn exceeds(size: usize, a: u64, n: u32, r: u32) -> bool {
    let (l, rr) = scaled(size, a, n, r);
    l > rr
}

/// `size >= (1 - a/2^n) 2^r`
#[inline]
pub fn reaches(size: usize, a: u64, n: u32, r: u32) -> bool {
    let (l, rr) = scaled(size, a, n, r);
    l >= rr
}

/// `size <= (1 - a/2^n) 2^r`
#[inline]
pub fn at_most(size: usize, a: u64, n: u32, r: u32) -> bool {
    !exceeds(size, a, n, r)
}

/// The density hypothesis shared by the structure theorem and its
/// corollaries: `|E| > (1 - 3/2^n) 2^r`.
#[inline]
pub fn dense_for_level(size: usize, n: u32, r: u32) -> bool {
    exceeds(size, 3, n, r)
}
