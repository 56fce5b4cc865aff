//! One-dimensional bracketing searches used by the inner solver.

use crate::scalar::{geometric_mid, Scalar};

/// Smallest `x` in `[lo, hi]` with `pred(x)` true, for a predicate that is
/// false below some threshold and true above it. `pred(hi)` must hold.
///
/// Works in log space when the bracket is positive. The returned point
/// always satisfies the predicate.
pub fn bisect_threshold<T: Scalar>(
    mut pred: impl FnMut(T) -> bool,
    mut lo: T,
    mut hi: T,
    rel_tol: T,
    max_iter: usize,
) -> T {
    debug_assert!(pred(hi));
    if pred(lo) {
        return lo;
    }
    for _ in 0..max_iter {
        if hi - lo <= rel_tol * hi.abs() {
            break;
        }
        let mid = geometric_mid(lo, hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Root of a non-decreasing function on `[lo, hi]`: the smallest point
/// where `g >= 0`, or `lo` when `g(lo) >= 0`, or `hi` when `g` stays negative.
pub fn increasing_root<T: Scalar>(
    mut g: impl FnMut(T) -> T,
    lo: T,
    hi: T,
    rel_tol: T,
    max_iter: usize,
) -> T {
    if g(lo) >= T::zero() {
        return lo;
    }
    if g(hi) < T::zero() {
        return hi;
    }
    bisect_threshold(|x| g(x) >= T::zero(), lo, hi, rel_tol, max_iter)
}

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol * (hi - lo)` of the
/// original interval. Returns `(argmin, min)` over every evaluated point.
pub fn golden_section<T: Scalar>(
    mut f: impl FnMut(T) -> T,
    lo: T,
    hi: T,
    tol: T,
    max_iter: usize,
) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let width0 = hi - lo;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fd < fc { (d, fd) } else { (c, fc) };
    for _ in 0..max_iter {
        if b - a <= tol * width0 {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }
    best
}
