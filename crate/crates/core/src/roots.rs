//! Bracketed bisection, shared by the strategy and calibration code.

/// Root of `f` on `[lo, hi]`, given that `f(lo)` and `f(hi)` have opposite
/// signs. Stops when the bracket is narrower than `x_tol` or cannot shrink
/// any further, and returns whichever end has the smaller `|f|`.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> f64 {
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo == 0.0 {
        return lo;
    }
    if f_hi == 0.0 {
        return hi;
    }
    debug_assert!(f_lo.signum() != f_hi.signum(), "no sign change on bracket");
    for _ in 0..2000 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi || hi - lo <= x_tol {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    if f_lo.abs() <= f_hi.abs() {
        lo
    } else {
        hi
    }
}

/// Boundary of a predicate that holds at `lo` and fails at `hi`.
pub(crate) fn bisect_boundary<P: Fn(f64) -> bool>(
    holds: P,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
) -> f64 {
    for _ in 0..2000 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi || hi - lo <= x_tol {
            break;
        }
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + 0.5 * (hi - lo)
}
