use crate::error::{Error, Result};

/// Bracketed scalar root finding by bisection.
///
/// Requires `f(lo) * f(hi) <= 0`; returns the bracket midpoint once the
/// bracket width is at most `tol`.
pub fn solve_scalar<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::Domain(format!("invalid bracket: lo={lo} hi={hi}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo * fhi > 0.0 || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Bracket { lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = flo;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket at floating point resolution
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if flo * fmid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for the maximizer of `f` on `[lo, hi]`.
/// Deterministic; assumes a single interior maximum.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
