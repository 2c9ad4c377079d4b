//! Root finding. Every equation solved in this crate is monotone on its
//! bracket, so plain bisection is used throughout.

use crate::error::{Error, Result};

/// Default absolute tolerance on the root abscissa.
pub const DEFAULT_XTOL: f64 = 1e-9;
/// Default iteration cap; enough to exhaust f64 resolution on any bracket.
pub const DEFAULT_MAX_ITER: usize = 200;

/// Root located by [`bisect`], with the number of halvings it took.
#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub iterations: usize,
}

/// Bisection root finder on `[lo, hi]`.
///
/// `f(lo)` and `f(hi)` must have opposite signs. Infinite values are allowed
/// and keep their sign, which lets callers extend a partially defined
/// function past its domain edge (e.g. returning `+inf` where a capacity
/// constraint fails). NaN anywhere is an error.
///
/// Stops when the bracket is narrower than `xtol`, when an exact zero is hit,
/// or when the midpoint can no longer be distinguished from the endpoints.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, xtol: f64, max_iter: usize) -> Result<Root>
where
    F: Fn(f64) -> f64,
{
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::Numerics(format!("bad bracket [{lo}, {hi}]")));
    }
    let flo = f(lo);
    let fhi = f(hi);
    if flo.is_nan() || fhi.is_nan() {
        return Err(Error::Numerics(format!("NaN at bracket endpoint [{lo}, {hi}]")));
    }
    if flo == 0.0 {
        return Ok(Root { x: lo, iterations: 0 });
    }
    if fhi == 0.0 {
        return Ok(Root { x: hi, iterations: 0 });
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoBracket { lo, hi, flo, fhi });
    }

    let mut iterations = 0;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // f64 resolution exhausted
        }
        iterations += 1;
        let fmid = f(mid);
        if fmid.is_nan() {
            return Err(Error::Numerics(format!("NaN at x = {mid}")));
        }
        if fmid == 0.0 {
            return Ok(Root { x: mid, iterations });
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= xtol {
            break;
        }
    }
    Ok(Root {
        x: 0.5 * (lo + hi),
        iterations,
    })
}
