//! Bracketing bisection and golden-section minimization.

use crate::error::{Error, Result};

/// Stopping rule for [`bisect`]: stop once the bracket is narrower than
/// `x_rel * max(|x|, x_abs_floor)` and `|f| <= f_abs` at the returned point,
/// or once the bracket cannot shrink in floating point.
#[derive(Clone, Copy, Debug)]
pub struct BisectTol {
    pub x_rel: f64,
    pub x_abs_floor: f64,
    pub f_abs: f64,
    pub max_iter: usize,
}

impl Default for BisectTol {
    fn default() -> Self {
        Self { x_rel: 1e-12, x_abs_floor: 1e-300, f_abs: f64::INFINITY, max_iter: 400 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket {
    /// Point where `f > 0`.
    pub lo: f64,
    /// Point where `f <= 0`.
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

impl Bracket {
    /// The endpoint with the smaller `|f|`.
    pub fn best(&self) -> f64 {
        if self.f_hi.abs() <= self.f_lo.abs() {
            self.hi
        } else {
            self.lo
        }
    }
}

/// Shrinks `[lo, hi]` with `f(lo) > 0 >= f(hi)` around the sign change.
/// The ordering of `lo` and `hi` is arbitrary.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, tol: &BisectTol) -> Result<Bracket>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    if !(f_lo > 0.0 && f_hi <= 0.0) {
        return Err(Error::Bracket(format!("no sign change: f({lo}) = {f_lo}, f({hi}) = {f_hi}")));
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..tol.max_iter {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let width = (hi - lo).abs();
        let scale = mid.abs().max(tol.x_abs_floor);
        if width <= tol.x_rel * scale && f_hi.abs().min(f_lo.abs()) <= tol.f_abs {
            break;
        }
        let fm = f(mid)?;
        if fm > 0.0 {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
            f_hi = fm;
        }
    }
    Ok(Bracket { lo, hi, f_lo, f_hi })
}

/// Solves `g(x) = 0` for increasing `g` with `g(0) < 0`, expanding the upper
/// end by doubling.
pub fn solve_increasing<F>(mut g: F, x_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut hi = 1.0;
    let mut expansions = 0;
    while g(hi) < 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 2000 {
            return Err(Error::Bracket("increasing function never becomes nonnegative".into()));
        }
    }
    let mut lo = 0.0;
    while hi - lo > x_tol * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for a minimum of `f` on `[a, b]`. Returns
/// `(x_min, f_min)`, including the endpoints as candidates.
pub fn golden_min<F>(mut f: F, a: f64, b: f64, iterations: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (a.min(b), a.max(b));
    let fa0 = f(a)?;
    let fb0 = f(b)?;
    let mut best = if fa0 <= fb0 { (a, fa0) } else { (b, fb0) };
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..iterations {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    for cand in [(x1, f1), (x2, f2)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    Ok(best)
}
