//! Bracketed root finding for the monotone capacity equations.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Finds `x >= 0` with `f(x) = 0` for a non-decreasing `f` with `f(0) < 0`.
///
/// The upper end of the bracket starts at `initial_hi` and doubles until
/// `f` turns non-negative. Inside the bracket this runs the Illinois variant
/// of regula falsi, falling back to bisection whenever a step fails to halve
/// the bracket, and stops once the bracket is a few ulps wide.
pub(crate) fn solve_increasing(
    what: &str,
    mut f: impl FnMut(f64) -> f64,
    initial_hi: f64,
    max_iterations: usize,
) -> Result<Root> {
    let mut iterations = 0;
    let mut lo = 0.0;
    let mut f_lo = f(lo);
    iterations += 1;
    if f_lo >= 0.0 {
        return Ok(Root {
            x: 0.0,
            residual: f_lo,
            iterations,
        });
    }
    let mut hi = if initial_hi > 0.0 && initial_hi.is_finite() {
        initial_hi
    } else {
        1.0
    };
    let mut f_hi = f(hi);
    iterations += 1;
    while f_hi < 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NonConvergence {
                what: format!("{what}: bracket expansion"),
                iterations,
                residual: f_lo,
            });
        }
        f_hi = f(hi);
        iterations += 1;
    }

    // Scaled copies for the Illinois update; the true values stay in f_lo/f_hi.
    let (mut g_lo, mut g_hi) = (f_lo, f_hi);
    let mut last_side = 0i8;
    let mut slow_steps = 0;
    let mut steps = 0;
    while steps < max_iterations {
        if f_hi == 0.0 || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let width = hi - lo;
        let mut x = hi - g_hi * (hi - lo) / (g_hi - g_lo);
        if slow_steps >= 2 || !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
            slow_steps = 0;
        }
        if x <= lo || x >= hi {
            break;
        }
        let fx = f(x);
        iterations += 1;
        steps += 1;
        if fx < 0.0 {
            if last_side == -1 {
                g_hi *= 0.5;
            }
            lo = x;
            f_lo = fx;
            g_lo = fx;
            last_side = -1;
        } else {
            if last_side == 1 {
                g_lo *= 0.5;
            }
            hi = x;
            f_hi = fx;
            g_hi = fx;
            last_side = 1;
        }
        if hi - lo > 0.5 * width {
            slow_steps += 1;
        } else {
            slow_steps = 0;
        }
    }
    let (x, residual) = if f_hi.abs() <= f_lo.abs() {
        (hi, f_hi)
    } else {
        (lo, f_lo)
    };
    Ok(Root {
        x,
        residual,
        iterations,
    })
}
