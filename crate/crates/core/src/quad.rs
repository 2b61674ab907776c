//! Gauss-Legendre quadrature with an adaptive bisection driver.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the Legendre polynomial from the Chebyshev-based
/// initial guess; accurate to machine precision for the orders used here.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut rule = Vec::with_capacity(n);
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((-x, w));
    }
    // mirror to the positive half, sharing the midpoint for odd orders
    for i in (0..n - m).rev() {
        let (x, w) = rule[i];
        rule.push((-x, w));
    }
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed-order integration of `f` over `[lo, hi]`.
pub fn integrate_fixed<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, order: usize) -> f64 {
    let rule = gauss_legendre(order);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut total = 0.0;
    for &(x, w) in &rule {
        total += w * f(mid + half * x);
    }
    total * half
}

/// Adaptive bisection around a 15-point rule: a panel is accepted when
/// halving changes its value by less than the local tolerance share.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    abs_tol: f64,
    context: Option<&str>,
) -> Result<f64> {
    const ORDER: usize = 15;
    const MAX_DEPTH: u32 = 48;
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        lo: f64,
        hi: f64,
        whole: f64,
        rel_tol: f64,
        abs_tol: f64,
        depth: u32,
    ) -> std::result::Result<f64, (f64, f64)> {
        let mid = 0.5 * (lo + hi);
        let left = integrate_fixed(f, lo, mid, ORDER);
        let right = integrate_fixed(f, mid, hi, ORDER);
        let refined = left + right;
        let error = (refined - whole).abs();
        if error <= abs_tol + rel_tol * refined.abs() {
            return Ok(refined);
        }
        if depth >= MAX_DEPTH || mid <= lo || mid >= hi {
            return Err((lo, hi));
        }
        let half_abs = 0.5 * abs_tol;
        Ok(
            recurse(f, lo, mid, left, rel_tol, half_abs, depth + 1)?
                + recurse(f, mid, hi, right, rel_tol, half_abs, depth + 1)?,
        )
    }
    if lo >= hi {
        return Ok(0.0);
    }
    let whole = integrate_fixed(f, lo, hi, ORDER);
    recurse(f, lo, hi, whole, rel_tol, abs_tol, 0).map_err(|(l, h)| Error::QuadratureFailure {
        lo: l,
        hi: h,
        context: context.map(str::to_owned),
    })
}
