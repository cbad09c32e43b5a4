//! Root finding and quadrature kernels for the floating-point spaces.

use crate::error::{Error, Result};

/// Largest bracket end tried before giving up on `f(t) >= target`.
const MAX_BRACKET: f64 = 1e15;
const MAX_BISECTIONS: usize = 400;
const MAX_SIMPSON_DEPTH: u32 = 48;

/// Solve `f(a) = target` for a nondecreasing continuous `f` with `f(0) = 0 < target`.
///
/// The bracket starts at `[0, 1]` and doubles its right end until `f >= target`;
/// bisection then runs until the bracket width relative to its right end drops
/// below `rel_tol`. Returns the right end of the final bracket.
pub fn solve_increasing(f: impl Fn(f64) -> f64, target: f64, rel_tol: f64) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::Numerical(format!("target must be positive, got {target}")));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) < target {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_BRACKET {
            return Err(Error::Numerical(format!(
                "separation never reaches {target} before t = {MAX_BRACKET:e}"
            )));
        }
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= rel_tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_SIMPSON_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrate over consecutive panels split at `breaks`, sharing the tolerance by length.
pub fn adaptive_simpson_panels(f: &dyn Fn(f64) -> f64, breaks: &[f64], tol: f64) -> f64 {
    let total = breaks.last().unwrap_or(&0.0) - breaks.first().unwrap_or(&0.0);
    if total <= 0.0 {
        return 0.0;
    }
    breaks
        .windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], tol * (w[1] - w[0]) / total))
        .sum()
}

/// `∫_T^∞ (r + c) e^{-r} dr = (T + 1 + c) e^{-T}`.
pub fn linear_tail(horizon: f64, offset: f64) -> f64 {
    (horizon + 1.0 + offset) * (-horizon).exp()
}

/// Smallest horizon `T >= 40` (on a 1/4 grid) with `2 (T + 1 + c) e^{-T} < budget`.
///
/// Bounds the tail of `∫ f(r) e^{-r} dr` when `f(r) <= 2r + 2c`.
pub fn tail_horizon(budget: f64, offset: f64) -> f64 {
    let mut t = 40.0;
    while 2.0 * linear_tail(t, offset) >= budget {
        t += 0.25;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_linear_separation() {
        // f(t) = 2 t sin(θ/2), root of f = A is A / (2 sin(θ/2)).
        let theta: f64 = 1.1;
        let s = (0.5 * theta).sin();
        for big_a in [0.25, 1.0, 3.0, 40.0] {
            let a = solve_increasing(|t| 2.0 * t * s, big_a, 1e-13).unwrap();
            let oracle = big_a / (2.0 * s);
            assert!(((a - oracle) / oracle).abs() < 1e-12, "{a} vs {oracle}");
        }
    }

    #[test]
    fn solves_kinked_separation() {
        // Tree-style separation 2 max(0, t - b); root b + A/2.
        let a = solve_increasing(|t| 2.0 * (t - 3.0).max(0.0), 1.0, 1e-14).unwrap();
        assert!((a - 3.5).abs() < 1e-12);
    }

    #[test]
    fn unreachable_target_is_reported() {
        assert!(solve_increasing(|t| t.min(1.0), 2.0, 1e-10).is_err());
        assert!(solve_increasing(|t| t, 0.0, 1e-10).is_err());
    }

    #[test]
    fn simpson_matches_closed_forms() {
        // ∫_0^T r e^{-r} dr = 1 - (T + 1) e^{-T}
        let t = 40.0;
        let got = adaptive_simpson(&|r: f64| r * (-r).exp(), 0.0, t, 1e-13);
        let oracle = 1.0 - (t + 1.0) * (-t).exp();
        assert!((got - oracle).abs() < 1e-12);
        // kink at 2.5
        let got = adaptive_simpson(&|r: f64| 2.0 * (r - 2.5).max(0.0) * (-r).exp(), 0.0, 60.0, 1e-12);
        let oracle = 2.0 * (-2.5f64).exp();
        assert!((got - oracle).abs() < 1e-11, "{got} vs {oracle}");
    }

    #[test]
    fn horizon_meets_budget() {
        for tol in [1e-6, 1e-10, 1e-14, 1e-20] {
            let t = tail_horizon(tol / 2.0, 0.0);
            assert!(t >= 40.0);
            assert!(2.0 * linear_tail(t, 0.0) < tol / 2.0);
        }
        assert_eq!(tail_horizon(1e-10, 0.0), 40.0);
    }
}
