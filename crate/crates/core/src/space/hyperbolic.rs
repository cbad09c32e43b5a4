//! The hyperbolic plane in polar coordinates about a fixed pole.
//!
//! Distances use the half-angle form of the hyperbolic law of cosines,
//! `sinh²(d/2) = sinh²((r₁-r₂)/2) + sinh r₁ sinh r₂ sin²(Δφ/2)`, evaluated in
//! log space once the radii get large so rays can be followed far out.
//! Off-pole geodesics go through the hyperboloid model.

use std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Polar {
    pub r: f64,
    pub phi: f64,
}

pub fn normalize_angle(phi: f64) -> f64 {
    let a = phi.rem_euclid(TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

impl Polar {
    pub fn new(r: f64, phi: f64) -> Self {
        Polar {
            r,
            phi: normalize_angle(phi),
        }
    }

    pub fn pole() -> Self {
        Polar { r: 0.0, phi: 0.0 }
    }

    pub(crate) fn to_hyperboloid(self) -> [f64; 3] {
        let s = self.r.sinh();
        [self.r.cosh(), s * self.phi.cos(), s * self.phi.sin()]
    }

    pub(crate) fn from_hyperboloid(x: [f64; 3]) -> Self {
        let rho = x[1].hypot(x[2]);
        let phi = if rho == 0.0 { 0.0 } else { x[2].atan2(x[1]) };
        Polar::new(rho.asinh(), phi)
    }
}

/// `ln(sinh x)` for `x > 0`, stable for large `x`.
fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

pub fn dist(p: Polar, q: Polar) -> f64 {
    let half_gap = 0.5 * (p.r - q.r);
    let half_angle = 0.5 * (p.phi - q.phi);
    let sin_half = half_angle.sin();
    if p.r.max(q.r) < 300.0 {
        let s = half_gap.sinh().powi(2) + p.r.sinh() * q.r.sinh() * sin_half * sin_half;
        return 2.0 * s.max(0.0).sqrt().asinh();
    }
    let radial = if half_gap == 0.0 {
        f64::NEG_INFINITY
    } else {
        2.0 * ln_sinh(half_gap.abs())
    };
    let angular = if sin_half == 0.0 || p.r == 0.0 || q.r == 0.0 {
        f64::NEG_INFINITY
    } else {
        ln_sinh(p.r) + ln_sinh(q.r) + 2.0 * sin_half.abs().ln()
    };
    let ln_s = log_add_exp(radial, angular);
    if ln_s == f64::NEG_INFINITY {
        return 0.0;
    }
    let half_ln = 0.5 * ln_s;
    if half_ln > 30.0 {
        // asinh(y) = ln(2y) + O(y⁻²)
        2.0 * (std::f64::consts::LN_2 + half_ln)
    } else {
        2.0 * half_ln.exp().asinh()
    }
}

fn minkowski(a: [f64; 3], b: [f64; 3]) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Point at distance `t` along the ray from `origin` towards the ideal point at angle `phi`.
pub fn ray_point(origin: Polar, phi: f64, t: f64) -> Polar {
    if origin.r == 0.0 {
        return Polar::new(t, phi);
    }
    let p = origin.to_hyperboloid();
    let w = [1.0, phi.cos(), phi.sin()];
    let c = -minkowski(p, w);
    let u = [w[0] / c - p[0], w[1] / c - p[1], w[2] / c - p[2]];
    let (ch, sh) = (t.cosh(), t.sinh());
    Polar::from_hyperboloid([
        ch * p[0] + sh * u[0],
        ch * p[1] + sh * u[1],
        ch * p[2] + sh * u[2],
    ])
}

/// Point at distance `s` (clamped to `d(origin, target)`) on the segment from `origin` to `target`.
pub fn segment_point(origin: Polar, target: Polar, s: f64) -> Polar {
    let d = dist(origin, target);
    if s >= d {
        return target;
    }
    if s <= 0.0 || d == 0.0 {
        return origin;
    }
    if origin.r == 0.0 {
        return Polar::new(s, target.phi);
    }
    let p = origin.to_hyperboloid();
    let q = target.to_hyperboloid();
    let (ch_d, sh_d) = (d.cosh(), d.sinh());
    let u = [
        (q[0] - ch_d * p[0]) / sh_d,
        (q[1] - ch_d * p[1]) / sh_d,
        (q[2] - ch_d * p[2]) / sh_d,
    ];
    let (ch, sh) = (s.cosh(), s.sinh());
    Polar::from_hyperboloid([
        ch * p[0] + sh * u[0],
        ch * p[1] + sh * u[1],
        ch * p[2] + sh * u[2],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn law_of_cosines(p: Polar, q: Polar) -> f64 {
        (p.r.cosh() * q.r.cosh() - p.r.sinh() * q.r.sinh() * (p.phi - q.phi).cos()).acosh()
    }

    #[test]
    fn matches_law_of_cosines() {
        let a = Polar::new(1.0, 0.0);
        let b = Polar::new(1.0, PI);
        let oracle = (1f64.cosh().powi(2) + 1f64.sinh().powi(2)).acosh();
        assert!((dist(a, b) - oracle).abs() < 1e-12);
        assert!((dist(a, b) - 2.0).abs() < 1e-12);
        for (p, q) in [
            (Polar::new(0.3, 0.2), Polar::new(2.1, 4.0)),
            (Polar::new(5.0, 1.0), Polar::new(4.0, 1.3)),
            (Polar::new(0.0, 0.0), Polar::new(3.0, 2.0)),
        ] {
            assert!((dist(p, q) - law_of_cosines(p, q)).abs() < 1e-9);
        }
    }

    #[test]
    fn large_radius_branch_is_continuous() {
        let p = Polar::new(299.999, 0.1);
        let q = Polar::new(299.999, 0.4);
        let p2 = Polar::new(300.001, 0.1);
        let q2 = Polar::new(300.001, 0.4);
        assert!((dist(p, q) + 0.004 - dist(p2, q2)).abs() < 1e-6);
        // Opposite rays from the pole separate at exactly twice the radius.
        let far = dist(Polar::new(1e6, 0.0), Polar::new(1e6, PI));
        assert!((far - 2e6).abs() < 1e-6 * 2e6);
    }

    #[test]
    fn off_pole_ray_is_unit_speed() {
        let o = Polar::new(0.7, 1.0);
        let phi = FRAC_PI_2 + 0.3;
        assert!(dist(ray_point(o, phi, 0.0), o) < 1e-12);
        for (s, t) in [(0.0, 1.0), (0.5, 2.5), (1.0, 4.0)] {
            let d = dist(ray_point(o, phi, s), ray_point(o, phi, t));
            assert!((d - (t - s)).abs() < 1e-9, "{d} vs {}", t - s);
        }
    }

    #[test]
    fn segment_reaches_target() {
        let o = Polar::new(0.5, 2.0);
        let z = Polar::new(1.5, 0.3);
        let d = dist(o, z);
        let mid = segment_point(o, z, 0.4 * d);
        assert!((dist(o, mid) - 0.4 * d).abs() < 1e-10);
        assert!((dist(mid, z) - 0.6 * d).abs() < 1e-10);
    }
}
