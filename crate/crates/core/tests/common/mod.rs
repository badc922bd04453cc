//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

/// First zeros `(z_u, z_v)` of the solution of `u'' = −|v|v`, `v'' = −sgn(u)√|u|` with
/// `u(0) = v(0) = 0`, `u'(0) = 1`, `v'(0) = b`, by RK4 with step `h` up to `x_max`.
/// A component that never vanishes reports `∞`.
fn first_zeros(b: f64, h: f64, x_max: f64) -> (f64, f64) {
    let rhs = |s: [f64; 4]| [s[1], -s[2].abs() * s[2], s[3], -s[0].signum() * s[0].abs().sqrt()];
    let add = |s: [f64; 4], k: [f64; 4], t: f64| [s[0] + t * k[0], s[1] + t * k[1], s[2] + t * k[2], s[3] + t * k[3]];
    let mut s = [0.0, 1.0, 0.0, b];
    let (mut zu, mut zv) = (f64::INFINITY, f64::INFINITY);
    let mut x = 0.0;
    while x < x_max && (zu.is_infinite() || zv.is_infinite()) {
        let k1 = rhs(s);
        let k2 = rhs(add(s, k1, h / 2.0));
        let k3 = rhs(add(s, k2, h / 2.0));
        let k4 = rhs(add(s, k3, h));
        let next: [f64; 4] = std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        if zu.is_infinite() && next[0] <= 0.0 {
            zu = x + h * s[0] / (s[0] - next[0]);
        }
        if zv.is_infinite() && next[2] <= 0.0 {
            zv = x + h * s[2] / (s[2] - next[2]);
        }
        s = next;
        x += h;
    }
    (zu, zv)
}

/// `λ*` of `−u'' = λ_1|v|v`, `−v'' = λ_2 √u` (α = (2, 1/2)) on `(0, 1)` with zero boundary data.
///
/// Shooting from `x = 0` with slopes `(1, b)`, the slope `b` is bisected until both components
/// vanish at the same point `z`; rescaling `(0, z)` to `(0, 1)` gives `Λ = (z², z²)` and
/// `λ* = H(Λ) = z² (z²)² = z⁶`.
pub fn shooting_lambda_star() -> f64 {
    let gap = |log_b: f64| {
        let (zu, zv) = first_zeros(log_b.exp(), 1e-4, 20.0);
        if zu.is_infinite() {
            1.0
        } else if zv.is_infinite() {
            -1.0
        } else {
            zu - zv
        }
    };
    let (mut lo, mut hi) = (-8.0f64, 8.0f64);
    assert!(gap(lo) > 0.0 && gap(hi) < 0.0, "shooting bracket does not straddle the root");
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (zu, zv) = first_zeros((0.5 * (lo + hi)).exp(), 1e-4, 20.0);
    (0.5 * (zu + zv)).powi(6)
}
