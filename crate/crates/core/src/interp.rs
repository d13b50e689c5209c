//! Four-point Lagrange interpolation on uniform samples.

/// Value and first derivative of the cubic through the four samples around `t`,
/// where `t` is a fractional index into `f`. Near the ends the stencil is
/// shifted inward; outside `[0, n-1]` the end cubic is extended.
pub fn cubic(f: &[f64], t: f64) -> (f64, f64) {
    let n = f.len();
    debug_assert!(n >= 4);
    let base = (t.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let s = t - base as f64;
    let (f0, f1, f2, f3) = (f[base], f[base + 1], f[base + 2], f[base + 3]);
    // Lagrange basis on nodes 0,1,2,3.
    let l0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
    let l1 = s * (s - 2.0) * (s - 3.0) / 2.0;
    let l2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
    let l3 = s * (s - 1.0) * (s - 2.0) / 6.0;
    let d0 = -(3.0 * s * s - 12.0 * s + 11.0) / 6.0;
    let d1 = (3.0 * s * s - 10.0 * s + 6.0) / 2.0;
    let d2 = -(3.0 * s * s - 8.0 * s + 3.0) / 2.0;
    let d3 = (3.0 * s * s - 6.0 * s + 2.0) / 6.0;
    (
        l0 * f0 + l1 * f1 + l2 * f2 + l3 * f3,
        d0 * f0 + d1 * f1 + d2 * f2 + d3 * f3,
    )
}

/// Periodic variant: the stencil wraps around.
pub fn cubic_periodic(f: &[f64], t: f64) -> f64 {
    let n = f.len() as isize;
    let i = t.floor() as isize;
    let s = t - i as f64;
    let at = |k: isize| f[k.rem_euclid(n) as usize];
    let (f0, f1, f2, f3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
    let u = s + 1.0;
    let l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
    let l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
    let l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
    let l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
    l0 * f0 + l1 * f1 + l2 * f2 + l3 * f3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics() {
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.1 * x * x * x;
        let dp = |x: f64| -2.0 + x - 0.3 * x * x;
        let f: Vec<f64> = (0..10).map(|i| p(i as f64)).collect();
        for &t in &[0.0, 0.3, 4.5, 8.99, 9.0] {
            let (v, d) = cubic(&f, t);
            assert!((v - p(t)).abs() < 1e-12, "{t}");
            assert!((d - dp(t)).abs() < 1e-12, "{t}");
        }
    }

    #[test]
    fn periodic_wraps() {
        let n = 64;
        let f: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * i as f64 / n as f64).sin())
            .collect();
        let v = cubic_periodic(&f, n as f64 - 0.5);
        let exact = (2.0 * std::f64::consts::PI * (n as f64 - 0.5) / n as f64).sin();
        assert!((v - exact).abs() < 1e-5);
    }
}
