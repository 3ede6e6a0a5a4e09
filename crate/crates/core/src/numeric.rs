//! Quadrature kernels for the numeric traces.
//!
//! Two rules cover every integral in the crate: adaptive Simpson for smooth
//! decaying radial integrands, and tanh-sinh (double-exponential) for finite
//! intervals with integrable endpoint singularities such as the `ln x`
//! behaviour of the Feynman-parameter integral. Both are deterministic:
//! fixed node sets and a fixed left-to-right reduction order.

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
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
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        return left + right + err / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    adapt(&f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Adaptive Simpson over a breakpoint partition, to a relative tolerance.
///
/// A coarse composite pass sets the absolute budget; each panel then gets a
/// share proportional to its length. Breakpoints let callers pin narrow
/// features the first coarse samples would miss.
pub fn adaptive_simpson_partitioned<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    rel_tol: f64,
) -> f64 {
    assert!(breakpoints.len() >= 2, "need at least one interval");
    let mut rough = 0.0;
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = 64;
        let h = (b - a) / n as f64;
        let mut s = 0.0;
        for i in 0..n {
            let x0 = a + i as f64 * h;
            s += simpson(f(x0), f(x0 + 0.5 * h), f(x0 + h), h);
        }
        rough += s;
    }
    let total_len = breakpoints.last().unwrap() - breakpoints[0];
    let budget = (rough.abs() * rel_tol).max(1e-300);
    let mut total = 0.0;
    for w in breakpoints.windows(2) {
        let tol = budget * (w[1] - w[0]) / total_len;
        total += adaptive_simpson(&f, w[0], w[1], tol);
    }
    total
}

/// Tanh-sinh quadrature on `[a, b]` with `2n + 1` nodes.
///
/// Nodes are `x(t) = midpoint ± r·tanh((π/2)·sinh t)` on a uniform `t` grid
/// over `[−4, 4]`. Endpoint distances are computed directly from
/// `e^{−2u}/(1 + e^{−2u})` so integrable singularities at `a` or `b` are
/// sampled stably rather than evaluated at the endpoint itself.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 4);
    let r = 0.5 * (b - a);
    let t_max = 4.0;
    let h = t_max / n as f64;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut sum = 0.0;
    for j in -(n as i64)..=(n as i64) {
        let t = j as f64 * h;
        let u = half_pi * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        // distance from the nearer endpoint: r·(1 − |tanh u|)
        let delta = 2.0 * r * e / (1.0 + e);
        if delta == 0.0 {
            continue;
        }
        let x = if t >= 0.0 { b - delta } else { a + delta };
        let weight = half_pi * t.cosh() / (half_pi * t.sinh()).cosh().powi(2);
        let v = f(x);
        if v.is_finite() {
            sum += v * weight;
        }
    }
    sum * r * h
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn simpson_integrates_sine() {
        let v = adaptive_simpson(f64::sin, 0.0, PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn partitioned_simpson_catches_narrow_peaks() {
        // Gaussian of width 1e-3 centered at 2 on [0, 10]
        let sigma = 1e-3;
        let f = |x: f64| (-((x - 2.0) / sigma).powi(2) / 2.0).exp();
        let exact = sigma * (2.0 * PI).sqrt();
        let v = adaptive_simpson_partitioned(f, &[0.0, 2.0 - 0.02, 2.0 + 0.02, 10.0], 1e-10);
        assert!((v / exact - 1.0).abs() < 1e-8);
    }

    #[test]
    fn tanh_sinh_handles_log_endpoint_singularity() {
        let v = tanh_sinh(|x: f64| x.ln(), 0.0, 1.0, 60);
        assert!((v + 1.0).abs() < 1e-13);
    }

    #[test]
    fn tanh_sinh_handles_inverse_sqrt_singularity() {
        let v = tanh_sinh(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 60);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_on_smooth_integrand() {
        let v = tanh_sinh(|x: f64| (-x * x).exp(), -6.0, 6.0, 120);
        assert!((v - PI.sqrt()).abs() < 1e-12);
    }
}
