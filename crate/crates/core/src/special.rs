//! Gamma pole expansions and digamma values for dimensional regularization.
//!
//! Dimensional regularization needs `Γ(1 − d/2)` near `d = 4`, i.e. the
//! Laurent expansion of `Γ` around its pole at −1. Around a non-positive
//! integer `−n` the expansion has the closed exponential form
//!
//! `Γ(−n + x) = ((−1)^n / n!) · (1/x) · exp( ψ(n+1)·x + Σ_{m≥2} [(−1)^m ζ(m) + H_{n,m}] x^m / m )`
//!
//! with `H_{n,m} = Σ_{j=1}^{n} j^{−m}`, so the residue is `(−1)^n / n!` and
//! the constant term for `n = 1` is `−ψ(2) = γ_E − 1`. A Lanczos evaluation
//! of `Γ` serves as the independent numeric oracle for these coefficients;
//! the expansion signs are fixed by that oracle, not by transcription.

use num_complex::Complex64;

use crate::laurent::{DivergenceSymbol, FormalSeries};

/// Euler–Mascheroni constant `γ_E`.
pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

// Lanczos g = 7, 9-term coefficient set (the GSL/Numerical Recipes values).
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function on the real line, Lanczos approximation with reflection
/// for arguments below 1/2. Relative accuracy ~1e-13 away from the poles;
/// returns infinity at non-positive integers.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        if x == x.floor() {
            return f64::INFINITY;
        }
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        return std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut t = LANCZOS[0];
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        t += p / (x + i as f64);
    }
    let w = x + 7.5;
    (2.0 * std::f64::consts::PI).sqrt() * w.powf(x + 0.5) * (-w).exp() * t
}

/// Digamma at a positive integer: `ψ(1) = −γ_E`, `ψ(k) = −γ_E + Σ_{j<k} 1/j`.
///
/// Panics if `k == 0`.
pub fn psi(k: u32) -> f64 {
    assert!(k >= 1, "digamma is requested at positive integers only");
    let harmonic: f64 = (1..k).map(|j| 1.0 / j as f64).sum();
    -EULER_MASCHERONI + harmonic
}

/// Riemann zeta at an integer `m ≥ 2`, by direct summation with an
/// Euler–Maclaurin tail. Accurate to well below 1e-14.
fn zeta(m: u32) -> f64 {
    assert!(m >= 2);
    let p = m as f64;
    let n = 400u32;
    let head: f64 = (1..=n).map(|j| (j as f64).powf(-p)).sum();
    let nf = n as f64;
    // ∫_N^∞ + boundary + B2, B4 corrections
    head + nf.powf(1.0 - p) / (p - 1.0) - 0.5 * nf.powf(-p)
        + p / 12.0 * nf.powf(-p - 1.0)
        - p * (p + 1.0) * (p + 2.0) / 720.0 * nf.powf(-p - 3.0)
}

/// Laurent expansion of `Γ` around one of its poles.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaExpansion {
    /// The pole sits at `−n ≤ 0`.
    pub pole_location: i32,
    /// Coefficients of `Γ(−n + x)` in the local variable `x`, from the
    /// simple pole at order −1 up to the truncation order. The series reuses
    /// the ε ledger as its formal carrier.
    pub series: FormalSeries,
}

/// Expands `Γ(−n + x)` around `x = 0` up to `x^truncation`.
///
/// The pole is simple with residue `(−1)^n / n!`.
pub fn gamma_expansion_at(n: u32, truncation: u32) -> GammaExpansion {
    // coefficient c_k multiplies x^(k−1); orders −1..=truncation
    let top = truncation as usize + 1;
    let mut e = vec![0.0f64; top + 1];
    e[1] = psi(n + 1);
    for m in 2..=top {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let h_nm: f64 = (1..=n).map(|j| (j as f64).powi(-(m as i32))).sum();
        e[m] = (sign * zeta(m as u32) + h_nm) / m as f64;
    }
    // exp of the exponent series: c_0 = 1, k c_k = Σ_m m e_m c_{k−m}
    let mut c = vec![0.0f64; top + 1];
    c[0] = 1.0;
    for k in 1..=top {
        let mut s = 0.0;
        for m in 1..=k {
            s += m as f64 * e[m] * c[k - m];
        }
        c[k] = s / k as f64;
    }
    let factorial: f64 = (1..=n).map(|j| j as f64).product();
    let front = if n % 2 == 0 { 1.0 } else { -1.0 } / factorial;
    let coeffs: Vec<Complex64> = c.iter().map(|&ck| Complex64::new(front * ck, 0.0)).collect();
    let series = FormalSeries::new(
        DivergenceSymbol::EpsilonInverse,
        -1,
        coeffs,
        Some(truncation as i32),
    )
    .expect("expansion respects its truncation");
    GammaExpansion {
        pole_location: -(n as i32),
        series,
    }
}

/// `Γ(1 − d/2)` as a series in `ε = d − 4`: the expansion of `Γ(−1 + x)`
/// composed with `x = −ε/2`, so the `1/ε` coefficient is 2 and the constant
/// term is `γ_E − 1 = −Ψ(2)`.
pub fn gamma_one_minus_half_d(truncation: u32) -> FormalSeries {
    let base = gamma_expansion_at(1, truncation);
    let terms: Vec<(i32, Complex64)> = base
        .series
        .terms()
        .map(|(o, c)| (o, c * (-0.5f64).powi(o)))
        .collect();
    FormalSeries::from_terms(
        DivergenceSymbol::EpsilonInverse,
        &terms,
        Some(truncation as i32),
    )
    .expect("substitution preserves orders")
}
