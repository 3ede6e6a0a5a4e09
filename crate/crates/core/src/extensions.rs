//! Worked examples beyond `φ⁴`: the second-order QED electron self-energy
//! and the first-order non-renormalizable `φ⁶` structure.
//!
//! The QED self-energy decomposes on the two-element spinor basis `{p̸, m}`,
//! so no Dirac algebra is needed: the diagonal (divergent) weight is
//! `ρ_D = (−p̸ + 4m)/(8π²)` and the non-diagonal weight is
//!
//! `ρ_ND = (e²/8π²) [ ½ p̸ (1+γ) + m (1+2γ)
//!         + ∫₀¹ dx (p̸(1−x) + 2m) · ln((p²x(1−x) + m²x)/(4πμ²)) ]`,
//!
//! with `γ` the Euler–Mascheroni constant. The Feynman-parameter integrand
//! has an integrable `ln x` endpoint singularity, handled by tanh-sinh
//! quadrature. `φ⁶` at first order carries two internal systems, hence a
//! `[δ(0)]²` slot: its ε image is the square of the one-loop factor, either
//! with the dimensionless constants `(4, 4Ψ(2), Ψ(2)²)` or as the square of
//! the full regularized tadpole with its mass and log factors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::laurent::{DivergenceSymbol, FormalSeries};
use crate::numeric::tanh_sinh;
use crate::osm::{self, InternalFactor, OsmError};
use crate::phi4::{tadpole_series, TheoryConfig};
use crate::special;

/// Default tanh-sinh node parameter for the Feynman-parameter integral.
pub const QED_QUADRATURE_NODES: usize = 300;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtensionsError {
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter {
        field: &'static str,
        message: String,
    },
    #[error(
        "log branch violation: p²x(1−x) + m²x ≤ 0 inside (0,1) for p² = {p2}, m = {m}; \
         evaluate in the region p² ≥ −m²"
    )]
    LogBranchViolation { p2: f64, m: f64 },
}

/// Coefficients of a spinor-valued quantity on the basis `{p̸, m}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinorDecomposition {
    pub coeff_pslash: Complex64,
    pub coeff_mass: Complex64,
}

/// Diagonal and non-diagonal weights of the order-2 QED electron
/// self-energy state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QedSelfEnergy {
    pub diagonal: SpinorDecomposition,
    pub non_diagonal: SpinorDecomposition,
}

/// Computes the QED self-energy weights at the stated node count; see
/// [`qed_self_energy`] for the default.
pub fn qed_self_energy_with_nodes(
    p2: f64,
    m: f64,
    mu: f64,
    e2: f64,
    nodes: usize,
) -> Result<QedSelfEnergy, ExtensionsError> {
    if !(m.is_finite() && m > 0.0) {
        return Err(ExtensionsError::InvalidParameter {
            field: "m",
            message: format!("must be positive and finite, got {m}"),
        });
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(ExtensionsError::InvalidParameter {
            field: "mu",
            message: format!("must be positive and finite, got {mu}"),
        });
    }
    if !p2.is_finite() || !e2.is_finite() {
        return Err(ExtensionsError::InvalidParameter {
            field: "p2/e2",
            message: "must be finite".into(),
        });
    }
    // arg(x) = x·(p²(1−x) + m²) stays positive on (0,1) iff p² + m² ≥ 0
    if p2 + m * m < 0.0 {
        return Err(ExtensionsError::LogBranchViolation { p2, m });
    }

    let eight_pi_sq = 8.0 * std::f64::consts::PI * std::f64::consts::PI;
    let diagonal = SpinorDecomposition {
        coeff_pslash: Complex64::new(-1.0 / eight_pi_sq, 0.0),
        coeff_mass: Complex64::new(4.0 / eight_pi_sq, 0.0),
    };

    let gamma_e = special::EULER_MASCHERONI;
    let scale = 4.0 * std::f64::consts::PI * mu * mu;
    let log_term = move |x: f64| ((p2 * x * (1.0 - x) + m * m * x) / scale).ln();
    let int_pslash = tanh_sinh(|x| (1.0 - x) * log_term(x), 0.0, 1.0, nodes);
    let int_flat = tanh_sinh(log_term, 0.0, 1.0, nodes);
    let prefactor = e2 / eight_pi_sq;
    let non_diagonal = SpinorDecomposition {
        coeff_pslash: Complex64::new(prefactor * (0.5 * (1.0 + gamma_e) + int_pslash), 0.0),
        coeff_mass: Complex64::new(prefactor * ((1.0 + 2.0 * gamma_e) + 2.0 * int_flat), 0.0),
    };
    Ok(QedSelfEnergy {
        diagonal,
        non_diagonal,
    })
}

/// The second-order QED electron self-energy split into its diagonal
/// (divergent) and non-diagonal (finite) spinor weights.
pub fn qed_self_energy(p2: f64, m: f64, mu: f64, e2: f64) -> Result<QedSelfEnergy, ExtensionsError> {
    qed_self_energy_with_nodes(p2, m, mu, e2, QED_QUADRATURE_NODES)
}

/// The QED trace ledger per spinor basis component:
/// `(ρ_D δ(0) + ρ_ND) · Tr(ρ_ext^{(2)} O_ext)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QedTrace {
    pub pslash: FormalSeries,
    pub mass: FormalSeries,
}

pub fn qed_trace(weights: &QedSelfEnergy, external_trace: Complex64) -> QedTrace {
    let component = |d: Complex64, nd: Complex64| {
        FormalSeries::from_terms(
            DivergenceSymbol::DeltaZero,
            &[(0, nd * external_trace), (1, d * external_trace)],
            None,
        )
        .expect("two fixed slots")
    };
    QedTrace {
        pslash: component(
            weights.diagonal.coeff_pslash,
            weights.non_diagonal.coeff_pslash,
        ),
        mass: component(weights.diagonal.coeff_mass, weights.non_diagonal.coeff_mass),
    }
}

/// Which ε image of the squared one-loop factor `φ⁶` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phi6Mode {
    /// The dimensionless constants `α₂ = 4`, `α₁ = 4Ψ(2)`, `α₀ = Ψ(2)²`
    /// of `(2/ε + Ψ(2))²`, mass and log factors dropped.
    PoleConstants,
    /// The square of the full regularized tadpole, including the
    /// `m₀²/(4π)²` and log factors.
    FullSquare,
}

/// First-order `φ⁶` two-point structure: a double pole, matching the two
/// loops of the single six-point vertex.
pub fn phi6_first_order(cfg: &TheoryConfig, mode: Phi6Mode) -> FormalSeries {
    match mode {
        Phi6Mode::PoleConstants => {
            let psi2 = special::psi(2);
            FormalSeries::from_terms(
                DivergenceSymbol::EpsilonInverse,
                &[
                    (-2, Complex64::new(4.0, 0.0)),
                    (-1, Complex64::new(4.0 * psi2, 0.0)),
                    (0, Complex64::new(psi2 * psi2, 0.0)),
                ],
                None,
            )
            .expect("fixed slots")
        }
        Phi6Mode::FullSquare => tadpole_series(cfg).pow(2),
    }
}

/// Formal trace and projection of the first-order `φ⁶` state: the two
/// internal factors expand to a degree-2 `δ(0)` polynomial; projection
/// keeps only `ρ_ND^{(1)} ρ_ND^{(2)}`.
pub fn phi6_trace_and_project(
    factors: &[InternalFactor; 2],
    external_trace: Complex64,
) -> Result<(FormalSeries, Complex64), OsmError> {
    let formal = osm::expand_internal_product(factors)?.scale(external_trace);
    let projected = factors[0].rho_nd * factors[1].rho_nd * external_trace;
    Ok((formal, projected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divcalc::DiagramShape;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn qed_diagonal_weights_are_fixed() {
        let se = qed_self_energy(-1.0, 1.0, 1.0, 0.3).unwrap();
        assert!((se.diagonal.coeff_pslash.re + 1.0 / (8.0 * PI * PI)).abs() < 1e-16);
        assert!((se.diagonal.coeff_mass.re - 4.0 / (8.0 * PI * PI)).abs() < 1e-16);
        assert_eq!(se.diagonal.coeff_pslash.im, 0.0);
    }

    #[test]
    fn qed_integrals_match_the_analytic_case() {
        // p² = −1, m = 1 collapses the log argument to x²/(4πμ²):
        //   ∫₀¹ (1−x) ln(x²/c) dx = −3/2 − ln(c)/2
        //   ∫₀¹ ln(x²/c) dx = −2 − ln(c)
        let (p2, m, mu, e2) = (-1.0, 1.0, 1.0, 1.0);
        let se = qed_self_energy(p2, m, mu, e2).unwrap();
        let c = (4.0 * PI * mu * mu).ln();
        let gamma_e = special::EULER_MASCHERONI;
        let pref = e2 / (8.0 * PI * PI);
        let want_pslash = pref * (0.5 * (1.0 + gamma_e) + (-1.5 - 0.5 * c));
        let want_mass = pref * ((1.0 + 2.0 * gamma_e) + 2.0 * (-2.0 - c));
        assert!((se.non_diagonal.coeff_pslash.re - want_pslash).abs() < 1e-12);
        assert!((se.non_diagonal.coeff_mass.re - want_mass).abs() < 1e-12);
    }

    #[test]
    fn qed_scale_dependence_is_the_log_shift() {
        // μ² → e·μ² moves each log by −1: Δ(pslash) = −½·pref, Δ(mass) = −2·pref
        let (p2, m, e2) = (0.5, 1.0, 0.09);
        let mu0 = 1.3;
        let mu1 = mu0 * 1.0f64.exp().sqrt(); // μ₁² = e·μ₀²
        let a = qed_self_energy(p2, m, mu0, e2).unwrap();
        let b = qed_self_energy(p2, m, mu1, e2).unwrap();
        let pref = e2 / (8.0 * PI * PI);
        assert!(
            ((b.non_diagonal.coeff_pslash - a.non_diagonal.coeff_pslash).re + 0.5 * pref).abs()
                < 1e-10
        );
        assert!(
            ((b.non_diagonal.coeff_mass - a.non_diagonal.coeff_mass).re + 2.0 * pref).abs()
                < 1e-10
        );
    }

    #[test]
    fn qed_quadrature_is_stable_under_refinement() {
        let coarse = qed_self_energy_with_nodes(-1.0, 1.0, 1.0, 1.0, 200).unwrap();
        let fine = qed_self_energy_with_nodes(-1.0, 1.0, 1.0, 1.0, 2000).unwrap();
        let rel = |a: Complex64, b: Complex64| ((a - b).norm()) / b.norm();
        assert!(rel(coarse.non_diagonal.coeff_pslash, fine.non_diagonal.coeff_pslash) < 1e-8);
        assert!(rel(coarse.non_diagonal.coeff_mass, fine.non_diagonal.coeff_mass) < 1e-8);
    }

    #[test]
    fn qed_rejects_the_bad_log_branch() {
        assert!(matches!(
            qed_self_energy(-4.0, 1.0, 1.0, 1.0),
            Err(ExtensionsError::LogBranchViolation { .. })
        ));
        assert!(qed_self_energy(-1.0, 1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn qed_trace_has_exactly_two_slots_and_projects_to_the_finite_one() {
        let se = qed_self_energy(0.25, 1.0, 2.0, 0.1).unwrap();
        let ext = Complex64::new(1.5, -0.5);
        let t = qed_trace(&se, ext);
        assert_eq!(t.pslash.divergence_degree(), 1);
        assert_eq!(t.mass.divergence_degree(), 1);
        assert!((t.pslash.finite_part() - se.non_diagonal.coeff_pslash * ext).norm() < 1e-15);
        assert!(
            (osm::counterterm_transform(&t.mass) - se.non_diagonal.coeff_mass * ext).norm()
                < 1e-15
        );

        // no diagonal part: finite-only ledger
        let flat = QedSelfEnergy {
            diagonal: SpinorDecomposition {
                coeff_pslash: Complex64::ZERO,
                coeff_mass: Complex64::ZERO,
            },
            non_diagonal: se.non_diagonal,
        };
        let t = qed_trace(&flat, ext);
        assert_eq!(t.pslash.divergence_degree(), 0);
        assert_eq!(t.mass.divergence_degree(), 0);
    }

    #[test]
    fn phi6_constants() {
        let cfg = TheoryConfig::new(1.0, 0.1, 1.0, 1).unwrap();
        let s = phi6_first_order(&cfg, Phi6Mode::PoleConstants);
        let psi2 = special::psi(2);
        assert!((s.coeff(-2).re - 4.0).abs() < 1e-15);
        assert!((s.coeff(-1).re - 4.0 * psi2).abs() < 1e-15);
        assert!((s.finite_part().re - psi2 * psi2).abs() < 1e-15);
        assert!((psi2 * psi2 - 0.178747).abs() < 1e-6);
    }

    #[test]
    fn phi6_full_square_is_the_tadpole_squared() {
        let cfg = TheoryConfig::new(0.8, 0.1, 1.2, 1).unwrap();
        let s = phi6_first_order(&cfg, Phi6Mode::FullSquare);
        assert_eq!(s, tadpole_series(&cfg).pow(2));
        let loops = DiagramShape::new(6, 1, 2).unwrap().loop_count().unwrap();
        assert_eq!(s.divergence_degree(), loops);
    }

    #[test]
    fn phi6_factor_pairs_reproduce_the_constants() {
        let psi2 = special::psi(2);
        let f = InternalFactor::new(Complex64::new(2.0, 0.0), Complex64::new(psi2, 0.0));
        let (formal, projected) = phi6_trace_and_project(&[f, f], Complex64::ONE).unwrap();
        assert!((formal.coeff(2).re - 4.0).abs() < 1e-15);
        assert!((formal.coeff(1).re - 4.0 * psi2).abs() < 1e-15);
        assert!((formal.coeff(0).re - psi2 * psi2).abs() < 1e-15);
        assert!((projected.re - psi2 * psi2).abs() < 1e-15);

        // the ε image of the formal trace is the pole-constants series
        let cfg = TheoryConfig::new(1.0, 0.1, 1.0, 1).unwrap();
        assert!(formal
            .rename_symbol()
            .approx_eq_default(&phi6_first_order(&cfg, Phi6Mode::PoleConstants)));
    }

    #[test]
    fn phi6_zero_diagonals_collapse_formal_to_projected() {
        let f1 = InternalFactor::new(Complex64::ZERO, Complex64::new(0.7, 0.2));
        let f2 = InternalFactor::new(Complex64::ZERO, Complex64::new(-1.1, 0.4));
        let ext = Complex64::new(2.0, 1.0);
        let (formal, projected) = phi6_trace_and_project(&[f1, f2], ext).unwrap();
        assert_eq!(formal.divergence_degree(), 0);
        assert!((formal.finite_part() - projected).norm() < 1e-15);
    }

    #[test]
    fn phi6_matches_brute_force() {
        let f1 = InternalFactor::new(Complex64::new(0.3, -0.9), Complex64::new(1.4, 0.2));
        let f2 = InternalFactor::new(Complex64::new(-0.6, 0.5), Complex64::new(0.1, -1.2));
        let ext = Complex64::new(0.8, 0.3);
        let (formal, _) = phi6_trace_and_project(&[f1, f2], ext).unwrap();
        let brute = osm::brute_force_expand(&[f1, f2]).unwrap().scale(ext);
        assert!(formal.approx_eq_default(&brute));
    }
}
