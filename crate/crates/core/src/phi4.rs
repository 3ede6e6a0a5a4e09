//! The `φ⁴` two-point pipeline: tadpole regularization, the first-order
//! reduced state, the γ-family consistency relations, self-energy
//! resummation, and the mass shift.
//!
//! Dimensional regularization of the one-loop tadpole gives
//!
//! `(μ²)^{−ε} ∫ d^d l/(2π)^d 1/(l² − m₀²)
//!     = m₀²/(4π)² · [ 2/ε + Ψ(2) − 2 ln(m₀²/(4πμ²)) + O(ε) ]`,
//!
//! so the first-order two-point correction carries one pole slot
//! `β₁ = 2m₀²/(4π)²` and one finite slot. Under the renaming
//! `[δ(0)] ↔ 1/ε`, the pole coefficient is the diagonal weight of an
//! order-1 perturbative state and the finite part is its non-diagonal
//! weight; projecting the state and counterterm-subtracting the ledger then
//! agree on the surviving finite value.
//!
//! Higher orders enter through a table of `β^{(j,s)}` series (the paper
//! fixes only their pole structure beyond first order); the pipeline is
//! exact given any table and ships with the first-order entry built in,
//! including the tadpole symmetry factor 12. Summing the finite parts with
//! weights `(iλ/4!)^j` gives the 1PI value `M²(0)`, the geometric resummation
//! `1/(q² − m₀² − M²(0))`, and the mass shift `m² = m₀² + M²(0)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::divcalc::DiagramShape;
use crate::laurent::{DivergenceSymbol, FormalSeries, LedgerError};
use crate::numeric::adaptive_simpson_partitioned;
use crate::osm::{Branch, InternalFactor, PerturbativeState};
use crate::special;

/// `(4π)²`.
const FOUR_PI_SQUARED: f64 = 157.91367041742973;

/// Symmetry factor of the first-order tadpole contraction.
pub const TADPOLE_SYMMETRY_FACTOR: f64 = 12.0;

/// Relative tolerance of the numeric external traces.
pub const TRACE_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Phi4Error {
    #[error("invalid config: field `{field}` {message}")]
    InvalidConfig {
        field: &'static str,
        message: String,
    },
    #[error("invalid source profile: field `{field}` {message}")]
    InvalidProfile {
        field: &'static str,
        message: String,
    },
    #[error("beta table entries must use the ε ledger, entry ({j},{s}) does not")]
    TableSymbol { j: u32, s: u32 },
    #[error("beta table order j must be at least 1, got ({j},{s})")]
    TableOrderZero { j: u32, s: u32 },
    #[error("beta table entry ({j},{s}) has pole order {pole}, above the {bound}-loop bound")]
    PoleBoundViolation { j: u32, s: u32, pole: u32, bound: u32 },
    #[error("beta table is missing entry ({j},{s}) needed at perturbation order {order}")]
    MissingTableEntry { j: u32, s: u32, order: u32 },
    #[error("resummation outside the geometric domain: |M²/(q²−m₀²)| = {ratio} ≥ 1")]
    ResummationOutsideDomain { ratio: f64 },
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

/// Bare parameters of the theory plus truncation knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryConfig {
    /// Bare mass `m₀` (energy units).
    pub m0: f64,
    /// Dimensionless coupling `λ`.
    pub lambda: f64,
    /// Mass scale `μ` keeping `λ` dimensionless away from `d = 4`.
    pub mu: f64,
    /// Perturbation truncation order `J`.
    pub order: u32,
    /// Truncation order of ε-ledgers produced by this config.
    #[serde(default = "default_eps_truncation")]
    pub eps_truncation: i32,
}

fn default_eps_truncation() -> i32 {
    2
}

impl TheoryConfig {
    pub fn new(m0: f64, lambda: f64, mu: f64, order: u32) -> Result<Self, Phi4Error> {
        let cfg = TheoryConfig {
            m0,
            lambda,
            mu,
            order,
            eps_truncation: default_eps_truncation(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Phi4Error> {
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Phi4Error::InvalidConfig {
                    field,
                    message: format!("must be positive and finite, got {v}"),
                })
            }
        };
        positive("m0", self.m0)?;
        positive("mu", self.mu)?;
        if !self.lambda.is_finite() {
            return Err(Phi4Error::InvalidConfig {
                field: "lambda",
                message: "must be finite".into(),
            });
        }
        if self.order < 1 {
            return Err(Phi4Error::InvalidConfig {
                field: "order",
                message: "perturbation order J must be at least 1".into(),
            });
        }
        if self.eps_truncation < 0 {
            return Err(Phi4Error::InvalidConfig {
                field: "eps_truncation",
                message: "must be non-negative".into(),
            });
        }
        Ok(())
    }

    /// The per-order coupling weight `(iλ/4!)^j`.
    pub fn coupling_weight(&self, j: u32) -> Complex64 {
        (Complex64::i() * self.lambda / 24.0).powu(j)
    }
}

/// Named radial source profile `f(q)` in Euclidean momentum, from
/// `f(q) = ∫ d⁴x₁ d⁴x₂ e^{−iq(x₁−x₂)} J(x₁) J(x₂)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceProfile {
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
}

impl SourceProfile {
    pub fn validate(&self) -> Result<(), Phi4Error> {
        match *self {
            SourceProfile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                if !(amplitude.is_finite() && amplitude >= 0.0) {
                    return Err(Phi4Error::InvalidProfile {
                        field: "amplitude",
                        message: format!("must be non-negative and finite, got {amplitude}"),
                    });
                }
                if !(center.is_finite() && center >= 0.0) {
                    return Err(Phi4Error::InvalidProfile {
                        field: "center",
                        message: format!("must be non-negative and finite, got {center}"),
                    });
                }
                if !(width.is_finite() && width > 0.0) {
                    return Err(Phi4Error::InvalidProfile {
                        field: "width",
                        message: format!(
                            "must be positive and finite for an integrable profile, got {width}"
                        ),
                    });
                }
                Ok(())
            }
        }
    }

    pub fn evaluate(&self, q: f64) -> f64 {
        match *self {
            SourceProfile::Gaussian {
                amplitude,
                center,
                width,
            } => amplitude * (-((q - center) / width).powi(2) / 2.0).exp(),
        }
    }

    /// Quadrature breakpoints pinning the profile support on `[0, ∞)`.
    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            SourceProfile::Gaussian { center, width, .. } => {
                let mut pts = vec![0.0, (center - 12.0 * width).max(0.0), center, center + 16.0 * width];
                pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                pts.dedup_by(|a, b| (*a - *b).abs() < f64::EPSILON);
                pts
            }
        }
    }
}

/// The regularized tadpole `(μ²)^{−ε} ∫ d^d l/(2π)^d (l² − m₀²)^{−1}` as an
/// ε ledger: pole coefficient `2m₀²/(4π)²`, finite part
/// `m₀²/(4π)²·[Ψ(2) − 2 ln(m₀²/(4πμ²))]`. Orders above the finite part are
/// not tracked and are zero in this ledger.
pub fn tadpole_series(cfg: &TheoryConfig) -> FormalSeries {
    let front = cfg.m0 * cfg.m0 / FOUR_PI_SQUARED;
    let log_arg = cfg.m0 * cfg.m0 / (4.0 * std::f64::consts::PI * cfg.mu * cfg.mu);
    let pole = Complex64::new(2.0 * front, 0.0);
    let finite = Complex64::new(front * (special::psi(2) - 2.0 * log_arg.ln()), 0.0);
    FormalSeries::from_terms(
        DivergenceSymbol::EpsilonInverse,
        &[(-1, pole), (0, finite)],
        Some(cfg.eps_truncation),
    )
    .expect("tadpole ledger is well-formed")
}

/// The order-1 reduced state of the two-point function. Under the renaming
/// `δ(0) ↔ 1/ε`, the tadpole pole coefficient is the diagonal weight and
/// the finite part the non-diagonal weight.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderReducedState {
    pub state: PerturbativeState,
    pub rho_d_weight: Complex64,
    pub rho_nd_weight: Complex64,
    /// Contraction multiplicity of the tadpole diagram; applied once, by
    /// the order-1 beta-table entry, never inside the state weights.
    pub symmetry_factor: f64,
}

pub fn first_order_reduced_state(cfg: &TheoryConfig) -> FirstOrderReducedState {
    let tadpole = tadpole_series(cfg);
    let rho_d_weight = tadpole.coeff(-1);
    let rho_nd_weight = tadpole.finite_part();
    let branches = if cfg.lambda == 0.0 {
        // free theory: no interaction branch at this order
        Vec::new()
    } else {
        vec![Branch {
            external_index: 0,
            factors: vec![InternalFactor::new(rho_d_weight, rho_nd_weight)],
        }]
    };
    FirstOrderReducedState {
        state: PerturbativeState::new(1, branches).expect("one well-formed branch"),
        rho_d_weight,
        rho_nd_weight,
        symmetry_factor: TADPOLE_SYMMETRY_FACTOR,
    }
}

/// Numeric external trace `Tr(ρ_ext^{(k)} O_ext) = ∫ d⁴q/(2π)⁴ f(q)/(q²−m₀²)^{1+k}`.
///
/// Wick rotation `q² → −q_E²` makes the integrand pole-free:
/// `(−1)^{1+k} (2π²)/(2π)⁴ ∫₀^∞ f(q) q³ (q² + m₀²)^{−(1+k)} dq`,
/// evaluated by adaptive quadrature at relative tolerance [`TRACE_REL_TOL`].
pub fn external_trace(k: u32, cfg: &TheoryConfig, src: &SourceProfile) -> Result<f64, Phi4Error> {
    src.validate()?;
    let m0sq = cfg.m0 * cfg.m0;
    let power = (1 + k) as i32;
    let integrand =
        move |q: f64| -> f64 { src.evaluate(q) * q.powi(3) / (q * q + m0sq).powi(power) };
    let radial = adaptive_simpson_partitioned(integrand, &src.breakpoints(), TRACE_REL_TOL * 0.1);
    let sign = if (1 + k) % 2 == 0 { 1.0 } else { -1.0 };
    // 4D solid angle over (2π)⁴: 2π²/(2π)⁴ = 1/(8π²)
    Ok(sign * radial / (8.0 * std::f64::consts::PI * std::f64::consts::PI))
}

/// Derives the family `γ₀^{(r+n, n)}` from the base `γ₀^{(r,0)}` so that
///
/// `Σ_r i^{r+n}/(r+n)! · γ₀^{(r+n,n)} = ( Σ_r i^r/r! · γ₀^{(r,0)} )^{n+1}`
///
/// holds order by order in the perturbation grading. The powers of `i`
/// cancel between the two sides, leaving the exponential generating
/// relation `γ₀^{(m,n)} = m! · [x^m] (Σ_r γ₀^{(r,0)} x^r / r!)^{n+1}`.
pub fn gamma_family(base: &[Complex64], n: u32) -> Vec<Complex64> {
    let r_max = base.len();
    if r_max == 0 {
        return Vec::new();
    }
    let deg = r_max + n as usize;
    // EGF coefficients of the base family, degree-indexed
    let mut egf = vec![Complex64::ZERO; deg + 1];
    let mut factorial = 1.0f64;
    for (r, &g) in base.iter().enumerate() {
        factorial *= (r + 1) as f64;
        egf[r + 1] = g / factorial;
    }
    // (n+1)-th power, truncated at `deg`
    let mut power = vec![Complex64::ZERO; deg + 1];
    power[0] = Complex64::ONE;
    for _ in 0..=n {
        let mut next = vec![Complex64::ZERO; deg + 1];
        for (i, &a) in power.iter().enumerate() {
            if a == Complex64::ZERO {
                continue;
            }
            for (j, &b) in egf.iter().enumerate().take(deg + 1 - i) {
                next[i + j] += a * b;
            }
        }
        power = next;
    }
    let mut out = Vec::with_capacity(r_max);
    let mut m_factorial: f64 = (1..=n as u64).map(|v| v as f64).product();
    for r in 1..=r_max {
        let m = r + n as usize;
        m_factorial *= m as f64;
        out.push(power[m] * m_factorial);
    }
    out
}

/// Truncated 1PI sum `M²(0) = Σ_{j=1}^{J} (iλ/4!)^j β̄₀^{(j,0)}` from the
/// finite parts `β̄₀^{(j,0)}` (symmetry factors included in the entries).
pub fn self_energy(cfg: &TheoryConfig, beta0_finite: &[Complex64]) -> Result<Complex64, Phi4Error> {
    let order = cfg.order;
    if (beta0_finite.len() as u32) < order {
        return Err(Phi4Error::MissingTableEntry {
            j: beta0_finite.len() as u32 + 1,
            s: 0,
            order,
        });
    }
    let mut m2 = Complex64::ZERO;
    for j in 1..=order {
        m2 += cfg.coupling_weight(j) * beta0_finite[(j - 1) as usize];
    }
    Ok(m2)
}

/// The resummed propagator `1/(q² − m₀² − M²)`, valid on the geometric
/// domain `|M²/(q² − m₀²)| < 1`.
pub fn resummed_propagator(q2: f64, cfg: &TheoryConfig, m2: Complex64) -> Result<Complex64, Phi4Error> {
    let denom0 = Complex64::new(q2 - cfg.m0 * cfg.m0, 0.0);
    let ratio = (m2 / denom0).norm();
    if !ratio.is_finite() || ratio >= 1.0 {
        return Err(Phi4Error::ResummationOutsideDomain { ratio });
    }
    Ok(Complex64::ONE / (denom0 - m2))
}

/// Partial sum `Σ_{n=0}^{N} [M²]ⁿ/(q²−m₀²)^{n+1}` of the geometric series
/// the resummation closes; converges to [`resummed_propagator`] on its
/// domain.
pub fn propagator_partial_sum(q2: f64, cfg: &TheoryConfig, m2: Complex64, terms: u32) -> Complex64 {
    let denom0 = Complex64::new(q2 - cfg.m0 * cfg.m0, 0.0);
    let mut acc = Complex64::ZERO;
    let mut factor = Complex64::ONE / denom0;
    for _ in 0..=terms {
        acc += factor;
        factor *= m2 / denom0;
    }
    acc
}

/// Table of `β^{(j,s)}` ε-ledgers: perturbation order `j ≥ 1`, external
/// propagator power `s` (the propagator enters as `(q²−m₀²)^{−(2+s)}`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BetaTable {
    entries: BTreeMap<(u32, u32), FormalSeries>,
}

impl BetaTable {
    pub fn new() -> Self {
        BetaTable::default()
    }

    /// The table the pipeline ships with: the first-order tadpole entry
    /// `β^{(1,0)} = 12 × tadpole_series`, symmetry factor included.
    pub fn first_order(cfg: &TheoryConfig) -> Self {
        let mut t = BetaTable::new();
        t.insert(
            1,
            0,
            tadpole_series(cfg).scale(Complex64::new(TADPOLE_SYMMETRY_FACTOR, 0.0)),
        )
        .expect("first-order entry satisfies the one-loop bound");
        t
    }

    /// Inserts an entry after checking the ledger symbol and the loop
    /// bound: the pole order at `(j,s)` may not exceed `L(4, j, 2) = j`.
    pub fn insert(&mut self, j: u32, s: u32, series: FormalSeries) -> Result<(), Phi4Error> {
        if j == 0 {
            return Err(Phi4Error::TableOrderZero { j, s });
        }
        if series.symbol() != DivergenceSymbol::EpsilonInverse {
            return Err(Phi4Error::TableSymbol { j, s });
        }
        let bound = DiagramShape::new(4, j, 2)
            .expect("φ⁴ shape")
            .loop_count()
            .expect("two-point parity holds");
        let pole = series.divergence_degree();
        if pole > bound {
            return Err(Phi4Error::PoleBoundViolation { j, s, pole, bound });
        }
        self.entries.insert((j, s), series);
        Ok(())
    }

    pub fn get(&self, j: u32, s: u32) -> Option<&FormalSeries> {
        self.entries.get(&(j, s))
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, u32, &FormalSeries)> {
        self.entries.iter().map(|(&(j, s), v)| (j, s, v))
    }

    /// External propagator powers with at least one entry.
    pub fn propagator_powers(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.entries.keys().map(|&(_, s)| s).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// How divergent slots are disposed of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubtractionMode {
    /// Keep only the finite slots (projection / counterterm route).
    Projected,
    /// Keep the full Laurent-valued expression.
    Formal,
}

/// `m² = m₀² + M²(0)`, either as the finite projected value or as the full
/// Laurent-valued shift including every `1/εⁿ` slot of the table.
#[derive(Debug, Clone, PartialEq)]
pub enum MassShift {
    Projected(Complex64),
    Formal(FormalSeries),
}

pub fn mass_shift(
    cfg: &TheoryConfig,
    table: &BetaTable,
    mode: SubtractionMode,
) -> Result<MassShift, Phi4Error> {
    let m0sq = Complex64::new(cfg.m0 * cfg.m0, 0.0);
    match mode {
        SubtractionMode::Projected => {
            let mut m2 = m0sq;
            for j in 1..=cfg.order {
                let entry = table.get(j, 0).ok_or(Phi4Error::MissingTableEntry {
                    j,
                    s: 0,
                    order: cfg.order,
                })?;
                m2 += cfg.coupling_weight(j) * entry.finite_part();
            }
            Ok(MassShift::Projected(m2))
        }
        SubtractionMode::Formal => {
            let mut total = FormalSeries::constant(DivergenceSymbol::EpsilonInverse, m0sq);
            for j in 1..=cfg.order {
                let entry = table.get(j, 0).ok_or(Phi4Error::MissingTableEntry {
                    j,
                    s: 0,
                    order: cfg.order,
                })?;
                total = total.add(&entry.scale(cfg.coupling_weight(j)))?;
            }
            Ok(MassShift::Formal(total))
        }
    }
}

/// The assembled two-point structure: per external propagator power `s`,
/// the combined ledger `Σ_j (iλ/4!)^j β^{(j,s)}`. The free propagator slot
/// `1/(q²−m₀²)` always carries coefficient 1 and is stored explicitly for
/// reports.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPointSeries {
    pub free_coefficient: Complex64,
    pub corrections: BTreeMap<u32, FormalSeries>,
}

pub fn two_point_series(cfg: &TheoryConfig, table: &BetaTable) -> Result<TwoPointSeries, Phi4Error> {
    let mut corrections: BTreeMap<u32, FormalSeries> = BTreeMap::new();
    for (j, s, series) in table.entries() {
        if j > cfg.order {
            continue;
        }
        let weighted = series.scale(cfg.coupling_weight(j));
        let slot = corrections
            .entry(s)
            .or_insert_with(|| FormalSeries::zero(DivergenceSymbol::EpsilonInverse));
        *slot = slot.add(&weighted)?;
    }
    Ok(TwoPointSeries {
        free_coefficient: Complex64::ONE,
        corrections,
    })
}
