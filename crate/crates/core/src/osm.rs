//! Perturbative states, relevant observables, the formal trace, the
//! projector `Π`, and the counterterm transformation.
//!
//! An order-`p` state carries, per branch `k`, one integrated weight pair
//! `(ρ_D, ρ_ND)` for each of its `p` internal systems. Tracing against a
//! relevant observable (non-diagonal on the external system, identity on the
//! internal ones) turns each internal system into the factor
//! `δ(0)·ρ_D + ρ_ND`, so the full trace is the `δ(0)` polynomial
//!
//! `Tr(ρ^{(p)} O) = Σ_k Σ_l γ_l^{(p,k)} [δ(0)]^l · T_k`,
//!
//! where `γ_l` is the mixed elementary-symmetric sum over choosing `l`
//! diagonal weights and `T_k` is the external trace of branch `k`. The
//! divergences live entirely in the `l ≥ 1` slots. They are removed either
//! by the projector (zero every `ρ_D`, a structural operation on the state)
//! or by the counterterm transformation (cancel every divergent slot of the
//! ledger); both leave the same finite value `γ_0`-weighted sum.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::laurent::{DivergenceSymbol, FormalSeries, LedgerError};

/// Subset-enumeration guard for [`brute_force_expand`].
pub const BRUTE_FORCE_MAX_FACTORS: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OsmError {
    #[error("internal factor list is empty")]
    EmptyFactorList,
    #[error("branch {branch} of an order-{order} state carries {got} internal factors")]
    FactorCountMismatch { branch: u32, order: u32, got: usize },
    #[error("duplicate branch index {0}")]
    DuplicateBranchIndex(u32),
    #[error("branch index {index} out of range for an order-{order} state")]
    BranchIndexOutOfRange { index: u32, order: u32 },
    #[error("non-finite weight in internal factor")]
    NonFiniteWeight,
    #[error("observable provides no external trace for branch index {0}")]
    MissingExternalTrace(u32),
    #[error("two states share perturbation order {0}")]
    DuplicateOrder(u32),
    #[error("brute-force expansion over {count} factors exceeds the 2^{BRUTE_FORCE_MAX_FACTORS} guard")]
    BruteForceTooLarge { count: usize },
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

/// The integrated diagonal/non-diagonal weights of one internal quantum
/// system: `ρ_D = ∫ρ_D(y) d⁴y`, `ρ_ND = ∫ρ_ND(y,y) d⁴y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InternalFactor {
    pub rho_d: Complex64,
    pub rho_nd: Complex64,
}

impl InternalFactor {
    pub fn new(rho_d: Complex64, rho_nd: Complex64) -> Self {
        InternalFactor { rho_d, rho_nd }
    }

    fn is_finite(&self) -> bool {
        self.rho_d.is_finite() && self.rho_nd.is_finite()
    }
}

/// One branch of a perturbative state: the external coefficient index `k`
/// and the internal factors of the `p` internal systems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub external_index: u32,
    pub factors: Vec<InternalFactor>,
}

/// An order-`p` perturbative state. Branch indices are distinct and below
/// `p`; each branch carries exactly `p` internal factors. States are plain
/// values: no normalization is imposed (the formal trace of the identity
/// diverges, so none is available).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbativeState {
    order: u32,
    branches: Vec<Branch>,
}

impl PerturbativeState {
    pub fn new(order: u32, branches: Vec<Branch>) -> Result<Self, OsmError> {
        let mut seen = std::collections::BTreeSet::new();
        for b in &branches {
            if b.external_index >= order {
                return Err(OsmError::BranchIndexOutOfRange {
                    index: b.external_index,
                    order,
                });
            }
            if !seen.insert(b.external_index) {
                return Err(OsmError::DuplicateBranchIndex(b.external_index));
            }
            if b.factors.len() != order as usize {
                return Err(OsmError::FactorCountMismatch {
                    branch: b.external_index,
                    order,
                    got: b.factors.len(),
                });
            }
            if !b.factors.iter().all(InternalFactor::is_finite) {
                return Err(OsmError::NonFiniteWeight);
            }
        }
        Ok(PerturbativeState { order, branches })
    }

    /// The free (order-0) state: no internal systems, no branches.
    pub fn free() -> Self {
        PerturbativeState {
            order: 0,
            branches: Vec::new(),
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// The projector `Π`: deletes the diagonal part of every internal
    /// system, leaving `ρ_ND` untouched. Idempotent by construction.
    pub fn project(&self) -> PerturbativeState {
        let branches = self
            .branches
            .iter()
            .map(|b| Branch {
                external_index: b.external_index,
                factors: b
                    .factors
                    .iter()
                    .map(|f| InternalFactor::new(Complex64::ZERO, f.rho_nd))
                    .collect(),
            })
            .collect();
        PerturbativeState {
            order: self.order,
            branches,
        }
    }
}

/// A relevant observable, reduced to what the formal trace consumes: the
/// numeric external traces `T_k = Tr(ρ_ext^{(k)} O_ext)` per branch index.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RelevantObservable {
    external_trace: BTreeMap<u32, Complex64>,
}

impl RelevantObservable {
    pub fn new(external_trace: impl IntoIterator<Item = (u32, Complex64)>) -> Result<Self, OsmError> {
        let external_trace: BTreeMap<u32, Complex64> = external_trace.into_iter().collect();
        if external_trace.values().any(|v| !v.is_finite()) {
            return Err(OsmError::NonFiniteWeight);
        }
        Ok(RelevantObservable { external_trace })
    }

    pub fn external_trace(&self, k: u32) -> Option<Complex64> {
        self.external_trace.get(&k).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.external_trace.iter().map(|(&k, &v)| (k, v))
    }
}

/// Expands `Π_i (δ(0)·ρ_D^(i) + ρ_ND^(i))` into its `δ(0)` polynomial.
///
/// The degree-`l` coefficient is the sum over the `C(p,l)` ways of taking
/// `l` diagonal weights; degree 0 is `Π ρ_ND` and degree `p` is `Π ρ_D`.
pub fn expand_internal_product(factors: &[InternalFactor]) -> Result<FormalSeries, OsmError> {
    if factors.is_empty() {
        return Err(OsmError::EmptyFactorList);
    }
    let mut coeffs = vec![Complex64::ONE];
    for f in factors {
        let mut next = vec![Complex64::ZERO; coeffs.len() + 1];
        for (l, c) in coeffs.iter().enumerate() {
            next[l] += c * f.rho_nd;
            next[l + 1] += c * f.rho_d;
        }
        coeffs = next;
    }
    Ok(FormalSeries::new(DivergenceSymbol::DeltaZero, 0, coeffs, None)?)
}

/// Independent oracle for [`expand_internal_product`]: enumerates all `2^p`
/// diagonal/non-diagonal choices directly. Rejected above
/// [`BRUTE_FORCE_MAX_FACTORS`] factors.
pub fn brute_force_expand(factors: &[InternalFactor]) -> Result<FormalSeries, OsmError> {
    if factors.is_empty() {
        return Err(OsmError::EmptyFactorList);
    }
    if factors.len() > BRUTE_FORCE_MAX_FACTORS {
        return Err(OsmError::BruteForceTooLarge {
            count: factors.len(),
        });
    }
    let p = factors.len();
    let mut coeffs = vec![Complex64::ZERO; p + 1];
    for mask in 0u32..(1u32 << p) {
        let mut term = Complex64::ONE;
        for (i, f) in factors.iter().enumerate() {
            term *= if mask & (1 << i) != 0 { f.rho_d } else { f.rho_nd };
        }
        coeffs[mask.count_ones() as usize] += term;
    }
    Ok(FormalSeries::new(DivergenceSymbol::DeltaZero, 0, coeffs, None)?)
}

/// The formal trace `Tr(ρ^{(p)} O_rel^{(p)})` as a `δ(0)` ledger: each
/// branch contributes its internal-product expansion scaled by the external
/// trace of its index.
pub fn trace_formal(
    state: &PerturbativeState,
    obs: &RelevantObservable,
) -> Result<FormalSeries, OsmError> {
    let mut total = FormalSeries::zero(DivergenceSymbol::DeltaZero);
    for b in &state.branches {
        let t = obs
            .external_trace(b.external_index)
            .ok_or(OsmError::MissingExternalTrace(b.external_index))?;
        let expanded = expand_internal_product(&b.factors)?;
        total = total.add(&expanded.scale(t))?;
    }
    Ok(total)
}

/// The complex weight `i^p / p!` attached to the order-`p` term of the
/// perturbation series.
pub fn perturbation_weight(p: u32) -> Complex64 {
    let factorial: f64 = (1..=p).map(|j| j as f64).product();
    Complex64::i().powu(p) / factorial
}

/// Weighted perturbation sum `Σ_p (i^p/p!) Tr(ρ^{(p)} O_rel^{(p)})` over
/// states of distinct orders.
pub fn series_trace(
    states: &[PerturbativeState],
    obs: &RelevantObservable,
) -> Result<FormalSeries, OsmError> {
    let mut seen = std::collections::BTreeSet::new();
    let mut total = FormalSeries::zero(DivergenceSymbol::DeltaZero);
    for s in states {
        if !seen.insert(s.order()) {
            return Err(OsmError::DuplicateOrder(s.order()));
        }
        let t = trace_formal(s, obs)?;
        total = total.add(&t.scale(perturbation_weight(s.order())))?;
    }
    Ok(total)
}

/// The counterterm transformation: choose `D̄_s = D_s` for every divergent
/// slot `s ≥ 1` so the subtraction cancels them all, and return the
/// surviving finite value `D̄₀`.
pub fn counterterm_transform(series: &FormalSeries) -> Complex64 {
    let counterterm = series.principal_part();
    series
        .sub(&counterterm)
        .expect("counterterm shares the ledger symbol")
        .finite_part()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn factor(d: f64, nd: f64) -> InternalFactor {
        InternalFactor::new(c(d, 0.0), c(nd, 0.0))
    }

    fn one_branch_state(p: u32, factors: Vec<InternalFactor>) -> PerturbativeState {
        PerturbativeState::new(
            p,
            vec![Branch {
                external_index: 0,
                factors,
            }],
        )
        .unwrap()
    }

    #[test]
    fn expand_two_factors_is_the_binomial_pattern() {
        let (a1, b1, a2, b2) = (c(1.0, 2.0), c(3.0, -1.0), c(-0.5, 0.25), c(2.0, 2.0));
        let s = expand_internal_product(&[
            InternalFactor::new(a1, b1),
            InternalFactor::new(a2, b2),
        ])
        .unwrap();
        assert!((s.coeff(0) - b1 * b2).norm() < 1e-14);
        assert!((s.coeff(1) - (a1 * b2 + a2 * b1)).norm() < 1e-14);
        assert!((s.coeff(2) - a1 * a2).norm() < 1e-14);
    }

    #[test]
    fn expand_without_diagonal_weights_is_constant() {
        let s = expand_internal_product(&[factor(0.0, 2.0), factor(0.0, 3.0)]).unwrap();
        assert_eq!(s.stored_max_order(), Some(0));
        assert_eq!(s.finite_part(), c(6.0, 0.0));
    }

    #[test]
    fn expand_matches_brute_force_on_a_p3_instance() {
        let factors = vec![
            InternalFactor::new(c(0.3, 0.7), c(-1.2, 0.4)),
            InternalFactor::new(c(-0.8, 0.1), c(0.5, -0.9)),
            InternalFactor::new(c(1.1, -0.2), c(0.05, 1.3)),
        ];
        let fast = expand_internal_product(&factors).unwrap();
        let slow = brute_force_expand(&factors).unwrap();
        assert!(fast.approx_eq_default(&slow));
    }

    #[test]
    fn brute_force_single_factor() {
        let s = brute_force_expand(&[factor(1.5, 2.5)]).unwrap();
        assert_eq!(s.coeff(0), c(2.5, 0.0));
        assert_eq!(s.coeff(1), c(1.5, 0.0));
    }

    #[test]
    fn empty_factor_lists_are_rejected() {
        assert_eq!(expand_internal_product(&[]), Err(OsmError::EmptyFactorList));
        assert_eq!(brute_force_expand(&[]), Err(OsmError::EmptyFactorList));
    }

    #[test]
    fn brute_force_cost_guard() {
        let factors = vec![factor(1.0, 1.0); 21];
        assert!(matches!(
            brute_force_expand(&factors),
            Err(OsmError::BruteForceTooLarge { count: 21 })
        ));
    }

    #[test]
    fn first_order_trace_shape() {
        let state = one_branch_state(1, vec![factor(0.25, 1.5)]);
        let obs = RelevantObservable::new([(0, c(2.0, 0.0))]).unwrap();
        let t = trace_formal(&state, &obs).unwrap();
        assert_eq!(t.coeff(0), c(3.0, 0.0));
        assert_eq!(t.coeff(1), c(0.5, 0.0));
        assert_eq!(t.divergence_degree(), 1);
    }

    #[test]
    fn trace_without_diagonal_parts_is_finite() {
        let state = one_branch_state(2, vec![factor(0.0, 1.5), factor(0.0, -2.0)]);
        let obs = RelevantObservable::new([(0, c(1.0, 0.0))]).unwrap();
        let t = trace_formal(&state, &obs).unwrap();
        assert_eq!(t.divergence_degree(), 0);
        assert_eq!(t.finite_part(), c(-3.0, 0.0));
    }

    #[test]
    fn two_branch_trace_matches_brute_force_per_branch() {
        let f0 = vec![factor(0.5, 1.0), factor(-0.25, 2.0)];
        let f1 = vec![factor(1.5, 0.5), factor(0.75, -1.0)];
        let state = PerturbativeState::new(
            2,
            vec![
                Branch {
                    external_index: 0,
                    factors: f0.clone(),
                },
                Branch {
                    external_index: 1,
                    factors: f1.clone(),
                },
            ],
        )
        .unwrap();
        let (t0, t1) = (c(2.0, 0.0), c(-1.0, 1.0));
        let obs = RelevantObservable::new([(0, t0), (1, t1)]).unwrap();
        let got = trace_formal(&state, &obs).unwrap();
        let want = brute_force_expand(&f0)
            .unwrap()
            .scale(t0)
            .add(&brute_force_expand(&f1).unwrap().scale(t1))
            .unwrap();
        assert!(got.approx_eq_default(&want));
    }

    #[test]
    fn missing_external_trace_is_an_error() {
        let state = one_branch_state(1, vec![factor(1.0, 1.0)]);
        let obs = RelevantObservable::new([]).unwrap();
        assert_eq!(
            trace_formal(&state, &obs),
            Err(OsmError::MissingExternalTrace(0))
        );
    }

    #[test]
    fn perturbation_weights() {
        assert_eq!(perturbation_weight(0), Complex64::ONE);
        assert_eq!(perturbation_weight(1), Complex64::i());
        assert!((perturbation_weight(2) - c(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn series_trace_weights_orders() {
        let s1 = one_branch_state(1, vec![factor(0.5, 2.0)]);
        let obs = RelevantObservable::new([(0, c(1.0, 0.0)), (1, c(3.0, 0.0))]).unwrap();
        let single = series_trace(std::slice::from_ref(&s1), &obs).unwrap();
        assert!(single.approx_eq_default(&trace_formal(&s1, &obs).unwrap().scale(Complex64::i())));

        // free state contributes nothing (its weight is 1, but it has no branch)
        let both = series_trace(&[PerturbativeState::free(), s1.clone()], &obs).unwrap();
        assert!(both.approx_eq_default(&single));

        // manual two-order sum
        let s2 = one_branch_state(2, vec![factor(1.0, 0.5), factor(-0.5, 1.5)]);
        let sum = series_trace(&[s1.clone(), s2.clone()], &obs).unwrap();
        let manual = trace_formal(&s1, &obs)
            .unwrap()
            .scale(perturbation_weight(1))
            .add(&trace_formal(&s2, &obs).unwrap().scale(perturbation_weight(2)))
            .unwrap();
        assert!(sum.approx_eq_default(&manual));
    }

    #[test]
    fn series_trace_rejects_duplicate_orders() {
        let s = one_branch_state(1, vec![factor(1.0, 1.0)]);
        let obs = RelevantObservable::new([(0, c(1.0, 0.0))]).unwrap();
        assert_eq!(
            series_trace(&[s.clone(), s.clone()], &obs),
            Err(OsmError::DuplicateOrder(1))
        );
    }

    #[test]
    fn projection_is_idempotent_and_annihilates_diagonals() {
        let state = one_branch_state(2, vec![factor(0.7, 1.0), factor(-0.3, 0.5)]);
        let projected = state.project();
        assert!(projected
            .branches()
            .iter()
            .all(|b| b.factors.iter().all(|f| f.rho_d == Complex64::ZERO)));
        assert_eq!(projected.project(), projected);

        // already projected states are fixed points
        let flat = one_branch_state(1, vec![factor(0.0, 2.0)]);
        assert_eq!(flat.project(), flat);
    }

    #[test]
    fn projected_trace_is_the_finite_slot() {
        let state = one_branch_state(1, vec![factor(0.25, 1.5)]);
        let obs = RelevantObservable::new([(0, c(2.0, 0.0))]).unwrap();
        let full = trace_formal(&state, &obs).unwrap();
        let projected = trace_formal(&state.project(), &obs).unwrap();
        assert_eq!(projected.divergence_degree(), 0);
        assert_eq!(projected.finite_part(), full.finite_part());
    }

    #[test]
    fn counterterm_transform_keeps_only_the_finite_slot() {
        let s = FormalSeries::from_terms(
            DivergenceSymbol::DeltaZero,
            &[(0, c(4.0, -1.0)), (1, c(2.0, 0.5))],
            None,
        )
        .unwrap();
        assert_eq!(counterterm_transform(&s), c(4.0, -1.0));

        let pure = FormalSeries::monomial(DivergenceSymbol::DeltaZero, 2, c(9.0, 0.0));
        assert_eq!(counterterm_transform(&pure), Complex64::ZERO);
    }

    #[test]
    fn counterterm_equals_projection_route() {
        let state = PerturbativeState::new(
            3,
            vec![
                Branch {
                    external_index: 0,
                    factors: vec![factor(0.9, 0.4), factor(-0.2, 1.1), factor(0.3, -0.6)],
                },
                Branch {
                    external_index: 2,
                    factors: vec![factor(-1.0, 0.8), factor(0.6, 0.2), factor(0.1, 0.9)],
                },
            ],
        )
        .unwrap();
        let obs =
            RelevantObservable::new([(0, c(1.5, 0.5)), (2, c(-0.75, 2.0))]).unwrap();
        let via_counterterm = counterterm_transform(&trace_formal(&state, &obs).unwrap());
        let via_projection = trace_formal(&state.project(), &obs).unwrap().finite_part();
        assert!((via_counterterm - via_projection).norm() < 1e-12);
    }

    #[test]
    fn state_invariants_are_enforced() {
        let bad_count = PerturbativeState::new(
            2,
            vec![Branch {
                external_index: 0,
                factors: vec![factor(1.0, 1.0)],
            }],
        );
        assert!(matches!(bad_count, Err(OsmError::FactorCountMismatch { .. })));

        let bad_index = PerturbativeState::new(
            1,
            vec![Branch {
                external_index: 1,
                factors: vec![factor(1.0, 1.0)],
            }],
        );
        assert!(matches!(
            bad_index,
            Err(OsmError::BranchIndexOutOfRange { .. })
        ));

        let dup = PerturbativeState::new(
            2,
            vec![
                Branch {
                    external_index: 0,
                    factors: vec![factor(1.0, 1.0); 2],
                },
                Branch {
                    external_index: 0,
                    factors: vec![factor(1.0, 1.0); 2],
                },
            ],
        );
        assert!(matches!(dup, Err(OsmError::DuplicateBranchIndex(0))));
    }
}
