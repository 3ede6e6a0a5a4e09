//! Truncated formal series in a single divergence symbol.
//!
//! Every divergent trace in this crate is bookkept as
//!
//! `s = Σ_n c_n · σ^n`,   `σ ∈ {1/ε, δ(0)}`,
//!
//! with integer orders `n` running from `min_order` up to at most
//! `truncation_order`. Orders above the truncation are *unknown* (an `O(σ^t)`
//! remainder), not zero; a truncation of `None` marks an exact polynomial,
//! which is what the internal-product expansions produce. For the `1/ε`
//! ledger, negative orders are the poles (`1/ε` itself is order −1); for the
//! `δ(0)` ledger the divergences sit at positive orders.
//!
//! The two ledgers are linked by the formal renaming `[δ(0)]^n ↔ ε^{-n}`,
//! implemented by [`FormalSeries::rename_symbol`]. The renaming is pure
//! bookkeeping — no limit is taken and no meaning is assigned to `δ(0)`
//! beyond its slot in the ledger.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::DEFAULT_TOLERANCE;

/// The formal symbol a series is expanded in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceSymbol {
    /// `ε = d − 4` of dimensional regularization; poles are negative orders.
    EpsilonInverse,
    /// The formal trace constant `δ(0)`; divergences are positive orders.
    DeltaZero,
}

impl DivergenceSymbol {
    fn token(self) -> &'static str {
        match self {
            DivergenceSymbol::EpsilonInverse => "ε",
            DivergenceSymbol::DeltaZero => "δ(0)",
        }
    }
}

/// Errors from ledger arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LedgerError {
    /// Two series in different symbols cannot be combined: the ledgers are
    /// incompatible until one side is renamed.
    #[error("incompatible ledgers: cannot combine a series in {left:?} with one in {right:?}")]
    SymbolMismatch {
        left: DivergenceSymbol,
        right: DivergenceSymbol,
    },
    /// A stored coefficient sits above the declared truncation order.
    #[error("coefficient at order {max_order} exceeds truncation order {truncation}")]
    TruncationBelowOrder { max_order: i32, truncation: i32 },
}

/// A truncated Laurent-style series in one divergence symbol, with complex
/// coefficients.
///
/// The zero series is canonically stored with an empty coefficient list and
/// `min_order = 0`; after normalization the leading (lowest-order) stored
/// coefficient is nonzero. Values are immutable: all operations return new
/// series.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalSeries {
    symbol: DivergenceSymbol,
    min_order: i32,
    /// Coefficient of `σ^(min_order + i)` at index `i`.
    coeffs: Vec<Complex64>,
    /// Orders strictly above this are unknown; `None` means exact.
    truncation: Option<i32>,
}

fn min_trunc(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

impl FormalSeries {
    /// Builds a series from contiguous coefficients starting at `min_order`.
    pub fn new(
        symbol: DivergenceSymbol,
        min_order: i32,
        coeffs: Vec<Complex64>,
        truncation: Option<i32>,
    ) -> Result<Self, LedgerError> {
        let mut s = FormalSeries {
            symbol,
            min_order,
            coeffs,
            truncation,
        };
        s.normalize();
        if let (Some(t), Some(max)) = (s.truncation, s.stored_max_order()) {
            if max > t {
                return Err(LedgerError::TruncationBelowOrder {
                    max_order: max,
                    truncation: t,
                });
            }
        }
        Ok(s)
    }

    /// Builds a series from sparse `(order, coefficient)` terms.
    pub fn from_terms(
        symbol: DivergenceSymbol,
        terms: &[(i32, Complex64)],
        truncation: Option<i32>,
    ) -> Result<Self, LedgerError> {
        if terms.is_empty() {
            return FormalSeries::new(symbol, 0, Vec::new(), truncation);
        }
        let min = terms.iter().map(|&(o, _)| o).min().unwrap();
        let max = terms.iter().map(|&(o, _)| o).max().unwrap();
        let mut coeffs = vec![Complex64::ZERO; (max - min + 1) as usize];
        for &(o, c) in terms {
            coeffs[(o - min) as usize] += c;
        }
        FormalSeries::new(symbol, min, coeffs, truncation)
    }

    /// The exact zero series.
    pub fn zero(symbol: DivergenceSymbol) -> Self {
        FormalSeries {
            symbol,
            min_order: 0,
            coeffs: Vec::new(),
            truncation: None,
        }
    }

    /// The exact constant one.
    pub fn one(symbol: DivergenceSymbol) -> Self {
        Self::constant(symbol, Complex64::ONE)
    }

    /// An exact constant series.
    pub fn constant(symbol: DivergenceSymbol, c: Complex64) -> Self {
        Self::monomial(symbol, 0, c)
    }

    /// The exact single term `c · σ^order`.
    pub fn monomial(symbol: DivergenceSymbol, order: i32, c: Complex64) -> Self {
        let mut s = FormalSeries {
            symbol,
            min_order: order,
            coeffs: vec![c],
            truncation: None,
        };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        while let Some(last) = self.coeffs.last() {
            if *last == Complex64::ZERO {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        let lead = self.coeffs.iter().take_while(|c| **c == Complex64::ZERO).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.min_order += lead as i32;
        }
        if self.coeffs.is_empty() {
            self.min_order = 0;
        }
    }

    pub fn symbol(&self) -> DivergenceSymbol {
        self.symbol
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest stored order; 0 for the zero series.
    pub fn min_order(&self) -> i32 {
        self.min_order
    }

    /// Highest stored (nonzero) order, if any.
    pub fn stored_max_order(&self) -> Option<i32> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.min_order + self.coeffs.len() as i32 - 1)
        }
    }

    /// Order above which coefficients are unknown; `None` for exact series.
    pub fn truncation_order(&self) -> Option<i32> {
        self.truncation
    }

    /// Lowest order at which a nonzero coefficient could sit: the stored
    /// minimum, or just above the truncation for a truncated zero. `None`
    /// for the exact zero, which has no possible order at all.
    fn effective_min_order(&self) -> Option<i32> {
        if self.coeffs.is_empty() {
            self.truncation.map(|t| t + 1)
        } else {
            Some(self.min_order)
        }
    }

    /// Coefficient at `order` (zero when absent).
    pub fn coeff(&self, order: i32) -> Complex64 {
        let idx = order - self.min_order;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::ZERO
        } else {
            self.coeffs[idx as usize]
        }
    }

    /// Iterator over stored `(order, coefficient)` pairs, zeros skipped.
    pub fn terms(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::ZERO)
            .map(|(i, &c)| (self.min_order + i as i32, c))
    }

    /// Order of the divergence: pole order for `1/ε`, `δ(0)` degree for the
    /// formal trace. Zero when the series has no divergent slot.
    pub fn divergence_degree(&self) -> u32 {
        match self.symbol {
            DivergenceSymbol::EpsilonInverse => {
                if self.min_order < 0 {
                    (-self.min_order) as u32
                } else {
                    0
                }
            }
            DivergenceSymbol::DeltaZero => match self.stored_max_order() {
                Some(m) if m > 0 => m as u32,
                _ => 0,
            },
        }
    }

    fn check_symbol(&self, other: &FormalSeries) -> Result<(), LedgerError> {
        if self.symbol != other.symbol {
            Err(LedgerError::SymbolMismatch {
                left: self.symbol,
                right: other.symbol,
            })
        } else {
            Ok(())
        }
    }

    /// Coefficient-wise sum. The result is truncated at the coarser of the
    /// two truncations; known coefficients above it are dropped, never
    /// promoted.
    pub fn add(&self, other: &FormalSeries) -> Result<FormalSeries, LedgerError> {
        self.check_symbol(other)?;
        let truncation = min_trunc(self.truncation, other.truncation);
        let keep = |o: i32| truncation.is_none_or(|t| o <= t);
        let mut terms: Vec<(i32, Complex64)> = Vec::new();
        for (o, c) in self.terms().chain(other.terms()) {
            if keep(o) {
                terms.push((o, c));
            }
        }
        FormalSeries::from_terms(self.symbol, &terms, truncation)
    }

    pub fn neg(&self) -> FormalSeries {
        self.scale(-Complex64::ONE)
    }

    pub fn sub(&self, other: &FormalSeries) -> Result<FormalSeries, LedgerError> {
        self.add(&other.neg())
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: Complex64) -> FormalSeries {
        let mut s = FormalSeries {
            symbol: self.symbol,
            min_order: self.min_order,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            truncation: self.truncation,
        };
        s.normalize();
        s
    }

    /// Cauchy product. The product of a series known up to `t_a` with one
    /// whose lowest possible term is `σ^{m_b}` is known only up to
    /// `t_a + m_b`, so the result is truncated at `min(t_a + m_b, t_b + m_a)`
    /// (no bound at all from a factor that is exactly zero).
    pub fn mul(&self, other: &FormalSeries) -> Result<FormalSeries, LedgerError> {
        self.check_symbol(other)?;
        let bound = |t: Option<i32>, m: Option<i32>| match (t, m) {
            (Some(t), Some(m)) => Some(t + m),
            _ => None,
        };
        let truncation = min_trunc(
            bound(self.truncation, other.effective_min_order()),
            bound(other.truncation, self.effective_min_order()),
        );
        if self.is_zero() || other.is_zero() {
            let mut z = FormalSeries::zero(self.symbol);
            z.truncation = truncation;
            return Ok(z);
        }
        let min = self.min_order + other.min_order;
        let full_max = self.stored_max_order().unwrap() + other.stored_max_order().unwrap();
        let max = truncation.map_or(full_max, |t| full_max.min(t));
        if max < min {
            let mut z = FormalSeries::zero(self.symbol);
            z.truncation = truncation;
            return Ok(z);
        }
        let mut coeffs = vec![Complex64::ZERO; (max - min + 1) as usize];
        for (oa, ca) in self.terms() {
            for (ob, cb) in other.terms() {
                let o = oa + ob;
                if o <= max {
                    coeffs[(o - min) as usize] += ca * cb;
                }
            }
        }
        FormalSeries::new(self.symbol, min, coeffs, truncation)
    }

    /// `s^n` by repeated multiplication; `s^0` is the exact one.
    pub fn pow(&self, n: u32) -> FormalSeries {
        let mut acc = FormalSeries::one(self.symbol);
        for _ in 0..n {
            // same symbol by construction
            acc = acc.mul(self).expect("pow preserves the symbol");
        }
        acc
    }

    /// The order-0 coefficient — the finite contribution of the ledger.
    pub fn finite_part(&self) -> Complex64 {
        self.coeff(0)
    }

    /// The divergent slots alone: strictly negative orders for `1/ε`,
    /// strictly positive `δ(0)` powers. The truncation marker is carried
    /// through unchanged.
    pub fn principal_part(&self) -> FormalSeries {
        let keep: Vec<(i32, Complex64)> = self
            .terms()
            .filter(|&(o, _)| match self.symbol {
                DivergenceSymbol::EpsilonInverse => o < 0,
                DivergenceSymbol::DeltaZero => o > 0,
            })
            .collect();
        FormalSeries::from_terms(self.symbol, &keep, self.truncation)
            .expect("filtered orders stay within truncation")
    }

    /// The formal renaming `[δ(0)]^n ↔ ε^{-n}`: flips the sign of every
    /// order and swaps the symbol. An involution; the truncation marker is
    /// bookkeeping and is carried through unchanged.
    pub fn rename_symbol(&self) -> FormalSeries {
        let symbol = match self.symbol {
            DivergenceSymbol::EpsilonInverse => DivergenceSymbol::DeltaZero,
            DivergenceSymbol::DeltaZero => DivergenceSymbol::EpsilonInverse,
        };
        if self.coeffs.is_empty() {
            let mut z = FormalSeries::zero(symbol);
            z.truncation = self.truncation;
            return z;
        }
        let max = self.stored_max_order().unwrap();
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        FormalSeries {
            symbol,
            min_order: -max,
            coeffs,
            truncation: self.truncation,
        }
    }

    /// Numeric evaluation `Σ c_n x^n` at a concrete value of the symbol.
    /// Meaningful only for small nonzero `x` (oracle checks against the
    /// function a truncated expansion came from).
    pub fn evaluate(&self, x: f64) -> Complex64 {
        self.terms().map(|(o, c)| c * x.powi(o)).sum()
    }

    /// Coefficient-wise comparison under absolute tolerance, over the union
    /// of stored orders. Truncation markers are not compared.
    pub fn approx_eq(&self, other: &FormalSeries, tol: f64) -> bool {
        if self.symbol != other.symbol {
            return false;
        }
        let lo = self.min_order.min(other.min_order);
        let hi = self
            .stored_max_order()
            .unwrap_or(lo)
            .max(other.stored_max_order().unwrap_or(lo));
        (lo..=hi).all(|o| (self.coeff(o) - other.coeff(o)).norm() <= tol)
    }

    /// [`FormalSeries::approx_eq`] at the crate default tolerance.
    pub fn approx_eq_default(&self, other: &FormalSeries) -> bool {
        self.approx_eq(other, DEFAULT_TOLERANCE)
    }
}

fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 {
        format!("{}{}i", c.re, c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

impl fmt::Display for FormalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tok = self.symbol.token();
        let mut first = true;
        for (o, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if o == 0 {
                write!(f, "({})", fmt_complex(c))?;
            } else {
                write!(f, "({})·{}^{}", fmt_complex(c), tok, o)?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        if let Some(t) = self.truncation {
            write!(f, " + O({}^{})", tok, t + 1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn eps_terms(terms: &[(i32, f64)]) -> FormalSeries {
        let t: Vec<(i32, Complex64)> = terms.iter().map(|&(o, c)| (o, re(c))).collect();
        FormalSeries::from_terms(DivergenceSymbol::EpsilonInverse, &t, None).unwrap()
    }

    #[test]
    fn add_cancels_poles() {
        let a = eps_terms(&[(-1, 2.0), (0, 1.0)]);
        let b = eps_terms(&[(-1, -2.0)]);
        let sum = a.add(&b).unwrap();
        assert_eq!(sum, eps_terms(&[(0, 1.0)]));
        assert_eq!(sum.min_order(), 0);
    }

    #[test]
    fn add_zero_is_identity() {
        let s = eps_terms(&[(-2, 1.0), (0, 3.0)]);
        let z = FormalSeries::zero(DivergenceSymbol::EpsilonInverse);
        assert_eq!(s.add(&z).unwrap(), s);
    }

    #[test]
    fn add_disjoint_orders() {
        let a = eps_terms(&[(-2, 1.0), (0, 3.0)]);
        let b = eps_terms(&[(-1, 2.0)]);
        assert_eq!(a.add(&b).unwrap(), eps_terms(&[(-2, 1.0), (-1, 2.0), (0, 3.0)]));
    }

    #[test]
    fn mul_squares_the_regularized_tadpole_shape() {
        // (2/ε + Ψ(2))² = 4/ε² + 4Ψ(2)/ε + Ψ(2)²
        let psi2 = special::psi(2);
        let s = eps_terms(&[(-1, 2.0), (0, psi2)]);
        let sq = s.mul(&s).unwrap();
        let want = eps_terms(&[(-2, 4.0), (-1, 4.0 * psi2), (0, psi2 * psi2)]);
        assert!(sq.approx_eq_default(&want));
    }

    #[test]
    fn mul_identity_and_order_additivity() {
        let s = eps_terms(&[(-1, 3.0), (1, 0.5)]);
        let one = FormalSeries::one(DivergenceSymbol::EpsilonInverse);
        assert_eq!(s.mul(&one).unwrap(), s);

        let a = FormalSeries::monomial(DivergenceSymbol::EpsilonInverse, -1, re(3.0));
        let b = FormalSeries::monomial(DivergenceSymbol::EpsilonInverse, -1, re(5.0));
        let p = a.mul(&b).unwrap();
        assert_eq!(p, FormalSeries::monomial(DivergenceSymbol::EpsilonInverse, -2, re(15.0)));
    }

    #[test]
    fn mul_truncation_is_shift_aware() {
        // a known to O(ε³), pole at −1: product known only up to order 1.
        let a = FormalSeries::from_terms(
            DivergenceSymbol::EpsilonInverse,
            &[(-1, re(2.0)), (0, re(1.0))],
            Some(2),
        )
        .unwrap();
        let p = a.mul(&a).unwrap();
        assert_eq!(p.truncation_order(), Some(1));
        assert_eq!(p.coeff(-2), re(4.0));
        assert_eq!(p.coeff(-1), re(4.0));
        assert_eq!(p.coeff(0), re(1.0));
    }

    #[test]
    fn pow_matches_binomial() {
        let s = eps_terms(&[(-1, 2.0), (0, 0.7)]);
        assert_eq!(s.pow(1), s);
        assert!(s
            .pow(2)
            .approx_eq_default(&eps_terms(&[(-2, 4.0), (-1, 2.8), (0, 0.49)])));
        assert_eq!(s.pow(0), FormalSeries::one(DivergenceSymbol::EpsilonInverse));
    }

    #[test]
    fn finite_part_reads_order_zero() {
        assert_eq!(eps_terms(&[(-1, 2.0), (0, 5.0)]).finite_part(), re(5.0));
        assert_eq!(eps_terms(&[(-2, 1.0)]).finite_part(), Complex64::ZERO);
    }

    #[test]
    fn principal_part_per_symbol() {
        let s = eps_terms(&[(-1, 2.0), (0, 5.0)]);
        assert_eq!(s.principal_part(), eps_terms(&[(-1, 2.0)]));
        assert!(eps_terms(&[(0, 7.0)]).principal_part().is_zero());

        let d = FormalSeries::from_terms(
            DivergenceSymbol::DeltaZero,
            &[(0, re(1.0)), (1, re(2.0)), (2, re(3.0))],
            None,
        )
        .unwrap();
        let pp = d.principal_part();
        assert_eq!(pp.coeff(0), Complex64::ZERO);
        assert_eq!(pp.coeff(1), re(2.0));
        assert_eq!(pp.coeff(2), re(3.0));
    }

    #[test]
    fn rename_is_involutive_and_flips_orders() {
        let d = FormalSeries::monomial(DivergenceSymbol::DeltaZero, 1, re(0.25));
        let e = d.rename_symbol();
        assert_eq!(e.symbol(), DivergenceSymbol::EpsilonInverse);
        assert_eq!(e.coeff(-1), re(0.25));
        assert_eq!(e.rename_symbol(), d);

        let c = FormalSeries::constant(DivergenceSymbol::DeltaZero, re(4.0));
        assert_eq!(c.rename_symbol().coeff(0), re(4.0));
    }

    #[test]
    fn symbol_mismatch_is_rejected() {
        let e = FormalSeries::one(DivergenceSymbol::EpsilonInverse);
        let d = FormalSeries::one(DivergenceSymbol::DeltaZero);
        assert!(matches!(e.add(&d), Err(LedgerError::SymbolMismatch { .. })));
        assert!(matches!(e.mul(&d), Err(LedgerError::SymbolMismatch { .. })));
    }

    #[test]
    fn truncation_below_stored_order_is_rejected() {
        let r = FormalSeries::from_terms(
            DivergenceSymbol::EpsilonInverse,
            &[(0, re(1.0)), (3, re(1.0))],
            Some(2),
        );
        assert!(matches!(r, Err(LedgerError::TruncationBelowOrder { .. })));
    }

    #[test]
    fn zero_is_canonical() {
        let z = FormalSeries::from_terms(
            DivergenceSymbol::DeltaZero,
            &[(2, Complex64::ZERO), (5, Complex64::ZERO)],
            None,
        )
        .unwrap();
        assert!(z.is_zero());
        assert_eq!(z.min_order(), 0);
        assert_eq!(z, FormalSeries::zero(DivergenceSymbol::DeltaZero));
    }

    #[test]
    fn display_reads_naturally() {
        let s = FormalSeries::from_terms(
            DivergenceSymbol::EpsilonInverse,
            &[(-1, re(2.0)), (0, re(5.0))],
            Some(0),
        )
        .unwrap();
        assert_eq!(format!("{s}"), "(2)·ε^-1 + (5) + O(ε^1)");
    }
}
