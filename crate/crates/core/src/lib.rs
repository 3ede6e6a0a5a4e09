//! Symbolic-numeric engine for the observable-state picture of perturbative
//! renormalization.
//!
//! Divergent quantities are never produced as floating-point infinities.
//! Instead, every trace is a truncated formal series in a single divergence
//! symbol — `δ(0)` for formal traces of continuous-spectrum states, `1/ε` for
//! dimensionally regularized momentum integrals — and the finite physics is
//! extracted either by projecting states onto their non-diagonal part or by
//! the equivalent counterterm transformation on the series coefficients.
//!
//! Module map:
//!
//! - [`laurent`] — arithmetic for the divergence ledgers ([`FormalSeries`]).
//! - [`special`] — Gamma pole expansions and digamma values for dimensional
//!   regularization.
//! - [`divcalc`] — loop counting and divergence-structure prediction for
//!   `φ^l` diagrams.
//! - [`osm`] — perturbative states, relevant observables, the formal trace,
//!   the projector `Π`, and the counterterm transformation.
//! - [`decoherence`] — discrete and grid-level reference semantics showing
//!   where the `δ(0)` term comes from.
//! - [`phi4`] — the `φ⁴` two-point pipeline: tadpole regularization,
//!   self-energy resummation, and the mass shift.
//! - [`extensions`] — worked QED self-energy and first-order `φ⁶` examples.
//! - [`numeric`] — quadrature kernels shared by the numeric traces.

pub mod decoherence;
pub mod divcalc;
pub mod extensions;
pub mod laurent;
pub mod numeric;
pub mod osm;
pub mod phi4;
pub mod special;

pub use laurent::{DivergenceSymbol, FormalSeries, LedgerError};
pub use osm::{InternalFactor, PerturbativeState, RelevantObservable};
pub use phi4::{BetaTable, SourceProfile, TheoryConfig};

/// Absolute tolerance used for coefficient comparisons across the crate.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
