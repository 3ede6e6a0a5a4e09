//! Reference semantics for the decoherence picture: discrete
//! system–environment partial traces, and the uniform-grid analogue of a
//! continuous-spectrum state where the `δ(0)` term first shows up.
//!
//! In the discrete case a relevant observable `O_S ⊗ I_E` satisfies
//! `⟨O_R⟩_ρ = ⟨O_S⟩_{ρ_S}` with `ρ_S = Tr_E ρ` — everything is finite. On a
//! continuum, states acquire a structurally separate diagonal profile
//! `ρ_D(ω)·δ(ω−ω′)` next to the regular kernel `ρ_ND(ω,ω′)`, and the trace
//! against an observable with its own diagonal profile picks up one term
//! proportional to `δ(0)`. The grid types here keep that split structural —
//! the delta is never approximated by a numeric spike — so the trace lands
//! in a two-slot `δ(0)` ledger and projection provably removes exactly the
//! divergent slot.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::laurent::{DivergenceSymbol, FormalSeries};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecoherenceError {
    #[error("matrix is {rows}×{cols}, expected {expected}×{expected}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("matrix is not Hermitian within tolerance {tol} (max deviation {max_dev})")]
    NotHermitian { tol: f64, max_dev: f64 },
    #[error("trace is {trace} instead of 1 within tolerance {tol}")]
    NotUnitTrace { trace: f64, tol: f64 },
    #[error("grid spacing is not uniform: step {step} deviates from {expected}")]
    NonUniformGrid { step: f64, expected: f64 },
    #[error("grid size mismatch: kernel has {expected} points, argument has {got}")]
    GridMismatch { expected: usize, got: usize },
    #[error("grid needs at least two points")]
    GridTooSmall,
}

fn hermiticity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut max_dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            max_dev = max_dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    max_dev
}

/// A density matrix on `H_S ⊗ H_E`, with row/column index `i·dim_env + α`
/// for basis vector `|i, α⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dim_system: usize,
    dim_env: usize,
    matrix: DMatrix<Complex64>,
}

impl BipartiteState {
    /// Validates Hermiticity and unit trace within `tol`.
    pub fn new(
        dim_system: usize,
        dim_env: usize,
        matrix: DMatrix<Complex64>,
        tol: f64,
    ) -> Result<Self, DecoherenceError> {
        let expected = dim_system * dim_env;
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(DecoherenceError::DimensionMismatch {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected,
            });
        }
        let max_dev = hermiticity_deviation(&matrix);
        if max_dev > tol {
            return Err(DecoherenceError::NotHermitian { tol, max_dev });
        }
        let trace = matrix.trace();
        if (trace - Complex64::ONE).norm() > tol {
            return Err(DecoherenceError::NotUnitTrace {
                trace: trace.re,
                tol,
            });
        }
        Ok(BipartiteState {
            dim_system,
            dim_env,
            matrix,
        })
    }

    pub fn dim_system(&self) -> usize {
        self.dim_system
    }

    pub fn dim_env(&self) -> usize {
        self.dim_env
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Partial trace over the environment: `(ρ_S)_{ij} = Σ_α ρ_{iα,jα}`.
    pub fn partial_trace_env(&self) -> DMatrix<Complex64> {
        let mut reduced = DMatrix::zeros(self.dim_system, self.dim_system);
        for i in 0..self.dim_system {
            for j in 0..self.dim_system {
                let mut s = Complex64::ZERO;
                for alpha in 0..self.dim_env {
                    s += self.matrix[(i * self.dim_env + alpha, j * self.dim_env + alpha)];
                }
                reduced[(i, j)] = s;
            }
        }
        reduced
    }

    /// Mean value of the relevant observable `O_S ⊗ I_E`, computed on the
    /// full state: `Tr(ρ (O_S ⊗ I_E))`. Equals `Tr(ρ_S O_S)` — the reduced
    /// route is the cross-check, not the definition.
    pub fn relevant_mean_value(
        &self,
        o_system: &DMatrix<Complex64>,
    ) -> Result<Complex64, DecoherenceError> {
        if o_system.nrows() != self.dim_system || o_system.ncols() != self.dim_system {
            return Err(DecoherenceError::DimensionMismatch {
                rows: o_system.nrows(),
                cols: o_system.ncols(),
                expected: self.dim_system,
            });
        }
        let identity_env = DMatrix::<Complex64>::identity(self.dim_env, self.dim_env);
        let relevant = o_system.kronecker(&identity_env);
        Ok((&self.matrix * relevant).trace())
    }
}

/// A generalized state sampled on a uniform ω grid: the diagonal profile
/// `ρ_D(ω)` is kept apart from the regular kernel `ρ_ND(ω,ω′)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridKernel {
    points: Vec<f64>,
    spacing: f64,
    rho_d: Vec<Complex64>,
    rho_nd: DMatrix<Complex64>,
}

impl GridKernel {
    pub fn new(
        points: Vec<f64>,
        rho_d: Vec<Complex64>,
        rho_nd: DMatrix<Complex64>,
        tol: f64,
    ) -> Result<Self, DecoherenceError> {
        if points.len() < 2 {
            return Err(DecoherenceError::GridTooSmall);
        }
        let n = points.len();
        let spacing = points[1] - points[0];
        for w in points.windows(2) {
            let step = w[1] - w[0];
            if (step - spacing).abs() > tol * spacing.abs().max(1.0) {
                return Err(DecoherenceError::NonUniformGrid {
                    step,
                    expected: spacing,
                });
            }
        }
        if rho_d.len() != n {
            return Err(DecoherenceError::GridMismatch {
                expected: n,
                got: rho_d.len(),
            });
        }
        if rho_nd.nrows() != n || rho_nd.ncols() != n {
            return Err(DecoherenceError::DimensionMismatch {
                rows: rho_nd.nrows(),
                cols: rho_nd.ncols(),
                expected: n,
            });
        }
        let max_dev = hermiticity_deviation(&rho_nd);
        if max_dev > tol {
            return Err(DecoherenceError::NotHermitian { tol, max_dev });
        }
        Ok(GridKernel {
            points,
            spacing,
            rho_d,
            rho_nd,
        })
    }

    /// Samples profile functions on a uniform grid.
    pub fn from_profiles(
        points: Vec<f64>,
        rho_d: impl Fn(f64) -> Complex64,
        rho_nd: impl Fn(f64, f64) -> Complex64,
        tol: f64,
    ) -> Result<Self, DecoherenceError> {
        let d: Vec<Complex64> = points.iter().map(|&w| rho_d(w)).collect();
        let n = points.len();
        let nd = DMatrix::from_fn(n, n, |i, j| rho_nd(points[i], points[j]));
        GridKernel::new(points, d, nd, tol)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn rho_d(&self) -> &[Complex64] {
        &self.rho_d
    }

    pub fn rho_nd(&self) -> &DMatrix<Complex64> {
        &self.rho_nd
    }

    /// Trapezoid weight of grid point `i`.
    fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.points.len() - 1 {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    /// The formal trace of this state against an observable with diagonal
    /// profile `o_d` and regular kernel `o_nd`, as a `δ(0)` ledger:
    ///
    /// - `δ(0)` slot: `∫ ρ_D(ω) O_D(ω) dω`
    /// - finite slot: `∫ O_ND(ω,ω) ρ_D(ω) dω + ∫ ρ_ND(ω,ω) O_D(ω) dω
    ///   + ∫∫ ρ_ND(ω,ω′) O_ND(ω′,ω) dω dω′`
    ///
    /// with trapezoid quadrature in place of the integrals.
    pub fn continuous_trace_formal(
        &self,
        o_d: &[Complex64],
        o_nd: &DMatrix<Complex64>,
    ) -> Result<FormalSeries, DecoherenceError> {
        let n = self.points.len();
        if o_d.len() != n {
            return Err(DecoherenceError::GridMismatch {
                expected: n,
                got: o_d.len(),
            });
        }
        if o_nd.nrows() != n || o_nd.ncols() != n {
            return Err(DecoherenceError::DimensionMismatch {
                rows: o_nd.nrows(),
                cols: o_nd.ncols(),
                expected: n,
            });
        }
        let mut delta_slot = Complex64::ZERO;
        let mut finite = Complex64::ZERO;
        for i in 0..n {
            let w = self.weight(i);
            delta_slot += w * self.rho_d[i] * o_d[i];
            finite += w * (o_nd[(i, i)] * self.rho_d[i] + self.rho_nd[(i, i)] * o_d[i]);
            for j in 0..n {
                finite += self.weight(i) * self.weight(j) * self.rho_nd[(i, j)] * o_nd[(j, i)];
            }
        }
        Ok(FormalSeries::from_terms(
            DivergenceSymbol::DeltaZero,
            &[(0, finite), (1, delta_slot)],
            None,
        )
        .expect("two fixed slots"))
    }

    /// Projection with the canonical choice `λ(ω) = ρ_D(ω)`: the diagonal
    /// profile is removed entirely. Idempotent.
    pub fn project(&self) -> GridKernel {
        GridKernel {
            points: self.points.clone(),
            spacing: self.spacing,
            rho_d: vec![Complex64::ZERO; self.rho_d.len()],
            rho_nd: self.rho_nd.clone(),
        }
    }

    /// One application of the projector family `Π(ρ) = ρ − ∫λ(ω)|ω⟩⟨ω|dω`
    /// for an arbitrary regular `λ`. Idempotent only for `λ = ρ_D`, which is
    /// what [`GridKernel::project`] uses.
    pub fn project_with(&self, lambda: &[Complex64]) -> Result<GridKernel, DecoherenceError> {
        if lambda.len() != self.points.len() {
            return Err(DecoherenceError::GridMismatch {
                expected: self.points.len(),
                got: lambda.len(),
            });
        }
        let rho_d = self
            .rho_d
            .iter()
            .zip(lambda)
            .map(|(d, l)| d - l)
            .collect();
        Ok(GridKernel {
            points: self.points.clone(),
            spacing: self.spacing,
            rho_d,
            rho_nd: self.rho_nd.clone(),
        })
    }
}

/// Uniform grid of `n` points covering `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + i as f64 * h).collect()
}
