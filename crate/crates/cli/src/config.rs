//! Config-file parsing and the JSON schemas of state fixtures.
//!
//! Configs are TOML: a `[theory]` table, an optional `[source]` profile,
//! and optional `[[beta]]` entries whose `terms` are `(order, re, im)`
//! triples in ε. State fixtures for `project`/`compare` are JSON.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use obsrenorm::laurent::{DivergenceSymbol, FormalSeries};
use obsrenorm::osm::{Branch, InternalFactor, PerturbativeState, RelevantObservable};
use obsrenorm::phi4::{BetaTable, SourceProfile, TheoryConfig};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub theory: TheoryConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceProfile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub beta: Vec<BetaEntry>,
}

/// One `β^{(j,s)}` ledger entry: sparse `(order, re, im)` triples plus an
/// optional truncation order (absent means exact).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BetaEntry {
    pub j: u32,
    pub s: u32,
    pub terms: Vec<(i32, f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<i32>,
}

impl BetaEntry {
    pub fn to_series(&self) -> Result<FormalSeries, CliError> {
        let terms: Vec<(i32, Complex64)> = self
            .terms
            .iter()
            .map(|&(o, re, im)| (o, Complex64::new(re, im)))
            .collect();
        FormalSeries::from_terms(DivergenceSymbol::EpsilonInverse, &terms, self.truncation)
            .map_err(|e| CliError::Config(format!("beta entry ({}, {}): {e}", self.j, self.s)))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config schema: {e}")))?;
        cfg.theory
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(src) = &cfg.source {
            src.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(cfg)
    }

    /// Canonical serialized form; parsing it back yields the same string.
    pub fn canonical_echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The β table: the built-in first-order tadpole entry, overridden or
    /// extended by explicit config entries.
    pub fn beta_table(&self) -> Result<BetaTable, CliError> {
        let mut table = BetaTable::first_order(&self.theory);
        for entry in &self.beta {
            table
                .insert(entry.j, entry.s, entry.to_series()?)
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(table)
    }
}

/// JSON fixture for `project` and `compare`: a perturbative state plus the
/// external traces it is measured with.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub state: StateDto,
    pub observable: ObservableDto,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateDto {
    pub order: u32,
    pub branches: Vec<BranchDto>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchDto {
    pub external_index: u32,
    pub factors: Vec<FactorDto>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorDto {
    pub rho_d: Complex64,
    pub rho_nd: Complex64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableDto {
    pub external_trace: BTreeMap<u32, Complex64>,
}

impl StateFile {
    pub fn load(path: &Path) -> Result<(PerturbativeState, RelevantObservable), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let file: StateFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("state schema: {e}")))?;
        let branches = file
            .state
            .branches
            .into_iter()
            .map(|b| Branch {
                external_index: b.external_index,
                factors: b
                    .factors
                    .into_iter()
                    .map(|f| InternalFactor::new(f.rho_d, f.rho_nd))
                    .collect(),
            })
            .collect();
        let state = PerturbativeState::new(file.state.order, branches)
            .map_err(|e| CliError::Config(format!("state invariant: {e}")))?;
        let obs = RelevantObservable::new(file.observable.external_trace)
            .map_err(|e| CliError::Config(format!("observable invariant: {e}")))?;
        Ok((state, obs))
    }
}

/// Comparison tolerance: `OBSRENORM_TOLERANCE` overrides the crate default.
pub fn tolerance_from_env() -> Result<f64, CliError> {
    match std::env::var("OBSRENORM_TOLERANCE") {
        Ok(v) => v
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|t| t.is_finite() && *t > 0.0)
            .ok_or_else(|| {
                CliError::Config(format!("OBSRENORM_TOLERANCE must be a positive number, got {v:?}"))
            }),
        Err(_) => Ok(obsrenorm::DEFAULT_TOLERANCE),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::parse("[theory]\nm0 = 1.0\nlambda = 0.1\nmu = 1.0\norder = 1\n").unwrap();
        assert_eq!(cfg.theory.eps_truncation, 2);
        assert!(cfg.source.is_none());
        assert!(cfg.beta.is_empty());
    }

    #[test]
    fn negative_mass_is_rejected_with_the_field_name() {
        let err = RunConfig::parse("[theory]\nm0 = -1.0\nlambda = 0.1\nmu = 1.0\norder = 1\n")
            .unwrap_err();
        assert!(err.to_string().contains("m0"));
    }

    #[test]
    fn canonical_echo_round_trips_byte_identically() {
        let text = "[theory]\nm0 = 2.0\nlambda = 0.25\nmu = 1.5\norder = 2\n\n[source]\nkind = \"gaussian\"\namplitude = 1.0\ncenter = 2.0\nwidth = 0.5\n\n[[beta]]\nj = 2\ns = 0\nterms = [[-2, 0.5, 0.0], [0, 1.0, 0.0]]\n";
        let cfg = RunConfig::parse(text).unwrap();
        let echo = cfg.canonical_echo();
        let reparsed = RunConfig::parse(&echo).unwrap();
        assert_eq!(reparsed.canonical_echo(), echo);
    }

    #[test]
    fn beta_entries_respect_the_pole_bound() {
        let text = "[theory]\nm0 = 1.0\nlambda = 0.1\nmu = 1.0\norder = 2\n\n[[beta]]\nj = 1\ns = 0\nterms = [[-2, 1.0, 0.0]]\n";
        let cfg = RunConfig::parse(text).unwrap();
        let err = cfg.beta_table().unwrap_err();
        assert!(err.to_string().contains("pole order"));
    }
}
