//! The JSON run report and its plain-text rendering.

use serde::Serialize;
use serde_json::Value;

use obsrenorm::laurent::{DivergenceSymbol, FormalSeries};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    /// Echo of the parsed arguments / inline parameters.
    pub inputs: Value,
    /// Canonical serialization of the loaded config file, when one was
    /// used; parses back to itself byte-identically.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_echo: Option<String>,
    pub ledgers: Vec<LedgerDto>,
    pub results: Value,
    pub cross_checks: Vec<CrossCheck>,
}

impl RunReport {
    pub fn new(command: &str, inputs: Value) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            inputs,
            config_echo: None,
            ledgers: Vec::new(),
            results: Value::Null,
            cross_checks: Vec::new(),
        }
    }

    pub fn push_ledger(&mut self, name: &str, series: &FormalSeries) {
        self.ledgers.push(LedgerDto::new(name, series));
    }

    pub fn push_check(&mut self, name: &str, delta: f64, tolerance: f64) {
        self.cross_checks.push(CrossCheck {
            name: name.to_string(),
            delta,
            tolerance,
            pass: delta.is_finite() && delta <= tolerance,
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        if let Some(rows) = self.results.get("rows").and_then(Value::as_array) {
            out.push_str(&render_rows(rows));
        } else if let Some(obj) = self.results.as_object() {
            for (k, v) in obj {
                out.push_str(&format!("{k}: {v}\n"));
            }
        }
        for ledger in &self.ledgers {
            out.push_str(&format!("{}: {}\n", ledger.name, ledger.display));
        }
        for check in &self.cross_checks {
            out.push_str(&format!(
                "check {}: delta {:.3e} (tolerance {:.1e}) {}\n",
                check.name,
                check.delta,
                check.tolerance,
                if check.pass { "ok" } else { "FAILED" }
            ));
        }
        out
    }
}

/// A serialized divergence ledger: `(order, re, im)` triples in ascending
/// order plus the truncation marker (`null` = exact).
#[derive(Debug, Serialize)]
pub struct LedgerDto {
    pub name: String,
    pub symbol: String,
    pub terms: Vec<(i32, f64, f64)>,
    pub truncation: Option<i32>,
    pub display: String,
}

impl LedgerDto {
    pub fn new(name: &str, series: &FormalSeries) -> Self {
        let symbol = match series.symbol() {
            DivergenceSymbol::EpsilonInverse => "epsilon",
            DivergenceSymbol::DeltaZero => "delta0",
        };
        LedgerDto {
            name: name.to_string(),
            symbol: symbol.to_string(),
            terms: series.terms().map(|(o, c)| (o, c.re, c.im)).collect(),
            truncation: series.truncation_order(),
            display: series.to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CrossCheck {
    pub name: String,
    pub delta: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn render_rows(rows: &[Value]) -> String {
    let mut out = String::new();
    if let Some(first) = rows.first().and_then(Value::as_object) {
        let headers: Vec<&String> = first.keys().collect();
        out.push_str(
            &headers
                .iter()
                .map(|h| format!("{h:>10}"))
                .collect::<Vec<_>>()
                .join(" "),
        );
        out.push('\n');
        for row in rows {
            if let Some(obj) = row.as_object() {
                out.push_str(
                    &headers
                        .iter()
                        .map(|h| format!("{:>10}", obj.get(*h).cloned().unwrap_or(Value::Null)))
                        .collect::<Vec<_>>()
                        .join(" "),
                );
                out.push('\n');
            }
        }
    }
    out
}
