use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::scenario::Scenario;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "flatlab";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `measured < threshold`, so a zero threshold can never be met.
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub measured: Option<f64>,
    pub threshold: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Verdict {
    fn new(name: impl Into<String>, measured: f64, threshold: f64, comparison: Comparison) -> Self {
        let mut v = Verdict {
            name: name.into(),
            measured: measured.is_finite().then_some(measured),
            threshold,
            comparison,
            pass: false,
        };
        v.evaluate();
        v
    }

    pub fn below(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, threshold, Comparison::Lt)
    }

    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, threshold, Comparison::Le)
    }

    pub fn above(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, threshold, Comparison::Gt)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, threshold, Comparison::Ge)
    }

    pub fn equals(name: impl Into<String>, measured: f64, expected: f64) -> Self {
        Self::new(name, measured, expected, Comparison::Eq)
    }

    /// Boolean check encoded as a mismatch count that must equal zero.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::equals(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    fn evaluate(&mut self) {
        // Non-finite measurements fail every comparison.
        self.pass = match self.measured {
            None => false,
            Some(m) => match self.comparison {
                Comparison::Lt => m < self.threshold,
                Comparison::Le => m <= self.threshold,
                Comparison::Gt => m > self.threshold,
                Comparison::Ge => m >= self.threshold,
                Comparison::Eq => m == self.threshold,
            },
        };
    }

    pub fn prefixed(mut self, prefix: &str) -> Self {
        self.name = format!("{prefix}.{}", self.name);
        self
    }
}

/// Rows for CSV emission (radial profiles, residual tables).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// What a module runner hands back before tolerances are applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub result: Value,
    pub verdicts: Vec<Verdict>,
    pub table: Option<Table>,
}

impl Outcome {
    pub fn new(result: impl Serialize, verdicts: Vec<Verdict>, table: Option<Table>) -> CliResult<Self> {
        let result = serde_json::to_value(result).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(Outcome { result, verdicts, table })
    }

    /// Overrides thresholds by verdict name; naming a verdict that does not
    /// exist is a schema error.
    pub fn apply_tolerances(&mut self, tolerances: &BTreeMap<String, f64>) -> CliResult<()> {
        for (name, &t) in tolerances {
            let Some(v) = self.verdicts.iter_mut().find(|v| &v.name == name) else {
                let known: Vec<&str> = self.verdicts.iter().map(|v| v.name.as_str()).collect();
                return Err(CliError::Schema(format!("unknown tolerance `{name}`; verdicts are {known:?}")));
            };
            v.threshold = t;
            v.evaluate();
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub flatlab: String,
    pub flatlab_core: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub versions: Versions,
    pub seed: u64,
    pub tol: Option<f64>,
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub scenario: Scenario,
    pub provenance: Provenance,
    pub result: Value,
    pub verdicts: Vec<Verdict>,
    pub table: Option<Table>,
    pub pass: bool,
}

impl Report {
    pub fn exit_code(&self) -> u8 {
        if self.pass {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The table when the run produced one, otherwise the verdicts.
    pub fn to_csv(&self) -> CliResult<String> {
        let io = |e: csv::Error| CliError::Io(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        match &self.table {
            Some(t) => {
                w.write_record(&t.columns).map_err(io)?;
                for row in &t.rows {
                    w.write_record(row.iter().map(cell)).map_err(io)?;
                }
            }
            None => {
                w.write_record(["name", "measured", "threshold", "comparison", "pass"]).map_err(io)?;
                for v in &self.verdicts {
                    let cmp = serde_json::to_value(v.comparison).expect("comparison serializes");
                    w.write_record([
                        v.name.clone(),
                        v.measured.map(|m| m.to_string()).unwrap_or_default(),
                        v.threshold.to_string(),
                        cell(&cmp),
                        v.pass.to_string(),
                    ])
                    .map_err(io)?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }

    /// One line per scenario plus one line per failing verdict.
    pub fn summary(&self) -> String {
        let passed = self.verdicts.iter().filter(|v| v.pass).count();
        let mut s = format!(
            "{} {} ({passed}/{} verdicts, seed {})\n",
            if self.pass { "PASS" } else { "FAIL" },
            self.scenario.name,
            self.verdicts.len(),
            self.provenance.seed
        );
        for v in self.verdicts.iter().filter(|v| !v.pass) {
            let m = v.measured.map(|m| format!("{m:e}")).unwrap_or_else(|| "non-finite".into());
            s.push_str(&format!("  failed {}: measured {m}, {:?} {:e}\n", v.name, v.comparison, v.threshold));
        }
        s
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}
