//! Report records emitted by the subcommands.

use std::collections::BTreeMap;

use cknlab_core::constants::rel_diff;
use cknlab_core::{BoundsReport, InequalityParams, QuotientFormula, ReferenceEntry, ScanRow, Verdict};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

/// Tolerance between a closed form and its quadrature evaluation.
pub const QUADRATURE_AGREEMENT_TOL: f64 = 1e-8;
/// Tolerance between a closed form and a variational estimate.
pub const VARIATIONAL_AGREEMENT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiagValue {
    Bool(bool),
    Int(u64),
    Float(f64),
    Text(String),
    Series(Vec<f64>),
}

impl From<bool> for DiagValue {
    fn from(v: bool) -> Self {
        DiagValue::Bool(v)
    }
}
impl From<u64> for DiagValue {
    fn from(v: u64) -> Self {
        DiagValue::Int(v)
    }
}
impl From<usize> for DiagValue {
    fn from(v: usize) -> Self {
        DiagValue::Int(v as u64)
    }
}
impl From<u32> for DiagValue {
    fn from(v: u32) -> Self {
        DiagValue::Int(v as u64)
    }
}
impl From<f64> for DiagValue {
    fn from(v: f64) -> Self {
        DiagValue::Float(v)
    }
}
impl From<&str> for DiagValue {
    fn from(v: &str) -> Self {
        DiagValue::Text(v.to_string())
    }
}
impl From<String> for DiagValue {
    fn from(v: String) -> Self {
        DiagValue::Text(v)
    }
}
impl From<Vec<f64>> for DiagValue {
    fn from(v: Vec<f64>) -> Self {
        DiagValue::Series(v)
    }
}

/// How the variational estimate relates to the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateRole {
    /// Should match the closed form.
    Equal,
    /// Must not fall below the closed form (the estimate is an upper bound
    /// on a quantity the closed form bounds from below).
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpConstantReport {
    pub params: InequalityParams,
    pub closed_form: Option<f64>,
    pub quadrature_value: Option<f64>,
    pub variational_estimate: Option<f64>,
    pub bounds: Option<BoundsReport>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub references: BTreeMap<String, ReferenceEntry>,
    pub diagnostics: BTreeMap<String, DiagValue>,
    /// Where each value came from.
    pub provenance: BTreeMap<String, String>,
    pub discrepancy: bool,
}

impl SharpConstantReport {
    pub fn new(params: InequalityParams) -> Self {
        Self {
            params,
            closed_form: None,
            quadrature_value: None,
            variational_estimate: None,
            bounds: None,
            references: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            provenance: BTreeMap::new(),
            discrepancy: false,
        }
    }

    pub fn diag(&mut self, key: &str, v: impl Into<DiagValue>) {
        self.diagnostics.insert(key.to_string(), v.into());
    }

    pub fn source(&mut self, key: &str, what: impl Into<String>) {
        self.provenance.insert(key.to_string(), what.into());
    }

    pub fn has_value(&self) -> bool {
        self.closed_form.is_some() || self.quadrature_value.is_some() || self.variational_estimate.is_some()
    }

    /// Sets `discrepancy` from the present values and returns the reasons.
    pub fn check_consistency(&mut self, role: EstimateRole) -> Vec<String> {
        let mut why = Vec::new();
        if let (Some(c), Some(q)) = (self.closed_form, self.quadrature_value) {
            let d = rel_diff(q, c);
            self.diag("closed_vs_quadrature_rel", d);
            if !(d <= QUADRATURE_AGREEMENT_TOL) {
                why.push(format!("closed form {c} vs quadrature {q} (relative {d:e})"));
            }
        }
        if let (Some(c), Some(v)) = (self.closed_form, self.variational_estimate) {
            let d = rel_diff(v, c);
            self.diag("closed_vs_variational_rel", d);
            let bad = match role {
                EstimateRole::Equal => !(d <= VARIATIONAL_AGREEMENT_TOL),
                EstimateRole::AtLeast => !(v >= c * (1.0 - VARIATIONAL_AGREEMENT_TOL)),
            };
            if bad {
                why.push(format!("closed form {c} vs variational {v} (relative {d:e})"));
            }
        }
        if let (Some(b), Some(v)) = (&self.bounds, self.variational_estimate) {
            if v < b.lower * (1.0 - VARIATIONAL_AGREEMENT_TOL) {
                why.push(format!("variational {v} below the lower bound {}", b.lower));
            }
        }
        self.discrepancy = !why.is_empty();
        why
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeScanRow {
    pub k: u32,
    pub value: f64,
    pub exact: String,
    pub formula: QuotientFormula,
    pub argmin: bool,
    pub tail_verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeScanReport {
    pub params: InequalityParams,
    pub formula: QuotientFormula,
    pub k_max: u32,
    pub argmin: u32,
    pub value: f64,
    pub exact: String,
    pub tail_verified: bool,
    pub rows: Vec<ModeScanRow>,
}

/// One scan of the escalation schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeStage {
    pub basis_sizes: Vec<usize>,
    pub best: f64,
    pub best_k: u32,
    pub verdict: Verdict,
    pub all_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub banner: String,
    pub params: InequalityParams,
    pub k_max: u32,
    pub stages: Vec<ProbeStage>,
    /// Per-mode table of the final stage.
    pub rows: Vec<ScanRow>,
    pub best_estimate: f64,
    pub best_k: u32,
    pub verdict: Verdict,
    pub lower_bound: f64,
    pub lower_bound_exact: String,
    pub upper_bound: f64,
    pub upper_bound_exact: String,
    pub within_bounds: bool,
    /// Raw mode-1 quotient of the test profile e^{-r}.
    pub test_profile_k1: f64,
    pub test_profile_k1_exact: String,
    pub conjecture_open: bool,
    pub seed: u64,
}

/// What gets serialized: the report together with the config that made it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub config: RunConfig,
    pub report: T,
}
