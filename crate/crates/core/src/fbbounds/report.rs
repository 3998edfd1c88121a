use std::collections::BTreeMap;

use serde::Serialize;

use super::params::BoundParams;

/// A named bound with its additive terms.
///
/// `value` is `raw` clipped to `[0, 1]`. `details` holds the non-additive
/// quantities that went into the evaluation (chosen γ, `d_n`, rate, ...).
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub value: f64,
    pub raw: f64,
    pub terms: BTreeMap<String, f64>,
    pub details: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<BoundParams>,
    pub mc_ci: Option<f64>,
}

impl BoundReport {
    /// Builds a report whose raw value is the sum of `terms`.
    pub fn sum(name: &str, terms: &[(&str, f64)]) -> Self {
        let raw = terms.iter().map(|(_, v)| v).sum();
        Self::with_raw(name, raw, terms)
    }

    pub fn with_raw(name: &str, raw: f64, terms: &[(&str, f64)]) -> Self {
        Self {
            name: name.to_string(),
            value: clip(raw),
            raw,
            terms: terms.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            details: BTreeMap::new(),
            params: None,
            mc_ci: None,
        }
    }

    pub fn detail(mut self, key: &str, v: f64) -> Self {
        self.details.insert(key.to_string(), v);
        self
    }

    pub fn with_params(mut self, p: &BoundParams) -> Self {
        self.params = Some(p.clone());
        self
    }

    pub fn term(&self, key: &str) -> f64 {
        self.terms.get(key).copied().unwrap_or(f64::NAN)
    }
}

/// Clip to `[0, 1]`; NaN stays NaN.
pub fn clip(v: f64) -> f64 {
    if v.is_nan() {
        v
    } else {
        v.clamp(0.0, 1.0)
    }
}
