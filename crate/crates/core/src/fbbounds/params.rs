use serde::{Deserialize, Serialize};

/// Parameters of the finite-blocklength bound evaluators.
///
/// The absolute constants `k0..k4`, `b_const`, `b_prime`, `cbar` and
/// `c_const` are never given numerically; they default to zero so that limit
/// studies see only the constant-free part of each bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundParams {
    /// Rate back-off in `d_n = ceil(log K / (C - delta))`. When absent,
    /// `delta = C - rate_gap`.
    pub delta: Option<f64>,
    /// Used only when `delta` is absent.
    pub rate_gap: f64,
    /// Margin in the index-code decoder, in bits; must stay below the
    /// symmetrizability margin of the family.
    pub eta: f64,
    /// `K = c0 * n`.
    pub c0: f64,
    pub cbar: f64,
    pub c_const: f64,
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
    pub b_const: f64,
    pub b_prime: f64,
    pub rho: f64,
    /// Berry-Esseen universal constant.
    pub berry_esseen_c0: f64,
}

impl Default for BoundParams {
    fn default() -> Self {
        Self {
            delta: None,
            rate_gap: 5e-6,
            eta: 1e-3,
            c0: 1e9,
            cbar: 0.0,
            c_const: 0.0,
            k0: 0.0,
            k1: 0.0,
            k2: 0.0,
            k3: 0.0,
            k4: 0.0,
            b_const: 0.0,
            b_prime: 0.0,
            rho: 0.0,
            berry_esseen_c0: 0.56,
        }
    }
}

impl BoundParams {
    pub fn validate(&self) -> Result<(), String> {
        let finite = [
            ("rate_gap", self.rate_gap),
            ("eta", self.eta),
            ("c0", self.c0),
            ("cbar", self.cbar),
            ("c_const", self.c_const),
            ("k0", self.k0),
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
            ("k4", self.k4),
            ("b_const", self.b_const),
            ("b_prime", self.b_prime),
            ("rho", self.rho),
            ("berry_esseen_c0", self.berry_esseen_c0),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(format!("{name} must be finite"));
            }
        }
        for (name, v) in [
            ("k0", self.k0),
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
            ("k4", self.k4),
            ("b_const", self.b_const),
            ("b_prime", self.b_prime),
        ] {
            if v < 0.0 {
                return Err(format!("{name} must be nonnegative"));
            }
        }
        if let Some(d) = self.delta {
            if !(d.is_finite() && d > 0.0) {
                return Err("delta must be positive".into());
            }
        }
        if !(self.rate_gap > 0.0) {
            return Err("rate_gap must be positive".into());
        }
        if !(self.eta > 0.0) {
            return Err("eta must be positive".into());
        }
        if self.c0 < 1.0 {
            return Err("c0 must be at least 1".into());
        }
        if !(self.berry_esseen_c0 > 0.0) {
            return Err("berry_esseen_c0 must be positive".into());
        }
        Ok(())
    }

    /// Resolved `delta` for a given capacity.
    pub fn delta_for(&self, capacity: f64) -> f64 {
        self.delta.unwrap_or(capacity - self.rate_gap)
    }
}
