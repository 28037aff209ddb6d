//! Ladders of (parameter, norm) pairs and their verdicts.

use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// What a ladder is expected to show.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trend {
    /// Normalized ratios strictly decrease along the ladder (an o(·) claim).
    Decreasing,
    /// Normalized ratios never exceed `factor` times the first one (an O(·) claim).
    Bounded { factor: f64 },
    /// Successive observed orders of the raw norms lie in [min, max].
    Order { min: f64, max: f64 },
    /// Every raw norm is at least `min`.
    LowerBound { min: f64 },
    /// Measured and reported, not judged.
    Report,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub name: String,
    pub params: Vec<f64>,
    pub norms: Vec<f64>,
    /// norm / param^normalization
    pub ratios: Vec<f64>,
    pub normalization: f64,
    /// Least-squares slope of log norm against log param.
    pub exponent: f64,
    pub target_exponent: f64,
    pub trend: Trend,
    pub verdict: bool,
}

/// Slope of the least-squares line through (log x, log y), skipping
/// non-positive entries. NaN with fewer than two usable points.
pub fn fit_exponent(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Observed orders log(e_k / e_{k+1}) / log(p_k / p_{k+1}).
pub fn observed_orders(params: &[f64], norms: &[f64]) -> Vec<f64> {
    params.windows(2).zip(norms.windows(2)).map(|(p, e)| (e[0] / e[1]).ln() / (p[0] / p[1]).ln()).collect()
}

impl ConvergenceReport {
    pub fn new(name: &str, params: Vec<f64>, norms: Vec<f64>, normalization: f64, trend: Trend) -> Result<Self> {
        if params.len() != norms.len() || params.is_empty() {
            return Err(LabError::Parameter("ladder needs matching, nonempty parameter and norm lists".into()));
        }
        if params.windows(2).any(|w| w[1] >= w[0]) {
            return Err(LabError::Parameter(format!("ladder parameters must strictly decrease: {params:?}")));
        }
        if norms.iter().any(|n| !(*n >= 0.0)) {
            return Err(LabError::Numeric(format!("ladder norms must be finite and nonnegative: {norms:?}")));
        }
        let ratios: Vec<f64> = params.iter().zip(&norms).map(|(p, n)| n / p.powf(normalization)).collect();
        let exponent = fit_exponent(&params, &norms);
        let verdict = match trend {
            Trend::Decreasing => ratios.windows(2).all(|w| w[1] < w[0]) || ratios.iter().all(|r| *r == 0.0),
            Trend::Bounded { factor } => ratios.iter().all(|r| *r <= factor * ratios[0] + f64::MIN_POSITIVE),
            Trend::Order { min, max } => observed_orders(&params, &norms).iter().all(|o| *o >= min && *o <= max),
            Trend::LowerBound { min } => norms.iter().all(|n| *n >= min),
            Trend::Report => true,
        };
        let target_exponent = match trend {
            Trend::Order { min, .. } => min,
            _ => normalization,
        };
        Ok(ConvergenceReport { name: name.to_string(), params, norms, ratios, normalization, exponent, target_exponent, trend, verdict })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "tau,norm,normalized_ratio")?;
        for ((p, n), r) in self.params.iter().zip(&self.norms).zip(&self.ratios) {
            writeln!(w, "{p:.17e},{n:.17e},{r:.17e}")?;
        }
        Ok(())
    }

    /// Verdict record without the raw columns.
    pub fn verdict_json(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.name,
            "exponent": self.exponent,
            "target_exponent": self.target_exponent,
            "trend": self.trend,
            "verdict": self.verdict,
        })
    }
}
