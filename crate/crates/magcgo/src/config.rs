//! Experiment configuration: flat `key = value` lines under `[section]`
//! headers, read as a TOML subset. Every key has a default, so an empty file
//! is a valid configuration; unknown sections and keys are errors.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub mollify: MollifySection,
    pub dbar: DbarSection,
    pub cgo: CgoSection,
    pub carleman: CarlemanSection,
    pub identity: IdentitySection,
    pub recover: RecoverSection,
    pub euclid: EuclidSection,
    pub advect: AdvectSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    /// Chart preset: flat-cylinder, exp-warp or log-polar-image.
    pub chart: String,
    pub seed: u64,
    /// Multiplies every PDE grid resolution.
    pub grid_scale: f64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection { chart: "flat-cylinder".into(), seed: 7, grid_scale: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MollifySection {
    /// Rate corpus member: smooth, kinked, plateau or smoothed-step.
    pub corpus: String,
    pub tau_list: Vec<f64>,
    /// Lattice nodes along x1 of the rate chart.
    pub nodes: usize,
    /// Lebesgue exponent of the approximation and Hessian ladders.
    pub p: f64,
    /// Reach of the reflected extension.
    pub tau_max: f64,
}

impl Default for MollifySection {
    fn default() -> Self {
        MollifySection { corpus: "kinked".into(), tau_list: vec![0.2, 0.1, 0.05, 0.025], nodes: 321, p: 2.0, tau_max: 0.2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DbarSection {
    pub corpus: Vec<String>,
    /// Intervals per side of the (x1, r) lattice, each the double of the previous one.
    pub grids: Vec<usize>,
    /// centered or anchored.
    pub rule: String,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

impl Default for DbarSection {
    fn default() -> Self {
        DbarSection {
            corpus: vec!["bump".into(), "z-bump".into(), "zbar-bump".into()],
            grids: vec![20, 40, 80, 160],
            rule: "centered".into(),
            ratio_min: 1.7,
            ratio_max: 2.3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CgoSection {
    /// Coefficient preset: zero, smooth, rough or bump-q.
    pub coefficients: String,
    pub h_list: Vec<f64>,
    /// τ = kappa·√h.
    pub kappa: f64,
    pub n_theta: usize,
    pub lambda: f64,
    /// minnorm or dirichlet.
    pub remainder: String,
    /// Grid scales of the transport-residual refinement, at h = transport_h.
    pub transport_scales: Vec<f64>,
    pub transport_h: f64,
    pub transport_order_min: f64,
    /// Manufactured remainder solve at h = manufactured_h.
    pub manufactured_h: f64,
    pub manufactured_tol: f64,
    pub eikonal_tol: f64,
}

impl Default for CgoSection {
    fn default() -> Self {
        CgoSection {
            coefficients: "rough".into(),
            h_list: vec![0.4, 0.2, 0.1, 0.05],
            kappa: 1.0,
            n_theta: 9,
            lambda: 0.0,
            remainder: "minnorm".into(),
            transport_scales: vec![1.0, 2.0, 4.0],
            transport_h: 0.2,
            transport_order_min: 0.8,
            manufactured_h: 0.2,
            manufactured_tol: 1e-6,
            eikonal_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CarlemanSection {
    pub coefficients: Vec<String>,
    pub eps: f64,
    pub h_list: Vec<f64>,
    pub samples: usize,
    pub grid: [usize; 3],
    pub threshold: f64,
    /// Admissible weights need h ≤ eps / eps_ratio and eps ≤ eps_max.
    pub eps_ratio: f64,
    pub eps_max: f64,
    pub interior_h_list: Vec<f64>,
    pub interior_grid: [usize; 3],
    /// Interior samples vanish within this coordinate distance of ∂M.
    pub interior_collar: f64,
}

impl Default for CarlemanSection {
    fn default() -> Self {
        CarlemanSection {
            coefficients: vec!["zero".into(), "rough".into()],
            eps: 0.1,
            h_list: vec![0.05, 0.025],
            samples: 100,
            grid: [81, 161, 9],
            threshold: 0.01,
            eps_ratio: 2.0,
            eps_max: 0.25,
            interior_h_list: vec![0.4, 0.2, 0.1, 0.05],
            interior_grid: [41, 81, 9],
            interior_collar: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentitySection {
    pub scenarios: Vec<String>,
    pub h_list: Vec<f64>,
    pub n_theta: usize,
    pub collar: f64,
    pub probe_lambda_min: i32,
    pub probe_lambda_max: i32,
    pub probe_profiles: usize,
    pub identity_tol: f64,
    pub functional_tol: f64,
    pub gauge_tol: f64,
    pub closed_tol: f64,
    /// Green residual refinement: base lattice and multipliers.
    pub green_base: [usize; 3],
    pub green_levels: Vec<usize>,
    pub green_order_min: f64,
}

impl Default for IdentitySection {
    fn default() -> Self {
        IdentitySection {
            scenarios: vec!["gauge-smooth".into(), "gauge-rough".into(), "gauge-bump".into()],
            h_list: vec![0.4, 0.2, 0.1, 0.05],
            n_theta: 9,
            collar: 0.3,
            probe_lambda_min: -3,
            probe_lambda_max: 4,
            probe_profiles: 3,
            identity_tol: 1e-3,
            functional_tol: 1e-3,
            gauge_tol: 1e-3,
            closed_tol: 0.1,
            green_base: [8, 16, 6],
            green_levels: vec![1, 2, 4],
            green_order_min: 1.8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoverSection {
    pub grid: [usize; 3],
    pub lambda_min: i32,
    pub lambda_max: i32,
    pub profiles: usize,
    pub reg: f64,
    pub noise: f64,
    pub l_curve_min: f64,
    pub l_curve_max: f64,
    pub l_curve_count: usize,
    pub error_tol: f64,
    /// Write the data operator as a CSV triple.
    pub write_operator: bool,
}

impl Default for RecoverSection {
    fn default() -> Self {
        RecoverSection {
            grid: [12, 12, 6],
            lambda_min: -12,
            lambda_max: 11,
            profiles: 6,
            reg: 1e-6,
            noise: 0.01,
            l_curve_min: 1e-8,
            l_curve_max: 1e-1,
            l_curve_count: 15,
            error_tol: 0.10,
            write_operator: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EuclidSection {
    /// Euclidean sample points (x ≠ 0).
    pub points: Vec<[f64; 3]>,
    /// Test functions from the catalogue: x3, x1sq-x3-plus-x2, norm-sq, exp-x1-sin-x2.
    pub functions: Vec<String>,
    pub tol: f64,
}

impl Default for EuclidSection {
    fn default() -> Self {
        EuclidSection {
            points: vec![[0.3, 0.2, 1.1], [-0.5, 0.4, 0.7], [1.2, -0.3, 0.5], [0.1, 0.1, 2.0], [-0.8, -0.9, 0.3]],
            functions: vec!["x3".into(), "x1sq-x3-plus-x2".into(), "norm-sq".into(), "exp-x1-sin-x2".into()],
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdvectSection {
    /// Vector field preset of X₁: zero, smooth or swirl.
    pub field: String,
    /// Optional second field; empty means X₂ = X₁.
    pub second: String,
    pub grid: [usize; 3],
    pub operator_tol: f64,
    pub certificate_tol: f64,
    pub closed_tol: f64,
}

impl Default for AdvectSection {
    fn default() -> Self {
        AdvectSection {
            field: "smooth".into(),
            second: String::new(),
            grid: [21, 41, 9],
            operator_tol: 1e-3,
            certificate_tol: 1e-3,
            closed_tol: 0.1,
        }
    }
}

fn check_decreasing(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() || v.windows(2).any(|w| w[1] >= w[0]) || v.iter().any(|x| !(*x > 0.0)) {
        return Err(LabError::Config(format!("{name} must be a nonempty, positive, strictly decreasing list")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let value: toml::Table = text.parse().map_err(|e: toml::de::Error| LabError::Config(e.message().to_string()))?;
        for (section, body) in &value {
            let table = body.as_table().ok_or_else(|| LabError::Config(format!("top-level key '{section}' outside a section")))?;
            if let Some((k, _)) = table.iter().find(|(_, v)| v.is_table()) {
                return Err(LabError::Config(format!("nested section [{section}.{k}] is not allowed")));
            }
        }
        let cfg: ExperimentConfig = value.try_into().map_err(|e: toml::de::Error| LabError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.experiment.grid_scale > 0.0) {
            return Err(LabError::Config("grid_scale must be positive".into()));
        }
        check_decreasing("mollify.tau_list", &self.mollify.tau_list)?;
        check_decreasing("cgo.h_list", &self.cgo.h_list)?;
        check_decreasing("carleman.h_list", &self.carleman.h_list)?;
        check_decreasing("carleman.interior_h_list", &self.carleman.interior_h_list)?;
        check_decreasing("identity.h_list", &self.identity.h_list)?;
        if self.dbar.grids.len() < 2 || self.dbar.grids.windows(2).any(|w| w[1] != 2 * w[0]) {
            return Err(LabError::Config("dbar.grids must double at every step".into()));
        }
        if self.cgo.transport_scales.len() < 2 || self.cgo.transport_scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::Config("cgo.transport_scales must strictly increase".into()));
        }
        if self.identity.green_levels.len() < 2 || self.identity.green_levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::Config("identity.green_levels must strictly increase".into()));
        }
        if self.recover.lambda_min > self.recover.lambda_max || self.recover.profiles == 0 {
            return Err(LabError::Config("recover probe family is empty".into()));
        }
        if self.recover.reg < 0.0 || self.recover.noise < 0.0 {
            return Err(LabError::Config("recover.reg and recover.noise must be nonnegative".into()));
        }
        if !(self.recover.l_curve_min > 0.0 && self.recover.l_curve_max > self.recover.l_curve_min && self.recover.l_curve_count >= 2) {
            return Err(LabError::Config("recover L-curve ladder needs 0 < l_curve_min < l_curve_max and count ≥ 2".into()));
        }
        if self.dbar.rule != "centered" && self.dbar.rule != "anchored" {
            return Err(LabError::Config(format!("unknown cell rule '{}'", self.dbar.rule)));
        }
        if self.cgo.remainder != "minnorm" && self.cgo.remainder != "dirichlet" {
            return Err(LabError::Config(format!("unknown remainder mode '{}'", self.cgo.remainder)));
        }
        Ok(())
    }

    /// The configuration with every default filled in, in the file format.
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("configuration is serializable")
    }
}
