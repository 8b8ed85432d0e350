use std::path::{Path, PathBuf};

use conformal_torsion::{ConformalMetric, MetricFamily};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MAX_L: usize = 96;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricSection,
    pub discretization: DiscretizationSection,
    pub theta: ThetaSection,
    pub fit: FitSection,
    pub zeta: ZetaSection,
    pub family: FamilySection,
    pub anomaly: AnomalySection,
    pub output: OutputSection,
    pub cache: CacheSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSection {
    pub spec: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationSection {
    pub l: usize,
    /// Nodes per hemisphere; defaults to 2L + 2.
    pub n_theta: Option<usize>,
    pub n_phi: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaSection {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub geometric: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    /// Explicit [t_lo, t_hi]; derived from the truncation bound when absent.
    pub window: Option<[f64; 2]>,
    pub nodes: usize,
    pub degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZetaSection {
    pub s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilySection {
    pub spec: String,
    pub parameters: Vec<f64>,
    pub t_set: Vec<f64>,
    /// Degree used for the resolvent and heat-operator tables.
    pub resolvent_l: usize,
    /// Parameters at which the variation bounds are checked.
    pub variation_u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnomalySection {
    pub reference: String,
    pub metrics: Vec<String>,
    /// The metric paired with `reference` for sign calibration.
    pub calibration: String,
    /// Nodes per hemisphere for the anomaly integrals.
    pub quadrature_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CacheSection {
    pub enabled: bool,
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub threads: usize,
}

impl Default for MetricSection {
    fn default() -> Self {
        Self { spec: "fs".into() }
    }
}

impl Default for DiscretizationSection {
    fn default() -> Self {
        Self {
            l: 32,
            n_theta: None,
            n_phi: None,
        }
    }
}

impl Default for ThetaSection {
    fn default() -> Self {
        Self {
            lo: 0.01,
            hi: 10.0,
            count: 60,
            geometric: true,
        }
    }
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            window: None,
            nodes: conformal_torsion::heat::WINDOW_NODES,
            degree: conformal_torsion::heat::FIT_DEGREE,
        }
    }
}

impl Default for ZetaSection {
    fn default() -> Self {
        Self { s: vec![1.5, 2.0, 3.0] }
    }
}

impl Default for FamilySection {
    fn default() -> Self {
        Self {
            spec: "pnorm".into(),
            parameters: vec![2.0, 4.0, 8.0, 16.0, 32.0],
            t_set: vec![0.5, 1.0, 2.0],
            resolvent_l: 16,
            variation_u: vec![1.5, 2.5, 3.5, 5.5],
        }
    }
}

impl Default for AnomalySection {
    fn default() -> Self {
        Self {
            reference: "fs".into(),
            metrics: vec!["pnorm:2".into(), "pnorm:4".into(), "pnorm:8".into()],
            calibration: "pnorm:2".into(),
            quadrature_nodes: 400,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

impl Default for CacheSection {
    fn default() -> Self {
        Self {
            enabled: true,
            dir: ".ctorsion-cache".into(),
        }
    }
}

impl Default for RunSection {
    fn default() -> Self {
        Self { threads: 1 }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be a positive finite number, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn n_theta(&self) -> usize {
        self.discretization.n_theta.unwrap_or(2 * self.discretization.l + 2)
    }

    pub fn n_phi(&self) -> usize {
        self.discretization.n_phi.unwrap_or(2 * self.discretization.l + 2)
    }

    pub fn metric(&self) -> Result<ConformalMetric, CliError> {
        ConformalMetric::parse(&self.metric.spec).map_err(|e| invalid(e.to_string()))
    }

    /// Family with enough members for the largest parameter.
    pub fn family(&self) -> Result<MetricFamily, CliError> {
        let top = self.family.parameters.iter().copied().fold(1.0, f64::max);
        MetricFamily::parse(&self.family.spec, top.ceil() as usize + 1).map_err(|e| invalid(e.to_string()))
    }

    /// Cache directory, honouring `CTORSION_CACHE_DIR`.
    pub fn cache_dir(&self) -> PathBuf {
        match std::env::var_os("CTORSION_CACHE_DIR") {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.cache.dir.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let d = &self.discretization;
        if d.l == 0 || d.l > MAX_L {
            return Err(invalid(format!("discretization.l must be in 1..={MAX_L}, got {}", d.l)));
        }
        if self.n_theta() < 2 * d.l + 2 || self.n_phi() < 2 * d.l + 2 {
            return Err(invalid(format!(
                "n_theta and n_phi must be at least 2L + 2 = {}",
                2 * d.l + 2
            )));
        }
        self.metric()?;
        let t = &self.theta;
        check_positive("theta.lo", t.lo)?;
        check_positive("theta.hi", t.hi)?;
        if t.hi <= t.lo || t.count < 2 {
            return Err(invalid("theta grid needs lo < hi and count >= 2"));
        }
        if let Some([lo, hi]) = self.fit.window {
            check_positive("fit.window[0]", lo)?;
            if hi <= lo {
                return Err(invalid("fit.window must satisfy lo < hi"));
            }
        }
        if !(1..=6).contains(&self.fit.degree) || self.fit.nodes < self.fit.degree + 2 {
            return Err(invalid("fit.degree must be in 1..=6 with nodes >= degree + 2"));
        }
        if let Some(s) = self.zeta.s.iter().find(|s| !(s.is_finite() && **s > 1.0)) {
            return Err(invalid(format!("zeta.s values must exceed 1, got {s}")));
        }
        let f = &self.family;
        if f.parameters.is_empty() || f.parameters.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("family.parameters must be non-empty and strictly ascending"));
        }
        if f.parameters.iter().any(|&u| !(1.0..=4096.0).contains(&u)) {
            return Err(invalid("family.parameters must lie in [1, 4096]"));
        }
        for &u in &f.t_set {
            check_positive("family.t_set", u)?;
        }
        if f.resolvent_l == 0 || f.resolvent_l > MAX_L {
            return Err(invalid(format!("family.resolvent_l must be in 1..={MAX_L}")));
        }
        self.family()?;
        for spec in std::iter::once(&self.anomaly.reference)
            .chain(&self.anomaly.metrics)
            .chain(std::iter::once(&self.anomaly.calibration))
        {
            ConformalMetric::parse(spec).map_err(|e| invalid(e.to_string()))?;
        }
        if self.anomaly.quadrature_nodes < 8 {
            return Err(invalid("anomaly.quadrature_nodes must be at least 8"));
        }
        if self.run.threads == 0 {
            return Err(invalid("run.threads must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
        let cfg = RunConfig::from_toml("[metric]\nspec = \"pnorm:3\"\n[discretization]\nl = 8\n").unwrap();
        assert_eq!(cfg.n_theta(), 18);
        assert_eq!(cfg.metric.spec, "pnorm:3");
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(RunConfig::from_toml("[metric]\nspecc = \"fs\"\n").is_err());
        assert!(RunConfig::from_toml("[bogus]\n").is_err());
        assert!(RunConfig::from_toml("[discretization]\nl = 0\n").is_err());
        assert!(RunConfig::from_toml("[discretization]\nl = 8\nn_theta = 10\n").is_err());
        assert!(RunConfig::from_toml("[zeta]\ns = [0.5]\n").is_err());
        assert!(RunConfig::from_toml("[metric]\nspec = \"pnorm:0\"\n").is_err());
    }
}
