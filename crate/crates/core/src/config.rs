//! TOML experiment files shared by every subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::equilibrium::{FixedPointOptions, PhaseGrid};
use crate::error::{Error, Result};
use crate::infomatrix::{XyGrid, ZGrid};
use crate::kinetic::SolverConfig;
use crate::model::{DirectionPair, EigenRange, KernelSpec, PositionDomain, PotentialSpec};
use crate::particles::ParticleConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kernel: KernelSpec,
    pub potential: PotentialSpec,
    pub domain: PositionDomain,
}

/// Either a fixed pair or a grid to search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum DirectionConfig {
    Fixed { z1: f64, z2: f64 },
    Search { search: ZGrid },
}

fn default_points() -> usize {
    16
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificationConfig {
    /// Nodes per coordinate axis; the grid has `points_per_axis^(2d)` points.
    #[serde(default = "default_points")]
    pub points_per_axis: usize,
}

impl Default for CertificationConfig {
    fn default() -> Self {
        Self {
            points_per_axis: default_points(),
        }
    }
}

/// Eigenvalue ranges that override the model's own declarations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredBounds {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wxx: Option<EigenRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wxy: Option<EigenRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<EigenRange>,
}

fn default_delta() -> f64 {
    0.02
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Threshold for `2λ̲ − λ̄²`; `1 − δ` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub bounds: DeclaredBounds,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            delta: default_delta(),
            threshold: None,
            bounds: DeclaredBounds::default(),
        }
    }
}

fn default_identity_tol() -> f64 {
    0.05
}

fn default_dissipation_tol() -> f64 {
    crate::kinetic::DISSIPATION_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Window for rate fits; `[t_end / 5, t_end]` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    #[serde(default = "default_dissipation_tol")]
    pub dissipation_tol: f64,
    /// Largest accepted energy-identity defect.
    #[serde(default = "default_identity_tol")]
    pub identity_tol: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            fit_window: None,
            dissipation_tol: default_dissipation_tol(),
            identity_tol: default_identity_tol(),
        }
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub json: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out(),
            csv: true,
            json: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub direction: DirectionConfig,
    #[serde(default)]
    pub certification: CertificationConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub equilibrium: FixedPointOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pde: Option<SolverConfig>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<ParticleConfig>,
    #[serde(default)]
    pub outputs: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        check_finite(&toml::Value::Table(raw.clone()), "")?;
        let cfg: Self = raw.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        m.domain.validate().map_err(as_config)?;
        if m.domain.is_torus() && !(m.kernel.is_periodic() && m.potential.is_periodic()) {
            return Err(Error::Config(format!(
                "kernel '{}' or potential '{}' is not periodic and cannot live on a torus",
                m.kernel.name(),
                m.potential.name()
            )));
        }
        if self.certification.points_per_axis == 0 {
            return Err(Error::Config("certification.points_per_axis must be positive".into()));
        }
        if let DirectionConfig::Search { search } = &self.direction {
            if search.directions().is_empty() {
                return Err(Error::Config("direction search grid is empty".into()));
            }
        }
        let b = &self.checks.bounds;
        for r in [b.wxx, b.wxy, b.u].into_iter().flatten() {
            EigenRange::new(r.lo, r.hi).map_err(as_config)?;
        }
        if let Some(pde) = &self.pde {
            pde.validate()?;
            PhaseGrid::from_spec(m.domain, &pde.grid).map_err(as_config)?;
        }
        if let Some(p) = &self.particles {
            p.validate()?;
            if self.pde.is_none() {
                return Err(Error::Config(
                    "particle runs draw their initial state from the [pde] section".into(),
                ));
            }
        }
        if let Some([t0, t1]) = self.analysis.fit_window {
            if !(t0 < t1) {
                return Err(Error::Config(format!("fit window [{t0}, {t1}] is empty")));
            }
        }
        Ok(())
    }

    pub fn xy_grid(&self) -> Result<XyGrid> {
        XyGrid::new(self.model.domain, self.certification.points_per_axis)
    }

    /// The fixed pair, if one was given.
    pub fn fixed_direction(&self) -> Option<DirectionPair> {
        match self.direction {
            DirectionConfig::Fixed { z1, z2 } => Some(DirectionPair::new(z1, z2)),
            DirectionConfig::Search { .. } => None,
        }
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

fn check_finite(v: &toml::Value, path: &str) -> Result<()> {
    match v {
        toml::Value::Float(x) if !x.is_finite() => Err(Error::Config(format!("{path} is not finite"))),
        toml::Value::Table(t) => t.iter().try_for_each(|(k, v)| {
            let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
            check_finite(v, &p)
        }),
        toml::Value::Array(a) => a
            .iter()
            .enumerate()
            .try_for_each(|(i, v)| check_finite(v, &format!("{path}[{i}]"))),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[model]
kernel = { name = "difference", alpha = 0.05, omega = 1.0 }
potential = { name = "quadratic", kappa = 0.9 }
domain = { kind = "line", half_width = 6.0 }

[direction]
z1 = 1.0
z2 = 0.3

[pde]
dt = 0.001
t_end = 5.0
grid = { nx = 64, nv = 64 }
initial = { kind = "gaussian", x0 = 1.0, sigma_x = 0.8, v0 = 0.5, sigma_v = 1.0 }

[particles]
N = 2000
seed = 1
t_end = 1.0
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.fixed_direction(), Some(DirectionPair::new(1.0, 0.3)));
        assert_eq!(cfg.certification.points_per_axis, 16);
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn search_direction() {
        let text = SAMPLE.replace(
            "z1 = 1.0\nz2 = 0.3",
            "search = { kind = \"product\", z1_lo = 0.0, z1_hi = 3.0, z1_points = 5, z2_lo = 0.0, z2_hi = 3.0, z2_points = 5 }",
        );
        let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
        assert!(cfg.fixed_direction().is_none());
    }

    #[test]
    fn rejects_bad_files() {
        for bad in [
            SAMPLE.replace("difference", "nonexistent"),
            SAMPLE.replace("kappa = 0.9", "kappa = nan"),
            SAMPLE.replace("kind = \"line\", half_width = 6.0", "kind = \"torus\""),
            SAMPLE.replace("[direction]", "[direction]\nbogus = 1"),
            SAMPLE.replace("dt = 0.001", "dt = -1.0"),
            SAMPLE.replace("nx = 64", "nx = 1"),
        ] {
            assert!(matches!(ExperimentConfig::from_toml_str(&bad), Err(Error::Config(_))), "{bad}");
        }
    }
}
