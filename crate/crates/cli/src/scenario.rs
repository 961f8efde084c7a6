//! Scenario files: JSON, validated strictly (unknown keys are rejected).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: Option<String>,
    pub n: Option<f64>,
    pub sigma0: Option<f64>,
    /// Alternative to `sigma0` for the power-law isentropes: `T = c·w(v)^{-2/n}`.
    pub power_constant: Option<f64>,
    pub mu: Option<f64>,
    pub permeability: Option<Permeability>,
    pub v_range: Option<[f64; 2]>,
    pub samples: Option<usize>,
    #[serde(rename = "box")]
    pub domain: Option<BoxSpec>,
    #[serde(default)]
    pub sources: Vec<Source>,
    pub v0: Option<V0Spec>,
    pub binodal: Option<BinodalSpec>,
    pub radial: Option<RadialSpec>,
    pub sampling: Option<SamplingSpec>,
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum Permeability {
    Isotropic { isotropic: f64 },
    Anisotropic { eigs: [f64; 3], frame: [[f64; 3]; 3] },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub n: [usize; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    pub pos: [f64; 3],
    #[serde(rename = "I")]
    pub intensity: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum V0Spec {
    Constant(f64),
    Table(V0Table),
}

/// Boundary volumes from a CSV file with columns `x1,x2,x3,v0`; each boundary
/// node takes the value of the nearest listed point.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct V0Table {
    pub expr: String,
    pub file: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinodalSpec {
    pub t_min: f64,
    #[serde(default = "default_binodal_steps")]
    pub steps: usize,
}

fn default_binodal_steps() -> usize {
    300
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub points: [usize; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub format: Option<crate::output::Format>,
    pub path: Option<PathBuf>,
}

impl<'de> Deserialize<'de> for crate::output::Format {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match String::deserialize(d)?.as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(serde::de::Error::custom(format!("unknown format '{other}' (expected csv or json)"))),
        }
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut s: Scenario =
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        // relative file references are resolved against the scenario file
        if let Some(V0Spec::Table(t)) = &mut s.v0 {
            if t.file.is_relative() {
                if let Some(dir) = path.parent() {
                    t.file = dir.join(&t.file);
                }
            }
        }
        if let Some(model) = &s.model {
            if let Some(file) = model.strip_prefix("virial:") {
                let p = Path::new(file);
                if p.is_relative() {
                    if let Some(dir) = path.parent() {
                        s.model = Some(format!("virial:{}", dir.join(p).display()));
                    }
                }
            }
        }
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.sigma0.is_some() && self.power_constant.is_some() {
            return Err(CliError::Input("give either sigma0 or power_constant, not both".into()));
        }
        if let Some(V0Spec::Table(t)) = &self.v0 {
            if t.expr != "table" {
                return Err(CliError::Input(format!("unknown v0 expression '{}' (expected \"table\")", t.expr)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let r: Result<Scenario, _> = serde_json::from_str(r#"{"sigma0": 1.0, "colour": "red"}"#);
        assert!(r.is_err());
        let r: Result<Scenario, _> = serde_json::from_str(r#"{"box": {"lower": [0,0,0], "upper": [1,1,1], "n": [8,8,8], "h": 1}}"#);
        assert!(r.is_err());
    }

    #[test]
    fn full_scenario_parses() {
        let s: Scenario = serde_json::from_str(
            r#"{
                "model": "vdw", "n": 3, "sigma0": 2.0, "mu": 1.0,
                "permeability": {"eigs": [1, 2, 3], "frame": [[1,0,0],[0,1,0],[0,0,1]]},
                "v_range": [0.5, 100], "samples": 256,
                "box": {"lower": [-1,-1,-1], "upper": [1,1,1], "n": [16,16,16]},
                "sources": [{"pos": [0,0,0], "I": -0.5}],
                "v0": {"expr": "table", "file": "v0.csv"},
                "binodal": {"t_min": 0.3}
            }"#,
        )
        .unwrap();
        assert!(matches!(s.permeability, Some(Permeability::Anisotropic { .. })));
        assert!(matches!(s.v0, Some(V0Spec::Table(_))));
        assert_eq!(s.binodal.unwrap().steps, 300);
        let s: Scenario = serde_json::from_str(r#"{"permeability": {"isotropic": 2.5}, "v0": 4.0}"#).unwrap();
        assert!(matches!(s.permeability, Some(Permeability::Isotropic { isotropic }) if isotropic == 2.5));
        assert!(matches!(s.v0, Some(V0Spec::Constant(v)) if v == 4.0));
    }
}
