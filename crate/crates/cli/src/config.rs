//! Experiment configuration files (TOML or JSON).

use std::path::Path;

use serde::Deserialize;

use quantbound_core::spaces::selfsimilar::Similarity;
use quantbound_core::spaces::Field;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Bounds,
    RdLower,
    MultiLetter,
    Quantize,
    VolumeCheck,
    VerifyCert,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Bounds => "bounds",
            Task::RdLower => "rd-lower",
            Task::MultiLetter => "multi-letter",
            Task::Quantize => "quantize",
            Task::VolumeCheck => "volume-check",
            Task::VerifyCert => "verify-cert",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpaceConfig {
    Sphere {
        d: u32,
        #[serde(default = "one")]
        r: f64,
        /// Codewords anywhere in ℝ^d instead of on the sphere.
        #[serde(default)]
        ambient: bool,
    },
    Grassmann {
        field: Field,
        r: usize,
        s: usize,
        d: usize,
    },
    Selfsimilar {
        #[serde(default)]
        maps: Vec<Similarity>,
        c_sub: Option<f64>,
        diam: Option<f64>,
        #[serde(default)]
        ambient: bool,
    },
    /// Middle-third Cantor set; codewords in ℝ unless `ambient = false`.
    Cantor {
        #[serde(default = "yes")]
        ambient: bool,
    },
    Interval,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistributionConfig {
    /// The reference measure itself.
    #[default]
    Uniform,
    /// von Mises-Fisher on a sphere; `mean` defaults to the last axis.
    Vmf { kappa: f64, mean: Option<Vec<f64>> },
    /// Analytic tasks only: entropy and Σ_p given directly.
    Custom { entropy: f64, p: f64, sigma_p: f64 },
}

/// An n list: `[1, 2, 8]`, `"1..64"` or `"2^0..2^12"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum NList {
    List(Vec<u64>),
    Spec(String),
}

impl NList {
    pub fn expand(&self) -> Result<Vec<u64>, CliError> {
        let bad = |s: &str| CliError::Config(format!("params.n_list: cannot parse \"{s}\""));
        let ns = match self {
            NList::List(v) => v.clone(),
            NList::Spec(s) => {
                let (a, b) = s.split_once("..").ok_or_else(|| bad(s))?;
                match (a.trim().strip_prefix("2^"), b.trim().strip_prefix("2^")) {
                    (Some(x), Some(y)) => {
                        let x: u32 = x.parse().map_err(|_| bad(s))?;
                        let y: u32 = y.parse().map_err(|_| bad(s))?;
                        if y > 63 {
                            return Err(bad(s));
                        }
                        (x..=y).map(|j| 1u64 << j).collect()
                    }
                    (None, None) => {
                        let x: u64 = a.trim().parse().map_err(|_| bad(s))?;
                        let y: u64 = b.trim().parse().map_err(|_| bad(s))?;
                        (x..=y).collect()
                    }
                    _ => return Err(bad(s)),
                }
            }
        };
        if ns.is_empty() || ns.contains(&0) {
            return Err(CliError::Config("params.n_list must be nonempty with entries ≥ 1".into()));
        }
        Ok(ns)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub n_list: Option<NList>,
    pub d_grid: Option<Vec<f64>>,
    pub ell_list: Option<Vec<u64>>,
    /// Product orders for rd-lower: ℓ i.i.d. letters under the summed distortion.
    #[serde(default = "single_letter")]
    pub letters: Vec<u64>,
    /// Ball radii for volume-check and verify-cert.
    pub radii: Option<Vec<f64>>,
    /// δ-schedule exponent for U_n.
    #[serde(default = "half")]
    pub alpha: f64,
    /// δ_D = D^α exponent for the sphere R-D bound.
    #[serde(default = "quarter")]
    pub rd_alpha: f64,
    /// Certificate radius where one is needed (Grassmannian, sphere multi-letter).
    pub delta0: Option<f64>,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_centers")]
    pub centers: usize,
    /// Exact h^{-1} inversion for the real equal-dimension Grassmannian.
    #[serde(default)]
    pub exact_inversion: bool,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            n_list: None,
            d_grid: None,
            ell_list: None,
            letters: single_letter(),
            radii: None,
            alpha: half(),
            rd_alpha: quarter(),
            delta0: None,
            budget: default_budget(),
            samples: default_samples(),
            centers: default_centers(),
            exact_inversion: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Option<Task>,
    pub seed: Option<u64>,
    pub space: SpaceConfig,
    #[serde(default)]
    pub distribution: DistributionConfig,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.extension().and_then(|e| e.to_str()) == Some("json"))
    }

    pub fn parse(text: &str, json: bool) -> Result<Self, CliError> {
        if json {
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
        }
    }

    pub fn n_list(&self) -> Result<Vec<u64>, CliError> {
        self.params.n_list.as_ref().ok_or_else(|| missing("params.n_list"))?.expand()
    }

    pub fn d_grid(&self) -> Result<Vec<f64>, CliError> {
        positive_list(self.params.d_grid.as_deref(), "params.d_grid")
    }

    pub fn radii(&self) -> Result<Vec<f64>, CliError> {
        positive_list(self.params.radii.as_deref(), "params.radii")
    }

    pub fn ell_list(&self) -> Result<Vec<u64>, CliError> {
        match self.params.ell_list.as_deref() {
            None => Err(missing("params.ell_list")),
            Some(v) if v.is_empty() || v.contains(&0) => {
                Err(CliError::Config("params.ell_list must be nonempty with entries ≥ 1".into()))
            }
            Some(v) => Ok(v.to_vec()),
        }
    }
}

fn missing(field: &str) -> CliError {
    CliError::Config(format!("missing required field {field}"))
}

fn positive_list(v: Option<&[f64]>, field: &str) -> Result<Vec<f64>, CliError> {
    match v {
        None => Err(missing(field)),
        Some(v) if v.is_empty() || v.iter().any(|x| !(*x > 0.0 && x.is_finite())) => {
            Err(CliError::Config(format!("{field} must be nonempty with positive entries")))
        }
        Some(v) => Ok(v.to_vec()),
    }
}

fn single_letter() -> Vec<u64> {
    vec![1]
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn half() -> f64 {
    0.5
}

fn quarter() -> f64 {
    0.25
}

fn default_budget() -> usize {
    200_000
}

fn default_samples() -> usize {
    100_000
}

fn default_centers() -> usize {
    4
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_toml_and_json() {
        let toml = r#"
            task = "bounds"
            seed = 7
            [space]
            type = "sphere"
            d = 3
            [distribution]
            type = "vmf"
            kappa = 2.0
            [params]
            n_list = "2^0..2^3"
        "#;
        let c = ExperimentConfig::parse(toml, false).unwrap();
        assert_eq!(c.task, Some(Task::Bounds));
        assert_eq!(c.n_list().unwrap(), vec![1, 2, 4, 8]);
        assert!(matches!(c.space, SpaceConfig::Sphere { d: 3, r, ambient: false } if r == 1.0));
        let json = r#"{"seed": 1, "space": {"type": "grassmann", "field": "C", "r": 1, "s": 1, "d": 2},
                       "params": {"n_list": [1, 5]}}"#;
        let c = ExperimentConfig::parse(json, true).unwrap();
        assert_eq!(c.n_list().unwrap(), vec![1, 5]);
        assert_eq!(c.distribution, DistributionConfig::Uniform);
    }

    #[test]
    fn rejects_unknown_space_and_bad_lists() {
        let e = ExperimentConfig::parse("seed = 1\n[space]\ntype = \"torus\"\n", false).unwrap_err();
        assert!(e.to_string().contains("torus"), "{e}");
        assert_eq!(NList::Spec("3..5".into()).expand().unwrap(), vec![3, 4, 5]);
        assert!(NList::Spec("0..5".into()).expand().is_err());
        assert!(NList::Spec("2^1..9".into()).expand().is_err());
    }
}
