//! Experiment configuration in TOML.
//!
//! ```toml
//! seed = 42
//! workers = 4
//! pairs = 300
//! replicas = 1
//! n_grid = [16384, 65536]
//! length_law = "exp:1"
//!
//! [model]
//! kind = "girg"        # girg | girg_threshold | sfp | hrg | hrg_threshold
//! d = 2
//! tau = 2.5
//! alpha = 1.95
//! edge_density = 0.05  # optional
//!
//! [output]
//! csv = "distances.csv"
//! json = "summary.json"
//! ```
//! For `sfp` the grid holds lattice radii `m`; for the other models it holds
//! vertex counts.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::dist::{EdgeLengthDistribution, VertexWeightModel};
use crate::genmodel::{
    generate_girg, generate_hrg, generate_sfp, GChoice, GirgParams, HrgParams, SamplerOptions, SfpParams, SpatialGraph,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Girg {
        d: usize,
        tau: f64,
        alpha: f64,
        #[serde(default)]
        g: Option<String>,
        #[serde(default)]
        weight_cap: Option<f64>,
        /// Prefactor of the power-law connection term; 1 by default.
        #[serde(default)]
        edge_density: Option<f64>,
    },
    GirgThreshold {
        d: usize,
        tau: f64,
        #[serde(default)]
        weight_cap: Option<f64>,
        /// Scales the connection radius `(w1 w2)^{1/d}`; 1 by default.
        #[serde(default)]
        edge_density: Option<f64>,
    },
    Sfp {
        d: usize,
        alpha_tilde: f64,
        tau_tilde: f64,
        lambda: f64,
    },
    Hrg {
        alpha_h: f64,
        #[serde(default)]
        c_h: f64,
        t_h: f64,
    },
    HrgThreshold {
        alpha_h: f64,
        #[serde(default)]
        c_h: f64,
    },
}

fn with_density(mut p: GirgParams, density: Option<f64>) -> GirgParams {
    if let Some(a) = density {
        p.a1_under = a;
        p.a1_over = a;
    }
    p
}

fn weight_model(tau: f64, cap: Option<f64>) -> Result<VertexWeightModel> {
    match cap {
        Some(c) => VertexWeightModel::truncated_pareto(tau, c),
        None => VertexWeightModel::pareto(tau),
    }
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Girg { .. } => "girg",
            ModelSpec::GirgThreshold { .. } => "girg_threshold",
            ModelSpec::Sfp { .. } => "sfp",
            ModelSpec::Hrg { .. } => "hrg",
            ModelSpec::HrgThreshold { .. } => "hrg_threshold",
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, ModelSpec::Sfp { .. })
    }

    pub fn girg_params(&self) -> Option<GirgParams> {
        match self {
            ModelSpec::Girg { d, tau, alpha, g, edge_density, .. } => {
                let choice = g.as_deref().map(GChoice::parse).transpose().ok()?.unwrap_or(GChoice::Canonical);
                Some(with_density(GirgParams::new(*d, *tau, *alpha).with_choice(choice), *edge_density))
            }
            // alpha is unused by the threshold kernel
            ModelSpec::GirgThreshold { d, tau, edge_density, .. } => {
                Some(with_density(GirgParams::new(*d, *tau, 2.0).with_choice(GChoice::Threshold), *edge_density))
            }
            _ => None,
        }
    }

    fn sfp_params(&self, m: usize) -> Option<SfpParams> {
        match *self {
            ModelSpec::Sfp { d, alpha_tilde, tau_tilde, lambda } => Some(SfpParams { d, alpha_tilde, tau_tilde, lambda, m }),
            _ => None,
        }
    }

    fn hrg_params(&self, n: usize) -> Option<HrgParams> {
        match *self {
            ModelSpec::Hrg { alpha_h, c_h, t_h } => Some(HrgParams { alpha_h, c_h, t_h: Some(t_h), n }),
            ModelSpec::HrgThreshold { alpha_h, c_h } => Some(HrgParams { alpha_h, c_h, t_h: None, n }),
            _ => None,
        }
    }

    /// Parameter checks independent of the size.
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Girg { g, weight_cap, tau, .. } => {
                if let Some(g) = g {
                    GChoice::parse(g)?;
                }
                self.girg_params().expect("girg").validate()?;
                weight_model(*tau, *weight_cap).map(|_| ())
            }
            ModelSpec::GirgThreshold { tau, weight_cap, .. } => {
                self.girg_params().expect("girg").validate()?;
                weight_model(*tau, *weight_cap).map(|_| ())
            }
            ModelSpec::Sfp { .. } => self.sfp_params(1).expect("sfp").validate(),
            ModelSpec::Hrg { .. } | ModelSpec::HrgThreshold { .. } => self.hrg_params(2).expect("hrg").validate(),
        }
    }

    /// Parameter combinations outside the explosive regime.
    pub fn regime_flags(&self) -> Vec<String> {
        match self {
            ModelSpec::Girg { .. } | ModelSpec::GirgThreshold { .. } => self.girg_params().expect("girg").regime_warnings(),
            ModelSpec::Sfp { .. } => {
                let p = self.sfp_params(1).expect("sfp");
                if p.headline_regime() {
                    vec![]
                } else {
                    vec![format!("gamma_sfp = {} lies outside (1,2)", p.gamma_sfp())]
                }
            }
            ModelSpec::Hrg { .. } | ModelSpec::HrgThreshold { .. } => vec![],
        }
    }

    /// Graph of size `size` (vertex count, or lattice radius for SFP).
    pub fn generate(&self, size: usize, seed: u64, opts: SamplerOptions) -> Result<SpatialGraph> {
        match self {
            ModelSpec::Girg { tau, weight_cap, .. } | ModelSpec::GirgThreshold { tau, weight_cap, .. } => {
                generate_girg(&self.girg_params().expect("girg"), size, &weight_model(*tau, *weight_cap)?, seed, opts)
            }
            ModelSpec::Sfp { tau_tilde, .. } => {
                // P(W > x) = x^{-(tau_tilde - 1)}
                let weights = VertexWeightModel::pareto(*tau_tilde)?;
                generate_sfp(&self.sfp_params(size).expect("sfp"), &weights, seed, opts)
            }
            ModelSpec::Hrg { .. } | ModelSpec::HrgThreshold { .. } => generate_hrg(&self.hrg_params(size).expect("hrg"), seed, opts),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub ecdf: Option<PathBuf>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
    pub pairs: usize,
    #[serde(default = "one")]
    pub replicas: usize,
    pub n_grid: Vec<usize>,
    pub length_law: String,
    pub model: ModelSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid must not be empty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_grid must be strictly increasing".into()));
        }
        if self.pairs < 1 || self.replicas < 1 || self.workers < 1 {
            return Err(Error::Config("pairs, replicas and workers must be at least 1".into()));
        }
        self.length_law()?;
        self.model.validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn length_law(&self) -> Result<EdgeLengthDistribution> {
        self.length_law.parse::<EdgeLengthDistribution>().map_err(|e| Error::Config(format!("length_law: {e}")))
    }
}
