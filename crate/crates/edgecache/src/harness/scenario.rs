//! Scenario configuration: JSON files and built-in presets.
//!
//! A scenario pins the grid, catalogue dynamics, cache capacity, penalty,
//! horizon and the demand-model parameters. The preset families `ins1.*`
//! through `ins7.*` range from a 3-SCBS line with a 10-content catalogue to
//! a 15-SCBS grid with 1000+ contents.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::demand::ArModel;
use crate::error::{Error, Result};
use crate::policies::SolverMode;
use crate::topology::GridTopology;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologySpec {
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "default_hop_cost")]
    pub hop_cost: i64,
    #[serde(default = "default_mcbs_cost")]
    pub mcbs_cost: i64,
}

fn default_hop_cost() -> i64 {
    2
}

fn default_mcbs_cost() -> i64 {
    20
}

/// Stage-scale profile `mu_t`: flat, the built-in two-peak diurnal shape, or
/// explicit per-stage values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MuProfile {
    Named(String),
    Custom(Vec<f64>),
}

impl Default for MuProfile {
    fn default() -> Self {
        MuProfile::Named("diurnal".into())
    }
}

impl MuProfile {
    /// Expands the profile to `horizon` per-stage factors.
    pub fn expand(&self, horizon: u32) -> Result<Vec<f64>> {
        match self {
            MuProfile::Custom(values) => {
                if values.len() != horizon as usize {
                    return Err(Error::Validation(format!(
                        "mu profile has {} entries but the horizon is {horizon}",
                        values.len()
                    )));
                }
                Ok(values.clone())
            }
            MuProfile::Named(name) => match name.as_str() {
                "flat" => Ok(vec![1.0; horizon as usize]),
                "diurnal" => Ok(diurnal_profile(horizon)),
                other => Err(Error::Validation(format!("unknown mu profile {other:?}"))),
            },
        }
    }
}

/// Two-peak daily shape: a night trough, a midday and an evening peak,
/// linearly interpolated and stretched to the horizon.
pub fn diurnal_profile(horizon: u32) -> Vec<f64> {
    const ANCHORS: [(f64, f64); 6] =
        [(0.0, 0.8), (0.13, 0.5), (0.48, 1.5), (0.65, 1.0), (0.83, 1.5), (1.0, 0.8)];
    (1..=horizon)
        .map(|t| {
            let frac = if horizon == 1 { 0.0 } else { (t - 1) as f64 / (horizon - 1) as f64 };
            let after = ANCHORS.iter().position(|&(f, _)| f >= frac).unwrap_or(ANCHORS.len() - 1);
            if after == 0 {
                return ANCHORS[0].1;
            }
            let (f0, v0) = ANCHORS[after - 1];
            let (f1, v1) = ANCHORS[after];
            v0 + (v1 - v0) * (frac - f0) / (f1 - f0)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArSpec {
    #[serde(default = "default_beta")]
    pub beta: Vec<f64>,
    #[serde(default = "default_sigma")]
    pub noise_sigma: f64,
    #[serde(default = "default_skew")]
    pub zipf_skew: f64,
    #[serde(default)]
    pub mu_profile: MuProfile,
}

fn default_beta() -> Vec<f64> {
    vec![0.6, 0.3, 0.1]
}

fn default_sigma() -> f64 {
    0.5
}

fn default_skew() -> f64 {
    0.8
}

impl Default for ArSpec {
    fn default() -> Self {
        ArSpec {
            beta: default_beta(),
            noise_sigma: default_sigma(),
            zipf_skew: default_skew(),
            mu_profile: MuProfile::default(),
        }
    }
}

/// A full experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub topology: TopologySpec,
    /// Initial catalogue size.
    pub n0: usize,
    #[serde(default)]
    pub arrivals_per_stage: u32,
    /// Uniform per-SCBS cache capacity.
    pub capacity: u32,
    /// Per-change update penalty; required.
    #[serde(default)]
    pub gamma: Option<i64>,
    #[serde(default = "default_horizon")]
    pub horizon: u32,
    #[serde(default)]
    pub ar: ArSpec,
    /// Average requests per content per stage at scale 1.
    #[serde(default = "default_scale")]
    pub demand_scale: f64,
    #[serde(default = "default_reps")]
    pub replications: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Default solver for forecast-driven policies.
    #[serde(default)]
    pub solver: Option<SolverMode>,
    /// Replace Poisson draws by rounded means (fixture mode).
    #[serde(default)]
    pub deterministic_demand: bool,
}

fn default_horizon() -> u32 {
    24
}

fn default_scale() -> f64 {
    1.0
}

fn default_reps() -> u32 {
    100
}

fn default_seed() -> u64 {
    42
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::Validation("horizon must be at least 1".into()));
        }
        if self.replications < 1 {
            return Err(Error::Validation("replications must be at least 1".into()));
        }
        if self.n0 < 1 {
            return Err(Error::Validation("n0 must be at least 1".into()));
        }
        if self.demand_scale <= 0.0 {
            return Err(Error::Validation("demand_scale must be positive".into()));
        }
        match self.gamma {
            None => return Err(Error::Validation("missing field: gamma".into())),
            Some(g) if g < 0 => return Err(Error::Validation("gamma must be nonnegative".into())),
            _ => {}
        }
        self.grid()?;
        self.ar_model()?;
        Ok(())
    }

    pub fn gamma(&self) -> i64 {
        self.gamma.expect("validated scenario")
    }

    pub fn grid(&self) -> Result<GridTopology> {
        GridTopology::build_grid(
            self.topology.rows,
            self.topology.cols,
            self.topology.hop_cost,
            self.topology.mcbs_cost,
        )
    }

    pub fn ar_model(&self) -> Result<ArModel> {
        ArModel::new(
            self.ar.beta.clone(),
            self.ar.mu_profile.expand(self.horizon)?,
            self.ar.noise_sigma,
            self.ar.zipf_skew,
        )
    }

    pub fn num_scbs(&self) -> usize {
        self.topology.rows * self.topology.cols
    }

    /// Cache-to-catalogue ratio `M * b / n0`, the Ratio column of the preset
    /// table.
    pub fn ratio(&self) -> f64 {
        (self.num_scbs() as f64 * self.capacity as f64) / self.n0 as f64
    }

    /// Final catalogue size after all arrivals.
    pub fn final_catalog_size(&self) -> usize {
        self.n0 + (self.arrivals_per_stage as usize) * (self.horizon as usize)
    }

    /// Default solver for forecast-driven policies: the explicit setting if
    /// present, otherwise exact when the stage solver's work estimate stays
    /// small, the single-copy flow for mid-size catalogues, and the greedy
    /// heuristic beyond.
    pub fn default_solver(&self) -> SolverMode {
        if let Some(mode) = self.solver {
            return mode;
        }
        let m = self.num_scbs() as u32;
        let states = (self.capacity as u128 + 1).saturating_pow(m);
        let transitions = states
            .saturating_mul(self.final_catalog_size() as u128)
            .saturating_mul(1u128 << m.min(30));
        if transitions <= 1_000_000 {
            SolverMode::Exact
        } else if self.final_catalog_size() <= 300 {
            SolverMode::SingleCopyFlow
        } else {
            SolverMode::Greedy
        }
    }

    /// Built-in preset by name (`ins1.1` .. `ins7.4`).
    pub fn preset(name: &str) -> Option<ScenarioSpec> {
        let (family, variant) = name.strip_prefix("ins")?.split_once('.')?;
        let family: usize = family.parse().ok()?;
        let variant: usize = variant.parse().ok()?;
        if !(1..=7).contains(&family) || !(1..=4).contains(&variant) {
            return None;
        }
        // (rows, cols, n0, arrivals, capacities, default solver)
        let (rows, cols, n0, arrivals, caps, solver) = match family {
            1 => (1, 3, 10, 1, [1, 2, 3, 4], SolverMode::Exact),
            2 => (1, 3, 100, 2, [10, 20, 30, 40], SolverMode::SingleCopyFlow),
            3 => (2, 3, 100, 2, [4, 8, 12, 17], SolverMode::SingleCopyFlow),
            4 => (2, 3, 500, 5, [20, 40, 60, 80], SolverMode::Greedy),
            5 => (3, 4, 500, 5, [10, 20, 30, 40], SolverMode::Greedy),
            6 => (3, 4, 1000, 10, [20, 40, 60, 80], SolverMode::Greedy),
            7 => (3, 5, 1000, 10, [17, 33, 50, 66], SolverMode::Greedy),
            _ => unreachable!(),
        };
        Some(ScenarioSpec {
            name: name.to_string(),
            topology: TopologySpec { rows, cols, hop_cost: 2, mcbs_cost: 20 },
            n0,
            arrivals_per_stage: arrivals,
            capacity: caps[variant - 1],
            gamma: Some(100),
            horizon: 24,
            ar: ArSpec::default(),
            demand_scale: 1.0,
            replications: 100,
            seed: 42,
            solver: Some(solver),
            deterministic_demand: false,
        })
    }

    /// Loads a scenario by preset name or from a JSON file, validated.
    pub fn load(name_or_path: &str) -> Result<ScenarioSpec> {
        let spec = match ScenarioSpec::preset(name_or_path) {
            Some(preset) => preset,
            None => {
                let path = Path::new(name_or_path);
                if !path.exists() {
                    return Err(Error::Validation(format!(
                        "{name_or_path:?} is neither a preset (ins1.1 .. ins7.4) nor a file"
                    )));
                }
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}
