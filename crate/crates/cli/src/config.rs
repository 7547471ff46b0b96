use std::path::{Path, PathBuf};

use congestio::counterexamples::{PairTolerances, Window};
use congestio::solver::{Formulation, InitialKind};
use congestio::Params;
use serde::{Deserialize, Serialize};

/// Version of the config and output schemas.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub formulation: Formulation,
    #[serde(default)]
    pub datum: Option<InitialKind>,
    #[serde(default)]
    pub gamma_list: Option<Vec<f64>>,
    /// Snapshot times; `[T]` when empty.
    #[serde(default)]
    pub output_times: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub duality: Option<DualityScenario>,
    #[serde(default)]
    pub counterexample: Option<CounterexampleConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case", deny_unknown_fields)]
pub enum DualityScenario {
    /// `u = -sgn(x)` flow and atom against the closed form.
    SignFlow {
        #[serde(default = "default_intervals")]
        intervals: usize,
    },
    /// Pushforward constancy over the random velocity corpus.
    Corpus {
        #[serde(default = "default_intervals")]
        intervals: usize,
        #[serde(default = "default_count")]
        count: usize,
    },
    /// Lebesgue measure held fixed under `u = -sgn(x)`; always fails.
    FrozenNonSolution {
        #[serde(default = "default_intervals")]
        intervals: usize,
    },
    /// Density snapshots of a solver run of the configured datum.
    Solver,
}

fn default_intervals() -> usize {
    400
}

fn default_count() -> usize {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Decelerating,
    Remark,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub family: Family,
    #[serde(default = "default_t_ref")]
    pub t_ref: f64,
    /// Defaults to `[0, t_ref] x [-1, 1]`.
    #[serde(default)]
    pub window: Option<Window>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub tolerances: PairTolerances,
}

fn default_t_ref() -> f64 {
    1.0
}

fn default_order() -> usize {
    12
}

impl CounterexampleConfig {
    pub fn window(&self) -> congestio::Result<Window> {
        match self.window {
            Some(w) => Window::new(w.horizon, w.a, w.b),
            None => Window::new(self.t_ref, -1.0, 1.0),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks shared by every command.
    pub fn validate(&self) -> Result<(), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        self.params.validate().map_err(|e| e.to_string())?;
        if let Some(t) = self
            .output_times
            .iter()
            .find(|&&t| !(t > 0.0 && t <= self.params.horizon))
        {
            return Err(format!("output time {t} outside (0, T = {}]", self.params.horizon));
        }
        if self.output_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err("output_times must be strictly increasing".into());
        }
        Ok(())
    }

    pub fn datum(&self) -> Result<&InitialKind, String> {
        self.datum.as_ref().ok_or_else(|| "config has no datum".to_string())
    }

    pub fn output_times(&self) -> Vec<f64> {
        if self.output_times.is_empty() {
            vec![self.params.horizon]
        } else {
            self.output_times.clone()
        }
    }

    /// Nonempty, strictly ascending, each entry a valid stiffness.
    pub fn gamma_list(&self) -> Result<Vec<f64>, String> {
        let list = self.gamma_list.clone().unwrap_or_default();
        if list.is_empty() {
            return Err("gamma_list must be nonempty".into());
        }
        if list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(format!("gamma_list must be strictly ascending, got {list:?}"));
        }
        for &gamma in &list {
            Params {
                gamma,
                ..self.params.clone()
            }
            .validate()
            .map_err(|e| e.to_string())?;
        }
        Ok(list)
    }
}
