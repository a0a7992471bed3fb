//! Experiment configuration: one JSON document per run.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use vqclone_core::{CloneTask, CostKind, SearchConfig, StateFamily, TrainConfig};

use crate::error::CliError;

/// What a run does.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Train the angles of a fixed circuit.
    Train,
    /// Variable-structure search (best of `runs` seeds).
    Search,
    /// Cloning attack on a coin-flipping protocol.
    Attack,
    /// Closed-form optimal fidelities.
    Oracles,
    /// Sample planner and SWAP-test calibration.
    Planner,
}

/// Cloning task: M -> N copies of a state family, with ancillas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub family: StateFamily,
    pub m_in: usize,
    pub n_out: usize,
    pub num_ancilla: usize,
    /// Clone register per output; defaults to qubits 0..N.
    pub clone_registers: Option<Vec<usize>>,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self { family: StateFamily::PhaseCovariant, m_in: 1, n_out: 2, num_ancilla: 1, clone_registers: None }
    }
}

impl TaskConfig {
    pub fn build(&self) -> Result<CloneTask, CliError> {
        let registers = self.clone_registers.clone().unwrap_or_else(|| (0..self.n_out).collect());
        Ok(CloneTask::new(self.m_in, self.n_out, self.num_ancilla, registers, self.family.clone())?)
    }
}

/// Circuit trained in `train` mode.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CircuitSource {
    /// The fixed 1 -> 2 cloning network; only its free rotations train.
    #[default]
    Ideal,
    /// Random gates from a pool.
    Random { pool: String, length: usize },
    /// A circuit file as written to circuit.json.
    File { path: PathBuf },
}

/// Protocol under attack.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Protocol {
    /// Two-state protocol (CoinFlip2 family).
    P1,
    /// Four-state protocol (CoinFlip4 family).
    P2,
}

/// Where the attacker's cloner comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClonerSource {
    /// Closed-form optimal cloners only.
    Analytic,
    /// Learned by the structure search configured in `search`, reported
    /// next to the closed-form reference.
    Search,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackConfig {
    pub protocol: Protocol,
    pub cloner: ClonerSource,
    /// Rounds of the two-state protocol (majority vote).
    pub rounds: usize,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self { protocol: Protocol::P1, cloner: ClonerSource::Analytic, rounds: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub gamma: f64,
    pub delta: f64,
    /// Calibration trials per overlap.
    pub trials: usize,
    /// Overlaps at which the planned shot count is calibrated.
    pub overlaps: Vec<f64>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self { gamma: 0.1, delta: 0.05, trials: 500, overlaps: vec![0.5, 0.8535533905932737, 0.95] }
    }
}

/// A full experiment description.
///
/// `seed` is the master seed: it replaces `train.seed` and `search.seed`. In
/// search mode `train` also replaces `search.train`, so the inner training is
/// configured in one place.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default)]
    pub task: TaskConfig,
    #[serde(default = "default_cost")]
    pub cost: CostKind,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub circuit: CircuitSource,
    #[serde(default)]
    pub attack: AttackConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub seed: u64,
    /// Independent search runs (seeds seed, seed+1, ...); the lowest training
    /// cost wins.
    #[serde(default = "one")]
    pub runs: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_cost() -> CostKind {
    CostKind::Local
}

fn one() -> u64 {
    1
}

impl ExperimentConfig {
    /// Parses a JSON document; errors name the offending line and field.
    ///
    /// `"mode": "reproduce-<id>"` loads the named preset; only `seed` and
    /// `output_dir` may be given next to it.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        if let Some(cfg) = Self::preset_from_json(text)? {
            return Ok(cfg);
        }
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn preset_from_json(text: &str) -> Result<Option<Self>, CliError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct PresetRef {
            mode: String,
            seed: Option<u64>,
            output_dir: Option<PathBuf>,
        }
        let Ok(serde_json::Value::Object(doc)) = serde_json::from_str::<serde_json::Value>(text) else {
            return Ok(None);
        };
        if !doc.get("mode").and_then(|m| m.as_str()).is_some_and(|m| m.starts_with("reproduce-")) {
            return Ok(None);
        }
        let r: PresetRef = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        let mut cfg = crate::presets::preset(&r.mode["reproduce-".len()..])?;
        cfg.seed = r.seed.unwrap_or(cfg.seed);
        cfg.output_dir = r.output_dir;
        Ok(Some(cfg))
    }

    /// Checks the sections the mode needs.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.runs == 0 {
            return Err(CliError::Config("runs must be at least 1".into()));
        }
        match self.mode {
            Mode::Train | Mode::Search => {
                let task = self.task.build()?;
                self.cost.validate(&task)?;
                self.train.validate()?;
                if self.mode == Mode::Search {
                    self.search.validate()?;
                }
                if let (Mode::Train, CircuitSource::File { path }) = (self.mode, &self.circuit) {
                    if !path.is_file() {
                        return Err(CliError::Config(format!("circuit file {} not found", path.display())));
                    }
                }
            }
            Mode::Attack => {
                let task = self.task.build()?;
                let family_ok = match self.attack.protocol {
                    Protocol::P1 => matches!(task.family, StateFamily::CoinFlip2 { .. }),
                    Protocol::P2 => matches!(task.family, StateFamily::CoinFlip4 { .. }),
                };
                if !family_ok {
                    return Err(CliError::Config(format!(
                        "protocol {:?} needs the {} family",
                        self.attack.protocol,
                        if self.attack.protocol == Protocol::P1 { "CoinFlip2" } else { "CoinFlip4" }
                    )));
                }
                if task.m_in != 1 || task.n_out != 2 {
                    return Err(CliError::Config("attacks need a 1 -> 2 cloning task".into()));
                }
                if self.attack.rounds == 0 {
                    return Err(CliError::Config("attack.rounds must be at least 1".into()));
                }
                if self.attack.cloner == ClonerSource::Search {
                    self.cost.validate(&task)?;
                    self.train.validate()?;
                    self.search.validate()?;
                }
            }
            Mode::Oracles => {}
            Mode::Planner => {
                let p = &self.planner;
                vqclone_core::train::plan_samples(p.gamma, p.delta)?;
                if p.trials == 0 || p.overlaps.iter().any(|o| !(0.0..=1.0).contains(o)) {
                    return Err(CliError::Config("planner needs trials >= 1 and overlaps in [0,1]".into()));
                }
            }
        }
        Ok(())
    }

    /// Training settings with the master seed applied.
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { seed: self.seed, ..self.train.clone() }
    }

    /// Search settings for run `index` with the shared training settings.
    pub fn search_config(&self, index: u64) -> SearchConfig {
        let seed = self.seed + index;
        SearchConfig { seed, train: TrainConfig { seed, ..self.train.clone() }, ..self.search.clone() }
    }
}
