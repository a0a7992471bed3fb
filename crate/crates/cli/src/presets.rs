//! Named experiment configurations for `vqclone reproduce <id>`.

use vqclone_core::{CostKind, SearchConfig, StateFamily, TrainConfig};

use crate::config::{
    AttackConfig, CircuitSource, ClonerSource, ExperimentConfig, Mode, PlannerConfig, Protocol, TaskConfig,
};
use crate::error::CliError;

pub const IDS: [&str; 8] =
    ["pc-fixed", "pc-1to2", "p1-attack", "p2-attacks", "mton-1to3", "mton-2to4", "oracles", "sample-planner"];

fn base(mode: Mode) -> ExperimentConfig {
    ExperimentConfig {
        mode,
        task: TaskConfig::default(),
        cost: CostKind::Local,
        train: TrainConfig::default(),
        search: SearchConfig::default(),
        circuit: CircuitSource::Ideal,
        attack: AttackConfig::default(),
        planner: PlannerConfig::default(),
        seed: 0,
        runs: 1,
        output_dir: None,
    }
}

fn task(family: StateFamily, m_in: usize, n_out: usize, num_ancilla: usize) -> TaskConfig {
    TaskConfig { family, m_in, n_out, num_ancilla, clone_registers: None }
}

pub fn preset(id: &str) -> Result<ExperimentConfig, CliError> {
    let cfg = match id {
        // Fixed 1 -> 2 network, free rotations trained on the squared cost.
        "pc-fixed" => ExperimentConfig { cost: CostKind::Squared, ..base(Mode::Train) },
        // Structure search for the phase-covariant 1 -> 2 cloner. Phases are
        // continuous: with few training phases a 35-gate circuit overfits them.
        "pc-1to2" => ExperimentConfig {
            train: TrainConfig { n_train: 200, n_test: 100, ..TrainConfig::default() },
            runs: 10,
            ..base(Mode::Search)
        },
        // Two-state protocol with the closed-form and a learned cloner.
        "p1-attack" => ExperimentConfig {
            task: task(StateFamily::p1(), 1, 2, 1),
            cost: CostKind::Squared,
            search: SearchConfig { pool: "G_P1".into(), ..SearchConfig::default() },
            attack: AttackConfig { protocol: Protocol::P1, cloner: ClonerSource::Search, rounds: 1 },
            runs: 3,
            ..base(Mode::Attack)
        },
        // Both four-state attacks with the closed-form and a learned cloner.
        "p2-attacks" => ExperimentConfig {
            task: task(StateFamily::p2(), 1, 2, 1),
            search: SearchConfig { pool: "G_P1".into(), ..SearchConfig::default() },
            attack: AttackConfig { protocol: Protocol::P2, cloner: ClonerSource::Search, rounds: 1 },
            runs: 3,
            ..base(Mode::Attack)
        },
        "mton-1to3" => ExperimentConfig {
            task: task(StateFamily::p2(), 1, 3, 1),
            cost: CostKind::Squared,
            train: TrainConfig { n_train: 50, ..TrainConfig::default() },
            search: SearchConfig { pool: "NN4".into(), ..SearchConfig::default() },
            runs: 15,
            ..base(Mode::Search)
        },
        "mton-2to4" => ExperimentConfig {
            task: task(StateFamily::p2(), 2, 4, 1),
            cost: CostKind::Squared,
            train: TrainConfig { n_train: 50, ..TrainConfig::default() },
            search: SearchConfig { pool: "FC5".into(), seq_len: 40, ..SearchConfig::default() },
            runs: 15,
            ..base(Mode::Search)
        },
        "oracles" => base(Mode::Oracles),
        "sample-planner" => base(Mode::Planner),
        other => {
            return Err(CliError::Config(format!("unknown experiment id '{other}' (known: {})", IDS.join(", "))));
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for id in IDS {
            preset(id).unwrap_or_else(|e| panic!("{id}: {e}"));
        }
    }

    #[test]
    fn unknown_id_is_a_config_error() {
        assert_eq!(preset("nope").unwrap_err().exit_code(), 2);
    }
}
