//! Built-in experiment sets for the H6 and H8 chain tables.

use crate::config::{Baseline, ExperimentConfig, Solver, Transform};

pub const PRESET_NAMES: [&str; 6] = ["table1", "table2", "table3", "table4", "table5", "table6"];

const SWEEP: [f64; 7] = [1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0];

fn baselines(list: &[Baseline]) -> std::collections::BTreeSet<Baseline> {
    list.iter().copied().collect()
}

fn sweep(name: &str, system: usize, space: [usize; 4]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(name, system, &SWEEP);
    cfg.active_spaces = vec![space.to_vec()];
    cfg
}

/// Configs making up a preset, or `None` for an unknown name.
pub fn preset(name: &str) -> Option<Vec<ExperimentConfig>> {
    let configs = match name {
        "table1" => vec![sweep("table1", 6, [2, 3, 4, 5])],
        "table2" => vec![sweep("table2", 8, [3, 4, 5, 6])],
        "table3" => {
            let mut cfg = ExperimentConfig::new("table3", 8, &[2.0]);
            cfg.cc_ranks = vec![4];
            cfg.active_spaces = vec![vec![3, 4, 5, 6], vec![2, 3, 6, 7], vec![1, 2, 7, 8]];
            cfg.baselines = baselines(&[Baseline::Fci]);
            vec![cfg]
        }
        "table4" => {
            let mut cfg = ExperimentConfig::new("table4", 8, &[2.0, 2.5, 3.0]);
            cfg.cc_ranks = vec![4];
            cfg.active_spaces = vec![vec![2, 3, 4, 5, 6, 7]];
            vec![cfg]
        }
        "table5" => {
            let make = |system: usize, spaces: Vec<Vec<usize>>| {
                let mut cfg = ExperimentConfig::new("table5", system, &[2.0, 3.0]);
                cfg.cc_ranks = vec![4];
                cfg.active_spaces = spaces;
                cfg.solvers = vec![Solver::Diag, Solver::Pds(3), Solver::Pds(4)];
                cfg.baselines = baselines(&[
                    Baseline::Hf,
                    Baseline::Casscf,
                    Baseline::ActiveFci,
                    Baseline::Fci,
                ]);
                cfg
            };
            vec![
                make(6, vec![vec![2, 3, 4, 5]]),
                make(8, vec![vec![3, 4, 5, 6], vec![4, 5, 6, 7]]),
            ]
        }
        "table6" => {
            let make = |system: usize, space: Vec<usize>| {
                let mut cfg = ExperimentConfig::new("table6", system, &[2.0, 3.0]);
                cfg.cc_ranks = vec![4];
                cfg.active_spaces = vec![space];
                cfg.transforms = [0, 1, 2, 3, 4, 5, 10]
                    .into_iter()
                    .map(Transform::Bch)
                    .chain([Transform::Exact])
                    .collect();
                cfg.baselines = baselines(&[Baseline::Fci]);
                cfg
            };
            vec![make(6, vec![2, 3, 4, 5]), make(8, vec![3, 4, 5, 6])]
        }
        _ => return None,
    };
    Some(configs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in PRESET_NAMES {
            let configs = preset(name).unwrap();
            assert!(!configs.is_empty());
            for cfg in configs {
                cfg.validate().unwrap();
            }
        }
        assert!(preset("table7").is_none());
    }
}
