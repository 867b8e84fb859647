//! JSON config file support. Precedence: command-line flags > file values
//! > built-in defaults. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use glossvec_core::trainer::TrainConfig;

use crate::args::{CellArg, TrainArgs};
use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub cell: Option<String>,
    pub hidden: Option<usize>,
    pub epochs1: Option<usize>,
    pub epochs2: Option<usize>,
    pub epochs3: Option<usize>,
    pub batch_size: Option<usize>,
    pub sim_threshold: Option<f64>,
    pub rate: Option<f64>,
    pub rho: Option<f64>,
    pub eps: Option<f64>,
    pub shuffle: Option<bool>,
    pub max_gloss_tokens: Option<usize>,
    pub clip_norm: Option<f64>,
    pub lexicon: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn cell_kind(&self) -> Result<Option<CellArg>, CliError> {
        match self.cell.as_deref() {
            None => Ok(None),
            Some("rnn") => Ok(Some(CellArg::Rnn)),
            Some("gru") => Ok(Some(CellArg::Gru)),
            Some("lstm") => Ok(Some(CellArg::Lstm)),
            Some(other) => Err(CliError::Usage(format!(
                "config: unknown cell {other:?} (expected rnn, gru, or lstm)"
            ))),
        }
    }
}

/// Merge train-command flags over file values over defaults.
pub fn merged_train_config(
    args: &TrainArgs,
    file: &FileConfig,
    seed: u64,
) -> Result<TrainConfig, CliError> {
    let mut cfg = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    if let Some(cell) = args.cell.or(file.cell_kind()?) {
        cfg.cell = cell.to_kind();
    }
    cfg.hidden_dim = args.hidden.or(file.hidden).or(cfg.hidden_dim);
    cfg.epochs_phase1 = args.epochs1.or(file.epochs1).unwrap_or(cfg.epochs_phase1);
    cfg.epochs_phase2 = args.epochs2.or(file.epochs2).unwrap_or(cfg.epochs_phase2);
    cfg.epochs_phase3 = args.epochs3.or(file.epochs3).unwrap_or(cfg.epochs_phase3);
    cfg.batch_size = args.batch_size.or(file.batch_size).unwrap_or(cfg.batch_size);
    cfg.sim_threshold = args
        .sim_threshold
        .or(file.sim_threshold)
        .unwrap_or(cfg.sim_threshold);
    cfg.adadelta.rate = args.rate.or(file.rate).unwrap_or(cfg.adadelta.rate);
    cfg.adadelta.rho = args.rho.or(file.rho).unwrap_or(cfg.adadelta.rho);
    cfg.adadelta.eps = args.eps.or(file.eps).unwrap_or(cfg.adadelta.eps);
    cfg.shuffle = if args.no_shuffle {
        false
    } else {
        file.shuffle.unwrap_or(cfg.shuffle)
    };
    cfg.max_gloss_tokens = args
        .max_gloss_tokens
        .or(file.max_gloss_tokens)
        .unwrap_or(cfg.max_gloss_tokens);
    cfg.clip_norm = args.clip_norm.or(file.clip_norm).or(cfg.clip_norm);
    Ok(cfg)
}

pub fn required_path(
    flag: Option<&PathBuf>,
    file_value: Option<&PathBuf>,
    what: &str,
) -> Result<PathBuf, CliError> {
    flag.or(file_value)
        .cloned()
        .ok_or_else(|| CliError::Usage(format!("missing --{what} (flag or config file)")))
}
