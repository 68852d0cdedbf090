//! The run manifest: one flat record of everything that determines a run.
//!
//! Defaults, an optional JSON config file, and command-line flags are
//! merged in that order. The merged manifest is embedded as the first
//! line of every run log, so any run can be reproduced byte-for-byte by
//! feeding the manifest back through `--config`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use afevo_core::{load_csv, make_synthetic, Dataset, GaConfig, MlpConfig, SyntheticKind};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunManifest {
    pub tool_version: String,
    pub seed: u64,
    pub pop: usize,
    pub gens: usize,
    pub elite: f64,
    pub p_hybrid: f64,
    pub p_select_coin: f64,
    pub p_mutate: f64,
    pub max_depth: usize,
    pub dataset: String,
    pub dataset_n: usize,
    pub dataset_noise: f64,
    pub dataset_seed: u64,
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub batch: usize,
    pub init_seed: u64,
}

impl Default for RunManifest {
    fn default() -> Self {
        let ga = GaConfig::default();
        let mlp = MlpConfig::default();
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: ga.seed,
            pop: ga.population_size,
            gens: ga.generations,
            elite: ga.elite_fraction,
            p_hybrid: ga.p_hybrid,
            p_select_coin: ga.p_select_coin,
            p_mutate: ga.p_mutate,
            max_depth: ga.max_depth,
            dataset: "two-moons".to_string(),
            dataset_n: 400,
            dataset_noise: 0.2,
            dataset_seed: 7,
            hidden: mlp.hidden_layers,
            epochs: mlp.epochs,
            lr: mlp.learning_rate,
            batch: mlp.batch_size,
            init_seed: mlp.init_seed,
        }
    }
}

impl RunManifest {
    pub fn from_file(path: &Path) -> Result<RunManifest, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut manifest: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        manifest.tool_version = env!("CARGO_PKG_VERSION").to_string();
        Ok(manifest)
    }

    pub fn ga_config(&self) -> GaConfig {
        GaConfig {
            population_size: self.pop,
            generations: self.gens,
            elite_fraction: self.elite,
            p_hybrid: self.p_hybrid,
            p_select_coin: self.p_select_coin,
            p_mutate: self.p_mutate,
            max_depth: self.max_depth,
            seed: self.seed,
        }
    }

    pub fn mlp_config(&self) -> MlpConfig {
        MlpConfig {
            hidden_layers: self.hidden.clone(),
            epochs: self.epochs,
            learning_rate: self.lr,
            batch_size: self.batch,
            init_seed: self.init_seed,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.ga_config().validate().map_err(CliError::Config)?;
        self.mlp_config().validate().map_err(CliError::Config)?;
        if !self.dataset.starts_with("csv:") {
            if self.dataset.parse::<SyntheticKind>().is_err() {
                return Err(CliError::Config(format!(
                    "unknown dataset '{}'; expected two-moons, circles, spirals, or csv:PATH",
                    self.dataset
                )));
            }
            if self.dataset_n < 8 {
                return Err(CliError::Config("dataset size must be at least 8".into()));
            }
            if !(self.dataset_noise.is_finite() && self.dataset_noise >= 0.0) {
                return Err(CliError::Config("dataset noise must be non-negative".into()));
            }
        }
        Ok(())
    }

    /// Build the dataset this manifest describes. Synthetic generators use
    /// `dataset_seed`; CSV files are split with the run seed.
    pub fn load_dataset(&self) -> Result<Dataset, CliError> {
        if let Some(path) = self.dataset.strip_prefix("csv:") {
            return load_csv(Path::new(path), self.seed)
                .map_err(|e| CliError::Data(format!("{e}")));
        }
        let kind: SyntheticKind = self
            .dataset
            .parse()
            .map_err(|()| CliError::Config(format!("unknown dataset '{}'", self.dataset)))?;
        Ok(make_synthetic(kind, self.dataset_n, self.dataset_noise, self.dataset_seed))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }
}

/// Flags shared by `evolve` and `train`; each one overrides the matching
/// manifest key.
#[derive(Debug, Clone, clap::Args)]
pub struct ConfigFlags {
    /// JSON config file with manifest keys; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run seed (breeding, per-genome training seeds, CSV split)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Population size (even, >= 4)
    #[arg(long)]
    pub pop: Option<usize>,
    /// Number of generations
    #[arg(long)]
    pub gens: Option<usize>,
    /// Elite fraction selected each generation
    #[arg(long)]
    pub elite: Option<f64>,
    /// Probability that crossover dispatches to hybrid
    #[arg(long = "p-hybrid")]
    pub p_hybrid: Option<f64>,
    /// Probability that a bred offspring is mutated
    #[arg(long = "p-mutate")]
    pub p_mutate: Option<f64>,
    /// Probability of adding a mutated non-elite to the parents
    #[arg(long = "p-select-coin")]
    pub p_select_coin: Option<f64>,
    /// Gene depth cap for hybrid crossover
    #[arg(long = "max-depth")]
    pub max_depth: Option<usize>,
    /// two-moons | circles | spirals | csv:PATH
    #[arg(long)]
    pub dataset: Option<String>,
    /// Synthetic dataset size
    #[arg(long = "dataset-n")]
    pub dataset_n: Option<usize>,
    /// Synthetic dataset noise (std of Gaussian jitter)
    #[arg(long = "dataset-noise")]
    pub dataset_noise: Option<f64>,
    /// Synthetic dataset seed
    #[arg(long = "dataset-seed")]
    pub dataset_seed: Option<u64>,
    /// Training epochs per fitness evaluation
    #[arg(long)]
    pub epochs: Option<usize>,
    /// SGD learning rate
    #[arg(long)]
    pub lr: Option<f64>,
    /// Hidden layer widths, comma separated (e.g. 16,16)
    #[arg(long)]
    pub hidden: Option<String>,
    /// Mini-batch size
    #[arg(long)]
    pub batch: Option<usize>,
    /// Weight initialization seed (shared by all genomes)
    #[arg(long = "init-seed")]
    pub init_seed: Option<u64>,
}

impl ConfigFlags {
    /// defaults -> config file -> individual flags.
    pub fn resolve(&self) -> Result<RunManifest, CliError> {
        let mut manifest = match &self.config {
            Some(path) => RunManifest::from_file(path)?,
            None => RunManifest::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field {
                    manifest.$field = v.clone();
                })*
            };
        }
        apply!(
            seed,
            pop,
            gens,
            elite,
            p_hybrid,
            p_mutate,
            p_select_coin,
            max_depth,
            dataset,
            dataset_n,
            dataset_noise,
            dataset_seed,
            epochs,
            lr,
            batch,
            init_seed
        );
        if let Some(hidden) = &self.hidden {
            manifest.hidden = parse_widths(hidden)?;
        }
        manifest.validate()?;
        Ok(manifest)
    }
}

fn parse_widths(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|w| {
            w.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("invalid hidden width '{w}'")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_through_json() {
        let manifest = RunManifest::default();
        let json = manifest.to_json();
        let back: RunManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(back.pop, 40);
        assert_eq!(back.gens, 8);
        assert_eq!(back.elite, 0.15);
        assert_eq!(back.hidden, vec![16, 16]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunManifest>("{\"populationsize\":40}");
        assert!(err.is_err());
    }

    #[test]
    fn widths_parse() {
        assert_eq!(parse_widths("16,16").unwrap(), vec![16, 16]);
        assert_eq!(parse_widths("8").unwrap(), vec![8]);
        assert!(parse_widths("8,x").is_err());
    }
}
