//! Experiment configuration files (a single JSON document).
//!
//! The document is an [`ExperimentConfig`] plus an optional `output` section.
//! `master_seed` is required; the `--seed` flag may supply or override it.

use std::fs;
use std::path::{Path, PathBuf};

use phaseloc_core::experiment::ExperimentConfig;
use phaseloc_core::locate::PipelineConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutputPaths {
    /// Directory for `simulate` recordings.
    #[serde(default)]
    pub recordings: Option<PathBuf>,
    /// Directory for `evaluate` reports.
    #[serde(default)]
    pub evaluation: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    #[serde(flatten)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub output: OutputPaths,
}

fn read_value(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Parses and validates a configuration document.
pub fn parse_config(mut doc: Value, seed_override: Option<u64>) -> Result<ConfigFile, CliError> {
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| CliError::Config("configuration must be a JSON object".into()))?;
    if let Some(seed) = seed_override {
        obj.insert("master_seed".into(), Value::from(seed));
    }
    if !obj.contains_key("master_seed") {
        return Err(CliError::Config(
            "master_seed is required (set it in the config or pass --seed)".into(),
        ));
    }
    let cfg: ConfigFile =
        serde_json::from_value(doc).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.experiment
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

pub fn load_config(path: &Path, seed_override: Option<u64>) -> Result<ConfigFile, CliError> {
    parse_config(read_value(path)?, seed_override).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Reads only the `pipeline` section of a configuration file.
pub fn load_pipeline(path: &Path) -> Result<PipelineConfig, CliError> {
    let doc = read_value(path)?;
    let cfg: PipelineConfig = match doc.get("pipeline") {
        Some(p) => {
            serde_json::from_value(p.clone()).map_err(|e| CliError::Config(e.to_string()))?
        }
        None => PipelineConfig::default(),
    };
    cfg.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

/// The calibration experiment as a configuration document.
pub fn default_config_json(master_seed: u64, trials: u64) -> String {
    let cfg = ConfigFile {
        experiment: ExperimentConfig::calibration(master_seed, trials),
        output: OutputPaths::default(),
    };
    let mut s = serde_json::to_string_pretty(&cfg).expect("config serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn doc() -> Value {
        serde_json::from_str(&default_config_json(5, 3)).unwrap()
    }

    #[test]
    fn default_document_round_trips() {
        let cfg = parse_config(doc(), None).unwrap();
        assert_eq!(cfg.experiment, ExperimentConfig::calibration(5, 3));
    }

    #[test]
    fn seed_is_mandatory() {
        let mut d = doc();
        d.as_object_mut().unwrap().remove("master_seed");
        assert!(matches!(
            parse_config(d.clone(), None),
            Err(CliError::Config(_))
        ));
        assert_eq!(parse_config(d, Some(9)).unwrap().experiment.master_seed, 9);
    }

    #[test]
    fn speed_presets_and_bad_values() {
        let mut d = doc();
        d["sweep"]["speed"] = json!("high");
        assert_eq!(
            parse_config(d.clone(), None)
                .unwrap()
                .experiment
                .sweep
                .speed
                .meters_per_second(),
            2.0
        );
        d["sweep"]["speed"] = json!(0.4);
        assert_eq!(
            parse_config(d.clone(), None)
                .unwrap()
                .experiment
                .sweep
                .speed
                .meters_per_second(),
            0.4
        );
        d["sweep"]["speed"] = json!("warp");
        assert!(matches!(parse_config(d, None), Err(CliError::Config(_))));
    }

    #[test]
    fn bad_axis_and_zero_trials_are_config_errors() {
        let mut d = doc();
        d["noise"]["rotation_events"] =
            json!([{"tag_id": "tag-0", "time": 1.0, "phase_step": 3.0}]);
        assert!(parse_config(d.clone(), None).is_ok());
        d["trials"] = json!(0);
        assert!(matches!(parse_config(d, None), Err(CliError::Config(_))));
        let mut d = doc();
        d["sweep"]["axes"] = json!(["x", "w"]);
        assert!(matches!(parse_config(d, None), Err(CliError::Config(_))));
    }
}
