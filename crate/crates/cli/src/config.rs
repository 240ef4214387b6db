use std::path::{Path, PathBuf};

use clap::Args;
use morphoscan::pipeline::PipelineConfig;
use serde_json::Value;

use crate::CliError;

/// Options shared by every pipeline stage.
#[derive(Args, Clone, Debug, Default)]
pub struct ConfigArgs {
    /// Parameter preset: hillside or courtyard.
    #[arg(long, global = true)]
    pub preset: Option<String>,

    /// JSON configuration file, or a run manifest to replay.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Override one parameter, e.g. `--set epsilon_m=0.2`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Top-level random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

fn read_config_file(path: &Path) -> Result<PipelineConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(vec![format!("{}: {e}", path.display())]))?;
    // A manifest carries the configuration under "config".
    let value = match value {
        Value::Object(mut map) if map.contains_key("config") && map.contains_key("stage") => map.remove("config").unwrap_or_default(),
        v => v,
    };
    serde_json::from_value(value).map_err(|e| CliError::Config(vec![format!("{}: {e}", path.display())]))
}

/// Preset, then config file, then `--set` overrides, then `--seed`. Every
/// problem is reported at once.
pub fn resolve(args: &ConfigArgs) -> Result<PipelineConfig, CliError> {
    let mut problems = Vec::new();
    let mut config = match (&args.config, &args.preset) {
        (Some(path), _) => {
            let mut c = read_config_file(path)?;
            if let Some(name) = &args.preset {
                match morphoscan::detection::DetectionParams::preset(name) {
                    Ok(d) => {
                        let seed = c.detection.seed;
                        c.detection = morphoscan::detection::DetectionParams { seed, ..d };
                    }
                    Err(e) => problems.push(e.to_string()),
                }
            }
            c
        }
        (None, Some(name)) => match PipelineConfig::preset(name) {
            Ok(c) => c,
            Err(e) => {
                problems.push(e.to_string());
                PipelineConfig::default()
            }
        },
        (None, None) => PipelineConfig::default(),
    };
    for item in &args.overrides {
        match item.split_once('=') {
            Some((key, value)) => {
                if let Err(e) = config.set(key.trim(), value) {
                    problems.extend(config_messages(e));
                }
            }
            None => problems.push(format!("--set expects KEY=VALUE, got '{item}'")),
        }
    }
    if let Some(seed) = args.seed {
        config.detection.seed = seed;
    }
    if let Err(e) = config.validate() {
        problems.extend(config_messages(e));
    }
    if args.threads == Some(0) {
        problems.push("--threads must be at least 1".to_string());
    }
    if problems.is_empty() {
        Ok(config)
    } else {
        Err(CliError::Config(problems))
    }
}

fn config_messages(e: morphoscan::Error) -> Vec<String> {
    match e {
        morphoscan::Error::InvalidConfig(p) => p,
        other => vec![other.to_string()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn courtyard_preset() {
        let c = resolve(&ConfigArgs {
            preset: Some("courtyard".into()),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(c.detection.epsilon, 0.3);
        assert_eq!(c.detection.max_normal_deviation_deg, 25.0);
    }

    #[test]
    fn every_problem_is_reported() {
        let err = resolve(&ConfigArgs {
            preset: Some("nowhere".into()),
            overrides: vec!["tau=2".into(), "oops".into(), "alpha_deg=95".into()],
            threads: Some(0),
            ..Default::default()
        })
        .unwrap_err();
        match err {
            CliError::Config(p) => assert_eq!(p.len(), 5, "{p:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overrides_follow_preset() {
        let c = resolve(&ConfigArgs {
            preset: Some("courtyard".into()),
            overrides: vec!["epsilon_m=0.2".into(), "band_width=1".into()],
            seed: Some(9),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(c.detection.epsilon, 0.2);
        assert_eq!(c.detection.max_normal_deviation_deg, 25.0);
        assert_eq!(c.band_width, 1.0);
        assert_eq!(c.detection.seed, 9);
    }
}
