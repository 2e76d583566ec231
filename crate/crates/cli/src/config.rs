//! Run configuration and `key = value` config files.

use std::ffi::OsString;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::args::{Cli, Command, Format};
use crate::CliError;

/// Everything that determines a run's output, plus the worker count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: usize,
    pub format: Format,
    pub cache_dir: Option<PathBuf>,
    pub no_timing: bool,
    pub command: Command,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Self {
        RunConfig {
            seed: cli.global.seed,
            workers: cli.global.workers,
            format: cli.global.format,
            cache_dir: cli.global.cache_dir,
            no_timing: cli.global.no_timing,
            command: cli.command,
        }
    }

    /// Parses a command line without running it.
    pub fn parse<I, T>(argv: I) -> Result<Self, CliError>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString>,
    {
        use clap::Parser;
        let argv = apply_config_file(argv.into_iter().map(Into::into).collect())?;
        Cli::try_parse_from(argv).map(Self::from_cli).map_err(|e| CliError::Usage(crate::clap_message(&e)))
    }

    /// Config as echoed in reports. The worker count and cache location do not
    /// affect results, so they are left out to keep reports byte-identical.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let map = v.as_object_mut().expect("config is an object");
        map.remove("workers");
        map.remove("cache_dir");
        v
    }
}

const GLOBAL_VALUE_FLAGS: [&str; 6] = ["--config", "--seed", "--workers", "--cache-dir", "--out", "--format"];

fn flag_name(arg: &str) -> Option<&str> {
    let name = arg.strip_prefix("--")?;
    Some(name.split_once('=').map_or(name, |(n, _)| n))
}

/// Expands `--config FILE` into explicit flags for every key not already on
/// the command line. Lines are `key = value`; `#` starts a comment.
pub fn apply_config_file(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let args: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut config_path = None;
    let mut subcommand_at = None;
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if let Some(p) = a.strip_prefix("--config=") {
            config_path = Some(p.to_string());
        } else if a == "--config" {
            config_path = args.get(i + 1).cloned();
        }
        if a.starts_with("--") {
            if GLOBAL_VALUE_FLAGS.contains(&a.as_str()) {
                i += 1;
            }
        } else if subcommand_at.is_none() {
            subcommand_at = Some(i);
        }
        i += 1;
    }
    let Some(path) = config_path else { return Ok(argv) };
    let Some(at) = subcommand_at else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("cannot read config {path}: {e}")))?;
    let given: Vec<&str> = args.iter().filter_map(|a| flag_name(a)).collect();
    let mut injected: Vec<OsString> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim().trim_start_matches("--"), v.trim()))
            .ok_or_else(|| CliError::Usage(format!("{path}:{}: expected `key = value`", lineno + 1)))?;
        if key.is_empty() || key == "config" || given.contains(&key) {
            continue;
        }
        match value {
            "true" if key == "no-timing" => injected.push(format!("--{key}").into()),
            "false" if key == "no-timing" => {}
            _ => {
                injected.push(format!("--{key}").into());
                injected.push(value.into());
            }
        }
    }
    let mut out = argv;
    out.splice(at + 1..at + 1, injected);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_fills_missing_keys_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# defaults\nQ = 6\norder = 2\nseed = 9\nno-timing = true\n").unwrap();
        let cfg = RunConfig::parse(["lfam", "--config", path.to_str().unwrap(), "characters", "--order", "3"]).unwrap();
        assert_eq!(cfg.seed, 9);
        assert!(cfg.no_timing);
        match &cfg.command {
            Command::Characters(a) => {
                assert_eq!(a.order, Some(3));
                assert_eq!(a.q_param, Some(6.0));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn config_roundtrips() {
        let cfg = RunConfig::parse(["lfam", "--seed", "4", "moment", "--order", "3", "--Q", "10", "--T", "5,10"]).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn malformed_config_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cfg");
        std::fs::write(&path, "order 3\n").unwrap();
        let err = RunConfig::parse(["lfam", "--config", path.to_str().unwrap(), "characters"]).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
