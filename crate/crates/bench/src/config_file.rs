//! Flat key-value configuration files for the sweep command.
//!
//! One `key = value` pair per line, `#` starts a comment, keys are the long
//! CLI flag names. Flags given on the command line override file values.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{BenchError, Result};

/// Keys the sweep command understands.
pub const SWEEP_KEYS: &[&str] = &[
    "snr-min",
    "snr-max",
    "snr-step",
    "trials",
    "targets",
    "epsilon",
    "seed",
    "strategies",
    "out",
    "timing-repeats",
    "full-paper-scale",
    "noiseless",
];

pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut values = BTreeMap::new();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            BenchError::ConfigFile(format!(
                "{}:{}: expected 'key = value', got '{}'",
                path.display(),
                line_no + 1,
                raw.trim()
            ))
        })?;
        let key = key.trim().to_string();
        if !SWEEP_KEYS.contains(&key.as_str()) {
            return Err(BenchError::ConfigFile(format!(
                "{}:{}: unknown key '{}'",
                path.display(),
                line_no + 1,
                key
            )));
        }
        if values.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(BenchError::ConfigFile(format!(
                "{}:{}: duplicate key '{}'",
                path.display(),
                line_no + 1,
                key
            )));
        }
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(name: &str, contents: &str) -> std::path::PathBuf {
        let path = std::env::temp_dir().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn parses_keys_and_comments() {
        let path = write_temp(
            "ofdm_radar_bench_cfg_ok.cfg",
            "# sweep setup\nsnr-min = -40\ntrials = 100  # desk scale\nstrategies = cstc,adaptive\n",
        );
        let values = parse_config_file(&path).unwrap();
        assert_eq!(values["snr-min"], "-40");
        assert_eq!(values["trials"], "100");
        assert_eq!(values["strategies"], "cstc,adaptive");
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let path = write_temp("ofdm_radar_bench_cfg_bad1.cfg", "snr-mni = -40\n");
        assert!(parse_config_file(&path).is_err());
        std::fs::remove_file(&path).ok();

        let path = write_temp("ofdm_radar_bench_cfg_bad2.cfg", "trials = 1\ntrials = 2\n");
        assert!(parse_config_file(&path).is_err());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn rejects_missing_equals() {
        let path = write_temp("ofdm_radar_bench_cfg_bad3.cfg", "trials 100\n");
        assert!(parse_config_file(&path).is_err());
        std::fs::remove_file(&path).ok();
    }
}
