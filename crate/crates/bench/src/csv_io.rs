//! Sweep-record CSV emission and parsing.
//!
//! One row per SNR point. Columns: `snr_db`, then `detprob_<tag>` and
//! `runtime_<tag>` for every strategy present (canonical order), then
//! `fallback_rate` (empty when the adaptive strategy was not run) and
//! `trials`. Values use Rust's shortest round-trip float formatting, so a
//! parse of the emitted file reproduces the records exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{BenchError, Result};
use crate::sweep::{Strategy, SweepRecord};

pub fn emit_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(BenchError::Csv("no records to write".into()));
    }
    let strategies: Vec<Strategy> = records[0].detection_probability.keys().copied().collect();
    for r in records {
        let here: Vec<Strategy> = r.detection_probability.keys().copied().collect();
        if here != strategies {
            return Err(BenchError::Csv("records disagree on the strategy set".into()));
        }
    }

    let file = File::create(path)?;
    let mut out = BufWriter::new(file);

    let mut header = vec!["snr_db".to_string()];
    for s in &strategies {
        header.push(format!("detprob_{}", s.tag()));
        header.push(format!("runtime_{}", s.tag()));
    }
    header.push("fallback_rate".into());
    header.push("trials".into());
    writeln!(out, "{}", header.join(","))?;

    for r in records {
        let mut row = vec![format!("{}", r.snr_db)];
        for s in &strategies {
            row.push(format!("{}", r.detection_probability[s]));
            row.push(format!("{}", r.normalized_runtime[s]));
        }
        row.push(r.fallback_rate.map(|v| format!("{v}")).unwrap_or_default());
        row.push(format!("{}", r.trials));
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

pub fn parse_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| BenchError::Csv("empty file".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.first() != Some(&"snr_db")
        || columns.len() < 3
        || columns[columns.len() - 2] != "fallback_rate"
        || columns[columns.len() - 1] != "trials"
    {
        return Err(BenchError::Csv("unrecognized header".into()));
    }

    let mut strategies = Vec::new();
    let mut i = 1;
    while i + 2 < columns.len() {
        let det = columns[i]
            .strip_prefix("detprob_")
            .ok_or_else(|| BenchError::Csv(format!("expected detprob column, got {}", columns[i])))?;
        let run = columns[i + 1].strip_prefix("runtime_").ok_or_else(|| {
            BenchError::Csv(format!("expected runtime column, got {}", columns[i + 1]))
        })?;
        if det != run {
            return Err(BenchError::Csv(format!("column pair mismatch: {det} vs {run}")));
        }
        strategies.push(det.parse::<Strategy>()?);
        i += 2;
    }

    let mut records = Vec::new();
    for (line_no, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(BenchError::Csv(format!(
                "row {} has {} fields, header has {}",
                line_no + 2,
                fields.len(),
                columns.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| BenchError::Csv(format!("bad number '{s}'")))
        };
        let snr_db = parse(fields[0])?;
        let mut detection_probability = BTreeMap::new();
        let mut normalized_runtime = BTreeMap::new();
        for (si, &s) in strategies.iter().enumerate() {
            detection_probability.insert(s, parse(fields[1 + 2 * si])?);
            normalized_runtime.insert(s, parse(fields[2 + 2 * si])?);
        }
        let fallback_field = fields[fields.len() - 2];
        let fallback_rate =
            if fallback_field.is_empty() { None } else { Some(parse(fallback_field)?) };
        let trials = fields[fields.len() - 1]
            .parse::<usize>()
            .map_err(|_| BenchError::Csv(format!("bad trial count '{}'", fields[fields.len() - 1])))?;
        records.push(SweepRecord {
            snr_db,
            trials,
            detection_probability,
            normalized_runtime,
            fallback_rate,
        });
    }
    Ok(records)
}
