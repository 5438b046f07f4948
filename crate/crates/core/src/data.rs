//! One-value-per-line data files and the two bundled lifetime datasets.
//!
//! Lines starting with `#` and blank lines are skipped; every other line must
//! hold a single finite positive decimal number.

use std::path::Path;

use crate::error::{Error, Result};
use crate::sample::Sample;

const SURVIVAL: &str = include_str!("../../../data/survival.txt");
const FAILURE: &str = include_str!("../../../data/failure.txt");

pub fn parse_values(text: &str, label: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::DataParse {
            path: label.to_string(),
            line: i + 1,
            message,
        };
        let v: f64 = line
            .parse()
            .map_err(|_| err(format!("`{line}` is not a number")))?;
        if !v.is_finite() || v <= 0.0 {
            return Err(err(format!("{v} is not a finite positive value")));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::DataParse {
            path: label.to_string(),
            line: 0,
            message: "file contains no observations".into(),
        });
    }
    Ok(out)
}

pub fn read_sample(path: &Path) -> Result<Sample> {
    let label = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: label.clone(),
        message: e.to_string(),
    })?;
    let source = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| label.clone());
    Sample::new(parse_values(&text, &label)?, source)
}

/// Survival times in days of 33 acute myelogenous leukemia patients.
pub fn survival_times() -> Vec<f64> {
    parse_values(SURVIVAL, "survival.txt").expect("bundled dataset parses")
}

/// Failure times of 20 components.
pub fn failure_times() -> Vec<f64> {
    parse_values(FAILURE, "failure.txt").expect("bundled dataset parses")
}

pub fn survival_sample() -> Sample {
    Sample::new(survival_times(), "survival").expect("bundled dataset is valid")
}

pub fn failure_sample() -> Sample {
    Sample::new(failure_times(), "failure").expect("bundled dataset is valid")
}
