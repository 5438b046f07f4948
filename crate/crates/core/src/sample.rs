use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::error::{Error, Result};

/// Minimum sample size accepted by the estimators.
pub const MIN_ESTIMATION_SIZE: usize = 5;

/// An immutable, ascending, strictly positive set of observations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    values: Vec<f64>,
    source: String,
}

impl Sample {
    pub fn new(mut values: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSample("no observations".into()));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidSample(format!(
                "observation {} = {v} is not a finite positive number",
                i + 1
            )));
        }
        values.sort_by(f64::total_cmp);
        Ok(Sample {
            values,
            source: source.into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("sample is nonempty")
    }

    pub fn has_ties(&self) -> bool {
        self.values.windows(2).any(|w| w[0] == w[1])
    }

    /// A copy with every observation multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Sample> {
        Sample::new(
            self.values.iter().map(|v| v * factor).collect(),
            format!("{}*{factor}", self.source),
        )
    }

    pub fn require_estimable(&self) -> Result<()> {
        if self.len() < MIN_ESTIMATION_SIZE {
            return Err(Error::InsufficientData {
                n: self.len(),
                min: MIN_ESTIMATION_SIZE,
            });
        }
        Ok(())
    }

    /// Identifier used to check that several fits refer to the same data.
    pub fn fingerprint(&self) -> String {
        let mut h = DefaultHasher::new();
        for v in &self.values {
            v.to_bits().hash(&mut h);
        }
        format!("{}#n={}#{:016x}", self.source, self.len(), h.finish())
    }
}
