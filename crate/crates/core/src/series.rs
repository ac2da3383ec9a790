use serde::{Deserialize, Serialize};

use crate::sampling::Moments;

/// Logarithmic negativity on a time grid, with its spread over disorder samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LnTimeSeries {
    pub times: Vec<f64>,
    pub mean_ln: Vec<f64>,
    pub std_ln: Vec<f64>,
    pub sem_ln: Vec<f64>,
    pub n_samples: usize,
    pub config_digest: String,
}

impl LnTimeSeries {
    pub fn from_moments(times: Vec<f64>, m: &Moments) -> Self {
        Self {
            mean_ln: m.mean.clone(),
            std_ln: m.std(),
            sem_ln: m.sem(),
            n_samples: m.count as usize,
            times,
            config_digest: String::new(),
        }
    }

    /// A single deterministic curve: `std = sem = 0`, one sample.
    pub fn deterministic(times: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(times.len(), values.len());
        let n = times.len();
        Self {
            times,
            mean_ln: values,
            std_ln: vec![0.0; n],
            sem_ln: vec![0.0; n],
            n_samples: 1,
            config_digest: String::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn with_digest(mut self, digest: impl Into<String>) -> Self {
        self.config_digest = digest.into();
        self
    }
}

/// `n` evenly spaced points from `t_min` to `t_max` inclusive (`n == 1` gives `[t_min]`).
pub fn linspace(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t_min],
        _ => (0..n)
            .map(|k| t_min + (t_max - t_min) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}
