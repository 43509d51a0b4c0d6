use std::fmt;

use serde::{Deserialize, Serialize};

use super::MetricError;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Ssim,
    Mse,
    ClipScore,
    Dino,
    /// Score supplied by an outside scorer (e.g. LPIPS or FID).
    External { name: String, higher_is_better: bool },
}

impl Metric {
    pub fn higher_is_better(&self) -> bool {
        match self {
            Metric::Mse => false,
            Metric::External { higher_is_better, .. } => *higher_is_better,
            _ => true,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Metric::Ssim => "ssim",
            Metric::Mse => "mse",
            Metric::ClipScore => "clip_score",
            Metric::Dino => "dino",
            Metric::External { name, .. } => name,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    Text,
    Image,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub metric: Metric,
    pub value: f64,
    pub reference: ReferenceKind,
    /// Embedding provider for model-based scores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provider: Option<String>,
}

impl Score {
    pub fn new(metric: Metric, value: f64, reference: ReferenceKind) -> Self {
        Score {
            metric,
            value,
            reference,
            provider: None,
        }
    }
}

/// Index of the best value; NaN ranks below everything and ties go to the
/// lowest index. `None` for an empty slice.
pub fn best_index(values: &[f64], higher_is_better: bool) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            if best.is_none() {
                best = Some(i);
            }
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) if values[b].is_nan() => Some(i),
            Some(b) => {
                let better = if higher_is_better { v > values[b] } else { v < values[b] };
                if better {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

/// Best-scoring candidate under the scores' shared metric.
pub fn select_best(scores: &[Score]) -> Result<usize, MetricError> {
    let first = scores.first().ok_or(MetricError::EmptyCandidateSet)?;
    if let Some(other) = scores.iter().find(|s| s.metric != first.metric) {
        return Err(MetricError::MixedMetrics {
            first: first.metric.to_string(),
            other: other.metric.to_string(),
        });
    }
    let values: Vec<f64> = scores.iter().map(|s| s.value).collect();
    Ok(best_index(&values, first.metric.higher_is_better()).expect("non-empty"))
}
