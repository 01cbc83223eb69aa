use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScore {
    pub id: String,
    pub score: f64,
    /// Metric-specific counts (edit distance, node count, ...). Not written
    /// to report files.
    #[serde(skip)]
    pub counts: BTreeMap<&'static str, usize>,
}

impl SampleScore {
    pub fn new(id: impl Into<String>, score: f64) -> Self {
        SampleScore {
            id: id.into(),
            score,
            counts: BTreeMap::new(),
        }
    }

    pub fn with_count(mut self, name: &'static str, value: usize) -> Self {
        self.counts.insert(name, value);
        self
    }
}

/// `{"metric": .., "mean": .., "n": .., "samples": [{"id": .., "score": ..}]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metric: String,
    pub mean: f64,
    pub n: usize,
    pub samples: Vec<SampleScore>,
}

impl MetricReport {
    /// Mean is summed in sample order, so it does not depend on how the
    /// scores were computed. An empty report has mean 0.
    pub fn new(metric: impl Into<String>, samples: Vec<SampleScore>) -> Self {
        let n = samples.len();
        let mean = if n == 0 {
            0.0
        } else {
            samples.iter().map(|s| s.score).sum::<f64>() / n as f64
        };
        MetricReport {
            metric: metric.into(),
            mean,
            n,
            samples,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_schema() {
        let r = MetricReport::new(
            "anls",
            vec![
                SampleScore::new("a", 1.0).with_count("distance", 0),
                SampleScore::new("b", 0.5),
            ],
        );
        assert_eq!(r.mean, 0.75);
        assert_eq!(r.n, 2);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"metric": "anls", "mean": 0.75, "n": 2,
                "samples": [{"id": "a", "score": 1.0}, {"id": "b", "score": 0.5}]})
        );
        assert_eq!(MetricReport::new("x", vec![]).mean, 0.0);
    }
}
