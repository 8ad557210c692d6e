use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{evaluate, MetricsReport};
use crate::corpus::Split;
use crate::error::{Error, Result};
use crate::graph::TextGraph;
use crate::layers::GraphInputs;
use crate::train::{train_with_inputs, TrainConfig};

/// Sample mean and unbiased standard deviation (0 for a single value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p_value: f64,
}

/// Welch's unequal-variance two-sample t-test.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidConfig(
            "t-test needs at least two samples per group".into(),
        ));
    }
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (sa * sa / na, sb * sb / nb);
    let se2 = va + vb;
    if se2 == 0.0 {
        let same = ma == mb;
        return Ok(TTest {
            t: if same {
                0.0
            } else {
                f64::INFINITY.copysign(ma - mb)
            },
            df: na + nb - 2.0,
            p_value: if same { 1.0 } else { 0.0 },
        });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    Ok(TTest {
        t,
        df,
        p_value: 2.0 * dist.cdf(-t.abs()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatSummary {
    pub seeds: Vec<u64>,
    pub reports: Vec<MetricsReport>,
    pub accuracy: (f64, f64),
    pub macro_precision: (f64, f64),
    pub macro_recall: (f64, f64),
    pub macro_f: (f64, f64),
}

impl RepeatSummary {
    pub const CSV_HEADER: &'static str = "metric,mean,std";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for (name, (m, s)) in [
            ("accuracy", self.accuracy),
            ("macro_precision", self.macro_precision),
            ("macro_recall", self.macro_recall),
            ("macro_f", self.macro_f),
        ] {
            out.push_str(&format!("{name},{m},{s}\n"));
        }
        out
    }

    pub fn accuracies(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.accuracy).collect()
    }
}

/// Retrains with seeds `config.seed + 0 .. repeats` and scores each run on
/// `split`.
pub fn evaluate_repeats(
    graph: &TextGraph,
    inputs: &GraphInputs,
    config: &TrainConfig,
    split: Split,
    repeats: usize,
) -> Result<RepeatSummary> {
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    let mut seeds = Vec::with_capacity(repeats);
    let mut reports = Vec::with_capacity(repeats);
    for r in 0..repeats as u64 {
        let mut c = config.clone();
        c.seed = config.seed.wrapping_add(r);
        let out = train_with_inputs(graph, inputs, &c)?;
        reports.push(evaluate(&out.checkpoint, graph, inputs, split)?);
        seeds.push(c.seed);
    }
    let col = |f: fn(&MetricsReport) -> f64| mean_std(&reports.iter().map(f).collect::<Vec<_>>());
    Ok(RepeatSummary {
        accuracy: col(|r| r.accuracy),
        macro_precision: col(|r| r.macro_precision),
        macro_recall: col(|r| r.macro_recall),
        macro_f: col(|r| r.macro_f),
        seeds,
        reports,
    })
}
