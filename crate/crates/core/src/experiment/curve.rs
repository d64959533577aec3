//! Quality-vs-granularity curves and their CSV form.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::evaluation::ScoredCut;

/// One configuration's LFK-NMI at each scored cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub points: Vec<ScoredCut>,
}

impl Curve {
    pub fn new(label: impl Into<String>, points: Vec<ScoredCut>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }

    /// The highest-scoring cut; the first one wins ties.
    pub fn peak(&self) -> Option<&ScoredCut> {
        self.points
            .iter()
            .fold(None, |best: Option<&ScoredCut>, p| match best {
                Some(b) if b.lfk_nmi >= p.lfk_nmi => Some(b),
                _ => Some(p),
            })
    }

    /// Like [`Curve::peak`], but ignores cuts with fewer than `min_clusters`
    /// clusters unless no other cut exists.
    pub fn peak_with_at_least(&self, min_clusters: usize) -> Option<&ScoredCut> {
        let eligible = |p: &&ScoredCut| p.cluster_count >= min_clusters;
        self.points
            .iter()
            .filter(eligible)
            .fold(None, |best: Option<&ScoredCut>, p| match best {
                Some(b) if b.lfk_nmi >= p.lfk_nmi => Some(b),
                _ => Some(p),
            })
            .or_else(|| self.peak())
    }

    pub fn peak_lfk(&self) -> f64 {
        self.peak().map_or(0.0, |p| p.lfk_nmi)
    }

    /// Best score among cuts with at least `min_clusters` clusters.
    pub fn best_with_at_least(&self, min_clusters: usize) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.cluster_count >= min_clusters)
            .map(|p| p.lfk_nmi)
            .reduce(f64::max)
    }

    /// `tau,cluster_count,lfk_nmi` rows; the singleton cut has an empty tau.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["tau", "cluster_count", "lfk_nmi"])?;
        for p in &self.points {
            w.write_record([
                p.tau.map(|t| format!("{t}")).unwrap_or_default(),
                p.cluster_count.to_string(),
                format!("{}", p.lfk_nmi),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean and standard error of one threshold across folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanPoint {
    pub tau: f64,
    pub cluster_count_mean: f64,
    pub cluster_count_stderr: f64,
    pub lfk_nmi_mean: f64,
    pub lfk_nmi_stderr: f64,
}

/// Sample mean and standard error (`s / sqrt(n)`); the error is 0 for `n < 2`.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Averages curves scored at the same thresholds, point by point.
pub fn average_curves(curves: &[Curve]) -> Vec<MeanPoint> {
    let Some(first) = curves.first() else {
        return Vec::new();
    };
    (0..first.points.len())
        .map(|i| {
            let counts: Vec<f64> = curves.iter().map(|c| c.points[i].cluster_count as f64).collect();
            let scores: Vec<f64> = curves.iter().map(|c| c.points[i].lfk_nmi).collect();
            let (cm, cs) = mean_stderr(&counts);
            let (lm, ls) = mean_stderr(&scores);
            MeanPoint {
                tau: first.points[i].tau.unwrap_or(f64::INFINITY),
                cluster_count_mean: cm,
                cluster_count_stderr: cs,
                lfk_nmi_mean: lm,
                lfk_nmi_stderr: ls,
            }
        })
        .collect()
}

pub fn write_mean_csv<W: Write>(points: &[MeanPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tau", "cluster_count", "cluster_count_stderr", "lfk_nmi", "stderr"])?;
    for p in points {
        w.write_record([
            format!("{}", p.tau),
            format!("{}", p.cluster_count_mean),
            format!("{}", p.cluster_count_stderr),
            format!("{}", p.lfk_nmi_mean),
            format!("{}", p.lfk_nmi_stderr),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(tau: f64, count: usize, lfk: f64) -> ScoredCut {
        ScoredCut {
            tau: Some(tau),
            cluster_count: count,
            lfk_nmi: lfk,
        }
    }

    #[test]
    fn peak_prefers_first_maximum() {
        let c = Curve::new("x", vec![pt(0.9, 5, 0.4), pt(0.5, 3, 0.7), pt(0.1, 1, 0.7)]);
        assert_eq!(c.peak().unwrap().cluster_count, 3);
        assert_eq!(c.best_with_at_least(4), Some(0.4));
        assert_eq!(c.peak_with_at_least(4).unwrap().cluster_count, 5);
        assert_eq!(c.peak_with_at_least(99).unwrap().cluster_count, 3);
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(mean_stderr(&[2.0, 2.0, 2.0]), (2.0, 0.0));
        let (m, s) = mean_stderr(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let c = Curve::new("x", vec![pt(0.5, 2, 0.25)]);
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "tau,cluster_count,lfk_nmi\n0.5,2,0.25\n");
    }
}
