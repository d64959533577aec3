//! Experiment spec files: `key = value` lines naming inputs and settings.
//!
//! ```text
//! mode = crossval          # baseline | baseline_followers | protomeme | compare | gridsearch | crossval
//! input = tweets.jsonl
//! truth = truth.tsv
//! combiner = linear        # max | linear | single:<t|u|c|d>
//! weights = 0,0.7,0.1,0.2  # t,c,u,d; only with combiner = linear
//! sweep = full             # or a comma-separated threshold list
//! grid.step = 0.1
//! folds = 5
//! seed = 1
//! ```
//!
//! Relative paths are resolved against the spec file's directory.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::Sweep;
use crate::kv::KvConfig;
use crate::similarity::{Combiner, WeightVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Baseline,
    BaselineFollowers,
    Protomeme,
    Compare,
    Gridsearch,
    Crossval,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "baseline" => Mode::Baseline,
            "baseline_followers" | "baseline+followers" => Mode::BaselineFollowers,
            "protomeme" => Mode::Protomeme,
            "compare" => Mode::Compare,
            "gridsearch" => Mode::Gridsearch,
            "crossval" => Mode::Crossval,
            other => return Err(Error::config(format!("unknown experiment mode `{other}`"))),
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Baseline => "baseline",
            Mode::BaselineFollowers => "baseline_followers",
            Mode::Protomeme => "protomeme",
            Mode::Compare => "compare",
            Mode::Gridsearch => "gridsearch",
            Mode::Crossval => "crossval",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Hierarchical,
    Kmeans,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hierarchical" => Ok(Algorithm::Hierarchical),
            "kmeans" => Ok(Algorithm::Kmeans),
            other => Err(Error::config(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub input: PathBuf,
    pub truth: PathBuf,
    pub followers: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub combiner: Combiner,
    pub algorithm: Algorithm,
    pub sweep: Sweep,
    pub grid_step: f64,
    pub folds: usize,
    pub seed: u64,
    pub kmeans_k: Vec<usize>,
    pub kmeans_runs: usize,
}

/// Comma-separated list of values.
pub fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse().map_err(|_| Error::config(format!("bad {what} value `{v}`"))))
        .collect()
}

/// `full`, `step:<s>` (thresholds `0, s, …, 1`), or a threshold list.
pub fn parse_sweep(s: &str) -> Result<Sweep> {
    let s = s.trim();
    if s == "full" {
        return Ok(Sweep::Full);
    }
    if let Some(step) = s.strip_prefix("step:") {
        let step: f64 = step.trim().parse().map_err(|_| Error::config(format!("bad sweep step `{step}`")))?;
        if !(step > 0.0 && step <= 1.0) {
            return Err(Error::config(format!("sweep step must be in (0, 1], got {step}")));
        }
        return Ok(Sweep::grid(step));
    }
    let taus: Vec<f64> = parse_list(s, "threshold")?;
    if taus.is_empty() || taus.iter().any(|t| !t.is_finite()) {
        return Err(Error::config("threshold list must hold finite numbers"));
    }
    Ok(Sweep::Thresholds(taus))
}

/// Combiner from a `combiner` name plus optional `weights`.
pub fn parse_combiner(name: Option<&str>, weights: Option<&str>) -> Result<Combiner> {
    let name = name.unwrap_or("max").trim();
    match (name, weights) {
        ("linear", Some(w)) => {
            let w: WeightVector = w.parse()?;
            Ok(Combiner::linear(w))
        }
        ("linear", None) => Err(Error::config("combiner `linear` needs `weights = t,c,u,d`")),
        (_, Some(_)) if !name.starts_with("linear:") => {
            Err(Error::config(format!("weights given but combiner is `{name}`")))
        }
        (other, _) => other.parse(),
    }
}

impl ExperimentConfig {
    pub fn from_kv(kv: &KvConfig, base: &Path) -> Result<Self> {
        const KNOWN: [&str; 15] = [
            "mode", "input", "truth", "followers", "stopwords", "combiner", "weights", "algorithm", "sweep",
            "grid.step", "folds", "seed", "kmeans.k", "kmeans.runs", "name",
        ];
        if let Some(k) = kv.keys().find(|k| !KNOWN.contains(k)) {
            return Err(Error::config(format!("unknown experiment key `{k}`")));
        }
        let path = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let mode: Mode = kv.require("mode")?.parse()?;
        let cfg = ExperimentConfig {
            mode,
            input: path(kv.require("input")?),
            truth: path(kv.require("truth")?),
            followers: kv.get("followers").map(path),
            stopwords: kv.get("stopwords").map(path),
            combiner: parse_combiner(kv.get("combiner"), kv.get("weights"))?,
            algorithm: kv.parse_opt("algorithm")?.unwrap_or(Algorithm::Hierarchical),
            sweep: kv.get("sweep").map(parse_sweep).transpose()?.unwrap_or(Sweep::Full),
            grid_step: kv.parse_opt("grid.step")?.unwrap_or(0.1),
            folds: kv.parse_opt("folds")?.unwrap_or(5),
            seed: kv.parse_opt("seed")?.unwrap_or(0),
            kmeans_k: kv
                .get("kmeans.k")
                .map(|s| parse_list(s, "kmeans.k"))
                .transpose()?
                .unwrap_or_else(|| vec![10, 20, 30, 40, 50]),
            kmeans_runs: kv.parse_opt("kmeans.runs")?.unwrap_or(10),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let kv = KvConfig::load(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_kv(&kv, base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == Mode::Crossval && self.folds < 2 {
            return Err(Error::config(format!("cross-validation needs folds >= 2, got {}", self.folds)));
        }
        if self.mode == Mode::BaselineFollowers && self.followers.is_none() {
            return Err(Error::config("mode baseline_followers needs `followers`"));
        }
        if self.kmeans_runs == 0 {
            return Err(Error::config("kmeans.runs must be positive"));
        }
        if let Combiner::Linear { weights } = &self.combiner {
            weights.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_kv(&KvConfig::parse(text)?, Path::new("/data"))
    }

    #[test]
    fn minimal_spec_uses_defaults() {
        let c = cfg("mode = crossval\ninput = t.jsonl\ntruth = /abs/truth.tsv\n").unwrap();
        assert_eq!(c.input, PathBuf::from("/data/t.jsonl"));
        assert_eq!(c.truth, PathBuf::from("/abs/truth.tsv"));
        assert_eq!(c.folds, 5);
        assert_eq!(c.combiner, Combiner::Max);
        assert_eq!(c.grid_step, 0.1);
        assert_eq!(c.sweep, Sweep::Full);
    }

    #[test]
    fn linear_combiner_needs_valid_weights() {
        let ok = cfg("mode=protomeme\ninput=a\ntruth=b\ncombiner=linear\nweights=0,0.7,0.1,0.2\n").unwrap();
        assert!(matches!(ok.combiner, Combiner::Linear { .. }));
        assert!(cfg("mode=protomeme\ninput=a\ntruth=b\ncombiner=linear\n").is_err());
        assert!(cfg("mode=protomeme\ninput=a\ntruth=b\ncombiner=linear\nweights=0.5,0.6,0,0\n").is_err());
        assert!(cfg("mode=protomeme\ninput=a\ntruth=b\ncombiner=max\nweights=1,0,0,0\n").is_err());
    }

    #[test]
    fn folds_below_two_rejected() {
        assert!(cfg("mode=crossval\ninput=a\ntruth=b\nfolds=1\n").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(cfg("mode=baseline\ninput=a\ntruth=b\nfoldz=3\n").is_err());
    }

    #[test]
    fn sweep_forms() {
        assert_eq!(parse_sweep("full").unwrap(), Sweep::Full);
        assert_eq!(parse_sweep("0.5, 0.1").unwrap(), Sweep::Thresholds(vec![0.5, 0.1]));
        let Sweep::Thresholds(t) = parse_sweep("step:0.25").unwrap() else { panic!() };
        assert_eq!(t, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_sweep("a,b").is_err());
    }
}
