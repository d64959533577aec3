//! Implementations of the subcommands.

use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::manifest::OutputDir;
use super::{
    BaselineArgs, ClusterArgs, CombinerArgs, CompareArgs, CrossvalArgs, EvaluateArgs, ExperimentArgs,
    ExtractArgs, GridArgs, InputArgs, SweepArgs, SynthArgs,
};
use crate::clustering::{
    cover_from_partition, cut, cut_sweep, hierarchical_cluster, kmeans, ClusterCover, Merge, Partition,
};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate as evaluate_cover, load_ground_truth_file, GroundTruth, MetricReport, Sweep};
use crate::experiment::config::{parse_combiner, parse_list, parse_sweep, Algorithm, ExperimentConfig, Mode};
use crate::experiment::{
    compare_algorithms, cross_validate, enumerate_simplex, generate, grid_search_with, run_baseline,
    run_baseline_followers, run_protomeme_config, truth_index_for, CvConfig, FollowerGraph, ProtomemeSetup,
    RunOptions, SynthConfig,
};
use crate::ingest::{deduplicate, parse_stream, write_jsonl, DedupMode, FieldMapping, TweetRecord};
use crate::kv::KvConfig;
use crate::protomeme::{
    build_protomemes, read_protomemes_jsonl, write_protomemes_jsonl, ExtractionStats, Protomeme, Stopwords,
};
use crate::similarity::{similarity_matrix, Combiner};

fn open(path: &Path) -> Result<BufReader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(file))
}

fn load_stopwords(path: Option<&Path>, out: &mut OutputDir) -> Result<Stopwords> {
    match path {
        Some(p) => {
            out.input(p)?;
            Stopwords::load(p)
        }
        None => Ok(Stopwords::english()),
    }
}

/// Parses, optionally deduplicates, and records the message file.
fn load_records(
    input: &Path,
    mapping: Option<&Path>,
    dedup: &str,
    out: &mut OutputDir,
) -> Result<(Vec<TweetRecord>, usize)> {
    let mapping = match mapping {
        Some(p) => {
            out.input(p)?;
            FieldMapping::from_config(&KvConfig::load(p)?)?
        }
        None => FieldMapping::default(),
    };
    out.input(input)?;
    let mode: DedupMode = dedup.parse()?;
    out.set("dedup", dedup);
    let parsed = parse_stream(open(input)?, &mapping)?;
    let skipped = parsed.skip_count();
    Ok((deduplicate(parsed.records, mode), skipped))
}

fn load_input(args: &InputArgs, out: &mut OutputDir) -> Result<(Vec<TweetRecord>, RunOptions)> {
    let (records, _) = load_records(&args.input, args.mapping.as_deref(), &args.dedup, out)?;
    let opts = RunOptions {
        stopwords: load_stopwords(args.stopwords.as_deref(), out)?,
        ..RunOptions::default()
    };
    Ok((records, opts))
}

fn load_truth(path: &Path, out: &mut OutputDir) -> Result<GroundTruth> {
    out.input(path)?;
    load_ground_truth_file(path)
}

fn finish(out: OutputDir) -> Result<()> {
    let dir = out.path().to_path_buf();
    let m = out.finish()?;
    log::info!("wrote {} outputs to {}", m.outputs.len(), dir.display());
    Ok(())
}

pub fn extract(args: &ExtractArgs) -> Result<()> {
    let mut out = OutputDir::create(&args.out, "extract")?;
    let (records, skipped) = load_records(&args.input, args.mapping.as_deref(), &args.dedup, &mut out)?;
    let stopwords = load_stopwords(args.stopwords.as_deref(), &mut out)?;
    let protomemes = build_protomemes(&records, &stopwords);
    let stats = ExtractionStats::collect(&records, &protomemes, &stopwords);
    out.write_with("protomemes.jsonl", |b| write_protomemes_jsonl(&protomemes, b))?;
    out.write_with("records.jsonl", |b| write_jsonl(&records, b))?;
    #[derive(Serialize)]
    struct Stats<'a> {
        #[serde(flatten)]
        stats: &'a ExtractionStats,
        skipped_lines: usize,
    }
    out.write_json("stats.json", &Stats { stats: &stats, skipped_lines: skipped })?;
    finish(out)
}

fn combiner_from(args: &CombinerArgs) -> Result<Combiner> {
    let name = match (&args.combiner, &args.weights) {
        (None, Some(_)) => Some("linear"),
        (name, _) => name.as_deref(),
    };
    parse_combiner(name, args.weights.as_deref())
}

fn sweep_from(args: &SweepArgs, default: &str) -> Result<Sweep> {
    match (args.tau, &args.tau_sweep) {
        (Some(t), _) => {
            if !t.is_finite() {
                return Err(Error::config("tau must be finite"));
            }
            Ok(Sweep::Thresholds(vec![t]))
        }
        (None, Some(s)) => parse_sweep(s),
        (None, None) => parse_sweep(default),
    }
}

/// One cut of a clustering, in protomeme keys or message ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutClusters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub cluster_count: usize,
    pub clusters: Vec<Vec<String>>,
}

fn keyed(partition: &Partition, protomemes: &[Protomeme]) -> Vec<Vec<String>> {
    partition
        .clusters
        .iter()
        .map(|c| c.iter().map(|&i| protomemes[i].key.to_string()).collect())
        .collect()
}

fn cover_ids(cover: &ClusterCover) -> Vec<Vec<String>> {
    cover.clusters.iter().map(|c| c.iter().cloned().collect()).collect()
}

pub fn cluster(args: &ClusterArgs) -> Result<()> {
    let mut out = OutputDir::create(&args.out, "cluster")?;
    out.input(&args.input)?;
    let protomemes = read_protomemes_jsonl(open(&args.input)?)?;
    if protomemes.is_empty() {
        return Err(Error::Empty("protomeme file"));
    }
    let algorithm: Algorithm = args.algorithm.parse()?;
    let mut cuts: Vec<(Option<f64>, Option<usize>, Partition)> = Vec::new();
    match algorithm {
        Algorithm::Hierarchical => {
            let combiner = combiner_from(&args.combiner)?;
            let sweep = sweep_from(&args.sweep, "step:0.05")?;
            out.set("algorithm", "hierarchical");
            out.set("combiner", combiner);
            out.set("sweep", serde_json::to_string(&sweep)?);
            let d = hierarchical_cluster(&similarity_matrix(&protomemes, &combiner)?)?;
            #[derive(Serialize)]
            struct DendrogramFile<'a> {
                leaves: Vec<String>,
                merges: &'a [Merge],
            }
            out.write_json(
                "dendrogram.json",
                &DendrogramFile {
                    leaves: protomemes.iter().map(|p| p.key.to_string()).collect(),
                    merges: &d.merges,
                },
            )?;
            match sweep {
                Sweep::Full => {
                    for e in cut_sweep(&d) {
                        cuts.push((e.tau, None, e.partition));
                    }
                }
                Sweep::Thresholds(taus) => {
                    for t in taus {
                        cuts.push((Some(t), None, cut(&d, t)));
                    }
                }
            }
        }
        Algorithm::Kmeans => {
            let ks: Vec<usize> = parse_list(
                args.k.as_deref().ok_or_else(|| Error::config("K-means needs --k"))?,
                "k",
            )?;
            out.set("algorithm", "kmeans");
            out.set("k", args.k.as_deref().unwrap_or_default());
            out.set("runs", args.runs);
            out.seed(args.seed);
            let mut runs = Vec::new();
            for k in ks {
                let result = kmeans(&protomemes, k, args.runs, args.seed)?;
                cuts.push((None, Some(k), result.best().partition.clone()));
                runs.push(result);
            }
            out.write_json("kmeans.json", &runs)?;
        }
    }
    let partitions: Vec<CutClusters> = cuts
        .iter()
        .map(|(tau, k, p)| CutClusters {
            tau: *tau,
            k: *k,
            cluster_count: p.len(),
            clusters: keyed(p, &protomemes),
        })
        .collect();
    let covers: Vec<CutClusters> = cuts
        .iter()
        .map(|(tau, k, p)| {
            let cover = cover_from_partition(p, &protomemes);
            CutClusters {
                tau: *tau,
                k: *k,
                cluster_count: cover.len(),
                clusters: cover_ids(&cover),
            }
        })
        .collect();
    out.write_json("partitions.json", &partitions)?;
    out.write_json("cover.json", &covers)?;
    finish(out)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CoverFile {
    Plain(Vec<Vec<String>>),
    Cuts(Vec<CutClusters>),
}

#[derive(Serialize)]
struct CutReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(flatten)]
    report: MetricReport,
}

fn to_cover(clusters: Vec<Vec<String>>) -> Result<ClusterCover> {
    if clusters.is_empty() {
        return Err(Error::Empty("cover"));
    }
    Ok(ClusterCover::from_sets(clusters.into_iter().map(|c| c.into_iter().collect()).collect()))
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let mut out = OutputDir::create(&args.out, "evaluate")?;
    out.input(&args.input)?;
    let truth = load_truth(&args.truth, &mut out)?;
    let text = std::fs::read_to_string(&args.input).map_err(|e| Error::io(&args.input, e))?;
    let file: CoverFile = serde_json::from_str(&text)?;
    match file {
        CoverFile::Plain(clusters) => {
            let report = evaluate_cover(&truth, &to_cover(clusters)?)?;
            out.write_json("metrics.json", &report)?;
        }
        CoverFile::Cuts(cuts) => {
            if cuts.is_empty() {
                return Err(Error::Empty("cover"));
            }
            let reports = cuts
                .into_iter()
                .map(|c| {
                    Ok(CutReport {
                        tau: c.tau,
                        k: c.k,
                        report: evaluate_cover(&truth, &to_cover(c.clusters)?)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            out.write_json("metrics.json", &reports)?;
        }
    }
    finish(out)
}

fn write_grid(out: &mut OutputDir, records: &[TweetRecord], truth: &GroundTruth, step: f64, opts: &RunOptions) -> Result<()> {
    out.set("grid.step", step);
    let weights = enumerate_simplex(step)?;
    let setup = ProtomemeSetup::new(records, opts)?;
    let index = truth_index_for(records, truth)?;
    let result = grid_search_with(&setup, &index, &weights, opts)?;
    log::info!(
        "best weights {} (LFK-NMI {:.4}); MAX {:.4}",
        result.best_weights(),
        result.best_row().best_lfk_nmi,
        result.max_combiner.best_lfk_nmi
    );
    out.write_with("grid.csv", |b| result.write_csv(b))?;
    out.write_json("grid.json", &result)
}

pub fn gridsearch(args: &GridArgs) -> Result<()> {
    let mut out = OutputDir::create(&args.out, "gridsearch")?;
    let (records, opts) = load_input(&args.input, &mut out)?;
    let truth = load_truth(&args.truth, &mut out)?;
    write_grid(&mut out, &records, &truth, args.step, &opts)?;
    finish(out)
}

fn write_crossval(out: &mut OutputDir, records: &[TweetRecord], truth: &GroundTruth, cfg: &CvConfig, opts: &RunOptions) -> Result<()> {
    out.set("folds", cfg.folds);
    out.set("grid.step", cfg.grid_step);
    out.seed(cfg.seed);
    let result = cross_validate(records, truth, cfg, opts)?;
    out.write_with("linear_mean.csv", |b| crate::experiment::curve::write_mean_csv(&result.linear_mean, b))?;
    out.write_with("max_mean.csv", |b| crate::experiment::curve::write_mean_csv(&result.max_mean, b))?;
    out.write_json("folds.json", &result.folds)
}

pub fn crossval(args: &CrossvalArgs) -> Result<()> {
    let mut out = OutputDir::create(&args.out, "crossval")?;
    let (records, opts) = load_input(&args.input, &mut out)?;
    let truth = load_truth(&args.truth, &mut out)?;
    let Sweep::Thresholds(thresholds) = parse_sweep(&args.tau_sweep)? else {
        return Err(Error::config("cross-validation needs explicit thresholds, not `full`"));
    };
    out.set("tau_sweep", &args.tau_sweep);
    let cfg = CvConfig {
        folds: args.folds,
        seed: args.seed,
        grid_step: args.step,
        thresholds,
    };
    write_crossval(&mut out, &records, &truth, &cfg, &opts)?;
    finish(out)
}

#[derive(Serialize)]
struct Peak {
    label: String,
    lfk_nmi: f64,
    tau: Option<f64>,
    cluster_count: usize,
}

fn peak_of(c: &crate::experiment::Curve) -> Peak {
    let p = c.peak().expect("curves have at least one cut");
    Peak {
        label: c.label.clone(),
        lfk_nmi: p.lfk_nmi,
        tau: p.tau,
        cluster_count: p.cluster_count,
    }
}

fn write_baselines(
    out: &mut OutputDir,
    records: &[TweetRecord],
    truth: &GroundTruth,
    followers: Option<&FollowerGraph>,
    sweep: &Sweep,
    opts: &RunOptions,
) -> Result<()> {
    let mut peaks = Vec::new();
    let base = run_baseline(records, truth, sweep, opts)?;
    out.write_with("baseline.csv", |b| base.write_csv(b))?;
    peaks.push(peak_of(&base));
    if let Some(g) = followers {
        let bf = run_baseline_followers(records, truth, Some(g), sweep, opts)?;
        out.write_with("baseline_followers.csv", |b| bf.write_csv(b))?;
        peaks.push(peak_of(&bf));
    }
    out.write_json("peaks.json", &peaks)
}

fn load_followers(path: &Path, out: &mut OutputDir) -> Result<FollowerGraph> {
    out.input(path)?;
    FollowerGraph::load(path)
}

pub fn baseline(args: &BaselineArgs) -> Result<()> {
    let mut out = OutputDir::create(&args.out, "baseline")?;
    let (records, opts) = load_input(&args.input, &mut out)?;
    let truth = load_truth(&args.truth, &mut out)?;
    let followers = args.followers.as_deref().map(|p| load_followers(p, &mut out)).transpose()?;
    out.set("tau_sweep", &args.tau_sweep);
    let sweep = parse_sweep(&args.tau_sweep)?;
    write_baselines(&mut out, &records, &truth, followers.as_ref(), &sweep, &opts)?;
    finish(out)
}

fn write_compare(
    out: &mut OutputDir,
    records: &[TweetRecord],
    truth: &GroundTruth,
    ks: &[usize],
    runs: usize,
    seed: u64,
    opts: &RunOptions,
) -> Result<()> {
    out.set("k", ks.iter().map(ToString::to_string).collect::<Vec<_>>().join(","));
    out.set("runs", runs);
    out.seed(seed);
    let cmp = compare_algorithms(records, truth, ks, runs, seed, opts)?;
    out.write_with("comparison.csv", |b| cmp.write_csv(b))?;
    out.write_json("comparison.json", &cmp)
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    let mut out = OutputDir::create(&args.out, "compare")?;
    let (records, opts) = load_input(&args.input, &mut out)?;
    let truth = load_truth(&args.truth, &mut out)?;
    let ks: Vec<usize> = parse_list(&args.k, "k")?;
    write_compare(&mut out, &records, &truth, &ks, args.runs, args.seed, &opts)?;
    finish(out)
}

pub fn experiment(args: &ExperimentArgs) -> Result<()> {
    let mut out = OutputDir::create(&args.out, "experiment")?;
    out.input(&args.spec)?;
    let kv = KvConfig::load(&args.spec)?;
    for (k, v) in kv.iter() {
        out.set(&format!("spec.{k}"), v);
    }
    let cfg = ExperimentConfig::from_kv(&kv, args.spec.parent().unwrap_or(Path::new(".")))?;
    let (records, _) = load_records(&cfg.input, None, "none", &mut out)?;
    let opts = RunOptions {
        stopwords: load_stopwords(cfg.stopwords.as_deref(), &mut out)?,
        ..RunOptions::default()
    };
    let truth = load_truth(&cfg.truth, &mut out)?;
    out.seed(cfg.seed);
    match cfg.mode {
        Mode::Baseline | Mode::BaselineFollowers => {
            let followers = cfg.followers.as_deref().map(|p| load_followers(p, &mut out)).transpose()?;
            write_baselines(&mut out, &records, &truth, followers.as_ref(), &cfg.sweep, &opts)?;
        }
        Mode::Protomeme => match cfg.algorithm {
            Algorithm::Hierarchical => {
                let curve = run_protomeme_config(&records, &truth, &cfg.combiner, &cfg.sweep, &opts)?;
                out.write_with("curve.csv", |b| curve.write_csv(b))?;
                out.write_json("peaks.json", &[peak_of(&curve)])?;
            }
            Algorithm::Kmeans => {
                write_compare(&mut out, &records, &truth, &cfg.kmeans_k, cfg.kmeans_runs, cfg.seed, &opts)?;
            }
        },
        Mode::Compare => {
            write_compare(&mut out, &records, &truth, &cfg.kmeans_k, cfg.kmeans_runs, cfg.seed, &opts)?;
        }
        Mode::Gridsearch => write_grid(&mut out, &records, &truth, cfg.grid_step, &opts)?,
        Mode::Crossval => {
            let thresholds = match &cfg.sweep {
                Sweep::Thresholds(t) => t.clone(),
                Sweep::Full => CvConfig::default().thresholds,
            };
            let cv = CvConfig {
                folds: cfg.folds,
                seed: cfg.seed,
                grid_step: cfg.grid_step,
                thresholds,
            };
            write_crossval(&mut out, &records, &truth, &cv, &opts)?;
        }
    }
    finish(out)
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let mut out = OutputDir::create(&args.out, "synth")?;
    if !(0.0..=1.0).contains(&args.multi_topic_rate) {
        return Err(Error::config("multi-topic rate must be in [0, 1]"));
    }
    let cfg = SynthConfig {
        topics: args.topics,
        tweets: args.tweets,
        multi_topic_rate: args.multi_topic_rate,
        seed: args.seed,
        ..SynthConfig::default()
    };
    out.set("topics", cfg.topics);
    out.set("tweets", cfg.tweets);
    out.set("multi_topic_rate", cfg.multi_topic_rate);
    out.seed(cfg.seed);
    let corpus = generate(&cfg);
    out.write_with("tweets.jsonl", |b| write_jsonl(&corpus.records, b))?;
    out.write("truth.tsv", corpus.truth.to_tsv().as_bytes())?;
    out.write_with("followers.tsv", |b| corpus.followers.write(b))?;
    finish(out)
}
