//! Two-phase training: syntax pre-training, head replacement, semantic
//! fine-tuning, and cross-domain evaluation averaged over seeds.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{InstanceError, InstanceRecord};
use crate::rng;
use crate::scalar::Scalar;
use crate::trainer::metrics::{evaluate, Averaging};
use crate::trainer::model::{Encoded, ModelError, ModelParams, Weights};
use crate::trainer::optim::Adam;
use crate::trainer::vocab::Vocab;

/// Padding class for a single-label pre-training set.
pub const UNUSED_LABEL: &str = "~unused";

pub const DEFAULT_SEEDS: [u64; 5] = [4012, 5096, 8878, 8857, 9908];

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("label index {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("non-finite loss in {phase} phase (seed {seed}, epoch {epoch}, step {step})")]
    NonFiniteLoss {
        phase: String,
        seed: u64,
        epoch: usize,
        step: usize,
    },
    #[error("no fine-tuning training data")]
    NoFinetuneData,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dim: usize,
    pub hidden: usize,
    /// Maximum vocabulary rows, reserved rows included.
    pub vocab_cap: usize,
    pub lr_pretrain: f64,
    pub lr_finetune: f64,
    pub batch_pretrain: usize,
    pub batch_finetune: usize,
    pub epochs_pretrain: usize,
    pub epochs_finetune: usize,
    /// Epochs without dev improvement before a phase stops.
    pub patience: usize,
    pub seeds: Vec<u64>,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Truncates the pre-training set to its first `n` instances.
    pub max_instances: Option<usize>,
    pub averaging: Averaging,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 32,
            hidden: 32,
            vocab_cap: 30_000,
            lr_pretrain: 1e-5,
            lr_finetune: 2e-5,
            batch_pretrain: 12,
            batch_finetune: 12,
            epochs_pretrain: 20,
            epochs_finetune: 20,
            patience: 5,
            seeds: DEFAULT_SEEDS.to_vec(),
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            max_instances: None,
            averaging: Averaging::ExcludeNoRelation,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_owned()));
        if !(self.lr_pretrain > 0.0 && self.lr_finetune > 0.0) {
            return bad("learning rates must be positive");
        }
        if self.batch_pretrain == 0 || self.batch_finetune == 0 {
            return bad("batch sizes must be at least 1");
        }
        if self.seeds.is_empty() {
            return bad("seed list is empty");
        }
        if self.dim == 0 || self.hidden == 0 {
            return bad("dimensions must be at least 1");
        }
        if self.vocab_cap <= Vocab::RESERVED {
            return bad("vocab_cap leaves no room for corpus tokens");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || self.eps <= 0.0 {
            return bad("Adam betas must lie in [0, 1) and eps must be positive");
        }
        Ok(())
    }
}

/// Settings for a single phase.
#[derive(Clone, Debug)]
pub struct PhaseSpec<'a> {
    pub name: &'a str,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub patience: usize,
    pub labels: &'a [String],
    pub averaging: Averaging,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseLog {
    pub instances: usize,
    pub epochs_run: usize,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    /// Mean training loss per epoch.
    pub train_loss: Vec<f64>,
    pub dev_macro_f1: Vec<f64>,
    pub best_dev_macro_f1: Option<f64>,
    pub final_loss: f64,
}

pub struct PhaseOutcome<T> {
    pub params: ModelParams<T>,
    pub log: PhaseLog,
}

pub fn predict_all<T: Scalar>(params: &ModelParams<T>, data: &[Encoded]) -> Vec<usize> {
    data.iter().map(|e| params.predict(e)).collect()
}

pub fn macro_f1<T: Scalar>(params: &ModelParams<T>, data: &[Encoded], labels: &[String], averaging: Averaging) -> f64 {
    let gold: Vec<usize> = data.iter().map(|e| e.label).collect();
    evaluate(&gold, &predict_all(params, data), labels, averaging).macro_f1
}

/// Mini-batch Adam over `train` with a seeded shuffle per epoch. When `dev`
/// is non-empty the parameters of the best dev Macro-F1 epoch are returned and
/// training stops after `patience` epochs without improvement; otherwise the
/// final parameters are returned.
pub fn train_phase<T: Scalar>(
    mut params: ModelParams<T>,
    train: &[Encoded],
    dev: &[Encoded],
    spec: &PhaseSpec,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<PhaseOutcome<T>, TrainError> {
    let classes = params.shape.classes;
    if let Some(e) = train.iter().chain(dev).find(|e| e.label >= classes) {
        return Err(TrainError::LabelOutOfRange { label: e.label, classes });
    }
    let mut log = PhaseLog {
        instances: train.len(),
        epochs_run: 0,
        best_epoch: 0,
        train_loss: Vec::new(),
        dev_macro_f1: Vec::new(),
        best_dev_macro_f1: None,
        final_loss: 0.0,
    };
    if train.is_empty() {
        return Ok(PhaseOutcome { params, log });
    }
    let mut opt = Adam::new(params.shape, spec.lr, cfg.beta1, cfg.beta2, cfg.eps);
    let mut grads = Weights::zeros(params.shape);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best: Option<(f64, ModelParams<T>)> = None;
    let mut batch = Vec::with_capacity(spec.batch_size);
    for epoch in 1..=spec.epochs {
        let mut r = rng::stream(seed, &["shuffle", spec.name, &epoch.to_string()]);
        rng::shuffle(&mut r, &mut order);
        let mut total = 0.0;
        for (step, chunk) in order.chunks(spec.batch_size).enumerate() {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| train[i].clone()));
            grads.fill_zero();
            let loss = params.loss_and_grad(&batch, &mut grads).as_f64();
            if !loss.is_finite() || !grads.all_finite() {
                return Err(TrainError::NonFiniteLoss {
                    phase: spec.name.to_owned(),
                    seed,
                    epoch,
                    step: step + 1,
                });
            }
            total += loss * chunk.len() as f64;
            opt.update(&mut params.weights, &grads);
        }
        log.train_loss.push(total / train.len() as f64);
        log.epochs_run = epoch;
        if dev.is_empty() {
            continue;
        }
        let f1 = macro_f1(&params, dev, spec.labels, spec.averaging);
        log.dev_macro_f1.push(f1);
        if best.as_ref().map_or(true, |(b, _)| f1 > *b) {
            best = Some((f1, params.clone()));
            log.best_epoch = epoch;
        } else if epoch - log.best_epoch >= spec.patience {
            break;
        }
    }
    log.final_loss = *log.train_loss.last().expect("at least one epoch");
    let params = match best {
        Some((f1, p)) => {
            log.best_dev_macro_f1 = Some(f1);
            p
        }
        None => {
            log.best_epoch = log.epochs_run;
            params
        }
    };
    Ok(PhaseOutcome { params, log })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DomainSplits {
    pub train: Vec<InstanceRecord>,
    pub dev: Vec<InstanceRecord>,
    pub test: Vec<InstanceRecord>,
}

/// Everything one protocol run reads. An empty `pretrain` set is baseline mode.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProtocolData {
    pub pretrain: Vec<InstanceRecord>,
    pub pretrain_dev: Vec<InstanceRecord>,
    pub finetune: BTreeMap<String, DomainSplits>,
}

impl ProtocolData {
    /// Groups fine-tuning files by each record's `domain`.
    pub fn from_splits(
        pretrain: Vec<InstanceRecord>,
        pretrain_dev: Vec<InstanceRecord>,
        train: Vec<InstanceRecord>,
        dev: Vec<InstanceRecord>,
        test: Vec<InstanceRecord>,
    ) -> Self {
        let mut finetune: BTreeMap<String, DomainSplits> = BTreeMap::new();
        for r in train {
            finetune.entry(r.domain.clone()).or_default().train.push(r);
        }
        for r in dev {
            finetune.entry(r.domain.clone()).or_default().dev.push(r);
        }
        for r in test {
            finetune.entry(r.domain.clone()).or_default().test.push(r);
        }
        ProtocolData {
            pretrain,
            pretrain_dev,
            finetune,
        }
    }

    pub fn with_pretrain(&self, pretrain: Vec<InstanceRecord>) -> Self {
        ProtocolData {
            pretrain,
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Baseline,
    Pretrained,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelSets {
    pub pretrain: Vec<String>,
    pub finetune: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceCounts {
    pub pretrain: usize,
    pub pretrain_dev: usize,
    pub train: BTreeMap<String, usize>,
    pub dev: BTreeMap<String, usize>,
    pub test: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellScore {
    pub train_domain: String,
    pub test_domain: String,
    pub macro_f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pretrain: Option<PhaseLog>,
    /// Keyed by training domain.
    pub finetune: BTreeMap<String, PhaseLog>,
    pub scores: Vec<CellScore>,
}

/// Seed statistics for one (train domain, test domain) cell. `std` is the
/// sample standard deviation (0 for a single seed).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub train_domain: String,
    pub test_domain: String,
    pub per_seed: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub mode: Mode,
    pub config: TrainConfig,
    pub labels: LabelSets,
    pub instance_counts: InstanceCounts,
    pub vocab_size: usize,
    pub runs: Vec<SeedRun>,
    pub cells: Vec<CellSummary>,
    /// Mean over cells of the per-cell seed mean.
    pub mean_macro_f1: f64,
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl TrainReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One row per (train domain, test domain, seed).
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("train_domain\ttest_domain\tseed\tmacro_f1\n");
        for cell in &self.cells {
            for (seed, f1) in self.config.seeds.iter().zip(&cell.per_seed) {
                out.push_str(&format!("{}\t{}\t{seed}\t{f1}\n", cell.train_domain, cell.test_domain));
            }
        }
        out
    }

    pub fn cell(&self, train_domain: &str, test_domain: &str) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.train_domain == train_domain && c.test_domain == test_domain)
    }

    /// Per-seed Macro-F1 averaged over all cells, in seed order.
    pub fn seed_means(&self) -> Vec<f64> {
        self.runs
            .iter()
            .map(|r| mean_std(&r.scores.iter().map(|s| s.macro_f1).collect::<Vec<_>>()).0)
            .collect()
    }

    /// Per-seed best fine-tuning dev Macro-F1 averaged over training domains.
    pub fn seed_dev_means(&self) -> Vec<f64> {
        self.runs
            .iter()
            .map(|r| {
                let devs: Vec<f64> = r.finetune.values().filter_map(|l| l.best_dev_macro_f1).collect();
                mean_std(&devs).0
            })
            .collect()
    }
}

fn label_set<'a>(groups: impl IntoIterator<Item = &'a [InstanceRecord]>) -> Vec<String> {
    let set: BTreeSet<&str> = groups
        .into_iter()
        .flat_map(|g| g.iter().map(|r| r.label.as_str()))
        .collect();
    set.into_iter().map(str::to_owned).collect()
}

fn encode_all<T: Scalar>(
    params: &ModelParams<T>,
    records: &[InstanceRecord],
    labels: &[String],
) -> Result<Vec<Encoded>, TrainError> {
    records
        .iter()
        .map(|r| {
            let label = labels.binary_search(&r.label).expect("label set covers every record");
            Ok(params.encode(&r.marked()?, label)?)
        })
        .collect()
}

struct Prepared {
    vocab: Vocab,
    pre_labels: Vec<String>,
    fine_labels: Vec<String>,
}

fn prepare(data: &ProtocolData, cfg: &TrainConfig) -> Result<(Prepared, Vec<InstanceRecord>), TrainError> {
    cfg.validate()?;
    let mut pretrain = data.pretrain.clone();
    if let Some(n) = cfg.max_instances {
        pretrain.truncate(n);
    }
    if data.finetune.values().all(|d| d.train.is_empty()) {
        return Err(TrainError::NoFinetuneData);
    }
    let mut pre_labels = if pretrain.is_empty() {
        Vec::new()
    } else {
        label_set([&pretrain[..], &data.pretrain_dev[..]])
    };
    if pre_labels.len() == 1 {
        // a head needs two outputs; the spare class is never a gold label
        pre_labels.push(UNUSED_LABEL.to_owned());
    }
    let fine_labels = label_set(
        data.finetune
            .values()
            .flat_map(|d| [&d.train[..], &d.dev[..], &d.test[..]]),
    );
    let fine_groups = data
        .finetune
        .values()
        .flat_map(|d| [&d.train, &d.dev, &d.test])
        .flat_map(|g| g.iter());
    let pretrain_dev: &[InstanceRecord] = if pretrain.is_empty() { &[] } else { &data.pretrain_dev };
    let all = pretrain.iter().chain(pretrain_dev).chain(fine_groups);
    let vocab = Vocab::build(all.map(|r| &r.tokens[..]), cfg.vocab_cap);
    Ok((
        Prepared {
            vocab,
            pre_labels,
            fine_labels,
        },
        pretrain,
    ))
}

fn run_seed<T: Scalar>(
    data: &ProtocolData,
    pretrain: &[InstanceRecord],
    prep: &Prepared,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<SeedRun, TrainError> {
    let fine_k = prep.fine_labels.len();
    let (params, pretrain_log) = if pretrain.is_empty() {
        (ModelParams::<T>::init(prep.vocab.clone(), cfg.dim, cfg.hidden, fine_k, seed)?, None)
    } else {
        let pre_k = prep.pre_labels.len();
        let init = ModelParams::<T>::init(prep.vocab.clone(), cfg.dim, cfg.hidden, pre_k, seed)?;
        let train = encode_all(&init, pretrain, &prep.pre_labels)?;
        let dev = encode_all(&init, &data.pretrain_dev, &prep.pre_labels)?;
        let spec = PhaseSpec {
            name: "pretrain",
            lr: cfg.lr_pretrain,
            batch_size: cfg.batch_pretrain,
            epochs: cfg.epochs_pretrain,
            patience: cfg.patience,
            labels: &prep.pre_labels,
            averaging: Averaging::AllClasses,
        };
        let out = train_phase(init, &train, &dev, &spec, cfg, seed)?;
        (out.params.replace_head(fine_k, seed, "finetune")?, Some(out.log))
    };
    let encoded: BTreeMap<&str, [Vec<Encoded>; 3]> = data
        .finetune
        .iter()
        .map(|(d, s)| {
            Ok((
                d.as_str(),
                [
                    encode_all(&params, &s.train, &prep.fine_labels)?,
                    encode_all(&params, &s.dev, &prep.fine_labels)?,
                    encode_all(&params, &s.test, &prep.fine_labels)?,
                ],
            ))
        })
        .collect::<Result<_, TrainError>>()?;
    let train_domains: Vec<&str> = encoded
        .iter()
        .filter(|(_, s)| !s[0].is_empty())
        .map(|(d, _)| *d)
        .collect();
    let per_domain: Vec<(PhaseLog, Vec<CellScore>)> = train_domains
        .par_iter()
        .map(|&td| {
            let [train, dev, _] = &encoded[td];
            let name = format!("finetune/{td}");
            let spec = PhaseSpec {
                name: &name,
                lr: cfg.lr_finetune,
                batch_size: cfg.batch_finetune,
                epochs: cfg.epochs_finetune,
                patience: cfg.patience,
                labels: &prep.fine_labels,
                averaging: cfg.averaging,
            };
            let out = train_phase(params.clone(), train, dev, &spec, cfg, seed)?;
            let scores = encoded
                .iter()
                .filter(|(_, s)| !s[2].is_empty())
                .map(|(test_domain, s)| CellScore {
                    train_domain: td.to_owned(),
                    test_domain: (*test_domain).to_owned(),
                    macro_f1: macro_f1(&out.params, &s[2], &prep.fine_labels, cfg.averaging),
                })
                .collect();
            Ok((out.log, scores))
        })
        .collect::<Result<_, TrainError>>()?;
    let mut finetune = BTreeMap::new();
    let mut scores = Vec::new();
    for (td, (log, s)) in train_domains.iter().zip(per_domain) {
        finetune.insert((*td).to_owned(), log);
        scores.extend(s);
    }
    Ok(SeedRun {
        seed,
        pretrain: pretrain_log,
        finetune,
        scores,
    })
}

/// Runs the protocol for every configured seed. Seeds run in parallel; the
/// report is assembled in seed order so it does not depend on scheduling.
pub fn run_protocol<T: Scalar>(data: &ProtocolData, cfg: &TrainConfig) -> Result<TrainReport, TrainError> {
    let (prep, pretrain) = prepare(data, cfg)?;
    let runs: Vec<SeedRun> = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed::<T>(data, &pretrain, &prep, cfg, seed))
        .collect::<Result<_, _>>()?;
    let mut cells = Vec::new();
    if let Some(first) = runs.first() {
        for (i, s) in first.scores.iter().enumerate() {
            let per_seed: Vec<f64> = runs.iter().map(|r| r.scores[i].macro_f1).collect();
            let (mean, std) = mean_std(&per_seed);
            cells.push(CellSummary {
                train_domain: s.train_domain.clone(),
                test_domain: s.test_domain.clone(),
                min: per_seed.iter().copied().fold(f64::INFINITY, f64::min),
                max: per_seed.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                per_seed,
                mean,
                std,
            });
        }
    }
    let mean_macro_f1 = mean_std(&cells.iter().map(|c| c.mean).collect::<Vec<_>>()).0;
    let count = |f: fn(&DomainSplits) -> &Vec<InstanceRecord>| {
        data.finetune
            .iter()
            .map(|(d, s)| (d.clone(), f(s).len()))
            .collect()
    };
    Ok(TrainReport {
        mode: if pretrain.is_empty() {
            Mode::Baseline
        } else {
            Mode::Pretrained
        },
        config: cfg.clone(),
        labels: LabelSets {
            pretrain: prep.pre_labels.clone(),
            finetune: prep.fine_labels.clone(),
        },
        instance_counts: InstanceCounts {
            pretrain: pretrain.len(),
            pretrain_dev: if pretrain.is_empty() { 0 } else { data.pretrain_dev.len() },
            train: count(|s| &s.train),
            dev: count(|s| &s.dev),
            test: count(|s| &s.test),
        },
        vocab_size: prep.vocab.len(),
        runs,
        cells,
        mean_macro_f1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub instances: usize,
    pub mean_dev_macro_f1: f64,
    pub mean_test_macro_f1: f64,
    pub per_seed_dev: Vec<f64>,
    pub per_seed_test: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: TrainConfig,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep serializes") + "\n"
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("instances\tseed\tdev_macro_f1\ttest_macro_f1\n");
        for p in &self.points {
            for ((seed, dev), test) in self.config.seeds.iter().zip(&p.per_seed_dev).zip(&p.per_seed_test) {
                out.push_str(&format!("{}\t{seed}\t{dev}\t{test}\n", p.instances));
            }
        }
        out
    }
}

/// One protocol run per pre-training set, in the given order.
pub fn sweep<T: Scalar>(
    pretrain_sets: &[Vec<InstanceRecord>],
    base: &ProtocolData,
    cfg: &TrainConfig,
) -> Result<(SweepReport, Vec<TrainReport>), TrainError> {
    let mut points = Vec::new();
    let mut reports = Vec::new();
    for set in pretrain_sets {
        let report = run_protocol::<T>(&base.with_pretrain(set.clone()), cfg)?;
        let per_seed_dev = report.seed_dev_means();
        let per_seed_test = report.seed_means();
        points.push(SweepPoint {
            instances: report.instance_counts.pretrain,
            mean_dev_macro_f1: mean_std(&per_seed_dev).0,
            mean_test_macro_f1: mean_std(&per_seed_test).0,
            per_seed_dev,
            per_seed_test,
        });
        reports.push(report);
    }
    Ok((
        SweepReport {
            config: cfg.clone(),
            points,
        },
        reports,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_validation() {
        let c = TrainConfig::default();
        assert_eq!(c.seeds, vec![4012, 5096, 8878, 8857, 9908]);
        assert_eq!((c.lr_pretrain, c.lr_finetune), (1e-5, 2e-5));
        assert_eq!((c.batch_pretrain, c.batch_finetune), (12, 12));
        assert!(c.validate().is_ok());
        for broken in [
            TrainConfig { lr_pretrain: 0.0, ..c.clone() },
            TrainConfig { batch_finetune: 0, ..c.clone() },
            TrainConfig { seeds: vec![], ..c.clone() },
        ] {
            assert!(matches!(broken.validate(), Err(TrainError::InvalidConfig(_))));
        }
        let parsed: TrainConfig = serde_json::from_str(r#"{"lr_finetune": 0.5}"#).unwrap();
        assert_eq!(parsed.lr_finetune, 0.5);
        assert_eq!(parsed.seeds, c.seeds);
        assert!(serde_json::from_str::<TrainConfig>(r#"{"lr": 1}"#).is_err());
    }

    #[test]
    fn mean_std_sample() {
        assert_eq!(mean_std(&[1.0]), (1.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-12);
    }
}
