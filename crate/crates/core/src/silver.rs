//! Silver pre-training data: sentence sampling, triplet extraction and capping,
//! the evaluation holdout, and nested instance files for data-quantity sweeps.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::ParsedSentence;
use crate::instance::{write_instances, InstanceRecord, Provenance, SilverRef};
use crate::rng;
use crate::stats::DEFAULT_WHITELIST;
use crate::tree::{propagate_conj, strip_subtype, TreeError};

#[derive(Debug, Error)]
pub enum SilverError {
    #[error("domain {domain}: pool has {available} sentences, {requested} requested (short by {})", .requested - .available)]
    PoolTooSmall {
        domain: String,
        available: usize,
        requested: usize,
    },
    #[error("{available} instances available, {requested} requested")]
    InsufficientInstances { available: usize, requested: usize },
    #[error("sweep targets must be ascending: {0:?}")]
    UnsortedTargets(Vec<usize>),
    #[error("{file}: {source}")]
    Tree {
        file: String,
        #[source]
        source: TreeError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A parsed sentence together with the file it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoolSentence {
    pub file: String,
    pub sentence: ParsedSentence,
}

/// Sentences grouped by domain; iteration order is the domain name order.
pub type SentencePool = BTreeMap<String, Vec<PoolSentence>>;

/// A whitelisted tree edge: `deprel(head, dependent)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SilverTriplet {
    pub file: String,
    pub sent_id: String,
    /// Subtype-stripped relation, used as the instance label.
    pub deprel: String,
    pub head_index: usize,
    pub dep_index: usize,
    pub domain: String,
}

fn pool_check(domain: &str, available: usize, requested: usize) -> Result<(), SilverError> {
    if available < requested {
        return Err(SilverError::PoolTooSmall {
            domain: domain.to_owned(),
            available,
            requested,
        });
    }
    Ok(())
}

/// Draws `n_per_domain` sentences without replacement from every domain, in
/// draw order.
pub fn sample_sentences(
    pools: &SentencePool,
    n_per_domain: usize,
    seed: u64,
) -> Result<SentencePool, SilverError> {
    let mut out = SentencePool::new();
    for (domain, pool) in pools {
        pool_check(domain, pool.len(), n_per_domain)?;
        let mut r = rng::stream(seed, &["sample", domain]);
        let picked = rng::sample_indices(&mut r, pool.len(), n_per_domain)
            .into_iter()
            .map(|i| pool[i].clone())
            .collect();
        out.insert(domain.clone(), picked);
    }
    Ok(out)
}

/// Splits off `per_domain` sentences of every domain as a holdout. The
/// remaining sentences keep their original order.
pub fn make_holdout(
    pools: &SentencePool,
    per_domain: usize,
    seed: u64,
) -> Result<(SentencePool, SentencePool), SilverError> {
    let mut train = SentencePool::new();
    let mut holdout = SentencePool::new();
    for (domain, pool) in pools {
        pool_check(domain, pool.len(), per_domain)?;
        let mut r = rng::stream(seed, &["holdout", domain]);
        let held = rng::sample_indices(&mut r, pool.len(), per_domain);
        let mut is_held = vec![false; pool.len()];
        for &i in &held {
            is_held[i] = true;
        }
        holdout.insert(domain.clone(), held.iter().map(|&i| pool[i].clone()).collect());
        train.insert(
            domain.clone(),
            pool.iter()
                .zip(&is_held)
                .filter(|(_, held)| !**held)
                .map(|(s, _)| s.clone())
                .collect(),
        );
    }
    Ok((train, holdout))
}

/// One triplet per edge whose stripped deprel is whitelisted, ordered by
/// dependent index. Expects a conj-propagated tree.
pub fn extract_triplets<S: AsRef<str>>(
    sentence: &ParsedSentence,
    file: &str,
    whitelist: &[S],
) -> Vec<SilverTriplet> {
    sentence
        .tokens
        .iter()
        .filter(|t| t.head != 0)
        .filter_map(|t| {
            let label = strip_subtype(&t.deprel);
            whitelist.iter().any(|w| w.as_ref() == label).then(|| SilverTriplet {
                file: file.to_owned(),
                sent_id: sentence.sent_id.clone(),
                deprel: label.to_owned(),
                head_index: t.head,
                dep_index: t.index,
                domain: sentence.domain.clone(),
            })
        })
        .collect()
}

/// Keeps a uniformly random subset of at most `max_n` triplets, preserving
/// their relative order. The draw depends only on the seed and the sentence.
pub fn cap_per_sentence(triplets: Vec<SilverTriplet>, max_n: usize, seed: u64) -> Vec<SilverTriplet> {
    if triplets.len() <= max_n {
        return triplets;
    }
    let first = &triplets[0];
    let mut r = rng::stream(seed, &["cap", &first.file, &first.sent_id]);
    let mut keep = rng::sample_indices(&mut r, triplets.len(), max_n);
    keep.sort_unstable();
    let mut it = keep.into_iter().peekable();
    triplets
        .into_iter()
        .enumerate()
        .filter(|(i, _)| {
            if it.peek() == Some(i) {
                it.next();
                true
            } else {
                false
            }
        })
        .map(|(_, t)| t)
        .collect()
}

/// Instance for a triplet: the governor is the first argument, the dependent
/// the second.
pub fn triplet_instance(sentence: &ParsedSentence, t: &SilverTriplet) -> InstanceRecord {
    InstanceRecord {
        tokens: sentence.tokens.iter().map(|tok| tok.form.clone()).collect(),
        e1: [t.head_index - 1, t.head_index],
        e2: [t.dep_index - 1, t.dep_index],
        label: t.deprel.clone(),
        domain: t.domain.clone(),
        provenance: Provenance::Silver(SilverRef {
            file: t.file.clone(),
            sent_id: t.sent_id.clone(),
            deprel: t.deprel.clone(),
            head: t.head_index,
            dep: t.dep_index,
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub labels: Vec<String>,
    pub max_per_sentence: usize,
    pub per_domain: usize,
    pub holdout: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            labels: DEFAULT_WHITELIST.iter().map(|s| s.to_string()).collect(),
            max_per_sentence: 5,
            per_domain: 0,
            holdout: 100,
            seed: 4012,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainSummary {
    pub sentences: usize,
    pub instances: usize,
    pub holdout_sentences: usize,
    pub holdout_instances: usize,
}

#[derive(Clone, Debug, Default)]
pub struct SilverOutput {
    /// Pre-training instances in consumption order.
    pub train: Vec<InstanceRecord>,
    pub holdout: Vec<InstanceRecord>,
    /// Sentence ids of the holdout, per domain.
    pub holdout_sentences: BTreeMap<String, Vec<(String, String)>>,
    pub summary: BTreeMap<String, DomainSummary>,
}

fn propagate_pool(pools: &SentencePool) -> Result<SentencePool, SilverError> {
    pools
        .iter()
        .map(|(d, sents)| {
            let rewritten = sents
                .iter()
                .map(|s| {
                    propagate_conj(&s.sentence)
                        .map(|sentence| PoolSentence {
                            file: s.file.clone(),
                            sentence,
                        })
                        .map_err(|source| SilverError::Tree {
                            file: s.file.clone(),
                            source,
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((d.clone(), rewritten))
        })
        .collect()
}

fn sentence_instances(s: &PoolSentence, cfg: &GenConfig) -> Vec<InstanceRecord> {
    let triplets = extract_triplets(&s.sentence, &s.file, &cfg.labels);
    cap_per_sentence(triplets, cfg.max_per_sentence, cfg.seed)
        .iter()
        .map(|t| triplet_instance(&s.sentence, t))
        .collect()
}

/// Interleaves per-domain sentence streams so that every prefix stays
/// balanced: the next sentence always comes from the domain with the fewest
/// instances emitted so far (ties go to the first domain by name).
fn interleave(per_domain: BTreeMap<String, Vec<Vec<InstanceRecord>>>) -> Vec<InstanceRecord> {
    let mut queues: Vec<(String, std::vec::IntoIter<Vec<InstanceRecord>>, usize)> = per_domain
        .into_iter()
        .map(|(d, v)| (d, v.into_iter(), 0))
        .collect();
    let mut out = Vec::new();
    loop {
        let next = queues
            .iter_mut()
            .filter(|q| q.1.len() > 0)
            .min_by(|a, b| a.2.cmp(&b.2).then_with(|| a.0.cmp(&b.0)));
        let Some(q) = next else { break };
        let batch = q.1.next().expect("non-empty queue");
        q.2 += batch.len();
        out.extend(batch);
    }
    out
}

/// Full generation pipeline: conj propagation, holdout split, equal
/// per-domain sampling, whitelist extraction, capping, and balanced ordering.
pub fn generate(pools: &SentencePool, cfg: &GenConfig) -> Result<SilverOutput, SilverError> {
    let pools = propagate_pool(pools)?;
    let (train_pool, holdout_pool) = make_holdout(&pools, cfg.holdout, cfg.seed)?;
    let sampled = sample_sentences(&train_pool, cfg.per_domain, cfg.seed)?;

    let mut out = SilverOutput::default();
    let mut per_domain = BTreeMap::new();
    for (domain, sents) in &sampled {
        let batches: Vec<Vec<InstanceRecord>> =
            sents.iter().map(|s| sentence_instances(s, cfg)).collect();
        let summary = out.summary.entry(domain.clone()).or_default();
        summary.sentences = sents.len();
        summary.instances = batches.iter().map(Vec::len).sum();
        per_domain.insert(domain.clone(), batches);
    }
    out.train = interleave(per_domain);

    let mut held = BTreeMap::new();
    for (domain, sents) in &holdout_pool {
        let batches: Vec<Vec<InstanceRecord>> =
            sents.iter().map(|s| sentence_instances(s, cfg)).collect();
        let summary = out.summary.entry(domain.clone()).or_default();
        summary.holdout_sentences = sents.len();
        summary.holdout_instances = batches.iter().map(Vec::len).sum();
        out.holdout_sentences.insert(
            domain.clone(),
            sents
                .iter()
                .map(|s| (s.file.clone(), s.sentence.sent_id.clone()))
                .collect(),
        );
        held.insert(domain.clone(), batches);
    }
    out.holdout = interleave(held);
    Ok(out)
}

/// Sweep grid from `start` to `stop` inclusive in steps of `step`.
pub fn sweep_grid(start: usize, stop: usize, step: usize) -> Vec<usize> {
    assert!(step > 0, "step must be positive");
    (start..=stop).step_by(step).collect()
}

/// Nested prefixes of `instances`, one per target count.
pub fn manifest_slices<'a>(
    instances: &'a [InstanceRecord],
    targets: &[usize],
) -> Result<Vec<&'a [InstanceRecord]>, SilverError> {
    if targets.windows(2).any(|w| w[0] > w[1]) {
        return Err(SilverError::UnsortedTargets(targets.to_vec()));
    }
    if let Some(&max) = targets.last() {
        if max > instances.len() {
            return Err(SilverError::InsufficientInstances {
                available: instances.len(),
                requested: max,
            });
        }
    }
    Ok(targets.iter().map(|&n| &instances[..n]).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub instances: usize,
    /// Path relative to the manifest file.
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<(Manifest, PathBuf), std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((m, dir))
    }
}

/// Writes one instance file per target plus `manifest.json` into `dir`.
pub fn build_manifest(
    instances: &[InstanceRecord],
    targets: &[usize],
    seed: u64,
    dir: &Path,
) -> Result<Manifest, SilverError> {
    let slices = manifest_slices(instances, targets)?;
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for slice in slices {
        let file = format!("silver-{:06}.jsonl", slice.len());
        std::fs::write(dir.join(&file), write_instances(slice))?;
        entries.push(ManifestEntry {
            instances: slice.len(),
            file,
        });
    }
    let manifest = Manifest { seed, entries };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(dir.join("manifest.json"), json + "\n")?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::Token;
    use crate::instance::GoldRef;

    fn triplets(n: usize) -> Vec<SilverTriplet> {
        (0..n)
            .map(|i| SilverTriplet {
                file: "f".into(),
                sent_id: "s".into(),
                deprel: "obj".into(),
                head_index: 1,
                dep_index: i + 2,
                domain: "ai".into(),
            })
            .collect()
    }

    fn pool(domains: &[(&str, usize)]) -> SentencePool {
        domains
            .iter()
            .map(|(d, n)| {
                let sents = (0..*n)
                    .map(|i| PoolSentence {
                        file: format!("{d}.conllu"),
                        sentence: ParsedSentence::from_tokens(
                            &i.to_string(),
                            d,
                            vec![Token::new(1, "v", 0, "root"), Token::new(2, "o", 1, "obj")],
                        ),
                    })
                    .collect();
                (d.to_string(), sents)
            })
            .collect()
    }

    #[test]
    fn cap_is_identity_below_limit() {
        assert_eq!(cap_per_sentence(triplets(3), 5, 1), triplets(3));
        assert!(cap_per_sentence(triplets(3), 0, 1).is_empty());
    }

    #[test]
    fn cap_keeps_order_and_size() {
        let out = cap_per_sentence(triplets(10), 5, 4012);
        assert_eq!(out.len(), 5);
        assert!(out.windows(2).all(|w| w[0].dep_index < w[1].dep_index));
        assert_eq!(out, cap_per_sentence(triplets(10), 5, 4012));
    }

    #[test]
    fn sampling_edges() {
        let p = pool(&[("ai", 4), ("music", 4)]);
        let s = sample_sentences(&p, 0, 1).unwrap();
        assert!(s.values().all(Vec::is_empty));
        let mut all = sample_sentences(&p, 4, 1).unwrap().remove("ai").unwrap();
        all.sort_by_key(|s| s.sentence.sent_id.clone());
        assert_eq!(all, p["ai"]);
        match sample_sentences(&p, 6, 1) {
            Err(SilverError::PoolTooSmall { domain, available, requested }) => {
                assert_eq!((domain.as_str(), available, requested), ("ai", 4, 6));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn holdout_zero_and_disjoint() {
        let p = pool(&[("ai", 10)]);
        let (train, held) = make_holdout(&p, 0, 3).unwrap();
        assert_eq!(train, p);
        assert!(held["ai"].is_empty());
        let (train, held) = make_holdout(&p, 4, 3).unwrap();
        assert_eq!(held["ai"].len(), 4);
        assert_eq!(train["ai"].len(), 6);
        for h in &held["ai"] {
            assert!(!train["ai"].contains(h));
        }
    }

    #[test]
    fn manifest_prefixes() {
        let p = pool(&[("ai", 10)]);
        let out = generate(
            &p,
            &GenConfig {
                per_domain: 8,
                holdout: 2,
                ..GenConfig::default()
            },
        )
        .unwrap();
        assert_eq!(out.train.len(), 8);
        let slices = manifest_slices(&out.train, &[0, 3, 8]).unwrap();
        assert_eq!(slices.iter().map(|s| s.len()).collect::<Vec<_>>(), [0, 3, 8]);
        assert!(matches!(
            manifest_slices(&out.train, &[9]),
            Err(SilverError::InsufficientInstances { available: 8, requested: 9 })
        ));
        assert!(matches!(
            manifest_slices(&out.train, &[3, 2]),
            Err(SilverError::UnsortedTargets(_))
        ));
    }

    #[test]
    fn interleave_balances_instance_counts() {
        let inst = |d: &str, n: usize| -> Vec<InstanceRecord> {
            (0..n)
                .map(|_| InstanceRecord {
                    tokens: vec!["a".into(), "b".into()],
                    e1: [0, 1],
                    e2: [1, 2],
                    label: "obj".into(),
                    domain: d.into(),
                    provenance: Provenance::Gold(GoldRef {
                        doc_id: "x".into(),
                        head_entity: "a".into(),
                        tail_entity: "b".into(),
                    }),
                })
                .collect()
        };
        let mut m = BTreeMap::new();
        m.insert("a".to_string(), vec![inst("a", 5); 10]);
        m.insert("b".to_string(), vec![inst("b", 1); 60]);
        let out = interleave(m);
        let mut counts = BTreeMap::<&str, i64>::new();
        for r in &out[..40] {
            *counts.entry(r.domain.as_str()).or_default() += 1;
        }
        assert!((counts["a"] - counts["b"]).abs() <= 5, "{counts:?}");
    }
}
