mod common;

use std::collections::{BTreeMap, HashSet};

use common::random_pool;
use proptest::prelude::*;
use sdpforge::instance::{write_instances, Provenance};
use sdpforge::silver::{
    build_manifest, cap_per_sentence, generate, sample_sentences, GenConfig, Manifest, SilverError,
    SilverTriplet,
};
use sdpforge::DEFAULT_WHITELIST;

const DOMAINS: [&str; 3] = ["ai", "music", "news"];

fn sentence_key(p: &Provenance) -> (String, String) {
    match p {
        Provenance::Silver(s) => (s.file.clone(), s.sent_id.clone()),
        Provenance::Gold(_) => panic!("silver output carries gold provenance"),
    }
}

#[test]
fn generation_contract_with_defaults() {
    let pool = random_pool(&DOMAINS, 260, 25, 1);
    let cfg = GenConfig { per_domain: 120, ..GenConfig::default() };
    let out = generate(&pool, &cfg).unwrap();

    let mut per_sentence: BTreeMap<(String, String), usize> = BTreeMap::new();
    for r in &out.train {
        assert!(DEFAULT_WHITELIST.contains(&r.label.as_str()), "{}", r.label);
        *per_sentence.entry(sentence_key(&r.provenance)).or_default() += 1;
    }
    assert!(per_sentence.values().all(|&n| n <= 5));
    for d in DOMAINS {
        assert_eq!(out.summary[d].sentences, 120);
        assert_eq!(out.summary[d].holdout_sentences, 100);
    }
    let held: HashSet<(String, String)> = out.holdout_sentences.values().flatten().cloned().collect();
    assert_eq!(held.len(), 300);
    assert!(per_sentence.keys().all(|k| !held.contains(k)));

    let again = generate(&pool, &cfg).unwrap();
    assert_eq!(write_instances(&again.train), write_instances(&out.train));
    assert_eq!(write_instances(&again.holdout), write_instances(&out.holdout));
    let other = generate(&pool, &GenConfig { seed: 5096, ..cfg.clone() }).unwrap();
    assert_ne!(write_instances(&other.train), write_instances(&out.train));
}

#[test]
fn prefixes_stay_domain_balanced() {
    let pool = random_pool(&DOMAINS, 200, 20, 2);
    let out = generate(&pool, &GenConfig { per_domain: 100, ..GenConfig::default() }).unwrap();
    let mut counts: BTreeMap<&str, usize> = DOMAINS.iter().map(|d| (*d, 0)).collect();
    for (i, r) in out.train.iter().enumerate() {
        *counts.get_mut(r.domain.as_str()).unwrap() += 1;
        // check at sentence boundaries, while every domain still has input
        let boundary = out.train.get(i + 1).map_or(true, |n| {
            n.domain != r.domain || sentence_key(&n.provenance) != sentence_key(&r.provenance)
        });
        if boundary && i < out.train.len() / 2 {
            let (lo, hi) = (counts.values().min().unwrap(), counts.values().max().unwrap());
            assert!(hi - lo <= 5, "prefix {i}: {counts:?}");
        }
    }
}

#[test]
fn zero_per_domain_and_small_pools() {
    let pool = random_pool(&DOMAINS, 150, 10, 3);
    let out = generate(&pool, &GenConfig::default()).unwrap();
    assert!(out.train.is_empty());
    let err = generate(&pool, &GenConfig { per_domain: 51, ..GenConfig::default() }).unwrap_err();
    assert!(matches!(err, SilverError::PoolTooSmall { available: 50, requested: 51, .. }));
}

#[test]
fn manifest_files_are_nested() {
    let pool = random_pool(&DOMAINS, 160, 20, 4);
    let out = generate(&pool, &GenConfig { per_domain: 60, ..GenConfig::default() }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let targets = [10, 100, 250];
    build_manifest(&out.train, &targets, 4012, dir.path()).unwrap();
    let (m, base) = Manifest::load(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(m.entries.len(), 3);
    let files: Vec<String> = m
        .entries
        .iter()
        .map(|e| std::fs::read_to_string(base.join(&e.file)).unwrap())
        .collect();
    for (w, e) in files.windows(2).zip(&m.entries[1..]) {
        assert!(w[1].starts_with(&w[0]));
        assert_eq!(w[1].lines().count(), e.instances);
    }
    assert!(matches!(
        build_manifest(&out.train, &[5, 3], 1, dir.path()),
        Err(SilverError::UnsortedTargets(_))
    ));
}

fn triplets(n: usize, sent_id: &str) -> Vec<SilverTriplet> {
    (0..n)
        .map(|i| SilverTriplet {
            file: "f".into(),
            sent_id: sent_id.into(),
            deprel: "nmod".into(),
            head_index: 1,
            dep_index: i + 2,
            domain: "ai".into(),
        })
        .collect()
}

#[test]
fn cap_keeps_each_triplet_with_equal_probability() {
    let draws = 20_000;
    let mut kept = [0usize; 10];
    for s in 0..draws {
        for t in cap_per_sentence(triplets(10, &s.to_string()), 5, 4012) {
            kept[t.dep_index - 2] += 1;
        }
    }
    for k in kept {
        let p = k as f64 / draws as f64;
        assert!((p - 0.5).abs() <= 0.02, "{p}");
    }
}

#[test]
fn sentence_sampling_is_uniform() {
    let pool = random_pool(&["ai"], 20, 4, 5);
    let mut hits = [0usize; 20];
    let draws = 10_000;
    for seed in 0..draws {
        for s in &sample_sentences(&pool, 5, seed).unwrap()["ai"] {
            let i: usize = s.sentence.sent_id.trim_start_matches("ai-").parse().unwrap();
            hits[i] += 1;
        }
    }
    for h in hits {
        assert!((h as f64 / draws as f64 - 0.25).abs() <= 0.02);
    }
}

proptest! {
    #[test]
    fn cap_is_an_ordered_subset(n in 0usize..30, cap in 0usize..8, seed in any::<u64>()) {
        let all = triplets(n, "s");
        let kept = cap_per_sentence(all.clone(), cap, seed);
        prop_assert_eq!(kept.len(), n.min(cap));
        let idx: Vec<usize> = kept.iter().map(|t| all.iter().position(|a| a == t).unwrap()).collect();
        prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }
}
