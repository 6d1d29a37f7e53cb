#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};
use std::path::PathBuf;

use sdpforge::conllu::{parse_conllu, ParsedSentence, Token};
use sdpforge::rng::{self, Stream};
use sdpforge::silver::{PoolSentence, SentencePool};

pub const DEPRELS: [&str; 10] = [
    "nsubj", "obj", "obl", "nmod", "appos", "amod", "det", "case", "nsubj:pass", "compound",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture exists")
}

pub fn figures() -> Vec<ParsedSentence> {
    parse_conllu(&fixture("figures.conllu")).expect("fixtures parse")
}

pub fn figure(id: &str) -> ParsedSentence {
    figures().into_iter().find(|s| s.sent_id == id).expect("figure present")
}

/// Random valid tree: tokens are attached in a random order, each to a token
/// already in the tree, so there is one root and no cycle.
pub fn random_tree(r: &mut Stream, n: usize, sent_id: &str, domain: &str) -> ParsedSentence {
    let order = rng::sample_indices(r, n, n);
    let mut heads = vec![0usize; n];
    for k in 1..n {
        let parent = order[rng::below(r, k)];
        heads[order[k]] = parent + 1;
    }
    let tokens = (0..n)
        .map(|i| {
            let rel = if heads[i] == 0 {
                "root"
            } else {
                DEPRELS[rng::below(r, DEPRELS.len())]
            };
            Token::new(i + 1, &format!("w{}", rng::below(r, 50)), heads[i], rel)
        })
        .collect();
    ParsedSentence::from_tokens(sent_id, domain, tokens)
}

/// Shortest path by breadth-first search over the undirected edge set.
/// Returns the length and the sorted multiset of stripped labels.
pub fn bfs_path(s: &ParsedSentence, a: usize, b: usize) -> (usize, Vec<String>) {
    let n = s.len();
    let mut adj: Vec<Vec<(usize, String)>> = vec![Vec::new(); n + 1];
    for t in &s.tokens {
        if t.head != 0 {
            let label = t.deprel.split(':').next().unwrap().to_owned();
            adj[t.index].push((t.head, label.clone()));
            adj[t.head].push((t.index, label));
        }
    }
    let mut prev: Vec<Option<(usize, String)>> = vec![None; n + 1];
    let mut seen = vec![false; n + 1];
    let mut q = VecDeque::from([a]);
    seen[a] = true;
    while let Some(x) = q.pop_front() {
        for (y, l) in &adj[x] {
            if !seen[*y] {
                seen[*y] = true;
                prev[*y] = Some((x, l.clone()));
                q.push_back(*y);
            }
        }
    }
    let mut labels = Vec::new();
    let mut x = b;
    while x != a {
        let (p, l) = prev[x].clone().expect("tree is connected");
        labels.push(l);
        x = p;
    }
    labels.sort();
    (labels.len(), labels)
}

/// A pool of random trees per domain, `n` sentences each.
pub fn random_pool(domains: &[&str], n: usize, max_len: usize, seed: u64) -> SentencePool {
    let mut pool = BTreeMap::new();
    for d in domains {
        let mut r = rng::stream(seed, &["pool", d]);
        let sents = (0..n)
            .map(|i| {
                let len = 2 + rng::below(&mut r, max_len - 1);
                PoolSentence {
                    file: format!("{d}.conllu"),
                    sentence: random_tree(&mut r, len, &format!("{d}-{i}"), d),
                }
            })
            .collect();
        pool.insert(d.to_string(), sents);
    }
    pool
}

/// One-sided sign test: P(X >= wins) for X ~ Binomial(n, 1/2).
pub fn sign_test(wins: usize, n: usize) -> f64 {
    let mut p = 0.0;
    for k in wins..=n {
        let mut c = 1.0f64;
        for j in 0..k {
            c = c * (n - j) as f64 / (j + 1) as f64;
        }
        p += c;
    }
    p / 2f64.powi(n as i32)
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman correlation via Pearson on average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}
