//! Tree algorithms over basic dependency trees: conjunct propagation, entity
//! span heads, and shortest dependency paths.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::{validate_tree, ParsedSentence, Violation};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("sentence {sent_id} is not a valid tree: {violations:?}")]
    InvalidTree {
        sent_id: String,
        violations: Vec<String>,
    },
    #[error("token index {index} out of range for a sentence of {len} tokens")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("empty span [{start}, {end})")]
    EmptySpan { start: usize, end: usize },
    #[error("span [{start}, {end}) exceeds sentence length {len}")]
    SpanOutOfRange { start: usize, end: usize, len: usize },
}

/// Removes a relation subtype: `nmod:poss` becomes `nmod`.
pub fn strip_subtype(deprel: &str) -> &str {
    deprel.split(':').next().unwrap_or(deprel)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// From a dependent to its governor.
    Up,
    /// From a governor to its dependent.
    Down,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathEdge {
    pub governor: usize,
    pub dependent: usize,
    pub deprel: String,
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyPath {
    pub source: usize,
    pub target: usize,
    pub edges: Vec<PathEdge>,
}

impl DependencyPath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Subtype-stripped labels in path order.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.edges.iter().map(|e| strip_subtype(&e.deprel))
    }
}

/// Label multiset of a path: subtype-stripped deprels with their counts.
pub fn path_labels(path: &DependencyPath) -> BTreeMap<String, usize> {
    let mut bag = BTreeMap::new();
    for label in path.labels() {
        *bag.entry(label.to_owned()).or_insert(0) += 1;
    }
    bag
}

fn ensure_valid(sentence: &ParsedSentence) -> Result<(), TreeError> {
    let report = validate_tree(sentence);
    if report.is_empty() {
        Ok(())
    } else {
        Err(TreeError::InvalidTree {
            sent_id: sentence.sent_id.clone(),
            violations: report.iter().map(Violation::to_string).collect(),
        })
    }
}

fn is_conj(deprel: &str) -> bool {
    strip_subtype(deprel) == "conj"
}

/// Reattaches conjuncts to the external governor of their list.
///
/// A `conj` dependent whose governor `g` is attached by some relation other
/// than `conj` or `root` takes over `g`'s head and label. A conjunct of a
/// conjunct is lifted one level, keeping `conj`, so that chains collapse onto
/// the first element. Conjuncts of the root stay as they are, since lifting
/// them would create a second root.
pub fn propagate_conj(sentence: &ParsedSentence) -> Result<ParsedSentence, TreeError> {
    ensure_valid(sentence)?;
    let mut out = sentence.clone();
    let toks = &mut out.tokens;
    loop {
        let mut changed = false;
        for x in 0..toks.len() {
            if !is_conj(&toks[x].deprel) {
                continue;
            }
            let g = toks[x].head - 1;
            let g_head = toks[g].head;
            if g_head == 0 || strip_subtype(&toks[g].deprel) == "root" {
                continue;
            }
            // each rewrite moves x to its grandparent, so depth strictly drops
            toks[x].head = g_head;
            if !is_conj(&toks[g].deprel) {
                toks[x].deprel = toks[g].deprel.clone();
            }
            changed = true;
        }
        if !changed {
            break;
        }
    }
    Ok(out)
}

/// Picks the token that represents a `[start, end)` span (0-based offsets) in
/// the tree: the leftmost one whose governor lies outside the span. Returns a
/// 1-based token index.
pub fn span_head(sentence: &ParsedSentence, start: usize, end: usize) -> Result<usize, TreeError> {
    if start >= end {
        return Err(TreeError::EmptySpan { start, end });
    }
    let len = sentence.len();
    if end > len {
        return Err(TreeError::SpanOutOfRange { start, end, len });
    }
    let inside = |idx: usize| idx > start && idx <= end;
    sentence.tokens[start..end]
        .iter()
        .find(|t| t.head == 0 || !inside(t.head))
        .map(|t| t.index)
        .ok_or_else(|| TreeError::InvalidTree {
            sent_id: sentence.sent_id.clone(),
            violations: vec![format!("span [{start}, {end}) has no external head")],
        })
}

/// Parent and depth tables for repeated path queries on one tree.
#[derive(Clone, Debug)]
pub struct TreeIndex<'a> {
    sentence: &'a ParsedSentence,
    depth: Vec<usize>,
}

impl<'a> TreeIndex<'a> {
    pub fn new(sentence: &'a ParsedSentence) -> Result<Self, TreeError> {
        ensure_valid(sentence)?;
        let n = sentence.len();
        let mut depth = vec![usize::MAX; n + 1];
        depth[0] = 0;
        for start in 1..=n {
            let mut chain = Vec::new();
            let mut cur = start;
            while depth[cur] == usize::MAX {
                chain.push(cur);
                cur = sentence.tokens[cur - 1].head;
            }
            let mut d = depth[cur];
            for &t in chain.iter().rev() {
                d += 1;
                depth[t] = d;
            }
        }
        Ok(TreeIndex { sentence, depth })
    }

    fn head(&self, t: usize) -> usize {
        self.sentence.tokens[t - 1].head
    }

    fn up_edge(&self, t: usize, direction: Direction) -> PathEdge {
        PathEdge {
            governor: self.head(t),
            dependent: t,
            deprel: self.sentence.tokens[t - 1].deprel.clone(),
            direction,
        }
    }

    /// Depth of a token; the root token has depth 1.
    pub fn depth(&self, t: usize) -> usize {
        self.depth[t]
    }

    /// Path from `a` to `b` through their lowest common ancestor.
    pub fn path(&self, a: usize, b: usize) -> Result<DependencyPath, TreeError> {
        let len = self.sentence.len();
        for index in [a, b] {
            if index == 0 || index > len {
                return Err(TreeError::IndexOutOfRange { index, len });
            }
        }
        let mut up = Vec::new();
        let mut down = Vec::new();
        let (mut x, mut y) = (a, b);
        while self.depth[x] > self.depth[y] {
            up.push(self.up_edge(x, Direction::Up));
            x = self.head(x);
        }
        while self.depth[y] > self.depth[x] {
            down.push(self.up_edge(y, Direction::Down));
            y = self.head(y);
        }
        while x != y {
            up.push(self.up_edge(x, Direction::Up));
            down.push(self.up_edge(y, Direction::Down));
            x = self.head(x);
            y = self.head(y);
        }
        up.extend(down.into_iter().rev());
        Ok(DependencyPath {
            source: a,
            target: b,
            edges: up,
        })
    }
}

/// Shortest dependency path between two 1-based token indices.
pub fn shortest_path(
    sentence: &ParsedSentence,
    a: usize,
    b: usize,
) -> Result<DependencyPath, TreeError> {
    TreeIndex::new(sentence)?.path(a, b)
}
