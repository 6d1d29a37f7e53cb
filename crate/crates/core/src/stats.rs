//! Label and length statistics over the shortest dependency paths between gold
//! entity pairs, and selection of the pre-training label whitelist.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::ParsedSentence;
use crate::corpus::CorpusRecord;
use crate::tree::{span_head, TreeError, TreeIndex};

/// The five relations used for syntax pre-training by default.
pub const DEFAULT_WHITELIST: [&str; 5] = ["nsubj", "obj", "obl", "nmod", "appos"];

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("record {doc_id}: {source}")]
    Tree {
        doc_id: String,
        #[source]
        source: TreeError,
    },
    #[error("record {doc_id}: relation references unknown entity {entity:?}")]
    MissingEntity { doc_id: String, entity: String },
    #[error("expected a {expected} table, got a {found} table")]
    WrongTableKind { expected: TableKind, found: TableKind },
    #[error("malformed table row {line}: {detail}")]
    BadRow { line: usize, detail: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Domain,
    RelationType,
    /// One group named `all`.
    All,
}

impl FromStr for GroupBy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "domain" => Ok(GroupBy::Domain),
            "relation" | "relation_type" | "relation-type" => Ok(GroupBy::RelationType),
            "all" => Ok(GroupBy::All),
            _ => Err(format!("unknown grouping {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    Labels,
    Lengths,
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableKind::Labels => "labels",
            TableKind::Lengths => "lengths",
        })
    }
}

/// Counts keyed by (group, key) where the key is a deprel or a path length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStatsTable {
    pub kind: TableKind,
    pub group_by: GroupBy,
    /// Keys are deprels for label tables and decimal lengths for length tables.
    pub cells: BTreeMap<String, BTreeMap<String, u64>>,
    /// Number of gold relations observed.
    pub total_pairs: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounting {
    /// Count a label once per edge (true) or once per path (false).
    pub multiplicity: bool,
}

impl Default for LabelCounting {
    fn default() -> Self {
        LabelCounting { multiplicity: true }
    }
}

impl PathStatsTable {
    pub fn new(kind: TableKind, group_by: GroupBy) -> Self {
        PathStatsTable {
            kind,
            group_by,
            cells: BTreeMap::new(),
            total_pairs: 0,
        }
    }

    pub fn get(&self, group: &str, key: &str) -> u64 {
        self.cells
            .get(group)
            .and_then(|g| g.get(key))
            .copied()
            .unwrap_or(0)
    }

    pub fn group_total(&self, group: &str) -> u64 {
        self.cells.get(group).map(|g| g.values().sum()).unwrap_or(0)
    }

    fn add(&mut self, group: &str, key: String, n: u64) {
        *self
            .cells
            .entry(group.to_owned())
            .or_default()
            .entry(key)
            .or_insert(0) += n;
    }

    /// Sum of two tables of the same kind and grouping.
    pub fn merge(mut self, other: PathStatsTable) -> PathStatsTable {
        for (g, keys) in other.cells {
            for (k, n) in keys {
                self.add(&g, k, n);
            }
        }
        self.total_pairs += other.total_pairs;
        self
    }

    /// Counts summed over groups.
    pub fn aggregate(&self) -> BTreeMap<String, u64> {
        let mut out = BTreeMap::new();
        for keys in self.cells.values() {
            for (k, n) in keys {
                *out.entry(k.clone()).or_insert(0) += n;
            }
        }
        out
    }

    fn sorted_rows(&self) -> Vec<(&str, &str, u64)> {
        let mut rows = Vec::new();
        for (g, keys) in &self.cells {
            let mut ks: Vec<(&String, &u64)> = keys.iter().collect();
            if self.kind == TableKind::Lengths {
                ks.sort_by_key(|(k, _)| k.parse::<usize>().unwrap_or(usize::MAX));
            }
            for (k, n) in ks {
                rows.push((g.as_str(), k.as_str(), *n));
            }
        }
        rows
    }

    /// `group, key, count` rows sorted by group, then key (numerically for
    /// lengths).
    pub fn to_tsv(&self) -> String {
        let key = match self.kind {
            TableKind::Labels => "deprel",
            TableKind::Lengths => "length",
        };
        let mut out = format!("group\t{key}\tcount\n");
        for (g, k, n) in self.sorted_rows() {
            let _ = writeln!(out, "{g}\t{k}\t{n}");
        }
        out
    }

    pub fn from_tsv(text: &str, kind: TableKind, group_by: GroupBy) -> Result<Self, StatsError> {
        let mut table = PathStatsTable::new(kind, group_by);
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let bad = |detail: String| StatsError::BadRow { line: i + 1, detail };
            if cols.len() != 3 {
                return Err(bad(format!("expected 3 columns, found {}", cols.len())));
            }
            let n = cols[2]
                .parse::<u64>()
                .map_err(|e| bad(format!("count {:?}: {e}", cols[2])))?;
            table.add(cols[0], cols[1].to_owned(), n);
        }
        Ok(table)
    }
}

fn group_of<'a>(group_by: GroupBy, record: &'a CorpusRecord, label: &'a str) -> &'a str {
    match group_by {
        GroupBy::Domain => &record.domain,
        GroupBy::RelationType => label,
        GroupBy::All => "all",
    }
}

fn for_each_gold_path<F>(
    aligned: &[(CorpusRecord, ParsedSentence)],
    mut visit: F,
) -> Result<(), StatsError>
where
    F: FnMut(&CorpusRecord, &str, &crate::tree::DependencyPath),
{
    for (record, parse) in aligned {
        let tree_err = |source| StatsError::Tree {
            doc_id: record.doc_id.clone(),
            source,
        };
        let index = TreeIndex::new(parse).map_err(tree_err)?;
        for rel in &record.relations {
            let mut heads = [0usize; 2];
            for (slot, id) in heads.iter_mut().zip([&rel.head_entity, &rel.tail_entity]) {
                let e = record.entity(id).ok_or_else(|| StatsError::MissingEntity {
                    doc_id: record.doc_id.clone(),
                    entity: id.clone(),
                })?;
                *slot = span_head(parse, e.start, e.end).map_err(tree_err)?;
            }
            let path = index.path(heads[0], heads[1]).map_err(tree_err)?;
            visit(record, &rel.label, &path);
        }
    }
    Ok(())
}

/// Counts subtype-stripped deprels on the path between the span heads of every
/// gold relation. Parses are expected to be conj-propagated already.
pub fn label_distribution(
    aligned: &[(CorpusRecord, ParsedSentence)],
    group_by: GroupBy,
    counting: LabelCounting,
) -> Result<PathStatsTable, StatsError> {
    let mut table = PathStatsTable::new(TableKind::Labels, group_by);
    for_each_gold_path(aligned, |record, label, path| {
        let group = group_of(group_by, record, label);
        let mut seen = Vec::new();
        for l in path.labels() {
            if counting.multiplicity || !seen.contains(&l) {
                table.add(group, l.to_owned(), 1);
                seen.push(l);
            }
        }
        table.total_pairs += 1;
    })?;
    Ok(table)
}

/// One count per gold relation at its path length.
pub fn length_histogram(
    aligned: &[(CorpusRecord, ParsedSentence)],
    group_by: GroupBy,
) -> Result<PathStatsTable, StatsError> {
    let mut table = PathStatsTable::new(TableKind::Lengths, group_by);
    for_each_gold_path(aligned, |record, label, path| {
        let group = group_of(group_by, record, label);
        table.add(group, path.len().to_string(), 1);
        table.total_pairs += 1;
    })?;
    Ok(table)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    TopK(usize),
    MinCount(u64),
}

/// Ranks labels by aggregate count (ties broken alphabetically) and keeps the
/// top `k` or those reaching the threshold.
pub fn select_labels(
    table: &PathStatsTable,
    policy: SelectionPolicy,
) -> Result<Vec<String>, StatsError> {
    if table.kind != TableKind::Labels {
        return Err(StatsError::WrongTableKind {
            expected: TableKind::Labels,
            found: table.kind,
        });
    }
    let mut ranked: Vec<(String, u64)> = table.aggregate().into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let keep: Vec<String> = match policy {
        SelectionPolicy::TopK(k) => ranked.into_iter().take(k).map(|(l, _)| l).collect(),
        SelectionPolicy::MinCount(min) => ranked
            .into_iter()
            .filter(|(_, n)| *n >= min)
            .map(|(l, _)| l)
            .collect(),
    };
    Ok(keep)
}
