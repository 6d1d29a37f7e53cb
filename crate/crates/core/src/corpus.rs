//! Gold relation-extraction corpora: loading, candidate pairs, alignment with
//! parses, and dataset size statistics.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::conllu::ParsedSentence;
use crate::rng;

/// Label given to ordered entity pairs without an annotated relation.
pub const NO_RELATION: &str = "no-relation";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown corpus adapter {0:?} (expected \"canonical\" or \"crossre\")")]
    UnknownAdapter(String),
    #[error("{source_name}:{line}: schema mismatch on field {field:?}: {detail}")]
    SchemaMismatch {
        source_name: String,
        line: usize,
        field: String,
        detail: String,
    },
    #[error("record {doc_id}: {detail}")]
    InvariantViolation { doc_id: String, detail: String },
    #[error("expected {corpus} parses for {corpus} records, got {parses}")]
    LengthMismatch { corpus: usize, parses: usize },
    #[error("record {doc_id} / sentence {sent_id}: tokens diverge at index {index} ({expected:?} vs {found:?})")]
    TokenMismatch {
        doc_id: String,
        sent_id: String,
        index: usize,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntitySpan {
    pub id: String,
    /// 0-based, end-exclusive token offsets.
    pub start: usize,
    pub end: usize,
    pub etype: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationInstance {
    #[serde(rename = "head")]
    pub head_entity: String,
    #[serde(rename = "tail")]
    pub tail_entity: String,
    pub label: String,
}

/// One annotated sentence. `split` is optional in the canonical format and
/// filled from the file name by the CrossRE adapter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusRecord {
    pub doc_id: String,
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<String>,
    pub tokens: Vec<String>,
    pub entities: Vec<EntitySpan>,
    pub relations: Vec<RelationInstance>,
}

impl CorpusRecord {
    pub fn entity(&self, id: &str) -> Option<&EntitySpan> {
        self.entities.iter().find(|e| e.id == id)
    }

    /// Checks span bounds, id uniqueness, and relation references.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let fail = |detail: String| CorpusError::InvariantViolation {
            doc_id: self.doc_id.clone(),
            detail,
        };
        let mut ids = HashSet::new();
        for e in &self.entities {
            if !ids.insert(e.id.as_str()) {
                return Err(fail(format!("duplicate entity id {:?}", e.id)));
            }
            if e.start >= e.end || e.end > self.tokens.len() {
                return Err(fail(format!(
                    "entity {:?} span [{}, {}) invalid for {} tokens",
                    e.id,
                    e.start,
                    e.end,
                    self.tokens.len()
                )));
            }
        }
        let mut pairs = HashSet::new();
        for r in &self.relations {
            for id in [&r.head_entity, &r.tail_entity] {
                if !ids.contains(id.as_str()) {
                    return Err(fail(format!("relation references unknown entity {id:?}")));
                }
            }
            if r.head_entity == r.tail_entity {
                return Err(fail(format!("relation {:?} links {:?} to itself", r.label, r.head_entity)));
            }
            if r.label.is_empty() {
                return Err(fail("relation with empty label".into()));
            }
            if !pairs.insert((r.head_entity.as_str(), r.tail_entity.as_str())) {
                return Err(fail(format!(
                    "pair ({}, {}) annotated twice",
                    r.head_entity, r.tail_entity
                )));
            }
        }
        Ok(())
    }
}

/// Column layout of the published CrossRE JSON lines. The shipped default is
/// `crossre_adapter.json` next to this crate's manifest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossReMapping {
    pub file_name: String,
    pub doc_id: String,
    pub tokens: String,
    pub entities: String,
    pub relations: String,
    pub entity_columns: EntityColumns,
    pub relation_columns: RelationColumns,
    pub end_inclusive: bool,
    #[serde(default)]
    pub ignored_fields: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityColumns {
    pub start: usize,
    pub end: usize,
    pub etype: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationColumns {
    pub head_start: usize,
    pub head_end: usize,
    pub tail_start: usize,
    pub tail_end: usize,
    pub label: usize,
}

pub const DEFAULT_CROSSRE_MAPPING: &str = include_str!("../crossre_adapter.json");

impl Default for CrossReMapping {
    fn default() -> Self {
        serde_json::from_str(DEFAULT_CROSSRE_MAPPING).expect("bundled CrossRE mapping is valid")
    }
}

impl CrossReMapping {
    /// Splits a file name such as `ai-train.json` into `("ai", "train")`.
    pub fn domain_split(&self, file_name: &str) -> Option<(String, String)> {
        let (prefix, rest) = self.file_name.split_once("{domain}")?;
        let (sep, suffix) = rest.split_once("{split}")?;
        let core = file_name.strip_prefix(prefix)?.strip_suffix(suffix)?;
        let (domain, split) = core.rsplit_once(sep)?;
        Some((domain.to_owned(), split.to_owned()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Adapter {
    Canonical,
    CrossRe(CrossReMapping),
}

impl Adapter {
    pub fn from_name(name: &str) -> Result<Adapter, CorpusError> {
        match name {
            "canonical" => Ok(Adapter::Canonical),
            "crossre" => Ok(Adapter::CrossRe(CrossReMapping::default())),
            other => Err(CorpusError::UnknownAdapter(other.to_owned())),
        }
    }
}

/// Reads a corpus file with the given adapter.
pub fn load_corpus(path: &Path, adapter: &Adapter) -> Result<Vec<CorpusRecord>, CorpusError> {
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_corpus(&text, &name, adapter)
}

/// Reads every matching file of a directory in file-name order. With the
/// CrossRE adapter only names that fit the mapping's pattern are read;
/// the canonical adapter reads `*.jsonl`.
pub fn load_corpus_dir(dir: &Path, adapter: &Adapter) -> Result<Vec<CorpusRecord>, CorpusError> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    files.retain(|p| {
        let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        match adapter {
            Adapter::Canonical => name.ends_with(".jsonl"),
            Adapter::CrossRe(m) => m.domain_split(&name).is_some(),
        }
    });
    files.sort();
    let mut out = Vec::new();
    for f in files {
        out.extend(load_corpus(&f, adapter)?);
    }
    Ok(out)
}

/// Parses corpus text. `source_name` is used in errors and, for CrossRE, to
/// derive the domain and split.
pub fn parse_corpus(
    text: &str,
    source_name: &str,
    adapter: &Adapter,
) -> Result<Vec<CorpusRecord>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let record = match adapter {
            Adapter::Canonical => serde_json::from_str::<CorpusRecord>(line).map_err(|e| {
                CorpusError::SchemaMismatch {
                    source_name: source_name.to_owned(),
                    line: lineno,
                    field: field_from_serde(&e.to_string()),
                    detail: e.to_string(),
                }
            })?,
            Adapter::CrossRe(m) => crossre_record(line, lineno, source_name, m)?,
        };
        record.validate()?;
        out.push(record);
    }
    Ok(out)
}

fn field_from_serde(msg: &str) -> String {
    msg.split('`').nth(1).unwrap_or("").to_owned()
}

fn crossre_record(
    line: &str,
    lineno: usize,
    source_name: &str,
    m: &CrossReMapping,
) -> Result<CorpusRecord, CorpusError> {
    let mismatch = |field: &str, detail: String| CorpusError::SchemaMismatch {
        source_name: source_name.to_owned(),
        line: lineno,
        field: field.to_owned(),
        detail,
    };
    let value: Value = serde_json::from_str(line).map_err(|e| mismatch("", e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| mismatch("", "line is not a JSON object".into()))?;
    let known = [&m.doc_id, &m.tokens, &m.entities, &m.relations];
    for key in obj.keys() {
        if !known.contains(&key) && !m.ignored_fields.contains(key) {
            return Err(mismatch(key, "unexpected field".into()));
        }
    }
    let field = |name: &str| obj.get(name).ok_or_else(|| mismatch(name, "missing field".into()));
    let doc_id = field(&m.doc_id)?
        .as_str()
        .map(str::to_owned)
        .or_else(|| obj.get(&m.doc_id).map(|v| v.to_string()))
        .unwrap_or_default();
    let tokens: Vec<String> = serde_json::from_value(field(&m.tokens)?.clone())
        .map_err(|e| mismatch(&m.tokens, e.to_string()))?;
    let rows = |name: &str| -> Result<Vec<Vec<Value>>, CorpusError> {
        serde_json::from_value(field(name)?.clone()).map_err(|e| mismatch(name, e.to_string()))
    };
    let int = |row: &[Value], col: usize, name: &str| -> Result<usize, CorpusError> {
        row.get(col)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| mismatch(name, format!("column {col} is not a token offset")))
    };
    let text = |row: &[Value], col: usize, name: &str| -> Result<String, CorpusError> {
        row.get(col)
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| mismatch(name, format!("column {col} is not a string")))
    };
    let end_shift = usize::from(m.end_inclusive);

    let mut entities = Vec::new();
    let mut by_span: HashMap<(usize, usize), String> = HashMap::new();
    for row in rows(&m.entities)? {
        let c = &m.entity_columns;
        let start = int(&row, c.start, &m.entities)?;
        let end = int(&row, c.end, &m.entities)? + end_shift;
        let id = format!("T{}", entities.len());
        by_span.entry((start, end)).or_insert_with(|| id.clone());
        entities.push(EntitySpan {
            id,
            start,
            end,
            etype: text(&row, c.etype, &m.entities)?,
        });
    }
    let mut relations = Vec::new();
    for row in rows(&m.relations)? {
        let c = &m.relation_columns;
        let lookup = |s: usize, e: usize| -> Result<String, CorpusError> {
            let end = e + end_shift;
            by_span.get(&(s, end)).cloned().ok_or_else(|| CorpusError::InvariantViolation {
                doc_id: doc_id.clone(),
                detail: format!("relation argument [{s}, {end}) is not an annotated entity"),
            })
        };
        let head = lookup(int(&row, c.head_start, &m.relations)?, int(&row, c.head_end, &m.relations)?)?;
        let tail = lookup(int(&row, c.tail_start, &m.relations)?, int(&row, c.tail_end, &m.relations)?)?;
        relations.push(RelationInstance {
            head_entity: head,
            tail_entity: tail,
            label: text(&row, c.label, &m.relations)?,
        });
    }
    let (domain, split) = match m.domain_split(source_name) {
        Some((d, s)) => (d, Some(s)),
        None => (crate::conllu::UNKNOWN_DOMAIN.to_owned(), None),
    };
    Ok(CorpusRecord {
        doc_id,
        domain,
        split,
        tokens,
        entities,
        relations,
    })
}

/// Writes records in the canonical one-object-per-line format.
pub fn serialize_corpus(records: &[CorpusRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// An ordered candidate pair with its gold label or [`NO_RELATION`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidatePair {
    pub head_entity: String,
    pub tail_entity: String,
    pub label: String,
}

/// Every ordered pair of distinct entities, ordered by the head entity's
/// position and then the tail's. Unannotated pairs get [`NO_RELATION`].
pub fn candidate_pairs(record: &CorpusRecord) -> Vec<CandidatePair> {
    let gold: HashMap<(&str, &str), &str> = record
        .relations
        .iter()
        .map(|r| ((r.head_entity.as_str(), r.tail_entity.as_str()), r.label.as_str()))
        .collect();
    let mut order: Vec<(usize, &EntitySpan)> = record.entities.iter().enumerate().collect();
    order.sort_by_key(|(i, e)| (e.start, e.end, *i));
    let mut out = Vec::with_capacity(order.len() * order.len().saturating_sub(1));
    for (_, h) in &order {
        for (_, t) in &order {
            if h.id == t.id {
                continue;
            }
            let label = gold.get(&(h.id.as_str(), t.id.as_str())).copied().unwrap_or(NO_RELATION);
            out.push(CandidatePair {
                head_entity: h.id.clone(),
                tail_entity: t.id.clone(),
                label: label.to_owned(),
            });
        }
    }
    out
}

/// Like [`candidate_pairs`], keeping at most `max_negatives` no-relation pairs
/// drawn by a stream keyed on `(seed, doc_id)`. Order is preserved.
pub fn candidate_pairs_capped(
    record: &CorpusRecord,
    max_negatives: Option<usize>,
    seed: u64,
) -> Vec<CandidatePair> {
    let all = candidate_pairs(record);
    let Some(cap) = max_negatives else {
        return all;
    };
    let negatives: Vec<usize> = (0..all.len()).filter(|&i| all[i].label == NO_RELATION).collect();
    if negatives.len() <= cap {
        return all;
    }
    let mut r = rng::stream(seed, &["negatives", &record.doc_id]);
    let keep: HashSet<usize> = rng::sample_indices(&mut r, negatives.len(), cap)
        .into_iter()
        .map(|i| negatives[i])
        .collect();
    all.into_iter()
        .enumerate()
        .filter(|(i, p)| p.label != NO_RELATION || keep.contains(i))
        .map(|(_, p)| p)
        .collect()
}

/// Pairs records with their parses positionally, checking token forms.
pub fn align(
    corpus: Vec<CorpusRecord>,
    parses: Vec<ParsedSentence>,
) -> Result<Vec<(CorpusRecord, ParsedSentence)>, CorpusError> {
    if corpus.len() != parses.len() {
        return Err(CorpusError::LengthMismatch {
            corpus: corpus.len(),
            parses: parses.len(),
        });
    }
    for (rec, parse) in corpus.iter().zip(&parses) {
        let n = rec.tokens.len().max(parse.tokens.len());
        for i in 0..n {
            let expected = rec.tokens.get(i).map(String::as_str);
            let found = parse.tokens.get(i).map(|t| t.form.as_str());
            if expected != found {
                return Err(CorpusError::TokenMismatch {
                    doc_id: rec.doc_id.clone(),
                    sent_id: parse.sent_id.clone(),
                    index: i,
                    expected: expected.unwrap_or("<end>").to_owned(),
                    found: found.unwrap_or("<end>").to_owned(),
                });
            }
        }
    }
    Ok(corpus.into_iter().zip(parses).collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeCounts {
    pub sentences: usize,
    pub relations: usize,
}

impl std::ops::AddAssign for SizeCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.sentences += rhs.sentences;
        self.relations += rhs.relations;
    }
}

/// Sentence and relation counts per (domain, split), plus relation-type counts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub cells: BTreeMap<String, BTreeMap<String, SizeCounts>>,
    pub relation_types: BTreeMap<String, usize>,
}

/// Split name used for records that do not carry one.
pub const UNSPLIT: &str = "all";

pub fn dataset_stats(corpus: &[CorpusRecord]) -> DatasetStats {
    let mut stats = DatasetStats::default();
    for r in corpus {
        let split = r.split.as_deref().unwrap_or(UNSPLIT);
        *stats
            .cells
            .entry(r.domain.clone())
            .or_default()
            .entry(split.to_owned())
            .or_default() += SizeCounts {
            sentences: 1,
            relations: r.relations.len(),
        };
        for rel in &r.relations {
            *stats.relation_types.entry(rel.label.clone()).or_insert(0) += 1;
        }
    }
    stats
}

impl DatasetStats {
    pub fn cell(&self, domain: &str, split: &str) -> SizeCounts {
        self.cells
            .get(domain)
            .and_then(|s| s.get(split))
            .copied()
            .unwrap_or_default()
    }

    pub fn domain_total(&self, domain: &str) -> SizeCounts {
        let mut total = SizeCounts::default();
        for c in self.cells.get(domain).into_iter().flat_map(|s| s.values()) {
            total += *c;
        }
        total
    }

    pub fn split_total(&self, split: &str) -> SizeCounts {
        let mut total = SizeCounts::default();
        for splits in self.cells.values() {
            if let Some(c) = splits.get(split) {
                total += *c;
            }
        }
        total
    }

    pub fn total(&self) -> SizeCounts {
        let mut total = SizeCounts::default();
        for d in self.cells.keys() {
            total += self.domain_total(d);
        }
        total
    }

    /// `domain, split, sentences, relations` rows, followed by per-domain
    /// `total` rows and an overall `total/total` row.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("domain\tsplit\tsentences\trelations\n");
        for (domain, splits) in &self.cells {
            for (split, c) in splits {
                let _ = writeln!(out, "{domain}\t{split}\t{}\t{}", c.sentences, c.relations);
            }
        }
        for domain in self.cells.keys() {
            let c = self.domain_total(domain);
            let _ = writeln!(out, "{domain}\ttotal\t{}\t{}", c.sentences, c.relations);
        }
        if !self.cells.is_empty() {
            let c = self.total();
            let _ = writeln!(out, "total\ttotal\t{}\t{}", c.sentences, c.relations);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let t = self.total();
        serde_json::json!({
            "cells": self.cells,
            "relation_types": self.relation_types,
            "total": t,
        })
    }
}
