//! Entity-marker instances and their JSON-lines file format.
//!
//! On disk an instance keeps the plain token sequence and the two argument
//! spans; markers are inserted in memory by [`mark_instance`]. The same schema
//! carries silver syntactic triplets and gold relation pairs, distinguished by
//! the shape of `provenance`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const E1_START: &str = "<e1>";
pub const E1_END: &str = "</e1>";
pub const E2_START: &str = "<e2>";
pub const E2_END: &str = "</e2>";
pub const MARKERS: [&str; 4] = [E1_START, E1_END, E2_START, E2_END];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("argument spans [{}, {}) and [{}, {}) overlap", .e1.0, .e1.1, .e2.0, .e2.1)]
    OverlappingSpans {
        e1: (usize, usize),
        e2: (usize, usize),
    },
    #[error("span [{start}, {end}) invalid for {len} tokens")]
    SpanOutOfRange { start: usize, end: usize, len: usize },
    #[error("line {line}: {detail}")]
    Schema { line: usize, detail: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Provenance {
    Silver(SilverRef),
    Gold(GoldRef),
}

/// Where a silver instance came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SilverRef {
    pub file: String,
    pub sent_id: String,
    pub deprel: String,
    /// 1-based governor index.
    pub head: usize,
    /// 1-based dependent index.
    pub dep: usize,
}

/// The gold relation (or no-relation pair) an instance encodes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldRef {
    pub doc_id: String,
    pub head_entity: String,
    pub tail_entity: String,
}

/// One line of an instance file.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRecord {
    pub tokens: Vec<String>,
    /// `[start, end)` token offsets of the first argument.
    pub e1: [usize; 2],
    pub e2: [usize; 2],
    pub label: String,
    pub domain: String,
    pub provenance: Provenance,
}

impl InstanceRecord {
    pub fn marked(&self) -> Result<MarkedInstance, InstanceError> {
        let mut m = mark_instance(
            &self.tokens,
            (self.e1[0], self.e1[1]),
            (self.e2[0], self.e2[1]),
            &self.label,
        )?;
        m.provenance = Some(self.provenance.clone());
        Ok(m)
    }
}

/// A token sequence with the four argument markers inserted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedInstance {
    pub tokens: Vec<String>,
    pub e1_start_pos: usize,
    pub e1_end_pos: usize,
    pub e2_start_pos: usize,
    pub e2_end_pos: usize,
    pub label: String,
    pub provenance: Option<Provenance>,
}

impl MarkedInstance {
    /// Token positions strictly inside the first argument's markers.
    pub fn e1_inner(&self) -> std::ops::Range<usize> {
        self.e1_start_pos + 1..self.e1_end_pos
    }

    pub fn e2_inner(&self) -> std::ops::Range<usize> {
        self.e2_start_pos + 1..self.e2_end_pos
    }
}

/// Inserts `<e1> … </e1>` and `<e2> … </e2>` around two non-overlapping spans.
/// The second argument may precede the first in the sentence.
pub fn mark_instance(
    tokens: &[String],
    e1: (usize, usize),
    e2: (usize, usize),
    label: &str,
) -> Result<MarkedInstance, InstanceError> {
    let len = tokens.len();
    for (start, end) in [e1, e2] {
        if start >= end || end > len {
            return Err(InstanceError::SpanOutOfRange { start, end, len });
        }
    }
    if e1.0 < e2.1 && e2.0 < e1.1 {
        return Err(InstanceError::OverlappingSpans { e1, e2 });
    }
    let mut out = Vec::with_capacity(len + 4);
    let mut pos = [0usize; 4];
    for (i, tok) in tokens.iter().enumerate() {
        for (slot, (at, marker)) in [(e1.0, E1_START), (e2.0, E2_START)].into_iter().enumerate() {
            if i == at {
                pos[slot * 2] = out.len();
                out.push(marker.to_owned());
            }
        }
        out.push(tok.clone());
        for (slot, (at, marker)) in [(e1.1, E1_END), (e2.1, E2_END)].into_iter().enumerate() {
            if i + 1 == at {
                pos[slot * 2 + 1] = out.len();
                out.push(marker.to_owned());
            }
        }
    }
    Ok(MarkedInstance {
        tokens: out,
        e1_start_pos: pos[0],
        e1_end_pos: pos[1],
        e2_start_pos: pos[2],
        e2_end_pos: pos[3],
        label: label.to_owned(),
        provenance: None,
    })
}

/// Drops the four marker positions, restoring the original tokens.
pub fn unmark(instance: &MarkedInstance) -> Vec<String> {
    let skip = [
        instance.e1_start_pos,
        instance.e1_end_pos,
        instance.e2_start_pos,
        instance.e2_end_pos,
    ];
    instance
        .tokens
        .iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .map(|(_, t)| t.clone())
        .collect()
}

pub fn write_instances(records: &[InstanceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("instances serialize"));
        out.push('\n');
    }
    out
}

/// Parses an instance file and checks that every record can be marked.
pub fn read_instances(text: &str) -> Result<Vec<InstanceRecord>, InstanceError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: InstanceRecord = serde_json::from_str(line).map_err(|e| InstanceError::Schema {
            line: i + 1,
            detail: e.to_string(),
        })?;
        rec.marked().map_err(|e| InstanceError::Schema {
            line: i + 1,
            detail: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split(' ').map(str::to_owned).collect()
    }

    #[test]
    fn adjacent_single_tokens() {
        let t = toks("x a b y");
        let m = mark_instance(&t, (1, 2), (2, 3), "nsubj").unwrap();
        assert_eq!(m.tokens.join(" "), "x <e1> a </e1> <e2> b </e2> y");
        assert_eq!((m.e1_start_pos, m.e2_start_pos), (1, 4));
        assert_eq!(unmark(&m), t);
    }

    #[test]
    fn e2_before_e1() {
        let t = toks("a b c d");
        let m = mark_instance(&t, (2, 4), (0, 1), "appos").unwrap();
        assert_eq!(m.tokens.join(" "), "<e2> a </e2> b <e1> c d </e1>");
        assert_eq!(m.e1_inner(), 5..7);
        assert_eq!(m.e2_inner(), 1..2);
        assert_eq!(unmark(&m), t);
    }

    #[test]
    fn bad_spans() {
        let t = toks("a b c");
        assert_eq!(
            mark_instance(&t, (0, 2), (1, 3), "x"),
            Err(InstanceError::OverlappingSpans { e1: (0, 2), e2: (1, 3) })
        );
        assert!(matches!(
            mark_instance(&t, (0, 1), (2, 4), "x"),
            Err(InstanceError::SpanOutOfRange { .. })
        ));
        assert!(matches!(
            mark_instance(&t, (1, 1), (2, 3), "x"),
            Err(InstanceError::SpanOutOfRange { .. })
        ));
    }

    #[test]
    fn file_schema() {
        let rec = InstanceRecord {
            tokens: toks("a b"),
            e1: [0, 1],
            e2: [1, 2],
            label: "obj".into(),
            domain: "ai".into(),
            provenance: Provenance::Silver(SilverRef {
                file: "f.conllu".into(),
                sent_id: "3".into(),
                deprel: "obj".into(),
                head: 1,
                dep: 2,
            }),
        };
        let text = write_instances(&[rec.clone()]);
        assert_eq!(
            text,
            "{\"tokens\":[\"a\",\"b\"],\"e1\":[0,1],\"e2\":[1,2],\"label\":\"obj\",\"domain\":\"ai\",\
             \"provenance\":{\"file\":\"f.conllu\",\"sent_id\":\"3\",\"deprel\":\"obj\",\"head\":1,\"dep\":2}}\n"
        );
        assert_eq!(read_instances(&text).unwrap(), vec![rec]);

        let gold = r#"{"tokens":["a","b"],"e1":[0,1],"e2":[1,2],"label":"role","domain":"ai","provenance":{"doc_id":"d","head_entity":"E1","tail_entity":"E2"}}"#;
        let g = read_instances(gold).unwrap();
        assert!(matches!(g[0].provenance, Provenance::Gold(_)));

        let overlapping = gold.replace("\"e2\":[1,2]", "\"e2\":[0,2]");
        assert!(matches!(read_instances(&overlapping), Err(InstanceError::Schema { line: 1, .. })));
        assert!(read_instances("{\"tokens\":[]}").is_err());
    }
}
