//! Reading, validating and writing CoNLL-U treebanks.
//!
//! Only the basic dependency tree (columns 7 and 8) is interpreted. Multiword
//! token ranges (`3-4`) and empty nodes (`5.1`) are kept as opaque lines so that
//! a file can be written back unchanged, but they never take part in tree
//! computations.

use std::fmt;

use thiserror::Error;

/// Domain tag used when neither a `# domain = …` comment nor a caller default is
/// available.
pub const UNKNOWN_DOMAIN: &str = "unknown";

/// One word line of a CoNLL-U block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// 1-based position within the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: String,
    /// Governor index, 0 for the root.
    pub head: usize,
    /// Lowercased relation label; subtypes (`nmod:poss`) are kept.
    pub deprel: String,
    /// Enhanced dependencies, passed through untouched.
    pub deps: String,
    pub misc: String,
}

impl Token {
    /// Convenience constructor for tests and synthetic trees.
    pub fn new(index: usize, form: &str, head: usize, deprel: &str) -> Self {
        Token {
            index,
            form: form.to_owned(),
            lemma: "_".to_owned(),
            upos: "_".to_owned(),
            xpos: "_".to_owned(),
            feats: "_".to_owned(),
            head,
            deprel: deprel.to_lowercase(),
            deps: "_".to_owned(),
            misc: "_".to_owned(),
        }
    }

    fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.index,
            self.form,
            self.lemma,
            self.upos,
            self.xpos,
            self.feats,
            self.head,
            self.deprel,
            self.deps,
            self.misc
        )
    }
}

/// Original layout of a block, so that serialization can re-emit comments and
/// passthrough lines in place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Line {
    Comment(String),
    /// Offset into [`ParsedSentence::tokens`].
    Word(usize),
    /// Multiword-token range or empty node, kept verbatim.
    Passthrough(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedSentence {
    pub sent_id: String,
    pub domain: String,
    pub tokens: Vec<Token>,
    pub lines: Vec<Line>,
}

impl ParsedSentence {
    /// Builds a sentence from tokens alone; the layout is one line per token.
    pub fn from_tokens(sent_id: &str, domain: &str, tokens: Vec<Token>) -> Self {
        let lines = (0..tokens.len()).map(Line::Word).collect();
        ParsedSentence {
            sent_id: sent_id.to_owned(),
            domain: domain.to_owned(),
            tokens,
            lines,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by 1-based index.
    pub fn token(&self, index: usize) -> Option<&Token> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    pub fn forms(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.form.as_str()).collect()
    }

    /// The `#`-prefixed lines, in file order.
    pub fn raw_comments(&self) -> impl Iterator<Item = &str> {
        self.lines.iter().filter_map(|l| match l {
            Line::Comment(c) => Some(c.as_str()),
            _ => None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    MalformedLine,
    NonIntegerHead,
    HeadOutOfRange,
    MultipleRoots,
    NoRoot,
    CycleDetected,
    SelfLoop,
    EmptyDeprel,
    BadTokenIndex,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// An error found while reading a file, located by sentence and line.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("sentence {sent_id}, line {line}: {kind}: {detail}")]
pub struct ConlluError {
    pub sent_id: String,
    pub line: usize,
    pub kind: ErrorKind,
    pub detail: String,
}

/// All errors collected from one input.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{} CoNLL-U error(s); first: {}", .0.len(), .0.first().map(|e| e.to_string()).unwrap_or_default())]
pub struct ConlluErrors(pub Vec<ConlluError>);

/// Result of reading a whole file: well-formed sentences plus every error seen.
/// Sentences with errors are left out of `sentences`.
#[derive(Clone, Debug, Default)]
pub struct ParseOutcome {
    pub sentences: Vec<ParsedSentence>,
    pub errors: Vec<ConlluError>,
}

impl ParseOutcome {
    pub fn into_result(self) -> Result<Vec<ParsedSentence>, ConlluErrors> {
        if self.errors.is_empty() {
            Ok(self.sentences)
        } else {
            Err(ConlluErrors(self.errors))
        }
    }
}

/// A broken tree invariant, reported by [`validate_tree`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ErrorKind,
    /// 1-based index of the offending token, when there is one.
    pub token: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.token {
            Some(t) => write!(f, "{} at token {}", self.kind, t),
            None => write!(f, "{}", self.kind),
        }
    }
}

/// Parses CoNLL-U text with `"unknown"` as the fallback domain.
pub fn parse_conllu(text: &str) -> Result<Vec<ParsedSentence>, ConlluErrors> {
    parse_conllu_with_domain(text, UNKNOWN_DOMAIN).into_result()
}

/// Parses every sentence block, collecting errors instead of stopping at the
/// first one. The domain comes from a `# domain = X` comment when present.
pub fn parse_conllu_with_domain(text: &str, default_domain: &str) -> ParseOutcome {
    let mut outcome = ParseOutcome::default();
    let mut block: Vec<(usize, &str)> = Vec::new();
    let mut ordinal = 0;

    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if !block.is_empty() {
                ordinal += 1;
                parse_block(&block, ordinal, default_domain, &mut outcome);
                block.clear();
            }
        } else {
            block.push((i + 1, line));
        }
    }
    if !block.is_empty() {
        ordinal += 1;
        parse_block(&block, ordinal, default_domain, &mut outcome);
    }
    outcome
}

fn comment_value<'a>(comment: &'a str, key: &str) -> Option<&'a str> {
    let body = comment.trim_start_matches('#').trim_start();
    let rest = body.strip_prefix(key)?;
    let rest = rest.trim_start().strip_prefix('=')?;
    Some(rest.trim())
}

fn parse_block(
    block: &[(usize, &str)],
    ordinal: usize,
    default_domain: &str,
    outcome: &mut ParseOutcome,
) {
    let mut sent_id = None;
    let mut domain = None;
    for (_, line) in block.iter().filter(|(_, l)| l.starts_with('#')) {
        if let Some(v) = comment_value(line, "sent_id") {
            sent_id.get_or_insert_with(|| v.to_owned());
        }
        if let Some(v) = comment_value(line, "domain") {
            domain.get_or_insert_with(|| v.to_owned());
        }
    }
    let sent_id = sent_id.unwrap_or_else(|| ordinal.to_string());
    let mut errors = Vec::new();
    let mut err = |line: usize, kind: ErrorKind, detail: String| {
        errors.push(ConlluError {
            sent_id: sent_id.clone(),
            line,
            kind,
            detail,
        })
    };

    let mut tokens = Vec::new();
    let mut token_lines = Vec::new();
    let mut lines = Vec::with_capacity(block.len());
    for &(lineno, line) in block {
        if line.starts_with('#') {
            lines.push(Line::Comment(line.to_owned()));
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            err(
                lineno,
                ErrorKind::MalformedLine,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            );
            continue;
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            lines.push(Line::Passthrough(line.to_owned()));
            continue;
        }
        let index = match cols[0].parse::<usize>() {
            Ok(i) if i >= 1 => i,
            _ => {
                err(
                    lineno,
                    ErrorKind::BadTokenIndex,
                    format!("invalid token id {:?}", cols[0]),
                );
                continue;
            }
        };
        let head = match cols[6].parse::<usize>() {
            Ok(h) => h,
            Err(_) => {
                err(
                    lineno,
                    ErrorKind::NonIntegerHead,
                    format!("head {:?} is not a non-negative integer", cols[6]),
                );
                continue;
            }
        };
        let deprel = cols[7].to_lowercase();
        lines.push(Line::Word(tokens.len()));
        token_lines.push(lineno);
        tokens.push(Token {
            index,
            form: cols[1].to_owned(),
            lemma: cols[2].to_owned(),
            upos: cols[3].to_owned(),
            xpos: cols[4].to_owned(),
            feats: cols[5].to_owned(),
            head,
            deprel,
            deps: cols[8].to_owned(),
            misc: cols[9].to_owned(),
        });
    }

    let sentence = ParsedSentence {
        sent_id: sent_id.clone(),
        domain: domain.unwrap_or_else(|| default_domain.to_owned()),
        tokens,
        lines,
    };
    let first_line = block.first().map(|(l, _)| *l).unwrap_or(0);
    for v in validate_tree(&sentence) {
        let line = v
            .token
            .and_then(|t| sentence.tokens.iter().position(|tok| tok.index == t))
            .map(|pos| token_lines[pos])
            .unwrap_or(first_line);
        let detail = match v.token {
            Some(t) => format!("token {t}"),
            None => "whole sentence".to_owned(),
        };
        err(line, v.kind, detail);
    }

    if errors.is_empty() {
        outcome.sentences.push(sentence);
    } else {
        outcome.errors.extend(errors);
    }
}

/// Checks the single-root, acyclicity, and range invariants of a sentence.
/// An empty report means the sentence is a well-formed tree.
pub fn validate_tree(sentence: &ParsedSentence) -> Vec<Violation> {
    let mut report = Vec::new();
    let n = sentence.tokens.len();
    let mut push = |kind, token| report.push(Violation { kind, token });

    let mut indices_ok = true;
    for (pos, tok) in sentence.tokens.iter().enumerate() {
        if tok.index != pos + 1 {
            push(ErrorKind::BadTokenIndex, Some(tok.index));
            indices_ok = false;
        }
    }
    let mut roots = 0;
    let mut heads_ok = true;
    for tok in &sentence.tokens {
        if tok.deprel.is_empty() {
            push(ErrorKind::EmptyDeprel, Some(tok.index));
        }
        if tok.head == tok.index {
            push(ErrorKind::SelfLoop, Some(tok.index));
            heads_ok = false;
        } else if tok.head > n {
            push(ErrorKind::HeadOutOfRange, Some(tok.index));
            heads_ok = false;
        } else if tok.head == 0 {
            roots += 1;
            if roots > 1 {
                push(ErrorKind::MultipleRoots, Some(tok.index));
            }
        }
    }
    if n > 0 && roots == 0 {
        push(ErrorKind::NoRoot, None);
    }
    if !(indices_ok && heads_ok) {
        return report;
    }

    // 0 = unvisited, 1 = on the current walk, 2 = known to reach the root
    let mut state = vec![0u8; n + 1];
    state[0] = 2;
    for start in 1..=n {
        let mut walk = Vec::new();
        let mut cur = start;
        while state[cur] == 0 {
            state[cur] = 1;
            walk.push(cur);
            cur = sentence.tokens[cur - 1].head;
        }
        if state[cur] == 1 {
            push(ErrorKind::CycleDetected, Some(cur));
        }
        for t in walk {
            state[t] = 2;
        }
    }
    report
}

/// Writes sentences back as CoNLL-U. Each block ends with a blank line.
pub fn serialize_conllu(sentences: &[ParsedSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        for line in &s.lines {
            match line {
                Line::Comment(c) | Line::Passthrough(c) => out.push_str(c),
                Line::Word(i) => out.push_str(&s.tokens[*i].to_line()),
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
