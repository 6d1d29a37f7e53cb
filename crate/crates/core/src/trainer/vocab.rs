use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::instance::MARKERS;

pub const UNK: &str = "<unk>";

/// Token-to-row mapping. Row 0 is the unknown bucket and rows 1..=4 are the
/// argument markers; corpus tokens follow by descending frequency.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocab {
    tokens: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl Vocab {
    pub const RESERVED: usize = 1 + MARKERS.len();

    /// Builds a vocabulary of at most `cap` rows (reserved rows included).
    /// Frequency ties are broken by the token string.
    pub fn build<'a, I, S>(sentences: I, cap: usize) -> Vocab
    where
        I: IntoIterator<Item = &'a [S]>,
        S: AsRef<str> + 'a,
    {
        let mut freq: HashMap<&str, usize> = HashMap::new();
        for sent in sentences {
            for tok in sent {
                *freq.entry(tok.as_ref()).or_insert(0) += 1;
            }
        }
        let mut ranked: Vec<(&str, usize)> = freq
            .into_iter()
            .filter(|(t, _)| *t != UNK && !MARKERS.contains(t))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let mut tokens: Vec<String> = std::iter::once(UNK)
            .chain(MARKERS)
            .map(str::to_owned)
            .collect();
        let room = cap.saturating_sub(Self::RESERVED);
        tokens.extend(ranked.into_iter().take(room).map(|(t, _)| t.to_owned()));
        Vocab::from_tokens(tokens)
    }

    fn from_tokens(tokens: Vec<String>) -> Vocab {
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocab { tokens, index }
    }

    /// Restores the lookup table after deserialization.
    pub fn reindex(self) -> Vocab {
        Vocab::from_tokens(self.tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Row of a token, or the unknown row.
    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(0)
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserved_rows_then_frequency() {
        let a = ["b", "a", "b", "<e1>", "c", "b", "a"];
        let v = Vocab::build([&a[..]], 100);
        assert_eq!(v.len(), Vocab::RESERVED + 3);
        assert_eq!(v.id(UNK), 0);
        assert_eq!(v.id("<e1>"), 1);
        assert_eq!(v.token(5), "b");
        assert_eq!(v.token(6), "a");
        assert_eq!(v.id("zzz"), 0);
        let capped = Vocab::build([&a[..]], 6);
        assert_eq!(capped.len(), 6);
        assert_eq!(capped.id("a"), 0);
    }
}
