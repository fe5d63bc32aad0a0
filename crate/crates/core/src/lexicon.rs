//! Token/frequency dictionary with a character trie for prefix lookups.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::text::simple_lowercase;
use crate::{Error, Result};

#[derive(Clone, Debug, Default)]
struct Node {
    children: BTreeMap<char, usize>,
    // 0 when no entry ends here
    freq: u64,
}

#[derive(Clone, Debug)]
pub struct Lexicon {
    entries: BTreeMap<String, u64>,
    trie: Vec<Node>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon { entries: BTreeMap::new(), trie: alloc::vec![Node::default()] }
    }
}

impl PartialEq for Lexicon {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Eq for Lexicon {}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a lexicon; duplicate tokens keep their largest frequency.
    pub fn from_entries<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut lex = Lexicon::new();
        for (token, freq) in entries {
            lex.insert(token.as_ref(), freq)?;
        }
        Ok(lex)
    }

    /// Inserts `token`, keeping the larger of the old and new frequency.
    pub fn insert(&mut self, token: &str, freq: u64) -> Result<()> {
        if token.is_empty() || freq == 0 {
            return Err(Error::InvalidLexiconEntry(alloc::format!("{token}\t{freq}")));
        }
        let slot = self.entries.entry(token.into()).or_insert(0);
        *slot = (*slot).max(freq);
        let freq = *slot;
        let mut node = 0;
        for c in token.chars() {
            node = match self.trie[node].children.get(&c) {
                Some(&next) => next,
                None => {
                    self.trie.push(Node::default());
                    let next = self.trie.len() - 1;
                    self.trie[node].children.insert(c, next);
                    next
                }
            };
        }
        self.trie[node].freq = freq;
        Ok(())
    }

    pub fn get(&self, token: &str) -> Option<u64> {
        self.entries.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains_key(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn max_frequency(&self) -> u64 {
        self.entries.values().copied().max().unwrap_or(0)
    }

    /// Adds every delimiter character with the current top frequency (1 for an
    /// empty lexicon).
    pub fn add_delimiters(&mut self) {
        let top = self.max_frequency().max(1);
        let mut buf = [0u8; 4];
        for c in crate::tokenize::LEXICON_DELIMITERS.chars() {
            // cannot fail: non-empty token, positive frequency
            let _ = self.insert(c.encode_utf8(&mut buf), top);
        }
    }

    /// Copy with lowercased keys; colliding keys keep the largest frequency.
    pub fn folded(&self) -> Lexicon {
        let mut out = Lexicon::new();
        for (k, &v) in &self.entries {
            let _ = out.insert(&simple_lowercase(k), v);
        }
        out
    }

    /// Entries that are prefixes of `text`, as `(length in chars, frequency)`,
    /// shortest first.
    pub fn prefixes<'a>(&'a self, text: &'a [char]) -> impl Iterator<Item = (usize, u64)> + 'a {
        let mut node = Some(0usize);
        let mut depth = 0;
        core::iter::from_fn(move || loop {
            let current = node?;
            let c = text.get(depth);
            node = c.and_then(|c| self.trie[current].children.get(c).copied());
            depth += 1;
            if let Some(next) = node {
                let freq = self.trie[next].freq;
                if freq > 0 {
                    return Some((depth, freq));
                }
            }
        })
    }
}
