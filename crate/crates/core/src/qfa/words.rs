use std::fmt;

use crate::error::{Error, Result};

/// The end-marker. It is implicit in every input and never part of an alphabet.
pub const END_MARKER: char = '$';

pub type Word = Vec<char>;

pub fn word(s: &str) -> Word {
    s.chars().collect()
}

pub fn word_string(w: &[char]) -> String {
    w.iter().collect()
}

/// A finite, sorted, duplicate-free set of input symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet {
    symbols: Vec<char>,
}

impl Alphabet {
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self> {
        let mut symbols: Vec<char> = symbols.into_iter().collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet is empty".into()));
        }
        for &c in &symbols {
            if c == END_MARKER {
                return Err(Error::InvalidAlphabet(format!(
                    "the end-marker {END_MARKER:?} is reserved"
                )));
            }
            if c.is_whitespace() || c.is_control() || c == '"' {
                return Err(Error::InvalidAlphabet(format!("symbol {c:?} is not allowed")));
            }
        }
        symbols.sort_unstable();
        if let Some(w) = symbols.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidAlphabet(format!("symbol {:?} repeated", w[0])));
        }
        Ok(Alphabet { symbols })
    }

    /// Parses an alphabet written as its symbols, e.g. `"ab"`.
    pub fn parse(s: &str) -> Result<Self> {
        Self::new(s.chars())
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        self.symbols.binary_search(&c).is_ok()
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.symbols.binary_search(&c).ok()
    }

    /// The symbols followed by the end-marker.
    pub fn with_end_marker(&self) -> impl Iterator<Item = char> + '_ {
        self.symbols.iter().copied().chain(std::iter::once(END_MARKER))
    }

    pub fn check_word(&self, w: &[char]) -> Result<()> {
        match w.iter().find(|&&c| !self.contains(c)) {
            Some(&c) => Err(Error::UnknownSymbol(c)),
            None => Ok(()),
        }
    }

    /// All words of length exactly `len`, in lexicographic order.
    pub fn words_of_len(&self, len: usize) -> Vec<Word> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| {
                    self.symbols.iter().map(move |&c| {
                        let mut w = w.clone();
                        w.push(c);
                        w
                    })
                })
                .collect();
        }
        out
    }

    /// All words of length at most `max_len`, shortest first.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Word> {
        (0..=max_len).flat_map(|n| self.words_of_len(n)).collect()
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.symbols {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Shortlex comparison: shorter words first, then lexicographic.
pub fn shortlex_cmp(a: &[char], b: &[char]) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}
