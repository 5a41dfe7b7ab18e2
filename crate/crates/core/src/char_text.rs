//! Character alphabet and one-hot tweet encoding for the character-level
//! election classifier.

use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Rows in an encoded tweet: 140 characters plus 10 of padding room.
pub const MAX_CHARS: usize = 150;
/// Alphabet size including the UNKNOWN slot.
pub const ALPHABET_SIZE: usize = 70;
/// Index of the UNKNOWN slot.
pub const UNKNOWN_INDEX: usize = 69;

/// Indices 0..=68 in order. The order is part of the model file contract.
const SYMBOLS: &str = "abcdefghijklmnopqrstuvwxyz0123456789 -,;.!?:'\"/\\|_@#$%^&*~`+=<>()[]{}";

/// The 70-entry character alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<char>,
    lookup: [u8; 128],
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::new()
    }
}

impl Alphabet {
    pub fn new() -> Self {
        let symbols: Vec<char> = SYMBOLS.chars().collect();
        debug_assert_eq!(symbols.len(), UNKNOWN_INDEX);
        let mut lookup = [UNKNOWN_INDEX as u8; 128];
        for (i, &c) in symbols.iter().enumerate() {
            lookup[c as usize] = i as u8;
        }
        Alphabet { symbols, lookup }
    }

    pub fn len(&self) -> usize {
        ALPHABET_SIZE
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Known symbols in index order (the UNKNOWN slot is not a character).
    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    /// Alphabet index of an already case-folded character.
    pub fn index_of(&self, c: char) -> usize {
        if c.is_ascii() {
            self.lookup[c as usize] as usize
        } else {
            UNKNOWN_INDEX
        }
    }

    pub fn symbol(&self, index: usize) -> Option<Symbol> {
        match index {
            UNKNOWN_INDEX => Some(Symbol::Unknown),
            i if i < UNKNOWN_INDEX => Some(Symbol::Char(self.symbols[i])),
            _ => None,
        }
    }

    /// Encodes `text` as a [`CharMatrix`]: one row per character after case
    /// folding, out-of-alphabet characters on the UNKNOWN slot, anything
    /// past [`MAX_CHARS`] dropped and the remaining rows left as padding.
    pub fn encode(&self, text: &str) -> CharMatrix {
        let mut active = [None; MAX_CHARS];
        for (slot, c) in active.iter_mut().zip(text.chars()) {
            *slot = Some(self.index_of(fold_case(c)) as u8);
        }
        CharMatrix { active }
    }

    /// Decodes one 70-wide binary row.
    pub fn decode_row(&self, row: &[f64]) -> Result<Symbol> {
        if row.len() != ALPHABET_SIZE {
            return Err(Error::Shape(format!(
                "one-hot row has {} entries, expected {ALPHABET_SIZE}",
                row.len()
            )));
        }
        let set: Vec<usize> = row
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i)
            .collect();
        match set.as_slice() {
            [] => Ok(Symbol::Pad),
            [i] => Ok(self.symbol(*i).expect("index below alphabet size")),
            more => Err(Error::MalformedRow(more.len())),
        }
    }
}

/// Lowercase mapping restricted to one output character per input character,
/// so encoded positions line up with the original text.
pub fn fold_case(c: char) -> char {
    c.to_lowercase().next().unwrap_or(c)
}

/// A decoded one-hot row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    Char(char),
    Unknown,
    Pad,
}

/// A tweet as a `150 x 70` binary matrix, stored as the active column of
/// each row. Rows past the end of the text are all-zero padding.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CharMatrix {
    active: [Option<u8>; MAX_CHARS],
}

impl std::fmt::Debug for CharMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CharMatrix({} chars)", self.len())
    }
}

impl CharMatrix {
    pub fn rows(&self) -> usize {
        MAX_CHARS
    }

    pub fn cols(&self) -> usize {
        ALPHABET_SIZE
    }

    /// Number of non-padding rows.
    pub fn len(&self) -> usize {
        self.active.iter().take_while(|a| a.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.active[0].is_none()
    }

    /// Active column of every row, `None` for padding.
    pub fn active_columns(&self) -> Vec<Option<usize>> {
        self.active.iter().map(|a| a.map(usize::from)).collect()
    }

    pub fn row(&self, r: usize) -> [f64; ALPHABET_SIZE] {
        let mut row = [0.0; ALPHABET_SIZE];
        if let Some(c) = self.active[r] {
            row[c as usize] = 1.0;
        }
        row
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(MAX_CHARS, ALPHABET_SIZE, |r, c| {
            if self.active[r] == Some(c as u8) {
                1.0
            } else {
                0.0
            }
        })
    }
}

/// Convenience wrapper over [`Alphabet::encode`] with the canonical alphabet.
pub fn encode_tweet(text: &str) -> CharMatrix {
    Alphabet::new().encode(text)
}
