//! Word and relative-position embeddings.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use thiserror::Error;

use super::tensor::Matrix;

/// Row reserved for tokens outside the vocabulary.
pub const UNKNOWN_ROW: usize = 0;
pub const UNKNOWN_TOKEN: &str = "<unk>";

#[derive(Debug, Error, PartialEq)]
pub enum EmbeddingFileError {
    #[error("line {line}: expected {expected} values after the token, found {found}")]
    Width { line: usize, expected: usize, found: usize },
    #[error("line {line}: bad number {text:?}")]
    Number { line: usize, text: String },
    #[error("embedding file has no vectors")]
    Empty,
}

/// Token vocabulary; row 0 is the unknown token. Lookups are case-folded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

pub fn fold(token: &str) -> String {
    token.to_lowercase()
}

impl Vocabulary {
    /// Sorted, deduplicated vocabulary over the folded tokens.
    pub fn build<'a>(tokens: impl IntoIterator<Item = &'a str>) -> Self {
        let set: BTreeSet<String> = tokens.into_iter().map(fold).collect();
        let mut list = vec![UNKNOWN_TOKEN.to_string()];
        list.extend(set.into_iter().filter(|t| t != UNKNOWN_TOKEN));
        Vocabulary::from_tokens(list).expect("built vocabulary is well-formed")
    }

    /// Rebuilds from a stored token list (row order). Fails when the first
    /// row is not the unknown token or a token repeats.
    pub fn from_tokens(tokens: Vec<String>) -> Option<Self> {
        if tokens.first().map(String::as_str) != Some(UNKNOWN_TOKEN) {
            return None;
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return None;
            }
        }
        Some(Vocabulary { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn row(&self, token: &str) -> usize {
        self.index
            .get(token)
            .or_else(|| self.index.get(&fold(token)))
            .copied()
            .unwrap_or(UNKNOWN_ROW)
    }
}

/// Vectors read from a plain-text embedding file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PretrainedVectors {
    pub dim: usize,
    pub vectors: HashMap<String, Vec<f64>>,
}

impl PretrainedVectors {
    /// Parses `token v1 v2 ... vd` lines. A leading `count dim` header line
    /// is skipped. When `keep` is given only those (folded) tokens are stored.
    pub fn parse(
        text: &str,
        expected_dim: Option<usize>,
        keep: Option<&dyn Fn(&str) -> bool>,
    ) -> Result<PretrainedVectors, EmbeddingFileError> {
        let mut dim = expected_dim;
        let mut vectors = HashMap::new();
        let mut seen_any = false;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let values: Vec<&str> = fields.collect();
            if i == 0 && values.len() == 1 && token.parse::<usize>().is_ok() && values[0].parse::<usize>().is_ok() {
                continue;
            }
            let expected = *dim.get_or_insert(values.len());
            if values.len() != expected || expected == 0 {
                return Err(EmbeddingFileError::Width {
                    line: line_no,
                    expected,
                    found: values.len(),
                });
            }
            seen_any = true;
            let folded = fold(token);
            if keep.is_some_and(|k| !k(&folded)) || vectors.contains_key(&folded) {
                continue;
            }
            let parsed = values
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| EmbeddingFileError::Number {
                            line: line_no,
                            text: v.to_string(),
                        })
                })
                .collect::<Result<Vec<f64>, _>>()?;
            vectors.insert(folded, parsed);
        }
        if !seen_any {
            return Err(EmbeddingFileError::Empty);
        }
        Ok(PretrainedVectors {
            dim: dim.unwrap_or(0),
            vectors,
        })
    }
}

/// Word rows plus the relative-position table.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub vocabulary: Vocabulary,
    /// `|V| × d_w`
    pub words: Matrix,
    /// `(2·max_offset + 1) × d_p`
    pub positions: Matrix,
    pub max_offset: usize,
}

impl EmbeddingTable {
    /// Rows come from `pretrained` where available, otherwise `N(0, 0.1²)`.
    pub fn init(
        vocabulary: Vocabulary,
        word_dim: usize,
        position_dim: usize,
        max_offset: usize,
        pretrained: Option<&PretrainedVectors>,
        rng: &mut impl Rng,
    ) -> Self {
        let mut words = Matrix::normal(vocabulary.len(), word_dim, 0.1, rng);
        if let Some(p) = pretrained.filter(|p| p.dim == word_dim) {
            for (row, token) in vocabulary.tokens().iter().enumerate() {
                if let Some(v) = p.vectors.get(token) {
                    words.row_mut(row).copy_from_slice(v);
                }
            }
        }
        let positions = Matrix::normal(2 * max_offset + 1, position_dim, 0.1, rng);
        EmbeddingTable {
            vocabulary,
            words,
            positions,
            max_offset,
        }
    }

    pub fn word_dim(&self) -> usize {
        self.words.cols()
    }

    pub fn position_dim(&self) -> usize {
        self.positions.cols()
    }

    /// Row of the position table for token `i` relative to a mention at `k`.
    pub fn position_row(&self, i: usize, k: usize) -> usize {
        let m = self.max_offset as i64;
        let offset = (i as i64 - k as i64).clamp(-m, m);
        (offset + m) as usize
    }
}
