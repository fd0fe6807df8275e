use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest `n0` for which all `2^(2 n0)` sign sequences are enumerated.
pub const MAX_ENUMERATION_N0: usize = 12;

/// A sign sequence `sigma in {-1, +1}^(2 n0)` selecting, per non-reference
/// node, the principal (`+1`) or reflected (`-1`) arcsin branch.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignSequence {
    signs: Vec<i8>,
}

/// One index `i_k in [n0]` with `sigma_i = sigma_{2 n0 - i + 1}`, together
/// with the common sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PairedIndex {
    pub index: usize,
    pub sign: i8,
}

impl SignSequence {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() || !signs.len().is_multiple_of(2) {
            return Err(Error::Sigma(format!(
                "length {} must be even and positive",
                signs.len()
            )));
        }
        if let Some(pos) = signs.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::Sigma(format!(
                "entry {} at position {} is not +1 or -1",
                signs[pos],
                pos + 1
            )));
        }
        Ok(Self { signs })
    }

    pub fn all_ones(n0: usize) -> Self {
        Self { signs: vec![1; 2 * n0] }
    }

    pub fn all_minus(n0: usize) -> Self {
        Self { signs: vec![-1; 2 * n0] }
    }

    /// The sequence with lexicographic rank `index` among all sequences of
    /// half-length `n0`, with `-1 < +1` and the first entry most significant.
    pub fn from_index(n0: usize, index: u64) -> Self {
        let len = 2 * n0;
        let signs = (0..len)
            .map(|k| if (index >> (len - 1 - k)) & 1 == 1 { 1 } else { -1 })
            .collect();
        Self { signs }
    }

    /// Lexicographic rank, inverse of [`SignSequence::from_index`].
    pub fn index(&self) -> u64 {
        self.signs
            .iter()
            .fold(0u64, |acc, &s| (acc << 1) | u64::from(s == 1))
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn n0(&self) -> usize {
        self.signs.len() / 2
    }

    pub fn n_plus(&self) -> usize {
        self.signs.iter().filter(|&&s| s == 1).count()
    }

    pub fn n_minus(&self) -> usize {
        self.signs.len() - self.n_plus()
    }

    pub fn is_all_ones(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }

    /// Sign of entry `i` (1-based).
    pub fn get(&self, i: usize) -> i8 {
        self.signs[i - 1]
    }

    /// Indices `i in [n0]` whose mirror partner `2 n0 - i + 1` carries the
    /// same sign. These alone determine `chi^sigma`.
    pub fn paired_indices(&self) -> Vec<PairedIndex> {
        let len = self.signs.len();
        (0..self.n0())
            .filter(|&k| self.signs[k] == self.signs[len - 1 - k])
            .map(|k| PairedIndex { index: k + 1, sign: self.signs[k] })
            .collect()
    }

    /// Copy with entries `i` and its mirror `2 n0 - i + 1` replaced.
    pub fn with_pair(&self, i: usize, first: i8, mirror: i8) -> Self {
        let mut signs = self.signs.clone();
        let len = signs.len();
        signs[i - 1] = first;
        signs[len - i] = mirror;
        Self { signs }
    }

    /// The swap of a mismatched mirror pair `(sigma_i, sigma_i') -> (sigma_i', sigma_i)`.
    /// Returns `None` when the pair carries equal signs.
    pub fn swap_pair(&self, i: usize) -> Option<Self> {
        let len = self.signs.len();
        let (s, t) = (self.signs[i - 1], self.signs[len - i]);
        (s != t).then(|| self.with_pair(i, t, s))
    }

    /// The four sequences `(++, +-, -+, --)` agreeing with `self` away from
    /// the outermost pair `(1, 2 n0)`.
    pub fn quadruple(&self) -> [Self; 4] {
        [
            self.with_pair(1, 1, 1),
            self.with_pair(1, 1, -1),
            self.with_pair(1, -1, 1),
            self.with_pair(1, -1, -1),
        ]
    }
}

impl fmt::Display for SignSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.signs {
            f.write_str(if s == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for SignSequence {
    type Err = Error;

    /// Parses `'+'`/`'-'` strings; the Unicode minus sign is accepted for `'-'`.
    fn from_str(s: &str) -> Result<Self> {
        let mut signs = Vec::with_capacity(s.len());
        for (pos, c) in s.chars().enumerate() {
            match c {
                '+' => signs.push(1),
                '-' | '\u{2212}' => signs.push(-1),
                other => {
                    return Err(Error::Sigma(format!(
                        "invalid character '{other}' at position {}",
                        pos + 1
                    )))
                }
            }
        }
        Self::new(signs)
    }
}

impl Serialize for SignSequence {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// All `2^(2 n0)` sign sequences in lexicographic order.
pub fn enumerate_sequences(n0: usize) -> Result<Vec<SignSequence>> {
    check_guard(n0)?;
    let count = 1u64 << (2 * n0);
    Ok((0..count).map(|idx| SignSequence::from_index(n0, idx)).collect())
}

pub(crate) fn check_guard(n0: usize) -> Result<()> {
    if n0 == 0 || n0 > MAX_ENUMERATION_N0 {
        return Err(Error::EnumerationGuard { n0, max: MAX_ENUMERATION_N0 });
    }
    Ok(())
}
