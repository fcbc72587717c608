//! Block codes over the alphabet `{0..d-1}`, not necessarily linear.
//!
//! A [`Code`] is an explicit, duplicate-free word set kept in lexicographic
//! order, so two codes with the same words compare equal and serialize to the
//! same bytes. The MDS property is decided two ways: by the Singleton bound on
//! the minimum distance ([`is_mds`]) and by the strength-k orthogonal array
//! condition ([`oa_check`]).

use serde::Serialize;
use thiserror::Error;

use crate::subsets::{checked_pow, Subsets};

/// Alphabet symbol. Alphabets larger than `u16::MAX` are out of scope.
pub type Symbol = u16;

/// Largest counting table `oa_check` will allocate (entries).
pub const OA_TABLE_CAP: u64 = 1 << 28;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("alphabet size {0} must be between 2 and 65535")]
    BadAlphabet(u32),
    #[error("word length must be at least 1")]
    EmptyLength,
    #[error("word {index} has length {len}, expected {n}")]
    LengthMismatch { index: usize, len: usize, n: usize },
    #[error("symbol {symbol} out of range for alphabet size {d}")]
    SymbolOutOfRange { symbol: u32, d: u32 },
    #[error("duplicate word {0:?}")]
    DuplicateWord(Vec<Symbol>),
    #[error("code has {0} words; at least two are required")]
    TooFewWords(usize),
    #[error("coordinate {position} out of range for length {n}")]
    InvalidPosition { position: usize, n: usize },
    #[error("puncturing produced the duplicate word {0:?}")]
    DuplicateAfterPuncture(Vec<Symbol>),
    #[error("code has {actual} words, expected d^k = {expected}")]
    SizeMismatch { expected: u64, actual: usize },
    #[error("counting table of {0} entries exceeds the cap")]
    TableTooLarge(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Code {
    d: u32,
    n: usize,
    /// Row-major, lexicographically sorted, no duplicates.
    symbols: Vec<Symbol>,
}

impl Code {
    /// Builds a code from explicit words. Duplicates are an error, not merged.
    pub fn new<W: AsRef<[u32]>>(d: u32, n: usize, words: &[W]) -> Result<Code, CodeError> {
        check_shape(d, n)?;
        let mut symbols = Vec::with_capacity(words.len() * n);
        for (index, w) in words.iter().enumerate() {
            let w = w.as_ref();
            if w.len() != n {
                return Err(CodeError::LengthMismatch {
                    index,
                    len: w.len(),
                    n,
                });
            }
            for &s in w {
                if s >= d {
                    return Err(CodeError::SymbolOutOfRange { symbol: s, d });
                }
                symbols.push(s as Symbol);
            }
        }
        Code::from_flat(d, n, symbols)
    }

    /// Builds a code from concatenated words in any order.
    pub fn from_flat(d: u32, n: usize, symbols: Vec<Symbol>) -> Result<Code, CodeError> {
        check_shape(d, n)?;
        if !symbols.len().is_multiple_of(n) {
            return Err(CodeError::LengthMismatch {
                index: symbols.len() / n,
                len: symbols.len() % n,
                n,
            });
        }
        if let Some(&s) = symbols.iter().find(|&&s| s as u32 >= d) {
            return Err(CodeError::SymbolOutOfRange {
                symbol: s as u32,
                d,
            });
        }
        let mut rows: Vec<&[Symbol]> = symbols.chunks_exact(n).collect();
        rows.sort_unstable();
        if let Some(pair) = rows.windows(2).find(|p| p[0] == p[1]) {
            return Err(CodeError::DuplicateWord(pair[0].to_vec()));
        }
        let sorted = rows.concat();
        Ok(Code {
            d,
            n,
            symbols: sorted,
        })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.symbols.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn word(&self, i: usize) -> &[Symbol] {
        &self.symbols[i * self.n..(i + 1) * self.n]
    }

    pub fn words(&self) -> impl ExactSizeIterator<Item = &[Symbol]> + '_ {
        self.symbols.chunks_exact(self.n)
    }

    pub fn contains(&self, w: &[Symbol]) -> bool {
        w.len() == self.n && self.words_sorted_search(w)
    }

    fn words_sorted_search(&self, w: &[Symbol]) -> bool {
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.word(mid).cmp(w) {
                std::cmp::Ordering::Equal => return true,
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
            }
        }
        false
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.words()
            .map(|w| w.iter().map(|&s| s as u32).collect())
            .collect()
    }

    /// `k` with `|C| = d^k`, if the size is an exact power of `d`.
    pub fn power_dimension(&self) -> Option<usize> {
        let mut size = self.len() as u64;
        if size == 0 {
            return None;
        }
        let mut k = 0;
        while size.is_multiple_of(self.d as u64) {
            size /= self.d as u64;
            k += 1;
        }
        (size == 1).then_some(k)
    }
}

fn check_shape(d: u32, n: usize) -> Result<(), CodeError> {
    if !(2..=Symbol::MAX as u32).contains(&d) {
        return Err(CodeError::BadAlphabet(d));
    }
    if n == 0 {
        return Err(CodeError::EmptyLength);
    }
    Ok(())
}

pub fn hamming_distance<T: PartialEq>(a: &[T], b: &[T]) -> Result<usize, CodeError> {
    if a.len() != b.len() {
        return Err(CodeError::LengthMismatch {
            index: 1,
            len: b.len(),
            n: a.len(),
        });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// Minimum distance together with the first pair (in word order) attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinDistance {
    pub delta: usize,
    pub witness: (usize, usize),
}

/// Words packed into one machine word each, `width` bits per symbol.
struct Packed {
    words: Vec<u64>,
    width: u32,
    low_bits: u64,
}

impl Packed {
    fn try_new(code: &Code) -> Option<Packed> {
        let width = 32 - (code.d - 1).leading_zeros().min(31);
        if width as usize * code.n > 64 {
            return None;
        }
        let words = code
            .words()
            .map(|w| {
                w.iter()
                    .enumerate()
                    .fold(0u64, |acc, (i, &s)| acc | (s as u64) << (i as u32 * width))
            })
            .collect();
        let low_bits = (0..code.n).fold(0u64, |acc, i| acc | 1 << (i as u32 * width));
        Some(Packed {
            words,
            width,
            low_bits,
        })
    }

    #[inline]
    fn distance(&self, a: u64, b: u64) -> u32 {
        let x = a ^ b;
        let mut folded = x;
        for s in 1..self.width {
            folded |= x >> s;
        }
        (folded & self.low_bits).count_ones()
    }
}

/// Naive pairwise scan; words are bit-packed when they fit in 64 bits.
pub fn min_distance(code: &Code) -> Result<MinDistance, CodeError> {
    let size = code.len();
    if size < 2 {
        return Err(CodeError::TooFewWords(size));
    }
    let mut best = MinDistance {
        delta: code.n + 1,
        witness: (0, 1),
    };
    if let Some(packed) = Packed::try_new(code) {
        for (i, &a) in packed.words.iter().enumerate() {
            for (j, &b) in packed.words.iter().enumerate().skip(i + 1) {
                let dist = packed.distance(a, b) as usize;
                if dist < best.delta {
                    best = MinDistance {
                        delta: dist,
                        witness: (i, j),
                    };
                    if dist == 1 {
                        return Ok(best);
                    }
                }
            }
        }
    } else {
        for i in 0..size {
            for j in i + 1..size {
                let dist = hamming_distance(code.word(i), code.word(j))?;
                if dist < best.delta {
                    best = MinDistance {
                        delta: dist,
                        witness: (i, j),
                    };
                    if dist == 1 {
                        return Ok(best);
                    }
                }
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MdsReport {
    pub is_mds: bool,
    pub delta: usize,
    /// `n - delta + 1` when the code is MDS.
    pub k: Option<usize>,
    pub size: usize,
    pub witness: Option<(Vec<Symbol>, Vec<Symbol>)>,
}

pub fn is_mds(code: &Code) -> Result<MdsReport, CodeError> {
    let md = min_distance(code)?;
    let exponent = code.n - md.delta + 1;
    let bound = checked_pow(code.d as u64, exponent);
    let size = code.len();
    if let Some(bound) = bound {
        assert!(
            size as u64 <= bound,
            "Singleton bound violated: {size} > {bound}"
        );
    }
    let is_mds = bound == Some(size as u64);
    Ok(MdsReport {
        is_mds,
        delta: md.delta,
        k: is_mds.then_some(exponent),
        size,
        witness: Some((
            code.word(md.witness.0).to_vec(),
            code.word(md.witness.1).to_vec(),
        )),
    })
}

/// First coordinate subset on which the projection is not a bijection onto
/// `{0..d-1}^k`, or `None` if the code is an orthogonal array of strength k
/// and index 1.
pub fn oa_failure(code: &Code, k: usize) -> Result<Option<Vec<usize>>, CodeError> {
    let expected = checked_pow(code.d as u64, k).ok_or(CodeError::TableTooLarge(u64::MAX))?;
    if code.len() as u64 != expected {
        return Err(CodeError::SizeMismatch {
            expected,
            actual: code.len(),
        });
    }
    if expected > OA_TABLE_CAP {
        return Err(CodeError::TableTooLarge(expected));
    }
    if k > code.n {
        // A code with more than d^n distinct words cannot exist.
        return Ok(Some((0..code.n).collect()));
    }
    let d = code.d as u64;
    let mut seen = vec![false; expected as usize];
    for positions in Subsets::new(code.n, k) {
        seen.iter_mut().for_each(|s| *s = false);
        for w in code.words() {
            let idx = positions.iter().fold(0u64, |acc, &p| acc * d + w[p] as u64) as usize;
            if std::mem::replace(&mut seen[idx], true) {
                return Ok(Some(positions));
            }
        }
    }
    Ok(None)
}

/// True iff every `k` coordinates carry each `k`-tuple exactly once.
pub fn oa_check(code: &Code, k: usize) -> Result<bool, CodeError> {
    Ok(oa_failure(code, k)?.is_none())
}

/// Deletes coordinate `position` from every word.
pub fn puncture(code: &Code, position: usize) -> Result<Code, CodeError> {
    let n = code.n;
    if position >= n {
        return Err(CodeError::InvalidPosition { position, n });
    }
    if n < 2 {
        return Err(CodeError::EmptyLength);
    }
    let symbols: Vec<Symbol> = code
        .words()
        .flat_map(|w| {
            w.iter()
                .enumerate()
                .filter(move |&(i, _)| i != position)
                .map(|(_, &s)| s)
        })
        .collect();
    Code::from_flat(code.d, n - 1, symbols).map_err(|e| match e {
        CodeError::DuplicateWord(w) => CodeError::DuplicateAfterPuncture(w),
        other => other,
    })
}

/// Punctures the trailing coordinates until the code has length `n`.
pub fn puncture_to_length(code: &Code, n: usize) -> Result<Code, CodeError> {
    let mut out = code.clone();
    while out.n > n {
        out = puncture(&out, out.n - 1)?;
    }
    Ok(out)
}
