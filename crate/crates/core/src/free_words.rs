//! Reduced words in the free group of rank `d`.
//!
//! A [`Letter`] is a signed generator index: `+i` is the `i`-th generator and
//! `-i` its inverse. Words are kept freely reduced at all times, so the word
//! length is the word norm.
//!
//! Word literals use `a`, `b`, `c`, ... for the generators and the matching
//! uppercase letter for their inverses; the empty string is the identity.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

/// Ranks above this cannot be written as word literals.
pub const MAX_LITERAL_RANK: u16 = 26;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: u16, found: u16 },
    #[error("letter index {index} is invalid for rank {rank}")]
    BadLetter { index: i32, rank: u16 },
    #[error("rank must be at least {min}, got {rank}")]
    RankTooSmall { rank: u16, min: u16 },
    #[error("unknown letter '{ch}' at position {position}")]
    UnknownLetter { ch: char, position: usize },
    #[error("letter '{ch}' at position {position} exceeds rank {rank}")]
    LetterBeyondRank { ch: char, position: usize, rank: u16 },
}

/// A generator or inverse generator of `F_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    index: i16,
    rank: u16,
}

impl Letter {
    pub fn new(index: i32, rank: u16) -> Result<Self, WordError> {
        if index == 0 || index.unsigned_abs() > rank as u32 {
            return Err(WordError::BadLetter { index, rank });
        }
        Ok(Letter {
            index: index as i16,
            rank,
        })
    }

    /// The generator with 1-based index `i`.
    pub fn generator(i: u16, rank: u16) -> Result<Self, WordError> {
        Self::new(i as i32, rank)
    }

    pub fn index(self) -> i32 {
        self.index as i32
    }

    pub fn rank(self) -> u16 {
        self.rank
    }

    pub fn inverse(self) -> Self {
        Letter {
            index: -self.index,
            rank: self.rank,
        }
    }

    /// Position in the order `a < A < b < B < ...`; also the coset-table
    /// column of the letter.
    pub fn key(self) -> usize {
        let g = self.index.unsigned_abs() as usize - 1;
        2 * g + usize::from(self.index < 0)
    }

    /// Inverse of [`Letter::key`].
    pub fn from_key(key: usize, rank: u16) -> Self {
        let g = (key / 2 + 1) as i16;
        let index = if key.is_multiple_of(2) { g } else { -g };
        debug_assert!(g as u16 <= rank);
        Letter { index, rank }
    }

    /// All `2d` letters in key order.
    pub fn all(rank: u16) -> impl Iterator<Item = Letter> {
        (0..2 * rank as usize).map(move |k| Letter::from_key(k, rank))
    }

    fn literal(self) -> String {
        let g = self.index.unsigned_abs();
        if g <= MAX_LITERAL_RANK {
            let base = if self.index > 0 { b'a' } else { b'A' };
            ((base + (g - 1) as u8) as char).to_string()
        } else if self.index > 0 {
            format!("[g{g}]")
        } else {
            format!("[G{g}]")
        }
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReducedWord {
    rank: u16,
    letters: Vec<Letter>,
}

/// Freely reduce a letter sequence with a single stack pass.
pub fn reduce(rank: u16, letters: &[Letter]) -> Result<ReducedWord, WordError> {
    let mut stack: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        if l.rank != rank {
            return Err(WordError::RankMismatch {
                expected: rank,
                found: l.rank,
            });
        }
        push_reduced(&mut stack, l);
    }
    Ok(ReducedWord { rank, letters: stack })
}

fn push_reduced(stack: &mut Vec<Letter>, l: Letter) {
    if stack.last().is_some_and(|&top| top.index == -l.index) {
        stack.pop();
    } else {
        stack.push(l);
    }
}

impl ReducedWord {
    pub fn identity(rank: u16) -> Self {
        ReducedWord {
            rank,
            letters: Vec::new(),
        }
    }

    pub fn from_letter(l: Letter) -> Self {
        ReducedWord {
            rank: l.rank,
            letters: vec![l],
        }
    }

    /// Build from signed indices, reducing as we go.
    pub fn from_indices(rank: u16, indices: &[i32]) -> Result<Self, WordError> {
        let letters = indices
            .iter()
            .map(|&i| Letter::new(i, rank))
            .collect::<Result<Vec<_>, _>>()?;
        reduce(rank, &letters)
    }

    /// Parse a word literal such as `"abAB"`. Positions in errors are 1-based.
    pub fn parse(text: &str, rank: u16) -> Result<Self, WordError> {
        let mut letters = Vec::with_capacity(text.len());
        for (i, ch) in text.chars().enumerate() {
            let position = i + 1;
            let (g, sign) = match ch {
                'a'..='z' => (ch as u16 - 'a' as u16 + 1, 1),
                'A'..='Z' => (ch as u16 - 'A' as u16 + 1, -1),
                _ => return Err(WordError::UnknownLetter { ch, position }),
            };
            if g > rank {
                return Err(WordError::LetterBeyondRank { ch, position, rank });
            }
            letters.push(Letter {
                index: sign * g as i16,
                rank,
            });
        }
        reduce(rank, &letters)
    }

    pub fn rank(&self) -> u16 {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    /// Prefix of length `k` (clamped to the word length).
    pub fn prefix(&self, k: usize) -> ReducedWord {
        ReducedWord {
            rank: self.rank,
            letters: self.letters[..k.min(self.len())].to_vec(),
        }
    }

    /// Suffix starting at position `k`.
    pub fn suffix_from(&self, k: usize) -> ReducedWord {
        ReducedWord {
            rank: self.rank,
            letters: self.letters[k.min(self.len())..].to_vec(),
        }
    }

    pub fn starts_with(&self, prefix: &ReducedWord) -> bool {
        self.letters.starts_with(&prefix.letters)
    }

    fn check_rank(&self, other: &ReducedWord) -> Result<(), WordError> {
        if self.rank != other.rank {
            return Err(WordError::RankMismatch {
                expected: self.rank,
                found: other.rank,
            });
        }
        Ok(())
    }

    pub fn multiply(&self, other: &ReducedWord) -> Result<ReducedWord, WordError> {
        self.check_rank(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &ReducedWord) -> ReducedWord {
        // Only the seam between the two words can cancel.
        let mut cancel = 0;
        let (a, b) = (&self.letters, &other.letters);
        while cancel < a.len() && cancel < b.len() && a[a.len() - 1 - cancel].index == -b[cancel].index {
            cancel += 1;
        }
        let mut letters = Vec::with_capacity(a.len() + b.len() - 2 * cancel);
        letters.extend_from_slice(&a[..a.len() - cancel]);
        letters.extend_from_slice(&b[cancel..]);
        ReducedWord {
            rank: self.rank,
            letters,
        }
    }

    /// Right multiplication by a single letter.
    pub fn push(&mut self, l: Letter) -> Result<(), WordError> {
        if l.rank != self.rank {
            return Err(WordError::RankMismatch {
                expected: self.rank,
                found: l.rank,
            });
        }
        push_reduced(&mut self.letters, l);
        Ok(())
    }

    pub fn invert(&self) -> ReducedWord {
        ReducedWord {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Cyclic reduction: strip matching first/last letter pairs.
    pub fn cyclically_reduce(&self) -> ReducedWord {
        let mut lo = 0;
        let mut hi = self.letters.len();
        while hi - lo >= 2 && self.letters[lo].index == -self.letters[hi - 1].index {
            lo += 1;
            hi -= 1;
        }
        ReducedWord {
            rank: self.rank,
            letters: self.letters[lo..hi].to_vec(),
        }
    }

    /// Word literal form; the inverse of [`ReducedWord::parse`].
    pub fn literal(&self) -> String {
        self.letters.iter().map(|l| l.literal()).collect()
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            f.write_str("ε")
        } else {
            f.write_str(&self.literal())
        }
    }
}

/// Lexicographic in the letter order `a < A < b < B < ...`; a proper prefix
/// sorts first.
impl Ord for ReducedWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank
            .cmp(&other.rank)
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `|S(n)|` for `F_d`: 1 when `n = 0`, else `2d (2d-1)^(n-1)`.
pub fn sphere_size(rank: u16, n: usize) -> BigUint {
    if n == 0 {
        return BigUint::one();
    }
    let d = rank as u64;
    BigUint::from(2 * d) * BigUint::from(2 * d - 1).pow((n - 1) as u32)
}

/// `|S(n)|` as a float, for use in logs.
pub fn sphere_size_f64(rank: u16, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let d = rank as f64;
    2.0 * d * (2.0 * d - 1.0).powi((n - 1) as i32)
}

/// `log |S(n)|`, without overflow.
pub fn log_sphere_size(rank: u16, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let d = rank as f64;
    (2.0 * d).ln() + (n - 1) as f64 * (2.0 * d - 1.0).ln()
}

/// Lazy enumeration of the sphere of radius `n`, in lexicographic order.
#[derive(Debug, Clone)]
pub struct Sphere {
    rank: u16,
    radius: usize,
    keys: Vec<usize>,
    done: bool,
}

/// All reduced words of length exactly `n`.
pub fn sphere(rank: u16, n: usize) -> Result<Sphere, WordError> {
    if rank < 2 {
        return Err(WordError::RankTooSmall { rank, min: 2 });
    }
    let mut keys = Vec::with_capacity(n);
    for i in 0..n {
        // smallest key that does not cancel the previous letter
        let k = if i > 0 && keys[i - 1] == 1 { 2 } else { 0 };
        keys.push(k);
    }
    Ok(Sphere {
        rank,
        radius: n,
        keys,
        done: false,
    })
}

impl Sphere {
    /// Exact cardinality of the sphere.
    pub fn cardinality(&self) -> BigUint {
        sphere_size(self.rank, self.radius)
    }

    fn cancels(prev: usize, next: usize) -> bool {
        prev / 2 == next / 2 && prev != next
    }

    fn first_valid(&self, i: usize, from: usize) -> Option<usize> {
        let width = 2 * self.rank as usize;
        (from..width).find(|&k| i == 0 || !Self::cancels(self.keys[i - 1], k))
    }
}

impl Iterator for Sphere {
    type Item = ReducedWord;

    fn next(&mut self) -> Option<ReducedWord> {
        if self.done {
            return None;
        }
        let word = ReducedWord {
            rank: self.rank,
            letters: self.keys.iter().map(|&k| Letter::from_key(k, self.rank)).collect(),
        };
        // odometer step
        let mut i = self.radius;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if let Some(k) = self.first_valid(i, self.keys[i] + 1) {
                self.keys[i] = k;
                for j in i + 1..self.radius {
                    self.keys[j] = self.first_valid(j, 0).expect("rank >= 2");
                }
                break;
            }
        }
        Some(word)
    }
}
