//! Permutations on dart labels, perfect matchings, and the uniform samplers.
//!
//! Labels are `0..N` internally. Every textual form (cycle notation, the
//! `Display` impls) is 1-based, so `(1 2 3)` names the 3-cycle on the first
//! three darts.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("incompatible carriers: permutations of size {left} and {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("image sequence is not a bijection on 1..={0}")]
    NotBijection(usize),
    #[error("matching is not a fixed-point-free involution")]
    NotMatching,
    #[error("unmatchable dart: cannot pair {0} darts")]
    OddDartCount(usize),
    #[error("split {split} out of range 0..={n}")]
    SplitOutOfRange { split: usize, n: usize },
    #[error("parity fix needs at least two darts, got {0}")]
    TooSmall(usize),
    #[error("invalid rotation shape: {0}")]
    InvalidShape(String),
    #[error("cannot parse cycle notation: {0}")]
    Parse(String),
}

/// A bijection on `0..N`, stored as its image sequence.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// Builds a permutation from 0-based images, checking bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self, PermError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v >= n || seen[v] {
                return Err(PermError::NotBijection(n));
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    /// Builds a permutation from 1-based images, as used in external formats.
    pub fn from_one_based(images: &[usize]) -> Result<Self, PermError> {
        let n = images.len();
        let zero = images
            .iter()
            .map(|&v| v.checked_sub(1).ok_or(PermError::NotBijection(n)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_images(zero)
    }

    /// Parses 1-based cycle notation such as `"(1 2 3)(5 6)"` on `n` labels.
    /// Labels not mentioned are fixed points; `""` and `"()"` give the identity.
    pub fn from_cycle_notation(n: usize, text: &str) -> Result<Self, PermError> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body_start = rest
                .strip_prefix('(')
                .ok_or_else(|| PermError::Parse(text.to_string()))?;
            let close = body_start
                .find(')')
                .ok_or_else(|| PermError::Parse(text.to_string()))?;
            let body = &body_start[..close];
            rest = body_start[close + 1..].trim_start();
            let labels = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| match s.parse::<usize>() {
                    Ok(v) if v >= 1 && v <= n => Ok(v - 1),
                    _ => Err(PermError::Parse(text.to_string())),
                })
                .collect::<Result<Vec<_>, _>>()?;
            for (i, &a) in labels.iter().enumerate() {
                if touched[a] {
                    return Err(PermError::Parse(text.to_string()));
                }
                touched[a] = true;
                images[a] = labels[(i + 1) % labels.len()];
            }
        }
        Ok(Permutation { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    #[inline]
    pub fn image(&self, k: usize) -> usize {
        self.images[k]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn into_images(self) -> Vec<usize> {
        self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(k, &v)| k == v)
    }

    /// `self ∘ q`: applies `q` first, then `self`.
    pub fn compose(&self, q: &Permutation) -> Result<Permutation, PermError> {
        if self.len() != q.len() {
            return Err(PermError::SizeMismatch {
                left: self.len(),
                right: q.len(),
            });
        }
        Ok(Permutation {
            images: q.images.iter().map(|&j| self.images[j]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (k, &v) in self.images.iter().enumerate() {
            inv[v] = k;
        }
        Permutation { images: inv }
    }

    /// Number of cycles, fixed points included.
    pub fn cycle_count(&self) -> usize {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.images[k];
            }
        }
        count
    }

    /// `+1` for even permutations, `-1` for odd ones.
    pub fn sign(&self) -> i8 {
        if (self.len() - self.cycle_count()).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn cycles(&self) -> CycleDecomposition {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut min_indicators = vec![false; n];
        let mut cycles = Vec::new();
        // Scanning starts in increasing order, so each cycle is first reached
        // at its minimum and the list comes out sorted by minimum.
        for start in 0..n {
            if seen[start] {
                continue;
            }
            min_indicators[start] = true;
            let mut cycle = Vec::new();
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                cycle.push(k);
                k = self.images[k];
            }
            cycles.push(cycle);
        }
        CycleDecomposition {
            cycles,
            min_indicators,
        }
    }

    /// Splits the cycle count by where each cycle's minimum falls:
    /// `(cycles with min < split, cycles with min >= split)`.
    ///
    /// With 1-based labels this is `(Σ_{k≤m} X_k, Σ_{k>m} X_k)`.
    pub fn min_indicator_process(&self, split: usize) -> Result<(usize, usize), PermError> {
        let n = self.len();
        if split > n {
            return Err(PermError::SplitOutOfRange { split, n });
        }
        let mut seen = vec![false; n];
        let (mut low, mut high) = (0, 0);
        for start in 0..n {
            if seen[start] {
                continue;
            }
            if start < split {
                low += 1;
            } else {
                high += 1;
            }
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                k = self.images[k];
            }
        }
        Ok((low, high))
    }

    /// Returns `(1 2) ∘ self` when `coin` is set, `self` otherwise.
    pub fn parity_fix(&self, coin: bool) -> Result<Permutation, PermError> {
        if self.len() < 2 {
            return Err(PermError::TooSmall(self.len()));
        }
        if !coin {
            return Ok(self.clone());
        }
        let images = self
            .images
            .iter()
            .map(|&v| match v {
                0 => 1,
                1 => 0,
                other => other,
            })
            .collect();
        Ok(Permutation { images })
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.cycles().fmt(f)
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation[{}]{}", self.len(), self)
    }
}

/// Cycles of a permutation, each starting at its minimum, sorted by minimum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleDecomposition {
    cycles: Vec<Vec<usize>>,
    min_indicators: Vec<bool>,
}

impl CycleDecomposition {
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn count(&self) -> usize {
        self.cycles.len()
    }

    /// Entry `k` is set iff `k` is the smallest label of its cycle.
    pub fn min_indicators(&self) -> &[bool] {
        &self.min_indicators
    }

    /// Cycle lengths in canonical cycle order.
    pub fn cycle_type(&self) -> Vec<usize> {
        self.cycles.iter().map(Vec::len).collect()
    }
}

/// Canonical text form, e.g. `(1 2 3)(4 5)(6)`.
impl fmt::Display for CycleDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cycle in &self.cycles {
            f.write_str("(")?;
            for (i, k) in cycle.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}", k + 1)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// A fixed-point-free involution on `0..N`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    partner: Vec<usize>,
}

impl Matching {
    pub fn from_partner(partner: Vec<usize>) -> Result<Self, PermError> {
        let n = partner.len();
        if n % 2 == 1 {
            return Err(PermError::OddDartCount(n));
        }
        for (k, &p) in partner.iter().enumerate() {
            if p >= n || p == k || partner[p] != k {
                return Err(PermError::NotMatching);
            }
        }
        Ok(Matching { partner })
    }

    /// Builds a matching on `n` darts from 0-based pairs covering every dart once.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self, PermError> {
        if n % 2 == 1 {
            return Err(PermError::OddDartCount(n));
        }
        let mut partner = vec![usize::MAX; n];
        for &(a, b) in pairs {
            if a >= n || b >= n || a == b || partner[a] != usize::MAX || partner[b] != usize::MAX {
                return Err(PermError::NotMatching);
            }
            partner[a] = b;
            partner[b] = a;
        }
        if partner.contains(&usize::MAX) {
            return Err(PermError::NotMatching);
        }
        Ok(Matching { partner })
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    #[inline]
    pub fn partner(&self, k: usize) -> usize {
        self.partner[k]
    }

    pub fn partners(&self) -> &[usize] {
        &self.partner
    }

    /// Pairs `(a, b)` with `a < b`, sorted by `a`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.partner
            .iter()
            .enumerate()
            .filter(|&(a, &b)| a < b)
            .map(|(a, &b)| (a, b))
            .collect()
    }

    pub fn to_permutation(&self) -> Permutation {
        Permutation {
            images: self.partner.clone(),
        }
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, b) in self.pairs() {
            write!(f, "({} {})", a + 1, b + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matching[{}]{}", self.len(), self)
    }
}

/// Uniform perfect matching on `n` darts: shuffle the labels, pair neighbours.
pub fn sample_matching<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Matching, PermError> {
    if n == 0 || n % 2 == 1 {
        return Err(PermError::OddDartCount(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut partner = vec![0; n];
    for pair in order.chunks_exact(2) {
        partner[pair[0]] = pair[1];
        partner[pair[1]] = pair[0];
    }
    Ok(Matching { partner })
}

/// Uniform permutation of `0..n` (Fisher–Yates).
pub fn sample_uniform_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    let mut images: Vec<usize> = (0..n).collect();
    images.shuffle(rng);
    Permutation { images }
}

/// Polygon layout for the canonical rotation permutation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RotationShape {
    /// `count` polygons with `sides` sides each.
    Polygons { count: usize, sides: usize },
    /// One polygon with `sides` sides.
    Single { sides: usize },
}

/// `(1 2 … t)(t+1 … 2t)…` for t-gons, or the full cycle `(1 2 … N)`.
pub fn canonical_rotation(shape: RotationShape) -> Result<Permutation, PermError> {
    match shape {
        RotationShape::Polygons { count, sides } => {
            if sides < 3 {
                return Err(PermError::InvalidShape(format!(
                    "polygons need at least 3 sides, got {sides}"
                )));
            }
            if count == 0 {
                return Err(PermError::InvalidShape("no polygons".into()));
            }
            let images = (0..count * sides)
                .map(|k| {
                    let base = k - k % sides;
                    base + (k - base + 1) % sides
                })
                .collect();
            Ok(Permutation { images })
        }
        RotationShape::Single { sides } => {
            if sides < 2 {
                return Err(PermError::InvalidShape(format!(
                    "a single polygon needs at least 2 sides, got {sides}"
                )));
            }
            Ok(Permutation {
                images: (0..sides).map(|k| (k + 1) % sides).collect(),
            })
        }
    }
}
