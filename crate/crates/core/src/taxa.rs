//! Taxa, taxon sets, and block partitions of the taxon universe.
//!
//! Taxa are dense integer ids `0..n` with a separate name table. All set
//! operations run on word-packed bitsets so the solver's inner loops are
//! plain word algebra.

use std::fmt;

use thiserror::Error;

/// A taxon id. Ids are dense; display names live in [`TaxonPartition::names`].
pub type Taxon = u32;

const WORD_BITS: usize = 64;

/// A subset of a fixed taxon universe `0..n`, packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TaxonSet {
    n: u32,
    words: Vec<u64>,
}

impl TaxonSet {
    pub fn empty(n: u32) -> Self {
        TaxonSet {
            n,
            words: vec![0; (n as usize).div_ceil(WORD_BITS)],
        }
    }

    pub fn full(n: u32) -> Self {
        let mut s = Self::empty(n);
        for t in 0..n {
            s.insert(t);
        }
        s
    }

    pub fn singleton(n: u32, t: Taxon) -> Self {
        let mut s = Self::empty(n);
        s.insert(t);
        s
    }

    pub fn from_taxa<I: IntoIterator<Item = Taxon>>(n: u32, taxa: I) -> Self {
        let mut s = Self::empty(n);
        for t in taxa {
            s.insert(t);
        }
        s
    }

    /// Size of the universe this set lives in (not the cardinality).
    pub fn universe(&self) -> u32 {
        self.n
    }

    pub fn insert(&mut self, t: Taxon) {
        debug_assert!(t < self.n);
        self.words[t as usize / WORD_BITS] |= 1 << (t as usize % WORD_BITS);
    }

    pub fn remove(&mut self, t: Taxon) {
        debug_assert!(t < self.n);
        self.words[t as usize / WORD_BITS] &= !(1 << (t as usize % WORD_BITS));
    }

    pub fn contains(&self, t: Taxon) -> bool {
        t < self.n && self.words[t as usize / WORD_BITS] & (1 << (t as usize % WORD_BITS)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        TaxonSet {
            n: self.n,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a | b)
                .collect(),
        }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        TaxonSet {
            n: self.n,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        TaxonSet {
            n: self.n,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    /// Complement within the universe `0..n`.
    pub fn complement(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        // Mask off bits beyond n.
        let extra = self.words.len() * WORD_BITS - self.n as usize;
        if extra > 0 {
            if let Some(last) = words.last_mut() {
                *last &= u64::MAX >> extra;
            }
        }
        TaxonSet { n: self.n, words }
    }

    pub fn union_with(&mut self, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        debug_assert_eq!(self.n, other.n);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_superset(&self, other: &Self) -> bool {
        other.is_subset(self)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        debug_assert_eq!(self.n, other.n);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Nested-or-disjoint check: the pairwise laminarity condition.
    pub fn laminar_with(&self, other: &Self) -> bool {
        self.is_subset(other) || other.is_subset(self) || self.is_disjoint(other)
    }

    pub fn first(&self) -> Option<Taxon> {
        for (i, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some((i * WORD_BITS + w.trailing_zeros() as usize) as u32);
            }
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = Taxon> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some((i * WORD_BITS + b) as u32)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<Taxon> {
        self.iter().collect()
    }

    /// The same set embedded in a larger universe.
    pub fn resized(&self, new_n: u32) -> Self {
        assert!(new_n >= self.n);
        let mut s = Self::empty(new_n);
        s.words[..self.words.len()].copy_from_slice(&self.words);
        s
    }

    /// The same set restricted to a smaller universe (drops ids >= new_n).
    pub fn truncated(&self, new_n: u32) -> Self {
        let mut s = Self::empty(new_n);
        for t in self.iter() {
            if t < new_n {
                s.insert(t);
            }
        }
        s
    }
}

impl fmt::Debug for TaxonSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("block {0} has fewer than two taxa")]
    BlockTooSmall(usize),
    #[error("blocks {0} and {1} overlap")]
    OverlappingBlocks(usize, usize),
    #[error("partition has no blocks")]
    Empty,
    #[error("taxon id {0} out of range")]
    TaxonOutOfRange(Taxon),
    #[error("too many blocks ({0}); at most 128 supported")]
    TooManyBlocks(usize),
    #[error("duplicate taxon name {0:?}")]
    DuplicateName(String),
}

/// A partition of a taxon universe into disjoint blocks, each of size >= 2.
///
/// The union of the blocks (the *support*) is the working universe. For
/// top-level inputs the support covers all of `0..n`; restrictions and
/// gadget extensions keep the id space but shrink or grow the support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaxonPartition {
    n: u32,
    names: Vec<String>,
    blocks: Vec<TaxonSet>,
    support: TaxonSet,
}

impl TaxonPartition {
    pub fn new(names: Vec<String>, blocks: Vec<Vec<Taxon>>) -> Result<Self, PartitionError> {
        let n = names.len() as u32;
        {
            let mut seen = std::collections::HashSet::new();
            for name in &names {
                if !seen.insert(name) {
                    return Err(PartitionError::DuplicateName(name.clone()));
                }
            }
        }
        let block_sets: Vec<TaxonSet> = blocks
            .iter()
            .map(|b| {
                for &t in b {
                    if t >= n {
                        return Err(PartitionError::TaxonOutOfRange(t));
                    }
                }
                Ok(TaxonSet::from_taxa(n, b.iter().copied()))
            })
            .collect::<Result<_, _>>()?;
        Self::from_sets(names, block_sets)
    }

    pub fn from_sets(names: Vec<String>, blocks: Vec<TaxonSet>) -> Result<Self, PartitionError> {
        if blocks.is_empty() {
            return Err(PartitionError::Empty);
        }
        if blocks.len() > 128 {
            return Err(PartitionError::TooManyBlocks(blocks.len()));
        }
        let n = names.len() as u32;
        let mut support = TaxonSet::empty(n);
        for (i, b) in blocks.iter().enumerate() {
            if b.len() < 2 {
                return Err(PartitionError::BlockTooSmall(i));
            }
            if !support.is_disjoint(b) {
                let j = blocks[..i]
                    .iter()
                    .position(|prev| !prev.is_disjoint(b))
                    .unwrap();
                return Err(PartitionError::OverlappingBlocks(j, i));
            }
            support.union_with(b);
        }
        Ok(TaxonPartition {
            n,
            names,
            blocks,
            support,
        })
    }

    /// Partition with auto-generated names `t0..t{n-1}` split into the given blocks.
    pub fn with_default_names(n: u32, blocks: Vec<Vec<Taxon>>) -> Result<Self, PartitionError> {
        let names = (0..n).map(|i| format!("t{i}")).collect();
        Self::new(names, blocks)
    }

    pub fn n_ids(&self) -> u32 {
        self.n
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, i: usize) -> &TaxonSet {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[TaxonSet] {
        &self.blocks
    }

    pub fn support(&self) -> &TaxonSet {
        &self.support
    }

    /// Number of taxa in the support.
    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, t: Taxon) -> &str {
        &self.names[t as usize]
    }

    pub fn taxon_by_name(&self, name: &str) -> Option<Taxon> {
        self.names.iter().position(|n| n == name).map(|i| i as u32)
    }

    pub fn block_of(&self, t: Taxon) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(t))
    }

    /// Bitmask of block indices straddled by `x`: blocks with
    /// `0 != x & block != block`.
    pub fn footprint(&self, x: &TaxonSet) -> u128 {
        let mut mask = 0u128;
        for (i, b) in self.blocks.iter().enumerate() {
            let inter = x.intersect(b);
            if !inter.is_empty() && inter != *b {
                mask |= 1 << i;
            }
        }
        mask
    }

    /// Union of the blocks named by a block-index bitmask.
    pub fn blocks_union(&self, mask: u128) -> TaxonSet {
        let mut s = TaxonSet::empty(self.n);
        for (i, b) in self.blocks.iter().enumerate() {
            if mask & (1 << i) != 0 {
                s.union_with(b);
            }
        }
        s
    }

    /// Sub-partition keeping only the blocks in `keep` (same taxon ids).
    pub fn restrict_blocks(&self, keep: &[usize]) -> Result<TaxonPartition, PartitionError> {
        let blocks = keep.iter().map(|&i| self.blocks[i].clone()).collect();
        Self::from_sets(self.names.clone(), blocks)
    }

    /// Partition extended by `extra` fresh two-taxon blocks, used by the
    /// weak-cut gadget reduction. Returns the partition and the first fresh id.
    pub fn with_gadget_blocks(&self, extra: usize) -> Result<(TaxonPartition, u32), PartitionError> {
        let base = self.n;
        let new_n = base + 2 * extra as u32;
        let mut names = self.names.clone();
        for k in 0..extra {
            names.push(format!("__gadget{k}_0"));
            names.push(format!("__gadget{k}_1"));
        }
        let mut blocks: Vec<TaxonSet> = self.blocks.iter().map(|b| b.resized(new_n)).collect();
        for k in 0..extra as u32 {
            blocks.push(TaxonSet::from_taxa(new_n, [base + 2 * k, base + 2 * k + 1]));
        }
        Ok((Self::from_sets(names, blocks)?, base))
    }
}
