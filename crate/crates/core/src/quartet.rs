//! Quartets and the complete/full multipartite quartet system classes.
//!
//! A strict quartet `ab||cd` is the four-leaf tree pairing `a,b` against
//! `c,d`; a weak quartet `ab|cd` additionally allows the star. Complete
//! systems pick exactly one of the three options per cross four-tuple, so
//! only the strict choices are stored; the weak `aa'|bb'` option is implied
//! wherever no strict quartet is recorded.

use std::collections::HashSet;

use thiserror::Error;

use crate::taxa::{Taxon, TaxonPartition, TaxonSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuartetKind {
    Strict,
    Weak,
}

/// A quartet on four distinct taxa, canonicalized so that value equality is
/// invariant under swaps within each pair and of the two pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quartet {
    pairs: [[Taxon; 2]; 2],
    kind: QuartetKind,
}

impl Quartet {
    pub fn new(kind: QuartetKind, a: Taxon, b: Taxon, c: Taxon, d: Taxon) -> Self {
        assert!(a != b && a != c && a != d && b != c && b != d && c != d);
        let p1 = [a.min(b), a.max(b)];
        let p2 = [c.min(d), c.max(d)];
        let pairs = if p1[0] < p2[0] { [p1, p2] } else { [p2, p1] };
        Quartet { pairs, kind }
    }

    pub fn strict(a: Taxon, b: Taxon, c: Taxon, d: Taxon) -> Self {
        Self::new(QuartetKind::Strict, a, b, c, d)
    }

    pub fn weak(a: Taxon, b: Taxon, c: Taxon, d: Taxon) -> Self {
        Self::new(QuartetKind::Weak, a, b, c, d)
    }

    pub fn kind(&self) -> QuartetKind {
        self.kind
    }

    pub fn pair1(&self) -> [Taxon; 2] {
        self.pairs[0]
    }

    pub fn pair2(&self) -> [Taxon; 2] {
        self.pairs[1]
    }

    pub fn taxa(&self) -> [Taxon; 4] {
        [
            self.pairs[0][0],
            self.pairs[0][1],
            self.pairs[1][0],
            self.pairs[1][1],
        ]
    }

    pub fn as_strict(&self) -> Self {
        Quartet {
            pairs: self.pairs,
            kind: QuartetKind::Strict,
        }
    }

    pub fn as_weak(&self) -> Self {
        Quartet {
            pairs: self.pairs,
            kind: QuartetKind::Weak,
        }
    }
}

/// Which of the three options a cross four-tuple takes, phrased relative to
/// a query `(a, a', b, b')` with `a, a'` in one block and `b, b'` in another.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tri {
    /// `ab || a'b'`
    First,
    /// `ab' || a'b`
    Second,
    /// `aa' | bb'`
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("quartet {0} is not a cross quartet of the partition")]
    NotCrossShaped(String),
    #[error("conflicting quartets on taxa {0}")]
    Conflict(String),
    #[error("quartet {0} uses taxa outside the system's universe")]
    OutOfUniverse(String),
    #[error("bipartite system needs two blocks, found {0}")]
    NotBipartite(usize),
    #[error("weak quartet {0} contradicts a recorded strict quartet")]
    WeakConflict(String),
    #[error("full system needs at least 4 taxa, found {0}")]
    TooFewTaxa(usize),
}

fn quartet_str(q: &Quartet) -> String {
    let [a, b] = q.pair1();
    let [c, d] = q.pair2();
    let sep = match q.kind() {
        QuartetKind::Strict => "||",
        QuartetKind::Weak => "|",
    };
    format!("{a} {b} {sep} {c} {d}")
}

/// A complete A-partite quartet system: for every pair of blocks and every
/// cross four-tuple, exactly one of the three options of the completeness
/// equation holds. Only strict choices are stored.
#[derive(Clone, Debug)]
pub struct CompleteSystem {
    partition: TaxonPartition,
    strict: HashSet<Quartet>,
}

impl CompleteSystem {
    /// Build from explicit quartets. Weak quartets are validated against the
    /// implied-weak convention and dropped; listing two strict quartets on
    /// one cross tuple is a conflict.
    pub fn new(partition: TaxonPartition, quartets: &[Quartet]) -> Result<Self, SystemError> {
        let mut strict = HashSet::new();
        for q in quartets {
            match q.kind() {
                QuartetKind::Strict => {
                    check_cross_shape(&partition, q, true)?;
                    let rival = Quartet::strict(
                        q.pair1()[0],
                        q.pair2()[1],
                        q.pair1()[1],
                        q.pair2()[0],
                    );
                    if strict.contains(&rival) {
                        return Err(SystemError::Conflict(quartet_str(q)));
                    }
                    strict.insert(*q);
                }
                QuartetKind::Weak => {
                    check_cross_shape(&partition, q, false)?;
                }
            }
        }
        // Weak entries must not clash with a strict choice on the same tuple.
        for q in quartets.iter().filter(|q| q.kind() == QuartetKind::Weak) {
            let [a, ap] = q.pair1();
            let [b, bp] = q.pair2();
            if strict.contains(&Quartet::strict(a, b, ap, bp))
                || strict.contains(&Quartet::strict(a, bp, ap, b))
            {
                return Err(SystemError::WeakConflict(quartet_str(q)));
            }
        }
        Ok(CompleteSystem { partition, strict })
    }

    pub fn from_strict(partition: TaxonPartition, strict: HashSet<Quartet>) -> Result<Self, SystemError> {
        let qs: Vec<Quartet> = strict.iter().copied().collect();
        Self::new(partition, &qs)
    }

    pub fn partition(&self) -> &TaxonPartition {
        &self.partition
    }

    pub fn strict_quartets(&self) -> &HashSet<Quartet> {
        &self.strict
    }

    /// Resolve the trichotomy for a cross tuple: which of `ab||a'b'`,
    /// `ab'||a'b`, `aa'|bb'` the system contains.
    pub fn tri(&self, a: Taxon, ap: Taxon, b: Taxon, bp: Taxon) -> Tri {
        if self.strict.contains(&Quartet::strict(a, b, ap, bp)) {
            Tri::First
        } else if self.strict.contains(&Quartet::strict(a, bp, ap, b)) {
            Tri::Second
        } else {
            Tri::Neutral
        }
    }

    /// All quartets, with the implied weak choices made explicit.
    pub fn all_quartets(&self) -> Vec<Quartet> {
        let p = &self.partition;
        let mut out = Vec::new();
        for i in 0..p.num_blocks() {
            for j in (i + 1)..p.num_blocks() {
                let ai = p.block(i).to_vec();
                let aj = p.block(j).to_vec();
                for_cross_tuples(&ai, &aj, |a, ap, b, bp| {
                    out.push(match self.tri(a, ap, b, bp) {
                        Tri::First => Quartet::strict(a, b, ap, bp),
                        Tri::Second => Quartet::strict(a, bp, ap, b),
                        Tri::Neutral => Quartet::weak(a, ap, b, bp),
                    });
                });
            }
        }
        out
    }

    /// The sub-system on the blocks in `keep`.
    pub fn restrict(&self, keep: &[usize]) -> CompleteSystem {
        let sub = self
            .partition
            .restrict_blocks(keep)
            .expect("restriction of a valid partition");
        let strict = self
            .strict
            .iter()
            .filter(|q| q.taxa().iter().all(|&t| sub.support().contains(t)))
            .copied()
            .collect();
        CompleteSystem {
            partition: sub,
            strict,
        }
    }

    /// Whether `family` (sets over the same id space) displays this system:
    /// per cross tuple, the strict quartet is present iff some member
    /// separates its two pairs. Returns the first violating tuple, if any.
    pub fn family_display_violation(&self, family: &[TaxonSet]) -> Option<(Taxon, Taxon, Taxon, Taxon)> {
        let p = &self.partition;
        let idx = FamilyIndex::new(p.n_ids(), family);
        let mut witness = None;
        'outer: for i in 0..p.num_blocks() {
            for j in (i + 1)..p.num_blocks() {
                let ai = p.block(i).to_vec();
                let aj = p.block(j).to_vec();
                for_cross_tuples_until(&ai, &aj, |a, ap, b, bp| {
                    let sep1 = idx.separates(a, b, ap, bp);
                    let sep2 = idx.separates(a, bp, ap, b);
                    let ok = match self.tri(a, ap, b, bp) {
                        Tri::First => sep1 && !sep2,
                        Tri::Second => sep2 && !sep1,
                        Tri::Neutral => !sep1 && !sep2,
                    };
                    if !ok {
                        witness = Some((a, ap, b, bp));
                        true
                    } else {
                        false
                    }
                });
                if witness.is_some() {
                    break 'outer;
                }
            }
        }
        witness
    }

    /// The unique complete system displayed by `family`, or a conflict when
    /// some cross tuple is separated both ways (only non-laminar families
    /// can do that).
    pub fn from_family(partition: TaxonPartition, family: &[TaxonSet]) -> Result<Self, SystemError> {
        let idx = FamilyIndex::new(partition.n_ids(), family);
        let mut strict = HashSet::new();
        let mut conflict = None;
        for i in 0..partition.num_blocks() {
            for j in (i + 1)..partition.num_blocks() {
                let ai = partition.block(i).to_vec();
                let aj = partition.block(j).to_vec();
                for_cross_tuples_until(&ai, &aj, |a, ap, b, bp| {
                    let sep1 = idx.separates(a, b, ap, bp);
                    let sep2 = idx.separates(a, bp, ap, b);
                    if sep1 && sep2 {
                        conflict = Some(Quartet::strict(a, b, ap, bp));
                        return true;
                    }
                    if sep1 {
                        strict.insert(Quartet::strict(a, b, ap, bp));
                    } else if sep2 {
                        strict.insert(Quartet::strict(a, bp, ap, b));
                    }
                    false
                });
            }
        }
        if let Some(q) = conflict {
            return Err(SystemError::Conflict(quartet_str(&q)));
        }
        Ok(CompleteSystem { partition, strict })
    }

    pub fn displayed_by_family(&self, family: &[TaxonSet]) -> bool {
        self.family_display_violation(family).is_none()
    }
}

/// `x` separates the pair `{a,b}` from `{c,d}`: both of one pair inside,
/// both of the other outside (in either orientation).
pub fn separates(x: &TaxonSet, a: Taxon, b: Taxon, c: Taxon, d: Taxon) -> bool {
    let (ia, ib, ic, id) = (x.contains(a), x.contains(b), x.contains(c), x.contains(d));
    (ia && ib && !ic && !id) || (!ia && !ib && ic && id)
}

/// Transposed view of a set family: one bit row per taxon, one bit per
/// member, so a separation query over the whole family is a few word ops.
pub struct FamilyIndex {
    nwords: usize,
    rows: Vec<Vec<u64>>,
}

impl FamilyIndex {
    pub fn new(n: u32, family: &[TaxonSet]) -> FamilyIndex {
        let nwords = family.len().div_ceil(64);
        let mut rows = vec![vec![0u64; nwords]; n as usize];
        for (k, x) in family.iter().enumerate() {
            for t in x.iter() {
                rows[t as usize][k / 64] |= 1 << (k % 64);
            }
        }
        FamilyIndex { nwords, rows }
    }

    /// Whether any member separates `{a,b}` from `{c,d}`.
    pub fn separates(&self, a: Taxon, b: Taxon, c: Taxon, d: Taxon) -> bool {
        let (ra, rb) = (&self.rows[a as usize], &self.rows[b as usize]);
        let (rc, rd) = (&self.rows[c as usize], &self.rows[d as usize]);
        for w in 0..self.nwords {
            if (ra[w] & rb[w] & !rc[w] & !rd[w]) | (rc[w] & rd[w] & !ra[w] & !rb[w]) != 0 {
                return true;
            }
        }
        false
    }
}

/// Visit every cross four-tuple `(a, a', b, b')` with `a < a'` from one
/// block list and `b < b'` from the other.
pub fn for_cross_tuples(ai: &[Taxon], aj: &[Taxon], mut f: impl FnMut(Taxon, Taxon, Taxon, Taxon)) {
    for_cross_tuples_until(ai, aj, |a, ap, b, bp| {
        f(a, ap, b, bp);
        false
    });
}

/// Like [`for_cross_tuples`] but stops when the callback returns `true`.
pub fn for_cross_tuples_until(
    ai: &[Taxon],
    aj: &[Taxon],
    mut f: impl FnMut(Taxon, Taxon, Taxon, Taxon) -> bool,
) {
    for x in 0..ai.len() {
        for y in (x + 1)..ai.len() {
            for u in 0..aj.len() {
                for v in (u + 1)..aj.len() {
                    if f(ai[x], ai[y], aj[u], aj[v]) {
                        return;
                    }
                }
            }
        }
    }
}

fn check_cross_shape(p: &TaxonPartition, q: &Quartet, strict: bool) -> Result<(), SystemError> {
    for t in q.taxa() {
        if !p.support().contains(t) {
            return Err(SystemError::OutOfUniverse(quartet_str(q)));
        }
    }
    let [a, b] = q.pair1();
    let [c, d] = q.pair2();
    let (ba, bb, bc, bd) = (
        p.block_of(a).unwrap(),
        p.block_of(b).unwrap(),
        p.block_of(c).unwrap(),
        p.block_of(d).unwrap(),
    );
    let ok = if strict {
        // ab||cd cross form: each pair takes one taxon from each of two blocks.
        ba != bb && ((ba, bb) == (bc, bd) || (ba, bb) == (bd, bc))
    } else {
        // aa'|bb' form: each pair within a single block, blocks distinct.
        ba == bb && bc == bd && ba != bc
    };
    if ok {
        Ok(())
    } else {
        Err(SystemError::NotCrossShaped(quartet_str(q)))
    }
}

/// A full quartet system on a taxon set: each four-subset carries either
/// exactly one strict quartet or (implicitly) all three weak quartets.
#[derive(Clone, Debug)]
pub struct FullSystem {
    taxa: TaxonSet,
    strict: HashSet<Quartet>,
}

impl FullSystem {
    pub fn new(taxa: TaxonSet, quartets: &[Quartet]) -> Result<Self, SystemError> {
        let mut strict: HashSet<Quartet> = HashSet::new();
        for q in quartets {
            for t in q.taxa() {
                if !taxa.contains(t) {
                    return Err(SystemError::OutOfUniverse(quartet_str(q)));
                }
            }
            if q.kind() == QuartetKind::Strict {
                let [a, b] = q.pair1();
                let [c, d] = q.pair2();
                for rival in [Quartet::strict(a, c, b, d), Quartet::strict(a, d, b, c)] {
                    if strict.contains(&rival) {
                        return Err(SystemError::Conflict(quartet_str(q)));
                    }
                }
                strict.insert(*q);
            }
        }
        // Weak entries only conflict when a different pairing is strict.
        for q in quartets.iter().filter(|q| q.kind() == QuartetKind::Weak) {
            let [a, b] = q.pair1();
            let [c, d] = q.pair2();
            for rival in [Quartet::strict(a, c, b, d), Quartet::strict(a, d, b, c)] {
                if strict.contains(&rival) {
                    return Err(SystemError::WeakConflict(quartet_str(q)));
                }
            }
        }
        Ok(FullSystem { taxa, strict })
    }

    pub fn empty(taxa: TaxonSet) -> Self {
        FullSystem {
            taxa,
            strict: HashSet::new(),
        }
    }

    pub fn taxa(&self) -> &TaxonSet {
        &self.taxa
    }

    pub fn strict_quartets(&self) -> &HashSet<Quartet> {
        &self.strict
    }

    /// The strict pairing on `{a,b,c,d}`, if any.
    pub fn resolution(&self, a: Taxon, b: Taxon, c: Taxon, d: Taxon) -> Option<Quartet> {
        for q in [
            Quartet::strict(a, b, c, d),
            Quartet::strict(a, c, b, d),
            Quartet::strict(a, d, b, c),
        ] {
            if self.strict.contains(&q) {
                return Some(q);
            }
        }
        None
    }

    /// All quartets, with implied weak triples made explicit.
    pub fn all_quartets(&self) -> Vec<Quartet> {
        let ts = self.taxa.to_vec();
        let mut out = Vec::new();
        for_four_subsets(&ts, |a, b, c, d| match self.resolution(a, b, c, d) {
            Some(q) => out.push(q),
            None => {
                out.push(Quartet::weak(a, b, c, d));
                out.push(Quartet::weak(a, c, b, d));
                out.push(Quartet::weak(a, d, b, c));
            }
        });
        out
    }

    /// Display check against a family of sets, per the (i) <=> (ii)
    /// separation condition applied to every four-subset.
    pub fn family_display_violation(&self, family: &[TaxonSet]) -> Option<(Taxon, Taxon, Taxon, Taxon)> {
        let idx = FamilyIndex::new(self.taxa.universe(), family);
        let ts = self.taxa.to_vec();
        let mut witness = None;
        for_four_subsets_until(&ts, |a, b, c, d| {
            let pairings = [
                Quartet::strict(a, b, c, d),
                Quartet::strict(a, c, b, d),
                Quartet::strict(a, d, b, c),
            ];
            for q in pairings {
                let [x, y] = q.pair1();
                let [u, v] = q.pair2();
                let sep = idx.separates(x, y, u, v);
                if sep != self.strict.contains(&q) {
                    witness = Some((a, b, c, d));
                    return true;
                }
            }
            false
        });
        witness
    }

    /// The unique full system displayed by `family`; conflicts arise only
    /// for non-laminar families.
    pub fn from_family(taxa: TaxonSet, family: &[TaxonSet]) -> Result<Self, SystemError> {
        let idx = FamilyIndex::new(taxa.universe(), family);
        let ts = taxa.to_vec();
        let mut strict = HashSet::new();
        let mut conflict = None;
        for_four_subsets_until(&ts, |a, b, c, d| {
            let mut hit = None;
            for q in [
                Quartet::strict(a, b, c, d),
                Quartet::strict(a, c, b, d),
                Quartet::strict(a, d, b, c),
            ] {
                let [x, y] = q.pair1();
                let [u, v] = q.pair2();
                if idx.separates(x, y, u, v) {
                    if hit.is_some() {
                        conflict = Some(q);
                        return true;
                    }
                    hit = Some(q);
                }
            }
            if let Some(q) = hit {
                strict.insert(q);
            }
            false
        });
        if let Some(q) = conflict {
            return Err(SystemError::Conflict(quartet_str(&q)));
        }
        Ok(FullSystem { taxa, strict })
    }

    pub fn displayed_by_family(&self, family: &[TaxonSet]) -> bool {
        self.family_display_violation(family).is_none()
    }
}

/// Visit every four-subset of `ts` as `(a, b, c, d)` with `a < b < c < d`.
pub fn for_four_subsets(ts: &[Taxon], mut f: impl FnMut(Taxon, Taxon, Taxon, Taxon)) {
    for_four_subsets_until(ts, |a, b, c, d| {
        f(a, b, c, d);
        false
    });
}

pub fn for_four_subsets_until(ts: &[Taxon], mut f: impl FnMut(Taxon, Taxon, Taxon, Taxon) -> bool) {
    let m = ts.len();
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                for l in (k + 1)..m {
                    if f(ts[i], ts[j], ts[k], ts[l]) {
                        return;
                    }
                }
            }
        }
    }
}

/// A full A-partite quartet system: a complete cross system plus one full
/// system per block.
#[derive(Clone, Debug)]
pub struct FullMultipartiteSystem {
    cross: CompleteSystem,
    within: Vec<FullSystem>,
}

impl FullMultipartiteSystem {
    pub fn new(cross: CompleteSystem, within: Vec<FullSystem>) -> Result<Self, SystemError> {
        assert_eq!(within.len(), cross.partition().num_blocks());
        for (i, w) in within.iter().enumerate() {
            if w.taxa() != cross.partition().block(i) {
                return Err(SystemError::TooFewTaxa(w.taxa().len()));
            }
        }
        Ok(FullMultipartiteSystem { cross, within })
    }

    pub fn cross(&self) -> &CompleteSystem {
        &self.cross
    }

    pub fn within(&self) -> &[FullSystem] {
        &self.within
    }

    pub fn partition(&self) -> &TaxonPartition {
        self.cross.partition()
    }

    pub fn all_quartets(&self) -> Vec<Quartet> {
        let mut out = self.cross.all_quartets();
        for w in &self.within {
            out.extend(w.all_quartets());
        }
        out
    }

    /// The unique full A-partite system displayed by `family`.
    pub fn from_family(partition: TaxonPartition, family: &[TaxonSet]) -> Result<Self, SystemError> {
        let within = partition
            .blocks()
            .iter()
            .map(|b| FullSystem::from_family(b.clone(), family))
            .collect::<Result<Vec<_>, _>>()?;
        let cross = CompleteSystem::from_family(partition, family)?;
        Ok(FullMultipartiteSystem { cross, within })
    }
}
