//! A-cuts, weak A-cuts, and the equivalences that identify sets displaying
//! the same quartets.
//!
//! For `X ⊆ [n]`, `avg(X)` ("⟨X⟩") is the union of all blocks X straddles.
//! Two cuts are equivalent exactly when they have the same footprint of
//! straddled blocks and the same unordered side pair on it — anything X does
//! outside ⟨X⟩ (containing or avoiding whole blocks) is invisible to the
//! displayed system.

use crate::taxa::{TaxonPartition, TaxonSet};

/// Union of the blocks that `x` straddles.
pub fn avg(x: &TaxonSet, p: &TaxonPartition) -> TaxonSet {
    p.blocks_union(p.footprint(x))
}

/// Canonical form of an (A-)cut up to ∼ (resp. ≈ for weak cuts): the
/// straddled-block footprint plus the unordered side pair on ⟨X⟩. The side
/// containing the smallest taxon of ⟨X⟩ is stored first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CutClass {
    footprint: u128,
    side1: TaxonSet,
    side2: TaxonSet,
}

impl CutClass {
    /// Classify `x`. Returns `None` when `x` is not an A-cut (`x ∼ ∅`) —
    /// or, with `weak`, not a weak A-cut (`x ≈ ∅`).
    pub fn of(x: &TaxonSet, p: &TaxonPartition, weak: bool) -> Option<CutClass> {
        let footprint = p.footprint(x);
        let k = footprint.count_ones();
        let inner = p.blocks_union(footprint).intersect(x);
        let outer = p.blocks_union(footprint).difference(&inner);
        let is_cut = k >= 2 || (weak && k == 1 && inner.len() >= 2 && outer.len() >= 2);
        if !is_cut {
            return None;
        }
        Some(Self::from_sides(footprint, inner, outer))
    }

    /// Build directly from a side pair covering exactly the blocks of
    /// `footprint` (used by the extension step, which assembles cuts from
    /// per-block-pair fragments).
    pub fn from_sides(footprint: u128, a: TaxonSet, b: TaxonSet) -> CutClass {
        debug_assert!(a.is_disjoint(&b));
        let (side1, side2) = match (a.first(), b.first()) {
            (Some(ma), Some(mb)) if mb < ma => (b, a),
            _ => (a, b),
        };
        CutClass {
            footprint,
            side1,
            side2,
        }
    }

    pub fn footprint(&self) -> u128 {
        self.footprint
    }

    pub fn is_weak_only(&self) -> bool {
        self.footprint.count_ones() == 1
    }

    /// ⟨X⟩ as a set.
    pub fn avg_set(&self) -> TaxonSet {
        self.side1.union(&self.side2)
    }

    pub fn sides(&self) -> (&TaxonSet, &TaxonSet) {
        (&self.side1, &self.side2)
    }

    /// The canonical representative: the primary side itself (a subset of
    /// ⟨X⟩, containing ⟨X⟩'s smallest taxon).
    pub fn representative(&self) -> &TaxonSet {
        &self.side1
    }

    /// Whether `{X}` separates pair `{a,b}` from `{c,d}` for some (hence
    /// every) representative of this class.
    pub fn separates(&self, a: u32, b: u32, c: u32, d: u32) -> bool {
        crate::quartet::separates(&self.side1, a, b, c, d)
            || crate::quartet::separates(&self.side2, a, b, c, d)
    }

    /// ∼_R (resp. ≈ restricted): unordered side pairs restricted to the
    /// blocks in `r_mask` coincide.
    pub fn equiv_restricted(&self, other: &CutClass, p: &TaxonPartition, r_mask: u128) -> bool {
        let ar = p.blocks_union(r_mask);
        let (x1, x2) = (self.side1.intersect(&ar), self.side2.intersect(&ar));
        let (y1, y2) = (other.side1.intersect(&ar), other.side2.intersect(&ar));
        (x1 == y1 && x2 == y2) || (x1 == y2 && x2 == y1)
    }

    /// X ≺ Y: strictly smaller footprint, and Y agrees with X's side pair on
    /// ⟨X⟩ (so `{Y}` displays everything `{X}` does).
    pub fn precedes(&self, other: &CutClass, p: &TaxonPartition) -> bool {
        if self.footprint & other.footprint != self.footprint
            || self.footprint == other.footprint
        {
            return false;
        }
        self.equiv_restricted(other, p, self.footprint)
    }

    pub fn precedes_eq(&self, other: &CutClass, p: &TaxonPartition) -> bool {
        self == other || self.precedes(other, p)
    }
}

/// ∼ (or ≈) on raw sets: same class, where non-cuts are equivalent to ∅
/// only among themselves.
pub fn equiv(x: &TaxonSet, y: &TaxonSet, p: &TaxonPartition, weak: bool) -> bool {
    CutClass::of(x, p, weak) == CutClass::of(y, p, weak)
}

/// ∼_R on raw sets, literally per the definition (compares the side pairs
/// on ⟨X⟩ ∩ A_R and ⟨Y⟩ ∩ A_R).
pub fn equiv_restricted(x: &TaxonSet, y: &TaxonSet, p: &TaxonPartition, r_mask: u128) -> bool {
    let ar = p.blocks_union(r_mask);
    let avg_x_r = avg(x, p).intersect(&ar);
    let avg_y_r = avg(y, p).intersect(&ar);
    let (x1, x2) = (avg_x_r.intersect(x), avg_x_r.difference(x));
    let (y1, y2) = (avg_y_r.intersect(y), avg_y_r.difference(y));
    (x1 == y1 && x2 == y2) || (x1 == y2 && x2 == y1)
}

/// One class per ∼-equivalence class (≈ with `weak`), first occurrence
/// order; sets that are not (weak) A-cuts are dropped.
pub fn dedup_classes(family: &[TaxonSet], p: &TaxonPartition, weak: bool) -> Vec<CutClass> {
    let mut out: Vec<CutClass> = Vec::new();
    for x in family {
        if let Some(c) = CutClass::of(x, p, weak) {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    // Worked-example universe: blocks {a,b,c}, {d,e}, {f,g}, {h,i} with
    // a..i = 0..8.
    fn ex_partition() -> TaxonPartition {
        TaxonPartition::new(
            "abcdefghi".chars().map(|c| c.to_string()).collect(),
            vec![vec![0, 1, 2], vec![3, 4], vec![5, 6], vec![7, 8]],
        )
        .unwrap()
    }

    #[test]
    fn avg_basics() {
        let p = ex_partition();
        // {d,i} straddles A2 and A4
        assert_eq!(
            avg(&TaxonSet::from_taxa(9, [3, 8]), &p),
            TaxonSet::from_taxa(9, [3, 4, 7, 8])
        );
        assert!(avg(&TaxonSet::empty(9), &p).is_empty());
        // a whole block straddles nothing
        assert!(avg(&TaxonSet::from_taxa(9, [0, 1, 2]), &p).is_empty());
    }

    #[test]
    fn equivalence_pins() {
        let p = ex_partition();
        // {d,i} ∼ {a,b,c,d,f,g,i}
        let x = TaxonSet::from_taxa(9, [3, 8]);
        let y = TaxonSet::from_taxa(9, [0, 1, 2, 3, 5, 6, 8]);
        assert_eq!(CutClass::of(&x, &p, false), CutClass::of(&y, &p, false));
        // {g,h} ∼ {f,i}: footprint {A3,A4}, side pair {{g,h},{f,i}}
        let gh = TaxonSet::from_taxa(9, [6, 7]);
        let fi = TaxonSet::from_taxa(9, [5, 8]);
        assert_eq!(CutClass::of(&gh, &p, false), CutClass::of(&fi, &p, false));
        // ... while {g,h} ≁ {e,i} (footprints {A3,A4} vs {A2,A4})
        let ei = TaxonSet::from_taxa(9, [4, 8]);
        assert_ne!(CutClass::of(&gh, &p, false), CutClass::of(&ei, &p, false));
    }

    #[test]
    fn complement_equivalent() {
        let p = ex_partition();
        let x = TaxonSet::from_taxa(9, [0, 3, 6]);
        let xc = x.complement();
        assert!(equiv(&x, &xc, &p, false));
    }

    #[test]
    fn not_a_cut() {
        let p = ex_partition();
        // A1 ∪ {d}: only A2 straddled
        let x = TaxonSet::from_taxa(9, [0, 1, 2, 3]);
        assert!(CutClass::of(&x, &p, false).is_none());
        // ... but it is not weak either: one side of A2 is a singleton
        assert!(CutClass::of(&x, &p, true).is_none());
        // {a,b} within A1 is a weak cut candidate only if both sides ≥ 2
        let ab = TaxonSet::from_taxa(9, [0, 1]);
        assert!(CutClass::of(&ab, &p, false).is_none());
        assert!(CutClass::of(&ab, &p, true).is_none()); // |A1 \ {a,b}| = 1
    }

    #[test]
    fn weak_cut_within_block() {
        let p = TaxonPartition::with_default_names(6, vec![vec![0, 1, 2, 3], vec![4, 5]]).unwrap();
        let x = TaxonSet::from_taxa(6, [0, 1]);
        assert!(CutClass::of(&x, &p, false).is_none());
        let c = CutClass::of(&x, &p, true).unwrap();
        assert!(c.is_weak_only());
        // within-block class equals its in-block complement's class
        let y = TaxonSet::from_taxa(6, [2, 3]);
        assert_eq!(Some(c), CutClass::of(&y, &p, true));
    }

    #[test]
    fn restricted_equivalence_example() {
        // X = {a,g}, Y = {a,b,d,g}, R = {A1}: sides on A1 are {{a},{b,c}} vs
        // {{a,b},{c}} — not ∼_R.
        let p = ex_partition();
        let x = TaxonSet::from_taxa(9, [0, 6]);
        let y = TaxonSet::from_taxa(9, [0, 1, 3, 6]);
        assert!(!equiv_restricted(&x, &y, &p, 0b0001));
        // but on R = {A3} both give {{g},{f}}
        assert!(equiv_restricted(&x, &y, &p, 0b0100));
    }

    #[test]
    fn precedes_basics() {
        let p = ex_partition();
        // X = {a,g} (footprint {A1,A3}) ≺ Y = {a,g,d,h}? Y has footprint
        // {A1,A2,A3,A4} and agrees with X on A1∪A3.
        let x = CutClass::of(&TaxonSet::from_taxa(9, [0, 6]), &p, false).unwrap();
        let y = CutClass::of(&TaxonSet::from_taxa(9, [0, 3, 6, 7]), &p, false).unwrap();
        assert!(x.precedes(&y, &p));
        assert!(!y.precedes(&x, &p));
        assert!(!x.precedes(&x, &p));
        assert!(x.precedes_eq(&x, &p));
        // disagreeing sides: Z = {b,g,d,h} does not extend X
        let z = CutClass::of(&TaxonSet::from_taxa(9, [1, 3, 6, 7]), &p, false).unwrap();
        assert!(!x.precedes(&z, &p));
    }

    #[test]
    fn dedup_preserves_order() {
        let p = ex_partition();
        let fam = vec![
            TaxonSet::from_taxa(9, [3, 8]),
            TaxonSet::from_taxa(9, [0, 1, 2, 3, 5, 6, 8]),
            TaxonSet::from_taxa(9, [6, 7]),
        ];
        let classes = dedup_classes(&fam, &p, false);
        assert_eq!(classes.len(), 2);
        assert_eq!(
            classes[0],
            CutClass::of(&TaxonSet::from_taxa(9, [3, 8]), &p, false).unwrap()
        );
        assert!(dedup_classes(&[], &p, false).is_empty());
    }
}
