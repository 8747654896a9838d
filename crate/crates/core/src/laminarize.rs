//! The laminarization phase: search each cut class for a representative so
//! that the chosen representatives form a laminar family, which is exactly
//! when the displayed system comes from a tree.
//!
//! A class representative is determined by an orientation bit (which side is
//! "in") plus one inclusion bit per non-straddled block (taken wholly or not
//! at all); the space is closed under complementation within the support, so
//! searching for a strictly laminar (nested-or-disjoint) selection loses no
//! solutions. The search is a lexicographic backtracking over those bits, so
//! the result is deterministic in the class order.

use crate::cuts::CutClass;
use crate::taxa::{TaxonPartition, TaxonSet};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LaminarizeError {
    /// Two input classes are equivalent; callers must dedup first.
    #[error("duplicate cut class in laminarization input")]
    DuplicateClass,
    /// No choice of representatives is laminar — the system is displayed but
    /// by no tree.
    #[error("cut family admits no laminar representatives")]
    NotLaminarizable,
}

/// All representatives of `c`, lexicographically by (orientation, inclusion
/// bits in ascending block order).
fn candidates(c: &CutClass, p: &TaxonPartition) -> Vec<TaxonSet> {
    let free: Vec<usize> = (0..p.num_blocks())
        .filter(|i| c.footprint() & (1u128 << i) == 0)
        .collect();
    let (s1, s2) = c.sides();
    let mut out = Vec::with_capacity(2 << free.len());
    for side in [s1, s2] {
        for mask in 0u64..(1u64 << free.len()) {
            let mut set = side.clone();
            for (j, &b) in free.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    set.union_with(p.block(b));
                }
            }
            out.push(set);
        }
    }
    out
}

/// Number of free bits the search branches on, summed over the classes
/// (callers cap this before invoking the exhaustive paths).
pub fn free_bits(classes: &[CutClass], p: &TaxonPartition) -> u32 {
    classes
        .iter()
        .map(|c| 1 + p.num_blocks() as u32 - c.footprint().count_ones())
        .sum()
}

fn dfs(
    classes: &[CutClass],
    p: &TaxonPartition,
    chosen: &mut Vec<TaxonSet>,
) -> bool {
    let idx = chosen.len();
    if idx == classes.len() {
        return true;
    }
    for cand in candidates(&classes[idx], p) {
        if chosen.iter().all(|s| s.laminar_with(&cand)) {
            chosen.push(cand);
            if dfs(classes, p, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Pick one representative per class so the result is laminar; errs with
/// [`LaminarizeError::NotLaminarizable`] when impossible. Handles weak
/// (within-block) classes directly. Output order matches input order.
pub fn laminarize(
    classes: &[CutClass],
    p: &TaxonPartition,
) -> Result<Vec<TaxonSet>, LaminarizeError> {
    for (i, c) in classes.iter().enumerate() {
        if classes[..i].contains(c) {
            return Err(LaminarizeError::DuplicateClass);
        }
    }
    let mut chosen = Vec::with_capacity(classes.len());
    if dfs(classes, p, &mut chosen) {
        Ok(chosen)
    } else {
        Err(LaminarizeError::NotLaminarizable)
    }
}

/// The gadget reduction to the no-weak-cuts case: one fresh two-taxon block
/// per class, whose first taxon is adjoined to the class's primary side.
/// Returns the extended partition, the lifted classes, and the original
/// universe size.
pub fn gadget_family(
    classes: &[CutClass],
    p: &TaxonPartition,
) -> (TaxonPartition, Vec<CutClass>, u32) {
    let n = p.n_ids();
    let (p2, base) = p
        .with_gadget_blocks(classes.len())
        .expect("gadget extension of a valid partition");
    let lifted = classes
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let mut x = c.representative().resized(p2.n_ids());
            x.insert(base + 2 * k as u32);
            CutClass::of(&x, &p2, false).expect("lifted set straddles its gadget block")
        })
        .collect();
    (p2, lifted, n)
}

/// Laminarize a weak cut family via the gadget reduction: lift, solve the
/// purely-strict instance, and strip the gadget taxa. Agrees with
/// [`laminarize`] on feasibility, and the stripped sets are representatives
/// of the original classes.
pub fn full_laminarize(
    classes: &[CutClass],
    p: &TaxonPartition,
) -> Result<Vec<TaxonSet>, LaminarizeError> {
    for (i, c) in classes.iter().enumerate() {
        if classes[..i].contains(c) {
            return Err(LaminarizeError::DuplicateClass);
        }
    }
    if classes.len() > 2 * p.support_len() {
        return Err(LaminarizeError::NotLaminarizable);
    }
    let (p2, lifted, n) = gadget_family(classes, p);
    let solved = laminarize(&lifted, &p2)?;
    Ok(solved.iter().map(|s| s.truncated(n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex_partition() -> TaxonPartition {
        TaxonPartition::new(
            "abcdefghi".chars().map(|c| c.to_string()).collect(),
            vec![vec![0, 1, 2], vec![3, 4], vec![5, 6], vec![7, 8]],
        )
        .unwrap()
    }

    fn classes_of(fam: &[Vec<u32>], p: &TaxonPartition, weak: bool) -> Vec<CutClass> {
        fam.iter()
            .map(|ts| {
                CutClass::of(&TaxonSet::from_taxa(p.n_ids(), ts.iter().copied()), p, weak).unwrap()
            })
            .collect()
    }

    #[test]
    fn worked_example_laminarizes() {
        let p = ex_partition();
        // the displaying classes: {a,b,d,g}, {a,g}, {d,i}, {g,h}
        let classes = classes_of(
            &[vec![0, 1, 3, 6], vec![0, 6], vec![3, 8], vec![6, 7]],
            &p,
            false,
        );
        let reps = laminarize(&classes, &p).unwrap();
        assert_eq!(reps.len(), 4);
        for (r, c) in reps.iter().zip(&classes) {
            assert_eq!(CutClass::of(r, &p, false).as_ref(), Some(c));
        }
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                assert!(reps[i].laminar_with(&reps[j]));
            }
        }
        // and the known laminar representatives are reachable:
        // {a,b,d,g}, {a,g}, {a,b,c,d,f,g,i} ∼ {d,i}, {f,i} ∼ {g,h}
        let known = classes_of(
            &[vec![0, 1, 3, 6], vec![0, 6], vec![0, 1, 2, 3, 5, 6, 8], vec![5, 8]],
            &p,
            false,
        );
        assert_eq!(classes, known);
    }

    #[test]
    fn witness_triple_not_laminarizable() {
        let p = TaxonPartition::with_default_names(6, vec![vec![0, 1], vec![2, 3], vec![4, 5]])
            .unwrap();
        let classes = classes_of(
            &[vec![0, 2, 5], vec![0, 3, 4], vec![1, 2, 4], vec![0, 2, 4]],
            &p,
            false,
        );
        assert_eq!(
            laminarize(&classes, &p),
            Err(LaminarizeError::NotLaminarizable)
        );
        assert_eq!(
            full_laminarize(&classes, &p),
            Err(LaminarizeError::NotLaminarizable)
        );
    }

    #[test]
    fn duplicates_rejected() {
        let p = ex_partition();
        // {d,i} and an equivalent set
        let classes = classes_of(&[vec![3, 8], vec![0, 1, 2, 3, 5, 6, 8]], &p, false);
        assert_eq!(
            laminarize(&classes, &p),
            Err(LaminarizeError::DuplicateClass)
        );
    }

    #[test]
    fn weak_classes_direct_and_gadget() {
        let p =
            TaxonPartition::with_default_names(6, vec![vec![0, 1, 2, 3], vec![4, 5]]).unwrap();
        let mut classes = classes_of(&[vec![0, 1, 4]], &p, false);
        classes.extend(classes_of(&[vec![0, 1]], &p, true));
        let direct = laminarize(&classes, &p).unwrap();
        let via_gadget = full_laminarize(&classes, &p).unwrap();
        for reps in [&direct, &via_gadget] {
            assert!(reps[0].laminar_with(&reps[1]));
            for (r, c) in reps.iter().zip(&classes) {
                assert_eq!(CutClass::of(r, &p, true).as_ref(), Some(c));
            }
        }
    }

    #[test]
    fn free_bits_count() {
        let p = ex_partition();
        let classes = classes_of(&[vec![0, 6], vec![0, 1, 3, 6]], &p, false);
        // {a,g}: 1 + (4-2); {a,b,d,g}: 1 + (4-3)
        assert_eq!(free_bits(&classes, &p), 5);
    }
}
