//! Reconstruction for full quartet systems (every four-subset carries either
//! one strict quartet or all three weak ones) and the combined solver for
//! full A-partite systems: cross displaying family plus per-block trees,
//! reconciled through the weak-cut classes they share.

use crate::bipartite::{Incompatible, Picker};
use crate::cuts::CutClass;
use crate::multipartite::algorithm4;
use crate::quartet::FullSystem;
use crate::quartet::FullMultipartiteSystem;
use crate::taxa::{Taxon, TaxonSet};

/// Whether `a` and `b` are siblings in every tree displaying `sys`: no
/// resolved quartet separates them. `active` lists the current
/// representatives.
fn siblings(sys: &FullSystem, active: &[Taxon], a: Taxon, b: Taxon) -> bool {
    for (k, &c) in active.iter().enumerate() {
        if c == a || c == b {
            continue;
        }
        for &d in &active[k + 1..] {
            if d == a || d == b {
                continue;
            }
            if let Some(q) = sys.resolution(a, b, c, d) {
                if q.pair1().contains(&a) != q.pair1().contains(&b) {
                    return false;
                }
            }
        }
    }
    true
}

/// Whether every four-subset through the sibling pair `{a,b}` is strictly
/// resolved, i.e. `{a,b}`'s cluster closes off a tree edge right now.
fn all_resolved(sys: &FullSystem, active: &[Taxon], a: Taxon, b: Taxon) -> bool {
    for (k, &c) in active.iter().enumerate() {
        if c == a || c == b {
            continue;
        }
        for &d in &active[k + 1..] {
            if d == a || d == b {
                continue;
            }
            if sys.resolution(a, b, c, d).is_none() {
                return false;
            }
        }
    }
    true
}

/// Reconstruct the internal splits of the unique tree displaying a full
/// system, by repeated sibling contraction. Splits come out as sides (both
/// parts of size >= 2 within the system's taxa); taxa sets smaller than four
/// yield the empty family.
pub fn reconstruct_full(sys: &FullSystem) -> Result<Vec<TaxonSet>, Incompatible> {
    let n = sys.taxa().universe();
    let mut active: Vec<Taxon> = sys.taxa().to_vec();
    let mut cluster: Vec<TaxonSet> = active
        .iter()
        .map(|&t| TaxonSet::singleton(n, t))
        .collect();
    let mut splits: Vec<TaxonSet> = Vec::new();
    while active.len() >= 4 {
        let mut merged = false;
        'search: for i in 0..active.len() {
            for j in (i + 1)..active.len() {
                let (a, b) = (active[i], active[j]);
                if !siblings(sys, &active, a, b) {
                    continue;
                }
                if all_resolved(sys, &active, a, b) {
                    splits.push(cluster[i].union(&cluster[j]));
                }
                let cj = cluster.remove(j);
                cluster[i].union_with(&cj);
                active.remove(j);
                merged = true;
                break 'search;
            }
        }
        if !merged {
            return Err(Incompatible);
        }
    }
    if sys.displayed_by_family(&splits) {
        Ok(splits)
    } else {
        Err(Incompatible)
    }
}

/// The cut-class family (strict and weak) displaying a full A-partite
/// system: the cross displaying family, checked against and completed by the
/// per-block tree splits.
pub fn algorithm5(
    sys: &FullMultipartiteSystem,
    picker: &mut Picker,
) -> Result<Vec<CutClass>, Incompatible> {
    let p = sys.partition();
    let n = p.support_len();

    // Step 1: the cross family and the per-block trees.
    let mut family = algorithm4(sys.cross(), picker)?;
    let block_splits: Vec<Vec<TaxonSet>> = sys
        .within()
        .iter()
        .map(reconstruct_full)
        .collect::<Result<_, _>>()?;

    for (i, splits) in block_splits.iter().enumerate() {
        let block = p.block(i);
        let l_i: Vec<CutClass> = splits
            .iter()
            .map(|s| CutClass::of(s, p, true).expect("block splits are weak cuts"))
            .collect();

        // Step 2: every weak trace the cross family leaves on this block
        // must be one of the block tree's own splits.
        let mut f_i: Vec<CutClass> = Vec::new();
        for c in family.iter() {
            if c.footprint() & (1u128 << i) == 0 {
                continue;
            }
            let (s1, s2) = c.sides();
            let (t1, t2) = (s1.intersect(block), s2.intersect(block));
            if t1.len() >= 2 && t2.len() >= 2 {
                let trace = CutClass::from_sides(1u128 << i, t1, t2);
                if !l_i.contains(&trace) {
                    return Err(Incompatible);
                }
                if !f_i.contains(&trace) {
                    f_i.push(trace);
                }
            }
        }

        // Step 3: adopt the block splits the cross family does not already
        // account for.
        for c in l_i {
            if !f_i.contains(&c) {
                family.push(c);
            }
        }
    }
    if family.len() <= 2 * n {
        Ok(family)
    } else {
        Err(Incompatible)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminarize::laminarize;
    use crate::quartet::Quartet;
    use crate::taxa::TaxonPartition;
    use std::collections::HashSet;

    fn oriented(x: &TaxonSet, taxa: &TaxonSet) -> TaxonSet {
        let zero = taxa.first().unwrap();
        if x.contains(zero) {
            taxa.difference(x)
        } else {
            x.clone()
        }
    }

    fn split_set(splits: &[TaxonSet], taxa: &TaxonSet) -> HashSet<TaxonSet> {
        splits.iter().map(|s| oriented(s, taxa)).collect()
    }

    #[test]
    fn caterpillar_reconstruction() {
        let taxa = TaxonSet::full(6);
        let fam = vec![
            TaxonSet::from_taxa(6, [0, 1]),
            TaxonSet::from_taxa(6, [0, 1, 2]),
            TaxonSet::from_taxa(6, [0, 1, 2, 3]),
        ];
        let sys = FullSystem::from_family(taxa.clone(), &fam).unwrap();
        let splits = reconstruct_full(&sys).unwrap();
        assert_eq!(split_set(&splits, &taxa), split_set(&fam, &taxa));
    }

    #[test]
    fn star_and_multifurcation() {
        let taxa = TaxonSet::full(5);
        assert_eq!(reconstruct_full(&FullSystem::empty(taxa)).unwrap(), vec![]);

        // one internal edge: {0,1,2} vs {3,4,5}
        let taxa = TaxonSet::full(6);
        let fam = vec![TaxonSet::from_taxa(6, [0, 1, 2])];
        let sys = FullSystem::from_family(taxa.clone(), &fam).unwrap();
        let splits = reconstruct_full(&sys).unwrap();
        assert_eq!(split_set(&splits, &taxa), split_set(&fam, &taxa));
    }

    #[test]
    fn incompatible_full_system() {
        // pairwise consistent strict quartets that no 5-leaf tree displays
        let sys = FullSystem::new(
            TaxonSet::full(5),
            &[
                Quartet::strict(0, 1, 2, 3),
                Quartet::strict(0, 2, 3, 4),
                Quartet::strict(0, 3, 1, 4),
            ],
        )
        .unwrap();
        assert_eq!(reconstruct_full(&sys), Err(Incompatible));
    }

    #[test]
    fn full_multipartite_round_trip() {
        // blocks {0..3}, {4,5}; tree splits: {0,1,4} (cross) and {0,1} (weak)
        let p = TaxonPartition::with_default_names(6, vec![vec![0, 1, 2, 3], vec![4, 5]]).unwrap();
        let fam = vec![TaxonSet::from_taxa(6, [0, 1, 4]), TaxonSet::from_taxa(6, [0, 1])];
        let sys = FullMultipartiteSystem::from_family(p.clone(), &fam).unwrap();
        let classes = algorithm5(&sys, &mut Picker::min()).unwrap();
        // the weak split {0,1} is a trace of the cross cut {0,1,4}, which
        // already displays the within-block quartet; the minimal family is
        // the single cross class
        let want: HashSet<CutClass> = [CutClass::of(&fam[0], &p, true).unwrap()]
            .into_iter()
            .collect();
        assert_eq!(classes.iter().cloned().collect::<HashSet<_>>(), want);
        // the laminarized family displays both layers
        let reps = laminarize(&classes, &p).unwrap();
        assert!(sys.cross().displayed_by_family(&reps));
        for w in sys.within() {
            assert!(w.displayed_by_family(&reps));
        }
    }

    #[test]
    fn mismatched_block_trace_rejected() {
        // cross family forces {0,1} within block 1 but the block tree says
        // {0,2}: incompatible
        let p = TaxonPartition::with_default_names(6, vec![vec![0, 1, 2, 3], vec![4, 5]]).unwrap();
        let cross_fam = vec![TaxonSet::from_taxa(6, [0, 1, 4])];
        let cross = crate::quartet::CompleteSystem::from_family(p.clone(), &cross_fam).unwrap();
        let within0 = FullSystem::from_family(
            p.block(0).clone(),
            &[TaxonSet::from_taxa(6, [0, 2])],
        )
        .unwrap();
        let within1 = FullSystem::empty(p.block(1).clone());
        let sys = FullMultipartiteSystem::new(cross, vec![within0, within1]).unwrap();
        assert_eq!(algorithm5(&sys, &mut Picker::min()), Err(Incompatible));
    }
}
