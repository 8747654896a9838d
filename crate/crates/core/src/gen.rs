//! Seeded random instance generation: trees by random leaf insertion, block
//! assignments, systems read off the tree, and controlled noise that flips
//! quartet choices while keeping every instance well-formed.

use crate::quartet::{
    for_cross_tuples, for_four_subsets, CompleteSystem, FullMultipartiteSystem, FullSystem,
    Quartet, Tri,
};
use crate::taxa::{Taxon, TaxonPartition, TaxonSet};
use rand::seq::SliceRandom;
use rand::Rng;

/// A uniformly random attachment-grown tree on taxa `0..n`, as its oriented
/// split family (possibly multifurcating; not uniform over topologies).
pub fn random_tree_splits(n: u32, rng: &mut impl Rng) -> Vec<TaxonSet> {
    assert!(n >= 3);
    let mut fam: Vec<TaxonSet> = Vec::new();
    for k in 3..n {
        let t = k;
        let fam_old: Vec<TaxonSet> = fam.iter().map(|s| s.resized(k + 1)).collect();
        let add_t = |s: &TaxonSet| {
            let mut s = s.clone();
            s.insert(t);
            s
        };
        // options: root node, taxon-0 edge, each other leaf edge, and per
        // cluster a node or an edge attachment
        let options = 2 + (k as usize - 1) + 2 * fam_old.len();
        let pick = rng.gen_range(0..options);
        fam = if pick == 0 {
            fam_old
        } else if pick == 1 {
            let mut all_but = TaxonSet::full(k + 1);
            all_but.remove(0);
            all_but.remove(t);
            let mut g = fam_old;
            g.push(all_but);
            g
        } else if pick < 2 + (k as usize - 1) {
            let x = (pick - 1) as u32;
            let mut g: Vec<TaxonSet> = fam_old
                .iter()
                .map(|s| if s.contains(x) { add_t(s) } else { s.clone() })
                .collect();
            g.push(TaxonSet::from_taxa(k + 1, [x, t]));
            g
        } else {
            let rest = pick - 2 - (k as usize - 1);
            let s0 = fam_old[rest / 2].clone();
            if rest % 2 == 0 {
                fam_old
                    .iter()
                    .map(|s| if s0.is_subset(s) { add_t(s) } else { s.clone() })
                    .collect()
            } else {
                let mut g: Vec<TaxonSet> = fam_old
                    .iter()
                    .map(|s| {
                        if s0.is_subset(s) && *s != s0 {
                            add_t(s)
                        } else {
                            s.clone()
                        }
                    })
                    .collect();
                g.push(add_t(&s0));
                g
            }
        };
    }
    fam
}

/// A random partition of `0..n` into `r` blocks of size >= 2 (taxa
/// shuffled, sizes random above the minimum).
pub fn random_partition(n: u32, r: usize, rng: &mut impl Rng) -> TaxonPartition {
    assert!(n as usize >= 2 * r && r >= 1);
    let mut ids: Vec<Taxon> = (0..n).collect();
    ids.shuffle(rng);
    let mut sizes = vec![2usize; r];
    for _ in 0..(n as usize - 2 * r) {
        sizes[rng.gen_range(0..r)] += 1;
    }
    let mut blocks = Vec::with_capacity(r);
    let mut at = 0;
    for s in sizes {
        blocks.push(ids[at..at + s].to_vec());
        at += s;
    }
    TaxonPartition::with_default_names(n, blocks).expect("generated blocks partition 0..n")
}

/// Flip `flips` random cross tuples of a complete system to a different of
/// their three allowed states; the result is always well-formed.
pub fn flip_cross_quartets(
    sys: &CompleteSystem,
    flips: usize,
    rng: &mut impl Rng,
) -> CompleteSystem {
    let p = sys.partition();
    let mut tuples: Vec<(Taxon, Taxon, Taxon, Taxon)> = Vec::new();
    for i in 0..p.num_blocks() {
        for j in (i + 1)..p.num_blocks() {
            let ai = p.block(i).to_vec();
            let aj = p.block(j).to_vec();
            for_cross_tuples(&ai, &aj, |a, ap, b, bp| tuples.push((a, ap, b, bp)));
        }
    }
    let flip_at: Vec<&(Taxon, Taxon, Taxon, Taxon)> =
        tuples.choose_multiple(rng, flips.min(tuples.len())).collect();
    let mut strict = Vec::new();
    for t @ &(a, ap, b, bp) in &tuples {
        let mut tri = sys.tri(a, ap, b, bp);
        if flip_at.contains(&t) {
            let others: Vec<Tri> = [Tri::First, Tri::Second, Tri::Neutral]
                .into_iter()
                .filter(|&o| o != tri)
                .collect();
            tri = *others.choose(rng).unwrap();
        }
        match tri {
            Tri::First => strict.push(Quartet::strict(a, b, ap, bp)),
            Tri::Second => strict.push(Quartet::strict(a, bp, ap, b)),
            Tri::Neutral => {}
        }
    }
    CompleteSystem::new(p.clone(), &strict).expect("one strict quartet per tuple")
}

/// Flip `flips` random four-subsets of a full system among their four
/// allowed states (three strict pairings or unresolved).
pub fn flip_full_quartets(sys: &FullSystem, flips: usize, rng: &mut impl Rng) -> FullSystem {
    let ts = sys.taxa().to_vec();
    let mut subsets: Vec<[Taxon; 4]> = Vec::new();
    for_four_subsets(&ts, |a, b, c, d| subsets.push([a, b, c, d]));
    let flip_at: Vec<&[Taxon; 4]> = subsets.choose_multiple(rng, flips.min(subsets.len())).collect();
    let mut strict = Vec::new();
    for s @ &[a, b, c, d] in &subsets {
        let current = sys.resolution(a, b, c, d);
        let chosen = if flip_at.contains(&s) {
            let options: Vec<Option<Quartet>> = [
                Some(Quartet::strict(a, b, c, d)),
                Some(Quartet::strict(a, c, b, d)),
                Some(Quartet::strict(a, d, b, c)),
                None,
            ]
            .into_iter()
            .filter(|o| *o != current)
            .collect();
            options.choose(rng).unwrap().clone()
        } else {
            current
        };
        if let Some(q) = chosen {
            strict.push(q);
        }
    }
    FullSystem::new(sys.taxa().clone(), &strict).expect("one resolution per four-subset")
}

/// The complete system a tree induces on a partition.
pub fn complete_from_tree(splits: &[TaxonSet], p: &TaxonPartition) -> CompleteSystem {
    CompleteSystem::from_family(p.clone(), splits).expect("tree families never conflict")
}

/// The full A-partite system a tree induces on a partition.
pub fn full_multipartite_from_tree(
    splits: &[TaxonSet],
    p: &TaxonPartition,
) -> FullMultipartiteSystem {
    FullMultipartiteSystem::from_family(p.clone(), splits).expect("tree families never conflict")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipartite::Picker;
    use crate::solver::solve_complete;
    use crate::tree::PhyloTree;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_trees_are_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [4u32, 6, 9, 14] {
            for _ in 0..20 {
                let fam = random_tree_splits(n, &mut rng);
                let tree = PhyloTree::from_laminar(n, &fam).unwrap();
                assert_eq!(tree.splits().len(), fam.len());
            }
        }
    }

    #[test]
    fn random_partition_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let p = random_partition(11, 3, &mut rng);
            assert_eq!(p.num_blocks(), 3);
            assert_eq!(p.support_len(), 11);
            assert!((0..3).all(|i| p.block(i).len() >= 2));
        }
    }

    #[test]
    fn noiseless_instances_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let fam = random_tree_splits(8, &mut rng);
            let p = random_partition(8, 3, &mut rng);
            let sys = complete_from_tree(&fam, &p);
            let sol = solve_complete(&sys, &mut Picker::min()).unwrap();
            assert!(sys.displayed_by_family(sol.tree.splits()));
        }
    }

    #[test]
    fn flips_change_the_stated_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let fam = random_tree_splits(8, &mut rng);
        let p = random_partition(8, 2, &mut rng);
        let sys = complete_from_tree(&fam, &p);
        let flipped = flip_cross_quartets(&sys, 2, &mut rng);
        let before: std::collections::HashSet<_> = sys.all_quartets().into_iter().collect();
        let after: std::collections::HashSet<_> = flipped.all_quartets().into_iter().collect();
        assert_ne!(before, after);

        let full = FullSystem::from_family(TaxonSet::full(8), &fam).unwrap();
        let flipped = flip_full_quartets(&full, 2, &mut rng);
        assert_ne!(
            full.strict_quartets()
                .symmetric_difference(flipped.strict_quartets())
                .count(),
            0
        );
    }
}
