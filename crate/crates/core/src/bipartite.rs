//! Compatibility for complete bipartite quartet systems.
//!
//! The two-taxon case reduces to finding a chain of B-subsets: the unique
//! laminar family displaying the system with no member containing the
//! anchor a₀ is `{Bₖ ∪ {a}}` for a nested chain B₁ ⊊ … ⊊ B_m. The general
//! case stitches the per-`a` chains together and recovers the non-maximal
//! members with further chain computations.

use rand::seq::IteratorRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::quartet::{CompleteSystem, FamilyIndex, Tri};
use crate::taxa::{Taxon, TaxonSet};

/// The algorithm's verdict that no tree displays the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("quartet system is not compatible")]
pub struct Incompatible;

/// Resolves the "choose an arbitrary element" steps: deterministic smallest
/// id by default, seeded random in tests exercising uniqueness up to ∼.
pub enum Picker {
    Min,
    Seeded(ChaCha8Rng),
}

impl Picker {
    pub fn min() -> Picker {
        Picker::Min
    }

    pub fn seeded(seed: u64) -> Picker {
        Picker::Seeded(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn pick(&mut self, s: &TaxonSet) -> Taxon {
        match self {
            Picker::Min => s.first().expect("picking from an empty set"),
            Picker::Seeded(rng) => s.iter().choose(rng).expect("picking from an empty set"),
        }
    }
}

/// The two-block-taxa case. `rel(b, b')` resolves the trichotomy on the
/// tuple `(a₀, a, b, b')`: `First` = a₀b ‖ ab′, `Second` = a₀b′ ‖ ab,
/// `Neutral` = a₀a | bb′. Returns the chain `B₁ ⊊ … ⊊ B_m` of proper
/// nonempty subsets of `b_set` (the realized family is `{Bₖ ∪ {a}}`), or
/// `Incompatible`.
pub fn algorithm1(
    rel: &impl Fn(Taxon, Taxon) -> Tri,
    b_set: &TaxonSet,
    picker: &mut Picker,
) -> Result<Vec<TaxonSet>, Incompatible> {
    let n = b_set.universe();
    let mut chain: Vec<TaxonSet> = Vec::new();
    // (sub-range of B, everything below it in the chain)
    let mut work: Vec<(TaxonSet, TaxonSet)> = vec![(b_set.clone(), TaxonSet::empty(n))];
    while let Some((sub, offset)) = work.pop() {
        if sub.len() <= 1 {
            continue;
        }
        let b = picker.pick(&sub);
        let mut minus = TaxonSet::empty(n);
        let mut eq = TaxonSet::singleton(n, b);
        let mut plus = TaxonSet::empty(n);
        for bp in sub.iter().filter(|&bp| bp != b) {
            match rel(b, bp) {
                Tri::First => minus.insert(bp),
                Tri::Neutral => eq.insert(bp),
                Tri::Second => plus.insert(bp),
            }
        }
        if !minus.is_empty() {
            chain.push(minus.union(&offset));
        }
        let lower = minus.union(&eq);
        if lower != sub {
            chain.push(lower.union(&offset));
        }
        work.push((minus.clone(), offset.clone()));
        work.push((plus, offset.union(&lower)));
    }
    chain.sort_by_key(|x| x.len());

    // Verify the chain displays the system: the relation must follow the
    // chain levels exactly.
    let mut level = vec![usize::MAX; n as usize];
    for t in b_set.iter() {
        level[t as usize] = chain.len();
    }
    for (k, x) in chain.iter().enumerate().rev() {
        for t in x.iter() {
            level[t as usize] = k;
        }
    }
    let bs = b_set.to_vec();
    for i in 0..bs.len() {
        for j in (i + 1)..bs.len() {
            let (b, bp) = (bs[i], bs[j]);
            let (lb, lbp) = (level[b as usize], level[bp as usize]);
            let expected = match lbp.cmp(&lb) {
                std::cmp::Ordering::Less => Tri::First,
                std::cmp::Ordering::Equal => Tri::Neutral,
                std::cmp::Ordering::Greater => Tri::Second,
            };
            if rel(b, bp) != expected {
                return Err(Incompatible);
            }
        }
    }
    Ok(chain)
}

/// Complete bipartite compatibility between blocks `ia` and `ib` of `sys`.
/// Returns a laminar family of {A,B}-cuts (subsets of A ∪ B, none
/// containing the anchor a₀) displaying the sub-system, or `Incompatible`.
pub fn algorithm2(
    sys: &CompleteSystem,
    ia: usize,
    ib: usize,
    picker: &mut Picker,
) -> Result<Vec<TaxonSet>, Incompatible> {
    let p = sys.partition();
    let a_set = p.block(ia);
    let b_set = p.block(ib);
    let n = p.n_ids();
    let two_n = 2 * (a_set.len() + b_set.len());

    // Step 1: per-a chains against the anchor.
    let a0 = picker.pick(a_set);
    let mut chains: Vec<(Taxon, Vec<TaxonSet>)> = Vec::new();
    for a in a_set.iter().filter(|&a| a != a0) {
        let rel = |b: Taxon, bp: Taxon| sys.tri(a0, a, b, bp);
        chains.push((a, algorithm1(&rel, b_set, picker)?));
    }

    // Step 2: group the chains' members by B-side; the A-side of a group
    // collects every a whose chain contains that B-side.
    let mut groups: Vec<(TaxonSet, TaxonSet)> = Vec::new(); // (D, A_D)
    for (a, chain) in &chains {
        for d in chain {
            match groups.iter_mut().find(|(gd, _)| gd == d) {
                Some((_, ad)) => ad.insert(*a),
                None => groups.push((d.clone(), TaxonSet::singleton(n, *a))),
            }
        }
        if groups.len() > two_n {
            return Err(Incompatible);
        }
    }

    // Step 3: the groups are the maximal members; recover the non-maximal
    // ones per group with a swapped-role chain computation.
    let g_sets: Vec<TaxonSet> = groups.iter().map(|(d, ad)| d.union(ad)).collect();
    for i in 0..g_sets.len() {
        for j in (i + 1)..g_sets.len() {
            if !g_sets[i].laminar_with(&g_sets[j]) {
                return Err(Incompatible);
            }
        }
    }
    let mut family = g_sets.clone();
    for x in &g_sets {
        // 3-1
        let mut x_minus = TaxonSet::empty(n);
        for xp in g_sets.iter().filter(|xp| *xp != x && xp.is_subset(x)) {
            x_minus.union_with(xp);
        }
        let d = x.intersect(b_set);
        let b0 = picker.pick(&b_set.difference(x));
        let b = picker.pick(&d);
        // 3-2: chain over (X \ X⁻) ∩ A against the pair {b₀, b}
        let rest_a = x.difference(&x_minus).intersect(a_set);
        let rel = |y: Taxon, yp: Taxon| sys.tri(y, yp, b0, b);
        let chain = algorithm1(&rel, &rest_a, picker)?;
        let base = x_minus.union(&d);
        let mut sub: Vec<TaxonSet> = chain.iter().map(|c| c.union(&base)).collect();
        // 3-3: decide whether X⁻ ∪ (X ∩ B) itself is a chain member
        if !x_minus.is_empty() {
            let a = picker.pick(&x_minus.intersect(a_set));
            let xp = g_sets
                .iter()
                .filter(|xp| *xp != x && xp.contains(a) && xp.is_subset(&x_minus))
                .max_by_key(|xp| xp.len())
                .expect("member of G inside X⁻ containing a");
            let b = picker.pick(&x.difference(xp).intersect(b_set));
            if !rest_a
                .iter()
                .any(|ap| ap != a && sys.tri(a, ap, b0, b) == Tri::Neutral)
            {
                sub.push(base.clone());
            }
        }
        // 3-4
        for h in sub {
            if !family.contains(&h) {
                family.push(h);
            }
        }
    }

    // Step 4: full verification.
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            if !family[i].laminar_with(&family[j]) {
                return Err(Incompatible);
            }
        }
    }
    if displays_bipartite(sys, ia, ib, &family) {
        Ok(family)
    } else {
        Err(Incompatible)
    }
}

/// Whether `family` displays the complete bipartite sub-system of `sys` on
/// blocks `ia`, `ib`.
pub fn displays_bipartite(
    sys: &CompleteSystem,
    ia: usize,
    ib: usize,
    family: &[TaxonSet],
) -> bool {
    let p = sys.partition();
    let idx = FamilyIndex::new(p.n_ids(), family);
    let avec = p.block(ia).to_vec();
    let bvec = p.block(ib).to_vec();
    let mut ok = true;
    crate::quartet::for_cross_tuples_until(&avec, &bvec, |a, ap, b, bp| {
        let sep1 = idx.separates(a, b, ap, bp);
        let sep2 = idx.separates(a, bp, ap, b);
        ok = match sys.tri(a, ap, b, bp) {
            Tri::First => sep1 && !sep2,
            Tri::Second => sep2 && !sep1,
            Tri::Neutral => !sep1 && !sep2,
        };
        !ok
    });
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cuts::dedup_classes;
    use crate::quartet::Quartet;
    use crate::taxa::TaxonPartition;

    // A = {a0=0, a=1}, B = {b1=2, b2=3, b3=4}
    fn pair_partition() -> TaxonPartition {
        TaxonPartition::with_default_names(5, vec![vec![0, 1], vec![2, 3, 4]]).unwrap()
    }

    #[test]
    fn chain_from_nested_quartets() {
        // ab1||a0b2, ab1||a0b3, ab2||a0b3  →  chain {b1} ⊂ {b1,b2}
        let sys = CompleteSystem::new(
            pair_partition(),
            &[
                Quartet::strict(1, 2, 0, 3),
                Quartet::strict(1, 2, 0, 4),
                Quartet::strict(1, 3, 0, 4),
            ],
        )
        .unwrap();
        let rel = |b, bp| sys.tri(0, 1, b, bp);
        let chain = algorithm1(&rel, sys.partition().block(1), &mut Picker::min()).unwrap();
        assert_eq!(
            chain,
            vec![TaxonSet::from_taxa(5, [2]), TaxonSet::from_taxa(5, [2, 3])]
        );
    }

    #[test]
    fn empty_b_gives_empty_family() {
        let sys = CompleteSystem::new(pair_partition(), &[]).unwrap();
        let rel = |b, bp| sys.tri(0, 1, b, bp);
        let chain = algorithm1(&rel, &TaxonSet::singleton(5, 2), &mut Picker::min()).unwrap();
        assert!(chain.is_empty());
    }

    #[test]
    fn cyclic_system_incompatible() {
        // ab1||a0b2, ab2||a0b3, a0b1||ab3
        let sys = CompleteSystem::new(
            pair_partition(),
            &[
                Quartet::strict(1, 2, 0, 3),
                Quartet::strict(1, 3, 0, 4),
                Quartet::strict(0, 2, 1, 4),
            ],
        )
        .unwrap();
        let rel = |b, bp| sys.tri(0, 1, b, bp);
        assert_eq!(
            algorithm1(&rel, sys.partition().block(1), &mut Picker::min()),
            Err(Incompatible)
        );
        assert_eq!(algorithm2(&sys, 0, 1, &mut Picker::min()), Err(Incompatible));
    }

    #[test]
    fn algorithm2_matches_algorithm1_for_two_taxa() {
        let sys = CompleteSystem::new(
            pair_partition(),
            &[
                Quartet::strict(1, 2, 0, 3),
                Quartet::strict(1, 2, 0, 4),
                Quartet::strict(1, 3, 0, 4),
            ],
        )
        .unwrap();
        let fam = algorithm2(&sys, 0, 1, &mut Picker::min()).unwrap();
        let rel = |b, bp| sys.tri(0, 1, b, bp);
        let chain = algorithm1(&rel, sys.partition().block(1), &mut Picker::min()).unwrap();
        let realized: Vec<TaxonSet> = chain
            .iter()
            .map(|c| c.union(&TaxonSet::singleton(5, 1)))
            .collect();
        assert_eq!(
            dedup_classes(&fam, sys.partition(), false),
            dedup_classes(&realized, sys.partition(), false)
        );
    }

    #[test]
    fn recovers_known_laminar_family() {
        let p = TaxonPartition::with_default_names(6, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let target = vec![
            TaxonSet::from_taxa(6, [0, 3]),
            TaxonSet::from_taxa(6, [0, 1, 3, 4]),
        ];
        let sys = CompleteSystem::from_family(p.clone(), &target).unwrap();
        let fam = algorithm2(&sys, 0, 1, &mut Picker::min()).unwrap();
        assert!(displays_bipartite(&sys, 0, 1, &fam));
        let got = dedup_classes(&fam, &p, false);
        let want = dedup_classes(&target, &p, false);
        assert_eq!(got.len(), want.len());
        for c in &want {
            assert!(got.contains(c));
        }
    }

    #[test]
    fn seeded_choices_agree_up_to_equivalence() {
        let p = TaxonPartition::with_default_names(7, vec![vec![0, 1, 2], vec![3, 4, 5, 6]]).unwrap();
        let target = vec![
            TaxonSet::from_taxa(7, [0, 3]),
            TaxonSet::from_taxa(7, [0, 1, 3, 4]),
            TaxonSet::from_taxa(7, [0, 1, 3, 4, 5]),
        ];
        let sys = CompleteSystem::from_family(p.clone(), &target).unwrap();
        let reference: std::collections::HashSet<_> =
            dedup_classes(&algorithm2(&sys, 0, 1, &mut Picker::min()).unwrap(), &p, false)
                .into_iter()
                .collect();
        for seed in 0..20 {
            let fam = algorithm2(&sys, 0, 1, &mut Picker::seeded(seed)).unwrap();
            let got: std::collections::HashSet<_> =
                dedup_classes(&fam, &p, false).into_iter().collect();
            assert_eq!(got, reference, "seed {seed}");
        }
    }
}
