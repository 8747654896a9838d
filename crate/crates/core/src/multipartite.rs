//! The displaying phase for complete multipartite quartet systems:
//! block-by-block extension (Algorithm 3) driven by the bipartite solver,
//! iterated over all blocks (Algorithm 4).

use crate::bipartite::{algorithm2, Incompatible, Picker};
use crate::cuts::CutClass;
use crate::quartet::CompleteSystem;
use crate::taxa::{TaxonPartition, TaxonSet};

/// One extension step: given a cut family `f_prime` displaying the
/// sub-system on `prior`, produce a family displaying the sub-system on
/// `prior ∪ {t}`.
pub fn algorithm3(
    sys: &CompleteSystem,
    f_prime: Vec<CutClass>,
    prior: &[usize],
    t: usize,
    picker: &mut Picker,
) -> Result<Vec<CutClass>, Incompatible> {
    let p = sys.partition();
    let n = p.n_ids();
    let t_bit = 1u128 << t;

    // Step 1: bipartite families against the new block.
    let mut g: Vec<(usize, Vec<CutClass>)> = Vec::new();
    for &i in prior {
        let fam = algorithm2(sys, i, t, picker)?;
        let classes = fam
            .iter()
            .map(|x| CutClass::of(x, p, false).expect("bipartite output members are cuts"))
            .collect();
        g.push((i, classes));
    }

    // Step 2: for each established cut, stitch the new-block chains whose
    // old-block sides agree with it into maximal extensions.
    let mut family: Vec<CutClass> = Vec::new();
    for xp in &f_prime {
        let side = xp.representative();
        // per agreeing block: the chain of A_t-sides, largest first
        let mut chains: Vec<(usize, Vec<TaxonSet>)> = Vec::new();
        for (i, classes) in &g {
            if xp.footprint() & (1u128 << i) == 0 {
                continue;
            }
            let on_p = side.intersect(p.block(*i));
            let mut chain: Vec<TaxonSet> = Vec::new();
            for c in classes {
                let (s1, s2) = c.sides();
                if s1.intersect(p.block(*i)) == on_p {
                    chain.push(s1.intersect(p.block(t)));
                } else if s2.intersect(p.block(*i)) == on_p {
                    chain.push(s2.intersect(p.block(t)));
                }
            }
            if !chain.is_empty() {
                chain.sort_by_key(|x| std::cmp::Reverse(x.len()));
                chains.push((*i, chain));
            }
        }
        while chains.iter().any(|(_, c)| !c.is_empty()) {
            // the largest head is a maximal element of the remaining chains
            let f = chains
                .iter()
                .filter_map(|(_, c)| c.first())
                .max_by_key(|x| x.len())
                .unwrap()
                .clone();
            let mut r_mask = 0u128;
            for (i, chain) in chains.iter_mut() {
                if chain.first() == Some(&f) {
                    r_mask |= 1u128 << *i;
                    chain.remove(0);
                }
            }
            if r_mask.count_ones() >= 2 {
                let a_r = p.blocks_union(r_mask);
                let inner = side.intersect(&a_r).union(&f);
                let outer = a_r.union(p.block(t)).difference(&inner);
                family.push(CutClass::from_sides(r_mask | t_bit, inner, outer));
            }
        }
        family.push(xp.clone());
    }
    // The loop's exit branch: the per-pair families enter as they stand.
    for (_, classes) in g {
        family.extend(classes);
    }

    // Step 3: dedup and keep only the ≺-maximal elements.
    let mut dedup: Vec<CutClass> = Vec::new();
    for c in family {
        if !dedup.contains(&c) {
            dedup.push(c);
        }
    }
    let family: Vec<CutClass> = dedup
        .iter()
        .filter(|c| !dedup.iter().any(|d| c.precedes(d, p)))
        .cloned()
        .collect();
    let total: usize = prior.iter().chain([&t]).map(|&i| p.block(i).len()).sum();
    let _ = n;
    if family.len() <= 2 * total {
        Ok(family)
    } else {
        Err(Incompatible)
    }
}

/// The displaying phase: a cut family displaying `sys`, laminarizable (and
/// minimal, unique up to ∼) whenever `sys` is compatible.
pub fn algorithm4(sys: &CompleteSystem, picker: &mut Picker) -> Result<Vec<CutClass>, Incompatible> {
    let order = block_order(sys.partition());
    algorithm4_ordered(sys, &order, picker)
}

/// Blocks largest-first (the order the extension analysis assumes).
pub fn block_order(p: &TaxonPartition) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.num_blocks()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(p.block(i).len()));
    order
}

/// Algorithm 4 with an explicit block processing order (exercised by the
/// uniqueness tests; results agree up to ∼).
pub fn algorithm4_ordered(
    sys: &CompleteSystem,
    order: &[usize],
    picker: &mut Picker,
) -> Result<Vec<CutClass>, Incompatible> {
    let p = sys.partition();
    assert_eq!(order.len(), p.num_blocks());
    if p.num_blocks() < 2 {
        return Ok(Vec::new());
    }
    let fam = algorithm2(sys, order[0], order[1], picker)?;
    let mut family: Vec<CutClass> = crate::cuts::dedup_classes(&fam, p, false);
    for t in 2..order.len() {
        family = algorithm3(sys, family, &order[..t], order[t], picker)?;
    }
    Ok(family)
}

/// `F_R`: members whose restriction to the blocks of `r_mask` is still a
/// cut, restricted and deduplicated.
pub fn restrict_family(family: &[CutClass], p: &TaxonPartition, r_mask: u128) -> Vec<CutClass> {
    let mut out: Vec<CutClass> = Vec::new();
    for c in family {
        let fp = c.footprint() & r_mask;
        if fp.count_ones() < 2 {
            continue;
        }
        let a_fp = p.blocks_union(fp);
        let (s1, s2) = c.sides();
        let rc = CutClass::from_sides(fp, s1.intersect(&a_fp), s2.intersect(&a_fp));
        if !out.contains(&rc) {
            out.push(rc);
        }
    }
    out
}

/// The certified non-laminarizability witness: X, Y, Z agreeing with W on
/// the block pairs {i,j}, {i,k}, {j,k} respectively but none on all three.
pub fn nonlaminar_witness(
    x: &CutClass,
    y: &CutClass,
    z: &CutClass,
    w: &CutClass,
    p: &TaxonPartition,
    i: usize,
    j: usize,
    k: usize,
) -> bool {
    let (bi, bj, bk) = (1u128 << i, 1u128 << j, 1u128 << k);
    let ijk = bi | bj | bk;
    x.footprint() & (bi | bj) == (bi | bj)
        && y.footprint() & (bi | bk) == (bi | bk)
        && z.footprint() & (bj | bk) == (bj | bk)
        && x.equiv_restricted(w, p, bi | bj)
        && y.equiv_restricted(w, p, bi | bk)
        && z.equiv_restricted(w, p, bj | bk)
        && !x.equiv_restricted(w, p, ijk)
        && !y.equiv_restricted(w, p, ijk)
        && !z.equiv_restricted(w, p, ijk)
}

/// Representative sets for a class family (each class contributes its
/// canonical side); separation of cross tuples is representative-invariant.
pub fn representatives(family: &[CutClass]) -> Vec<TaxonSet> {
    family.iter().map(|c| c.representative().clone()).collect()
}
