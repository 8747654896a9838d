//! Brute-force oracles: exhaustive enumeration of all unrooted tree
//! topologies (multifurcations included) at small scale, used to certify the
//! polynomial pipeline instance by instance.
//!
//! Topologies are represented by their oriented internal-split families
//! (each side avoiding taxon 0), which is a bijection. Two independent
//! enumeration strategies — laminar-family search and leaf-by-leaf
//! insertion — are cross-checked in the tests, together with the pinned
//! topology counts.

use crate::cuts::CutClass;
use crate::quartet::{CompleteSystem, FullMultipartiteSystem, FullSystem};
use crate::taxa::{TaxonPartition, TaxonSet};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance exceeds the brute-force cap ({0} > {1})")]
    CapExceeded(u64, u64),
}

/// Largest universe the tree enumeration accepts (660032 topologies).
pub const MAX_ORACLE_TAXA: u32 = 9;

/// Largest total free-bit count the laminarizability oracle accepts.
pub const MAX_ORACLE_FREE_BITS: u32 = 24;

/// Pinned topology counts for n = 4..=8.
pub const TOPOLOGY_COUNTS: [usize; 5] = [4, 26, 236, 2752, 39208];

/// All unrooted tree topologies on taxa `0..n` as oriented split families,
/// via depth-first search over laminar families. Results are cached.
pub fn enumerate_trees(n: u32) -> Result<Arc<Vec<Vec<TaxonSet>>>, OracleError> {
    if n > MAX_ORACLE_TAXA {
        return Err(OracleError::CapExceeded(n as u64, MAX_ORACLE_TAXA as u64));
    }
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<Vec<TaxonSet>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(v) = guard.get(&n) {
        return Ok(v.clone());
    }
    let v = Arc::new(enumerate_by_laminar_dfs(n));
    guard.insert(n, v.clone());
    Ok(v)
}

fn candidate_sides(n: u32) -> Vec<TaxonSet> {
    // every subset of {1..n-1} with 2 <= |S| <= n-2
    let mut out = Vec::new();
    if n < 4 {
        return out;
    }
    let others: Vec<u32> = (1..n).collect();
    for mask in 0u64..(1u64 << others.len()) {
        let k = mask.count_ones();
        if k < 2 || k > n - 2 {
            continue;
        }
        let mut s = TaxonSet::empty(n);
        for (j, &t) in others.iter().enumerate() {
            if mask >> j & 1 == 1 {
                s.insert(t);
            }
        }
        out.push(s);
    }
    out
}

fn enumerate_by_laminar_dfs(n: u32) -> Vec<Vec<TaxonSet>> {
    let sides = candidate_sides(n);
    let mut out = Vec::new();
    let mut chosen: Vec<TaxonSet> = Vec::new();
    fn rec(
        sides: &[TaxonSet],
        from: usize,
        chosen: &mut Vec<TaxonSet>,
        out: &mut Vec<Vec<TaxonSet>>,
    ) {
        out.push(chosen.clone());
        for j in from..sides.len() {
            if chosen.iter().all(|s| s.laminar_with(&sides[j])) {
                chosen.push(sides[j].clone());
                rec(sides, j + 1, chosen, out);
                chosen.pop();
            }
        }
    }
    rec(&sides, 0, &mut chosen, &mut out);
    out
}

/// Independent enumeration: grow trees leaf by leaf, attaching each new
/// taxon at every node and every edge of every smaller topology.
pub fn enumerate_by_insertion(n: u32) -> Vec<Vec<TaxonSet>> {
    assert!(n >= 3);
    let mut fams: Vec<Vec<TaxonSet>> = vec![vec![]]; // the star on {0,1,2}
    for k in 3..n {
        let t = k; // new taxon, universe grows to k+1
        let mut next: Vec<Vec<TaxonSet>> = Vec::new();
        for f in &fams {
            let f: Vec<TaxonSet> = f.iter().map(|s| s.resized(k + 1)).collect();
            let add_t = |s: &TaxonSet| {
                let mut s = s.clone();
                s.insert(t);
                s
            };
            // attach at the root node (the one adjacent to taxon 0)
            next.push(f.clone());
            // subdivide taxon 0's leaf edge
            let mut g = f.clone();
            let mut all_but = TaxonSet::full(k + 1);
            all_but.remove(0);
            all_but.remove(t);
            g.push(all_but);
            next.push(g);
            // attach at other leaf edges: a new cherry {x, t}
            for x in 1..k {
                let mut g: Vec<TaxonSet> = f
                    .iter()
                    .map(|s| if s.contains(x) { add_t(s) } else { s.clone() })
                    .collect();
                g.push(TaxonSet::from_taxa(k + 1, [x, t]));
                next.push(g);
            }
            for s0 in &f {
                // attach at the internal node above cluster s0
                next.push(
                    f.iter()
                        .map(|s| if s0.is_subset(s) { add_t(s) } else { s.clone() })
                        .collect(),
                );
                // subdivide the edge above cluster s0
                let mut g: Vec<TaxonSet> = f
                    .iter()
                    .map(|s| {
                        if s0.is_subset(s) && s != s0 {
                            add_t(s)
                        } else {
                            s.clone()
                        }
                    })
                    .collect();
                g.push(add_t(s0));
                next.push(g);
            }
        }
        fams = next;
    }
    fams
}

/// First enumerated tree family displaying the complete system, if any.
pub fn oracle_complete(sys: &CompleteSystem) -> Result<Option<Vec<TaxonSet>>, OracleError> {
    let n = sys.partition().n_ids();
    let trees = enumerate_trees(n)?;
    Ok(trees
        .iter()
        .find(|f| sys.displayed_by_family(f))
        .cloned())
}

/// First enumerated tree family displaying the full system, if any.
pub fn oracle_full(sys: &FullSystem) -> Result<Option<Vec<TaxonSet>>, OracleError> {
    let n = sys.taxa().universe();
    let trees = enumerate_trees(n)?;
    Ok(trees
        .iter()
        .find(|f| sys.displayed_by_family(f))
        .cloned())
}

/// First enumerated tree family displaying the full A-partite system, if
/// any.
pub fn oracle_full_multipartite(
    sys: &FullMultipartiteSystem,
) -> Result<Option<Vec<TaxonSet>>, OracleError> {
    let n = sys.partition().n_ids();
    let trees = enumerate_trees(n)?;
    Ok(trees
        .iter()
        .find(|f| {
            sys.cross().displayed_by_family(f)
                && sys.within().iter().all(|w| w.displayed_by_family(f))
        })
        .cloned())
}

/// Exhaustive laminarizability check: try every representative assignment
/// (no search-order pruning), independent of the backtracking laminarizer.
pub fn oracle_laminarizable(
    classes: &[CutClass],
    p: &TaxonPartition,
) -> Result<Option<Vec<TaxonSet>>, OracleError> {
    let bits = crate::laminarize::free_bits(classes, p);
    if bits > MAX_ORACLE_FREE_BITS {
        return Err(OracleError::CapExceeded(
            bits as u64,
            MAX_ORACLE_FREE_BITS as u64,
        ));
    }
    let cands: Vec<Vec<TaxonSet>> = classes
        .iter()
        .map(|c| all_representatives(c, p))
        .collect();
    let mut pick = vec![0usize; classes.len()];
    loop {
        let sel: Vec<&TaxonSet> = pick.iter().zip(&cands).map(|(&i, cs)| &cs[i]).collect();
        let mut ok = true;
        'pairs: for i in 0..sel.len() {
            for j in (i + 1)..sel.len() {
                if !sel[i].laminar_with(sel[j]) {
                    ok = false;
                    break 'pairs;
                }
            }
        }
        if ok {
            return Ok(Some(sel.into_iter().cloned().collect()));
        }
        // odometer
        let mut idx = 0;
        loop {
            if idx == pick.len() {
                return Ok(None);
            }
            pick[idx] += 1;
            if pick[idx] < cands[idx].len() {
                break;
            }
            pick[idx] = 0;
            idx += 1;
        }
    }
}

fn all_representatives(c: &CutClass, p: &TaxonPartition) -> Vec<TaxonSet> {
    let free: Vec<usize> = (0..p.num_blocks())
        .filter(|i| c.footprint() & (1u128 << i) == 0)
        .collect();
    let (s1, s2) = c.sides();
    let mut out = Vec::new();
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laminarize::laminarize;
    use crate::quartet::Quartet;
    use std::collections::HashSet;

    fn canon(fams: &[Vec<TaxonSet>]) -> HashSet<Vec<TaxonSet>> {
        fams.iter()
            .map(|f| {
                let mut f = f.clone();
                f.sort();
                f
            })
            .collect()
    }

    #[test]
    fn pinned_topology_counts() {
        for (i, &want) in TOPOLOGY_COUNTS.iter().enumerate() {
            let n = 4 + i as u32;
            assert_eq!(enumerate_trees(n).unwrap().len(), want, "n = {n}");
        }
        assert!(matches!(
            enumerate_trees(10),
            Err(OracleError::CapExceeded(..))
        ));
    }

    #[test]
    fn strategies_agree() {
        for n in 4..=7 {
            let dfs = enumerate_trees(n).unwrap();
            let ins = enumerate_by_insertion(n);
            assert_eq!(canon(&dfs), canon(&ins), "n = {n}");
        }
    }

    #[test]
    fn families_are_valid_trees() {
        for f in enumerate_trees(6).unwrap().iter() {
            let tree = crate::tree::PhyloTree::from_laminar(6, f).unwrap();
            let got: HashSet<TaxonSet> = tree.splits().iter().cloned().collect();
            assert_eq!(got, f.iter().cloned().collect());
        }
    }

    #[test]
    fn oracle_on_worked_bipartite() {
        let p = TaxonPartition::with_default_names(6, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let fam = vec![
            TaxonSet::from_taxa(6, [0, 3]),
            TaxonSet::from_taxa(6, [0, 1, 3, 4]),
        ];
        let sys = CompleteSystem::from_family(p, &fam).unwrap();
        let found = oracle_complete(&sys).unwrap().unwrap();
        assert!(sys.displayed_by_family(&found));
    }

    #[test]
    fn oracle_rejects_incompatible_full() {
        let sys = FullSystem::new(
            TaxonSet::full(5),
            &[
                Quartet::strict(0, 1, 2, 3),
                Quartet::strict(0, 2, 3, 4),
                Quartet::strict(0, 3, 1, 4),
            ],
        )
        .unwrap();
        assert_eq!(oracle_full(&sys).unwrap(), None);
    }

    #[test]
    fn laminarizable_oracle_agrees() {
        let p = TaxonPartition::with_default_names(6, vec![vec![0, 1], vec![2, 3], vec![4, 5]])
            .unwrap();
        let mk = |ts: &[u32]| {
            CutClass::of(&TaxonSet::from_taxa(6, ts.iter().copied()), &p, false).unwrap()
        };
        // the non-laminarizable witness quadruple
        let bad = vec![
            mk(&[0, 2, 5]),
            mk(&[0, 3, 4]),
            mk(&[1, 2, 4]),
            mk(&[0, 2, 4]),
        ];
        assert_eq!(oracle_laminarizable(&bad, &p).unwrap(), None);
        assert!(laminarize(&bad, &p).is_err());
        // a laminarizable pair
        let good = vec![mk(&[0, 2]), mk(&[0, 2, 4])];
        let sel = oracle_laminarizable(&good, &p).unwrap().unwrap();
        assert!(sel[0].laminar_with(&sel[1]));
        assert!(laminarize(&good, &p).is_ok());
    }
}
