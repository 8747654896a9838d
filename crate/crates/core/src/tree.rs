//! Phylogenetic trees and their laminar-family encoding.
//!
//! An unrooted tree with internal degrees ≥ 3 is characterized by its set of
//! internal-edge bipartitions. We store one side per bipartition — the side
//! avoiding leaf 0 — so tree construction, comparison, and quartet display
//! all reduce to set algebra on that split family.

use std::collections::HashSet;

use thiserror::Error;

use crate::quartet::{separates, Quartet, QuartetKind};
use crate::taxa::{Taxon, TaxonSet};

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("family is not laminar after orientation")]
    NotLaminar,
    #[error("two members induce the same bipartition")]
    DuplicateBipartition,
    #[error("a member has a side with fewer than 2 taxa")]
    TrivialSplit,
    #[error("newick parse error: {0}")]
    Parse(String),
    #[error("unknown taxon name {0:?}")]
    UnknownTaxon(String),
    #[error("taxon {0:?} appears more than once")]
    DuplicateTaxon(String),
    #[error("tree leaves do not cover the taxon set")]
    MissingTaxa,
}

/// An unrooted phylogenetic tree on leaves `0..n` with internal degrees ≥ 3.
#[derive(Clone, Debug)]
pub struct PhyloTree {
    n: u32,
    adj: Vec<Vec<usize>>,
    labels: Vec<Option<Taxon>>,
    /// One side per internal edge, the side not containing leaf 0, sorted.
    splits: Vec<TaxonSet>,
}

/// Normalize a bipartition side to the side avoiding leaf 0.
fn orient(x: &TaxonSet) -> TaxonSet {
    if x.contains(0) {
        x.complement()
    } else {
        x.clone()
    }
}

impl PhyloTree {
    /// Build the unique tree whose internal-edge bipartitions are
    /// `{ {X, [n]\X} : X ∈ family }`.
    pub fn from_laminar(n: u32, family: &[TaxonSet]) -> Result<PhyloTree, TreeError> {
        let mut sets: Vec<TaxonSet> = Vec::with_capacity(family.len());
        for x in family {
            let x = orient(x);
            if x.len() < 2 || x.complement().len() < 2 {
                return Err(TreeError::TrivialSplit);
            }
            if sets.contains(&x) {
                return Err(TreeError::DuplicateBipartition);
            }
            sets.push(x);
        }
        for i in 0..sets.len() {
            for j in (i + 1)..sets.len() {
                if !sets[i].laminar_with(&sets[j]) {
                    return Err(TreeError::NotLaminar);
                }
            }
        }
        sets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));

        // Node layout: leaves 0..n, root internal node n, one internal node
        // per set after that. parent[k] = index of the smallest strict
        // superset of sets[k], or the root.
        let root = n as usize;
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n as usize + 1 + sets.len()];
        let mut labels: Vec<Option<Taxon>> = (0..n).map(Some).collect();
        labels.push(None);
        labels.extend(std::iter::repeat(None).take(sets.len()));

        let node_of = |k: usize| root + 1 + k;
        for k in 0..sets.len() {
            // sets are sorted by decreasing size, so the minimal superset is
            // the latest earlier set containing sets[k]
            let parent = (0..k)
                .rev()
                .find(|&j| sets[k].is_subset(&sets[j]))
                .map(node_of)
                .unwrap_or(root);
            adj[parent].push(node_of(k));
            adj[node_of(k)].push(parent);
        }
        for t in 0..n {
            // attach each leaf under the smallest set containing it
            let host = (0..sets.len())
                .rev()
                .find(|&k| sets[k].contains(t))
                .map(node_of)
                .unwrap_or(root);
            adj[host].push(t as usize);
            adj[t as usize].push(host);
        }
        Ok(PhyloTree {
            n,
            adj,
            labels,
            splits: sets,
        })
    }

    pub fn star(n: u32) -> PhyloTree {
        Self::from_laminar(n, &[]).expect("empty family is laminar")
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// The laminar encoding: one side per internal edge, avoiding leaf 0.
    pub fn splits(&self) -> &[TaxonSet] {
        &self.splits
    }

    pub fn split_set(&self) -> HashSet<TaxonSet> {
        self.splits.iter().cloned().collect()
    }

    /// Topological equality as unrooted trees.
    pub fn same_topology(&self, other: &PhyloTree) -> bool {
        self.n == other.n && self.split_set() == other.split_set()
    }

    /// The restriction of the tree to four leaves: the strict quartet whose
    /// pair paths are disjoint, or `None` for the star.
    pub fn restrict_to_four(&self, a: Taxon, b: Taxon, c: Taxon, d: Taxon) -> Option<Quartet> {
        for q in [
            Quartet::strict(a, b, c, d),
            Quartet::strict(a, c, b, d),
            Quartet::strict(a, d, b, c),
        ] {
            let [x, y] = q.pair1();
            let [u, v] = q.pair2();
            if self.splits.iter().any(|s| separates(s, x, y, u, v)) {
                return Some(q);
            }
        }
        None
    }

    pub fn displays(&self, q: &Quartet) -> bool {
        let restriction = self.restrict_to_four(
            q.pair1()[0],
            q.pair1()[1],
            q.pair2()[0],
            q.pair2()[1],
        );
        match q.kind() {
            QuartetKind::Strict => restriction.as_ref() == Some(q),
            QuartetKind::Weak => restriction.map_or(true, |r| r == q.as_strict()),
        }
    }

    /// All edges as node-index pairs (u < v).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &v in nbrs {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Leaf-to-leaf path lengths under per-edge weights, indexed in
    /// `edges()` order.
    pub fn leaf_distances(&self, weights: &[f64]) -> Vec<Vec<f64>> {
        let edges = self.edges();
        assert_eq!(edges.len(), weights.len());
        let mut w = std::collections::HashMap::new();
        for (e, &wt) in edges.iter().zip(weights) {
            w.insert(*e, wt);
        }
        let m = self.adj.len();
        let mut dist = vec![vec![0.0; self.n as usize]; self.n as usize];
        for s in 0..self.n as usize {
            let mut d = vec![f64::INFINITY; m];
            d[s] = 0.0;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if d[v].is_infinite() {
                        let key = (u.min(v), u.max(v));
                        d[v] = d[u] + w[&key];
                        stack.push(v);
                    }
                }
            }
            for t in 0..self.n as usize {
                dist[s][t] = d[t];
            }
        }
        dist
    }

    /// Deterministic Newick: rooted at the node adjacent to the smallest
    /// leaf, children ordered by smallest descendant name.
    pub fn to_newick(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.n as usize);
        if self.n == 1 {
            return format!("{};", names[0]);
        }
        if self.n == 2 {
            return format!("({},{});", names[0], names[1]);
        }
        let root = self.adj[0][0]; // internal neighbor of leaf 0
        let mut s = self.render(root, usize::MAX, names).0;
        s.push(';');
        s
    }

    // returns (newick text, smallest descendant name)
    fn render(&self, node: usize, from: usize, names: &[String]) -> (String, String) {
        if let Some(t) = self.labels[node] {
            let name = names[t as usize].clone();
            return (name.clone(), name);
        }
        let mut children: Vec<(String, String)> = self
            .adj[node]
            .iter()
            .filter(|&&v| v != from)
            .map(|&v| self.render(v, node, names))
            .collect();
        children.sort_by(|a, b| a.1.cmp(&b.1));
        let min_name = children[0].1.clone();
        let body = children
            .into_iter()
            .map(|(text, _)| text)
            .collect::<Vec<_>>()
            .join(",");
        (format!("({body})"), min_name)
    }

    /// Parse an unrooted, unweighted Newick tree whose leaf names are
    /// exactly `names`. Rooted (degree-2) representations are unrooted.
    pub fn from_newick(text: &str, names: &[String]) -> Result<PhyloTree, TreeError> {
        let n = names.len() as u32;
        let text = text.trim().trim_end_matches(';');
        let mut chars = text.char_indices().peekable();
        let mut seen = TaxonSet::empty(n);
        let mut subtrees: Vec<TaxonSet> = Vec::new();
        let top = parse_group(text, &mut chars, names, &mut seen, &mut subtrees)?;
        if chars.next().is_some() {
            return Err(TreeError::Parse("trailing input".into()));
        }
        if seen.len() as u32 != n {
            return Err(TreeError::MissingTaxa);
        }
        // Every proper subtree leaf set is a candidate split; dedup and drop
        // trivial ones (this absorbs root bipartitions listed twice and
        // degree-2 chains).
        let mut family: Vec<TaxonSet> = Vec::new();
        for x in subtrees {
            if x == top {
                continue;
            }
            let x = orient(&x);
            if x.len() >= 2 && x.complement().len() >= 2 && !family.contains(&x) {
                family.push(x);
            }
        }
        Self::from_laminar(n, &family)
    }
}

fn parse_group(
    text: &str,
    chars: &mut std::iter::Peekable<std::str::CharIndices>,
    names: &[String],
    seen: &mut TaxonSet,
    subtrees: &mut Vec<TaxonSet>,
) -> Result<TaxonSet, TreeError> {
    match chars.peek() {
        Some((_, '(')) => {
            chars.next();
            let mut leaves = TaxonSet::empty(names.len() as u32);
            loop {
                let child = parse_group(text, chars, names, seen, subtrees)?;
                leaves.union_with(&child);
                match chars.next() {
                    Some((_, ',')) => continue,
                    Some((_, ')')) => break,
                    other => {
                        return Err(TreeError::Parse(format!(
                            "expected ',' or ')', got {other:?}"
                        )))
                    }
                }
            }
            subtrees.push(leaves.clone());
            Ok(leaves)
        }
        Some(&(start, c)) if c.is_ascii_alphanumeric() || c == '_' => {
            let mut end = start;
            while let Some(&(i, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    end = i + c.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let name = &text[start..end];
            let t = names
                .iter()
                .position(|x| x == name)
                .ok_or_else(|| TreeError::UnknownTaxon(name.to_string()))? as Taxon;
            if seen.contains(t) {
                return Err(TreeError::DuplicateTaxon(name.to_string()));
            }
            seen.insert(t);
            Ok(TaxonSet::singleton(names.len() as u32, t))
        }
        other => Err(TreeError::Parse(format!("unexpected {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(s: &str) -> Vec<String> {
        s.chars().map(|c| c.to_string()).collect()
    }

    #[test]
    fn star_has_no_splits() {
        let t = PhyloTree::star(5);
        assert!(t.splits().is_empty());
        assert_eq!(t.restrict_to_four(0, 1, 2, 3), None);
        assert_eq!(t.to_newick(&names("abcde")), "(a,b,c,d,e);");
    }

    #[test]
    fn quartet_tree() {
        let t = PhyloTree::from_laminar(4, &[TaxonSet::from_taxa(4, [2, 3])]).unwrap();
        assert_eq!(
            t.restrict_to_four(0, 1, 2, 3),
            Some(Quartet::strict(0, 1, 2, 3))
        );
        assert!(t.displays(&Quartet::strict(0, 1, 2, 3)));
        assert!(t.displays(&Quartet::weak(0, 1, 2, 3)));
        assert!(!t.displays(&Quartet::strict(0, 2, 1, 3)));
        assert!(!t.displays(&Quartet::weak(0, 2, 1, 3)));
        assert_eq!(t.to_newick(&names("abcd")), "(a,b,(c,d));");
    }

    #[test]
    fn example_tree_round_trip() {
        // the worked example's laminar family on 9 taxa a..i
        let fam = vec![
            TaxonSet::from_taxa(9, [0, 1, 3, 6]),
            TaxonSet::from_taxa(9, [0, 6]),
            TaxonSet::from_taxa(9, [0, 1, 2, 3, 5, 6, 8]),
            TaxonSet::from_taxa(9, [5, 8]),
        ];
        let t = PhyloTree::from_laminar(9, &fam).unwrap();
        let back = PhyloTree::from_laminar(9, &t.splits().to_vec()).unwrap();
        assert!(t.same_topology(&back));
        let nw = t.to_newick(&names("abcdefghi"));
        let parsed = PhyloTree::from_newick(&nw, &names("abcdefghi")).unwrap();
        assert!(t.same_topology(&parsed));
    }

    #[test]
    fn laminar_errors() {
        let bad = vec![
            TaxonSet::from_taxa(6, [1, 2, 3]),
            TaxonSet::from_taxa(6, [3, 4, 5]),
        ];
        assert!(matches!(
            PhyloTree::from_laminar(6, &bad),
            Err(TreeError::NotLaminar)
        ));
        assert!(matches!(
            PhyloTree::from_laminar(4, &[TaxonSet::from_taxa(4, [3])]),
            Err(TreeError::TrivialSplit)
        ));
        // {0,1} and {2,3} are the same bipartition of [4]
        let dup = vec![TaxonSet::from_taxa(4, [0, 1]), TaxonSet::from_taxa(4, [2, 3])];
        assert!(matches!(
            PhyloTree::from_laminar(4, &dup),
            Err(TreeError::DuplicateBipartition)
        ));
    }

    #[test]
    fn rooted_newick_is_unrooted() {
        let t = PhyloTree::from_newick("((a,b),(c,d));", &names("abcd")).unwrap();
        let q = PhyloTree::from_laminar(4, &[TaxonSet::from_taxa(4, [2, 3])]).unwrap();
        assert!(t.same_topology(&q));
    }

    #[test]
    fn caterpillar_distances() {
        // caterpillar on 6 leaves: splits {2,3,4,5}-ish chain
        let fam = vec![
            TaxonSet::from_taxa(6, [2, 3, 4, 5]),
            TaxonSet::from_taxa(6, [3, 4, 5]),
            TaxonSet::from_taxa(6, [4, 5]),
        ];
        let t = PhyloTree::from_laminar(6, &fam).unwrap();
        let weights = vec![1.0; t.edges().len()];
        let d = t.leaf_distances(&weights);
        assert_eq!(d[0][1], 2.0);
        assert_eq!(d[4][5], 2.0);
        assert!(d[0][5] > d[0][1]);
        // symmetric, zero diagonal
        for i in 0..6 {
            assert_eq!(d[i][i], 0.0);
            for j in 0..6 {
                assert_eq!(d[i][j], d[j][i]);
            }
        }
    }
}
