//! The end-to-end pipeline: displaying phase, laminarization phase, tree
//! construction, and an unconditional final display verification. The
//! verdict always comes from the verified tree, never from an intermediate
//! success.

use crate::bipartite::Picker;
use crate::cuts::CutClass;
use crate::full_system::algorithm5;
use crate::laminarize::{full_laminarize, laminarize, LaminarizeError};
use crate::multipartite::{algorithm4, nonlaminar_witness};
use crate::quartet::{CompleteSystem, FullMultipartiteSystem};
use crate::taxa::{Taxon, TaxonPartition, TaxonSet};
use crate::tree::PhyloTree;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Displaying,
    Laminarization,
    Verification,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Displaying => "displaying",
            Phase::Laminarization => "laminarization",
            Phase::Verification => "verification",
        })
    }
}

/// Evidence attached to an incompatibility verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// A Lemma-style certificate: three family members agreeing pairwise
    /// with a common cut `w` on the block pairs of `(i, j, k)` but not on
    /// the triple.
    NonLaminar {
        x: CutClass,
        y: CutClass,
        z: CutClass,
        w: CutClass,
        blocks: (usize, usize, usize),
    },
    /// A four-subset whose displayed quartet disagrees with the system.
    DisplayMismatch { taxa: (Taxon, Taxon, Taxon, Taxon) },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("system is incompatible (failed in the {phase} phase)")]
pub struct SolveFailure {
    pub phase: Phase,
    pub witness: Option<Witness>,
}

/// A successful run: the displaying family, the laminar representatives,
/// and the verified tree.
#[derive(Debug, Clone)]
pub struct Solution {
    pub classes: Vec<CutClass>,
    pub laminar: Vec<TaxonSet>,
    pub tree: PhyloTree,
}

/// Search for a three-member non-laminarizability certificate within a
/// family that failed to laminarize.
pub fn find_nonlaminar_witness(family: &[CutClass], p: &TaxonPartition) -> Option<Witness> {
    let r = p.num_blocks();
    let triple_members = |fp: u128, needs: u128| fp & needs == needs;
    for x in family {
        for y in family {
            for z in family {
                for i in 0..r {
                    for j in (i + 1)..r {
                        for k in (j + 1)..r {
                            let (bi, bj, bk) = (1u128 << i, 1u128 << j, 1u128 << k);
                            if !triple_members(x.footprint(), bi | bj)
                                || !triple_members(y.footprint(), bi | bk)
                                || !triple_members(z.footprint(), bj | bk)
                            {
                                continue;
                            }
                            // candidate w: block sides taken from x (on i, j)
                            // and y or z (on k), in both orientations for k
                            let (x1, x2) = x.sides();
                            for ksrc in [y.sides(), z.sides()] {
                                for kside in [ksrc.0, ksrc.1] {
                                    let inner = x1
                                        .intersect(&p.blocks_union(bi | bj))
                                        .union(&kside.intersect(p.block(k)));
                                    let outer = p.blocks_union(bi | bj | bk).difference(&inner);
                                    let w = CutClass::from_sides(bi | bj | bk, inner, outer);
                                    if nonlaminar_witness(x, y, z, &w, p, i, j, k) {
                                        return Some(Witness::NonLaminar {
                                            x: x.clone(),
                                            y: y.clone(),
                                            z: z.clone(),
                                            w,
                                            blocks: (i, j, k),
                                        });
                                    }
                                }
                            }
                            let _ = x2;
                        }
                    }
                }
            }
        }
    }
    None
}

fn laminarization_failure(family: &[CutClass], p: &TaxonPartition) -> SolveFailure {
    SolveFailure {
        phase: Phase::Laminarization,
        witness: find_nonlaminar_witness(family, p),
    }
}

fn build_tree(p: &TaxonPartition, laminar: &[TaxonSet]) -> PhyloTree {
    PhyloTree::from_laminar(p.n_ids(), laminar)
        .expect("laminarization output is a valid split family")
}

/// Solve a complete A-partite system end to end.
pub fn solve_complete(sys: &CompleteSystem, picker: &mut Picker) -> Result<Solution, SolveFailure> {
    let p = sys.partition();
    let classes = algorithm4(sys, picker).map_err(|_| SolveFailure {
        phase: Phase::Displaying,
        witness: None,
    })?;
    let laminar = match laminarize(&classes, p) {
        Ok(l) => l,
        Err(LaminarizeError::NotLaminarizable) => return Err(laminarization_failure(&classes, p)),
        Err(LaminarizeError::DuplicateClass) => {
            unreachable!("displaying output is deduplicated")
        }
    };
    let tree = build_tree(p, &laminar);
    if let Some(taxa) = sys.family_display_violation(tree.splits()) {
        return Err(SolveFailure {
            phase: Phase::Verification,
            witness: Some(Witness::DisplayMismatch { taxa }),
        });
    }
    Ok(Solution {
        classes,
        laminar,
        tree,
    })
}

/// Solve a full A-partite system end to end.
pub fn solve_full(
    sys: &FullMultipartiteSystem,
    picker: &mut Picker,
) -> Result<Solution, SolveFailure> {
    let p = sys.partition();
    let classes = algorithm5(sys, picker).map_err(|_| SolveFailure {
        phase: Phase::Displaying,
        witness: None,
    })?;
    let laminar = match full_laminarize(&classes, p) {
        Ok(l) => l,
        Err(LaminarizeError::NotLaminarizable) => return Err(laminarization_failure(&classes, p)),
        Err(LaminarizeError::DuplicateClass) => {
            unreachable!("displaying output is deduplicated")
        }
    };
    let tree = build_tree(p, &laminar);
    let splits = tree.splits();
    if let Some(taxa) = sys.cross().family_display_violation(splits) {
        return Err(SolveFailure {
            phase: Phase::Verification,
            witness: Some(Witness::DisplayMismatch { taxa }),
        });
    }
    for w in sys.within() {
        if let Some(taxa) = w.family_display_violation(splits) {
            return Err(SolveFailure {
                phase: Phase::Verification,
                witness: Some(Witness::DisplayMismatch { taxa }),
            });
        }
    }
    Ok(Solution {
        classes,
        laminar,
        tree,
    })
}
