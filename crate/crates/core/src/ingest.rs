//! Quartet extraction from distance data, including the block-restricted
//! setting where each block pair is measured on its own unknown positive
//! scale: the extraction only ever compares sums within one table, so any
//! per-table scaling is invisible.
//!
//! Generic over the scalar type: `f64` for measured data (with a relative
//! tolerance), or an exact rational for integer fixtures.

use crate::quartet::{
    for_cross_tuples, for_four_subsets, CompleteSystem, FullMultipartiteSystem, FullSystem,
    Quartet, SystemError,
};
use crate::taxa::{Taxon, TaxonPartition, TaxonSet};
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::ops::{Add, Mul, Sub};
use thiserror::Error;

/// What a distance value must support; `f64` and `num_rational::Ratio`
/// qualify.
pub trait Scalar:
    Clone + PartialOrd + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
}
impl<T> Scalar for T where
    T: Clone
        + PartialOrd
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
{
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("distance table is not symmetric at ({0}, {1})")]
    Asymmetric(Taxon, Taxon),
    #[error("negative distance at ({0}, {1})")]
    Negative(Taxon, Taxon),
    #[error("nonzero self-distance at {0}")]
    NonzeroDiagonal(Taxon),
    #[error("table shape does not match its taxa")]
    ShapeMismatch,
    #[error("missing distance table for block pair ({0}, {1})")]
    MissingTable(usize, usize),
    #[error("missing within-block distance table for block {0}")]
    MissingBlockTable(usize),
    #[error("{0}")]
    System(#[from] SystemError),
}

/// Two sums are equal within `eps` relative to their magnitude:
/// `|s1 - s2| <= eps * max(1, s1, s2)`.
#[derive(Debug, Clone)]
pub struct Tolerance<T> {
    pub eps: T,
}

impl Default for Tolerance<f64> {
    fn default() -> Self {
        Tolerance { eps: 1e-9 }
    }
}

impl<T: Scalar> Tolerance<T> {
    pub fn new(eps: T) -> Self {
        Tolerance { eps }
    }

    /// Exact comparison (`eps = 0`), the mode for rational fixtures.
    pub fn exact() -> Self {
        Tolerance { eps: T::zero() }
    }

    pub fn approx_eq(&self, a: &T, b: &T) -> bool {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let diff = hi.clone() - lo.clone();
        let scale = if *hi >= T::one() {
            hi.clone()
        } else {
            T::one()
        };
        diff <= self.eps.clone() * scale
    }

    /// Strictly less, beyond the tolerance.
    pub fn lt(&self, a: &T, b: &T) -> bool {
        a < b && !self.approx_eq(a, b)
    }
}

/// A distance table over a row and a column taxa list; square tables are
/// symmetric with a zero diagonal, cross tables are rectangular and looked
/// up in either orientation.
#[derive(Debug, Clone)]
pub struct DistanceTable<T> {
    rows: Vec<Taxon>,
    cols: Vec<Taxon>,
    row_idx: HashMap<Taxon, usize>,
    col_idx: HashMap<Taxon, usize>,
    values: Vec<Vec<T>>,
}

impl<T: Scalar> DistanceTable<T> {
    /// A symmetric table on `taxa` (validated: shape, symmetry, zero
    /// diagonal, nonnegativity).
    pub fn square(taxa: Vec<Taxon>, values: Vec<Vec<T>>, tol: &Tolerance<T>) -> Result<Self, IngestError> {
        let m = taxa.len();
        if values.len() != m || values.iter().any(|r| r.len() != m) {
            return Err(IngestError::ShapeMismatch);
        }
        for i in 0..m {
            if !tol.approx_eq(&values[i][i], &T::zero()) {
                return Err(IngestError::NonzeroDiagonal(taxa[i]));
            }
            for j in 0..m {
                if values[i][j] < T::zero() {
                    return Err(IngestError::Negative(taxa[i], taxa[j]));
                }
                if !tol.approx_eq(&values[i][j], &values[j][i]) {
                    return Err(IngestError::Asymmetric(taxa[i], taxa[j]));
                }
            }
        }
        Ok(Self::table(taxa.clone(), taxa, values))
    }

    /// A rectangular cross table (rows from one block, columns from
    /// another).
    pub fn cross(rows: Vec<Taxon>, cols: Vec<Taxon>, values: Vec<Vec<T>>) -> Result<Self, IngestError> {
        if values.len() != rows.len() || values.iter().any(|r| r.len() != cols.len()) {
            return Err(IngestError::ShapeMismatch);
        }
        for (i, row) in values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v < T::zero() {
                    return Err(IngestError::Negative(rows[i], cols[j]));
                }
            }
        }
        Ok(Self::table(rows, cols, values))
    }

    fn table(rows: Vec<Taxon>, cols: Vec<Taxon>, values: Vec<Vec<T>>) -> Self {
        let row_idx = rows.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let col_idx = cols.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        DistanceTable {
            rows,
            cols,
            row_idx,
            col_idx,
            values,
        }
    }

    pub fn rows(&self) -> &[Taxon] {
        &self.rows
    }

    pub fn cols(&self) -> &[Taxon] {
        &self.cols
    }

    pub fn get(&self, a: Taxon, b: Taxon) -> &T {
        if let (Some(&i), Some(&j)) = (self.row_idx.get(&a), self.col_idx.get(&b)) {
            &self.values[i][j]
        } else {
            let (&i, &j) = (
                self.row_idx.get(&b).expect("taxon in table"),
                self.col_idx.get(&a).expect("taxon in table"),
            );
            &self.values[i][j]
        }
    }

    /// Return the table with every value multiplied by `alpha` (the
    /// per-pair scaling model).
    pub fn scaled(&self, alpha: &T) -> Self {
        let values = self
            .values
            .iter()
            .map(|r| r.iter().map(|v| v.clone() * alpha.clone()).collect())
            .collect();
        Self::table(self.rows.clone(), self.cols.clone(), values)
    }
}

/// Extract the full system on the table's taxa: `ab||cd` exactly when its
/// pair sum is below both alternatives beyond tolerance, otherwise the
/// four-subset stays unresolved (all three weak).
pub fn quartets_from_full_distance<T: Scalar>(
    d: &DistanceTable<T>,
    n: u32,
    tol: &Tolerance<T>,
) -> FullSystem {
    let taxa = TaxonSet::from_taxa(n, d.rows().iter().copied());
    let mut strict: Vec<Quartet> = Vec::new();
    for_four_subsets(d.rows(), |a, b, c, d_| {
        let s_ab = d.get(a, b).clone() + d.get(c, d_).clone();
        let s_ac = d.get(a, c).clone() + d.get(b, d_).clone();
        let s_ad = d.get(a, d_).clone() + d.get(b, c).clone();
        if tol.lt(&s_ab, &s_ac) && tol.lt(&s_ab, &s_ad) {
            strict.push(Quartet::strict(a, b, c, d_));
        } else if tol.lt(&s_ac, &s_ab) && tol.lt(&s_ac, &s_ad) {
            strict.push(Quartet::strict(a, c, b, d_));
        } else if tol.lt(&s_ad, &s_ab) && tol.lt(&s_ad, &s_ac) {
            strict.push(Quartet::strict(a, d_, b, c));
        }
    });
    FullSystem::new(taxa, &strict).expect("one strict quartet per four-subset cannot conflict")
}

/// Extract the complete multipartite system from one cross table per block
/// pair; only cross sums are ever compared, so each table's scale is free.
pub fn quartets_from_block_distances<T: Scalar>(
    tables: &HashMap<(usize, usize), DistanceTable<T>>,
    p: &TaxonPartition,
    tol: &Tolerance<T>,
) -> Result<CompleteSystem, IngestError> {
    let mut strict: Vec<Quartet> = Vec::new();
    for i in 0..p.num_blocks() {
        for j in (i + 1)..p.num_blocks() {
            let d = tables
                .get(&(i, j))
                .or_else(|| tables.get(&(j, i)))
                .ok_or(IngestError::MissingTable(i, j))?;
            let ai = p.block(i).to_vec();
            let aj = p.block(j).to_vec();
            for_cross_tuples(&ai, &aj, |a, ap, b, bp| {
                let s1 = d.get(a, b).clone() + d.get(ap, bp).clone();
                let s2 = d.get(a, bp).clone() + d.get(ap, b).clone();
                if tol.lt(&s1, &s2) {
                    strict.push(Quartet::strict(a, b, ap, bp));
                } else if tol.lt(&s2, &s1) {
                    strict.push(Quartet::strict(a, bp, ap, b));
                }
            });
        }
    }
    Ok(CompleteSystem::new(p.clone(), &strict)?)
}

/// Extract the full A-partite system: the cross extraction plus one full
/// extraction per within-block table.
pub fn quartets_from_all_distances<T: Scalar>(
    cross_tables: &HashMap<(usize, usize), DistanceTable<T>>,
    within_tables: &HashMap<usize, DistanceTable<T>>,
    p: &TaxonPartition,
    tol: &Tolerance<T>,
) -> Result<FullMultipartiteSystem, IngestError> {
    let cross = quartets_from_block_distances(cross_tables, p, tol)?;
    let mut within = Vec::new();
    for i in 0..p.num_blocks() {
        let d = within_tables
            .get(&i)
            .ok_or(IngestError::MissingBlockTable(i))?;
        within.push(quartets_from_full_distance(d, p.n_ids(), tol));
    }
    Ok(FullMultipartiteSystem::new(cross, within)?)
}

/// First four-subset violating the four-point condition (the two largest of
/// the three pair sums must be equal within tolerance), if any.
pub fn four_point_violation<T: Scalar>(
    d: &DistanceTable<T>,
    tol: &Tolerance<T>,
) -> Option<[Taxon; 4]> {
    let mut witness = None;
    crate::quartet::for_four_subsets_until(d.rows(), |a, b, c, d_| {
        let mut sums = [
            d.get(a, b).clone() + d.get(c, d_).clone(),
            d.get(a, c).clone() + d.get(b, d_).clone(),
            d.get(a, d_).clone() + d.get(b, c).clone(),
        ];
        sums.sort_by(|x, y| x.partial_cmp(y).expect("finite distances"));
        if !tol.approx_eq(&sums[1], &sums[2]) {
            witness = Some([a, b, c, d_]);
            true
        } else {
            false
        }
    });
    witness
}

pub fn four_point_holds<T: Scalar>(d: &DistanceTable<T>, tol: &Tolerance<T>) -> bool {
    four_point_violation(d, tol).is_none()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn q(v: i64) -> Q {
        Ratio::from_integer(v)
    }

    fn square_i(taxa: Vec<Taxon>, rows: &[&[i64]]) -> DistanceTable<Q> {
        let values = rows
            .iter()
            .map(|r| r.iter().map(|&v| q(v)).collect())
            .collect();
        DistanceTable::square(taxa, values, &Tolerance::exact()).unwrap()
    }

    #[test]
    fn quartet_path_metric() {
        // a-u-b / c-v-d with unit edges
        let d = square_i(
            vec![0, 1, 2, 3],
            &[
                &[0, 2, 3, 3],
                &[2, 0, 3, 3],
                &[3, 3, 0, 2],
                &[3, 3, 2, 0],
            ],
        );
        let sys = quartets_from_full_distance(&d, 4, &Tolerance::exact());
        assert_eq!(sys.resolution(0, 1, 2, 3), Some(Quartet::strict(0, 1, 2, 3)));
        assert!(four_point_holds(&d, &Tolerance::exact()));
    }

    #[test]
    fn unit_star_all_weak() {
        let d = square_i(
            vec![0, 1, 2, 3],
            &[
                &[0, 2, 2, 2],
                &[2, 0, 2, 2],
                &[2, 2, 0, 2],
                &[2, 2, 2, 0],
            ],
        );
        let sys = quartets_from_full_distance(&d, 4, &Tolerance::exact());
        assert_eq!(sys.resolution(0, 1, 2, 3), None);
    }

    #[test]
    fn planar_points_violate_four_point() {
        // squared... no: plain Euclidean distances of (0,0), (4,0), (0,3),
        // (5,7) — generic, so some pair of sums is strictly unequal
        let d = |x1: f64, y1: f64, x2: f64, y2: f64| ((x1 - x2).powi(2) + (y1 - y2).powi(2)).sqrt();
        let pts = [(0.0, 0.0), (4.0, 0.0), (0.0, 3.0), (5.0, 7.0)];
        let values: Vec<Vec<f64>> = pts
            .iter()
            .map(|&(x1, y1)| pts.iter().map(|&(x2, y2)| d(x1, y1, x2, y2)).collect())
            .collect();
        let table = DistanceTable::square(vec![0, 1, 2, 3], values, &Tolerance::default()).unwrap();
        assert_eq!(
            four_point_violation(&table, &Tolerance::default()),
            Some([0, 1, 2, 3])
        );
    }

    #[test]
    fn block_tables_scale_invariant() {
        let p = TaxonPartition::with_default_names(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        // tree metric of the cherry tree ((0,2),(1,3)): 0-2 close, 1-3 close
        let cross = DistanceTable::cross(
            vec![0, 1],
            vec![2, 3],
            vec![vec![2.0, 4.0], vec![4.0, 2.0]],
        )
        .unwrap();
        let mut tables = HashMap::new();
        tables.insert((0, 1), cross.clone());
        let tol = Tolerance::default();
        let sys = quartets_from_block_distances(&tables, &p, &tol).unwrap();
        assert!(sys.strict_quartets().contains(&Quartet::strict(0, 2, 1, 3)));
        // scaling the table by any alpha > 0 changes nothing
        tables.insert((0, 1), cross.scaled(&7.25));
        let scaled = quartets_from_block_distances(&tables, &p, &tol).unwrap();
        assert_eq!(scaled.strict_quartets(), sys.strict_quartets());
        // missing table
        assert!(matches!(
            quartets_from_block_distances::<f64>(&HashMap::new(), &p, &tol),
            Err(IngestError::MissingTable(0, 1))
        ));
    }

    #[test]
    fn equal_cross_sums_stay_weak() {
        let p = TaxonPartition::with_default_names(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let cross = DistanceTable::cross(
            vec![0, 1],
            vec![2, 3],
            vec![vec![3.0, 3.0], vec![3.0, 3.0]],
        )
        .unwrap();
        let mut tables = HashMap::new();
        tables.insert((0, 1), cross);
        let sys = quartets_from_block_distances(&tables, &p, &Tolerance::default()).unwrap();
        assert!(sys.strict_quartets().is_empty());
    }

    #[test]
    fn table_validation() {
        let tol: Tolerance<f64> = Tolerance::default();
        assert!(matches!(
            DistanceTable::square(vec![0, 1], vec![vec![0.0, 1.0], vec![2.0, 0.0]], &tol),
            Err(IngestError::Asymmetric(..))
        ));
        assert!(matches!(
            DistanceTable::square(vec![0, 1], vec![vec![0.5, 1.0], vec![1.0, 0.0]], &tol),
            Err(IngestError::NonzeroDiagonal(0))
        ));
        assert!(matches!(
            DistanceTable::square(vec![0, 1], vec![vec![0.0, 1.0]], &tol),
            Err(IngestError::ShapeMismatch)
        ));
        assert!(matches!(
            DistanceTable::cross(vec![0], vec![1], vec![vec![-1.0]]),
            Err(IngestError::Negative(0, 1))
        ));
    }

    #[test]
    fn full_multipartite_from_tables() {
        // tree: cherry {0,1} inside block 0 = {0,1,2,3}, block 1 = {4,5};
        // path metric of the tree with splits {0,1} and {0,1,2,3}
        let p = TaxonPartition::with_default_names(6, vec![vec![0, 1, 2, 3], vec![4, 5]]).unwrap();
        let fam = vec![
            TaxonSet::from_taxa(6, [0, 1]),
            TaxonSet::from_taxa(6, [0, 1, 2, 3]),
        ];
        let tree = crate::tree::PhyloTree::from_laminar(6, &fam).unwrap();
        let dist = tree.leaf_distances(&vec![1.0; tree.edges().len()]);
        let tol = Tolerance::default();
        let idx = |a: Taxon, b: Taxon| dist[a as usize][b as usize];
        let mut cross_tables = HashMap::new();
        cross_tables.insert(
            (0, 1),
            DistanceTable::cross(
                vec![0, 1, 2, 3],
                vec![4, 5],
                (0..4).map(|a| vec![idx(a, 4), idx(a, 5)]).collect(),
            )
            .unwrap(),
        );
        let mut within_tables = HashMap::new();
        for (b, taxa) in [(0usize, vec![0, 1, 2, 3]), (1, vec![4, 5])] {
            let vals = taxa
                .iter()
                .map(|&a| taxa.iter().map(|&c| idx(a, c)).collect())
                .collect();
            within_tables.insert(b, DistanceTable::square(taxa, vals, &tol).unwrap());
        }
        let sys = quartets_from_all_distances(&cross_tables, &within_tables, &p, &tol).unwrap();
        // the within-block cherry shows up as a strict quartet
        assert_eq!(
            sys.within()[0].resolution(0, 1, 2, 3),
            Some(Quartet::strict(0, 1, 2, 3))
        );
        // and the tree displays the whole system
        assert!(sys.cross().displayed_by_family(tree.splits()));
        for w in sys.within() {
            assert!(w.displayed_by_family(tree.splits()));
        }
    }
}
