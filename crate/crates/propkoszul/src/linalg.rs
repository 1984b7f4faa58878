//! Sparse exact rational matrices, rank and kernel computations, and chain
//! complexes with homology dimensions. Everything downstream reduces to the
//! eliminations in this module, so they are kept deliberately simple: the
//! matrices stay small (at most a few thousand columns at the truncations we
//! run) and exactness matters more than asymptotics.

use crate::{rint, Rat};
use num::{BigInt, Signed, Zero};
use std::collections::BTreeMap;

/// Sparse vector: index -> nonzero rational.
pub type SparseVec = BTreeMap<usize, Rat>;

/// Adds `coef * e_idx` into a sparse vector, dropping explicit zeros.
pub fn sv_add(v: &mut SparseVec, idx: usize, coef: &Rat) {
    if coef.is_zero() {
        return;
    }
    let entry = v.entry(idx).or_insert_with(Rat::zero);
    *entry += coef;
    if entry.is_zero() {
        v.remove(&idx);
    }
}

/// Adds `coef * w` into `v`.
pub fn sv_add_scaled(v: &mut SparseVec, w: &SparseVec, coef: &Rat) {
    for (i, c) in w {
        sv_add(v, *i, &(c * coef));
    }
}

/// Sparse rational matrix stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<SparseVec>,
}

impl RationalMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![SparseVec::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, rint(1));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zero(r, c);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        if v.is_zero() {
            self.data[r].remove(&c);
        } else {
            self.data[r].insert(c, v);
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Rat {
        self.data[r].get(&c).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: &Rat) {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        sv_add(&mut self.data[r], c, v);
    }

    pub fn row(&self, r: usize) -> &SparseVec {
        &self.data[r]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_empty())
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|r| r.len()).sum()
    }

    pub fn transpose(&self) -> RationalMatrix {
        let mut t = Self::zero(self.cols, self.rows);
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row {
                t.data[*j].insert(i, v.clone());
            }
        }
        t
    }

    /// Column `c` as a sparse vector.
    pub fn col(&self, c: usize) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, row) in self.data.iter().enumerate() {
            if let Some(v) = row.get(&c) {
                out.insert(i, v.clone());
            }
        }
        out
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Self::zero(self.rows, other.cols);
        for (i, row) in self.data.iter().enumerate() {
            for (k, a) in row {
                for (j, b) in &other.data[*k] {
                    out.add_to(i, *j, &(a * b));
                }
            }
        }
        out
    }

    /// Applies the matrix to a sparse (column) vector.
    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, row) in self.data.iter().enumerate() {
            let mut acc = Rat::zero();
            for (j, a) in row {
                if let Some(b) = v.get(j) {
                    acc += a * b;
                }
            }
            if !acc.is_zero() {
                out.insert(i, acc);
            }
        }
        out
    }

    /// Horizontal concatenation [self | other].
    pub fn hstack(&self, other: &RationalMatrix) -> RationalMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = Self::zero(self.rows, self.cols + other.cols);
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row {
                out.data[i].insert(*j, v.clone());
            }
        }
        for (i, row) in other.data.iter().enumerate() {
            for (j, v) in row {
                out.data[i].insert(self.cols + *j, v.clone());
            }
        }
        out
    }

    /// Rank over the rationals via fraction-free (Bareiss) elimination on
    /// denominator-cleared integer rows. Pivot rows are chosen among the
    /// candidates by minimal fill.
    pub fn rank(&self) -> usize {
        // Clear denominators row by row; row scaling does not change rank.
        let mut rows: Vec<BTreeMap<usize, BigInt>> = self
            .data
            .iter()
            .map(|row| {
                let mut lcm = BigInt::from(1);
                for v in row.values() {
                    lcm = num::integer::lcm(lcm, v.denom().clone());
                }
                row.iter()
                    .map(|(j, v)| (*j, v.numer() * (&lcm / v.denom())))
                    .collect()
            })
            .collect();
        let mut rank = 0usize;
        let mut prev_pivot = BigInt::from(1);
        let mut active: Vec<usize> = (0..rows.len()).collect();
        for col in 0..self.cols {
            // Candidate rows with a nonzero entry in this column; pick the
            // sparsest to limit fill-in.
            let mut best: Option<(usize, usize)> = None;
            for (pos, &r) in active.iter().enumerate().skip(rank) {
                if rows[r].contains_key(&col) {
                    let fill = rows[r].len();
                    if best.map_or(true, |(_, bf)| fill < bf) {
                        best = Some((pos, fill));
                    }
                }
            }
            let Some((pos, _)) = best else { continue };
            active.swap(rank, pos);
            let piv_row = active[rank];
            let piv = rows[piv_row].get(&col).unwrap().clone();
            for &r in active.iter().skip(rank + 1) {
                let Some(x) = rows[r].get(&col).cloned() else {
                    continue;
                };
                // Bareiss step: row_r <- (piv * row_r - x * row_piv) / prev_pivot.
                let piv_entries: Vec<(usize, BigInt)> = rows[piv_row]
                    .iter()
                    .map(|(j, v)| (*j, v.clone()))
                    .collect();
                let mut new_row: BTreeMap<usize, BigInt> = BTreeMap::new();
                for (j, v) in rows[r].iter() {
                    new_row.insert(*j, v * &piv);
                }
                for (j, v) in piv_entries {
                    let e = new_row.entry(j).or_insert_with(BigInt::zero);
                    *e -= &x * &v;
                    if e.is_zero() {
                        new_row.remove(&j);
                    }
                }
                rows[r] = new_row
                    .into_iter()
                    .map(|(j, v)| {
                        debug_assert!((&v % &prev_pivot).is_zero());
                        (j, v / &prev_pivot)
                    })
                    .filter(|(_, v)| !v.is_zero())
                    .collect();
                rows[r].remove(&col);
            }
            prev_pivot = piv;
            rank += 1;
            if rank == self.rows.min(self.cols) {
                break;
            }
        }
        rank
    }

    /// Reduced row echelon form; returns (rref rows, pivot columns).
    pub fn rref(&self) -> (Vec<SparseVec>, Vec<usize>) {
        let mut rows: Vec<SparseVec> = self.data.iter().filter(|r| !r.is_empty()).cloned().collect();
        let mut pivots: Vec<usize> = Vec::new();
        let mut done = 0usize;
        for col in 0..self.cols {
            let mut best: Option<(usize, usize)> = None;
            for (i, row) in rows.iter().enumerate().skip(done) {
                if let Some(first) = row.keys().next() {
                    if *first == col {
                        let fill = row.len();
                        if best.map_or(true, |(_, bf)| fill < bf) {
                            best = Some((i, fill));
                        }
                    }
                }
            }
            let Some((i, _)) = best else { continue };
            rows.swap(done, i);
            // Normalize pivot to 1.
            let piv = rows[done].get(&col).unwrap().clone();
            if piv != rint(1) {
                for v in rows[done].values_mut() {
                    *v /= &piv;
                }
            }
            let pivot_row = rows[done].clone();
            for (k, row) in rows.iter_mut().enumerate() {
                if k == done {
                    continue;
                }
                if let Some(c) = row.get(&col).cloned() {
                    let neg = -c;
                    sv_add_scaled(row, &pivot_row, &neg);
                }
            }
            pivots.push(col);
            done += 1;
            rows.retain(|r| !r.is_empty());
            if done >= rows.len() {
                // All remaining rows were reduced to zero.
            }
            if done == rows.len() {
                break;
            }
        }
        rows.truncate(done);
        (rows, pivots)
    }

    /// Basis of the right kernel, as columns of the returned matrix;
    /// the column count equals `cols - rank`.
    pub fn kernel_basis(&self) -> RationalMatrix {
        let (rows, pivots) = self.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().cloned().collect();
        let free_cols: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut out = RationalMatrix::zero(self.cols, free_cols.len());
        for (k, &fc) in free_cols.iter().enumerate() {
            out.set(fc, k, rint(1));
            for (i, &pc) in pivots.iter().enumerate() {
                if let Some(v) = rows[i].get(&fc) {
                    out.set(pc, k, -v.clone());
                }
            }
        }
        out
    }

    /// Solves `self * x = b` exactly. Returns `None` when inconsistent.
    pub fn solve(&self, b: &SparseVec) -> Option<SparseVec> {
        let mut rhs = RationalMatrix::zero(self.rows, 1);
        for (i, v) in b {
            rhs.set(*i, 0, v.clone());
        }
        let sols = self.solve_matrix(&rhs)?;
        Some(sols.col(0))
    }

    /// Solves `self * X = B` columnwise; `None` when some column is
    /// inconsistent. Free variables are set to zero.
    pub fn solve_matrix(&self, b: &RationalMatrix) -> Option<RationalMatrix> {
        assert_eq!(self.rows, b.rows, "rhs row mismatch");
        let aug = self.hstack(b);
        let (rows, pivots) = aug.rref();
        let mut out = RationalMatrix::zero(self.cols, b.cols);
        for (i, &p) in pivots.iter().enumerate() {
            if p >= self.cols {
                // A pivot in the augmented block means inconsistency.
                return None;
            }
            for (j, v) in rows[i].range(self.cols..) {
                out.set(p, j - self.cols, v.clone());
            }
            // Any dependence of pivot variables on free variables is fine:
            // free variables are taken as zero, so entries of row i at
            // non-pivot columns < self.cols are dropped.
        }
        Some(out)
    }
}

/// A finite chain complex: `components[i]` is the dimension in homological
/// degree `degree_offset + i`, and `boundaries[i]` maps degree `i` to
/// degree `i - 1` (so `boundaries[0]` maps into the zero space below).
#[derive(Clone, Debug)]
pub struct ChainComplex {
    pub degree_offset: i64,
    pub components: Vec<usize>,
    pub boundaries: Vec<RationalMatrix>,
}

impl ChainComplex {
    pub fn new(degree_offset: i64, components: Vec<usize>, boundaries: Vec<RationalMatrix>) -> Self {
        ChainComplex {
            degree_offset,
            components,
            boundaries,
        }
    }

    /// Checks shapes and `d ∘ d = 0`; reports the degree of the first
    /// failure.
    pub fn validate(&self) -> crate::Result<()> {
        assert_eq!(self.components.len(), self.boundaries.len());
        for i in 0..self.components.len() {
            assert_eq!(
                self.boundaries[i].cols(),
                self.components[i],
                "boundary {i} has wrong column count"
            );
            if i > 0 {
                assert_eq!(
                    self.boundaries[i].rows(),
                    self.components[i - 1],
                    "boundary {i} has wrong row count"
                );
            }
        }
        for i in 1..self.components.len() {
            if !self.boundaries[i - 1].mul(&self.boundaries[i]).is_zero() {
                return Err(crate::Error::BoundaryCheck(self.degree_offset + i as i64));
            }
        }
        Ok(())
    }

    /// Homology dimensions by ascending degree:
    /// `dim H_i = dim ker(d_i) - rank(d_{i+1})`.
    pub fn homology_dims(&self) -> Vec<usize> {
        let n = self.components.len();
        let ranks: Vec<usize> = self.boundaries.iter().map(|b| b.rank()).collect();
        (0..n)
            .map(|i| {
                let ker = self.components[i] - ranks[i];
                let im_above = if i + 1 < n { ranks[i + 1] } else { 0 };
                ker - im_above
            })
            .collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.components
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let sign = if (self.degree_offset + i as i64).rem_euclid(2) == 0 {
                    1
                } else {
                    -1
                };
                sign * *d as i64
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;
    use proptest::prelude::*;

    /// Textbook dense elimination, kept independent of the sparse routines
    /// above; used as the oracle for rank/kernel checks.
    fn dense_rank(rows: usize, cols: usize, get: impl Fn(usize, usize) -> Rat) -> usize {
        let mut a: Vec<Vec<Rat>> = (0..rows)
            .map(|i| (0..cols).map(|j| get(i, j)).collect())
            .collect();
        let mut rank = 0;
        for col in 0..cols {
            let piv = (rank..rows).find(|&r| !a[r][col].is_zero());
            let Some(piv) = piv else { continue };
            a.swap(rank, piv);
            for r in 0..rows {
                if r != rank && !a[r][col].is_zero() {
                    let f = a[r][col].clone() / a[rank][col].clone();
                    for c in 0..cols {
                        let sub = f.clone() * a[rank][c].clone();
                        a[r][c] -= sub;
                    }
                }
            }
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }

    #[test]
    fn rank_identity() {
        assert_eq!(RationalMatrix::identity(2).rank(), 2);
    }

    #[test]
    fn rank_zero_matrix() {
        assert_eq!(RationalMatrix::zero(3, 4).rank(), 0);
    }

    #[test]
    fn rank_proportional_rows() {
        let m = RationalMatrix::from_rows(vec![
            vec![rint(1), rint(2)],
            vec![rint(2), rint(4)],
        ]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        let k = RationalMatrix::identity(3).kernel_basis();
        assert_eq!(k.cols(), 0);
    }

    #[test]
    fn kernel_of_zero_map() {
        let k = RationalMatrix::zero(2, 3).kernel_basis();
        assert_eq!(k.cols(), 3);
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        // [[1,1,1]] has a 2-dimensional kernel; check M·v = 0 directly.
        let m = RationalMatrix::from_rows(vec![vec![rint(1), rint(1), rint(1)]]);
        let k = m.kernel_basis();
        assert_eq!(k.cols(), 2);
        assert!(m.mul(&k).is_zero());
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = RationalMatrix::from_rows(vec![
            vec![rint(1), rint(0)],
            vec![rint(0), rint(2)],
            vec![rint(1), rint(2)],
        ]);
        let mut b = SparseVec::new();
        b.insert(0, rint(3));
        b.insert(1, rint(4));
        b.insert(2, rint(7));
        let x = m.solve(&b).expect("consistent system");
        assert_eq!(x.get(&0), Some(&rint(3)));
        assert_eq!(x.get(&1), Some(&rat(2, 1)));
        b.insert(2, rint(8));
        assert!(m.solve(&b).is_none());
    }

    #[test]
    fn homology_single_component() {
        let c = ChainComplex::new(0, vec![1], vec![RationalMatrix::zero(0, 1)]);
        c.validate().unwrap();
        assert_eq!(c.homology_dims(), vec![1]);
    }

    #[test]
    fn homology_identity_boundary() {
        let c = ChainComplex::new(
            0,
            vec![1, 1],
            vec![RationalMatrix::zero(0, 1), RationalMatrix::identity(1)],
        );
        c.validate().unwrap();
        assert_eq!(c.homology_dims(), vec![0, 0]);
    }

    #[test]
    fn validate_catches_non_square_zero() {
        let c = ChainComplex::new(
            0,
            vec![1, 1, 1],
            vec![
                RationalMatrix::zero(0, 1),
                RationalMatrix::identity(1),
                RationalMatrix::identity(1),
            ],
        );
        assert!(matches!(c.validate(), Err(crate::Error::BoundaryCheck(2))));
    }

    proptest! {
        #[test]
        fn rank_plus_nullity_is_cols(entries in proptest::collection::vec((0usize..5, 0usize..6, -3i64..4), 0..14)) {
            let mut m = RationalMatrix::zero(5, 6);
            for (r, c, v) in entries {
                m.set(r, c, rint(v));
            }
            let rank = m.rank();
            let kernel = m.kernel_basis();
            prop_assert_eq!(rank + kernel.cols(), m.cols());
            prop_assert!(m.mul(&kernel).is_zero());
            prop_assert_eq!(rank, dense_rank(5, 6, |i, j| m.get(i, j)));
        }

        #[test]
        fn euler_characteristic_matches_homology(dims in proptest::collection::vec(0usize..4, 1..4)) {
            // Complexes with zero boundaries: homology equals the components.
            let boundaries: Vec<RationalMatrix> = dims
                .iter()
                .enumerate()
                .map(|(i, &d)| {
                    let rows = if i == 0 { 0 } else { dims[i - 1] };
                    RationalMatrix::zero(rows, d)
                })
                .collect();
            let c = ChainComplex::new(0, dims.clone(), boundaries);
            c.validate().unwrap();
            let h = c.homology_dims();
            let chi: i64 = h
                .iter()
                .enumerate()
                .map(|(i, d)| if i % 2 == 0 { *d as i64 } else { -(*d as i64) })
                .sum();
            prop_assert_eq!(chi, c.euler_characteristic());
        }
    }
}
