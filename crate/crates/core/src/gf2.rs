//! Dense GF(2) linear algebra on packed bit rows, and the block-wise
//! cohomology of the graded cochain complex.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dga::{coboundary, AtomSet, Cochain, GradedBasis};
use crate::error::{Error, Result};
use crate::poset::{AtomMask, IntersectionPoset, NodeId};

/// A vector over GF(2), 64 entries per word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.toggle(i);
        }
        v
    }

    pub fn unit(len: usize, i: usize) -> Self {
        Self::from_indices(len, [i])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        let bit = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= bit;
        } else {
            self.words[i / 64] &= !bit;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Lowest set index.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }
}

/// Row-major GF(2) matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GF2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

impl GF2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "row length mismatch");
        Self {
            rows: rows.len(),
            cols,
            data: rows,
        }
    }

    /// Matrix whose columns are the given vectors (all of length `rows`).
    pub fn from_columns(rows: usize, columns: &[BitVec]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for r in col.ones() {
                m.set(r, c, true);
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

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.data[r].set(c, v)
    }

    pub fn row(&self, r: usize) -> &BitVec {
        &self.data[r]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for (r, row) in self.data.iter().enumerate() {
            for c in row.ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// `self · v`.
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols);
        let mut out = BitVec::zeros(self.rows);
        for (r, row) in self.data.iter().enumerate() {
            let parity = row.words.iter().zip(&v.words).map(|(a, b)| (a & b).count_ones()).sum::<u32>();
            if parity % 2 == 1 {
                out.set(r, true);
            }
        }
        out
    }
}

/// Incremental row-echelon basis. Each stored row has a pivot (its lowest set
/// index) that no later row contains, so reducing against the rows in
/// insertion order clears every pivot.
///
/// With tracking enabled, every stored row remembers which inserted vectors
/// it is the sum of, which turns reduction into a membership solver.
#[derive(Clone, Debug)]
pub struct Echelon {
    width: usize,
    rows: Vec<BitVec>,
    pivots: Vec<usize>,
    combos: Option<Vec<BitVec>>,
    capacity: usize,
    inserted: usize,
}

impl Echelon {
    pub fn new(width: usize) -> Self {
        Self {
            width,
            rows: Vec::new(),
            pivots: Vec::new(),
            combos: None,
            capacity: 0,
            inserted: 0,
        }
    }

    /// Tracks combinations over at most `capacity` inserted vectors.
    pub fn with_tracking(width: usize, capacity: usize) -> Self {
        Self {
            combos: Some(Vec::new()),
            capacity,
            ..Self::new(width)
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Returns the residual of `v` modulo the span and, when tracking, the
    /// inserted vectors whose sum was subtracted.
    pub fn reduce(&self, v: &BitVec) -> (BitVec, Option<BitVec>) {
        assert_eq!(v.len(), self.width);
        let mut r = v.clone();
        let mut combo = self.combos.as_ref().map(|_| BitVec::zeros(self.capacity));
        for (i, (row, &p)) in self.rows.iter().zip(&self.pivots).enumerate() {
            if r.get(p) {
                r.xor_assign(row);
                if let (Some(c), Some(cs)) = (combo.as_mut(), self.combos.as_ref()) {
                    c.xor_assign(&cs[i]);
                }
            }
        }
        (r, combo)
    }

    /// Inserts `v`; returns the insertion index when `v` was independent of
    /// everything inserted before. Dependent vectors still consume an index.
    pub fn insert(&mut self, v: &BitVec) -> Option<usize> {
        let (r, combo) = self.reduce(v);
        let idx = self.inserted;
        self.inserted += 1;
        let p = r.first_one()?;
        if let Some(cs) = self.combos.as_mut() {
            assert!(idx < self.capacity, "echelon tracking capacity exceeded");
            let mut c = combo.expect("tracking");
            c.toggle(idx);
            cs.push(c);
        }
        self.rows.push(r);
        self.pivots.push(p);
        Some(idx)
    }

    /// Like [`Echelon::insert`], but for a dependent vector returns the
    /// relation it satisfies: the set of inserted indices (including its own)
    /// that sum to zero.
    fn insert_or_relation(&mut self, v: &BitVec) -> std::result::Result<usize, BitVec> {
        let (r, combo) = self.reduce(v);
        let idx = self.inserted;
        if r.is_zero() {
            self.inserted += 1;
            let mut c = combo.expect("relations need tracking");
            c.toggle(idx);
            return Err(c);
        }
        Ok(self.insert(v).expect("independent"))
    }
}

pub fn rank_gf2(m: &GF2Matrix) -> usize {
    let mut e = Echelon::new(m.cols);
    for r in &m.data {
        e.insert(r);
    }
    e.rank()
}

/// Basis of `{x : m x = 0}`, one vector per column that depends on the
/// columns before it (the free columns of the reduced echelon form).
pub fn kernel_basis_gf2(m: &GF2Matrix) -> Vec<BitVec> {
    let t = m.transpose();
    let mut e = Echelon::with_tracking(m.rows, m.cols);
    t.data
        .iter()
        .filter_map(|col| e.insert_or_relation(col).err())
        .collect()
}

/// Coordinates of `target` in terms of `basis`, or `None` when it is not in
/// the span. The basis need not be independent.
pub fn solve_membership(basis: &[BitVec], target: &BitVec) -> Option<BitVec> {
    let mut e = Echelon::with_tracking(target.len(), basis.len());
    for b in basis {
        e.insert(b);
    }
    let (r, combo) = e.reduce(target);
    r.is_zero().then(|| combo.expect("tracking"))
}

/// Cohomology of one `(node, degree)` block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockHomology {
    pub node: NodeId,
    pub degree: i64,
    pub size: usize,
    pub kernel_dim: usize,
    pub betti: usize,
    pub cocycle_reps: Vec<Cochain>,
    pub coboundary_basis: Vec<Cochain>,
    /// `coboundary_basis[i] = δ(coboundary_preimages[i])`
    pub coboundary_preimages: Vec<AtomMask>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologySummary {
    pub blocks: Vec<BlockHomology>,
    /// Nonzero Betti numbers summed over nodes.
    pub total_betti: BTreeMap<i64, usize>,
}

impl HomologySummary {
    pub fn block(&self, node: NodeId, degree: i64) -> Option<&BlockHomology> {
        self.blocks.iter().find(|b| b.node == node && b.degree == degree)
    }

    pub fn betti(&self, degree: i64) -> usize {
        self.total_betti.get(&degree).copied().unwrap_or(0)
    }
}

fn to_cochain(degree: i64, elements: &[AtomMask], v: &BitVec) -> Cochain {
    Cochain::from_terms(degree, v.ones().map(|i| elements[i]))
}

/// Columns of the coboundary from block `src` into the block of the next
/// degree (`dst`, possibly absent).
fn coboundary_columns(
    poset: &IntersectionPoset,
    src: &crate::dga::Block,
    dst: Option<&crate::dga::Block>,
) -> Result<Vec<BitVec>> {
    let width = dst.map_or(0, |b| b.elements.len());
    src.elements
        .iter()
        .map(|&m| {
            let img = coboundary(poset, AtomSet { bits: m, join: src.node });
            let mut col = BitVec::zeros(width);
            for &t in img.terms() {
                let pos = dst.and_then(|b| b.position(t)).ok_or_else(|| {
                    Error::Consistency(format!(
                        "coboundary of {m:#b} leaves block (node {}, degree {})",
                        src.node, src.degree
                    ))
                })?;
                col.toggle(pos);
            }
            Ok(col)
        })
        .collect()
}

fn node_homology(
    poset: &IntersectionPoset,
    basis: &GradedBasis,
    node: NodeId,
) -> Result<Vec<BlockHomology>> {
    let blocks: Vec<&crate::dga::Block> = basis.blocks().iter().filter(|b| b.node == node).collect();
    let cols: Vec<Vec<BitVec>> = blocks
        .iter()
        .map(|b| coboundary_columns(poset, b, basis.block(node, b.degree + 1)))
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        let n = b.elements.len();
        let outgoing = GF2Matrix::from_columns(
            basis.block(node, b.degree + 1).map_or(0, |t| t.elements.len()),
            &cols[i],
        );
        let kernel = kernel_basis_gf2(&outgoing);

        // image of the incoming coboundary, if the previous degree exists
        let incoming = blocks
            .iter()
            .position(|p| p.degree + 1 == b.degree)
            .map(|j| (blocks[j], &cols[j]));

        let mut span = Echelon::new(n);
        let mut cob_basis = Vec::new();
        let mut preimages = Vec::new();
        if let Some((prev, prev_cols)) = incoming {
            for (j, col) in prev_cols.iter().enumerate() {
                if span.insert(col).is_some() {
                    if !outgoing.mul_vec(col).is_zero() {
                        return Err(Error::Consistency(format!(
                            "δδ ≠ 0 on {:#b} (node {node}, degree {})",
                            prev.elements[j], prev.degree
                        )));
                    }
                    cob_basis.push(to_cochain(b.degree, &b.elements, col));
                    preimages.push(prev.elements[j]);
                }
            }
        }
        let image_rank = span.rank();
        let mut reps = Vec::new();
        for z in &kernel {
            if span.insert(z).is_some() {
                reps.push(to_cochain(b.degree, &b.elements, z));
            }
        }
        if reps.len() + image_rank != kernel.len() {
            return Err(Error::Consistency(format!(
                "image of δ not inside the cocycles at node {node}, degree {}",
                b.degree
            )));
        }
        out.push(BlockHomology {
            node,
            degree: b.degree,
            size: n,
            kernel_dim: kernel.len(),
            betti: reps.len(),
            cocycle_reps: reps,
            coboundary_basis: cob_basis,
            coboundary_preimages: preimages,
        });
    }
    Ok(out)
}

/// Cohomology of the cochain algebra, computed independently per join node.
pub fn homology(poset: &IntersectionPoset, basis: &GradedBasis) -> Result<HomologySummary> {
    let per_node: Vec<Vec<BlockHomology>> = (0..poset.len())
        .into_par_iter()
        .map(|u| node_homology(poset, basis, u))
        .collect::<Result<_>>()?;
    let blocks: Vec<BlockHomology> = per_node.into_iter().flatten().collect();
    let mut total_betti = BTreeMap::new();
    for b in &blocks {
        if b.betti > 0 {
            *total_betti.entry(b.degree).or_insert(0) += b.betti;
        }
    }
    Ok(HomologySummary {
        blocks,
        total_betti,
    })
}

/// Betti numbers of the whole complex, one matrix per degree, without using
/// the splitting by join node.
pub fn betti_unsplit(poset: &IntersectionPoset, basis: &GradedBasis) -> BTreeMap<i64, usize> {
    let degrees = basis.degrees();
    let elems: BTreeMap<i64, Vec<AtomMask>> =
        degrees.iter().map(|&k| (k, basis.degree_elements(k))).collect();
    let rank_of = |k: i64| -> usize {
        let (Some(src), Some(dst)) = (elems.get(&k), elems.get(&(k + 1))) else {
            return 0;
        };
        let index: std::collections::HashMap<AtomMask, usize> =
            dst.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let rows: Vec<BitVec> = src
            .iter()
            .map(|&m| {
                let img = coboundary(poset, AtomSet::new(poset, m));
                BitVec::from_indices(dst.len(), img.terms().iter().map(|t| index[t]))
            })
            .collect();
        rank_gf2(&GF2Matrix::from_rows(dst.len(), rows))
    };
    let mut out = BTreeMap::new();
    for &k in &degrees {
        let b = elems[&k].len() - rank_of(k) - rank_of(k - 1);
        if b > 0 {
            out.insert(k, b);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_examples() {
        assert_eq!(rank_gf2(&GF2Matrix::identity(5)), 5);
        assert_eq!(rank_gf2(&GF2Matrix::zeros(3, 4)), 0);
        assert!(kernel_basis_gf2(&GF2Matrix::identity(5)).is_empty());
        assert_eq!(kernel_basis_gf2(&GF2Matrix::zeros(2, 3)).len(), 3);
    }

    #[test]
    fn membership_examples() {
        let basis = vec![BitVec::from_indices(4, [0, 1]), BitVec::from_indices(4, [1, 2])];
        assert_eq!(solve_membership(&basis, &basis[0]), Some(BitVec::unit(2, 0)));
        assert_eq!(solve_membership(&basis, &BitVec::zeros(4)), Some(BitVec::zeros(2)));
        assert_eq!(
            solve_membership(&basis, &BitVec::from_indices(4, [0, 2])),
            Some(BitVec::from_indices(2, [0, 1]))
        );
        assert_eq!(solve_membership(&basis, &BitVec::unit(4, 3)), None);
    }

    #[test]
    fn wide_vectors_cross_word_boundaries() {
        let mut v = BitVec::zeros(130);
        v.set(3, true);
        v.set(64, true);
        v.set(129, true);
        assert_eq!(v.ones().collect::<Vec<_>>(), [3, 64, 129]);
        assert_eq!(v.first_one(), Some(3));
        assert_eq!(v.count_ones(), 3);
        v.toggle(3);
        assert_eq!(v.first_one(), Some(64));
    }

    fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = GF2Matrix> {
        prop::collection::vec(prop::collection::vec(any::<bool>(), cols), rows).prop_map(move |rs| {
            GF2Matrix::from_rows(
                cols,
                rs.into_iter()
                    .map(|r| BitVec::from_indices(cols, r.iter().enumerate().filter(|x| *x.1).map(|x| x.0)))
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn rank_nullity(m in (0usize..9, 0usize..9).prop_flat_map(|(r, c)| matrix(r, c))) {
            let k = kernel_basis_gf2(&m);
            prop_assert_eq!(rank_gf2(&m) + k.len(), m.cols());
            for v in &k {
                prop_assert!(m.mul_vec(v).is_zero());
            }
            prop_assert_eq!(rank_gf2(&m), rank_gf2(&m.transpose()));
        }

        #[test]
        fn membership_of_combinations(m in matrix(5, 70), pick in prop::collection::vec(any::<bool>(), 5)) {
            let rows: Vec<BitVec> = (0..5).map(|i| m.row(i).clone()).collect();
            let mut target = BitVec::zeros(70);
            for (i, &p) in pick.iter().enumerate() {
                if p { target.xor_assign(&rows[i]); }
            }
            let coords = solve_membership(&rows, &target).expect("in span");
            let mut back = BitVec::zeros(70);
            for i in coords.ones() { back.xor_assign(&rows[i]); }
            prop_assert_eq!(back, target);
        }
    }
}
