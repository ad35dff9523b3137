//! The relative atomic cochain algebra over `Z_2`.
//!
//! Basis elements are subsets `σ` of atoms, graded by
//! `deg σ = d(W) - |σ| - d(∨σ)`. The coboundary removes one atom at a time,
//! keeping only removals that leave the join unchanged, so it never mixes
//! joins: the complex is a direct sum of one subcomplex per poset node. The
//! product is set union, and is zero unless the two joins span `W`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poset::{AtomMask, IntersectionPoset, NodeId, AMBIENT};

/// A subset of atoms together with its join.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomSet {
    pub bits: AtomMask,
    pub join: NodeId,
}

impl AtomSet {
    pub fn new(poset: &IntersectionPoset, bits: AtomMask) -> Self {
        Self {
            bits,
            join: poset.join_of_mask(bits),
        }
    }

    pub fn empty() -> Self {
        Self {
            bits: 0,
            join: AMBIENT,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn degree(&self, poset: &IntersectionPoset) -> i64 {
        grading(poset, self.bits, self.join)
    }
}

#[inline]
fn grading(poset: &IntersectionPoset, bits: AtomMask, join: NodeId) -> i64 {
    poset.ambient_dim() as i64 - bits.count_ones() as i64 - poset.dim(join) as i64
}

/// `d(W) - |σ| - d(∨σ)`.
pub fn degree(poset: &IntersectionPoset, bits: AtomMask) -> i64 {
    grading(poset, bits, poset.join_of_mask(bits))
}

/// Atom ids of a mask, ascending.
pub fn mask_atoms(mask: AtomMask) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

/// A homogeneous `Z_2`-combination of basis subsets, kept as a sorted list of
/// distinct masks.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cochain {
    degree: i64,
    terms: Vec<AtomMask>,
}

impl Cochain {
    pub fn zero(degree: i64) -> Self {
        Self {
            degree,
            terms: Vec::new(),
        }
    }

    /// Sums the given masks mod 2 (repeated masks cancel in pairs).
    pub fn from_terms(degree: i64, terms: impl IntoIterator<Item = AtomMask>) -> Self {
        let mut terms: Vec<AtomMask> = terms.into_iter().collect();
        cancel_pairs(&mut terms);
        Self { degree, terms }
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn terms(&self) -> &[AtomMask] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_assign(&mut self, other: &Cochain) {
        debug_assert_eq!(self.degree, other.degree);
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        self.terms = out;
    }
}

/// Sorts and removes masks occurring an even number of times.
fn cancel_pairs(terms: &mut Vec<AtomMask>) {
    terms.sort_unstable();
    let mut out = Vec::with_capacity(terms.len());
    let mut i = 0;
    while i < terms.len() {
        let mut j = i;
        while j < terms.len() && terms[j] == terms[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(terms[i]);
        }
        i = j;
    }
    *terms = out;
}

/// Coboundary of one basis element: the sum of `σ∖{a}` over atoms `a ∈ σ`
/// whose removal keeps the join. `δ(∅) = 0`.
pub fn coboundary(poset: &IntersectionPoset, sigma: AtomSet) -> Cochain {
    let deg = sigma.degree(poset) + 1;
    let mut terms = Vec::new();
    let mut rest = sigma.bits;
    while rest != 0 {
        let bit = rest & rest.wrapping_neg();
        rest &= rest - 1;
        let smaller = sigma.bits & !bit;
        if poset.join_of_mask(smaller) == sigma.join {
            terms.push(smaller);
        }
    }
    terms.sort_unstable();
    Cochain { degree: deg, terms }
}

pub fn coboundary_cochain(poset: &IntersectionPoset, c: &Cochain) -> Cochain {
    let mut terms = Vec::new();
    for &m in &c.terms {
        terms.extend_from_slice(&coboundary(poset, AtomSet::new(poset, m)).terms);
    }
    Cochain::from_terms(c.degree + 1, terms)
}

/// `σ ∪ τ` when `∨σ + ∨τ = W`, otherwise `None`.
#[inline]
pub fn product_mask(poset: &IntersectionPoset, s: AtomSet, t: AtomSet) -> Option<AtomMask> {
    poset.sum_is_ambient(s.join, t.join).then_some(s.bits | t.bits)
}

pub fn product(poset: &IntersectionPoset, s: AtomSet, t: AtomSet) -> Cochain {
    let deg = s.degree(poset) + t.degree(poset);
    Cochain::from_terms(deg, product_mask(poset, s, t))
}

/// Bilinear extension of [`product`].
pub fn cochain_product(poset: &IntersectionPoset, a: &Cochain, b: &Cochain) -> Cochain {
    let sa: Vec<AtomSet> = a.terms.iter().map(|&m| AtomSet::new(poset, m)).collect();
    let sb: Vec<AtomSet> = b.terms.iter().map(|&m| AtomSet::new(poset, m)).collect();
    let mut terms = Vec::new();
    for &s in &sa {
        for &t in &sb {
            if let Some(m) = product_mask(poset, s, t) {
                terms.push(m);
            }
        }
    }
    Cochain::from_terms(a.degree + b.degree, terms)
}

/// All basis subsets with join `node` and degree `degree`, in ascending mask
/// order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub node: NodeId,
    pub degree: i64,
    pub elements: Vec<AtomMask>,
}

impl Block {
    pub fn position(&self, mask: AtomMask) -> Option<usize> {
        self.elements.binary_search(&mask).ok()
    }
}

/// Every subset of atoms, filed by `(join, degree)`. Blocks are ordered by
/// node id, then degree.
#[derive(Clone, Debug)]
pub struct GradedBasis {
    blocks: Vec<Block>,
    index: HashMap<(NodeId, i64), usize>,
    total: usize,
}

impl GradedBasis {
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, node: NodeId, degree: i64) -> Option<&Block> {
        self.index.get(&(node, degree)).map(|&i| &self.blocks[i])
    }

    pub fn block_index(&self, node: NodeId, degree: i64) -> Option<usize> {
        self.index.get(&(node, degree)).copied()
    }

    /// Total number of basis elements.
    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// `(block index, position)` of a subset.
    pub fn locate(&self, poset: &IntersectionPoset, mask: AtomMask) -> Option<(usize, usize)> {
        let join = poset.join_of_mask(mask);
        let b = self.block_index(join, grading(poset, mask, join))?;
        Some((b, self.blocks[b].position(mask)?))
    }

    /// All elements of one degree across every node, ascending by node.
    pub fn degree_elements(&self, degree: i64) -> Vec<AtomMask> {
        self.blocks
            .iter()
            .filter(|b| b.degree == degree)
            .flat_map(|b| b.elements.iter().copied())
            .collect()
    }

    pub fn degrees(&self) -> Vec<i64> {
        let mut d: Vec<i64> = self.blocks.iter().map(|b| b.degree).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// `Σ_σ (-1)^{deg σ}`.
    pub fn euler_characteristic(&self) -> i64 {
        self.blocks
            .iter()
            .map(|b| if b.degree % 2 == 0 { 1 } else { -1 } * b.elements.len() as i64)
            .sum()
    }
}

/// Number of subsets the enumeration visits, `Σ_u 2^|A_u|`, and the node with
/// the most atoms above it.
pub fn enumeration_cost(poset: &IntersectionPoset) -> (u128, NodeId) {
    let mut total: u128 = 0;
    let mut worst = AMBIENT;
    for n in poset.nodes() {
        total = total.saturating_add(1u128 << n.atoms_above.count_ones());
        if n.atoms_above.count_ones() > poset.atoms_above(worst).count_ones() {
            worst = n.id;
        }
    }
    (total, worst)
}

pub fn enumerate_basis(poset: &IntersectionPoset, max_subsets: usize) -> Result<GradedBasis> {
    let (cost, worst) = enumeration_cost(poset);
    if cost > max_subsets as u128 {
        return Err(Error::Cap(format!(
            "basis enumeration visits {cost} atom subsets, cap is {max_subsets}; \
             bottleneck is poset node {worst} with |A_u| = {} (dim {})",
            poset.atoms_above(worst).count_ones(),
            poset.dim(worst)
        )));
    }

    let per_node: Vec<Vec<Block>> = (0..poset.len())
        .into_par_iter()
        .map(|u| node_blocks(poset, u))
        .collect();

    let mut blocks = Vec::new();
    let mut index = HashMap::new();
    let mut total = 0;
    for b in per_node.into_iter().flatten() {
        total += b.elements.len();
        index.insert((b.node, b.degree), blocks.len());
        blocks.push(b);
    }
    Ok(GradedBasis {
        blocks,
        index,
        total,
    })
}

/// Subsets of `A_u` whose join is exactly `u`, grouped by degree.
fn node_blocks(poset: &IntersectionPoset, u: NodeId) -> Vec<Block> {
    let atoms = mask_atoms(poset.atoms_above(u));
    let mut found = Vec::new();
    // Include/exclude recursion; the join of the included prefix is carried
    // along so each step is one table lookup.
    fn walk(
        poset: &IntersectionPoset,
        atoms: &[usize],
        target: NodeId,
        mask: AtomMask,
        join: NodeId,
        out: &mut Vec<AtomMask>,
    ) {
        match atoms.split_first() {
            None => {
                if join == target {
                    out.push(mask);
                }
            }
            Some((&a, rest)) => {
                walk(poset, rest, target, mask, join, out);
                walk(poset, rest, target, mask | 1 << a, poset.join_with_atom(join, a), out);
            }
        }
    }
    walk(poset, &atoms, u, 0, AMBIENT, &mut found);

    let d_u = poset.dim(u) as i64;
    let top = poset.ambient_dim() as i64;
    let mut by_degree: std::collections::BTreeMap<i64, Vec<AtomMask>> = Default::default();
    for m in found {
        by_degree.entry(top - m.count_ones() as i64 - d_u).or_default().push(m);
    }
    by_degree
        .into_iter()
        .map(|(degree, mut elements)| {
            elements.sort_unstable();
            Block {
                node: u,
                degree,
                elements,
            }
        })
        .collect()
}

/// A failed identity together with the subsets that witness it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub check: String,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub detail: String,
}

/// Outcome of the exhaustive cochain-level checks.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PropertyAudit {
    pub elements: usize,
    pub pairs_checked: u64,
    pub skipped: Option<String>,
    pub delta_squared_violations: usize,
    pub grading_violations: usize,
    pub additivity_violations: usize,
    pub disjointness_violations: usize,
    pub leibniz_violations: usize,
    pub witnesses: Vec<Witness>,
}

impl PropertyAudit {
    /// No violations among the checks that ran.
    pub fn is_clean(&self) -> bool {
        self.delta_squared_violations
                + self.grading_violations
                + self.additivity_violations
                + self.disjointness_violations
                + self.leibniz_violations
                == 0
    }

    pub fn is_complete(&self) -> bool {
        self.skipped.is_none()
    }
}

const MAX_WITNESSES: usize = 16;

struct Element {
    set: AtomSet,
    degree: i64,
    /// coboundary terms with their joins
    delta: Vec<AtomSet>,
    delta_bits: Vec<AtomMask>,
}

/// Exhaustively checks `δ² = 0`, the grading of `δ`, and for every ordered
/// pair `(σ, τ)`: disjointness and degree additivity of nonzero products and
/// the Leibniz rule `δ(σ∘τ) = δσ∘τ + σ∘δτ`.
///
/// Pair checks are quadratic in the basis size and are skipped above
/// `max_elements`.
pub fn audit_properties(
    poset: &IntersectionPoset,
    basis: &GradedBasis,
    max_elements: usize,
) -> PropertyAudit {
    let mut audit = PropertyAudit {
        elements: basis.len(),
        ..Default::default()
    };

    let elements: Vec<Element> = basis
        .blocks()
        .par_iter()
        .flat_map_iter(|b| {
            b.elements.iter().map(move |&m| {
                let set = AtomSet::new(poset, m);
                let delta_bits = coboundary(poset, set).terms;
                let delta = delta_bits.iter().map(|&t| AtomSet::new(poset, t)).collect();
                Element {
                    set,
                    degree: set.degree(poset),
                    delta,
                    delta_bits,
                }
            })
        })
        .collect();

    let mut witnesses = Vec::new();
    for e in &elements {
        for t in &e.delta {
            if t.join != e.set.join || t.degree(poset) != e.degree + 1 {
                audit.grading_violations += 1;
                if witnesses.len() < MAX_WITNESSES {
                    witnesses.push(Witness {
                        check: "grading".into(),
                        left: mask_atoms(e.set.bits),
                        right: mask_atoms(t.bits),
                        detail: "coboundary term changes join or degree".into(),
                    });
                }
            }
        }
        let dd = coboundary_cochain(poset, &Cochain::from_terms(e.degree + 1, e.delta.iter().map(|t| t.bits)));
        if !dd.is_zero() {
            audit.delta_squared_violations += 1;
            if witnesses.len() < MAX_WITNESSES {
                witnesses.push(Witness {
                    check: "delta_squared".into(),
                    left: mask_atoms(e.set.bits),
                    right: vec![],
                    detail: format!("δδσ has {} terms", dd.terms.len()),
                });
            }
        }
    }

    if elements.len() > max_elements {
        audit.skipped = Some(format!(
            "pair checks skipped: {} basis elements exceed the audit limit {max_elements}",
            elements.len()
        ));
        audit.witnesses = witnesses;
        return audit;
    }

    let position: HashMap<AtomMask, usize> =
        elements.iter().enumerate().map(|(i, e)| (e.set.bits, i)).collect();
    let nodes = poset.len();
    let ambient_table: Option<Vec<bool>> = (nodes <= 4096).then(|| {
        (0..nodes * nodes)
            .into_par_iter()
            .map(|i| poset.sum_is_ambient(i / nodes, i % nodes))
            .collect()
    });
    let spans = |u: NodeId, v: NodeId| match &ambient_table {
        Some(t) => t[u * nodes + v],
        None => poset.sum_is_ambient(u, v),
    };

    #[derive(Default)]
    struct Tally {
        additivity: usize,
        disjointness: usize,
        leibniz: usize,
        witnesses: Vec<Witness>,
    }

    let tallies: Vec<Tally> = elements
        .par_iter()
        .map(|s| {
            let mut tally = Tally::default();
            let mut rhs: Vec<AtomMask> = Vec::new();
            for t in &elements {
                let note = |tally: &mut Tally, check: &str, detail: String| {
                    if tally.witnesses.len() < MAX_WITNESSES {
                        tally.witnesses.push(Witness {
                            check: check.into(),
                            left: mask_atoms(s.set.bits),
                            right: mask_atoms(t.set.bits),
                            detail,
                        });
                    }
                };
                let nonzero = spans(s.set.join, t.set.join);
                let lhs: &[AtomMask] = if nonzero {
                    let union = s.set.bits | t.set.bits;
                    if s.set.bits & t.set.bits != 0 {
                        tally.disjointness += 1;
                        note(&mut tally, "disjointness", "nonzero product of overlapping subsets".into());
                    }
                    let deg = degree(poset, union);
                    if deg != s.degree + t.degree {
                        tally.additivity += 1;
                        note(&mut tally, "additivity", format!("deg(σ∪τ) = {deg}, expected {}", s.degree + t.degree));
                    }
                    position.get(&union).map_or(&[], |&i| elements[i].delta_bits.as_slice())
                } else {
                    &[]
                };
                rhs.clear();
                for d in &s.delta {
                    if spans(d.join, t.set.join) {
                        rhs.push(d.bits | t.set.bits);
                    }
                }
                for d in &t.delta {
                    if spans(s.set.join, d.join) {
                        rhs.push(s.set.bits | d.bits);
                    }
                }
                cancel_pairs(&mut rhs);
                if lhs != rhs.as_slice() {
                    tally.leibniz += 1;
                    note(&mut tally, "leibniz", format!("δ(σ∘τ) = {lhs:?}, δσ∘τ + σ∘δτ = {rhs:?}"));
                }
            }
            tally
        })
        .collect();

    audit.pairs_checked = (elements.len() as u64).pow(2);
    for t in tallies {
        audit.additivity_violations += t.additivity;
        audit.disjointness_violations += t.disjointness;
        audit.leibniz_violations += t.leibniz;
        for w in t.witnesses {
            if witnesses.len() < MAX_WITNESSES {
                witnesses.push(w);
            }
        }
    }
    audit.witnesses = witnesses;
    audit
}
