//! Cohomology ring: class basis, structure constants and audits.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dga::{coboundary_cochain, cochain_product, mask_atoms, Cochain, GradedBasis};
use crate::error::{Error, Result};
use crate::gf2::{BitVec, BlockHomology, Echelon, HomologySummary};
use crate::poset::{IntersectionPoset, NodeId, AMBIENT};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Class {
    pub label: String,
    pub degree: i64,
    pub node: NodeId,
    pub representative: Cochain,
}

/// Reduces cocycles of one block modulo coboundaries onto the block's class
/// representatives.
#[derive(Debug)]
struct BlockReducer {
    elements: Vec<u64>,
    echelon: Echelon,
    coboundaries: usize,
    /// global class ids of the representatives, in insertion order
    classes: Vec<usize>,
}

impl BlockReducer {
    fn new(elements: &[u64], hom: &BlockHomology, first_class: usize) -> Self {
        let n = elements.len();
        let cap = hom.coboundary_basis.len() + hom.cocycle_reps.len();
        let mut echelon = Echelon::with_tracking(n, cap);
        let to_vec = |c: &Cochain| {
            BitVec::from_indices(n, c.terms().iter().map(|t| elements.binary_search(t).expect("term in block")))
        };
        for c in hom.coboundary_basis.iter().chain(&hom.cocycle_reps) {
            echelon.insert(&to_vec(c));
        }
        Self {
            elements: elements.to_vec(),
            echelon,
            coboundaries: hom.coboundary_basis.len(),
            classes: (first_class..first_class + hom.cocycle_reps.len()).collect(),
        }
    }

    /// Class ids whose sum is cohomologous to `terms`, or `None` if `terms`
    /// is outside cocycles of this block.
    fn classes_of(&self, terms: &[u64]) -> Option<Vec<usize>> {
        let n = self.elements.len();
        let mut v = BitVec::zeros(n);
        for t in terms {
            v.toggle(self.elements.binary_search(t).ok()?);
        }
        let (residual, combo) = self.echelon.reduce(&v);
        if !residual.is_zero() {
            return None;
        }
        let combo = combo.expect("tracking");
        Some(
            combo
                .ones()
                .filter(|&i| i >= self.coboundaries)
                .map(|i| self.classes[i - self.coboundaries])
                .collect(),
        )
    }
}

#[derive(Debug)]
pub struct CohomologyRing {
    classes: Vec<Class>,
    by_degree: BTreeMap<i64, Vec<usize>>,
    local: Vec<usize>,
    unit: Option<usize>,
    reducers: HashMap<(NodeId, i64), BlockReducer>,
    /// `(deg a, deg b) → row-major table over local indices`, each entry a
    /// coordinate vector over the classes of degree `deg a + deg b`.
    table: BTreeMap<(i64, i64), Vec<BitVec>>,
}

/// Product of two classes reduced to class coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductEntry {
    pub left: String,
    pub right: String,
    pub result: Vec<String>,
}

impl CohomologyRing {
    pub fn classes(&self) -> &[Class] {
        &self.classes
    }

    pub fn class(&self, id: usize) -> &Class {
        &self.classes[id]
    }

    pub fn classes_of_degree(&self, k: i64) -> &[usize] {
        self.by_degree.get(&k).map_or(&[], |v| v.as_slice())
    }

    /// The class of `∅`.
    pub fn unit(&self) -> Option<usize> {
        self.unit
    }

    pub fn betti(&self) -> BTreeMap<i64, usize> {
        self.by_degree.iter().map(|(&k, v)| (k, v.len())).collect()
    }

    /// Global ids of `a · b`.
    pub fn product(&self, a: usize, b: usize) -> Vec<usize> {
        let (ca, cb) = (&self.classes[a], &self.classes[b]);
        let row = &self.table[&(ca.degree, cb.degree)];
        let nb = self.classes_of_degree(cb.degree).len();
        let target = self.classes_of_degree(ca.degree + cb.degree);
        row[self.local[a] * nb + self.local[b]].ones().map(|i| target[i]).collect()
    }

    /// Nonzero products in table order.
    pub fn nonzero_products(&self) -> Vec<ProductEntry> {
        let mut out = Vec::new();
        for a in 0..self.classes.len() {
            for b in 0..self.classes.len() {
                let r = self.product(a, b);
                if !r.is_empty() {
                    out.push(ProductEntry {
                        left: self.classes[a].label.clone(),
                        right: self.classes[b].label.clone(),
                        result: r.iter().map(|&c| self.classes[c].label.clone()).collect(),
                    });
                }
            }
        }
        out
    }

    /// Classes cohomologous to a cocycle. Errors when `c` is not a cocycle.
    pub fn reduce(&self, poset: &IntersectionPoset, c: &Cochain) -> Result<Vec<usize>> {
        if !coboundary_cochain(poset, c).is_zero() {
            return Err(Error::Consistency(format!(
                "cochain {:?} of degree {} is not a cocycle",
                c.terms().iter().map(|&m| mask_atoms(m)).collect::<Vec<_>>(),
                c.degree()
            )));
        }
        let mut by_node: BTreeMap<NodeId, Vec<u64>> = BTreeMap::new();
        for &t in c.terms() {
            by_node.entry(poset.join_of_mask(t)).or_default().push(t);
        }
        let mut out = Vec::new();
        for (node, terms) in by_node {
            let reducer = self.reducers.get(&(node, c.degree())).ok_or_else(|| {
                Error::Consistency(format!("no block (node {node}, degree {})", c.degree()))
            })?;
            let ids = reducer.classes_of(&terms).ok_or_else(|| {
                Error::Consistency(format!(
                    "cocycle component at node {node}, degree {} cannot be reduced",
                    c.degree()
                ))
            })?;
            out.extend(ids);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Unit law, commutativity and degree bounds of the structure table.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let n = self.classes.len();
        if n > 0 {
            match self.unit {
                None => problems.push("no unit class".to_string()),
                Some(u) => {
                    for x in 0..n {
                        if self.product(u, x) != [x] || self.product(x, u) != [x] {
                            problems.push(format!("unit law fails on {}", self.classes[x].label));
                        }
                    }
                }
            }
        }
        let top = self.by_degree.keys().next_back().copied();
        for a in 0..n {
            for b in 0..n {
                let ab = self.product(a, b);
                if ab != self.product(b, a) {
                    problems.push(format!(
                        "{}·{} ≠ {}·{}",
                        self.classes[a].label, self.classes[b].label, self.classes[b].label, self.classes[a].label
                    ));
                }
                let deg = self.classes[a].degree + self.classes[b].degree;
                if !ab.is_empty() && top.is_some_and(|t| deg > t) {
                    problems.push(format!(
                        "{}·{} nonzero above the top degree",
                        self.classes[a].label, self.classes[b].label
                    ));
                }
            }
        }
        problems
    }
}

/// Builds class labels, reducers and the full structure table.
pub fn compute_ring(
    poset: &IntersectionPoset,
    basis: &GradedBasis,
    hom: &HomologySummary,
) -> Result<CohomologyRing> {
    // classes ordered by degree, then node, then representative order
    let mut order: Vec<&BlockHomology> = hom.blocks.iter().collect();
    order.sort_by_key(|b| (b.degree, b.node));

    let mut classes = Vec::new();
    let mut by_degree: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let mut local = Vec::new();
    let mut reducers = HashMap::new();
    let mut unit = None;
    for b in order {
        let block = basis
            .block(b.node, b.degree)
            .ok_or_else(|| Error::Consistency(format!("missing block ({}, {})", b.node, b.degree)))?;
        reducers.insert((b.node, b.degree), BlockReducer::new(&block.elements, b, classes.len()));
        for rep in &b.cocycle_reps {
            let ids = by_degree.entry(b.degree).or_default();
            let id = classes.len();
            if b.node == AMBIENT && rep.terms() == [0] {
                unit = Some(id);
            }
            local.push(ids.len());
            classes.push(Class {
                label: format!("h{}_{}", b.degree, ids.len()),
                degree: b.degree,
                node: b.node,
                representative: rep.clone(),
            });
            ids.push(id);
        }
    }

    let mut ring = CohomologyRing {
        classes,
        by_degree,
        local,
        unit,
        reducers,
        table: BTreeMap::new(),
    };

    let degrees: Vec<i64> = ring.by_degree.keys().copied().collect();
    let mut table = BTreeMap::new();
    for &k in &degrees {
        for &l in &degrees {
            let left = ring.classes_of_degree(k).to_vec();
            let right = ring.classes_of_degree(l).to_vec();
            let target = ring.classes_of_degree(k + l);
            let entries: Vec<BitVec> = left
                .par_iter()
                .flat_map_iter(|&a| right.iter().map(move |&b| (a, b)))
                .map(|(a, b)| {
                    let ids = product_classes(&ring, poset, a, b)?;
                    let coords = ids.iter().map(|id| {
                        target.iter().position(|t| t == id).expect("class of the product degree")
                    });
                    Ok(BitVec::from_indices(target.len(), coords))
                })
                .collect::<Result<_>>()?;
            table.insert((k, l), entries);
        }
    }
    ring.table = table;
    Ok(ring)
}

fn product_classes(ring: &CohomologyRing, poset: &IntersectionPoset, a: usize, b: usize) -> Result<Vec<usize>> {
    let (ca, cb) = (&ring.classes[a], &ring.classes[b]);
    let prod = cochain_product(poset, &ca.representative, &cb.representative);
    ring.reduce(poset, &prod).map_err(|e| {
        Error::Consistency(format!("product {}·{}: {e}", ca.label, cb.label))
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IndependenceAudit {
    pub perturbations: usize,
    pub discrepancies: usize,
    pub witnesses: Vec<String>,
}

fn perturb(rng: &mut ChaCha8Rng, hom: &BlockHomology, rep: &Cochain) -> Cochain {
    let mut c = rep.clone();
    for cob in &hom.coboundary_basis {
        if rng.random_bool(0.5) {
            c.add_assign(cob);
        }
    }
    c
}

/// For every class `a`, `samples` times: add random coboundaries to the
/// representatives of `a` and of a random partner `b`, multiply, reduce, and
/// compare with the stored table entry.
pub fn audit_representative_independence(
    ring: &CohomologyRing,
    poset: &IntersectionPoset,
    hom: &HomologySummary,
    samples: usize,
    seed: u64,
) -> IndependenceAudit {
    let n = ring.classes.len();
    let blocks: HashMap<(NodeId, i64), &BlockHomology> =
        hom.blocks.iter().map(|b| ((b.node, b.degree), b)).collect();
    let results: Vec<(usize, Vec<String>)> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (a as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut bad = 0;
            let mut witnesses = Vec::new();
            let ca = &ring.classes[a];
            for _ in 0..samples {
                let b = rng.random_range(0..n);
                let cb = &ring.classes[b];
                let za = perturb(&mut rng, blocks[&(ca.node, ca.degree)], &ca.representative);
                let zb = perturb(&mut rng, blocks[&(cb.node, cb.degree)], &cb.representative);
                let got = ring.reduce(poset, &cochain_product(poset, &za, &zb));
                let want = ring.product(a, b);
                if got.as_ref().ok() != Some(&want) {
                    bad += 1;
                    if witnesses.len() < 4 {
                        witnesses.push(format!(
                            "{}·{}: table {:?}, perturbed {:?}",
                            ca.label, cb.label, want, got
                        ));
                    }
                }
            }
            (bad, witnesses)
        })
        .collect();
    let mut audit = IndependenceAudit {
        perturbations: n * samples,
        ..Default::default()
    };
    for (bad, w) in results {
        audit.discrepancies += bad;
        audit.witnesses.extend(w);
    }
    audit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::{diagonal_arrangement, orbit_config_arrangement, Arrangement};
    use crate::dga::enumerate_basis;
    use crate::gf2::homology;
    use crate::poset::build_poset;

    fn ring_of(a: &Arrangement) -> (IntersectionPoset, HomologySummary, CohomologyRing) {
        let p = build_poset(a, 100_000).unwrap();
        let basis = enumerate_basis(&p, 1 << 22).unwrap();
        let hom = homology(&p, &basis).unwrap();
        let ring = compute_ring(&p, &basis, &hom).unwrap();
        (p, hom, ring)
    }

    /// Mask from worked-example labels 1..4 (H1 ++, H2 +-, H3 --, H4 -+).
    fn h(labels: &[usize]) -> u64 {
        const ID: [usize; 5] = [usize::MAX, 0, 1, 3, 2];
        labels.iter().fold(0, |m, &l| m | 1 << ID[l])
    }

    #[test]
    fn worked_example_ring() {
        let (p, _, ring) = ring_of(&orbit_config_arrangement(2, 2, 24).unwrap());
        assert_eq!(ring.betti(), BTreeMap::from([(0, 1), (1, 9)]));
        assert!(ring.check_invariants().is_empty());
        let unit = ring.unit().unwrap();
        assert_eq!(ring.class(unit).representative.terms(), [0]);
        for &a in ring.classes_of_degree(1) {
            for &b in ring.classes_of_degree(1) {
                assert!(ring.product(a, b).is_empty());
            }
        }
        // the origin contributes exactly one class, (123) + (134)
        let origin = p.top().unwrap();
        let at_origin: Vec<&Class> = ring.classes().iter().filter(|c| c.node == origin).collect();
        assert_eq!(at_origin.len(), 1);
        let mut expected = vec![h(&[1, 2, 3]), h(&[1, 3, 4])];
        expected.sort_unstable();
        assert_eq!(at_origin[0].representative.terms(), expected);
    }

    #[test]
    fn worked_example_reductions() {
        let (p, _, ring) = ring_of(&orbit_config_arrangement(2, 2, 24).unwrap());
        // 13 and 24 are coboundaries
        for l in [[1, 3], [2, 4]] {
            assert!(ring.reduce(&p, &Cochain::from_terms(2, [h(&l)])).unwrap().is_empty());
        }
        // the other origin generator is cohomologous to the chosen one
        let alt = Cochain::from_terms(1, [h(&[1, 2, 4]), h(&[2, 3, 4])]);
        let id = ring.reduce(&p, &alt).unwrap();
        assert_eq!(id.len(), 1);
        assert_eq!(ring.class(id[0]).node, p.top().unwrap());
        // a single triple is not a cocycle
        assert!(matches!(
            ring.reduce(&p, &Cochain::from_terms(1, [h(&[1, 2, 3])])),
            Err(Error::Consistency(_))
        ));
    }

    /// Squares of `low`-degree classes vanish and their products span the
    /// classes of twice that degree.
    fn assert_generated_in_degree(ring: &CohomologyRing, low: i64) {
        let gens = ring.classes_of_degree(low);
        let top = ring.classes_of_degree(2 * low);
        let mut span = Echelon::new(top.len());
        for &a in gens {
            assert!(ring.product(a, a).is_empty());
            for &b in gens {
                let v = BitVec::from_indices(
                    top.len(),
                    ring.product(a, b).iter().map(|id| top.iter().position(|t| t == id).unwrap()),
                );
                span.insert(&v);
            }
        }
        assert_eq!(span.rank(), top.len());
    }

    #[test]
    fn planar_configuration_ring() {
        // Conf(3, R^2) has Poincaré polynomial (1 + t)(1 + 2t)
        let (_, _, ring) = ring_of(&diagonal_arrangement(2, 3, 24).unwrap());
        assert_eq!(ring.betti(), BTreeMap::from([(0, 1), (1, 3), (2, 2)]));
        assert!(ring.check_invariants().is_empty());
        assert_generated_in_degree(&ring, 1);
    }

    #[test]
    fn spatial_configuration_ring() {
        // Conf(3, R^3) has Poincaré polynomial (1 + t^2)(1 + 2t^2)
        let (_, _, ring) = ring_of(&diagonal_arrangement(3, 3, 24).unwrap());
        assert_eq!(ring.betti(), BTreeMap::from([(0, 1), (2, 3), (4, 2)]));
        assert!(ring.check_invariants().is_empty());
        assert_generated_in_degree(&ring, 2);
    }

    #[test]
    fn independence_audit_is_clean() {
        for a in [
            orbit_config_arrangement(2, 2, 24).unwrap(),
            diagonal_arrangement(2, 3, 24).unwrap(),
            orbit_config_arrangement(3, 2, 24).unwrap(),
        ] {
            let (p, hom, ring) = ring_of(&a);
            let audit = audit_representative_independence(&ring, &p, &hom, 20, 7);
            assert_eq!(audit.perturbations, 20 * ring.classes().len());
            assert_eq!(audit.discrepancies, 0, "{:?}", audit.witnesses);
        }
    }

    #[test]
    fn hyperplane_complement_has_betti_only_in_degree_zero() {
        let (_, _, ring) = ring_of(&orbit_config_arrangement(1, 3, 24).unwrap());
        assert_eq!(ring.betti(), BTreeMap::from([(0, 24)]));
        assert!(ring.check_invariants().is_empty());
    }

    #[test]
    fn codimension_one_atom_squares_to_zero() {
        // A point in a line. The combinatorial product of {H} with itself
        // vanishes because H + H ≠ W, so the degree-0 algebra is Z_2[x]/x²,
        // while the cohomology of two points is Z_2 × Z_2. Products are only
        // faithful when atoms have codimension at least 2.
        let (p, _, ring) = ring_of(&diagonal_arrangement(1, 2, 24).unwrap());
        assert_eq!(ring.betti(), BTreeMap::from([(0, 2)]));
        let x = ring.classes().iter().position(|c| c.node != AMBIENT).unwrap();
        assert_eq!(ring.class(x).node, p.atom_node(0));
        assert!(ring.product(x, x).is_empty());
    }
}
