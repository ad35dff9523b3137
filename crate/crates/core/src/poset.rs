//! The intersection poset of an arrangement.
//!
//! Nodes are all intersections of subsets of atoms, ordered by reverse
//! inclusion: node 0 is the ambient space `W` (the empty intersection) and
//! the join of two nodes is their intersection. Besides the nodes themselves
//! we keep the `node × atom → node` join table, which the cochain algebra
//! queries once per enumerated subset.

use std::collections::HashMap;

use crate::arrangement::Arrangement;
use crate::error::{Error, Result};
use crate::oracle::SimplicialComplex;
use crate::SubspaceBasis;

pub type NodeId = usize;

/// Bit `a` set means atom `a` is a member.
pub type AtomMask = u64;

pub const AMBIENT: NodeId = 0;

#[derive(Clone, Debug)]
pub struct PosetNode {
    pub id: NodeId,
    pub subspace: SubspaceBasis,
    pub dim: usize,
    /// Atoms containing this node's subspace.
    pub atoms_above: AtomMask,
}

#[derive(Clone, Debug)]
pub struct IntersectionPoset {
    ambient_dim: usize,
    num_atoms: usize,
    nodes: Vec<PosetNode>,
    join_table: Vec<NodeId>,
    atom_nodes: Vec<NodeId>,
    top: Option<NodeId>,
}

pub fn build_poset(a: &Arrangement, max_nodes: usize) -> Result<IntersectionPoset> {
    let d = a.ambient_dim();
    let p = a.len();
    let atoms: Vec<&SubspaceBasis> = a.atoms().iter().map(|x| &x.subspace).collect();

    let mut nodes = vec![PosetNode {
        id: AMBIENT,
        subspace: SubspaceBasis::full(d),
        dim: d,
        atoms_above: 0,
    }];
    let mut index: HashMap<SubspaceBasis, NodeId> = HashMap::new();
    index.insert(nodes[0].subspace.clone(), AMBIENT);
    let mut join_table: Vec<NodeId> = Vec::new();

    // Nodes are processed in creation order; each (node, atom) pair is
    // resolved exactly once. New nodes are strictly smaller subspaces, so the
    // worklist terminates.
    let mut next = 0;
    while next < nodes.len() {
        let u = next;
        next += 1;
        for (ai, atom) in atoms.iter().enumerate() {
            if nodes[u].atoms_above >> ai & 1 == 1 {
                join_table.push(u);
                continue;
            }
            let meet = nodes[u].subspace.intersect(atom)?;
            let id = match index.get(&meet) {
                Some(&id) => id,
                None => {
                    if nodes.len() >= max_nodes {
                        return Err(Error::Cap(format!(
                            "intersection poset exceeds {max_nodes} nodes"
                        )));
                    }
                    let mut above = 0;
                    for (bi, other) in atoms.iter().enumerate() {
                        if other.contains(&meet)? {
                            above |= 1 << bi;
                        }
                    }
                    let id = nodes.len();
                    index.insert(meet.clone(), id);
                    nodes.push(PosetNode {
                        id,
                        dim: meet.dim(),
                        subspace: meet,
                        atoms_above: above,
                    });
                    id
                }
            };
            join_table.push(id);
        }
    }

    let atom_nodes: Vec<NodeId> = (0..p).map(|ai| join_table[ai]).collect();
    let top = (p > 0).then(|| {
        (0..p).fold(AMBIENT, |u, ai| join_table[u * p + ai])
    });
    Ok(IntersectionPoset {
        ambient_dim: d,
        num_atoms: p,
        nodes,
        join_table,
        atom_nodes,
        top,
    })
}

impl IntersectionPoset {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn num_atoms(&self) -> usize {
        self.num_atoms
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[PosetNode] {
        &self.nodes
    }

    pub fn node(&self, u: NodeId) -> &PosetNode {
        &self.nodes[u]
    }

    pub fn dim(&self, u: NodeId) -> usize {
        self.nodes[u].dim
    }

    pub fn atoms_above(&self, u: NodeId) -> AtomMask {
        self.nodes[u].atoms_above
    }

    /// Node of the single atom `a`.
    pub fn atom_node(&self, a: usize) -> NodeId {
        self.atom_nodes[a]
    }

    pub fn is_atom_node(&self, u: NodeId) -> bool {
        u != AMBIENT && self.nodes[u].atoms_above.count_ones() == 1
    }

    /// `∩A`, absent for the empty arrangement.
    pub fn top(&self) -> Option<NodeId> {
        self.top
    }

    #[inline]
    pub fn join_with_atom(&self, u: NodeId, a: usize) -> NodeId {
        self.join_table[u * self.num_atoms + a]
    }

    /// Join of an arbitrary set of atoms; the empty set joins to `W`.
    #[inline]
    pub fn join_of_mask(&self, mask: AtomMask) -> NodeId {
        self.extend_join(AMBIENT, mask)
    }

    #[inline]
    pub fn extend_join(&self, mut u: NodeId, mut mask: AtomMask) -> NodeId {
        while mask != 0 {
            let a = mask.trailing_zeros() as usize;
            u = self.join_with_atom(u, a);
            mask &= mask - 1;
        }
        u
    }

    /// Node whose subspace is `subspace(u) ∩ subspace(v)`.
    pub fn join(&self, u: NodeId, v: NodeId) -> NodeId {
        self.extend_join(u, self.nodes[v].atoms_above)
    }

    /// `u ≤ v`, i.e. `subspace(v) ⊆ subspace(u)`. Every node other than `W`
    /// is the intersection of the atoms above it, so this is a subset test.
    pub fn leq(&self, u: NodeId, v: NodeId) -> bool {
        let (a, b) = (self.nodes[u].atoms_above, self.nodes[v].atoms_above);
        a & !b == 0
    }

    pub fn lt(&self, u: NodeId, v: NodeId) -> bool {
        u != v && self.leq(u, v)
    }

    /// Whether `subspace(u) + subspace(v)` is the whole ambient space.
    #[inline]
    pub fn sum_is_ambient(&self, u: NodeId, v: NodeId) -> bool {
        let j = self.join(u, v);
        self.dim(u) + self.dim(v) - self.dim(j) == self.ambient_dim
    }

    /// `μ(W, u)` for every node.
    pub fn mobius_all(&self) -> Vec<i64> {
        let mut order: Vec<NodeId> = (0..self.len()).collect();
        order.sort_by_key(|&u| std::cmp::Reverse(self.dim(u)));
        let mut mu = vec![0i64; self.len()];
        for (i, &u) in order.iter().enumerate() {
            if u == AMBIENT {
                mu[u] = 1;
                continue;
            }
            // Everything strictly below u has strictly larger dimension and
            // so appears earlier in `order`.
            let s: i64 = order[..i].iter().filter(|&&v| self.lt(v, u)).map(|&v| mu[v]).sum();
            mu[u] = -s;
        }
        mu
    }

    pub fn mobius(&self, u: NodeId) -> i64 {
        self.mobius_all()[u]
    }

    /// Nodes strictly between `W` and `u`.
    pub fn open_interval(&self, u: NodeId) -> Vec<NodeId> {
        (1..self.len()).filter(|&v| v != u && self.lt(v, u)).collect()
    }

    /// Order complex of the open interval `(W, u)`: vertices are the interval's
    /// nodes, simplices are its chains.
    pub fn open_interval_complex(&self, u: NodeId) -> SimplicialComplex {
        let mut verts = self.open_interval(u);
        // decreasing dimension is a linear extension of the order
        verts.sort_by_key(|&v| (std::cmp::Reverse(self.dim(v)), v));
        let n = verts.len();
        let above: Vec<Vec<usize>> = (0..n)
            .map(|i| (i + 1..n).filter(|&j| self.lt(verts[i], verts[j])).collect())
            .collect();
        let mut chains = Vec::new();
        let mut stack: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        while let Some(chain) = stack.pop() {
            let last = *chain.last().unwrap();
            for &j in &above[last] {
                let mut c = chain.clone();
                c.push(j);
                stack.push(c);
            }
            chains.push(chain);
        }
        SimplicialComplex::from_closed_family(verts, chains)
    }

    /// Pairs `(u, v)` with `v` covering `u`.
    pub fn cover_relations(&self) -> Vec<(NodeId, NodeId)> {
        let mut covers = Vec::new();
        for v in 0..self.len() {
            let below: Vec<NodeId> = (0..self.len()).filter(|&u| self.lt(u, v)).collect();
            for &u in &below {
                if !below.iter().any(|&w| w != u && self.lt(u, w)) {
                    covers.push((u, v));
                }
            }
        }
        covers
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::{diagonal_arrangement, orbit_config_arrangement, Arrangement};

    fn orbit22() -> IntersectionPoset {
        build_poset(&orbit_config_arrangement(2, 2, 24).unwrap(), 1000).unwrap()
    }

    // Atom ids in generator order are ++, +-, -+, --; the worked example
    // names them H1 (++), H2 (+-), H4 (-+), H3 (--).
    const H1: usize = 0;
    const H2: usize = 1;
    const H3: usize = 3;
    const H4: usize = 2;

    #[test]
    fn orbit22_has_ten_nodes() {
        let p = orbit22();
        assert_eq!(p.len(), 10);
        let mut dims: Vec<usize> = p.nodes().iter().map(|n| n.dim).collect();
        dims.sort();
        assert_eq!(dims, [0, 1, 1, 1, 1, 2, 2, 2, 2, 4]);
        let top = p.top().unwrap();
        assert_eq!(p.dim(top), 0);
        assert_eq!(p.atoms_above(top), 0b1111);
        let line = |a, b| p.join(p.atom_node(a), p.atom_node(b));
        for (a, b) in [(H1, H2), (H1, H4), (H2, H3), (H3, H4)] {
            assert_eq!(p.dim(line(a, b)), 1);
            assert_eq!(p.atoms_above(line(a, b)), 1 << a | 1 << b);
        }
        assert_eq!(line(H1, H3), top);
        assert_eq!(line(H2, H4), top);
    }

    #[test]
    fn trivial_posets() {
        let empty = Arrangement::new(3, vec![]).unwrap();
        let p = build_poset(&empty, 10).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.top(), None);
        let p = build_poset(&diagonal_arrangement(2, 2, 24).unwrap(), 10).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.top(), Some(1));
    }

    #[test]
    fn node_cap() {
        let a = orbit_config_arrangement(2, 2, 24).unwrap();
        assert!(matches!(build_poset(&a, 9), Err(Error::Cap(_))));
    }

    #[test]
    fn join_and_sum_examples() {
        let p = orbit22();
        let (h1, h2, h3) = (p.atom_node(H1), p.atom_node(H2), p.atom_node(H3));
        assert_eq!(p.join(AMBIENT, h1), h1);
        assert_eq!(p.join(h1, h1), h1);
        assert_eq!(p.join(h1, h3), p.top().unwrap());
        assert!(p.sum_is_ambient(h1, h3));
        assert!(!p.sum_is_ambient(h1, h2));
        for u in 0..p.len() {
            assert!(p.sum_is_ambient(AMBIENT, u));
        }
    }

    #[test]
    fn mobius_values() {
        let p = orbit22();
        let mu = p.mobius_all();
        assert_eq!(mu[AMBIENT], 1);
        assert_eq!(mu[p.top().unwrap()], -1);
        assert_eq!(mu.iter().sum::<i64>(), 0);

        let p = build_poset(&orbit_config_arrangement(1, 2, 24).unwrap(), 100).unwrap();
        assert_eq!(p.mobius_all(), [1, -1, -1, 1]);
    }

    #[test]
    fn interval_complexes() {
        let p = orbit22();
        let c = p.open_interval_complex(p.atom_node(H1));
        assert!(c.is_empty());
        let c = p.open_interval_complex(p.top().unwrap());
        assert_eq!(c.vertex_count(), 8);
        assert_eq!(c.simplices_of_dim(1).len(), 8);
        assert_eq!(c.simplices_of_dim(2).len(), 0);
        let l12 = p.join(p.atom_node(H1), p.atom_node(H2));
        let c = p.open_interval_complex(l12);
        let mut labels = c.labels().to_vec();
        labels.sort();
        assert_eq!(labels, [p.atom_node(H1), p.atom_node(H2)]);
        assert_eq!(c.simplices_of_dim(1).len(), 0);
    }

    #[test]
    fn lattice_checks_on_orbit_2_3() {
        let p = build_poset(&orbit_config_arrangement(2, 3, 24).unwrap(), 100_000).unwrap();
        for u in 0..p.len() {
            for v in 0..p.len() {
                let j = p.join(u, v);
                let meet = p.node(u).subspace.intersect(&p.node(v).subspace).unwrap();
                assert_eq!(p.node(j).subspace, meet);
                let above = p.atoms_above(j);
                assert_eq!(above & (p.atoms_above(u) | p.atoms_above(v)), p.atoms_above(u) | p.atoms_above(v));
                let contained = p.node(u).subspace.contains(&p.node(v).subspace).unwrap();
                assert_eq!(p.leq(u, v), contained);
            }
        }
        let mu = p.mobius_all();
        assert_eq!(mu.iter().sum::<i64>(), 0);
    }

    #[test]
    fn rebuilding_from_node_subspaces_is_stable() {
        let a = orbit_config_arrangement(1, 3, 24).unwrap();
        let p = build_poset(&a, 1000).unwrap();
        // Feed the atoms back in a different order: same node set.
        let mut atoms: Vec<_> = a.atoms().iter().map(|x| (x.name.clone(), x.subspace.clone())).collect();
        atoms.reverse();
        let q = build_poset(&Arrangement::new(a.ambient_dim(), atoms).unwrap(), 1000).unwrap();
        let mut s1: Vec<_> = p.nodes().iter().map(|n| n.subspace.clone()).collect();
        let mut s2: Vec<_> = q.nodes().iter().map(|n| n.subspace.clone()).collect();
        let key = |s: &SubspaceBasis| format!("{s:?}");
        s1.sort_by_key(key);
        s2.sort_by_key(key);
        assert_eq!(s1, s2);
    }

    #[test]
    fn cover_relations_orbit22() {
        let p = orbit22();
        // 4 atoms over W, 2 atoms under each of 4 lines, 4 lines under origin
        assert_eq!(p.cover_relations().len(), 4 + 8 + 4);
    }
}
