//! Independent Betti numbers from order complexes of poset intervals, plus
//! chamber counts for hyperplane arrangements.
//!
//! For a real arrangement in `W`, the mod-2 cohomology of the complement is
//!
//! ```text
//! b^k = [k = 0] + Σ_{u > W} dim H̃_{d(W) - d(u) - k - 2}(Δ(W, u); Z_2)
//! ```
//!
//! with `H̃_{-1}` of the empty complex equal to `Z_2`, which makes each atom
//! contribute once in degree `codim - 1`. None of this touches the cochain
//! algebra.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num::{BigInt, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arrangement::Arrangement;
use crate::error::{Error, Result};
use crate::gf2::{BitVec, Echelon};
use crate::poset::{IntersectionPoset, AMBIENT};

/// Finite abstract simplicial complex. Simplices are sorted tuples of local
/// vertex indices; `labels[i]` names vertex `i`. The complex with no vertices
/// is `{∅}`, whose only reduced homology is in degree −1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    labels: Vec<usize>,
    by_dim: Vec<Vec<Vec<usize>>>,
}

impl SimplicialComplex {
    /// Closes `facets` under taking faces.
    pub fn from_facets(labels: Vec<usize>, facets: &[Vec<usize>]) -> Self {
        let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
        for f in facets {
            let mut f = f.clone();
            f.sort_unstable();
            f.dedup();
            let k = f.len();
            for mask in 1u64..(1u64 << k) {
                all.insert((0..k).filter(|i| mask >> i & 1 == 1).map(|i| f[i]).collect());
            }
        }
        for i in 0..labels.len() {
            all.insert(vec![i]);
        }
        Self::from_closed_family(labels, all.into_iter().collect())
    }

    /// Takes a family already closed under faces (such as all chains of a
    /// poset).
    pub fn from_closed_family(labels: Vec<usize>, simplices: Vec<Vec<usize>>) -> Self {
        let mut by_dim: Vec<Vec<Vec<usize>>> = Vec::new();
        for s in simplices {
            let d = s.len() - 1;
            if by_dim.len() <= d {
                by_dim.resize(d + 1, Vec::new());
            }
            by_dim[d].push(s);
        }
        for level in &mut by_dim {
            level.sort_unstable();
            level.dedup();
        }
        Self { labels, by_dim }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn simplices_of_dim(&self, d: usize) -> &[Vec<usize>] {
        self.by_dim.get(d).map_or(&[], |v| v.as_slice())
    }

    pub fn dimension(&self) -> Option<usize> {
        self.by_dim.len().checked_sub(1)
    }

    /// Same complex with vertex `i` renamed to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let labels = (0..self.labels.len())
            .map(|i| self.labels[perm.iter().position(|&p| p == i).expect("permutation")])
            .collect();
        let simplices = self
            .by_dim
            .iter()
            .flatten()
            .map(|s| {
                let mut t: Vec<usize> = s.iter().map(|&v| perm[v]).collect();
                t.sort_unstable();
                t
            })
            .collect();
        Self::from_closed_family(labels, simplices)
    }
}

/// Rank of `∂_d : C_d → C_{d-1}`, where `C_{-1}` is spanned by the empty
/// simplex (so `∂_0` is the augmentation).
fn boundary_rank(c: &SimplicialComplex, d: usize) -> usize {
    let cells = c.simplices_of_dim(d);
    if cells.is_empty() {
        return 0;
    }
    if d == 0 {
        return 1;
    }
    let faces = c.simplices_of_dim(d - 1);
    let index: HashMap<&[usize], usize> = faces.iter().enumerate().map(|(i, f)| (f.as_slice(), i)).collect();
    let mut e = Echelon::new(faces.len());
    let mut face = Vec::with_capacity(d);
    for s in cells {
        let mut col = BitVec::zeros(faces.len());
        for skip in 0..s.len() {
            face.clear();
            face.extend(s.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
            col.toggle(index[face.as_slice()]);
        }
        e.insert(&col);
    }
    e.rank()
}

/// Nonzero reduced Betti numbers over `Z_2`, keyed by degree (≥ −1).
pub fn reduced_betti_z2(c: &SimplicialComplex) -> BTreeMap<i64, usize> {
    let mut out = BTreeMap::new();
    if c.is_empty() {
        out.insert(-1, 1);
        return out;
    }
    let top = c.dimension().unwrap_or(0);
    let ranks: Vec<usize> = (0..=top + 1).map(|d| boundary_rank(c, d)).collect();
    for d in 0..=top {
        let b = c.simplices_of_dim(d).len() - ranks[d] - ranks[d + 1];
        if b > 0 {
            out.insert(d as i64, b);
        }
    }
    out
}

/// Per-node contribution to the Betti numbers: `(node, degree, count)`.
pub fn gm_contributions(p: &IntersectionPoset) -> Vec<(usize, i64, usize)> {
    let d_w = p.ambient_dim() as i64;
    let per_node: Vec<Vec<(usize, i64, usize)>> = (1..p.len())
        .into_par_iter()
        .map(|u| {
            let h = reduced_betti_z2(&p.open_interval_complex(u));
            let codim = d_w - p.dim(u) as i64;
            h.into_iter().map(|(j, c)| (u, codim - 2 - j, c)).collect()
        })
        .collect();
    let mut out = vec![(AMBIENT, 0, 1)];
    out.extend(per_node.into_iter().flatten());
    out
}

/// Betti numbers of the complement from order-complex homology; nonzero
/// entries only.
pub fn gm_betti(p: &IntersectionPoset) -> BTreeMap<i64, usize> {
    let mut out = BTreeMap::new();
    for (_, k, c) in gm_contributions(p) {
        *out.entry(k).or_insert(0) += c;
    }
    out
}

/// `Σ_u |μ(W, u)|`, the number of chambers of a hyperplane arrangement.
pub fn zaslavsky_chambers(p: &IntersectionPoset) -> Result<u64> {
    let d = p.ambient_dim();
    for a in 0..p.num_atoms() {
        if p.dim(p.atom_node(a)) + 1 != d {
            return Err(Error::NotApplicable(format!(
                "atom {a} has codimension {}, chamber counting needs hyperplanes",
                d - p.dim(p.atom_node(a))
            )));
        }
    }
    Ok(p.mobius_all().iter().map(|m| m.unsigned_abs()).sum())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChamberSampling {
    pub distinct_sign_vectors: u64,
    pub samples: u64,
    pub stable: bool,
}

/// Counts distinct all-nonzero sign vectors of the defining functionals at
/// random integer points. Stops once `window` consecutive samples found
/// nothing new, or after `max_samples`.
pub fn sample_chambers(
    a: &Arrangement,
    seed: u64,
    window: u64,
    max_samples: u64,
) -> Result<ChamberSampling> {
    if !a.is_hyperplane_arrangement() {
        return Err(Error::NotApplicable("sign-vector sampling needs hyperplanes".into()));
    }
    let d = a.ambient_dim();
    // integer normals: clear denominators of the single defining equation
    let normals: Vec<Vec<i128>> = a
        .atoms()
        .iter()
        .map(|atom| {
            let eq = atom.subspace.equations();
            let row = eq.row(0);
            let lcm = row.iter().fold(BigInt::from(1), |acc, q| num::integer::lcm(acc, q.denom().clone()));
            row.iter()
                .map(|q| (q.numer() * (&lcm / q.denom())).to_i128())
                .collect::<Option<Vec<i128>>>()
                .ok_or_else(|| Error::NotApplicable("hyperplane coefficients overflow i128".into()))
        })
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: BTreeSet<Vec<bool>> = BTreeSet::new();
    let mut since_new = 0;
    let mut samples = 0;
    while samples < max_samples && since_new < window {
        samples += 1;
        let x: Vec<i128> = (0..d).map(|_| rng.random_range(-1_000_000i64..=1_000_000) as i128).collect();
        let mut signs = Vec::with_capacity(normals.len());
        let mut on_wall = false;
        for n in &normals {
            let v: i128 = n.iter().zip(&x).map(|(a, b)| a * b).sum();
            if v == 0 {
                on_wall = true;
                break;
            }
            signs.push(v > 0);
        }
        if on_wall {
            continue;
        }
        if seen.insert(signs) {
            since_new = 0;
        } else {
            since_new += 1;
        }
    }
    Ok(ChamberSampling {
        distinct_sign_vectors: seen.len() as u64,
        samples,
        stable: since_new >= window,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeComparison {
    pub degree: i64,
    pub dga: usize,
    pub oracle: usize,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChamberCheck {
    pub mobius_count: u64,
    pub sampling: Option<ChamberSampling>,
    pub b0_matches: bool,
    pub higher_betti_vanish: bool,
    pub sampling_matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Comparison {
    pub degrees: Vec<DegreeComparison>,
    pub euler_dga: i64,
    pub euler_oracle: i64,
    pub chambers: Option<ChamberCheck>,
    pub all_equal: bool,
}

pub fn euler_characteristic(betti: &BTreeMap<i64, usize>) -> i64 {
    betti
        .iter()
        .map(|(&k, &b)| if k.rem_euclid(2) == 0 { b as i64 } else { -(b as i64) })
        .sum()
}

/// Degree-by-degree comparison over `0..=ambient_dim` plus any stray degree
/// either side reports.
pub fn compare(
    ambient_dim: usize,
    dga: &BTreeMap<i64, usize>,
    oracle: &BTreeMap<i64, usize>,
    chambers: Option<(u64, Option<ChamberSampling>)>,
) -> Comparison {
    let mut degrees: BTreeSet<i64> = (0..=ambient_dim as i64).collect();
    degrees.extend(dga.keys());
    degrees.extend(oracle.keys());
    let degrees: Vec<DegreeComparison> = degrees
        .into_iter()
        .map(|k| {
            let (x, y) = (dga.get(&k).copied().unwrap_or(0), oracle.get(&k).copied().unwrap_or(0));
            DegreeComparison {
                degree: k,
                dga: x,
                oracle: y,
                equal: x == y,
            }
        })
        .collect();
    let chambers = chambers.map(|(count, sampling)| {
        let b0 = |m: &BTreeMap<i64, usize>| m.get(&0).copied().unwrap_or(0) as u64;
        let higher = |m: &BTreeMap<i64, usize>| m.iter().all(|(&k, &b)| k == 0 || b == 0);
        ChamberCheck {
            mobius_count: count,
            b0_matches: b0(dga) == count && b0(oracle) == count,
            higher_betti_vanish: higher(dga) && higher(oracle),
            sampling_matches: sampling.as_ref().is_none_or(|s| s.distinct_sign_vectors == count),
            sampling,
        }
    });
    let euler_dga = euler_characteristic(dga);
    let euler_oracle = euler_characteristic(oracle);
    let all_equal = degrees.iter().all(|d| d.equal)
        && euler_dga == euler_oracle
        && chambers
            .as_ref()
            .is_none_or(|c| c.b0_matches && c.higher_betti_vanish && c.sampling_matches);
    Comparison {
        degrees,
        euler_dga,
        euler_oracle,
        chambers,
        all_equal,
    }
}
