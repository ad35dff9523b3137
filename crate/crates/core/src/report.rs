//! End-to-end pipelines and their serializable reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::arrangement::Arrangement;
use crate::dga::{audit_properties, enumerate_basis, mask_atoms, GradedBasis, PropertyAudit};
use crate::error::Result;
use crate::gf2::{homology, HomologySummary};
use crate::oracle::{compare, gm_betti, sample_chambers, zaslavsky_chambers, ChamberCheck, DegreeComparison};
use crate::poset::{build_poset, IntersectionPoset};
use crate::ring::{audit_representative_independence, compute_ring, CohomologyRing, IndependenceAudit, ProductEntry};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub max_atoms: usize,
    pub max_poset_nodes: usize,
    /// Total atom subsets visited by basis enumeration.
    pub max_block_dim: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            max_atoms: 24,
            max_poset_nodes: 200_000,
            max_block_dim: 5_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
    pub caps: Caps,
    /// Perturbations per class in the representative-independence audit.
    pub audit_samples: usize,
    pub seed: u64,
    /// Largest basis on which the quadratic pair checks run.
    pub pair_audit_limit: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            caps: Caps::default(),
            audit_samples: 100,
            seed: 0x5EED,
            pair_audit_limit: 20_000,
        }
    }
}

/// Poset plus graded basis, the shared front half of every pipeline.
pub struct Prepared {
    pub poset: IntersectionPoset,
    pub basis: GradedBasis,
}

pub fn check_atom_cap(a: &Arrangement, caps: &Caps) -> Result<()> {
    if a.len() > caps.max_atoms {
        return Err(crate::Error::Cap(format!(
            "arrangement has {} atoms, cap is {}",
            a.len(),
            caps.max_atoms
        )));
    }
    Ok(())
}

pub fn prepare_poset(a: &Arrangement, caps: &Caps) -> Result<IntersectionPoset> {
    check_atom_cap(a, caps)?;
    build_poset(a, caps.max_poset_nodes)
}

pub fn prepare(a: &Arrangement, caps: &Caps) -> Result<Prepared> {
    let poset = prepare_poset(a, caps)?;
    let basis = enumerate_basis(&poset, caps.max_block_dim)?;
    Ok(Prepared { poset, basis })
}

/// Betti numbers in degrees `0..=ambient_dim`.
pub fn betti_vector(betti: &BTreeMap<i64, usize>, ambient_dim: usize) -> Vec<usize> {
    (0..=ambient_dim as i64).map(|k| betti.get(&k).copied().unwrap_or(0)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeJson {
    pub id: usize,
    pub dim: usize,
    pub atoms_above: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PosetReport {
    pub digest: String,
    pub ambient_dim: usize,
    pub num_atoms: usize,
    pub top: Option<usize>,
    pub nodes: Vec<NodeJson>,
    pub covers: Vec<[usize; 2]>,
    pub mobius: Vec<i64>,
}

pub fn poset_report(a: &Arrangement, opts: &Options) -> Result<PosetReport> {
    let p = prepare_poset(a, &opts.caps)?;
    Ok(PosetReport {
        digest: a.digest(),
        ambient_dim: p.ambient_dim(),
        num_atoms: p.num_atoms(),
        top: p.top(),
        nodes: p
            .nodes()
            .iter()
            .map(|n| NodeJson {
                id: n.id,
                dim: n.dim,
                atoms_above: mask_atoms(n.atoms_above),
            })
            .collect(),
        covers: p.cover_relations().into_iter().map(|(u, v)| [u, v]).collect(),
        mobius: p.mobius_all(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BettiReport {
    pub digest: String,
    pub ambient_dim: usize,
    pub basis_size: usize,
    pub betti_dga: Vec<usize>,
    pub euler: i64,
}

fn dga_homology(a: &Arrangement, opts: &Options) -> Result<(Prepared, HomologySummary)> {
    let prep = prepare(a, &opts.caps)?;
    let hom = homology(&prep.poset, &prep.basis)?;
    Ok((prep, hom))
}

pub fn betti_report(a: &Arrangement, opts: &Options) -> Result<BettiReport> {
    let (prep, hom) = dga_homology(a, opts)?;
    Ok(BettiReport {
        digest: a.digest(),
        ambient_dim: a.ambient_dim(),
        basis_size: prep.basis.len(),
        betti_dga: betti_vector(&hom.total_betti, a.ambient_dim()),
        euler: crate::oracle::euler_characteristic(&hom.total_betti),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub digest: String,
    pub ambient_dim: usize,
    pub betti_oracle: Vec<usize>,
    pub chambers: Option<u64>,
    pub euler: i64,
}

pub fn oracle_report(a: &Arrangement, opts: &Options) -> Result<OracleReport> {
    let p = prepare_poset(a, &opts.caps)?;
    let b = gm_betti(&p);
    Ok(OracleReport {
        digest: a.digest(),
        ambient_dim: a.ambient_dim(),
        betti_oracle: betti_vector(&b, a.ambient_dim()),
        chambers: a.is_hyperplane_arrangement().then(|| zaslavsky_chambers(&p)).transpose()?,
        euler: crate::oracle::euler_characteristic(&b),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassJson {
    pub label: String,
    pub node: usize,
    /// atom-index subsets whose sum (mod 2) is the representative cocycle
    pub representative: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeClasses {
    pub degree: i64,
    pub classes: Vec<ClassJson>,
}

fn classes_json(ring: &CohomologyRing) -> Vec<DegreeClasses> {
    let mut by_degree: BTreeMap<i64, Vec<ClassJson>> = BTreeMap::new();
    for c in ring.classes() {
        by_degree.entry(c.degree).or_default().push(ClassJson {
            label: c.label.clone(),
            node: c.node,
            representative: c.representative.terms().iter().map(|&m| mask_atoms(m)).collect(),
        });
    }
    by_degree
        .into_iter()
        .map(|(degree, classes)| DegreeClasses { degree, classes })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RingReport {
    pub digest: String,
    pub ambient_dim: usize,
    pub betti_dga: Vec<usize>,
    pub classes: Vec<DegreeClasses>,
    pub products: Vec<ProductEntry>,
}

pub fn ring_report(a: &Arrangement, opts: &Options) -> Result<RingReport> {
    let (prep, hom) = dga_homology(a, opts)?;
    let ring = compute_ring(&prep.poset, &prep.basis, &hom)?;
    Ok(RingReport {
        digest: a.digest(),
        ambient_dim: a.ambient_dim(),
        betti_dga: betti_vector(&hom.total_betti, a.ambient_dim()),
        classes: classes_json(&ring),
        products: ring.nonzero_products(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Euler {
    pub dga: i64,
    pub oracle: i64,
    /// `Σ_σ (-1)^{deg σ}` over the whole cochain basis
    pub cochain_level: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Audits {
    pub properties: PropertyAudit,
    pub ring_invariants: Vec<String>,
    pub representative_independence: Option<IndependenceAudit>,
    pub ring_error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub status: String,
    pub digest: String,
    pub ambient_dim: usize,
    pub num_atoms: usize,
    pub poset_nodes: usize,
    pub basis_size: usize,
    pub betti_dga: Vec<usize>,
    pub betti_oracle: Vec<usize>,
    pub degrees: Vec<DegreeComparison>,
    pub chambers: Option<ChamberCheck>,
    pub euler: Euler,
    pub classes: Vec<DegreeClasses>,
    pub products: Vec<ProductEntry>,
    /// nonzero products with both factors in positive degree
    pub positive_products: usize,
    pub audits: Audits,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.status == "ok"
    }
}

/// Runs both pipelines, the ring and every audit. Input and cap errors are
/// returned as errors; algebraic failures become report content.
pub fn verify_report(a: &Arrangement, opts: &Options) -> Result<VerifyReport> {
    let (prep, hom) = dga_homology(a, opts)?;
    let Prepared { poset, basis } = &prep;
    let oracle = gm_betti(poset);

    let chambers = if a.is_hyperplane_arrangement() {
        let count = zaslavsky_chambers(poset)?;
        let window = (50 * count).max(2_000);
        let sampling = sample_chambers(a, opts.seed, window, 5_000_000)?;
        Some((count, Some(sampling)))
    } else {
        None
    };
    let cmp = compare(a.ambient_dim(), &hom.total_betti, &oracle, chambers);

    let properties = audit_properties(poset, basis, opts.pair_audit_limit);
    let (classes, products, positive_products, ring_invariants, independence, ring_error) =
        match compute_ring(poset, basis, &hom) {
            Ok(ring) => {
                let inv = ring.check_invariants();
                let ind = audit_representative_independence(&ring, poset, &hom, opts.audit_samples, opts.seed);
                let n = ring.classes().len();
                let positive = (0..n)
                    .flat_map(|a| (0..n).map(move |b| (a, b)))
                    .filter(|&(a, b)| {
                        ring.class(a).degree > 0 && ring.class(b).degree > 0 && !ring.product(a, b).is_empty()
                    })
                    .count();
                (classes_json(&ring), ring.nonzero_products(), positive, inv, Some(ind), None)
            }
            Err(e) => (Vec::new(), Vec::new(), 0, Vec::new(), None, Some(e.to_string())),
        };

    let cochain_euler = basis.euler_characteristic();
    let ok = cmp.all_equal
        && cochain_euler == cmp.euler_dga
        && properties.is_clean()
        && ring_invariants.is_empty()
        && ring_error.is_none()
        && independence.as_ref().is_some_and(|i| i.discrepancies == 0);

    Ok(VerifyReport {
        status: if ok { "ok" } else { "mismatch" }.to_string(),
        digest: a.digest(),
        ambient_dim: a.ambient_dim(),
        num_atoms: a.len(),
        poset_nodes: poset.len(),
        basis_size: basis.len(),
        betti_dga: betti_vector(&hom.total_betti, a.ambient_dim()),
        betti_oracle: betti_vector(&oracle, a.ambient_dim()),
        degrees: cmp.degrees,
        chambers: cmp.chambers,
        euler: Euler {
            dga: cmp.euler_dga,
            oracle: cmp.euler_oracle,
            cochain_level: cochain_euler,
        },
        classes,
        products,
        positive_products,
        audits: Audits {
            properties,
            ring_invariants,
            representative_independence: independence,
            ring_error,
        },
    })
}

fn betti_line(label: &str, b: &[usize]) -> String {
    let cells: Vec<String> = b.iter().enumerate().map(|(k, v)| format!("b{k}={v}")).collect();
    format!("{label}: {}\n", cells.join(" "))
}

impl PosetReport {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "poset: {} nodes, {} atoms, ambient dim {}, digest {}\n",
            self.nodes.len(),
            self.num_atoms,
            self.ambient_dim,
            &self.digest[..12]
        );
        let mut by_dim: BTreeMap<usize, usize> = BTreeMap::new();
        for n in &self.nodes {
            *by_dim.entry(n.dim).or_default() += 1;
        }
        for (d, c) in by_dim.iter().rev() {
            let _ = writeln!(s, "  dim {d}: {c} nodes");
        }
        s
    }
}

impl BettiReport {
    pub fn to_text(&self) -> String {
        betti_line("betti (dga)", &self.betti_dga)
    }
}

impl OracleReport {
    pub fn to_text(&self) -> String {
        let mut s = betti_line("betti (oracle)", &self.betti_oracle);
        if let Some(c) = self.chambers {
            let _ = writeln!(s, "chambers: {c}");
        }
        s
    }
}

impl RingReport {
    pub fn to_text(&self) -> String {
        let mut s = betti_line("betti (dga)", &self.betti_dga);
        for d in &self.classes {
            let _ = writeln!(s, "degree {}: {} classes", d.degree, d.classes.len());
        }
        let _ = writeln!(s, "nonzero products: {}", self.products.len());
        for p in &self.products {
            let _ = writeln!(s, "  {} * {} = {}", p.left, p.right, p.result.join(" + "));
        }
        s
    }
}

impl VerifyReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("status: {}\n", self.status);
        s += &betti_line("betti (dga)   ", &self.betti_dga);
        s += &betti_line("betti (oracle)", &self.betti_oracle);
        let _ = writeln!(s, "euler: dga {} oracle {}", self.euler.dga, self.euler.oracle);
        if let Some(c) = &self.chambers {
            let _ = writeln!(
                s,
                "chambers: mobius {} sampled {}",
                c.mobius_count,
                c.sampling.as_ref().map_or("-".to_string(), |x| x.distinct_sign_vectors.to_string())
            );
        }
        let _ = writeln!(
            s,
            "nonzero products: {} ({} between positive-degree classes)",
            self.products.len(),
            self.positive_products
        );
        let pa = &self.audits.properties;
        let _ = writeln!(
            s,
            "audits: pairs {} | δ² {} | leibniz {} | additivity {} | disjointness {} | independence {}",
            pa.pairs_checked,
            pa.delta_squared_violations,
            pa.leibniz_violations,
            pa.additivity_violations,
            pa.disjointness_violations,
            self.audits
                .representative_independence
                .as_ref()
                .map_or("-".to_string(), |i| i.discrepancies.to_string())
        );
        if let Some(msg) = &pa.skipped {
            let _ = writeln!(s, "note: {msg}");
        }
        if let Some(e) = &self.audits.ring_error {
            let _ = writeln!(s, "ring error: {e}");
        }
        s
    }
}
