//! Arrangement data model, built-in generators and JSON ingestion.

use num::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::{format_rational, parse_rational, Rational, SubspaceBasis};

/// Hard limit from the `u64` atom masks used downstream.
pub const MAX_SUPPORTED_ATOMS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub id: usize,
    pub name: String,
    pub subspace: SubspaceBasis,
}

/// A finite set of proper linear subspaces of `Q^ambient_dim`, pairwise
/// distinct and forming an antichain under inclusion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrangement {
    ambient_dim: usize,
    atoms: Vec<Atom>,
}

impl Arrangement {
    /// Validates and assigns ids in the given order.
    pub fn new(ambient_dim: usize, atoms: Vec<(String, SubspaceBasis)>) -> Result<Self> {
        if atoms.len() > MAX_SUPPORTED_ATOMS {
            return Err(Error::Cap(format!(
                "{} atoms exceed the supported maximum of {MAX_SUPPORTED_ATOMS}",
                atoms.len()
            )));
        }
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .enumerate()
            .map(|(id, (name, subspace))| Atom { id, name, subspace })
            .collect();
        for a in &atoms {
            if a.subspace.ambient_dim() != ambient_dim {
                return Err(Error::Input(format!(
                    "atom {} ({}) lives in dimension {}, arrangement in {ambient_dim}",
                    a.id,
                    a.name,
                    a.subspace.ambient_dim()
                )));
            }
            if a.subspace.dim() >= ambient_dim {
                return Err(Error::Input(format!(
                    "atom {} ({}) is the whole ambient space; atoms must be proper",
                    a.id, a.name
                )));
            }
        }
        for (i, a) in atoms.iter().enumerate() {
            for b in &atoms[i + 1..] {
                if a.subspace == b.subspace {
                    return Err(Error::Input(format!(
                        "atoms {} ({}) and {} ({}) are the same subspace",
                        a.id, a.name, b.id, b.name
                    )));
                }
                let (small, big) = if a.subspace.dim() <= b.subspace.dim() { (a, b) } else { (b, a) };
                if big.subspace.contains(&small.subspace)? {
                    return Err(Error::Input(format!(
                        "atom {} ({}) is contained in atom {} ({}); atoms must form an antichain",
                        small.id, small.name, big.id, big.name
                    )));
                }
            }
        }
        Ok(Self { ambient_dim, atoms })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// True when every atom is a hyperplane.
    pub fn is_hyperplane_arrangement(&self) -> bool {
        self.atoms.iter().all(|a| a.subspace.dim() + 1 == self.ambient_dim)
    }

    /// SHA-256 over the ambient dimension and the canonical atom bases.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("ambient {}\n", self.ambient_dim));
        for a in &self.atoms {
            h.update(format!("atom {}\n", a.subspace.dim()));
            for row in a.subspace.basis().row_iter() {
                let line: Vec<String> = row.iter().map(format_rational).collect();
                h.update(line.join(" "));
                h.update("\n");
            }
        }
        hex::encode(h.finalize())
    }
}

fn check_atom_cap(count: u128, max_atoms: usize) -> Result<()> {
    if count > max_atoms as u128 {
        return Err(Error::Cap(format!(
            "arrangement would have {count} atoms, cap is {max_atoms}"
        )));
    }
    Ok(())
}

fn binomial2(n: usize) -> u128 {
    let n = n as u128;
    n * n.saturating_sub(1) / 2
}

fn sign_label(signs: &[i64]) -> String {
    signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

/// The arrangement whose complement is the orbit configuration space of `n`
/// points in `R^m` under the coordinatewise sign action of `Z_2^m`.
///
/// Atoms are `x_i = g(x_j)` for `i < j` and `g ∈ {±1}^m`, ordered by
/// `(i, j, g)` where `g` is read as a binary number with `g_1` most
/// significant and `+1 ↦ 0`.
pub fn orbit_config_arrangement(m: usize, n: usize, max_atoms: usize) -> Result<Arrangement> {
    if m == 0 || n == 0 {
        return Err(Error::Input(format!("orbit configuration needs m, n >= 1 (got m={m}, n={n})")));
    }
    if m >= 64 {
        return Err(Error::Cap(format!("2^{m} sign vectors cannot be enumerated")));
    }
    check_atom_cap(binomial2(n).saturating_mul(1u128 << m), max_atoms)?;
    let dim = m * n;
    let mut atoms = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for g in 0..(1usize << m) {
                let signs: Vec<i64> =
                    (0..m).map(|k| if g >> (m - 1 - k) & 1 == 0 { 1 } else { -1 }).collect();
                let equations = (0..m)
                    .map(|k| {
                        let mut row = vec![Rational::from_integer(BigInt::from(0)); dim];
                        row[i * m + k] = Rational::from_integer(BigInt::from(1));
                        row[j * m + k] = Rational::from_integer(BigInt::from(-signs[k]));
                        row
                    })
                    .collect();
                let name = format!("A[{},{};{}]", i + 1, j + 1, sign_label(&signs));
                atoms.push((name, SubspaceBasis::from_equations(dim, equations)?));
            }
        }
    }
    Arrangement::new(dim, atoms)
}

/// The arrangement `{x_i = x_j : i < j}` in `(R^k)^n`, whose complement is the
/// ordinary configuration space of `n` points in `R^k`.
pub fn diagonal_arrangement(k: usize, n: usize, max_atoms: usize) -> Result<Arrangement> {
    if k == 0 || n == 0 {
        return Err(Error::Input(format!("diagonal arrangement needs k, n >= 1 (got k={k}, n={n})")));
    }
    check_atom_cap(binomial2(n), max_atoms)?;
    let dim = k * n;
    let mut atoms = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let equations = (0..k)
                .map(|c| {
                    let mut row = vec![Rational::from_integer(BigInt::from(0)); dim];
                    row[i * k + c] = Rational::from_integer(BigInt::from(1));
                    row[j * k + c] = Rational::from_integer(BigInt::from(-1));
                    row
                })
                .collect();
            atoms.push((format!("D[{},{}]", i + 1, j + 1), SubspaceBasis::from_equations(dim, equations)?));
        }
    }
    Arrangement::new(dim, atoms)
}

/// On-disk form of an arrangement.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ArrangementDoc {
    pub ambient_dim: usize,
    pub atoms: Vec<AtomDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct AtomDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equations: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<Vec<Vec<String>>>,
}

fn parse_rows(rows: &[Vec<String>], ambient_dim: usize, atom: usize) -> Result<Vec<Vec<Rational>>> {
    rows.iter()
        .enumerate()
        .map(|(r, row)| {
            if row.len() != ambient_dim {
                return Err(Error::Input(format!(
                    "atom {atom}: row {r} has {} entries, ambient dimension is {ambient_dim}",
                    row.len()
                )));
            }
            row.iter()
                .map(|s| parse_rational(s).map_err(|e| Error::Input(format!("atom {atom}: {e}"))))
                .collect()
        })
        .collect()
}

pub fn load_arrangement(doc: &ArrangementDoc) -> Result<Arrangement> {
    let mut atoms = Vec::with_capacity(doc.atoms.len());
    for (id, a) in doc.atoms.iter().enumerate() {
        let subspace = match (&a.equations, &a.span) {
            (Some(eq), None) => {
                SubspaceBasis::from_equations(doc.ambient_dim, parse_rows(eq, doc.ambient_dim, id)?)?
            }
            (None, Some(span)) => {
                SubspaceBasis::from_span(doc.ambient_dim, parse_rows(span, doc.ambient_dim, id)?)?
            }
            _ => {
                return Err(Error::Input(format!(
                    "atom {id} ({}) must have exactly one of \"equations\" or \"span\"",
                    a.name
                )))
            }
        };
        atoms.push((a.name.clone(), subspace));
    }
    Arrangement::new(doc.ambient_dim, atoms)
}

/// Serializes each atom by its canonical spanning rows.
pub fn save_arrangement(a: &Arrangement) -> ArrangementDoc {
    ArrangementDoc {
        ambient_dim: a.ambient_dim,
        atoms: a
            .atoms
            .iter()
            .map(|atom| AtomDoc {
                name: atom.name.clone(),
                equations: None,
                span: Some(
                    atom.subspace
                        .basis()
                        .row_iter()
                        .map(|r| r.iter().map(format_rational).collect())
                        .collect(),
                ),
            })
            .collect(),
    }
}

pub fn arrangement_from_json(text: &str) -> Result<Arrangement> {
    let doc: ArrangementDoc =
        serde_json::from_str(text).map_err(|e| Error::Input(format!("arrangement JSON: {e}")))?;
    load_arrangement(&doc)
}

pub fn arrangement_to_json(a: &Arrangement) -> String {
    serde_json::to_string_pretty(&save_arrangement(a)).expect("arrangement document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    #[test]
    fn orbit_config_2_2_matches_the_four_planes() {
        let a = orbit_config_arrangement(2, 2, 24).unwrap();
        assert_eq!(a.ambient_dim(), 4);
        assert_eq!(a.len(), 4);
        let names: Vec<&str> = a.atoms().iter().map(|x| x.name.as_str()).collect();
        assert_eq!(names, ["A[1,2;++]", "A[1,2;+-]", "A[1,2;-+]", "A[1,2;--]"]);
        // (x1, y1, x2, y2) = (1, 2, 1, -2) satisfies x1 = x2, y1 = -y2
        let p = [q(1), q(2), q(1), q(-2)];
        let hits: Vec<bool> = a.atoms().iter().map(|x| x.subspace.contains_point(&p)).collect();
        assert_eq!(hits, [false, true, false, false]);
        assert!(a.atoms().iter().all(|x| x.subspace.dim() == 2));
    }

    #[test]
    fn orbit_config_counts() {
        let a = orbit_config_arrangement(1, 2, 24).unwrap();
        assert_eq!((a.ambient_dim(), a.len()), (2, 2));
        assert!(a.is_hyperplane_arrangement());
        let a = orbit_config_arrangement(3, 1, 24).unwrap();
        assert_eq!((a.ambient_dim(), a.len()), (3, 0));
        for (m, n) in [(1, 3), (2, 3), (3, 2), (1, 4)] {
            let a = orbit_config_arrangement(m, n, 64).unwrap();
            assert_eq!(a.len(), n * (n - 1) / 2 * (1 << m));
            assert!(a.atoms().iter().all(|x| x.subspace.dim() == m * n - m));
        }
    }

    #[test]
    fn orbit_config_respects_cap() {
        assert!(matches!(orbit_config_arrangement(2, 4, 23), Err(Error::Cap(_))));
        assert!(orbit_config_arrangement(2, 4, 24).is_ok());
        assert!(matches!(orbit_config_arrangement(0, 2, 24), Err(Error::Input(_))));
    }

    #[test]
    fn diagonal_examples() {
        let a = diagonal_arrangement(2, 2, 24).unwrap();
        assert_eq!((a.ambient_dim(), a.len(), a.atoms()[0].subspace.dim()), (4, 1, 2));
        let a = diagonal_arrangement(1, 3, 24).unwrap();
        assert_eq!((a.ambient_dim(), a.len()), (3, 3));
        let a = diagonal_arrangement(3, 2, 24).unwrap();
        assert_eq!((a.ambient_dim(), a.atoms()[0].subspace.codim()), (6, 3));
    }

    #[test]
    fn json_round_trip() {
        let a = orbit_config_arrangement(2, 2, 24).unwrap();
        let text = arrangement_to_json(&a);
        assert_eq!(arrangement_from_json(&text).unwrap(), a);
        assert_eq!(arrangement_from_json(&text).unwrap().digest(), a.digest());
    }

    #[test]
    fn duplicate_atoms_rejected() {
        let text = r#"{"ambient_dim": 2, "atoms": [
            {"name": "a", "equations": [["1", "-1"]]},
            {"name": "b", "span": [["2", "2"]]}
        ]}"#;
        let err = arrangement_from_json(text).unwrap_err();
        assert!(matches!(&err, Error::Input(m) if m.contains("atoms 0 (a) and 1 (b)")), "{err}");
    }

    #[test]
    fn whole_space_atom_rejected() {
        let text = r#"{"ambient_dim": 2, "atoms": [{"name": "w", "span": [["1","0"],["0","1"]]}]}"#;
        let err = arrangement_from_json(text).unwrap_err();
        assert!(matches!(&err, Error::Input(m) if m.contains("proper")), "{err}");
        let text = r#"{"ambient_dim": 2, "atoms": [{"name": "w", "equations": []}]}"#;
        assert!(arrangement_from_json(text).is_err());
    }

    #[test]
    fn nested_atoms_rejected() {
        let text = r#"{"ambient_dim": 3, "atoms": [
            {"name": "plane", "equations": [["0", "0", "1"]]},
            {"name": "line", "span": [["1", "1/2", "0"]]}
        ]}"#;
        let err = arrangement_from_json(text).unwrap_err();
        assert!(matches!(&err, Error::Input(m) if m.contains("atom 1 (line) is contained in atom 0 (plane)")), "{err}");
    }

    #[test]
    fn malformed_documents() {
        for text in [
            r#"{"ambient_dim": 2, "atoms": [{"name": "a", "equations": [["1", "q"]]}]}"#,
            r#"{"ambient_dim": 2, "atoms": [{"name": "a", "equations": [["1"]]}]}"#,
            r#"{"ambient_dim": 2, "atoms": [{"name": "a"}]}"#,
            r#"{"ambient_dim": 2, "atoms": [{"name": "a", "span": [["1","0"]], "equations": [["1","0"]]}]}"#,
            r#"{"ambient_dim": 2, "atoms": [{"name": "a", "equations": [["1","1/0"]]}]}"#,
            r#"{"ambient_dim": 2}"#,
        ] {
            assert!(matches!(arrangement_from_json(text), Err(Error::Input(_))), "{text}");
        }
    }
}
