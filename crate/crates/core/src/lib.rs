//! Mod-2 cohomology rings of complements of real linear subspace arrangements.
//!
//! The pipeline is: [`arrangement`] (atoms as exact subspaces) →
//! [`poset`] (intersection poset with a join table) → [`dga`] (the relative
//! atomic cochain algebra graded by `d(W) - |σ| - d(∨σ)`) → [`gf2`]
//! (block-wise cohomology) → [`ring`] (structure constants). The [`oracle`]
//! module recomputes Betti numbers from order-complex homology of poset
//! intervals, independently of the cochain algebra.

pub mod arrangement;
pub mod cli;
pub mod dga;
pub mod error;
pub mod gf2;
pub mod linalg;
pub mod oracle;
pub mod poset;
pub mod report;
pub mod ring;

use std::str::FromStr;

pub use error::{Error, Result};

/// Exact scalar used for every subspace computation.
pub type Rational = num::BigRational;
/// Rational matrix.
pub type MatrixQ = linalg::Matrix<Rational>;
/// Canonical rational subspace.
pub type SubspaceBasis = linalg::Subspace<Rational>;

/// Parses `"p"` or `"p/q"` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    Rational::from_str(t).map_err(|e| Error::Input(format!("bad rational {s:?}: {e}")))
}

/// Inverse of [`parse_rational`]: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_strings() {
        assert_eq!(format_rational(&parse_rational("6/-4").unwrap()), "-3/2");
        assert_eq!(format_rational(&parse_rational("0/7").unwrap()), "0");
        assert_eq!(format_rational(&parse_rational(" 12 ").unwrap()), "12");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1.5").is_err());
    }
}
