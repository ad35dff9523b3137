//! Seeded random arrangements shared by the integration targets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subspace_cohom::arrangement::Arrangement;
use subspace_cohom::{Rational, SubspaceBasis};

fn random_subspace(rng: &mut ChaCha8Rng, d: usize) -> Option<SubspaceBasis> {
    let codim = rng.random_range(1..=d);
    let eqs: Vec<Vec<Rational>> = (0..codim)
        .map(|_| {
            (0..d)
                .map(|_| Rational::new(rng.random_range(-2..=2i64).into(), rng.random_range(1..=2i64).into()))
                .collect()
        })
        .collect();
    SubspaceBasis::from_equations(d, eqs).ok()
}

/// Random rational arrangements with 2 to 6 atoms in dimension 2 to 5. Atoms
/// are drawn one at a time; a draw that would make the arrangement invalid
/// (whole space, duplicate or nested atom) is rejected and redrawn.
pub fn random_arrangements(count: usize, seed: u64) -> Vec<Arrangement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let d = rng.random_range(2..=5usize);
        let target = rng.random_range(2..=6usize);
        let mut atoms: Vec<(String, SubspaceBasis)> = Vec::new();
        for _ in 0..100 {
            if atoms.len() == target {
                break;
            }
            let Some(s) = random_subspace(&mut rng, d) else { continue };
            let mut trial = atoms.clone();
            trial.push((format!("r{}", atoms.len()), s));
            if Arrangement::new(d, trial.clone()).is_ok() {
                atoms = trial;
            }
        }
        if let Ok(a) = Arrangement::new(d, atoms) {
            if a.len() == target {
                out.push(a);
            }
        }
    }
    out
}

/// One random arrangement drawn from `seed`.
#[allow(dead_code)]
pub fn random_arrangement(seed: u64) -> Arrangement {
    random_arrangements(1, seed).pop().unwrap()
}

