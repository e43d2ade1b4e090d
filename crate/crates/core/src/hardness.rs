//! 3SAT → AF reduction used as an instance generator: the formula is
//! satisfiable iff `sat` is credulously accepted under admissible semantics.
//!
//! Arguments `x{i}`, `nx{i}` per variable, `c{j}` per clause and `sat`.
//! `x{i}` and `nx{i}` attack each other, each literal attacks the clauses
//! containing it, and every clause attacks `sat`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thiserror::Error;

use crate::af::{Af, Argument};
use crate::formula::Cnf;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HardnessError {
    #[error("clause {0} has more than three literals")]
    WideClause(usize),
    #[error("clause {0} is empty")]
    EmptyClause(usize),
}

/// A CNF over variables `1..=num_vars`; literals are signed (DIMACS style).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreeCnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl ThreeCnf {
    /// Take a CNF whose clauses have one to three literals.
    pub fn from_cnf(cnf: &Cnf) -> Result<ThreeCnf, HardnessError> {
        let mut clauses = Vec::new();
        for (i, c) in cnf.clauses.iter().enumerate() {
            match c.len() {
                0 => return Err(HardnessError::EmptyClause(i)),
                1..=3 => clauses.push(c.lits().iter().map(|l| l.0).collect()),
                _ => return Err(HardnessError::WideClause(i)),
            }
        }
        Ok(ThreeCnf { num_vars: cnf.vars.len(), clauses })
    }

    pub fn eval(&self, assignment: u64) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let v = (assignment >> (l.unsigned_abs() - 1)) & 1 == 1;
                v == (l > 0)
            })
        })
    }

    /// Truth-table satisfiability (`num_vars` ≤ 30).
    pub fn brute_force_sat(&self) -> bool {
        assert!(self.num_vars <= 30, "truth table too large");
        (0..1u64 << self.num_vars).any(|a| self.eval(a))
    }
}

/// The reduction AF and its distinguished argument `sat`.
pub fn threesat_to_af(phi: &ThreeCnf) -> (Af, Argument) {
    let af = reduction_af(phi);
    let sat = af.argument("sat").expect("always created");
    (af, sat)
}

pub fn reduction_af(phi: &ThreeCnf) -> Af {
    let mut af = Af::new();
    let x: Vec<usize> = (1..=phi.num_vars).map(|i| af.add_argument(&format!("x{i}")).unwrap()).collect();
    let nx: Vec<usize> = (1..=phi.num_vars).map(|i| af.add_argument(&format!("nx{i}")).unwrap()).collect();
    let c: Vec<usize> = (1..=phi.clauses.len()).map(|j| af.add_argument(&format!("c{j}")).unwrap()).collect();
    let sat = af.add_argument("sat").unwrap();
    for i in 0..phi.num_vars {
        af.add_attack(x[i], nx[i]);
        af.add_attack(nx[i], x[i]);
    }
    for (j, clause) in phi.clauses.iter().enumerate() {
        af.add_attack(c[j], sat);
        for &l in clause {
            let v = l.unsigned_abs() as usize - 1;
            af.add_attack(if l > 0 { x[v] } else { nx[v] }, c[j]);
        }
    }
    af
}

/// A uniformly random 3CNF: each clause has three distinct variables (fewer
/// when `num_vars` < 3) with random signs. Deterministic in `seed`.
pub fn random_threecnf(num_vars: usize, num_clauses: usize, seed: u64) -> ThreeCnf {
    assert!(num_vars >= 1, "need at least one variable");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = num_vars.min(3);
    let clauses = (0..num_clauses)
        .map(|_| {
            let vars = rand::seq::index::sample(&mut rng, num_vars, width);
            vars.iter().map(|v| if rng.gen_bool(0.5) { v as i32 + 1 } else { -(v as i32 + 1) }).collect()
        })
        .collect();
    ThreeCnf { num_vars, clauses }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::af::{oracle_accept, Mode, SemanticsId};

    #[test]
    fn shape() {
        let phi = ThreeCnf { num_vars: 2, clauses: vec![vec![1, -2]] };
        let af = reduction_af(&phi);
        assert_eq!(af.names(), &["x1", "x2", "nx1", "nx2", "c1", "sat"]);
        let named: Vec<(String, String)> =
            af.attacks().map(|(a, b)| (af.name(a).to_string(), af.name(b).to_string())).collect();
        for pair in [("x1", "c1"), ("nx2", "c1"), ("c1", "sat"), ("x1", "nx1"), ("nx1", "x1")] {
            assert!(named.contains(&(pair.0.to_string(), pair.1.to_string())), "{pair:?}");
        }
        assert_eq!(named.len(), 7);
    }

    #[test]
    fn seeded() {
        assert_eq!(random_threecnf(5, 7, 42), random_threecnf(5, 7, 42));
        assert_ne!(random_threecnf(5, 7, 42), random_threecnf(5, 7, 43));
        assert_eq!(
            random_threecnf(3, 5, 1).clauses,
            vec![vec![2, -3, -1], vec![-3, -1, 2], vec![-2, 1, 3], vec![3, 2, 1], vec![-2, 1, 3]]
        );
        let unit = random_threecnf(1, 1, 0);
        assert_eq!(unit.clauses.len(), 1);
        assert_eq!(unit.clauses[0].len(), 1);
    }

    #[test]
    fn equivalence_on_small_formulas() {
        for seed in 0..30 {
            let phi = random_threecnf(4, 2 + (seed as usize % 8), seed);
            let af = reduction_af(&phi);
            let sat = af.argument("sat").unwrap();
            let acc = oracle_accept(&af, SemanticsId::Admissible, &sat, Mode::Credulous).unwrap();
            assert_eq!(acc, phi.brute_force_sat(), "seed {seed}");
        }
        let unsat = ThreeCnf { num_vars: 1, clauses: vec![vec![1], vec![-1]] };
        assert!(!unsat.brute_force_sat());
        let (af, sat) = threesat_to_af(&unsat);
        assert!(!oracle_accept(&af, SemanticsId::Admissible, &sat, Mode::Credulous).unwrap());
        let (af, sat) = threesat_to_af(&ThreeCnf { num_vars: 1, clauses: vec![vec![1]] });
        assert!(oracle_accept(&af, SemanticsId::Admissible, &sat, Mode::Credulous).unwrap());
    }
}
