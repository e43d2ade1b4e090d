//! Random 3CNFs through the 3SAT → AF reduction: satisfiability against
//! credulous admissible acceptance of `sat`.

use cwsat::af::{Mode, SemanticsId};
use cwsat::hardness::{random_threecnf, threesat_to_af};
use cwsat::kexpr::trivial_expression;
use cwsat::solver::{decide, SolverConfig};

fn main() -> anyhow::Result<()> {
    for seed in 0..8 {
        let phi = random_threecnf(4, 6 + seed as usize * 2, seed);
        let (af, sat) = threesat_to_af(&phi);
        let x = trivial_expression(&af)?;
        let accepted = decide(&af, &x, SemanticsId::Admissible, &sat, Mode::Credulous, &SolverConfig::default())?;
        println!("{} clauses: satisfiable={} accepted={accepted}", phi.clauses.len(), phi.brute_force_sat());
    }
    Ok(())
}
