//! Enumerate preferred extensions by checking each admissible candidate
//! against the universal part of the encoding.

use cwsat::af::{parse_apx, SemanticsId};
use cwsat::encoder::encode;
use cwsat::formula::Lit;
use cwsat::kexpr::parse_kexpr;
use cwsat::solver::{enumerate_models, QbfChecker, Solver, SolverConfig};

fn main() -> anyhow::Result<()> {
    let af = parse_apx(include_str!("../data/fig1.apx"))?;
    let x = parse_kexpr(include_str!("../data/fig2.kx"))?;
    let enc = encode(&af, &x, SemanticsId::Preferred)?;
    let q = enc.qbf().expect("preferred is second level");
    let cfg = SolverConfig::default();
    let mut checker = QbfChecker::new(&q, cfg);
    let mut outer = Solver::from_clauses(enc.vars.len(), &enc.clauses);
    for values in enumerate_models(&enc.cnf(), &enc.extension_vars, &cfg)? {
        // The extension fixes every other outer variable; recover them.
        let assume: Vec<Lit> = enc.extension_vars.iter().zip(&values).map(|(&v, &b)| Lit::new(v, b)).collect();
        let model = outer.solve(&assume, &cfg)?.expect("projected model extends");
        let cand: Vec<Lit> = q.free.iter().map(|&v| Lit::new(v, model[v as usize])).collect();
        let verdict = if checker.check(&cand)? { "preferred" } else { "not maximal" };
        println!("{:<6} {verdict}", enc.extension_of(&model).display(&af).to_string());
    }
    Ok(())
}
