//! Stable encoding of the running example, with each clause's origin.

use cwsat::af::{parse_apx, SemanticsId};
use cwsat::encoder::encode;
use cwsat::kexpr::parse_kexpr;

fn main() -> anyhow::Result<()> {
    let af = parse_apx(include_str!("../data/fig1.apx"))?;
    let x = parse_kexpr(include_str!("../data/fig2.kx"))?;
    let enc = encode(&af, &x, SemanticsId::Stable)?;
    let (clauses, prov) = enc.matrix_clauses();
    println!("{} variables, {} clauses", enc.vars.len(), clauses.len());
    for (c, p) in clauses.iter().zip(&prov).filter(|(_, p)| p.node == 5) {
        println!("node {} eq{:<2} {}", p.node, p.tag, c.render(&enc.vars));
    }
    Ok(())
}
