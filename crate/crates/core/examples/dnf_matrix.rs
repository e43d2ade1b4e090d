//! Replace the outer CNF of a semi-stable encoding by a DNF under fresh
//! universal variables and print the QDIMACS header.

use cwsat::af::{parse_apx, SemanticsId};
use cwsat::encoder::{dnf_matrix, encode};
use cwsat::formula::write_qbf;
use cwsat::kexpr::parse_kexpr;
use cwsat::witness::build_outer_witness;

fn main() -> anyhow::Result<()> {
    let af = parse_apx(include_str!("../data/fig1.apx"))?;
    let x = parse_kexpr(include_str!("../data/fig2.kx"))?;
    let enc = encode(&af, &x, SemanticsId::SemiStable)?;
    let guide = build_outer_witness(&enc, &x)?.expression;
    println!("outer guide: width {}, {} nodes", guide.width(), guide.len());
    let q = dnf_matrix(&enc, &guide)?;
    println!("{} variables, {} universal", q.vars.len(), q.inner.len());
    for line in write_qbf(&q).lines().filter(|l| l.starts_with("p ")) {
        println!("{line}");
    }
    Ok(())
}
