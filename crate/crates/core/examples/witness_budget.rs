//! Witness expressions for each encoding's incidence graph and their width
//! against the budget.

use cwsat::af::{parse_apx, SemanticsId};
use cwsat::encoder::encode;
use cwsat::kexpr::parse_kexpr;
use cwsat::witness::{build_witness, verify_witness};

fn main() -> anyhow::Result<()> {
    let af = parse_apx(include_str!("../data/fig1.apx"))?;
    let x = parse_kexpr(include_str!("../data/fig2.kx"))?;
    for sem in SemanticsId::ALL {
        let enc = encode(&af, &x, sem)?;
        let w = build_witness(&enc, &x)?;
        println!("{sem}: {}", verify_witness(&enc, &w));
    }
    Ok(())
}
