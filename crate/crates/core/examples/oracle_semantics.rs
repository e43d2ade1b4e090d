//! Brute-force extensions of the running example under every semantics.

use cwsat::af::{parse_apx, Oracle, SemanticsId};

fn main() -> anyhow::Result<()> {
    let af = parse_apx(include_str!("../data/fig1.apx"))?;
    let oracle = Oracle::new(&af)?;
    for sem in SemanticsId::ALL {
        let exts: Vec<String> = oracle.enumerate(sem).iter().map(|e| e.display(&af).to_string()).collect();
        println!("{sem:>3}: {}", exts.join(" "));
    }
    Ok(())
}
