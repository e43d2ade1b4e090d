//! Extension counts through the encodings, next to the oracle's.

use cwsat::af::{parse_apx, Oracle, SemanticsId};
use cwsat::kexpr::parse_kexpr;
use cwsat::solver::{count, SolverConfig};

fn main() -> anyhow::Result<()> {
    let cases = [
        ("fig1", include_str!("../data/fig1.apx"), include_str!("../data/fig2.kx")),
        ("fig3_left", include_str!("../data/fig3_left.apx"), include_str!("../data/fig3_left.kx")),
        ("fig3_right", include_str!("../data/fig3_right.apx"), include_str!("../data/fig3_right.kx")),
    ];
    let cfg = SolverConfig::default();
    for (name, apx, kx) in cases {
        let af = parse_apx(apx)?;
        let x = parse_kexpr(kx)?;
        let oracle = Oracle::new(&af)?;
        let row: Vec<String> = SemanticsId::ALL
            .iter()
            .map(|&s| Ok(format!("{s}={}/{}", count(&af, &x, s, &cfg)?, oracle.enumerate(s).len())))
            .collect::<anyhow::Result<_>>()?;
        println!("{name:<10} {}", row.join(" "));
    }
    Ok(())
}
