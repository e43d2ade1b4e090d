//! Credulous and skeptical acceptance of every argument.

use cwsat::af::{parse_apx, Mode, SemanticsId};
use cwsat::kexpr::parse_kexpr;
use cwsat::solver::{decide, SolverConfig};

fn main() -> anyhow::Result<()> {
    let af = parse_apx(include_str!("../data/fig1.apx"))?;
    let x = parse_kexpr(include_str!("../data/fig2.kx"))?;
    let cfg = SolverConfig::default();
    for sem in [SemanticsId::Complete, SemanticsId::Preferred, SemanticsId::Stage] {
        for a in af.arguments() {
            let cred = decide(&af, &x, sem, &a, Mode::Credulous, &cfg)?;
            let skept = decide(&af, &x, sem, &a, Mode::Skeptical, &cfg)?;
            println!("{sem} {}: credulous={cred} skeptical={skept}", a.name);
        }
    }
    Ok(())
}
