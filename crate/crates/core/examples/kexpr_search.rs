//! Find a small-width expression for a framework and check it.

use cwsat::af::parse_apx;
use cwsat::kexpr::{search_expression, trivial_expression, validate};

fn main() -> anyhow::Result<()> {
    for text in [include_str!("../data/fig1.apx"), include_str!("../data/fig3_right.apx")] {
        let af = parse_apx(text)?;
        let x = match search_expression(&af, 4, 1_000_000)? {
            Some(x) => x,
            None => trivial_expression(&af)?,
        };
        validate(&x, &af).map_err(|d| anyhow::anyhow!("{d}"))?;
        println!("{} arguments, width {}: {x}", af.len(), x.width());
    }
    Ok(())
}
