//! Bratteli diagrams as Graphviz source.
//!
//! ```text
//! cargo run --example bratteli_dot | dot -Tsvg > bratteli.svg
//! ```

use cantorflow::cantor::SymbolicSystem;
use cantorflow::ktheory::bratteli_dot;
use cantorflow::rokhlin::{auto_nest, SliceChain, DEFAULT_MAX_STEPS};

fn main() -> cantorflow::Result<()> {
    let desc = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "substitution a:ab,b:a".into());
    let sys = SymbolicSystem::parse(&desc)?;
    let slices = auto_nest(&sys, &sys.default_point(), 4, DEFAULT_MAX_STEPS)?;
    let chain = SliceChain::new(&sys, &slices, DEFAULT_MAX_STEPS)?;
    print!("{}", bratteli_dot(chain.towers())?);
    Ok(())
}
