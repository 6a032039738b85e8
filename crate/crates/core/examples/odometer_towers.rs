//! Towers of the dyadic odometer over the slices `[0], [00], [000]`.
//!
//! ```text
//! cargo run --example odometer_towers
//! ```

use cantorflow::cantor::{ClopenSet, InvariantMeasure, SymbolicSystem};
use cantorflow::rokhlin::{SliceChain, DEFAULT_MAX_STEPS};

fn main() -> cantorflow::Result<()> {
    let sys = SymbolicSystem::parse("odometer base=2")?;
    let slices = SliceChain::parse_slices(&sys, "0,00,000")?;
    let chain = SliceChain::new(&sys, &slices, DEFAULT_MAX_STEPS)?;
    let mu = InvariantMeasure::new(&sys);

    for (n, td) in chain.towers().iter().enumerate() {
        let check = td.check(&mu)?;
        println!(
            "stage {n}: heights {:?}, kac {} = {}",
            td.heights(),
            check.kac_lhs.value(),
            check.kac_rhs.value()
        );
        for t in td.towers() {
            let floors: Vec<String> = t.floors.iter().map(|f| words(&sys, f)).collect();
            println!("  {}", floors.join(" -> "));
        }
    }

    // the return map to [0] is the odometer again, one digit shorter
    let c = ClopenSet::parse_cylinder(&sys, "0")?;
    println!("mu([0]) = {}", mu.measure_f64(&c)?);
    Ok(())
}

fn words(sys: &SymbolicSystem, set: &ClopenSet) -> String {
    let ws: Vec<String> = set.words().iter().map(|w| sys.word_string(w)).collect();
    format!("[{}]", ws.join("|"))
}
