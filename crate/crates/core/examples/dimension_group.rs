//! The ordered group `K_0` of the crossed product, both as a cokernel of
//! `id - Φ` and as the limit of `C(S_n, Z)` along the towers.
//!
//! For the dyadic odometer with `S_n = [0^n]` every connecting map is `×2`
//! on constants and `[S_n]` has trace `2^-n`, which is the `Z[1/2]` picture.

use cantorflow::cantor::{ClopenSet, InvariantMeasure, SymbolicSystem};
use cantorflow::ktheory::{order_iso_check, CrossedK0, OrderIsoConfig};
use cantorflow::rokhlin::{SliceChain, DEFAULT_MAX_STEPS};

fn main() -> cantorflow::Result<()> {
    for base in [2, 3] {
        let sys = SymbolicSystem::parse(&format!("odometer base={base}"))?;
        let mu = InvariantMeasure::new(&sys);
        let k = CrossedK0::new(&sys, sys.depth_window(4), &mu)?;
        let s = k.summary();
        println!(
            "base {base}: invariant factors {:?}, rank {}",
            s.invariant_factors, s.cokernel_rank
        );
        if let Some(g) = k.odometer_model_generator() {
            println!("  generator of the depth-4 model: {g}");
        }

        let n = 6;
        let slices = (1..=n)
            .map(|k| ClopenSet::parse_cylinder(&sys, &"0".repeat(k)))
            .collect::<cantorflow::Result<Vec<_>>>()?;
        let chain = SliceChain::new(&sys, &slices, DEFAULT_MAX_STEPS)?;
        let r = order_iso_check(
            &chain,
            &mu,
            &OrderIsoConfig {
                depth: n,
                ..Default::default()
            },
        )?;
        for e in &r.stages {
            println!(
                "  stage {}: iota on 1 = {:?}, trace [S_n] = {}",
                e.stage, e.iota_on_constants, e.slice_trace
            );
        }
        println!(
            "  iso {} (positivity {}/{} agree, {} undetermined)",
            r.all(),
            r.positivity.agree,
            r.positivity.samples,
            r.positivity.undetermined
        );
    }
    Ok(())
}
