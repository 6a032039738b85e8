//! The Fibonacci subshift `a -> ab, b -> a`: languages, frequencies and
//! towers over nested central cylinders.

use cantorflow::cantor::{ClopenSet, InvariantMeasure, SymbolicSystem};
use cantorflow::rokhlin::{auto_nest, SliceChain, DEFAULT_MAX_STEPS};

fn main() -> cantorflow::Result<()> {
    let sys = SymbolicSystem::parse("substitution a:ab,b:a")?;
    let mu = InvariantMeasure::new(&sys);

    for d in 1..=6 {
        println!(
            "depth {d}: {} admissible words",
            sys.language(sys.depth_window(d))?.len()
        );
    }
    let b = ClopenSet::parse_cylinder(&sys, "b")?;
    // 1/φ² ≈ 0.381966
    println!("mu([b]) = {:.12}", mu.measure_f64(&b)?);

    let p = sys.default_point();
    println!("center {}", sys.point_string(&p));
    let slices = auto_nest(&sys, &p, 3, DEFAULT_MAX_STEPS)?;
    let chain = SliceChain::new(&sys, &slices, DEFAULT_MAX_STEPS)?;
    for (n, td) in chain.towers().iter().enumerate() {
        let c = td.check(&mu)?;
        println!(
            "stage {n}: heights {:?}, floors partition {}, kac {:.3e} off",
            td.heights(),
            c.floors_disjoint && c.floors_cover_outer,
            (c.kac_lhs.value() - c.kac_rhs.value()).abs()
        );
    }
    Ok(())
}
