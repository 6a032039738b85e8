//! Rows `Z -> C(Φ_n^{-1} S_{n+1}, Z) -> C(S_{n+1}, Z) -> K_0` for the dyadic
//! odometer and the Fibonacci subshift, with the squares linking them.

use cantorflow::cantor::{IntFunction, InvariantMeasure, SymbolicSystem};
use cantorflow::ktheory::{delta_steps, middle_square, right_square, verify_exact_row, K0Cache};
use cantorflow::rokhlin::{auto_nest, SliceChain, DEFAULT_MAX_STEPS};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cantorflow::Result<()> {
    for (desc, stages) in [("odometer base=2", 5), ("substitution a:ab,b:a", 3)] {
        let sys = SymbolicSystem::parse(desc)?;
        let mu = InvariantMeasure::new(&sys);
        let slices = auto_nest(&sys, &sys.default_point(), stages, DEFAULT_MAX_STEPS)?;
        let chain = SliceChain::new(&sys, &slices, DEFAULT_MAX_STEPS)?;
        println!("{desc}");
        for n in 0..chain.stages() {
            let r = verify_exact_row(&chain, n, n + 3, &mu)?;
            println!(
                "  row {n}: exact {}, rank beta {}, rank ker gamma {}",
                r.all(),
                r.ranks.rank_beta,
                r.ranks.rank_ker_gamma
            );
        }

        let mut cache = K0Cache::new(&sys, &mu);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 0..chain.stages() - 1 {
            let f = IntFunction::random(
                &chain.tower(n).pre_inner()?,
                sys.depth_window(n + 2),
                4,
                &mut rng,
            )?;
            let h = IntFunction::random(chain.slice(n), sys.depth_window(n + 3), 4, &mut rng)?;
            println!(
                "  stage {n}: middle {}, right {}, delta steps {:?}",
                middle_square(&chain, n, &f, &mut cache)?,
                right_square(&chain, n, &h, &mut cache)?,
                delta_steps(&chain, n, &f)?
            );
        }
    }
    Ok(())
}
