//! Kernel identities on the dyadic mapping torus at `N = 32, 64, 128`.

use cantorflow::kernels::{convergence_study, IdentityErrors};

fn main() -> cantorflow::Result<()> {
    for n in [32, 64] {
        let r = convergence_study(n, 0)?;
        println!(
            "N = {n} -> {}  (tolerance {:.4} / {:.4})",
            2 * n,
            r.coarse.tolerance,
            r.fine.tolerance
        );
        let (c, f, q) = (
            r.coarse.errors.values(),
            r.fine.errors.values(),
            r.ratios.values(),
        );
        for (i, name) in IdentityErrors::names().iter().enumerate() {
            println!("  {name:<14} {:.3e}  {:.3e}  ratio {:.3}", c[i], f[i], q[i]);
        }
        println!("  passes: {}", r.all());
    }
    Ok(())
}
