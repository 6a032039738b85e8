//! Discretized kernel picture of the stage algebras: kernel fields over the
//! atoms of a central slice, the crossed-product convolution, traces and
//! the embedding into the next stage. All arithmetic here is `f64`.

mod check;
mod element;
mod embed;
mod field;
mod grid;
mod stage;

pub use check::{
    bump, bump_square_integral, convergence_study, convergence_study_for, BumpSuite,
    ConvergenceReport, IdentityErrors, IsometryDefects, KernelReport, CONVERGENCE_RATIO,
    KERNEL_TOL_C,
};
pub use element::{masked, DiscreteCrossedElement, MASK_TOL};
pub use embed::{isometry_defects, Embedding, Floor};
pub use field::{pi_n, pi_n_inverse, KernelField};
pub use grid::{FiberGrid, SigmaGrid, SIGMA_OFFSET};
pub use stage::KernelStage;
