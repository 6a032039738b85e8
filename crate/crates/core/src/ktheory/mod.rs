//! Dimension groups of slice chains and the crossed-product `K_0` row.

mod bratteli;
mod exact;
mod k0;
mod lattice;
mod maps;
mod order;
mod quotient;
mod snf;

pub use bratteli::{bratteli_dot, bratteli_edges, BratteliEdge};
pub use exact::{
    delta_steps, middle_square, right_square, verify_exact_row, ExactRowReport, K0Cache, RowRanks,
    RowWindows,
};
pub use k0::{CrossedK0, K0Summary};
pub use lattice::{Lattice, SparseVec};
pub use maps::{beta, beta_of_extension, delta, eta, iota, pullback, pushforward};
pub use order::{
    order_iso_check, DeltaTally, OrderIsoConfig, OrderIsoReport, PositivityTally, StageEntry,
};
pub use quotient::RelationQuotient;
pub use snf::{CokernelClass, IntMatrix, SmithForm};
