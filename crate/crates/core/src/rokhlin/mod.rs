//! First returns, induced maps and Kakutani–Rokhlin towers over nested
//! clopen slices.

mod chain;
mod partition;
mod tower;

pub use chain::{auto_nest, SliceChain};
pub use partition::{
    return_partition, CantorMap, InducedSystem, ReturnPartition, ReturnPartitionJson,
    DEFAULT_MAX_STEPS,
};
pub use tower::{DecompositionJson, Tower, TowerCheck, TowerDecomposition, TowerJson};
