use serde::Serialize;

use crate::cantor::{ClopenJson, ClopenSet, PointCode, SymbolicSystem};
use crate::error::{Error, Result};

/// Default cap on the number of cylinder-steps spent in a return computation.
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

/// A homeomorphism of a clopen subset of a symbolic system.
pub trait CantorMap {
    fn system(&self) -> &SymbolicSystem;
    fn domain(&self) -> ClopenSet;
    fn forward(&self, a: &ClopenSet) -> Result<ClopenSet>;
    fn backward(&self, a: &ClopenSet) -> Result<ClopenSet>;

    fn power(&self, a: &ClopenSet, k: i64) -> Result<ClopenSet> {
        let mut cur = a.clone();
        for _ in 0..k.unsigned_abs() {
            cur = if k > 0 {
                self.forward(&cur)?
            } else {
                self.backward(&cur)?
            };
        }
        Ok(cur)
    }

    fn point_forward(&self, p: &PointCode) -> Result<PointCode>;
}

impl CantorMap for SymbolicSystem {
    fn system(&self) -> &SymbolicSystem {
        self
    }

    fn domain(&self) -> ClopenSet {
        ClopenSet::full(self)
    }

    fn forward(&self, a: &ClopenSet) -> Result<ClopenSet> {
        a.image(1)
    }

    fn backward(&self, a: &ClopenSet) -> Result<ClopenSet> {
        a.image(-1)
    }

    fn power(&self, a: &ClopenSet, k: i64) -> Result<ClopenSet> {
        a.image(k)
    }

    fn point_forward(&self, p: &PointCode) -> Result<PointCode> {
        self.point_step(p, 1)
    }
}

/// Partition of a domain by first arrival time (at least one step) into a
/// target set.
#[derive(Clone, Debug)]
pub struct ReturnPartition {
    pub domain: ClopenSet,
    pub target: ClopenSet,
    /// `(piece, k)` with `k` increasing; each piece first meets the target
    /// after exactly `k` steps.
    pub pieces: Vec<(ClopenSet, u64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReturnPartitionJson {
    pub domain: ClopenJson,
    pub target: ClopenJson,
    pub pieces: Vec<(ClopenJson, u64)>,
}

impl ReturnPartition {
    pub fn times(&self) -> Vec<u64> {
        self.pieces.iter().map(|p| p.1).collect()
    }

    pub fn max_time(&self) -> u64 {
        self.pieces.iter().map(|p| p.1).max().unwrap_or(0)
    }

    pub fn min_time(&self) -> u64 {
        self.pieces.iter().map(|p| p.1).min().unwrap_or(0)
    }

    pub fn time_at(&self, p: &PointCode) -> Result<u64> {
        for (piece, k) in &self.pieces {
            if piece.contains(p)? {
                return Ok(*k);
            }
        }
        Err(Error::Invalid(
            "point lies outside the partition domain".into(),
        ))
    }

    pub fn to_json(&self) -> ReturnPartitionJson {
        ReturnPartitionJson {
            domain: self.domain.to_json(),
            target: self.target.to_json(),
            pieces: self.pieces.iter().map(|(p, k)| (p.to_json(), *k)).collect(),
        }
    }
}

/// First-arrival partition of `domain` into `target` under `map`.
pub fn return_partition<M: CantorMap + ?Sized>(
    map: &M,
    domain: &ClopenSet,
    target: &ClopenSet,
    max_steps: usize,
) -> Result<ReturnPartition> {
    if domain.is_empty() || target.is_empty() {
        return Err(Error::Invalid(
            "return partition needs nonempty domain and target".into(),
        ));
    }
    let mut pieces = Vec::new();
    let mut cur = domain.clone();
    let mut spent = 0usize;
    let mut i = 0u64;
    while !cur.is_empty() {
        i += 1;
        spent += cur.words().len().max(1);
        if spent > max_steps {
            return Err(Error::GuardExceeded(spent));
        }
        cur = map.forward(&cur)?;
        let hit = cur.intersection(target)?;
        if !hit.is_empty() {
            let piece = map.power(&hit, -(i as i64))?.simplify()?;
            pieces.push((piece, i));
            cur = cur.difference(target)?;
        }
        cur = cur.simplify()?;
    }
    Ok(ReturnPartition {
        domain: domain.clone(),
        target: target.clone(),
        pieces,
    })
}

/// The first-return map of the base system on a clopen slice.
#[derive(Clone, Debug)]
pub struct InducedSystem {
    sys: SymbolicSystem,
    slice: ClopenSet,
    partition: ReturnPartition,
    images: Vec<ClopenSet>,
}

impl InducedSystem {
    pub fn new(sys: &SymbolicSystem, slice: &ClopenSet, max_steps: usize) -> Result<Self> {
        if slice.system() != sys {
            return Err(Error::SystemMismatch);
        }
        let partition = return_partition(sys, slice, slice, max_steps)?;
        let images = partition
            .pieces
            .iter()
            .map(|(p, k)| p.image(*k as i64).and_then(|s| s.simplify()))
            .collect::<Result<Vec<_>>>()?;
        let ind = InducedSystem {
            sys: sys.clone(),
            slice: slice.clone(),
            partition,
            images,
        };
        if !ind.is_bijective()? {
            return Err(Error::Invalid(
                "induced map is not a bijection of the slice".into(),
            ));
        }
        Ok(ind)
    }

    pub fn slice(&self) -> &ClopenSet {
        &self.slice
    }

    pub fn partition(&self) -> &ReturnPartition {
        &self.partition
    }

    /// `(piece, return time, image of the piece)`.
    pub fn pieces(&self) -> impl Iterator<Item = (&ClopenSet, u64, &ClopenSet)> {
        self.partition
            .pieces
            .iter()
            .zip(&self.images)
            .map(|((p, k), q)| (p, *k, q))
    }

    /// Images of the pieces are disjoint and cover the slice.
    pub fn is_bijective(&self) -> Result<bool> {
        let mut union = ClopenSet::empty(&self.sys);
        for q in &self.images {
            if !union.is_disjoint(q)? {
                return Ok(false);
            }
            union = union.union(q)?;
        }
        union.same(&self.slice)
    }

    pub fn return_time_at(&self, p: &PointCode) -> Result<u64> {
        self.partition.time_at(p)
    }
}

impl CantorMap for InducedSystem {
    fn system(&self) -> &SymbolicSystem {
        &self.sys
    }

    fn domain(&self) -> ClopenSet {
        self.slice.clone()
    }

    fn forward(&self, a: &ClopenSet) -> Result<ClopenSet> {
        let mut out = ClopenSet::empty(&self.sys);
        for (p, k, _) in self.pieces() {
            let part = a.intersection(p)?;
            if !part.is_empty() {
                out = out.union(&part.image(k as i64)?)?;
            }
        }
        out.simplify()
    }

    fn backward(&self, a: &ClopenSet) -> Result<ClopenSet> {
        let mut out = ClopenSet::empty(&self.sys);
        for (_, k, q) in self.pieces() {
            let part = a.intersection(q)?;
            if !part.is_empty() {
                out = out.union(&part.image(-(k as i64))?)?;
            }
        }
        out.simplify()
    }

    fn point_forward(&self, p: &PointCode) -> Result<PointCode> {
        let k = self.return_time_at(p)?;
        self.sys.point_step(p, k as i64)
    }
}
