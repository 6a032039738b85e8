use std::sync::Arc;

use super::{InducedSystem, TowerDecomposition};
use crate::cantor::{ClopenSet, PointCode, SymbolicSystem};
use crate::error::{Error, Result};

/// Nested slices `S_0 ⊇ S_1 ⊇ … ⊇ S_N` with `S_0` the whole space, their
/// induced systems and the tower decomposition of each consecutive pair.
#[derive(Clone, Debug)]
pub struct SliceChain {
    sys: SymbolicSystem,
    slices: Vec<ClopenSet>,
    induced: Vec<Arc<InducedSystem>>,
    towers: Vec<TowerDecomposition>,
}

impl SliceChain {
    /// `inner` lists `S_1, …, S_N`.
    pub fn new(sys: &SymbolicSystem, inner: &[ClopenSet], max_steps: usize) -> Result<Self> {
        let mut slices = vec![ClopenSet::full(sys)];
        slices.extend(inner.iter().cloned());
        let mut induced: Vec<Arc<InducedSystem>> = Vec::with_capacity(slices.len());
        let mut towers = Vec::with_capacity(inner.len());
        for (i, s) in slices.iter().enumerate() {
            if s.system() != sys {
                return Err(Error::SystemMismatch);
            }
            let ind = Arc::new(InducedSystem::new(sys, s, max_steps)?);
            if i > 0 {
                towers.push(TowerDecomposition::new(
                    induced[i - 1].clone(),
                    s,
                    max_steps,
                )?);
            }
            induced.push(ind);
        }
        Ok(SliceChain {
            sys: sys.clone(),
            slices,
            induced,
            towers,
        })
    }

    /// Parses comma-separated `[start:]word` cylinders.
    pub fn parse_slices(sys: &SymbolicSystem, spec: &str) -> Result<Vec<ClopenSet>> {
        spec.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| ClopenSet::parse_cylinder(sys, s))
            .collect()
    }

    pub fn system(&self) -> &SymbolicSystem {
        &self.sys
    }

    /// Number of stages `N` (slices beyond `S_0`).
    pub fn stages(&self) -> usize {
        self.towers.len()
    }

    pub fn slice(&self, n: usize) -> &ClopenSet {
        &self.slices[n]
    }

    pub fn slices(&self) -> &[ClopenSet] {
        &self.slices
    }

    pub fn induced(&self, n: usize) -> &Arc<InducedSystem> {
        &self.induced[n]
    }

    /// Towers of `S_{n+1}` inside `S_n`.
    pub fn tower(&self, n: usize) -> &TowerDecomposition {
        &self.towers[n]
    }

    pub fn towers(&self) -> &[TowerDecomposition] {
        &self.towers
    }
}

/// Nested cylinders around `p`: prefixes for odometers, centred blocks for
/// subshifts, each deep enough that it never returns to itself in one step
/// of the previous slice's induced map.
pub fn auto_nest(
    sys: &SymbolicSystem,
    p: &PointCode,
    count: usize,
    max_steps: usize,
) -> Result<Vec<ClopenSet>> {
    sys.validate_point(p)?;
    let mut out = Vec::with_capacity(count);
    let mut outer = Arc::new(InducedSystem::new(sys, &ClopenSet::full(sys), max_steps)?);
    let mut depth = 0usize;
    while out.len() < count {
        depth += 1;
        if depth > 4096 {
            return Err(Error::Invalid("auto-nesting ran past depth 4096".into()));
        }
        let w = sys.depth_window(depth);
        let cand = ClopenSet::from_words(sys, w, vec![sys.point_coords(p, w)?])?.simplify()?;
        if cand.same(outer.slice())? {
            continue;
        }
        match TowerDecomposition::new(outer.clone(), &cand, max_steps) {
            Ok(_) => {}
            Err(Error::Disjointness) => continue,
            Err(e) => return Err(e),
        }
        outer = Arc::new(InducedSystem::new(sys, &cand, max_steps)?);
        out.push(cand);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rokhlin::DEFAULT_MAX_STEPS;

    #[test]
    fn dyadic_auto_nest_is_zero_prefixes() {
        let s = SymbolicSystem::parse("odometer base=2").unwrap();
        let sl = auto_nest(&s, &s.default_point(), 4, DEFAULT_MAX_STEPS).unwrap();
        let words: Vec<String> = sl.iter().map(|c| s.word_string(&c.words()[0])).collect();
        assert_eq!(words, vec!["0", "00", "000", "0000"]);
    }

    #[test]
    fn fibonacci_auto_nest_starts_at_b() {
        let s = SymbolicSystem::parse("substitution a:ab,b:a").unwrap();
        let x = s.point_step(&s.default_point(), 1).unwrap();
        let sl = auto_nest(&s, &x, 3, DEFAULT_MAX_STEPS).unwrap();
        assert_eq!(sl[0], ClopenSet::parse_cylinder(&s, "b").unwrap());
        let chain = SliceChain::new(&s, &sl, DEFAULT_MAX_STEPS).unwrap();
        assert_eq!(chain.stages(), 3);
        for i in 0..3 {
            assert!(chain.slice(i + 1).is_subset(chain.slice(i)).unwrap());
        }
    }

    #[test]
    fn chain_from_slice_list() {
        let s = SymbolicSystem::parse("odometer base=2").unwrap();
        let sl = SliceChain::parse_slices(&s, "0,00,000").unwrap();
        let chain = SliceChain::new(&s, &sl, DEFAULT_MAX_STEPS).unwrap();
        let h: Vec<Vec<u64>> = chain.towers().iter().map(|t| t.heights()).collect();
        assert_eq!(h, vec![vec![1], vec![1], vec![1]]);
    }
}
