use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::{return_partition, CantorMap, InducedSystem, ReturnPartition};
use crate::cantor::{ClopenJson, ClopenSet, InvariantMeasure, Weight, EPS_MU};
use crate::error::{Error, Result};

/// One Kakutani–Rokhlin tower: `floors[k]` is the `k`-th image of the base
/// under the outer induced map, `k = 0..=height`.
#[derive(Clone, Debug)]
pub struct Tower {
    pub height: u64,
    pub floors: Vec<ClopenSet>,
    /// For each floor, the base split by the number of base-system steps
    /// needed to reach that floor.
    pub arrivals: Vec<Vec<(ClopenSet, u64)>>,
}

impl Tower {
    pub fn base(&self) -> &ClopenSet {
        &self.floors[0]
    }

    pub fn top(&self) -> &ClopenSet {
        self.floors.last().unwrap()
    }
}

/// Towers over an inner slice inside the outer slice of an induced system.
#[derive(Clone, Debug)]
pub struct TowerDecomposition {
    outer: Arc<InducedSystem>,
    inner: ClopenSet,
    inner_returns: ReturnPartition,
    towers: Vec<Tower>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TowerCheck {
    pub floors_disjoint: bool,
    pub floors_cover_outer: bool,
    pub bases_cover_inner: bool,
    pub kac_lhs: Weight,
    pub kac_rhs: Weight,
    pub kac_holds: bool,
}

impl TowerCheck {
    pub fn all(&self) -> bool {
        self.floors_disjoint && self.floors_cover_outer && self.bases_cover_inner && self.kac_holds
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TowerJson {
    pub height: u64,
    pub floors: Vec<ClopenJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionJson {
    pub outer: ClopenJson,
    pub inner: ClopenJson,
    pub heights: Vec<u64>,
    pub towers: Vec<TowerJson>,
}

impl TowerDecomposition {
    pub fn new(outer: Arc<InducedSystem>, inner: &ClopenSet, max_steps: usize) -> Result<Self> {
        if inner.is_empty() {
            return Err(Error::Invalid("inner slice is empty".into()));
        }
        if !inner.is_subset(outer.slice())? {
            return Err(Error::Invalid(
                "inner slice is not contained in the outer slice".into(),
            ));
        }
        let inner_returns = return_partition(outer.as_ref(), inner, inner, max_steps)?;
        if inner_returns.pieces.iter().any(|p| p.1 == 1) {
            return Err(Error::Disjointness);
        }
        let mut towers = Vec::new();
        for (base, k) in &inner_returns.pieces {
            let height = k - 1;
            let mut floors = vec![base.clone()];
            let mut arrivals = vec![vec![(base.clone(), 0u64)]];
            for _ in 0..height {
                let prev = arrivals.last().unwrap();
                let mut next: BTreeMap<u64, ClopenSet> = BTreeMap::new();
                for (a, m) in prev {
                    let here = a.image(*m as i64)?;
                    for (p, r, _) in outer.pieces() {
                        let c = here.intersection(p)?;
                        if c.is_empty() {
                            continue;
                        }
                        let back = c.image(-(*m as i64))?;
                        let slot = next
                            .entry(m + r)
                            .or_insert_with(|| ClopenSet::empty(inner.system()));
                        *slot = slot.union(&back)?.simplify()?;
                    }
                }
                arrivals.push(next.into_iter().map(|(m, a)| (a, m)).collect());
                floors.push(outer.forward(floors.last().unwrap())?);
            }
            towers.push(Tower {
                height,
                floors,
                arrivals,
            });
        }
        Ok(TowerDecomposition {
            outer,
            inner: inner.clone(),
            inner_returns,
            towers,
        })
    }

    pub fn outer(&self) -> &Arc<InducedSystem> {
        &self.outer
    }

    pub fn outer_slice(&self) -> &ClopenSet {
        self.outer.slice()
    }

    pub fn inner_slice(&self) -> &ClopenSet {
        &self.inner
    }

    pub fn inner_returns(&self) -> &ReturnPartition {
        &self.inner_returns
    }

    pub fn towers(&self) -> &[Tower] {
        &self.towers
    }

    /// The height set `J`.
    pub fn heights(&self) -> Vec<u64> {
        self.towers.iter().map(|t| t.height).collect()
    }

    /// `Φ_n^{-1}` of the inner slice: the union of the top floors.
    pub fn pre_inner(&self) -> Result<ClopenSet> {
        let mut u = ClopenSet::empty(self.inner.system());
        for t in &self.towers {
            u = u.union(t.top())?;
        }
        u.simplify()
    }

    pub fn check(&self, mu: &InvariantMeasure) -> Result<TowerCheck> {
        let sys = self.inner.system();
        let mut union = ClopenSet::empty(sys);
        let mut disjoint = true;
        let mut bases = ClopenSet::empty(sys);
        let mut kac_lhs = if sys.is_odometer() {
            Weight::zero_exact()
        } else {
            Weight::Approx {
                value: 0.0,
                err: 0.0,
            }
        };
        for t in &self.towers {
            for f in &t.floors {
                if !union.is_disjoint(f)? {
                    disjoint = false;
                }
                union = union.union(f)?;
            }
            bases = bases.union(t.base())?;
            kac_lhs = kac_lhs.add(&mu.measure(t.base())?.scale(t.height as i64 + 1));
        }
        let kac_rhs = mu.measure(self.outer.slice())?;
        let kac_holds = match (&kac_lhs, &kac_rhs) {
            (Weight::Exact(a), Weight::Exact(b)) => a == b,
            _ => (kac_lhs.value() - kac_rhs.value()).abs() <= 4.0 * EPS_MU,
        };
        Ok(TowerCheck {
            floors_disjoint: disjoint,
            floors_cover_outer: union.same(self.outer.slice())?,
            bases_cover_inner: bases.same(&self.inner)?,
            kac_lhs,
            kac_rhs,
            kac_holds,
        })
    }

    /// `t_n`: each base `F_j^{(0)}` paired with its top floor `Φ_n^j(F_j^{(0)})`.
    pub fn t_map(&self) -> Vec<(ClopenSet, ClopenSet)> {
        self.towers
            .iter()
            .map(|t| (t.base().clone(), t.top().clone()))
            .collect()
    }

    /// Image of a subset of the inner slice under `t_n`.
    pub fn t_apply(&self, a: &ClopenSet) -> Result<ClopenSet> {
        let mut out = ClopenSet::empty(self.inner.system());
        for t in &self.towers {
            let part = a.intersection(t.base())?;
            if !part.is_empty() {
                out = out.union(&self.outer.power(&part, t.height as i64)?)?;
            }
        }
        out.simplify()
    }

    pub fn to_json(&self) -> DecompositionJson {
        DecompositionJson {
            outer: self.outer.slice().to_json(),
            inner: self.inner.to_json(),
            heights: self.heights(),
            towers: self
                .towers
                .iter()
                .map(|t| TowerJson {
                    height: t.height,
                    floors: t.floors.iter().map(|f| f.to_json()).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::SymbolicSystem;
    use crate::rokhlin::DEFAULT_MAX_STEPS;

    fn cyl(s: &SymbolicSystem, w: &str) -> ClopenSet {
        ClopenSet::parse_cylinder(s, w).unwrap()
    }

    fn induced(s: &SymbolicSystem, slice: &ClopenSet) -> Arc<InducedSystem> {
        Arc::new(InducedSystem::new(s, slice, DEFAULT_MAX_STEPS).unwrap())
    }

    #[test]
    fn dyadic_nested_prefixes() {
        let s = SymbolicSystem::parse("odometer base=2").unwrap();
        let mu = InvariantMeasure::new(&s);
        for n in 0..5 {
            let outer = cyl(&s, &"0".repeat(n));
            let inner = cyl(&s, &"0".repeat(n + 1));
            let td =
                TowerDecomposition::new(induced(&s, &outer), &inner, DEFAULT_MAX_STEPS).unwrap();
            assert_eq!(td.heights(), vec![1]);
            assert_eq!(
                td.towers()[0].floors[1],
                cyl(&s, &format!("{}1", "0".repeat(n)))
            );
            assert!(td.check(&mu).unwrap().all());
        }
    }

    #[test]
    fn full_over_two_digit_cylinder() {
        let s = SymbolicSystem::parse("odometer base=2").unwrap();
        let td = TowerDecomposition::new(
            induced(&s, &ClopenSet::full(&s)),
            &cyl(&s, "00"),
            DEFAULT_MAX_STEPS,
        )
        .unwrap();
        assert_eq!(td.heights(), vec![3]);
        let floors: Vec<_> = td.towers()[0]
            .floors
            .iter()
            .map(|f| f.words()[0].clone())
            .collect();
        assert_eq!(floors, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]);
        let arr: Vec<u64> = td.towers()[0].arrivals.iter().map(|a| a[0].1).collect();
        assert_eq!(arr, vec![0, 1, 2, 3]);
    }

    #[test]
    fn fibonacci_kac() {
        let s = SymbolicSystem::parse("substitution a:ab,b:a").unwrap();
        let mu = InvariantMeasure::new(&s);
        let td = TowerDecomposition::new(
            induced(&s, &cyl(&s, "a")),
            &cyl(&s, "aa"),
            DEFAULT_MAX_STEPS,
        );
        // aa is followed within [a] by ab..., so it never returns in one induced step
        let td = td.unwrap();
        let c = td.check(&mu).unwrap();
        assert!(c.all(), "{c:?}");
    }

    #[test]
    fn degenerate_nesting_rejected() {
        let s = SymbolicSystem::parse("odometer base=2").unwrap();
        let e =
            TowerDecomposition::new(induced(&s, &cyl(&s, "0")), &cyl(&s, "0"), DEFAULT_MAX_STEPS)
                .unwrap_err();
        assert_eq!(e, Error::Disjointness);
    }

    #[test]
    fn t_map_sends_base_to_top() {
        let s = SymbolicSystem::parse("odometer base=2").unwrap();
        let td = TowerDecomposition::new(
            induced(&s, &cyl(&s, "00")),
            &cyl(&s, "000"),
            DEFAULT_MAX_STEPS,
        )
        .unwrap();
        let t = td.t_map();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].1, cyl(&s, "001"));
        assert_eq!(td.t_apply(&cyl(&s, "000")).unwrap(), cyl(&s, "001"));
    }
}
