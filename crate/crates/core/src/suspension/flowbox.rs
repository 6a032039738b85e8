use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::flow::Suspension;
use super::roof::{min_value, RationalFunction};
use crate::cantor::{ClopenSet, PointCode};
use crate::error::{Error, Result};
use crate::rokhlin::{CantorMap, InducedSystem, DEFAULT_MAX_STEPS};

/// Deepest cylinder tried before giving up on a stage.
pub const MAX_FLOWBOX_DEPTH: usize = 4096;

/// A clopen slice at fiber time zero with the length of its box.
#[derive(Clone, Debug)]
pub struct CentralSlice {
    pub set: ClopenSet,
    /// Largest `d` with the slice inside the depth-`d` cylinder of the center.
    pub depth: usize,
    pub length: BigRational,
    pub min_return: BigRational,
    pub induced: Arc<InducedSystem>,
}

/// Slices `S_1 ⊇ S_2 ⊇ …` around a center; `slices[i]` is `S_{i+1}`.
#[derive(Clone, Debug)]
pub struct FlowboxStructure {
    pub center: PointCode,
    pub slices: Vec<CentralSlice>,
}

fn cylinder(susp: &Suspension, center: &PointCode, d: usize) -> Result<ClopenSet> {
    let sys = susp.system();
    let w = sys.depth_window(d);
    ClopenSet::from_words(sys, w, vec![sys.point_coords(center, w)?])
}

fn real_returns(susp: &Suspension, ind: &InducedSystem) -> Result<RationalFunction> {
    susp.roof().return_time(ind)
}

fn containing_depth(susp: &Suspension, center: &PointCode, set: &ClopenSet) -> Result<usize> {
    let mut d = 0;
    let cap = 2 * set.window().len + 2;
    while d < cap && set.is_subset(&cylinder(susp, center, d + 1)?)? {
        d += 1;
    }
    Ok(d)
}

impl FlowboxStructure {
    /// Takes `S_n` to be the cylinder of depth `d(n) ≥ n` around `center`,
    /// deep enough that the shortest return is at least `2n`, and
    /// `l_n` half of that shortest return.
    pub fn build(susp: &Suspension, center: &PointCode, n_max: usize) -> Result<Self> {
        let sys = susp.system();
        sys.validate_point(center)?;
        let mut slices: Vec<CentralSlice> = Vec::with_capacity(n_max);
        let mut d = 0;
        for n in 1..=n_max {
            d = d.max(n);
            let need = BigRational::from_integer(BigInt::from(2 * n));
            loop {
                if d > MAX_FLOWBOX_DEPTH {
                    return Err(Error::Invalid(format!(
                        "no cylinder up to depth {MAX_FLOWBOX_DEPTH} gives a box of length {n}"
                    )));
                }
                let set = cylinder(susp, center, d)?.simplify()?;
                let ind = Arc::new(InducedSystem::new(sys, &set, DEFAULT_MAX_STEPS)?);
                let min_return = min_value(&real_returns(susp, &ind)?)?;
                if min_return >= need {
                    let length = &min_return / BigRational::from_integer(2.into());
                    slices.push(CentralSlice {
                        set,
                        depth: d,
                        length,
                        min_return,
                        induced: ind,
                    });
                    break;
                }
                d += 1;
            }
        }
        Ok(FlowboxStructure {
            center: center.clone(),
            slices,
        })
    }

    /// A structure from given slices and lengths, with no checks.
    pub fn from_slices(
        susp: &Suspension,
        center: &PointCode,
        parts: Vec<(ClopenSet, BigRational)>,
    ) -> Result<Self> {
        let mut slices = Vec::with_capacity(parts.len());
        for (set, length) in parts {
            let ind = Arc::new(InducedSystem::new(susp.system(), &set, DEFAULT_MAX_STEPS)?);
            let min_return = min_value(&real_returns(susp, &ind)?)?;
            let depth = containing_depth(susp, center, &set)?;
            slices.push(CentralSlice {
                set,
                depth,
                length,
                min_return,
                induced: ind,
            });
        }
        Ok(FlowboxStructure {
            center: center.clone(),
            slices,
        })
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    /// `S_n` for `n ≥ 1`.
    pub fn slice(&self, n: usize) -> &CentralSlice {
        &self.slices[n - 1]
    }
}

/// One sampled instance of the containment
/// `φ(S_k × [L1, L2]) ⊆ φ(S_n × (L1 − η, L2 + η))`.
#[derive(Clone, Debug, Serialize)]
pub struct ContainmentSample {
    pub n: usize,
    pub k: usize,
    pub eta: String,
    pub l1: String,
    pub l2: String,
    pub t: String,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageRow {
    pub n: usize,
    pub depth: usize,
    pub atoms: usize,
    pub length: String,
    pub min_return: String,
    pub admissible: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowboxReport {
    pub stages: Vec<StageRow>,
    pub nested: bool,
    pub lengths_diverge: bool,
    pub shrinks_to_center: bool,
    pub nonempty_interior: bool,
    pub admissible: bool,
    pub containment_samples: usize,
    pub containment_failures: usize,
    pub failed_samples: Vec<ContainmentSample>,
}

impl FlowboxReport {
    pub fn all(&self) -> bool {
        self.nested
            && self.lengths_diverge
            && self.shrinks_to_center
            && self.nonempty_interior
            && self.admissible
            && self.containment_failures == 0
    }
}

/// Checks one containment instance at the point `φ_t([0, y])`, `y ∈ S_k`:
/// the box coordinates relative to `S_n` over `(L1 − η, L2 + η)` exist, are
/// unique and equal `(t, y)`, and a neighbourhood stays inside.
#[allow(clippy::too_many_arguments)]
pub fn check_containment(
    susp: &Suspension,
    fb: &FlowboxStructure,
    n: usize,
    k: usize,
    eta: &BigRational,
    l1: &BigRational,
    l2: &BigRational,
    y: &PointCode,
    t: &BigRational,
) -> Result<bool> {
    if n == 0 || k <= n || k > fb.len() {
        return Err(Error::Invalid(format!(
            "need 1 ≤ n < k ≤ {}, got n = {n}, k = {k}",
            fb.len()
        )));
    }
    let sn = fb.slice(n);
    let half = &sn.length / BigRational::from_integer(2.into());
    if !eta.is_positive() || eta >= &half {
        return Err(Error::Invalid(format!(
            "η = {eta} must lie in (0, l_n/2) = (0, {half})"
        )));
    }
    if l1 > l2 || -&half >= l1 - eta || l2 + eta >= half {
        return Err(Error::Invalid(
            "need L1 ≤ L2 with -l_n/2 < L1 - η and L2 + η < l_n/2".into(),
        ));
    }
    if t < l1 || t > l2 {
        return Err(Error::Invalid(format!("t = {t} lies outside [L1, L2]")));
    }
    let sk = &fb.slice(k).set;
    if !sk.contains(y)? {
        return Err(Error::Invalid("sample point is not in S_k".into()));
    }
    if !sk.is_subset(&sn.set)? {
        return Ok(false);
    }
    let p = susp.flow_step(&susp.point(y)?, t)?;
    let lo = l1 - eta;
    let hi = l2 + eta;
    let mut hits = Vec::new();
    for (u, x) in susp.section_crossings(&p, &lo, &hi)? {
        if sn.set.contains(&x)? {
            hits.push((u, x));
        }
    }
    Ok(hits.len() == 1 && &hits[0].0 == t && &hits[0].1 == y && t > &lo && t < &hi)
}

fn random_between<R: Rng>(
    rng: &mut R,
    lo: &BigRational,
    hi: &BigRational,
    den: i64,
) -> BigRational {
    // a grid point strictly inside (lo, hi)
    let a = rng.gen_range(1..den);
    lo + (hi - lo) * BigRational::new(a.into(), den.into())
}

/// Exact checks of nesting, divergence, shrinking and interiors, and
/// `samples` seeded containment instances.
pub fn verify_flowbox_properties(
    susp: &Suspension,
    fb: &FlowboxStructure,
    samples: usize,
    seed: u64,
) -> Result<FlowboxReport> {
    let mut stages = Vec::new();
    let mut nested = true;
    let mut lengths_diverge = true;
    let mut shrinks = true;
    let mut interior = true;
    let mut admissible = true;
    for n in 1..=fb.len() {
        let s = fb.slice(n);
        if n > 1 && !s.set.is_subset(&fb.slice(n - 1).set)? {
            nested = false;
        }
        if s.length < BigRational::from_integer(BigInt::from(n))
            || (n > 1 && s.length < fb.slice(n - 1).length)
        {
            lengths_diverge = false;
        }
        if !s.set.contains(&fb.center)? || !s.set.is_subset(&cylinder(susp, &fb.center, n)?)? {
            shrinks = false;
        }
        if s.set.is_empty() || !s.length.is_positive() {
            interior = false;
        }
        let ok = s.length < s.min_return;
        admissible &= ok;
        stages.push(StageRow {
            n,
            depth: s.depth,
            atoms: s.set.words().len(),
            length: s.length.to_string(),
            min_return: s.min_return.to_string(),
            admissible: ok,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut done = 0;
    if fb.len() >= 2 {
        for _ in 0..samples {
            let n = rng.gen_range(1..fb.len());
            let k = rng.gen_range(n + 1..=fb.len());
            let half = &fb.slice(n).length / BigRational::from_integer(2.into());
            let eta = random_between(&mut rng, &BigRational::zero(), &half, 16);
            let lo = -&half + &eta;
            let hi = &half - &eta;
            let mut a = random_between(&mut rng, &lo, &hi, 64);
            let mut b = random_between(&mut rng, &lo, &hi, 64);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            let t = &a + (&b - &a) * BigRational::new(rng.gen_range(0..=8).into(), 8.into());
            let ind = &fb.slice(k).induced;
            let mut y = fb.center.clone();
            for _ in 0..rng.gen_range(0..4) {
                y = ind.point_forward(&y)?;
            }
            let holds = check_containment(susp, fb, n, k, &eta, &a, &b, &y, &t)?;
            done += 1;
            if !holds {
                failures.push(ContainmentSample {
                    n,
                    k,
                    eta: eta.to_string(),
                    l1: a.to_string(),
                    l2: b.to_string(),
                    t: t.to_string(),
                    holds,
                });
            }
        }
    }
    Ok(FlowboxReport {
        stages,
        nested,
        lengths_diverge,
        shrinks_to_center: shrinks,
        nonempty_interior: interior,
        admissible,
        containment_samples: done,
        containment_failures: failures.len(),
        failed_samples: failures,
    })
}
