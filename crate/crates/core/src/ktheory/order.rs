use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::exact::delta_steps;
use super::k0::{run_length, CrossedK0};
use super::lattice::SparseVec;
use crate::cantor::{ClopenSet, IntFunction, InvariantMeasure, Weight, Window, Word, EPS_MU};
use crate::error::{Error, Result};
use crate::rokhlin::{SliceChain, TowerDecomposition};

#[derive(Clone, Debug)]
pub struct OrderIsoConfig {
    pub depth: usize,
    pub positivity_samples: usize,
    pub delta_samples: usize,
    pub seed: u64,
}

impl Default for OrderIsoConfig {
    fn default() -> Self {
        OrderIsoConfig {
            depth: 6,
            positivity_samples: 200,
            delta_samples: 20,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StageEntry {
    pub stage: usize,
    pub atoms: usize,
    /// Heights of the towers of `S_{n+1}` in `S_n`, when that stage exists.
    pub heights: Option<Vec<u64>>,
    /// `ι_{n,*}(1)` when it is constant.
    pub iota_on_constants: Option<i64>,
    /// Trace of `γ̃_n(χ_{S_n})`.
    pub slice_trace: String,
    pub slice_trace_value: f64,
    pub compatible: bool,
    pub kernel_rank: usize,
    /// Stages of `ι` needed to kill every kernel vector.
    pub kernel_dies_after: Option<usize>,
    pub surjective: bool,
}

/// Samples whose trace sign was compared with the direct-limit cone. A
/// sample is undetermined when the truncation ends before its image turns
/// nonnegative.
#[derive(Clone, Debug, Default, Serialize)]
pub struct PositivityTally {
    pub samples: usize,
    pub agree: usize,
    pub disagree: usize,
    pub undetermined: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DeltaTally {
    pub samples: usize,
    pub max_steps: usize,
    pub unstabilized: usize,
    /// Worst step count per starting stage.
    pub per_stage: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderIsoReport {
    pub depth: usize,
    pub seed: u64,
    pub stages: Vec<StageEntry>,
    /// Invariant factors of the relation matrix at each depth up to `depth`.
    pub depth_factors: Vec<(usize, Vec<(String, usize)>)>,
    /// The generator value of the odometer model `(b_0⋯b_{d-1})^{-1} ℤ`.
    pub model_generator: Option<String>,
    pub compatible: bool,
    pub injective: bool,
    pub surjective: bool,
    pub positivity: PositivityTally,
    pub delta: DeltaTally,
}

impl OrderIsoReport {
    pub fn all(&self) -> bool {
        self.compatible
            && self.injective
            && self.surjective
            && self.positivity.disagree == 0
            && self.delta.unstabilized == 0
    }
}

struct Stage {
    atoms: Vec<Word>,
    /// `γ̃_n` of each atom indicator, in cokernel coordinates.
    classes: Vec<Vec<BigInt>>,
    /// Measures of the atoms.
    weights: Vec<Weight>,
}

/// An integer matrix stored by sparse columns.
struct Columns {
    rows: usize,
    cols: Vec<Vec<(usize, i64)>>,
}

impl Columns {
    fn apply(&self, v: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; self.rows];
        for (c, x) in self.cols.iter().zip(v) {
            if *x != 0 {
                for &(i, k) in c {
                    out[i] += k * x;
                }
            }
        }
        out
    }

    fn apply_sparse(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (j, x) in v {
            for &(i, k) in &self.cols[*j] {
                *out.entry(i).or_insert_with(BigInt::zero) += x * k;
            }
        }
        out.retain(|_, x| !x.is_zero());
        out
    }
}

fn sign(w: &Weight, scale: f64) -> i32 {
    match w {
        Weight::Exact(q) => {
            if q.is_positive() {
                1
            } else if q.is_negative() {
                -1
            } else {
                0
            }
        }
        Weight::Approx { value, .. } => {
            let tol = 4.0 * EPS_MU * scale.max(1.0);
            if *value > tol {
                1
            } else if *value < -tol {
                -1
            } else {
                0
            }
        }
    }
}

fn trace(stage: &Stage, v: &[i64], exact: bool) -> Weight {
    let mut t = if exact {
        Weight::zero_exact()
    } else {
        Weight::Approx {
            value: 0.0,
            err: 0.0,
        }
    };
    for (x, w) in v.iter().zip(&stage.weights) {
        if *x != 0 {
            t = t.add(&w.scale(*x));
        }
    }
    t
}

/// Truncated check that `lim (C(S_n, ℤ), ι_{n,*}) → K_0` is an isomorphism
/// of ordered groups, together with the `δ` stabilization counts.
pub fn order_iso_check(
    chain: &SliceChain,
    mu: &InvariantMeasure,
    cfg: &OrderIsoConfig,
) -> Result<OrderIsoReport> {
    if chain.stages() < 2 {
        return Err(Error::Invalid(
            "the order check needs at least two stages of towers".into(),
        ));
    }
    let sys = chain.system();
    let exact = sys.is_odometer();
    let d = cfg.depth;
    let top = chain.stages();

    // stage windows and connecting maps as sparse columns
    let mut windows = vec![sys.depth_window(d).hull(&chain.slice(0).window())];
    let mut atoms: Vec<Vec<Word>> = vec![chain.slice(0).refine(windows[0])?.words().to_vec()];
    let mut iotas: Vec<Columns> = Vec::new();
    for n in 0..top {
        let (w, next_atoms, columns) = iota_columns(
            chain.tower(n),
            windows[n],
            &atoms[n],
            sys.depth_window(d).hull(&chain.slice(n + 1).window()),
        )?;
        iotas.push(columns);
        windows.push(w);
        atoms.push(next_atoms);
    }

    let mut wk = Window::EMPTY;
    for w in &windows {
        wk = wk.hull(w);
    }
    let k0 = CrossedK0::new(sys, wk, mu)?;
    let q = k0.quotient();
    let full = ClopenSet::full(sys);
    let mut stages = Vec::new();
    for n in 0..=top {
        let mut classes = Vec::new();
        let mut weights = Vec::new();
        for a in &atoms[n] {
            let set = ClopenSet::from_words(sys, windows[n], vec![a.clone()])?;
            classes.push(k0.project_set(&set)?);
            weights.push(mu.measure(&set)?);
        }
        stages.push(Stage {
            atoms: atoms[n].clone(),
            classes,
            weights,
        });
    }

    let generators_of_depth = full
        .refine(sys.depth_window(d))?
        .atoms()
        .iter()
        .map(|a| k0.project_set(a))
        .collect::<Result<Vec<_>>>()?;

    let mut entries = Vec::new();
    for n in 0..=top {
        let st = &stages[n];
        let compatible = if n < top {
            let next = &stages[n + 1];
            iotas[n].cols.iter().zip(&st.classes).all(|(col, class)| {
                let mut diff: Vec<BigInt> = class.iter().map(|x| -x).collect();
                for &(i, k) in col {
                    for (t, x) in diff.iter_mut().zip(&next.classes[i]) {
                        *t += x * k;
                    }
                }
                q.vanishes(&diff)
            })
        } else {
            true
        };
        let kernel = k0.kernel_of(&st.classes);
        let mut dies_after = Some(0usize);
        for v in &kernel {
            let mut cur = v.clone();
            let mut steps = 0;
            let mut m = n;
            while !cur.is_empty() {
                if m == top {
                    dies_after = None;
                    break;
                }
                cur = iotas[m].apply_sparse(&cur);
                m += 1;
                steps += 1;
            }
            if dies_after.is_none() {
                break;
            }
            dies_after = dies_after.map(|s| s.max(steps));
        }
        let span = k0.span(&st.classes);
        let surjective = generators_of_depth.iter().all(|g| span.contains(g));
        let ones = vec![1i64; st.atoms.len()];
        let t = trace(st, &ones, exact);
        let iota_on_constants = if n < top {
            let img = iotas[n].apply(&ones);
            if img.windows(2).all(|w| w[0] == w[1]) {
                img.first().copied()
            } else {
                None
            }
        } else {
            None
        };
        entries.push(StageEntry {
            stage: n,
            atoms: st.atoms.len(),
            heights: if n < top {
                Some(chain.tower(n).heights())
            } else {
                None
            },
            iota_on_constants,
            slice_trace: weight_string(&t),
            slice_trace_value: t.value(),
            compatible,
            kernel_rank: kernel.len(),
            kernel_dies_after: dies_after,
            surjective,
        });
    }

    let mut depth_factors = Vec::new();
    for k in 0..=d {
        let stage = CrossedK0::new(sys, sys.depth_window(k), mu)?;
        depth_factors.push((k, run_length(&stage.invariant_factors())));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut positivity = PositivityTally::default();
    for _ in 0..cfg.positivity_samples {
        let n = rng.gen_range(0..=top);
        let st = &stages[n];
        let v: Vec<i64> = (0..st.atoms.len()).map(|_| rng.gen_range(-3..=3)).collect();
        let scale: f64 = v.iter().map(|x| x.abs() as f64).sum();
        let s = sign(&trace(st, &v, exact), scale);
        let mut cur = v;
        let mut m = n;
        let mut nonneg = cur.iter().all(|&x| x >= 0);
        let mut zero = cur.iter().all(|&x| x == 0);
        while !nonneg && m < top {
            cur = iotas[m].apply(&cur);
            m += 1;
            nonneg = cur.iter().all(|&x| x >= 0);
            zero = cur.iter().all(|&x| x == 0);
        }
        positivity.samples += 1;
        match (s, nonneg) {
            (1, true) | (-1, false) => positivity.agree += 1,
            (0, true) if zero => positivity.agree += 1,
            (-1, true) => positivity.disagree += 1,
            (0, true) => positivity.disagree += 1,
            _ => positivity.undetermined += 1,
        }
    }

    let mut delta = DeltaTally::default();
    for n in 0..top.saturating_sub(1) {
        let pre = chain.tower(n).pre_inner()?;
        let mut worst = 0;
        for _ in 0..cfg.delta_samples {
            let f = IntFunction::random(&pre, sys.depth_window(n + 2), 4, &mut rng)?;
            delta.samples += 1;
            match delta_steps(chain, n, &f)? {
                Some(k) => worst = worst.max(k),
                None => delta.unstabilized += 1,
            }
        }
        delta.max_steps = delta.max_steps.max(worst);
        delta.per_stage.push((n, worst));
    }

    let model_generator = CrossedK0::new(sys, sys.depth_window(d), mu)?
        .odometer_model_generator()
        .map(|q| q.to_string());
    Ok(OrderIsoReport {
        depth: d,
        seed: cfg.seed,
        compatible: entries.iter().all(|e| e.compatible),
        injective: entries.iter().all(|e| e.kernel_dies_after.is_some()),
        surjective: entries.iter().all(|e| e.surjective),
        stages: entries,
        depth_factors,
        model_generator,
        positivity,
        delta,
    })
}

/// Columns of `ι_{n,*}` from the atoms of `S_n` on `window` to the atoms of
/// `S_{n+1}` on the returned window, which contains `floor`.
fn iota_columns(
    td: &TowerDecomposition,
    window: Window,
    atoms: &[Word],
    floor: Window,
) -> Result<(Window, Vec<Word>, Columns)> {
    let sys = td.outer_slice().system();
    let cells = atoms
        .iter()
        .map(|a| ClopenSet::from_words(sys, window, vec![a.clone()]))
        .collect::<Result<Vec<_>>>()?;
    // `χ_a(Φ^m y)` is 1 exactly on `T^{-m}(a) ∩ piece`
    let mut parts = Vec::new();
    let mut w = floor;
    for tower in td.towers() {
        for floor in &tower.arrivals {
            for (piece, m) in floor {
                for (j, cell) in cells.iter().enumerate() {
                    let part = cell.image(-(*m as i64))?.intersection(piece)?;
                    if !part.is_empty() {
                        w = w.hull(&part.window());
                        parts.push((j, part));
                    }
                }
            }
        }
    }
    let next_atoms = td.inner_slice().refine(w)?.words().to_vec();
    let index: HashMap<&Word, usize> = next_atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut acc: Vec<HashMap<usize, i64>> = vec![HashMap::new(); atoms.len()];
    for (j, part) in parts {
        for b in part.refine(w)?.words() {
            *acc[j].entry(index[b]).or_insert(0) += 1;
        }
    }
    let cols = acc
        .into_iter()
        .map(|m| {
            let mut c: Vec<(usize, i64)> = m.into_iter().collect();
            c.sort_unstable();
            c
        })
        .collect();
    let rows = next_atoms.len();
    Ok((w, next_atoms, Columns { rows, cols }))
}

fn weight_string(w: &Weight) -> String {
    match w {
        Weight::Exact(q) => q.to_string(),
        Weight::Approx { value, .. } => format!("{value:.15}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::SymbolicSystem;
    use crate::rokhlin::DEFAULT_MAX_STEPS;

    fn zeros_chain(desc: &str, n: usize) -> SliceChain {
        let s = SymbolicSystem::parse(desc).unwrap();
        let sl: Vec<ClopenSet> = (1..=n)
            .map(|k| ClopenSet::parse_cylinder(&s, &"0".repeat(k)).unwrap())
            .collect();
        SliceChain::new(&s, &sl, DEFAULT_MAX_STEPS).unwrap()
    }

    #[test]
    fn dyadic_truncations() {
        let c = zeros_chain("odometer base=2", 4);
        let mu = InvariantMeasure::new(c.system());
        let r = order_iso_check(
            &c,
            &mu,
            &OrderIsoConfig {
                depth: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.all(), "{r:?}");
        assert_eq!(r.positivity.undetermined, 0);
        for e in &r.stages[..4] {
            assert_eq!(e.iota_on_constants, Some(2));
        }
        assert_eq!(r.stages[3].slice_trace, "1/8");
        assert_eq!(r.model_generator.as_deref(), Some("1/16"));
        assert!(r.delta.max_steps <= 1);
    }

    #[test]
    fn columns_match_iota() {
        let c = zeros_chain("odometer base=3", 3);
        let sys = c.system();
        for n in 0..3 {
            let window = sys.depth_window(n + 2).hull(&c.slice(n).window());
            let atoms = c.slice(n).refine(window).unwrap().words().to_vec();
            let (w, next, cols) =
                iota_columns(c.tower(n), window, &atoms, c.slice(n + 1).window()).unwrap();
            for (a, col) in atoms.iter().zip(&cols.cols) {
                let set = ClopenSet::from_words(sys, window, vec![a.clone()]).unwrap();
                let g = super::super::maps::iota(
                    c.tower(n),
                    &IntFunction::indicator(c.slice(n), &set).unwrap(),
                )
                .unwrap();
                let mut dense = vec![0i64; next.len()];
                for &(i, x) in col {
                    dense[i] += x;
                }
                assert_eq!(g.coordinates(w, &next).unwrap(), dense);
            }
        }
    }

    #[test]
    fn triadic_truncations() {
        let c = zeros_chain("odometer base=3", 3);
        let mu = InvariantMeasure::new(c.system());
        let r = order_iso_check(
            &c,
            &mu,
            &OrderIsoConfig {
                depth: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.all(), "{r:?}");
        assert_eq!(r.stages[0].iota_on_constants, Some(3));
        assert_eq!(r.stages[2].slice_trace, "1/9");
    }
}
