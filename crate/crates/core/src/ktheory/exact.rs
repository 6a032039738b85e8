use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use super::k0::{run_length, CrossedK0};
use super::lattice::Lattice;
use super::maps::{beta, delta, eta, iota};
use crate::cantor::{ClopenSet, IntFunction, InvariantMeasure, SymbolicSystem, Window};
use crate::error::{Error, Result};
use crate::rokhlin::SliceChain;

/// Crossed-product stages grown on demand to cover the functions asked about.
pub struct K0Cache<'a> {
    sys: SymbolicSystem,
    mu: &'a InvariantMeasure,
    stage: Option<CrossedK0>,
}

impl<'a> K0Cache<'a> {
    pub fn new(sys: &SymbolicSystem, mu: &'a InvariantMeasure) -> Self {
        K0Cache {
            sys: sys.clone(),
            mu,
            stage: None,
        }
    }

    /// A stage whose ambient window contains every window in `ws`.
    pub fn covering(&mut self, ws: &[Window]) -> Result<&CrossedK0> {
        let mut want = ws.iter().fold(Window::EMPTY, |a, b| a.hull(b));
        if self.sys.is_odometer() {
            want = Window::new(0, want.end().max(0) as usize);
        }
        let rebuild = match &self.stage {
            Some(k) => !k.ambient().contains(&want),
            None => true,
        };
        if rebuild {
            let w = match &self.stage {
                Some(k) => want.hull(&k.window()),
                None => want,
            };
            self.stage = Some(CrossedK0::new(&self.sys, w, self.mu)?);
        }
        Ok(self.stage.as_ref().unwrap())
    }

    pub fn same_class(&mut self, f: &IntFunction, g: &IntFunction) -> Result<bool> {
        let fs = f.simplify()?;
        let gs = g.simplify()?;
        let k = self.covering(&[
            fs.window(),
            fs.domain().window(),
            gs.window(),
            gs.domain().window(),
        ])?;
        k.same_class(&fs, &gs)
    }

    pub fn is_zero(&mut self, f: &IntFunction) -> Result<bool> {
        let fs = f.simplify()?;
        let k = self.covering(&[fs.window(), fs.domain().window()])?;
        k.is_zero(&fs)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RowRanks {
    /// Atoms of `Φ_n^{-1}(S_{n+1})` feeding `β`.
    pub domain_atoms: usize,
    /// Atoms of `S_{n+1}` tested against `ker γ̃`.
    pub target_atoms: usize,
    pub ambient_atoms: usize,
    pub rank_beta: usize,
    pub rank_ker_gamma: usize,
    pub cokernel_rank: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactRowReport {
    pub stage: usize,
    pub depth: usize,
    pub eta_injective: bool,
    pub eta_in_ker_beta: bool,
    pub im_beta_in_ker_gamma: bool,
    pub ker_gamma_in_im_beta: bool,
    pub im_beta_eq_ker_gamma: bool,
    pub gamma_surjective: bool,
    pub ranks: RowRanks,
    pub invariant_factors: Vec<(String, usize)>,
    pub windows: RowWindows,
}

#[derive(Clone, Debug, Serialize)]
pub struct RowWindows {
    pub target: (i64, usize),
    pub domain: (i64, usize),
    pub ambient: (i64, usize),
}

impl ExactRowReport {
    pub fn all(&self) -> bool {
        self.eta_injective
            && self.eta_in_ker_beta
            && self.im_beta_eq_ker_gamma
            && self.gamma_surjective
    }
}

fn grow(sys: &SymbolicSystem, w: Window, margin: usize) -> Window {
    if sys.is_odometer() {
        Window::new(0, w.end() as usize + margin)
    } else {
        Window::new(w.start - margin as i64, w.len + 2 * margin)
    }
}

fn atom_indicators(set: &ClopenSet, w: Window) -> Result<Vec<IntFunction>> {
    let r = set.refine(w.hull(&set.window()))?;
    r.atoms()
        .iter()
        .map(|a| IntFunction::indicator(set, a))
        .collect()
}

fn pair(w: Window) -> (i64, usize) {
    (w.start, w.len)
}

/// `0, 1, 2, 4, …` up to and including `cap`.
fn margins(cap: usize) -> Vec<usize> {
    let mut out = vec![0];
    let mut m = 1;
    while m < cap {
        out.push(m);
        m *= 2;
    }
    out.push(cap.max(1));
    out
}

/// Checks the row `ℤ → C(Φ_n^{-1}S_{n+1}) → C(S_{n+1}) → K_0` for the towers
/// of `S_{n+1}` in `S_n`, using atoms of depth `depth`.
pub fn verify_exact_row(
    chain: &SliceChain,
    n: usize,
    depth: usize,
    mu: &InvariantMeasure,
) -> Result<ExactRowReport> {
    if n >= chain.stages() {
        return Err(Error::Invalid(format!(
            "stage {n} needs {} slices, chain has {}",
            n + 1,
            chain.stages()
        )));
    }
    let sys = chain.system();
    let td = chain.tower(n);
    let inner = td.inner_slice();
    let pre = td.pre_inner()?;
    let one = eta(td, 1)?;
    let eta_injective = !one.is_zero();
    let eta_in_ker_beta = beta(td, &one)?.is_zero();
    let base = sys.depth_window(depth).hull(&inner.window());
    let arrivals: Vec<u64> = td
        .towers()
        .iter()
        .flat_map(|t| t.arrivals.last().unwrap().iter().map(|(_, m)| *m))
        .collect();

    // windows this wide reach every atom through a first visit to S_{n+1}
    let cap = chain.induced(n + 1).partition().max_time() as usize + depth;
    let mut last = None;
    for margin in margins(cap) {
        let wv = grow(sys, base, margin);
        let mut wa = wv.hull(&pre.window());
        if !sys.is_odometer() {
            for m in &arrivals {
                wa = wa.hull(&wv.shifted(-(*m as i64)));
            }
        }
        let sources = atom_indicators(&pre, wa)?;
        let images = sources
            .iter()
            .map(|f| beta(td, f)?.simplify())
            .collect::<Result<Vec<_>>>()?;
        let targets = atom_indicators(inner, wv)?;
        let mut wk = wv;
        for g in &images {
            wk = wk.hull(&g.window());
        }
        let k0 = CrossedK0::new(sys, wk, mu)?;
        let rows = k0.atoms().len();
        let bcols = images
            .iter()
            .map(|g| k0.coordinates(g))
            .collect::<Result<Vec<_>>>()?;
        let gcols = targets
            .iter()
            .map(|g| k0.coordinates(g))
            .collect::<Result<Vec<_>>>()?;
        let im_beta = Lattice::spanned_by(rows, &bcols);
        let im_beta_in_ker_gamma = bcols.iter().all(|c| k0.in_image(c));

        let gq: Vec<Vec<BigInt>> = gcols
            .iter()
            .map(|c| k0.quotient().project_dense(c))
            .collect();
        let reach = k0.span(&gq);
        // every depth-d atom of the whole space must be reached
        let full = ClopenSet::full(sys);
        let mut gamma_surjective = true;
        for a in full.refine(sys.depth_window(depth))?.atoms() {
            if !reach.contains(&k0.project(&IntFunction::indicator(&full, &a)?)?) {
                gamma_surjective = false;
                break;
            }
        }
        let p = targets.len();
        let kernel = k0.kernel_of(&gq);
        let rank_ker_gamma = kernel.len();
        let ker_gamma_in_im_beta = kernel.iter().all(|x| {
            let mut v = vec![BigInt::zero(); rows];
            for (j, c) in x {
                for (a, b) in v.iter_mut().zip(&gcols[*j]) {
                    if !b.is_zero() {
                        *a += c * b;
                    }
                }
            }
            im_beta.contains(&v)
        });

        let report = ExactRowReport {
            stage: n,
            depth,
            eta_injective,
            eta_in_ker_beta,
            im_beta_in_ker_gamma,
            ker_gamma_in_im_beta,
            im_beta_eq_ker_gamma: im_beta_in_ker_gamma && ker_gamma_in_im_beta,
            gamma_surjective,
            ranks: RowRanks {
                domain_atoms: sources.len(),
                target_atoms: p,
                ambient_atoms: rows,
                rank_beta: im_beta.rank(),
                rank_ker_gamma,
                cokernel_rank: k0.cokernel_rank(),
            },
            invariant_factors: run_length(&k0.invariant_factors()),
            windows: RowWindows {
                target: pair(wv),
                domain: pair(wa),
                ambient: pair(k0.ambient()),
            },
        };
        if report.ker_gamma_in_im_beta && report.gamma_surjective {
            return Ok(report);
        }
        last = Some(report);
    }
    Ok(last.unwrap())
}

/// `β_{n+2}(δ f)` and `ι_{n+1,*}(β_{n+1} f)` agree in `K_0`.
pub fn middle_square(
    chain: &SliceChain,
    n: usize,
    f: &IntFunction,
    cache: &mut K0Cache<'_>,
) -> Result<bool> {
    let td = chain.tower(n);
    let next = chain.tower(n + 1);
    let left = beta(next, &delta(td, next, f)?)?;
    let right = iota(next, &beta(td, f)?)?;
    cache.same_class(&left, &right)
}

/// `γ̃(ι_{n,*} h) = γ̃(h)` for `h` on `S_n`.
pub fn right_square(
    chain: &SliceChain,
    n: usize,
    h: &IntFunction,
    cache: &mut K0Cache<'_>,
) -> Result<bool> {
    let up = iota(chain.tower(n), h)?;
    cache.same_class(&up, h)
}

/// Number of `δ` steps after which `f` on `Φ_n^{-1}(S_{n+1})` becomes
/// constant, if that happens within the chain.
pub fn delta_steps(chain: &SliceChain, n: usize, f: &IntFunction) -> Result<Option<usize>> {
    let mut g = f.clone();
    let mut k = n;
    let mut steps = 0;
    loop {
        if g.constant_value()?.is_some() {
            return Ok(Some(steps));
        }
        if k + 1 >= chain.stages() {
            return Ok(None);
        }
        g = delta(chain.tower(k), chain.tower(k + 1), &g)?;
        k += 1;
        steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rokhlin::DEFAULT_MAX_STEPS;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dyadic(n: usize) -> SliceChain {
        let s = SymbolicSystem::parse("odometer base=2").unwrap();
        let sl: Vec<ClopenSet> = (1..=n)
            .map(|k| ClopenSet::parse_cylinder(&s, &"0".repeat(k)).unwrap())
            .collect();
        SliceChain::new(&s, &sl, DEFAULT_MAX_STEPS).unwrap()
    }

    #[test]
    fn dyadic_rows_exact() {
        let c = dyadic(5);
        let mu = InvariantMeasure::new(c.system());
        for n in 0..5 {
            let r = verify_exact_row(&c, n, n + 3, &mu).unwrap();
            assert!(r.all(), "{r:?}");
        }
    }

    #[test]
    fn dyadic_squares_and_delta() {
        let c = dyadic(5);
        let s = c.system().clone();
        let mu = InvariantMeasure::new(&s);
        let mut cache = K0Cache::new(&s, &mu);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 0..3 {
            let pre = c.tower(n).pre_inner().unwrap();
            for _ in 0..10 {
                let f = IntFunction::random(&pre, s.depth_window(n + 2), 4, &mut rng).unwrap();
                assert!(middle_square(&c, n, &f, &mut cache).unwrap());
                assert!(delta_steps(&c, n, &f).unwrap().unwrap() <= 1);
                let h =
                    IntFunction::random(c.slice(n), s.depth_window(n + 3), 4, &mut rng).unwrap();
                assert!(right_square(&c, n, &h, &mut cache).unwrap());
            }
        }
    }

    #[test]
    fn constant_needs_no_steps() {
        let c = dyadic(3);
        assert_eq!(
            delta_steps(&c, 0, &eta(c.tower(0), 4).unwrap()).unwrap(),
            Some(0)
        );
    }
}
