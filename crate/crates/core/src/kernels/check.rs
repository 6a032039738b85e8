use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::element::DiscreteCrossedElement;
use super::embed::{isometry_defects, Embedding};
use super::field::{pi_n, pi_n_inverse, KernelField};
use super::grid::FiberGrid;
use super::stage::KernelStage;
use crate::cantor::{ClopenSet, SymbolicSystem};
use crate::error::Result;
use crate::suspension::Suspension;

/// Calibrated on the dyadic mapping torus: the largest identity error over
/// `h` is 3.9 at `N = 32` and falls like `h` after that.
pub const KERNEL_TOL_C: f64 = 4.0;

/// Required error ratio when the grid is refined by two.
pub const CONVERGENCE_RATIO: f64 = 0.7;

/// `(1 − u²)³` on `(p, q)` rescaled to `u ∈ (−1, 1)`; C² with compact support.
pub fn bump(x: f64, p: f64, q: f64) -> f64 {
    if x <= p || x >= q {
        return 0.0;
    }
    let u = (2.0 * x - p - q) / (q - p);
    let v = 1.0 - u * u;
    v * v * v
}

/// `∫ bump(x, p, q)² dx = (q − p)/2 · 2¹³(6!)²/13!`.
pub fn bump_square_integral(p: f64, q: f64) -> f64 {
    let f6 = 720.0;
    let f13 = (1..=13).map(|k| k as f64).product::<f64>();
    (q - p) / 2.0 * 8192.0 * f6 * f6 / f13
}

const F_SIGMA: (f64, f64) = (-0.04, 0.3);
const F_FIBER: (f64, f64) = (0.5, 0.92);
const G_SIGMA: (f64, f64) = (-0.06, 0.25);
const G_FIBER: (f64, f64) = (0.4, 0.88);

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct IdentityErrors {
    pub homomorphism: f64,
    pub involution: f64,
    pub trace: f64,
    pub round_trip: f64,
    pub compatibility: f64,
}

impl IdentityErrors {
    pub fn values(&self) -> [f64; 5] {
        [
            self.homomorphism,
            self.involution,
            self.trace,
            self.round_trip,
            self.compatibility,
        ]
    }

    pub fn names() -> [&'static str; 5] {
        [
            "homomorphism",
            "involution",
            "trace",
            "round_trip",
            "compatibility",
        ]
    }

    fn ratio(&self, coarse: &IdentityErrors) -> IdentityErrors {
        let r = |a: f64, b: f64| if b == 0.0 { f64::INFINITY } else { a / b };
        IdentityErrors {
            homomorphism: r(self.homomorphism, coarse.homomorphism),
            involution: r(self.involution, coarse.involution),
            trace: r(self.trace, coarse.trace),
            round_trip: r(self.round_trip, coarse.round_trip),
            compatibility: r(self.compatibility, coarse.compatibility),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IsometryDefects {
    pub adjoint: f64,
    pub norm: f64,
    pub orthogonality: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub grid: usize,
    pub h: f64,
    pub tolerance: f64,
    pub errors: IdentityErrors,
    pub isometry: IsometryDefects,
    pub mask_preserved: bool,
    pub boundary_max: f64,
    pub trace_oracle: f64,
    pub total_mass: f64,
}

impl KernelReport {
    pub fn within_tolerance(&self) -> bool {
        self.errors
            .values()
            .iter()
            .all(|e| e.is_finite() && *e <= self.tolerance)
            && self.isometry.adjoint <= self.tolerance
            && self.isometry.norm <= self.tolerance
            && self.isometry.orthogonality <= self.tolerance
            && self.mask_preserved
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub coarse: KernelReport,
    pub fine: KernelReport,
    pub ratios: IdentityErrors,
    pub required_ratio: f64,
}

impl ConvergenceReport {
    pub fn converges(&self) -> bool {
        self.ratios
            .values()
            .iter()
            .all(|r| *r <= self.required_ratio)
    }

    pub fn all(&self) -> bool {
        self.coarse.within_tolerance() && self.fine.within_tolerance() && self.converges()
    }
}

/// Separable bump inputs over a lower stage (the whole base) and an upper
/// stage (a slice inside it).
pub struct BumpSuite {
    pub susp: Suspension,
    pub lower: KernelStage,
    pub upper: KernelStage,
    pub embedding: Embedding,
    pub seed: u64,
}

impl BumpSuite {
    /// The dyadic mapping torus with lower atoms `[0]`, `[1]` and upper slice
    /// `[0]`.
    pub fn mapping_torus(n: usize, seed: u64) -> Result<Self> {
        let sys = SymbolicSystem::parse("odometer base=2")?;
        let susp = Suspension::mapping_torus(&sys);
        let upper = ClopenSet::parse_cylinder(&sys, "0")?;
        Self::new(&susp, &upper, n, seed)
    }

    pub fn new(susp: &Suspension, upper_slice: &ClopenSet, n: usize, seed: u64) -> Result<Self> {
        let sys = susp.system();
        let grid = FiberGrid::new(n);
        let full = ClopenSet::full(sys);
        let lower = KernelStage::with_window(susp, 0, &full, sys.depth_window(1), grid)?;
        let (upper, embedding) = Embedding::refine_upper(susp, &lower, upper_slice, grid)?;
        Ok(BumpSuite {
            susp: susp.clone(),
            lower,
            upper,
            embedding,
            seed,
        })
    }

    fn amp(a: usize, k: usize) -> f64 {
        1.0 - 0.4 * a as f64 / k.max(1) as f64
    }

    /// `f(σ)(y, θ) = α_y·b(σ/t_y)·c(θ)`.
    pub fn f_value(&self, a: usize, s: f64, u: f64) -> f64 {
        let t = self.lower.times[a];
        Self::amp(a, self.lower.len())
            * bump(s / t, F_SIGMA.0, F_SIGMA.1)
            * bump(u, F_FIBER.0, F_FIBER.1)
    }

    pub fn g_value(&self, a: usize, s: f64, u: f64) -> f64 {
        let t = self.lower.times[a];
        (0.5 + 0.3 * a as f64) * bump(s / t, G_SIGMA.0, G_SIGMA.1) * bump(u, G_FIBER.0, G_FIBER.1)
    }

    fn bound(&self) -> f64 {
        0.35 * self.lower.t_max()
    }

    pub fn f(&self) -> DiscreteCrossedElement {
        DiscreteCrossedElement::from_fn(&self.lower, self.bound(), |a, s, u| self.f_value(a, s, u))
    }

    pub fn g(&self) -> DiscreteCrossedElement {
        DiscreteCrossedElement::from_fn(&self.lower, self.bound(), |a, s, u| self.g_value(a, s, u))
    }

    /// `f` read in the coordinates of the upper stage.
    pub fn f_lifted(&self) -> DiscreteCrossedElement {
        let e = &self.embedding;
        let bound = self.bound().max(0.35 * self.upper.t_max());
        DiscreteCrossedElement::from_fn(&self.upper, bound, |a, s, u| {
            let x = e.times[a] * u;
            let fl = &e.floors[a][e.floor_at(a, x)];
            self.f_value(fl.atom, s, (x - fl.offset) / self.lower.times[fl.atom])
        })
    }

    /// `τ_μ(g★g*) = Σ μ(y)·t_y·∫∫|g|² / μ'(X)` in closed form.
    pub fn trace_oracle(&self) -> f64 {
        let st = &self.lower;
        let ib = bump_square_integral(G_SIGMA.0, G_SIGMA.1);
        let ic = bump_square_integral(G_FIBER.0, G_FIBER.1);
        let mut acc = 0.0;
        for a in 0..st.len() {
            let t = st.times[a];
            let beta = 0.5 + 0.3 * a as f64;
            acc += st.weights[a] * t * beta * beta * (t * ib) * ic;
        }
        acc / st.total_mass()
    }

    /// A random separable bump kernel per atom.
    pub fn random_kernel(&self) -> KernelField {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let params: Vec<[f64; 5]> = (0..self.lower.len())
            .map(|_| {
                [
                    rng.gen_range(0.5..1.5),
                    rng.gen_range(0.05..0.3),
                    rng.gen_range(0.6..0.95),
                    rng.gen_range(0.05..0.3),
                    rng.gen_range(0.6..0.95),
                ]
            })
            .collect();
        KernelField::from_fn(&self.lower, |a, s, t| {
            let p = params[a];
            p[0] * bump(s, p[1], p[2]) * bump(t, p[3], p[4])
        })
    }

    pub fn run(&self) -> Result<KernelReport> {
        let st = &self.lower;
        let f = self.f();
        let g = self.g();
        let kf = pi_n(&f, st)?;
        let kg = pi_n(&g, st)?;

        let fg = f.convolve(&g)?;
        let homomorphism = pi_n(&fg, st)?.max_diff(&kf.compose(&kg)?)?;

        let fs = f.involution();
        let involution = pi_n(&fs, st)?.max_diff(&kf.transpose())?;

        let ggs = g.convolve(&g.involution())?;
        let oracle = self.trace_oracle();
        let trace = (ggs.trace(st) - oracle)
            .abs()
            .max((pi_n(&ggs, st)?.trace(st) - oracle).abs());

        let k = self.random_kernel();
        let k_back = pi_n(&pi_n_inverse(&k, st)?, st)?;
        let f_back = pi_n_inverse(&kf, st)?;
        let round_trip = k_back.max_diff(&k)?.max(f_back.sub(&f)?.max_abs());

        let up = self.embedding.embed_kernels(&kf, st, &self.upper)?;
        let compatibility = up.max_diff(&pi_n(&self.f_lifted(), &self.upper)?)?;

        let grid = st.grid;
        let h_vec: Vec<f64> = grid.nodes().map(|u| bump(u, 0.1, 0.9)).collect();
        let (adjoint, norm, orthogonality) = isometry_defects(&self.embedding, st, grid, &h_vec);

        let mask_preserved = [&fg, &fs, &ggs, &f_back, &pi_n_inverse(&k, st)?]
            .iter()
            .all(|e| e.satisfies_mask());
        let boundary_max = [&kf, &kg, &up]
            .iter()
            .map(|k| k.boundary_max())
            .fold(0.0, f64::max);
        let h = grid.h();
        Ok(KernelReport {
            grid: grid.n,
            h,
            tolerance: KERNEL_TOL_C * h,
            errors: IdentityErrors {
                homomorphism,
                involution,
                trace,
                round_trip,
                compatibility,
            },
            isometry: IsometryDefects {
                adjoint,
                norm,
                orthogonality,
            },
            mask_preserved,
            boundary_max,
            trace_oracle: oracle,
            total_mass: st.total_mass(),
        })
    }
}

/// Runs the mapping-torus suite on `N` and `2N`.
pub fn convergence_study(n: usize, seed: u64) -> Result<ConvergenceReport> {
    let coarse = BumpSuite::mapping_torus(n, seed)?.run()?;
    let fine = BumpSuite::mapping_torus(2 * n, seed)?.run()?;
    Ok(compare(coarse, fine))
}

/// Runs the suite for a given suspension and upper slice on `N` and `2N`.
pub fn convergence_study_for(
    susp: &Suspension,
    upper: &ClopenSet,
    n: usize,
    seed: u64,
) -> Result<ConvergenceReport> {
    let coarse = BumpSuite::new(susp, upper, n, seed)?.run()?;
    let fine = BumpSuite::new(susp, upper, 2 * n, seed)?.run()?;
    Ok(compare(coarse, fine))
}

fn compare(coarse: KernelReport, fine: KernelReport) -> ConvergenceReport {
    let ratios = fine.errors.ratio(&coarse.errors);
    ConvergenceReport {
        coarse,
        fine,
        ratios,
        required_ratio: CONVERGENCE_RATIO,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_integral_matches_quadrature() {
        let n = 200_000;
        let (p, q) = (0.2, 0.7);
        let h = (q - p) / n as f64;
        let s: f64 = (0..n)
            .map(|i| bump(p + (i as f64 + 0.5) * h, p, q).powi(2))
            .sum::<f64>()
            * h;
        assert!((s - bump_square_integral(p, q)).abs() < 1e-10);
    }

    fn suite() -> BumpSuite {
        BumpSuite::mapping_torus(32, 0).unwrap()
    }

    #[test]
    fn zero_inputs_give_zero() {
        let b = suite();
        let st = &b.lower;
        let z = DiscreteCrossedElement::zero(st, 0.5);
        assert_eq!(z.convolve(&b.f()).unwrap().max_abs(), 0.0);
        assert_eq!(pi_n(&z, st).unwrap().max_abs(), 0.0);
        assert_eq!(z.trace(st), 0.0);
        let kz = KernelField::zero(0, st.grid, st.len());
        assert_eq!(pi_n_inverse(&kz, st).unwrap().max_abs(), 0.0);
        assert_eq!(kz.trace(st), 0.0);
        assert_eq!(
            b.embedding
                .embed_kernels(&kz, st, &b.upper)
                .unwrap()
                .max_abs(),
            0.0
        );
    }

    #[test]
    fn unit_roof_has_unit_mass() {
        assert!((suite().lower.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_roof_kernel_is_shifted_bump() {
        let b = suite();
        let st = &b.lower;
        let k = pi_n(&b.f(), st).unwrap();
        let g = st.grid;
        for a in 0..st.len() {
            for si in 0..g.len() {
                for ti in 0..g.len() {
                    let want = b.f_value(a, g.node(ti) - g.node(si), g.node(ti));
                    assert!((k.get(a, si, ti) - want).abs() < KERNEL_TOL_C * g.h());
                }
            }
        }
    }

    #[test]
    fn adjoint_reverses_products() {
        let b = suite();
        let (f, g) = (b.f(), b.g());
        let lhs = f.convolve(&g).unwrap().involution();
        let rhs = g.involution().convolve(&f.involution()).unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() < KERNEL_TOL_C * b.lower.grid.h());
    }

    #[test]
    fn dyadic_embedding_blocks() {
        let b = suite();
        let e = &b.embedding;
        assert_eq!(e.times, vec![2.0]);
        let offs: Vec<f64> = e.floors[0].iter().map(|f| f.offset).collect();
        assert_eq!(offs, vec![0.0, 1.0]);
        let up = e
            .embed_kernels(&pi_n(&b.f(), &b.lower).unwrap(), &b.lower, &b.upper)
            .unwrap();
        let g = b.upper.grid;
        let m = g.len();
        let mut seen = [false; 2];
        for si in 0..m {
            for ti in 0..m {
                if up.get(0, si, ti) != 0.0 {
                    let (s, t) = (g.node(si), g.node(ti));
                    assert_eq!(s < 0.5, t < 0.5);
                    seen[(s >= 0.5) as usize] = true;
                }
            }
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn isometries() {
        let b = suite();
        let g = b.lower.grid;
        let h: Vec<f64> = g.nodes().map(|u| bump(u, 0.2, 0.8)).collect();
        let (adj, norm, orth) = isometry_defects(&b.embedding, &b.lower, g, &h);
        assert!(adj <= KERNEL_TOL_C * g.h() && norm <= KERNEL_TOL_C * g.h());
        assert_eq!(orth, 0.0);
    }

    #[test]
    fn mask_violation_is_an_error() {
        let b = suite();
        let bad = DiscreteCrossedElement::from_fn(&b.lower, 0.5, |_, s, u| {
            if s > 0.0 && u < 0.1 {
                1.0
            } else {
                0.0
            }
        });
        assert!(matches!(
            pi_n(&bad, &b.lower),
            Err(crate::error::Error::MaskViolation { .. })
        ));
    }

    #[test]
    fn grids_must_match() {
        let a = suite();
        let b = BumpSuite::mapping_torus(64, 0).unwrap();
        assert!(matches!(
            a.f().convolve(&b.f()),
            Err(crate::error::Error::GridMismatch(_))
        ));
    }

    #[test]
    fn suite_converges() {
        let r = convergence_study(32, 0).unwrap();
        assert!(r.all(), "{r:?}");
    }
}
