use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::field::KernelField;
use super::grid::FiberGrid;
use super::stage::KernelStage;
use crate::cantor::{ClopenSet, Window};
use crate::error::{Error, Result};
use crate::suspension::Suspension;

/// Floor `k` of the tower over an upper atom: it starts at real time
/// `offset = τ^{(k)}` and sits in lower atom `atom`.
#[derive(Clone, Debug, PartialEq)]
pub struct Floor {
    pub offset: f64,
    pub atom: usize,
}

/// Tower data from stage `n` to stage `n + 1`.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub lower: usize,
    pub upper: usize,
    pub floors: Vec<Vec<Floor>>,
    pub times: Vec<f64>,
}

impl Embedding {
    /// Follows each upper atom through the lower slice until it returns;
    /// every visited floor must sit in a single lower atom.
    pub fn new(lower: &KernelStage, upper: &KernelStage) -> Result<Self> {
        if !upper.slice.is_subset(&lower.slice)? {
            return Err(Error::Invalid(
                "upper slice is not inside the lower slice".into(),
            ));
        }
        let mut floors = Vec::new();
        for (a, atom) in upper.atoms.iter().enumerate() {
            let mut cur = atom.clone();
            let mut acc = BigRational::zero();
            let mut row = Vec::new();
            loop {
                let i = lower.atom_of(&cur)?.ok_or_else(|| {
                    Error::Invalid(format!(
                        "floor {} over upper atom {a} straddles lower atoms",
                        row.len()
                    ))
                })?;
                row.push(Floor {
                    offset: acc.to_f64().unwrap(),
                    atom: i,
                });
                acc += &lower.exact_times[i];
                cur = lower.forward(&cur)?;
                if cur.is_subset(&upper.slice)? {
                    break;
                }
            }
            if acc != upper.exact_times[a] {
                return Err(Error::Invalid(format!(
                    "floor times over upper atom {a} do not add up to its return time"
                )));
            }
            floors.push(row);
        }
        Ok(Embedding {
            lower: lower.n,
            upper: upper.n,
            floors,
            times: upper.times.clone(),
        })
    }

    /// The upper stage on `slice` with atoms refined until the floors are
    /// pure, together with the tower data.
    pub fn refine_upper(
        susp: &Suspension,
        lower: &KernelStage,
        slice: &ClopenSet,
        grid: FiberGrid,
    ) -> Result<(KernelStage, Self)> {
        let base = KernelStage::new(susp, lower.n + 1, slice, grid)?;
        let w0 = base.atoms[0].window();
        for extra in 0..=32usize {
            let w = if susp.system().is_odometer() {
                Window::new(0, w0.end() as usize + extra)
            } else {
                Window::new(w0.start - extra as i64, w0.len + 2 * extra)
            };
            let up = KernelStage::with_window(susp, lower.n + 1, slice, w, grid)?;
            match Self::new(lower, &up) {
                Ok(e) => return Ok((up, e)),
                Err(Error::Invalid(m)) if m.contains("straddles") => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::Invalid(
            "missing tower data: no refinement of the upper slice separates the floors".into(),
        ))
    }

    /// Floor containing real time `x` over upper atom `a`.
    pub fn floor_at(&self, a: usize, x: f64) -> usize {
        let row = &self.floors[a];
        row.iter()
            .rposition(|f| f.offset <= x)
            .unwrap_or(0)
            .min(row.len() - 1)
    }

    /// Block placement `K'(s', t') = (t'/t_k)·K_k(φ_k(s'), φ_k(t'))` when
    /// `s'` and `t'` share floor `k`, zero otherwise, where
    /// `φ_k(u) = (t' u − τ^{(k)})/t_k`.
    pub fn embed_kernels(
        &self,
        k: &KernelField,
        lower: &KernelStage,
        upper: &KernelStage,
    ) -> Result<KernelField> {
        if k.stage != self.lower || upper.n != self.upper || k.mats.len() != lower.len() {
            return Err(Error::Invalid(
                "missing tower data for this pair of stages".into(),
            ));
        }
        let g = upper.grid;
        let m = g.len();
        let mut out = KernelField::zero(upper.n, g, upper.len());
        for (a, tp) in self.times.iter().enumerate() {
            let fl: Vec<usize> = (0..m).map(|i| self.floor_at(a, tp * g.node(i))).collect();
            for si in 0..m {
                for ti in 0..m {
                    if fl[si] != fl[ti] {
                        continue;
                    }
                    let f = &self.floors[a][fl[si]];
                    let tk = lower.times[f.atom];
                    let s = (tp * g.node(si) - f.offset) / tk;
                    let t = (tp * g.node(ti) - f.offset) / tk;
                    out.mats[a][si * m + ti] = tp / tk * k.interp(f.atom, s, t);
                }
            }
        }
        Ok(out)
    }

    /// `U^{(a,k)}` as an `m × m` matrix on the grid:
    /// `(U h)(t') = √(t'/t_k)·h(φ_k(t'))` on floor `k`.
    pub fn isometry(&self, a: usize, k: usize, lower: &KernelStage, grid: FiberGrid) -> Vec<f64> {
        let m = grid.len();
        let tp = self.times[a];
        let f = &self.floors[a][k];
        let tk = lower.times[f.atom];
        let c = (tp / tk).sqrt();
        let mut u = vec![0.0; m * m];
        for j in 0..m {
            if self.floor_at(a, tp * grid.node(j)) != k {
                continue;
            }
            for (i, w) in grid.stencil((tp * grid.node(j) - f.offset) / tk) {
                if i != usize::MAX {
                    u[j * m + i] += c * w;
                }
            }
        }
        u
    }
}

/// Isometry defects on a smooth test vector `h`: `max |U*U h − h|` with
/// `U*g(s) = √(t_k/t')·g(φ_k^{-1}(s))`, the norm defect
/// `|‖U h‖² − ‖h‖²|`, and `max |⟨U_j h, U_k h⟩|` over distinct floors.
pub fn isometry_defects(
    e: &Embedding,
    lower: &KernelStage,
    grid: FiberGrid,
    h: &[f64],
) -> (f64, f64, f64) {
    let m = grid.len();
    let w = grid.weight();
    let norm2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>() * w;
    let mut iso: f64 = 0.0;
    let mut norm: f64 = 0.0;
    let mut orth: f64 = 0.0;
    for a in 0..e.floors.len() {
        let tp = e.times[a];
        let mut images = Vec::new();
        for (k, f) in e.floors[a].iter().enumerate() {
            let u = e.isometry(a, k, lower, grid);
            let img: Vec<f64> = (0..m)
                .map(|j| (0..m).map(|i| u[j * m + i] * h[i]).sum())
                .collect();
            let tk = lower.times[f.atom];
            let c = (tk / tp).sqrt();
            for (i, hv) in h.iter().enumerate() {
                let back = c * grid.interp(&img, (tk * grid.node(i) + f.offset) / tp);
                iso = iso.max((back - hv).abs());
            }
            norm = norm.max((norm2(&img) - norm2(h)).abs());
            images.push(img);
        }
        for k in 0..images.len() {
            for l in k + 1..images.len() {
                let ip: f64 = images[k]
                    .iter()
                    .zip(&images[l])
                    .map(|(x, y)| x * y)
                    .sum::<f64>()
                    * w;
                orth = orth.max(ip.abs());
            }
        }
    }
    (iso, norm, orth)
}
