use super::element::{masked, DiscreteCrossedElement};
use super::grid::{FiberGrid, SigmaGrid};
use super::stage::KernelStage;
use crate::error::{Error, Result};

/// Per-atom kernels `K(y)(s, t)` on the interior fiber nodes.
#[derive(Clone, Debug)]
pub struct KernelField {
    pub stage: usize,
    pub grid: FiberGrid,
    /// `mats[atom][s * m + t]`.
    pub mats: Vec<Vec<f64>>,
}

impl KernelField {
    pub fn zero(stage: usize, grid: FiberGrid, atoms: usize) -> Self {
        let m = grid.len();
        KernelField {
            stage,
            grid,
            mats: vec![vec![0.0; m * m]; atoms],
        }
    }

    pub fn from_fn(stage: &KernelStage, k: impl Fn(usize, f64, f64) -> f64) -> Self {
        let g = stage.grid;
        let m = g.len();
        let mut out = Self::zero(stage.n, g, stage.len());
        for (a, mat) in out.mats.iter_mut().enumerate() {
            for si in 0..m {
                for ti in 0..m {
                    mat[si * m + ti] = k(a, g.node(si), g.node(ti));
                }
            }
        }
        out
    }

    pub fn get(&self, a: usize, s: usize, t: usize) -> f64 {
        self.mats[a][s * self.grid.len() + t]
    }

    /// Bilinear value at `(s, t)`, zero outside the open square.
    pub fn interp(&self, a: usize, s: f64, t: f64) -> f64 {
        let m = self.grid.len();
        let mut acc = 0.0;
        for (si, ws) in self.grid.stencil(s) {
            if si == usize::MAX || ws == 0.0 {
                continue;
            }
            for (ti, wt) in self.grid.stencil(t) {
                if ti != usize::MAX {
                    acc += ws * wt * self.mats[a][si * m + ti];
                }
            }
        }
        acc
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.stage != other.stage
            || self.grid != other.grid
            || self.mats.len() != other.mats.len()
        {
            return Err(Error::GridMismatch(format!(
                "field of stage {} on N = {} against stage {} on N = {}",
                self.stage, self.grid.n, other.stage, other.grid.n
            )));
        }
        Ok(())
    }

    /// `(K L)(s, t) = ∫ K(r, t) L(s, r) dr`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let m = self.grid.len();
        let w = self.grid.weight();
        let mut out = Self::zero(self.stage, self.grid, self.mats.len());
        for a in 0..self.mats.len() {
            let (k, l) = (&self.mats[a], &other.mats[a]);
            for s in 0..m {
                for r in 0..m {
                    let lv = l[s * m + r];
                    if lv == 0.0 {
                        continue;
                    }
                    let row = &k[r * m..(r + 1) * m];
                    let dst = &mut out.mats[a][s * m..(s + 1) * m];
                    for (d, kv) in dst.iter_mut().zip(row) {
                        *d += w * kv * lv;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `K'(s, t) = K(t, s)`.
    pub fn transpose(&self) -> Self {
        let m = self.grid.len();
        let mut out = self.clone();
        for (a, mat) in out.mats.iter_mut().enumerate() {
            for s in 0..m {
                for t in 0..m {
                    mat[s * m + t] = self.mats[a][t * m + s];
                }
            }
        }
        out
    }

    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        self.check(other)?;
        Ok(self
            .mats
            .iter()
            .flatten()
            .zip(other.mats.iter().flatten())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
    }

    pub fn max_abs(&self) -> f64 {
        self.mats.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entry on the first and last rows and columns.
    pub fn boundary_max(&self) -> f64 {
        let m = self.grid.len();
        let mut out: f64 = 0.0;
        for mat in &self.mats {
            for i in 0..m {
                for (s, t) in [(0, i), (m - 1, i), (i, 0), (i, m - 1)] {
                    out = out.max(mat[s * m + t].abs());
                }
            }
        }
        out
    }

    /// `∫ Tr K dμ|_S / μ'(X)`.
    pub fn trace(&self, stage: &KernelStage) -> f64 {
        let m = self.grid.len();
        let w = self.grid.weight();
        let mut acc = 0.0;
        for (a, mat) in self.mats.iter().enumerate() {
            let tr: f64 = (0..m).map(|i| mat[i * m + i]).sum::<f64>() * w;
            acc += stage.weights[a] * tr;
        }
        acc / stage.total_mass()
    }
}

/// `K(y, s, t) = t_y·f(t_y(t − s))(φ_{t_y t}(y))`.
pub fn pi_n(f: &DiscreteCrossedElement, stage: &KernelStage) -> Result<KernelField> {
    if f.stage != stage.n || f.grid != stage.grid || f.times != stage.times {
        return Err(Error::GridMismatch(format!(
            "element of stage {} against stage {}",
            f.stage, stage.n
        )));
    }
    if let Some(e) = f.mask_violation() {
        return Err(e);
    }
    let g = stage.grid;
    let m = g.len();
    let mut out = KernelField::zero(stage.n, g, stage.len());
    for (a, t) in stage.times.iter().enumerate() {
        let sig = &f.sigma;
        for si in 0..m {
            let s = g.node(si);
            for ti in 0..m {
                let u = g.node(ti);
                let v = match sig.stencil(t * (u - s)) {
                    Some((j, fr)) => (1.0 - fr) * f.get(a, j, ti) + fr * f.get(a, j + 1, ti),
                    None => 0.0,
                };
                out.mats[a][si * m + ti] = t * v;
            }
        }
    }
    Ok(out)
}

/// `f_K(σ)(y, θ) = K(y, θ − σ/t_y, θ)/t_y`.
pub fn pi_n_inverse(k: &KernelField, stage: &KernelStage) -> Result<DiscreteCrossedElement> {
    if k.stage != stage.n || k.grid != stage.grid || k.mats.len() != stage.len() {
        return Err(Error::GridMismatch(format!(
            "field of stage {} against stage {}",
            k.stage, stage.n
        )));
    }
    let mut out = DiscreteCrossedElement::zero(stage, stage.t_max());
    let g = stage.grid;
    let m = g.len();
    let sig: SigmaGrid = out.sigma;
    for (a, t) in stage.times.iter().enumerate() {
        for j in 0..sig.count {
            let s = sig.node(j);
            for i in 0..m {
                let u = g.node(i);
                if masked(s, u, *t) {
                    continue;
                }
                // s-interpolation only; θ sits on a node
                let mut v = 0.0;
                for (si, w) in g.stencil(u - s / t) {
                    if si != usize::MAX {
                        v += w * k.get(a, si, i);
                    }
                }
                out.values[a][j * m + i] = v / t;
            }
        }
    }
    Ok(out)
}
