use super::grid::{FiberGrid, SigmaGrid};
use super::stage::KernelStage;
use crate::error::{Error, Result};

/// Largest value tolerated on a masked grid point.
pub const MASK_TOL: f64 = 1e-12;

/// Whether `(σ, θ)` over an atom with return time `t` lies where elements of
/// the stage must vanish: the flow segment of length `σ` from the point
/// crosses the slice.
pub fn masked(sigma: f64, theta: f64, t: f64) -> bool {
    if sigma >= 0.0 {
        t * theta <= sigma
    } else {
        t * (1.0 - theta) <= -sigma
    }
}

/// `a(σ)(atom, θ)` on a σ-grid times the interior fiber nodes.
#[derive(Clone, Debug)]
pub struct DiscreteCrossedElement {
    pub stage: usize,
    pub sigma: SigmaGrid,
    pub grid: FiberGrid,
    pub times: Vec<f64>,
    /// `values[atom][j * m + i]` at `σ_j`, fiber node `i`.
    pub values: Vec<Vec<f64>>,
}

impl DiscreteCrossedElement {
    pub fn zero(stage: &KernelStage, bound: f64) -> Self {
        let sigma = SigmaGrid::covering(stage.t_max() / stage.grid.n as f64, bound);
        let m = stage.grid.len();
        DiscreteCrossedElement {
            stage: stage.n,
            sigma,
            grid: stage.grid,
            times: stage.times.clone(),
            values: vec![vec![0.0; sigma.count * m]; stage.len()],
        }
    }

    /// Samples `f(atom, σ, θ)` on the grid, as is.
    pub fn from_fn(stage: &KernelStage, bound: f64, f: impl Fn(usize, f64, f64) -> f64) -> Self {
        let mut e = Self::zero(stage, bound);
        let m = e.grid.len();
        for a in 0..e.values.len() {
            for j in 0..e.sigma.count {
                let s = e.sigma.node(j);
                for i in 0..m {
                    e.values[a][j * m + i] = f(a, s, e.grid.node(i));
                }
            }
        }
        e
    }

    fn like(&self, sigma: SigmaGrid) -> Self {
        let m = self.grid.len();
        DiscreteCrossedElement {
            stage: self.stage,
            sigma,
            grid: self.grid,
            times: self.times.clone(),
            values: vec![vec![0.0; sigma.count * m]; self.times.len()],
        }
    }

    pub fn get(&self, a: usize, j: usize, i: usize) -> f64 {
        self.values[a][j * self.grid.len() + i]
    }

    /// Bilinear value at `(σ, θ)`, zero off the grid and at the fiber ends.
    pub fn interp(&self, a: usize, sigma: f64, theta: f64) -> f64 {
        let Some((j, fr)) = self.sigma.stencil(sigma) else {
            return 0.0;
        };
        let m = self.grid.len();
        let row = &self.values[a];
        let lo = self.grid.interp(&row[j * m..(j + 1) * m], theta);
        let hi = self.grid.interp(&row[(j + 1) * m..(j + 2) * m], theta);
        (1.0 - fr) * lo + fr * hi
    }

    /// First masked grid point carrying a value above [`MASK_TOL`].
    pub fn mask_violation(&self) -> Option<Error> {
        let m = self.grid.len();
        for (a, t) in self.times.iter().enumerate() {
            for j in 0..self.sigma.count {
                let s = self.sigma.node(j);
                for i in 0..m {
                    let u = self.grid.node(i);
                    if masked(s, u, *t) && self.get(a, j, i).abs() > MASK_TOL {
                        return Some(Error::MaskViolation { atom: a, s, u });
                    }
                }
            }
        }
        None
    }

    /// Exact zeros on every masked grid point.
    pub fn satisfies_mask(&self) -> bool {
        let m = self.grid.len();
        self.times.iter().enumerate().all(|(a, t)| {
            (0..self.sigma.count).all(|j| {
                let s = self.sigma.node(j);
                (0..m).all(|i| !masked(s, self.grid.node(i), *t) || self.get(a, j, i) == 0.0)
            })
        })
    }

    /// Sets masked grid points to zero.
    pub fn project_mask(&mut self) {
        let m = self.grid.len();
        for (a, t) in self.times.clone().iter().enumerate() {
            for j in 0..self.sigma.count {
                let s = self.sigma.node(j);
                for i in 0..m {
                    if masked(s, self.grid.node(i), *t) {
                        self.values[a][j * m + i] = 0.0;
                    }
                }
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.stage != other.stage
            || self.grid != other.grid
            || self.times != other.times
            || !self.sigma.same_lattice(&other.sigma)
        {
            return Err(Error::GridMismatch(format!(
                "stage {} on N = {} against stage {} on N = {}",
                self.stage, self.grid.n, other.stage, other.grid.n
            )));
        }
        Ok(())
    }

    /// `(f★g)(σ)(x) = ∫ f(ρ)(x)·g(σ−ρ)(φ_{−ρ}x) dρ`, trapezoid over the
    /// σ-nodes of `f`.
    pub fn convolve(&self, g: &Self) -> Result<Self> {
        self.check_compatible(g)?;
        let bound = self.sigma.bound() + g.sigma.bound();
        let mut out = self.like(SigmaGrid::covering(self.sigma.h, bound));
        let m = self.grid.len();
        let h = self.sigma.h;
        for (a, t) in self.times.iter().enumerate() {
            for jo in 0..out.sigma.count {
                let s = out.sigma.node(jo);
                for i in 0..m {
                    let u = self.grid.node(i);
                    if masked(s, u, *t) {
                        continue;
                    }
                    let mut acc = 0.0;
                    for jf in 0..self.sigma.count {
                        let fv = self.get(a, jf, i);
                        if fv == 0.0 {
                            continue;
                        }
                        let r = self.sigma.node(jf);
                        acc += fv * g.interp(a, s - r, u - r / t);
                    }
                    out.values[a][jo * m + i] = h * acc;
                }
            }
        }
        Ok(out)
    }

    /// `f*(σ)(x) = f(−σ)(φ_{−σ}x)` (values are real).
    pub fn involution(&self) -> Self {
        let mut out = self.like(SigmaGrid::covering(self.sigma.h, self.sigma.bound()));
        let m = self.grid.len();
        for (a, t) in self.times.iter().enumerate() {
            for j in 0..out.sigma.count {
                let s = out.sigma.node(j);
                for i in 0..m {
                    let u = self.grid.node(i);
                    if !masked(s, u, *t) {
                        out.values[a][j * m + i] = self.interp(a, -s, u - s / t);
                    }
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let bound = self.sigma.bound().max(other.sigma.bound());
        let mut out = self.like(SigmaGrid::covering(self.sigma.h, bound));
        let m = self.grid.len();
        for a in 0..self.times.len() {
            for j in 0..out.sigma.count {
                let s = out.sigma.node(j);
                for i in 0..m {
                    let u = self.grid.node(i);
                    out.values[a][j * m + i] = self.interp(a, s, u) - other.interp(a, s, u);
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `τ_μ(f) = ∫ f(0) dμ` for the normalized measure `μ|_S × λ / μ'(X)`.
    pub fn trace(&self, stage: &KernelStage) -> f64 {
        let m = self.grid.len();
        let mut acc = 0.0;
        for (a, t) in self.times.iter().enumerate() {
            let line: f64 = (0..m)
                .map(|i| self.interp(a, 0.0, self.grid.node(i)))
                .sum::<f64>()
                * self.grid.weight();
            acc += stage.weights[a] * t * line;
        }
        acc / stage.total_mass()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_shape() {
        assert!(masked(0.0, 0.0, 1.0));
        assert!(masked(0.5, 0.4, 1.0));
        assert!(!masked(0.3, 0.4, 1.0));
        assert!(masked(-0.3, 0.8, 1.0));
        assert!(!masked(-0.3, 0.6, 1.0));
        assert!(!masked(0.3, 0.2, 2.0));
    }
}
