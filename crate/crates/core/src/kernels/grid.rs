use serde::Serialize;

/// Interior nodes `i/N`, `i = 1..N`, of `[0, 1]` with trapezoid weights `1/N`
/// (the end nodes carry zeros).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FiberGrid {
    pub n: usize,
}

impl FiberGrid {
    pub fn new(n: usize) -> Self {
        assert!(n >= 4, "fiber grid needs at least 4 intervals");
        FiberGrid { n }
    }

    /// Number of interior nodes.
    pub fn len(&self) -> usize {
        self.n - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        (i + 1) as f64 / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    pub fn weight(&self) -> f64 {
        self.h()
    }

    /// Interpolation stencil at `u`: nodes and weights, with the zero end
    /// values dropped. Empty outside `(0, 1)`.
    pub fn stencil(&self, u: f64) -> [(usize, f64); 2] {
        const NONE: [(usize, f64); 2] = [(usize::MAX, 0.0), (usize::MAX, 0.0)];
        if !(u > 0.0 && u < 1.0) {
            return NONE;
        }
        let p = u * self.n as f64;
        let k = (p.floor() as usize).min(self.n - 1);
        let fr = p - k as f64;
        // node k is interior index k - 1
        let lo = if k >= 1 {
            (k - 1, 1.0 - fr)
        } else {
            (usize::MAX, 0.0)
        };
        let hi = if k + 1 < self.n {
            (k, fr)
        } else {
            (usize::MAX, 0.0)
        };
        [lo, hi]
    }

    pub fn interp(&self, vals: &[f64], u: f64) -> f64 {
        self.stencil(u)
            .iter()
            .filter(|(i, _)| *i != usize::MAX)
            .map(|(i, w)| w * vals[*i])
            .sum()
    }
}

/// `σ_j = (j0 + j + ω)·h`, `j = 0..count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SigmaGrid {
    pub h: f64,
    pub omega: f64,
    pub j0: i64,
    pub count: usize,
}

/// Offset of the σ-grid against the fiber grid, so that no identity is
/// trivially exact on the nodes.
pub const SIGMA_OFFSET: f64 = 1.0 / 3.0;

impl SigmaGrid {
    /// Covers `[-bound, bound]` with one spare node on each side.
    pub fn covering(h: f64, bound: f64) -> Self {
        let j0 = (-bound / h - SIGMA_OFFSET).floor() as i64 - 1;
        let j1 = (bound / h - SIGMA_OFFSET).ceil() as i64 + 1;
        SigmaGrid {
            h,
            omega: SIGMA_OFFSET,
            j0,
            count: (j1 - j0 + 1) as usize,
        }
    }

    pub fn node(&self, j: usize) -> f64 {
        (self.j0 as f64 + j as f64 + self.omega) * self.h
    }

    pub fn bound(&self) -> f64 {
        self.node(0).abs().max(self.node(self.count - 1).abs())
    }

    /// Linear stencil at `s`; zero outside the grid.
    pub fn stencil(&self, s: f64) -> Option<(usize, f64)> {
        let p = s / self.h - self.omega - self.j0 as f64;
        if p < 0.0 || p > (self.count - 1) as f64 {
            return None;
        }
        let j = (p.floor() as usize).min(self.count - 2);
        Some((j, p - j as f64))
    }

    pub fn same_lattice(&self, other: &SigmaGrid) -> bool {
        self.h == other.h && self.omega == other.omega
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_below_one() {
        let g = FiberGrid::new(64);
        let s: f64 = (0..g.len()).map(|_| g.weight()).sum();
        assert!((s - (1.0 - 1.0 / 64.0)).abs() < 1e-15);
    }

    #[test]
    fn interpolation_reproduces_lines() {
        let g = FiberGrid::new(10);
        let v: Vec<f64> = g.nodes().map(|u| u * (1.0 - u)).collect();
        assert!((g.interp(&v, 0.35) - 0.5 * (0.3 * 0.7 + 0.4 * 0.6)).abs() < 1e-14);
        assert_eq!(g.interp(&v, 0.0), 0.0);
        assert!((g.interp(&v, 0.05) - 0.5 * 0.09).abs() < 1e-14);
        assert_eq!(g.interp(&v, 1.2), 0.0);
    }

    #[test]
    fn sigma_grid_covers() {
        let s = SigmaGrid::covering(0.1, 1.0);
        assert!(s.node(0) < -1.0 && s.node(s.count - 1) > 1.0);
        let (j, fr) = s.stencil(0.0).unwrap();
        assert!((s.node(j) + fr * s.h).abs() < 1e-12);
        assert!(s.stencil(5.0).is_none());
    }
}
