use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::grid::FiberGrid;
use crate::cantor::{ClopenSet, InvariantMeasure, Window};
use crate::error::{Error, Result};
use crate::rokhlin::{CantorMap, InducedSystem, DEFAULT_MAX_STEPS};
use crate::suspension::Suspension;

/// A central slice cut into atoms on which its real return time `t_y` is
/// constant, with the fiber grid used over every atom.
#[derive(Clone, Debug)]
pub struct KernelStage {
    pub n: usize,
    pub slice: ClopenSet,
    pub atoms: Vec<ClopenSet>,
    pub exact_times: Vec<BigRational>,
    pub times: Vec<f64>,
    /// `μ(atom)` for the base measure.
    pub weights: Vec<f64>,
    pub grid: FiberGrid,
    induced: InducedSystem,
}

impl KernelStage {
    /// Atoms of `slice` on `window` (hulled with the slice window); fails if
    /// the return time is not constant on them.
    pub fn with_window(
        susp: &Suspension,
        n: usize,
        slice: &ClopenSet,
        window: Window,
        grid: FiberGrid,
    ) -> Result<Self> {
        let sys = susp.system();
        let induced = InducedSystem::new(sys, slice, DEFAULT_MAX_STEPS)?;
        let rt = susp.roof().return_time(&induced)?;
        let cut = slice.refine(window.hull(&slice.window()))?;
        let mu = InvariantMeasure::new(sys);
        let mut exact_times = Vec::new();
        let mut weights = Vec::new();
        let atoms = cut.atoms();
        for a in &atoms {
            let v = rt.restrict(a)?.constant_value()?.ok_or_else(|| {
                Error::Invalid("return time is not constant on a stage atom".into())
            })?;
            exact_times.push(v);
            weights.push(mu.measure_f64(a)?);
        }
        let times = exact_times.iter().map(|t| t.to_f64().unwrap()).collect();
        Ok(KernelStage {
            n,
            slice: slice.clone(),
            atoms,
            exact_times,
            times,
            weights,
            grid,
            induced,
        })
    }

    /// The coarsest atoms carrying a constant return time.
    pub fn new(susp: &Suspension, n: usize, slice: &ClopenSet, grid: FiberGrid) -> Result<Self> {
        let induced = InducedSystem::new(susp.system(), slice, DEFAULT_MAX_STEPS)?;
        let w = susp.roof().return_time(&induced)?.window();
        Self::with_window(susp, n, slice, w, grid)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.times.iter().cloned().fold(0.0, f64::max)
    }

    /// `μ'(X) = Σ μ(atom)·t_atom`.
    pub fn total_mass(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.times)
            .map(|(m, t)| m * t)
            .sum()
    }

    pub fn induced(&self) -> &InducedSystem {
        &self.induced
    }

    pub fn atom_of(&self, set: &ClopenSet) -> Result<Option<usize>> {
        for (i, a) in self.atoms.iter().enumerate() {
            if set.is_subset(a)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    pub(crate) fn forward(&self, set: &ClopenSet) -> Result<ClopenSet> {
        self.induced.forward(set)
    }
}
