use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::lattice::{Lattice, SparseVec};
use super::quotient::RelationQuotient;
use super::snf::{CokernelClass, IntMatrix};
use crate::cantor::{
    ClopenSet, IntFunction, InvariantMeasure, SymbolicSystem, Weight, Window, Word,
};
use crate::error::{Error, Result};

/// A finite-depth model of `K_0(C(S) ⋊ ℤ) = coker(id − Φ̂_*)`: integer
/// functions on the atoms of an ambient window modulo the relations
/// `χ_a − χ_{Φ a}` for the atoms `a` of the relation window.
#[derive(Clone, Debug)]
pub struct CrossedK0 {
    sys: SymbolicSystem,
    window: Window,
    ambient: Window,
    atoms: Vec<Word>,
    index: HashMap<Word, usize>,
    relations: Vec<Vec<(usize, i64)>>,
    quotient: RelationQuotient,
    weights: Vec<Weight>,
}

#[derive(Clone, Debug, Serialize)]
pub struct K0Summary {
    pub window_start: i64,
    pub window_len: usize,
    pub ambient_rank: usize,
    pub relation_count: usize,
    pub cokernel_rank: usize,
    pub torsion: Vec<String>,
    /// Invariant factors padded to the ambient rank, run-length encoded as
    /// `(factor, multiplicity)`.
    pub invariant_factors: Vec<(String, usize)>,
}

pub(crate) fn run_length(v: &[BigInt]) -> Vec<(String, usize)> {
    let mut out: Vec<(String, usize)> = Vec::new();
    for x in v {
        let s = x.to_string();
        match out.last_mut() {
            Some((t, c)) if *t == s => *c += 1,
            _ => out.push((s, 1)),
        }
    }
    out
}

impl CrossedK0 {
    /// The stage whose relations come from the atoms of `window`.
    pub fn new(sys: &SymbolicSystem, window: Window, mu: &InvariantMeasure) -> Result<Self> {
        sys.check_window(window)?;
        let ambient = if sys.is_odometer() {
            window
        } else {
            window.hull(&window.shifted(-1))
        };
        let atoms: Vec<Word> = sys.language(ambient)?.as_ref().clone();
        let index: HashMap<Word, usize> = atoms
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let mut relations = Vec::new();
        for a in sys.language(window)?.iter() {
            let set = ClopenSet::from_words(sys, window, vec![a.clone()])?;
            let mut col: Vec<(usize, i64)> = Vec::new();
            for w in set.refine(ambient)?.words() {
                col.push((index[w], 1));
            }
            for w in set.image(1)?.refine(ambient)?.words() {
                col.push((index[w], -1));
            }
            relations.push(col);
        }
        let quotient = RelationQuotient::compute(atoms.len(), &relations);
        let weights = atoms
            .iter()
            .map(|w| mu.measure(&ClopenSet::from_words(sys, ambient, vec![w.clone()])?))
            .collect::<Result<Vec<_>>>()?;
        Ok(CrossedK0 {
            sys: sys.clone(),
            window,
            ambient,
            atoms,
            index,
            relations,
            quotient,
            weights,
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn ambient(&self) -> Window {
        self.ambient
    }

    pub fn atoms(&self) -> &[Word] {
        &self.atoms
    }

    /// Relation columns as `(atom, coefficient)` entries.
    pub fn relations(&self) -> &[Vec<(usize, i64)>] {
        &self.relations
    }

    /// The relation matrix, dense.
    pub fn relation_matrix(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.atoms.len(), self.relations.len());
        for (j, c) in self.relations.iter().enumerate() {
            for &(i, x) in c {
                let v = m.get(i, j) + x;
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn quotient(&self) -> &RelationQuotient {
        &self.quotient
    }

    /// The quotient map annihilates every relation and its reduced Smith
    /// form checks out.
    pub fn verify(&self) -> bool {
        self.quotient.verify(&self.relations)
    }

    pub fn cokernel_rank(&self) -> usize {
        self.quotient.cokernel_rank()
    }

    pub fn torsion(&self) -> Vec<BigInt> {
        self.quotient.torsion()
    }

    /// Invariant factors of the relation matrix padded to the ambient rank.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.quotient.invariant_factors()
    }

    pub fn summary(&self) -> K0Summary {
        K0Summary {
            window_start: self.window.start,
            window_len: self.window.len,
            ambient_rank: self.atoms.len(),
            relation_count: self.relations.len(),
            cokernel_rank: self.cokernel_rank(),
            torsion: self.torsion().iter().map(|t| t.to_string()).collect(),
            invariant_factors: run_length(&self.invariant_factors()),
        }
    }

    fn values(&self, f: &IntFunction) -> Result<Vec<(usize, BigInt)>> {
        let g = f.extend_by_zero(&ClopenSet::full(&self.sys))?.simplify()?;
        if !self.ambient.contains(&g.window()) {
            return Err(Error::Invalid(format!(
                "function window {:?} exceeds the stage window {:?}",
                g.window(),
                self.ambient
            )));
        }
        let g = g.refine(self.ambient)?;
        Ok(g.values()
            .iter()
            .filter(|(_, x)| **x != 0)
            .map(|(w, x)| (self.index[w], BigInt::from(*x)))
            .collect())
    }

    /// Coordinates of the zero extension of `f` on the ambient atoms.
    pub fn coordinates(&self, f: &IntFunction) -> Result<Vec<BigInt>> {
        let mut v = vec![BigInt::zero(); self.atoms.len()];
        for (i, x) in self.values(f)? {
            v[i] = x;
        }
        Ok(v)
    }

    /// `γ̃` in the normal-form coordinates of the cokernel.
    pub fn project(&self, f: &IntFunction) -> Result<Vec<BigInt>> {
        let vals = self.values(f)?;
        Ok(self.quotient.project(vals.iter().map(|(i, x)| (*i, x))))
    }

    /// `γ̃` of an indicator, without building the function.
    pub fn project_set(&self, set: &ClopenSet) -> Result<Vec<BigInt>> {
        let s = set.refine(self.ambient)?;
        let one = BigInt::one();
        Ok(self
            .quotient
            .project(s.words().iter().map(|w| (self.index[w], &one))))
    }

    /// `γ̃`: the class of the zero extension of `f`.
    pub fn class(&self, f: &IntFunction) -> Result<CokernelClass> {
        Ok(self.quotient.class_of(&self.project(f)?))
    }

    pub fn is_zero(&self, f: &IntFunction) -> Result<bool> {
        Ok(self.quotient.vanishes(&self.project(f)?))
    }

    pub fn same_class(&self, f: &IntFunction, g: &IntFunction) -> Result<bool> {
        let d: Vec<BigInt> = self
            .project(f)?
            .iter()
            .zip(self.project(g)?)
            .map(|(x, y)| x - y)
            .collect();
        Ok(self.quotient.vanishes(&d))
    }

    /// Whether ambient coordinates lie in the span of the relations.
    pub fn in_image(&self, v: &[BigInt]) -> bool {
        self.quotient.in_image(v)
    }

    /// The trace `∫ f dμ` of a coordinate vector.
    pub fn trace_of(&self, v: &[BigInt]) -> Weight {
        self.trace_entries(
            v.iter()
                .enumerate()
                .map(|(i, x)| (i, x.to_i64().expect("coefficient fits in i64"))),
        )
    }

    fn trace_entries(&self, entries: impl IntoIterator<Item = (usize, i64)>) -> Weight {
        let mut t = if self.sys.is_odometer() {
            Weight::zero_exact()
        } else {
            Weight::Approx {
                value: 0.0,
                err: 0.0,
            }
        };
        for (i, x) in entries {
            if x != 0 {
                t = t.add(&self.weights[i].scale(x));
            }
        }
        t
    }

    pub fn trace(&self, f: &IntFunction) -> Result<Weight> {
        let vals = self.values(f)?;
        Ok(self.trace_entries(
            vals.iter()
                .map(|(i, x)| (*i, x.to_i64().expect("coefficient fits in i64"))),
        ))
    }

    /// Whether the trace vanishes on every relation.
    pub fn trace_kills_relations(&self) -> bool {
        self.relations
            .iter()
            .all(|c| match self.trace_entries(c.iter().copied()) {
                Weight::Exact(q) => q.is_zero(),
                Weight::Approx { value, .. } => value.abs() <= 4.0 * crate::cantor::EPS_MU,
            })
    }

    /// Image of a coordinate vector under refinement into a finer stage.
    pub fn refine_vector(&self, v: &[BigInt], finer: &CrossedK0) -> Result<Vec<BigInt>> {
        let mut out = vec![BigInt::zero(); finer.atoms.len()];
        for (i, x) in
            self.refine_entries(v.iter().enumerate().filter(|(_, x)| !x.is_zero()), finer)?
        {
            out[i] += x;
        }
        Ok(out)
    }

    fn refine_entries<'a>(
        &self,
        entries: impl IntoIterator<Item = (usize, &'a BigInt)>,
        finer: &CrossedK0,
    ) -> Result<Vec<(usize, BigInt)>> {
        if !finer.ambient.contains(&self.ambient) {
            return Err(Error::Invalid("refinement target is not finer".into()));
        }
        let mut out = Vec::new();
        for (i, x) in entries {
            let set = ClopenSet::from_words(&self.sys, self.ambient, vec![self.atoms[i].clone()])?
                .refine(finer.ambient)?;
            for w in set.words() {
                out.push((finer.index[w], x.clone()));
            }
        }
        Ok(out)
    }

    /// The refinement map sends relations into relations, so it descends to
    /// the cokernels.
    pub fn refinement_descends(&self, finer: &CrossedK0) -> Result<bool> {
        for c in &self.relations {
            let big: Vec<(usize, BigInt)> = c.iter().map(|&(i, x)| (i, BigInt::from(x))).collect();
            let r = self.refine_entries(big.iter().map(|(i, x)| (*i, x)), finer)?;
            if !finer
                .quotient
                .vanishes(&finer.quotient.project(r.iter().map(|(i, x)| (*i, x))))
            {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The lattice of quotient vectors generated by `qcols` and the torsion.
    pub fn span(&self, qcols: &[Vec<BigInt>]) -> Lattice {
        let mut l = Lattice::new(self.quotient.len());
        for c in qcols
            .iter()
            .cloned()
            .chain(self.quotient.torsion_generators())
        {
            l.insert(c);
        }
        l
    }

    /// A basis of `{x : Σ x_j q_j = 0}` for quotient vectors `q_j`, the
    /// kernel of `γ̃` on their span.
    pub fn kernel_of(&self, qcols: &[Vec<BigInt>]) -> Vec<SparseVec> {
        let p = qcols.len();
        // no relation of [C | T] vanishes on the first p coordinates, so the
        // projections stay independent
        self.span(qcols)
            .relations()
            .iter()
            .map(|r| {
                r.range(..p)
                    .map(|(k, x)| (*k, x.clone()))
                    .collect::<SparseVec>()
            })
            .filter(|r| !r.is_empty())
            .collect()
    }

    /// Whether the classes of `qcols` generate the cokernel.
    pub fn generates(&self, qcols: &[Vec<BigInt>]) -> bool {
        self.span(qcols).is_full()
    }

    /// For odometers, the trace identifies the cokernel with
    /// `(b_0 ⋯ b_{d-1})^{-1} ℤ ⊂ ℤ[1/b]`. Returns the generator value when
    /// the cokernel is infinite cyclic and the trace maps a generator onto it.
    pub fn odometer_model_generator(&self) -> Option<BigRational> {
        if !self.sys.is_odometer() || self.cokernel_rank() != 1 || !self.torsion().is_empty() {
            return None;
        }
        let mut denom = BigInt::one();
        for i in 0..self.ambient.len {
            denom *= BigInt::from(self.sys.symbols_at(i as i64));
        }
        let unit = BigRational::new(BigInt::one(), denom);
        // the generator of the free part is the class with free coordinate 1
        let i = (0..self.atoms.len()).find(|&i| {
            self.quotient.class_of(self.quotient.image(i)).free[0]
                .abs()
                .is_one()
        })?;
        match self.trace_entries([(i, 1)]) {
            Weight::Exact(q) if q.abs() == unit => Some(unit),
            _ => None,
        }
    }
}
