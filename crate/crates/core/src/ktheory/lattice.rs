use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Sparse integer vector keyed by coordinate.
pub type SparseVec = BTreeMap<usize, BigInt>;

fn lead(v: &[BigInt]) -> Option<usize> {
    v.iter().position(|x| !x.is_zero())
}

fn axpy(dst: &mut [BigInt], src: &[BigInt], q: &BigInt) {
    for (d, s) in dst.iter_mut().zip(src) {
        if !s.is_zero() {
            *d -= q * s;
        }
    }
}

fn sparse_axpy(dst: &mut SparseVec, src: &SparseVec, q: &BigInt) {
    for (k, s) in src {
        let e = dst.entry(*k).or_insert_with(BigInt::zero);
        *e -= q * s;
        if e.is_zero() {
            dst.remove(k);
        }
    }
}

fn sparse_comb(a: &SparseVec, s: &BigInt, b: &SparseVec, t: &BigInt) -> SparseVec {
    let mut out = SparseVec::new();
    sparse_axpy(&mut out, a, &-s);
    sparse_axpy(&mut out, b, &-t);
    out
}

#[derive(Clone, Debug)]
struct Row {
    pivot: usize,
    v: Vec<BigInt>,
    combo: SparseVec,
}

/// A sublattice of `Z^dim` kept as a Hermite-style echelon basis, built by
/// inserting generators one at a time with extended-gcd row steps.
///
/// Every step is unimodular, so each generator that reduces to zero leaves
/// behind a relation among the generators, and those relations form a basis
/// of all of them.
#[derive(Clone, Debug)]
pub struct Lattice {
    dim: usize,
    rows: BTreeMap<usize, Row>,
    relations: Vec<SparseVec>,
    inserted: usize,
}

impl Lattice {
    pub fn new(dim: usize) -> Self {
        Lattice {
            dim,
            rows: BTreeMap::new(),
            relations: Vec::new(),
            inserted: 0,
        }
    }

    /// The lattice spanned by `gens`.
    pub fn spanned_by(dim: usize, gens: &[Vec<BigInt>]) -> Self {
        let mut l = Self::new(dim);
        for g in gens {
            l.insert(g.clone());
        }
        l
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds the next generator; returns whether the rank went up.
    pub fn insert(&mut self, v: Vec<BigInt>) -> bool {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        let mut combo = SparseVec::new();
        combo.insert(self.inserted, BigInt::from(1));
        self.inserted += 1;
        let mut v = v;
        loop {
            let Some(p) = lead(&v) else {
                self.relations.push(combo);
                return false;
            };
            let Some(row) = self.rows.get_mut(&p) else {
                if v[p].is_negative() {
                    v.iter_mut().for_each(|x| *x = -x.clone());
                    combo.values_mut().for_each(|x| *x = -x.clone());
                }
                self.rows.insert(p, Row { pivot: p, v, combo });
                return true;
            };
            let (a, b) = (row.v[p].clone(), v[p].clone());
            if b.is_multiple_of(&a) {
                let q = &b / &a;
                axpy(&mut v, &row.v, &q);
                sparse_axpy(&mut combo, &row.combo, &q);
                continue;
            }
            let e = a.extended_gcd(&b);
            let (g, s, t) = (e.gcd, e.x, e.y);
            let (ag, bg) = (&a / &g, &b / &g);
            let nv: Vec<BigInt> = row.v.iter().zip(&v).map(|(r, x)| &s * r + &t * x).collect();
            let rest: Vec<BigInt> = row
                .v
                .iter()
                .zip(&v)
                .map(|(r, x)| &bg * r - &ag * x)
                .collect();
            let nc = sparse_comb(&row.combo, &s, &combo, &t);
            combo = sparse_comb(&row.combo, &bg, &combo, &-ag);
            row.v = nv;
            row.combo = nc;
            if row.v[p].is_negative() {
                row.v.iter_mut().for_each(|x| *x = -x.clone());
                row.combo.values_mut().for_each(|x| *x = -x.clone());
            }
            v = rest;
        }
    }

    /// Membership by reduction against the echelon rows.
    pub fn contains(&self, v: &[BigInt]) -> bool {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        let mut v = v.to_vec();
        while let Some(p) = lead(&v) {
            match self.rows.get(&p) {
                Some(r) if v[p].is_multiple_of(&r.v[p]) => {
                    let q = &v[p] / &r.v[p];
                    axpy(&mut v, &r.v, &q);
                }
                _ => return false,
            }
        }
        true
    }

    /// A basis of the integer relations `Σ x_j g_j = 0` among the inserted
    /// generators, indexed by insertion order.
    pub fn relations(&self) -> &[SparseVec] {
        &self.relations
    }

    /// Whether the lattice is all of `Z^dim`.
    pub fn is_full(&self) -> bool {
        self.rows.len() == self.dim && self.rows.values().all(|r| r.v[r.pivot] == BigInt::from(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn gcd_pivots() {
        let l = Lattice::spanned_by(2, &[v(&[4, 1]), v(&[6, 0])]);
        assert_eq!(l.rank(), 2);
        assert!(l.contains(&v(&[2, -1])));
        assert!(!l.contains(&v(&[2, 3])));
        assert!(!l.contains(&v(&[1, 0])));
        assert!(l.contains(&v(&[0, 6])));
        assert!(!l.contains(&v(&[0, 1])));
    }

    #[test]
    fn relations_span_the_kernel() {
        let gens = [v(&[2, 4]), v(&[3, 6]), v(&[1, 2]), v(&[0, 1])];
        let l = Lattice::spanned_by(2, &gens);
        assert_eq!(l.rank(), 2);
        assert_eq!(l.relations().len(), 2);
        for r in l.relations() {
            let mut s = v(&[0, 0]);
            for (j, x) in r {
                for (a, b) in s.iter_mut().zip(&gens[*j]) {
                    *a += x * b;
                }
            }
            assert!(s.iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn full_lattice() {
        assert!(Lattice::spanned_by(2, &[v(&[2, 3]), v(&[1, 1])]).is_full());
        assert!(!Lattice::spanned_by(2, &[v(&[2, 0]), v(&[0, 1])]).is_full());
    }
}
