use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::lattice::SparseVec;
use super::snf::{CokernelClass, IntMatrix, SmithForm};

fn reduce(mut v: Vec<BigInt>, orders: &[Option<BigInt>]) -> Vec<BigInt> {
    for (x, d) in v.iter_mut().zip(orders) {
        if let Some(d) = d {
            *x = x.mod_floor(d);
        }
    }
    v
}

/// `Z^rows / im A` for a sparse `A`, reduced in two phases: every unit entry
/// eliminates one generator and one relation, then the small remainder goes
/// through a dense Smith form.
///
/// `images[i]` is the image of the `i`-th basis vector in
/// `Z/d_1 ⊕ … ⊕ Z/d_t ⊕ Z^r`, the normal form of the cokernel.
#[derive(Clone, Debug)]
pub struct RelationQuotient {
    rows: usize,
    pivots: usize,
    remaining: Vec<usize>,
    reduced: IntMatrix,
    snf: SmithForm,
    orders: Vec<Option<BigInt>>,
    images: Vec<Vec<BigInt>>,
}

impl RelationQuotient {
    pub fn compute(rows: usize, columns: &[Vec<(usize, i64)>]) -> Self {
        let mut cols: Vec<Option<SparseVec>> = columns
            .iter()
            .map(|c| {
                let mut m = SparseVec::new();
                for &(i, x) in c {
                    assert!(i < rows, "relation entry out of range");
                    *m.entry(i).or_insert_with(BigInt::zero) += x;
                }
                m.retain(|_, x| !x.is_zero());
                (!m.is_empty()).then_some(m)
            })
            .collect();
        let mut in_row: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); rows];
        for (j, c) in cols.iter().enumerate() {
            for i in c.iter().flat_map(|c| c.keys()) {
                in_row[*i].insert(j);
            }
        }

        // phase one: unit pivots
        let mut subst: Vec<(usize, SparseVec)> = Vec::new();
        let mut dead = vec![false; rows];
        let mut changed = true;
        while changed {
            changed = false;
            for j in 0..cols.len() {
                let Some(c) = &cols[j] else { continue };
                let pick = c
                    .iter()
                    .filter(|(_, x)| x.magnitude().is_one())
                    .min_by_key(|(i, _)| (in_row[**i].len(), **i));
                let Some((&i, s)) = pick else { continue };
                let s = s.clone();
                let c = cols[j].take().unwrap();
                for k in c.keys() {
                    in_row[*k].remove(&j);
                }
                // e_i ≡ -s Σ_{k≠i} c_k e_k
                let expr: SparseVec = c
                    .iter()
                    .filter(|(k, _)| **k != i)
                    .map(|(k, x)| (*k, -(&s * x)))
                    .collect();
                for jj in std::mem::take(&mut in_row[i]) {
                    let col = cols[jj].as_mut().unwrap();
                    let x = col.remove(&i).unwrap();
                    for (k, y) in &expr {
                        let e = col.entry(*k).or_insert_with(BigInt::zero);
                        *e += &x * y;
                        if e.is_zero() {
                            col.remove(k);
                            in_row[*k].remove(&jj);
                        } else {
                            in_row[*k].insert(jj);
                        }
                    }
                    if col.is_empty() {
                        cols[jj] = None;
                    }
                }
                subst.push((i, expr));
                dead[i] = true;
                changed = true;
            }
        }

        // phase two: dense Smith form of what is left
        let remaining: Vec<usize> = (0..rows).filter(|&i| !dead[i]).collect();
        let pos: BTreeMap<usize, usize> =
            remaining.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let left: Vec<&SparseVec> = cols.iter().flatten().collect();
        let mut reduced = IntMatrix::zeros(remaining.len(), left.len());
        for (j, c) in left.iter().enumerate() {
            for (i, x) in c.iter() {
                reduced.set(pos[i], j, x.clone());
            }
        }
        let snf = SmithForm::compute(&reduced);
        let mut quotient_rows = Vec::new();
        let mut orders = Vec::new();
        for r in 0..remaining.len() {
            if r < snf.rank {
                if !snf.diagonal[r].is_one() {
                    quotient_rows.push(r);
                    orders.push(Some(snf.diagonal[r].clone()));
                }
            } else {
                quotient_rows.push(r);
                orders.push(None);
            }
        }

        // every basis vector in terms of the remaining ones, then through U
        let q = quotient_rows.len();
        let mut images: Vec<Option<Vec<BigInt>>> = vec![None; rows];
        for (p, &i) in remaining.iter().enumerate() {
            images[i] = Some(
                quotient_rows
                    .iter()
                    .map(|&r| snf.u.get(r, p).clone())
                    .collect(),
            );
        }
        for (i, expr) in subst.iter().rev() {
            let mut acc = vec![BigInt::zero(); q];
            for (k, x) in expr {
                let img = images[*k]
                    .as_ref()
                    .expect("substitutions resolve in reverse order");
                for (a, b) in acc.iter_mut().zip(img) {
                    *a += x * b;
                }
            }
            images[*i] = Some(acc);
        }
        let images: Vec<Vec<BigInt>> = images
            .into_iter()
            .map(|v| reduce(v.expect("every generator resolved"), &orders))
            .collect();
        RelationQuotient {
            rows,
            pivots: subst.len(),
            remaining,
            reduced,
            snf,
            orders,
            images,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of quotient coordinates.
    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// Order of each quotient coordinate, `None` for free ones.
    pub fn orders(&self) -> &[Option<BigInt>] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.pivots + self.snf.rank
    }

    pub fn cokernel_rank(&self) -> usize {
        self.rows - self.rank()
    }

    pub fn torsion(&self) -> Vec<BigInt> {
        self.orders.iter().flatten().cloned().collect()
    }

    /// Invariant factors padded to the row count.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let mut f = vec![BigInt::one(); self.pivots];
        f.extend(self.snf.cokernel_factors());
        f
    }

    /// Rows left after unit elimination and the relations among them.
    pub fn reduced(&self) -> (&[usize], &IntMatrix, &SmithForm) {
        (&self.remaining, &self.reduced, &self.snf)
    }

    pub fn image(&self, i: usize) -> &[BigInt] {
        &self.images[i]
    }

    /// Image of a vector given by its nonzero entries.
    pub fn project<'a>(
        &self,
        entries: impl IntoIterator<Item = (usize, &'a BigInt)>,
    ) -> Vec<BigInt> {
        let mut acc = vec![BigInt::zero(); self.len()];
        for (i, x) in entries {
            if x.is_zero() {
                continue;
            }
            for (a, b) in acc.iter_mut().zip(&self.images[i]) {
                if !b.is_zero() {
                    *a += x * b;
                }
            }
        }
        reduce(acc, &self.orders)
    }

    pub fn project_dense(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.rows, "dimension mismatch");
        self.project(v.iter().enumerate())
    }

    /// Whether a quotient vector is zero, reducing torsion coordinates.
    pub fn vanishes(&self, q: &[BigInt]) -> bool {
        q.iter().zip(&self.orders).all(|(x, d)| match d {
            Some(d) => x.is_multiple_of(d),
            None => x.is_zero(),
        })
    }

    pub fn in_image(&self, v: &[BigInt]) -> bool {
        self.vanishes(&self.project_dense(v))
    }

    pub fn class_of(&self, q: &[BigInt]) -> CokernelClass {
        let q = reduce(q.to_vec(), &self.orders);
        let mut torsion = Vec::new();
        let mut free = Vec::new();
        for (x, d) in q.into_iter().zip(&self.orders) {
            match d {
                Some(_) => torsion.push(x),
                None => free.push(x),
            }
        }
        CokernelClass { torsion, free }
    }

    /// The generators of the quotient lattice over `Z^len` coming from
    /// torsion: `d_k e_k` for each finite coordinate.
    pub fn torsion_generators(&self) -> Vec<Vec<BigInt>> {
        let n = self.len();
        self.orders
            .iter()
            .enumerate()
            .filter_map(|(k, d)| {
                d.as_ref().map(|d| {
                    let mut e = vec![BigInt::zero(); n];
                    e[k] = d.clone();
                    e
                })
            })
            .collect()
    }

    /// The defining check: every relation column vanishes and the reduced
    /// Smith form reproduces its matrix.
    pub fn verify(&self, columns: &[Vec<(usize, i64)>]) -> bool {
        let rel_ok = columns.iter().all(|c| {
            let big: Vec<(usize, BigInt)> = c.iter().map(|&(i, x)| (i, BigInt::from(x))).collect();
            self.vanishes(&self.project(big.iter().map(|(i, x)| (*i, x))))
        });
        let free_ok = self
            .orders
            .iter()
            .all(|d| d.as_ref().is_none_or(|d| d.is_positive()));
        rel_ok && free_ok && self.snf.verify(&self.reduced)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Vec<Vec<(usize, i64)>> {
        (0..n).map(|j| vec![(j, 1), ((j + 1) % n, -1)]).collect()
    }

    #[test]
    fn cycle_quotient_is_the_sum() {
        let q = RelationQuotient::compute(6, &cycle(6));
        assert_eq!(q.cokernel_rank(), 1);
        assert_eq!(
            q.invariant_factors().iter().filter(|x| x.is_one()).count(),
            5
        );
        let imgs: Vec<&[BigInt]> = (0..6).map(|i| q.image(i)).collect();
        assert!(imgs.windows(2).all(|w| w[0] == w[1]));
        assert!(q.verify(&cycle(6)));
    }

    #[test]
    fn torsion_survives() {
        // Z^2 / <(2, 0), (0, 3)>
        let cols = vec![vec![(0, 2)], vec![(1, 3)]];
        let q = RelationQuotient::compute(2, &cols);
        assert_eq!(q.cokernel_rank(), 0);
        let mut t = q.torsion();
        t.sort();
        assert_eq!(t, vec![BigInt::from(6)]);
        assert!(q.in_image(&[BigInt::from(2), BigInt::from(3)]));
        assert!(!q.in_image(&[BigInt::from(1), BigInt::from(0)]));
    }

    #[test]
    fn matches_dense_smith_form() {
        let cols = vec![
            vec![(0, 1), (1, 2), (2, -1)],
            vec![(1, 4), (2, 2)],
            vec![(0, 3), (2, 6)],
            vec![(3, 2)],
        ];
        let q = RelationQuotient::compute(4, &cols);
        let dense = IntMatrix::from_columns(
            4,
            &cols
                .iter()
                .map(|c| {
                    let mut v = vec![0; 4];
                    for &(i, x) in c {
                        v[i] += x;
                    }
                    v
                })
                .collect::<Vec<_>>(),
        );
        assert_eq!(
            q.invariant_factors(),
            SmithForm::compute(&dense).cokernel_factors()
        );
    }
}
