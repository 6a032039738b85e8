use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

/// A dense integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<BigInt>>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![vec![BigInt::zero(); cols]; rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = BigInt::one();
        }
        m
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        IntMatrix {
            rows: rows.len(),
            cols,
            data: rows
                .iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        }
    }

    /// Builds a matrix from its columns, each of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<i64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length mismatch");
            for (i, &x) in c.iter().enumerate() {
                if x != 0 {
                    m.data[i][j] = BigInt::from(x);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: BigInt) {
        self.data[i][j] = x;
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.data[k][j];
                    if !b.is_zero() {
                        out.data[i][j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        self.data
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Horizontal concatenation.
    pub fn hcat(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows, "row count mismatch");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.iter().chain(b).cloned().collect())
            .collect();
        IntMatrix {
            rows: self.rows,
            cols: self.cols + other.cols,
            data,
        }
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        self.data.iter().map(|r| r[j].clone()).collect()
    }

    /// Determinant by fraction-free elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let x = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = x / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        if n == 0 {
            return BigInt::one();
        }
        sign * &a[n - 1][n - 1]
    }
}

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal, its nonzero
/// entries positive and each dividing the next.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub v: IntMatrix,
    /// Diagonal of `D`, length `min(rows, cols)`.
    pub diagonal: Vec<BigInt>,
    pub rank: usize,
    rows: usize,
    cols: usize,
}

/// Cokernel class normal form: residues on the torsion part and free
/// coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CokernelClass {
    pub torsion: Vec<BigInt>,
    pub free: Vec<BigInt>,
}

impl CokernelClass {
    pub fn is_zero(&self) -> bool {
        self.torsion.iter().all(|x| x.is_zero()) && self.free.iter().all(|x| x.is_zero())
    }
}

fn swap_cols(m: &mut [Vec<BigInt>], a: usize, b: usize) {
    if a != b {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
    }
}

fn row_axpy(m: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    let (d, s) = if dst < src {
        let (lo, hi) = m.split_at_mut(src);
        (&mut lo[dst], &hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(dst);
        (&mut hi[0], &lo[src])
    };
    for (x, y) in d.iter_mut().zip(s.iter()) {
        if !y.is_zero() {
            *x -= q * y;
        }
    }
}

fn col_axpy(m: &mut [Vec<BigInt>], dst: usize, src: usize, q: &BigInt) {
    for row in m.iter_mut() {
        if !row[src].is_zero() {
            let t = q * &row[src];
            row[dst] -= t;
        }
    }
}

impl SmithForm {
    pub fn compute(a: &IntMatrix) -> Self {
        let (m, n) = (a.rows, a.cols);
        let mut d = a.data.clone();
        let mut u = IntMatrix::identity(m).data;
        let mut v = IntMatrix::identity(n).data;
        let mut t = 0;
        while t < m.min(n) {
            let mut best: Option<(usize, usize)> = None;
            'search: for i in t..m {
                for j in t..n {
                    if !d[i][j].is_zero()
                        && best.is_none_or(|(bi, bj)| d[i][j].magnitude() < d[bi][bj].magnitude())
                    {
                        best = Some((i, j));
                        if d[i][j].magnitude().is_one() {
                            break 'search;
                        }
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            d.swap(t, pi);
            u.swap(t, pi);
            swap_cols(&mut d, t, pj);
            swap_cols(&mut v, t, pj);
            loop {
                let mut clean = true;
                for i in t + 1..m {
                    if !d[i][t].is_zero() {
                        let q = &d[i][t] / &d[t][t];
                        row_axpy(&mut d, i, t, &q);
                        row_axpy(&mut u, i, t, &q);
                        clean &= d[i][t].is_zero();
                    }
                }
                for j in t + 1..n {
                    if !d[t][j].is_zero() {
                        let q = &d[t][j] / &d[t][t];
                        col_axpy(&mut d, j, t, &q);
                        col_axpy(&mut v, j, t, &q);
                        clean &= d[t][j].is_zero();
                    }
                }
                if !clean {
                    let mut best = (t, t);
                    for i in t + 1..m {
                        if !d[i][t].is_zero() && d[i][t].magnitude() < d[best.0][best.1].magnitude()
                        {
                            best = (i, t);
                        }
                    }
                    for j in t + 1..n {
                        if !d[t][j].is_zero() && d[t][j].magnitude() < d[best.0][best.1].magnitude()
                        {
                            best = (t, j);
                        }
                    }
                    if best.0 != t {
                        d.swap(t, best.0);
                        u.swap(t, best.0);
                    } else if best.1 != t {
                        swap_cols(&mut d, t, best.1);
                        swap_cols(&mut v, t, best.1);
                    }
                    continue;
                }
                if !d[t][t].magnitude().is_one() {
                    let bad =
                        (t + 1..m).find(|&i| (t + 1..n).any(|j| !d[i][j].is_multiple_of(&d[t][t])));
                    if let Some(i) = bad {
                        let minus_one = -BigInt::one();
                        row_axpy(&mut d, t, i, &minus_one);
                        row_axpy(&mut u, t, i, &minus_one);
                        continue;
                    }
                }
                break;
            }
            if d[t][t].is_negative() {
                for x in d[t].iter_mut() {
                    *x = -x.clone();
                }
                for x in u[t].iter_mut() {
                    *x = -x.clone();
                }
            }
            t += 1;
        }
        let diagonal = (0..m.min(n)).map(|i| d[i][i].clone()).collect();
        SmithForm {
            u: IntMatrix {
                rows: m,
                cols: m,
                data: u,
            },
            v: IntMatrix {
                rows: n,
                cols: n,
                data: v,
            },
            diagonal,
            rank: t,
            rows: m,
            cols: n,
        }
    }

    /// The diagonal of `D` padded with zeros to the row count: the
    /// invariant factors of the cokernel `ℤ^rows / im A`.
    pub fn cokernel_factors(&self) -> Vec<BigInt> {
        let mut f = self.diagonal.clone();
        f.resize(self.rows, BigInt::zero());
        f
    }

    /// Rank of the free part of the cokernel.
    pub fn cokernel_rank(&self) -> usize {
        self.rows - self.rank
    }

    /// Nontrivial torsion coefficients of the cokernel.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.diagonal[..self.rank]
            .iter()
            .filter(|d| !d.is_one())
            .cloned()
            .collect()
    }

    pub fn in_image(&self, b: &[BigInt]) -> bool {
        let y = self.u.mul_vec(b);
        y.iter().enumerate().all(|(i, yi)| {
            if i < self.rank {
                yi.is_multiple_of(&self.diagonal[i])
            } else {
                yi.is_zero()
            }
        })
    }

    /// Some `x` with `A x = b`, if one exists.
    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        if !self.in_image(b) {
            return None;
        }
        let y = self.u.mul_vec(b);
        let mut z = vec![BigInt::zero(); self.cols];
        for i in 0..self.rank {
            z[i] = &y[i] / &self.diagonal[i];
        }
        Some(self.v.mul_vec(&z))
    }

    /// A basis of the integer kernel of `A`.
    pub fn kernel_basis(&self) -> Vec<Vec<BigInt>> {
        (self.rank..self.cols).map(|j| self.v.column(j)).collect()
    }

    pub fn cokernel_class(&self, b: &[BigInt]) -> CokernelClass {
        let y = self.u.mul_vec(b);
        let torsion = (0..self.rank)
            .filter(|&i| !self.diagonal[i].is_one())
            .map(|i| y[i].mod_floor(&self.diagonal[i]))
            .collect();
        CokernelClass {
            torsion,
            free: y[self.rank..].to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Rebuilds `D` for checking.
    pub fn d_matrix(&self) -> IntMatrix {
        let mut d = IntMatrix::zeros(self.rows, self.cols);
        for (i, x) in self.diagonal.iter().enumerate() {
            d.data[i][i] = x.clone();
        }
        d
    }

    /// `U A V = D`, unimodularity and the divisibility chain.
    pub fn verify(&self, a: &IntMatrix) -> bool {
        let uav = self.u.mul(a).mul(&self.v);
        let chain = self.diagonal[..self.rank]
            .windows(2)
            .all(|w| w[1].is_multiple_of(&w[0]))
            && self.diagonal[..self.rank].iter().all(|x| x.is_positive())
            && self.diagonal[self.rank..].iter().all(|x| x.is_zero());
        uav == self.d_matrix()
            && self.u.determinant().abs().is_one()
            && self.v.determinant().abs().is_one()
            && chain
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn factors(a: &[Vec<i64>]) -> Vec<i64> {
        let s = SmithForm::compute(&IntMatrix::from_i64(a));
        s.cokernel_factors()
            .iter()
            .map(|x| x.try_into().unwrap())
            .collect()
    }

    /// gcd of all k×k minors, by brute force over row and column subsets.
    fn determinantal_divisor(a: &[Vec<i64>], k: usize) -> i64 {
        let m = a.len();
        let n = a[0].len();
        let subsets = |size: usize, total: usize| -> Vec<Vec<usize>> {
            (0u32..1 << total)
                .filter(|s| s.count_ones() as usize == size)
                .map(|s| (0..total).filter(|i| s >> i & 1 == 1).collect())
                .collect()
        };
        let mut g = BigInt::zero();
        for rs in subsets(k, m) {
            for cs in subsets(k, n) {
                let sub: Vec<Vec<i64>> = rs
                    .iter()
                    .map(|&i| cs.iter().map(|&j| a[i][j]).collect())
                    .collect();
                g = g.gcd(&IntMatrix::from_i64(&sub).determinant());
            }
        }
        (&g).try_into().unwrap()
    }

    #[test]
    fn one_by_one() {
        assert_eq!(factors(&[vec![2]]), vec![2]);
        assert_eq!(factors(&[vec![-3]]), vec![3]);
    }

    #[test]
    fn cyclic_permutation() {
        let n = 4;
        let a: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (i == j) as i64 - (j == (i + 1) % n) as i64)
                    .collect()
            })
            .collect();
        assert_eq!(factors(&a), vec![1, 1, 1, 0]);
    }

    #[test]
    fn divisibility_fixup() {
        // diag(2, 3) has invariant factors (1, 6)
        assert_eq!(factors(&[vec![2, 0], vec![0, 3]]), vec![1, 6]);
        assert_eq!(factors(&[vec![4, 0], vec![0, 6]]), vec![2, 12]);
    }

    #[test]
    fn membership_and_kernel() {
        let a = IntMatrix::from_i64(&[vec![2, 4], vec![6, 8]]);
        let s = SmithForm::compute(&a);
        assert!(s.in_image(&[BigInt::from(2), BigInt::from(6)]));
        assert!(!s.in_image(&[BigInt::from(1), BigInt::from(0)]));
        let x = s.solve(&[BigInt::from(0), BigInt::from(4)]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![BigInt::from(0), BigInt::from(4)]);
        let z = IntMatrix::from_i64(&[vec![1, -1, 0], vec![0, 1, -1]]);
        let s = SmithForm::compute(&z);
        let k = s.kernel_basis();
        assert_eq!(k.len(), 1);
        assert_eq!(z.mul_vec(&k[0]), vec![BigInt::zero(), BigInt::zero()]);
    }

    #[test]
    fn zero_matrix_cokernel_is_free() {
        let s = SmithForm::compute(&IntMatrix::zeros(3, 3));
        assert_eq!(s.cokernel_rank(), 3);
        assert!(s.kernel_basis().len() == 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn postconditions(m in 1usize..=12, n in 1usize..=12, seed in proptest::collection::vec(-9i64..=9, 144)) {
            let a: Vec<Vec<i64>> = (0..m).map(|i| (0..n).map(|j| seed[i * 12 + j]).collect()).collect();
            let am = IntMatrix::from_i64(&a);
            let s = SmithForm::compute(&am);
            prop_assert!(s.verify(&am));
        }

        #[test]
        fn matches_determinantal_divisors(m in 1usize..=4, n in 1usize..=4, seed in proptest::collection::vec(-6i64..=6, 16)) {
            let a: Vec<Vec<i64>> = (0..m).map(|i| (0..n).map(|j| seed[i * 4 + j]).collect()).collect();
            let s = SmithForm::compute(&IntMatrix::from_i64(&a));
            let mut prev = 1i64;
            for k in 1..=m.min(n) {
                let dk = determinantal_divisor(&a, k);
                let expect = if dk == 0 { 0 } else { dk / prev };
                let got: i64 = (&s.diagonal[k - 1]).try_into().unwrap();
                prop_assert_eq!(got, expect);
                if dk == 0 { break; }
                prev = dk;
            }
        }
    }
}
