//! Dense complex matrices and the reference kernels used to validate the
//! structured code: products, Householder QR, spectral norm, Hessenberg
//! reduction and a shifted QR eigensolver.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::Error;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, " {:>9.2e}{:+9.2e}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        DenseMatrix { rows, cols, data }
    }

    pub fn from_diagonal(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &z) in d.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    /// Copy of the block `rows r0..r1`, `cols c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &DenseMatrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Keeps the entries with `j - i <= offset` and zeroes the rest.
    pub fn tril(&self, offset: isize) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            if (j as isize) - (i as isize) <= offset {
                self[(i, j)]
            } else {
                ZERO
            }
        })
    }

    /// Replaces rows `p` and `q` by `[a b; c d] * [row p; row q]`.
    pub fn combine_rows(&mut self, p: usize, q: usize, a: C64, b: C64, c: C64, d: C64) {
        let n = self.cols;
        for j in 0..n {
            let x = self.data[p * n + j];
            let y = self.data[q * n + j];
            self.data[p * n + j] = a * x + b * y;
            self.data[q * n + j] = c * x + d * y;
        }
    }

    /// Replaces columns `p` and `q` by `[col p, col q] * [a b; c d]`.
    pub fn combine_cols(&mut self, p: usize, q: usize, a: C64, b: C64, c: C64, d: C64) {
        let n = self.cols;
        for i in 0..self.rows {
            let x = self.data[i * n + p];
            let y = self.data[i * n + q];
            self.data[i * n + p] = a * x + c * y;
            self.data[i * n + q] = b * x + d * y;
        }
    }

    /// Largest deviation of `A^H A` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let g = matmul(&self.adjoint(), self);
        (&g - &DenseMatrix::identity(g.rows)).max_abs()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.shape(), rhs.shape());
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.shape(), rhs.shape());
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        matmul(self, rhs)
    }
}

pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.cols, b.rows, "inner dimensions differ");
    let mut c = DenseMatrix::zeros(a.rows, b.cols);
    let n = b.cols;
    for i in 0..a.rows {
        let crow = &mut c.data[i * n..(i + 1) * n];
        for (l, &x) in a.row(i).iter().enumerate() {
            if x == ZERO {
                continue;
            }
            let brow = &b.data[l * n..(l + 1) * n];
            for (cj, &bj) in crow.iter_mut().zip(brow) {
                *cj += x * bj;
            }
        }
    }
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QrMode {
    Economic,
    Full,
}

/// Householder QR with a real nonnegative diagonal in `R`.
///
/// Economic mode returns `Q` of size `m x min(m, n)`, full mode `m x m`.
pub fn qr(a: &DenseMatrix, mode: QrMode) -> (DenseMatrix, DenseMatrix) {
    let (m, n) = a.shape();
    let p = m.min(n);
    let mut r = a.clone();
    let mut reflectors: Vec<(usize, Vec<C64>)> = Vec::with_capacity(p);
    let mut phases = vec![ONE; m];

    for j in 0..p {
        let x: Vec<C64> = (j..m).map(|i| r[(i, j)]).collect();
        let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
        let norm = (x[0].norm_sqr() + tail).sqrt();
        if tail > 0.0 {
            let ph = if x[0] == ZERO { ONE } else { x[0] / x[0].norm() };
            let alpha = -ph * norm;
            let mut v = x.clone();
            v[0] -= alpha;
            let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if vn > 0.0 {
                let s = (2.0 / vn).sqrt();
                for z in v.iter_mut() {
                    *z *= s;
                }
                apply_reflector_left(&mut r, j, &v, j);
                for i in j + 1..m {
                    r[(i, j)] = ZERO;
                }
                reflectors.push((j, v));
            }
        }
        let d = r[(j, j)];
        if d != ZERO {
            phases[j] = d / d.norm();
            for c in j..n {
                r[(j, c)] *= phases[j].conj();
            }
            r[(j, j)] = C64::new(r[(j, j)].re, 0.0);
        }
    }

    let qcols = match mode {
        QrMode::Economic => p,
        QrMode::Full => m,
    };
    let mut q = DenseMatrix::zeros(m, qcols);
    for i in 0..qcols {
        q[(i, i)] = phases[i];
    }
    for (j, v) in reflectors.iter().rev() {
        apply_reflector_left(&mut q, *j, v, 0);
    }
    let r = match mode {
        QrMode::Economic => r.submatrix(0, p, 0, n),
        QrMode::Full => r,
    };
    (q, r)
}

/// `A[j.., c0..] -= v (v^H A[j.., c0..])` for a scaled Householder vector.
fn apply_reflector_left(a: &mut DenseMatrix, j: usize, v: &[C64], c0: usize) {
    let n = a.cols;
    for c in c0..n {
        let mut s = ZERO;
        for (t, vi) in v.iter().enumerate() {
            s += vi.conj() * a[(j + t, c)];
        }
        if s != ZERO {
            for (t, vi) in v.iter().enumerate() {
                a[(j + t, c)] -= vi * s;
            }
        }
    }
}

fn apply_reflector_right(a: &mut DenseMatrix, j: usize, v: &[C64]) {
    for r in 0..a.rows {
        let mut s = ZERO;
        for (t, vi) in v.iter().enumerate() {
            s += a[(r, j + t)] * vi;
        }
        if s != ZERO {
            for (t, vi) in v.iter().enumerate() {
                a[(r, j + t)] -= s * vi.conj();
            }
        }
    }
}

/// Spectral norm by power iteration on `A^H A`.
pub fn two_norm(a: &DenseMatrix) -> f64 {
    let (m, n) = a.shape();
    if m == 0 || n == 0 || a.max_abs() == 0.0 {
        return 0.0;
    }
    let mut x: Vec<C64> = (0..n).map(|i| C64::new(1.0 + 0.37 * (i as f64).sin(), 0.11 * (i as f64).cos())).collect();
    normalize(&mut x);
    let mut est = 0.0;
    for _ in 0..2000 {
        let y = mat_vec(a, &x);
        let mut z = adj_mat_vec(a, &y);
        let lambda = vec_norm(&z);
        if lambda == 0.0 {
            return 0.0;
        }
        for w in z.iter_mut() {
            *w /= lambda;
        }
        x = z;
        let next = lambda.sqrt();
        if (next - est).abs() <= 1e-13 * next {
            return next;
        }
        est = next;
    }
    est
}

pub fn mat_vec(a: &DenseMatrix, x: &[C64]) -> Vec<C64> {
    (0..a.rows).map(|i| a.row(i).iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

fn adj_mat_vec(a: &DenseMatrix, y: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; a.cols];
    for (i, yi) in y.iter().enumerate() {
        for (o, aij) in out.iter_mut().zip(a.row(i)) {
            *o += aij.conj() * yi;
        }
    }
    out
}

fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(x: &mut [C64]) {
    let s = vec_norm(x);
    if s > 0.0 {
        for z in x.iter_mut() {
            *z /= s;
        }
    }
}

/// Householder reduction `A = Q H Q^H` with `H` upper Hessenberg.
pub fn hessenberg_oracle(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    assert!(a.is_square());
    let n = a.rows;
    let mut h = a.clone();
    let mut q = DenseMatrix::identity(n);
    for j in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (j + 1..n).map(|i| h[(i, j)]).collect();
        let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let norm = (x[0].norm_sqr() + tail).sqrt();
        let ph = if x[0] == ZERO { ONE } else { x[0] / x[0].norm() };
        let mut v = x;
        v[0] += ph * norm;
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let s = (2.0 / vn).sqrt();
        for z in v.iter_mut() {
            *z *= s;
        }
        apply_reflector_left(&mut h, j + 1, &v, 0);
        apply_reflector_right(&mut h, j + 1, &v);
        apply_reflector_right(&mut q, j + 1, &v);
        for i in j + 2..n {
            h[(i, j)] = ZERO;
        }
    }
    (h, q)
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR.
pub fn eig_oracle(h: &DenseMatrix) -> Result<Vec<C64>, Error> {
    assert!(h.is_square());
    let n = h.rows;
    for i in 0..n {
        for j in 0..i.saturating_sub(1) {
            if h[(i, j)] != ZERO {
                return Err(Error::NotHessenberg);
            }
        }
    }
    let mut a = h.clone();
    let eps = f64::EPSILON;
    let mut eigs = vec![ZERO; n];
    if n == 0 {
        return Ok(eigs);
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let s = a[(lo, lo)].norm() + a[(lo - 1, lo - 1)].norm();
            let s = if s == 0.0 { scale } else { s };
            if a[(lo, lo - 1)].norm() <= eps * s {
                a[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eigs[hi] = a[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > 100 * n.max(10) {
            return Err(Error::NoConvergence);
        }
        let mu = if iter.is_multiple_of(11) {
            a[(hi, hi)] + C64::new(0.75 * a[(hi, hi - 1)].norm(), 0.3 * a[(hi, hi - 1)].norm())
        } else {
            wilkinson_shift(a[(hi - 1, hi - 1)], a[(hi - 1, hi)], a[(hi, hi - 1)], a[(hi, hi)])
        };
        qr_sweep(&mut a, lo, hi, mu);
    }
    eigs[0] = a[(0, 0)];
    Ok(eigs)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() < (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// One explicit shifted QR step on the active window `lo..=hi`.
fn qr_sweep(a: &mut DenseMatrix, lo: usize, hi: usize, mu: C64) {
    for i in lo..=hi {
        a[(i, i)] -= mu;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let (c, s) = givens_cs(a[(i, i)], a[(i + 1, i)]);
        for j in i..=hi {
            let x = a[(i, j)];
            let y = a[(i + 1, j)];
            a[(i, j)] = c * x + s * y;
            a[(i + 1, j)] = -s.conj() * x + c * y;
        }
        a[(i + 1, i)] = ZERO;
        rots.push((c, s));
    }
    for (t, &(c, s)) in rots.iter().enumerate() {
        let i = lo + t;
        for r in lo..=(i + 1).min(hi) {
            let x = a[(r, i)];
            let y = a[(r, i + 1)];
            a[(r, i)] = c * x + s.conj() * y;
            a[(r, i + 1)] = -s * x + c * y;
        }
    }
    for i in lo..=hi {
        a[(i, i)] += mu;
    }
}

/// Real `c`, complex `s` with `[c s; -conj(s) c] [x; y] = [r; 0]`.
fn givens_cs(x: C64, y: C64) -> (C64, C64) {
    let ny = y.norm();
    if ny == 0.0 {
        return (ONE, ZERO);
    }
    let nx = x.norm();
    let r = nx.hypot(ny);
    if nx == 0.0 {
        return (ZERO, (y / ny).conj());
    }
    let ph = x / nx;
    (C64::new(nx / r, 0.0), ph * y.conj() / r)
}

/// Smallest singular value through a QR of the tall orientation.
pub fn smallest_singular_value(a: &DenseMatrix) -> f64 {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return 0.0;
    }
    let tall = if m >= n { a.clone() } else { a.adjoint() };
    let (_, r) = qr(&tall, QrMode::Economic);
    let p = r.rows;
    for i in 0..p {
        if r[(i, i)].norm() == 0.0 {
            return 0.0;
        }
    }
    let inv = upper_triangular_inverse(&r);
    let ni = two_norm(&inv);
    if ni == 0.0 || !ni.is_finite() {
        0.0
    } else {
        1.0 / ni
    }
}

pub fn upper_triangular_inverse(r: &DenseMatrix) -> DenseMatrix {
    let n = r.rows;
    let mut x = DenseMatrix::zeros(n, n);
    for col in 0..n {
        for i in (0..=col).rev() {
            let mut s = if i == col { ONE } else { ZERO };
            for l in i + 1..=col {
                s -= r[(i, l)] * x[(l, col)];
            }
            x[(i, col)] = s / r[(i, i)];
        }
    }
    x
}

/// Greedy matching distance between two multisets of complex numbers.
pub fn spectrum_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| b_min_dist(a[j], b).partial_cmp(&b_min_dist(a[i], b)).unwrap());
    for i in order {
        let mut best = f64::INFINITY;
        let mut at = usize::MAX;
        for (j, z) in b.iter().enumerate() {
            if !used[j] && (a[i] - z).norm() < best {
                best = (a[i] - z).norm();
                at = j;
            }
        }
        used[at] = true;
        worst = worst.max(best);
    }
    worst
}

fn b_min_dist(x: C64, b: &[C64]) -> f64 {
    b.iter().map(|z| (x - z).norm()).fold(f64::INFINITY, f64::min)
}

/// Matrix with independent standard complex Gaussian entries (real and
/// imaginary parts drawn from N(0, 1)).
pub fn random_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

/// Haar-distributed unitary matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DenseMatrix {
    qr(&random_gaussian(n, n, rng), QrMode::Full).0
}

/// Uniformly distributed points on the unit circle.
pub fn random_unit_circle<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    (0..n).map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        DenseMatrix::from_fn(m, n, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn identity_qr() {
        let (q, r) = qr(&DenseMatrix::identity(3), QrMode::Full);
        assert!((&q - &DenseMatrix::identity(3)).max_abs() < 1e-15);
        assert!((&r - &DenseMatrix::identity(3)).max_abs() < 1e-15);
    }

    #[test]
    fn qr_reconstructs_with_real_diagonal() {
        for (m, n) in [(5, 3), (4, 4), (3, 5), (7, 1)] {
            let a = sample(m, n, (m * 10 + n) as u64);
            for mode in [QrMode::Economic, QrMode::Full] {
                let (q, r) = qr(&a, mode);
                assert!((&matmul(&q, &r) - &a).max_abs() < 1e-13);
                assert!(q.unitarity_defect() < 1e-13);
                for i in 0..r.rows().min(r.cols()) {
                    assert!(r[(i, i)].im == 0.0 && r[(i, i)].re >= 0.0);
                    for j in 0..i.min(r.cols()) {
                        assert!(r[(i, j)].norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn qr_of_zero_gives_unit_columns() {
        let (q, r) = qr(&DenseMatrix::zeros(5, 2), QrMode::Economic);
        assert!((&q - &DenseMatrix::identity(5).submatrix(0, 5, 0, 2)).max_abs() == 0.0);
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn two_norm_of_diagonal() {
        let d = DenseMatrix::from_diagonal(&[C64::new(3.0, 0.0), C64::new(0.0, -4.0), ONE]);
        assert!((two_norm(&d) - 4.0).abs() < 1e-12);
        assert_eq!(two_norm(&DenseMatrix::zeros(3, 3)), 0.0);
    }

    #[test]
    fn hessenberg_oracle_is_a_similarity() {
        let a = sample(9, 9, 3);
        let (h, q) = hessenberg_oracle(&a);
        assert!(q.unitarity_defect() < 1e-13);
        let back = matmul(&matmul(&q, &h), &q.adjoint());
        assert!((&back - &a).max_abs() < 1e-13);
        assert_eq!(h.tril(-2).max_abs(), 0.0);
    }

    #[test]
    fn eigenvalues_of_triangular_matrix() {
        let mut a = sample(6, 6, 4).tril(0).adjoint();
        for i in 0..6 {
            a[(i, i)] = C64::new(i as f64, 1.0);
        }
        let e = eig_oracle(&a).unwrap();
        let want: Vec<C64> = (0..6).map(|i| C64::new(i as f64, 1.0)).collect();
        assert!(spectrum_distance(&e, &want) < 1e-12);
    }

    #[test]
    fn eigenvalues_survive_similarity() {
        let d: Vec<C64> = (0..8).map(|i| C64::new(i as f64 - 3.5, 0.5 * i as f64)).collect();
        let (u, _) = qr(&sample(8, 8, 9), QrMode::Full);
        let a = matmul(&matmul(&u, &DenseMatrix::from_diagonal(&d)), &u.adjoint());
        let (h, _) = hessenberg_oracle(&a);
        let e = eig_oracle(&h).unwrap();
        assert!(spectrum_distance(&e, &d) < 1e-10);
    }

    #[test]
    fn eig_rejects_non_hessenberg() {
        let a = sample(4, 4, 1);
        assert!(matches!(eig_oracle(&a), Err(Error::NotHessenberg)));
    }

    #[test]
    fn smallest_singular_value_of_scaled_identity() {
        let a = DenseMatrix::identity(3).scale(C64::new(0.5, 0.0));
        assert!((smallest_singular_value(&a) - 0.5).abs() < 1e-12);
        let mut z = DenseMatrix::identity(3);
        z[(1, 1)] = ZERO;
        assert_eq!(smallest_singular_value(&z), 0.0);
    }
}
