//! Block CMV matrices: recognition, the factorization `G = G1 G2` into two
//! block diagonal unitaries, random generation, and the unitary similarity
//! taking a diagonal-plus-rank-k pair to block CMV form.
//!
//! Rows are grouped in blocks of size `k`; block `b` covers rows
//! `b k .. min((b + 1) k, n)`. `G1` pairs blocks `{0, 1}, {2, 3}, ...` and
//! `G2` is the identity on block 0 and pairs `{1, 2}, {3, 4}, ...`. Both
//! have bandwidth `k` inside each pair.

use rand::Rng;

use crate::densela::{qr, random_unitary, smallest_singular_value, DenseMatrix, QrMode, C64, ONE, ZERO};
use crate::Error;

/// Smallest singular value a corner block must exceed.
pub const CORNER_TOL: f64 = 1e-8;

fn check_dims(n: usize, k: usize) -> Result<(), Error> {
    if k == 0 || n == 0 {
        return Err(Error::BadDimensions(format!("n = {n}, k = {k}")));
    }
    Ok(())
}

fn g1_pair(i: usize, k: usize, n: usize) -> (usize, usize) {
    let t = i / (2 * k);
    (2 * t * k, ((2 * t + 2) * k).min(n))
}

fn g2_pair(i: usize, k: usize, n: usize) -> (usize, usize) {
    if i < k {
        return (i, i + 1);
    }
    let u = (i - k) / (2 * k);
    (k + 2 * u * k, (k + (2 * u + 2) * k).min(n))
}

fn g1_allows(i: usize, j: usize, k: usize, n: usize) -> bool {
    let (lo, hi) = g1_pair(i, k, n);
    lo <= j && j < hi && i.abs_diff(j) <= k
}

fn g2_allows(i: usize, j: usize, k: usize, n: usize) -> bool {
    let (lo, hi) = g2_pair(i, k, n);
    lo <= j && j < hi && i.abs_diff(j) <= k
}

/// Whether entry `(i, j)` of an `n x n` block CMV matrix may be nonzero.
pub fn cmv_allows(i: usize, j: usize, k: usize, n: usize) -> bool {
    let lo = i.saturating_sub(k);
    let hi = (i + k).min(n - 1);
    (lo..=hi).any(|c| g1_allows(i, c, k, n) && g2_allows(c, j, k, n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corner {
    /// Subdiagonal corner, upper triangular.
    Lower,
    /// Superdiagonal corner, lower triangular.
    Upper,
}

/// Corner blocks as `(kind, block_row, block_col)`.
pub fn corner_blocks(n: usize, k: usize) -> Vec<(Corner, usize, usize)> {
    let nb = n.div_ceil(k);
    let mut out = Vec::new();
    if nb >= 2 {
        out.push((Corner::Lower, 1, 0));
    }
    let mut t = 0;
    loop {
        let mut any = false;
        if t >= 1 && 2 * t + 1 < nb {
            out.push((Corner::Lower, 2 * t + 1, 2 * t - 1));
            any = true;
        }
        if 2 * t + 2 < nb {
            out.push((Corner::Upper, 2 * t, 2 * t + 2));
            any = true;
        }
        if !any && t >= 1 {
            break;
        }
        t += 1;
    }
    out
}

fn block(g: &DenseMatrix, k: usize, br: usize, bc: usize) -> DenseMatrix {
    let n = g.rows();
    g.submatrix(br * k, ((br + 1) * k).min(n), bc * k, ((bc + 1) * k).min(n))
}

#[derive(Clone, Debug, PartialEq)]
pub enum CmvViolation {
    NotSquare,
    BlockSize,
    NotUnitary(f64),
    CornerNotTriangular { block_row: usize, block_col: usize },
    OutsidePattern { row: usize, col: usize, value: f64 },
    CornerSingular { block_row: usize, block_col: usize, sigma: f64 },
}

/// Outcome of [`check_block_cmv`]; `violation` holds the first failed
/// predicate.
#[derive(Clone, Debug, PartialEq)]
pub struct CmvReport {
    pub violation: Option<CmvViolation>,
}

impl CmvReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }

    fn fail(v: CmvViolation) -> Self {
        CmvReport { violation: Some(v) }
    }
}

/// Checks unitarity (defect at most `tol * n`), the staircase pattern and
/// corner triangularity (entries at most `tol`), and corner nonsingularity.
pub fn check_block_cmv(g: &DenseMatrix, k: usize, tol: f64) -> CmvReport {
    if !g.is_square() {
        return CmvReport::fail(CmvViolation::NotSquare);
    }
    let n = g.rows();
    if k == 0 || n == 0 {
        return CmvReport::fail(CmvViolation::BlockSize);
    }
    let defect = g.unitarity_defect();
    if defect > tol * n as f64 {
        return CmvReport::fail(CmvViolation::NotUnitary(defect));
    }
    let corners = corner_blocks(n, k);
    for &(kind, br, bc) in &corners {
        let c = block(g, k, br, bc);
        let bad = match kind {
            Corner::Lower => c.tril(-1).max_abs(),
            Corner::Upper => c.adjoint().tril(-1).max_abs(),
        };
        if bad > tol {
            return CmvReport::fail(CmvViolation::CornerNotTriangular { block_row: br, block_col: bc });
        }
    }
    for i in 0..n {
        for j in 0..n {
            let v = g[(i, j)].norm();
            if v > tol && !cmv_allows(i, j, k, n) {
                return CmvReport::fail(CmvViolation::OutsidePattern { row: i, col: j, value: v });
            }
        }
    }
    for &(_, br, bc) in &corners {
        let sigma = smallest_singular_value(&block(g, k, br, bc));
        if sigma <= CORNER_TOL {
            return CmvReport::fail(CmvViolation::CornerSingular { block_row: br, block_col: bc, sigma });
        }
    }
    CmvReport { violation: None }
}

/// `G = G1 G2` with both factors block diagonal unitary of bandwidth `k`.
#[derive(Clone, Debug)]
pub struct CmvFactorization {
    pub g1: DenseMatrix,
    pub g2: DenseMatrix,
    pub k: usize,
}

impl CmvFactorization {
    pub fn product(&self) -> DenseMatrix {
        &self.g1 * &self.g2
    }
}

/// Factors a block CMV matrix; fails with [`Error::NotCmv`] when
/// [`check_block_cmv`] rejects it.
pub fn cmv_factorize(g: &DenseMatrix, k: usize) -> Result<CmvFactorization, Error> {
    let report = check_block_cmv(g, k, 1e-10);
    if let Some(v) = report.violation {
        return Err(Error::NotCmv(format!("{v:?}")));
    }
    factorize_unchecked(g, k)
}

/// Factorization without the corner rank test; the result is checked for
/// the factor patterns instead.
pub(crate) fn factorize_unchecked(g: &DenseMatrix, k: usize) -> Result<CmvFactorization, Error> {
    let n = g.rows();
    check_dims(n, k)?;
    let mut g1 = DenseMatrix::zeros(n, n);
    let mut g2 = DenseMatrix::zeros(n, n);
    let mut t = 0;
    while 2 * t * k < n {
        let r0 = 2 * t * k;
        let r1 = (r0 + 2 * k).min(n);
        let s = r1 - r0;
        // Column blocks this row pair reaches through the second factor's
        // first half; the leading block alone suffices unless a corner is
        // singular.
        let (c0, c1) = if t == 0 { (0, k.min(n)) } else { ((2 * t - 1) * k, ((2 * t + 1) * k).min(n)) };
        let mut lead = g.submatrix(r0, r1, c0, c1);
        for j in 0..lead.cols() {
            if lead.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>() <= 1e-24 {
                for i in 0..lead.rows() {
                    lead[(i, j)] = ZERO;
                }
            }
        }
        let (mut q, _) = qr(&lead, QrMode::Full);
        if s > k {
            // Turn the top-right corner lower triangular.
            let (qd, _) = qr(&q.submatrix(0, k, k, s).adjoint(), QrMode::Full);
            let tail = &q.submatrix(0, s, k, s) * &qd;
            q.set_block(0, k, &tail);
        }
        for i in 0..s {
            for j in 0..s {
                if i.abs_diff(j) > k {
                    if q[(i, j)].norm() > 1e-8 {
                        return Err(Error::NotCmv(format!("first factor entry ({}, {}) = {:.3e}", r0 + i, r0 + j, q[(i, j)].norm())));
                    }
                    q[(i, j)] = ZERO;
                }
            }
        }
        g1.set_block(r0, r0, &q);
        let lo = r0.saturating_sub(k);
        let hi = (r1 + 2 * k).min(n);
        let rows = &q.adjoint() * &g.submatrix(r0, r1, lo, hi);
        for i in 0..s {
            for j in 0..hi - lo {
                let (gi, gj) = (r0 + i, lo + j);
                if g2_allows(gi, gj, k, n) {
                    g2[(gi, gj)] = rows[(i, j)];
                } else if rows[(i, j)].norm() > 1e-8 {
                    return Err(Error::NotCmv(format!("second factor entry ({gi}, {gj}) = {:.3e}", rows[(i, j)].norm())));
                }
            }
        }
        t += 1;
    }
    for i in 0..k.min(n) {
        g2[(i, i)] = ONE;
    }
    Ok(CmvFactorization { g1, g2, k })
}

/// Unitary `s x s` block of bandwidth `k` with triangular full-rank corners
/// (generically).
fn random_banded_block<R: Rng + ?Sized>(s: usize, k: usize, rng: &mut R) -> DenseMatrix {
    let mut u = random_unitary(s, rng);
    if s <= k {
        return u;
    }
    let (qc, _) = qr(&u.submatrix(k, s, 0, k), QrMode::Full);
    let low = &qc.adjoint() * &u.submatrix(k, s, 0, s);
    u.set_block(k, 0, &low);
    let (qb, _) = qr(&u.submatrix(0, k, k, s).adjoint(), QrMode::Full);
    let right = &u.submatrix(0, s, k, s) * &qb;
    u.set_block(0, k, &right);
    for i in 0..s {
        for j in 0..s {
            if i.abs_diff(j) > k {
                u[(i, j)] = ZERO;
            }
        }
    }
    u
}

/// Random block CMV matrix built as a product of random factors.
pub fn random_block_cmv<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<DenseMatrix, Error> {
    check_dims(n, k)?;
    if 2 * k > n {
        return Err(Error::BadDimensions(format!("2k = {} exceeds n = {n}", 2 * k)));
    }
    let mut g1 = DenseMatrix::zeros(n, n);
    let mut r0 = 0;
    while r0 < n {
        let r1 = (r0 + 2 * k).min(n);
        g1.set_block(r0, r0, &random_banded_block(r1 - r0, k, rng));
        r0 = r1;
    }
    let mut g2 = DenseMatrix::identity(n);
    let mut r0 = k;
    while r0 < n {
        let r1 = (r0 + 2 * k).min(n);
        g2.set_block(r0, r0, &random_banded_block(r1 - r0, k, rng));
        r0 = r1;
    }
    let mut g = &g1 * &g2;
    for i in 0..n {
        for j in 0..n {
            if !cmv_allows(i, j, k, n) {
                g[(i, j)] = ZERO;
            }
        }
    }
    Ok(g)
}

/// Result of [`diagonal_to_cmv`]: `G = P diag(D) P^H` and
/// `P U = [U1; 0]`.
#[derive(Clone, Debug)]
pub struct DiagonalCmv {
    pub p: DenseMatrix,
    pub g: DenseMatrix,
    pub u1: DenseMatrix,
}

/// Threshold below which a new Krylov direction counts as dependent.
const BREAKDOWN: f64 = 1e-8;

/// Appends the component of `v` orthogonal to `basis` if it is not
/// negligible. `basis` holds orthonormal vectors.
fn orthonormal_push(basis: &mut Vec<Vec<C64>>, mut v: Vec<C64>) -> bool {
    let before = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if before == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for q in basis.iter() {
            let h: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, a) in v.iter_mut().zip(q) {
                *x -= h * a;
            }
        }
    }
    let after = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if after <= BREAKDOWN * before {
        return false;
    }
    for x in v.iter_mut() {
        *x /= after;
    }
    basis.push(v);
    true
}

/// Unitary similarity taking `diag(d)` to block CMV form while compressing
/// `U` into its first `k` rows.
///
/// The basis is built block by block from alternating products with `D`
/// and `D^H` with full reorthogonalization, which costs `O(n^3)`.
/// Invariant subspaces are continued with unit vectors; the result is then
/// block diagonal with singular corners.
pub fn diagonal_to_cmv(d: &[C64], u: &DenseMatrix) -> Result<DiagonalCmv, Error> {
    let n = d.len();
    let k = u.cols();
    check_dims(n, k)?;
    if u.rows() != n || k > n {
        return Err(Error::DimensionMismatch(format!("U is {}x{} for n = {n}", u.rows(), k)));
    }
    let scale = crate::densela::two_norm(u);
    let sigma = smallest_singular_value(u);
    if scale == 0.0 || sigma <= 1e-10 * scale {
        return Err(Error::RankDeficient(sigma));
    }
    let (q0, u1) = qr(u, QrMode::Economic);
    let mut basis: Vec<Vec<C64>> = (0..k).map(|j| q0.column(j)).collect();
    let mut starts = vec![0usize];
    let mut next_unit = 0usize;
    while basis.len() < n {
        let b = starts.len();
        let width = k.min(n - basis.len());
        let src = starts[b.saturating_sub(2)];
        let src_end = if b >= 2 { starts[b - 1] } else { k };
        starts.push(basis.len());
        let target = basis.len() + width;
        for c in src..src_end {
            if basis.len() == target {
                break;
            }
            let v: Vec<C64> = basis[c]
                .iter()
                .zip(d)
                .map(|(x, z)| if b % 2 == 1 { z * x } else { z.conj() * x })
                .collect();
            orthonormal_push(&mut basis, v);
        }
        while basis.len() < target {
            let mut e = vec![ZERO; n];
            e[next_unit] = ONE;
            next_unit += 1;
            orthonormal_push(&mut basis, e);
        }
    }
    let q = DenseMatrix::from_fn(n, n, |i, j| basis[j][i]);
    let dq = DenseMatrix::from_fn(n, n, |i, j| d[i] * q[(i, j)]);
    let p = q.adjoint();
    let mut g = &p * &dq;
    for i in 0..n {
        for j in 0..n {
            if !cmv_allows(i, j, k, n) {
                if g[(i, j)].norm() > 1e-8 {
                    return Err(Error::Numerical(format!("similarity left entry ({i}, {j}) = {:.3e}", g[(i, j)].norm())));
                }
                g[(i, j)] = ZERO;
            }
        }
    }
    Ok(DiagonalCmv { p, g, u1 })
}
