//! The factored representation `A = L (Q + [I_k; 0] Z^H) R` with `L` a
//! product of `k` lower and `R` a product of `k` upper unitary Hessenberg
//! matrices, builders for the three supported input classes, and the
//! embedding into a matrix of size `n + k` whose last `k` rows vanish.

use rand::Rng;

use crate::cmv::{cmv_factorize, diagonal_to_cmv, factorize_unchecked};
use crate::densela::{qr, random_unitary, DenseMatrix, QrMode, C64, ONE, ZERO};
use crate::rotations::{factor_banded_unitary, Givens, KHessenbergProduct, Orientation, RotationChain};
use crate::Error;

/// Threshold on `beta` for a band rotation to count as nonzero.
pub const PROPER_TOL: f64 = 1e-12;

const BUILD_TOL: f64 = 1e-10;

/// `L (Q + [I_k; 0] Z^H) R` with `Q = diag(I_k, Qhat)`.
#[derive(Clone, Debug)]
pub struct LfrForm {
    pub n: usize,
    pub k: usize,
    pub l: KHessenbergProduct,
    pub r: KHessenbergProduct,
    /// Unitary Hessenberg chain acting on rows `k..n`; `None` means `Q = I`.
    pub qhat: Option<RotationChain>,
    pub z: DenseMatrix,
}

impl LfrForm {
    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.n;
        let mut f = match &self.qhat {
            Some(c) => c.to_dense(n),
            None => DenseMatrix::identity(n),
        };
        for i in 0..self.k {
            for j in 0..n {
                f[(i, j)] += self.z[(j, i)].conj();
            }
        }
        self.l.apply_left(&mut f);
        self.r.apply_right(&mut f);
        f
    }
}

pub fn lfr_to_dense(form: &LfrForm) -> DenseMatrix {
    form.to_dense()
}

fn check_square(g: &DenseMatrix, z: &DenseMatrix, k: usize) -> Result<usize, Error> {
    let n = g.rows();
    if !g.is_square() || z.rows() != n || z.cols() != k {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix with {}x{} correction for k = {k}",
            g.rows(),
            g.cols(),
            z.rows(),
            z.cols()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::BadDimensions(format!("k = {k} for n = {n}")));
    }
    Ok(n)
}

/// Representation of `G^T + [I_k; 0] Z^H` for a block CMV matrix `G`.
pub fn lfr_from_cmv(g: &DenseMatrix, z: &DenseMatrix, k: usize) -> Result<LfrForm, Error> {
    let n = check_square(g, z, k)?;
    let f = cmv_factorize(g, k)?;
    let g1t = f.g1.transpose();
    let l = factor_banded_unitary(&f.g2.transpose(), k, Orientation::Lower, BUILD_TOL)?;
    let r = factor_banded_unitary(&g1t, k, Orientation::Upper, BUILD_TOL)?;
    let z = &g1t * z;
    Ok(LfrForm { n, k, l, r, qhat: None, z })
}

/// A representation together with the unitary `S` it is similar by: the
/// form materializes `S A S^H`.
#[derive(Clone, Debug)]
pub struct Built {
    pub similarity: DenseMatrix,
    pub form: LfrForm,
}

/// Representation of `P^H (H + [I_k; 0] Z^H) P` for a unitary block upper
/// Hessenberg `H`, where `P = blkdiag(I_k, P_2, ...)` makes the subdiagonal
/// blocks upper triangular. `similarity` holds `P^H`.
pub fn lfr_from_block_hessenberg(h: &DenseMatrix, z: &DenseMatrix, k: usize) -> Result<Built, Error> {
    let n = check_square(h, z, k)?;
    let defect = h.unitarity_defect();
    if defect > BUILD_TOL * n as f64 {
        return Err(Error::NotBlockHessenberg(format!("unitarity defect {defect:.3e}")));
    }
    for i in 0..n {
        for j in 0..n {
            if i / k > j / k + 1 && h[(i, j)].norm() > BUILD_TOL {
                return Err(Error::NotBlockHessenberg(format!("entry ({i}, {j}) below the block subdiagonal")));
            }
        }
    }
    let nb = n.div_ceil(k);
    let mut p = DenseMatrix::identity(n);
    for b in 0..nb - 1 {
        let (r0, r1) = (b * k, (b + 1) * k);
        let (s0, s1) = (r1, ((b + 2) * k).min(n));
        let sub = &h.submatrix(s0, s1, r0, r1) * &p.submatrix(r0, r1, r0, r1);
        let (q, _) = qr(&sub, QrMode::Full);
        p.set_block(s0, s0, &q);
    }
    let ph = p.adjoint();
    let mut ht = &(&ph * h) * &p;
    for i in 0..n {
        for j in 0..n {
            if i > j + k {
                ht[(i, j)] = ZERO;
            }
        }
    }
    let r = factor_banded_unitary(&ht, k, Orientation::Upper, BUILD_TOL)?;
    let z = &ht * &(&ph * z);
    let form = LfrForm { n, k, l: KHessenbergProduct::identity(n, Orientation::Lower), r, qhat: None, z };
    Ok(Built { similarity: ph, form })
}

/// Representation of `P (diag(d) + U V^H) P^H`; `similarity` holds `P`.
pub fn lfr_from_unitary_diagonal(d: &[C64], u: &DenseMatrix, v: &DenseMatrix) -> Result<Built, Error> {
    let n = d.len();
    let k = u.cols();
    if u.rows() != n || v.rows() != n || v.cols() != k {
        return Err(Error::DimensionMismatch(format!("U {}x{}, V {}x{} for n = {n}", u.rows(), k, v.rows(), v.cols())));
    }
    let dc: Vec<C64> = d.iter().map(|z| z.conj()).collect();
    let red = diagonal_to_cmv(&dc, u)?;
    let f = factorize_unchecked(&red.g, k)?;
    let g1h = f.g1.adjoint();
    let l = factor_banded_unitary(&f.g2.adjoint(), k, Orientation::Lower, BUILD_TOL)?;
    let r = factor_banded_unitary(&g1h, k, Orientation::Upper, BUILD_TOL)?;
    let z = &(&g1h * &(&red.p * v)) * &red.u1.adjoint();
    Ok(Built { similarity: red.p, form: LfrForm { n, k, l, r, qhat: None, z } })
}

/// Random unitary block upper Hessenberg matrix whose subdiagonal blocks
/// are generically full.
pub fn random_block_hessenberg<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<DenseMatrix, Error> {
    if k == 0 || k > n {
        return Err(Error::BadDimensions(format!("k = {k} for n = {n}")));
    }
    let mut h = DenseMatrix::identity(n);
    for _ in 0..k {
        let rots: Vec<Givens> = (0..n - 1)
            .map(|row| {
                let u = random_unitary(2, rng);
                let (g, _) = crate::rotations::make_rotation(u[(0, 0)], u[(1, 0)], row);
                g
            })
            .collect();
        let chain = RotationChain::from_rotations(crate::rotations::ChainOrder::Ascending, rots)?;
        let mut next = chain.to_dense(n);
        next = &h * &next;
        h = next;
    }
    let mut bd = DenseMatrix::identity(n);
    let mut r0 = k;
    while r0 < n {
        let r1 = (r0 + k).min(n);
        bd.set_block(r0, r0, &random_unitary(r1 - r0, rng));
        r0 = r1;
    }
    Ok(&(&bd * &h) * &bd.adjoint())
}

/// Embedded form `A_hat = L0 (U_hat + Y0 W0^H) R0` of size `m = n + k`
/// with `U_hat = I - X0 X0^H`, so that `A_hat = [[A, B], [0, 0]]`.
#[derive(Clone, Debug)]
pub struct EmbeddedForm {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub l0: KHessenbergProduct,
    pub r0: KHessenbergProduct,
    pub x0: DenseMatrix,
    pub y0: DenseMatrix,
    pub w0: DenseMatrix,
    /// Triangular factor of the economic QR of `Z`.
    pub ghat: DenseMatrix,
}

impl EmbeddedForm {
    pub fn u_hat(&self) -> DenseMatrix {
        &DenseMatrix::identity(self.m) - &(&self.x0 * &self.x0.adjoint())
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut f = &self.u_hat() + &(&self.y0 * &self.w0.adjoint());
        self.l0.apply_left(&mut f);
        self.r0.apply_right(&mut f);
        f
    }
}

/// `diag(P, I_k)` with every chain padded to cover all rows.
pub(crate) fn extend_product(p: &KHessenbergProduct, m: usize) -> KHessenbergProduct {
    let mut diag = p.diag.clone();
    diag.resize(m, ONE);
    let mut out = KHessenbergProduct { m, orientation: p.orientation, chains: p.chains.clone(), diag };
    out.pad_full();
    out
}

pub fn embed(form: &LfrForm) -> Result<EmbeddedForm, Error> {
    if form.qhat.is_some() {
        return Err(Error::InvalidArgument("embedding needs Q = I".into()));
    }
    let (n, k) = (form.n, form.k);
    let m = n + k;
    let (qz, ghat) = qr(&form.z, QrMode::Economic);
    let mut x0 = DenseMatrix::zeros(m, k);
    x0.set_block(0, 0, &qz);
    for i in 0..k {
        x0[(n + i, i)] = -ONE;
    }
    let mut y0 = x0.clone();
    for i in 0..k {
        for j in 0..k {
            y0[(i, j)] += ghat[(j, i)].conj();
        }
    }
    let mut w0 = DenseMatrix::zeros(m, k);
    w0.set_block(0, 0, &qz);
    Ok(EmbeddedForm {
        n,
        k,
        m,
        l0: extend_product(&form.l, m),
        r0: extend_product(&form.r, m),
        x0,
        y0,
        w0,
        ghat,
    })
}

/// Structural predicates of a representation.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureReport {
    pub left_orientation: bool,
    pub right_orientation: bool,
    pub chain_counts: bool,
    /// Largest deviation of any rotation from unit norm, and of any
    /// diagonal entry from unit modulus.
    pub unitarity_defect: f64,
    pub left_proper: bool,
    pub middle_block_form: bool,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.left_orientation
            && self.right_orientation
            && self.chain_counts
            && self.unitarity_defect < 1e-12
            && self.left_proper
            && self.middle_block_form
    }
}

pub(crate) fn product_defect(p: &KHessenbergProduct) -> f64 {
    let rot = p.chains.iter().flat_map(|c| c.rotations()).map(|g| g.norm_defect()).fold(0.0, f64::max);
    let dia = p.diag.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    rot.max(dia)
}

fn structure(l: &KHessenbergProduct, r: &KHessenbergProduct, k: usize, qhat: Option<&RotationChain>) -> StructureReport {
    StructureReport {
        left_orientation: l.orientation == Orientation::Lower,
        right_orientation: r.orientation == Orientation::Upper,
        chain_counts: l.k() <= k && r.k() <= k,
        unitarity_defect: product_defect(l).max(product_defect(r)),
        left_proper: l.k() == k && l.is_proper(PROPER_TOL),
        middle_block_form: qhat.is_none_or(|c| c.is_empty() || c.start >= k),
    }
}

pub fn check_structure(form: &LfrForm) -> StructureReport {
    structure(&form.l, &form.r, form.k, form.qhat.as_ref())
}

pub fn check_embedded_structure(form: &EmbeddedForm) -> StructureReport {
    structure(&form.l0, &form.r0, form.k, None)
}
