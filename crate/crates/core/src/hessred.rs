//! Reduction of an embedded representation to upper Hessenberg form.
//!
//! The state always represents `Qleft (M + [T; 0] W^H) Pright`, with the
//! middle unitary `M` stored according to the stage. Step 1 replaces the
//! left factor by a proper one through a QR of `Y0`, step 2 reorders the
//! factors so that the middle becomes `diag(I_k, .)` times `2k` chains and
//! the low-rank term `[I_k; 0] W^H`, and step 3 chases the extra chains out
//! one rotation at a time.

use crate::densela::{qr, two_norm, DenseMatrix, QrMode, C64, ONE, ZERO};
use crate::lfr::{
    embed, lfr_from_block_hessenberg, lfr_from_cmv, lfr_from_unitary_diagonal, EmbeddedForm, LfrForm,
    PROPER_TOL,
};
use crate::rotations::{
    factor_banded_trusted, make_rotation, op_counts, pass_chain_left_to_right, pass_chain_right_to_left, ChainOrder,
    Givens, KHessenbergProduct, Orientation, RotationChain,
};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Embedded,
    AfterStep1,
    AfterStep2,
    Reduced,
}

#[derive(Clone, Debug)]
pub enum Middle {
    /// `I - X X^H`.
    Householder(DenseMatrix),
    /// Product of two upper factors.
    Split(KHessenbergProduct, KHessenbergProduct),
    /// Ascending chains starting at row `k` or later.
    Chains(KHessenbergProduct),
}

impl Middle {
    pub fn to_dense(&self, m: usize) -> DenseMatrix {
        match self {
            Middle::Householder(x) => &DenseMatrix::identity(m) - &(x * &x.adjoint()),
            Middle::Split(a, b) => {
                let mut d = a.to_dense();
                b.apply_right(&mut d);
                d
            }
            Middle::Chains(p) => p.to_dense(),
        }
    }
}

/// Accumulated similarity `S`: the state represents `S^H A_hat S`.
#[derive(Clone, Debug, Default)]
pub struct SimilarityLog {
    pub prefix: Option<KHessenbergProduct>,
    pub rotations: Vec<Givens>,
}

impl SimilarityLog {
    pub fn to_dense(&self, m: usize) -> DenseMatrix {
        let mut s = match &self.prefix {
            Some(p) => p.to_dense(),
            None => DenseMatrix::identity(m),
        };
        for g in &self.rotations {
            g.apply_right(&mut s);
        }
        s
    }
}

/// Operation counts of step 3.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChaseStats {
    pub turnovers: u64,
    pub fusions: u64,
    pub similarities: u64,
}

impl ChaseStats {
    pub fn rotations(&self) -> u64 {
        self.turnovers + self.fusions
    }
}

#[derive(Clone, Debug)]
pub struct ReductionState {
    pub stage: Stage,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub left: KHessenbergProduct,
    pub middle: Middle,
    /// Leading block of the low-rank term `[T; 0] W^H`.
    pub t: DenseMatrix,
    pub w: DenseMatrix,
    pub right: KHessenbergProduct,
    pub sim: SimilarityLog,
    pub stats: ChaseStats,
}

impl ReductionState {
    pub fn from_embedded(e: &EmbeddedForm) -> Self {
        ReductionState {
            stage: Stage::Embedded,
            n: e.n,
            k: e.k,
            m: e.m,
            left: e.l0.clone(),
            middle: Middle::Householder(e.x0.clone()),
            t: e.y0.clone(),
            w: e.w0.clone(),
            right: e.r0.clone(),
            sim: SimilarityLog::default(),
            stats: ChaseStats::default(),
        }
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let m = self.m;
        let mut f = self.middle.to_dense(m);
        for i in 0..self.t.rows() {
            for j in 0..m {
                let mut s = ZERO;
                for c in 0..self.t.cols() {
                    s += self.t[(i, c)] * self.w[(j, c)].conj();
                }
                f[(i, j)] += s;
            }
        }
        self.left.apply_left(&mut f);
        self.right.apply_right(&mut f);
        f
    }

    fn expect(&self, stage: Stage) -> Result<(), Error> {
        if self.stage != stage {
            return Err(Error::InvalidArgument(format!("expected stage {stage:?}, found {:?}", self.stage)));
        }
        Ok(())
    }
}

/// QR of `Y` as `Q0 T0` with `Q0` a proper product of `k` descending
/// chains covering all rows.
///
/// Pairs of zeros are annihilated by a swap so that every band rotation of
/// `Q0` has unit sine.
pub fn proper_full_qr(y: &DenseMatrix) -> Result<(KHessenbergProduct, DenseMatrix), Error> {
    let (m, k) = y.shape();
    if k == 0 || k >= m {
        return Err(Error::BadDimensions(format!("{m}x{k} for a full QR")));
    }
    let scale = y.max_abs();
    let mut t = y.clone();
    let mut chains = Vec::with_capacity(k);
    for j in 0..k {
        let mut rots = Vec::with_capacity(m - 1 - j);
        for p in (j..m - 1).rev() {
            let (a, b) = (t[(p, j)], t[(p + 1, j)]);
            let g = if a == ZERO && b == ZERO { Givens::swap(p) } else { make_rotation(a, b, p).0 };
            g.apply_left_adjoint(&mut t);
            t[(p + 1, j)] = ZERO;
            rots.push(g);
        }
        let pivot = t[(j, j)].norm();
        if pivot <= 1e-14 * scale || scale == 0.0 {
            return Err(Error::RankDeficient(pivot));
        }
        rots.reverse();
        let mut c = RotationChain::from_rotations(ChainOrder::Descending, rots)?;
        c.pad(0, m - 2);
        chains.push(c);
    }
    let q = KHessenbergProduct::new(m, Orientation::Lower, chains, vec![ONE; m])?;
    Ok((q, t))
}

/// QR of `Y0`, then `S = I - X_hat X_hat^H` folded into `Q0^H R0`.
pub fn step1(state: ReductionState) -> Result<ReductionState, Error> {
    state.expect(Stage::Embedded)?;
    let ReductionState { n, k, m, left, middle, t, w, right, .. } = state;
    let Middle::Householder(x0) = middle else {
        return Err(Error::InvalidArgument("embedded middle factor expected".into()));
    };
    let (q0, t0) = proper_full_qr(&t)?;
    let mut xh = x0;
    q0.apply_left_adjoint(&mut xh);
    let s = (2 * k).min(m);
    let tail = xh.submatrix(s, m, 0, k).max_abs();
    if tail > 1e-10 {
        return Err(Error::Numerical(format!("rows below {s} of the rotated X0 reach {tail:.3e}")));
    }
    let xs = xh.submatrix(0, s, 0, k);
    let core = &DenseMatrix::identity(s) - &(&xs * &xs.adjoint());
    let sf = factor_banded_trusted(&core, s - 1, Orientation::Upper, 1e-10)?;

    let mut w_tilde = w;
    right.apply_left_adjoint(&mut w_tilde);

    let mut ul = q0.adjoint();
    let mut ur = right;
    let mut e = sf.diag.clone();
    e.resize(m, ONE);
    ul.absorb_left_diagonal(&e);
    let rots: Vec<Givens> = sf.chains.iter().flat_map(|c| c.product_order()).collect();
    for g in rots.into_iter().rev() {
        if g.is_identity() {
            continue;
        }
        if let Some(x) = ul.pass_from_left(g)? {
            if ur.pass_from_left(x)?.is_some() {
                return Err(Error::Numerical(format!("rotation at row {} left the middle factor", g.row)));
            }
        }
    }
    Ok(ReductionState {
        stage: Stage::AfterStep1,
        n,
        k,
        m,
        left: q0,
        middle: Middle::Split(ul, ur),
        t: t0.submatrix(0, k, 0, k),
        w: w_tilde,
        right: left.clone(),
        sim: SimilarityLog { prefix: Some(left), rotations: Vec::new() },
        stats: ChaseStats::default(),
    })
}

/// Rewrites `Q0 (P_hat Q_hat + [T; 0] W^H) L0` as `Q1 (L1 Q_tilde + [I; 0] W1^H) P_tilde`.
pub fn step2(state: ReductionState) -> Result<ReductionState, Error> {
    state.expect(Stage::AfterStep1)?;
    let ReductionState { n, k, m, left, middle, t, w, right, .. } = state;
    let Middle::Split(mut ul, ur) = middle else {
        return Err(Error::InvalidArgument("split middle factor expected".into()));
    };
    let mut q_tilde = Vec::with_capacity(ur.k());
    for c in &ur.chains {
        q_tilde.push(pass_chain_right_to_left(&mut ul, c)?);
    }
    for (d, e) in ul.diag.iter_mut().zip(&ur.diag) {
        *d *= e;
    }
    let mut w1 = &w * &t.adjoint();
    ul.apply_left(&mut w1);

    let l0_upper = factor_banded_trusted(&right.to_dense(), k, Orientation::Upper, 1e-10)?;
    let mut q = left;
    q.absorb_left_diagonal(&l0_upper.diag);
    let mut chains = Vec::with_capacity(2 * k);
    for c in l0_upper.chains.iter().rev() {
        chains.push(pass_chain_left_to_right(c, &mut q)?);
    }
    chains.reverse();
    chains.extend(q_tilde);
    for c in chains.iter_mut() {
        if !c.is_empty() && c.start < k {
            return Err(Error::Numerical(format!("middle chain reaches row {}", c.start)));
        }
        c.pad(k, m - 2);
    }
    let beta = q.min_outer_beta();
    if beta <= 1e-10 {
        return Err(Error::PropernessLost(beta));
    }
    let u2 = KHessenbergProduct::new(m, Orientation::Upper, chains, vec![ONE; m])?;
    Ok(ReductionState {
        stage: Stage::AfterStep2,
        n,
        k,
        m,
        left: q,
        middle: Middle::Chains(u2),
        t: DenseMatrix::identity(k),
        w: w1,
        right: ul,
        sim: SimilarityLog::default(),
        stats: ChaseStats::default(),
    })
}

/// Chases all chains but the first out of the middle factor.
pub fn step3(state: ReductionState) -> Result<ReductionState, Error> {
    state.expect(Stage::AfterStep2)?;
    let ReductionState { n, k, m, mut left, middle, t, mut w, mut right, mut sim, .. } = state;
    let Middle::Chains(mut u) = middle else {
        return Err(Error::InvalidArgument("chained middle factor expected".into()));
    };
    let (t0, f0) = op_counts();
    let mut similarities = 0u64;
    let nchains = u.k();
    let mut bulges = Vec::with_capacity(nchains);
    let mut gammas = Vec::with_capacity(nchains);
    for p in k..m - 1 {
        bulges.clear();
        for j in (1..nchains).rev() {
            let Some(x) = u.chains[j].pop_front() else { continue };
            if x.row != p {
                return Err(Error::StructureBroken { row: x.row, start: p, end: m - 2 });
            }
            if x.is_identity() {
                continue;
            }
            if let Some(y) = u.pass_left_through(x, j)? {
                bulges.push(y);
            }
        }
        gammas.clear();
        for &y in &bulges {
            if let Some(g) = left.pass_from_right(y)? {
                gammas.push(g);
            }
        }
        for &g in &gammas {
            let mut g = g;
            loop {
                debug_assert!(g.row + 2 <= n);
                sim.rotations.push(g);
                similarities += 1;
                let Some(g1) = right.pass_from_right(g)? else { break };
                g1.apply_left_adjoint(&mut w);
                let Some(g2) = u.pass_from_right(g1)? else { break };
                debug_assert!(g2.row >= k);
                let Some(g3) = left.pass_from_right(g2)? else { break };
                g = g3;
            }
        }
    }
    u.chains.retain(|c| !c.is_empty());
    let (t1, f1) = op_counts();
    Ok(ReductionState {
        stage: Stage::Reduced,
        n,
        k,
        m,
        left,
        middle: Middle::Chains(u),
        t,
        w,
        right,
        sim,
        stats: ChaseStats { turnovers: t1 - t0, fusions: f1 - f0, similarities },
    })
}

/// Embedding followed by the three steps.
pub fn reduce_form(form: &LfrForm) -> Result<ReductionState, Error> {
    let e = embed(form)?;
    step3(step2(step1(ReductionState::from_embedded(&e))?)?)
}

/// Input classes accepted by [`reduce_to_hessenberg`].
#[derive(Clone, Debug)]
pub enum Problem {
    /// `G^T + [I_k; 0] Z^H` with `G` block CMV.
    Cmv { g: DenseMatrix, z: DenseMatrix, k: usize },
    /// `H + [I_k; 0] Z^H` with `H` unitary block upper Hessenberg.
    BlockHessenberg { h: DenseMatrix, z: DenseMatrix, k: usize },
    /// `diag(d) + U V^H`.
    Diagonal { d: Vec<C64>, u: DenseMatrix, v: DenseMatrix },
}

impl Problem {
    pub fn n(&self) -> usize {
        match self {
            Problem::Cmv { g, .. } => g.rows(),
            Problem::BlockHessenberg { h, .. } => h.rows(),
            Problem::Diagonal { d, .. } => d.len(),
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Problem::Cmv { k, .. } | Problem::BlockHessenberg { k, .. } => *k,
            Problem::Diagonal { u, .. } => u.cols(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let (base, z, k) = match self {
            Problem::Cmv { g, z, k } => (g.transpose(), z.clone(), *k),
            Problem::BlockHessenberg { h, z, k } => (h.clone(), z.clone(), *k),
            Problem::Diagonal { d, u, v } => {
                return &DenseMatrix::from_diagonal(d) + &(u * &v.adjoint());
            }
        };
        let mut a = base;
        for i in 0..k {
            for j in 0..a.cols() {
                a[(i, j)] += z[(j, i)].conj();
            }
        }
        a
    }

    /// Representation and the unitary `S` with `form = S A S^H`.
    pub fn build(&self) -> Result<(LfrForm, DenseMatrix), Error> {
        match self {
            Problem::Cmv { g, z, k } => Ok((lfr_from_cmv(g, z, *k)?, DenseMatrix::identity(g.rows()))),
            Problem::BlockHessenberg { h, z, k } => {
                let b = lfr_from_block_hessenberg(h, z, *k)?;
                Ok((b.form, b.similarity))
            }
            Problem::Diagonal { d, u, v } => {
                let b = lfr_from_unitary_diagonal(d, u, v)?;
                Ok((b.form, b.similarity))
            }
        }
    }
}

/// Basis changes between the input and the reduced state: the reduced
/// matrix is `S_red^H [[S A S^H, B], [0, 0]] S_red`, with `S = similarity`
/// and `S_red` the state's similarity log.
#[derive(Clone, Debug)]
pub struct Basis {
    pub similarity: DenseMatrix,
    pub n: usize,
    pub k: usize,
}

pub fn reduce_to_hessenberg(problem: &Problem) -> Result<(ReductionState, Basis), Error> {
    let (form, similarity) = problem.build()?;
    let state = reduce_form(&form)?;
    Ok((state, Basis { similarity, n: form.n, k: form.k }))
}

/// Hypotheses of the Hessenberg structure theorem for a state, and the
/// consequence when they hold.
#[derive(Clone, Debug, PartialEq)]
pub struct Rep1Report {
    pub left_lower: bool,
    pub left_proper: bool,
    pub right_upper: bool,
    pub middle_block_hessenberg: bool,
    pub low_rank_confined: bool,
    pub bottom_rows_zero: bool,
    /// `||tril(A, -2)||_2` of the reconstruction, when the hypotheses hold.
    pub hessenberg_defect: Option<f64>,
}

impl Rep1Report {
    pub fn hypotheses_hold(&self) -> bool {
        self.left_lower
            && self.left_proper
            && self.right_upper
            && self.middle_block_hessenberg
            && self.low_rank_confined
            && self.bottom_rows_zero
    }
}

/// Checks the hypotheses with `tol` relative to `scale` (typically
/// `||A||_2`) for the zero rows.
pub fn verify_rep1(state: &ReductionState, scale: f64, tol: f64) -> Rep1Report {
    let (n, k, m) = (state.n, state.k, state.m);
    let left_lower = state.left.orientation == Orientation::Lower && state.left.k() == k;
    let left_proper = left_lower && state.left.is_proper(PROPER_TOL);
    let right_upper = state.right.orientation == Orientation::Upper && state.right.k() <= k;
    let middle_block_hessenberg = match &state.middle {
        Middle::Chains(p) => {
            let live: Vec<&RotationChain> = p.chains.iter().filter(|c| !c.is_empty()).collect();
            live.len() <= 1 && live.iter().all(|c| c.start >= k) && p.diag[..k].iter().all(|z| (z - ONE).norm() <= tol)
        }
        _ => false,
    };
    let low_rank_confined = state.t.shape() == (k, k) && (&state.t - &DenseMatrix::identity(k)).max_abs() <= tol;
    let dense = state.reconstruct();
    let bottom_rows_zero = dense.submatrix(n, m, 0, m).max_abs() <= tol * scale;
    let mut report = Rep1Report {
        left_lower,
        left_proper,
        right_upper,
        middle_block_hessenberg,
        low_rank_confined,
        bottom_rows_zero,
        hessenberg_defect: None,
    };
    if report.hypotheses_hold() {
        report.hessenberg_defect = Some(two_norm(&dense.tril(-2)));
    }
    report
}

/// Normalized backward errors of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub norm_a: f64,
    pub eps_p: f64,
    pub eps_b: f64,
    pub eps_h: f64,
}

/// `a` is the represented `n x n` matrix, `prepared` the dense
/// reconstruction after step 2, and `reduced` the final state.
pub fn backward_errors(a: &DenseMatrix, prepared: &DenseMatrix, reduced: &ReductionState) -> Metrics {
    let (n, k, m) = (reduced.n, reduced.k, reduced.m);
    let norm_a = two_norm(a);
    let denom = (m * k) as f64 * norm_a;
    let eps_p = two_norm(&(a - &prepared.submatrix(0, n, 0, n))) / denom;
    let h = reduced.reconstruct();
    let s = reduced.sim.to_dense(m);
    let similar = &(&s.adjoint() * prepared) * &s;
    let eps_b = two_norm(&(&h - &similar)) / denom;
    let eps_h = two_norm(&h.tril(-2)) / denom;
    Metrics { norm_a, eps_p, eps_b, eps_h }
}

/// Economic QR helper kept for callers that need the embedding factors.
pub fn economic_qr(z: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    qr(z, QrMode::Economic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmv::random_block_cmv;
    use crate::densela::{random_gaussian, random_unit_circle};
    use crate::lfr::random_block_hessenberg;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag_problem(n: usize, k: usize, seed: u64) -> Problem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_unit_circle(n, &mut rng);
        let u = random_gaussian(n, k, &mut rng);
        let v = random_gaussian(n, k, &mut rng);
        Problem::Diagonal { d, u, v }
    }

    fn stages(form: &LfrForm) -> Vec<ReductionState> {
        let e = embed(form).unwrap();
        let s0 = ReductionState::from_embedded(&e);
        let s1 = step1(s0.clone()).unwrap();
        let s2 = step2(s1.clone()).unwrap();
        let s3 = step3(s2.clone()).unwrap();
        vec![s0, s1, s2, s3]
    }

    fn check_stages(form: &LfrForm, tol: f64) {
        let st = stages(form);
        let a_hat = st[0].reconstruct();
        let scale = two_norm(&a_hat);
        let m = st[0].m;
        for s in &st {
            let sim = s.sim.to_dense(m);
            let want = &(&sim.adjoint() * &a_hat) * &sim;
            let got = s.reconstruct();
            let err = two_norm(&(&got - &want));
            assert!(err <= tol * scale, "stage {:?}: {err:e}", s.stage);
            assert!(got.submatrix(s.n, m, 0, m).max_abs() <= 1e-12 * scale, "stage {:?}", s.stage);
        }
        let h = st[3].reconstruct();
        assert!(two_norm(&h.tril(-2)) <= 1e-12 * scale * (m * form.k) as f64);
        assert!(st[2].left.is_proper(PROPER_TOL));
        assert!(st[3].left.is_proper(PROPER_TOL));
    }

    #[test]
    fn proper_qr_of_last_unit_vector_is_all_swaps() {
        let m = 6;
        let mut y = DenseMatrix::zeros(m, 1);
        y[(m - 1, 0)] = ONE;
        let (q, t) = proper_full_qr(&y).unwrap();
        for g in q.chains[0].rotations() {
            assert_eq!((g.alpha, g.beta), (ZERO, 1.0));
        }
        let mut e1 = DenseMatrix::zeros(m, 1);
        e1[(0, 0)] = ONE;
        assert!((&t - &e1).max_abs() < 1e-15);
    }

    #[test]
    fn proper_qr_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let y = random_gaussian(10, 2, &mut rng);
        let (q, t) = proper_full_qr(&y).unwrap();
        let mut back = t.clone();
        q.apply_left(&mut back);
        assert!((&back - &y).max_abs() < 1e-12 * 10.0 * two_norm(&y));
        assert!(q.is_proper(PROPER_TOL));
        assert!(t.submatrix(2, 10, 0, 2).max_abs() == 0.0 && t[(1, 0)] == ZERO);
        assert!(proper_full_qr(&DenseMatrix::zeros(5, 1)).is_err());
    }

    #[test]
    fn stages_reconstruct_diagonal_input() {
        for &(n, k, seed) in &[(2, 1, 1), (4, 1, 2), (8, 2, 3), (16, 2, 4), (12, 3, 5), (24, 4, 6)] {
            let (form, _) = diag_problem(n, k, seed).build().unwrap();
            check_stages(&form, 1e-11 * (n + k) as f64 * k as f64);
        }
    }

    #[test]
    fn stages_reconstruct_cmv_and_hessenberg_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        for &(n, k) in &[(4, 1), (8, 2), (13, 2), (20, 4)] {
            let g = random_block_cmv(n, k, &mut rng).unwrap();
            let z = random_gaussian(n, k, &mut rng);
            check_stages(&lfr_from_cmv(&g, &z, k).unwrap(), 1e-11 * (n * k) as f64);
            let h = random_block_hessenberg(n, k, &mut rng).unwrap();
            let z = random_gaussian(n, k, &mut rng);
            check_stages(&lfr_from_block_hessenberg(&h, &z, k).unwrap().form, 1e-11 * (n * k) as f64);
        }
    }

    #[test]
    fn zero_correction_completes() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let g = random_block_cmv(8, 2, &mut rng).unwrap();
        check_stages(&lfr_from_cmv(&g, &DenseMatrix::zeros(8, 2), 2).unwrap(), 1e-10);
    }

    #[test]
    fn step1_keeps_middle_banded() {
        let (form, _) = diag_problem(8, 2, 40).build().unwrap();
        let s1 = step1(ReductionState::from_embedded(&embed(&form).unwrap())).unwrap();
        let mid = s1.middle.to_dense(s1.m);
        assert!(mid.tril(-(2 * 2 + 1)).max_abs() < 1e-13);
    }

    #[test]
    fn step2_leading_block_is_identity() {
        let (form, _) = diag_problem(8, 2, 41).build().unwrap();
        let e = embed(&form).unwrap();
        let s2 = step2(step1(ReductionState::from_embedded(&e)).unwrap()).unwrap();
        let mid = s2.middle.to_dense(s2.m);
        assert!((&mid.submatrix(0, 2, 0, 2) - &DenseMatrix::identity(2)).max_abs() < 1e-14);
        assert!(mid.submatrix(0, 2, 2, s2.m).max_abs() < 1e-14);
        let q = s2.left.to_dense();
        let q0 = ReductionState::from_embedded(&e);
        let (q0, _) = proper_full_qr(&q0.t).unwrap();
        let q0 = q0.to_dense();
        assert!((&q.submatrix(8, 10, 0, 2) - &q0.submatrix(8, 10, 0, 2)).max_abs() < 1e-12);
    }

    #[test]
    fn spectrum_matches_dense_oracle() {
        use crate::densela::{eig_oracle, hessenberg_oracle, spectrum_distance};
        let p = diag_problem(16, 2, 50);
        let (state, _) = reduce_to_hessenberg(&p).unwrap();
        let mut h = state.reconstruct();
        for i in 0..h.rows() {
            for j in 0..h.cols() {
                if i > j + 1 {
                    h[(i, j)] = ZERO;
                }
            }
        }
        let got = eig_oracle(&h).unwrap();
        let mut want = eig_oracle(&hessenberg_oracle(&p.to_dense()).0).unwrap();
        want.extend([ZERO; 2]);
        assert!(spectrum_distance(&got, &want) < 1e-8);
    }

    #[test]
    fn identity_diagonal_reduces() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let p = Problem::Diagonal { d: vec![ONE; 6], u: random_gaussian(6, 1, &mut rng), v: DenseMatrix::zeros(6, 1) };
        let (state, _) = reduce_to_hessenberg(&p).unwrap();
        let h = state.reconstruct();
        assert!(h.tril(-2).max_abs() < 1e-13);
    }

    #[test]
    fn verify_rep1_on_stages() {
        let (form, _) = diag_problem(10, 2, 60).build().unwrap();
        let st = stages(&form);
        let scale = two_norm(&st[0].reconstruct());
        let r0 = verify_rep1(&st[0], scale, 1e-12);
        assert!(!r0.left_proper);
        let r3 = verify_rep1(&st[3], scale, 1e-12);
        assert!(r3.hypotheses_hold(), "{r3:?}");
        assert!(r3.hessenberg_defect.unwrap() < 1e-12 * scale);
    }

    #[test]
    fn wrong_stage_is_rejected() {
        let (form, _) = diag_problem(6, 1, 61).build().unwrap();
        let s0 = ReductionState::from_embedded(&embed(&form).unwrap());
        assert!(step2(s0.clone()).is_err());
        assert!(step3(s0).is_err());
    }
}
