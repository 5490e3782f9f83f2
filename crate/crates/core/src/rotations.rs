//! Givens rotations with a real nonnegative sine, rotation chains, and
//! products of chains (`k`-Hessenberg unitary matrices) with the moves that
//! keep them factored: fusion, turnover and passing a rotation through a
//! whole product.
//!
//! Rows are 0-based. A rotation at `row` p acts on rows `p` and `p + 1` as
//! `[[alpha, -beta], [beta, conj(alpha)]]`.

use std::cell::Cell;
use std::collections::VecDeque;

use crate::densela::{DenseMatrix, C64, ONE, ZERO};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Givens {
    pub alpha: C64,
    pub beta: f64,
    pub row: usize,
}

impl Givens {
    pub fn new(alpha: C64, beta: f64, row: usize) -> Self {
        Givens { alpha, beta, row }
    }

    pub fn identity(row: usize) -> Self {
        Givens { alpha: ONE, beta: 0.0, row }
    }

    /// Swaps rows `row` and `row + 1` up to a sign.
    pub fn swap(row: usize) -> Self {
        Givens { alpha: ZERO, beta: 1.0, row }
    }

    pub fn is_identity(&self) -> bool {
        self.alpha == ONE && self.beta == 0.0
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        let b = C64::new(self.beta, 0.0);
        [[self.alpha, -b], [b, self.alpha.conj()]]
    }

    /// `|alpha|^2 + beta^2 - 1`.
    pub fn norm_defect(&self) -> f64 {
        (self.alpha.norm_sqr() + self.beta * self.beta - 1.0).abs()
    }

    fn renormalized(alpha: C64, beta: f64, row: usize) -> Self {
        let s = alpha.norm().hypot(beta);
        if s == 0.0 {
            Givens::identity(row)
        } else {
            Givens { alpha: alpha / s, beta: beta / s, row }
        }
    }

    /// `M <- G M`.
    pub fn apply_left(&self, m: &mut DenseMatrix) {
        let b = C64::new(self.beta, 0.0);
        m.combine_rows(self.row, self.row + 1, self.alpha, -b, b, self.alpha.conj());
    }

    /// `M <- G^H M`.
    pub fn apply_left_adjoint(&self, m: &mut DenseMatrix) {
        let b = C64::new(self.beta, 0.0);
        m.combine_rows(self.row, self.row + 1, self.alpha.conj(), b, -b, self.alpha);
    }

    /// `M <- M G`.
    pub fn apply_right(&self, m: &mut DenseMatrix) {
        let b = C64::new(self.beta, 0.0);
        m.combine_cols(self.row, self.row + 1, self.alpha, -b, b, self.alpha.conj());
    }

    /// `M <- M G^H`.
    pub fn apply_right_adjoint(&self, m: &mut DenseMatrix) {
        let b = C64::new(self.beta, 0.0);
        m.combine_cols(self.row, self.row + 1, self.alpha.conj(), b, -b, self.alpha);
    }

    pub fn to_dense(&self, m: usize) -> DenseMatrix {
        let mut d = DenseMatrix::identity(m);
        self.apply_left(&mut d);
        d
    }

    /// Moves a diagonal across the rotation: `diag(d1, d2) G = G' diag(d2, d1)`
    /// and `G diag(d1, d2) = diag(d2, d1) G'` with the same `G'`.
    fn rephase(&mut self, d1: C64, d2: C64) {
        self.alpha *= d1 * d2.conj();
    }
}

thread_local! {
    static TURNOVERS: Cell<u64> = const { Cell::new(0) };
    static FUSIONS: Cell<u64> = const { Cell::new(0) };
}

/// Turnovers and fusions performed on this thread so far.
pub fn op_counts() -> (u64, u64) {
    (TURNOVERS.with(Cell::get), FUSIONS.with(Cell::get))
}

/// Rotation `G` at `row` and `r` with `G^H [a; b] = [r; 0]`.
///
/// `(0, 0)` gives the identity and `r = 0`.
pub fn make_rotation(a: C64, b: C64, row: usize) -> (Givens, C64) {
    let nb = b.norm();
    if nb == 0.0 {
        let na = a.norm();
        if na == 0.0 {
            return (Givens::identity(row), ZERO);
        }
        return (Givens::new(a / na, 0.0, row), C64::new(na, 0.0));
    }
    let na = a.norm();
    let rho = na.hypot(nb);
    let beta = nb / rho;
    let alpha = a * (b.conj() / nb) / rho;
    (Givens::new(alpha, beta, row), b / nb * rho)
}

/// `g1 g2 = g diag(d, conj d)` for two rotations on the same rows.
pub fn fuse(g1: &Givens, g2: &Givens) -> (Givens, C64) {
    assert_eq!(g1.row, g2.row, "fusion needs rotations on the same rows");
    FUSIONS.with(|c| c.set(c.get() + 1));
    let a = g1.alpha * g2.alpha - g1.beta * g2.beta;
    let b = g1.alpha.conj() * g2.beta + g1.beta * g2.alpha;
    let nb = b.norm();
    if nb == 0.0 {
        return (Givens::renormalized(a, 0.0, g1.row), ONE);
    }
    let phi = b / nb;
    (Givens::renormalized(a * phi.conj(), nb, g1.row), phi)
}

fn dense3(gs: &[Givens; 3], base: usize) -> [[C64; 3]; 3] {
    let mut m = [[ZERO; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    for g in gs.iter().rev() {
        let p = g.row - base;
        let [[a, b], [c, d]] = g.matrix();
        for col in 0..3 {
            let x = m[p][col];
            let y = m[p + 1][col];
            m[p][col] = a * x + b * y;
            m[p + 1][col] = c * x + d * y;
        }
    }
    m
}

fn rows_adjoint(m: &mut [[C64; 3]; 3], g: &Givens, p: usize) {
    let [[a, b], [c, d]] = g.matrix();
    for col in 0..3 {
        let x = m[p][col];
        let y = m[p + 1][col];
        m[p][col] = a.conj() * x + c.conj() * y;
        m[p + 1][col] = b.conj() * x + d.conj() * y;
    }
}

/// Refactors `ga(i) gb(i+1) gc(i)` as `x(i+1) y(i) z(i+1)`.
pub fn turnover(ga: &Givens, gb: &Givens, gc: &Givens) -> (Givens, Givens, Givens) {
    let i = ga.row;
    assert!(gb.row == i + 1 && gc.row == i, "turnover expects rows (i, i+1, i)");
    TURNOVERS.with(|c| c.set(c.get() + 1));
    let mut m = dense3(&[*ga, *gb, *gc], i);
    let (x, _) = make_rotation(m[1][0], m[2][0], 1);
    rows_adjoint(&mut m, &x, 1);
    let (y, _) = make_rotation(m[0][0], m[1][0], 0);
    rows_adjoint(&mut m, &y, 0);
    let (mut x, y) = (Givens { row: i + 1, ..x }, Givens { row: i, ..y });
    let n10 = m[2][1];
    if x.beta == 0.0 && y.beta == 0.0 && n10.norm() > 0.0 {
        // first column was a unit vector: x is free to carry the phase of n10
        let psi = n10.conj() / n10.norm();
        x.alpha *= psi;
        let z = Givens::renormalized(m[1][1] * psi.conj(), n10.norm(), i + 1);
        return (x, y, z);
    }
    let z = Givens::renormalized(m[1][1], n10.norm(), i + 1);
    (x, y, z)
}

/// Refactors `gx(i+1) gy(i) gz(i+1)` as `a(i) b(i+1) c(i)`.
///
/// Reversing the three rows maps a rotation to one with conjugated `alpha`
/// on the mirrored rows, up to a sign similarity that cancels in products,
/// so this reduces to [`turnover`].
pub fn turnover_hat(gx: &Givens, gy: &Givens, gz: &Givens) -> (Givens, Givens, Givens) {
    let i = gy.row;
    assert!(gx.row == i + 1 && gz.row == i + 1, "turnover expects rows (i+1, i, i+1)");
    let flip = |g: &Givens| Givens::new(g.alpha.conj(), g.beta, 2 * i + 1 - g.row);
    let (a, b, c) = turnover(&flip(gx), &flip(gy), &flip(gz));
    (flip(&a), flip(&b), flip(&c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainOrder {
    /// `G_start G_{start+1} ... G_end`, upper Hessenberg.
    Ascending,
    /// `G_end ... G_{start+1} G_start`, lower Hessenberg.
    Descending,
}

/// Rotations on consecutive rows `start..=end`, multiplied in `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationChain {
    pub order: ChainOrder,
    pub start: usize,
    rots: VecDeque<Givens>,
}

impl RotationChain {
    pub fn identity(order: ChainOrder, start: usize, end: usize) -> Self {
        RotationChain { order, start, rots: (start..=end).map(Givens::identity).collect() }
    }

    pub fn empty(order: ChainOrder, start: usize) -> Self {
        RotationChain { order, start, rots: VecDeque::new() }
    }

    /// Rotations listed by increasing row.
    pub fn from_rotations(order: ChainOrder, rots: Vec<Givens>) -> Result<Self, Error> {
        let start = rots.first().map_or(0, |g| g.row);
        for (t, g) in rots.iter().enumerate() {
            if g.row != start + t {
                return Err(Error::InvalidArgument("chain rows must be consecutive".into()));
            }
        }
        Ok(RotationChain { order, start, rots: rots.into() })
    }

    pub fn len(&self) -> usize {
        self.rots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rots.is_empty()
    }

    /// Last covered row; meaningless for an empty chain.
    pub fn end(&self) -> usize {
        self.start + self.rots.len() - 1
    }

    pub fn get(&self, row: usize) -> &Givens {
        &self.rots[row - self.start]
    }

    pub fn get_mut(&mut self, row: usize) -> &mut Givens {
        &mut self.rots[row - self.start]
    }

    /// Rotations by increasing row.
    pub fn rotations(&self) -> impl DoubleEndedIterator<Item = &Givens> + '_ {
        self.rots.iter()
    }

    /// Rotations in product order, leftmost first.
    pub fn product_order(&self) -> Vec<Givens> {
        match self.order {
            ChainOrder::Ascending => self.rots.iter().copied().collect(),
            ChainOrder::Descending => self.rots.iter().rev().copied().collect(),
        }
    }

    pub fn pop_front(&mut self) -> Option<Givens> {
        let g = self.rots.pop_front()?;
        self.start += 1;
        Some(g)
    }

    pub fn push_back(&mut self, g: Givens) {
        if self.rots.is_empty() {
            self.start = g.row;
        }
        assert_eq!(g.row, self.start + self.rots.len());
        self.rots.push_back(g);
    }

    pub fn push_front(&mut self, g: Givens) {
        if self.rots.is_empty() {
            self.start = g.row + 1;
        }
        assert_eq!(g.row + 1, self.start);
        self.start = g.row;
        self.rots.push_front(g);
    }

    /// Extends with identities so the chain covers `lo..=hi`.
    pub fn pad(&mut self, lo: usize, hi: usize) {
        if self.rots.is_empty() {
            self.start = lo;
        }
        while self.start > lo {
            self.push_front(Givens::identity(self.start - 1));
        }
        while self.start + self.rots.len() <= hi {
            self.push_back(Givens::identity(self.start + self.rots.len()));
        }
    }

    pub fn apply_left(&self, m: &mut DenseMatrix) {
        for g in self.product_order().iter().rev() {
            g.apply_left(m);
        }
    }

    pub fn apply_left_adjoint(&self, m: &mut DenseMatrix) {
        for g in self.product_order().iter() {
            g.apply_left_adjoint(m);
        }
    }

    pub fn to_dense(&self, m: usize) -> DenseMatrix {
        let mut d = DenseMatrix::identity(m);
        self.apply_left(&mut d);
        d
    }
}

/// Product of chains as a single unitary matrix: `C_0 C_1 ... C_{k-1} D`.
#[derive(Clone, Debug, PartialEq)]
pub struct KHessenbergProduct {
    pub m: usize,
    pub orientation: Orientation,
    pub chains: Vec<RotationChain>,
    pub diag: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Ascending chains, `k`-upper Hessenberg.
    Upper,
    /// Descending chains, `k`-lower Hessenberg.
    Lower,
}

impl Orientation {
    pub fn chain_order(self) -> ChainOrder {
        match self {
            Orientation::Upper => ChainOrder::Ascending,
            Orientation::Lower => ChainOrder::Descending,
        }
    }
}

/// Diagonal being moved rightward through a product, with the window of
/// entries different from one.
struct Drift {
    d: Vec<C64>,
    lo: usize,
    hi: usize,
}

impl Drift {
    fn new(m: usize) -> Self {
        Drift { d: vec![ONE; m], lo: usize::MAX, hi: 0 }
    }

    fn set(&mut self, i: usize, z: C64) {
        self.d[i] = z;
        self.lo = self.lo.min(i);
        self.hi = self.hi.max(i);
    }

    fn is_clean(&self) -> bool {
        self.lo > self.hi
    }

    fn cross(&mut self, g: &mut Givens) -> bool {
        let p = g.row;
        let (d1, d2) = (self.d[p], self.d[p + 1]);
        if d1 != d2 {
            g.rephase(d1, d2);
            self.d[p] = d2;
            self.d[p + 1] = d1;
            self.lo = self.lo.min(p);
            self.hi = self.hi.max(p + 1);
        }
        true
    }

    /// Crosses the rotations of `chain` with rows in `rows` (inclusive),
    /// visiting them in product order.
    fn cross_chain(&mut self, chain: &mut RotationChain, lo_row: usize, hi_row: usize) {
        if chain.is_empty() || self.is_clean() {
            return;
        }
        let lo_row = lo_row.max(chain.start);
        let hi_row = hi_row.min(chain.end());
        if lo_row > hi_row {
            return;
        }
        match chain.order {
            ChainOrder::Ascending => {
                let mut p = lo_row.max(self.lo.saturating_sub(1));
                while p <= hi_row && p <= self.hi {
                    self.cross(chain.get_mut(p));
                    p += 1;
                }
            }
            ChainOrder::Descending => {
                let mut p = hi_row.min(self.hi);
                loop {
                    if p < lo_row || p + 1 < self.lo {
                        break;
                    }
                    self.cross(chain.get_mut(p));
                    if p == 0 {
                        break;
                    }
                    p -= 1;
                }
            }
        }
    }
}

impl KHessenbergProduct {
    pub fn identity(m: usize, orientation: Orientation) -> Self {
        KHessenbergProduct { m, orientation, chains: Vec::new(), diag: vec![ONE; m] }
    }

    pub fn new(m: usize, orientation: Orientation, chains: Vec<RotationChain>, diag: Vec<C64>) -> Result<Self, Error> {
        if diag.len() != m {
            return Err(Error::DimensionMismatch(format!("diagonal of length {} for size {}", diag.len(), m)));
        }
        for c in &chains {
            if c.order != orientation.chain_order() {
                return Err(Error::InvalidArgument("chain order does not match orientation".into()));
            }
            if !c.is_empty() && c.end() + 1 >= m {
                return Err(Error::DimensionMismatch(format!("chain reaches row {} in size {}", c.end() + 1, m)));
            }
        }
        Ok(KHessenbergProduct { m, orientation, chains, diag })
    }

    pub fn k(&self) -> usize {
        self.chains.len()
    }

    /// Pads every chain with identities to cover all rows.
    pub fn pad_full(&mut self) {
        if self.m < 2 {
            return;
        }
        for c in &mut self.chains {
            c.pad(0, self.m - 2);
        }
    }

    pub fn rotation_count(&self) -> usize {
        self.chains.iter().map(RotationChain::len).sum()
    }

    /// `M <- P M`.
    pub fn apply_left(&self, m: &mut DenseMatrix) {
        for i in 0..self.m {
            if self.diag[i] != ONE {
                for z in m.row_mut(i) {
                    *z *= self.diag[i];
                }
            }
        }
        for c in self.chains.iter().rev() {
            c.apply_left(m);
        }
    }

    /// `M <- P^H M`.
    pub fn apply_left_adjoint(&self, m: &mut DenseMatrix) {
        for c in &self.chains {
            c.apply_left_adjoint(m);
        }
        for i in 0..self.m {
            if self.diag[i] != ONE {
                let d = self.diag[i].conj();
                for z in m.row_mut(i) {
                    *z *= d;
                }
            }
        }
    }

    /// `M <- M P`.
    pub fn apply_right(&self, m: &mut DenseMatrix) {
        for c in &self.chains {
            for g in c.product_order() {
                g.apply_right(m);
            }
        }
        for i in 0..m.rows() {
            for j in 0..self.m {
                m[(i, j)] *= self.diag[j];
            }
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::identity(self.m);
        self.apply_left(&mut d);
        d
    }

    /// Factored `P^H`, with the opposite orientation.
    pub fn adjoint(&self) -> KHessenbergProduct {
        // G^H = S G(conj alpha, beta) S with S = diag((-1)^i)
        let order = match self.orientation {
            Orientation::Upper => ChainOrder::Descending,
            Orientation::Lower => ChainOrder::Ascending,
        };
        let chains: Vec<RotationChain> = self
            .chains
            .iter()
            .rev()
            .map(|c| RotationChain {
                order,
                start: c.start,
                rots: c.rots.iter().map(|g| Givens::new(g.alpha.conj(), g.beta, g.row)).collect(),
            })
            .collect();
        let sign = |i: usize| if i.is_multiple_of(2) { ONE } else { -ONE };
        let mut out = KHessenbergProduct {
            m: self.m,
            orientation: match self.orientation {
                Orientation::Upper => Orientation::Lower,
                Orientation::Lower => Orientation::Upper,
            },
            chains,
            diag: (0..self.m).map(sign).collect(),
        };
        let mut drift = Drift::new(self.m);
        for i in 0..self.m {
            drift.set(i, self.diag[i].conj() * sign(i));
        }
        out.drift_from(0, None, drift);
        out
    }

    /// Pushes `drift`, sitting left of chain `j` (after its rotations up to
    /// `skip_row` in product order), to the right end and merges it.
    fn drift_from(&mut self, j: usize, skip_row: Option<usize>, mut drift: Drift) {
        let mut first = true;
        for c in self.chains[j..].iter_mut() {
            if drift.is_clean() {
                break;
            }
            let (lo, hi) = match (first, skip_row, c.order) {
                (true, Some(r), ChainOrder::Ascending) => (r + 1, usize::MAX),
                (true, Some(r), ChainOrder::Descending) => {
                    if r == 0 {
                        first = false;
                        continue;
                    }
                    (0, r - 1)
                }
                _ => (0, usize::MAX),
            };
            first = false;
            drift.cross_chain(c, lo, hi);
        }
        if !drift.is_clean() {
            for i in drift.lo..=drift.hi {
                self.diag[i] *= drift.d[i];
            }
        }
    }

    /// Multiplies a diagonal in from the left: `P <- E P`.
    pub fn absorb_left_diagonal(&mut self, e: &[C64]) {
        let mut drift = Drift::new(self.m);
        for (i, &z) in e.iter().enumerate() {
            if z != ONE {
                drift.set(i, z);
            }
        }
        self.drift_from(0, None, drift);
    }

    fn fused_at(&mut self, j: usize, row: usize, phase: C64) {
        if phase == ONE {
            return;
        }
        let mut drift = Drift::new(self.m);
        drift.set(row, phase);
        drift.set(row + 1, phase.conj());
        self.drift_from(j, Some(row), drift);
    }

    fn fused_right(&mut self, j: usize, row: usize, phase: C64) {
        if phase == ONE {
            return;
        }
        let mut drift = Drift::new(self.m);
        drift.set(row, phase);
        drift.set(row + 1, phase.conj());
        self.drift_from(j + 1, None, drift);
    }

    /// Moves `x P` to `P' x'`: returns `x'` or `None` when `x` was absorbed.
    pub fn pass_from_left(&mut self, x: Givens) -> Result<Option<Givens>, Error> {
        let mut x = x;
        for j in 0..self.chains.len() {
            let c = &mut self.chains[j];
            if c.is_empty() {
                continue;
            }
            let (s, e, p) = (c.start, c.end(), x.row);
            if p > e + 1 || p + 1 < s {
                continue;
            }
            match c.order {
                ChainOrder::Ascending => {
                    if p == s {
                        let (f, ph) = fuse(&x, c.get(p));
                        *c.get_mut(p) = f;
                        self.fused_at(j, p, ph);
                        return Ok(None);
                    } else if s < p && p <= e {
                        let (a, b, cc) = turnover_hat(&x, c.get(p - 1), c.get(p));
                        *c.get_mut(p - 1) = a;
                        *c.get_mut(p) = b;
                        x = cc;
                    } else {
                        return Err(Error::StructureBroken { row: p, start: s, end: e });
                    }
                }
                ChainOrder::Descending => {
                    if p == e {
                        let (f, ph) = fuse(&x, c.get(p));
                        *c.get_mut(p) = f;
                        self.fused_at(j, p, ph);
                        return Ok(None);
                    } else if s <= p && p < e {
                        let (a, b, cc) = turnover(&x, c.get(p + 1), c.get(p));
                        *c.get_mut(p + 1) = a;
                        *c.get_mut(p) = b;
                        x = cc;
                    } else {
                        return Err(Error::StructureBroken { row: p, start: s, end: e });
                    }
                }
            }
        }
        let p = x.row;
        x.rephase(self.diag[p], self.diag[p + 1]);
        self.diag.swap(p, p + 1);
        Ok(Some(x))
    }

    /// Moves `P x` to `x' P'`: returns `x'` or `None` when `x` was absorbed.
    pub fn pass_from_right(&mut self, x: Givens) -> Result<Option<Givens>, Error> {
        let mut x = x;
        let p = x.row;
        x.rephase(self.diag[p], self.diag[p + 1]);
        self.diag.swap(p, p + 1);
        self.pass_left_through(x, self.chains.len())
    }

    /// Moves a rotation sitting right after chain `upto - 1` leftward
    /// through chains `upto - 1, ..., 0`.
    pub fn pass_left_through(&mut self, x: Givens, upto: usize) -> Result<Option<Givens>, Error> {
        let mut x = x;
        for j in (0..upto).rev() {
            let c = &mut self.chains[j];
            if c.is_empty() {
                continue;
            }
            let (s, e, p) = (c.start, c.end(), x.row);
            if p > e + 1 || p + 1 < s {
                continue;
            }
            match c.order {
                ChainOrder::Ascending => {
                    if p == e {
                        let (f, ph) = fuse(c.get(p), &x);
                        *c.get_mut(p) = f;
                        self.fused_right(j, p, ph);
                        return Ok(None);
                    } else if s <= p && p < e {
                        let (a, b, cc) = turnover(c.get(p), c.get(p + 1), &x);
                        *c.get_mut(p) = b;
                        *c.get_mut(p + 1) = cc;
                        x = a;
                    } else {
                        return Err(Error::StructureBroken { row: p, start: s, end: e });
                    }
                }
                ChainOrder::Descending => {
                    if p == s {
                        let (f, ph) = fuse(c.get(p), &x);
                        *c.get_mut(p) = f;
                        self.fused_right(j, p, ph);
                        return Ok(None);
                    } else if s < p && p <= e {
                        let (a, b, cc) = turnover_hat(c.get(p), c.get(p - 1), &x);
                        *c.get_mut(p) = b;
                        *c.get_mut(p - 1) = cc;
                        x = a;
                    } else {
                        return Err(Error::StructureBroken { row: p, start: s, end: e });
                    }
                }
            }
        }
        Ok(Some(x))
    }

    /// Smallest product of betas along the outermost band, zero when the
    /// product is not proper.
    pub fn outer_band_strength(&self) -> f64 {
        let k = self.k();
        let m = self.m;
        if k == 0 || m <= k {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        let beta_at = |c: &RotationChain, row: usize| {
            if c.is_empty() || row < c.start || row > c.end() {
                0.0
            } else {
                c.get(row).beta
            }
        };
        let mut worst = f64::INFINITY;
        for i in 0..m - k {
            let mut prod = 1.0;
            for (j, c) in self.chains.iter().enumerate() {
                let row = match self.orientation {
                    Orientation::Lower => i + j,
                    Orientation::Upper => i + k - 1 - j,
                };
                prod *= beta_at(c, row);
            }
            worst = worst.min(prod);
        }
        worst
    }

    /// Smallest beta among the rotations on the outermost band.
    pub fn min_outer_beta(&self) -> f64 {
        let k = self.k();
        let m = self.m;
        if k == 0 || m <= k {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        let mut worst = f64::INFINITY;
        for i in 0..m - k {
            for (j, c) in self.chains.iter().enumerate() {
                let row = match self.orientation {
                    Orientation::Lower => i + j,
                    Orientation::Upper => i + k - 1 - j,
                };
                let b = if c.is_empty() || row < c.start || row > c.end() { 0.0 } else { c.get(row).beta };
                worst = worst.min(b);
            }
        }
        worst
    }

    /// Every rotation on the outermost band has `beta > tol`.
    pub fn is_proper(&self, tol: f64) -> bool {
        self.min_outer_beta() > tol
    }
}

/// Factors a unitary `k`-Hessenberg matrix into `k` chains.
///
/// For `Upper` the chains ascend and start at rows `k-1, ..., 0`; for
/// `Lower` they descend and start at `0, ..., k-1`.
pub fn factor_banded_unitary(a: &DenseMatrix, k: usize, orientation: Orientation, tol: f64) -> Result<KHessenbergProduct, Error> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", a.rows(), a.cols())));
    }
    let defect = a.unitarity_defect();
    if defect > tol {
        return Err(Error::NotUnitary(defect));
    }
    factor_banded_trusted(a, k, orientation, tol)
}

/// [`factor_banded_unitary`] without the `O(m^3)` unitarity test.
pub(crate) fn factor_banded_trusted(a: &DenseMatrix, k: usize, orientation: Orientation, tol: f64) -> Result<KHessenbergProduct, Error> {
    let m = a.rows();
    match orientation {
        Orientation::Upper => factor_upper(a, k, tol),
        Orientation::Lower => Ok(factor_upper(&a.adjoint(), k, tol)?.adjoint()).inspect(|p| {
            debug_assert_eq!(p.m, m);
        }),
    }
}

fn factor_upper(a: &DenseMatrix, k: usize, tol: f64) -> Result<KHessenbergProduct, Error> {
    let m = a.rows();
    for i in 0..m {
        for j in 0..m {
            if i > j + k && a[(i, j)].norm() > tol {
                return Err(Error::NotKHessenberg(k));
            }
        }
    }
    let mut upper_bw = 0;
    for i in 0..m {
        for j in i..m {
            if a[(i, j)] != ZERO {
                upper_bw = upper_bw.max(j - i);
            }
        }
    }
    let mut w = a.clone();
    // chains[t] collects the rotations at offset t below each column
    let mut chains: Vec<RotationChain> = (0..k).map(|t| RotationChain::empty(ChainOrder::Ascending, t)).collect();
    for col in 0..m.saturating_sub(1) {
        let last = (col + k).min(m - 1);
        for p in (col..last).rev() {
            let (g, _) = make_rotation(w[(p, col)], w[(p + 1, col)], p);
            let hi = (p + 1 + upper_bw + k + 1).min(m);
            let b = C64::new(g.beta, 0.0);
            let (ca, cb, cc, cd) = (g.alpha.conj(), b, -b, g.alpha);
            for c in col..hi {
                let x = w[(p, c)];
                let y = w[(p + 1, c)];
                w[(p, c)] = ca * x + cb * y;
                w[(p + 1, c)] = cc * x + cd * y;
            }
            w[(p + 1, col)] = ZERO;
            chains[p - col].push_back(g);
        }
    }
    let diag: Vec<C64> = (0..m).map(|i| w[(i, i)]).collect();
    let mut chains: Vec<RotationChain> = chains.into_iter().rev().collect();
    for c in chains.iter_mut() {
        if c.is_empty() {
            c.start = 0;
        }
    }
    Ok(KHessenbergProduct { m, orientation: Orientation::Upper, chains, diag })
}

/// Rewrites `H B` as `B' H'` for a chain `H` left of the product `B`.
///
/// Rotations of `H` that reach the edge of `B` are absorbed into it; the
/// rest emerge shifted by `k` rows, so `H'` is `diag(I_k, .)` when `B` is
/// lower and `diag(., I_k)` when `B` is upper.
pub fn pass_chain_left_to_right(h: &RotationChain, b: &mut KHessenbergProduct) -> Result<RotationChain, Error> {
    let mut out: VecDeque<Givens> = VecDeque::new();
    for g in h.product_order().into_iter().rev() {
        if let Some(x) = b.pass_from_left(g)? {
            out.push_front(x);
        }
    }
    collect_chain(h.order, out)
}

/// Rewrites `B H` as `H' B'` for a chain `H` right of the product `B`.
pub fn pass_chain_right_to_left(b: &mut KHessenbergProduct, h: &RotationChain) -> Result<RotationChain, Error> {
    let mut out: Vec<Givens> = Vec::new();
    for g in h.product_order() {
        if let Some(x) = b.pass_from_right(g)? {
            out.push(x);
        }
    }
    collect_chain(h.order, out.into())
}

fn collect_chain(order: ChainOrder, in_product_order: VecDeque<Givens>) -> Result<RotationChain, Error> {
    let mut rots: Vec<Givens> = in_product_order.into();
    if order == ChainOrder::Descending {
        rots.reverse();
    }
    let chain = RotationChain::from_rotations(order, rots)?;
    Ok(chain)
}
