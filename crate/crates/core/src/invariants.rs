//! Polynomial integral families on `so(n)`, `v`, `p` and `gl(n)`, their gradients
//! under `<X, Y> = -tr(XY)/2`, and the Poisson brackets they are tested against.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::defaults::{BOLSINOV_LAMBDA_SEED, NORMALIZATION_GUARD};
use crate::error::{Error, Result};
use crate::liealg::{bracket, diag_matrix, pairing, skew_part, sym_part, BlockPartition, Matrix, WedgeSpan};
use crate::linalg::frobenius;
use crate::math::powi;

/// `(M + λA)^k = Σ_s λ^s P[k][s]` for `k = 0..=kmax`, `A = diag(a)`.
pub fn power_table(m: &Matrix, a: &[f64], kmax: usize) -> Vec<Vec<Matrix>> {
    let n = m.nrows();
    let mut table: Vec<Vec<Matrix>> = Vec::with_capacity(kmax + 1);
    table.push(vec![Matrix::identity(n, n)]);
    for k in 0..kmax {
        let prev = &table[k];
        let mut next = Vec::with_capacity(k + 2);
        for s in 0..=(k + 1) {
            let mut p = if s <= k { &prev[s] * m } else { Matrix::zeros(n, n) };
            if s >= 1 {
                let q = &prev[s - 1];
                for c in 0..n {
                    for r in 0..n {
                        p[(r, c)] += q[(r, c)] * a[c];
                    }
                }
            }
            next.push(p);
        }
        table.push(next);
    }
    table
}

/// `p_{k,s}` = coefficient of `λ^s` in `tr(M + λA)^k`; rows `k = 0..=kmax`, columns `s = 0..=k`.
pub fn eval_manakov_coeffs(m: &Matrix, a: &[f64], kmax: usize) -> Vec<Vec<f64>> {
    power_table(m, a, kmax).iter().map(|row| row.iter().map(|p| p.trace()).collect()).collect()
}

/// Coefficient of `λ^s` in `d/dt (M + tX + λA)^{k}` at `t = 0`.
fn power_derivative(table: &[Vec<Matrix>], x: &Matrix, k: usize, s: usize) -> Matrix {
    let n = x.nrows();
    let mut out = Matrix::zeros(n, n);
    if k == 0 {
        return out;
    }
    for j in 0..k {
        let right = k - 1 - j;
        for s1 in 0..=j.min(s) {
            let s2 = s - s1;
            if s2 > right {
                continue;
            }
            out += &table[j][s1] * x * &table[right][s2];
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MemberTag {
    /// `p_{k,s}`.
    L { k: usize, s: usize },
    /// `tr(M (λI + A)^{-1})^{2k}`.
    J { k: usize, lambda: f64 },
    /// `<M, E_i ∧ E_j>`.
    S { i: usize, j: usize },
    /// `p_{k,s}` of the diagonal block `block` with that factor's own parameters.
    FactorL { block: usize, k: usize, s: usize },
    /// `tr(λM + P + λ²A)^k` on `gl(n)`, `X = M + P`.
    Casimir { lambda: f64, k: usize },
    /// `tr(X + R)^k` on `gl(n)` for the family's fixed shift `R`.
    ShiftedTrace { k: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Carrier {
    So(usize),
    /// A coordinate subspace of `so(n)` such as `v` or `p = k + v`.
    Span(WedgeSpan),
    Gl(usize),
}

impl Carrier {
    pub fn n(&self) -> usize {
        match self {
            Carrier::So(n) | Carrier::Gl(n) => *n,
            Carrier::Span(s) => s.n(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Carrier::So(n) => n * (n - 1) / 2,
            Carrier::Span(s) => s.dim(),
            Carrier::Gl(n) => n * n,
        }
    }

    fn is_skew(&self) -> bool {
        !matches!(self, Carrier::Gl(_))
    }

    fn restrict(&self, g: Matrix) -> Matrix {
        match self {
            Carrier::Span(s) => s.project(&g),
            _ => g,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Factor {
    offset: usize,
    size: usize,
    a: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegralFamily {
    carrier: Carrier,
    a: Vec<f64>,
    factors: Vec<Factor>,
    shift: Option<Matrix>,
    members: Vec<MemberTag>,
}

/// `p_{k,s}` with `k - s` odd vanishes on skew matrices and is left out.
fn manakov_tags(n: usize) -> impl Iterator<Item = MemberTag> {
    (2..=n).flat_map(|k| (0..=(k - 2)).filter(move |s| (k - s) % 2 == 0).map(move |s| MemberTag::L { k, s }))
}

impl IntegralFamily {
    pub fn empty(carrier: Carrier, a: Vec<f64>) -> Self {
        IntegralFamily { carrier, a, factors: Vec::new(), shift: None, members: Vec::new() }
    }

    /// `p_{k,s}`, `k = 2..n`, `s = 0..k-2` with `k - s` even, on the given carrier
    /// (`a` is the diagonal of `A`).
    pub fn manakov(a: &[f64], carrier: Carrier) -> Self {
        let members = manakov_tags(a.len()).collect();
        IntegralFamily { carrier, a: a.to_vec(), factors: Vec::new(), shift: None, members }
    }

    /// `tr M^{2k}`, `k = 1..n/2`.
    pub fn casimirs(n: usize) -> Self {
        let members = (1..=n / 2).map(|k| MemberTag::L { k: 2 * k, s: 0 }).collect();
        IntegralFamily { carrier: Carrier::So(n), a: vec![0.0; n], factors: Vec::new(), shift: None, members }
    }

    pub fn from_members(carrier: Carrier, a: Vec<f64>, members: Vec<MemberTag>) -> Result<Self> {
        let mut fam = Self::empty(carrier, a);
        for m in members {
            fam.push(m)?;
        }
        Ok(fam)
    }

    pub fn push(&mut self, tag: MemberTag) -> Result<()> {
        let n = self.carrier.n();
        let gl = !self.carrier.is_skew();
        let ok = match &tag {
            MemberTag::L { k, s } => !gl && *k >= 1 && s <= k,
            MemberTag::J { k, lambda } => {
                if let Some(index) = self.a.iter().position(|&a| a + lambda == 0.0) {
                    return Err(Error::Pole { lambda: *lambda, index });
                }
                !gl && *k >= 1
            }
            MemberTag::S { i, j } => !gl && i < j && *j < n,
            MemberTag::FactorL { block, k, s } => {
                !gl && s <= k && self.factors.get(*block).is_some_and(|f| *k <= f.size)
            }
            MemberTag::Casimir { k, .. } => gl && *k >= 1,
            MemberTag::ShiftedTrace { k } => gl && self.shift.is_some() && *k >= 1,
        };
        if !ok {
            return Err(Error::CarrierMismatch);
        }
        self.members.push(tag);
        Ok(())
    }

    /// Appends the linear forms `<M, E_i ∧ E_j>` over the wedges of `span`.
    pub fn with_linear_forms(mut self, span: &WedgeSpan) -> Self {
        self.members.extend(span.pairs().iter().map(|&(i, j)| MemberTag::S { i, j }));
        self
    }

    /// Appends `J(k, λ)`, `k = 1..n/2`, for every `λ`.
    pub fn with_bolsinov(mut self, lambdas: &[f64]) -> Result<Self> {
        let n = self.carrier.n();
        for &lambda in lambdas {
            for k in 1..=n / 2 {
                self.push(MemberTag::J { k, lambda })?;
            }
        }
        Ok(self)
    }

    /// Appends a Manakov family on each `so(k_b)` factor for blocks `b` in `blocks`,
    /// with diagonal parameters `1, 2, ..., k_b` on that factor.
    pub fn with_factor_manakov(mut self, partition: &BlockPartition, blocks: core::ops::Range<usize>) -> Self {
        for b in blocks {
            let size = partition.parts()[b];
            if size < 2 {
                continue;
            }
            let index = self.factors.len();
            self.factors.push(Factor {
                offset: partition.offset(b),
                size,
                a: (1..=size).map(|j| j as f64).collect(),
            });
            for tag in manakov_tags(size) {
                if let MemberTag::L { k, s } = tag {
                    self.members.push(MemberTag::FactorL { block: index, k, s });
                }
            }
        }
        self
    }

    /// Pencil Casimirs `f_{λ,k}` on `gl(n)`.
    pub fn pencil_casimirs(a: &[f64], lambdas: &[f64], ks: core::ops::RangeInclusive<usize>) -> Self {
        let members = lambdas
            .iter()
            .flat_map(|&lambda| ks.clone().map(move |k| MemberTag::Casimir { lambda, k }))
            .collect();
        IntegralFamily { carrier: Carrier::Gl(a.len()), a: a.to_vec(), factors: Vec::new(), shift: None, members }
    }

    /// `tr(X + R)^k` on `gl(n)` for `k` in `ks`.
    pub fn shifted_traces(shift: Matrix, ks: core::ops::RangeInclusive<usize>) -> Self {
        let n = shift.nrows();
        let members = ks.map(|k| MemberTag::ShiftedTrace { k }).collect();
        IntegralFamily { carrier: Carrier::Gl(n), a: vec![0.0; n], factors: Vec::new(), shift: Some(shift), members }
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn members(&self) -> &[MemberTag] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Concatenation; both families must share carrier and `A`.
    pub fn union(mut self, other: &IntegralFamily) -> Result<Self> {
        let uses_a = other.members.iter().any(|m| matches!(m, MemberTag::L { .. } | MemberTag::J { .. } | MemberTag::Casimir { .. }));
        if self.carrier != other.carrier || (uses_a && self.a != other.a) || (self.shift.is_some() && other.shift.is_some()) {
            return Err(Error::CarrierMismatch);
        }
        let shift_base = self.factors.len();
        self.factors.extend(other.factors.iter().cloned());
        if self.shift.is_none() {
            self.shift = other.shift.clone();
        }
        for tag in &other.members {
            self.members.push(match *tag {
                MemberTag::FactorL { block, k, s } => MemberTag::FactorL { block: block + shift_base, k, s },
                ref t => t.clone(),
            });
        }
        Ok(self)
    }

    fn check_point(&self, x: &Matrix) -> Result<()> {
        let n = self.carrier.n();
        if x.shape() != (n, n) {
            return Err(Error::DimensionMismatch { expected: n, found: x.nrows() });
        }
        Ok(())
    }

    fn kmax_l(&self) -> usize {
        self.members.iter().map(|m| if let MemberTag::L { k, .. } = m { *k } else { 0 }).max().unwrap_or(0)
    }

    fn factor_tables(&self, x: &Matrix) -> Vec<Vec<Vec<Matrix>>> {
        self.factors
            .iter()
            .map(|f| power_table(&x.view((f.offset, f.offset), (f.size, f.size)).into_owned(), &f.a, f.size))
            .collect()
    }

    fn resolvent(&self, lambda: f64) -> Vec<f64> {
        self.a.iter().map(|a| 1.0 / (lambda + a)).collect()
    }

    pub fn values(&self, x: &Matrix) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let table = power_table(x, &self.a, self.kmax_l());
        let factors = self.factor_tables(x);
        Ok(self
            .members
            .iter()
            .map(|tag| match *tag {
                MemberTag::L { k, s } => table[k][s].trace(),
                MemberTag::J { k, lambda } => j_value(x, &self.resolvent(lambda), k),
                MemberTag::S { i, j } => x[(i, j)],
                MemberTag::FactorL { block, k, s } => factors[block][k][s].trace(),
                MemberTag::Casimir { lambda, k } => casimir_gl_eval(x, &self.a, lambda, k),
                MemberTag::ShiftedTrace { k } => {
                    let y = x + self.shift.as_ref().expect("validated on push");
                    matrix_power(&y, k).trace()
                }
            })
            .collect())
    }

    /// Gradients under `<·,·>`, restricted to the carrier.
    pub fn gradients(&self, x: &Matrix) -> Result<Vec<Matrix>> {
        self.check_point(x)?;
        let n = x.nrows();
        let table = power_table(x, &self.a, self.kmax_l());
        let factors = self.factor_tables(x);
        Ok(self
            .members
            .iter()
            .map(|tag| {
                let g = match *tag {
                    MemberTag::L { k, s } => {
                        if s >= k {
                            Matrix::zeros(n, n)
                        } else {
                            skew_part(&table[k - 1][s]) * (-2.0 * k as f64)
                        }
                    }
                    MemberTag::J { k, lambda } => j_gradient(x, &self.resolvent(lambda), k),
                    MemberTag::S { i, j } => crate::liealg::wedge(n, i, j),
                    MemberTag::FactorL { block, k, s } => {
                        let f = &self.factors[block];
                        let mut g = Matrix::zeros(n, n);
                        if s < k {
                            let local = skew_part(&factors[block][k - 1][s]) * (-2.0 * k as f64);
                            g.view_mut((f.offset, f.offset), (f.size, f.size)).copy_from(&local);
                        }
                        g
                    }
                    MemberTag::Casimir { lambda, k } => casimir_gl_gradient(x, &self.a, lambda, k),
                    MemberTag::ShiftedTrace { k } => {
                        let y = x + self.shift.as_ref().expect("validated on push");
                        matrix_power(&y, k - 1) * (-2.0 * k as f64)
                    }
                };
                self.carrier.restrict(g)
            })
            .collect())
    }

    /// `Hess f(x) · v` for member `index` (carriers inside `so(n)` only).
    pub fn hessian_vector(&self, index: usize, x: &Matrix, v: &Matrix) -> Result<Matrix> {
        self.check_point(x)?;
        if !self.carrier.is_skew() {
            return Err(Error::Unsupported("Hessian-vector products on gl(n)"));
        }
        let n = x.nrows();
        let v = self.carrier.restrict(v.clone());
        let tag = self.members.get(index).ok_or(Error::CarrierMismatch)?;
        let h = match *tag {
            MemberTag::L { k, s } => {
                if s >= k || k < 2 {
                    Matrix::zeros(n, n)
                } else {
                    let table = power_table(x, &self.a, k);
                    skew_part(&power_derivative(&table, &v, k - 1, s)) * (-2.0 * k as f64)
                }
            }
            MemberTag::J { k, lambda } => j_hessian_vector(x, &self.resolvent(lambda), k, &v),
            MemberTag::S { .. } => Matrix::zeros(n, n),
            MemberTag::FactorL { block, k, s } => {
                let f = &self.factors[block];
                let mut h = Matrix::zeros(n, n);
                if s < k && k >= 2 {
                    let xb = x.view((f.offset, f.offset), (f.size, f.size)).into_owned();
                    let vb = v.view((f.offset, f.offset), (f.size, f.size)).into_owned();
                    let table = power_table(&xb, &f.a, k);
                    let local = skew_part(&power_derivative(&table, &vb, k - 1, s)) * (-2.0 * k as f64);
                    h.view_mut((f.offset, f.offset), (f.size, f.size)).copy_from(&local);
                }
                h
            }
            MemberTag::Casimir { .. } | MemberTag::ShiftedTrace { .. } => {
                return Err(Error::Unsupported("Hessian-vector products on gl(n)"))
            }
        };
        Ok(self.carrier.restrict(h))
    }
}

fn matrix_power(y: &Matrix, k: usize) -> Matrix {
    let mut p = Matrix::identity(y.nrows(), y.ncols());
    for _ in 0..k {
        p = &p * y;
    }
    p
}

fn scale_columns(m: &Matrix, c: &[f64]) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * c[j])
}

fn scale_rows(m: &Matrix, c: &[f64]) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * c[i])
}

fn j_value(m: &Matrix, c: &[f64], k: usize) -> f64 {
    matrix_power(&scale_columns(m, c), 2 * k).trace()
}

/// `-4k skew(C (MC)^{2k-1})`.
fn j_gradient(m: &Matrix, c: &[f64], k: usize) -> Matrix {
    let mc = scale_columns(m, c);
    skew_part(&scale_rows(&matrix_power(&mc, 2 * k - 1), c)) * (-4.0 * k as f64)
}

fn j_hessian_vector(m: &Matrix, c: &[f64], k: usize, v: &Matrix) -> Matrix {
    let mc = scale_columns(m, c);
    let vc = scale_columns(v, c);
    let top = 2 * k - 1;
    let powers: Vec<Matrix> = (0..top).map(|j| matrix_power(&mc, j)).collect();
    let mut d = Matrix::zeros(m.nrows(), m.ncols());
    for j in 0..top {
        d += &powers[j] * &vc * &powers[top - 1 - j];
    }
    skew_part(&scale_rows(&d, c)) * (-4.0 * k as f64)
}

/// `tr(M (λI + A)^{-1})^{2k}`.
pub fn j_family_eval(m: &Matrix, a: &[f64], k: usize, lambda: f64) -> Result<f64> {
    if let Some(index) = a.iter().position(|&x| x + lambda == 0.0) {
        return Err(Error::Pole { lambda, index });
    }
    let c: Vec<f64> = a.iter().map(|x| 1.0 / (lambda + x)).collect();
    Ok(j_value(m, &c, k))
}

/// `2n` distinct spectral parameters drawn from a fixed seed, each at least
/// `0.1 · min gap` away from every `±α_i` and from each other.
pub fn default_bolsinov_lambdas(alphas: &[f64], n: usize) -> Vec<f64> {
    let mut sorted: Vec<f64> = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let gap = if gap.is_finite() { gap } else { 1.0 };
    let margin = 0.1 * gap;
    let reach = alphas.iter().fold(0.0f64, |acc, a| acc.max(a.abs())) + 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(BOLSINOV_LAMBDA_SEED);
    let mut out: Vec<f64> = Vec::with_capacity(2 * n);
    while out.len() < 2 * n {
        let lambda: f64 = rng.random_range(-reach..=reach);
        let clear = alphas.iter().all(|a| (lambda - a).abs() >= margin && (lambda + a).abs() >= margin)
            && out.iter().all(|l| (lambda - l).abs() >= margin);
        if clear {
            out.push(lambda);
        }
    }
    out
}

/// `f_{λ,k}(X) = tr(λM + P + λ²A)^k` with `M = skew(X)`, `P = sym(X)`.
pub fn casimir_gl_eval(x: &Matrix, a: &[f64], lambda: f64, k: usize) -> f64 {
    matrix_power(&pencil_argument(x, a, lambda), k).trace()
}

fn pencil_argument(x: &Matrix, a: &[f64], lambda: f64) -> Matrix {
    skew_part(x) * lambda + sym_part(x) + diag_matrix(a) * (lambda * lambda)
}

/// `-2k (λ skew(W) + sym(W))`, `W = (λM + P + λ²A)^{k-1}`.
fn casimir_gl_gradient(x: &Matrix, a: &[f64], lambda: f64, k: usize) -> Matrix {
    let w = matrix_power(&pencil_argument(x, a, lambda), k - 1);
    (skew_part(&w) * lambda + sym_part(&w)) * (-2.0 * k as f64)
}

/// `|f_{λ,k}(M) - λ^k tr(M + λA)^k|` for skew `M`.
pub fn restriction_check(m: &Matrix, a: &[f64], lambda: f64, k: usize) -> Residual {
    let lhs = casimir_gl_eval(m, a, lambda, k);
    let l = m + diag_matrix(a) * lambda;
    let rhs = powi(lambda, k as i32) * matrix_power(&l, k).trace();
    let size = (frobenius(m) * lambda.abs() + lambda * lambda * frobenius(&diag_matrix(a))).max(1.0);
    Residual { absolute: (lhs - rhs).abs(), scale: powi(size, k as i32) }
}

/// An absolute residual together with the magnitude it should be compared to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub absolute: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        self.absolute / self.scale.max(NORMALIZATION_GUARD)
    }
}

/// `det(M(A + αI)^{-1} + βI)` against `det(M + βA + αβI) / det(αI + A)`.
pub fn det_identity_check(m: &Matrix, a: &[f64], alpha: f64, beta: f64) -> Result<Residual> {
    if let Some(index) = a.iter().position(|&x| x + alpha == 0.0) {
        return Err(Error::Pole { lambda: alpha, index });
    }
    let n = m.nrows();
    let shifted: Vec<f64> = a.iter().map(|x| x + alpha).collect();
    let inverse: Vec<f64> = shifted.iter().map(|x| 1.0 / x).collect();
    let lhs = (scale_columns(m, &inverse) + Matrix::identity(n, n) * beta).determinant();
    let det_shift: f64 = shifted.iter().product();
    let rhs = (m + diag_matrix(&shifted) * beta).determinant() / det_shift;
    let width = frobenius(m) + beta.abs() * shifted.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let scale = (powi(width, n as i32) / det_shift.abs()).max(1.0);
    Ok(Residual { absolute: (lhs - rhs).abs(), scale })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BracketKind {
    /// `-<M, [ξ, η]>`.
    LiePoisson,
    /// `-<M, ξAη - ηAξ>`.
    FrozenA,
    /// `l1 Λ1 + l2 Λ2` on `gl(n)`.
    PencilGL { l1: f64, l2: f64 },
    /// Lie-Poisson on gradients projected onto a subspace (the `j_M` space).
    Reduced,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bracket {
    kind: BracketKind,
    a: Matrix,
    /// Orthonormal columns in `so(n)` wedge coordinates.
    reduce: Option<Matrix>,
}

impl Bracket {
    pub fn new(kind: BracketKind, a: &[f64]) -> Result<Self> {
        match kind {
            BracketKind::PencilGL { l1, l2 } if l1 == 0.0 && l2 == 0.0 => {
                Err(Error::InvalidParameter("pencil bracket needs (l1, l2) != (0, 0)".into()))
            }
            BracketKind::Reduced => Err(Error::InvalidParameter("reduced bracket needs a subspace".into())),
            _ => Ok(Bracket { kind, a: diag_matrix(a), reduce: None }),
        }
    }

    pub fn lie_poisson(n: usize) -> Self {
        Bracket { kind: BracketKind::LiePoisson, a: Matrix::zeros(n, n), reduce: None }
    }

    /// Lie-Poisson on gradients projected onto the span of `basis` (orthonormal wedge coordinates).
    pub fn reduced(n: usize, basis: Matrix) -> Self {
        Bracket { kind: BracketKind::Reduced, a: Matrix::zeros(n, n), reduce: Some(basis) }
    }

    pub fn kind(&self) -> BracketKind {
        self.kind
    }

    fn accepts(&self, carrier: &Carrier) -> bool {
        matches!(self.kind, BracketKind::PencilGL { .. }) != carrier.is_skew()
    }

    pub fn project(&self, g: &Matrix) -> Matrix {
        match &self.reduce {
            Some(q) => {
                let c = crate::liealg::so_coords(g);
                let p = q * (q.transpose() * c);
                crate::liealg::so_from_coords(g.nrows(), p.as_slice())
            }
            None => g.clone(),
        }
    }

    /// The Lie bracket `c` with `Λ(ξ, η)|_X = -<X, c(ξ, η)> - (shift term)`.
    pub fn structure(&self, z1: &Matrix, z2: &Matrix) -> Matrix {
        match self.kind {
            BracketKind::LiePoisson | BracketKind::Reduced => bracket(z1, z2),
            BracketKind::FrozenA => z1 * &self.a * z2 - z2 * &self.a * z1,
            BracketKind::PencilGL { l1, l2 } => {
                let (x1, y1) = (skew_part(z1), sym_part(z1));
                let (x2, y2) = (skew_part(z2), sym_part(z2));
                let c1 = bracket(&x1, &x2) + bracket(&x1, &y2) + bracket(&y1, &x2);
                c1 * l1 + bracket(z1, z2) * l2
            }
        }
    }

    pub fn eval(&self, x: &Matrix, g1: &Matrix, g2: &Matrix) -> f64 {
        match self.kind {
            BracketKind::Reduced => -pairing(x, &bracket(&self.project(g1), &self.project(g2))),
            BracketKind::PencilGL { l2, .. } => {
                -pairing(x, &self.structure(g1, g2)) - l2 * pairing(&self.a, &bracket(g1, g2))
            }
            _ => -pairing(x, &self.structure(g1, g2)),
        }
    }

    /// `co(h, x)` with `<x, c(y, h)> = <y, co(h, x)>` for all `y`.
    fn coadjoint(&self, h: &Matrix, x: &Matrix) -> Matrix {
        match self.kind {
            BracketKind::FrozenA => &self.a * h * x - x * h * &self.a,
            _ => bracket(h, x),
        }
    }
}

/// `|b| / (‖∇f‖ ‖∇g‖ ‖x‖ + guard)` with Frobenius norms.
pub fn normalized(b: f64, g1: &Matrix, g2: &Matrix, x: &Matrix) -> f64 {
    b.abs() / (frobenius(g1) * frobenius(g2) * frobenius(x) + NORMALIZATION_GUARD)
}

/// Pairwise brackets `{f_i, f_j}` at `x`.
pub fn involution_matrix(family: &IntegralFamily, x: &Matrix, br: &Bracket) -> Result<Matrix> {
    if !br.accepts(family.carrier()) {
        return Err(Error::CarrierMismatch);
    }
    let grads = family.gradients(x)?;
    let m = grads.len();
    let mut out = Matrix::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let b = br.eval(x, &grads[i], &grads[j]);
            out[(i, j)] = b;
            out[(j, i)] = -b;
        }
    }
    Ok(out)
}

/// Largest normalized bracket between members `rows` and members `cols` of `family`.
pub fn max_normalized_bracket(
    family: &IntegralFamily,
    x: &Matrix,
    br: &Bracket,
    rows: &[usize],
    cols: &[usize],
) -> Result<f64> {
    if !br.accepts(family.carrier()) {
        return Err(Error::CarrierMismatch);
    }
    let grads: Vec<Matrix> = family.gradients(x)?.iter().map(|g| br.project(g)).collect();
    let mut worst: f64 = 0.0;
    for &i in rows {
        for &j in cols {
            if i != j {
                worst = worst.max(normalized(br.eval(x, &grads[i], &grads[j]), &grads[i], &grads[j], x));
            }
        }
    }
    Ok(worst)
}

/// Bracket of two members.
pub fn member_bracket(family: &IntegralFamily, i: usize, j: usize, x: &Matrix, br: &Bracket) -> Result<f64> {
    if !br.accepts(family.carrier()) {
        return Err(Error::CarrierMismatch);
    }
    let grads = family.gradients(x)?;
    let (gi, gj) = (grads.get(i).ok_or(Error::CarrierMismatch)?, grads.get(j).ok_or(Error::CarrierMismatch)?);
    Ok(br.eval(x, gi, gj))
}

/// Normalized Jacobi sum `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}` for three members
/// under a Lie-Poisson or frozen-argument bracket on `so(n)`.
pub fn jacobi_residual(family: &IntegralFamily, idx: [usize; 3], x: &Matrix, br: &Bracket) -> Result<f64> {
    if !matches!(br.kind, BracketKind::LiePoisson | BracketKind::FrozenA) || !family.carrier().is_skew() {
        return Err(Error::CarrierMismatch);
    }
    let grads = family.gradients(x)?;
    let g = |i: usize| grads.get(idx[i]).cloned().ok_or(Error::CarrierMismatch);
    let gs = [g(0)?, g(1)?, g(2)?];
    // ∇{g,h} = -c(G,H) - Hess_g(co(H,x)) + Hess_h(co(G,x))
    // returns the gradient and the sum of the norms of its three pieces
    let inner_gradient = |p: usize, q: usize| -> Result<(Matrix, f64)> {
        let c = br.structure(&gs[p], &gs[q]);
        let hp = family.hessian_vector(idx[p], x, &br.coadjoint(&gs[q], x))?;
        let hq = family.hessian_vector(idx[q], x, &br.coadjoint(&gs[p], x))?;
        let size = frobenius(&c) + frobenius(&hp) + frobenius(&hq);
        Ok((-c - hp + hq, size))
    };
    let mut sum = 0.0;
    let mut scale = 0.0;
    for (f, p, q) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let (inner, size) = inner_gradient(p, q)?;
        sum += br.eval(x, &gs[f], &inner);
        scale += frobenius(&gs[f]) * size * frobenius(x);
    }
    Ok(sum.abs() / (scale + NORMALIZATION_GUARD))
}

/// Jacobi identity of the structure bracket on three elements (exact for linear functions).
pub fn structure_jacobi(br: &Bracket, z: [&Matrix; 3]) -> f64 {
    let c = |p: &Matrix, q: &Matrix| br.structure(p, q);
    let sum = c(z[0], &c(z[1], z[2])) + c(z[1], &c(z[2], z[0])) + c(z[2], &c(z[0], z[1]));
    frobenius(&sum) / (frobenius(z[0]) * frobenius(z[1]) * frobenius(z[2]) + NORMALIZATION_GUARD)
}

/// Largest normalized Lie-Poisson bracket between `ℒ(A)` and `𝒥(A_J)` members at `m`.
pub fn cross_commutation_check(m: &Matrix, a: &[f64], a_j: &[f64], lambdas: &[f64]) -> Result<f64> {
    let n = m.nrows();
    let l = IntegralFamily::manakov(a, Carrier::So(n));
    let j = IntegralFamily::empty(Carrier::So(n), a_j.to_vec()).with_bolsinov(lambdas)?;
    let gl = l.gradients(m)?;
    let gj = j.gradients(m)?;
    let br = Bracket::lie_poisson(n);
    let mut worst: f64 = 0.0;
    for f in &gl {
        for g in &gj {
            worst = worst.max(normalized(br.eval(m, f, g), f, g, m));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{sample_generic, sample_square, so_from_coords, wedge, Space, SpectralParams};

    fn m123() -> Matrix {
        so_from_coords(3, &[1.0, 2.0, 3.0])
    }

    #[test]
    fn manakov_coefficient_examples() {
        let p = eval_manakov_coeffs(&m123(), &[1.0, 2.0, 3.0], 3);
        assert_eq!(p[2][0], -28.0);
        assert_eq!(p[2][1], 0.0);
        assert_eq!(p[3][0], 0.0);
        let q = eval_manakov_coeffs(&(-m123()), &[1.0, 2.0, 3.0], 2);
        assert_eq!(q[2][0], p[2][0]);
    }

    #[test]
    fn gradient_of_quadratic_casimir() {
        let m = sample_generic(3, &Space::So(4));
        let fam = IntegralFamily::casimirs(4);
        let g = fam.gradients(&m).unwrap();
        assert!((&g[0] + &m * 4.0).abs().max() < 1e-14);
    }

    #[test]
    fn gradient_of_linear_form() {
        let fam = IntegralFamily::empty(Carrier::So(4), vec![0.0; 4]).with_linear_forms(&WedgeSpan::from_pairs(
            4,
            vec![(1, 3)],
        ));
        let g = fam.gradients(&sample_generic(1, &Space::So(4))).unwrap();
        assert_eq!(g[0], wedge(4, 1, 3));
    }

    #[test]
    fn structure_constants_of_so3() {
        let fam = IntegralFamily::empty(Carrier::So(3), vec![0.0; 3])
            .with_linear_forms(&WedgeSpan::from_pairs(3, vec![(0, 1), (0, 2)]));
        let m = m123();
        let b = member_bracket(&fam, 0, 1, &m, &Bracket::lie_poisson(3)).unwrap();
        assert_eq!(b, m[(1, 2)]);
        assert_eq!(member_bracket(&fam, 0, 0, &m, &Bracket::lie_poisson(3)).unwrap(), 0.0);
    }

    #[test]
    fn quadratic_casimir_commutes_with_everything() {
        let n = 5;
        let a = SpectralParams::standard(BlockPartition::trivial(n)).a_diag();
        let fam = IntegralFamily::casimirs(n).union(&IntegralFamily::empty(Carrier::So(n), vec![0.0; n])).unwrap();
        let other = IntegralFamily::manakov(&a, Carrier::So(n));
        let m = sample_generic(2, &Space::So(n));
        let gc = fam.gradients(&m).unwrap();
        let br = Bracket::lie_poisson(n);
        for g in other.gradients(&m).unwrap() {
            assert!(normalized(br.eval(&m, &gc[0], &g), &gc[0], &g, &m) < 1e-14);
        }
    }

    #[test]
    fn j_family_examples() {
        let v = j_family_eval(&m123(), &[1.0, 2.0, 3.0], 1, 0.0).unwrap();
        assert!((v + 20.0 / 3.0).abs() < 1e-14);
        assert_eq!(j_family_eval(&Matrix::zeros(3, 3), &[1.0, 2.0, 3.0], 1, 0.5).unwrap(), 0.0);
        assert_eq!(j_family_eval(&m123(), &[1.0, 2.0, 3.0], 1, -2.0).unwrap_err(), Error::Pole { lambda: -2.0, index: 1 });
        let m = sample_generic(5, &Space::So(4));
        let lambda = 1e6;
        let scaled = j_family_eval(&m, &[1.0, 2.0, 3.0, 4.0], 2, lambda).unwrap() * powi(lambda, 4);
        let exact = eval_manakov_coeffs(&m, &[0.0; 4], 4)[4][0];
        assert!(((scaled - exact) / exact).abs() < 1e-4);
    }

    #[test]
    fn default_lambdas_avoid_poles() {
        let alphas = [-1.0, 0.0, 1.0];
        let l = default_bolsinov_lambdas(&alphas, 4);
        assert_eq!(l.len(), 8);
        for x in &l {
            assert!(alphas.iter().all(|a| (x - a).abs() >= 0.1 && (x + a).abs() >= 0.1));
        }
        assert_eq!(l, default_bolsinov_lambdas(&alphas, 4));
    }

    #[test]
    fn casimir_restriction_examples() {
        let x = sample_square(4, 4);
        let p = sym_part(&x);
        assert!((casimir_gl_eval(&x, &[1.0, 2.0, 3.0, 4.0], 0.0, 3) - matrix_power(&p, 3).trace()).abs() < 1e-13);
        let m = sample_generic(4, &Space::So(4));
        let r = restriction_check(&m, &[1.0, 2.0, 3.0, 4.0], 0.7, 4);
        assert!(r.relative() < 1e-14);
    }

    #[test]
    fn det_identity_closed_form() {
        let (m, a1, a2, alpha, beta) = (1.3, 0.4, 2.5, 0.9, -0.6);
        let mm = so_from_coords(2, &[m]);
        let r = det_identity_check(&mm, &[a1, a2], alpha, beta).unwrap();
        let closed = (beta * beta * (a1 + alpha) * (a2 + alpha) + m * m) / ((a1 + alpha) * (a2 + alpha));
        let lhs = (so_from_coords(2, &[m]) * diag_matrix(&[1.0 / (a1 + alpha), 1.0 / (a2 + alpha)])
            + Matrix::identity(2, 2) * beta)
            .determinant();
        assert!((lhs - closed).abs() < 1e-14);
        assert!(r.relative() < 1e-14);
        let z = det_identity_check(&Matrix::zeros(3, 3), &[1.0, 2.0, 3.0], 0.5, 2.0).unwrap();
        assert!(z.absolute < 1e-14);
        assert!(det_identity_check(&Matrix::zeros(2, 2), &[1.0, 2.0], -1.0, 2.0).is_err());
    }

    #[test]
    fn pencil_rejects_zero() {
        assert!(Bracket::new(BracketKind::PencilGL { l1: 0.0, l2: 0.0 }, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn carrier_mismatch() {
        let fam = IntegralFamily::pencil_casimirs(&[1.0, 2.0, 3.0], &[0.5], 1..=3);
        let x = sample_square(1, 3);
        assert_eq!(involution_matrix(&fam, &x, &Bracket::lie_poisson(3)).unwrap_err(), Error::CarrierMismatch);
        let mut so = IntegralFamily::empty(Carrier::So(3), vec![1.0, 2.0, 3.0]);
        assert!(so.push(MemberTag::Casimir { lambda: 1.0, k: 2 }).is_err());
        assert!(so.push(MemberTag::J { k: 1, lambda: -3.0 }).is_err());
    }
}
