//! Sectional operators `Ω = 𝔄(M)` on `so(n)` and the invariant metrics on
//! `SO(n)/SO(k_1)×…×SO(k_r)` they induce.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::defaults::POSITIVITY_TOL;
use crate::error::{Error, Result};
use crate::liealg::{
    bracket, diag_matrix, pairing, wedge_index, BlockPartition, Matrix, SkewMatrix, SpectralParams,
    WedgeSpan,
};
use crate::linalg::{asymmetry, frobenius, min_symmetric_eigenvalue};

/// A linear map `M ↦ Ω` defining a left-invariant (co)metric on `SO(n)`.
pub trait Cometric {
    fn n(&self) -> usize;
    fn omega(&self, m: &Matrix) -> Matrix;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// `ad_A^{-1} ad_B` with all `a_i` distinct.
    Regular,
    /// `ad_A^{-1} ad_B` on `v` plus an interior operator on `so(n)_A`.
    Singular,
    /// `A = B^2`: `Ω_ij = M_ij / (b_i + b_j)`.
    RigidBody,
}

#[derive(Clone, Debug)]
pub struct SectionalOperator {
    kind: OperatorKind,
    params: SpectralParams,
    interior: Option<Matrix>,
    a: Vec<f64>,
    b: Vec<f64>,
    /// `coeff[(i, j)]` multiplies `M_ij` (unused on isotropy entries of a singular operator).
    coeff: Matrix,
    isotropy: WedgeSpan,
}

impl SectionalOperator {
    pub fn regular(params: SpectralParams) -> Result<Self> {
        let a = params.a_diag();
        let b = params.b_diag();
        let coeff = manakov_coefficients(&a, &b)?;
        let isotropy = WedgeSpan::isotropy(params.partition());
        let op = SectionalOperator { kind: OperatorKind::Regular, params, interior: None, a, b, coeff, isotropy };
        op.check_positive()?;
        Ok(op)
    }

    /// `interior` is the operator `𝔅` on `so(n)_A` in the isotropy wedge basis
    /// (lexicographic order); `None` means the identity.
    pub fn singular(params: SpectralParams, interior: Option<Matrix>) -> Result<Self> {
        let partition = params.partition().clone();
        let isotropy = WedgeSpan::isotropy(&partition);
        let d = isotropy.dim();
        let interior = match interior {
            Some(m) => {
                if m.shape() != (d, d) {
                    return Err(Error::DimensionMismatch { expected: d, found: m.nrows() });
                }
                let asym = asymmetry(&m);
                if asym > 1e-12 * m.abs().max().max(1.0) {
                    return Err(Error::NotSymmetric { asymmetry: asym });
                }
                Some(m)
            }
            None => None,
        };
        let a = params.a_diag();
        let b = params.b_diag();
        let n = params.n();
        let mut coeff = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if !partition.same_block(i, j) {
                    coeff[(i, j)] = (b[i] - b[j]) / (a[i] - a[j]);
                }
            }
        }
        let op = SectionalOperator { kind: OperatorKind::Singular, params, interior, a, b, coeff, isotropy };
        op.check_positive()?;
        Ok(op)
    }

    /// Symmetric rigid body with mass tensor `B = diag(beta)` on blocks; `A = B^2`.
    pub fn rigid_body(partition: BlockPartition, betas: Vec<f64>) -> Result<Self> {
        if let Some(p) = betas.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::InvalidParameter(alloc::format!(
                "rigid body requires beta > 0 (block {p} has {})",
                betas[p]
            )));
        }
        let alphas = betas.iter().map(|x| x * x).collect();
        let params = SpectralParams::new(partition, alphas, betas)?;
        let a = params.a_diag();
        let b = params.b_diag();
        let coeff = rigid_body_coefficients(&b)?;
        let isotropy = WedgeSpan::isotropy(params.partition());
        let op = SectionalOperator { kind: OperatorKind::RigidBody, params, interior: None, a, b, coeff, isotropy };
        op.check_positive()?;
        Ok(op)
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn params(&self) -> &SpectralParams {
        &self.params
    }

    pub fn interior(&self) -> Option<&Matrix> {
        self.interior.as_ref()
    }

    pub fn a_diag(&self) -> &[f64] {
        &self.a
    }

    pub fn b_diag(&self) -> &[f64] {
        &self.b
    }

    /// Interior operator is a multiple of the identity (then `so(n)_A` momenta are conserved).
    pub fn has_scalar_interior(&self) -> bool {
        match (&self.kind, &self.interior) {
            (OperatorKind::Singular, Some(m)) => {
                let d = m.nrows();
                d == 0 || (m - Matrix::identity(d, d) * m[(0, 0)]).abs().max() == 0.0
            }
            _ => true,
        }
    }

    /// Matrix of `X ↦ <X, 𝔄(X)>` in the full wedge basis of `so(n)`.
    pub fn form_matrix(&self) -> Matrix {
        let n = self.n();
        let big = n * (n - 1) / 2;
        let mut f = Matrix::zeros(big, big);
        let partition = self.params.partition();
        for i in 0..n {
            for j in (i + 1)..n {
                let idx = wedge_index(n, i, j);
                if self.kind != OperatorKind::Singular || !partition.same_block(i, j) {
                    f[(idx, idx)] = self.coeff[(i, j)];
                }
            }
        }
        if self.kind == OperatorKind::Singular {
            let pairs = self.isotropy.pairs();
            for (r, &(i, j)) in pairs.iter().enumerate() {
                for (c, &(k, l)) in pairs.iter().enumerate() {
                    let value = match &self.interior {
                        Some(m) => m[(r, c)],
                        None => (r == c) as u8 as f64,
                    };
                    f[(wedge_index(n, i, j), wedge_index(n, k, l))] = value;
                }
            }
        }
        f
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_symmetric_eigenvalue(&self.form_matrix())
    }

    fn check_positive(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if self.n() > 1 && !(min > POSITIVITY_TOL) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        Ok(())
    }

    /// The `ad_A^{-1} ad_B` part applied to `M_v` only.
    pub fn transversal_omega(&self, m: &Matrix) -> Matrix {
        let partition = self.params.partition();
        let n = self.n();
        Matrix::from_fn(n, n, |i, j| {
            if partition.same_block(i, j) {
                0.0
            } else {
                self.coeff[(i, j)] * m[(i, j)]
            }
        })
    }

    /// `𝔅` applied to the isotropy part of `M`.
    pub fn interior_omega(&self, m: &Matrix) -> Matrix {
        let coords = self.isotropy.coords(m);
        let image = match &self.interior {
            Some(b) => b * coords,
            None => coords,
        };
        self.isotropy.embed(image.as_slice())
    }
}

impl Cometric for SectionalOperator {
    fn n(&self) -> usize {
        self.a.len()
    }

    fn omega(&self, m: &Matrix) -> Matrix {
        match self.kind {
            OperatorKind::Regular | OperatorKind::RigidBody => self.coeff.component_mul(m),
            OperatorKind::Singular => self.transversal_omega(m) + self.interior_omega(m),
        }
    }
}

fn manakov_coefficients(a: &[f64], b: &[f64]) -> Result<Matrix> {
    let n = a.len();
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if a[i] == a[j] {
                return Err(Error::SingularDenominator { i, j });
            }
            let v = (b[i] - b[j]) / (a[i] - a[j]);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    Ok(c)
}

fn rigid_body_coefficients(b: &[f64]) -> Result<Matrix> {
    let n = b.len();
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = b[i] + b[j];
            if d == 0.0 {
                return Err(Error::SingularDenominator { i: i.min(j), j: i.max(j) });
            }
            c[(i, j)] = 1.0 / d;
        }
    }
    Ok(c)
}

/// `Ω_ij = (b_i - b_j)/(a_i - a_j) M_ij`.
pub fn manakov_omega(m: &SkewMatrix, params: &SpectralParams) -> Result<SkewMatrix> {
    if m.n() != params.n() {
        return Err(Error::DimensionMismatch { expected: params.n(), found: m.n() });
    }
    let c = manakov_coefficients(&params.a_diag(), &params.b_diag())?;
    SkewMatrix::new(&c.component_mul(m.as_matrix()))
}

/// `Ω = ad_A^{-1} ad_B(M_v) + 𝔅(M_{so(n)_A})`.
pub fn singular_omega(m: &SkewMatrix, op: &SectionalOperator) -> Result<SkewMatrix> {
    if op.kind != OperatorKind::Singular {
        return Err(Error::WrongOperatorKind { expected: "singular" });
    }
    if m.n() != op.n() {
        return Err(Error::DimensionMismatch { expected: op.n(), found: m.n() });
    }
    SkewMatrix::new(&op.omega(m.as_matrix()))
}

/// `Ω_ij = M_ij / (b_i + b_j)` for the diagonal `b` of the mass tensor.
pub fn rigid_body_omega(m: &SkewMatrix, b: &[f64]) -> Result<SkewMatrix> {
    if m.n() != b.len() {
        return Err(Error::DimensionMismatch { expected: b.len(), found: m.n() });
    }
    let c = rigid_body_coefficients(b)?;
    SkewMatrix::new(&c.component_mul(m.as_matrix()))
}

/// `‖[M, B] - [Ω, A]‖_F`.
pub fn manakov_residual(m: &Matrix, omega: &Matrix, a: &[f64], b: &[f64]) -> f64 {
    let am = diag_matrix(a);
    let bm = diag_matrix(b);
    frobenius(&(bracket(m, &bm) - bracket(omega, &am)))
}

pub fn check_manakov_condition(m: &SkewMatrix, omega: &SkewMatrix, op: &SectionalOperator) -> f64 {
    manakov_residual(m.as_matrix(), omega.as_matrix(), op.a_diag(), op.b_diag())
}

/// `H = <M, 𝔄(M)>/2`.
pub fn hamiltonian_of<C: Cometric + ?Sized>(op: &C, m: &Matrix) -> f64 {
    0.5 * pairing(m, &op.omega(m))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpec {
    /// The metric induced by `<·,·>` on `v`.
    Normal { partition: BlockPartition },
    /// Submersion of the singular Manakov metric with `𝔅 = Id`.
    SubmersionAB { params: SpectralParams },
    /// `<·, 𝔍 ·>` on `so(n-k)` plus `kappa <·,·>` on `v`, for `V(n, k) = SO(n)/SO(k)`.
    /// `interior` is given in the wedge basis of `so(n-k)`.
    Stiefel { n: usize, k: usize, interior: Vec<Vec<f64>>, kappa: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockCoefficient {
    pub p: usize,
    pub q: usize,
    pub value: f64,
}

/// Coefficients of a metric on each `v_{p,q}`, plus the interior form on a
/// factor of the isotropy (Stiefel only).
#[derive(Clone, Debug, PartialEq)]
pub struct MetricTable {
    pub partition: BlockPartition,
    pub transversal: Vec<BlockCoefficient>,
    /// `(block, form)` with the form in that block's wedge basis.
    pub interior: Option<(usize, Matrix)>,
}

impl MetricTable {
    pub fn is_normal(&self) -> bool {
        self.transversal.iter().all(|c| c.value == 1.0)
            && self.interior.as_ref().is_none_or(|(_, m)| *m == Matrix::identity(m.nrows(), m.ncols()))
    }
}

impl MetricSpec {
    pub fn stiefel(n: usize, k: usize, interior: &Matrix, kappa: f64) -> Self {
        let rows = interior.row_iter().map(|r| r.iter().copied().collect()).collect();
        MetricSpec::Stiefel { n, k, interior: rows, kappa }
    }

    pub fn partition(&self) -> Result<BlockPartition> {
        match self {
            MetricSpec::Normal { partition } => Ok(partition.clone()),
            MetricSpec::SubmersionAB { params } => Ok(params.partition().clone()),
            MetricSpec::Stiefel { n, k, .. } => {
                if *k == 0 || k >= n {
                    return Err(Error::InvalidParameter(alloc::format!("Stiefel needs 0 < k < n (k = {k}, n = {n})")));
                }
                BlockPartition::new(vec![*k, n - k])
            }
        }
    }

    /// Momenta of the geodesic flow: `v`, or `so(n-k) + v` for Stiefel metrics.
    pub fn momentum_space(&self) -> Result<WedgeSpan> {
        let partition = self.partition()?;
        Ok(match self {
            MetricSpec::Stiefel { .. } => WedgeSpan::head_complement(&partition, 1),
            _ => WedgeSpan::transversal(&partition),
        })
    }

    fn stiefel_interior(&self) -> Result<Option<Matrix>> {
        let MetricSpec::Stiefel { n, k, interior, kappa } = self else {
            return Ok(None);
        };
        let m = n - k;
        let d = m * m.saturating_sub(1) / 2;
        if interior.len() != d || interior.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: interior.len() });
        }
        if !(*kappa > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("kappa must be positive (got {kappa})")));
        }
        let j = Matrix::from_fn(d, d, |r, c| interior[r][c]);
        let asym = asymmetry(&j);
        if asym > 1e-12 * j.abs().max().max(1.0) {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        let min = min_symmetric_eigenvalue(&j);
        if d > 0 && !(min > POSITIVITY_TOL) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        Ok(Some(j))
    }

    pub fn coefficients(&self) -> Result<MetricTable> {
        let partition = self.partition()?;
        let r = partition.blocks();
        let mut transversal = Vec::new();
        let mut interior = None;
        match self {
            MetricSpec::Normal { .. } => {
                for p in 0..r {
                    for q in (p + 1)..r {
                        transversal.push(BlockCoefficient { p, q, value: 1.0 });
                    }
                }
            }
            MetricSpec::SubmersionAB { params } => {
                let (al, be) = (params.alphas(), params.betas());
                for p in 0..r {
                    for q in (p + 1)..r {
                        let value = (al[p] - al[q]) / (be[p] - be[q]);
                        if !(value > POSITIVITY_TOL) {
                            return Err(Error::NotPositiveDefinite { min_eigenvalue: value });
                        }
                        transversal.push(BlockCoefficient { p, q, value });
                    }
                }
            }
            MetricSpec::Stiefel { kappa, .. } => {
                let j = self.stiefel_interior()?.expect("stiefel");
                transversal.push(BlockCoefficient { p: 0, q: 1, value: *kappa });
                interior = Some((1, j));
            }
        }
        Ok(MetricTable { partition, transversal, interior })
    }

    /// The inverse (momentum-to-velocity) map of the metric, lifted to `so(n)`.
    pub fn cometric(&self) -> Result<MetricOperator> {
        let table = self.coefficients()?;
        let partition = table.partition.clone();
        let n = partition.n();
        let mut coeff = Matrix::from_element(n, n, 1.0);
        for c in &table.transversal {
            for i in 0..n {
                for j in 0..n {
                    let (bi, bj) = (partition.block_of(i), partition.block_of(j));
                    if (bi, bj) == (c.p, c.q) || (bi, bj) == (c.q, c.p) {
                        coeff[(i, j)] = 1.0 / c.value;
                    }
                }
            }
        }
        let interior = match table.interior {
            Some((block, form)) => {
                let inverse = form.clone().try_inverse().ok_or(Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
                Some((WedgeSpan::block(&partition, block), inverse))
            }
            None => None,
        };
        Ok(MetricOperator { n, coeff, interior })
    }
}

/// Compiled cometric of a [`MetricSpec`].
#[derive(Clone, Debug)]
pub struct MetricOperator {
    n: usize,
    coeff: Matrix,
    interior: Option<(WedgeSpan, Matrix)>,
}

impl Cometric for MetricOperator {
    fn n(&self) -> usize {
        self.n
    }

    fn omega(&self, m: &Matrix) -> Matrix {
        let mut out = self.coeff.component_mul(m);
        if let Some((span, inverse)) = &self.interior {
            let image: DVector<f64> = inverse * span.coords(m);
            out = &out - span.project(&out) + span.embed(image.as_slice());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{sample_generic, wedge, Space};

    fn params(parts: Vec<usize>, a: Vec<f64>, b: Vec<f64>) -> SpectralParams {
        SpectralParams::new(BlockPartition::new(parts).unwrap(), a, b).unwrap()
    }

    fn skew(m: Matrix) -> SkewMatrix {
        SkewMatrix::new(&m).unwrap()
    }

    #[test]
    fn manakov_omega_examples() {
        let p = params(vec![1, 1, 1], vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 5.0]);
        let om = manakov_omega(&skew(wedge(3, 0, 1)), &p).unwrap();
        assert_eq!(om.as_matrix(), &wedge(3, 0, 1));

        let same = params(vec![1, 1, 1], vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]);
        let m = skew(sample_generic(3, &Space::So(3)));
        assert_eq!(manakov_omega(&m, &same).unwrap(), m);

        let sq = params(vec![1, 1, 1], vec![1.0, 2.0, 3.0], vec![1.0, 4.0, 9.0]);
        let m = skew(wedge(3, 0, 2));
        let om = manakov_omega(&m, &sq).unwrap();
        assert_eq!(om.as_matrix()[(0, 2)], 4.0);
    }

    #[test]
    fn manakov_omega_rejects_repeated_a() {
        let p = params(vec![2, 1], vec![1.0, 2.0], vec![1.0, 3.0]);
        let m = skew(sample_generic(1, &Space::So(3)));
        assert_eq!(manakov_omega(&m, &p).unwrap_err(), Error::SingularDenominator { i: 0, j: 1 });
        assert!(SectionalOperator::regular(p).is_err());
    }

    #[test]
    fn singular_omega_examples() {
        let p = params(vec![2, 1], vec![1.0, 2.0], vec![1.0, 3.0]);
        let op = SectionalOperator::singular(p, None).unwrap();
        let om = singular_omega(&skew(wedge(3, 0, 1)), &op).unwrap();
        assert_eq!(om.as_matrix(), &wedge(3, 0, 1));
        let om = singular_omega(&skew(wedge(3, 0, 2)), &op).unwrap();
        assert_eq!(om.as_matrix(), &(wedge(3, 0, 2) * 2.0));

        let normal = params(vec![2, 2], vec![1.0, 2.0], vec![1.0, 2.0]);
        let op = SectionalOperator::singular(normal, None).unwrap();
        let m = skew(sample_generic(8, &Space::So(4)));
        assert_eq!(singular_omega(&m, &op).unwrap(), m);
    }

    #[test]
    fn singular_rejects_indefinite_interior() {
        let p = params(vec![2, 1], vec![1.0, 2.0], vec![1.0, 3.0]);
        let bad = Matrix::from_element(1, 1, -1.0);
        assert!(matches!(
            SectionalOperator::singular(p.clone(), Some(bad)),
            Err(Error::NotPositiveDefinite { .. })
        ));
        // negative v coefficient: beta decreasing while alpha increasing
        let p = params(vec![2, 1], vec![1.0, 2.0], vec![3.0, 1.0]);
        assert!(SectionalOperator::singular(p, None).is_err());
    }

    #[test]
    fn rigid_body_omega_examples() {
        let b = [1.0, 1.0, 2.0];
        let om = rigid_body_omega(&skew(wedge(3, 0, 1)), &b).unwrap();
        assert_eq!(om.as_matrix()[(0, 1)], 0.5);
        let om = rigid_body_omega(&skew(wedge(3, 0, 2)), &b).unwrap();
        assert_eq!(om.as_matrix()[(0, 2)], 1.0 / 3.0);
        assert_eq!(
            rigid_body_omega(&skew(wedge(2, 0, 1)), &[1.0, -1.0]).unwrap_err(),
            Error::SingularDenominator { i: 0, j: 1 }
        );
    }

    #[test]
    fn rigid_body_inverse_relation() {
        let b = [0.7, 0.7, 1.3, 2.1, 2.1];
        let bm = diag_matrix(&b);
        for seed in 0..10 {
            let m = skew(sample_generic(seed, &Space::So(5)));
            let om = rigid_body_omega(&m, &b).unwrap();
            let back = &bm * om.as_matrix() + om.as_matrix() * &bm;
            assert!((back - m.as_matrix()).abs().max() <= 1e-13);
        }
    }

    #[test]
    fn manakov_condition_examples() {
        let p = params(vec![1, 1, 1, 1], vec![-1.0, 0.5, 1.0, 2.0], vec![0.1, 0.7, 1.5, 4.0]);
        let op = SectionalOperator::regular(p).unwrap();
        let m = skew(sample_generic(4, &Space::So(4)));
        let om = skew(op.omega(m.as_matrix()));
        assert!(check_manakov_condition(&m, &om, &op) <= 1e-12);
        assert!(check_manakov_condition(&m, &m, &op) > 1e-3);
        let z = SkewMatrix::zeros(4);
        assert_eq!(check_manakov_condition(&z, &z, &op), 0.0);
    }

    #[test]
    fn metric_coefficient_examples() {
        let spec = MetricSpec::SubmersionAB { params: params(vec![1, 2], vec![1.0, 2.0], vec![1.0, 3.0]) };
        let t = spec.coefficients().unwrap();
        assert_eq!(t.transversal, vec![BlockCoefficient { p: 0, q: 1, value: 0.5 }]);

        let spec = MetricSpec::SubmersionAB { params: params(vec![1, 2, 3], vec![1.0, 2.0, 4.0], vec![1.0, 2.0, 4.0]) };
        assert!(spec.coefficients().unwrap().is_normal());

        let spec = MetricSpec::stiefel(5, 2, &Matrix::identity(3, 3), 1.0);
        let t = spec.coefficients().unwrap();
        assert!(t.is_normal());
        let normal = MetricSpec::Normal { partition: BlockPartition::new(vec![2, 3]).unwrap() };
        assert_eq!(normal.coefficients().unwrap().transversal, t.transversal);

        let bad = MetricSpec::SubmersionAB { params: params(vec![1, 2], vec![1.0, 2.0], vec![3.0, 1.0]) };
        assert!(matches!(bad.coefficients(), Err(Error::NotPositiveDefinite { .. })));
        let bad = MetricSpec::stiefel(4, 2, &Matrix::identity(1, 1), 0.0);
        assert!(bad.coefficients().is_err());
    }

    #[test]
    fn stiefel_cometric_blocks() {
        let chi = 2.0;
        let kappa = 0.5;
        let spec = MetricSpec::stiefel(5, 2, &(Matrix::identity(3, 3) * chi), kappa);
        let op = spec.cometric().unwrap();
        let m = sample_generic(2, &Space::So(5));
        let om = op.omega(&m);
        // so(2) head block untouched, so(3) tail block scaled by 1/chi, v by 1/kappa
        assert_eq!(om[(0, 1)], m[(0, 1)]);
        assert!((om[(2, 4)] - m[(2, 4)] / chi).abs() < 1e-15);
        assert!((om[(0, 3)] - m[(0, 3)] / kappa).abs() < 1e-15);
        assert!((&om + om.transpose()).abs().max() == 0.0);
    }

    #[test]
    fn hamiltonian_examples() {
        let m = sample_generic(6, &Space::So(4));
        let normal = MetricSpec::Normal { partition: BlockPartition::trivial(4) }.cometric().unwrap();
        assert!((hamiltonian_of(&normal, &m) - 0.5 * pairing(&m, &m)).abs() < 1e-15);

        let p = params(vec![1, 1, 1], vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 5.0]);
        let op = SectionalOperator::regular(p).unwrap();
        // c_12 = 1, c_13 = 3/2
        assert_eq!(hamiltonian_of(&op, &wedge(3, 0, 2)), 0.75);
        assert_eq!(hamiltonian_of(&op, &Matrix::zeros(3, 3)), 0.0);
    }
}
