//! Matrix Lie-algebra substrate: `so(n)` and `gl(n)` elements, the trace pairing
//! `<X, Y> = -tr(XY)/2`, block decompositions and seeded sampling.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real `n x n` matrix; used for `gl(n)` elements and intermediate results.
pub type Matrix = DMatrix<f64>;

pub const MAX_DIM: usize = 16;

/// An element of `so(n)`. Construction antisymmetrizes the input as `(a - a^T)/2`,
/// so `m[(i, j)] == -m[(j, i)]` holds bit-exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix(Matrix);

impl SkewMatrix {
    pub fn new(raw: &Matrix) -> Result<Self> {
        if !raw.is_square() {
            return Err(Error::NotSquare { rows: raw.nrows(), cols: raw.ncols() });
        }
        Ok(SkewMatrix(skew_part(raw)))
    }

    pub fn zeros(n: usize) -> Self {
        SkewMatrix(Matrix::zeros(n, n))
    }

    /// `E_i ∧ E_j = e_i e_j^T - e_j e_i^T`.
    pub fn wedge(n: usize, i: usize, j: usize) -> Self {
        SkewMatrix(wedge(n, i, j))
    }

    /// Builds from the strict upper triangle in `(i, j)` lexicographic order.
    pub fn from_upper(n: usize, entries: &[f64]) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if entries.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: entries.len() });
        }
        let mut m = Matrix::zeros(n, n);
        let mut idx = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                m[(i, j)] = entries[idx];
                m[(j, i)] = -entries[idx];
                idx += 1;
            }
        }
        Ok(SkewMatrix(m))
    }

    /// Strict upper triangle in `(i, j)` lexicographic order; these are the
    /// coordinates `M_ij = <M, E_i∧E_j>`.
    pub fn upper(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

impl AsRef<Matrix> for SkewMatrix {
    fn as_ref(&self) -> &Matrix {
        &self.0
    }
}

pub fn wedge(n: usize, i: usize, j: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    m[(i, j)] = 1.0;
    m[(j, i)] = -1.0;
    m
}

pub fn skew_part(x: &Matrix) -> Matrix {
    (x - x.transpose()) * 0.5
}

pub fn sym_part(x: &Matrix) -> Matrix {
    (x + x.transpose()) * 0.5
}

/// `-tr(XY)/2` without shape checks.
pub fn pairing(x: &Matrix, y: &Matrix) -> f64 {
    // tr(XY) = sum_ij X_ij Y_ji
    -0.5 * x.component_mul(&y.transpose()).sum()
}

/// `XY - YX` without shape checks.
pub fn bracket(x: &Matrix, y: &Matrix) -> Matrix {
    x * y - y * x
}

fn check_same(x: &Matrix, y: &Matrix) -> Result<()> {
    if !x.is_square() {
        return Err(Error::NotSquare { rows: x.nrows(), cols: x.ncols() });
    }
    if x.shape() != y.shape() {
        return Err(Error::DimensionMismatch { expected: x.nrows(), found: y.nrows() });
    }
    Ok(())
}

/// The invariant scalar product `<X, Y> = -tr(XY)/2`: positive definite on `so(n)`,
/// negative definite on symmetric matrices.
pub fn scalar_product(x: &Matrix, y: &Matrix) -> Result<f64> {
    check_same(x, y)?;
    Ok(pairing(x, y))
}

pub fn commutator(x: &Matrix, y: &Matrix) -> Result<Matrix> {
    check_same(x, y)?;
    Ok(bracket(x, y))
}

/// Sizes `k_1, ..., k_r` of the diagonal blocks. `SO(n)/SO(k)` style spaces with
/// `sum k_i < n` are written by padding with blocks of size one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct BlockPartition {
    parts: Vec<usize>,
    block_of: Vec<usize>,
    offsets: Vec<usize>,
}

impl TryFrom<Vec<usize>> for BlockPartition {
    type Error = Error;
    fn try_from(parts: Vec<usize>) -> Result<Self> {
        BlockPartition::new(parts)
    }
}

impl From<BlockPartition> for Vec<usize> {
    fn from(p: BlockPartition) -> Self {
        p.parts
    }
}

impl BlockPartition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidPartition("no blocks".into()));
        }
        if let Some(pos) = parts.iter().position(|&k| k == 0) {
            return Err(Error::InvalidPartition(format!("block {pos} has size 0")));
        }
        let n: usize = parts.iter().sum();
        if n > MAX_DIM {
            return Err(Error::InvalidPartition(format!("n = {n} exceeds {MAX_DIM}")));
        }
        let mut block_of = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(parts.len());
        let mut offset = 0;
        for (p, &k) in parts.iter().enumerate() {
            offsets.push(offset);
            block_of.extend(core::iter::repeat_n(p, k));
            offset += k;
        }
        Ok(BlockPartition { parts, block_of, offsets })
    }

    /// `(1, ..., 1)`: trivial isotropy.
    pub fn trivial(n: usize) -> Self {
        BlockPartition::new(alloc::vec![1; n]).expect("valid trivial partition")
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    pub fn blocks(&self) -> usize {
        self.parts.len()
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub fn offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.block_of[i] == self.block_of[j]
    }

    pub fn isotropy_dim(&self) -> usize {
        self.parts.iter().map(|k| k * (k - 1) / 2).sum()
    }

    pub fn transversal_dim(&self) -> usize {
        let n = self.n();
        n * (n - 1) / 2 - self.isotropy_dim()
    }

    pub fn expand(&self, per_block: &[f64]) -> Vec<f64> {
        self.block_of.iter().map(|&p| per_block[p]).collect()
    }
}

/// Block eigenvalue data `(alpha_i, beta_i)` defining `A = diag(a)` and `B = diag(b)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    partition: BlockPartition,
    alphas: Vec<f64>,
    betas: Vec<f64>,
}

impl SpectralParams {
    pub fn new(partition: BlockPartition, alphas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        let r = partition.blocks();
        for (name, v) in [("alphas", &alphas), ("betas", &betas)] {
            if v.len() != r {
                return Err(Error::InvalidParameter(format!(
                    "SpectralParams: {name} has {} entries, partition has {r} blocks",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter(format!("SpectralParams: {name} must be finite")));
            }
        }
        distinct("alpha", &alphas)?;
        distinct("beta", &betas)?;
        Ok(SpectralParams { partition, alphas, betas })
    }

    /// Centred, unit-spaced `alpha_p = p - (r-1)/2` with `beta_p = alpha_p^3 + alpha_p`,
    /// which keeps every Manakov coefficient `(beta_p - beta_q)/(alpha_p - alpha_q)` positive.
    pub fn standard(partition: BlockPartition) -> Self {
        let r = partition.blocks();
        let alphas: Vec<f64> = (0..r).map(|p| p as f64 - (r as f64 - 1.0) / 2.0).collect();
        let betas = alphas.iter().map(|a| a * a * a + a).collect();
        SpectralParams::new(partition, alphas, betas).expect("standard params are distinct")
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    /// Diagonal of `A`.
    pub fn a_diag(&self) -> Vec<f64> {
        self.partition.expand(&self.alphas)
    }

    /// Diagonal of `B`.
    pub fn b_diag(&self) -> Vec<f64> {
        self.partition.expand(&self.betas)
    }
}

fn distinct(which: &'static str, v: &[f64]) -> Result<()> {
    for p in 0..v.len() {
        for q in (p + 1)..v.len() {
            if v[p] == v[q] {
                return Err(Error::RepeatedEigenvalue { which, first: p, second: q });
            }
        }
    }
    Ok(())
}

pub fn diag_matrix(d: &[f64]) -> Matrix {
    Matrix::from_diagonal(&DVector::from_column_slice(d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WedgeTag {
    /// Both indices in block `block`: a vector of `so(n)_A`.
    Isotropy { block: usize },
    /// Indices in blocks `p < q`: a vector of `v_{p,q}`.
    Transversal { p: usize, q: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wedge {
    pub i: usize,
    pub j: usize,
    pub tag: WedgeTag,
}

/// The orthonormal basis `{E_i∧E_j : i < j}` tagged by block membership.
#[derive(Clone, Debug)]
pub struct WedgeBasis {
    n: usize,
    wedges: Vec<Wedge>,
}

impl WedgeBasis {
    pub fn new(partition: &BlockPartition) -> Self {
        let n = partition.n();
        let mut wedges = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                let (p, q) = (partition.block_of(i), partition.block_of(j));
                let tag = if p == q {
                    WedgeTag::Isotropy { block: p }
                } else {
                    WedgeTag::Transversal { p: p.min(q), q: p.max(q) }
                };
                wedges.push(Wedge { i, j, tag });
            }
        }
        WedgeBasis { n, wedges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn wedges(&self) -> &[Wedge] {
        &self.wedges
    }

    pub fn isotropy(&self) -> impl Iterator<Item = &Wedge> {
        self.wedges.iter().filter(|w| matches!(w.tag, WedgeTag::Isotropy { .. }))
    }

    pub fn transversal(&self) -> impl Iterator<Item = &Wedge> {
        self.wedges.iter().filter(|w| matches!(w.tag, WedgeTag::Transversal { .. }))
    }

    pub fn matrix(&self, w: &Wedge) -> Matrix {
        wedge(self.n, w.i, w.j)
    }
}

/// Position of `(i, j)`, `i < j`, in the lexicographic list of wedges of `so(n)`.
pub fn wedge_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Coordinates of a skew matrix in the full wedge basis of `so(n)`.
pub fn so_coords(m: &Matrix) -> DVector<f64> {
    let n = m.nrows();
    let mut v = DVector::zeros(n * n.saturating_sub(1) / 2);
    let mut idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            v[idx] = m[(i, j)];
            idx += 1;
        }
    }
    v
}

pub fn so_from_coords(n: usize, v: &[f64]) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    let mut idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            m[(i, j)] = v[idx];
            m[(j, i)] = -v[idx];
            idx += 1;
        }
    }
    m
}

/// A coordinate subspace of `so(n)`, spanned by a subset of the wedges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WedgeSpan {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl WedgeSpan {
    pub fn so(n: usize) -> Self {
        let pairs = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        WedgeSpan { n, pairs }
    }

    pub fn from_pairs(n: usize, pairs: Vec<(usize, usize)>) -> Self {
        WedgeSpan { n, pairs }
    }

    /// `so(n)_A`, the block-diagonal isotropy algebra.
    pub fn isotropy(partition: &BlockPartition) -> Self {
        Self::filtered(partition, |p, q| p == q)
    }

    /// The orthogonal complement `v` of `so(n)_A`.
    pub fn transversal(partition: &BlockPartition) -> Self {
        Self::filtered(partition, |p, q| p != q)
    }

    /// `h = so(k_1) + ... + so(k_l)`: isotropy of the first `l_split` blocks.
    pub fn head_isotropy(partition: &BlockPartition, l_split: usize) -> Self {
        Self::filtered(partition, |p, q| p == q && p < l_split)
    }

    /// `p = k + v`: orthogonal complement of `head_isotropy`.
    pub fn head_complement(partition: &BlockPartition, l_split: usize) -> Self {
        Self::filtered(partition, |p, q| p != q || p >= l_split)
    }

    /// `so(k_b)` for a single block.
    pub fn block(partition: &BlockPartition, b: usize) -> Self {
        Self::filtered(partition, |p, q| p == q && p == b)
    }

    fn filtered(partition: &BlockPartition, keep: impl Fn(usize, usize) -> bool) -> Self {
        let n = partition.n();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if keep(partition.block_of(i), partition.block_of(j)) {
                    pairs.push((i, j));
                }
            }
        }
        WedgeSpan { n, pairs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn coords(&self, m: &Matrix) -> DVector<f64> {
        DVector::from_iterator(self.pairs.len(), self.pairs.iter().map(|&(i, j)| m[(i, j)]))
    }

    pub fn embed(&self, v: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for (&(i, j), &x) in self.pairs.iter().zip(v) {
            m[(i, j)] = x;
            m[(j, i)] = -x;
        }
        m
    }

    /// Orthogonal projection of a skew matrix onto the span (other entries zeroed).
    pub fn project(&self, m: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.n, self.n);
        for &(i, j) in &self.pairs {
            out[(i, j)] = m[(i, j)];
            out[(j, i)] = m[(j, i)];
        }
        out
    }

    /// Orthonormal basis as columns in full `so(n)` wedge coordinates.
    pub fn basis_columns(&self) -> Matrix {
        let big = self.n * self.n.saturating_sub(1) / 2;
        let mut b = Matrix::zeros(big, self.pairs.len());
        for (c, &(i, j)) in self.pairs.iter().enumerate() {
            b[(wedge_index(self.n, i, j), c)] = 1.0;
        }
        b
    }

    pub fn matrices(&self) -> Vec<Matrix> {
        self.pairs.iter().map(|&(i, j)| wedge(self.n, i, j)).collect()
    }
}

/// Splits `M` into its `so(n)_A` and `v` parts; the two parts sum to `M` exactly.
pub fn project(m: &SkewMatrix, partition: &BlockPartition) -> Result<(SkewMatrix, SkewMatrix)> {
    if m.n() != partition.n() {
        return Err(Error::DimensionMismatch { expected: partition.n(), found: m.n() });
    }
    let n = m.n();
    let mut iso = Matrix::zeros(n, n);
    let mut v = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if partition.same_block(i, j) {
                iso[(i, j)] = m.as_matrix()[(i, j)];
            } else {
                v[(i, j)] = m.as_matrix()[(i, j)];
            }
        }
    }
    Ok((SkewMatrix(iso), SkewMatrix(v)))
}

/// Where a sampled point lives.
#[derive(Clone, Debug, PartialEq)]
pub enum Space {
    So(usize),
    Transversal(BlockPartition),
    Isotropy(BlockPartition),
    /// `k + v`, the complement of the first `l_split` isotropy blocks.
    HeadComplement(BlockPartition, usize),
    Sym(usize),
}

/// Seeded uniform sample: the free coordinates are i.i.d. `U[-1, 1]`.
pub fn sample_generic(seed: u64, space: &Space) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = match space {
        Space::So(n) => WedgeSpan::so(*n),
        Space::Transversal(p) => WedgeSpan::transversal(p),
        Space::Isotropy(p) => WedgeSpan::isotropy(p),
        Space::HeadComplement(p, l) => WedgeSpan::head_complement(p, *l),
        Space::Sym(n) => {
            let n = *n;
            let mut m = Matrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let x: f64 = rng.random_range(-1.0..=1.0);
                    m[(i, j)] = x;
                    m[(j, i)] = x;
                }
            }
            return m;
        }
    };
    let coords: Vec<f64> = (0..span.dim()).map(|_| rng.random_range(-1.0..=1.0)).collect();
    span.embed(&coords)
}

/// Uniform `U[-1,1]` matrix with no structure (for `gl(n)` checks).
pub fn sample_square(seed: u64, n: usize) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0))
}

/// Seed for the `attempt`-th redraw of a point (splitmix64 finalizer).
pub fn derive_seed(seed: u64, attempt: u64) -> u64 {
    if attempt == 0 {
        return seed;
    }
    let mut z = seed ^ attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize, j: usize) -> Matrix {
        wedge(n, i, j)
    }

    #[test]
    fn wedge_normalization_and_orthogonality() {
        assert_eq!(scalar_product(&e(3, 0, 1), &e(3, 0, 1)).unwrap(), 1.0);
        assert_eq!(scalar_product(&e(3, 0, 1), &e(3, 0, 2)).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_pairing_is_negative() {
        let x = diag_matrix(&[1.0, 2.0, 3.0]);
        assert_eq!(scalar_product(&x, &x).unwrap(), -7.0);
    }

    #[test]
    fn commutator_of_wedges() {
        // explicit 3x3 product: [E12, E13] = -E23
        let a = e(3, 0, 1);
        let b = e(3, 0, 2);
        let mut expected = Matrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += a[(i, k)] * b[(k, j)] - b[(i, k)] * a[(k, j)];
                }
                expected[(i, j)] = s;
            }
        }
        let c = commutator(&a, &b).unwrap();
        assert_eq!(c, expected);
        assert_eq!(c, -e(3, 1, 2));
        assert_eq!(commutator(&a, &a).unwrap(), Matrix::zeros(3, 3));
        let d1 = diag_matrix(&[1.0, 2.0, 3.0]);
        let d2 = diag_matrix(&[2.0, 3.0, 5.0]);
        assert_eq!(commutator(&d1, &d2).unwrap(), Matrix::zeros(3, 3));
    }

    #[test]
    fn shape_errors() {
        let a = Matrix::zeros(3, 3);
        let b = Matrix::zeros(4, 4);
        assert!(matches!(scalar_product(&a, &b), Err(Error::DimensionMismatch { .. })));
        assert!(commutator(&a, &b).is_err());
        assert!(SkewMatrix::new(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn skew_construction_is_exact() {
        let raw = sample_square(3, 5);
        let m = SkewMatrix::new(&raw).unwrap();
        let m = m.as_matrix();
        for i in 0..5 {
            assert_eq!(m[(i, i)], 0.0);
            for j in 0..5 {
                assert_eq!(m[(i, j)], -m[(j, i)]);
            }
        }
        // idempotent on skew input
        assert_eq!(SkewMatrix::new(m).unwrap().as_matrix(), m);
    }

    #[test]
    fn sym_and_skew_parts_are_complements() {
        let x = sample_square(11, 6);
        let s = sym_part(&x);
        let k = skew_part(&x);
        assert_eq!(s, s.transpose());
        assert_eq!(k, -k.transpose());
        let diff = (&s + &k - &x).abs().max();
        assert!(diff <= 4.0 * f64::EPSILON, "{diff}");
    }

    #[test]
    fn projection_examples() {
        let p22 = BlockPartition::new(alloc::vec![2, 2]).unwrap();
        let m = SkewMatrix::new(&(e(4, 0, 1) + e(4, 0, 2))).unwrap();
        let (iso, v) = project(&m, &p22).unwrap();
        assert_eq!(iso.as_matrix(), &e(4, 0, 1));
        assert_eq!(v.as_matrix(), &e(4, 0, 2));

        let m = SkewMatrix::new(&sample_generic(5, &Space::So(4))).unwrap();
        let (iso, v) = project(&m, &BlockPartition::new(alloc::vec![4]).unwrap()).unwrap();
        assert_eq!(&iso, &m);
        assert_eq!(v, SkewMatrix::zeros(4));
        let (iso, v) = project(&m, &BlockPartition::trivial(4)).unwrap();
        assert_eq!(iso, SkewMatrix::zeros(4));
        assert_eq!(&v, &m);
    }

    #[test]
    fn projection_is_orthogonal_idempotent_pair() {
        let p = BlockPartition::new(alloc::vec![2, 3, 1]).unwrap();
        for seed in 0..20 {
            let m = SkewMatrix::new(&sample_generic(seed, &Space::So(6))).unwrap();
            let (iso, v) = project(&m, &p).unwrap();
            assert_eq!(iso.as_matrix() + v.as_matrix(), *m.as_matrix());
            assert_eq!(pairing(iso.as_matrix(), v.as_matrix()), 0.0);
            let (iso2, v2) = project(&iso, &p).unwrap();
            assert_eq!(iso2, iso);
            assert_eq!(v2, SkewMatrix::zeros(6));
            let (iso3, v3) = project(&v, &p).unwrap();
            assert_eq!(iso3, SkewMatrix::zeros(6));
            assert_eq!(v3, v);
        }
    }

    #[test]
    fn wedge_basis_counts_and_orthonormality() {
        let p = BlockPartition::new(alloc::vec![3, 2, 2]).unwrap();
        let basis = WedgeBasis::new(&p);
        assert_eq!(basis.isotropy().count(), 3 + 1 + 1);
        assert_eq!(basis.transversal().count(), 3 * 2 + 3 * 2 + 2 * 2);
        assert_eq!(basis.wedges().len(), 21);
        let mats: Vec<Matrix> = basis.wedges().iter().map(|w| basis.matrix(w)).collect();
        for (a, x) in mats.iter().enumerate() {
            for (b, y) in mats.iter().enumerate() {
                let expected = if a == b { 1.0 } else { 0.0 };
                assert_eq!(pairing(x, y), expected);
            }
        }
        for w in basis.isotropy() {
            assert!(p.same_block(w.i, w.j));
        }
    }

    #[test]
    fn wedge_index_matches_lexicographic_order() {
        let n = 7;
        let mut idx = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                assert_eq!(wedge_index(n, i, j), idx);
                idx += 1;
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_structured() {
        let a = sample_generic(42, &Space::So(3));
        let b = sample_generic(42, &Space::So(3));
        assert_eq!(a, b);
        assert_eq!(a, -a.transpose());
        assert_ne!(sample_generic(43, &Space::So(3)), a);

        let p = BlockPartition::new(alloc::vec![2, 2]).unwrap();
        let v = sample_generic(1, &Space::Transversal(p.clone()));
        assert_eq!(v[(0, 1)], 0.0);
        assert_eq!(v[(2, 3)], 0.0);
        assert_ne!(v[(0, 2)], 0.0);
        let iso = sample_generic(1, &Space::Isotropy(p));
        assert_eq!(iso[(0, 2)], 0.0);

        let s = sample_generic(9, &Space::Sym(4));
        assert_eq!(s, s.transpose());
    }

    #[test]
    fn spectral_params_validation() {
        let p = BlockPartition::new(alloc::vec![2, 1]).unwrap();
        let err = SpectralParams::new(p.clone(), alloc::vec![1.0, 1.0], alloc::vec![1.0, 2.0]).unwrap_err();
        assert_eq!(err, Error::RepeatedEigenvalue { which: "alpha", first: 0, second: 1 });
        let sp = SpectralParams::new(p, alloc::vec![1.0, 2.0], alloc::vec![1.0, 3.0]).unwrap();
        assert_eq!(sp.a_diag(), alloc::vec![1.0, 1.0, 2.0]);
        assert_eq!(sp.b_diag(), alloc::vec![1.0, 1.0, 3.0]);
        assert!(BlockPartition::new(alloc::vec![2, 0]).is_err());
        assert!(BlockPartition::new(alloc::vec![]).is_err());
    }

    #[test]
    fn from_upper_roundtrip() {
        let m = SkewMatrix::from_upper(3, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.upper(), alloc::vec![1.0, 2.0, 3.0]);
        assert_eq!(m.as_matrix()[(2, 1)], -3.0);
        assert_eq!(so_coords(m.as_matrix()).as_slice(), &[1.0, 2.0, 3.0]);
    }
}
