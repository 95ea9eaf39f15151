//! Linear algebra of gradient spans: ddim/dind, skew-orthogonal complements,
//! centralizers, orbit dimensions and the `j_M` spaces.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::invariants::{Bracket, BracketKind, Carrier, IntegralFamily};
use crate::liealg::{bracket, pairing, so_coords, so_from_coords, wedge, BlockPartition, Matrix, WedgeSpan};
use crate::linalg::{column_space, containment_residual, frobenius, null_space, span_union, RankDecision};

/// Poisson tensor `W_ab = -<x, c(e_a, e_b)>` in the wedge basis of `so(n)`.
pub fn poisson_tensor(x: &Matrix, br: &Bracket) -> Matrix {
    let n = x.nrows();
    let basis: Vec<Matrix> = WedgeSpan::so(n).matrices();
    let d = basis.len();
    let mut w = Matrix::zeros(d, d);
    for a in 0..d {
        for b in (a + 1)..d {
            let v = -pairing(x, &br.structure(&basis[a], &basis[b]));
            w[(a, b)] = v;
            w[(b, a)] = -v;
        }
    }
    w
}

/// Matrix of `Y ↦ [x, Y]` on `so(n)` in wedge coordinates.
pub fn ad_matrix(x: &Matrix) -> Matrix {
    let n = x.nrows();
    let d = n * (n - 1) / 2;
    let mut m = Matrix::zeros(d, d);
    for (c, (i, j)) in WedgeSpan::so(n).pairs().iter().enumerate() {
        m.set_column(c, &so_coords(&bracket(x, &wedge(n, *i, *j))));
    }
    m
}

/// Orthonormal basis (wedge coordinates) of the centralizer of `x` in `so(n)`.
pub fn centralizer(x: &Matrix, factor: f64) -> (Matrix, RankDecision) {
    null_space(&ad_matrix(x), frobenius(x), factor)
}

/// `dim O(x) = dim so(n) - dim so(n)_x`.
pub fn orbit_dimension(x: &Matrix, factor: f64) -> (usize, RankDecision) {
    let d = crate::linalg::numerical_rank(&ad_matrix(x), frobenius(x), factor);
    (d.rank, d)
}

/// `j_x = {η ∈ carrier : pr_h [x, η] = 0}` as orthonormal columns in wedge coordinates.
pub fn j_space(x: &Matrix, carrier: &WedgeSpan, h: &WedgeSpan, factor: f64) -> (Matrix, RankDecision) {
    let c = carrier.basis_columns();
    if h.dim() == 0 {
        let rank = crate::linalg::numerical_rank(&Matrix::zeros(0, c.ncols()), frobenius(x), factor);
        return (c, rank);
    }
    let t = h.basis_columns().transpose() * ad_matrix(x) * &c;
    let (null, decision) = null_space(&t, frobenius(x), factor);
    (c * null, decision)
}

/// `j_M` for `M ∈ v` and the isotropy of `partition`.
pub fn j_space_transversal(m: &Matrix, partition: &BlockPartition, factor: f64) -> (Matrix, RankDecision) {
    j_space(m, &WedgeSpan::transversal(partition), &WedgeSpan::isotropy(partition), factor)
}

/// Gradient coordinates as columns, each scaled to unit norm (zero columns kept).
pub fn normalized_gradients(grads: &[Matrix], d: usize) -> Matrix {
    let mut g = Matrix::zeros(d, grads.len());
    for (c, m) in grads.iter().enumerate() {
        let v = so_coords(m);
        let norm = v.norm();
        if norm > 0.0 {
            g.set_column(c, &(v / norm));
        }
    }
    g
}

/// Everything measured about a gradient span `F` inside a carrier with Poisson tensor `W`.
#[derive(Clone, Debug)]
pub struct SpanAnalysis {
    pub carrier_dim: usize,
    pub ddim: usize,
    pub dind: usize,
    /// `dim carrier - rank W|carrier`.
    pub corank: usize,
    /// Orthonormal basis of `F` in carrier coordinates.
    pub f_basis: Matrix,
    /// `F^Λ = {ξ : Λ(F, ξ) = 0}` in carrier coordinates.
    pub complement: Matrix,
    pub kernel: Matrix,
    /// Largest sine measuring `F^Λ ⊆ F + ker Λ`.
    pub coisotropy_residual: f64,
    /// Largest sine measuring `F^Λ ⊆ F`.
    pub strict_residual: f64,
    pub decisions: Vec<RankDecision>,
}

impl SpanAnalysis {
    pub fn stable(&self) -> bool {
        self.decisions.iter().all(|d| d.stable)
    }
}

/// Analyses gradients `grads` (columns, wedge coordinates of `so(n)`) inside the carrier
/// spanned by the orthonormal columns `carrier`, for the tensor `w` (wedge coordinates).
pub fn analyze_span(grads: &Matrix, carrier: &Matrix, w: &Matrix, scale: f64, factor: f64) -> SpanAnalysis {
    let local_g = carrier.transpose() * grads;
    let local_w = carrier.transpose() * w * carrier;
    let (f_basis, d_grad) = column_space(&local_g, 1.0, factor);
    let ddim = d_grad.rank;
    let restricted = f_basis.transpose() * &local_w * &f_basis;
    let d_restricted = crate::linalg::numerical_rank(&restricted, scale, factor);
    let dind = ddim - d_restricted.rank;
    let (complement, d_complement) = null_space(&(f_basis.transpose() * &local_w), scale, factor);
    let (kernel, d_kernel) = null_space(&local_w, scale, factor);
    let (sum, d_sum) = span_union(&f_basis, &kernel, 1.0, factor);
    let coisotropy_residual = containment_residual(&complement, &sum);
    let strict_residual = containment_residual(&complement, &f_basis);
    SpanAnalysis {
        carrier_dim: carrier.ncols(),
        ddim,
        dind,
        corank: carrier.ncols() - d_kernel.rank,
        f_basis,
        complement,
        kernel,
        coisotropy_residual,
        strict_residual,
        decisions: alloc::vec![d_grad, d_restricted, d_complement, d_kernel, d_sum],
    }
}

fn carrier_basis(family: &IntegralFamily) -> Result<Matrix> {
    match family.carrier() {
        Carrier::So(n) => Ok(WedgeSpan::so(*n).basis_columns()),
        Carrier::Span(s) => Ok(s.basis_columns()),
        Carrier::Gl(_) => Err(Error::Unsupported("rank analysis on gl(n)")),
    }
}

/// Analysis of `family` at `x` for a bracket on `so(n)`. For the reduced bracket the
/// carrier is replaced by `j_x` (`h` = the isotropy being reduced by).
pub fn family_analysis(
    family: &IntegralFamily,
    x: &Matrix,
    kind: BracketKind,
    h: Option<&WedgeSpan>,
    factor: f64,
) -> Result<SpanAnalysis> {
    let n = x.nrows();
    let d = n * (n - 1) / 2;
    let mut basis = carrier_basis(family)?;
    let grads = family.gradients(x)?;
    let br = match kind {
        BracketKind::Reduced => {
            let (Carrier::Span(span), Some(h)) = (family.carrier(), h) else {
                return Err(Error::CarrierMismatch);
            };
            basis = j_space(x, span, h, factor).0;
            Bracket::lie_poisson(n)
        }
        BracketKind::PencilGL { .. } => return Err(Error::CarrierMismatch),
        _ => Bracket::new(kind, family.a())?,
    };
    let projected: Vec<Matrix> = grads
        .iter()
        .map(|g| {
            let c = &basis * (basis.transpose() * so_coords(g));
            so_from_coords(n, c.as_slice())
        })
        .collect();
    let g = normalized_gradients(&projected, d);
    Ok(analyze_span(&g, &basis, &poisson_tensor(x, &br), frobenius(x), factor))
}

/// `(ddim, dind)` of `family` at `x`.
pub fn ddim_dind(family: &IntegralFamily, x: &Matrix, kind: BracketKind, factor: f64) -> Result<(usize, usize)> {
    let h = reduction_isotropy(family, kind)?;
    let a = family_analysis(family, x, kind, h.as_ref(), factor)?;
    if !a.stable() {
        return Err(Error::UnstableRank { quantity: "ddim/dind" });
    }
    Ok((a.ddim, a.dind))
}

/// Whether `F^Λ ⊆ F + ker Λ` at `x` (subspace residual at most `tol`).
pub fn coisotropy_check(family: &IntegralFamily, x: &Matrix, kind: BracketKind, factor: f64, tol: f64) -> Result<bool> {
    let h = reduction_isotropy(family, kind)?;
    Ok(family_analysis(family, x, kind, h.as_ref(), factor)?.coisotropy_residual <= tol)
}

/// For the reduced bracket on a span carrier, the isotropy it is reduced by: every wedge of
/// `so(n)` not in the carrier.
fn reduction_isotropy(family: &IntegralFamily, kind: BracketKind) -> Result<Option<WedgeSpan>> {
    if kind != BracketKind::Reduced {
        return Ok(None);
    }
    let Carrier::Span(span) = family.carrier() else {
        return Err(Error::CarrierMismatch);
    };
    let pairs = WedgeSpan::so(span.n()).pairs().iter().filter(|p| !span.pairs().contains(p)).copied().collect();
    Ok(Some(WedgeSpan::from_pairs(span.n(), pairs)))
}
