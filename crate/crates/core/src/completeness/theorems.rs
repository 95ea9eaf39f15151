//! Point-level checks of the structural theorems. Each returns a [`Measurement`]
//! at one sampled point; sampling and aggregation live in the parent module.

use alloc::vec::Vec;

use super::span::{ad_matrix, analyze_span, centralizer, family_analysis, j_space, normalized_gradients, orbit_dimension, poisson_tensor};
use super::Measurement;
use crate::defaults::Tolerances;
use crate::error::{Error, Result};
use crate::invariants::{max_normalized_bracket, Bracket, BracketKind, Carrier, IntegralFamily};
use crate::liealg::{bracket, diag_matrix, so_coords, so_from_coords, wedge, wedge_index, BlockPartition, Matrix, SpectralParams, WedgeSpan};
use crate::linalg::{frobenius, null_space, subspace_distance, svd};

/// `ℒ ∪ 𝒮` on `so(n)` at a generic `x`: `ddim + dind = dim so(n) + ⌊n/2⌋` and
/// `F^Λ ⊆ F + ker Λ`.
pub fn theorem1_point(params: &SpectralParams, x: &Matrix, tol: &Tolerances) -> Result<Measurement> {
    let n = params.n();
    let family = IntegralFamily::manakov(&params.a_diag(), Carrier::So(n))
        .with_linear_forms(&WedgeSpan::isotropy(params.partition()));
    let analysis = family_analysis(&family, x, BracketKind::LiePoisson, None, tol.rank_factor)?;
    let target = n * (n - 1) / 2 + n / 2;
    let mut out = Measurement::default();
    out.rank("ddim", analysis.ddim);
    out.rank("dind", analysis.dind);
    out.rank("lhs", analysis.ddim + analysis.dind);
    out.rank("target", target);
    out.rank("corank", analysis.corank);
    out.residual("coisotropy", analysis.coisotropy_residual);
    out.residual("complement_in_span", analysis.strict_residual);
    out.stable = analysis.stable();
    out.pass = analysis.ddim + analysis.dind == target && analysis.coisotropy_residual <= tol.subspace;
    Ok(out)
}

/// `ℒ_𝔳` at a generic `x ∈ 𝔳`: `ddim = dim 𝔳 - ½ dim O(x)`, involutive under the
/// reduced bracket, and `F^Λ̄ = F` inside `𝔧_x` (computed two ways).
pub fn theorem3_point(params: &SpectralParams, x: &Matrix, tol: &Tolerances) -> Result<Measurement> {
    let partition = params.partition();
    let v = WedgeSpan::transversal(partition);
    let iso = WedgeSpan::isotropy(partition);
    let family = IntegralFamily::manakov(&params.a_diag(), Carrier::Span(v.clone()));
    let mut out = reduced_measurement(&family, x, &v, &iso, tol)?;
    let (orbit, orbit_decision) = orbit_dimension(x, tol.rank_factor);
    let ddim = out.ranks["ddim"];
    out.stable &= orbit_decision.stable;
    out.rank("orbit", orbit);
    out.rank("dim_v", v.dim());
    let pass = orbit % 2 == 0 && 2 * ddim + orbit == 2 * v.dim();
    out.rank("target", (2 * v.dim()).saturating_sub(orbit) / 2);
    out.pass = pass
        && out.residuals["complement_equality"] <= tol.subspace
        && out.residuals["complement_routes"] <= tol.subspace
        && out.residuals["involution"] <= tol.involution;
    Ok(out)
}

/// Theorem 4 at a generic `x ∈ 𝔭 = 𝔨 ⊕ 𝔳`, `h` = first `l_split` isotropy blocks.
/// (i) `ℒ_𝔭 ∪ 𝒦`: `ddim + dind = dim 𝔧 + corank Λ̄` and coisotropy;
/// (ii) `ℒ_𝔭 ∪ 𝒦⁰` (per-factor Manakov on `𝔨`): involutive with `2 ddim = dim 𝔧 + corank Λ̄`.
pub fn theorem4_point(params: &SpectralParams, l_split: usize, x: &Matrix, tol: &Tolerances) -> Result<Measurement> {
    let partition = params.partition();
    let r = partition.blocks();
    if l_split == 0 || l_split > r {
        return Err(Error::InvalidParameter(alloc::format!("l_split must lie in 1..={r}, got {l_split}")));
    }
    let p = WedgeSpan::head_complement(partition, l_split);
    let h = WedgeSpan::head_isotropy(partition, l_split);
    let k_pairs: Vec<(usize, usize)> =
        WedgeSpan::isotropy(partition).pairs().iter().filter(|pair| !h.pairs().contains(pair)).copied().collect();
    let k = WedgeSpan::from_pairs(partition.n(), k_pairs);
    let base = IntegralFamily::manakov(&params.a_diag(), Carrier::Span(p.clone()));

    let full = base.clone().with_linear_forms(&k);
    let a_i = family_analysis(&full, x, BracketKind::Reduced, Some(&h), tol.rank_factor)?;
    let j_dim = a_i.carrier_dim;
    let target = j_dim + a_i.corank;

    let commutative = base.with_factor_manakov(partition, l_split..r);
    let reduced = reduced_measurement(&commutative, x, &p, &h, tol)?;
    let ddim0 = reduced.ranks["ddim"];

    let mut out = Measurement::default();
    out.rank("dim_j", j_dim);
    out.rank("corank", a_i.corank);
    out.rank("ddim", a_i.ddim);
    out.rank("dind", a_i.dind);
    out.rank("lhs", a_i.ddim + a_i.dind);
    out.rank("target", target);
    out.rank("ddim_commutative", ddim0);
    out.residual("coisotropy", a_i.coisotropy_residual);
    out.residual("leak", reduced.residuals["leak"]);
    out.residual("involution_commutative", reduced.residuals["involution"]);
    out.residual("complement_equality_commutative", reduced.residuals["complement_equality"]);
    out.stable = a_i.stable() && reduced.stable;
    out.pass = a_i.ddim + a_i.dind == target
        && a_i.coisotropy_residual <= tol.subspace
        && 2 * ddim0 == target
        && reduced.residuals["involution"] <= tol.involution;
    Ok(out)
}

/// Reduced-bracket analysis of a commutative family on `carrier`, reduced by `h`.
fn reduced_measurement(
    family: &IntegralFamily,
    x: &Matrix,
    carrier: &WedgeSpan,
    h: &WedgeSpan,
    tol: &Tolerances,
) -> Result<Measurement> {
    let n = x.nrows();
    let d = n * (n - 1) / 2;
    let (j, j_decision) = j_space(x, carrier, h, tol.rank_factor);
    let grads = family.gradients(x)?;

    // how far the restricted gradients stick out of j_x; zero for invariant functions
    let mut leak: f64 = 0.0;
    for g in &grads {
        let c = so_coords(g);
        let norm = c.norm();
        if norm > 0.0 {
            leak = leak.max((&c - &j * (j.transpose() * &c)).norm() / norm);
        }
    }
    let projected: Vec<Matrix> = grads
        .iter()
        .map(|g| so_from_coords(n, (&j * (j.transpose() * so_coords(g))).as_slice()))
        .collect();
    let g = normalized_gradients(&projected, d);
    let w = poisson_tensor(x, &Bracket::lie_poisson(n));
    let analysis = analyze_span(&g, &j, &w, frobenius(x), tol.rank_factor);

    let f_full = &j * &analysis.f_basis;
    let route1 = &j * &analysis.complement;
    let route2 = direct_complement(x, &g, &w, carrier, h, tol.rank_factor);

    let all: Vec<usize> = (0..family.len()).collect();
    let involution = max_normalized_bracket(family, x, &Bracket::reduced(n, j.clone()), &all, &all)?;

    let mut out = Measurement::default();
    out.rank("dim_j", j.ncols());
    out.rank("ddim", analysis.ddim);
    out.rank("dind", analysis.dind);
    out.rank("corank", analysis.corank);
    out.residual("leak", leak);
    out.residual("involution", involution);
    out.residual("complement_equality", subspace_distance(&route1, &f_full));
    out.residual("complement_routes", subspace_distance(&route1, &route2.0));
    out.stable = analysis.stable() && j_decision.stable && route2.1;
    Ok(out)
}

/// `F^Λ̄` as the solutions `ξ ∈ so(n)` of `ξ ∈ carrier`, `pr_h [x, ξ] = 0`,
/// `Λ(g_i, ξ) = 0`, without passing through a basis of `𝔧_x`.
fn direct_complement(x: &Matrix, grads: &Matrix, w: &Matrix, carrier: &WedgeSpan, h: &WedgeSpan, factor: f64) -> (Matrix, bool) {
    let n = x.nrows();
    let d = n * (n - 1) / 2;
    let outside: Vec<(usize, usize)> =
        WedgeSpan::so(n).pairs().iter().filter(|p| !carrier.pairs().contains(p)).copied().collect();
    let out_basis = WedgeSpan::from_pairs(n, outside).basis_columns();
    let h_basis = h.basis_columns();
    let ad = ad_matrix(x);
    // the carrier rows have unit norm; the other two kinds scale like |x|
    let scale = frobenius(x);
    let inv = if scale > 0.0 { 1.0 / scale } else { 0.0 };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for c in 0..out_basis.ncols() {
        rows.push(out_basis.column(c).iter().copied().collect());
    }
    let hx = h_basis.transpose() * &ad;
    let gw = grads.transpose() * w;
    for m in [&hx, &gw] {
        for r in 0..m.nrows() {
            rows.push(m.row(r).iter().map(|v| v * inv).collect());
        }
    }
    let mut system = Matrix::zeros(rows.len(), d);
    for (r, row) in rows.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            system[(r, c)] = *v;
        }
    }
    let (basis, decision) = null_space(&system, 1.0, factor);
    (basis, decision.stable)
}

/// `Σ_{j=1..⌊n/2⌋} m_j E_j ∧ E_{n+1-j}` (1-based indices).
pub fn antidiagonal_normal_form(n: usize, m: &[f64]) -> Matrix {
    let mut x = Matrix::zeros(n, n);
    for (j, &v) in m.iter().take(n / 2).enumerate() {
        x += wedge(n, j, n - 1 - j) * v;
    }
    x
}

/// Nullity of the real system `[x, ξ2] + [A, ξ1] = 0`, `pr_{so(n)_x}[A, ξ2] = 0`
/// over `(ξ1, ξ2) ∈ so(n)_x × Sym(n)`. Regular `x` only.
pub fn lemma1_nullity(x: &Matrix, a: &[f64], factor: f64) -> Result<(usize, bool)> {
    let n = x.nrows();
    let (cent, c_decision) = centralizer(x, factor);
    if cent.ncols() != n / 2 {
        return Err(Error::NonGeneric {
            reason: alloc::format!("centralizer dimension {} != {}", cent.ncols(), n / 2),
        });
    }
    let a = diag_matrix(a);
    let c_mats: Vec<Matrix> = (0..cent.ncols()).map(|b| so_from_coords(n, cent.column(b).as_slice())).collect();
    let mut sym_basis = Vec::new();
    for i in 0..n {
        for j in i..n {
            let mut s = Matrix::zeros(n, n);
            if i == j {
                s[(i, i)] = 1.0;
            } else {
                s[(i, j)] = core::f64::consts::FRAC_1_SQRT_2;
                s[(j, i)] = core::f64::consts::FRAC_1_SQRT_2;
            }
            sym_basis.push(s);
        }
    }
    let sym_eqs = n * (n + 1) / 2;
    let unknowns = c_mats.len() + sym_basis.len();
    let mut system = Matrix::zeros(sym_eqs + c_mats.len(), unknowns);
    let upper = |m: &Matrix, out: &mut Matrix, col: usize| {
        let mut r = 0;
        for i in 0..n {
            for j in i..n {
                out[(r, col)] = m[(i, j)];
                r += 1;
            }
        }
    };
    for (c, xi1) in c_mats.iter().enumerate() {
        upper(&bracket(&a, xi1), &mut system, c);
    }
    for (s, xi2) in sym_basis.iter().enumerate() {
        let col = c_mats.len() + s;
        upper(&bracket(x, xi2), &mut system, col);
        let ax = bracket(&a, xi2);
        for (b, cb) in c_mats.iter().enumerate() {
            system[(sym_eqs + b, col)] = crate::liealg::pairing(cb, &ax);
        }
    }
    let reference = frobenius(x).max(frobenius(&a));
    let (null, decision) = null_space(&system, reference, factor);
    Ok((null.ncols(), decision.stable && c_decision.stable))
}

pub fn lemma1_point(params: &SpectralParams, x: &Matrix, tol: &Tolerances) -> Result<Measurement> {
    let n = params.n();
    let (nullity, stable) = lemma1_nullity(x, &params.a_diag(), tol.rank_factor)?;
    let mut out = Measurement::default();
    out.rank("nullity", nullity);
    out.rank("target", n);
    out.stable = stable;
    out.pass = nullity == n;
    Ok(out)
}

/// Result of [`normal_form_reduce`].
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub reduced: Matrix,
    pub conjugator: Matrix,
    /// `l` with `k_r = ⌊(n+1)/2⌋ + l`; zero when no reduction applies.
    pub l: usize,
    pub n_reduced: usize,
    pub partition_reduced: BlockPartition,
    /// Norm of the last `2l` columns of the conjugated point over `‖x‖`.
    pub column_residual: f64,
    pub orthogonality: f64,
    pub det: f64,
}

/// `l` for the last block of `partition`, or `None` when `k_r ≤ ⌊(n+1)/2⌋` or `r = 1`.
pub fn reduction_order(partition: &BlockPartition) -> Option<usize> {
    let n = partition.n();
    let kr = *partition.parts().last()?;
    let half = n.div_ceil(2);
    (partition.blocks() > 1 && kr > half).then(|| kr - half)
}

/// Conjugates `x ∈ 𝔳` by `K = diag(I, U)`, `U ∈ SO(k_r)`, so that the last `2l` columns
/// vanish and the point lies in the `𝔳'` of `(n - 2l, (k_1, ..., k_r - 2l))`.
pub fn normal_form_reduce(x: &Matrix, partition: &BlockPartition) -> Result<NormalForm> {
    let n = partition.n();
    if x.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.nrows() });
    }
    let Some(l) = reduction_order(partition) else {
        return Ok(NormalForm {
            reduced: x.clone(),
            conjugator: Matrix::identity(n, n),
            l: 0,
            n_reduced: n,
            partition_reduced: partition.clone(),
            column_residual: 0.0,
            orthogonality: 0.0,
            det: 1.0,
        });
    };
    let kr = *partition.parts().last().expect("nonempty");
    let p = n - kr;
    // full right singular basis of the p × k_r block, padded to k_r × k_r
    let mut padded = Matrix::zeros(kr, kr);
    padded.view_mut((0, 0), (p, kr)).copy_from(&x.view((0, p), (p, kr)));
    let mut u = svd(&padded).v.transpose();
    if u.determinant() < 0.0 {
        let flipped = -u.row(0).into_owned();
        u.set_row(0, &flipped);
    }
    let mut conj = Matrix::identity(n, n);
    conj.view_mut((p, p), (kr, kr)).copy_from(&u);
    let reduced = &conj * x * conj.transpose();
    let scale = frobenius(x);
    let tail = frobenius(&reduced.columns(n - 2 * l, 2 * l).into_owned());
    let column_residual = if scale > 0.0 { tail / scale } else { tail };
    let orthogonality = frobenius(&(&conj * conj.transpose() - Matrix::identity(n, n)));
    let det = conj.determinant();
    let mut parts = partition.parts().to_vec();
    *parts.last_mut().expect("nonempty") -= 2 * l;
    if parts.last() == Some(&0) {
        parts.pop();
    }
    Ok(NormalForm {
        reduced,
        conjugator: conj,
        l,
        n_reduced: n - 2 * l,
        partition_reduced: BlockPartition::new(parts)?,
        column_residual,
        orthogonality,
        det,
    })
}

/// Outcome of [`verify_reduction_equality`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReductionEquality {
    NotApplicable,
    Checked { distance: f64, dim: usize, dim_reduced: usize, stable: bool },
}

/// Compares `𝔧_x` in `(n, partition)` with `𝔧'_x` in the reduced data, embedded in `so(n)`.
/// `x` must already be in normal form (last `2l` rows and columns zero).
pub fn verify_reduction_equality(x: &Matrix, partition: &BlockPartition, factor: f64) -> Result<ReductionEquality> {
    let n = partition.n();
    let Some(l) = reduction_order(partition) else {
        return Ok(ReductionEquality::NotApplicable);
    };
    let nr = n - 2 * l;
    let mut parts = partition.parts().to_vec();
    *parts.last_mut().expect("nonempty") -= 2 * l;
    if parts.last() == Some(&0) {
        parts.pop();
    }
    let reduced_partition = BlockPartition::new(parts)?;
    let (big, d_big) = j_space(x, &WedgeSpan::transversal(partition), &WedgeSpan::isotropy(partition), factor);
    let small_x = x.view((0, 0), (nr, nr)).into_owned();
    let (small, d_small) = j_space(
        &small_x,
        &WedgeSpan::transversal(&reduced_partition),
        &WedgeSpan::isotropy(&reduced_partition),
        factor,
    );
    let mut embedded = Matrix::zeros(n * (n - 1) / 2, small.ncols());
    for (r, (i, j)) in WedgeSpan::so(nr).pairs().iter().enumerate() {
        for c in 0..small.ncols() {
            embedded[(wedge_index(n, *i, *j), c)] = small[(r, c)];
        }
    }
    Ok(ReductionEquality::Checked {
        distance: subspace_distance(&big, &embedded),
        dim: big.ncols(),
        dim_reduced: small.ncols(),
        stable: d_big.stable && d_small.stable,
    })
}

/// Reduction at a generic `x ∈ 𝔳`: column zeroing, exact orthogonality, the equality
/// of `𝔧` spaces, and invariance of `ddim ℒ_𝔳` and `dim 𝔧` under the conjugation.
pub fn reduction_point(params: &SpectralParams, x: &Matrix, tol: &Tolerances) -> Result<Measurement> {
    let partition = params.partition();
    let nf = normal_form_reduce(x, partition)?;
    let mut out = Measurement::default();
    out.rank("l", nf.l);
    out.rank("n_reduced", nf.n_reduced);
    out.residual("column_residual", nf.column_residual);
    out.residual("orthogonality", nf.orthogonality);
    out.residual("det_defect", (nf.det - 1.0).abs());
    let equality = verify_reduction_equality(&nf.reduced, partition, tol.rank_factor)?;
    let ReductionEquality::Checked { distance, dim, dim_reduced, stable } = equality else {
        out.stable = true;
        out.pass = false;
        return Ok(out);
    };
    out.rank("dim_j", dim);
    out.rank("dim_j_reduced", dim_reduced);
    out.residual("equality", distance);

    let v = WedgeSpan::transversal(partition);
    let family = IntegralFamily::manakov(&params.a_diag(), Carrier::Span(v.clone()));
    let iso = WedgeSpan::isotropy(partition);
    let before = family_analysis(&family, x, BracketKind::Reduced, Some(&iso), tol.rank_factor)?;
    let after = family_analysis(&family, &nf.reduced, BracketKind::Reduced, Some(&iso), tol.rank_factor)?;
    out.rank("ddim", before.ddim);
    out.rank("ddim_conjugated", after.ddim);
    out.rank("dim_j_original", before.carrier_dim);
    out.stable = stable && before.stable() && after.stable();
    out.pass = nf.column_residual <= 1e-12
        && nf.orthogonality <= 1e-13
        && (nf.det - 1.0).abs() <= 1e-12
        && distance <= tol.subspace
        && before.ddim == after.ddim
        && before.carrier_dim == dim;
    Ok(out)
}
