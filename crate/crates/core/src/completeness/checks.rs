//! Per-point identity checks that are not rank counts: involutivity, the determinant
//! identity, cross-commutation and the Manakov/Lax residuals.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::span::j_space;
use super::{Measurement, VerifyContext};
use crate::defaults::LAX_LAMBDAS;
use crate::error::Result;
use crate::flows::{euler_field, isotropy_leak, lax_residual, singular_flow_field};
use crate::invariants::{
    cross_commutation_check, default_bolsinov_lambdas, det_identity_check, max_normalized_bracket, Bracket, Carrier,
    IntegralFamily,
};
use crate::liealg::{derive_seed, diag_matrix, sample_generic, sample_square, Space, WedgeSpan};
use crate::linalg::frobenius;
use crate::sectional::{manakov_residual, Cometric, OperatorKind, SectionalOperator};

/// Attempt index reserved for the second, independent sample of a point.
const SECOND_SAMPLE: u64 = 0x100;

/// `ℒ` against `ℒ ∪ 𝒮` under Lie-Poisson at `x ∈ so(n)`, and `ℒ_𝔳` under the
/// reduced bracket at an independent `y ∈ 𝔳`.
pub fn involution_point(ctx: &VerifyContext, seed: u64) -> Result<Measurement> {
    let params = &ctx.params;
    let n = params.n();
    let partition = params.partition();
    let x = sample_generic(seed, &Space::So(n));
    let l = IntegralFamily::manakov(&params.a_diag(), Carrier::So(n));
    let rows: Vec<usize> = (0..l.len()).collect();
    let full = l.with_linear_forms(&WedgeSpan::isotropy(partition));
    let cols: Vec<usize> = (0..full.len()).collect();
    let lie_poisson = max_normalized_bracket(&full, &x, &Bracket::lie_poisson(n), &rows, &cols)?;

    let v = WedgeSpan::transversal(partition);
    let y = sample_generic(derive_seed(seed, SECOND_SAMPLE), &Space::Transversal(partition.clone()));
    let (j, decision) = j_space(&y, &v, &WedgeSpan::isotropy(partition), ctx.tolerances.rank_factor);
    let lv = IntegralFamily::manakov(&params.a_diag(), Carrier::Span(v));
    let all: Vec<usize> = (0..lv.len()).collect();
    let reduced = max_normalized_bracket(&lv, &y, &Bracket::reduced(n, j), &all, &all)?;

    let mut out = Measurement::default();
    out.residual("lie_poisson", lie_poisson);
    out.residual("reduced", reduced);
    out.stable = decision.stable;
    out.pass = lie_poisson <= ctx.tolerances.involution && reduced <= ctx.tolerances.involution;
    Ok(out)
}

/// The determinant identity at a random square `M`, shift `α` kept at distance
/// at least 0.1 from every `-a_i`, and `β ∈ [-2, 2]`.
pub fn det_identity_point(ctx: &VerifyContext, seed: u64) -> Result<Measurement> {
    let a = ctx.params.a_diag();
    let n = a.len();
    let m = sample_square(seed, n);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, SECOND_SAMPLE));
    let alpha = loop {
        let alpha: f64 = rng.random_range(-3.0..=3.0);
        if a.iter().all(|x| crate::math::abs(x + alpha) >= 0.1) {
            break alpha;
        }
    };
    let beta: f64 = rng.random_range(-2.0..=2.0);
    let residual = det_identity_check(&m, &a, alpha, beta)?;
    let mut out = Measurement::default();
    out.residual("relative", residual.relative());
    out.residual("alpha", alpha);
    out.residual("beta", beta);
    out.stable = true;
    out.pass = residual.relative() <= ctx.tolerances.identity;
    Ok(out)
}

/// `ℒ(A)` against `𝒥(A)` at the default `λ` sample.
pub fn cross_commute_point(ctx: &VerifyContext, seed: u64) -> Result<Measurement> {
    let n = ctx.params.n();
    let a = ctx.params.a_diag();
    let x = sample_generic(seed, &Space::So(n));
    let lambdas = default_bolsinov_lambdas(ctx.params.alphas(), n);
    let worst = cross_commutation_check(&x, &a, &a, &lambdas)?;
    let mut out = Measurement::default();
    out.residual("max_normalized", worst);
    out.stable = true;
    out.pass = worst <= ctx.tolerances.involution;
    Ok(out)
}

pub fn build_operator(ctx: &VerifyContext) -> Result<SectionalOperator> {
    match ctx.operator {
        OperatorKind::Regular => SectionalOperator::regular(ctx.params.clone()),
        OperatorKind::Singular => SectionalOperator::singular(ctx.params.clone(), ctx.interior.clone()),
        OperatorKind::RigidBody => {
            SectionalOperator::rigid_body(ctx.params.partition().clone(), ctx.params.betas().to_vec())
        }
    }
}

/// Manakov-condition and Lax residuals at a random `M`, relative to the sizes of the
/// terms involved; for the singular operator also the split-field consistency.
pub fn lax_point(ctx: &VerifyContext, seed: u64) -> Result<Measurement> {
    let op = build_operator(ctx)?;
    let n = ctx.params.n();
    let m = sample_generic(seed, &Space::So(n));
    let omega = op.omega(&m);
    let a = diag_matrix(op.a_diag());
    let b = diag_matrix(op.b_diag());
    let (nm, no, na, nb) = (frobenius(&m), frobenius(&omega), frobenius(&a), frobenius(&b));
    let manakov = manakov_residual(&m, &omega, op.a_diag(), op.b_diag()) / (nm * nb + no * na).max(f64::MIN_POSITIVE);
    let mut lax: f64 = 0.0;
    for &lambda in &LAX_LAMBDAS {
        let scale = nm * no + crate::math::abs(lambda) * (nm * nb + no * na);
        lax = lax.max(lax_residual(&m, &op, lambda) / scale.max(f64::MIN_POSITIVE));
    }
    let mut out = Measurement::default();
    out.residual("manakov", manakov);
    out.residual("lax", lax);
    let mut pass = manakov <= ctx.tolerances.identity && lax <= ctx.tolerances.identity;
    if op.kind() == OperatorKind::Singular {
        let euler = euler_field(&m, &op);
        let split = singular_flow_field(&m, &op)?;
        let scale = (nm * no).max(f64::MIN_POSITIVE);
        let consistency = frobenius(&(split - euler)) / scale;
        let leak = isotropy_leak(&m, &op) / scale;
        out.residual("split", consistency);
        out.residual("isotropy_leak", leak);
        pass &= consistency <= ctx.tolerances.identity && leak <= ctx.tolerances.identity;
    }
    out.stable = true;
    out.pass = pass;
    Ok(out)
}
