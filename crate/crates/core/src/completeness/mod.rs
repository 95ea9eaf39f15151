//! Randomized verification of the completeness statements.
//!
//! A check runs at seeded sample points. Each point is redrawn (up to
//! [`MAX_RESAMPLES`] times) when one of its rank decisions sits near the SVD
//! threshold; a point that stays unstable is reported as non-generic. A verdict
//! passes when no stable point fails and at least `pass_fraction` of the points pass.

mod checks;
mod span;
mod theorems;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

pub use checks::{build_operator, cross_commute_point, det_identity_point, involution_point, lax_point};
pub use span::{
    ad_matrix, analyze_span, centralizer, coisotropy_check, ddim_dind, family_analysis, j_space, j_space_transversal,
    normalized_gradients, orbit_dimension, poisson_tensor, SpanAnalysis,
};
pub use theorems::{
    antidiagonal_normal_form, lemma1_nullity, lemma1_point, normal_form_reduce, reduction_order, reduction_point,
    theorem1_point, theorem3_point, theorem4_point, verify_reduction_equality, NormalForm, ReductionEquality,
};

use crate::defaults::{Tolerances, MAX_RESAMPLES};
use crate::error::{Error, Result};
use crate::liealg::{derive_seed, sample_generic, BlockPartition, Matrix, Space, SpectralParams};
use crate::sectional::OperatorKind;

/// Named ranks and residuals measured at one point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Measurement {
    pub ranks: BTreeMap<String, usize>,
    pub residuals: BTreeMap<String, f64>,
    pub pass: bool,
    /// All rank decisions stayed clear of the threshold by a factor of ten.
    pub stable: bool,
}

impl Measurement {
    pub fn rank(&mut self, key: &str, value: usize) {
        self.ranks.insert(key.into(), value);
    }

    pub fn residual(&mut self, key: &str, value: f64) {
        self.residuals.insert(key.into(), value);
    }
}

/// A verification target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Involution,
    Theorem1,
    Theorem3,
    Theorem4,
    Lemma1,
    Reduction,
    DetIdentity,
    CrossCommute,
    Lax,
}

impl Target {
    pub const ALL: [Target; 9] = [
        Target::Involution,
        Target::Theorem1,
        Target::Theorem3,
        Target::Theorem4,
        Target::Lemma1,
        Target::Reduction,
        Target::DetIdentity,
        Target::CrossCommute,
        Target::Lax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::Involution => "involution",
            Target::Theorem1 => "theorem1",
            Target::Theorem3 => "theorem3",
            Target::Theorem4 => "theorem4",
            Target::Lemma1 => "lemma1",
            Target::Reduction => "reduction",
            Target::DetIdentity => "det-identity",
            Target::CrossCommute => "cross-commute",
            Target::Lax => "lax",
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidParameter(alloc::format!("unknown verification target `{s}`")))
    }
}

/// Everything a point check needs besides its seed.
#[derive(Clone, Debug)]
pub struct VerifyContext {
    pub params: SpectralParams,
    pub operator: OperatorKind,
    pub interior: Option<Matrix>,
    /// Number of leading isotropy blocks forming `h` (Theorem 4).
    pub l_split: usize,
    pub tolerances: Tolerances,
}

impl VerifyContext {
    /// Standard parameters on `partition`, regular operator, `l_split = 1`.
    pub fn standard(partition: BlockPartition) -> Self {
        VerifyContext {
            params: SpectralParams::standard(partition),
            operator: OperatorKind::Regular,
            interior: None,
            l_split: 1,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Pass,
    Fail,
    NonGeneric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    /// Seed of the point actually measured.
    pub seed: u64,
    pub requested_seed: u64,
    pub attempts: u64,
    pub ranks: BTreeMap<String, usize>,
    pub residuals: BTreeMap<String, f64>,
    pub status: PointStatus,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub pass: usize,
    pub fail: usize,
    pub non_generic: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletenessVerdict {
    pub theorem: Target,
    pub n: usize,
    pub partition: Vec<usize>,
    pub seeds: Vec<u64>,
    pub per_point: Vec<PointReport>,
    pub verdict: Verdict,
    pub counts: Counts,
    pub tolerances: Tolerances,
}

impl CompletenessVerdict {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    /// Largest value of a named rank over the measured points.
    pub fn max_rank(&self, key: &str) -> Option<usize> {
        self.per_point.iter().filter_map(|p| p.ranks.get(key).copied()).max()
    }

    pub fn max_residual(&self, key: &str) -> Option<f64> {
        self.per_point.iter().filter_map(|p| p.residuals.get(key).copied()).reduce(f64::max)
    }
}

/// Whether `target` has anything to check for this context.
pub fn applicable(target: Target, ctx: &VerifyContext) -> bool {
    match target {
        Target::Reduction => reduction_order(ctx.params.partition()).is_some(),
        _ => true,
    }
}

fn measure(target: Target, ctx: &VerifyContext, seed: u64) -> Result<Measurement> {
    let params = &ctx.params;
    let n = params.n();
    let partition = params.partition();
    let tol = &ctx.tolerances;
    match target {
        Target::Theorem1 => theorem1_point(params, &sample_generic(seed, &Space::So(n)), tol),
        Target::Theorem3 => theorem3_point(params, &sample_generic(seed, &Space::Transversal(partition.clone())), tol),
        Target::Theorem4 => {
            let x = sample_generic(seed, &Space::HeadComplement(partition.clone(), ctx.l_split));
            theorem4_point(params, ctx.l_split, &x, tol)
        }
        Target::Lemma1 => lemma1_point(params, &sample_generic(seed, &Space::So(n)), tol),
        Target::Reduction => reduction_point(params, &sample_generic(seed, &Space::Transversal(partition.clone())), tol),
        Target::Involution => involution_point(ctx, seed),
        Target::DetIdentity => det_identity_point(ctx, seed),
        Target::CrossCommute => cross_commute_point(ctx, seed),
        Target::Lax => lax_point(ctx, seed),
    }
}

/// Measures one point, redrawing it while its rank decisions are unstable.
pub fn run_point(target: Target, ctx: &VerifyContext, seed: u64) -> Result<PointReport> {
    let mut last = Measurement::default();
    let mut used = seed;
    for attempt in 0..=MAX_RESAMPLES {
        used = derive_seed(seed, attempt);
        match measure(target, ctx, used) {
            Ok(m) if m.stable => {
                let status = if m.pass { PointStatus::Pass } else { PointStatus::Fail };
                return Ok(PointReport {
                    seed: used,
                    requested_seed: seed,
                    attempts: attempt + 1,
                    ranks: m.ranks,
                    residuals: m.residuals,
                    status,
                    pass: m.pass,
                });
            }
            Ok(m) => last = m,
            Err(Error::NonGeneric { .. } | Error::UnstableRank { .. }) => last = Measurement::default(),
            Err(e) => return Err(e),
        }
    }
    Ok(PointReport {
        seed: used,
        requested_seed: seed,
        attempts: MAX_RESAMPLES + 1,
        ranks: last.ranks,
        residuals: last.residuals,
        status: PointStatus::NonGeneric,
        pass: false,
    })
}

/// Combines point reports (in any order) into a verdict; points are sorted by seed.
pub fn aggregate(target: Target, ctx: &VerifyContext, mut points: Vec<PointReport>) -> CompletenessVerdict {
    points.sort_by_key(|p| p.requested_seed);
    let mut counts = Counts::default();
    for p in &points {
        match p.status {
            PointStatus::Pass => counts.pass += 1,
            PointStatus::Fail => counts.fail += 1,
            PointStatus::NonGeneric => counts.non_generic += 1,
        }
    }
    let verdict = if !applicable(target, ctx) {
        Verdict::NotApplicable
    } else if counts.fail == 0
        && !points.is_empty()
        && counts.pass as f64 >= ctx.tolerances.pass_fraction * points.len() as f64
    {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    CompletenessVerdict {
        theorem: target,
        n: ctx.params.n(),
        partition: ctx.params.partition().parts().to_vec(),
        seeds: points.iter().map(|p| p.requested_seed).collect(),
        per_point: points,
        verdict,
        counts,
        tolerances: ctx.tolerances.clone(),
    }
}

/// Runs `target` at every seed, sequentially.
pub fn verify(target: Target, ctx: &VerifyContext, seeds: &[u64]) -> Result<CompletenessVerdict> {
    if !applicable(target, ctx) {
        return Ok(aggregate(target, ctx, Vec::new()));
    }
    let points = seeds.iter().map(|&s| run_point(target, ctx, s)).collect::<Result<Vec<_>>>()?;
    Ok(aggregate(target, ctx, points))
}

pub fn verify_theorem1(partition: BlockPartition, seeds: &[u64]) -> Result<CompletenessVerdict> {
    verify(Target::Theorem1, &VerifyContext::standard(partition), seeds)
}

pub fn verify_theorem3(partition: BlockPartition, seeds: &[u64]) -> Result<CompletenessVerdict> {
    verify(Target::Theorem3, &VerifyContext::standard(partition), seeds)
}

pub fn verify_theorem4(partition: BlockPartition, l_split: usize, seeds: &[u64]) -> Result<CompletenessVerdict> {
    let ctx = VerifyContext { l_split, ..VerifyContext::standard(partition) };
    verify(Target::Theorem4, &ctx, seeds)
}

/// All partitions of `n` into positive parts, each nondecreasing (largest block last),
/// in lexicographic order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, min: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(prefix.clone());
            return;
        }
        for k in min..=rest {
            if rest - k == 0 || rest - k >= k {
                prefix.push(k);
                rec(rest - k, k, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, 1, &mut Vec::new(), &mut out);
    }
    out
}
