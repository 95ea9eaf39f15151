//! The three subcommands. Each returns its artifacts in memory; writing is left to the caller.

use std::collections::BTreeMap;

use manakov_core::completeness::{aggregate, applicable, run_point, CompletenessVerdict, PointStatus, Target, VerifyContext};
use manakov_core::defaults::{Tolerances, LAX_LAMBDAS, MAX_RESAMPLES};
use manakov_core::flows::{
    euler_field, integrate, lax_spectrum, noether_drift, relative_drift, rigid_body_field, singular_flow_field,
    spectrum_drift, IntegratorConfig, Trajectory,
};
use manakov_core::invariants::{Carrier, IntegralFamily, MemberTag};
use manakov_core::liealg::{sample_generic, Space, WedgeSpan};
use manakov_core::sectional::{hamiltonian_of, Cometric, MetricSpec, OperatorKind, SectionalOperator};
use manakov_core::{BlockPartition, Matrix, SkewMatrix, SpectralParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{build_operator, Dynamics, InitialCondition, Setup};
use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegralDrift {
    pub name: String,
    pub initial: f64,
    pub drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumDrift {
    pub lambda: f64,
    pub drift: f64,
}

/// Conservation report of `simulate`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationReport {
    pub command: &'static str,
    pub n: usize,
    pub partition: Vec<usize>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// `regular`, `singular`, `rigid_body`, or the metric kind.
    pub dynamics: String,
    pub metric: Option<MetricSpec>,
    pub integrator: IntegratorConfig,
    pub initial: InitialCondition,
    pub samples: usize,
    pub integrals: Vec<IntegralDrift>,
    pub energy: IntegralDrift,
    /// Empty for metric flows, which carry no Lax pair in general.
    pub lax_spectrum: Vec<SpectrumDrift>,
    pub noether: Option<f64>,
    pub max_drift: f64,
    pub tolerances: Tolerances,
    pub pass: bool,
}

pub struct Simulation {
    pub trajectory: Trajectory,
    pub report: ConservationReport,
}

/// Report of `verify`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub n: usize,
    pub partition: Vec<usize>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub operator: OperatorKind,
    pub l_split: usize,
    pub lax_lambdas: Vec<f64>,
    pub max_resamples: u64,
    pub verdicts: Vec<CompletenessVerdict>,
    pub pass: bool,
}

/// One line of the sweep table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub partition: String,
    pub target: String,
    pub verdict: String,
    pub points: usize,
    pub pass: usize,
    pub fail: usize,
    pub non_generic: usize,
    pub ddim: Option<usize>,
    pub dind: Option<usize>,
    pub lhs: Option<usize>,
    pub rank_target: Option<usize>,
}

fn member_name(tag: &MemberTag) -> String {
    match tag {
        MemberTag::L { k, s } => format!("p_{k}_{s}"),
        MemberTag::S { i, j } => format!("m_{i}_{j}"),
        MemberTag::FactorL { block, k, s } => format!("p{block}_{k}_{s}"),
        MemberTag::J { k, lambda } => format!("j_{k}({lambda})"),
        MemberTag::Casimir { lambda, k } => format!("f_{k}({lambda})"),
        MemberTag::ShiftedTrace { k } => format!("t_{k}"),
    }
}

fn drift_of(name: String, values: &[f64]) -> IntegralDrift {
    IntegralDrift { name, initial: values[0], drift: relative_drift(values) }
}

fn initial_state(setup: &Setup, space: &Space, span: Option<&WedgeSpan>) -> Result<(Matrix, InitialCondition), CliError> {
    let n = setup.raw.n;
    match setup.raw.initial.clone().unwrap_or(InitialCondition::Seed(setup.seeds[0])) {
        InitialCondition::Seed(seed) => Ok((sample_generic(seed, space), InitialCondition::Seed(seed))),
        InitialCondition::Entries(entries) => {
            let m = SkewMatrix::from_upper(n, &entries).map_err(|e| CliError::field("initial.entries", e))?.into_matrix();
            if let Some(span) = span {
                let outside = manakov_core::linalg::frobenius(&(&m - span.project(&m)));
                if outside > 0.0 {
                    return Err(CliError::field("initial.entries", "nonzero entries outside the metric's momentum space"));
                }
            }
            Ok((m, InitialCondition::Entries(entries)))
        }
    }
}

pub fn simulate(setup: &Setup) -> Result<Simulation, CliError> {
    let cfg = &setup.raw.integrator;
    let tol = &setup.tolerances;
    match &setup.dynamics {
        Dynamics::Operator(op) => simulate_operator(setup, op, cfg, tol),
        Dynamics::Metric(spec) => simulate_metric(setup, spec, cfg, tol),
    }
}

fn family_drifts(family: &IntegralFamily, traj: &Trajectory) -> Result<Vec<IntegralDrift>, CliError> {
    let values = traj.states.iter().map(|m| family.values(m)).collect::<Result<Vec<_>, _>>()?;
    Ok(family
        .members()
        .iter()
        .enumerate()
        .map(|(i, tag)| drift_of(member_name(tag), &values.iter().map(|v| v[i]).collect::<Vec<_>>()))
        .collect())
}

fn energy_drift<C: Cometric + ?Sized>(op: &C, traj: &Trajectory) -> IntegralDrift {
    let values: Vec<f64> = traj.states.iter().map(|m| hamiltonian_of(op, m)).collect();
    drift_of("energy".into(), &values)
}

fn simulate_operator(
    setup: &Setup,
    op: &SectionalOperator,
    cfg: &IntegratorConfig,
    tol: &Tolerances,
) -> Result<Simulation, CliError> {
    let n = setup.raw.n;
    let (m0, initial) = initial_state(setup, &Space::So(n), None)?;
    let label = serde_json::to_value(op.kind()).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let trajectory = match op.kind() {
        OperatorKind::Regular => integrate(|m| euler_field(m, op), &m0, cfg, &label)?,
        OperatorKind::Singular => {
            integrate(|m| singular_flow_field(m, op).expect("singular operator"), &m0, cfg, &label)?
        }
        OperatorKind::RigidBody => integrate(|m| rigid_body_field(m, op.b_diag()), &m0, cfg, &label)?,
    };
    let family = IntegralFamily::manakov(op.a_diag(), Carrier::So(n));
    let integrals = family_drifts(&family, &trajectory)?;
    let energy = energy_drift(op, &trajectory);
    let lax_spectrum = LAX_LAMBDAS
        .par_iter()
        .map(|&lambda| {
            let s0 = lax_spectrum(trajectory.first(), op.a_diag(), lambda)?;
            let mut drift: f64 = 0.0;
            for m in &trajectory.states {
                drift = drift.max(spectrum_drift(&s0, &lax_spectrum(m, op.a_diag(), lambda)?));
            }
            Ok(SpectrumDrift { lambda, drift })
        })
        .collect::<Result<Vec<_>, manakov_core::Error>>()?;
    // the isotropy momentum is a Noether charge when the interior operator is scalar
    let noether = match op.kind() {
        OperatorKind::RigidBody => Some(noether_drift(&trajectory, op.params().partition())),
        OperatorKind::Singular if op.has_scalar_interior() => Some(noether_drift(&trajectory, op.params().partition())),
        _ => None,
    };
    let report = finish_report(setup, label, None, initial, &trajectory, integrals, energy, lax_spectrum, noether, tol);
    Ok(Simulation { trajectory, report })
}

fn simulate_metric(setup: &Setup, spec: &MetricSpec, cfg: &IntegratorConfig, tol: &Tolerances) -> Result<Simulation, CliError> {
    let partition = spec.partition()?;
    let momenta = spec.momentum_space()?;
    let space = match spec {
        MetricSpec::Stiefel { .. } => Space::HeadComplement(partition.clone(), 1),
        _ => Space::Transversal(partition.clone()),
    };
    let (m0, initial) = initial_state(setup, &space, Some(&momenta))?;
    let op = spec.cometric()?;
    let label = metric_label(spec);
    let trajectory = integrate(|m| euler_field(m, &op), &m0, cfg, &label)?;
    let a = match spec {
        MetricSpec::SubmersionAB { params } => params.a_diag(),
        _ => SpectralParams::standard(partition.clone()).a_diag(),
    };
    let mut family = IntegralFamily::manakov(&a, Carrier::Span(momenta));
    if let MetricSpec::Stiefel { .. } = spec {
        family = family.with_linear_forms(&WedgeSpan::block(&partition, 1));
    }
    let integrals = family_drifts(&family, &trajectory)?;
    let energy = energy_drift(&op, &trajectory);
    let report =
        finish_report(setup, label, Some(spec.clone()), initial, &trajectory, integrals, energy, Vec::new(), None, tol);
    Ok(Simulation { trajectory, report })
}

fn metric_label(spec: &MetricSpec) -> String {
    match spec {
        MetricSpec::Normal { .. } => "normal".into(),
        MetricSpec::SubmersionAB { .. } => "submersion_a_b".into(),
        MetricSpec::Stiefel { .. } => "stiefel".into(),
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_report(
    setup: &Setup,
    dynamics: String,
    metric: Option<MetricSpec>,
    initial: InitialCondition,
    trajectory: &Trajectory,
    integrals: Vec<IntegralDrift>,
    energy: IntegralDrift,
    lax_spectrum: Vec<SpectrumDrift>,
    noether: Option<f64>,
    tol: &Tolerances,
) -> ConservationReport {
    let max_drift = integrals
        .iter()
        .map(|d| d.drift)
        .chain([energy.drift])
        .chain(lax_spectrum.iter().map(|s| s.drift))
        .fold(0.0, f64::max);
    let pass = max_drift <= tol.drift && noether.is_none_or(|d| d <= tol.noether);
    ConservationReport {
        command: "simulate",
        n: setup.raw.n,
        partition: setup.params.partition().parts().to_vec(),
        alphas: setup.params.alphas().to_vec(),
        betas: setup.params.betas().to_vec(),
        dynamics,
        metric,
        integrator: setup.raw.integrator.clone(),
        initial,
        samples: trajectory.len(),
        integrals,
        energy,
        lax_spectrum,
        noether,
        max_drift,
        tolerances: tol.clone(),
        pass,
    }
}

fn context(setup: &Setup, params: SpectralParams, operator: OperatorKind, interior: Option<Matrix>) -> VerifyContext {
    VerifyContext { params, operator, interior, l_split: setup.l_split, tolerances: setup.tolerances.clone() }
}

/// Runs every `(target, seed)` pair in parallel and aggregates per target.
fn run_targets(targets: &[Target], ctx: &VerifyContext, seeds: &[u64]) -> Result<Vec<CompletenessVerdict>, CliError> {
    let jobs: Vec<(usize, u64)> = targets
        .iter()
        .enumerate()
        .filter(|(_, &t)| applicable(t, ctx))
        .flat_map(|(i, _)| seeds.iter().map(move |&s| (i, s)))
        .collect();
    let points = jobs
        .par_iter()
        .map(|&(i, seed)| run_point(targets[i], ctx, seed).map(|p| (i, p)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut grouped: BTreeMap<usize, Vec<_>> = BTreeMap::new();
    for (i, p) in points {
        grouped.entry(i).or_default().push(p);
    }
    Ok(targets
        .iter()
        .enumerate()
        .map(|(i, &t)| aggregate(t, ctx, grouped.remove(&i).unwrap_or_default()))
        .collect())
}

pub fn verify(setup: &Setup) -> Result<VerifyReport, CliError> {
    if setup.targets.is_empty() {
        return Err(CliError::field("targets", "verify needs at least one target"));
    }
    let ctx = context(setup, setup.params.clone(), setup.operator, setup.interior.clone());
    let verdicts = run_targets(&setup.targets, &ctx, &setup.seeds)?;
    let pass = verdicts.iter().all(CompletenessVerdict::passed);
    Ok(VerifyReport {
        command: "verify",
        n: setup.raw.n,
        partition: setup.params.partition().parts().to_vec(),
        alphas: setup.params.alphas().to_vec(),
        betas: setup.params.betas().to_vec(),
        operator: setup.operator,
        l_split: setup.l_split,
        lax_lambdas: LAX_LAMBDAS.to_vec(),
        max_resamples: MAX_RESAMPLES,
        verdicts,
        pass,
    })
}

/// Operator used for a sweep partition: standard parameters, regular on the trivial
/// partition and singular otherwise, unless the config asks for a rigid body.
fn sweep_context(setup: &Setup, partition: &BlockPartition) -> Result<VerifyContext, CliError> {
    let r = partition.blocks();
    if setup.operator == OperatorKind::RigidBody {
        let op = SectionalOperator::rigid_body(partition.clone(), (1..=r).map(|p| p as f64).collect())?;
        return Ok(context(setup, op.params().clone(), OperatorKind::RigidBody, None));
    }
    let params = SpectralParams::standard(partition.clone());
    let kind = if r == partition.n() { OperatorKind::Regular } else { OperatorKind::Singular };
    build_operator(&params, kind, None)?;
    let mut ctx = context(setup, params, kind, None);
    ctx.l_split = ctx.l_split.min(r);
    Ok(ctx)
}

fn rank_over_passing(v: &CompletenessVerdict, key: &str) -> Option<usize> {
    v.per_point.iter().filter(|p| p.status == PointStatus::Pass).filter_map(|p| p.ranks.get(key).copied()).max()
}

pub fn sweep(setup: &Setup) -> Result<Vec<SweepRow>, CliError> {
    if setup.targets.is_empty() {
        return Err(CliError::field("targets", "sweep needs at least one target"));
    }
    let partitions = setup.sweep_partitions()?;
    let contexts = partitions.iter().map(|p| sweep_context(setup, p)).collect::<Result<Vec<_>, _>>()?;
    let verdicts = contexts
        .par_iter()
        .map(|ctx| run_targets(&setup.targets, ctx, &setup.seeds))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (p, per_target) in partitions.iter().zip(verdicts) {
        for v in per_target {
            let label = p.parts().iter().map(|k| k.to_string()).collect::<Vec<_>>().join("+");
            rows.push(SweepRow {
                n: v.n,
                partition: label,
                target: v.theorem.to_string(),
                verdict: serde_json::to_value(v.verdict).ok().and_then(|s| s.as_str().map(String::from)).unwrap_or_default(),
                points: v.per_point.len(),
                pass: v.counts.pass,
                fail: v.counts.fail,
                non_generic: v.counts.non_generic,
                ddim: rank_over_passing(&v, "ddim"),
                dind: rank_over_passing(&v, "dind"),
                lhs: rank_over_passing(&v, "lhs"),
                rank_target: rank_over_passing(&v, "target"),
            });
        }
    }
    Ok(rows)
}
