//! Time integration of `Ṁ = [M, Ω]`, Lax-pair monitoring and conservation drifts.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::defaults::{IMPLICIT_MIDPOINT_MAX_ITER, IMPLICIT_MIDPOINT_TOL, HORIZON, STEP, STRIDE};
use crate::error::{Error, Result};
use crate::liealg::{bracket, diag_matrix, BlockPartition, Matrix, WedgeSpan};
use crate::linalg::frobenius;
use crate::math::sqrt;
use crate::sectional::{Cometric, OperatorKind, SectionalOperator};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Rk4,
    ImplicitMidpoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub method: Method,
    pub step: f64,
    pub horizon: f64,
    /// Record every `stride`-th state.
    pub stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { method: Method::Rk4, step: STEP, horizon: HORIZON, stride: STRIDE }
    }
}

impl IntegratorConfig {
    pub fn new(method: Method, step: f64, horizon: f64, stride: usize) -> Result<Self> {
        let cfg = IntegratorConfig { method, step, horizon, stride };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("integrator step must be positive (got {})", self.step)));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "integrator horizon must be positive (got {})",
                self.horizon
            )));
        }
        if self.step > self.horizon {
            return Err(Error::InvalidParameter(alloc::format!(
                "integrator step {} exceeds horizon {}",
                self.step,
                self.horizon
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("integrator stride must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps; the last step is shortened if `horizon / step` is not integral.
    pub fn steps(&self) -> usize {
        let ratio = self.horizon / self.step;
        let rounded = libm::round(ratio);
        if (ratio - rounded).abs() <= 1e-9 * ratio {
            rounded as usize
        } else {
            libm::ceil(ratio) as usize
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub label: String,
    pub method: Method,
    pub step: f64,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Matrix>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn first(&self) -> &Matrix {
        &self.states[0]
    }

    pub fn last(&self) -> &Matrix {
        &self.states[self.states.len() - 1]
    }
}

/// `[M, 𝔄(M)]`.
pub fn euler_field<C: Cometric + ?Sized>(m: &Matrix, op: &C) -> Matrix {
    bracket(m, &op.omega(m))
}

/// The split singular field: `[M_h, 𝔅 M_h]` on `so(n)_A`, and on `v`
/// `[M_h, C M_v] + [M_v, 𝔅 M_h] + [M_v, C M_v]_v` with `C = ad_A^{-1} ad_B`.
pub fn singular_flow_field(m: &Matrix, op: &SectionalOperator) -> Result<Matrix> {
    if op.kind() != OperatorKind::Singular {
        return Err(Error::WrongOperatorKind { expected: "singular" });
    }
    let partition = op.params().partition();
    let iso = WedgeSpan::isotropy(partition);
    let v = WedgeSpan::transversal(partition);
    let m_h = iso.project(m);
    let m_v = v.project(m);
    let b_h = op.interior_omega(&m_h);
    let c_v = op.transversal_omega(&m_v);
    let iso_part = bracket(&m_h, &b_h);
    let v_part = bracket(&m_h, &c_v) + bracket(&m_v, &b_h) + v.project(&bracket(&m_v, &c_v));
    Ok(iso_part + v_part)
}

/// `‖[M_v, ad_A^{-1} ad_B M_v]_{so(n)_A}‖_F`, which vanishes identically.
pub fn isotropy_leak(m: &Matrix, op: &SectionalOperator) -> f64 {
    let partition = op.params().partition();
    let m_v = WedgeSpan::transversal(partition).project(m);
    frobenius(&WedgeSpan::isotropy(partition).project(&bracket(&m_v, &op.transversal_omega(&m_v))))
}

/// `Ṁ_ij = Σ_k (b_i - b_j) / ((b_k + b_i)(b_k + b_j)) M_ik M_kj`.
pub fn rigid_body_field(m: &Matrix, b: &[f64]) -> Matrix {
    let n = b.len();
    Matrix::from_fn(n, n, |i, j| {
        let d = b[i] - b[j];
        if d == 0.0 {
            return 0.0;
        }
        (0..n).map(|k| d / ((b[k] + b[i]) * (b[k] + b[j])) * m[(i, k)] * m[(k, j)]).sum()
    })
}

fn skew_in_place(x: &mut Matrix) {
    let n = x.nrows();
    for i in 0..n {
        x[(i, i)] = 0.0;
        for j in (i + 1)..n {
            let v = 0.5 * (x[(i, j)] - x[(j, i)]);
            x[(i, j)] = v;
            x[(j, i)] = -v;
        }
    }
}

fn rk4_step<F: Fn(&Matrix) -> Matrix>(field: &F, m: &Matrix, h: f64) -> Matrix {
    let k1 = field(m);
    let k2 = field(&(m + &k1 * (0.5 * h)));
    let k3 = field(&(m + &k2 * (0.5 * h)));
    let k4 = field(&(m + &k3 * h));
    m + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

fn midpoint_step<F: Fn(&Matrix) -> Matrix>(field: &F, m: &Matrix, h: f64, step: usize) -> Result<Matrix> {
    let mut next = m + field(m) * h;
    let scale = frobenius(m).max(1.0);
    for _ in 0..IMPLICIT_MIDPOINT_MAX_ITER {
        let mid = (m + &next) * 0.5;
        let update = m + field(&mid) * h;
        let change = frobenius(&(&update - &next));
        next = update;
        if change <= IMPLICIT_MIDPOINT_TOL * scale {
            return Ok(next);
        }
    }
    Err(Error::NonConvergence { step })
}

/// Integrates `Ṁ = field(M)` from `m0`, re-skewing after every step.
pub fn integrate<F: Fn(&Matrix) -> Matrix>(
    field: F,
    m0: &Matrix,
    cfg: &IntegratorConfig,
    label: &str,
) -> Result<Trajectory> {
    cfg.validate()?;
    let steps = cfg.steps();
    let mut m = m0.clone();
    skew_in_place(&mut m);
    let mut times = alloc::vec![0.0];
    let mut states = alloc::vec![m.clone()];
    let mut t = 0.0;
    for step in 1..=steps {
        let h = if step == steps { cfg.horizon - t } else { cfg.step };
        m = match cfg.method {
            Method::Rk4 => rk4_step(&field, &m, h),
            Method::ImplicitMidpoint => midpoint_step(&field, &m, h, step)?,
        };
        skew_in_place(&mut m);
        t = if step == steps { cfg.horizon } else { step as f64 * cfg.step };
        if step % cfg.stride == 0 || step == steps {
            times.push(t);
            states.push(m.clone());
        }
    }
    let meta = TrajectoryMeta { label: label.into(), method: cfg.method, step: cfg.step, seed: None };
    Ok(Trajectory { times, states, meta })
}

/// `‖euler_field(M) - [M + λA, Ω + λB]‖_F`.
pub fn lax_residual(m: &Matrix, op: &SectionalOperator, lambda: f64) -> f64 {
    let omega = op.omega(m);
    let a = diag_matrix(op.a_diag());
    let b = diag_matrix(op.b_diag());
    let lhs = bracket(m, &omega);
    let rhs = bracket(&(m + &a * lambda), &(&omega + &b * lambda));
    frobenius(&(lhs - rhs))
}

/// Eigenvalues of `M + λ diag(a)` as `(re, im)`, sorted lexicographically.
pub fn lax_spectrum(m: &Matrix, a: &[f64], lambda: f64) -> Result<Vec<(f64, f64)>> {
    let l = m + diag_matrix(a) * lambda;
    let ev = l.complex_eigenvalues();
    let mut out: Vec<(f64, f64)> = ev.iter().map(|z| (z.re, z.im)).collect();
    if out.iter().any(|(re, im)| !re.is_finite() || !im.is_finite()) {
        return Err(Error::EigenFailure);
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    Ok(out)
}

/// Largest displacement between two spectra, each eigenvalue of `before` matched
/// to its nearest unused partner in `after`, relative to `max(|z|, 1)`.
pub fn spectrum_drift(before: &[(f64, f64)], after: &[(f64, f64)]) -> f64 {
    if before.len() != after.len() {
        return f64::INFINITY;
    }
    let mut used = alloc::vec![false; after.len()];
    let mut worst: f64 = 0.0;
    for &(re, im) in before {
        let mut best = (f64::INFINITY, usize::MAX);
        for (k, &(r2, i2)) in after.iter().enumerate() {
            if used[k] {
                continue;
            }
            let d = sqrt((re - r2) * (re - r2) + (im - i2) * (im - i2));
            if d < best.0 {
                best = (d, k);
            }
        }
        used[best.1] = true;
        worst = worst.max(best.0 / sqrt(re * re + im * im).max(1.0));
    }
    worst
}

/// `max_t |v(t) - v(0)| / max(|v(0)|, 1)`.
pub fn relative_drift(values: &[f64]) -> f64 {
    let Some(&v0) = values.first() else { return 0.0 };
    let scale = v0.abs().max(1.0);
    values.iter().map(|v| (v - v0).abs() / scale).fold(0.0, f64::max)
}

/// `max_t ‖M_{so(n)_A}(t) - M_{so(n)_A}(0)‖_F`.
pub fn noether_drift(traj: &Trajectory, partition: &BlockPartition) -> f64 {
    let iso = WedgeSpan::isotropy(partition);
    if iso.dim() == 0 || traj.is_empty() {
        return 0.0;
    }
    let c0 = iso.coords(traj.first());
    traj.states.iter().map(|m| (iso.coords(m) - &c0).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{sample_generic, wedge, Space, SpectralParams};
    use crate::linalg::frobenius;
    use crate::sectional::{rigid_body_omega, MetricSpec};
    use crate::SkewMatrix;

    fn regular3() -> SectionalOperator {
        let p = SpectralParams::new(BlockPartition::trivial(3), alloc::vec![1.0, 2.0, 3.0], alloc::vec![2.0, 3.0, 5.0])
            .unwrap();
        SectionalOperator::regular(p).unwrap()
    }

    fn singular(parts: Vec<usize>, interior: Option<Matrix>) -> SectionalOperator {
        let partition = BlockPartition::new(parts).unwrap();
        let params = SpectralParams::standard(partition);
        SectionalOperator::singular(params, interior).unwrap()
    }

    #[test]
    fn euler_field_equilibria() {
        let op = regular3();
        assert_eq!(euler_field(&wedge(3, 1, 2), &op), Matrix::zeros(3, 3));
        assert_eq!(euler_field(&Matrix::zeros(3, 3), &op), Matrix::zeros(3, 3));
        let normal = MetricSpec::Normal { partition: BlockPartition::trivial(3) }.cometric().unwrap();
        let m = sample_generic(1, &Space::So(3));
        assert!(euler_field(&m, &normal).abs().max() == 0.0);
    }

    #[test]
    fn split_field_matches_euler_field() {
        let interior = {
            let r = sample_generic(3, &Space::So(4));
            let base = Matrix::from_fn(4, 4, |i, j| r[(i, j)] + if i == j { 3.0 } else { 0.0 });
            &base * base.transpose()
        };
        let op = singular(alloc::vec![3, 2, 1], Some(interior));
        for seed in 0..100 {
            let m = sample_generic(seed, &Space::So(6));
            let split = singular_flow_field(&m, &op).unwrap();
            let full = euler_field(&m, &op);
            let scale = frobenius(&m) * frobenius(&op.omega(&m));
            assert!(frobenius(&(split - full)) <= 1e-12 * scale);
            assert!(isotropy_leak(&m, &op) <= 1e-12 * scale);
        }
        assert!(singular_flow_field(&sample_generic(0, &Space::So(3)), &regular3()).is_err());
    }

    #[test]
    fn split_field_identity_interior() {
        let op = singular(alloc::vec![2, 3], None);
        let iso = WedgeSpan::isotropy(op.params().partition());
        let m = sample_generic(5, &Space::So(5));
        let f = singular_flow_field(&m, &op).unwrap();
        assert!(frobenius(&iso.project(&f)) <= 1e-14);
    }

    #[test]
    fn rigid_body_field_matches_commutator() {
        let b = [1.0, 1.0, 2.0, 2.0];
        for seed in 0..100 {
            let m = sample_generic(seed, &Space::So(4));
            let om = rigid_body_omega(&SkewMatrix::new(&m).unwrap(), &b).unwrap();
            let diff = rigid_body_field(&m, &b) - bracket(&m, om.as_matrix());
            assert!(frobenius(&diff) <= 1e-12 * frobenius(&m).powi(2));
        }
    }

    #[test]
    fn rigid_body_field_trivial_cases() {
        let m = sample_generic(2, &Space::So(4));
        assert_eq!(rigid_body_field(&m, &[1.5; 4]), Matrix::zeros(4, 4));
        assert_eq!(rigid_body_field(&wedge(4, 0, 2), &[1.0, 2.0, 3.0, 4.0]), Matrix::zeros(4, 4));
    }

    #[test]
    fn zero_field_is_constant() {
        let m0 = sample_generic(4, &Space::So(4));
        let cfg = IntegratorConfig::new(Method::Rk4, 0.1, 1.0, 1).unwrap();
        let traj = integrate(|m: &Matrix| Matrix::zeros(m.nrows(), m.ncols()), &m0, &cfg, "zero").unwrap();
        assert_eq!(traj.len(), 11);
        assert!(traj.states.iter().all(|s| *s == m0));
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*traj.times.last().unwrap(), 1.0);
    }

    #[test]
    fn integrator_config_validation() {
        assert!(IntegratorConfig::new(Method::Rk4, 0.0, 1.0, 1).is_err());
        assert!(IntegratorConfig::new(Method::Rk4, 2.0, 1.0, 1).is_err());
        assert!(IntegratorConfig::new(Method::Rk4, 0.1, 1.0, 0).is_err());
        assert_eq!(IntegratorConfig::new(Method::Rk4, 1e-3, 100.0, 1).unwrap().steps(), 100_000);
        assert_eq!(IntegratorConfig::new(Method::Rk4, 0.3, 1.0, 1).unwrap().steps(), 4);
    }

    #[test]
    fn casimir_conserved_short_run() {
        let op = regular3();
        let m0 = sample_generic(7, &Space::So(3));
        for method in [Method::Rk4, Method::ImplicitMidpoint] {
            let cfg = IntegratorConfig::new(method, 1e-2, 5.0, 10).unwrap();
            let traj = integrate(|m: &Matrix| euler_field(m, &op), &m0, &cfg, "regular").unwrap();
            let casimir: Vec<f64> = traj.states.iter().map(|m| crate::liealg::pairing(m, m)).collect();
            assert!(relative_drift(&casimir) <= 1e-8, "{method:?}");
        }
    }

    #[test]
    fn lax_residual_examples() {
        let op = regular3();
        let m = sample_generic(9, &Space::So(3));
        assert_eq!(lax_residual(&m, &op, 0.0), 0.0);
        for lambda in [-1.7, 0.3, 1.9] {
            assert!(lax_residual(&m, &op, lambda) <= 1e-12 * frobenius(&m) * 10.0);
        }
    }

    #[test]
    fn lax_spectrum_of_wedge() {
        let s = lax_spectrum(&wedge(4, 0, 1), &[0.0; 4], 0.0).unwrap();
        let expected = [(0.0, -1.0), (0.0, 0.0), (0.0, 0.0), (0.0, 1.0)];
        for (z, e) in s.iter().zip(expected) {
            assert!((z.0 - e.0).abs() < 1e-14 && (z.1 - e.1).abs() < 1e-14);
        }
        let big = lax_spectrum(&sample_generic(1, &Space::So(3)), &[1.0, 2.0, 3.0], 1e6).unwrap();
        for (z, a) in big.iter().zip([1.0, 2.0, 3.0]) {
            assert!((z.0 / 1e6 - a).abs() < 1e-5);
        }
    }

    #[test]
    fn spectrum_drift_matches_nearest() {
        let a = [(0.0, -1.0), (0.0, 1.0)];
        let b = [(1e-9, 1.0), (-1e-9, -1.0)];
        assert!(spectrum_drift(&a, &b) < 2e-9);
        assert_eq!(spectrum_drift(&a, &a[..1]), f64::INFINITY);
    }

    #[test]
    fn noether_drift_trivial_partition() {
        let m0 = sample_generic(4, &Space::So(3));
        let cfg = IntegratorConfig::new(Method::Rk4, 0.01, 0.1, 1).unwrap();
        let traj = integrate(|m: &Matrix| rigid_body_field(m, &[1.0, 2.0, 3.0]), &m0, &cfg, "rb").unwrap();
        assert_eq!(noether_drift(&traj, &BlockPartition::trivial(3)), 0.0);
    }

    #[test]
    fn relative_drift_scale() {
        assert_eq!(relative_drift(&[0.0, 1e-3]), 1e-3);
        assert_eq!(relative_drift(&[10.0, 11.0]), 0.1);
        assert_eq!(relative_drift(&[]), 0.0);
    }
}
