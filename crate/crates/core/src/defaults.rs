//! Every default tolerance, sample count and integrator setting in one place.
//! Reports embed the values they were run with (see [`Tolerances`]).

use serde::{Deserialize, Serialize};

/// Multiplier on `max_dim * eps * sigma_max` for SVD rank thresholds.
pub const RANK_TOL_FACTOR: f64 = 1e4;
/// Largest principal-angle sine accepted for subspace equality/containment.
pub const SUBSPACE_TOL: f64 = 1e-8;
/// Normalized Poisson bracket threshold for involutivity.
pub const INVOLUTION_TOL: f64 = 1e-9;
/// Relative residual for algebraic identities (Manakov condition, Lax, split field, ...).
pub const IDENTITY_TOL: f64 = 1e-10;
/// Relative drift of conserved quantities along a trajectory.
pub const DRIFT_TOL: f64 = 1e-6;
/// Absolute drift of the `so(n)_A` Noether block.
pub const NOETHER_TOL: f64 = 1e-8;
/// Positivity threshold for sectional operators and metrics.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Fraction of sampled points at which a count identity must hold.
pub const PASS_FRACTION: f64 = 0.95;
/// Redraws of a point whose rank decisions are unstable.
pub const MAX_RESAMPLES: u64 = 3;
/// Guard in `|{f,g}| / (|grad f| |grad g| |M| + eps)`.
pub const NORMALIZATION_GUARD: f64 = 1e-300;

pub const IMPLICIT_MIDPOINT_TOL: f64 = 1e-13;
pub const IMPLICIT_MIDPOINT_MAX_ITER: usize = 50;
pub const STEP: f64 = 1e-3;
pub const HORIZON: f64 = 100.0;
pub const STRIDE: usize = 100;

/// Spectral parameters at which Lax spectra are monitored.
pub const LAX_LAMBDAS: [f64; 5] = [-1.5, -0.5, 0.25, 1.0, 2.0];
/// Seed for the default sample of the lambda-parametrized family `J`.
pub const BOLSINOV_LAMBDA_SEED: u64 = 0x4a_6f_76_61;

/// Effective tolerances of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub rank_factor: f64,
    pub subspace: f64,
    pub involution: f64,
    pub identity: f64,
    pub drift: f64,
    pub noether: f64,
    pub pass_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_factor: RANK_TOL_FACTOR,
            subspace: SUBSPACE_TOL,
            involution: INVOLUTION_TOL,
            identity: IDENTITY_TOL,
            drift: DRIFT_TOL,
            noether: NOETHER_TOL,
            pass_fraction: PASS_FRACTION,
        }
    }
}

impl Tolerances {
    /// Sets one field by name; returns `false` for an unknown key.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        let slot = match key {
            "rank_factor" => &mut self.rank_factor,
            "subspace" => &mut self.subspace,
            "involution" => &mut self.involution,
            "identity" => &mut self.identity,
            "drift" => &mut self.drift,
            "noether" => &mut self.noether,
            "pass_fraction" => &mut self.pass_fraction,
            _ => return false,
        };
        *slot = value;
        true
    }
}
