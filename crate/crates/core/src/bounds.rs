//! Lyapunov functions and closed-form settling-time bounds.
//!
//! Both protocols satisfy a differential inequality of the form
//! `dV/dt ≤ −K·V^((1+α)/2)`, which integrates to the envelope
//! `V(t) ≤ (V(0)^((1−α)/2) − K(1−α)t/2)^(2/(1−α))` and a finite hitting time.
//! For P1 the energy is `V1 = ¼ ΣΣ a_ij (x_j − x_i)²` with `K1 = (2λ2(L_A))^((1+α)/2)`;
//! for P2 it is `V2 = ½ Σ δ_i²` with `K2 = 2^α·λ2(L_B)^((1+α)/2)`, where `B` is the
//! exponent-transformed weight matrix.
//!
//! The time bounds take scalars so the same functions serve fixed graphs,
//! switching schedules and reproduction of reference numbers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Topology;

#[derive(Debug, Clone, PartialEq)]
pub struct DisagreementDecomposition {
    /// Average of the states.
    pub kappa: f64,
    /// `x − κ·1`.
    pub delta: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub alpha: f64,
    pub v1_0: f64,
    pub v2_0: f64,
    pub lambda2_a: f64,
    pub lambda2_b: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: Option<f64>,
    /// Minimum of `λ2(L_B)` over the scheduled graphs.
    pub lambda_min: Option<f64>,
    pub t1_limit_alpha0: f64,
    /// `(max x(0) − min x(0))/2`, the α → 0 hitting time of P1 (reference only).
    pub alpha0_reference_time: f64,
}

/// `m(n, p) = min(n^(1−p), 1)`, the constant with `Σ y_i^p ≥ m·(Σ y_i)^p` for `y ≥ 0`.
pub fn lemma1_constant(n: usize, p: f64) -> Result<f64> {
    if n == 0 || !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lemma1_constant needs n >= 1 and p > 0, got n = {n}, p = {p}"
        )));
    }
    Ok((n as f64).powf(1.0 - p).min(1.0))
}

/// `V1 = ¼ ΣΣ a_ij (x_j − x_i)²`.
pub fn v1(t: &Topology, x: &[f64]) -> Result<f64> {
    if t.n() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: t.n(),
            found: x.len(),
        });
    }
    Ok(v1_unchecked(t, x))
}

pub(crate) fn v1_unchecked(t: &Topology, x: &[f64]) -> f64 {
    // each unordered pair appears twice in the double sum
    let mut s = 0.0;
    for (i, j, w) in t.edges() {
        let d = x[j] - x[i];
        s += w * d * d;
    }
    0.5 * s
}

pub fn disagreement(x: &[f64]) -> DisagreementDecomposition {
    let kappa = mean(x);
    let delta = x.iter().map(|v| v - kappa).collect();
    DisagreementDecomposition { kappa, delta }
}

/// `V2 = ½ Σ (x_i − mean(x))²`; independent of the topology.
pub fn v2(x: &[f64]) -> f64 {
    let kappa = mean(x);
    0.5 * x.iter().map(|v| (v - kappa) * (v - kappa)).sum::<f64>()
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(Error::DisconnectedTopology);
    }
    Ok(())
}

fn check_energy(v: f64) -> Result<()> {
    if v.is_nan() || v < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "initial energy must be nonnegative, got {v}"
        )));
    }
    Ok(())
}

/// `K1 = (2λ2(L_A))^((1+α)/2)`.
pub fn k1(lambda2_a: f64, alpha: f64) -> f64 {
    (2.0 * lambda2_a).powf((1.0 + alpha) / 2.0)
}

/// `K2 = 2^α·λ2(L_B)^((1+α)/2)`.
pub fn k2(lambda2_b: f64, alpha: f64) -> f64 {
    2f64.powf(alpha) * lambda2_b.powf((1.0 + alpha) / 2.0)
}

/// `t1 = (2V1(0))^((1−α)/2) / ((1−α)·λ2(L_A)^((1+α)/2))`.
pub fn t1_bound(v1_0: f64, lambda2_a: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_lambda(lambda2_a)?;
    check_energy(v1_0)?;
    if v1_0 == 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * v1_0).powf((1.0 - alpha) / 2.0)
        / ((1.0 - alpha) * lambda2_a.powf((1.0 + alpha) / 2.0)))
}

/// `√(2V1(0)/λ2(L_A))`, the α → 0 limit of `t1`.
pub fn t1_limit_alpha0(v1_0: f64, lambda2_a: f64) -> Result<f64> {
    check_lambda(lambda2_a)?;
    check_energy(v1_0)?;
    Ok((2.0 * v1_0 / lambda2_a).sqrt())
}

/// `t2 = 2^(1−α)·V2(0)^((1−α)/2) / ((1−α)·λ2(L_B)^((1+α)/2))`.
pub fn t2_bound(v2_0: f64, lambda2_b: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_lambda(lambda2_b)?;
    check_energy(v2_0)?;
    if v2_0 == 0.0 {
        return Ok(0.0);
    }
    Ok(2f64.powf(1.0 - alpha) * v2_0.powf((1.0 - alpha) / 2.0)
        / ((1.0 - alpha) * lambda2_b.powf((1.0 + alpha) / 2.0)))
}

/// Switching-topology bound: `t2` evaluated at `λ = min λ2(L_B)` over the
/// graphs the schedule visits.
pub fn t3_bound(v2_0: f64, lambda_min: f64, alpha: f64) -> Result<f64> {
    t2_bound(v2_0, lambda_min, alpha)
}

/// `(max(0, v0^((1−α)/2) − K(1−α)t/2))^(2/(1−α))`.
///
/// Past the hitting time the base is clamped at zero, so the envelope stays 0.
pub fn envelope(v_0: f64, k: f64, alpha: f64, t: f64) -> f64 {
    let q = (1.0 - alpha) / 2.0;
    let base = (v_0.powf(q) - k * q * t).max(0.0);
    base.powf(1.0 / q)
}

/// Time at which `envelope` first reaches zero: `2·v0^((1−α)/2) / (K(1−α))`.
pub fn envelope_zero_time(v_0: f64, k: f64, alpha: f64) -> f64 {
    2.0 * v_0.powf((1.0 - alpha) / 2.0) / (k * (1.0 - alpha))
}
