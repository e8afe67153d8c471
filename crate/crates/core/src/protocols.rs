//! Agreement protocol vector fields.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProtocolKind {
    /// `u_i = sig(Σ_j a_ij (x_j − x_i), α)`
    P1,
    /// `u_i = Σ_j a_ij sig(x_j − x_i, α)`
    P2,
    /// `u = −L x`, the `α = 1` case of both protocols.
    Linear,
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProtocolKind::P1 => "p1",
            ProtocolKind::P2 => "p2",
            ProtocolKind::Linear => "linear",
        })
    }
}

impl FromStr for ProtocolKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "p1" => Ok(ProtocolKind::P1),
            "p2" => Ok(ProtocolKind::P2),
            "linear" => Ok(ProtocolKind::Linear),
            other => Err(format!(
                "unknown protocol `{other}` (expected p1, p2 or linear)"
            )),
        }
    }
}

/// A protocol together with its exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSpec {
    kind: ProtocolKind,
    alpha: f64,
}

impl ProtocolSpec {
    /// `alpha` must lie in `(0, 1)` for P1/P2 and equal 1 for the linear protocol.
    pub fn new(kind: ProtocolKind, alpha: f64) -> Result<Self> {
        let ok = match kind {
            ProtocolKind::P1 | ProtocolKind::P2 => alpha > 0.0 && alpha < 1.0,
            ProtocolKind::Linear => alpha == 1.0,
        };
        if !ok {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        Ok(Self { kind, alpha })
    }

    pub fn p1(alpha: f64) -> Result<Self> {
        Self::new(ProtocolKind::P1, alpha)
    }

    pub fn p2(alpha: f64) -> Result<Self> {
        Self::new(ProtocolKind::P2, alpha)
    }

    pub fn linear() -> Self {
        Self {
            kind: ProtocolKind::Linear,
            alpha: 1.0,
        }
    }

    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Evaluates `u(x)` for this protocol.
    pub fn field(&self, t: &Topology, x: &[f64]) -> Result<Vec<f64>> {
        check_dims(t, x)?;
        let mut out = vec![0.0; x.len()];
        self.field_into(t, x, &mut out);
        Ok(out)
    }

    /// Unchecked evaluation into a caller-provided buffer; used by the integrator.
    pub(crate) fn field_into(&self, t: &Topology, x: &[f64], out: &mut [f64]) {
        match self.kind {
            ProtocolKind::P1 => p1_into(t, x, self.alpha, out),
            ProtocolKind::P2 => p2_into(t, x, self.alpha, out),
            ProtocolKind::Linear => linear_into(t, x, out),
        }
    }
}

/// Agent states; every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState);
        }
        Ok(Self(x))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for StateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// `sign(r)·|r|^α`, exactly odd in `r` and exactly zero at `r = 0`.
pub fn sig(r: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(sig_unchecked(r, alpha))
}

#[inline]
pub(crate) fn sig_unchecked(r: f64, alpha: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let m = if alpha == 1.0 {
        r.abs()
    } else {
        r.abs().powf(alpha)
    };
    if r > 0.0 {
        m
    } else {
        -m
    }
}

fn check_dims(t: &Topology, x: &[f64]) -> Result<()> {
    if t.n() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: t.n(),
            found: x.len(),
        });
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(())
}

pub fn protocol1_field(t: &Topology, x: &[f64], alpha: f64) -> Result<Vec<f64>> {
    check_dims(t, x)?;
    check_alpha(alpha)?;
    let mut out = vec![0.0; x.len()];
    p1_into(t, x, alpha, &mut out);
    Ok(out)
}

pub fn protocol2_field(t: &Topology, x: &[f64], alpha: f64) -> Result<Vec<f64>> {
    check_dims(t, x)?;
    check_alpha(alpha)?;
    let mut out = vec![0.0; x.len()];
    p2_into(t, x, alpha, &mut out);
    Ok(out)
}

pub fn linear_field(t: &Topology, x: &[f64]) -> Result<Vec<f64>> {
    check_dims(t, x)?;
    let mut out = vec![0.0; x.len()];
    linear_into(t, x, &mut out);
    Ok(out)
}

fn p1_into(t: &Topology, x: &[f64], alpha: f64, out: &mut [f64]) {
    linear_into(t, x, out);
    for u in out.iter_mut() {
        *u = sig_unchecked(*u, alpha);
    }
}

// Edge-wise accumulation: each edge contributes +f to one endpoint and -f to
// the other, so the field sums to zero up to summation roundoff.
fn p2_into(t: &Topology, x: &[f64], alpha: f64, out: &mut [f64]) {
    out.fill(0.0);
    let n = x.len();
    let w = t.weights();
    for i in 0..n {
        for j in i + 1..n {
            let a = w[(i, j)];
            if a > 0.0 {
                let f = a * sig_unchecked(x[j] - x[i], alpha);
                out[i] += f;
                out[j] -= f;
            }
        }
    }
}

fn linear_into(t: &Topology, x: &[f64], out: &mut [f64]) {
    let n = x.len();
    let w = t.weights();
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            let a = w[(i, j)];
            if a > 0.0 {
                s += a * (x[j] - x[i]);
            }
        }
        out[i] = s;
    }
}

/// Whether `x` is an equilibrium of `p` on `t`, judged by `‖u(x)‖∞ ≤ tol`.
///
/// On a connected graph the equilibria are exactly the constant states. On a
/// disconnected graph that characterization fails, so the query is refused.
pub fn is_equilibrium(t: &Topology, x: &[f64], p: &ProtocolSpec, tol: f64) -> Result<bool> {
    if !t.is_connected() {
        return Err(Error::DisconnectedTopology);
    }
    let u = p.field(t, x)?;
    Ok(u.iter().all(|v| v.abs() <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close_all(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn sig_values() {
        assert_eq!(sig(4.0, 0.5).unwrap(), 2.0);
        assert_eq!(sig(-9.0, 0.5).unwrap(), -3.0);
        assert_eq!(sig(0.0, 0.3).unwrap(), 0.0);
        assert_eq!(sig(-0.0, 0.3).unwrap(), 0.0);
        assert_eq!(sig(-2.5, 1.0).unwrap(), -2.5);
        assert!(matches!(sig(1.0, 0.0), Err(Error::AlphaOutOfRange(_))));
        assert!(matches!(sig(1.0, 1.5), Err(Error::AlphaOutOfRange(_))));
        for r in [0.1, 1.7, 123.0] {
            assert_eq!(sig(-r, 0.37).unwrap(), -sig(r, 0.37).unwrap());
        }
    }

    #[test]
    fn two_agent_fields() {
        let t = Topology::new(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(
            protocol1_field(&t, &[0.0, 1.0], 0.5).unwrap(),
            vec![1.0, -1.0]
        );
        assert_eq!(
            protocol2_field(&t, &[0.0, 1.0], 0.5).unwrap(),
            vec![1.0, -1.0]
        );
    }

    #[test]
    fn constant_state_is_still() {
        let t = Topology::complete(5, 1.3).unwrap();
        let x = [7.0; 5];
        assert!(protocol1_field(&t, &x, 0.4)
            .unwrap()
            .iter()
            .all(|&u| u == 0.0));
        assert!(protocol2_field(&t, &x, 0.4)
            .unwrap()
            .iter()
            .all(|&u| u == 0.0));
        assert!(linear_field(&t, &x).unwrap().iter().all(|&u| u == 0.0));
    }

    #[test]
    fn path_three_hand_values() {
        let t = Topology::path(3, 1.0).unwrap();
        let x = [0.0, 0.0, 4.0];
        assert!(close_all(
            &protocol1_field(&t, &x, 0.5).unwrap(),
            &[0.0, 2.0, -2.0],
            1e-15
        ));
        assert!(close_all(
            &protocol2_field(&t, &x, 0.5).unwrap(),
            &[0.0, 2.0, -2.0],
            1e-15
        ));
        assert!(close_all(
            &linear_field(&t, &x).unwrap(),
            &[0.0, 4.0, -4.0],
            0.0
        ));
    }

    #[test]
    fn triangle_protocol2() {
        let t = Topology::complete(3, 1.0).unwrap();
        let u = protocol2_field(&t, &[0.0, 1.0, 4.0], 0.5).unwrap();
        let s3 = 3f64.sqrt();
        assert!(close_all(&u, &[3.0, -1.0 + s3, -2.0 - s3], 1e-14));
        assert!(u.iter().sum::<f64>().abs() < 1e-14);
    }

    #[test]
    fn linear_matches_laplacian() {
        let t = Topology::new(4, &[(0, 1, 1.5), (1, 2, 0.5), (2, 3, 2.0), (0, 3, 1.0)]).unwrap();
        let x = [1.0, -2.0, 0.5, 3.0];
        let lx = t.laplacian().apply(&x);
        let u = linear_field(&t, &x).unwrap();
        for (a, b) in u.iter().zip(&lx) {
            assert!((a + b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        let near = protocol2_field(&t, &x, 0.999).unwrap();
        assert!(close_all(&near, &u, 1e-2));
    }

    #[test]
    fn dimension_mismatch() {
        let t = Topology::path(3, 1.0).unwrap();
        assert!(matches!(
            protocol1_field(&t, &[0.0, 1.0], 0.5),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
        assert!(matches!(
            protocol2_field(&t, &[0.0, 1.0, 2.0], 1.0),
            Err(Error::AlphaOutOfRange(_))
        ));
        assert!(linear_field(&t, &[0.0]).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(ProtocolSpec::p1(0.5).is_ok());
        assert!(ProtocolSpec::p2(0.0).is_err());
        assert!(ProtocolSpec::p2(1.0).is_err());
        assert!(ProtocolSpec::new(ProtocolKind::Linear, 0.5).is_err());
        assert_eq!(ProtocolSpec::linear().alpha(), 1.0);
        assert_eq!("p2".parse::<ProtocolKind>().unwrap(), ProtocolKind::P2);
        assert!("p3".parse::<ProtocolKind>().is_err());
    }

    #[test]
    fn equilibrium() {
        let t = Topology::cycle(5, 2.0).unwrap();
        let p = ProtocolSpec::p2(0.5).unwrap();
        assert!(is_equilibrium(&t, &[7.0; 5], &p, 1e-9).unwrap());
        assert!(!is_equilibrium(&t, &[0.0, 0.0, 1.0, 0.5, 0.2], &p, 1e-9).unwrap());
        let triangles = Topology::new(
            6,
            &[
                (0, 1, 1.0),
                (1, 2, 1.0),
                (0, 2, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (3, 5, 1.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            is_equilibrium(&triangles, &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0], &p, 1e-9),
            Err(Error::DisconnectedTopology)
        ));
    }

    #[test]
    fn state_vector_rejects_nan() {
        assert!(StateVector::new(vec![1.0, f64::NAN]).is_err());
        assert_eq!(&*StateVector::new(vec![1.0, 2.0]).unwrap(), &[1.0, 2.0]);
    }
}
