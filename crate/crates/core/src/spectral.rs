//! Symmetric eigenvalues by cyclic Jacobi rotations, and algebraic connectivity.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Topology;

/// Sweep budget. Real symmetric input converges in well under 20 sweeps.
pub const MAX_SWEEPS: usize = 100;

/// Stop once the off-diagonal Frobenius norm falls below this fraction of the
/// input's Frobenius norm.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// `max_k ‖M v_k − λ_k v_k‖∞` over the computed eigenpairs.
    pub residual: f64,
}

/// Eigenvalues of `m` with eigenvector columns aligned to them, ascending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn eigenvalues_symmetric(m: &DMatrix<f64>) -> Result<SpectrumResult> {
    let eig = jacobi_eigen(m)?;
    let residual = residual(m, &eig);
    Ok(SpectrumResult {
        eigenvalues: eig.values,
        residual,
    })
}

/// Cyclic Jacobi diagonalization of a symmetric matrix.
pub fn jacobi_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::NotSymmetric);
    }
    let scale = m.amax();
    for i in 0..n {
        for j in i + 1..n {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOLERANCE * scale {
                return Err(Error::NotSymmetric);
            }
        }
    }

    // symmetrize so that roundoff-level asymmetry does not leak in
    let mut a = (m + m.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let threshold = OFF_DIAGONAL_TOLERANCE * a.norm();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen { values, vectors })
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// One rotation in the (p, q) plane that annihilates `a[p][q]`.
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let n = a.nrows();
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r != p && r != q {
            let arp = a[(r, p)];
            let arq = a[(r, q)];
            let new_rp = c * arp - s * arq;
            let new_rq = s * arp + c * arq;
            a[(r, p)] = new_rp;
            a[(p, r)] = new_rp;
            a[(r, q)] = new_rq;
            a[(q, r)] = new_rq;
        }
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}

fn residual(m: &DMatrix<f64>, eig: &SymmetricEigen) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, &lambda) in eig.values.iter().enumerate() {
        let vk: DVector<f64> = eig.vectors.column(k).into_owned();
        let r = m * &vk - &vk * lambda;
        worst = worst.max(r.amax());
    }
    worst
}

/// Second smallest Laplacian eigenvalue `λ2(L)`.
///
/// A single vertex has no second eigenvalue; it is reported as `+∞`, the
/// infimum of the Rayleigh quotient over the empty set of nonzero vectors
/// orthogonal to the ones vector, which makes every settling-time bound zero.
pub fn algebraic_connectivity(t: &Topology) -> Result<f64> {
    if t.n() == 1 {
        return Ok(f64::INFINITY);
    }
    let spectrum = eigenvalues_symmetric(t.laplacian().matrix())?;
    Ok(spectrum.eigenvalues[1])
}

/// Eigenvector of the Laplacian belonging to `λ2`, unit length.
pub fn fiedler_vector(t: &Topology) -> Result<Vec<f64>> {
    if t.n() < 2 {
        return Err(Error::InvalidArgument(
            "a Fiedler vector needs at least two vertices".into(),
        ));
    }
    let eig = jacobi_eigen(t.laplacian().matrix())?;
    Ok(eig.vectors.column(1).iter().copied().collect())
}

/// Checks `xᵀ L x ≥ λ2 · xᵀx` for a nonzero `x` orthogonal to the ones vector.
pub fn rayleigh_bound_check(t: &Topology, x: &[f64]) -> Result<bool> {
    if x.len() != t.n() {
        return Err(Error::DimensionMismatch {
            expected: t.n(),
            found: x.len(),
        });
    }
    let sum: f64 = x.iter().sum();
    let abs_sum: f64 = x.iter().map(|v| v.abs()).sum();
    if abs_sum == 0.0 {
        return Err(Error::InvalidArgument("x must be nonzero".into()));
    }
    if sum.abs() > 1e-9 * abs_sum {
        return Err(Error::NotZeroSum(sum));
    }
    let lambda2 = algebraic_connectivity(t)?;
    let quad = t.laplacian().quadratic_form(x);
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    let scale = 1.0 + quad.abs() + lambda2 * norm2;
    Ok(quad >= lambda2 * norm2 - 1e-9 * scale)
}
