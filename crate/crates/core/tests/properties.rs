//! Property tests for graph algebra, protocol fields, spectra and bounds.

mod common;

use ftconsensus::bounds::{self, k1, k2, t1_bound, t1_limit_alpha0, t2_bound};
use ftconsensus::protocols::{is_equilibrium, linear_field, protocol1_field, protocol2_field, sig};
use ftconsensus::scenario::{parse_scenario, render_scenario};
use ftconsensus::sim::{integrate, observed_convergence_time};
use ftconsensus::spectral::{algebraic_connectivity, eigenvalues_symmetric, rayleigh_bound_check};
use ftconsensus::{ProtocolSpec, Scenario, Topology};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Weighted graph on 2..=max_n vertices, each pair present with probability ~1/2.
fn graph(max_n: usize) -> impl Strategy<Value = Topology> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        prop::collection::vec(prop::option::weighted(0.5, 0.1f64..5.0), pairs).prop_map(move |ws| {
            let mut edges = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if let Some(w) = ws[k] {
                        edges.push((i, j, w));
                    }
                    k += 1;
                }
            }
            Topology::new(n, &edges).unwrap()
        })
    })
}

fn connected_graph(max_n: usize) -> impl Strategy<Value = Topology> {
    graph(max_n).prop_filter("connected", |t| t.is_connected())
}

fn graph_and_state(max_n: usize) -> impl Strategy<Value = (Topology, Vec<f64>)> {
    graph(max_n).prop_flat_map(|t| {
        let n = t.n();
        (Just(t), prop::collection::vec(-10.0f64..10.0, n))
    })
}

fn connected_and_state(max_n: usize) -> impl Strategy<Value = (Topology, Vec<f64>)> {
    connected_graph(max_n).prop_flat_map(|t| {
        let n = t.n();
        (Just(t), prop::collection::vec(-10.0f64..10.0, n))
    })
}

fn alpha() -> impl Strategy<Value = f64> {
    0.05f64..0.95
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Roots of the characteristic cubic of a symmetric 3x3 matrix, ascending.
fn symmetric3_eigenvalues(m: &DMatrix<f64>) -> [f64; 3] {
    let p1 = m[(0, 1)].powi(2) + m[(0, 2)].powi(2) + m[(1, 2)].powi(2);
    let q = m.trace() / 3.0;
    let p2 = (m[(0, 0)] - q).powi(2) + (m[(1, 1)] - q).powi(2) + (m[(2, 2)] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return [q; 3];
    }
    let b = (m - DMatrix::identity(3, 3) * q) / p;
    let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [lo, 3.0 * q - hi - lo, hi]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn laplacian_quadratic_form_is_half_double_sum((t, x) in graph_and_state(7)) {
        let mut sum = 0.0;
        for i in 0..t.n() {
            for j in 0..t.n() {
                sum += t.weight(i, j) * (x[j] - x[i]).powi(2);
            }
        }
        let q = t.laplacian().quadratic_form(&x);
        prop_assert!(close(q, 0.5 * sum, 1e-12));
        prop_assert!(close(bounds::v1(&t, &x).unwrap(), 0.25 * sum, 1e-12));
    }

    #[test]
    fn laplacian_rows_sum_to_zero(t in graph(8)) {
        let l = t.laplacian();
        for i in 0..t.n() {
            let row: f64 = l.matrix().row(i).iter().sum();
            prop_assert!(row.abs() < 1e-12);
        }
        prop_assert_eq!(l.matrix(), &l.matrix().transpose());
    }

    #[test]
    fn fields_depend_only_on_neighbors((t, x) in graph_and_state(6), a in alpha(), i in 0usize..6, shift in -5.0f64..5.0) {
        let i = i % t.n();
        // perturbing a non-neighbor of i leaves u_i unchanged
        let Some(k) = (0..t.n()).find(|&k| k != i && t.weight(i, k) == 0.0) else { return Ok(()); };
        let mut y = x.clone();
        y[k] += shift;
        let f1 = protocol1_field(&t, &x, a).unwrap();
        let g1 = protocol1_field(&t, &y, a).unwrap();
        let f2 = protocol2_field(&t, &x, a).unwrap();
        let g2 = protocol2_field(&t, &y, a).unwrap();
        prop_assert_eq!(f1[i], g1[i]);
        prop_assert_eq!(f2[i], g2[i]);
    }

    #[test]
    fn fields_are_permutation_equivariant((t, x) in graph_and_state(6), a in alpha(), seed in any::<u64>()) {
        let n = t.n();
        let mut perm: Vec<usize> = (0..n).collect();
        // Fisher-Yates driven by the seed
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let tp = t.permuted(&perm).unwrap();
        // vertex i of t becomes vertex perm[i] of tp
        let mut xp = vec![0.0; n];
        for i in 0..n {
            xp[perm[i]] = x[i];
        }
        for p in [ProtocolSpec::p1(a).unwrap(), ProtocolSpec::p2(a).unwrap(), ProtocolSpec::linear()] {
            let u = p.field(&t, &x).unwrap();
            let up = p.field(&tp, &xp).unwrap();
            for i in 0..n {
                prop_assert!(close(up[perm[i]], u[i], 1e-12));
            }
        }
    }

    #[test]
    fn fields_are_translation_invariant((t, x) in graph_and_state(6), a in alpha(), c in -100.0f64..100.0) {
        let y: Vec<f64> = x.iter().map(|v| v + c).collect();
        for p in [ProtocolSpec::p1(a).unwrap(), ProtocolSpec::p2(a).unwrap(), ProtocolSpec::linear()] {
            let u = p.field(&t, &x).unwrap();
            let v = p.field(&t, &y).unwrap();
            for (ui, vi) in u.iter().zip(&v) {
                prop_assert!((ui - vi).abs() <= 1e-9 * (1.0 + ui.abs()) * (1.0 + c.abs()));
            }
        }
    }

    #[test]
    fn fields_are_homogeneous_of_degree_alpha((t, x) in graph_and_state(6), a in alpha(), c in 0.01f64..100.0) {
        let y: Vec<f64> = x.iter().map(|v| v * c).collect();
        let scale = c.powf(a);
        for p in [ProtocolSpec::p1(a).unwrap(), ProtocolSpec::p2(a).unwrap()] {
            let u = p.field(&t, &x).unwrap();
            let v = p.field(&t, &y).unwrap();
            for (ui, vi) in u.iter().zip(&v) {
                prop_assert!(close(*vi, scale * ui, 1e-11));
            }
        }
        let u = linear_field(&t, &x).unwrap();
        let v = linear_field(&t, &y).unwrap();
        for (ui, vi) in u.iter().zip(&v) {
            prop_assert!(close(*vi, c * ui, 1e-11));
        }
    }

    #[test]
    fn protocol2_field_sums_to_zero((t, x) in graph_and_state(8), a in alpha()) {
        let u = protocol2_field(&t, &x, a).unwrap();
        let total: f64 = u.iter().sum();
        let scale: f64 = u.iter().map(|v| v.abs()).sum();
        prop_assert!(total.abs() <= 1e-12 * (1.0 + scale));
    }

    #[test]
    fn sig_is_odd_and_monotone(r in -1e3f64..1e3, s in -1e3f64..1e3, a in alpha()) {
        prop_assert_eq!(sig(-r, a).unwrap(), -sig(r, a).unwrap());
        if r < s {
            prop_assert!(sig(r, a).unwrap() <= sig(s, a).unwrap());
        }
    }

    #[test]
    fn consensus_states_are_equilibria(t in connected_graph(6), c in -10.0f64..10.0, a in alpha()) {
        let x = vec![c; t.n()];
        for p in [ProtocolSpec::p1(a).unwrap(), ProtocolSpec::p2(a).unwrap(), ProtocolSpec::linear()] {
            prop_assert!(is_equilibrium(&t, &x, &p, 1e-12).unwrap());
        }
    }

    #[test]
    fn non_consensus_states_are_not_equilibria((t, x) in connected_and_state(6), a in alpha()) {
        let spread = x.iter().cloned().fold(f64::MIN, f64::max) - x.iter().cloned().fold(f64::MAX, f64::min);
        prop_assume!(spread > 1e-3);
        for p in [ProtocolSpec::p1(a).unwrap(), ProtocolSpec::p2(a).unwrap(), ProtocolSpec::linear()] {
            prop_assert!(!is_equilibrium(&t, &x, &p, 1e-12).unwrap());
        }
    }

    #[test]
    fn eigenvalues_scale_linearly(t in graph(7), c in 0.1f64..10.0) {
        let l = t.laplacian();
        let base = eigenvalues_symmetric(l.matrix()).unwrap().eigenvalues;
        let scaled = eigenvalues_symmetric(&(l.matrix() * c)).unwrap().eigenvalues;
        let top = base.last().copied().unwrap_or(0.0);
        for (b, s) in base.iter().zip(&scaled) {
            prop_assert!((s - c * b).abs() <= 1e-10 * c * (1.0 + top));
        }
    }

    #[test]
    fn jacobi_matches_cubic_roots(entries in prop::array::uniform6(-5.0f64..5.0)) {
        let [a, b, c, d, e, f] = entries;
        let m = DMatrix::from_row_slice(3, 3, &[a, d, e, d, b, f, e, f, c]);
        let jacobi = eigenvalues_symmetric(&m).unwrap().eigenvalues;
        let cubic = symmetric3_eigenvalues(&m);
        for (x, y) in jacobi.iter().zip(cubic.iter()) {
            prop_assert!((x - y).abs() < 1e-9, "{jacobi:?} vs {cubic:?}");
        }
    }

    #[test]
    fn lambda2_lower_bounds_the_rayleigh_quotient((t, x) in connected_and_state(7)) {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let d: Vec<f64> = x.iter().map(|v| v - mean).collect();
        prop_assume!(d.iter().any(|v| v.abs() > 1e-6));
        prop_assert!(rayleigh_bound_check(&t, &d).unwrap());
    }

    #[test]
    fn v1_dominates_lambda2_times_v2((t, x) in connected_and_state(7)) {
        let l2 = algebraic_connectivity(&t).unwrap();
        let v1 = bounds::v1(&t, &x).unwrap();
        let v2 = bounds::v2(&x);
        // V1 = ½ δᵀLδ ≥ λ2 · ½|δ|² = λ2 · V2
        prop_assert!(v1 >= l2 * v2 * (1.0 - 1e-10) - 1e-12);
    }

    #[test]
    fn t1_is_monotone_in_inputs(v in 0.1f64..1e3, l in 0.05f64..10.0, a in alpha()) {
        let t = t1_bound(v, l, a).unwrap();
        prop_assert!(t1_bound(2.0 * v, l, a).unwrap() > t);
        prop_assert!(t1_bound(v, 2.0 * l, a).unwrap() < t);
        prop_assert!(t2_bound(v, l, a).unwrap() > 0.0);
    }

    #[test]
    fn decay_constants_match_bounds(v in 0.1f64..1e3, l in 0.05f64..10.0, a in alpha()) {
        // each bound is the zero time of its envelope
        let q = (1.0 - a) / 2.0;
        let t1 = t1_bound(v, l, a).unwrap();
        prop_assert!(close(t1, v.powf(q) / (k1(l, a) * q), 1e-12));
        let t2 = t2_bound(v, l, a).unwrap();
        prop_assert!(close(t2, v.powf(q) / (k2(l, a) * q), 1e-12));
    }

    #[test]
    fn scenario_text_round_trips((t, x) in connected_and_state(5), a in alpha(), p2 in any::<bool>()) {
        let protocol = if p2 { ProtocolSpec::p2(a).unwrap() } else { ProtocolSpec::p1(a).unwrap() };
        let sc = Scenario::fixed(protocol, t, x).unwrap();
        let back = parse_scenario(&render_scenario(&sc)).unwrap();
        prop_assert_eq!(back.protocol.kind(), sc.protocol.kind());
        prop_assert_eq!(back.protocol.alpha(), sc.protocol.alpha());
        prop_assert_eq!(&back.x0[..], &sc.x0[..]);
        prop_assert_eq!(back.topologies, sc.topologies);
        prop_assert_eq!(back.dt, sc.dt);
        prop_assert_eq!(back.t_max, sc.t_max);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trajectories_are_translation_equivariant((t, x) in connected_and_state(5), a in alpha(), c in -50.0f64..50.0) {
        let y: Vec<f64> = x.iter().map(|v| v + c).collect();
        let p = ProtocolSpec::p2(a).unwrap();
        let base = integrate(&Scenario::fixed(p, t.clone(), x).unwrap()).unwrap();
        let shifted = integrate(&Scenario::fixed(p, t, y).unwrap()).unwrap();
        let (Some(t0), Some(t1)) = (observed_convergence_time(&base), observed_convergence_time(&shifted)) else {
            return Err(TestCaseError::fail("did not converge"));
        };
        prop_assert!((t0 - t1).abs() <= 0.05 * t0 + 0.01, "{t0} vs {t1}");
        prop_assert!((shifted.final_value.unwrap() - base.final_value.unwrap() - c).abs() < 1e-6);
    }
}

#[test]
fn t1_approaches_the_square_root_limit_as_alpha_vanishes() {
    let (v, l) = (338.0, 0.8);
    let limit = t1_limit_alpha0(v, l).unwrap();
    let mut previous = f64::INFINITY;
    for a in [1e-2, 1e-3, 1e-4, 1e-6] {
        let err = (t1_bound(v, l, a).unwrap() - limit).abs();
        assert!(err < previous);
        previous = err;
    }
    assert!(previous < 1e-4 * limit);
}

#[test]
fn t1_diverges_as_alpha_approaches_one() {
    let mut previous = 0.0;
    for a in [0.9, 0.99, 0.999, 0.9999] {
        let t = t1_bound(10.0, 1.0, a).unwrap();
        assert!(t > previous);
        previous = t;
    }
    assert!(previous > 1e3);
}

#[test]
fn integration_is_deterministic() {
    let t = Topology::cycle(5, 1.5).unwrap();
    let sc = Scenario::fixed(
        ProtocolSpec::p1(0.3).unwrap(),
        t,
        vec![3.0, -1.0, 4.0, -1.5, 9.0],
    )
    .unwrap();
    let a = integrate(&sc).unwrap();
    let b = integrate(&sc).unwrap();
    assert_eq!(a.samples.len(), b.samples.len());
    for (s, r) in a.samples.iter().zip(&b.samples) {
        assert_eq!(s.t.to_bits(), r.t.to_bits());
        assert!(s
            .x
            .iter()
            .zip(&r.x)
            .all(|(p, q)| p.to_bits() == q.to_bits()));
    }
    assert_eq!(a.converged_at, b.converged_at);
}
