#![allow(dead_code)]

use ftconsensus::Topology;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random graph on `n` vertices: each pair is an edge with probability `p`,
/// weights uniform in `[w_lo, w_hi)`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, w_lo: f64, w_hi: f64) -> Topology {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j, rng.gen_range(w_lo..w_hi)));
            }
        }
    }
    Topology::new(n, &edges).unwrap()
}

/// Rejection-samples a connected random graph.
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, p: f64, w_lo: f64, w_hi: f64) -> Topology {
    loop {
        let t = random_graph(rng, n, p, w_lo, w_hi);
        if t.is_connected() {
            return t;
        }
    }
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Prints one verdict line and returns whether it passed.
pub fn verdict(id: &str, passed: bool, detail: &str) -> bool {
    println!("[{}] {id}: {detail}", if passed { "PASS" } else { "FAIL" });
    passed
}
