//! Shared fixtures: seeded random graphs and an independent LP oracle.
#![allow(dead_code)]

use graphdesign::lp::StandardFormLP;
use graphdesign::spectral::{eigendecompose, DEFAULT_LAMBDA_REL_TOL};
use graphdesign::{Error, IndexSet, RawEdge, SpectralBasis, WeightedGraph};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn weight(rng: &mut ChaCha8Rng, weighted: bool) -> f64 {
    if weighted {
        rng.gen_range(0.5..2.0)
    } else {
        1.0
    }
}

/// Connected G(n, p), resampled until connected. Node ids are 1..=n.
pub fn erdos_renyi(rng: &mut ChaCha8Rng, n: usize, p: f64, weighted: bool) -> WeightedGraph {
    assert!(n >= 2);
    loop {
        let mut edges = Vec::new();
        for u in 1..=n as u64 {
            for v in u + 1..=n as u64 {
                if rng.gen_bool(p) {
                    edges.push(RawEdge::new(u, v, weight(rng, weighted)));
                }
            }
        }
        match build_spanning(n, &edges) {
            Ok(g) => return g,
            Err(Error::DisconnectedGraph { .. }) | Err(Error::InvalidNodeId(_)) | Err(Error::EmptyGraph) => continue,
            Err(e) => panic!("{e}"),
        }
    }
}

/// Random geometric graph in the unit square with its points, resampled until connected.
pub fn geometric(rng: &mut ChaCha8Rng, n: usize, radius: f64, weighted: bool) -> (WeightedGraph, Vec<(f64, f64)>) {
    assert!(n >= 2);
    loop {
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let d = ((pts[u].0 - pts[v].0).powi(2) + (pts[u].1 - pts[v].1).powi(2)).sqrt();
                if d <= radius {
                    edges.push(RawEdge::new(u as u64 + 1, v as u64 + 1, weight(rng, weighted)));
                }
            }
        }
        if let Ok(g) = build_spanning(n, &edges) {
            return (g, pts);
        }
    }
}

/// Radius giving a connected geometric graph with high probability.
pub fn connectivity_radius(n: usize) -> f64 {
    1.5 * ((n as f64).ln() / (std::f64::consts::PI * n as f64)).sqrt()
}

/// Builds the graph, rejecting edge sets that leave a node isolated.
fn build_spanning(n: usize, edges: &[RawEdge]) -> graphdesign::Result<WeightedGraph> {
    let g = WeightedGraph::build(edges, None)?;
    if g.node_count() != n {
        return Err(Error::DisconnectedGraph { components: 2 });
    }
    Ok(g)
}

/// Either an Erdős–Rényi or a geometric graph on `n` nodes, chosen by `rng`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> WeightedGraph {
    if rng.gen_bool(0.5) {
        let p = (2.0 * (n as f64).ln() / n as f64).clamp(0.05, 0.9);
        erdos_renyi(rng, n, p, true)
    } else {
        geometric(rng, n, connectivity_radius(n).min(1.0), true).0
    }
}

pub fn spectrum(g: &WeightedGraph) -> SpectralBasis {
    eigendecompose(&g.laplacian(), DEFAULT_LAMBDA_REL_TOL).unwrap()
}

/// `J` with index 0 and `size - 1` other distinct indices.
pub fn random_j(rng: &mut ChaCha8Rng, n: usize, size: usize) -> IndexSet {
    let mut rest: Vec<usize> = (1..n).collect();
    rest.shuffle(rng);
    let mut j = vec![0];
    j.extend(rest.into_iter().take(size - 1));
    IndexSet::new(j, n).unwrap()
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rank of a dense matrix by singular values, relative tolerance 1e-10.
pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0_f64, f64::max);
    sv.iter().filter(|&&s| s > 1e-10 * top.max(1.0)).count()
}

fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < i + n - k) else {
            return;
        };
        idx[i] += 1;
        for t in i + 1..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

/// Every basic feasible solution of `{A x = b, x >= 0}`, found by trying each
/// set of `rank(A)` columns. Only for tiny instances.
pub fn enumerate_vertices(lp: &StandardFormLP) -> Vec<Vec<f64>> {
    let a = lp.a_eq();
    let b = DVector::from_column_slice(lp.b_eq());
    let (m, n) = (a.nrows(), a.ncols());
    assert_eq!(rank(a), m, "oracle expects full row rank");
    let mut out = Vec::new();
    combinations(n, m, |cols| {
        let bm = DMatrix::from_fn(m, m, |r, c| a[(r, cols[c])]);
        if rank(&bm) < m {
            return;
        }
        let Some(xb) = bm.lu().solve(&b) else { return };
        if xb.iter().any(|&v| v < -1e-10) {
            return;
        }
        let mut x = vec![0.0; n];
        for (c, &col) in cols.iter().enumerate() {
            x[col] = xb[c].max(0.0);
        }
        out.push(x);
    });
    out
}

/// Minimum of `c^T x` over all vertices, or `None` if infeasible.
pub fn oracle_optimum(lp: &StandardFormLP) -> Option<f64> {
    enumerate_vertices(lp)
        .iter()
        .map(|x| dot(lp.cost(), x))
        .min_by(f64::total_cmp)
}

/// Whether `x` is a vertex: feasible, with linearly independent support columns.
pub fn is_vertex(lp: &StandardFormLP, x: &[f64], tol: f64) -> bool {
    let a = lp.a_eq();
    if x.iter().any(|&v| v < -tol) {
        return false;
    }
    for r in 0..a.nrows() {
        let lhs: f64 = (0..a.ncols()).map(|c| a[(r, c)] * x[c]).sum();
        if (lhs - lp.b_eq()[r]).abs() > tol {
            return false;
        }
    }
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] > tol).collect();
    let sub = DMatrix::from_fn(a.nrows(), support.len(), |r, c| a[(r, support[c])]);
    rank(&sub) == support.len()
}

/// Smooth positive demand surface on the unit square: a floor plus a few
/// Gaussian bumps with random centers, widths and heights.
pub fn smooth_base(rng: &mut ChaCha8Rng, pts: &[(f64, f64)]) -> Vec<f64> {
    let bumps: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen(),
                rng.gen(),
                rng.gen_range(0.15..0.35),
                rng.gen_range(5.0..20.0),
            )
        })
        .collect();
    pts.iter()
        .map(|&(x, y)| {
            1.0 + bumps
                .iter()
                .map(|&(cx, cy, w, h)| h * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * w * w)).exp())
                .sum::<f64>()
        })
        .collect()
}

/// `count` noisy copies of `base`, each entry scaled by `1 + noise * U(-1, 1)`.
pub fn noisy_copies(rng: &mut ChaCha8Rng, base: &[f64], count: usize, noise: f64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            base.iter()
                .map(|&b| b * (1.0 + noise * rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect()
}

pub fn write_edges(path: &std::path::Path, g: &WeightedGraph) {
    let mut s = String::from("u,v,w\n");
    for e in g.edges() {
        s.push_str(&format!("{},{},{}\n", g.external_id(e.u), g.external_id(e.v), e.weight));
    }
    std::fs::write(path, s).unwrap();
}

/// Maps unit-square points into a small box of latitude and longitude.
pub fn to_latlon(p: (f64, f64)) -> (f64, f64) {
    (40.70 + 0.08 * p.1, -74.02 + 0.08 * p.0)
}

pub fn write_coords(path: &std::path::Path, g: &WeightedGraph, pts: &[(f64, f64)]) {
    let mut s = String::from("node,lat,lon\n");
    for (i, &p) in pts.iter().enumerate() {
        let (lat, lon) = to_latlon(p);
        s.push_str(&format!("{},{lat},{lon}\n", g.external_id(i)));
    }
    std::fs::write(path, s).unwrap();
}

pub fn write_signals(path: &std::path::Path, g: &WeightedGraph, fs: &[Vec<f64>]) {
    let mut s = String::from("node");
    for t in 1..=fs.len() {
        s.push_str(&format!(",f{t}"));
    }
    s.push('\n');
    for i in 0..g.node_count() {
        s.push_str(&g.external_id(i).to_string());
        for f in fs {
            s.push_str(&format!(",{}", f[i]));
        }
        s.push('\n');
    }
    std::fs::write(path, s).unwrap();
}
