//! Weighted undirected graphs and their combinatorial Laplacian.
//!
//! Node ids in input files are arbitrary positive integers. Internally nodes
//! are indexed `0..n` in ascending order of their external id, and the
//! mapping is kept so results can be written back with the original ids.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// An undirected edge as read from an edge list, using external node ids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawEdge {
    pub u: u64,
    pub v: u64,
    pub weight: f64,
}

impl RawEdge {
    pub fn new(u: u64, v: u64, weight: f64) -> Self {
        RawEdge { u, v, weight }
    }
}

/// An edge between internal node indices, with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Geographic position in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::InvalidCoordinate { lat, lon });
        }
        Ok(LatLon { lat, lon })
    }
}

/// Simple connected graph with strictly positive edge weights.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    ids: Vec<u64>,
    index: HashMap<u64, usize>,
    edges: Vec<Edge>,
    coords: Vec<Option<LatLon>>,
}

impl WeightedGraph {
    /// Validates an edge list and builds the graph.
    ///
    /// Coordinates for ids that do not appear in any edge are ignored.
    pub fn build(edges: &[RawEdge], coords: Option<&BTreeMap<u64, LatLon>>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::EmptyGraph);
        }

        let mut id_set = BTreeSet::new();
        let mut seen = BTreeSet::new();
        for e in edges {
            for id in [e.u, e.v] {
                if id == 0 {
                    return Err(Error::InvalidNodeId(id));
                }
            }
            if e.u == e.v {
                return Err(Error::SelfLoop(e.u));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::NonPositiveWeight {
                    u: e.u,
                    v: e.v,
                    weight: e.weight,
                });
            }
            let key = (e.u.min(e.v), e.u.max(e.v));
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge(key.0, key.1));
            }
            id_set.insert(e.u);
            id_set.insert(e.v);
        }

        let ids: Vec<u64> = id_set.into_iter().collect();
        let index: HashMap<u64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let edges: Vec<Edge> = edges
            .iter()
            .map(|e| {
                let (a, b) = (index[&e.u], index[&e.v]);
                Edge {
                    u: a.min(b),
                    v: a.max(b),
                    weight: e.weight,
                }
            })
            .collect();

        let coords = match coords {
            Some(map) => ids.iter().map(|id| map.get(id).copied()).collect(),
            None => vec![None; ids.len()],
        };

        let graph = WeightedGraph {
            ids,
            index,
            edges,
            coords,
        };
        let components = graph.component_count();
        if components != 1 {
            return Err(Error::DisconnectedGraph { components });
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// External id of internal node `i`.
    pub fn external_id(&self, i: usize) -> u64 {
        self.ids[i]
    }

    pub fn external_ids(&self) -> &[u64] {
        &self.ids
    }

    /// Internal index of an external id.
    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn coord(&self, i: usize) -> Option<LatLon> {
        self.coords[i]
    }

    /// All coordinates, or the first node lacking one.
    pub fn coords(&self) -> Result<Vec<LatLon>> {
        self.coords
            .iter()
            .enumerate()
            .map(|(i, c)| c.ok_or(Error::MissingCoordinates(self.ids[i])))
            .collect()
    }

    fn component_count(&self) -> usize {
        let n = self.node_count();
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut seen = vec![false; n];
        let mut components = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        components
    }

    /// Sum over edges of `w_uv (x_u - x_v)^2`.
    pub fn dirichlet_energy(&self, x: &[f64]) -> f64 {
        self.edges.iter().map(|e| e.weight * (x[e.u] - x[e.v]).powi(2)).sum()
    }

    /// Combinatorial Laplacian `L = D - A`.
    pub fn laplacian(&self) -> LaplacianMatrix {
        let n = self.node_count();
        let mut m = DMatrix::zeros(n, n);
        for e in &self.edges {
            m[(e.u, e.v)] -= e.weight;
            m[(e.v, e.u)] -= e.weight;
            m[(e.u, e.u)] += e.weight;
            m[(e.v, e.v)] += e.weight;
        }
        LaplacianMatrix { entries: m }
    }
}

/// Dense symmetric Laplacian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    entries: DMatrix<f64>,
}

impl LaplacianMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut total = 0.0;
        for j in 0..n {
            let col = self.entries.column(j);
            let dot: f64 = col.iter().zip(x).map(|(a, b)| a * b).sum();
            total += x[j] * dot;
        }
        total
    }
}
