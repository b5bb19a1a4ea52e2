//! File formats: edge lists, coordinates, signals, events, cost vectors,
//! design JSON and sweep tables.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::{DesignProblem, IndexSet, SignalSet};
use crate::error::{Error, Result};
use crate::evaluate::Quartiles;
use crate::graph::{LatLon, RawEdge, WeightedGraph};
use crate::ingest::{Event, EventLog};
use crate::lp::GraphicalDesign;

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::format(path, e.to_string()))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::format(path, format!("missing column {name:?}")))
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, path: &Path) -> Result<T> {
    let raw = record.get(idx).unwrap_or("");
    raw.parse().map_err(|_| {
        let line = record.position().map_or(0, |p| p.line());
        Error::format(path, format!("line {line}: cannot parse {raw:?}"))
    })
}

/// Reads an undirected edge list with header `u,v,w`.
pub fn read_edges(path: &Path) -> Result<Vec<RawEdge>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers()?.clone();
    let (u, v, w) = (
        column(&headers, "u", path)?,
        column(&headers, "v", path)?,
        column(&headers, "w", path)?,
    );
    let mut edges = Vec::new();
    for record in rdr.records() {
        let record = record?;
        edges.push(RawEdge::new(
            field(&record, u, path)?,
            field(&record, v, path)?,
            field(&record, w, path)?,
        ));
    }
    Ok(edges)
}

/// Reads node coordinates with header `node,lat,lon`.
pub fn read_coords(path: &Path) -> Result<BTreeMap<u64, LatLon>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers()?.clone();
    let (node, lat, lon) = (
        column(&headers, "node", path)?,
        column(&headers, "lat", path)?,
        column(&headers, "lon", path)?,
    );
    let mut coords = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let id: u64 = field(&record, node, path)?;
        let c = LatLon::new(field(&record, lat, path)?, field(&record, lon, path)?)?;
        coords.insert(id, c);
    }
    Ok(coords)
}

/// Loads the graph from an edge list and optional coordinates file.
pub fn load_graph(edges: &Path, coords: Option<&Path>) -> Result<WeightedGraph> {
    let edges = read_edges(edges)?;
    let coords = coords.map(read_coords).transpose()?;
    WeightedGraph::build(&edges, coords.as_ref())
}

/// Reads a signal table `node,f1,...,fT`. Nodes absent from the file are zero.
pub fn read_signals(path: &Path, graph: &WeightedGraph) -> Result<SignalSet> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers()?.clone();
    let node = column(&headers, "node", path)?;
    let value_cols: Vec<usize> = (0..headers.len()).filter(|&i| i != node).collect();
    if value_cols.is_empty() {
        return Err(Error::format(path, "no function columns"));
    }
    let n = graph.node_count();
    let mut functions = vec![vec![0.0; n]; value_cols.len()];
    for record in rdr.records() {
        let record = record?;
        let id: u64 = field(&record, node, path)?;
        let i = graph.index_of(id).ok_or(Error::UnknownNode(id))?;
        for (t, &col) in value_cols.iter().enumerate() {
            functions[t][i] = field(&record, col, path)?;
        }
    }
    SignalSet::new(functions, n)
}

/// Writes `node,f1,...,fT` for every node in internal order.
pub fn write_signals(path: &Path, graph: &WeightedGraph, signals: &SignalSet) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["node".to_string()];
    header.extend((1..=signals.len()).map(|t| format!("f{t}")));
    w.write_record(&header)?;
    for i in 0..graph.node_count() {
        let mut row = vec![graph.external_id(i).to_string()];
        row.extend(signals.functions().iter().map(|f| f[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the sample mean as `node,mean`.
pub fn write_mean(path: &Path, graph: &WeightedGraph, signals: &SignalSet) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["node", "mean"])?;
    for (i, m) in signals.sample_mean().iter().enumerate() {
        w.write_record([graph.external_id(i).to_string(), m.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a per-node cost vector `node,cost`. Every node must be present.
pub fn read_costs(path: &Path, graph: &WeightedGraph) -> Result<Vec<f64>> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers()?.clone();
    let (node, cost) = (column(&headers, "node", path)?, column(&headers, "cost", path)?);
    let mut costs = vec![None; graph.node_count()];
    for record in rdr.records() {
        let record = record?;
        let id: u64 = field(&record, node, path)?;
        let i = graph.index_of(id).ok_or(Error::UnknownNode(id))?;
        costs[i] = Some(field(&record, cost, path)?);
    }
    costs
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| Error::format(path, format!("no cost for node {}", graph.external_id(i)))))
        .collect()
}

/// Reads events with columns `lat,lon,timestamp`; other columns are ignored.
pub fn read_events(path: &Path) -> Result<EventLog> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers()?.clone();
    let (lat, lon, ts) = (
        column(&headers, "lat", path)?,
        column(&headers, "lon", path)?,
        column(&headers, "timestamp", path)?,
    );
    let mut events = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let position = LatLon::new(field(&record, lat, path)?, field(&record, lon, path)?)?;
        let time = record.get(ts).unwrap_or("").parse()?;
        events.push(Event { position, time });
    }
    Ok(EventLog::new(events))
}

/// Writes `index,eigenvalue` with 1-based indices.
pub fn write_eigenvalues(path: &Path, eigenvalues: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "eigenvalue"])?;
    for (j, l) in eigenvalues.iter().enumerate() {
        w.write_record([(j + 1).to_string(), l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignNode {
    pub id: u64,
    pub weight: f64,
}

/// On-disk form of a design. `J` is 1-based; node ids are external ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub k: usize,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    pub strategy: String,
    pub objective: String,
    pub objective_value: f64,
    pub nodes: Vec<DesignNode>,
}

impl DesignFile {
    pub fn new(graph: &WeightedGraph, problem: &DesignProblem, design: &GraphicalDesign) -> Self {
        DesignFile {
            k: problem.k(),
            j: problem.j().to_one_based(),
            strategy: problem
                .strategy()
                .map_or_else(|| "custom".to_string(), |s| s.to_string()),
            objective: problem.objective().to_string(),
            objective_value: design.objective_value(),
            nodes: design
                .support()
                .iter()
                .map(|&i| DesignNode {
                    id: graph.external_id(i),
                    weight: design.weight(i),
                })
                .collect(),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut s = String::new();
        File::open(path)?.read_to_string(&mut s)?;
        Ok(serde_json::from_str(&s)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    /// Dense weights and index set on `graph`.
    pub fn to_design(&self, graph: &WeightedGraph, support_tol: f64) -> Result<(GraphicalDesign, IndexSet)> {
        let n = graph.node_count();
        let mut weights = vec![0.0; n];
        for node in &self.nodes {
            let i = graph.index_of(node.id).ok_or(Error::UnknownNode(node.id))?;
            weights[i] = node.weight;
        }
        let j = IndexSet::from_one_based(&self.j, n)?;
        let mut design = GraphicalDesign::from_weights(weights, &vec![0.0; n], support_tol)?;
        design = design.with_objective_value(self.objective_value);
        Ok((design, j))
    }
}

/// One `(k, function)` row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: usize,
    pub percent_of_nodes: f64,
    pub function_id: usize,
    /// Percent error, or an error marker.
    pub result: std::result::Result<f64, String>,
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "percent_of_nodes", "function_id", "percent_error"])?;
    for r in rows {
        let value = match &r.result {
            Ok(p) => p.to_string(),
            Err(e) => format!("error:{e}"),
        };
        w.write_record([
            r.k.to_string(),
            r.percent_of_nodes.to_string(),
            r.function_id.to_string(),
            value,
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub k: usize,
    pub percent_of_nodes: f64,
    pub quartiles: Option<Quartiles>,
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "percent_of_nodes", "median", "q25", "q75"])?;
    for r in rows {
        let (m, lo, hi) = match r.quartiles {
            Some(q) => (q.median.to_string(), q.q25.to_string(), q.q75.to_string()),
            None => ("error".into(), "error".into(), "error".into()),
        };
        w.write_record([r.k.to_string(), r.percent_of_nodes.to_string(), m, lo, hi])?;
    }
    w.flush()?;
    Ok(())
}
