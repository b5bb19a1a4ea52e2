//! On-disk spectrum cache keyed by a hash of the graph's edge list.
//!
//! Layout (little endian): 8-byte magic, `n: u64`, `n` eigenvalues as f64,
//! then the `n x n` eigenvector matrix column by column.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::spectral::SpectralBasis;

const MAGIC: &[u8; 8] = b"GDSPEC01";

/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "GRAPHDESIGN_CACHE_DIR";

/// Hex SHA-256 over the edges in internal order, with external ids and exact weight bits.
pub fn graph_key(graph: &WeightedGraph) -> String {
    let mut edges: Vec<(u64, u64, u64)> = graph
        .edges()
        .iter()
        .map(|e| (graph.external_id(e.u), graph.external_id(e.v), e.weight.to_bits()))
        .collect();
    edges.sort_unstable();
    let mut h = Sha256::new();
    h.update((edges.len() as u64).to_le_bytes());
    for (u, v, w) in edges {
        h.update(u.to_le_bytes());
        h.update(v.to_le_bytes());
        h.update(w.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn cache_path(dir: &Path, graph: &WeightedGraph) -> PathBuf {
    dir.join(format!("{}.spec", graph_key(graph)))
}

pub fn write_spectrum(path: &Path, basis: &SpectralBasis) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(MAGIC)?;
        w.write_all(&(basis.dim() as u64).to_le_bytes())?;
        for x in basis.eigenvalues().iter().chain(basis.eigenvectors().as_slice()) {
            w.write_all(&x.to_le_bytes())?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_spectrum(path: &Path, lambda_rel_tol: f64) -> Result<SpectralBasis> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::format(path, "not a spectrum cache file"));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    let mut next = || -> Result<f64> {
        r.read_exact(&mut word)?;
        Ok(f64::from_le_bytes(word))
    };
    let eigenvalues = (0..n).map(|_| next()).collect::<Result<Vec<_>>>()?;
    let data = (0..n * n).map(|_| next()).collect::<Result<Vec<_>>>()?;
    SpectralBasis::from_parts(eigenvalues, DMatrix::from_vec(n, n, data), lambda_rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RawEdge;
    use crate::spectral::{eigendecompose, DEFAULT_LAMBDA_REL_TOL};

    #[test]
    fn round_trip_is_exact() {
        let g = WeightedGraph::build(
            &[
                RawEdge::new(1, 2, 0.3),
                RawEdge::new(2, 3, 1.7),
                RawEdge::new(3, 1, 2.0),
            ],
            None,
        )
        .unwrap();
        let basis = eigendecompose(&g.laplacian(), DEFAULT_LAMBDA_REL_TOL).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = cache_path(dir.path(), &g);
        write_spectrum(&path, &basis).unwrap();
        assert_eq!(read_spectrum(&path, DEFAULT_LAMBDA_REL_TOL).unwrap(), basis);
    }

    #[test]
    fn key_depends_on_weights_not_order() {
        let a = WeightedGraph::build(&[RawEdge::new(1, 2, 1.0), RawEdge::new(2, 3, 1.0)], None).unwrap();
        let b = WeightedGraph::build(&[RawEdge::new(3, 2, 1.0), RawEdge::new(2, 1, 1.0)], None).unwrap();
        let c = WeightedGraph::build(&[RawEdge::new(1, 2, 1.0), RawEdge::new(2, 3, 1.5)], None).unwrap();
        assert_eq!(graph_key(&a), graph_key(&b));
        assert_ne!(graph_key(&a), graph_key(&c));
    }

    #[test]
    fn rejects_foreign_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.spec");
        fs::write(&p, b"not a cache file at all").unwrap();
        assert!(read_spectrum(&p, DEFAULT_LAMBDA_REL_TOL).is_err());
    }
}
