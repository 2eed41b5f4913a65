use crate::error::{invalid, Result};
use crate::graph::WeightedGraph;
use crate::model::PercConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Resumable sampler state: a configuration bitset plus what produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub graph_hash: String,
    pub beta: f64,
    pub h: f64,
    pub q: f64,
    pub seed: u64,
    pub sweep: u64,
    pub edge_count: usize,
    /// Little-endian bitset of open edges, hex encoded.
    pub bits: String,
}

impl Snapshot {
    pub fn capture(g: &WeightedGraph, (beta, h, q): (f64, f64, f64), seed: u64, sweep: u64, w: &PercConfig) -> Self {
        let mut bytes = vec![0u8; w.open.len().div_ceil(8)];
        for (i, &b) in w.open.iter().enumerate() {
            if b {
                bytes[i / 8] |= 1 << (i % 8);
            }
        }
        Snapshot {
            graph_hash: g.hash_hex(),
            beta,
            h,
            q,
            seed,
            sweep,
            edge_count: w.open.len(),
            bits: hex::encode(bytes),
        }
    }

    /// Decodes the configuration, checking it belongs to `g`.
    pub fn config(&self, g: &WeightedGraph) -> Result<PercConfig> {
        if g.hash_hex() != self.graph_hash {
            return invalid("snapshot was taken on a different graph");
        }
        let bytes = hex::decode(&self.bits).map_err(|e| crate::error::Error::Invalid(format!("snapshot bits: {e}")))?;
        if bytes.len() != self.edge_count.div_ceil(8) || self.edge_count != g.edge_count() {
            return invalid("snapshot bitset has the wrong length");
        }
        Ok(PercConfig { open: (0..self.edge_count).map(|i| bytes[i / 8] >> (i % 8) & 1 == 1).collect() })
    }
}

pub fn write_snapshot(path: &Path, s: &Snapshot) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(s)? + "\n")?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
