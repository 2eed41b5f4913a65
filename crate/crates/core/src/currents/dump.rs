use crate::error::{invalid, Error, Result};
use crate::model::CurrentConfig;
use std::fmt::Write as _;

/// Sparse current dump: a header line of `key=value` pairs, then one `id value`
/// line per non-zero entry.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentDump {
    pub graph_hash: String,
    pub beta: f64,
    pub h: f64,
    pub seed: u64,
    pub sweep: u64,
    pub current: CurrentConfig,
}

impl CurrentDump {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "# current graph_hash={} beta={:?} h={:?} seed={} sweep={} len={}\n",
            self.graph_hash,
            self.beta,
            self.h,
            self.seed,
            self.sweep,
            self.current.n.len()
        );
        for (i, &k) in self.current.n.iter().enumerate() {
            if k > 0 {
                let _ = writeln!(s, "{i} {k}");
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().and_then(|l| l.strip_prefix("# current ")).ok_or_else(|| Error::Invalid("missing dump header".into()))?;
        let get = |key: &str| -> Result<String> {
            header
                .split_whitespace()
                .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .map(str::to_string)
                .ok_or_else(|| Error::Invalid(format!("dump header lacks {key}")))
        };
        let num = |s: String| -> Result<f64> { s.parse().map_err(|_| Error::Invalid(format!("bad number {s}"))) };
        let int = |s: String| -> Result<u64> { s.parse().map_err(|_| Error::Invalid(format!("bad integer {s}"))) };
        let graph_hash = get("graph_hash")?;
        let beta = num(get("beta")?)?;
        let h = num(get("h")?)?;
        let seed = int(get("seed")?)?;
        let sweep = int(get("sweep")?)?;
        let len = int(get("len")?)? as usize;
        let mut n = vec![0u32; len];
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let mut it = line.split_whitespace();
            let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
                return invalid(format!("bad dump line: {line}"));
            };
            let i: usize = a.parse().map_err(|_| Error::Invalid(format!("bad id {a}")))?;
            let k: u32 = b.parse().map_err(|_| Error::Invalid(format!("bad value {b}")))?;
            if i >= len {
                return invalid("dump id out of range");
            }
            n[i] = k;
        }
        Ok(CurrentDump { graph_hash, beta, h, seed, sweep, current: CurrentConfig { n } })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_round_trip() {
        let d = CurrentDump {
            graph_hash: "abc123".into(),
            beta: 0.3,
            h: 0.0,
            seed: 42,
            sweep: 7,
            current: CurrentConfig { n: vec![0, 3, 0, 1, 0] },
        };
        let t = d.to_text();
        assert_eq!(t.lines().count(), 3);
        assert_eq!(CurrentDump::from_text(&t).unwrap(), d);
        assert!(CurrentDump::from_text("nonsense").is_err());
    }
}
