use crate::error::{invalid, Result};
use crate::graph::{build_torus, build_tree_ball, FiniteVolume, Mode};
use crate::stats::sig9;
use serde::{Deserialize, Serialize};

/// Graph families the experiments run on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// `k`-regular tree; size is the ball radius.
    Tree { k: usize },
    /// `d`-dimensional torus; size is the side length. Always free.
    Torus { d: usize },
}

impl Family {
    pub fn volume(&self, size: usize, mode: Mode) -> Result<FiniteVolume> {
        match *self {
            Family::Tree { k } => build_tree_ball(k, size, mode),
            Family::Torus { d } => {
                if mode == Mode::Wired {
                    return invalid("tori have no wired boundary");
                }
                FiniteVolume::from_graph(build_torus(d, size, 1.0)?, "torus", 0)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub beta: f64,
    pub h: f64,
    pub size: usize,
    pub observable: String,
    pub estimate: f64,
    pub se: f64,
    pub nsamples: u64,
    pub seed: u64,
}

/// Grid of estimates sorted by `(observable, β, h, size)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
}

pub const SCAN_CSV_HEADER: &str = "beta,h,size,observable,estimate,se,nsamples,seed,stability";

impl ScanTable {
    pub fn new(mut rows: Vec<ScanRow>) -> Self {
        rows.sort_by(|a, b| {
            a.observable
                .cmp(&b.observable)
                .then(a.beta.total_cmp(&b.beta))
                .then(a.h.total_cmp(&b.h))
                .then(a.size.cmp(&b.size))
        });
        ScanTable { rows }
    }

    pub fn cell(&self, observable: &str, beta: f64, h: f64, size: usize) -> Option<&ScanRow> {
        self.rows.iter().find(|r| r.observable == observable && r.beta == beta && r.h == h && r.size == size)
    }

    /// Distinct sizes in increasing order.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.rows.iter().map(|r| r.size).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Rows of one observable at one size.
    pub fn slice(&self, observable: &str, size: usize) -> Vec<&ScanRow> {
        self.rows.iter().filter(|r| r.observable == observable && r.size == size).collect()
    }

    /// `Some(true)` when the two largest sizes agree within 3 SE at this cell,
    /// `None` with fewer than two sizes.
    pub fn stable(&self, observable: &str, beta: f64, h: f64) -> Option<bool> {
        let mut rs: Vec<&ScanRow> = self.rows.iter().filter(|r| r.observable == observable && r.beta == beta && r.h == h).collect();
        if rs.len() < 2 {
            return None;
        }
        rs.sort_by_key(|r| r.size);
        let (a, b) = (rs[rs.len() - 2], rs[rs.len() - 1]);
        Some((a.estimate - b.estimate).abs() <= 3.0 * (a.se * a.se + b.se * b.se).sqrt())
    }

    /// CSV body. The stability column is filled on rows of the largest size only.
    pub fn to_csv(&self) -> String {
        let largest = self.sizes().last().copied();
        let mut out = String::from(SCAN_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let flag = if Some(r.size) == largest {
                match self.stable(&r.observable, r.beta, r.h) {
                    Some(true) => "STABLE",
                    Some(false) => "UNSTABLE",
                    None => "",
                }
            } else {
                ""
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{flag}\n",
                sig9(r.beta),
                sig9(r.h),
                r.size,
                r.observable,
                sig9(r.estimate),
                sig9(r.se),
                r.nsamples,
                r.seed
            ));
        }
        out
    }
}
