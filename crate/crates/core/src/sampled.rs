//! Functions known only through a table of samples.
//!
//! The CSV header is `x1,…,xn,value`. A table used for classification must
//! contain every midpoint node of the chosen domain and grid; rows off the
//! grid are kept and can be used as generator values and probes.

use std::collections::HashMap;
use std::io::Read;

use crate::domain::{GridSpec, Parallelepiped};
use crate::error::{Error, Result};
use crate::oracle::{check_dim, Probe, RealOracle};

/// Coordinates agreeing to within this (relative to their size) are the same point.
pub const MATCH_TOLERANCE: f64 = 1e-9;

fn key(x: &[f64]) -> Vec<i64> {
    x.iter().map(|v| (v / MATCH_TOLERANCE).round() as i64).collect()
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= MATCH_TOLERANCE * x.abs().max(y.abs()).max(1.0))
}

#[derive(Debug, Clone)]
pub struct SampledOracle {
    dim: usize,
    rows: Vec<(Vec<f64>, f64)>,
    index: HashMap<Vec<i64>, usize>,
}

impl SampledOracle {
    pub fn new(dim: usize, rows: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("samples need at least one coordinate".into()));
        }
        let mut index = HashMap::with_capacity(rows.len());
        for (n, (x, v)) in rows.iter().enumerate() {
            if x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: x.len(),
                });
            }
            if let Some((i, &c)) = x.iter().enumerate().find(|(_, c)| !c.is_finite()) {
                return Err(Error::NonFinite { index: i, value: c });
            }
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("row {}: value {v} is not finite", n + 1)));
            }
            if index.insert(key(x), n).is_some() {
                return Err(Error::InvalidInput(format!("row {}: duplicate point {x:?}", n + 1)));
            }
        }
        Ok(SampledOracle { dim, rows, index })
    }

    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| Error::InvalidInput(format!("csv header: {e}")))?
            .clone();
        let n = header.len().saturating_sub(1);
        let expected: Vec<String> = (1..=n).map(|k| format!("x{k}")).chain(["value".to_string()]).collect();
        if n == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
            return Err(Error::InvalidInput(format!(
                "csv header must be x1,...,xn,value, got {:?}",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
            let fields = record
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::InvalidInput(format!("row {}: bad number {s:?}", line + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            if fields.len() != n + 1 {
                return Err(Error::InvalidInput(format!(
                    "row {}: expected {} fields",
                    line + 1,
                    n + 1
                )));
            }
            rows.push((fields[..n].to_vec(), fields[n]));
        }
        Self::new(n, rows)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn find(&self, x: &[f64]) -> Option<usize> {
        if let Some(&i) = self.index.get(&key(x)) {
            return Some(i);
        }
        self.rows.iter().position(|(p, _)| close(p, x))
    }

    /// Errors with the first midpoint node, in canonical order, that has no sample.
    pub fn validate_grid(&self, domain: &Parallelepiped, grid: &GridSpec) -> Result<()> {
        if domain.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: domain.dim(),
            });
        }
        for node in domain.nodes(grid)? {
            let x = node.coords();
            if self.find(&x).is_none() {
                return Err(Error::IncompleteData(format!("missing grid node {x:?}")));
            }
        }
        Ok(())
    }

    /// Sample points that are not midpoint nodes of `domain` under `grid`.
    pub fn off_grid_points(&self, domain: &Parallelepiped, grid: &GridSpec) -> Result<Vec<Probe>> {
        let nodes: std::collections::HashSet<Vec<i64>> = domain.nodes(grid)?.iter().map(|n| key(&n.coords())).collect();
        self.rows
            .iter()
            .filter(|(x, _)| !nodes.contains(&key(x)))
            .map(|(x, _)| Probe::real(x.clone()))
            .collect()
    }
}

impl RealOracle for SampledOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Probe) -> Result<f64> {
        check_dim(self.dim, x)?;
        let c = x.coords();
        self.find(&c)
            .map(|i| self.rows[i].1)
            .ok_or_else(|| Error::UnsupportedProbe(format!("no sample at {c:?}")))
    }
}
