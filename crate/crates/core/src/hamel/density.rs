//! Bounded search for graph points of an additive map in a plane window.
//!
//! Vectors are enumerated with every coordinate of height at most `H`.
//! Coordinates on assigned symbols determine the value and are enumerated
//! outermost; coordinates on zero-assigned symbols (periods) are innermost,
//! so a whole group of vectors sharing a value is skipped once its row of
//! cells is full. Within each block, tuples run lexicographically over the
//! rationals sorted by height and then value. Coverage does not depend on
//! the order; the representative reported for a cell is the first hit.

use std::collections::BTreeMap;

use num_integer::Integer;

use super::{embed, AdditiveMap, ExactEvaluator, HamelBasisSpec, QVector};
use crate::error::{Error, Result};
use crate::rational::{height_order, Rational};

/// Closed rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let all = [x_min, x_max, y_min, y_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidWindow(format!("bounds must be finite, got {all:?}")));
        }
        if !(x_max > x_min && y_max > y_min) {
            return Err(Error::InvalidWindow(format!(
                "[{x_min}, {x_max}] x [{y_min}, {y_max}] has zero area"
            )));
        }
        Ok(Window {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    /// Cell `(i, j)` of an `m × m` subdivision; points on the upper edges
    /// belong to the last cell.
    fn cell(&self, m: usize, x: f64, y: f64) -> Option<(usize, usize)> {
        if !(x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max) {
            return None;
        }
        Some((bin(x, self.x_min, self.x_max, m), bin(y, self.y_min, self.y_max, m)))
    }

    fn row(&self, m: usize, y: f64) -> Option<usize> {
        (y >= self.y_min && y <= self.y_max).then(|| bin(y, self.y_min, self.y_max, m))
    }
}

fn bin(v: f64, lo: f64, hi: f64, m: usize) -> usize {
    (((v - lo) / (hi - lo) * m as f64).floor() as usize).min(m - 1)
}

/// A cell hit by the search and the first graph point found in it.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveredCell {
    pub cell_i: usize,
    pub cell_j: usize,
    pub x: f64,
    pub y: f64,
    pub vector: QVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub cells: usize,
    pub height: u64,
    /// Fraction of the `cells²` cells containing a point.
    pub coverage: f64,
    /// Sorted by `(cell_i, cell_j)`.
    pub covered: Vec<CoveredCell>,
    /// Symbol used to translate points into the window's x-range, if any.
    pub period_symbol: Option<usize>,
    pub points_examined: u64,
}

/// Rationals `p/q` with `|p| ≤ h`, `1 ≤ q ≤ h`, sorted by height then value.
fn rationals_up_to(h: u64) -> Vec<(Rational, f64)> {
    let h = h as i64;
    let mut out = Vec::new();
    for q in 1..=h {
        for p in -h..=h {
            if p.gcd(&q) == 1 {
                let r = Rational::new(p, q).expect("q >= 1");
                let v = r.to_f64();
                out.push((r, v));
            }
        }
    }
    out.sort_by(|a, b| height_order(&a.0, &b.0));
    out
}

/// Odometer over `list^k`, first position slowest.
struct Tuples {
    k: usize,
    len: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Tuples {
    fn new(k: usize, len: usize) -> Self {
        Tuples {
            k,
            len,
            idx: vec![0; k],
            done: len == 0 && k > 0,
        }
    }
}

impl Iterator for Tuples {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let mut pos = self.k;
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.idx[pos] += 1;
            if self.idx[pos] < self.len {
                break;
            }
            self.idx[pos] = 0;
        }
        Some(out)
    }
}

/// Plots `(embed(v), f(v))` for all `v` of height at most `height` and
/// reports which of the `cells × cells` window cells are hit.
///
/// When some symbol is assigned zero, `x` is translated by integer multiples
/// of its embedding into `[x_min, x_min + |embedding|)`, which leaves the
/// value unchanged. The first zero-assigned symbol is used.
pub fn density_witness(
    f: &AdditiveMap,
    basis: &HamelBasisSpec,
    window: &Window,
    cells: usize,
    height: u64,
) -> Result<DensityReport> {
    if f.size() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            actual: f.size(),
        });
    }
    if cells == 0 {
        return Err(Error::InvalidInput("cell count must be at least 1".into()));
    }
    if height == 0 || height > 100_000 {
        return Err(Error::InvalidInput(format!(
            "height must lie in 1..=100000, got {height}"
        )));
    }
    let outer: Vec<usize> = f.assignments().map(|(i, _)| i).collect();
    let inner: Vec<usize> = f.zero_assigned().collect();
    let period = inner.first().copied();
    let list = rationals_up_to(height);

    let mut hits: BTreeMap<(usize, usize), CoveredCell> = BTreeMap::new();
    let mut row_fill = vec![0usize; cells];
    let mut examined = 0u64;

    for o in Tuples::new(outer.len(), list.len()) {
        let base = QVector::from_pairs(o.iter().zip(&outer).map(|(&k, &i)| (i, list[k].0.clone())));
        let y = f.evaluate(&base)?.to_f64();
        let Some(j) = window.row(cells, y) else {
            examined += 1;
            continue;
        };
        for t in Tuples::new(inner.len(), list.len()) {
            if row_fill[j] == cells {
                break;
            }
            examined += 1;
            let mut v = base.add(&QVector::from_pairs(
                t.iter().zip(&inner).map(|(&k, &i)| (i, list[k].0.clone())),
            ));
            let mut x = embed(basis, &v)?;
            if let Some(p) = period {
                let e = basis.symbols()[p].embedding;
                let k = ((x - window.x_min) / e.abs()).floor();
                if k != 0.0 && k.is_finite() && k.abs() < 1e15 {
                    let shift = Rational::from_integer(k as i64 * e.signum() as i64);
                    v = v.sub(&QVector::unit(p).scale(&shift));
                    x = embed(basis, &v)?;
                }
            }
            if let Some((ci, cj)) = window.cell(cells, x, y) {
                hits.entry((ci, cj)).or_insert_with(|| {
                    row_fill[cj] += 1;
                    CoveredCell {
                        cell_i: ci,
                        cell_j: cj,
                        x,
                        y,
                        vector: v,
                    }
                });
            }
        }
    }

    let covered: Vec<CoveredCell> = hits.into_values().collect();
    Ok(DensityReport {
        cells,
        height,
        coverage: covered.len() as f64 / (cells * cells) as f64,
        covered,
        period_symbol: period,
        points_examined: examined,
    })
}
