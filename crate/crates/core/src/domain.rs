//! Points, integration domains and their grids.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hamel::{embed, HamelBasisSpec, QVector};
use crate::oracle::Probe;
use crate::rational::Rational;

/// Determinants this close to zero are treated as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// A point of Rⁿ with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Point(coords))
    }

    pub(crate) fn new_unchecked(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn origin(n: usize) -> Self {
        Point(vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// Number of midpoint nodes along each axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpec(Vec<usize>);

impl GridSpec {
    pub fn new(resolution: Vec<usize>) -> Result<Self> {
        if resolution.is_empty() || resolution.contains(&0) {
            return Err(Error::InvalidGrid);
        }
        Ok(GridSpec(resolution))
    }

    pub fn uniform(n: usize, m: usize) -> Result<Self> {
        Self::new(vec![m; n])
    }

    /// 4096 nodes in one dimension, 64 per axis otherwise.
    pub fn default_for(n: usize) -> Self {
        if n == 1 {
            GridSpec(vec![4096])
        } else {
            GridSpec(vec![64; n.max(1)])
        }
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn resolution(&self) -> &[usize] {
        &self.0
    }

    pub fn total_nodes(&self) -> usize {
        self.0.iter().product()
    }

    /// Multi-indices in canonical order: the first axis varies slowest.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let total = self.total_nodes();
        (0..total).map(move |mut flat| {
            let mut idx = vec![0; self.0.len()];
            for (k, &m) in self.0.iter().enumerate().rev() {
                idx[k] = flat % m;
                flat /= m;
            }
            idx
        })
    }
}

/// One-dimensional frame inside a Hamel span: `{base + t·generator : t ∈ [0,1]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactFrame {
    pub basis: Arc<HamelBasisSpec>,
    pub base: QVector,
    pub generator: QVector,
}

/// `{base + Σ t_k u_k : t ∈ [0,1]ⁿ}` for linearly independent generators `u_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Parallelepiped {
    base: Point,
    generators: Vec<Point>,
    volume: f64,
    exact: Option<ExactFrame>,
}

impl Parallelepiped {
    pub fn new(base: Point, generators: Vec<Point>) -> Result<Self> {
        let n = base.dim();
        if generators.len() != n || n == 0 {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: generators.len(),
            });
        }
        if let Some(g) = generators.iter().find(|g| g.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: g.dim(),
            });
        }
        let det = determinant(&generators);
        if det.abs() <= DEGENERACY_TOLERANCE {
            return Err(Error::DegenerateDomain { det });
        }
        Ok(Parallelepiped {
            base,
            generators,
            volume: det.abs(),
            exact: None,
        })
    }

    /// The interval `[a, b]`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(Point::new(vec![a])?, vec![Point::new(vec![b - a])?])
    }

    /// The axis-aligned box `Π [lo_k, hi_k]`.
    pub fn aligned_box(bounds: &[(f64, f64)]) -> Result<Self> {
        let n = bounds.len();
        let base = Point::new(bounds.iter().map(|b| b.0).collect())?;
        let generators = bounds
            .iter()
            .enumerate()
            .map(|(k, &(lo, hi))| {
                let mut u = vec![0.0; n];
                u[k] = hi - lo;
                Point::new(u)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(base, generators)
    }

    pub fn unit_cube(n: usize) -> Result<Self> {
        Self::aligned_box(&vec![(0.0, 1.0); n])
    }

    /// A segment of a Hamel span. Degenerate exactly when the generator is the
    /// zero vector, decided without any floating-point tolerance.
    pub fn exact(basis: Arc<HamelBasisSpec>, base: QVector, generator: QVector) -> Result<Self> {
        let b = embed(&basis, &base)?;
        let u = embed(&basis, &generator)?;
        if generator.is_zero() {
            return Err(Error::DegenerateDomain { det: 0.0 });
        }
        Ok(Parallelepiped {
            base: Point::new(vec![b])?,
            generators: vec![Point::new(vec![u])?],
            volume: u.abs(),
            exact: Some(ExactFrame { basis, base, generator }),
        })
    }

    /// `[a·e, b·e]` along the basis symbol `e` with index `symbol`.
    pub fn exact_interval(basis: Arc<HamelBasisSpec>, symbol: usize, a: &Rational, b: &Rational) -> Result<Self> {
        let base = QVector::unit(symbol).scale(a);
        let generator = QVector::unit(symbol).scale(&(b - a));
        Self::exact(basis, base, generator)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn generators(&self) -> &[Point] {
        &self.generators
    }

    pub fn exact_frame(&self) -> Option<&ExactFrame> {
        self.exact.as_ref()
    }

    /// `|det(u_1, …, u_n)|`, strictly positive.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// The generators as probes. Exact frames yield exact points.
    pub fn generator_probes(&self) -> Vec<Probe> {
        match &self.exact {
            Some(frame) => vec![Probe::exact(frame.basis.clone(), frame.generator.clone())],
            None => self.generators.iter().cloned().map(Probe::Real).collect(),
        }
    }

    /// The base point as a probe, of the same kind as the nodes.
    pub fn base_probe(&self) -> Probe {
        match &self.exact {
            Some(frame) => Probe::exact(frame.basis.clone(), frame.base.clone()),
            None => Probe::Real(self.base.clone()),
        }
    }

    /// Midpoint nodes `base + Σ ((j_k + ½)/m_k) u_k` in the grid's canonical order.
    pub fn nodes(&self, grid: &GridSpec) -> Result<Vec<Probe>> {
        if grid.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: grid.dim(),
            });
        }
        let res = grid.resolution();
        if let Some(frame) = &self.exact {
            let m = res[0] as i64;
            return (0..m)
                .map(|j| {
                    let t = Rational::new(2 * j + 1, 2 * m)?;
                    let v = frame.base.add(&frame.generator.scale(&t));
                    Ok(Probe::exact(frame.basis.clone(), v))
                })
                .collect();
        }
        let n = self.dim();
        Ok(grid
            .indices()
            .map(|idx| {
                let mut x = self.base.coords().to_vec();
                for (k, u) in self.generators.iter().enumerate() {
                    let t = (idx[k] as f64 + 0.5) / res[k] as f64;
                    for (xi, ui) in x.iter_mut().zip(u.coords()) {
                        *xi += t * ui;
                    }
                }
                debug_assert_eq!(x.len(), n);
                Probe::Real(Point::new_unchecked(x))
            })
            .collect())
    }
}

/// Determinant of the matrix whose rows are the given points.
pub fn determinant(rows: &[Point]) -> f64 {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i].coords()[j]);
    m.determinant()
}
