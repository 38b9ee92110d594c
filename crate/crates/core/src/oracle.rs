//! Functions under analysis and the points they are evaluated at.
//!
//! Every analysed function is an oracle: a deterministic map from a [`Probe`]
//! to a real or complex value. Probes come in three flavours. Real points of
//! Rⁿ are plain binary64 tuples. Exact points are Q-combinations of a Hamel
//! basis and are the only inputs a [`HamelFunction`](crate::hamel::HamelFunction)
//! accepts. Torus points carry an exact representative in `[0,1)ⁿ` plus the
//! integer lift it was reduced from.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::domain::Point;
use crate::error::{Error, Result};
use crate::hamel::{embed, HamelBasisSpec, QVector};
use crate::rational::Rational;
use crate::torus::TorusPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainTag {
    Euclidean,
    Torus,
}

/// A point of the Q-span of a Hamel basis.
#[derive(Clone, PartialEq)]
pub struct ExactPoint {
    pub basis: Arc<HamelBasisSpec>,
    pub vector: QVector,
}

impl ExactPoint {
    pub fn realize(&self) -> f64 {
        embed(&self.basis, &self.vector).unwrap_or(f64::NAN)
    }
}

impl fmt::Debug for ExactPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.basis.format(&self.vector))
    }
}

/// A torus element together with the integer translate it was reduced from.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSample {
    pub point: TorusPoint,
    pub lift: Vec<i64>,
}

impl TorusSample {
    pub fn reduced(point: TorusPoint) -> Self {
        let lift = vec![0; point.dim()];
        TorusSample { point, lift }
    }

    /// The unreduced representative `point + lift`.
    pub fn representative(&self) -> Vec<f64> {
        self.point
            .to_f64()
            .into_iter()
            .zip(&self.lift)
            .map(|(x, &k)| x + k as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    Real(Point),
    Exact(ExactPoint),
    Torus(TorusSample),
}

impl Probe {
    pub fn real(coords: Vec<f64>) -> Result<Probe> {
        Point::new(coords).map(Probe::Real)
    }

    pub fn origin(n: usize) -> Probe {
        Probe::Real(Point::origin(n))
    }

    pub fn exact(basis: Arc<HamelBasisSpec>, vector: QVector) -> Probe {
        Probe::Exact(ExactPoint { basis, vector })
    }

    pub fn torus(point: TorusPoint) -> Probe {
        Probe::Torus(TorusSample::reduced(point))
    }

    /// The additive identity of the same kind as `self`.
    pub fn zero_like(&self) -> Probe {
        match self {
            Probe::Real(p) => Probe::origin(p.dim()),
            Probe::Exact(p) => Probe::exact(p.basis.clone(), QVector::zero()),
            Probe::Torus(t) => Probe::torus(TorusPoint::zero(t.point.dim())),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Probe::Real(p) => p.dim(),
            Probe::Exact(_) => 1,
            Probe::Torus(t) => t.point.dim(),
        }
    }

    /// Binary64 coordinates. Exact points are embedded; torus points give
    /// their reduced representative, which is what a periodic extension sees.
    pub fn coords(&self) -> Vec<f64> {
        match self {
            Probe::Real(p) => p.coords().to_vec(),
            Probe::Exact(p) => vec![p.realize()],
            Probe::Torus(t) => t.point.to_f64(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Probe::Real(p) => p.coords().iter().all(|&x| x == 0.0),
            Probe::Exact(p) => p.vector.is_zero(),
            Probe::Torus(t) => t.point.is_zero(),
        }
    }

    /// Group sum. Exact points stay exact when both lie in the same span;
    /// mixing an exact point with a real one falls back to real coordinates.
    pub fn add(&self, other: &Probe) -> Result<Probe> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        match (self, other) {
            (Probe::Exact(a), Probe::Exact(b)) if Arc::ptr_eq(&a.basis, &b.basis) || a.basis.same_symbols(&b.basis) => {
                Ok(Probe::exact(a.basis.clone(), a.vector.add(&b.vector)))
            }
            (Probe::Torus(a), Probe::Torus(b)) => {
                let (point, carry) = a.point.add_with_carry(&b.point)?;
                let lift = a
                    .lift
                    .iter()
                    .zip(&b.lift)
                    .zip(carry)
                    .map(|((x, y), c)| x + y + c)
                    .collect();
                Ok(Probe::Torus(TorusSample { point, lift }))
            }
            (Probe::Torus(_), _) | (_, Probe::Torus(_)) => {
                Err(Error::UnsupportedProbe("torus points only add to torus points".into()))
            }
            _ => {
                let coords = self.coords().iter().zip(other.coords()).map(|(x, y)| x + y).collect();
                Probe::real(coords)
            }
        }
    }

    /// Multiplication by a rational. On the torus this scales the reduced
    /// representative, which picks one of the possible divided points.
    pub fn scale(&self, q: &Rational) -> Probe {
        match self {
            Probe::Real(p) => {
                let s = q.to_f64();
                Probe::Real(Point::new_unchecked(p.coords().iter().map(|x| x * s).collect()))
            }
            Probe::Exact(p) => Probe::exact(p.basis.clone(), p.vector.scale(q)),
            Probe::Torus(t) => Probe::torus(t.point.scale_representative(q)),
        }
    }

    /// `c · x` using [`Probe::coords`].
    pub fn dot(&self, c: &[f64]) -> f64 {
        self.coords().iter().zip(c).map(|(x, c)| x * c).sum()
    }

    /// A short human-readable form for reports.
    pub fn describe(&self) -> String {
        match self {
            Probe::Real(p) => format!("{:?}", p.coords()),
            Probe::Exact(p) => p.basis.format(&p.vector),
            Probe::Torus(t) => t.point.to_string(),
        }
    }
}

impl From<Point> for Probe {
    fn from(p: Point) -> Self {
        Probe::Real(p)
    }
}

pub trait RealOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn domain(&self) -> DomainTag {
        DomainTag::Euclidean
    }

    /// Set when the oracle only accepts exact points of this basis.
    fn exact_basis(&self) -> Option<&Arc<HamelBasisSpec>> {
        None
    }

    fn eval(&self, x: &Probe) -> Result<f64>;
}

pub trait ComplexOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn domain(&self) -> DomainTag {
        DomainTag::Euclidean
    }

    fn eval(&self, x: &Probe) -> Result<Complex64>;
}

macro_rules! forward_oracle {
    ($trait:ident, $out:ty, $($ptr:ty),*) => {$(
        impl<T: $trait + ?Sized> $trait for $ptr {
            fn dim(&self) -> usize {
                (**self).dim()
            }
            fn domain(&self) -> DomainTag {
                (**self).domain()
            }
            fn eval(&self, x: &Probe) -> Result<$out> {
                (**self).eval(x)
            }
        }
    )*};
}

forward_oracle!(ComplexOracle, Complex64, &T, Box<T>, Arc<T>);

impl<T: RealOracle + ?Sized> RealOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn domain(&self) -> DomainTag {
        (**self).domain()
    }
    fn exact_basis(&self) -> Option<&Arc<HamelBasisSpec>> {
        (**self).exact_basis()
    }
    fn eval(&self, x: &Probe) -> Result<f64> {
        (**self).eval(x)
    }
}

impl<T: RealOracle + ?Sized> RealOracle for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn domain(&self) -> DomainTag {
        (**self).domain()
    }
    fn exact_basis(&self) -> Option<&Arc<HamelBasisSpec>> {
        (**self).exact_basis()
    }
    fn eval(&self, x: &Probe) -> Result<f64> {
        (**self).eval(x)
    }
}

impl<T: RealOracle + ?Sized> RealOracle for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn domain(&self) -> DomainTag {
        (**self).domain()
    }
    fn exact_basis(&self) -> Option<&Arc<HamelBasisSpec>> {
        (**self).exact_basis()
    }
    fn eval(&self, x: &Probe) -> Result<f64> {
        (**self).eval(x)
    }
}

/// A closure over binary64 coordinates.
pub struct FnOracle<F> {
    dim: usize,
    domain: DomainTag,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> FnOracle<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnOracle {
            dim,
            domain: DomainTag::Euclidean,
            f,
        }
    }

    /// An oracle on the torus; it sees reduced coordinates in `[0,1)ⁿ`.
    pub fn on_torus(dim: usize, f: F) -> Self {
        FnOracle {
            dim,
            domain: DomainTag::Torus,
            f,
        }
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> RealOracle for FnOracle<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn domain(&self) -> DomainTag {
        self.domain
    }
    fn eval(&self, x: &Probe) -> Result<f64> {
        check_dim(self.dim, x)?;
        Ok((self.f)(&x.coords()))
    }
}

/// A complex-valued closure over binary64 coordinates.
pub struct FnComplexOracle<F> {
    dim: usize,
    domain: DomainTag,
    f: F,
}

impl<F: Fn(&[f64]) -> Complex64 + Send + Sync> FnComplexOracle<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnComplexOracle {
            dim,
            domain: DomainTag::Euclidean,
            f,
        }
    }

    pub fn on_torus(dim: usize, f: F) -> Self {
        FnComplexOracle {
            dim,
            domain: DomainTag::Torus,
            f,
        }
    }
}

impl<F: Fn(&[f64]) -> Complex64 + Send + Sync> ComplexOracle for FnComplexOracle<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn domain(&self) -> DomainTag {
        self.domain
    }
    fn eval(&self, x: &Probe) -> Result<Complex64> {
        check_dim(self.dim, x)?;
        Ok((self.f)(&x.coords()))
    }
}

pub(crate) fn check_dim(expected: usize, x: &Probe) -> Result<()> {
    if x.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: x.dim(),
        });
    }
    Ok(())
}

/// A real oracle viewed as complex with zero imaginary part.
pub struct AsComplex<O>(pub O);

impl<O: RealOracle> ComplexOracle for AsComplex<O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn domain(&self) -> DomainTag {
        self.0.domain()
    }
    fn eval(&self, x: &Probe) -> Result<Complex64> {
        Ok(Complex64::new(self.0.eval(x)?, 0.0))
    }
}

/// `x ↦ e^{i·α·g(x)}`.
pub struct ExpPhase<O> {
    pub g: O,
    pub alpha: f64,
}

impl<O: RealOracle> ComplexOracle for ExpPhase<O> {
    fn dim(&self) -> usize {
        self.g.dim()
    }
    fn domain(&self) -> DomainTag {
        self.g.domain()
    }
    fn eval(&self, x: &Probe) -> Result<Complex64> {
        let v = self.g.eval(x)?;
        Ok(Complex64::from_polar(1.0, self.alpha * v))
    }
}

/// `x ↦ c · h(x)`.
pub struct Scaled<O> {
    pub h: O,
    pub c: Complex64,
}

impl<O: ComplexOracle> ComplexOracle for Scaled<O> {
    fn dim(&self) -> usize {
        self.h.dim()
    }
    fn domain(&self) -> DomainTag {
        self.h.domain()
    }
    fn eval(&self, x: &Probe) -> Result<Complex64> {
        Ok(self.c * self.h.eval(x)?)
    }
}

/// `x ↦ g(x + y)`.
pub struct Shifted<O> {
    pub g: O,
    pub shift: Probe,
}

impl<O: RealOracle> RealOracle for Shifted<O> {
    fn dim(&self) -> usize {
        self.g.dim()
    }
    fn domain(&self) -> DomainTag {
        self.g.domain()
    }
    fn exact_basis(&self) -> Option<&Arc<HamelBasisSpec>> {
        self.g.exact_basis()
    }
    fn eval(&self, x: &Probe) -> Result<f64> {
        self.g.eval(&x.add(&self.shift)?)
    }
}

/// `x ↦ g₁(x) + g₂(x)`.
pub struct Sum<A, B>(pub A, pub B);

impl<A: RealOracle, B: RealOracle> RealOracle for Sum<A, B> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn domain(&self) -> DomainTag {
        self.0.domain()
    }
    fn exact_basis(&self) -> Option<&Arc<HamelBasisSpec>> {
        self.0.exact_basis().or_else(|| self.1.exact_basis())
    }
    fn eval(&self, x: &Probe) -> Result<f64> {
        Ok(self.0.eval(x)? + self.1.eval(x)?)
    }
}

/// `x ↦ λ · g(x)` for a real `λ`.
pub struct Multiple<O> {
    pub g: O,
    pub factor: f64,
}

impl<O: RealOracle> RealOracle for Multiple<O> {
    fn dim(&self) -> usize {
        self.g.dim()
    }
    fn domain(&self) -> DomainTag {
        self.g.domain()
    }
    fn exact_basis(&self) -> Option<&Arc<HamelBasisSpec>> {
        self.g.exact_basis()
    }
    fn eval(&self, x: &Probe) -> Result<f64> {
        Ok(self.factor * self.g.eval(x)?)
    }
}
