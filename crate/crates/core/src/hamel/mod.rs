//! Additive functions on finitely generated Q-subspaces of the reals.
//!
//! A [`HamelBasisSpec`] names finitely many reals that are declared linearly
//! independent over Q. Elements of their Q-span are [`QVector`]s, and an
//! [`AdditiveMap`] assigns a rational value to every basis symbol and extends
//! Q-linearly. Evaluation is exact, so additivity holds with rational
//! equality, not up to rounding.

mod density;
mod json;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::oracle::{DomainTag, Probe, RealOracle};
use crate::rational::Rational;

pub use density::{density_witness, CoveredCell, DensityReport, Window};
pub use json::HamelDocument;

/// How Q-independence of the embeddings is justified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Independence {
    /// Declared by whoever built the basis; not checked.
    UserAsserted,
    /// One of the shipped bases, with the argument spelled out.
    Argued(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    pub label: String,
    pub embedding: f64,
}

/// An ordered list of labelled reals, taken as a basis of their Q-span.
#[derive(Debug, Clone, PartialEq)]
pub struct HamelBasisSpec {
    symbols: Vec<Symbol>,
    independence: Independence,
}

const ARGUMENT_1: &str = "a single nonzero real is independent";
const ARGUMENT_2: &str = "a + b*sqrt(2) = 0 with rational a, b forces b = 0 since sqrt(2) is irrational, then a = 0";
const ARGUMENT_3: &str = "if a + b*sqrt(2) = c*sqrt(3) then squaring gives a^2 + 2b^2 - 3c^2 + 2ab*sqrt(2) = 0, \
so ab = 0; b = 0 makes sqrt(3) rational unless c = 0, a = 0 makes sqrt(3/2) rational unless b = c = 0";

impl HamelBasisSpec {
    /// Builds a basis whose Q-independence is asserted by the caller.
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        Self::with_independence(symbols, Independence::UserAsserted)
    }

    fn with_independence(symbols: Vec<Symbol>, independence: Independence) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidBasis("a basis needs at least one symbol".into()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.label.is_empty() {
                return Err(Error::InvalidBasis(format!("symbol #{i} has an empty label")));
            }
            if !s.embedding.is_finite() || s.embedding == 0.0 {
                return Err(Error::InvalidBasis(format!(
                    "embedding of {} must be finite and nonzero, got {}",
                    s.label, s.embedding
                )));
            }
            for t in &symbols[..i] {
                if t.label == s.label {
                    return Err(Error::InvalidBasis(format!("duplicate label {}", s.label)));
                }
                if t.embedding == s.embedding {
                    return Err(Error::InvalidBasis(format!(
                        "{} and {} share the embedding {}",
                        t.label, s.label, s.embedding
                    )));
                }
            }
        }
        Ok(HamelBasisSpec { symbols, independence })
    }

    /// The shipped bases `(1)`, `(1, √2)` and `(1, √2, √3)`, labelled `e1, e2, e3`.
    pub fn standard(size: usize) -> Result<Self> {
        let all = [1.0, std::f64::consts::SQRT_2, 3f64.sqrt()];
        let argument = match size {
            1 => ARGUMENT_1,
            2 => ARGUMENT_2,
            3 => ARGUMENT_3,
            _ => {
                return Err(Error::InvalidBasis(format!(
                    "standard bases have 1 to 3 symbols, not {size}"
                )))
            }
        };
        let symbols = all[..size]
            .iter()
            .enumerate()
            .map(|(i, &embedding)| Symbol {
                label: format!("e{}", i + 1),
                embedding,
            })
            .collect();
        Self::with_independence(symbols, Independence::Argued(argument))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn independence(&self) -> &Independence {
        &self.independence
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.label == label)
    }

    pub fn label(&self, index: usize) -> Result<&str> {
        self.symbols
            .get(index)
            .map(|s| s.label.as_str())
            .ok_or_else(|| Error::UnknownSymbol(format!("#{index}")))
    }

    /// Same symbols in the same order (the independence note is not compared).
    pub fn same_symbols(&self, other: &HamelBasisSpec) -> bool {
        self.symbols == other.symbols
    }

    fn check(&self, v: &QVector) -> Result<()> {
        match v.coords.keys().next_back() {
            Some(&i) if i >= self.len() => Err(Error::UnknownSymbol(format!("#{i}"))),
            _ => Ok(()),
        }
    }

    /// Renders `v` with this basis' labels, e.g. `3/2*e1 + -1/7*e2`.
    pub fn format(&self, v: &QVector) -> String {
        if v.is_zero() {
            return "0".to_string();
        }
        v.iter()
            .map(|(i, q)| {
                let label = self.symbols.get(i).map_or("?", |s| s.label.as_str());
                format!("{q}*{label}")
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// An element of the Q-span of a basis: symbol index → rational coordinate.
///
/// Zero coordinates are never stored, so the zero vector is the empty map and
/// derived equality is numerical equality.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QVector {
    coords: BTreeMap<usize, Rational>,
}

impl QVector {
    pub fn zero() -> Self {
        QVector::default()
    }

    pub fn unit(index: usize) -> Self {
        QVector::from_pairs([(index, Rational::one())])
    }

    /// Sums repeated indices and drops zeros.
    pub fn from_pairs<I: IntoIterator<Item = (usize, Rational)>>(pairs: I) -> Self {
        let mut v = QVector::zero();
        for (i, q) in pairs {
            v.add_coord(i, &q);
        }
        v
    }

    fn add_coord(&mut self, index: usize, q: &Rational) {
        if q.is_zero() {
            return;
        }
        let sum = match self.coords.get(&index) {
            Some(existing) => existing + q,
            None => q.clone(),
        };
        if sum.is_zero() {
            self.coords.remove(&index);
        } else {
            self.coords.insert(index, sum);
        }
    }

    pub fn get(&self, index: usize) -> Rational {
        self.coords.get(&index).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.coords.iter().map(|(&i, q)| (i, q))
    }

    pub fn add(&self, other: &QVector) -> QVector {
        let mut out = self.clone();
        for (i, q) in other.iter() {
            out.add_coord(i, q);
        }
        out
    }

    pub fn sub(&self, other: &QVector) -> QVector {
        self.add(&other.scale(&Rational::from_integer(-1)))
    }

    pub fn scale(&self, q: &Rational) -> QVector {
        if q.is_zero() {
            return QVector::zero();
        }
        QVector {
            coords: self.coords.iter().map(|(&i, c)| (i, c * q)).collect(),
        }
    }

    /// Largest coordinate height; 1 for the zero vector.
    pub fn height(&self) -> num_bigint::BigInt {
        self.coords
            .values()
            .map(Rational::height)
            .max()
            .unwrap_or_else(|| 1.into())
    }
}

impl fmt::Debug for QVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.coords.iter()).finish()
    }
}

/// Anything that maps Q-vectors to exact rationals.
pub trait ExactEvaluator {
    fn evaluate(&self, v: &QVector) -> Result<Rational>;
}

/// A Q-linear map defined by its values on the basis symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditiveMap {
    size: usize,
    assignments: BTreeMap<usize, Rational>,
}

impl AdditiveMap {
    /// Map on a basis of `size` symbols; absent indices are assigned 0.
    pub fn new<I: IntoIterator<Item = (usize, Rational)>>(size: usize, assignments: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, y) in assignments {
            if i >= size {
                return Err(Error::UnknownSymbol(format!("#{i}")));
            }
            if !y.is_zero() {
                map.insert(i, y);
            }
        }
        Ok(AdditiveMap { size, assignments: map })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn assignment(&self, index: usize) -> Rational {
        self.assignments.get(&index).cloned().unwrap_or_default()
    }

    pub fn assignments(&self) -> impl Iterator<Item = (usize, &Rational)> {
        self.assignments.iter().map(|(&i, q)| (i, q))
    }

    /// Indices whose assigned value is zero: each is a period of the map.
    pub fn zero_assigned(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.size).filter(|i| !self.assignments.contains_key(i))
    }
}

impl ExactEvaluator for AdditiveMap {
    /// `f(Σ q_k e_k) = Σ q_k y_k`, exactly.
    fn evaluate(&self, v: &QVector) -> Result<Rational> {
        let mut total = Rational::zero();
        for (i, q) in v.iter() {
            if i >= self.size {
                return Err(Error::UnknownSymbol(format!("#{i}")));
            }
            if let Some(y) = self.assignments.get(&i) {
                total += &(q * y);
            }
        }
        Ok(total)
    }
}

/// The real number `Σ q_k · embedding_k`, accumulated in binary64 in index order.
pub fn embed(basis: &HamelBasisSpec, v: &QVector) -> Result<f64> {
    basis.check(v)?;
    Ok(v.iter().map(|(i, q)| q.to_f64() * basis.symbols[i].embedding).sum())
}

/// First pair on which exact additivity failed.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditivityFailure {
    pub x: QVector,
    pub y: QVector,
    /// `f(x + y)`
    pub lhs: Rational,
    /// `f(x) + f(y)`
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdditivityReport {
    pub pairs_checked: usize,
    pub failure: Option<AdditivityFailure>,
}

impl AdditivityReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Checks `f(x+y) = f(x) + f(y)` with exact rational equality on every pair,
/// stopping at the first counterexample.
pub fn check_additive<E: ExactEvaluator + ?Sized>(f: &E, pairs: &[(QVector, QVector)]) -> Result<AdditivityReport> {
    for (n, (x, y)) in pairs.iter().enumerate() {
        let lhs = f.evaluate(&x.add(y))?;
        let rhs = f.evaluate(x)? + f.evaluate(y)?;
        if lhs != rhs {
            return Ok(AdditivityReport {
                pairs_checked: n + 1,
                failure: Some(AdditivityFailure {
                    x: x.clone(),
                    y: y.clone(),
                    lhs,
                    rhs,
                }),
            });
        }
    }
    Ok(AdditivityReport {
        pairs_checked: pairs.len(),
        failure: None,
    })
}

/// `p` is a period of `f` iff `f(p) = 0` exactly.
pub fn period_check(f: &AdditiveMap, p: &QVector) -> Result<bool> {
    Ok(f.evaluate(p)?.is_zero())
}

/// Random rational with `|numerator| <= height` and `1 <= denominator <= height`.
pub fn random_rational<R: Rng + ?Sized>(rng: &mut R, height: i64) -> Rational {
    let h = height.max(1);
    let num = rng.random_range(-h..=h);
    let den = rng.random_range(1..=h);
    Rational::new(num, den).expect("positive denominator")
}

/// Random vector over `size` symbols with coordinate heights bounded by `height`.
pub fn random_qvector<R: Rng + ?Sized>(rng: &mut R, size: usize, height: i64) -> QVector {
    QVector::from_pairs((0..size).map(|i| (i, random_rational(rng, height))))
}

/// An additive map together with its basis and a real output scale, usable as
/// a [`RealOracle`] on exact points of the span.
///
/// The oracle value at `v` is `scale * evaluate(map, v)` in binary64; the
/// scale lets real-valued assignments such as `2π` be expressed while the
/// combinatorial part stays exact.
#[derive(Debug, Clone, PartialEq)]
pub struct HamelFunction {
    pub basis: Arc<HamelBasisSpec>,
    pub map: AdditiveMap,
    pub scale: f64,
}

impl HamelFunction {
    pub fn new(basis: Arc<HamelBasisSpec>, map: AdditiveMap, scale: f64) -> Result<Self> {
        if map.size() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                actual: map.size(),
            });
        }
        if !scale.is_finite() {
            return Err(Error::InvalidInput(format!("scale must be finite, got {scale}")));
        }
        Ok(HamelFunction { basis, map, scale })
    }

    /// Parses assignments given as `(label, value)` pairs.
    pub fn from_labels<'a, I>(basis: Arc<HamelBasisSpec>, assignments: I, scale: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, Rational)>,
    {
        let mut pairs = Vec::new();
        for (label, y) in assignments {
            let i = basis
                .index_of(label)
                .ok_or_else(|| Error::UnknownSymbol(label.to_string()))?;
            pairs.push((i, y));
        }
        let map = AdditiveMap::new(basis.len(), pairs)?;
        Self::new(basis, map, scale)
    }

    pub fn exact_value(&self, v: &QVector) -> Result<Rational> {
        self.map.evaluate(v)
    }

    pub fn value(&self, v: &QVector) -> Result<f64> {
        Ok(self.scale * self.map.evaluate(v)?.to_f64())
    }

    /// A point of the span, tied to this function's basis.
    pub fn point(&self, v: QVector) -> Probe {
        Probe::exact(self.basis.clone(), v)
    }
}

impl RealOracle for HamelFunction {
    fn dim(&self) -> usize {
        1
    }

    fn domain(&self) -> DomainTag {
        DomainTag::Euclidean
    }

    fn exact_basis(&self) -> Option<&Arc<HamelBasisSpec>> {
        Some(&self.basis)
    }

    fn eval(&self, x: &Probe) -> Result<f64> {
        match x {
            Probe::Exact(p) => {
                if !Arc::ptr_eq(&p.basis, &self.basis) && !p.basis.same_symbols(&self.basis) {
                    return Err(Error::UnsupportedProbe("point belongs to a different basis".into()));
                }
                self.value(&p.vector)
            }
            _ => Err(Error::UnsupportedProbe(
                "additive maps on a Hamel span evaluate only exact points of the span".into(),
            )),
        }
    }
}
