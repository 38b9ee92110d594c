use num_complex::Complex64;
use num_integer::Integer;

use super::Integrator;
use crate::error::{Error, Result};
use crate::oracle::{ExpPhase, RealOracle};
use crate::rational::Rational;

pub const DEFAULT_MAX_DENOMINATOR: u64 = 32;
pub const DEFAULT_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaOrder {
    /// Every reduced `p/q ∈ (0, 1]`, by increasing `q`, then increasing `p`.
    Farey,
    /// Only `1/q`, by increasing `q`. Scaling by these keeps `[0,1)ⁿ` inside itself.
    UnitFractions,
}

/// Which rationals the α-search tries, and when a candidate is accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSearchPolicy {
    max_denominator: u64,
    threshold: f64,
    order: AlphaOrder,
}

impl Default for AlphaSearchPolicy {
    fn default() -> Self {
        AlphaSearchPolicy {
            max_denominator: DEFAULT_MAX_DENOMINATOR,
            threshold: DEFAULT_THRESHOLD,
            order: AlphaOrder::Farey,
        }
    }
}

impl AlphaSearchPolicy {
    pub fn new(max_denominator: u64, threshold: f64) -> Result<Self> {
        Self::with_order(max_denominator, threshold, AlphaOrder::Farey)
    }

    pub fn unit_fractions(max_denominator: u64, threshold: f64) -> Result<Self> {
        Self::with_order(max_denominator, threshold, AlphaOrder::UnitFractions)
    }

    pub fn with_order(max_denominator: u64, threshold: f64, order: AlphaOrder) -> Result<Self> {
        if max_denominator == 0 || max_denominator > i64::MAX as u64 {
            return Err(Error::InvalidInput(format!(
                "max denominator must be a positive integer, got {max_denominator}"
            )));
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidInput(format!(
                "threshold must lie in (0, 1), got {threshold}"
            )));
        }
        Ok(AlphaSearchPolicy {
            max_denominator,
            threshold,
            order,
        })
    }

    pub fn max_denominator(&self) -> u64 {
        self.max_denominator
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn order(&self) -> AlphaOrder {
        self.order
    }

    /// The same policy restricted to unit fractions.
    pub fn to_unit_fractions(&self) -> Self {
        AlphaSearchPolicy {
            order: AlphaOrder::UnitFractions,
            ..self.clone()
        }
    }

    /// Candidates in search order; always starts with `1`.
    pub fn candidates(&self) -> Vec<Rational> {
        let d = self.max_denominator as i64;
        let mut out = Vec::new();
        for q in 1..=d {
            match self.order {
                AlphaOrder::Farey => {
                    for p in 1..=q {
                        if p.gcd(&q) == 1 {
                            out.push(Rational::new(p, q).expect("q >= 1"));
                        }
                    }
                }
                AlphaOrder::UnitFractions => out.push(Rational::new(1, q).expect("q >= 1")),
            }
        }
        out
    }
}

/// The accepted α and the value of the exponential functional there.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaHit {
    pub alpha: Rational,
    pub value: Complex64,
}

/// `F(e^{iαg})` for the integrator's functional `F`.
pub fn exp_functional(g: &dyn RealOracle, integrator: &dyn Integrator, alpha: &Rational) -> Result<Complex64> {
    integrator.integrate(&ExpPhase {
        g,
        alpha: alpha.to_f64(),
    })
}

/// First candidate with `|F(e^{iαg})| ≥ τ · reference` (and strictly positive),
/// or `None` once the list is exhausted.
pub fn find_alpha_with(
    g: &dyn RealOracle,
    integrator: &dyn Integrator,
    policy: &AlphaSearchPolicy,
) -> Result<Option<AlphaHit>> {
    let floor = policy.threshold * integrator.reference_magnitude();
    for alpha in policy.candidates() {
        let value = exp_functional(g, integrator, &alpha)?;
        let size = value.norm();
        if size > 0.0 && size >= floor {
            return Ok(Some(AlphaHit { alpha, value }));
        }
    }
    Ok(None)
}
