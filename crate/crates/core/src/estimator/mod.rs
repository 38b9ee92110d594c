//! Numerical counterparts of the uniqueness argument for additive functions.
//!
//! For `f` additive, the residual `g = f − c·x` with `c` fitted on the
//! generators `u_k` of a parallelepiped `I` is additive and `u_k`-periodic.
//! Averaging `e^{iαg(x+y)} = e^{iαg(x)} e^{iαg(y)}` over `I` and using shift
//! invariance of the average forces `e^{iαg(y)} = 1` whenever the average is
//! nonzero; rational homogeneity then rules out nonzero lattice values. Each
//! step is available on its own and [`classify`] chains them.

mod alpha;
mod pipeline;

use num_complex::Complex64;

use crate::domain::{GridSpec, Parallelepiped};
use crate::error::Result;
use crate::oracle::{ComplexOracle, Probe, RealOracle};
use crate::quadrature::{midpoint_quadrature, midpoint_quadrature_real};
use crate::rational::Rational;

pub use alpha::{
    exp_functional, find_alpha_with, AlphaHit, AlphaOrder, AlphaSearchPolicy, DEFAULT_MAX_DENOMINATOR,
    DEFAULT_THRESHOLD,
};
pub use pipeline::{
    classify, classify_vector_valued, coefficient_from_generators, lattice_refutation, phase_test, residual_oracle,
    run_pipeline, solve_coefficients, Classification, CoefficientMode, Diagnostics, LinearityVerdict, PhaseEntry,
    PhaseReport, Refutation, Residual, SpotCheck, VectorVerdict, Witness, WitnessSource,
};

/// `|e^{iθ} − 1|` above this fails the phase test.
pub const PHASE_TOLERANCE: f64 = 1e-6;
/// `|α·g(y) − 2πk|` below this places `g(y)` on the lattice point `k`.
pub const LATTICE_TOLERANCE: f64 = 1e-6;
/// Tolerance of the finite additivity spot-check reported in diagnostics.
pub const ADDITIVITY_SPOT_TOLERANCE: f64 = 1e-8;
/// Divisor of the refutation probe `y₀ / (7 k₀)`.
pub const REFUTATION_DIVISOR: i64 = 7;

/// A linear functional on complex oracles together with the translation
/// system it is invariant under. The default is midpoint integration.
pub trait Integrator: Sync {
    fn integrate(&self, h: &dyn ComplexOracle) -> Result<Complex64>;

    /// Magnitude the α-search threshold is relative to.
    fn reference_magnitude(&self) -> f64;

    /// The periods `u_1..u_n`; the pipeline fits `c` on these.
    fn generators(&self) -> Vec<Probe>;

    fn dim(&self) -> usize;
}

/// Midpoint integration over a parallelepiped with zero shift.
pub struct QuadratureIntegrator<'a> {
    pub domain: &'a Parallelepiped,
    pub grid: &'a GridSpec,
}

impl Integrator for QuadratureIntegrator<'_> {
    fn integrate(&self, h: &dyn ComplexOracle) -> Result<Complex64> {
        midpoint_quadrature(h, self.domain, self.grid, &self.domain.base_probe().zero_like())
    }

    fn reference_magnitude(&self) -> f64 {
        self.domain.volume()
    }

    fn generators(&self) -> Vec<Probe> {
        self.domain.generator_probes()
    }

    fn dim(&self) -> usize {
        self.domain.dim()
    }
}

/// `|Q(u, I, y) − Q(u, I, 0)|`: how far `u` is from shift-invariant averages.
pub fn shift_invariance_defect(
    u: &dyn ComplexOracle,
    domain: &Parallelepiped,
    y: &Probe,
    grid: &GridSpec,
) -> Result<f64> {
    let zero = domain.base_probe().zero_like();
    let shifted = midpoint_quadrature(u, domain, grid, y)?;
    let plain = midpoint_quadrature(u, domain, grid, &zero)?;
    Ok((shifted - plain).norm())
}

/// `[Q(g, I, y) − Q(g, I, 0)] / volume(I)`, which equals `g(y)` for additive `g`.
pub fn mean_value_estimate(g: &dyn RealOracle, domain: &Parallelepiped, y: &Probe, grid: &GridSpec) -> Result<f64> {
    let zero = domain.base_probe().zero_like();
    let shifted = midpoint_quadrature_real(g, domain, grid, y)?;
    let plain = midpoint_quadrature_real(g, domain, grid, &zero)?;
    Ok((shifted - plain) / domain.volume())
}

/// Midpoint quadrature of `x ↦ e^{iαg(x)}` over `I`.
pub fn exp_integral(
    g: &dyn RealOracle,
    domain: &Parallelepiped,
    alpha: &Rational,
    grid: &GridSpec,
) -> Result<Complex64> {
    exp_functional(g, &QuadratureIntegrator { domain, grid }, alpha)
}

/// First α in the policy's order with `|exp_integral| ≥ τ · volume(I)`.
pub fn find_alpha(
    g: &dyn RealOracle,
    domain: &Parallelepiped,
    policy: &AlphaSearchPolicy,
    grid: &GridSpec,
) -> Result<Option<AlphaHit>> {
    find_alpha_with(g, &QuadratureIntegrator { domain, grid }, policy)
}
