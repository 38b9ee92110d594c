//! Midpoint quadrature over parallelepipeds.
//!
//! Nodes are evaluated in parallel but always summed in the grid's canonical
//! order with pairwise summation, so results do not depend on scheduling.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::domain::{GridSpec, Parallelepiped};
use crate::error::{Error, Result};
use crate::oracle::{check_dim, AsComplex, ComplexOracle, Probe, RealOracle};

const PAIRWISE_BLOCK: usize = 16;

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_complex(zs: &[Complex64]) -> Complex64 {
    let re: Vec<f64> = zs.iter().map(|z| z.re).collect();
    let im: Vec<f64> = zs.iter().map(|z| z.im).collect();
    Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

/// Evaluates `h` at every point in parallel, returning values in input order.
/// The first non-finite value in that order is reported as an oracle failure.
pub fn evaluate_all(h: &dyn ComplexOracle, points: &[Probe]) -> Result<Vec<Complex64>> {
    let values: Vec<Result<Complex64>> = points
        .par_iter()
        .map(|x| {
            let v = h.eval(x)?;
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v)
            } else {
                Err(Error::OracleFailure {
                    node: x.coords(),
                    value: if v.im == 0.0 { v.re.to_string() } else { v.to_string() },
                })
            }
        })
        .collect();
    values.into_iter().collect()
}

/// `volume(I) · mean_j h(x_j + shift)` over the midpoint nodes `x_j` of `I`.
pub fn midpoint_quadrature(
    h: &dyn ComplexOracle,
    domain: &Parallelepiped,
    grid: &GridSpec,
    shift: &Probe,
) -> Result<Complex64> {
    check_dim(domain.dim(), shift)?;
    if h.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            actual: h.dim(),
        });
    }
    let nodes = domain.nodes(grid)?;
    let points = if shift.is_zero() && matches!(shift, Probe::Real(_)) {
        nodes
    } else {
        nodes.iter().map(|x| x.add(shift)).collect::<Result<Vec<_>>>()?
    };
    let values = evaluate_all(h, &points)?;
    let n = values.len() as f64;
    let mean = pairwise_sum_complex(&values) / n;
    Ok(mean * domain.volume())
}

/// [`midpoint_quadrature`] for a real integrand.
pub fn midpoint_quadrature_real(
    h: &dyn RealOracle,
    domain: &Parallelepiped,
    grid: &GridSpec,
    shift: &Probe,
) -> Result<f64> {
    Ok(midpoint_quadrature(&AsComplex(h), domain, grid, shift)?.re)
}
