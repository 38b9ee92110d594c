use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::alpha::{find_alpha_with, AlphaHit, AlphaSearchPolicy};
use super::{
    Integrator, QuadratureIntegrator, ADDITIVITY_SPOT_TOLERANCE, LATTICE_TOLERANCE, PHASE_TOLERANCE, REFUTATION_DIVISOR,
};
use crate::domain::{GridSpec, Parallelepiped, DEGENERACY_TOLERANCE};
use crate::error::{Error, Result};
use crate::hamel::HamelBasisSpec;
use crate::oracle::{DomainTag, Probe, RealOracle};
use crate::rational::Rational;

const SOLVE_TOLERANCE: f64 = 1e-10;

/// Solves `c · u_k = f(u_k)` for `c`, with `f` evaluated at the generators
/// themselves (not at `base + u_k`).
pub fn solve_coefficients(f: &dyn RealOracle, generators: &[Probe]) -> Result<Vec<f64>> {
    let n = generators.len();
    if n == 0 || n != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            actual: n,
        });
    }
    let rows: Vec<Vec<f64>> = generators.iter().map(Probe::coords).collect();
    let u = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let det = u.determinant();
    if det.is_nan() || det.abs() <= DEGENERACY_TOLERANCE {
        return Err(Error::DegenerateDomain { det });
    }
    let b = DVector::from_iterator(n, generators.iter().map(|p| f.eval(p)).collect::<Result<Vec<_>>>()?);
    if let Some(v) = b.iter().find(|v| !v.is_finite()) {
        return Err(Error::OracleFailure {
            node: rows[0].clone(),
            value: v.to_string(),
        });
    }
    let c = u.clone().lu().solve(&b).ok_or(Error::DegenerateDomain { det })?;
    let residual = (&u * &c - &b).amax();
    if residual > SOLVE_TOLERANCE * b.amax().max(1.0) {
        return Err(Error::SolveResidual { residual });
    }
    Ok(c.iter().copied().collect())
}

/// The unique `c` with `c · u_k = f(u_k)` for the generators of `I`.
pub fn coefficient_from_generators(f: &dyn RealOracle, domain: &Parallelepiped) -> Result<Vec<f64>> {
    solve_coefficients(f, &domain.generator_probes())
}

/// `g(x) = f(x) − c · x`.
pub struct Residual<O> {
    pub f: O,
    pub c: Vec<f64>,
}

impl<O: RealOracle> RealOracle for Residual<O> {
    fn dim(&self) -> usize {
        self.f.dim()
    }
    fn domain(&self) -> DomainTag {
        self.f.domain()
    }
    fn exact_basis(&self) -> Option<&Arc<HamelBasisSpec>> {
        self.f.exact_basis()
    }
    fn eval(&self, x: &Probe) -> Result<f64> {
        let v = self.f.eval(x)?;
        if self.c.iter().all(|&c| c == 0.0) {
            return Ok(v);
        }
        Ok(v - x.dot(&self.c))
    }
}

pub fn residual_oracle<O: RealOracle>(f: O, c: Vec<f64>) -> Result<Residual<O>> {
    if c.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            actual: c.len(),
        });
    }
    Ok(Residual { f, c })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEntry {
    pub point: Probe,
    pub value: f64,
    pub phase: Complex64,
}

impl PhaseEntry {
    pub fn defect(&self) -> f64 {
        (self.phase - 1.0).norm()
    }

    pub fn passed(&self) -> bool {
        self.defect() <= PHASE_TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub entries: Vec<PhaseEntry>,
    /// Index of the largest `|phase − 1|` among failures, first on ties.
    pub worst: Option<usize>,
}

impl PhaseReport {
    pub fn passed(&self) -> bool {
        self.worst.is_none()
    }
}

/// Computes `e^{iαg(y)}` at every point; passes iff all lie within
/// [`PHASE_TOLERANCE`] of 1.
pub fn phase_test(g: &dyn RealOracle, alpha: &Rational, points: &[Probe]) -> Result<PhaseReport> {
    if !alpha.is_positive() {
        return Err(Error::Precondition(format!("alpha must be positive, got {alpha}")));
    }
    let a = alpha.to_f64();
    let mut entries = Vec::with_capacity(points.len());
    let mut worst: Option<(usize, f64)> = None;
    for (i, y) in points.iter().enumerate() {
        let value = g.eval(y)?;
        if !value.is_finite() {
            return Err(Error::OracleFailure {
                node: y.coords(),
                value: value.to_string(),
            });
        }
        let entry = PhaseEntry {
            point: y.clone(),
            value,
            phase: Complex64::from_polar(1.0, a * value),
        };
        let d = entry.defect();
        if !entry.passed() && worst.is_none_or(|(_, w)| d > w) {
            worst = Some((i, d));
        }
        entries.push(entry);
    }
    Ok(PhaseReport {
        entries,
        worst: worst.map(|(i, _)| i),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Refutation {
    /// `e^{iαg(y₀/(7k₀))} = e^{2πi/7}`: additive and lattice-valued is impossible.
    Refuted {
        probe: Probe,
        phase: Complex64,
    },
    /// The scaled probe still has phase 1, so `g(qy) ≠ q·g(y)`.
    NotAdditiveAtProbe {
        probe: Probe,
        phase: Complex64,
    },
    Inconclusive {
        probe: Probe,
        phase: Complex64,
    },
}

impl Refutation {
    pub fn probe(&self) -> &Probe {
        match self {
            Refutation::Refuted { probe, .. }
            | Refutation::NotAdditiveAtProbe { probe, .. }
            | Refutation::Inconclusive { probe, .. } => probe,
        }
    }

    pub fn phase(&self) -> Complex64 {
        match self {
            Refutation::Refuted { phase, .. }
            | Refutation::NotAdditiveAtProbe { phase, .. }
            | Refutation::Inconclusive { phase, .. } => *phase,
        }
    }
}

/// Given `α·g(y₀) ≈ 2πk₀` with `k₀ ≠ 0`, evaluates the phase at `y₀/(7k₀)`.
pub fn lattice_refutation(g: &dyn RealOracle, alpha: &Rational, y0: &Probe, k0: i64) -> Result<Refutation> {
    if k0 == 0 {
        return Err(Error::Precondition("lattice index k0 must be nonzero".into()));
    }
    if !alpha.is_positive() {
        return Err(Error::Precondition(format!("alpha must be positive, got {alpha}")));
    }
    let a = alpha.to_f64();
    let at_y0 = a * g.eval(y0)?;
    let off = (at_y0 - 2.0 * PI * k0 as f64).abs();
    if off.is_nan() || off > LATTICE_TOLERANCE {
        return Err(Error::Precondition(format!(
            "alpha*g(y0) = {at_y0} is {off:e} away from 2*pi*{k0}"
        )));
    }
    let divisor = Rational::from_integer(REFUTATION_DIVISOR * k0).recip()?;
    let probe = y0.scale(&divisor);
    let phase = Complex64::from_polar(1.0, a * g.eval(&probe)?);
    let seventh = Complex64::from_polar(1.0, 2.0 * PI / REFUTATION_DIVISOR as f64);
    Ok(if (phase - seventh).norm() <= PHASE_TOLERANCE {
        Refutation::Refuted { probe, phase }
    } else if (phase - 1.0).norm() <= PHASE_TOLERANCE {
        Refutation::NotAdditiveAtProbe { probe, phase }
    } else {
        Refutation::Inconclusive { probe, phase }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessSource {
    PhaseTest,
    LatticeRefutation,
}

/// A point where `e^{iαg}` is provably not 1, so `f` is not `c · x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub point: Probe,
    pub alpha: Rational,
    pub phase: Complex64,
    /// `g(point) = f(point) − c · point`.
    pub residual: f64,
    pub source: WitnessSource,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinearityVerdict {
    Linear { c: Vec<f64> },
    NonlinearWitness(Witness),
    Inconclusive { reason: String, diagnostics: Vec<String> },
}

impl LinearityVerdict {
    pub fn is_linear(&self) -> bool {
        matches!(self, LinearityVerdict::Linear { .. })
    }

    pub fn is_nonlinear(&self) -> bool {
        matches!(self, LinearityVerdict::NonlinearWitness(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            LinearityVerdict::Linear { .. } => "linear",
            LinearityVerdict::NonlinearWitness(_) => "nonlinear",
            LinearityVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Finite check of `f(a+b) = f(a) + f(b)` on consecutive probe pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SpotCheck {
    pub pairs: usize,
    pub max_defect: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub coefficient: Option<Vec<f64>>,
    pub alpha: Option<AlphaHit>,
    pub phases: Option<PhaseReport>,
    pub refutations: Vec<Refutation>,
    pub additivity: Option<SpotCheck>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub verdict: LinearityVerdict,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientMode {
    /// Fit `c` on the integrator's generators.
    FromGenerators,
    /// Use `c = 0` (homomorphisms out of a torus have no linear part).
    Zero,
}

fn spot_check(f: &dyn RealOracle, probes: &[Probe]) -> Result<SpotCheck> {
    let n = probes.len();
    let mut max_defect: f64 = 0.0;
    let mut pairs = 0;
    for i in 0..n {
        let (a, b) = (&probes[i], &probes[(i + 1) % n]);
        let sum = a.add(b)?;
        let d = (f.eval(&sum)? - f.eval(a)? - f.eval(b)?).abs();
        max_defect = if d.is_nan() { f64::NAN } else { max_defect.max(d) };
        pairs += 1;
    }
    Ok(SpotCheck {
        pairs,
        max_defect,
        passed: max_defect <= ADDITIVITY_SPOT_TOLERANCE,
    })
}

fn inconclusive(reason: impl Into<String>, diagnostics: Diagnostics) -> Classification {
    let reason = reason.into();
    let mut lines = diagnostics.notes.clone();
    if let Some(c) = &diagnostics.coefficient {
        lines.push(format!("coefficient {c:?}"));
    }
    if let Some(s) = &diagnostics.additivity {
        lines.push(format!(
            "additivity spot-check over {} pairs: max defect {:e} ({})",
            s.pairs,
            s.max_defect,
            if s.passed { "pass" } else { "fail" }
        ));
    }
    Classification {
        verdict: LinearityVerdict::Inconclusive {
            reason,
            diagnostics: lines,
        },
        diagnostics,
    }
}

/// The full pipeline, generic over the averaging functional.
///
/// Steps: fit `c` (or take 0); form `g = f − c·x`; find α with a nonvanishing
/// `F(e^{iαg})`; phase-test every probe; run the lattice refutation on probes
/// sitting on a nonzero lattice point; report `Linear(c)`.
pub fn run_pipeline(
    f: &dyn RealOracle,
    integrator: &dyn Integrator,
    policy: &AlphaSearchPolicy,
    probes: &[Probe],
    mode: CoefficientMode,
) -> Classification {
    let mut diag = Diagnostics::default();
    if probes.is_empty() {
        return inconclusive("no probes supplied", diag);
    }
    match spot_check(f, probes) {
        Ok(s) => diag.additivity = Some(s),
        Err(e) => diag.notes.push(format!("additivity spot-check skipped: {e}")),
    }

    let c = match mode {
        CoefficientMode::Zero => vec![0.0; f.dim()],
        CoefficientMode::FromGenerators => match solve_coefficients(f, &integrator.generators()) {
            Ok(c) => c,
            Err(e) => return inconclusive(format!("coefficient fit failed: {e}"), diag),
        },
    };
    diag.coefficient = Some(c.clone());
    let g = Residual { f, c: c.clone() };

    let hit = match find_alpha_with(&g, integrator, policy) {
        Ok(Some(hit)) => hit,
        Ok(None) => return inconclusive("no nonvanishing alpha", diag),
        Err(e) => return inconclusive(format!("alpha search failed: {e}"), diag),
    };
    diag.alpha = Some(hit.clone());
    let alpha = hit.alpha;

    let report = match phase_test(&g, &alpha, probes) {
        Ok(r) => r,
        Err(e) => return inconclusive(format!("phase test failed to run: {e}"), diag),
    };
    diag.phases = Some(report.clone());
    if let Some(i) = report.worst {
        let e = &report.entries[i];
        let witness = Witness {
            point: e.point.clone(),
            alpha,
            phase: e.phase,
            residual: e.value,
            source: WitnessSource::PhaseTest,
        };
        return Classification {
            verdict: LinearityVerdict::NonlinearWitness(witness),
            diagnostics: diag,
        };
    }

    let a = alpha.to_f64();
    let mut unresolved: Option<String> = None;
    for e in &report.entries {
        let k0 = (a * e.value / (2.0 * PI)).round();
        if k0 == 0.0 || !k0.is_finite() {
            continue;
        }
        let refutation = match lattice_refutation(&g, &alpha, &e.point, k0 as i64) {
            Ok(r) => r,
            Err(err) => {
                unresolved.get_or_insert(format!("lattice refutation at {} failed: {err}", e.point.describe()));
                continue;
            }
        };
        diag.refutations.push(refutation.clone());
        match refutation {
            Refutation::Refuted { probe, phase } => {
                let residual = g.eval(&probe).unwrap_or(f64::NAN);
                let witness = Witness {
                    point: probe,
                    alpha,
                    phase,
                    residual,
                    source: WitnessSource::LatticeRefutation,
                };
                return Classification {
                    verdict: LinearityVerdict::NonlinearWitness(witness),
                    diagnostics: diag,
                };
            }
            Refutation::NotAdditiveAtProbe { probe, .. } => {
                unresolved.get_or_insert(format!(
                    "g takes the nonzero lattice value 2*pi*{k0}/alpha at {} but is not rationally homogeneous at {}",
                    e.point.describe(),
                    probe.describe()
                ));
            }
            Refutation::Inconclusive { probe, phase } => {
                unresolved.get_or_insert(format!(
                    "lattice refutation at {} measured phase {phase}",
                    probe.describe()
                ));
            }
        }
    }
    if let Some(reason) = unresolved {
        return inconclusive(reason, diag);
    }
    Classification {
        verdict: LinearityVerdict::Linear { c },
        diagnostics: diag,
    }
}

/// Decides whether `f` is `c · x` on Rⁿ, using midpoint integration over `I`.
pub fn classify(
    f: &dyn RealOracle,
    domain: &Parallelepiped,
    grid: &GridSpec,
    policy: &AlphaSearchPolicy,
    probes: &[Probe],
) -> Classification {
    let integrator = QuadratureIntegrator { domain, grid };
    run_pipeline(f, &integrator, policy, probes, CoefficientMode::FromGenerators)
}

#[derive(Debug, Clone, PartialEq)]
pub enum VectorVerdict {
    /// Row `k` is the coefficient vector of component `k`.
    Linear {
        matrix: Vec<Vec<f64>>,
    },
    Nonlinear {
        component: usize,
        witness: Witness,
    },
    Inconclusive {
        component: usize,
        reason: String,
    },
}

/// Classifies each component of `f: Rⁿ → Rᵐ`; component indices are 1-based.
pub fn classify_vector_valued(
    components: &[&dyn RealOracle],
    domain: &Parallelepiped,
    grid: &GridSpec,
    policy: &AlphaSearchPolicy,
    probes: &[Probe],
) -> (VectorVerdict, Vec<Classification>) {
    let results: Vec<Classification> = components
        .iter()
        .map(|f| classify(*f, domain, grid, policy, probes))
        .collect();
    let mut first_inconclusive = None;
    let mut rows = Vec::with_capacity(results.len());
    for (k, r) in results.iter().enumerate() {
        match &r.verdict {
            LinearityVerdict::NonlinearWitness(w) => {
                return (
                    VectorVerdict::Nonlinear {
                        component: k + 1,
                        witness: w.clone(),
                    },
                    results,
                )
            }
            LinearityVerdict::Inconclusive { reason, .. } => {
                first_inconclusive.get_or_insert((k + 1, reason.clone()));
            }
            LinearityVerdict::Linear { c } => rows.push(c.clone()),
        }
    }
    let verdict = match first_inconclusive {
        Some((component, reason)) => VectorVerdict::Inconclusive { component, reason },
        None if components.is_empty() => VectorVerdict::Inconclusive {
            component: 1,
            reason: "no components".into(),
        },
        None => VectorVerdict::Linear { matrix: rows },
    };
    (verdict, results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamel::{HamelFunction, QVector};
    use crate::oracle::FnOracle;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn y(v: &[f64]) -> Probe {
        Probe::real(v.to_vec()).unwrap()
    }

    fn wild(two_pi: bool) -> HamelFunction {
        let basis = Arc::new(HamelBasisSpec::standard(2).unwrap());
        let scale = if two_pi { 2.0 * PI } else { 1.0 };
        HamelFunction::from_labels(basis, [("e2", q("1"))], scale).unwrap()
    }

    fn along_e1(f: &HamelFunction) -> Parallelepiped {
        Parallelepiped::exact_interval(f.basis.clone(), 0, &Rational::zero(), &Rational::one()).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        let f = FnOracle::new(1, |x: &[f64]| 3.0 * x[0]);
        let c = coefficient_from_generators(&f, &Parallelepiped::interval(0.0, 2.0).unwrap()).unwrap();
        assert_eq!(c, vec![3.0]);

        let f = FnOracle::new(2, |x: &[f64]| x[0] - 2.0 * x[1]);
        let i = Parallelepiped::new(
            crate::domain::Point::origin(2),
            vec![
                crate::domain::Point::new(vec![1.0, 0.0]).unwrap(),
                crate::domain::Point::new(vec![1.0, 1.0]).unwrap(),
            ],
        )
        .unwrap();
        let c = coefficient_from_generators(&f, &i).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-14 && (c[1] + 2.0).abs() < 1e-14, "{c:?}");

        let h = wild(false);
        assert_eq!(coefficient_from_generators(&h, &along_e1(&h)).unwrap(), vec![0.0]);
    }

    #[test]
    fn generators_are_used_as_vectors_not_offsets() {
        // I = [5, 7] has generator u = 2; f(u) = 6 gives c = 3 regardless of the base.
        let f = FnOracle::new(1, |x: &[f64]| 3.0 * x[0]);
        let c = coefficient_from_generators(&f, &Parallelepiped::interval(5.0, 7.0).unwrap()).unwrap();
        assert_eq!(c, vec![3.0]);
    }

    #[test]
    fn residual_examples() {
        let f = FnOracle::new(1, |x: &[f64]| 3.0 * x[0]);
        let g = residual_oracle(&f, vec![3.0]).unwrap();
        for x in [-2.5, 0.0, 0.25, 9.0] {
            assert_eq!(g.eval(&y(&[x])).unwrap(), 0.0);
        }
        let f = FnOracle::new(1, |x: &[f64]| 3.0 * x[0] + (2.0 * PI * x[0]).sin());
        let g = residual_oracle(&f, vec![3.0]).unwrap();
        assert!((g.eval(&y(&[0.25])).unwrap() - 1.0).abs() < 1e-15);

        let h = wild(false);
        let g = residual_oracle(&h, vec![0.0]).unwrap();
        let p = h.point(QVector::unit(1).scale(&q("5/3")));
        assert_eq!(g.eval(&p).unwrap(), h.eval(&p).unwrap());
        assert!(residual_oracle(&h, vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn residual_vanishes_on_generators() {
        let f = FnOracle::new(2, |x: &[f64]| 1.7 * x[0] - 0.3 * x[1] + (x[0] * x[1]).sin());
        let i = Parallelepiped::new(
            crate::domain::Point::origin(2),
            vec![
                crate::domain::Point::new(vec![1.0, 0.5]).unwrap(),
                crate::domain::Point::new(vec![-0.25, 2.0]).unwrap(),
            ],
        )
        .unwrap();
        let c = coefficient_from_generators(&f, &i).unwrap();
        let g = residual_oracle(&f, c).unwrap();
        for u in i.generator_probes() {
            assert!(g.eval(&u).unwrap().abs() <= 1e-9);
        }
    }

    #[test]
    fn phase_test_examples() {
        let zero = FnOracle::new(1, |_: &[f64]| 0.0);
        let pts = [y(&[0.1]), y(&[-3.0])];
        let r = phase_test(&zero, &q("2/3"), &pts).unwrap();
        assert!(r.passed());
        assert!(r.entries.iter().all(|e| e.phase == Complex64::new(1.0, 0.0)));

        let lattice = FnOracle::new(1, |_: &[f64]| 2.0 * PI);
        assert!(phase_test(&lattice, &q("1"), &pts).unwrap().passed());

        let id = FnOracle::new(1, |x: &[f64]| x[0]);
        let r = phase_test(&id, &q("1"), &[y(&[0.0]), y(&[PI])]).unwrap();
        assert_eq!(r.worst, Some(1));
        let e = &r.entries[1];
        assert!((e.phase + 1.0).norm() < 1e-15);
        assert!((e.defect() - 2.0).abs() < 1e-15);

        assert!(phase_test(&id, &Rational::zero(), &pts).is_err());
    }

    #[test]
    fn lattice_refutation_examples() {
        let constant = FnOracle::new(1, |_: &[f64]| 2.0 * PI);
        let r = lattice_refutation(&constant, &q("1"), &y(&[0.6]), 1).unwrap();
        assert!(matches!(r, Refutation::NotAdditiveAtProbe { .. }), "{r:?}");

        let ramp = FnOracle::new(1, |x: &[f64]| 2.0 * PI * x[0]);
        let r = lattice_refutation(&ramp, &q("1"), &y(&[1.0]), 1).unwrap();
        match r {
            Refutation::Refuted { probe, phase } => {
                assert!((probe.coords()[0] - 1.0 / 7.0).abs() < 1e-16);
                assert!((phase - Complex64::from_polar(1.0, 2.0 * PI / 7.0)).norm() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        // Negative lattice index: y0 = -2 sits on k0 = -2.
        let r = lattice_refutation(&ramp, &q("1"), &y(&[-2.0]), -2).unwrap();
        assert!(matches!(r, Refutation::Refuted { .. }));

        let zero = FnOracle::new(1, |_: &[f64]| 0.0);
        assert!(lattice_refutation(&zero, &q("1"), &y(&[1.0]), 0).is_err());
        // g(y0) is not on the claimed lattice point.
        assert!(lattice_refutation(&ramp, &q("1"), &y(&[0.5]), 1).is_err());
    }

    #[test]
    fn classify_linear() {
        let f = FnOracle::new(1, |x: &[f64]| 2.0 * x[0]);
        let probes: Vec<Probe> = (0..16).map(|k| y(&[-3.0 + 0.41 * k as f64])).collect();
        let r = classify(
            &f,
            &Parallelepiped::interval(0.0, 1.0).unwrap(),
            &GridSpec::new(vec![64]).unwrap(),
            &AlphaSearchPolicy::default(),
            &probes,
        );
        assert_eq!(r.verdict, LinearityVerdict::Linear { c: vec![2.0] });
        assert!(r.diagnostics.additivity.unwrap().passed);
    }

    #[test]
    fn classify_wild_hamel_function() {
        let f = wild(true);
        let i = along_e1(&f);
        let probes = [f.point(QVector::unit(1)), f.point(QVector::unit(1).scale(&q("1/7")))];
        let r = classify(
            &f,
            &i,
            &GridSpec::new(vec![64]).unwrap(),
            &AlphaSearchPolicy::default(),
            &probes,
        );
        match r.verdict {
            LinearityVerdict::NonlinearWitness(w) => {
                assert_eq!(w.source, WitnessSource::PhaseTest);
                assert_eq!(w.point, probes[1]);
                assert_eq!(w.alpha, Rational::one());
                assert!((w.phase - Complex64::from_polar(1.0, 2.0 * PI / 7.0)).norm() < 1e-12);
                assert!((w.residual - 2.0 * PI / 7.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lattice_path_catches_what_the_phase_test_misses() {
        let f = wild(true);
        let i = along_e1(&f);
        // e2 alone has phase exactly 1: only the 1/7 probe exposes it.
        let probes = [f.point(QVector::unit(1))];
        let r = classify(
            &f,
            &i,
            &GridSpec::new(vec![64]).unwrap(),
            &AlphaSearchPolicy::default(),
            &probes,
        );
        assert!(r.diagnostics.phases.as_ref().unwrap().passed());
        match r.verdict {
            LinearityVerdict::NonlinearWitness(w) => {
                assert_eq!(w.source, WitnessSource::LatticeRefutation);
                assert_eq!(w.point, f.point(QVector::unit(1).scale(&q("1/7"))));
                assert!((w.phase - 1.0).norm() > 0.5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_square_is_never_linear() {
        let f = FnOracle::new(1, |x: &[f64]| x[0] * x[0]);
        let r = classify(
            &f,
            &Parallelepiped::interval(0.0, 1.0).unwrap(),
            &GridSpec::new(vec![4096]).unwrap(),
            &AlphaSearchPolicy::default(),
            &[y(&[0.5])],
        );
        assert_eq!(r.diagnostics.coefficient, Some(vec![1.0]));
        match r.verdict {
            LinearityVerdict::NonlinearWitness(w) => {
                assert_eq!(w.residual, -0.25);
                assert!((w.phase - 1.0).norm() > PHASE_TOLERANCE);
            }
            other => panic!("{other:?}"),
        }
        assert!(!r.diagnostics.additivity.unwrap().passed);
    }

    #[test]
    fn constant_lattice_function_is_not_called_linear() {
        let f = FnOracle::new(1, |_: &[f64]| 2.0 * PI);
        let r = classify(
            &f,
            &Parallelepiped::interval(0.0, 1.0).unwrap(),
            &GridSpec::new(vec![64]).unwrap(),
            &AlphaSearchPolicy::default(),
            &[y(&[0.3])],
        );
        assert!(!r.verdict.is_linear(), "{:?}", r.verdict);
    }

    #[test]
    fn empty_probes_and_failing_oracles_are_inconclusive() {
        let f = FnOracle::new(1, |x: &[f64]| 2.0 * x[0]);
        let i = Parallelepiped::interval(0.0, 1.0).unwrap();
        let g = GridSpec::new(vec![16]).unwrap();
        let r = classify(&f, &i, &g, &AlphaSearchPolicy::default(), &[]);
        assert!(matches!(r.verdict, LinearityVerdict::Inconclusive { .. }));

        let nan = FnOracle::new(1, |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { x[0] });
        let r = classify(&nan, &i, &g, &AlphaSearchPolicy::default(), &[y(&[0.1])]);
        match r.verdict {
            LinearityVerdict::Inconclusive { reason, .. } => assert!(reason.contains("NaN"), "{reason}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn vector_valued() {
        let a = FnOracle::new(1, |x: &[f64]| 2.0 * x[0]);
        let b = FnOracle::new(1, |x: &[f64]| -x[0]);
        let i = Parallelepiped::interval(0.0, 1.0).unwrap();
        let g = GridSpec::new(vec![64]).unwrap();
        let probes = [y(&[0.7]), y(&[-1.3])];
        let (v, _) = classify_vector_valued(&[&a, &b], &i, &g, &AlphaSearchPolicy::default(), &probes);
        assert_eq!(
            v,
            VectorVerdict::Linear {
                matrix: vec![vec![2.0], vec![-1.0]]
            }
        );

        let s = FnOracle::new(2, |x: &[f64]| x[0] + x[1]);
        let d = FnOracle::new(2, |x: &[f64]| x[0] - x[1]);
        let cube = Parallelepiped::unit_cube(2).unwrap();
        let g2 = GridSpec::uniform(2, 32).unwrap();
        let probes2 = [y(&[0.2, 0.9]), y(&[-1.0, 0.5])];
        let (v, _) = classify_vector_valued(&[&s, &d], &cube, &g2, &AlphaSearchPolicy::default(), &probes2);
        assert_eq!(
            v,
            VectorVerdict::Linear {
                matrix: vec![vec![1.0, 1.0], vec![1.0, -1.0]]
            }
        );
    }

    #[test]
    fn vector_valued_tags_the_wild_component() {
        let h = wild(true);
        let lin = FnOracle::new(1, |x: &[f64]| 2.0 * x[0]);
        let i = along_e1(&h);
        let probes = [h.point(QVector::unit(1)), h.point(QVector::unit(1).scale(&q("1/7")))];
        let (v, _) = classify_vector_valued(
            &[&lin, &h],
            &i,
            &GridSpec::new(vec![64]).unwrap(),
            &AlphaSearchPolicy::default(),
            &probes,
        );
        assert!(matches!(v, VectorVerdict::Nonlinear { component: 2, .. }), "{v:?}");
    }
}
