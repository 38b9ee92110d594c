//! The linearity pipeline with the integral replaced by an abstract
//! functional `F`, plus a checker for the five properties `F` must have:
//!
//! * (a) `F(c·h) = c·F(h)` for unimodular `c`;
//! * (b) linear maps `x ↦ c·x` are admissible;
//! * (c) admissible functions are closed under sums and positive rational multiples;
//! * (d) `F(e^{i g(·+y)}) = F(e^{i g})` for `g` periodic under the translation system;
//! * (e) some rational `α > 0` has `F(e^{iαg}) ≠ 0`.
//!
//! Admissibility is not modelled as a set: a function is admissible when
//! `F` can be applied to its exponential.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{GridSpec, Parallelepiped};
use crate::error::{Error, Result};
use crate::estimator::{find_alpha_with, run_pipeline, AlphaSearchPolicy, Classification, CoefficientMode, Integrator};
use crate::hamel::{random_rational, HamelBasisSpec, HamelFunction, QVector};
use crate::oracle::{ComplexOracle, ExpPhase, FnComplexOracle, FnOracle, Multiple, Probe, RealOracle, Scaled, Sum};
use crate::quadrature::midpoint_quadrature;
use crate::rational::Rational;

/// Tolerance for axiom (a).
pub const HOMOGENEITY_TOLERANCE: f64 = 1e-9;
/// Tolerance for axiom (d).
pub const SHIFT_TOLERANCE: f64 = 1e-6;

/// A complex linear functional on oracles.
pub trait Functional: Send + Sync {
    fn apply(&self, u: &dyn ComplexOracle) -> Result<Complex64>;
}

/// A functional together with the data the pipeline needs from it.
#[derive(Clone)]
pub struct RegularityFunctional {
    pub label: String,
    /// The periods `u_1..u_n`; `c` is fitted on these.
    pub translation_system: Vec<Probe>,
    pub alpha_policy: AlphaSearchPolicy,
    /// `|F(1)|`, the scale of the α-search threshold.
    pub normalization: f64,
    apply: Arc<dyn Functional>,
}

impl fmt::Debug for RegularityFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegularityFunctional")
            .field("label", &self.label)
            .field("translation_system", &self.translation_system)
            .field("alpha_policy", &self.alpha_policy)
            .field("normalization", &self.normalization)
            .finish()
    }
}

impl RegularityFunctional {
    /// Wraps a user functional; the normalization is `|F(1)|`.
    pub fn new(
        label: impl Into<String>,
        translation_system: Vec<Probe>,
        alpha_policy: AlphaSearchPolicy,
        apply: Arc<dyn Functional>,
    ) -> Result<Self> {
        let n = translation_system.first().map(Probe::dim).unwrap_or(0);
        if n == 0 || translation_system.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: translation_system.len(),
            });
        }
        let one = FnComplexOracle::new(n, |_: &[f64]| Complex64::new(1.0, 0.0));
        let normalization = apply.apply(&one)?.norm();
        Ok(RegularityFunctional {
            label: label.into(),
            translation_system,
            alpha_policy,
            normalization,
            apply,
        })
    }

    pub fn with_policy(mut self, policy: AlphaSearchPolicy) -> Self {
        self.alpha_policy = policy;
        self
    }

    pub fn apply(&self, u: &dyn ComplexOracle) -> Result<Complex64> {
        self.apply.apply(u)
    }

    pub fn dim(&self) -> usize {
        self.translation_system.len()
    }
}

impl Integrator for RegularityFunctional {
    fn integrate(&self, h: &dyn ComplexOracle) -> Result<Complex64> {
        self.apply.apply(h)
    }

    fn reference_magnitude(&self) -> f64 {
        self.normalization
    }

    fn generators(&self) -> Vec<Probe> {
        self.translation_system.clone()
    }

    fn dim(&self) -> usize {
        self.translation_system.len()
    }
}

struct Integral {
    domain: Parallelepiped,
    grid: GridSpec,
}

impl Functional for Integral {
    fn apply(&self, u: &dyn ComplexOracle) -> Result<Complex64> {
        midpoint_quadrature(u, &self.domain, &self.grid, &self.domain.base_probe().zero_like())
    }
}

struct PointEvaluation {
    at: Probe,
}

impl Functional for PointEvaluation {
    fn apply(&self, u: &dyn ComplexOracle) -> Result<Complex64> {
        u.eval(&self.at)
    }
}

struct ZeroFunctional;

impl Functional for ZeroFunctional {
    fn apply(&self, _: &dyn ComplexOracle) -> Result<Complex64> {
        Ok(Complex64::new(0.0, 0.0))
    }
}

/// `F(u) = midpoint_quadrature(u, I, grid, 0)`, translation system = generators of `I`.
pub fn integral_functional(domain: &Parallelepiped, grid: &GridSpec) -> RegularityFunctional {
    RegularityFunctional {
        label: "integral".into(),
        translation_system: domain.generator_probes(),
        alpha_policy: AlphaSearchPolicy::default(),
        normalization: domain.volume(),
        apply: Arc::new(Integral {
            domain: domain.clone(),
            grid: grid.clone(),
        }),
    }
}

/// `F(u) = u(base of I)`.
pub fn point_evaluation_functional(domain: &Parallelepiped) -> RegularityFunctional {
    RegularityFunctional {
        label: "point-eval".into(),
        translation_system: domain.generator_probes(),
        alpha_policy: AlphaSearchPolicy::default(),
        normalization: 1.0,
        apply: Arc::new(PointEvaluation {
            at: domain.base_probe(),
        }),
    }
}

/// `F ≡ 0`.
pub fn zero_functional(domain: &Parallelepiped) -> RegularityFunctional {
    RegularityFunctional {
        label: "zero".into(),
        translation_system: domain.generator_probes(),
        alpha_policy: AlphaSearchPolicy::default(),
        normalization: 0.0,
        apply: Arc::new(ZeroFunctional),
    }
}

/// Built-in functional by label: `integral`, `point-eval` or `zero`.
pub fn builtin_functional(label: &str, domain: &Parallelepiped, grid: &GridSpec) -> Result<RegularityFunctional> {
    match label {
        "integral" => Ok(integral_functional(domain, grid)),
        "point-eval" => Ok(point_evaluation_functional(domain)),
        "zero" => Ok(zero_functional(domain)),
        other => Err(Error::InvalidInput(format!(
            "unknown functional {other:?}; expected integral, point-eval or zero"
        ))),
    }
}

/// The classification pipeline with every integral replaced by `F`.
pub fn generic_classify(f: &dyn RealOracle, functional: &RegularityFunctional, probes: &[Probe]) -> Classification {
    run_pipeline(
        f,
        functional,
        &functional.alpha_policy,
        probes,
        CoefficientMode::FromGenerators,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemberKind {
    Sinusoid,
    Linear,
    HamelResidual,
    UnitConstant,
}

pub struct FamilyMember {
    pub label: String,
    pub kind: MemberKind,
    /// The real function `g`; axioms are tested on `e^{i g}`.
    pub g: Arc<dyn RealOracle>,
    /// Whether `g` is periodic under the translation system.
    pub periodic: bool,
}

impl fmt::Debug for FamilyMember {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FamilyMember")
            .field("label", &self.label)
            .field("kind", &self.kind)
            .field("periodic", &self.periodic)
            .finish()
    }
}

/// Test inputs for [`check_axioms`].
#[derive(Debug)]
pub struct TestFamily {
    pub members: Vec<FamilyMember>,
    /// Unimodular scalars for axiom (a).
    pub scalars: Vec<Complex64>,
    /// Shifts for axiom (d), in the Q-span of the translation system.
    pub shifts: Vec<Probe>,
    /// Positive rationals for axiom (c).
    pub multipliers: Vec<Rational>,
}

/// The segment `[0, 1]·e1` in the span of `(1, √2)`.
pub fn default_frame() -> (Arc<HamelBasisSpec>, Parallelepiped) {
    let basis = Arc::new(HamelBasisSpec::standard(2).expect("shipped basis"));
    let frame = Parallelepiped::exact_interval(basis.clone(), 0, &Rational::zero(), &Rational::one())
        .expect("nonzero generator");
    (basis, frame)
}

impl TestFamily {
    /// Seeded family over [`default_frame`]: four sinusoids of period 1, eight
    /// linear maps with `c ∈ [−10, 10]`, eight Hamel residuals and eight
    /// unimodular constants.
    pub fn default_family(seed: u64) -> TestFamily {
        let (basis, _) = default_frame();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut members: Vec<FamilyMember> = Vec::new();

        type Wave = (&'static str, fn(f64) -> f64);
        let sinusoids: [Wave; 4] = [
            ("sin(2*pi*x)", |x| (2.0 * PI * x).sin()),
            ("sin(4*pi*x)", |x| (4.0 * PI * x).sin()),
            ("cos(2*pi*x)", |x| (2.0 * PI * x).cos()),
            ("sin(2*pi*x) + cos(6*pi*x)/2", |x| {
                (2.0 * PI * x).sin() + 0.5 * (6.0 * PI * x).cos()
            }),
        ];
        for (label, g) in sinusoids {
            members.push(FamilyMember {
                label: label.into(),
                kind: MemberKind::Sinusoid,
                g: Arc::new(FnOracle::new(1, move |x: &[f64]| g(x[0]))),
                periodic: true,
            });
        }
        for _ in 0..8 {
            let c: f64 = rng.random_range(-10.0..=10.0);
            members.push(FamilyMember {
                label: format!("{c}*x"),
                kind: MemberKind::Linear,
                g: Arc::new(FnOracle::new(1, move |x: &[f64]| c * x[0])),
                periodic: false,
            });
        }
        // f: e1 -> y1, e2 -> y2 has residual f(v) - y1*embed(v) = q2 * (y2 - y1*sqrt(2)).
        for _ in 0..8 {
            let y1 = random_rational(&mut rng, 20);
            let y2 = random_rational(&mut rng, 20);
            let scale = y2.to_f64() - y1.to_f64() * std::f64::consts::SQRT_2;
            let g = HamelFunction::from_labels(basis.clone(), [("e2", Rational::one())], scale)
                .expect("e2 is a label of the shipped basis");
            members.push(FamilyMember {
                label: format!("residual of {{e1 -> {y1}, e2 -> {y2}}}"),
                kind: MemberKind::HamelResidual,
                g: Arc::new(g),
                periodic: true,
            });
        }
        let mut scalars = Vec::new();
        for _ in 0..8 {
            let theta: f64 = rng.random_range(-PI..PI);
            scalars.push(Complex64::from_polar(1.0, theta));
            members.push(FamilyMember {
                label: format!("constant {theta}"),
                kind: MemberKind::UnitConstant,
                g: Arc::new(FnOracle::new(1, move |_: &[f64]| theta)),
                periodic: true,
            });
        }
        let mut shifts = vec![Probe::exact(
            basis.clone(),
            QVector::unit(0).scale(&Rational::new(1, 4).expect("4 > 0")),
        )];
        for _ in 0..3 {
            let q = random_rational(&mut rng, 20);
            shifts.push(Probe::exact(basis.clone(), QVector::unit(0).scale(&q)));
        }
        let multipliers = (0..4)
            .map(|_| {
                let q = random_rational(&mut rng, 20).abs();
                if q.is_zero() {
                    Rational::one()
                } else {
                    q
                }
            })
            .collect();
        TestFamily {
            members,
            scalars,
            shifts,
            multipliers,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axiom {
    A,
    B,
    C,
    D,
    E,
}

impl Axiom {
    pub const ALL: [Axiom; 5] = [Axiom::A, Axiom::B, Axiom::C, Axiom::D, Axiom::E];

    pub fn letter(self) -> char {
        match self {
            Axiom::A => 'a',
            Axiom::B => 'b',
            Axiom::C => 'c',
            Axiom::D => 'd',
            Axiom::E => 'e',
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// The inputs and values that broke an axiom.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomWitness {
    pub member: String,
    pub input: String,
    pub values: Vec<(String, Complex64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomEntry {
    pub axiom: Axiom,
    pub passed: bool,
    pub checks: usize,
    pub witness: Option<AxiomWitness>,
}

/// One entry per axiom, in order `a..e`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub functional: String,
    pub entries: Vec<AxiomEntry>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failed(&self) -> Vec<Axiom> {
        self.entries.iter().filter(|e| !e.passed).map(|e| e.axiom).collect()
    }

    pub fn entry(&self, axiom: Axiom) -> &AxiomEntry {
        &self.entries[axiom as usize]
    }
}

struct Tally {
    axiom: Axiom,
    checks: usize,
    witness: Option<AxiomWitness>,
}

impl Tally {
    fn new(axiom: Axiom) -> Self {
        Tally {
            axiom,
            checks: 0,
            witness: None,
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> AxiomWitness) {
        self.checks += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    fn error(&mut self, member: &str, input: String, e: &Error) {
        self.record(false, || AxiomWitness {
            member: member.to_string(),
            input: format!("{input}: {e}"),
            values: vec![],
        });
    }

    fn finish(self) -> AxiomEntry {
        AxiomEntry {
            axiom: self.axiom,
            passed: self.witness.is_none(),
            checks: self.checks,
            witness: self.witness,
        }
    }
}

/// Tests axioms (a)–(e) of `functional` on every member of `family`.
pub fn check_axioms(functional: &RegularityFunctional, family: &TestFamily) -> Result<AxiomReport> {
    if family.members.is_empty() {
        return Err(Error::InvalidInput("test family is empty".into()));
    }
    let mut a = Tally::new(Axiom::A);
    let mut b = Tally::new(Axiom::B);
    let mut c = Tally::new(Axiom::C);
    let mut d = Tally::new(Axiom::D);
    let mut e = Tally::new(Axiom::E);

    for m in &family.members {
        let h = ExpPhase { g: &*m.g, alpha: 1.0 };
        let fh = match functional.apply(&h) {
            Ok(v) => v,
            Err(err) => {
                let t = if m.kind == MemberKind::Linear { &mut b } else { &mut c };
                t.error(&m.label, "F(exp(i g))".into(), &err);
                continue;
            }
        };

        for &s in &family.scalars {
            match functional.apply(&Scaled { h: &h, c: s }) {
                Ok(fch) => {
                    let expected = s * fh;
                    a.record((fch - expected).norm() <= HOMOGENEITY_TOLERANCE, || AxiomWitness {
                        member: m.label.clone(),
                        input: format!("c = {s}"),
                        values: vec![("F(c h)".into(), fch), ("c F(h)".into(), expected)],
                    });
                }
                Err(err) => a.error(&m.label, format!("F(c h) with c = {s}"), &err),
            }
        }

        if m.kind == MemberKind::Linear {
            b.record(fh.re.is_finite() && fh.im.is_finite(), || AxiomWitness {
                member: m.label.clone(),
                input: "F(exp(i c x))".into(),
                values: vec![("F".into(), fh)],
            });
        }

        if m.periodic {
            for y in &family.shifts {
                let gy = crate::oracle::Shifted {
                    g: &*m.g,
                    shift: y.clone(),
                };
                match functional.apply(&ExpPhase { g: &gy, alpha: 1.0 }) {
                    Ok(fy) => d.record((fy - fh).norm() <= SHIFT_TOLERANCE, || AxiomWitness {
                        member: m.label.clone(),
                        input: format!("y = {}", y.describe()),
                        values: vec![("F(exp(i g_y))".into(), fy), ("F(exp(i g))".into(), fh)],
                    }),
                    Err(err) => d.error(&m.label, format!("shift {}", y.describe()), &err),
                }
            }
        }

        match find_alpha_with(&*m.g, functional, &functional.alpha_policy) {
            Ok(hit) => e.record(hit.is_some(), || AxiomWitness {
                member: m.label.clone(),
                input: format!(
                    "{} alpha candidates up to denominator {}",
                    functional.alpha_policy.candidates().len(),
                    functional.alpha_policy.max_denominator()
                ),
                values: vec![("F(exp(i g))".into(), fh)],
            }),
            Err(err) => e.error(&m.label, "alpha search".into(), &err),
        }
    }

    let n = family.members.len();
    for (i, m) in family.members.iter().enumerate() {
        let next = &family.members[(i + 1) % n];
        let sum = Sum(&*m.g, &*next.g);
        let label = format!("({}) + ({})", m.label, next.label);
        match functional.apply(&ExpPhase { g: &sum, alpha: 1.0 }) {
            Ok(v) => c.record(v.re.is_finite() && v.im.is_finite(), || AxiomWitness {
                member: label.clone(),
                input: "sum".into(),
                values: vec![("F".into(), v)],
            }),
            Err(err) => c.error(&label, "sum".into(), &err),
        }
        let q = &family.multipliers[i % family.multipliers.len().max(1)];
        let multiple = Multiple {
            g: &*m.g,
            factor: q.to_f64(),
        };
        match functional.apply(&ExpPhase {
            g: &multiple,
            alpha: 1.0,
        }) {
            Ok(v) => c.record(v.re.is_finite() && v.im.is_finite(), || AxiomWitness {
                member: m.label.clone(),
                input: format!("multiple by {q}"),
                values: vec![("F".into(), v)],
            }),
            Err(err) => c.error(&m.label, format!("multiple by {q}"), &err),
        }
    }

    Ok(AxiomReport {
        functional: functional.label.clone(),
        entries: vec![a.finish(), b.finish(), c.finish(), d.finish(), e.finish()],
    })
}
