//! Command-line front end. Every command produces one JSON document and an
//! exit code: 0 success, 1 negative or inconclusive verdict, 2 input error,
//! 3 internal error.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::domain::{GridSpec, Parallelepiped, Point};
use crate::error::Error;
use crate::estimator::{
    classify, classify_vector_valued, exp_integral, mean_value_estimate, AlphaSearchPolicy, Classification,
    Diagnostics, LinearityVerdict, Refutation, VectorVerdict, Witness, WitnessSource, DEFAULT_MAX_DENOMINATOR,
    DEFAULT_THRESHOLD,
};
use crate::expr::ExprOracle;
use crate::framework::{builtin_functional, check_axioms, default_frame, AxiomReport, TestFamily};
use crate::hamel::{
    check_additive, density_witness, random_qvector, DensityReport, HamelBasisSpec, HamelDocument, HamelFunction,
    QVector, Window,
};
use crate::oracle::{Probe, RealOracle};
use crate::rational::Rational;
use crate::sampled::SampledOracle;
use crate::torus::{
    torsion_vanishing, torus_classify, GridSubgroup, TorsionVerdict, TorusPoint, TorusVerdict, TorusWitnessKind,
    ValuesTable,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Environment variable holding the seed for all randomized generation.
pub const SEED_VAR: &str = "ADDITIVE_LAB_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub payload: Value,
    /// Plain text to print instead of the payload (help and version output).
    pub text: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Precondition(_) | Error::SolveResidual { .. } | Error::DivisionByZero => {
                Failure::Internal(e.to_string())
            }
            other => Failure::Input(other.to_string()),
        }
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

type Outcome = std::result::Result<(i32, Value), Failure>;

#[derive(Parser, Debug)]
#[command(
    name = "additive-lab",
    version,
    about = "Linearity tests and constructions for additive functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a Hamel function document and print its canonical form.
    Construct {
        /// Hamel JSON document.
        path: PathBuf,
        /// Also write the canonical document here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a function is x -> c.x or find a witness against it.
    Classify(ClassifyArgs),
    /// Classify each component of a vector-valued function.
    ClassifyVec(ClassifyVecArgs),
    /// Measure how much of a window the graph of a Hamel function reaches.
    Density(DensityArgs),
    /// Check that a torus homomorphism vanishes.
    TorusCheck(TorusArgs),
    /// Check axioms (a)-(e) for a built-in functional.
    Axioms(AxiomsArgs),
    /// Estimate g(y) from the shifted average of g.
    MeanValue(ValueArgs),
    /// Midpoint quadrature of exp(i alpha g).
    ExpIntegral(ValueArgs),
}

#[derive(Args, Debug, Clone)]
struct SourceArgs {
    /// Expression in x (or x1..xn).
    #[arg(long, group = "source")]
    expr: Option<String>,
    /// Hamel JSON document.
    #[arg(long, group = "source")]
    hamel: Option<PathBuf>,
    /// CSV samples with header x1,...,xn,value.
    #[arg(long, group = "source")]
    csv: Option<PathBuf>,
    /// Dimension for --expr (default: highest variable used).
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct DomainArgs {
    /// Interval [A, B]; for Hamel sources A and B are rationals along the first symbol.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true, conflicts_with = "box_bounds")]
    interval: Option<Vec<String>>,
    /// Axis-aligned box lo1 hi1 lo2 hi2 ...
    #[arg(long = "box", num_args = 2.., value_name = "BOUND", allow_negative_numbers = true)]
    box_bounds: Option<Vec<f64>>,
    /// Nodes per axis, either one number or a comma list.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct PolicyArgs {
    #[arg(long, default_value_t = DEFAULT_MAX_DENOMINATOR)]
    max_den: u64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    tau: f64,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    domain: DomainArgs,
    #[command(flatten)]
    policy: PolicyArgs,
    /// `auto`, or `;`-separated points (comma coordinates, or Q-vectors like 1/7*e2).
    #[arg(long, default_value = "auto", allow_hyphen_values = true)]
    probes: String,
}

#[derive(Args, Debug)]
struct ClassifyVecArgs {
    /// Component as expr:<expression> or hamel:<path>; repeat once per component.
    #[arg(long = "component", required = true)]
    components: Vec<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[command(flatten)]
    domain: DomainArgs,
    #[command(flatten)]
    policy: PolicyArgs,
    #[arg(long, default_value = "auto", allow_hyphen_values = true)]
    probes: String,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[arg(long)]
    hamel: PathBuf,
    /// x_min x_max y_min y_max
    #[arg(long, num_args = 4, allow_negative_numbers = true, default_values_t = [0.0, 1.0, -5.0, 5.0])]
    window: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    cells: usize,
    #[arg(long, default_value_t = 50)]
    height: u64,
    /// Where to write representative points as x,y,cell_i,cell_j.
    #[arg(long, default_value = "density.csv")]
    csv_out: PathBuf,
}

#[derive(Args, Debug)]
struct TorusArgs {
    /// Values table with rows x1,...,xn,value (coordinates as p/q).
    #[arg(long, group = "torus_source")]
    values: Option<PathBuf>,
    /// Expression in reduced coordinates on [0,1)^n.
    #[arg(long, group = "torus_source")]
    expr: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// Grid subgroup denominator for the torsion check.
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    grid: Option<String>,
    #[command(flatten)]
    policy: PolicyArgs,
    /// `auto`, or `;`-separated points with comma-separated p/q coordinates.
    #[arg(long, default_value = "auto")]
    probes: String,
}

#[derive(Args, Debug)]
struct AxiomsArgs {
    /// integral, point-eval or zero.
    #[arg(long, default_value = "integral")]
    functional: String,
    #[arg(long, default_value_t = 1024)]
    grid: usize,
}

#[derive(Args, Debug)]
struct ValueArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    domain: DomainArgs,
    /// Shift y for mean-value (comma coordinates or a Q-vector).
    #[arg(long, allow_hyphen_values = true)]
    at: Option<String>,
    /// Rational alpha for exp-integral.
    #[arg(long, default_value = "1")]
    alpha: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => CommandResult {
                    exit_code: if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        EXIT_INPUT
                    } else {
                        EXIT_OK
                    },
                    payload: json!({"command": "help", "version": VERSION, "value": text, "diagnostics": {}}),
                    text: Some(text),
                },
                _ => error_result("parse", &Failure::Input(text)),
            };
        }
    };
    let seed = seed();
    let (name, outcome) = match &cli.command {
        Command::Construct { path, out } => ("construct", cmd_construct(path, out.as_deref(), seed)),
        Command::Classify(a) => ("classify", cmd_classify(a, seed)),
        Command::ClassifyVec(a) => ("classify-vec", cmd_classify_vec(a, seed)),
        Command::Density(a) => ("density", cmd_density(a)),
        Command::TorusCheck(a) => ("torus-check", cmd_torus(a, seed)),
        Command::Axioms(a) => ("axioms", cmd_axioms(a, seed)),
        Command::MeanValue(a) => ("mean-value", cmd_mean_value(a)),
        Command::ExpIntegral(a) => ("exp-integral", cmd_exp_integral(a)),
    };
    match outcome {
        Ok((code, mut payload)) => {
            let obj = payload.as_object_mut().expect("commands return objects");
            obj.insert("command".into(), json!(name));
            obj.insert("version".into(), json!(VERSION));
            let diag = obj.entry("diagnostics").or_insert_with(|| json!({}));
            if let Some(d) = diag.as_object_mut() {
                d.insert("seed".into(), json!(seed));
            }
            CommandResult {
                exit_code: code,
                payload,
                text: None,
            }
        }
        Err(f) => error_result(name, &f),
    }
}

fn error_result(command: &str, f: &Failure) -> CommandResult {
    let (code, kind, msg) = match f {
        Failure::Input(m) => (EXIT_INPUT, "input", m),
        Failure::Internal(m) => (EXIT_INTERNAL, "internal", m),
    };
    CommandResult {
        exit_code: code,
        payload: json!({
            "command": command,
            "version": VERSION,
            "verdict": "error",
            "error": msg,
            "diagnostics": {"kind": kind},
        }),
        text: None,
    }
}

fn seed() -> u64 {
    std::env::var(SEED_VAR)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0)
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn complex(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn load_hamel(path: &Path) -> std::result::Result<HamelFunction, Failure> {
    let doc = HamelDocument::parse(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok(doc.to_function()?)
}

fn cmd_construct(path: &Path, out: Option<&Path>, seed: u64) -> Outcome {
    let doc = HamelDocument::parse(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let f = doc.to_function()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = f.basis.len();
    let pairs: Vec<(QVector, QVector)> = (0..1000)
        .map(|_| (random_qvector(&mut rng, n, 100), random_qvector(&mut rng, n, 100)))
        .collect();
    let report = check_additive(&f.map, &pairs)?;
    if !report.passed() {
        return Err(Failure::Internal(format!(
            "exact additivity self-test failed: {report:?}"
        )));
    }
    let canonical = doc.canonical_json();
    if let Some(out) = out {
        fs::write(out, &canonical).map_err(|e| input(format!("{}: {e}", out.display())))?;
    }
    Ok((
        EXIT_OK,
        json!({
            "verdict": "valid",
            "value": doc.to_value(),
            "canonical": canonical,
            "diagnostics": {
                "symbols": n,
                "independence": format!("{:?}", f.basis.independence()),
                "additivity_self_test": {"pairs": report.pairs_checked, "passed": true},
            },
        }),
    ))
}

fn parse_grid(text: Option<&str>, n: usize) -> std::result::Result<GridSpec, Failure> {
    let Some(text) = text else {
        return Ok(GridSpec::default_for(n));
    };
    let parts = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| input(format!("bad grid {text:?}")))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let res = match parts.len() {
        1 => vec![parts[0]; n],
        k if k == n => parts,
        k => return Err(input(format!("grid has {k} entries for dimension {n}"))),
    };
    Ok(GridSpec::new(res)?)
}

fn parse_rational(s: &str) -> std::result::Result<Rational, Failure> {
    if let Ok(q) = s.parse::<Rational>() {
        return Ok(q);
    }
    s.trim()
        .parse::<f64>()
        .ok()
        .and_then(Rational::from_f64_exact)
        .ok_or_else(|| input(format!("expected a rational, got {s:?}")))
}

fn parse_f64(s: &str) -> std::result::Result<f64, Failure> {
    if let Ok(v) = s.trim().parse::<f64>() {
        return Ok(v);
    }
    Ok(parse_rational(s)?.to_f64())
}

/// `3/2*e1 + e2 + -1/7*e3`
fn parse_qvector(basis: &HamelBasisSpec, s: &str) -> std::result::Result<QVector, Failure> {
    let mut pairs = Vec::new();
    let normalized = s.replace(" - ", " + -");
    for term in normalized.split('+').map(str::trim).filter(|t| !t.is_empty()) {
        let (coef, label) = match term.rsplit_once('*') {
            Some((c, l)) => (parse_rational(c.trim())?, l.trim()),
            None => match term.strip_prefix('-') {
                Some(l) => (Rational::from_integer(-1), l.trim()),
                None => (Rational::one(), term),
            },
        };
        let i = basis
            .index_of(label)
            .ok_or_else(|| input(format!("unknown symbol {label:?} in {s:?}")))?;
        pairs.push((i, coef));
    }
    if pairs.is_empty() && s.trim() != "0" {
        return Err(input(format!("empty Q-vector {s:?}")));
    }
    let mut v = QVector::zero();
    for (i, q) in pairs {
        v = v.add(&QVector::unit(i).scale(&q));
    }
    Ok(v)
}

fn parse_real_point(s: &str, n: usize) -> std::result::Result<Probe, Failure> {
    let coords = s
        .split(',')
        .map(parse_f64)
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if coords.len() != n {
        return Err(input(format!(
            "point {s:?} has {} coordinates, expected {n}",
            coords.len()
        )));
    }
    Ok(Probe::real(coords)?)
}

enum Source {
    Expr(ExprOracle),
    Hamel(HamelFunction),
    Csv(SampledOracle),
}

impl Source {
    fn load(a: &SourceArgs) -> std::result::Result<Source, Failure> {
        match (&a.expr, &a.hamel, &a.csv) {
            (Some(e), None, None) => {
                let parsed = crate::expr::Expr::parse(e)?;
                let n = a.dim.unwrap_or(parsed.arity().max(1));
                Ok(Source::Expr(ExprOracle::new(parsed, n)?))
            }
            (None, Some(p), None) => Ok(Source::Hamel(load_hamel(p)?)),
            (None, None, Some(p)) => {
                let file = fs::File::open(p).map_err(|e| input(format!("{}: {e}", p.display())))?;
                let o = SampledOracle::from_csv(file).map_err(|e| input(format!("{}: {e}", p.display())))?;
                Ok(Source::Csv(o))
            }
            _ => Err(input("exactly one of --expr, --hamel, --csv is required")),
        }
    }

    fn oracle(&self) -> &dyn RealOracle {
        match self {
            Source::Expr(o) => o,
            Source::Hamel(o) => o,
            Source::Csv(o) => o,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Source::Expr(_) => "expr",
            Source::Hamel(_) => "hamel",
            Source::Csv(_) => "csv",
        }
    }
}

fn build_domain(
    d: &DomainArgs,
    n: usize,
    basis: Option<&Arc<HamelBasisSpec>>,
) -> std::result::Result<(Parallelepiped, GridSpec), Failure> {
    let grid = parse_grid(d.grid.as_deref(), n)?;
    let domain = match (basis, &d.interval, &d.box_bounds) {
        (Some(b), iv, None) => {
            let (lo, hi) = match iv {
                Some(v) => (parse_rational(&v[0])?, parse_rational(&v[1])?),
                None => (Rational::zero(), Rational::one()),
            };
            Parallelepiped::exact_interval(b.clone(), 0, &lo, &hi)?
        }
        (Some(_), _, Some(_)) => return Err(input("Hamel sources are one-dimensional; use --interval")),
        (None, Some(v), None) => {
            if n != 1 {
                return Err(input(format!(
                    "--interval needs a 1-dimensional function, got dimension {n}"
                )));
            }
            Parallelepiped::interval(parse_f64(&v[0])?, parse_f64(&v[1])?)?
        }
        (None, None, Some(b)) => {
            if b.len() != 2 * n {
                return Err(input(format!("--box needs {} bounds for dimension {n}", 2 * n)));
            }
            let pairs: Vec<(f64, f64)> = b.chunks(2).map(|c| (c[0], c[1])).collect();
            Parallelepiped::aligned_box(&pairs)?
        }
        (None, None, None) => Parallelepiped::unit_cube(n)?,
        (None, Some(_), Some(_)) => return Err(input("--interval and --box are exclusive")),
    };
    Ok((domain, grid))
}

fn policy(p: &PolicyArgs) -> std::result::Result<AlphaSearchPolicy, Failure> {
    Ok(AlphaSearchPolicy::new(p.max_den, p.tau)?)
}

/// Each symbol, each symbol divided by 7, then eight random vectors of height at most 100.
fn auto_hamel_probes(f: &HamelFunction, seed: u64) -> Vec<Probe> {
    let n = f.basis.len();
    let seventh = Rational::new(1, 7).expect("7 > 0");
    let mut out: Vec<Probe> = (0..n).map(|i| f.point(QVector::unit(i))).collect();
    out.extend((0..n).map(|i| f.point(QVector::unit(i).scale(&seventh))));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    out.extend((0..8).map(|_| f.point(random_qvector(&mut rng, n, 100))));
    out
}

/// The generators, the generators divided by 7, then sixteen random points of `[−2, 2]ⁿ`.
fn auto_real_probes(domain: &Parallelepiped, seed: u64) -> Vec<Probe> {
    let seventh = Rational::new(1, 7).expect("7 > 0");
    let gens = domain.generator_probes();
    let mut out = gens.clone();
    out.extend(gens.iter().map(|g| g.scale(&seventh)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = domain.dim();
    for _ in 0..16 {
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect();
        out.push(Probe::Real(Point::new(c).expect("finite")));
    }
    out
}

fn probes_for(
    source: &Source,
    spec: &str,
    domain: &Parallelepiped,
    grid: &GridSpec,
    seed: u64,
) -> std::result::Result<Vec<Probe>, Failure> {
    let n = source.oracle().dim();
    if spec.trim() == "auto" {
        return match source {
            Source::Hamel(f) => Ok(auto_hamel_probes(f, seed)),
            Source::Expr(_) => Ok(auto_real_probes(domain, seed)),
            Source::Csv(o) => {
                let extra = o.off_grid_points(domain, grid)?;
                if extra.is_empty() {
                    return Err(input("CSV has no off-grid rows to use as probes; pass --probes"));
                }
                Ok(extra)
            }
        };
    }
    spec.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match source {
            Source::Hamel(f) => Ok(f.point(parse_qvector(&f.basis, s)?)),
            _ => parse_real_point(s, n),
        })
        .collect()
}

fn witness_json(w: &Witness) -> Value {
    json!({
        "point": w.point.describe(),
        "coords": w.point.coords(),
        "alpha": w.alpha.to_string(),
        "phase": complex(w.phase),
        "phase_defect": (w.phase - 1.0).norm(),
        "residual": w.residual,
        "source": match w.source {
            WitnessSource::PhaseTest => "phase-test",
            WitnessSource::LatticeRefutation => "lattice-refutation",
        },
    })
}

fn refutation_json(r: &Refutation) -> Value {
    let outcome = match r {
        Refutation::Refuted { .. } => "refuted",
        Refutation::NotAdditiveAtProbe { .. } => "not-additive-at-probe",
        Refutation::Inconclusive { .. } => "inconclusive",
    };
    json!({"outcome": outcome, "probe": r.probe().describe(), "phase": complex(r.phase())})
}

fn diagnostics_json(d: &Diagnostics) -> Value {
    json!({
        "c": d.coefficient,
        "alpha": d.alpha.as_ref().map(|h| json!({"alpha": h.alpha.to_string(), "value": complex(h.value)})),
        "phases": d.phases.as_ref().map(|p| p.entries.iter().map(|e| json!({
            "point": e.point.describe(),
            "residual": e.value,
            "phase": complex(e.phase),
            "defect": e.defect(),
        })).collect::<Vec<_>>()),
        "refutations": d.refutations.iter().map(refutation_json).collect::<Vec<_>>(),
        "additivity_spot_check": d.additivity.as_ref().map(|s| json!({
            "pairs": s.pairs, "max_defect": s.max_defect, "passed": s.passed,
        })),
        "notes": d.notes,
    })
}

fn classification_json(c: &Classification) -> (i32, Value) {
    let diag = diagnostics_json(&c.diagnostics);
    match &c.verdict {
        LinearityVerdict::Linear { c } => (EXIT_OK, json!({"verdict": "linear", "c": c, "diagnostics": diag})),
        LinearityVerdict::NonlinearWitness(w) => (
            EXIT_NEGATIVE,
            json!({"verdict": "nonlinear", "witness": witness_json(w), "diagnostics": diag}),
        ),
        LinearityVerdict::Inconclusive { reason, diagnostics } => (
            EXIT_NEGATIVE,
            json!({"verdict": "inconclusive", "reason": reason, "details": diagnostics, "diagnostics": diag}),
        ),
    }
}

fn cmd_classify(a: &ClassifyArgs, seed: u64) -> Outcome {
    let source = Source::load(&a.source)?;
    let f = source.oracle();
    let basis = match &source {
        Source::Hamel(h) => Some(&h.basis),
        _ => None,
    };
    let (domain, grid) = build_domain(&a.domain, f.dim(), basis)?;
    if let Source::Csv(o) = &source {
        o.validate_grid(&domain, &grid)?;
    }
    let policy = policy(&a.policy)?;
    let probes = probes_for(&source, &a.probes, &domain, &grid, seed)?;
    let result = classify(f, &domain, &grid, &policy, &probes);
    let (code, mut payload) = classification_json(&result);
    let d = payload["diagnostics"].as_object_mut().expect("object");
    d.insert("source".into(), json!(source.kind()));
    d.insert("grid".into(), json!(grid.resolution()));
    d.insert("volume".into(), json!(domain.volume()));
    d.insert("probes".into(), json!(probes.len()));
    Ok((code, payload))
}

fn cmd_classify_vec(a: &ClassifyVecArgs, seed: u64) -> Outcome {
    let mut sources = Vec::new();
    for c in &a.components {
        let args = if let Some(e) = c.strip_prefix("expr:") {
            SourceArgs {
                expr: Some(e.to_string()),
                hamel: None,
                csv: None,
                dim: a.dim,
            }
        } else if let Some(p) = c.strip_prefix("hamel:") {
            SourceArgs {
                expr: None,
                hamel: Some(PathBuf::from(p)),
                csv: None,
                dim: None,
            }
        } else {
            return Err(input(format!("component {c:?} must start with expr: or hamel:")));
        };
        sources.push(Source::load(&args)?);
    }
    // Expressions default to the largest arity among the components.
    let n = a
        .dim
        .unwrap_or_else(|| sources.iter().map(|s| s.oracle().dim()).max().unwrap_or(1));
    for s in sources.iter_mut() {
        if let Source::Expr(e) = s {
            if e.dim() != n {
                *e = ExprOracle::new(e.expr().clone(), n)?;
            }
        }
    }
    let hamel = sources.iter().find_map(|s| match s {
        Source::Hamel(h) => Some(h.basis.clone()),
        _ => None,
    });
    let (domain, grid) = build_domain(&a.domain, n, hamel.as_ref())?;
    let policy = policy(&a.policy)?;
    let first_hamel = sources.iter().position(|s| matches!(s, Source::Hamel(_)));
    let probe_source = &sources[first_hamel.unwrap_or(0)];
    let probes = probes_for(probe_source, &a.probes, &domain, &grid, seed)?;
    let oracles: Vec<&dyn RealOracle> = sources.iter().map(Source::oracle).collect();
    let (verdict, parts) = classify_vector_valued(&oracles, &domain, &grid, &policy, &probes);
    let components: Vec<Value> = parts.iter().map(|c| classification_json(c).1).collect();
    let diag = json!({"components": components, "grid": grid.resolution(), "probes": probes.len()});
    Ok(match verdict {
        VectorVerdict::Linear { matrix } => (
            EXIT_OK,
            json!({"verdict": "linear", "matrix": matrix, "diagnostics": diag}),
        ),
        VectorVerdict::Nonlinear { component, witness } => (
            EXIT_NEGATIVE,
            json!({"verdict": "nonlinear", "component": component, "witness": witness_json(&witness), "diagnostics": diag}),
        ),
        VectorVerdict::Inconclusive { component, reason } => (
            EXIT_NEGATIVE,
            json!({"verdict": "inconclusive", "component": component, "reason": reason, "diagnostics": diag}),
        ),
    })
}

fn write_density_csv(path: &Path, r: &DensityReport) -> std::result::Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| input(format!("{}: {e}", path.display()));
    w.write_record(["x", "y", "cell_i", "cell_j"]).map_err(io)?;
    for c in &r.covered {
        w.write_record([
            c.x.to_string(),
            c.y.to_string(),
            c.cell_i.to_string(),
            c.cell_j.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn cmd_density(a: &DensityArgs) -> Outcome {
    let f = load_hamel(&a.hamel)?;
    let w = &a.window;
    let window = Window::new(w[0], w[1], w[2], w[3])?;
    let report = density_witness(&f.map, &f.basis, &window, a.cells, a.height)?;
    write_density_csv(&a.csv_out, &report)?;
    let reps: Vec<Value> = report
        .covered
        .iter()
        .map(|c| json!({"cell_i": c.cell_i, "cell_j": c.cell_j, "x": c.x, "y": c.y, "vector": f.basis.format(&c.vector)}))
        .collect();
    Ok((
        EXIT_OK,
        json!({
            "value": report.coverage,
            "covered": report.covered.len(),
            "cells": report.cells * report.cells,
            "representatives": reps,
            "diagnostics": {
                "height": report.height,
                "window": w,
                "points_examined": report.points_examined,
                "period_symbol": report.period_symbol.map(|i| f.basis.symbols()[i].label.clone()),
                "csv": a.csv_out.display().to_string(),
            },
        }),
    ))
}

fn parse_torus_point(s: &str, n: usize) -> std::result::Result<TorusPoint, Failure> {
    let coords = s
        .split(',')
        .map(parse_rational)
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if coords.len() != n {
        return Err(input(format!(
            "torus point {s:?} has {} coordinates, expected {n}",
            coords.len()
        )));
    }
    Ok(TorusPoint::new(coords))
}

/// Points `e_k/2`, `e_k/3`, `e_k/7` on every axis, the diagonal `(1/2, …)`,
/// then eight random points with denominators up to 12.
fn auto_torus_probes(n: usize, seed: u64) -> Vec<TorusPoint> {
    let mut out = Vec::new();
    for k in 0..n {
        for d in [2, 3, 7] {
            let mut c = vec![Rational::zero(); n];
            c[k] = Rational::new(1, d).expect("d > 0");
            out.push(TorusPoint::new(c));
        }
    }
    out.push(TorusPoint::new(vec![Rational::new(1, 2).expect("2 > 0"); n]));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..8 {
        let c = (0..n)
            .map(|_| {
                let q = rng.random_range(1..=12i64);
                Rational::new(rng.random_range(0..q), q).expect("q > 0")
            })
            .collect();
        out.push(TorusPoint::new(c));
    }
    out
}

fn torsion_json(v: &TorsionVerdict) -> Value {
    match v {
        TorsionVerdict::Zero => json!({"verdict": "zero"}),
        TorsionVerdict::AdditivityViolation { x, y, defect } => json!({
            "verdict": v.label(), "x": x.to_string(), "y": y.to_string(), "defect": defect,
        }),
        TorsionVerdict::NonzeroValue { x, value } => json!({"verdict": v.label(), "x": x.to_string(), "value": value}),
    }
}

fn cmd_torus(a: &TorusArgs, seed: u64) -> Outcome {
    match (&a.values, &a.expr) {
        (Some(path), None) => {
            let q = a.q.ok_or_else(|| input("--values needs --q"))?;
            let file = fs::File::open(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
            let table = ValuesTable::from_csv(file).map_err(|e| input(format!("{}: {e}", path.display())))?;
            let v = torsion_vanishing(&table, q)?;
            let code = if v == TorsionVerdict::Zero {
                EXIT_OK
            } else {
                EXIT_NEGATIVE
            };
            let mut payload = torsion_json(&v);
            payload["diagnostics"] = json!({"q": q, "dim": table.dim(), "points": table.len()});
            Ok((code, payload))
        }
        (None, Some(e)) => {
            let parsed = crate::expr::Expr::parse(e)?;
            let n = a.dim.unwrap_or(parsed.arity().max(1));
            let f = ExprOracle::new(parsed, n)?.on_torus();
            let grid = parse_grid(a.grid.as_deref(), n)?;
            let probes = if a.probes.trim() == "auto" {
                auto_torus_probes(n, seed)
            } else {
                a.probes
                    .split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_torus_point(s, n))
                    .collect::<std::result::Result<Vec<_>, _>>()?
            };
            let r = torus_classify(&f, &grid, &policy(&a.policy)?, &probes)?;
            let torsion = match a.q {
                Some(q) => {
                    let group = GridSubgroup::new(n, q)?;
                    let table = ValuesTable::from_fn(&group, |x| f.eval(&Probe::torus(x.clone())).unwrap_or(f64::NAN));
                    Some(torsion_vanishing(&table, q)?)
                }
                None => None,
            };
            let zero = r.verdict == TorusVerdict::Zero && torsion.as_ref().is_none_or(|t| *t == TorsionVerdict::Zero);
            let mut payload = match &r.verdict {
                TorusVerdict::Zero => json!({"verdict": "zero"}),
                TorusVerdict::Witness(w) => json!({
                    "verdict": "witness",
                    "witness": {
                        "point": w.point.describe(),
                        "alpha": w.alpha.to_string(),
                        "value": w.value,
                        "phase": complex(w.phase),
                        "kind": match w.kind {
                            TorusWitnessKind::PhaseTest => "phase-test",
                            TorusWitnessKind::LatticeRefuted => "lattice-refutation",
                            TorusWitnessKind::NotHomogeneous => "not-homogeneous",
                            TorusWitnessKind::NonzeroLatticeValue => "nonzero-lattice-value",
                        },
                    },
                }),
                TorusVerdict::Inconclusive { reason } => json!({"verdict": "inconclusive", "reason": reason}),
            };
            if !zero && r.verdict == TorusVerdict::Zero {
                payload["verdict"] = json!("witness");
            }
            let mut diag = diagnostics_json(&r.pipeline.diagnostics);
            diag["torsion"] = torsion.as_ref().map(torsion_json).unwrap_or(Value::Null);
            diag["grid"] = json!(grid.resolution());
            payload["diagnostics"] = diag;
            Ok((if zero { EXIT_OK } else { EXIT_NEGATIVE }, payload))
        }
        _ => Err(input("exactly one of --values, --expr is required")),
    }
}

fn axioms_json(r: &AxiomReport) -> Value {
    let entries: Vec<Value> = r
        .entries
        .iter()
        .map(|e| {
            json!({
                "axiom": e.axiom.to_string(),
                "status": if e.passed { "pass" } else { "fail" },
                "checks": e.checks,
                "witness": e.witness.as_ref().map(|w| json!({
                    "member": w.member,
                    "input": w.input,
                    "values": w.values.iter().map(|(k, v)| json!({"name": k, "value": complex(*v)})).collect::<Vec<_>>(),
                })),
            })
        })
        .collect();
    json!(entries)
}

fn cmd_axioms(a: &AxiomsArgs, seed: u64) -> Outcome {
    let (_, frame) = default_frame();
    let grid = GridSpec::new(vec![a.grid])?;
    let functional = builtin_functional(&a.functional, &frame, &grid)?;
    let family = TestFamily::default_family(seed);
    let report = check_axioms(&functional, &family)?;
    let passed = report.all_passed();
    Ok((
        if passed { EXIT_OK } else { EXIT_NEGATIVE },
        json!({
            "verdict": if passed { "pass" } else { "fail" },
            "functional": report.functional,
            "axioms": axioms_json(&report),
            "diagnostics": {
                "failed": report.failed().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                "family_size": family.members.len(),
                "grid": a.grid,
            },
        }),
    ))
}

fn value_setup(a: &ValueArgs) -> std::result::Result<(Source, Parallelepiped, GridSpec), Failure> {
    let source = Source::load(&a.source)?;
    let basis = match &source {
        Source::Hamel(h) => Some(h.basis.clone()),
        _ => None,
    };
    let (domain, grid) = build_domain(&a.domain, source.oracle().dim(), basis.as_ref())?;
    if let Source::Csv(o) = &source {
        o.validate_grid(&domain, &grid)?;
    }
    Ok((source, domain, grid))
}

fn cmd_mean_value(a: &ValueArgs) -> Outcome {
    let (source, domain, grid) = value_setup(a)?;
    let at = a.at.as_deref().ok_or_else(|| input("mean-value needs --at"))?;
    let y = match &source {
        Source::Hamel(f) => f.point(parse_qvector(&f.basis, at)?),
        _ => parse_real_point(at, source.oracle().dim())?,
    };
    let v = mean_value_estimate(source.oracle(), &domain, &y, &grid)?;
    Ok((
        EXIT_OK,
        json!({"value": v, "diagnostics": {"at": y.describe(), "grid": grid.resolution(), "volume": domain.volume()}}),
    ))
}

fn cmd_exp_integral(a: &ValueArgs) -> Outcome {
    let (source, domain, grid) = value_setup(a)?;
    let alpha = parse_rational(&a.alpha)?;
    let v = exp_integral(source.oracle(), &domain, &alpha, &grid)?;
    Ok((
        EXIT_OK,
        json!({
            "value": complex(v),
            "diagnostics": {"alpha": alpha.to_string(), "abs": v.norm(), "grid": grid.resolution(), "volume": domain.volume()},
        }),
    ))
}
