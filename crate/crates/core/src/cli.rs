//! Command-line front end: argument parsing, the subcommands, and the
//! `verify` suites.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::analysis::{
    a_sequence_oracle, addition_law_check, bivector_congruence_check, decomposition_precision, eval_psi, find_zeros,
    psi_digit, psi_value, random_padic_rational, random_zq, required_input_precision, schnirelmann_factor,
    schnirelmann_partial_check, truncation_bound, uniform_continuity_report, witt_bivector_decompose,
};
use crate::fixtures::{check_appendix, Appendix, Check};
use crate::padic::{digit_expansion, int_valuation, is_prime, parse_padic, FieldContext, PadicScalar, Valuation};
use crate::polygon::{
    compare_newton, compare_valuation, dual_polygon, newton_polygon, q_int, trusted_index, valuation_polygon,
    zero_counts, Polygon,
};
use crate::psi::{check_candilera, functional_residual, solve_psi, solve_u, PsiMeta, PsiTable, Residual};
use crate::witt::{
    ghost_transform, isobaric_check, phi_polynomials, shift_congruence_check, witt_add, GhostDirection, WittRing,
    WittVector,
};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "PSIQ_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "psiq", version, about = "Exact computations with the p-adic entire function Psi_q")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArgs {
    /// Residue characteristic.
    #[arg(long, default_value_t = 2, global = true)]
    pub p: u64,
    /// Residue degree; q = p^f.
    #[arg(long, default_value_t = 1, global = true)]
    pub f: u32,
    /// Monic modulus for Z_q, coefficients from degree 0 up to the leading 1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, global = true)]
    pub modulus: Option<Vec<i64>>,
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Output file; defaults to stdout, or to $PSIQ_OUTPUT_DIR/<command>.<ext>.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Largest accepted q.
    #[arg(long, default_value_t = 16, global = true)]
    pub max_q: u64,
    /// Directory with replacement golden tables.
    #[arg(long, global = true)]
    pub fixtures: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolygonArg {
    Newton,
    Valuation,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Functional,
    Candilera,
    Polygon,
    Digits,
    Addition,
    Uniform,
    Witt,
    Zeros,
    Appendix,
    All,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Exact coefficients b_1..b_N with their p-adic valuations.
    Coeffs {
        #[arg(long, default_value_t = 16)]
        degree: usize,
    },
    /// Newton or valuation polygon of the truncated series.
    Polygon {
        #[arg(long, default_value_t = 32)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = PolygonArg::Newton)]
        kind: PolygonArg,
        /// Also print the closed form and a match verdict.
        #[arg(long)]
        emit_closed_form: bool,
    },
    /// Zeros of valuation -n.
    Zeros {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        target: i64,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Digits Psi(p^-i a) mod p of a value.
    Decompose {
        #[arg(long, allow_hyphen_values = true)]
        value: String,
        #[arg(long, default_value_t = 8)]
        digits: usize,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Psi(x) modulo p^target.
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value_t = 10)]
        target: i64,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Run property suites; exit status 0 iff every check passes.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Samples per randomized check.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Psi(#[from] crate::error::PsiError),
    #[error(transparent)]
    Padic(#[from] crate::error::PadicError),
    #[error(transparent)]
    Polygon(#[from] crate::error::PolygonError),
    #[error(transparent)]
    Analysis(#[from] crate::error::AnalysisError),
    #[error(transparent)]
    Witt(#[from] crate::error::WittError),
    #[error(transparent)]
    Fixture(#[from] crate::fixtures::FixtureError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, CliError>;

/// Validated run parameters.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub p: u64,
    pub f: u32,
    pub q: u64,
    pub modulus: Option<Vec<i64>>,
    pub seed: u64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub fixtures: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(a: &ConfigArgs) -> Result<Self> {
        if !is_prime(a.p) {
            return Err(CliError::Config(format!("p = {} is not prime", a.p)));
        }
        if a.f == 0 {
            return Err(CliError::Config("f must be at least 1".into()));
        }
        let q =
            a.p.checked_pow(a.f)
                .filter(|q| *q <= a.max_q)
                .ok_or_else(|| CliError::Config(format!("q = {}^{} exceeds the limit {}", a.p, a.f, a.max_q)))?;
        if let Some(m) = &a.modulus {
            if m.len() != a.f as usize + 1 {
                return Err(CliError::Config(format!("modulus needs {} coefficients", a.f + 1)));
            }
            FieldContext::with_modulus(a.p, m).map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(RunConfig {
            p: a.p,
            f: a.f,
            q,
            modulus: a.modulus.clone(),
            seed: a.seed,
            format: a.format,
            output: a.output.clone(),
            fixtures: a.fixtures.clone(),
        })
    }

    pub fn context(&self) -> Result<Arc<FieldContext>> {
        Ok(match &self.modulus {
            Some(m) => FieldContext::with_modulus(self.p, m)?,
            None => FieldContext::new(self.p, self.f)?,
        })
    }

    fn meta(&self) -> Result<PsiMeta> {
        Ok(PsiMeta::new(self.p, self.f)?)
    }

    fn appendix(&self) -> Result<Appendix> {
        Ok(match &self.fixtures {
            Some(dir) => Appendix::load_dir(dir)?,
            None => Appendix::bundled(),
        })
    }

    /// Series degree used when the command leaves it open.
    fn default_degree(&self) -> usize {
        match self.q {
            3 => 81,
            5 => 50,
            q if q > 5 => 48,
            _ => 64,
        }
    }

    fn destination(&self, command: &str) -> Option<PathBuf> {
        self.output.clone().or_else(|| {
            std::env::var_os(OUTPUT_DIR_ENV)
                .map(|d| PathBuf::from(d).join(format!("{command}.{}", self.format.extension())))
        })
    }
}

/// Rendered command output and whether every check passed.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub body: String,
    pub ok: bool,
    pub destination: Option<PathBuf>,
}

fn json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn padic_json(x: &PadicScalar) -> Value {
    json!({
        "valuation": x.valuation(),
        "absolute_precision": x.abs_precision(),
        "unit": x.unit().map(|u| u.iter().map(|c| c.to_string()).collect::<Vec<_>>()),
        "display": x.to_string(),
    })
}

/// Parses arguments and runs the command. Writes the output when a
/// destination is configured, otherwise leaves printing to the caller.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let config = RunConfig::from_args(&cli.config)?;
    let (name, body, ok) = match &cli.command {
        Command::Coeffs { degree } => ("coeffs", cmd_coeffs(&config, *degree)?, true),
        Command::Polygon { degree, kind, emit_closed_form } => {
            let (body, ok) = cmd_polygon(&config, *degree, *kind, *emit_closed_form)?;
            ("polygon", body, ok)
        }
        Command::Zeros { n, target, degree } => ("zeros", cmd_zeros(&config, *n, *target, *degree)?, true),
        Command::Decompose { value, digits, degree } => {
            ("decompose", cmd_decompose(&config, value, *digits, *degree)?, true)
        }
        Command::Eval { x, target, degree } => ("eval", cmd_eval(&config, x, *target, *degree)?, true),
        Command::Verify { suite, samples } => {
            let checks = run_suite(&config, *suite, *samples)?;
            let ok = checks.iter().all(|c| c.passed);
            ("verify", render_checks(&config, &checks), ok)
        }
    };
    let destination = config.destination(name);
    if let Some(path) = &destination {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        std::fs::write(path, &body)?;
    }
    Ok(Outcome { body, ok, destination })
}

pub fn cmd_coeffs(config: &RunConfig, degree: usize) -> Result<String> {
    if degree == 0 {
        return Err(CliError::Config("degree must be at least 1".into()));
    }
    let psi = solve_psi(config.p, config.f, degree)?;
    let p = config.p;
    let rows: Vec<(usize, BigInt, Option<u32>, BigInt)> = (1..=degree)
        .map(|n| {
            let b = psi.coeff(n).clone();
            if b.is_zero() {
                (n, b, None, BigInt::zero())
            } else {
                let v = int_valuation(&b, p);
                let cof = &b / num_traits::pow(BigInt::from(p), v as usize);
                (n, b, Some(v), cof)
            }
        })
        .collect();
    Ok(match config.format {
        Format::Json => json_string(&json!({
            "p": config.p,
            "f": config.f,
            "degree": degree,
            "coefficients": rows.iter().map(|(n, b, v, c)| json!({
                "n": n,
                "b_n": b.to_string(),
                "valuation": v,
                "cofactor": c.to_string(),
            })).collect::<Vec<_>>(),
        })),
        Format::Csv => csv_string(
            &["n", "b_n", "v", "cofactor"],
            &rows
                .iter()
                .map(|(n, b, v, c)| {
                    vec![n.to_string(), b.to_string(), v.map_or(String::new(), |v| v.to_string()), c.to_string()]
                })
                .collect::<Vec<_>>(),
        ),
        Format::Text => {
            let mut s = String::new();
            for (n, b, v, c) in &rows {
                match v {
                    Some(v) => {
                        let sign = if c.is_negative() { "-" } else { "" };
                        writeln!(s, "{n} {b} {v} {sign}{p}^{v}*{}", c.abs()).unwrap()
                    }
                    None => writeln!(s, "{n} 0 - 0").unwrap(),
                }
            }
            s
        }
    })
}

fn polygon_for(psi: &PsiTable, kind: PolygonArg) -> Result<Polygon> {
    let vals = psi.valuations();
    Ok(match kind {
        PolygonArg::Newton => newton_polygon(&vals)?,
        PolygonArg::Valuation => valuation_polygon(&vals)?,
    })
}

pub fn cmd_polygon(config: &RunConfig, degree: usize, kind: PolygonArg, closed: bool) -> Result<(String, bool)> {
    if degree == 0 {
        return Err(CliError::Config("degree must be at least 1".into()));
    }
    let psi = solve_psi(config.p, config.f, degree)?;
    let poly = polygon_for(&psi, kind)?;
    let cmp = match kind {
        PolygonArg::Newton => compare_newton(&poly, config.q, degree),
        PolygonArg::Valuation => compare_valuation(&poly, config.q, degree),
    };
    let verdict = if cmp.matches() { "match" } else { "mismatch" };
    let ok = !closed || cmp.matches();
    let expected = Polygon { kind: poly.kind, vertices: cmp.expected.clone(), sides: Vec::new() };
    let body = match config.format {
        Format::Json => {
            let mut v = json!({
                "p": config.p,
                "f": config.f,
                "degree": degree,
                "polygon": poly.to_json(),
            });
            if closed {
                v["closed_form"] = expected.to_json();
                v["trusted_vertices"] = json!(cmp.trusted.iter().map(|p| p.to_string()).collect::<Vec<_>>());
                v["verdict"] = json!(verdict);
            }
            json_string(&v)
        }
        Format::Csv => {
            if closed {
                let mut rows: Vec<Vec<String>> = Vec::new();
                for (src, pts) in [("computed", &poly.vertices), ("closed_form", &expected.vertices)] {
                    for v in pts {
                        rows.push(vec![
                            src.into(),
                            crate::polygon::q_to_string(&v.x),
                            crate::polygon::q_to_string(&v.y),
                        ]);
                    }
                }
                csv_string(&["source", "x", "y"], &rows)
            } else {
                poly.to_csv()
            }
        }
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "{} polygon, degree {degree}", poly.kind.name()).unwrap();
            for v in &poly.vertices {
                writeln!(s, "{v}").unwrap();
            }
            if closed {
                let list: Vec<String> = expected.vertices.iter().map(|v| v.to_string()).collect();
                writeln!(s, "closed form: {}", list.join(" ")).unwrap();
                writeln!(s, "verdict: {verdict}").unwrap();
            }
            s
        }
    };
    Ok((body, ok))
}

/// Smallest degree with which [`find_zeros`] can certify valuation `target`.
fn zeros_degree(meta: PsiMeta, n: usize, target: i64) -> usize {
    truncation_bound(meta, n as i64, target + 4) + 1
}

pub fn cmd_zeros(config: &RunConfig, n: usize, target: i64, degree: Option<usize>) -> Result<String> {
    if n == 0 {
        return Err(CliError::Config("n must be at least 1".into()));
    }
    let degree = degree.unwrap_or_else(|| zeros_degree(PsiMeta { p: config.p, f: config.f, q: config.q }, n, target));
    let psi = solve_psi(config.p, config.f, degree)?;
    let zeros = find_zeros(&psi, n, target)?;
    let digit_count = (target + n as i64).max(1) as usize;
    Ok(match config.format {
        Format::Json => {
            let records = zeros.iter().map(|z| z.to_json(digit_count)).collect::<std::result::Result<Vec<_>, _>>()?;
            json_string(&json!({
                "p": config.p, "f": config.f, "n": n, "target": target,
                "count": zeros.len(), "zeros": records,
            }))
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for z in &zeros {
                let d = z.zero_digits(digit_count)?;
                rows.push(vec![
                    z.residue_class.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" "),
                    z.zero.valuation().map_or(String::new(), |v| v.to_string()),
                    d.digits.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" "),
                    z.residual_valuation.to_string(),
                    z.derivative_valuation.to_string(),
                ]);
            }
            csv_string(&["residue_class", "valuation", "digits", "residual_valuation", "derivative_valuation"], &rows)
        }
        Format::Text => {
            let mut s = format!("{} zeros of valuation -{n}\n", zeros.len());
            for z in &zeros {
                let d = z.zero_digits(digit_count)?;
                let digits: Vec<String> = d.digits.iter().map(|r| r.to_string()).collect();
                writeln!(
                    s,
                    "class [{}] digits from p^{}: {} residual {} derivative {}",
                    z.residue_class.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","),
                    d.start,
                    digits.join(" "),
                    z.residual_valuation,
                    z.derivative_valuation
                )
                .unwrap();
            }
            s
        }
    })
}

pub fn cmd_decompose(config: &RunConfig, value: &str, count: usize, degree: Option<usize>) -> Result<String> {
    let ctx = config.context()?;
    let psi = solve_psi(config.p, config.f, degree.unwrap_or_else(|| config.default_degree()))?;
    let a = parse_padic(&ctx, value, decomposition_precision(&psi, count))?;
    let d = witt_bivector_decompose(&psi, &a, count)?;
    Ok(match config.format {
        Format::Json => json_string(&json!({
            "p": config.p, "f": config.f, "value": value,
            "start": d.start,
            "digits": d.digits,
        })),
        Format::Csv => csv_string(
            &["i", "digit"],
            &d.digits
                .iter()
                .enumerate()
                .map(|(k, r)| vec![(d.start + k as i64).to_string(), r.to_string()])
                .collect::<Vec<_>>(),
        ),
        Format::Text => {
            let mut s = String::new();
            for (k, r) in d.digits.iter().enumerate() {
                writeln!(s, "a_{} = {r}", d.start + k as i64).unwrap();
            }
            s
        }
    })
}

pub fn cmd_eval(config: &RunConfig, x: &str, target: i64, degree: Option<usize>) -> Result<String> {
    let ctx = config.context()?;
    let psi = solve_psi(config.p, config.f, degree.unwrap_or_else(|| config.default_degree()))?;
    let probe = parse_padic(&ctx, x, 8)?;
    let v = probe.valuation().unwrap_or(0);
    let prec = required_input_precision(&psi, v, target) + 8;
    let xv = parse_padic(&ctx, x, prec)?;
    let y = psi_value(&psi, &xv, target)?;
    Ok(match config.format {
        Format::Json => json_string(&json!({
            "p": config.p, "f": config.f, "x": x, "target": target,
            "value": padic_json(&y),
        })),
        Format::Csv => csv_string(&["x", "target", "value"], &[vec![x.to_string(), target.to_string(), y.to_string()]]),
        Format::Text => format!("{y}\n"),
    })
}

fn render_checks(config: &RunConfig, checks: &[Check]) -> String {
    let ok = checks.iter().all(|c| c.passed);
    match config.format {
        Format::Json => json_string(&json!({
            "p": config.p, "f": config.f, "seed": config.seed,
            "passed": ok, "checks": checks,
        })),
        Format::Csv => csv_string(
            &["check", "passed", "detail"],
            &checks.iter().map(|c| vec![c.name.clone(), c.passed.to_string(), c.detail.clone()]).collect::<Vec<_>>(),
        ),
        Format::Text => {
            let mut s = String::new();
            for c in checks {
                writeln!(s, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail).unwrap();
            }
            writeln!(s, "{}", if ok { "pass" } else { "fail" }).unwrap();
            s
        }
    }
}

/// Runs one suite (or all of them) and collects the checks.
pub fn run_suite(config: &RunConfig, suite: Suite, samples: usize) -> Result<Vec<Check>> {
    let suites = match suite {
        Suite::All => vec![
            Suite::Appendix,
            Suite::Functional,
            Suite::Candilera,
            Suite::Polygon,
            Suite::Witt,
            Suite::Digits,
            Suite::Addition,
            Suite::Uniform,
            Suite::Zeros,
        ],
        s => vec![s],
    };
    let mut out = Vec::new();
    let mut cached: Option<PsiTable> = None;
    for s in suites {
        let psi = || -> Result<PsiTable> { Ok(solve_psi(config.p, config.f, config.default_degree())?) };
        let needs_psi = !matches!(s, Suite::Appendix | Suite::Witt);
        if needs_psi && cached.is_none() {
            cached = Some(psi()?);
        }
        let table = cached.as_ref();
        let checks = match s {
            Suite::Appendix => {
                let c = check_appendix(&config.appendix()?, config.p);
                if c.is_empty() {
                    vec![Check::new("appendix", true, format!("no tables for p = {}", config.p))]
                } else {
                    c
                }
            }
            Suite::Functional => suite_functional(table.unwrap()),
            Suite::Candilera => suite_candilera(table.unwrap())?,
            Suite::Polygon => suite_polygon(table.unwrap())?,
            Suite::Witt => suite_witt(config, samples)?,
            Suite::Digits => suite_digits(config, table.unwrap(), samples, 8)?,
            Suite::Addition => suite_addition(config, table.unwrap(), samples)?,
            Suite::Uniform => suite_uniform(config, table.unwrap(), samples)?,
            Suite::Zeros => suite_zeros(config)?,
            Suite::All => unreachable!(),
        };
        out.extend(checks);
    }
    Ok(out)
}

pub fn suite_functional(psi: &PsiTable) -> Vec<Check> {
    let r = functional_residual(psi);
    vec![Check::new("functional equation", r == Residual::Clean, format!("N = {}: {r:?}", psi.trunc_degree()))]
}

pub fn suite_candilera(psi: &PsiTable) -> Result<Vec<Check>> {
    let u = solve_u(psi.p(), psi.meta.f, psi.trunc_degree())?;
    let ok = check_candilera(psi, &u)?;
    Ok(vec![Check::new("Candilera equation", ok, format!("N = {}", psi.trunc_degree()))])
}

pub fn suite_polygon(psi: &PsiTable) -> Result<Vec<Check>> {
    let q = psi.q();
    let n = psi.trunc_degree();
    let vals = psi.valuations();
    let nw = newton_polygon(&vals)?;
    let val = valuation_polygon(&vals)?;
    let cn = compare_newton(&nw, q, n);
    let cv = compare_valuation(&val, q, n);
    let dual_ok = dual_polygon(&nw.negate()) == val;
    let i_max = trusted_index(q, n);
    let counts = zero_counts(&nw)?;
    let mut count_ok = true;
    let mut detail = String::new();
    for k in 1..=i_max {
        let slope = q_int(-(k as i64));
        let expected = q_int((q.pow(k) - q.pow(k - 1)) as i64);
        let got = counts.iter().find(|(s, _)| *s == slope).map(|(_, l)| l.clone());
        if got.as_ref() != Some(&expected) {
            count_ok = false;
            write!(detail, "slope -{k}: expected {expected}, found {got:?}; ").unwrap();
        }
    }
    Ok(vec![
        Check::new("Newton polygon closed form", cn.matches(), format!("{} trusted vertices", cn.trusted.len())),
        Check::new("valuation polygon closed form", cv.matches(), format!("{} trusted vertices", cv.trusted.len())),
        Check::new("polar duality", dual_ok, "dual of the negated Newton polygon"),
        Check::new("zero counts", count_ok, if count_ok { format!("slopes -1..-{i_max}") } else { detail }),
    ])
}

fn random_witt(rng: &mut ChaCha8Rng, ring: &WittRing, len: usize) -> WittVector {
    let comps = (0..len)
        .map(|_| match ring {
            WittRing::FiniteField(ctx) => {
                let c: Vec<i64> = (0..ctx.f()).map(|_| rng.gen_range(0..ctx.p() as i64)).collect();
                ring.fq(&c).expect("field element")
            }
            _ => ring.from_int(&BigInt::from(rng.gen_range(-1000i64..1000))),
        })
        .collect();
    WittVector::new(ring.clone(), comps).expect("reduced components")
}

/// Commutativity and associativity of Witt addition on random triples.
pub fn witt_law_check(ring: &WittRing, len: usize, samples: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..samples {
        let a = random_witt(&mut rng, ring, len);
        let b = random_witt(&mut rng, ring, len);
        let c = random_witt(&mut rng, ring, len);
        let ab = witt_add(&a, &b)?;
        let ba = witt_add(&b, &a)?;
        let left = witt_add(&ab, &c)?;
        let right = witt_add(&a, &witt_add(&b, &c)?)?;
        if ab != ba || left != right {
            return Ok(Check::new(
                format!("Witt addition laws over {}", ring_name(ring)),
                false,
                format!("sample {s}: {:?} {:?} {:?}", a.components, b.components, c.components),
            ));
        }
    }
    Ok(Check::new(
        format!("Witt addition laws over {}", ring_name(ring)),
        true,
        format!("{samples} triples of length {len}"),
    ))
}

fn ring_name(ring: &WittRing) -> String {
    match ring {
        WittRing::FiniteField(ctx) => format!("F_{}", ctx.q()),
        WittRing::ZMod { p, k } => format!("Z/{}", p.pow(*k)),
        WittRing::Integers { .. } => "Z".into(),
        WittRing::Symbolic { .. } => "Z[X,Y]".into(),
    }
}

/// Largest `n` for which the `φ_0..φ_n` structure checks are run.
fn phi_depth(p: u64) -> usize {
    match p {
        2 => 3,
        3 => 2,
        _ => 1,
    }
}

pub fn suite_witt(config: &RunConfig, samples: usize) -> Result<Vec<Check>> {
    let p = config.p;
    let n = phi_depth(p);
    let phis = phi_polynomials(p, n)?;
    let mut out = vec![
        Check::new("isobaric", isobaric_check(&phis, p), format!("phi_0..phi_{n}")),
        Check::new("shift congruence", shift_congruence_check(&phis), format!("phi_0..phi_{n}")),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ring = WittRing::Integers { p };
    let mut round = true;
    for _ in 0..samples {
        let a = random_witt(&mut rng, &ring, n + 1);
        let g = ghost_transform(&a, GhostDirection::ToGhost)?;
        let back = ghost_transform(&WittVector::new(ring.clone(), g)?, GhostDirection::FromGhost)?;
        round &= back == a.components;
    }
    out.push(Check::new("ghost round trip", round, format!("{samples} integer vectors")));
    let field = WittRing::FiniteField(config.context()?);
    out.push(witt_law_check(&field, n + 1, samples, config.seed)?);
    out.push(witt_law_check(&WittRing::ZMod { p, k: 2 }, n + 1, samples, config.seed)?);
    Ok(out)
}

fn first_failure(name: &str, total: usize, failure: Option<String>) -> Check {
    match failure {
        None => Check::new(name, true, format!("{total} samples")),
        Some(f) => Check::new(name, false, f),
    }
}

/// `psi_digit` against the recursive oracle on `Z_q`, and the digit
/// decomposition against the Teichmüller expansion on `Q_q`.
pub fn suite_digits(config: &RunConfig, psi: &PsiTable, samples: usize, max_digits: usize) -> Result<Vec<Check>> {
    let ctx = config.context()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let depth = match config.q {
        2 => 8,
        3 => 6,
        4 => 5,
        _ => 3,
    };
    let mut fail = None;
    for s in 0..samples {
        let i_max = rng.gen_range(0..=depth);
        let prec = decomposition_precision(psi, i_max + 1);
        let a = random_zq(&mut rng, &ctx, 12, prec);
        let oracle = a_sequence_oracle(&ctx, &a, i_max)?;
        for (i, want) in oracle.iter().enumerate() {
            let got = psi_digit(psi, &a, i as i64)?;
            if got != *want && fail.is_none() {
                fail = Some(format!("sample {s}: a = {a}, i = {i}: digit {got}, oracle {want}"));
            }
        }
    }
    let mut out = vec![first_failure("digits vs a_i recursion", samples, fail)];
    let mut fail = None;
    for s in 0..samples {
        // the evaluation cost grows like q^count
        let count = rng.gen_range(1..=max_digits.min(depth + 2));
        let (label, a) = random_padic_rational(&mut rng, &ctx, 3, decomposition_precision(psi, count))?;
        let d = witt_bivector_decompose(psi, &a, count)?;
        let e = digit_expansion(&a, count)?;
        if d != e && fail.is_none() {
            fail = Some(format!("sample {s}: {label}, {count} digits"));
        }
    }
    out.push(first_failure("decomposition vs Teichmüller digits", samples, fail));
    let mut fail = None;
    for s in 0..samples {
        let i = rng.gen_range(0..=3i64);
        let prec = decomposition_precision(psi, i as usize + 4).max(64);
        let (label, a) = random_padic_rational(&mut rng, &ctx, 3, prec)?;
        if !bivector_congruence_check(psi, &a, i)? && fail.is_none() {
            fail = Some(format!("sample {s}: a = {label}, i = {i}"));
        }
    }
    out.push(first_failure("bivector congruence", samples, fail));
    let mut fail = None;
    for s in 0..samples {
        let a = random_zq(&mut rng, &ctx, 6, 16);
        if a.valuation() != Some(0) {
            continue;
        }
        let y = eval_psi(psi, &a, 1)?;
        if !a.sub(&y)?.valuation_info().at_least(1) && fail.is_none() {
            fail = Some(format!("sample {s}: a = {a}"));
        }
    }
    out.push(first_failure("Psi(a) = a mod p on units", samples, fail));
    Ok(out)
}

fn not_applicable(name: &str) -> Vec<Check> {
    vec![Check::new(format!("{name} (skipped)"), true, "requires f = 1")]
}

pub fn suite_addition(config: &RunConfig, psi: &PsiTable, samples: usize) -> Result<Vec<Check>> {
    if config.f != 1 {
        return Ok(not_applicable("addition law"));
    }
    let ctx = config.context()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // residuals grow faster for larger p
    let (n_max, precision) = if config.p <= 5 { (4, 100) } else { (3, 20 * config.p as i64 + 40) };
    let input = required_input_precision(psi, 0, precision);
    let mut fail = None;
    for s in 0..samples {
        let x = random_zq(&mut rng, &ctx, 10, input);
        let y = random_zq(&mut rng, &ctx, 10, input);
        let r = addition_law_check(psi, &x, &y, n_max, precision)?;
        if let Some(why) = addition_residual_problem(&r) {
            fail.get_or_insert(format!("sample {s}: x = {x}, y = {y}: {why}"));
        }
    }
    let zero = PadicScalar::zero(&ctx);
    let x = random_zq(&mut rng, &ctx, 10, input);
    let degenerate = addition_law_check(psi, &x, &zero, n_max, precision)?.iter().all(|v| *v == Valuation::Infinite);
    Ok(vec![
        first_failure("addition law residuals", samples, fail),
        Check::new("addition law with y = 0", degenerate, "exact"),
    ])
}

/// `None` if the residuals are finite, nondecreasing from `n = 1` and above
/// 10 at the last `n`.
pub fn addition_residual_problem(r: &[Valuation]) -> Option<String> {
    let fin: Vec<i64> = match r
        .iter()
        .map(|v| match v {
            Valuation::Finite(k) => Some(*k),
            _ => None,
        })
        .collect::<Option<Vec<_>>>()
    {
        Some(f) => f,
        None => return Some(format!("non-finite residual in {r:?}")),
    };
    if fin.windows(2).skip(1).any(|w| w[1] < w[0]) {
        return Some(format!("decreasing residuals {fin:?}"));
    }
    if fin.len() < 4 || fin[fin.len() - 1] <= 10 {
        return Some(format!("last residual not above 10: {fin:?}"));
    }
    None
}

pub fn suite_uniform(config: &RunConfig, psi: &PsiTable, samples: usize) -> Result<Vec<Check>> {
    if config.f != 1 {
        return Ok(not_applicable("uniform continuity"));
    }
    let r = uniform_continuity_report(psi, samples, 6, config.seed)?;
    Ok(vec![first_failure("uniform continuity", r.samples, r.first_failure)])
}

/// Levels checked by the zeros suite.
fn zero_levels(q: u64) -> usize {
    match q {
        2 => 3,
        3 | 4 => 2,
        _ => 1,
    }
}

pub fn suite_zeros(config: &RunConfig) -> Result<Vec<Check>> {
    let meta = config.meta()?;
    let levels = zero_levels(config.q);
    let target = 20;
    let psi = solve_psi(config.p, config.f, zeros_degree(meta, levels, target))?;
    let mut out = Vec::new();
    let mut factors = Vec::new();
    for n in 1..=levels {
        let zeros = find_zeros(&psi, n, target)?;
        let expected = (config.q.pow(n as u32) - config.q.pow(n as u32 - 1)) as usize;
        let vals_ok =
            zeros.iter().all(|z| z.zero.valuation() == Some(-(n as i64)) && z.residual_valuation.at_least(target));
        out.push(Check::new(
            format!("zeros of valuation -{n}"),
            zeros.len() == expected && vals_ok,
            format!("{} found, {expected} expected", zeros.len()),
        ));
        let f = schnirelmann_factor(&zeros)?;
        let f_ok = f.iter().skip(1).all(|c| c.valuation_info().at_least(n as i64));
        out.push(Check::new(format!("factor psi_{n}"), f_ok, "coefficients divisible by p^n"));
        factors.push(f);
        let partial = schnirelmann_partial_check(&psi, &factors)?;
        out.push(Check::new(
            format!("partial product up to psi_{n}"),
            partial,
            format!("degrees up to {}", config.q.pow(n as u32)),
        ));
    }
    Ok(out)
}
