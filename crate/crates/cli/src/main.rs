//! `charmoments`: exact coefficients, tables, identity checks and Monte Carlo runs.
//!
//! Exit codes: 0 ok, 1 invalid query or usage, 2 backend mismatch,
//! 3 identity failure, 4 unsupported oracle request.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use charmoments::exact::{factored, to_f64};
use charmoments::oracle::{gamma_suite, lemma_suite, prop1_suite, prop2_suite, weyl_quadrature_moment, CheckOutcome};
use charmoments::rmt::{asymptotic_report, EigenBackend, McConfig, MomentSpec, Sampler};
use charmoments::{b_comb, b_det, coefficient, first_moment_closed_form, Backend, CoeffQuery, Ensemble, Error, Rational};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const EXIT_INVALID: u8 = 1;
const EXIT_MISMATCH: u8 = 2;
const EXIT_IDENTITY: u8 = 3;
const EXIT_ORACLE: u8 = 4;

#[derive(Parser)]
#[command(name = "charmoments", version, about = "Leading-order moments of derivatives of characteristic polynomials over Sp(2N), SO(2N), O-(2N)")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one coefficient b and its exponent.
    Coeff(CoeffArgs),
    /// Emit a grid of coefficients from both formulae.
    Table(TableArgs),
    /// Run an identity-check suite and print a JSON report.
    Verify(VerifyArgs),
    /// Monte Carlo estimate against the leading-order prediction.
    Mc(McArgs),
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long, value_parser = parse_ensemble)]
    ensemble: Ensemble,
    #[arg(long)]
    k1: u32,
    #[arg(long)]
    k2: u32,
    #[arg(long)]
    n1: u32,
    #[arg(long)]
    n2: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Det,
    Comb,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct CoeffArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long, value_enum, default_value = "comb")]
    backend: BackendArg,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Render the value with prime-factored numerator and denominator.
    #[arg(long)]
    factored: bool,
    /// Also print a (tagged) floating-point approximation.
    #[arg(long)]
    decimal: bool,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, value_parser = parse_ensemble)]
    ensemble: Option<Ensemble>,
    /// Inclusive range `a..b` (or a single value); `b < a` is empty.
    #[arg(long)]
    k1_range: Option<String>,
    #[arg(long)]
    k2_range: Option<String>,
    #[arg(long)]
    n1_range: Option<String>,
    #[arg(long)]
    n2_range: Option<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// File of `key = value` defaults (ensemble, k1-range, k2-range, n1-range, n2-range, format).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Props,
    Lemmas,
    Gamma,
    Closed,
    Cross,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long)]
    max_k: Option<u32>,
    #[arg(long)]
    max_n: Option<u32>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Random points per derivative-lemma check.
    #[arg(long, default_value_t = 50)]
    trials: usize,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long = "N")]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Compare with the exact quadrature value (N <= 2 only).
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_enum, default_value = "tridiagonal")]
    eigen: EigenArg,
    #[arg(long, value_enum, default_value = "haar")]
    sampler: SamplerArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EigenArg {
    Tridiagonal,
    Jacobi,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SamplerArg {
    Haar,
    Metropolis,
}

fn parse_ensemble(s: &str) -> Result<Ensemble, String> {
    s.parse()
}

/// Failure carrying its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::OracleUnsupported(_) => EXIT_ORACLE,
            _ => EXIT_INVALID,
        };
        Fail(code, e.to_string())
    }
}

type CmdResult = Result<String, Fail>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }
    let result = match cli.command {
        Command::Coeff(a) => cmd_coeff(&a),
        Command::Table(a) => cmd_table(a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Mc(a) => cmd_mc(&a),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn query(a: &QueryArgs) -> Result<CoeffQuery, Fail> {
    Ok(CoeffQuery::new(a.ensemble, a.k1, a.k2, a.n1, a.n2)?)
}

fn render(v: &Rational, factor: bool) -> String {
    if factor {
        factored(v)
    } else {
        v.to_string()
    }
}

fn cmd_coeff(a: &CoeffArgs) -> CmdResult {
    let q = query(&a.query)?;
    let backends: &[Backend] = match a.backend {
        BackendArg::Det => &[Backend::Det],
        BackendArg::Comb => &[Backend::Comb],
        BackendArg::Both => &[Backend::Det, Backend::Comb],
    };
    let results = backends.iter().map(|&b| coefficient(&q, b)).collect::<charmoments::Result<Vec<_>>>()?;
    let r = &results[0];
    if let Some(other) = results.iter().find(|o| o.value != r.value) {
        return Err(Fail(EXIT_MISMATCH, format!("backends disagree on {q}: det {} vs comb {}", r.value, other.value)));
    }
    let tag = match a.backend {
        BackendArg::Det => "det",
        BackendArg::Comb => "comb",
        BackendArg::Both => "both",
    };
    let shown = render(&r.value, a.factored);
    Ok(match a.format {
        Format::Text => {
            let mut s = format!("{shown} · (2N)^{}", r.exponent);
            if a.decimal {
                write!(s, "  (≈ {:e})", to_f64(&r.value)).unwrap();
            }
            s + "\n"
        }
        Format::Json => {
            let mut v = json!({
                "ensemble": q.ensemble, "k1": q.k1, "k2": q.k2, "n1": q.n1, "n2": q.n2,
                "value": r.value.to_string(),
                "factored": factored(&r.value),
                "exponent": r.exponent,
                "backend": tag,
            });
            if a.decimal {
                v["value_f64"] = json!(to_f64(&r.value));
            }
            format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
        }
        Format::Csv => {
            let mut head = "ensemble,k1,k2,n1,n2,value,factored,exponent,backend".to_string();
            let mut row = format!("{},{},{},{},{},{},{},{},{tag}", q.ensemble, q.k1, q.k2, q.n1, q.n2, r.value, factored(&r.value), r.exponent);
            if a.decimal {
                head += ",value_f64";
                write!(row, ",{:e}", to_f64(&r.value)).unwrap();
            }
            format!("{head}\n{row}\n")
        }
    })
}

/// Inclusive range `a..b`, `a..=b` or a single value; empty string or `b < a` is empty.
fn parse_range(s: &str) -> Result<Vec<u32>, Fail> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let bad = || Fail(EXIT_INVALID, format!("invalid range `{s}` (expected a..b)"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().trim_start_matches('=').parse().map_err(|_| bad())?),
        None => {
            let v = s.parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    Ok((lo..=hi).collect())
}

fn read_config(path: &PathBuf) -> Result<HashMap<String, String>, Fail> {
    let text = std::fs::read_to_string(path).map_err(|e| Fail(EXIT_INVALID, format!("{}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Fail(EXIT_INVALID, format!("{}:{}: expected key = value", path.display(), i + 1)))?;
        map.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(map)
}

fn cmd_table(a: TableArgs) -> CmdResult {
    let cfg = match &a.config {
        Some(p) => read_config(p)?,
        None => HashMap::new(),
    };
    let pick = |flag: Option<String>, key: &str, default: &str| flag.or_else(|| cfg.get(key).cloned()).unwrap_or_else(|| default.to_string());
    let ensemble: Ensemble = match a.ensemble {
        Some(e) => e,
        None => pick(None, "ensemble", "sp").parse().map_err(|e: String| Fail(EXIT_INVALID, e))?,
    };
    let k1s = parse_range(&pick(a.k1_range, "k1-range", "0..1"))?;
    let k2s = parse_range(&pick(a.k2_range, "k2-range", "1..2"))?;
    let n1s = parse_range(&pick(a.n1_range, "n1-range", "0..3"))?;
    let n2s = parse_range(&pick(a.n2_range, "n2-range", "0..3"))?;
    let format = match a.format {
        Some(f) => f,
        None => match pick(None, "format", "csv").as_str() {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(Fail(EXIT_INVALID, format!("table format must be csv or json, got `{other}`"))),
        },
    };
    if format == Format::Text {
        return Err(Fail(EXIT_INVALID, "table format must be csv or json".into()));
    }

    let mut queries = Vec::new();
    for &k1 in &k1s {
        for &k2 in &k2s {
            for &n1 in &n1s {
                for &n2 in &n2s {
                    // the grid may cross invalid corners (n1 > n2, k = 0): skip them
                    if let Ok(q) = CoeffQuery::new(ensemble, k1, k2, n1, n2) {
                        queries.push(q);
                    }
                }
            }
        }
    }
    let mut rows = Vec::new();
    let mut mismatches = 0;
    for q in &queries {
        let d = coefficient(q, Backend::Det)?;
        let c = coefficient(q, Backend::Comb)?;
        let ok = d.value == c.value;
        if !ok {
            mismatches += 1;
        }
        rows.push((q, d, c, ok));
    }

    let out = match format {
        Format::Json => {
            let v: Vec<Value> = rows
                .iter()
                .map(|(q, d, c, ok)| {
                    json!({
                        "ensemble": q.ensemble, "k1": q.k1, "k2": q.k2, "n1": q.n1, "n2": q.n2,
                        "exponent": c.exponent,
                        "b_det": d.value.to_string(), "b_comb": c.value.to_string(),
                        "factored": factored(&c.value),
                        "mismatch": if *ok { "ok" } else { "MISMATCH" },
                    })
                })
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&v).unwrap())
        }
        _ => {
            let mut s = String::from("ensemble,k1,k2,n1,n2,exponent,b_det,b_comb,factored,mismatch\n");
            for (q, d, c, ok) in &rows {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{}",
                    q.ensemble, q.k1, q.k2, q.n1, q.n2, c.exponent, d.value, c.value, factored(&c.value),
                    if *ok { "ok" } else { "MISMATCH" }
                )
                .unwrap();
            }
            s
        }
    };
    let out = match &a.out {
        Some(path) => {
            std::fs::write(path, &out).map_err(|e| Fail(EXIT_INVALID, format!("{}: {e}", path.display())))?;
            String::new()
        }
        None => out,
    };
    if mismatches > 0 {
        print!("{out}");
        return Err(Fail(EXIT_MISMATCH, format!("{mismatches} rows where the two formulae disagree")));
    }
    Ok(out)
}

fn outcome(identity: &str, params: String, lhs: &Rational, rhs: &Rational) -> CheckOutcome {
    let pass = lhs == rhs;
    CheckOutcome { identity: identity.into(), params, pass, witness: (!pass).then(|| format!("lhs = {lhs}; rhs = {rhs}")) }
}

fn closed_suite(max_n: u32) -> charmoments::Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for e in [Ensemble::Sp, Ensemble::So] {
        for n in 1..=max_n {
            let b = b_comb(&CoeffQuery::new(e, 0, 1, 0, n)?)?.value;
            out.push(outcome("first_moment_closed_form", format!("{e} n={n}"), &b, &first_moment_closed_form(e, n)?));
        }
    }
    Ok(out)
}

fn cross_suite(max_k: u32, max_n: u32) -> charmoments::Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for e in [Ensemble::Sp, Ensemble::So] {
        for k in 1..=max_k {
            for k1 in 0..=k {
                for n2 in 0..=max_n {
                    for n1 in 0..=n2 {
                        let q = CoeffQuery::new(e, k1, k - k1, n1, n2)?;
                        out.push(outcome("det_equals_comb", q.to_string(), &b_det(&q)?.value, &b_comb(&q)?.value));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn cmd_verify(a: &VerifyArgs) -> CmdResult {
    let (name, checks) = match a.suite {
        Suite::Props => {
            let mut c = prop1_suite(a.max_k.unwrap_or(2) as usize, a.max_n.unwrap_or(3));
            c.extend(prop2_suite(a.max_k.unwrap_or(3) as usize, a.max_n.unwrap_or(4) as i32));
            ("props", c)
        }
        Suite::Lemmas => ("lemmas", lemma_suite(a.max_n.unwrap_or(6), a.max_k.unwrap_or(3) as usize, a.trials, a.seed)),
        Suite::Gamma => ("gamma", gamma_suite(a.max_k.unwrap_or(5) as usize, a.max_n.unwrap_or(6))),
        Suite::Closed => ("closed", closed_suite(a.max_n.unwrap_or(20))?),
        Suite::Cross => ("cross", cross_suite(a.max_k.unwrap_or(4), a.max_n.unwrap_or(5))?),
    };
    let failed = checks.iter().filter(|c| !c.pass).count();
    let report = json!({
        "suite": name,
        "total": checks.len(),
        "passed": checks.len() - failed,
        "failed": failed,
        "checks": checks,
    });
    let text = format!("{}\n", serde_json::to_string_pretty(&report).unwrap());
    if failed > 0 {
        print!("{text}");
        return Err(Fail(EXIT_IDENTITY, format!("{failed} of {} checks failed", checks.len())));
    }
    Ok(text)
}

fn cmd_mc(a: &McArgs) -> CmdResult {
    let q = query(&a.query)?;
    if a.oracle && a.n > 2 {
        return Err(Error::OracleUnsupported(a.n).into());
    }
    let mut cfg = McConfig::new(a.samples, a.seed);
    cfg.eigen = match a.eigen {
        EigenArg::Tridiagonal => EigenBackend::Tridiagonal,
        EigenArg::Jacobi => EigenBackend::Jacobi,
    };
    cfg.sampler = match a.sampler {
        SamplerArg::Haar => Sampler::Haar,
        SamplerArg::Metropolis => Sampler::Metropolis,
    };
    let spec = MomentSpec::from(q);
    let r = asymptotic_report(a.n, &[spec], &cfg)?.remove(0);
    let mut v = serde_json::to_value(&r).unwrap();
    if a.oracle {
        let exact = weyl_quadrature_moment(a.n, &spec)?;
        v["quadrature"] = json!(exact);
        v["quadrature_z"] = json!(if r.stderr > 0.0 { (r.mean - exact) / r.stderr } else { 0.0 });
    }
    Ok(format!("{}\n", serde_json::to_string_pretty(&v).unwrap()))
}
