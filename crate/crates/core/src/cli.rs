//! The `dhr` command line: sifting limits, sieve-function tables, admissible
//! r for single cells and whole tables, and empirical checks on a
//! polynomial system.
//!
//! Exit status is 0 on success, 2 for infeasible parameters, 3 when a
//! numerical method fails to converge and 4 for input errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::arith::{
    check_hypothesis, density_sum, mertens_ratio, parse_polynomial_system, DensitySums, EmpiricalOptions,
    EmpiricalReport, FactorConfig, HypothesisReport, MertensReport, WeightedSum, WindowFactors,
};
use crate::bounds::{asymptotic_params, k_lower_bound, ratio_check, AsymptoticParams, RatioCheck};
use crate::optimizer::{
    format_table_text, generate_table, minimize_r, published_r, write_table_csv, AdmissibleResult, SieveContext,
    DEFAULT_N_MAX,
};
use crate::sievefn::{
    LimitsSource, ReferenceLimits, SieveDimension, SieveFunctionTable, SieveLimits, DEFAULT_STEP,
};
use crate::{Error, Result};

/// Environment variable read when `--threads` is absent.
pub const THREADS_ENV: &str = "DHR_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LimitsArg {
    Solved,
    Reference,
}

impl From<LimitsArg> for LimitsSource {
    fn from(a: LimitsArg) -> Self {
        match a {
            LimitsArg::Solved => LimitsSource::Solved,
            LimitsArg::Reference => LimitsSource::Reference,
        }
    }
}

/// Inclusive integer range written `a..b`, a single value, or a comma list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntRange(pub Vec<u32>);

impl std::str::FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("{t:?} is not a non-negative integer"));
        let values = if let Some((a, b)) = s.split_once("..") {
            let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
            if a > b {
                return Err(format!("empty range {s}"));
            }
            (a..=b).collect()
        } else {
            s.split(',').map(num).collect::<std::result::Result<Vec<_>, _>>()?
        };
        if values.is_empty() {
            return Err("empty range".into());
        }
        Ok(IntRange(values))
    }
}

/// Parsed command line.
#[derive(Debug, Parser)]
#[command(name = "dhr", version, about = "Weighted-sieve computations for polynomial products at prime arguments")]
pub struct RunConfig {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the document here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Sifting limits from the bundled table or from the solver.
    #[arg(long = "limits", global = true, value_enum, default_value = "reference")]
    pub limits_source: LimitsArg,
    /// Seed for the randomized primality rounds and Pollard constants.
    #[arg(long, global = true, default_value_t = FactorConfig::default().seed)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sifting limits alpha_g, beta_g.
    Limits {
        #[arg(long, default_value = "1..10")]
        g: IntRange,
    },
    /// Values of F_g and f_g.
    Sievefn {
        #[arg(long)]
        g: u32,
        /// Comma-separated arguments; the whole grid when absent.
        #[arg(long, value_delimiter = ',')]
        at: Option<Vec<f64>>,
        /// End of the grid; alpha_g + 40 when absent.
        #[arg(long)]
        u_max: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
    },
    /// Minimal admissible r for one (g, k).
    Optimize {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: u32,
    },
    /// Minimal admissible r over a grid of (g, k).
    Table {
        #[arg(long, default_value = "2..4")]
        g: IntRange,
        #[arg(long, default_value = "1..14")]
        k: IntRange,
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: u32,
    },
    /// Almost-prime count of H(p) for primes p in (x, 2x].
    Verify {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        r: u32,
        /// Vouch for irreducibility of every factor.
        #[arg(long)]
        assume_irreducible: bool,
        /// With --u, also report the weighted sum W(A) for z = X^(1/v).
        #[arg(long, requires = "u")]
        v: Option<f64>,
        /// With --v, y = X^(1/u).
        #[arg(long, requires = "v")]
        u: Option<f64>,
        /// List every factorization.
        #[arg(long)]
        factors: bool,
        #[arg(long, default_value_t = FactorConfig::default().max_iterations)]
        max_iterations: u64,
    },
    /// Density sums, V, V' and the Mertens ratio.
    Density {
        #[arg(long)]
        poly: String,
        #[arg(long, default_value_t = 1_000_000)]
        x: u64,
        /// Product bound; defaults to x.
        #[arg(long)]
        z: Option<u64>,
    },
}

/// A rendered document and the diagnostics that accompany it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Output {
    pub document: String,
    pub diagnostics: Vec<String>,
}

fn num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x:.0}")
    } else {
        format!("{x:.12}")
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Input(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_doc<F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>>(f: F) -> Result<String> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        f(&mut w).map_err(crate::sievefn::csv_error)?;
        w.flush()?;
    }
    String::from_utf8(buf).map_err(|e| Error::Input(e.to_string()))
}

/// Executes a parsed command.
pub fn run(config: &RunConfig) -> Result<Output> {
    if config.threads == Some(0) {
        return Err(Error::Input("--threads must be at least 1".into()));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Input(e.to_string()))?;
    pool.install(|| dispatch(config))
}

fn dispatch(config: &RunConfig) -> Result<Output> {
    let source: LimitsSource = config.limits_source.into();
    match &config.command {
        Command::Limits { g } => limits(g, source, config.format.unwrap_or(Format::Text)),
        Command::Sievefn { g, at, u_max, step } => {
            sievefn(*g, at.as_deref(), *u_max, *step, source, config.format.unwrap_or(Format::Csv))
        }
        Command::Optimize { g, k, n_max } => optimize(*g, *k, *n_max, source, config.format.unwrap_or(Format::Text)),
        Command::Table { g, k, n_max } => table(g, k, *n_max, source, config.format.unwrap_or(Format::Text)),
        Command::Verify { poly, x, r, assume_irreducible, v, u, factors, max_iterations } => {
            let opts = EmpiricalOptions {
                assume_irreducible: *assume_irreducible,
                keep_records: *factors,
                factor: FactorConfig { max_iterations: *max_iterations, seed: config.seed },
            };
            let vu = v.zip(*u);
            verify(poly, *x, *r, vu, &opts, config.format.unwrap_or(Format::Json))
        }
        Command::Density { poly, x, z } => density(poly, *x, z.unwrap_or(*x), config.format.unwrap_or(Format::Text)),
    }
}

#[derive(Debug, Serialize)]
struct LimitsRow {
    g: u32,
    alpha: f64,
    beta: f64,
    source: LimitsSource,
    delta_alpha: Option<f64>,
    delta_beta: Option<f64>,
}

fn limits(gs: &IntRange, source: LimitsSource, format: Format) -> Result<Output> {
    let ctx = SieveContext::new(source);
    let reference = ReferenceLimits::bundled();
    let mut rows = Vec::new();
    for &g in &gs.0 {
        let dim = SieveDimension::new(g)?;
        let l = ctx.limits(dim)?;
        let (da, db) = match source {
            LimitsSource::Solved => {
                let r = reference.get(dim)?;
                (Some(l.alpha - r.alpha), Some(l.beta - r.beta))
            }
            LimitsSource::Reference => (None, None),
        };
        rows.push(LimitsRow { g, alpha: l.alpha, beta: l.beta, source, delta_alpha: da, delta_beta: db });
    }
    let diagnostics = rows
        .iter()
        .filter_map(|r| Some(format!("g={} delta_alpha={:e} delta_beta={:e}", r.g, r.delta_alpha?, r.delta_beta?)))
        .collect();
    let document = match format {
        Format::Json => json(&rows)?,
        Format::Csv => csv_doc(|w| {
            w.write_record(["g", "alpha", "beta", "source", "delta_alpha", "delta_beta"])?;
            for r in &rows {
                let d = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
                w.write_record([
                    r.g.to_string(),
                    num(r.alpha),
                    num(r.beta),
                    r.source.to_string(),
                    d(r.delta_alpha),
                    d(r.delta_beta),
                ])?;
            }
            Ok(())
        })?,
        Format::Text => {
            let mut s = String::new();
            for r in &rows {
                if rows.len() > 1 {
                    write!(s, "g={} ", r.g).unwrap();
                }
                writeln!(s, "alpha={} beta={}", num(r.alpha), num(r.beta)).unwrap();
            }
            s
        }
    };
    Ok(Output { document, diagnostics })
}

#[derive(Debug, Serialize)]
struct Point {
    u: f64,
    #[serde(rename = "F")]
    upper: f64,
    #[serde(rename = "f")]
    lower: f64,
}

fn sievefn(
    g: u32,
    at: Option<&[f64]>,
    u_max: Option<f64>,
    step: f64,
    source: LimitsSource,
    format: Format,
) -> Result<Output> {
    let dim = SieveDimension::new(g)?;
    let limits: SieveLimits = SieveContext::new(source).limits(dim)?;
    let u_max = u_max.unwrap_or(limits.alpha + 40.0);
    let table = SieveFunctionTable::build(dim, limits, u_max, step)?;
    let points: Vec<Point> = match at {
        Some(us) => us
            .iter()
            .map(|&u| Ok(Point { u, upper: table.eval_upper(u)?, lower: table.eval_lower(u)? }))
            .collect::<Result<_>>()?,
        None => (0..table.len())
            .map(|i| Point { u: table.node(i), upper: table.upper_node(i), lower: table.lower_node(i) })
            .collect(),
    };
    let res = table.dde_residuals();
    let diagnostics = vec![format!(
        "g={g} alpha={} beta={} max DDE residual {:e} ({} stencils skipped at breakpoints)",
        num(limits.alpha),
        num(limits.beta),
        res.max(),
        res.skipped
    )];
    let document = match format {
        Format::Json => json(&points)?,
        Format::Csv => csv_doc(|w| {
            w.write_record(["u", "F", "f"])?;
            for p in &points {
                w.write_record([format!("{:?}", p.u), format!("{:?}", p.upper), format!("{:?}", p.lower)])?;
            }
            Ok(())
        })?,
        Format::Text => {
            let mut s = format!("{:>14} {:>18} {:>18}\n", "u", "F", "f");
            for p in &points {
                writeln!(s, "{:>14.9} {:>18.12} {:>18.12}", p.u, p.upper, p.lower).unwrap();
            }
            s
        }
    };
    Ok(Output { document, diagnostics })
}

#[derive(Debug, Serialize)]
struct OptimizeReport {
    #[serde(flatten)]
    result: AdmissibleResult,
    published_r: Option<u32>,
    asymptotic: AsymptoticParams,
    ratio: Option<RatioCheck>,
    k_lower_bound: f64,
}

fn optimize(g: u32, k: u32, n_max: u32, source: LimitsSource, format: Format) -> Result<Output> {
    let dim = SieveDimension::new(g)?;
    let ctx = SieveContext::new(source);
    let tables = ctx.tables(dim)?;
    let result = minimize_r(k, n_max, &tables)?;
    let (lg, ln) = (ctx.limits(dim)?, ctx.limits(dim.next()?)?);
    let report = OptimizeReport {
        asymptotic: asymptotic_params(k, &lg, &ln)?,
        ratio: ratio_check(result.params.v, &lg, &ln).ok(),
        k_lower_bound: k_lower_bound(&lg, &ln),
        published_r: published_r(g, k).flatten(),
        result,
    };
    let res = &report.result;
    let b = &res.breakdown;
    let p = &res.params;
    let document = match format {
        Format::Json => json(&report)?,
        Format::Csv => csv_doc(|w| {
            w.write_record(["g", "k", "r", "classical_r", "n_star", "v", "w", "u", "threshold", "eta"])?;
            w.write_record([
                g.to_string(),
                k.to_string(),
                res.r.to_string(),
                res.classical_r.map(|c| c.to_string()).unwrap_or_else(|| "-".into()),
                res.n_star.to_string(),
                format!("{:?}", p.v),
                format!("{:?}", p.w),
                format!("{:?}", p.u),
                format!("{:?}", b.threshold),
                format!("{:?}", b.eta),
            ])
        })?,
        Format::Text => {
            let mut s = String::new();
            write!(s, "g={g} k={k} r={}", res.r).unwrap();
            if let Some(c) = res.classical_r {
                write!(s, " classical={c}").unwrap();
            }
            s.push('\n');
            writeln!(s, "v={:.9} w={:.9} u={:.9} n={}", p.v, p.w, p.u, res.n_star).unwrap();
            writeln!(
                s,
                "threshold={:.9} gku={:.9} I/f={:.9} J-term={:.9} eta={:.9}",
                b.threshold, b.gku, b.i_over_f, b.j_term, b.eta
            )
            .unwrap();
            let a = &report.asymptotic;
            writeln!(s, "asymptotic v={:.6} u={:.6} w={:.6} M={:.6} c1={:.6} c2={:.6}", a.v, a.u, a.w, a.m, a.c1, a.c2)
                .unwrap();
            writeln!(s, "k lower bound (informational)={:.6}", report.k_lower_bound).unwrap();
            s
        }
    };
    Ok(Output { document, diagnostics: Vec::new() })
}

fn table(gs: &IntRange, ks: &IntRange, n_max: u32, source: LimitsSource, format: Format) -> Result<Output> {
    let ctx = SieveContext::new(source);
    let cells = generate_table(&gs.0, &ks.0, n_max, &ctx)?;
    let compared: Vec<bool> = cells
        .iter()
        .filter_map(|c| match published_r(c.g, c.k)? {
            Some(p) => Some(c.r() == Some(p as u64)),
            None => None,
        })
        .collect();
    let mut diagnostics = Vec::new();
    if !compared.is_empty() {
        let hits = compared.iter().filter(|&&m| m).count();
        diagnostics.push(format!("{hits}/{} published cells reproduced", compared.len()));
    }
    let document = match format {
        Format::Json => json(&cells)?,
        Format::Csv => {
            let mut buf = Vec::new();
            write_table_csv(&cells, &mut buf)?;
            String::from_utf8(buf).map_err(|e| Error::Input(e.to_string()))?
        }
        Format::Text => format_table_text(&cells),
    };
    Ok(Output { document, diagnostics })
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    #[serde(flatten)]
    report: EmpiricalReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    weighted: Option<WeightedSum>,
}

fn verify(poly: &str, x: u64, r: u32, vu: Option<(f64, f64)>, opts: &EmpiricalOptions, format: Format) -> Result<Output> {
    let sys = parse_polynomial_system(poly)?;
    let win = WindowFactors::compute(&sys, x, opts)?;
    let out = VerifyReport { report: win.report(r)?, weighted: vu.map(|(v, u)| win.weighted_sum(r, v, u)).transpose()? };
    let diagnostics = out.report.warnings.iter().map(|w| format!("warning: {w}")).collect();
    let rep = &out.report;
    let document = match format {
        Format::Json => json(&out)?,
        Format::Csv => csv_doc(|w| {
            w.write_record([
                "polynomial",
                "x",
                "prime_count",
                "r",
                "almost_prime_count",
                "density_ratio",
                "normalized_count",
                "factorizations_verified",
            ])?;
            w.write_record([
                rep.polynomial.clone(),
                rep.x.to_string(),
                rep.prime_count.to_string(),
                rep.r.to_string(),
                rep.almost_prime_count.to_string(),
                format!("{:?}", rep.density_ratio),
                format!("{:?}", rep.normalized_count),
                rep.factorizations_verified.to_string(),
            ])
        })?,
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "H = {} (g={}, k={})", rep.polynomial, rep.g, rep.k).unwrap();
            writeln!(s, "window ({}, {}]: {} primes", rep.window.0, rep.window.1, rep.prime_count).unwrap();
            writeln!(s, "Omega(H(p)) <= {}: {}", rep.r, rep.almost_prime_count).unwrap();
            writeln!(s, "normalized count {:.6}, density ratio {:.6}", rep.normalized_count, rep.density_ratio).unwrap();
            writeln!(s, "factorizations verified {}", rep.factorizations_verified).unwrap();
            let hist: Vec<String> =
                rep.omega_counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(j, c)| format!("{j}:{c}")).collect();
            writeln!(s, "Omega histogram {}", hist.join(" ")).unwrap();
            if let Some(wt) = &out.weighted {
                writeln!(
                    s,
                    "W(A)={:.6} eta={:.6} z={:.6} y={:.6} survivors={} (r+1)*count={}",
                    wt.w, wt.eta, wt.z, wt.y, wt.survivors, wt.scaled_count
                )
                .unwrap();
            }
            s
        }
    };
    Ok(Output { document, diagnostics })
}

#[derive(Debug, Serialize)]
struct DensityReport {
    polynomial: String,
    hypothesis: HypothesisReport,
    density: DensitySums,
    mertens: MertensReport,
}

fn density(poly: &str, x: u64, z: u64, format: Format) -> Result<Output> {
    let sys = parse_polynomial_system(poly)?;
    let rep = DensityReport {
        polynomial: sys.to_string(),
        hypothesis: check_hypothesis(&sys),
        density: density_sum(&sys, x)?,
        mertens: mertens_ratio(&sys, z)?,
    };
    let d = &rep.density;
    let m = &rep.mertens;
    let rows: Vec<(&str, String)> = vec![
        ("hypothesis", if rep.hypothesis.passed { "pass".into() } else { format!("fail at {:?}", rep.hypothesis.failures) }),
        ("x", d.x.to_string()),
        ("sum_phi", format!("{:?}", d.sum_phi)),
        ("ratio_phi", format!("{:?}", d.ratio_phi)),
        ("sum_simple", format!("{:?}", d.sum_simple)),
        ("ratio_simple", format!("{:?}", d.ratio_simple)),
        ("sum_rho2", format!("{:?}", d.sum_rho2)),
        ("ratio_rho2", format!("{:?}", d.ratio_rho2)),
        ("z", m.z.to_string()),
        ("V", format!("{:?}", m.v)),
        ("V_prime", format!("{:?}", m.v_prime)),
        ("mertens_ratio", format!("{:?}", m.ratio)),
    ];
    let document = match format {
        Format::Json => json(&rep)?,
        Format::Csv => csv_doc(|w| {
            w.write_record(["quantity", "value"])?;
            for (k, v) in &rows {
                w.write_record([*k, v.as_str()])?;
            }
            Ok(())
        })?,
        Format::Text => {
            let mut s = format!("H = {}\n", rep.polynomial);
            for (k, v) in &rows {
                writeln!(s, "{k} = {v}").unwrap();
            }
            s
        }
    };
    Ok(Output { document, diagnostics: Vec::new() })
}

/// Parses `args`, runs, writes the document and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&config).and_then(|out| emit(&config, &out)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(config: &RunConfig, out: &Output) -> Result<()> {
    for d in &out.diagnostics {
        eprintln!("{d}");
    }
    match &config.out {
        Some(path) => std::fs::write(path, &out.document)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(out.document.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        RunConfig::try_parse_from(std::iter::once("dhr").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn ranges_parse() {
        assert_eq!("2..4".parse::<IntRange>().unwrap().0, vec![2, 3, 4]);
        assert_eq!("2..=3".parse::<IntRange>().unwrap().0, vec![2, 3]);
        assert_eq!("5".parse::<IntRange>().unwrap().0, vec![5]);
        assert_eq!("1,3".parse::<IntRange>().unwrap().0, vec![1, 3]);
        assert!("4..2".parse::<IntRange>().is_err());
        assert!("x".parse::<IntRange>().is_err());
    }

    #[test]
    fn limits_for_g1() {
        let out = run(&parse(&["limits", "--g", "1"])).unwrap();
        assert_eq!(out.document, "alpha=2 beta=2\n");
        let out = run(&parse(&["limits", "--g", "1..2", "--format", "csv"])).unwrap();
        assert!(out.document.starts_with("g,alpha,beta,source,delta_alpha,delta_beta\n1,2,2,reference,,\n2,5.357727445594,"));
    }

    #[test]
    fn input_errors_map_to_exit_codes() {
        assert_eq!(main_with_args(["dhr", "limits", "--g", "0"]), 4);
        assert_eq!(main_with_args(["dhr", "bogus"]), 4);
        assert_eq!(main_with_args(["dhr", "verify", "--poly", "n^2+1; n^3+2", "--x", "100", "--r", "3"]), 4);
        assert_eq!(main_with_args(["dhr", "verify", "--poly", "n^3+2; n^3+4", "--x", "100", "--r", "3"]), 2);
        assert!(run(&parse(&["limits", "--threads", "0"])).is_err());
    }

    #[test]
    fn density_text_lists_quantities() {
        let out = run(&parse(&["density", "--poly", "n^3+2; n^3+6", "--x", "1000"])).unwrap();
        assert!(out.document.contains("hypothesis = pass"), "{}", out.document);
        assert!(out.document.contains("mertens_ratio = "));
    }
}
