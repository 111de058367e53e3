//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, malformed
//! systems, dimension mismatches), 2 when a computation is refused
//! (precision exhausted, budget exceeded, singular evaluation).

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::{json, Value};

use crate::analysis::{self, Corner, ScanOptions};
use crate::error::{Error, Result};
use crate::halton::{self, format_sig, HaltonConfig};
use crate::monna;
use crate::numeration::{parse_systems, DigitString, NumerationSystem};
use crate::par::{self, Execution};
use crate::qmc;
use crate::roots;

#[derive(Parser, Debug)]
#[command(
    name = "beta-halton",
    version,
    about = "β-adic van der Corput and Halton sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Greedy expansions, digit values, regularity, successors, maximal words and base sequences.
    Expand(ExpandArgs),
    /// Points of the β-adic van der Corput / Halton sequence.
    Sequence(SequenceArgs),
    /// Cylinder counts and measures, extremal thresholds and the extremal-digit check.
    Measure(MeasureArgs),
    /// Characteristic polynomial, roots, Pisot status, b_j and admissibility.
    CheckSystem(CheckArgs),
    /// Hyperbolic distance of the points to cube corners.
    ScanCorner(ScanArgs),
    /// Star discrepancy and minimal hyperbolic product of a point set.
    Discrepancy(DiscrepancyArgs),
    /// Quasi-Monte Carlo estimates for a corner-singular integrand.
    Integrate(IntegrateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MapKind {
    Psi,
    Phi,
    PsiD3,
}

#[derive(Args, Debug)]
struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Significant digits for real numbers in CSV output.
    #[arg(long, default_value_t = 17)]
    digits: usize,
    /// Write data here instead of standard output.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Run on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

#[derive(Args, Debug)]
#[group(id = "expand_op", required = true, multiple = false)]
struct ExpandOp {
    /// Greedy expansion of this non-negative integer.
    #[arg(long, value_name = "N")]
    n: Option<String>,
    /// Value Σ ε_k G_k of a little-endian digit string.
    #[arg(long, value_name = "DIGITS", allow_hyphen_values = true)]
    value_of: Option<String>,
    /// Whether a digit string is regular.
    #[arg(long, value_name = "DIGITS")]
    is_regular: Option<String>,
    /// Expansion of value + 1 for a regular digit string.
    #[arg(long, value_name = "DIGITS")]
    successor: Option<String>,
    /// Lexicographically maximal regular word of this length.
    #[arg(long, value_name = "LEN")]
    max_word: Option<usize>,
    /// G_0, …, G_N.
    #[arg(long, value_name = "N")]
    g_terms: Option<usize>,
}

#[derive(Args, Debug)]
struct ExpandArgs {
    /// Coefficients a_0,…,a_{d−1}, e.g. 3,2,1.
    #[arg(long)]
    system: String,
    #[command(flatten)]
    op: ExpandOp,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SequenceArgs {
    /// Systems separated by ';', e.g. "1,1;2,1".
    #[arg(long)]
    systems: String,
    /// Number of points.
    #[arg(long, default_value_t = 10)]
    count: u64,
    /// First index.
    #[arg(long, default_value_t = 1)]
    start: u64,
    /// Coordinate map.
    #[arg(long, value_enum, default_value_t = MapKind::Psi)]
    map: MapKind,
    /// Enclosure width for every coordinate.
    #[arg(long, default_value_t = 1e-15)]
    tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
#[group(id = "measure_op", required = true, multiple = false)]
struct MeasureOp {
    /// Cylinder prefix ε_0,…,ε_{K−1}: prints F_{K,r} and μ.
    #[arg(long, value_name = "DIGITS")]
    prefix: Option<String>,
    /// β^{d−1} / (β^m (β^{d−1} + … + 1)).
    #[arg(long, value_name = "M")]
    threshold: Option<u32>,
    /// Checks the extremal-digit implications for n = 1..=N.
    #[arg(long, value_name = "N")]
    check_extremes: Option<u64>,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    #[arg(long)]
    system: String,
    #[command(flatten)]
    op: MeasureOp,
    /// Largest m for --check-extremes.
    #[arg(long, default_value_t = 12)]
    max_m: u32,
    #[arg(long, default_value_t = 1e-15)]
    tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Systems separated by ';'; pairwise admissibility is reported for two or more.
    #[arg(long, alias = "system")]
    systems: String,
    /// Working precision in bits for the roots.
    #[arg(long, default_value_t = 128)]
    precision: u32,
    /// Largest n for the G_n reconstruction residual.
    #[arg(long, default_value_t = 50)]
    reconstruct: usize,
    #[arg(long, default_value_t = 1e-15)]
    tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    systems: String,
    /// Corner as comma-separated 0/1, or `all`.
    #[arg(long)]
    corner: String,
    /// Scan length.
    #[arg(long = "N", value_name = "N")]
    n: u64,
    /// Margin above H/2 before a violation is flagged.
    #[arg(long, default_value_t = analysis::DEFAULT_SLACK)]
    slack: f64,
    #[arg(long, default_value_t = 1e-15)]
    tol: f64,
    /// Also write n,distance,running_exponent rows here (one corner only).
    #[arg(long, value_name = "PATH")]
    trajectory: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
#[group(id = "points_source", required = true, multiple = false)]
struct PointsSource {
    /// CSV file of points (`-` for standard input); a leading `n` column is skipped.
    #[arg(long, value_name = "PATH")]
    input: Option<String>,
    /// Generate the points from these systems instead.
    #[arg(long)]
    systems: Option<String>,
}

#[derive(Args, Debug)]
struct DiscrepancyArgs {
    #[command(flatten)]
    source: PointsSource,
    /// Number of generated points.
    #[arg(long, default_value_t = 1000)]
    count: u64,
    /// Work limit for the exact multi-dimensional computation.
    #[arg(long, default_value_t = analysis::DEFAULT_ND_BUDGET)]
    budget: f64,
    /// Report the one-dimensional discrepancy of every coordinate instead.
    #[arg(long)]
    per_coordinate: bool,
    #[arg(long, default_value_t = 1e-15)]
    tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct IntegrateArgs {
    #[arg(long)]
    systems: String,
    /// Singularity exponents A_i in (0,1), comma-separated.
    #[arg(long)]
    exponents: String,
    /// Singular corner; defaults to the origin.
    #[arg(long)]
    corner: Option<String>,
    /// Strictly increasing prefix lengths, comma-separated.
    #[arg(long, default_value = "1000,10000,100000")]
    ladder: String,
    /// Add a pseudorandom baseline column.
    #[arg(long)]
    baseline: bool,
    /// Seed of the baseline generator.
    #[arg(long, default_value_t = qmc::DEFAULT_BASELINE_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 1e-15)]
    tol: f64,
    #[command(flatten)]
    common: Common,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let mut buf = Vec::new();
    let (result, target) = dispatch(cli.command, &mut buf, err);
    let result = result.and_then(|()| match target {
        Some(path) => std::fs::write(path, &buf).map_err(Error::from),
        None => out.write_all(&buf).map_err(Error::from),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_usage() {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut Vec<u8>, err: &mut dyn Write) -> (Result<()>, Option<PathBuf>) {
    match cmd {
        Command::Expand(a) => {
            let t = a.common.output.clone();
            (expand(a, out), t)
        }
        Command::Sequence(a) => {
            let t = a.common.output.clone();
            (sequence(a, out, err), t)
        }
        Command::Measure(a) => {
            let t = a.common.output.clone();
            (measure(a, out), t)
        }
        Command::CheckSystem(a) => {
            let t = a.common.output.clone();
            (check_system(a, out), t)
        }
        Command::ScanCorner(a) => {
            let t = a.common.output.clone();
            (scan_corner(a, out, err), t)
        }
        Command::Discrepancy(a) => {
            let t = a.common.output.clone();
            (discrepancy(a, out, err), t)
        }
        Command::Integrate(a) => {
            let t = a.common.output.clone();
            (integrate(a, out, err), t)
        }
    }
}

fn emit_json(out: &mut Vec<u8>, v: &Value) -> Result<()> {
    writeln!(out, "{v}")?;
    Ok(())
}

fn parse_biguint(s: &str) -> Result<BigUint> {
    s.trim()
        .parse::<BigUint>()
        .map_err(|e| Error::parse(s.trim(), format!("not a non-negative integer ({e})")))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|e| Error::parse(t.trim(), format!("not a {what} ({e})")))
        })
        .collect()
}

fn warn_admissibility(config: &HaltonConfig, err: &mut dyn Write) {
    for w in config.admissibility().warnings() {
        let _ = writeln!(err, "warning: {w}");
    }
}

fn expand(a: ExpandArgs, out: &mut Vec<u8>) -> Result<()> {
    let sys: NumerationSystem = a.system.parse()?;
    let json = a.common.format == Format::Json;
    let op = a.op;
    let (key, text, value): (&str, String, Value) = if let Some(n) = op.n {
        let n = parse_biguint(&n)?;
        let w = sys.expand(&n);
        ("digits", w.to_string(), json!(w.digits()))
    } else if let Some(w) = op.value_of {
        let w: DigitString = w.parse()?;
        let v = sys.value(&w).to_string();
        ("value", v.clone(), json!(v))
    } else if let Some(w) = op.is_regular {
        let w: DigitString = w.parse()?;
        let r = sys.is_regular(&w);
        ("regular", r.to_string(), json!(r))
    } else if let Some(w) = op.successor {
        let w: DigitString = w.parse()?;
        let s = sys.successor(&w)?;
        ("digits", s.to_string(), json!(s.digits()))
    } else if let Some(len) = op.max_word {
        let w = sys.max_word(len)?;
        ("digits", w.to_string(), json!(w.digits()))
    } else if let Some(n) = op.g_terms {
        let g: Vec<String> = sys.g_terms(n).iter().map(BigUint::to_string).collect();
        ("g", g.join(","), json!(g))
    } else {
        unreachable!("clap requires one operation")
    };
    if json {
        emit_json(out, &json!({ "system": sys.to_string(), key: value }))
    } else {
        writeln!(out, "{text}")?;
        Ok(())
    }
}

fn sequence(a: SequenceArgs, out: &mut Vec<u8>, err: &mut dyn Write) -> Result<()> {
    if a.start == 0 {
        return Err(Error::InvalidArgument("sequence indices start at 1".into()));
    }
    let exec = a.common.exec();
    let systems = parse_systems(&a.systems)?;
    let rows: Vec<Vec<f64>> = match a.map {
        MapKind::Psi => {
            let config = HaltonConfig::new(systems)?;
            warn_admissibility(&config, err);
            if a.common.format == Format::Csv {
                return halton::write_csv(
                    out,
                    &config,
                    a.start,
                    a.count,
                    a.tol,
                    a.common.digits,
                    exec,
                );
            }
            halton::halton_stream_f64(&config, a.start, a.count, a.tol, exec)?
        }
        MapKind::Phi | MapKind::PsiD3 => {
            let end = a
                .start
                .checked_add(a.count)
                .ok_or_else(|| Error::InvalidArgument("index range overflows".into()))?;
            par::try_map_range(exec, a.start..end, |n| {
                let n = BigUint::from(n);
                systems
                    .iter()
                    .map(|s| {
                        let v = match a.map {
                            MapKind::Phi => monna::phi(s, &n, a.tol),
                            _ => monna::psi_d3(s, &n, a.tol),
                        }?;
                        Ok(v.mid_f64())
                    })
                    .collect::<Result<Vec<f64>>>()
            })?
        }
    };
    match a.common.format {
        Format::Json => {
            let pts: Vec<Value> = rows
                .iter()
                .enumerate()
                .map(|(i, p)| json!({ "n": a.start + i as u64, "x": p }))
                .collect();
            emit_json(out, &json!({ "systems": a.systems, "points": pts }))
        }
        Format::Csv => {
            let header: Vec<String> = (1..=systems_len(&rows, &a.systems))
                .map(|i| format!("x{i}"))
                .collect();
            writeln!(out, "n,{}", header.join(","))?;
            for (i, p) in rows.iter().enumerate() {
                let cells: Vec<String> =
                    p.iter().map(|&x| format_sig(x, a.common.digits)).collect();
                writeln!(out, "{},{}", a.start + i as u64, cells.join(","))?;
            }
            Ok(())
        }
    }
}

fn systems_len(rows: &[Vec<f64>], systems: &str) -> usize {
    rows.first().map_or_else(
        || systems.split(';').filter(|s| !s.trim().is_empty()).count(),
        Vec::len,
    )
}

fn measure(a: MeasureArgs, out: &mut Vec<u8>) -> Result<()> {
    let sys: NumerationSystem = a.system.parse()?;
    let json = a.common.format == Format::Json;
    let dg = a.common.digits;
    if let Some(p) = a.op.prefix {
        let prefix: DigitString = p.parse()?;
        let counts = (0..sys.degree())
            .map(|r| monna::cylinder_count(&sys, &prefix, r).map(|c| c.to_string()))
            .collect::<Result<Vec<_>>>()?;
        let m = monna::cylinder_measure(&sys, &prefix, a.tol)?;
        let v = &m.value;
        if json {
            return emit_json(
                out,
                &json!({
                    "system": sys.to_string(), "prefix": prefix.to_string(), "length": m.len,
                    "counts": counts, "measure": v.mid_f64(), "lo": v.lo_f64(), "hi": v.hi_f64(),
                }),
            );
        }
        let count_cols: Vec<String> = (0..counts.len()).map(|r| format!("F{r}")).collect();
        writeln!(out, "prefix,length,{},measure,lo,hi", count_cols.join(","))?;
        writeln!(
            out,
            "\"{prefix}\",{},{},{},{},{}",
            m.len,
            counts.join(","),
            format_sig(v.mid_f64(), dg),
            format_sig(v.lo_f64(), dg),
            format_sig(v.hi_f64(), dg)
        )?;
    } else if let Some(m) = a.op.threshold {
        let t = monna::extreme_threshold(&sys, m, a.tol)?;
        if json {
            return emit_json(
                out,
                &json!({ "system": sys.to_string(), "m": m, "threshold": t.mid_f64() }),
            );
        }
        writeln!(out, "m,threshold")?;
        writeln!(out, "{m},{}", format_sig(t.mid_f64(), dg))?;
    } else if let Some(n_max) = a.op.check_extremes {
        let results = par::try_map_range(a.common.exec(), 1..n_max + 1, |n| {
            monna::check_extreme_digits(&sys, &BigUint::from(n), a.max_m).map(|c| (n, c))
        })?;
        let mut counter = Vec::new();
        let mut undecided = 0usize;
        for (n, c) in &results {
            undecided += c.undecided.len();
            for &(m, side) in &c.counterexamples {
                counter.push(json!({ "n": n, "m": m, "side": format!("{side:?}") }));
            }
        }
        if json {
            return emit_json(
                out,
                &json!({
                    "system": sys.to_string(), "n_max": n_max, "max_m": a.max_m,
                    "counterexamples": counter, "undecided": undecided,
                }),
            );
        }
        writeln!(out, "n_max,max_m,counterexamples,undecided")?;
        writeln!(out, "{n_max},{},{},{undecided}", a.max_m, counter.len())?;
    }
    Ok(())
}

fn check_system(a: CheckArgs, out: &mut Vec<u8>) -> Result<()> {
    let systems = parse_systems(&a.systems)?;
    let mut reports = Vec::new();
    for sys in &systems {
        let pisot = roots::is_pisot(sys, a.tol)?;
        let beta = roots::dominant_root(sys, a.tol)?;
        let rd = roots::conjugate_roots(sys, a.precision)?;
        let b = rd.b_c64();
        let sum_b: num_complex::Complex64 = b.iter().sum();
        let max_resid = (0..=a.reconstruct)
            .map(|n| roots::reconstruct_g(sys, &rd, n))
            .fold(0.0, f64::max);
        reports.push(json!({
            "system": sys.to_string(),
            "degree": sys.degree(),
            "char_poly": roots::char_poly(sys).to_string(),
            "non_increasing": sys.is_non_increasing(),
            "dense_pattern": sys.has_dense_pattern(),
            "k_equal": sys.k_equal(),
            "beta": beta.mid_f64(),
            "beta_lo": beta.lo_f64(),
            "beta_hi": beta.hi_f64(),
            "pisot": pisot,
            "conjugates": rd.conjugates_c64().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "root_residuals": rd.residuals,
            "b": b.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "sum_b": [sum_b.re, sum_b.im],
            "max_reconstruction_residual": max_resid,
        }));
    }
    let config = if systems.iter().all(NumerationSystem::is_non_increasing) {
        Some(HaltonConfig::new(systems.clone())?)
    } else {
        None
    };
    let c1 = config
        .as_ref()
        .map(|c| analysis::c1_constant(c, a.tol))
        .transpose()?
        .map(|v| v.mid_f64());
    let admissibility = match &config {
        Some(c) => serde_json::to_value(c.admissibility()).expect("serializable"),
        None => serde_json::to_value(halton::check_admissibility(&systems)?).expect("serializable"),
    };
    if a.common.format == Format::Json {
        return emit_json(
            out,
            &json!({ "systems": reports, "c1": c1, "admissibility": admissibility }),
        );
    }
    let dg = a.common.digits;
    writeln!(out, "system,key,value")?;
    let fmt = |v: &Value| match v {
        Value::Number(n) => n.as_f64().map_or_else(
            || n.to_string(),
            |x| {
                if n.is_f64() {
                    format_sig(x, dg)
                } else {
                    n.to_string()
                }
            },
        ),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    for r in &reports {
        let name = r["system"].as_str().unwrap_or_default();
        let obj = r.as_object().expect("object");
        for (k, v) in obj {
            if k == "system" {
                continue;
            }
            writeln!(out, "\"{name}\",{k},\"{}\"", fmt(v).replace('"', "'"))?;
        }
    }
    if let Some(c) = c1 {
        writeln!(out, "\"{}\",c1,{}", a.systems, format_sig(c, dg))?;
    }
    for p in admissibility["pairs"].as_array().into_iter().flatten() {
        let tag = format!(
            "{}|{}",
            p["i"].as_u64().unwrap_or(0) + 1,
            p["j"].as_u64().unwrap_or(0) + 1
        );
        for k in ["gcd", "power_ratio", "field_disjointness"] {
            writeln!(
                out,
                "\"{tag}\",{k},\"{}: {}\"",
                p[k]["status"].as_str().unwrap_or_default(),
                p[k]["detail"]
                    .as_str()
                    .unwrap_or_default()
                    .replace('"', "'")
            )?;
        }
    }
    Ok(())
}

fn scan_corner(a: ScanArgs, out: &mut Vec<u8>, err: &mut dyn Write) -> Result<()> {
    let config: HaltonConfig = a.systems.parse()?;
    warn_admissibility(&config, err);
    let corners = if a.corner.trim() == "all" {
        Corner::all(config.dimension())
    } else {
        vec![a.corner.parse()?]
    };
    if a.trajectory.is_some() && corners.len() != 1 {
        return Err(Error::InvalidArgument(
            "--trajectory needs a single corner".into(),
        ));
    }
    let opts = ScanOptions {
        tol: a.tol,
        slack: a.slack,
        trajectory: a.trajectory.is_some(),
        exec: a.common.exec(),
    };
    let reports = analysis::corner_scan_many(&config, &corners, a.n, &opts)?;
    if let Some(path) = &a.trajectory {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        analysis::write_trajectory_csv(
            &mut f,
            reports[0].trajectory.as_deref().unwrap_or(&[]),
            a.common.digits,
        )?;
        f.flush()?;
    }
    for r in &reports {
        if r.violation {
            let _ = writeln!(
                err,
                "warning: corner ({}) exponent {:.4} exceeds H/2 + slack = {:.4}",
                r.corner, r.empirical_exponent, r.bound
            );
        }
    }
    match a.common.format {
        Format::Json => {
            for r in &reports {
                emit_json(out, &serde_json::to_value(r).expect("serializable"))?;
            }
        }
        Format::Csv => {
            let dg = a.common.digits;
            writeln!(
                out,
                "N,corner,min_distance,argmin,empirical_exponent,argmax_exponent,final_exponent,H,slack,bound,violation"
            )?;
            for r in &reports {
                writeln!(
                    out,
                    "{},\"{}\",{},{},{},{},{},{},{},{},{}",
                    r.n,
                    r.corner,
                    format_sig(r.min_distance, dg),
                    r.argmin,
                    format_sig(r.empirical_exponent, dg),
                    r.argmax_exponent,
                    format_sig(r.final_exponent, dg),
                    r.h,
                    format_sig(r.slack, dg),
                    format_sig(r.bound, dg),
                    r.violation
                )?;
            }
        }
    }
    Ok(())
}

fn read_points(source: &str) -> Result<Vec<Vec<f64>>> {
    let reader: Box<dyn BufRead> = if source == "-" {
        Box::new(BufReader::new(std::io::stdin()))
    } else {
        Box::new(BufReader::new(std::fs::File::open(source)?))
    };
    let mut points = Vec::new();
    let mut skip_first = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if i == 0 && line.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            skip_first = line.split(',').next().map(str::trim) == Some("n");
            continue;
        }
        let cells: Vec<&str> = line.split(',').skip(usize::from(skip_first)).collect();
        let p = cells
            .iter()
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse(t.trim(), e.to_string()))
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(p);
    }
    Ok(points)
}

fn discrepancy(a: DiscrepancyArgs, out: &mut Vec<u8>, err: &mut dyn Write) -> Result<()> {
    let exec = a.common.exec();
    let points = match (&a.source.input, &a.source.systems) {
        (Some(path), _) => read_points(path)?,
        (None, Some(s)) => {
            let config: HaltonConfig = s.parse()?;
            warn_admissibility(&config, err);
            halton::halton_stream_f64(&config, 1, a.count, a.tol, exec)?
        }
        (None, None) => unreachable!("clap requires a point source"),
    };
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let s = points[0].len();
    for p in &points {
        if p.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                got: p.len(),
            });
        }
    }
    let dg = a.common.digits;
    let fit = analysis::min_hyperbolic_product(&points).ok();
    let per: Vec<f64> = if a.per_coordinate || s == 1 {
        (0..s)
            .map(|k| {
                analysis::star_discrepancy_1d(&points.iter().map(|p| p[k]).collect::<Vec<_>>())
            })
            .collect::<Result<_>>()?
    } else {
        vec![analysis::star_discrepancy_nd(&points, a.budget, exec)?]
    };
    let label = if a.per_coordinate && s > 1 {
        "coordinate"
    } else {
        "all"
    };
    if a.common.format == Format::Json {
        return emit_json(
            out,
            &json!({
                "N": points.len(), "s": s, "scope": label, "star_discrepancy": per,
                "min_product": fit.map(|f| f.min), "fitted_r": fit.map(|f| f.fitted_r),
            }),
        );
    }
    writeln!(out, "N,s,scope,star_discrepancy,min_product,fitted_r")?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format_sig(x, dg));
    for (k, d) in per.iter().enumerate() {
        let scope = if label == "coordinate" {
            format!("x{}", k + 1)
        } else {
            label.to_string()
        };
        writeln!(
            out,
            "{},{s},{scope},{},{},{}",
            points.len(),
            format_sig(*d, dg),
            opt(fit.map(|f| f.min)),
            opt(fit.map(|f| f.fitted_r))
        )?;
    }
    Ok(())
}

fn integrate(a: IntegrateArgs, out: &mut Vec<u8>, err: &mut dyn Write) -> Result<()> {
    let config: HaltonConfig = a.systems.parse()?;
    warn_admissibility(&config, err);
    let exps: Vec<f64> = parse_list(&a.exponents, "real exponent")?;
    let corner = match &a.corner {
        Some(c) => c.parse()?,
        None => Corner::origin(exps.len()),
    };
    let f = qmc::make_integrand(exps, corner)?;
    let ladder: Vec<usize> = parse_list(&a.ladder, "prefix length")?;
    let seed = a.baseline.then_some(a.seed);
    let study = qmc::convergence_study(&config, &f, &ladder, a.tol, seed, a.common.exec())?;
    match a.common.format {
        Format::Json => emit_json(out, &serde_json::to_value(&study).expect("serializable")),
        Format::Csv => qmc::write_study_csv(out, &study, a.common.digits),
    }
}
