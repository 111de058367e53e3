//! s-dimensional β-adic Halton points `(ψ_1(n), …, ψ_s(n))` and the
//! admissibility checks on a tuple of numeration systems.

use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{ratio_interval, Interval};
use crate::monna;
use crate::numeration::NumerationSystem;
use crate::par::{self, Execution};
use crate::roots::{self, Irreducibility};

/// Largest power tried by the power-ratio check.
pub const POWER_RATIO_MAX_EXP: u32 = 12;
/// Largest denominator the power-ratio check looks for.
pub const POWER_RATIO_MAX_DEN: u64 = 10_000;
const POWER_RATIO_PREC: u32 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    HeuristicPass,
    Unknown,
}

impl std::fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::HeuristicPass => "heuristic-pass",
            CheckStatus::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub status: CheckStatus,
    pub detail: String,
}

impl Check {
    fn new(status: CheckStatus, detail: impl Into<String>) -> Self {
        Check {
            status,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub i: usize,
    pub j: usize,
    pub gcd: Check,
    pub power_ratio: Check,
    pub field_disjointness: Check,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AdmissibilityReport {
    pub pairs: Vec<PairCheck>,
}

impl AdmissibilityReport {
    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.pairs
            .iter()
            .flat_map(|p| [&p.gcd, &p.power_ratio, &p.field_disjointness])
    }

    /// True when no check failed outright.
    pub fn no_failures(&self) -> bool {
        self.checks().all(|c| c.status != CheckStatus::Fail)
    }

    /// Human-readable warnings for every failed or undecided check.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for p in &self.pairs {
            for (name, c) in [
                ("gcd", &p.gcd),
                ("power-ratio", &p.power_ratio),
                ("field-disjointness", &p.field_disjointness),
            ] {
                if matches!(c.status, CheckStatus::Fail | CheckStatus::Unknown) {
                    out.push(format!(
                        "systems {} and {}: {name} {}: {}",
                        p.i + 1,
                        p.j + 1,
                        c.status,
                        c.detail
                    ));
                }
            }
        }
        out
    }
}

/// An ordered tuple of numeration systems with non-increasing coefficients.
#[derive(Clone, Debug)]
pub struct HaltonConfig {
    systems: Vec<NumerationSystem>,
    admissibility: AdmissibilityReport,
}

impl HaltonConfig {
    pub fn new(systems: Vec<NumerationSystem>) -> Result<Self> {
        if systems.is_empty() {
            return Err(Error::InvalidArgument(
                "a Halton configuration needs at least one system".into(),
            ));
        }
        if let Some(s) = systems.iter().find(|s| !s.is_non_increasing()) {
            return Err(Error::InvalidCoefficients(format!(
                "Halton coordinates need non-increasing coefficients, got ({s})"
            )));
        }
        let admissibility = check_admissibility(&systems)?;
        Ok(HaltonConfig {
            systems,
            admissibility,
        })
    }

    pub fn systems(&self) -> &[NumerationSystem] {
        &self.systems
    }

    pub fn dimension(&self) -> usize {
        self.systems.len()
    }

    pub fn admissibility(&self) -> &AdmissibilityReport {
        &self.admissibility
    }
}

impl std::str::FromStr for HaltonConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        HaltonConfig::new(crate::numeration::parse_systems(s)?)
    }
}

/// Runs the gcd, power-ratio and field-disjointness checks on every pair.
pub fn check_admissibility(systems: &[NumerationSystem]) -> Result<AdmissibilityReport> {
    let mut pairs = Vec::new();
    for i in 0..systems.len() {
        for j in i + 1..systems.len() {
            let (a, b) = (&systems[i], &systems[j]);
            pairs.push(PairCheck {
                i,
                j,
                gcd: gcd_check(a, b),
                power_ratio: power_ratio_check(a, b)?,
                field_disjointness: field_check(a, b),
            });
        }
    }
    Ok(AdmissibilityReport { pairs })
}

fn gcd_check(a: &NumerationSystem, b: &NumerationSystem) -> Check {
    let g = a
        .coefficients()
        .iter()
        .chain(b.coefficients())
        .fold(0u32, |acc, &x| acc.gcd(&x));
    if g == 1 {
        Check::new(CheckStatus::Pass, "gcd 1")
    } else {
        Check::new(CheckStatus::Fail, format!("common factor {g}"))
    }
}

/// Convergents `p/q` of `x` with `q ≤ max_den`.
fn convergents(x: f64, max_den: u64) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::new();
    let (mut p0, mut q0) = (BigInt::one(), BigInt::from(0));
    let (mut p1, mut q1) = (BigInt::from(0), BigInt::one());
    let mut y = x;
    for _ in 0..64 {
        if !y.is_finite() || y.abs() > 1e300 {
            break;
        }
        let a = y.floor();
        let ai = BigInt::from(a as i128);
        let p = &ai * &p0 + &p1;
        let q = &ai * &q0 + &q1;
        if q > BigInt::from(max_den) {
            break;
        }
        out.push((p.clone(), q.clone()));
        p1 = std::mem::replace(&mut p0, p);
        q1 = std::mem::replace(&mut q0, q);
        let frac = y - a;
        if frac < 1e-12 {
            break;
        }
        y = 1.0 / frac;
    }
    out
}

fn power_ratio_check(a: &NumerationSystem, b: &NumerationSystem) -> Result<Check> {
    let ca = roots::beta_context(a, POWER_RATIO_PREC)?;
    let cb = roots::beta_context(b, POWER_RATIO_PREC)?;
    for k in 1..=POWER_RATIO_MAX_EXP {
        let num = ca.beta().powi(k);
        for l in 1..=POWER_RATIO_MAX_EXP {
            let r = &num * &cb.inv_beta().powi(l);
            for (p, q) in convergents(r.mid_f64(), POWER_RATIO_MAX_DEN) {
                if r.overlaps(&ratio_interval(&p, &q, POWER_RATIO_PREC)) {
                    return Ok(Check::new(
                        CheckStatus::Fail,
                        format!("β_i^{k}/β_j^{l} is indistinguishable from {p}/{q}"),
                    ));
                }
            }
        }
    }
    Ok(Check::new(
        CheckStatus::HeuristicPass,
        format!(
            "no rational with denominator ≤ {POWER_RATIO_MAX_DEN} near β_i^k/β_j^l for k,l ≤ {POWER_RATIO_MAX_EXP}"
        ),
    ))
}

/// Square-free part of the discriminant, or `None` when it is a square.
fn quadratic_subfield(sys: &NumerationSystem) -> Option<BigInt> {
    let part = roots::squarefree_part(&roots::discriminant(&roots::char_poly(sys)));
    (!part.is_one()).then_some(part)
}

fn field_check(a: &NumerationSystem, b: &NumerationSystem) -> Check {
    if a.degree() == 1 || b.degree() == 1 {
        return Check::new(CheckStatus::Pass, "one splitting field is Q");
    }
    for s in [a, b] {
        match roots::irreducibility(&roots::char_poly(s)) {
            Irreducibility::Irreducible => {}
            Irreducibility::Reducible(f) => {
                return Check::new(CheckStatus::Unknown, format!("({s}) has factor {f}"));
            }
            Irreducibility::Unknown => {
                return Check::new(
                    CheckStatus::Unknown,
                    format!("irreducibility of ({s}) undecided"),
                );
            }
        }
    }
    let (qa, qb) = (quadratic_subfield(a), quadratic_subfield(b));
    if let (Some(x), Some(y)) = (&qa, &qb) {
        if x == y {
            return Check::new(
                CheckStatus::Fail,
                format!("both splitting fields contain Q(√{x})"),
            );
        }
    }
    if a.degree() == 2 && b.degree() == 2 {
        return Check::new(CheckStatus::Pass, "distinct quadratic fields");
    }
    Check::new(
        CheckStatus::HeuristicPass,
        "no common quadratic subfield from discriminants",
    )
}

/// Coordinate enclosures of the `n`-th point, each of width at most `tol`.
pub fn halton_point(config: &HaltonConfig, n: u64, tol: f64) -> Result<Vec<Interval>> {
    let n = BigUint::from(n);
    config
        .systems
        .iter()
        .map(|s| monna::psi(s, &n, tol))
        .collect()
}

/// `halton_point` rounded to the nearest doubles.
pub fn halton_point_f64(config: &HaltonConfig, n: u64, tol: f64) -> Result<Vec<f64>> {
    Ok(halton_point(config, n, tol)?
        .iter()
        .map(Interval::mid_f64)
        .collect())
}

fn check_range(n_start: u64, count: u64) -> Result<std::ops::Range<u64>> {
    let end = n_start
        .checked_add(count)
        .ok_or_else(|| Error::InvalidArgument("index range overflows u64".into()))?;
    Ok(n_start..end)
}

/// Points `n_start, …, n_start + count − 1`, identical to repeated [`halton_point`].
pub fn halton_stream(
    config: &HaltonConfig,
    n_start: u64,
    count: u64,
    tol: f64,
    exec: Execution,
) -> Result<Vec<Vec<Interval>>> {
    let range = check_range(n_start, count)?;
    par::try_map_range(exec, range, |n| halton_point(config, n, tol))
}

/// [`halton_stream`] rounded to doubles.
pub fn halton_stream_f64(
    config: &HaltonConfig,
    n_start: u64,
    count: u64,
    tol: f64,
    exec: Execution,
) -> Result<Vec<Vec<f64>>> {
    let range = check_range(n_start, count)?;
    par::try_map_range(exec, range, |n| halton_point_f64(config, n, tol))
}

/// Feeds the stream to `sink` in chunks of `chunk` points, keeping memory
/// bounded by one chunk.
pub fn for_each_chunk<F>(
    config: &HaltonConfig,
    n_start: u64,
    count: u64,
    chunk: u64,
    tol: f64,
    exec: Execution,
    mut sink: F,
) -> Result<()>
where
    F: FnMut(u64, &[Vec<f64>]) -> Result<()>,
{
    let range = check_range(n_start, count)?;
    let chunk = chunk.max(1);
    let mut start = range.start;
    while start < range.end {
        let len = chunk.min(range.end - start);
        let pts = halton_stream_f64(config, start, len, tol, exec)?;
        sink(start, &pts)?;
        start += len;
    }
    Ok(())
}

/// `x` with `digits` significant digits in positional notation.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 {
            format!("{:.*}", digits.saturating_sub(1), 0.0)
        } else {
            x.to_string()
        };
    }
    let mag = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Writes `n,x1,…,xs` rows.
pub fn write_csv<W: Write>(
    out: &mut W,
    config: &HaltonConfig,
    n_start: u64,
    count: u64,
    tol: f64,
    digits: usize,
    exec: Execution,
) -> Result<()> {
    let header: Vec<String> = (1..=config.dimension()).map(|i| format!("x{i}")).collect();
    writeln!(out, "n,{}", header.join(","))?;
    for_each_chunk(config, n_start, count, 4096, tol, exec, |start, pts| {
        for (off, p) in pts.iter().enumerate() {
            let row: Vec<String> = p.iter().map(|&x| format_sig(x, digits)).collect();
            writeln!(out, "{},{}", start + off as u64, row.join(","))?;
        }
        Ok(())
    })
}

/// Point counts in the `cells^s` equal sub-boxes, row-major by coordinate.
pub fn box_counts(points: &[Vec<f64>], cells: usize) -> Vec<u64> {
    let s = points.first().map_or(0, Vec::len);
    let mut counts = vec![0u64; cells.pow(s as u32)];
    for p in points {
        let mut idx = 0usize;
        for &x in p {
            let c = ((x * cells as f64).floor() as usize).min(cells - 1);
            idx = idx * cells + c;
        }
        counts[idx] += 1;
    }
    counts
}
