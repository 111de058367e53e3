//! Corner distances, corner-avoidance scans and star discrepancy.

use std::io::Write;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::halton::{format_sig, HaltonConfig};
use crate::interval::{Interval, DEFAULT_PRECISION};
use crate::monna;
use crate::par::{self, Execution};
use crate::roots::{with_tolerance, MAX_PRECISION};

/// Default margin above `H/2` allowed by a corner scan.
pub const DEFAULT_SLACK: f64 = 0.5;
/// Default work limit for [`star_discrepancy_nd`].
pub const DEFAULT_ND_BUDGET: f64 = 1.5e9;

/// A vertex `h ∈ {0,1}^s` of the unit cube.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corner(Vec<u8>);

impl Corner {
    pub fn new(h: Vec<u8>) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::InvalidArgument(
                "corner must have at least one coordinate".into(),
            ));
        }
        if let Some(&b) = h.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidArgument(format!(
                "corner coordinates are 0 or 1, got {b}"
            )));
        }
        Ok(Corner(h))
    }

    pub fn origin(s: usize) -> Self {
        Corner(vec![0; s])
    }

    pub fn coords(&self) -> &[u8] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    /// All `2^s` corners in binary order.
    pub fn all(s: usize) -> Vec<Corner> {
        (0..1u32 << s)
            .map(|m| Corner((0..s).map(|i| ((m >> (s - 1 - i)) & 1) as u8).collect()))
            .collect()
    }
}

impl std::fmt::Display for Corner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u8::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl std::str::FromStr for Corner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let h = s
            .split(',')
            .map(|t| match t.trim() {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(Error::parse(other, "corner coordinates are 0 or 1")),
            })
            .collect::<Result<Vec<u8>>>()?;
        Corner::new(h)
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `∏ |x_i − h_i|`.
pub fn hyperbolic_distance(x: &[f64], h: &Corner) -> Result<f64> {
    check_dim(h.dimension(), x.len())?;
    Ok(x.iter()
        .zip(h.coords())
        .map(|(&xi, &hi)| (xi - hi as f64).abs())
        .product())
}

/// Interval enclosure of `∏ |x_i − h_i|` for coordinates in `[0, 1]`.
pub fn hyperbolic_distance_interval(x: &[Interval], h: &Corner) -> Result<Interval> {
    check_dim(h.dimension(), x.len())?;
    let prec = x.first().map_or(DEFAULT_PRECISION, Interval::precision);
    let mut acc = Interval::one(prec);
    for (xi, &hi) in x.iter().zip(h.coords()) {
        let f = if hi == 0 {
            xi.abs()
        } else {
            xi.one_minus().abs()
        };
        acc = &acc * &f;
    }
    Ok(acc)
}

/// Exponent `H` of the corner-avoidance bound: 2 at the origin, `s` at the
/// all-ones corner, `1 + Σ h_i` otherwise.
pub fn corner_exponent(h: &Corner) -> u32 {
    let ones = h.coords().iter().filter(|&&b| b == 1).count() as u32;
    let s = h.dimension() as u32;
    if ones == 0 {
        2
    } else if ones == s {
        s
    } else {
        1 + ones
    }
}

/// `∏_i β_i^{d_i−1} / (β_i^{d_i−1} + … + 1)`.
pub fn c1_constant(config: &HaltonConfig, tol: f64) -> Result<Interval> {
    let per = tol / config.dimension() as f64;
    let mut acc: Option<Interval> = None;
    for s in config.systems() {
        let w = with_tolerance(s, per, "c1", |ctx| Ok(ctx.weight().clone()))?;
        acc = Some(match acc {
            None => w,
            Some(a) => &a * &w.with_precision(a.precision()),
        });
    }
    Ok(acc.expect("config has at least one system"))
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub corner: String,
    /// Certified lower bound of the smallest distance over `2 ≤ n ≤ N`.
    pub min_distance: f64,
    pub argmin: u64,
    /// `max_n −ln d_n / ln n`, evaluated on certified lower bounds.
    pub empirical_exponent: f64,
    pub argmax_exponent: u64,
    /// `−ln(min_distance) / ln N`.
    pub final_exponent: f64,
    #[serde(rename = "H")]
    pub h: u32,
    pub slack: f64,
    /// `H/2 + slack`.
    pub bound: f64,
    pub violation: bool,
    #[serde(skip)]
    pub trajectory: Option<Vec<TrajectoryRow>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub n: u64,
    pub distance: f64,
    pub running_exponent: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    pub tol: f64,
    pub slack: f64,
    pub trajectory: bool,
    pub exec: Execution,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            tol: 1e-15,
            slack: DEFAULT_SLACK,
            trajectory: false,
            exec: Execution::default(),
        }
    }
}

fn start_precision(tol: f64) -> Result<u32> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let bits = (-tol.log2()).ceil().max(0.0) as u32 + 16;
    Ok(bits.clamp(DEFAULT_PRECISION, MAX_PRECISION))
}

/// `ψ` enclosures of `n = 2..=N`, one vector per system.
fn scan_points(
    config: &HaltonConfig,
    big_n: u64,
    prec: u32,
    exec: Execution,
) -> Result<Vec<Vec<Interval>>> {
    config
        .systems()
        .iter()
        .map(|s| monna::psi_batch(s, 2..big_n + 1, prec, exec))
        .collect()
}

/// Certified positive lower bound of the distance of point `n`, raising the
/// precision when the first enclosure reaches zero.
fn certified_distance(
    config: &HaltonConfig,
    coords: Vec<Interval>,
    n: u64,
    h: &Corner,
) -> Result<f64> {
    let mut d = hyperbolic_distance_interval(&coords, h)?;
    let mut prec = coords[0].precision();
    loop {
        let lo = d.lo_f64();
        if lo > 0.0 {
            return Ok(lo);
        }
        if prec >= MAX_PRECISION {
            return Err(Error::PrecisionExhausted(format!(
                "distance of point {n} to corner ({h}) not separated from 0 at {prec} bits"
            )));
        }
        prec *= 2;
        let big = BigUint::from(n);
        let x = config
            .systems()
            .iter()
            .map(|s| monna::psi_at(s, &big, prec))
            .collect::<Result<Vec<_>>>()?;
        d = hyperbolic_distance_interval(&x, h)?;
    }
}

fn scan_one(
    config: &HaltonConfig,
    points: &[Vec<Interval>],
    big_n: u64,
    h: &Corner,
    opts: &ScanOptions,
) -> Result<ScanReport> {
    check_dim(config.dimension(), h.dimension())?;
    let dists = par::try_map_range(opts.exec, 2..big_n + 1, |n| {
        let i = (n - 2) as usize;
        let coords: Vec<Interval> = points.iter().map(|p| p[i].clone()).collect();
        certified_distance(config, coords, n, h)
    })?;
    let mut min_d = f64::INFINITY;
    let mut argmin = 2;
    let mut max_e = f64::NEG_INFINITY;
    let mut argmax = 2;
    let mut traj = opts.trajectory.then(|| Vec::with_capacity(dists.len()));
    for (i, &d) in dists.iter().enumerate() {
        let n = i as u64 + 2;
        if d < min_d {
            min_d = d;
            argmin = n;
        }
        let e = -d.ln() / (n as f64).ln();
        if e > max_e {
            max_e = e;
            argmax = n;
        }
        if let Some(t) = traj.as_mut() {
            t.push(TrajectoryRow {
                n,
                distance: d,
                running_exponent: max_e,
            });
        }
    }
    let h_exp = corner_exponent(h);
    let bound = h_exp as f64 / 2.0 + opts.slack;
    Ok(ScanReport {
        n: big_n,
        corner: h.to_string(),
        min_distance: min_d,
        argmin,
        empirical_exponent: max_e,
        argmax_exponent: argmax,
        final_exponent: -min_d.ln() / (big_n as f64).ln(),
        h: h_exp,
        slack: opts.slack,
        bound,
        violation: max_e > bound,
        trajectory: traj,
    })
}

/// Scans `n = 2..=N` for the hyperbolic distance of the Halton points to `h`.
pub fn corner_scan(
    config: &HaltonConfig,
    h: &Corner,
    big_n: u64,
    opts: &ScanOptions,
) -> Result<ScanReport> {
    Ok(corner_scan_many(config, std::slice::from_ref(h), big_n, opts)?.remove(0))
}

/// [`corner_scan`] for several corners sharing one evaluation of the points.
pub fn corner_scan_many(
    config: &HaltonConfig,
    corners: &[Corner],
    big_n: u64,
    opts: &ScanOptions,
) -> Result<Vec<ScanReport>> {
    if big_n < 2 {
        return Err(Error::InvalidArgument(format!(
            "scan length must be at least 2, got {big_n}"
        )));
    }
    for h in corners {
        check_dim(config.dimension(), h.dimension())?;
    }
    let points = scan_points(config, big_n, start_precision(opts.tol)?, opts.exec)?;
    corners
        .iter()
        .map(|h| scan_one(config, &points, big_n, h, opts))
        .collect()
}

/// Writes `n,distance,running_exponent` rows.
pub fn write_trajectory_csv<W: Write>(
    out: &mut W,
    rows: &[TrajectoryRow],
    digits: usize,
) -> Result<()> {
    writeln!(out, "n,distance,running_exponent")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{}",
            r.n,
            format_sig(r.distance, digits),
            format_sig(r.running_exponent, digits)
        )?;
    }
    Ok(())
}

fn check_unit(points: &[f64]) -> Result<()> {
    if let Some(x) = points.iter().find(|x| !(0.0..1.0).contains(*x)) {
        return Err(Error::InvalidArgument(format!(
            "point coordinate {x} outside [0, 1)"
        )));
    }
    Ok(())
}

/// One-dimensional star discrepancy `1/(2N) + max_i |x_(i) − (2i−1)/(2N)|`.
pub fn star_discrepancy_1d(points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    check_unit(points)?;
    let mut xs = points.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let dev = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - (2 * i + 1) as f64 / (2.0 * n)).abs())
        .fold(0.0, f64::max);
    Ok(1.0 / (2.0 * n) + dev)
}

/// Sorted distinct coordinate values of dimension `k`, followed by 1.
fn grid(points: &[Vec<f64>], k: usize) -> Vec<f64> {
    let mut g: Vec<f64> = points.iter().map(|p| p[k]).collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    g.push(1.0);
    g
}

struct Grid<'a> {
    points: &'a [Vec<f64>],
    grids: Vec<Vec<f64>>,
    n: f64,
}

impl Grid<'_> {
    /// Largest deviation over boxes whose first `k` upper corners are fixed;
    /// `open` holds the points strictly inside those, `closed` the points
    /// inside their closure. Both lists are sorted by the last coordinate.
    fn search(&self, k: usize, vol: f64, open: &[usize], closed: &[usize]) -> f64 {
        let s = self.grids.len();
        if k + 1 == s {
            return self.sweep_last(vol, open, closed);
        }
        let mut best = 0.0f64;
        for &v in &self.grids[k] {
            let o: Vec<usize> = open
                .iter()
                .copied()
                .filter(|&i| self.points[i][k] < v)
                .collect();
            let c: Vec<usize> = closed
                .iter()
                .copied()
                .filter(|&i| self.points[i][k] <= v)
                .collect();
            best = best.max(self.search(k + 1, vol * v, &o, &c));
        }
        best
    }

    fn sweep_last(&self, vol: f64, open: &[usize], closed: &[usize]) -> f64 {
        let k = self.grids.len() - 1;
        let (mut io, mut ic) = (0, 0);
        let mut best = 0.0f64;
        for &v in &self.grids[k] {
            while io < open.len() && self.points[open[io]][k] < v {
                io += 1;
            }
            while ic < closed.len() && self.points[closed[ic]][k] <= v {
                ic += 1;
            }
            let area = vol * v;
            best = best
                .max(area - io as f64 / self.n)
                .max(ic as f64 / self.n - area);
        }
        best
    }
}

/// Work estimate `(N+1)^{s−1} · N` for [`star_discrepancy_nd`].
pub fn star_discrepancy_cost(n: usize, s: usize) -> f64 {
    (n as f64 + 1.0).powi(s as i32 - 1) * n as f64
}

/// Exact star discrepancy over the critical grid of the point coordinates.
pub fn star_discrepancy_nd(points: &[Vec<f64>], budget: f64, exec: Execution) -> Result<f64> {
    let Some(first) = points.first() else {
        return Err(Error::EmptyInput);
    };
    let s = first.len();
    if s == 0 {
        return Err(Error::InvalidArgument(
            "points must have at least one coordinate".into(),
        ));
    }
    for p in points {
        check_dim(s, p.len())?;
        check_unit(p)?;
    }
    let cost = star_discrepancy_cost(points.len(), s);
    if cost > budget {
        return Err(Error::BudgetExceeded(format!(
            "exact discrepancy of {} points in dimension {s} needs about {cost:.2e} steps (budget {budget:.2e}); \
             use the one-dimensional projection or fewer points",
            points.len()
        )));
    }
    let g = Grid {
        points,
        grids: (0..s).map(|k| grid(points, k)).collect(),
        n: points.len() as f64,
    };
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a][s - 1].total_cmp(&points[b][s - 1]));
    if s == 1 {
        return Ok(g.sweep_last(1.0, &order, &order));
    }
    let best = par::map_slice(exec, &g.grids[0], |&v| {
        let o: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| points[i][0] < v)
            .collect();
        let c: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| points[i][0] <= v)
            .collect();
        g.search(1, v, &o, &c)
    });
    Ok(best.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HyperbolicFit {
    pub min: f64,
    pub argmin: usize,
    /// Least-squares slope of `−ln(prefix minimum)` against `ln N` over
    /// prefix lengths `2, 4, 8, …, N`.
    pub fitted_r: f64,
}

/// Smallest coordinate product over the points and the growth rate of its prefix minima.
pub fn min_hyperbolic_product(points: &[Vec<f64>]) -> Result<HyperbolicFit> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut prefix_min = Vec::with_capacity(points.len());
    let (mut min, mut argmin) = (f64::INFINITY, 0);
    for (i, p) in points.iter().enumerate() {
        let prod: f64 = p.iter().product();
        if prod <= 0.0 {
            return Err(Error::Singular { index: i + 1 });
        }
        if prod < min {
            min = prod;
            argmin = i + 1;
        }
        prefix_min.push(min);
    }
    let mut ladder: Vec<usize> = std::iter::successors(Some(2usize), |&m| m.checked_mul(2))
        .take_while(|&m| m <= points.len())
        .collect();
    if points.len() >= 2 && ladder.last() != Some(&points.len()) {
        ladder.push(points.len());
    }
    let xy: Vec<(f64, f64)> = ladder
        .iter()
        .map(|&m| ((m as f64).ln(), -prefix_min[m - 1].ln()))
        .collect();
    Ok(HyperbolicFit {
        min,
        argmin,
        fitted_r: slope(&xy),
    })
}

fn slope(xy: &[(f64, f64)]) -> f64 {
    if xy.len() < 2 {
        return 0.0;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
