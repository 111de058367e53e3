//! Quasi-Monte Carlo integration of separable corner singularities
//! `f(x) = ∏ |x_i − h_i|^{−A_i}`, whose integral over the unit cube is
//! `∏ 1/(1 − A_i)`.

use std::io::Write;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::Corner;
use crate::error::{Error, Result};
use crate::halton::{format_sig, halton_stream_f64, HaltonConfig};
use crate::par::{self, Execution};

/// Seed of the pseudorandom baseline unless the caller overrides it.
pub const DEFAULT_BASELINE_SEED: u64 = 20_240_601;

#[derive(Clone, Debug, PartialEq)]
pub struct SingularIntegrand {
    a: Vec<f64>,
    h: Corner,
    exact: f64,
}

impl SingularIntegrand {
    pub fn exponents(&self) -> &[f64] {
        &self.a
    }

    pub fn corner(&self) -> &Corner {
        &self.h
    }

    pub fn exact_integral(&self) -> f64 {
        self.exact
    }

    pub fn dimension(&self) -> usize {
        self.a.len()
    }

    /// `f(x)`; infinite when `x` touches the singular face.
    pub fn eval(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.a)
            .zip(self.h.coords())
            .map(|((&xi, &ai), &hi)| (xi - hi as f64).abs().powf(-ai))
            .product()
    }
}

pub fn make_integrand(a: Vec<f64>, h: Corner) -> Result<SingularIntegrand> {
    if a.len() != h.dimension() {
        return Err(Error::DimensionMismatch {
            expected: h.dimension(),
            got: a.len(),
        });
    }
    if let Some(x) = a.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "singularity exponents must lie in (0, 1), got {x}"
        )));
    }
    let exact = a.iter().map(|&x| 1.0 / (1.0 - x)).product();
    Ok(SingularIntegrand { a, h, exact })
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegrationReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub estimate: f64,
    pub exact: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    /// Smallest `∏ |x_i − h_i|` among the points.
    pub min_hyperbolic_product_seen: f64,
}

fn report_from_values(values: &[f64], products: &[f64], exact: f64) -> IntegrationReport {
    let n = values.len();
    let estimate = par::pairwise_sum(values) / n as f64;
    let abs_error = (estimate - exact).abs();
    IntegrationReport {
        n,
        estimate,
        exact,
        abs_error,
        rel_error: abs_error / exact.abs(),
        min_hyperbolic_product_seen: products.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// `(f(x_n), ∏ |x_n − h|)` for every point; the first singular point is an error.
fn evaluate(
    points: &[Vec<f64>],
    f: &SingularIntegrand,
    exec: Execution,
) -> Result<(Vec<f64>, Vec<f64>)> {
    for p in points {
        if p.len() != f.dimension() {
            return Err(Error::DimensionMismatch {
                expected: f.dimension(),
                got: p.len(),
            });
        }
    }
    let pairs = par::map_slice(exec, points, |p| {
        let prod: f64 = p
            .iter()
            .zip(f.corner().coords())
            .map(|(&x, &h)| (x - h as f64).abs())
            .product();
        (f.eval(p), prod)
    });
    if let Some(i) = pairs
        .iter()
        .position(|(v, prod)| !v.is_finite() || *prod == 0.0)
    {
        return Err(Error::Singular { index: i + 1 });
    }
    Ok(pairs.into_iter().unzip())
}

/// `(1/N) Σ f(x_n)` with a fixed pairwise summation order.
pub fn qmc_integrate(
    points: &[Vec<f64>],
    f: &SingularIntegrand,
    exec: Execution,
) -> Result<IntegrationReport> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (values, products) = evaluate(points, f, exec)?;
    Ok(report_from_values(&values, &products, f.exact))
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyRow {
    #[serde(flatten)]
    pub report: IntegrationReport,
    pub baseline_error: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<StudyRow>,
    pub baseline_seed: Option<u64>,
}

/// `N` uniform points in `(0,1)^s` from ChaCha8 seeded with `seed`, drawn
/// point by point, coordinate by coordinate.
pub fn baseline_points(s: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..s).map(|_| rng.sample(Open01)).collect())
        .collect()
}

/// Estimates along the prefix lengths in `ladder` using the points
/// `n = 1, …, max(ladder)`; optionally the same for a pseudorandom baseline.
pub fn convergence_study(
    config: &HaltonConfig,
    f: &SingularIntegrand,
    ladder: &[usize],
    tol: f64,
    baseline_seed: Option<u64>,
    exec: Execution,
) -> Result<ConvergenceStudy> {
    if ladder.is_empty() || ladder[0] == 0 {
        return Err(Error::InvalidArgument(
            "ladder must start with a positive length".into(),
        ));
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "ladder must be strictly increasing, got {ladder:?}"
        )));
    }
    if config.dimension() != f.dimension() {
        return Err(Error::DimensionMismatch {
            expected: config.dimension(),
            got: f.dimension(),
        });
    }
    let max = *ladder.last().expect("non-empty");
    let points = halton_stream_f64(config, 1, max as u64, tol, exec)?;
    let (values, products) = evaluate(&points, f, exec)?;
    let baseline = baseline_seed
        .map(|seed| {
            let pts = baseline_points(f.dimension(), max, seed);
            evaluate(&pts, f, exec)
        })
        .transpose()?;
    let rows = ladder
        .iter()
        .map(|&n| StudyRow {
            report: report_from_values(&values[..n], &products[..n], f.exact),
            baseline_error: baseline
                .as_ref()
                .map(|(v, p)| report_from_values(&v[..n], &p[..n], f.exact).abs_error),
        })
        .collect();
    Ok(ConvergenceStudy {
        rows,
        baseline_seed,
    })
}

/// Writes `N,estimate,exact,abs_error,rel_error,min_product,baseline_error`.
pub fn write_study_csv<W: Write>(
    out: &mut W,
    study: &ConvergenceStudy,
    digits: usize,
) -> Result<()> {
    writeln!(
        out,
        "N,estimate,exact,abs_error,rel_error,min_product,baseline_error"
    )?;
    for r in &study.rows {
        let b = r
            .baseline_error
            .map_or_else(String::new, |e| format_sig(e, digits));
        let q = &r.report;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            q.n,
            format_sig(q.estimate, digits),
            format_sig(q.exact, digits),
            format_sig(q.abs_error, digits),
            format_sig(q.rel_error, digits),
            format_sig(q.min_hyperbolic_product_seen, digits),
            b
        )?;
    }
    Ok(())
}
