//! Cylinder sets, the odometer-invariant measure and the Monna maps.
//!
//! A cylinder `Z(ε_0 … ε_{K−1})` has measure
//!
//! ```text
//!          F_{K,0} β^{d−1} + (F_{K,1} − a_0 F_{K,0}) β^{d−2} + …
//! μ(Z) = ─────────────────────────────────────────────────────────
//!                   β^K (β^{d−1} + β^{d−2} + … + 1)
//! ```
//!
//! where `F_{K,r}` counts the integers below `G_{K+r}` whose expansion starts
//! with the prefix. The extended map `ψ` sends `n` to the total measure of
//! the cylinders lexicographically left of it, digit by digit.
//!
//! All β-dependent quantities are written as `weight · Σ_m c_m β^{−(m+1)}`
//! with exact integer coefficients `c_m`, then enclosed with one Horner pass
//! over `1/β`. Here `weight = β^{d−1} / (β^{d−1} + … + 1)`.

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::interval::{Interval, DEFAULT_PRECISION};
use crate::numeration::{DigitString, NumerationSystem};
use crate::roots::{beta_context, with_tolerance, BetaContext, MAX_PRECISION};

/// `μ(Z)` enclosure for a cylinder of length `len`.
#[derive(Clone, Debug)]
pub struct MeasureValue {
    pub value: Interval,
    pub len: usize,
}

fn require_non_increasing(sys: &NumerationSystem, what: &str) -> Result<()> {
    if sys.is_non_increasing() {
        Ok(())
    } else {
        Err(Error::InvalidCoefficients(format!(
            "{what} needs non-increasing coefficients, got ({sys})"
        )))
    }
}

/// Number of digit tails for positions `pos..end` (digits in `[0, a_0]`) that
/// keep the word regular, given the prefix sum `sum` below `G_pos`.
fn count_tails(g: &[BigUint], a0: u32, sum: &BigUint, pos: usize, end: usize) -> u64 {
    if pos == end {
        return 1;
    }
    let mut total = 0u64;
    let mut s = sum.clone();
    for _ in 0..=a0 {
        if s >= g[pos + 1] {
            // larger digits only increase the prefix sum
            break;
        }
        total += count_tails(g, a0, &s, pos + 1, end);
        s += &g[pos];
    }
    total
}

/// `(F_{K,0}, …, F_{K,d−1})` for a regular prefix of length `len` with value `value`.
fn prefix_counts(g: &[BigUint], a0: u32, d: usize, value: &BigUint, len: usize) -> Vec<u64> {
    (0..d)
        .map(|r| count_tails(g, a0, value, len, len + r))
        .collect()
}

/// Numerator coefficients `F_{K,j} − a_0 F_{K,j−1} − … − a_{j−1} F_{K,0}`.
fn numerator_coeffs(coeffs: &[u32], counts: &[u64]) -> Vec<i128> {
    (0..counts.len())
        .map(|j| {
            let mut c = counts[j] as i128;
            for i in 0..j {
                c -= coeffs[i] as i128 * counts[j - 1 - i] as i128;
            }
            c
        })
        .collect()
}

fn check_prefix(sys: &NumerationSystem, prefix: &DigitString) -> Result<()> {
    if prefix.is_empty() {
        return Err(Error::InvalidArgument(
            "cylinder prefix must be non-empty".into(),
        ));
    }
    if !sys.is_regular(prefix) {
        return Err(Error::Irregular(prefix.to_string()));
    }
    Ok(())
}

/// `F_{K,r} = #{n < G_{K+r} : expansion of n starts with prefix}`.
pub fn cylinder_count(sys: &NumerationSystem, prefix: &DigitString, r: usize) -> Result<BigUint> {
    check_prefix(sys, prefix)?;
    if r >= sys.degree() {
        return Err(Error::InvalidArgument(format!(
            "r = {r} outside [0, {}]",
            sys.degree() - 1
        )));
    }
    let value = sys.value(prefix);
    let k = prefix.len();
    let g = sys.g_slice(k + r + 1);
    Ok(BigUint::from(count_tails(&g, sys.a0(), &value, k, k + r)))
}

/// Integer series of `μ(Z) / weight` for a cylinder given by its length and value.
fn measure_series(
    sys: &NumerationSystem,
    g: &[BigUint],
    value: &BigUint,
    len: usize,
) -> Vec<BigInt> {
    let d = sys.degree();
    let counts = prefix_counts(g, sys.a0(), d, value, len);
    let c = numerator_coeffs(sys.coefficients(), &counts);
    let mut series = vec![BigInt::zero(); len + d - 1];
    for (j, cj) in c.into_iter().enumerate() {
        series[len - 1 + j] += BigInt::from(cj);
    }
    series
}

/// `μ(Z(prefix))` enclosed to width `tol`.
pub fn cylinder_measure(
    sys: &NumerationSystem,
    prefix: &DigitString,
    tol: f64,
) -> Result<MeasureValue> {
    require_non_increasing(sys, "cylinder_measure")?;
    check_prefix(sys, prefix)?;
    let len = prefix.len();
    let value = sys.value(prefix);
    let series = {
        let g = sys.g_slice(len + sys.degree());
        measure_series(sys, &g, &value, len)
    };
    let v = with_tolerance(sys, tol, "cylinder measure", |ctx| {
        Ok(ctx.weight() * &ctx.eval_series(&series))
    })?;
    Ok(MeasureValue { value: v, len })
}

/// Integer series of `ψ(n) / weight`.
pub fn psi_series(sys: &NumerationSystem, n: &BigUint) -> Result<Vec<BigInt>> {
    require_non_increasing(sys, "psi")?;
    let w = sys.expand(n);
    let d = sys.degree();
    let len = w.len();
    let g = sys.g_slice(len + d);
    let mut series = vec![BigInt::zero(); len + d];
    let mut low = BigUint::zero();
    for (k, &e) in w.digits().iter().enumerate() {
        let mut v = low.clone();
        for _ in 0..e {
            // lowering a digit of a regular word keeps it regular
            if v >= g[k + 1] {
                return Err(Error::Irregular(format!(
                    "prefix of {w} lowered at position {k} is not regular"
                )));
            }
            let counts = prefix_counts(&g, sys.a0(), d, &v, k + 1);
            for (j, cj) in numerator_coeffs(sys.coefficients(), &counts)
                .into_iter()
                .enumerate()
            {
                series[k + j] += BigInt::from(cj);
            }
            v += &g[k];
        }
        low = v;
    }
    Ok(series)
}

/// `ψ(n)` at the context's precision from a precomputed series.
pub fn psi_from_series(ctx: &BetaContext, series: &[BigInt]) -> Interval {
    ctx.weight() * &ctx.eval_series(series)
}

/// `ψ(n)` at a fixed working precision.
pub fn psi_at(sys: &NumerationSystem, n: &BigUint, prec: u32) -> Result<Interval> {
    let series = psi_series(sys, n)?;
    Ok(psi_from_series(&*beta_context(sys, prec)?, &series))
}

/// The extended β-adic Monna map, enclosed to width `tol`.
pub fn psi(sys: &NumerationSystem, n: &BigUint, tol: f64) -> Result<Interval> {
    let series = psi_series(sys, n)?;
    with_tolerance(sys, tol, "psi", |ctx| Ok(psi_from_series(ctx, &series)))
}

pub fn psi_u64(sys: &NumerationSystem, n: u64, tol: f64) -> Result<Interval> {
    psi(sys, &BigUint::from(n), tol)
}

/// The β-adic Monna map `Σ ε_j β^{−j−1}`, enclosed to width `tol`.
pub fn phi(sys: &NumerationSystem, n: &BigUint, tol: f64) -> Result<Interval> {
    let series: Vec<BigInt> = sys
        .expand(n)
        .digits()
        .iter()
        .map(|&e| BigInt::from(e))
        .collect();
    with_tolerance(sys, tol, "phi", |ctx| Ok(ctx.eval_series(&series)))
}

pub fn phi_u64(sys: &NumerationSystem, n: u64, tol: f64) -> Result<Interval> {
    phi(sys, &BigUint::from(n), tol)
}

/// Closed form of `ψ` for `d = 3`, `a_0 > a_1 > a_2 ≥ 1`, evaluated digit by
/// digit. Shares only the enclosure of β with [`psi`], none of the cylinder
/// counting.
pub fn psi_d3(sys: &NumerationSystem, n: &BigUint, tol: f64) -> Result<Interval> {
    let a = sys.coefficients();
    if a.len() != 3 || !(a[0] > a[1] && a[1] > a[2] && a[2] >= 1) {
        return Err(Error::InvalidCoefficients(format!(
            "closed form needs d = 3 with a0 > a1 > a2 ≥ 1, got ({sys})"
        )));
    }
    let (a1, a2) = (a[1] as i64, a[2] as i64);
    let w = sys.expand(n);
    // f(n,k) = [A + (B (β²+β) + C β²) / Q] / β^{k+1}, Q = β²+β+1
    let terms: Vec<(i64, i64, i64)> = w
        .digits()
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let e = e as i64;
            let prev_small = k > 0 && (w.digit(k - 1) as i64) < a2;
            // first digit, or a digit following one below a2
            let open = k == 0 || prev_small;
            if e < a2 {
                (e, 0, 0)
            } else if e < a1 || (e <= a1 && open) {
                (a2, e - a2, 0)
            } else if e > a1 && open {
                (a2, a1 + 1 - a2, e - a1 - 1)
            } else {
                (a2, a1 - a2, e - a1)
            }
        })
        .collect();
    with_tolerance(sys, tol, "psi_d3", |ctx| {
        let prec = ctx.precision();
        let b = ctx.beta();
        let b2 = b * b;
        let b2b = &b2 + b;
        let q_inv = (&b2b + &Interval::one(prec)).recip();
        let mut total = Interval::zero(prec);
        let mut scale = ctx.inv_beta().clone();
        for &(ca, cb, cc) in &terms {
            let inner = &Interval::from_int(ca, prec)
                + &(&(&b2b.scale(&BigInt::from(cb)) + &b2.scale(&BigInt::from(cc))) * &q_inv);
            total = &total + &(&inner * &scale);
            scale = &scale * ctx.inv_beta();
        }
        Ok(total)
    })
}

/// `β^{d−1} / (β^m (β^{d−1} + … + 1))`: the lower bound for the measure of any
/// cylinder of length `m`.
pub fn extreme_threshold(sys: &NumerationSystem, m: u32, tol: f64) -> Result<Interval> {
    with_tolerance(sys, tol, "threshold", |ctx| {
        Ok(ctx.weight() * &ctx.inv_beta_pow(m))
    })
}

/// Which half of the extremal-digit statement an outcome refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremeSide {
    /// `ψ(N) ≤ threshold(m)` forces `m` leading zero digits.
    NearZero,
    /// `1 − ψ(N) ≤ threshold(m)` forces the maximal-word pattern.
    NearOne,
}

#[derive(Clone, Debug, Default)]
pub struct ExtremeCheck {
    /// `(m, side)` pairs where the premise held but the digit pattern did not.
    pub counterexamples: Vec<(u32, ExtremeSide)>,
    /// `(m, side)` pairs the interval comparison could not decide.
    pub undecided: Vec<(u32, ExtremeSide)>,
}

impl ExtremeCheck {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty() && self.undecided.is_empty()
    }
}

/// Checks both extremal-digit implications for `n` and every `m ≤ max_m`.
///
/// An implication only needs numerical work when its digit conclusion fails;
/// then its premise must be certified false, escalating precision if the
/// enclosures touch.
pub fn check_extreme_digits(
    sys: &NumerationSystem,
    n: &BigUint,
    max_m: u32,
) -> Result<ExtremeCheck> {
    let w = sys.expand(n);
    let maxw = sys.max_word(max_m.max(1) as usize)?;
    let mut pending = Vec::new();
    for m in 0..=max_m {
        let m_us = m as usize;
        if (0..m_us).any(|i| w.digit(i) != 0) {
            pending.push((m, ExtremeSide::NearZero));
        }
        if (0..m_us).any(|i| w.digit(i) != maxw.digit(i)) {
            pending.push((m, ExtremeSide::NearOne));
        }
    }
    let mut out = ExtremeCheck::default();
    if pending.is_empty() {
        return Ok(out);
    }
    let series = psi_series(sys, n)?;
    let mut prec = DEFAULT_PRECISION;
    loop {
        let ctx = beta_context(sys, prec)?;
        let x = psi_from_series(&ctx, &series);
        let gap = x.one_minus();
        let mut still = Vec::new();
        for &(m, side) in &pending {
            let thr = ctx.weight() * &ctx.inv_beta_pow(m);
            let lhs = match side {
                ExtremeSide::NearZero => &x,
                ExtremeSide::NearOne => &gap,
            };
            if thr.certainly_lt(lhs) {
                continue;
            }
            if lhs.certainly_le(&thr) {
                out.counterexamples.push((m, side));
            } else {
                still.push((m, side));
            }
        }
        pending = still;
        if pending.is_empty() {
            return Ok(out);
        }
        if prec >= MAX_PRECISION / 4 {
            out.undecided = pending;
            return Ok(out);
        }
        prec *= 2;
    }
}

/// `ψ(n)` enclosures for all `n` in `range` at a fixed precision.
pub(crate) fn psi_batch(
    sys: &NumerationSystem,
    range: std::ops::Range<u64>,
    prec: u32,
    exec: crate::par::Execution,
) -> Result<Vec<Interval>> {
    let ctx = beta_context(sys, prec)?;
    crate::par::try_map_range(exec, range, |n| {
        let series = psi_series(sys, &BigUint::from(n))?;
        Ok(psi_from_series(&ctx, &series))
    })
}

/// Converts small exact counts for display.
pub fn count_to_u64(c: &BigUint) -> Option<u64> {
    c.to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-15;

    fn sys(a: &[u32]) -> NumerationSystem {
        NumerationSystem::new(a.to_vec()).unwrap()
    }

    fn ds(v: &[u32]) -> DigitString {
        DigitString::new(v.to_vec())
    }

    fn golden() -> f64 {
        (1.0 + 5f64.sqrt()) / 2.0
    }

    #[test]
    fn count_examples() {
        let z = sys(&[1, 1]);
        assert_eq!(
            cylinder_count(&z, &ds(&[0]), 0).unwrap(),
            BigUint::from(1u32)
        );
        assert_eq!(
            cylinder_count(&z, &ds(&[0]), 1).unwrap(),
            BigUint::from(2u32)
        );
        let s = sys(&[3, 2, 1]);
        assert_eq!(
            cylinder_count(&s, &ds(&[0]), 2).unwrap(),
            BigUint::from(15u32)
        );
    }

    #[test]
    fn count_errors() {
        let z = sys(&[1, 1]);
        assert!(matches!(
            cylinder_count(&z, &ds(&[1, 1]), 0),
            Err(Error::Irregular(_))
        ));
        assert!(matches!(
            cylinder_count(&z, &ds(&[0]), 2),
            Err(Error::InvalidArgument(_))
        ));
        assert!(cylinder_count(&z, &ds(&[]), 0).is_err());
    }

    #[test]
    fn count_matches_direct_scan() {
        // oracle: expand every n < G_{K+r} and test the prefix
        for a in [&[1u32, 1][..], &[2, 1], &[3, 2, 1], &[2, 2, 1]] {
            let s = sys(a);
            for n in 0..200u64 {
                let w = s.expand_u64(n);
                for k in 1..=3usize {
                    let mut pre = w.digits().to_vec();
                    pre.resize(k.max(pre.len()), 0);
                    pre.truncate(k);
                    let pre = ds(&pre);
                    for r in 0..s.degree() {
                        let limit = s.g(k + r);
                        let direct = (0..limit.to_u64().unwrap())
                            .filter(|&m| {
                                let e = s.expand_u64(m);
                                (0..k).all(|i| e.digit(i) == pre.digit(i))
                            })
                            .count() as u64;
                        let c = cylinder_count(&s, &pre, r).unwrap();
                        assert_eq!(c, BigUint::from(direct), "{a:?} {pre} r={r}");
                    }
                }
                if n > 40 {
                    break;
                }
            }
        }
    }

    #[test]
    fn measure_examples() {
        let z = sys(&[1, 1]);
        let g = golden();
        let m0 = cylinder_measure(&z, &ds(&[0]), TOL).unwrap().value;
        assert!((m0.mid_f64() - 1.0 / g).abs() < 1e-15);
        let m1 = cylinder_measure(&z, &ds(&[1]), TOL).unwrap().value;
        assert!((m1.mid_f64() - 1.0 / (g * g)).abs() < 1e-15);
        let s = sys(&[3, 2, 1]);
        let b = crate::roots::dominant_root(&s, 1e-15).unwrap().mid_f64();
        let m = cylinder_measure(&s, &ds(&[0]), TOL).unwrap().value;
        assert!((m.mid_f64() - 1.0 / b).abs() < 1e-15);
        assert!((m.mid_f64() - 0.275682203650985).abs() < 1e-12);
        assert!(m.width() <= TOL);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_u64(&sys(&[2]), 3, TOL).unwrap().mid_f64(), 0.75);
        let g = golden();
        let v = phi_u64(&sys(&[1, 1]), 4, TOL).unwrap();
        assert!((v.mid_f64() - (1.0 / g + 1.0 / g.powi(3))).abs() < 1e-15);
        assert!((v.mid_f64() - 0.854102).abs() < 1e-6);
        assert_eq!(phi_u64(&sys(&[3, 2, 1]), 0, TOL).unwrap().mid_f64(), 0.0);
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi_u64(&sys(&[2]), 5, TOL).unwrap().mid_f64(), 0.625);
        let v = psi_u64(&sys(&[1, 1]), 1, TOL).unwrap();
        assert!((v.mid_f64() - 1.0 / golden()).abs() < 1e-15);
        let s = sys(&[3, 2, 1]);
        let v = psi_u64(&s, 2, TOL).unwrap();
        assert!((v.mid_f64() - 0.535863704791870).abs() < 1e-12);
        assert!(v.width() <= TOL);
    }

    #[test]
    fn psi_needs_monotone_coefficients() {
        assert!(psi_u64(&sys(&[1, 2]), 3, TOL).is_err());
    }

    #[test]
    fn psi_d3_examples() {
        let s = sys(&[3, 2, 1]);
        let b = crate::roots::dominant_root(&s, 1e-15).unwrap().mid_f64();
        let v1 = psi_d3(&s, &BigUint::from(1u32), TOL).unwrap();
        assert!((v1.mid_f64() - 1.0 / b).abs() < 1e-15);
        let v2 = psi_d3(&s, &BigUint::from(2u32), TOL).unwrap();
        assert!((v2.mid_f64() - 0.535863704791870).abs() < 1e-12);
        assert_eq!(psi_d3(&s, &BigUint::zero(), TOL).unwrap().mid_f64(), 0.0);
        assert!(psi_d3(&sys(&[2, 2, 1]), &BigUint::from(1u32), TOL).is_err());
        assert!(psi_d3(&sys(&[2, 1]), &BigUint::from(1u32), TOL).is_err());
    }

    #[test]
    fn psi_d3_agrees_on_small_range() {
        let s = sys(&[4, 2, 1]);
        for n in 0..500u64 {
            let a = psi_u64(&s, n, TOL).unwrap();
            let b = psi_d3(&s, &BigUint::from(n), TOL).unwrap();
            assert!((a.mid_f64() - b.mid_f64()).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn threshold_examples() {
        let z = sys(&[1, 1]);
        let g = golden();
        let t0 = extreme_threshold(&z, 0, TOL).unwrap();
        assert!((t0.mid_f64() - 1.0 / g).abs() < 1e-15);
        let t3 = extreme_threshold(&z, 3, TOL).unwrap();
        assert!((t3.mid_f64() - 0.145898).abs() < 1e-6);
        assert_eq!(
            extreme_threshold(&sys(&[2]), 4, TOL).unwrap().mid_f64(),
            0.0625
        );
    }

    #[test]
    fn extreme_digits_hold_on_small_range() {
        for a in [&[1u32, 1][..], &[2, 1], &[2, 2, 1]] {
            let s = sys(a);
            for n in 1..2000u64 {
                let c = check_extreme_digits(&s, &BigUint::from(n), 8).unwrap();
                assert!(c.holds(), "{a:?} n={n}: {c:?}");
            }
        }
    }

    #[test]
    fn lowered_prefixes_are_regular() {
        // every f-term cylinder is regular: psi_series never errors
        let s = sys(&[2, 2, 1]);
        for n in 0..3000u64 {
            psi_series(&s, &BigUint::from(n)).unwrap();
        }
    }
}
