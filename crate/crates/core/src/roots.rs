//! Characteristic polynomial, the dominant root β and its conjugates.
//!
//! β is isolated by bisection with exact sign evaluation at dyadic points and
//! carried as a certified [`Interval`]. The remaining roots are only needed
//! for diagnostics; they are located in `f64` and polished by Newton's method
//! in high precision, and every root ships with its polynomial residual.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::interval::{Dyadic, Interval, Round, DEFAULT_PRECISION};
use crate::numeration::NumerationSystem;

/// `X^d − a_0 X^{d−1} − … − a_{d−1}`, coefficients from the leading term down.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPoly {
    coeffs: Vec<BigInt>,
}

impl CharPoly {
    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Exact value at an integer point.
    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// Exact sign at the dyadic point `m · 2^e`.
    fn sign_at(&self, x: &Dyadic) -> Sign {
        if x.exponent() >= 0 {
            let m: BigInt = x.mantissa() << (x.exponent() as u64);
            return self.eval_int(&m).sign();
        }
        // 2^{kd} P(m/2^k) = Σ c_i m^{d-i} 2^{k i}
        let k = (-x.exponent()) as u64;
        let m = x.mantissa();
        let mut acc = BigInt::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            acc = acc * m + (c << (k * i as u64));
        }
        acc.sign()
    }

    fn derivative(&self) -> Vec<BigInt> {
        let d = self.degree();
        self.coeffs[..d]
            .iter()
            .enumerate()
            .map(|(i, c)| c * BigInt::from(d - i))
            .collect()
    }
}

impl fmt::Display for CharPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.degree();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let p = d - i;
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            first = false;
            let show_mag = !mag.is_one() || p == 0;
            if show_mag {
                write!(f, "{mag}")?;
            }
            match p {
                0 => {}
                1 => f.write_str("X")?,
                _ => write!(f, "X^{p}")?,
            }
        }
        Ok(())
    }
}

pub fn char_poly(sys: &NumerationSystem) -> CharPoly {
    let mut coeffs = vec![BigInt::one()];
    coeffs.extend(sys.coefficients().iter().map(|&a| -BigInt::from(a)));
    CharPoly { coeffs }
}

fn bracket(sys: &NumerationSystem) -> (u64, u64) {
    let a0 = sys.a0() as u64;
    let p = char_poly(sys);
    if p.eval_int(&BigInt::from(a0 + 1)).is_positive() {
        (a0, a0 + 1)
    } else {
        // Cauchy bound; Descartes gives exactly one positive root
        let m = *sys.coefficients().iter().max().unwrap() as u64;
        (a0, m + 1)
    }
}

/// Bisects the unique positive root down to `width_bits` (`hi − lo ≤ 2^{-width_bits}`).
fn bisect(sys: &NumerationSystem, width_bits: u32) -> Result<(Dyadic, Dyadic)> {
    if sys.degree() == 1 {
        let b = Dyadic::from_i64(sys.a0() as i64);
        return Ok((b.clone(), b));
    }
    let p = char_poly(sys);
    let (l, h) = bracket(sys);
    let mut lo = Dyadic::from_i64(l as i64);
    let mut hi = Dyadic::from_i64(h as i64);
    if p.sign_at(&lo) != Sign::Minus || p.sign_at(&hi) != Sign::Plus {
        return Err(Error::NoSignChange { lo: l, hi: h });
    }
    let target = Dyadic::new(BigInt::one(), -(width_bits as i64));
    while hi.sub_exact(&lo) > target {
        let mid = lo.add_exact(&hi).ldexp(-1);
        match p.sign_at(&mid) {
            Sign::Minus => lo = mid,
            Sign::Plus => hi = mid,
            Sign::NoSign => return Ok((mid.clone(), mid)),
        }
    }
    Ok((lo, hi))
}

/// Certified enclosure of the dominant root with width at most `tol`.
pub fn dominant_root(sys: &NumerationSystem, tol: f64) -> Result<Interval> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let bits = (-tol.log2()).ceil().max(1.0) as u32 + 1;
    let (lo, hi) = bisect(sys, bits)?;
    Ok(Interval::new(lo, hi, bits.max(DEFAULT_PRECISION) + 8))
}

/// Precision-specific β data shared by every measure and Monna-map evaluation.
#[derive(Debug)]
pub struct BetaContext {
    prec: u32,
    beta: Interval,
    inv_beta: Interval,
    weight: Interval,
}

impl BetaContext {
    fn new(sys: &NumerationSystem, prec: u32) -> Result<Self> {
        let (lo, hi) = bisect(sys, prec + 4)?;
        let beta = Interval::new(lo, hi, prec);
        let inv_beta = beta.recip();
        let d = sys.degree();
        // Σ_{i<d} β^i by Horner
        let mut s = Interval::one(prec);
        for _ in 1..d {
            s = &(&s * &beta) + &Interval::one(prec);
        }
        let weight = &beta.powi((d - 1) as u32) * &s.recip();
        Ok(BetaContext {
            prec,
            beta,
            inv_beta,
            weight,
        })
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn beta(&self) -> &Interval {
        &self.beta
    }

    pub fn inv_beta(&self) -> &Interval {
        &self.inv_beta
    }

    /// `β^{d−1} / (β^{d−1} + … + 1)`: the per-system factor shared by every
    /// cylinder measure.
    pub fn weight(&self) -> &Interval {
        &self.weight
    }

    /// `Σ_m c_m β^{−(m+1)}` by Horner in `1/β`.
    pub fn eval_series(&self, coeffs: &[BigInt]) -> Interval {
        let mut acc = Interval::zero(self.prec);
        for c in coeffs.iter().rev() {
            if !c.is_zero() {
                acc = &acc + &Interval::from_int(c.clone(), self.prec);
            }
            acc = &acc * &self.inv_beta;
        }
        acc
    }

    /// `β^{−m}`.
    pub fn inv_beta_pow(&self, m: u32) -> Interval {
        self.inv_beta.powi(m)
    }
}

/// Cached β context for `sys` at `prec` bits.
pub fn beta_context(sys: &NumerationSystem, prec: u32) -> Result<Arc<BetaContext>> {
    if let Some(ctx) = sys
        .beta_cache
        .read()
        .expect("beta cache poisoned")
        .get(&prec)
    {
        return Ok(Arc::clone(ctx));
    }
    let ctx = Arc::new(BetaContext::new(sys, prec)?);
    sys.beta_cache
        .write()
        .expect("beta cache poisoned")
        .entry(prec)
        .or_insert_with(|| Arc::clone(&ctx));
    Ok(ctx)
}

/// Largest precision tried by the escalating evaluators.
pub const MAX_PRECISION: u32 = 4096;

/// Runs `eval` at `DEFAULT_PRECISION`, doubling until the result is narrower than `tol`.
pub(crate) fn with_tolerance<F>(
    sys: &NumerationSystem,
    tol: f64,
    what: &str,
    eval: F,
) -> Result<Interval>
where
    F: Fn(&BetaContext) -> Result<Interval>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut prec = DEFAULT_PRECISION;
    loop {
        let ctx = beta_context(sys, prec)?;
        let v = eval(&ctx)?;
        if v.width() <= tol {
            return Ok(v);
        }
        if prec >= MAX_PRECISION {
            return Err(Error::PrecisionExhausted(format!(
                "{what}: width {:e} > tol {tol:e} at {prec} bits",
                v.width()
            )));
        }
        prec *= 2;
    }
}

/// A complex number with dyadic parts, rounded to a working precision.
#[derive(Clone, Debug)]
pub struct HpComplex {
    pub re: Dyadic,
    pub im: Dyadic,
}

impl HpComplex {
    fn from_c64(z: Complex64) -> Self {
        HpComplex {
            re: Dyadic::from_f64(z.re).unwrap_or_else(Dyadic::zero),
            im: Dyadic::from_f64(z.im).unwrap_or_else(Dyadic::zero),
        }
    }

    fn real(x: Dyadic) -> Self {
        HpComplex {
            re: x,
            im: Dyadic::zero(),
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    fn round(self, prec: u32) -> Self {
        HpComplex {
            re: self.re.round(prec, Round::Down),
            im: self.im.round(prec, Round::Down),
        }
    }

    fn add(&self, o: &HpComplex) -> HpComplex {
        HpComplex {
            re: self.re.add_exact(&o.re),
            im: self.im.add_exact(&o.im),
        }
    }

    fn sub(&self, o: &HpComplex) -> HpComplex {
        HpComplex {
            re: self.re.sub_exact(&o.re),
            im: self.im.sub_exact(&o.im),
        }
    }

    fn mul(&self, o: &HpComplex, prec: u32) -> HpComplex {
        HpComplex {
            re: self
                .re
                .mul_exact(&o.re)
                .sub_exact(&self.im.mul_exact(&o.im)),
            im: self
                .re
                .mul_exact(&o.im)
                .add_exact(&self.im.mul_exact(&o.re)),
        }
        .round(prec)
    }

    fn norm_sqr(&self) -> Dyadic {
        self.re
            .mul_exact(&self.re)
            .add_exact(&self.im.mul_exact(&self.im))
    }

    fn div(&self, o: &HpComplex, prec: u32) -> HpComplex {
        let den = o.norm_sqr();
        let re = self
            .re
            .mul_exact(&o.re)
            .add_exact(&self.im.mul_exact(&o.im));
        let im = self
            .im
            .mul_exact(&o.re)
            .sub_exact(&self.re.mul_exact(&o.im));
        HpComplex {
            re: re.div(&den, prec, Round::Down),
            im: im.div(&den, prec, Round::Down),
        }
    }

    fn abs_f64(&self) -> f64 {
        self.norm_sqr().to_f64().sqrt()
    }
}

fn horner_hp(coeffs: &[BigInt], z: &HpComplex, prec: u32) -> HpComplex {
    let mut acc = HpComplex::real(Dyadic::zero());
    for c in coeffs {
        acc = acc
            .mul(z, prec)
            .add(&HpComplex::real(Dyadic::from_int(c.clone())));
    }
    acc
}

fn horner_c64(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// All roots of a monic polynomial in `f64` (Durand–Kerner).
fn durand_kerner(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let d = coeffs.len() - 1;
    let radius = 1.0 + coeffs[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            Complex64::from_polar(
                0.9 * radius,
                std::f64::consts::TAU * k as f64 / d as f64 + 0.4,
            )
        })
        .collect();
    for _ in 0..5000 {
        let mut delta = 0.0f64;
        for i in 0..d {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = horner_c64(coeffs, z[i]) / den;
            if step.is_finite() {
                z[i] -= step;
                delta = delta.max(step.norm() / radius);
            }
        }
        if delta < 1e-15 {
            return Ok(z);
        }
    }
    Err(Error::NonConvergence(format!(
        "Durand-Kerner did not settle for {coeffs:?}"
    )))
}

/// Roots, explicit-representation coefficients and their diagnostics.
#[derive(Clone, Debug)]
pub struct RootData {
    pub beta: Interval,
    /// `β_1 = β` first, then the remaining roots by decreasing modulus.
    pub conjugates: Vec<HpComplex>,
    /// `b_j` with `G_n = Σ_j b_j β_j^n`, aligned with `conjugates`.
    pub b: Vec<HpComplex>,
    /// `|P(β_j)|` for every root.
    pub residuals: Vec<f64>,
    pub precision: u32,
}

impl RootData {
    pub fn conjugates_c64(&self) -> Vec<Complex64> {
        self.conjugates.iter().map(HpComplex::to_c64).collect()
    }

    pub fn b_c64(&self) -> Vec<Complex64> {
        self.b.iter().map(HpComplex::to_c64).collect()
    }

    /// Residual bound `d (a_0 + 1)^d 2^{−prec/2}` every root must meet.
    pub fn residual_bound(sys: &NumerationSystem, prec: u32) -> f64 {
        let d = sys.degree() as f64;
        d * (sys.a0() as f64 + 1.0).powf(d) * 2f64.powf(-(prec as f64) / 2.0)
    }
}

fn polish(coeffs: &[BigInt], deriv: &[BigInt], start: Complex64, prec: u32) -> HpComplex {
    let work = prec + 32;
    let mut z = HpComplex::from_c64(start);
    let tiny = 2f64.powi(-(prec as i32));
    for _ in 0..200 {
        let p = horner_hp(coeffs, &z, work);
        let dp = horner_hp(deriv, &z, work);
        if dp.norm_sqr().is_zero() {
            break;
        }
        let step = p.div(&dp, work);
        z = z.sub(&step).round(work);
        let zmag = z.abs_f64().max(1.0);
        // step underflows f64 long before the working precision runs out, so
        // compare exponents instead of converted values
        let step_small = step.re.is_zero() && step.im.is_zero()
            || step.norm_sqr().to_f64() <= (tiny * zmag).powi(2);
        if step_small {
            break;
        }
    }
    z
}

/// All `d` roots with the dominant real root first.
pub fn conjugate_roots(sys: &NumerationSystem, prec: u32) -> Result<RootData> {
    let poly = char_poly(sys);
    let d = poly.degree();
    let (lo, hi) = bisect(sys, prec + 4)?;
    let beta = Interval::new(lo.clone(), hi, prec);
    if d == 1 {
        let b = HpComplex::real(lo);
        return Ok(RootData {
            beta,
            conjugates: vec![b],
            b: vec![HpComplex::real(Dyadic::one())],
            residuals: vec![0.0],
            precision: prec,
        });
    }
    let coeffs_f: Vec<f64> = poly
        .coefficients()
        .iter()
        .map(|c| c.to_f64().unwrap())
        .collect();
    let approx = durand_kerner(&coeffs_f)?;
    let deriv = poly.derivative();
    let mut roots: Vec<HpComplex> = approx
        .iter()
        .map(|&z| polish(poly.coefficients(), &deriv, z, prec))
        .collect();

    let beta_mid = beta.mid_f64();
    let dominant = roots
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            let da = (a.to_c64() - beta_mid).norm();
            let db = (b.to_c64() - beta_mid).norm();
            da.total_cmp(&db)
        })
        .map(|(i, _)| i)
        .unwrap();
    let mut first = roots.swap_remove(dominant);
    first.im = Dyadic::zero();
    roots.sort_by(|a, b| {
        let (za, zb) = (a.to_c64(), b.to_c64());
        zb.norm()
            .total_cmp(&za.norm())
            .then(zb.im.total_cmp(&za.im))
    });
    roots.insert(0, first);

    let zs: Vec<Complex64> = roots.iter().map(HpComplex::to_c64).collect();
    let scale = 1.0 + zs.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    for i in 0..d {
        for j in i + 1..d {
            if (zs[i] - zs[j]).norm() < 1e-9 * scale {
                return Err(Error::NonConvergence(format!(
                    "roots {i} and {j} coincide near {}",
                    zs[i]
                )));
            }
        }
    }
    if (zs[0].re - beta_mid).abs() > 1e-9 * scale {
        return Err(Error::NonConvergence(format!(
            "polished dominant root {} disagrees with bisection {beta_mid}",
            zs[0]
        )));
    }

    let work = prec + 32;
    let residuals: Vec<f64> = roots
        .iter()
        .map(|z| horner_hp(poly.coefficients(), z, work).abs_f64())
        .collect();
    let bound = RootData::residual_bound(sys, prec);
    if let Some((j, r)) = residuals.iter().enumerate().find(|(_, &r)| !(r <= bound)) {
        return Err(Error::NonConvergence(format!(
            "root {j} ({}) has residual {r:e} above {bound:e}",
            zs[j]
        )));
    }

    let one = HpComplex::real(Dyadic::one());
    let b = roots
        .iter()
        .map(|z| {
            // (β_j^d − 1) / ((β_j − 1) P'(β_j))
            let mut zd = one.clone();
            for _ in 0..d {
                zd = zd.mul(z, work);
            }
            let num = zd.sub(&one);
            let den = z.sub(&one).mul(&horner_hp(&deriv, z, work), work);
            num.div(&den, work)
        })
        .collect();

    Ok(RootData {
        beta,
        conjugates: roots,
        b,
        residuals,
        precision: prec,
    })
}

/// `b_j` at each conjugate, in the order of [`conjugate_roots`].
pub fn b_coefficients(sys: &NumerationSystem, prec: u32) -> Result<Vec<Complex64>> {
    Ok(conjugate_roots(sys, prec)?.b_c64())
}

/// `|G_n − Σ_j b_j β_j^n| / G_n` evaluated at the roots' working precision.
pub fn reconstruct_g(sys: &NumerationSystem, roots: &RootData, n: usize) -> f64 {
    let work = roots.precision + 32;
    let mut total = HpComplex::real(Dyadic::zero());
    for (z, b) in roots.conjugates.iter().zip(&roots.b) {
        let mut p = b.clone();
        for _ in 0..n {
            p = p.mul(z, work);
        }
        total = total.add(&p);
    }
    let g = Dyadic::from_biguint(&sys.g(n));
    let diff = HpComplex {
        re: total.re.sub_exact(&g),
        im: total.im,
    };
    let abs = diff.norm_sqr();
    // relative to G_n, computed in dyadic form to avoid f64 overflow
    let rel2 = abs.div(&g.mul_exact(&g), 64, Round::Up);
    rel2.to_f64().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PisotStatus {
    Pisot,
    NotPisot,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Irreducibility {
    Irreducible,
    Reducible(String),
    Unknown,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct PisotReport {
    pub status: PisotStatus,
    /// `structural`, `integer` or `numeric`.
    pub certificate: &'static str,
    pub irreducibility: Irreducibility,
    pub max_conjugate_modulus: Option<f64>,
}

/// Tri-state Pisot test. Non-increasing coefficients certify Pisot outright;
/// otherwise the conjugates are checked numerically against `1 − tol` and the
/// polynomial must be proven irreducible.
pub fn is_pisot(sys: &NumerationSystem, tol: f64) -> Result<PisotReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let poly = char_poly(sys);
    if sys.degree() == 1 {
        return Ok(PisotReport {
            status: PisotStatus::Pisot,
            certificate: "integer",
            irreducibility: Irreducibility::Irreducible,
            max_conjugate_modulus: None,
        });
    }
    let roots = conjugate_roots(sys, DEFAULT_PRECISION)?;
    let max_mod = roots.conjugates[1..]
        .iter()
        .map(|z| z.to_c64().norm())
        .fold(0.0f64, f64::max);
    if sys.is_non_increasing() {
        return Ok(PisotReport {
            status: PisotStatus::Pisot,
            certificate: "structural",
            irreducibility: Irreducibility::Irreducible,
            max_conjugate_modulus: Some(max_mod),
        });
    }
    let irreducibility = irreducibility(&poly);
    let status = if max_mod >= 1.0 + tol {
        PisotStatus::NotPisot
    } else if max_mod <= 1.0 - tol && irreducibility == Irreducibility::Irreducible {
        PisotStatus::Pisot
    } else {
        PisotStatus::Unknown
    };
    Ok(PisotReport {
        status,
        certificate: "numeric",
        irreducibility,
        max_conjugate_modulus: Some(max_mod),
    })
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    let mut out = Vec::new();
    let mut i = BigInt::one();
    while &i * &i <= n {
        if (&n % &i).is_zero() {
            out.push(i.clone());
            let j = &n / &i;
            if j != i {
                out.push(j);
            }
        }
        i += 1;
    }
    out
}

/// Exact division by a monic divisor; `None` when the remainder is nonzero.
fn divide_monic(p: &[BigInt], q: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut rem = p.to_vec();
    let dq = q.len() - 1;
    let mut quot = Vec::with_capacity(p.len() - dq);
    for i in 0..=(p.len() - 1 - dq) {
        let c = rem[i].clone();
        for j in 0..=dq {
            rem[i + j] -= &c * &q[j];
        }
        quot.push(c);
    }
    rem.iter().all(Zero::is_zero).then_some(quot)
}

/// Best-effort irreducibility over ℚ: linear factors for any degree,
/// quadratic factors from degree 4 on. Decisive up to degree 5.
pub fn irreducibility(poly: &CharPoly) -> Irreducibility {
    let c = poly.coefficients();
    let d = poly.degree();
    if d <= 1 {
        return Irreducibility::Irreducible;
    }
    let constant = c[d].clone();
    if constant.is_zero() {
        return Irreducibility::Reducible("X".into());
    }
    let divs = divisors(&constant);
    for t in &divs {
        for root in [t.clone(), -t.clone()] {
            if poly.eval_int(&root).is_zero() {
                return Irreducibility::Reducible(format!("X - ({root})"));
            }
        }
    }
    if d <= 3 {
        return Irreducibility::Irreducible;
    }
    let r: BigInt = BigInt::one() + c[1..].iter().map(|x| x.abs()).max().unwrap();
    let p_bound = r.to_i64().filter(|&x| x <= 100_000);
    let Some(p_bound) = p_bound else {
        return Irreducibility::Unknown;
    };
    for q in divs.iter().flat_map(|t| [t.clone(), -t.clone()]) {
        if q.abs() > &r * &r {
            continue;
        }
        for p in -2 * p_bound..=2 * p_bound {
            let f = [BigInt::one(), BigInt::from(p), q.clone()];
            if divide_monic(c, &f).is_some() {
                return Irreducibility::Reducible(format!("X^2 + ({p})X + ({q})"));
            }
        }
    }
    if d <= 5 {
        Irreducibility::Irreducible
    } else {
        Irreducibility::Unknown
    }
}

/// Determinant of an integer matrix by fraction-free (Bareiss) elimination.
fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Exact discriminant of the characteristic polynomial.
pub fn discriminant(poly: &CharPoly) -> BigInt {
    let d = poly.degree();
    if d == 1 {
        return BigInt::one();
    }
    let p = poly.coefficients();
    let dp = poly.derivative();
    let n = 2 * d - 1;
    let mut m = vec![vec![BigInt::zero(); n]; n];
    for (row, r) in m.iter_mut().take(d - 1).enumerate() {
        for (j, c) in p.iter().enumerate() {
            r[row + j] = c.clone();
        }
    }
    for row in 0..d {
        for (j, c) in dp.iter().enumerate() {
            m[d - 1 + row][row + j] = c.clone();
        }
    }
    let res = bareiss_det(m);
    if (d * (d - 1) / 2) % 2 == 1 {
        -res
    } else {
        res
    }
}

/// Square-free part (sign kept); square factors above the trial bound are only
/// detected when the cofactor is itself a perfect square.
pub fn squarefree_part(n: &BigInt) -> BigInt {
    if n.is_zero() {
        return BigInt::zero();
    }
    let sign = if n.is_negative() { -1 } else { 1 };
    let mut rest = n.abs();
    let mut out = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= rest && p < BigInt::from(100_000) {
        let mut count = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            count += 1;
        }
        if count % 2 == 1 {
            out *= &p;
        }
        p += 1;
    }
    let s = rest.sqrt();
    if &s * &s != rest {
        out *= rest;
    }
    out * sign
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(a: &[u32]) -> NumerationSystem {
        NumerationSystem::new(a.to_vec()).unwrap()
    }

    #[test]
    fn char_poly_display() {
        assert_eq!(char_poly(&sys(&[1, 1])).to_string(), "X^2 - X - 1");
        assert_eq!(
            char_poly(&sys(&[3, 2, 1])).to_string(),
            "X^3 - 3X^2 - 2X - 1"
        );
        assert_eq!(char_poly(&sys(&[2])).to_string(), "X - 2");
    }

    #[test]
    fn golden_ratio_enclosure() {
        let b = dominant_root(&sys(&[1, 1]), 1e-12).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(b.width() <= 1e-12);
        assert!(b.lo_f64() <= phi + 1e-15 && phi - 1e-15 <= b.hi_f64());
        let d1 = dominant_root(&sys(&[2]), 1e-3).unwrap();
        assert_eq!(d1.lo(), d1.hi());
        assert_eq!(d1.lo_f64(), 2.0);
    }

    #[test]
    fn tribonacci_like_root() {
        let b = dominant_root(&sys(&[3, 2, 1]), 1e-6).unwrap();
        assert!((b.mid_f64() - 3.627365084711833).abs() < 1e-6);
    }

    #[test]
    fn sign_change_bracket_for_non_monotone() {
        // X^2 - X - 5 has its positive root near 2.79, outside [1, 2]
        let b = dominant_root(&sys(&[1, 5]), 1e-9).unwrap();
        let r = (1.0 + 21f64.sqrt()) / 2.0;
        assert!((b.mid_f64() - r).abs() < 1e-9);
    }

    #[test]
    fn quadratic_conjugates() {
        let r = conjugate_roots(&sys(&[1, 1]), 128).unwrap();
        let z = r.conjugates_c64();
        assert!((z[0].re - 1.618033988749895).abs() < 1e-14);
        assert!((z[1].re + 0.6180339887498949).abs() < 1e-14);
        let b = r.b_c64();
        assert!((b[0].re - (5.0 + 3.0 * 5f64.sqrt()) / 10.0).abs() < 1e-14);
        assert!((b[1].re - (5.0 - 3.0 * 5f64.sqrt()) / 10.0).abs() < 1e-14);
    }

    #[test]
    fn cubic_conjugates_inside_unit_disk() {
        let r = conjugate_roots(&sys(&[2, 2, 1]), 128).unwrap();
        let z = r.conjugates_c64();
        assert!((z[0].re - 2.8312).abs() < 1e-4);
        assert!(z[1].norm() < 1.0 && z[2].norm() < 1.0);
        // complex pair: b's are conjugate too
        let b = r.b_c64();
        assert!((b[1] - b[2].conj()).norm() < 1e-15);
        let sum: Complex64 = b.iter().sum();
        assert!((sum - 1.0).norm() < 1e-14);
    }

    #[test]
    fn reconstruction_residuals() {
        let z = sys(&[1, 1]);
        let r = conjugate_roots(&z, 128).unwrap();
        assert!(reconstruct_g(&z, &r, 10) <= 1e-10);
        let two = sys(&[2]);
        let r2 = conjugate_roots(&two, 128).unwrap();
        assert_eq!(reconstruct_g(&two, &r2, 20), 0.0);
        let s = sys(&[3, 2, 1]);
        let r3 = conjugate_roots(&s, 128).unwrap();
        assert!(reconstruct_g(&s, &r3, 30) <= 1e-8);
    }

    #[test]
    fn pisot_status() {
        assert_eq!(
            is_pisot(&sys(&[1, 1]), 1e-9).unwrap().status,
            PisotStatus::Pisot
        );
        assert_eq!(
            is_pisot(&sys(&[3, 2, 1]), 1e-9).unwrap().certificate,
            "structural"
        );
        let d1 = is_pisot(&sys(&[2]), 1e-9).unwrap();
        assert_eq!(d1.status, PisotStatus::Pisot);
        assert!(d1.max_conjugate_modulus.is_none());
        // X^2 - X - 5: conjugate ≈ −1.79
        assert_eq!(
            is_pisot(&sys(&[1, 5]), 1e-9).unwrap().status,
            PisotStatus::NotPisot
        );
        // X^3 - X^2 - 2X - 3? conjugates |z|^2 = 3/β < 1 with β ≈ 2.13
        let r = is_pisot(&sys(&[1, 2, 3]), 1e-9).unwrap();
        assert_eq!(r.irreducibility, Irreducibility::Irreducible);
    }

    #[test]
    fn irreducibility_detects_factors() {
        // X^2 - 2X - 3 = (X - 3)(X + 1)
        let p = char_poly(&sys(&[2, 3]));
        assert!(matches!(irreducibility(&p), Irreducibility::Reducible(_)));
        // X^4 - X^3 - 2X^2 - X - 1 ... check against a known product:
        // (X^2 + X + 1)(X^2 - 2X - 1) = X^4 - X^3 - 2X^2 - 3X - 1
        let p = char_poly(&sys(&[1, 2, 3, 1]));
        assert!(matches!(irreducibility(&p), Irreducibility::Reducible(_)));
        let p = char_poly(&sys(&[1, 1, 1, 1]));
        assert_eq!(irreducibility(&p), Irreducibility::Irreducible);
    }

    #[test]
    fn discriminants() {
        assert_eq!(discriminant(&char_poly(&sys(&[1, 1]))), BigInt::from(5));
        assert_eq!(discriminant(&char_poly(&sys(&[2, 1]))), BigInt::from(8));
        // tribonacci X^3 - X^2 - X - 1: −44
        assert_eq!(
            discriminant(&char_poly(&sys(&[1, 1, 1]))),
            BigInt::from(-44)
        );
        assert_eq!(squarefree_part(&BigInt::from(8)), BigInt::from(2));
        assert_eq!(squarefree_part(&BigInt::from(-44)), BigInt::from(-11));
        assert_eq!(squarefree_part(&BigInt::from(49)), BigInt::from(1));
    }
}
