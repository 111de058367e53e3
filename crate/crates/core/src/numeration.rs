//! Linear-recurrence numeration systems and their greedy digit expansions.
//!
//! A system is given by positive coefficients `a = (a_0, ..., a_{d-1})`. Its
//! base sequence starts with `G_0 = 1`, `G_n = a_0 G_{n-1} + ... + a_{n-1} G_0 + 1`
//! for `0 < n < d`, and continues with the recurrence
//! `G_n = a_0 G_{n-1} + ... + a_{d-1} G_{n-d}`.
//!
//! Digit strings are little-endian: position `k` carries the weight `G_k`.
//! A string is *regular* when every prefix sum stays below the next base
//! element; regular strings are exactly the greedy expansions.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock, RwLockReadGuard};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::roots::BetaContext;

/// A finite little-endian digit string `ε_0 … ε_{K-1}`. The empty string is 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DigitString(Vec<u32>);

impl DigitString {
    pub fn new(digits: Vec<u32>) -> Self {
        DigitString(digits)
    }

    pub fn empty() -> Self {
        DigitString(Vec::new())
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }

    /// Digit at position `k`, zero past the end.
    pub fn digit(&self, k: usize) -> u32 {
        self.0.get(k).copied().unwrap_or(0)
    }
}

impl From<Vec<u32>> for DigitString {
    fn from(v: Vec<u32>) -> Self {
        DigitString(v)
    }
}

impl fmt::Display for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for DigitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(DigitString::empty());
        }
        s.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::parse(tok.trim(), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()
            .map(DigitString)
    }
}

/// A validated numeration system with a lazily grown base-sequence cache.
pub struct NumerationSystem {
    coeffs: Vec<u32>,
    non_increasing: bool,
    dense_pattern: bool,
    k_equal: Option<usize>,
    g: RwLock<Vec<BigUint>>,
    pub(crate) beta_cache: RwLock<HashMap<u32, Arc<BetaContext>>>,
}

impl NumerationSystem {
    /// Validates `coeffs` and seeds the cache with `G_0 … G_d`.
    pub fn new(coeffs: Vec<u32>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidCoefficients(
                "coefficient list is empty".into(),
            ));
        }
        if let Some(pos) = coeffs.iter().position(|&a| a < 1) {
            return Err(Error::InvalidCoefficients(format!(
                "a_{pos} = {} must be at least 1",
                coeffs[pos]
            )));
        }
        if coeffs == [1] {
            return Err(Error::InvalidCoefficients(
                "a = (1) gives a constant base sequence".into(),
            ));
        }
        let d = coeffs.len();
        let non_increasing = coeffs.windows(2).all(|w| w[0] >= w[1]);
        let a0 = coeffs[0];
        let all_equal = coeffs.iter().all(|&a| a == a0);
        let bracketed =
            d >= 2 && coeffs[d - 1] == a0 && coeffs[1..d - 1].iter().all(|&a| a + 1 == a0);
        let k_equal = non_increasing.then(|| coeffs.iter().take_while(|&&a| a == a0).count() - 1);

        let mut g = vec![BigUint::from(1u32)];
        for n in 1..d {
            let mut next = BigUint::from(1u32);
            for i in 0..n {
                next += &g[n - 1 - i] * coeffs[i];
            }
            g.push(next);
        }
        let sys = NumerationSystem {
            coeffs,
            non_increasing,
            dense_pattern: all_equal || bracketed,
            k_equal,
            g: RwLock::new(g),
            beta_cache: RwLock::new(HashMap::new()),
        };
        sys.ensure(d);
        Ok(sys)
    }

    pub fn coefficients(&self) -> &[u32] {
        &self.coeffs
    }

    /// Recurrence length `d`.
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    pub fn a0(&self) -> u32 {
        self.coeffs[0]
    }

    pub fn is_non_increasing(&self) -> bool {
        self.non_increasing
    }

    /// Coefficients of the form `(a0,…,a0)` or `(a0, a0−1, …, a0−1, a0)`,
    /// the shapes for which the plain Monna map has dense image.
    pub fn has_dense_pattern(&self) -> bool {
        self.dense_pattern
    }

    /// Largest `k` with `a_0 = … = a_k`; `None` unless coefficients are non-increasing.
    pub fn k_equal(&self) -> Option<usize> {
        self.k_equal
    }

    fn ensure(&self, n: usize) {
        if self.g.read().expect("G cache poisoned").len() > n {
            return;
        }
        let mut g = self.g.write().expect("G cache poisoned");
        let d = self.coeffs.len();
        while g.len() <= n {
            let m = g.len();
            let mut next = BigUint::zero();
            for (i, &a) in self.coeffs.iter().enumerate() {
                next += &g[m - 1 - i] * a;
            }
            debug_assert!(m >= d);
            g.push(next);
        }
    }

    /// Read access to a cache holding at least `G_0 … G_n`.
    pub(crate) fn g_slice(&self, n: usize) -> RwLockReadGuard<'_, Vec<BigUint>> {
        self.ensure(n);
        self.g.read().expect("G cache poisoned")
    }

    pub fn g(&self, n: usize) -> BigUint {
        self.g_slice(n)[n].clone()
    }

    /// `G_0 … G_n`.
    pub fn g_terms(&self, n: usize) -> Vec<BigUint> {
        self.g_slice(n)[..=n].to_vec()
    }

    /// Greedy (regular) expansion of `n`.
    pub fn expand(&self, n: &BigUint) -> DigitString {
        if n.is_zero() {
            return DigitString::empty();
        }
        // smallest K with G_K > n; the expansion has K digits
        let mut len = 1;
        while self.g_slice(len).get(len).is_some_and(|gk| gk <= n) {
            len += 1;
        }
        let g = self.g_slice(len);
        let mut rest = n.clone();
        let mut digits = vec![0u32; len];
        for k in (0..len).rev() {
            if rest < g[k] {
                continue;
            }
            let q = &rest / &g[k];
            rest -= &q * &g[k];
            digits[k] = q.to_u32().expect("greedy digit exceeds u32");
        }
        debug_assert!(rest.is_zero());
        DigitString(digits)
    }

    pub fn expand_u64(&self, n: u64) -> DigitString {
        self.expand(&BigUint::from(n))
    }

    /// `Σ ε_k G_k`; defined for irregular strings as well.
    pub fn value(&self, w: &DigitString) -> BigUint {
        if w.is_empty() {
            return BigUint::zero();
        }
        let g = self.g_slice(w.len());
        w.digits()
            .iter()
            .zip(g.iter())
            .filter(|(&e, _)| e != 0)
            .fold(BigUint::zero(), |acc, (&e, gk)| acc + gk * e)
    }

    /// Every prefix sum `Σ_{k<K'} ε_k G_k` is below `G_{K'}`.
    pub fn is_regular(&self, w: &DigitString) -> bool {
        let g = self.g_slice(w.len());
        let mut sum = BigUint::zero();
        for (k, &e) in w.digits().iter().enumerate() {
            if e != 0 {
                sum += &g[k] * e;
            }
            if sum >= g[k + 1] {
                return false;
            }
        }
        true
    }

    /// The odometer step on finite words: expansion of `value(w) + 1`.
    pub fn successor(&self, w: &DigitString) -> Result<DigitString> {
        if !self.is_regular(w) {
            return Err(Error::Irregular(w.to_string()));
        }
        Ok(self.expand(&(self.value(w) + 1u32)))
    }

    /// The lexicographically largest regular word of length `len`, comparing
    /// from position 0.
    ///
    /// With `a_0 = … = a_k > a_{k+1}` the maximum carries `a_0 − 1` at every
    /// positive multiple of `k + 1`. When all coefficients are equal the
    /// reduced digit sits at positions `i ≡ d − 1 (mod d)` instead.
    pub fn max_word(&self, len: usize) -> Result<DigitString> {
        if len < 1 {
            return Err(Error::InvalidArgument("max_word length must be ≥ 1".into()));
        }
        let k = self.k_equal.ok_or_else(|| {
            Error::InvalidCoefficients("max_word needs non-increasing coefficients".into())
        })?;
        let a0 = self.a0();
        let d = self.degree();
        let digits = (0..len)
            .map(|i| {
                let reduced = if k + 1 == d {
                    (i + 1) % d == 0
                } else {
                    i > 0 && i % (k + 1) == 0
                };
                if reduced {
                    a0 - 1
                } else {
                    a0
                }
            })
            .collect();
        Ok(DigitString(digits))
    }
}

impl Clone for NumerationSystem {
    fn clone(&self) -> Self {
        NumerationSystem {
            coeffs: self.coeffs.clone(),
            non_increasing: self.non_increasing,
            dense_pattern: self.dense_pattern,
            k_equal: self.k_equal,
            g: RwLock::new(self.g.read().expect("G cache poisoned").clone()),
            beta_cache: RwLock::new(self.beta_cache.read().expect("beta cache poisoned").clone()),
        }
    }
}

impl fmt::Debug for NumerationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumerationSystem")
            .field("coeffs", &self.coeffs)
            .field("non_increasing", &self.non_increasing)
            .field("dense_pattern", &self.dense_pattern)
            .finish()
    }
}

impl PartialEq for NumerationSystem {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for NumerationSystem {}

impl fmt::Display for NumerationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for NumerationSystem {
    type Err = Error;

    /// Parses comma-separated decimal coefficients, e.g. `3,2,1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidCoefficients(
                "coefficient list is empty".into(),
            ));
        }
        let coeffs = s
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<u32>()
                    .map_err(|e| Error::parse(tok, format!("not a coefficient ({e})")))
            })
            .collect::<Result<Vec<_>>>()?;
        NumerationSystem::new(coeffs)
    }
}

/// Parses `;`-separated systems, e.g. `1,1;2,1`.
pub fn parse_systems(s: &str) -> Result<Vec<NumerationSystem>> {
    s.split(';')
        .filter(|part| !part.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<_>>>()
        .and_then(|v: Vec<NumerationSystem>| {
            if v.is_empty() {
                Err(Error::InvalidCoefficients("no systems given".into()))
            } else {
                Ok(v)
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(a: &[u32]) -> NumerationSystem {
        NumerationSystem::new(a.to_vec()).unwrap()
    }

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn base_sequences() {
        assert_eq!(sys(&[2]).g_terms(3), big(&[1, 2, 4, 8]));
        assert_eq!(sys(&[1, 1]).g_terms(5), big(&[1, 2, 3, 5, 8, 13]));
        assert_eq!(sys(&[3, 2, 1]).g_terms(4), big(&[1, 4, 15, 54, 196]));
        assert_eq!(sys(&[2, 2, 1]).g_terms(5), big(&[1, 3, 9, 25, 71, 201]));
    }

    #[test]
    fn g_terms_is_idempotent() {
        let s = sys(&[1, 1]);
        let a = s.g_terms(40);
        let b = s.g_terms(40);
        assert_eq!(a, b);
        assert_eq!(s.g_terms(5), a[..6].to_vec());
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(matches!(
            NumerationSystem::new(vec![]),
            Err(Error::InvalidCoefficients(_))
        ));
        assert!(matches!(
            NumerationSystem::new(vec![2, 0]),
            Err(Error::InvalidCoefficients(_))
        ));
        assert!(NumerationSystem::new(vec![1]).is_err());
        assert!("1,x".parse::<NumerationSystem>().is_err());
    }

    #[test]
    fn structural_flags() {
        let s = sys(&[3, 2, 1]);
        assert_eq!(s.degree(), 3);
        assert!(s.is_non_increasing());
        assert!(!s.has_dense_pattern());
        assert_eq!(s.k_equal(), Some(0));
        assert!(sys(&[1, 1]).has_dense_pattern());
        assert!(sys(&[3, 2, 2, 3]).has_dense_pattern());
        assert_eq!(sys(&[2, 2, 1]).k_equal(), Some(1));
        assert_eq!(sys(&[1, 2]).k_equal(), None);
        assert!(!sys(&[1, 2]).is_non_increasing());
    }

    #[test]
    fn greedy_examples() {
        assert_eq!(sys(&[1, 1]).expand_u64(4).digits(), &[1, 0, 1]);
        assert_eq!(sys(&[3, 2, 1]).expand_u64(100).digits(), &[1, 0, 3, 1]);
        assert_eq!(sys(&[2]).expand_u64(5).digits(), &[1, 0, 1]);
        assert!(sys(&[2]).expand_u64(0).is_empty());
    }

    #[test]
    fn values_and_regularity() {
        let z = sys(&[1, 1]);
        let w: DigitString = "1,0,1".parse().unwrap();
        assert_eq!(z.value(&w), BigUint::from(4u32));
        assert_eq!(z.value(&DigitString::empty()), BigUint::zero());
        assert_eq!(z.value(&DigitString::new(vec![2, 2])), BigUint::from(6u32));
        assert!(z.is_regular(&w));
        assert!(!z.is_regular(&DigitString::new(vec![1, 1])));
        assert!(!z.is_regular(&DigitString::new(vec![2])));
        assert!(z.is_regular(&DigitString::empty()));
    }

    #[test]
    fn successor_examples() {
        let z = sys(&[1, 1]);
        assert_eq!(
            z.successor(&DigitString::new(vec![1, 0, 1]))
                .unwrap()
                .digits(),
            &[0, 0, 0, 1]
        );
        assert_eq!(z.successor(&DigitString::empty()).unwrap().digits(), &[1]);
        assert_eq!(
            sys(&[2])
                .successor(&DigitString::new(vec![1]))
                .unwrap()
                .digits(),
            &[0, 1]
        );
        assert!(matches!(
            z.successor(&DigitString::new(vec![1, 1])),
            Err(Error::Irregular(_))
        ));
    }

    #[test]
    fn max_word_examples() {
        assert_eq!(
            sys(&[2, 2, 1]).max_word(5).unwrap().digits(),
            &[2, 2, 1, 2, 1]
        );
        assert_eq!(sys(&[1, 1]).max_word(4).unwrap().digits(), &[1, 0, 1, 0]);
        assert_eq!(sys(&[3]).max_word(2).unwrap().digits(), &[2, 2]);
        let s = sys(&[2, 2, 1]);
        assert_eq!(s.value(&s.max_word(5).unwrap()), BigUint::from(138u32));
        assert!(s.max_word(0).is_err());
        assert!(sys(&[1, 2]).max_word(3).is_err());
    }

    #[test]
    fn digit_string_text_format() {
        let w: DigitString = " 1, 0,3 ,1".parse().unwrap();
        assert_eq!(w.to_string(), "1,0,3,1");
        assert!("1,-1".parse::<DigitString>().is_err());
        assert_eq!("".parse::<DigitString>().unwrap(), DigitString::empty());
    }

    #[test]
    fn parses_system_lists() {
        let v = parse_systems("1,1;2,1").unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[1].coefficients(), &[2, 1]);
        assert_eq!(v[0].to_string(), "1,1");
        assert!(parse_systems(";").is_err());
    }

    #[test]
    fn expansion_past_cache_of_large_values() {
        let s = sys(&[1, 1]);
        let n = BigUint::from(10u32).pow(40);
        let w = s.expand(&n);
        assert_eq!(s.value(&w), n);
        assert!(s.is_regular(&w));
    }
}
