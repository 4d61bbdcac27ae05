//! Exact arithmetic in the parameter ring `Q[alpha, beta, s] / (s^2 + beta)`.
//!
//! `s` stands for `sqrt(-beta)`. It is kept as a formal symbol for both signs
//! of `beta`, so every stored term has `s`-degree 0 or 1.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CoeffError;

/// Exact rational number used for every stored coefficient.
pub type Rational = BigRational;

pub(crate) fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub(crate) fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Monomial `alpha^alpha * beta^beta * s^s` with `s` in {0, 1}.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamMono {
    pub alpha: u16,
    pub beta: u16,
    pub s: u8,
}

impl ParamMono {
    pub const ONE: ParamMono = ParamMono { alpha: 0, beta: 0, s: 0 };

    /// Product of two monomials. The flag is set when `s^2 -> -beta` was
    /// applied and the coefficient has to be negated.
    #[inline]
    pub(crate) fn mul(self, other: ParamMono) -> (ParamMono, bool) {
        let s = self.s + other.s;
        if s == 2 {
            (ParamMono { alpha: self.alpha + other.alpha, beta: self.beta + other.beta + 1, s: 0 }, true)
        } else {
            (ParamMono { alpha: self.alpha + other.alpha, beta: self.beta + other.beta, s }, false)
        }
    }

    fn eval(self, alpha: Complex64, beta: Complex64, s: Complex64) -> Complex64 {
        let mut v = alpha.powu(self.alpha as u32) * beta.powu(self.beta as u32);
        if self.s == 1 {
            v *= s;
        }
        v
    }
}

/// Element of `Q[alpha, beta, s] / (s^2 + beta)`.
///
/// Terms are kept sorted by `(alpha, beta, s)` exponent with no zero
/// coefficients, so structural equality is mathematical equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ParamScalar {
    terms: Vec<(ParamMono, Rational)>,
}

impl ParamScalar {
    pub fn zero() -> Self {
        ParamScalar { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(rat(n))
    }

    pub fn from_frac(n: i64, d: i64) -> Self {
        Self::from_rational(rat_frac(n, d))
    }

    pub fn from_rational(q: Rational) -> Self {
        Self::monomial(ParamMono::ONE, q)
    }

    pub fn monomial(m: ParamMono, q: Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        // s^2 never appears in a ParamMono built by this crate, but callers
        // may hand in anything.
        let mut m = m;
        let mut q = q;
        while m.s >= 2 {
            m.s -= 2;
            m.beta += 1;
            q = -q;
        }
        ParamScalar { terms: vec![(m, q)] }
    }

    pub fn alpha() -> Self {
        Self::monomial(ParamMono { alpha: 1, beta: 0, s: 0 }, Rational::one())
    }

    pub fn beta() -> Self {
        Self::monomial(ParamMono { alpha: 0, beta: 1, s: 0 }, Rational::one())
    }

    /// The formal square root of `-beta`.
    pub fn s() -> Self {
        Self::monomial(ParamMono { alpha: 0, beta: 0, s: 1 }, Rational::one())
    }

    /// Builds from raw terms, merging duplicates, reducing `s^2` and dropping
    /// zeros.
    pub fn from_terms<I: IntoIterator<Item = (ParamMono, Rational)>>(terms: I) -> Self {
        let mut v: Vec<(ParamMono, Rational)> = Vec::new();
        for (mut m, mut q) in terms {
            while m.s >= 2 {
                m.s -= 2;
                m.beta += 1;
                q = -q;
            }
            v.push((m, q));
        }
        ParamScalar { terms: merge_sorted(v) }
    }

    pub fn terms(&self) -> &[(ParamMono, Rational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == ParamMono::ONE && self.terms[0].1.is_one()
    }

    /// The value if this is a pure rational constant (no alpha, beta or s).
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(m, q)] if *m == ParamMono::ONE => Some(q.clone()),
            _ => None,
        }
    }

    pub fn contains_s(&self) -> bool {
        self.terms.iter().any(|(m, _)| m.s == 1)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        ParamScalar { terms: self.terms.iter().map(|(m, c)| (*m, c * q)).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Coefficient of a single monomial (zero if absent).
    pub fn coeff(&self, m: ParamMono) -> Rational {
        self.terms
            .binary_search_by(|(t, _)| t.cmp(&m))
            .map(|ix| self.terms[ix].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    /// Re-applies the normal form. Idempotent; exposed for property tests.
    pub fn normalized(&self) -> Self {
        Self::from_terms(self.terms.iter().cloned())
    }

    /// Numeric value at the given parameter point.
    ///
    /// `s_branch` must square to `-beta`; for `beta < 0` that is the positive
    /// real root, for `beta > 0` it is `i * sqrt(beta)`.
    pub fn eval(&self, alpha: f64, beta: f64, s_branch: Complex64) -> Result<Complex64, CoeffError> {
        check_branch(beta, s_branch)?;
        Ok(self.eval_unchecked(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0), s_branch))
    }

    pub(crate) fn eval_unchecked(&self, alpha: Complex64, beta: Complex64, s: Complex64) -> Complex64 {
        self.terms.iter().map(|(m, q)| m.eval(alpha, beta, s) * rational_to_f64(q)).sum()
    }
}

/// Branch used by the numeric layer: `sqrt(-beta)` on the principal branch.
pub fn principal_s_branch(beta: f64) -> Complex64 {
    Complex64::new(-beta, 0.0).sqrt()
}

pub(crate) fn check_branch(beta: f64, s: Complex64) -> Result<(), CoeffError> {
    let mismatch = (s * s + beta).norm();
    if mismatch > 1e-10 * (1.0 + beta.abs()) {
        return Err(CoeffError::BranchMismatch { beta, s_re: s.re, s_im: s.im });
    }
    Ok(())
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for a direct conversion
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Sorts by monomial, merges equal monomials and drops zero coefficients.
pub(crate) fn merge_sorted<M: Ord + Copy>(mut v: Vec<(M, Rational)>) -> Vec<(M, Rational)> {
    v.sort_unstable_by_key(|a| a.0);
    let mut out: Vec<(M, Rational)> = Vec::with_capacity(v.len());
    for (m, q) in v {
        match out.last_mut() {
            Some((lm, lq)) if *lm == m => *lq += q,
            _ => {
                if let Some((_, lq)) = out.last() {
                    if lq.is_zero() {
                        out.pop();
                    }
                }
                out.push((m, q));
            }
        }
    }
    if let Some((_, lq)) = out.last() {
        if lq.is_zero() {
            out.pop();
        }
    }
    out
}

/// Merge of two already-normalized sorted term lists, `a + sign*b`.
pub(crate) fn merge_add<M: Ord + Copy>(a: &[(M, Rational)], b: &[(M, Rational)], negate_b: bool) -> Vec<(M, Rational)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let nb = |q: &Rational| if negate_b { -q } else { q.clone() };
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push((b[j].0, nb(&b[j].1)));
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let q = if negate_b { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                if !q.is_zero() {
                    out.push((a[i].0, q));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a[i..].iter().cloned());
    out.extend(b[j..].iter().map(|(m, q)| (*m, nb(q))));
    out
}

impl Add for &ParamScalar {
    type Output = ParamScalar;
    fn add(self, rhs: &ParamScalar) -> ParamScalar {
        ParamScalar { terms: merge_add(&self.terms, &rhs.terms, false) }
    }
}

impl Sub for &ParamScalar {
    type Output = ParamScalar;
    fn sub(self, rhs: &ParamScalar) -> ParamScalar {
        ParamScalar { terms: merge_add(&self.terms, &rhs.terms, true) }
    }
}

impl Mul for &ParamScalar {
    type Output = ParamScalar;
    fn mul(self, rhs: &ParamScalar) -> ParamScalar {
        let mut v = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ma, qa) in &self.terms {
            for (mb, qb) in &rhs.terms {
                let (m, neg) = ma.mul(*mb);
                let q = qa * qb;
                v.push((m, if neg { -q } else { q }));
            }
        }
        ParamScalar { terms: merge_sorted(v) }
    }
}

impl Neg for &ParamScalar {
    type Output = ParamScalar;
    fn neg(self) -> ParamScalar {
        ParamScalar { terms: self.terms.iter().map(|(m, q)| (*m, -q)).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for ParamScalar {
            type Output = ParamScalar;
            fn $f(self, rhs: ParamScalar) -> ParamScalar {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&ParamScalar> for ParamScalar {
            type Output = ParamScalar;
            fn $f(self, rhs: &ParamScalar) -> ParamScalar {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for ParamScalar {
    type Output = ParamScalar;
    fn neg(self) -> ParamScalar {
        -&self
    }
}

impl AddAssign<&ParamScalar> for ParamScalar {
    fn add_assign(&mut self, rhs: &ParamScalar) {
        *self = &*self + rhs;
    }
}

impl From<i64> for ParamScalar {
    fn from(n: i64) -> Self {
        ParamScalar::from_int(n)
    }
}

impl fmt::Display for ParamScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (ix, (m, q)) in self.terms.iter().enumerate() {
            let neg = q.is_negative();
            let abs = q.abs();
            if ix == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let bare = *m == ParamMono::ONE;
            if !abs.is_one() || bare {
                write!(f, "{abs}")?;
                if !bare {
                    write!(f, "*")?;
                }
            }
            let mut parts = Vec::new();
            for (name, e) in [("alpha", m.alpha), ("beta", m.beta), ("s", m.s as u16)] {
                match e {
                    0 => {}
                    1 => parts.push(name.to_string()),
                    e => parts.push(format!("{name}^{e}")),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ParamTermJson {
    da: u16,
    db: u16,
    ds: u8,
    num: String,
    den: String,
}

impl ParamScalar {
    pub(crate) fn to_json_terms(&self) -> Vec<ParamTermJson> {
        self.terms
            .iter()
            .map(|(m, q)| ParamTermJson {
                da: m.alpha,
                db: m.beta,
                ds: m.s,
                num: q.numer().to_string(),
                den: q.denom().to_string(),
            })
            .collect()
    }

    pub(crate) fn from_json_terms(terms: Vec<ParamTermJson>) -> Result<Self, String> {
        let mut v = Vec::with_capacity(terms.len());
        for t in terms {
            if t.ds > 1 {
                return Err(format!("ds must be 0 or 1, got {}", t.ds));
            }
            let num: BigInt = t.num.parse().map_err(|e| format!("bad numerator {:?}: {e}", t.num))?;
            let den: BigInt = t.den.parse().map_err(|e| format!("bad denominator {:?}: {e}", t.den))?;
            if den.is_zero() {
                return Err("zero denominator".into());
            }
            v.push((ParamMono { alpha: t.da, beta: t.db, s: t.ds }, Rational::new(num, den)));
        }
        Ok(ParamScalar::from_terms(v))
    }
}

impl Serialize for ParamScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json_terms().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ParamScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let terms = Vec::<ParamTermJson>::deserialize(deserializer)?;
        ParamScalar::from_json_terms(terms).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn a() -> ParamScalar {
        ParamScalar::alpha()
    }
    fn b() -> ParamScalar {
        ParamScalar::beta()
    }
    fn s() -> ParamScalar {
        ParamScalar::s()
    }

    #[test]
    fn additive_inverse_cancels() {
        assert!((a() + -a()).is_zero());
    }

    #[test]
    fn doubling_s() {
        assert_eq!(s() + s(), s().scale(&rat(2)));
        assert_eq!((b() + s()) + s(), b() + s().scale(&rat(2)));
    }

    #[test]
    fn s_squared_is_minus_beta() {
        assert_eq!(s() * s(), -b());
    }

    #[test]
    fn difference_of_squares_with_s() {
        // (alpha + s)(alpha - s) = alpha^2 - s^2 = alpha^2 + beta
        let lhs = (a() + s()) * (a() - s());
        assert_eq!(lhs, a() * a() + b());
    }

    #[test]
    fn identity_is_neutral() {
        let x = a().scale(&rat_frac(3, 7)) + b() * s();
        assert_eq!(ParamScalar::one() * x.clone(), x);
    }

    #[test]
    fn eval_examples() {
        let e = a() * a() + b();
        let v = e.eval(2.0, -1.0, Complex64::new(1.0, 0.0)).unwrap();
        assert!((v - Complex64::new(3.0, 0.0)).norm() < 1e-15);
        let v = s().eval(0.0, -4.0, Complex64::new(2.0, 0.0)).unwrap();
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let v = s().eval(0.0, 4.0, Complex64::new(0.0, 2.0)).unwrap();
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_rejects_wrong_branch() {
        let err = s().eval(0.0, 4.0, Complex64::new(2.0, 0.0)).unwrap_err();
        assert!(matches!(err, CoeffError::BranchMismatch { .. }));
    }

    #[test]
    fn display_is_readable() {
        let e = a().scale(&rat(2)) - s() + ParamScalar::from_frac(1, 2);
        assert_eq!(e.to_string(), "1/2 - s + 2*alpha");
    }

    #[test]
    fn json_shape() {
        let e = b().scale(&rat_frac(-3, 2)) + s();
        let j = serde_json::to_value(&e).unwrap();
        assert_eq!(
            j,
            serde_json::json!([
                {"da": 0, "db": 0, "ds": 1, "num": "1", "den": "1"},
                {"da": 0, "db": 1, "ds": 0, "num": "-3", "den": "2"}
            ])
        );
        let back: ParamScalar = serde_json::from_value(j).unwrap();
        assert_eq!(back, e);
    }

    fn arb_scalar() -> impl Strategy<Value = ParamScalar> {
        prop::collection::vec((0u16..3, 0u16..3, 0u8..3, -9i64..10, 1i64..5), 0..5).prop_map(|ts| {
            ParamScalar::from_terms(
                ts.into_iter().map(|(da, db, ds, n, d)| (ParamMono { alpha: da, beta: db, s: ds }, rat_frac(n, d))),
            )
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(x in arb_scalar(), y in arb_scalar(), z in arb_scalar()) {
            prop_assert_eq!(&x + &y, &y + &x);
            prop_assert_eq!(&x * &y, &y * &x);
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        }

        #[test]
        fn normal_form_invariants(x in arb_scalar()) {
            prop_assert!(x.terms().iter().all(|(m, q)| m.s <= 1 && !q.is_zero()));
            prop_assert_eq!(x.normalized(), x.clone());
        }

        #[test]
        fn eval_is_homomorphism(
            x in arb_scalar(), y in arb_scalar(),
            alpha in -2.0f64..2.0, beta in -3.0f64..3.0,
        ) {
            let sb = principal_s_branch(beta);
            let lhs = (&x * &y).eval(alpha, beta, sb).unwrap();
            let rhs = x.eval(alpha, beta, sb).unwrap() * y.eval(alpha, beta, sb).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm().max(rhs.norm())));
        }
    }
}
