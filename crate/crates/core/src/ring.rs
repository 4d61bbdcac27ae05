//! The differential ring `Q[alpha, beta, s][x, f, 1/f, f']` closed under
//! `d/dx`, where `f''` is always rewritten through the Painleve IV equation
//!
//! ```text
//! f'' = f'^2/(2f) + 6f^3 + 8xf^2 + 2(x^2 - 1 - alpha) f + beta/(2f)
//! ```
//!
//! Since `f''` can only arise from differentiating `f'`, the rewrite happens
//! there and nowhere else; every `RingElem` is in normal form by
//! construction.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::coeff::{
    check_branch, merge_add, merge_sorted, rat, rat_frac, ParamMono, ParamScalar, ParamTermJson, Rational,
};
use crate::error::RingError;

/// `x^x * f^f * f'^fp` times a parameter monomial.
///
/// Exponents `(k, i, j)` of `x^k f^i f'^j`.
pub type ExpKey = (u16, i16, u16);

/// Field order gives the canonical term order: lexicographic on
/// `(x, f, fp)` and then on the parameter exponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono {
    pub x: u16,
    pub f: i16,
    pub fp: u16,
    pub p: ParamMono,
}

impl Mono {
    pub const ONE: Mono = Mono { x: 0, f: 0, fp: 0, p: ParamMono::ONE };

    #[inline]
    fn mul(self, o: Mono) -> (Mono, bool) {
        let (p, neg) = self.p.mul(o.p);
        (Mono { x: self.x + o.x, f: self.f + o.f, fp: self.fp + o.fp, p }, neg)
    }

    pub fn key(&self) -> ExpKey {
        (self.x, self.f, self.fp)
    }
}

/// Element of the Painleve IV differential ring, kept as a sorted flat list
/// of `(monomial, rational)` pairs without zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RingElem {
    terms: Vec<(Mono, Rational)>,
}

fn rhs_terms() -> &'static [(Mono, Rational)] {
    static RHS: OnceLock<Vec<(Mono, Rational)>> = OnceLock::new();
    RHS.get_or_init(|| RingElem::p4_rhs().terms)
}

impl RingElem {
    pub fn zero() -> Self {
        RingElem { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(&ParamScalar::one())
    }

    pub fn int(n: i64) -> Self {
        Self::constant(&ParamScalar::from_int(n))
    }

    pub fn constant(c: &ParamScalar) -> Self {
        Self::monomial(0, 0, 0, c)
    }

    /// `c * x^k * f^i * f'^j`.
    pub fn monomial(k: u16, i: i16, j: u16, c: &ParamScalar) -> Self {
        RingElem { terms: c.terms().iter().map(|(p, q)| (Mono { x: k, f: i, fp: j, p: *p }, q.clone())).collect() }
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, 0, &ParamScalar::one())
    }

    pub fn f() -> Self {
        Self::monomial(0, 1, 0, &ParamScalar::one())
    }

    pub fn fp() -> Self {
        Self::monomial(0, 0, 1, &ParamScalar::one())
    }

    pub fn f_pow(i: i16) -> Self {
        Self::monomial(0, i, 0, &ParamScalar::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (Mono, Rational)>>(terms: I) -> Self {
        let mut v = Vec::new();
        for (m, q) in terms {
            let mut m = m;
            let mut q = q;
            while m.p.s >= 2 {
                m.p.s -= 2;
                m.p.beta += 1;
                q = -q;
            }
            v.push((m, q));
        }
        RingElem { terms: merge_sorted(v) }
    }

    /// Right-hand side of the Painleve IV equation, the value of `f''`.
    pub fn p4_rhs() -> Self {
        let one = ParamScalar::one();
        let terms = [
            RingElem::monomial(0, -1, 2, &ParamScalar::from_frac(1, 2)),
            RingElem::monomial(0, 3, 0, &ParamScalar::from_int(6)),
            RingElem::monomial(1, 2, 0, &ParamScalar::from_int(8)),
            RingElem::monomial(2, 1, 0, &ParamScalar::from_int(2)),
            RingElem::monomial(0, 1, 0, &(&one + &ParamScalar::alpha()).scale(&rat(-2))),
            RingElem::monomial(0, -1, 0, &ParamScalar::beta().scale(&rat_frac(1, 2))),
        ];
        terms.iter().fold(RingElem::zero(), |acc, t| &acc + t)
    }

    pub fn terms(&self) -> &[(Mono, Rational)] {
        &self.terms
    }

    /// Number of flat terms (parameter monomials counted separately).
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms grouped by `(x, f, f')` exponent with their parameter
    /// coefficients, in canonical order.
    pub fn grouped(&self) -> Vec<(ExpKey, ParamScalar)> {
        let mut out: Vec<(ExpKey, Vec<(ParamMono, Rational)>)> = Vec::new();
        for (m, q) in &self.terms {
            match out.last_mut() {
                Some((k, v)) if *k == m.key() => v.push((m.p, q.clone())),
                _ => out.push((m.key(), vec![(m.p, q.clone())])),
            }
        }
        out.into_iter().map(|(k, v)| (k, ParamScalar::from_terms(v))).collect()
    }

    /// Parameter coefficient of `x^k f^i f'^j`.
    pub fn coeff(&self, k: u16, i: i16, j: u16) -> ParamScalar {
        let start = self.terms.partition_point(|(m, _)| m.key() < (k, i, j));
        ParamScalar::from_terms(
            self.terms[start..].iter().take_while(|(m, _)| m.key() == (k, i, j)).map(|(m, q)| (m.p, q.clone())),
        )
    }

    /// If the element is a pure parameter constant, returns it.
    pub fn as_constant(&self) -> Option<ParamScalar> {
        if self.terms.iter().all(|(m, _)| m.key() == (0, 0, 0)) {
            Some(self.coeff(0, 0, 0))
        } else {
            None
        }
    }

    pub fn contains_s(&self) -> bool {
        self.terms.iter().any(|(m, _)| m.p.s == 1)
    }

    pub fn min_f_exponent(&self) -> Option<i16> {
        self.terms.iter().map(|(m, _)| m.f).min()
    }

    pub fn max_f_exponent(&self) -> Option<i16> {
        self.terms.iter().map(|(m, _)| m.f).max()
    }

    pub fn max_x_degree(&self) -> Option<u16> {
        self.terms.iter().map(|(m, _)| m.x).max()
    }

    pub fn max_fp_degree(&self) -> Option<u16> {
        self.terms.iter().map(|(m, _)| m.fp).max()
    }

    pub fn scale(&self, q: &Rational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        RingElem { terms: self.terms.iter().map(|(m, c)| (*m, c * q)).collect() }
    }

    pub fn scale_param(&self, c: &ParamScalar) -> Self {
        self * &RingElem::constant(c)
    }

    /// Multiplies by `f^i`.
    pub fn shift_f(&self, i: i16) -> Self {
        RingElem { terms: self.terms.iter().map(|(m, q)| (Mono { f: m.f + i, ..*m }, q.clone())).collect() }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = RingElem::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Appends the terms of `scale * self * other` to `out` without
    /// normalizing; pair with [`RingElem::from_raw`].
    pub(crate) fn mul_into(&self, other: &RingElem, scale: &Rational, out: &mut Vec<(Mono, Rational)>) {
        out.reserve(self.terms.len() * other.terms.len());
        for (ma, qa) in &self.terms {
            let qs = qa * scale;
            for (mb, qb) in &other.terms {
                let (m, neg) = ma.mul(*mb);
                let q = &qs * qb;
                out.push((m, if neg { -q } else { q }));
            }
        }
    }

    pub(crate) fn from_raw(v: Vec<(Mono, Rational)>) -> Self {
        RingElem { terms: merge_sorted(v) }
    }

    /// Total derivative in `x` with `f'' -> p4_rhs()`.
    pub fn derive(&self) -> Self {
        let rhs = rhs_terms();
        let mut v: Vec<(Mono, Rational)> = Vec::with_capacity(self.terms.len() * (2 + rhs.len()));
        for (m, q) in &self.terms {
            if m.x > 0 {
                v.push((Mono { x: m.x - 1, ..*m }, q * rat(m.x as i64)));
            }
            if m.f != 0 {
                v.push((Mono { f: m.f - 1, fp: m.fp + 1, ..*m }, q * rat(m.f as i64)));
            }
            if m.fp > 0 {
                let base = Mono { fp: m.fp - 1, ..*m };
                let qj = q * rat(m.fp as i64);
                for (r, rq) in rhs {
                    let (mm, neg) = base.mul(*r);
                    let c = &qj * rq;
                    v.push((mm, if neg { -c } else { c }));
                }
            }
        }
        RingElem { terms: merge_sorted(v) }
    }

    /// `n`-fold derivative, returning `[self, self', ..., self^(n)]`.
    pub fn derivatives(&self, n: usize) -> Vec<RingElem> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(self.clone());
        for k in 0..n {
            let d = out[k].derive();
            out.push(d);
        }
        out
    }

    /// Numeric value at a point. `s_branch` must square to `-beta`.
    pub fn eval(
        &self,
        x: f64,
        f: f64,
        fp: f64,
        alpha: f64,
        beta: f64,
        s_branch: Complex64,
    ) -> Result<Complex64, RingError> {
        check_branch(beta, s_branch)?;
        self.compile(alpha, beta, s_branch).eval(x, f, fp)
    }

    /// Substitutes numeric parameter values once, for repeated evaluation on
    /// a grid.
    pub fn compile(&self, alpha: f64, beta: f64, s_branch: Complex64) -> CompiledElem {
        let a = Complex64::new(alpha, 0.0);
        let b = Complex64::new(beta, 0.0);
        let terms =
            self.grouped().into_iter().map(|((k, i, j), c)| (k, i, j, c.eval_unchecked(a, b, s_branch))).collect();
        CompiledElem { terms }
    }
}

/// A `RingElem` with numeric parameters substituted.
#[derive(Clone, Debug)]
pub struct CompiledElem {
    terms: Vec<(u16, i16, u16, Complex64)>,
}

impl CompiledElem {
    pub fn eval(&self, x: f64, f: f64, fp: f64) -> Result<Complex64, RingError> {
        let mut acc = Complex64::zero();
        for &(k, i, j, c) in &self.terms {
            if i < 0 && f == 0.0 {
                return Err(RingError::Pole { f });
            }
            acc += c * (x.powi(k as i32) * f.powi(i as i32) * fp.powi(j as i32));
        }
        Ok(acc)
    }
}

impl Add for &RingElem {
    type Output = RingElem;
    fn add(self, rhs: &RingElem) -> RingElem {
        RingElem { terms: merge_add(&self.terms, &rhs.terms, false) }
    }
}

impl Sub for &RingElem {
    type Output = RingElem;
    fn sub(self, rhs: &RingElem) -> RingElem {
        RingElem { terms: merge_add(&self.terms, &rhs.terms, true) }
    }
}

impl Mul for &RingElem {
    type Output = RingElem;
    fn mul(self, rhs: &RingElem) -> RingElem {
        if self.terms.is_empty() || rhs.terms.is_empty() {
            return RingElem::zero();
        }
        let mut v = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ma, qa) in &self.terms {
            for (mb, qb) in &rhs.terms {
                let (m, neg) = ma.mul(*mb);
                let q = qa * qb;
                v.push((m, if neg { -q } else { q }));
            }
        }
        RingElem { terms: merge_sorted(v) }
    }
}

impl Neg for &RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        RingElem { terms: self.terms.iter().map(|(m, q)| (*m, -q)).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for RingElem {
            type Output = RingElem;
            fn $f(self, rhs: RingElem) -> RingElem {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&RingElem> for RingElem {
            type Output = RingElem;
            fn $f(self, rhs: &RingElem) -> RingElem {
                (&self).$f(rhs)
            }
        }
        impl $tr<RingElem> for &RingElem {
            type Output = RingElem;
            fn $f(self, rhs: RingElem) -> RingElem {
                self.$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for RingElem {
    type Output = RingElem;
    fn neg(self) -> RingElem {
        -&self
    }
}

impl From<ParamScalar> for RingElem {
    fn from(c: ParamScalar) -> Self {
        RingElem::constant(&c)
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let groups = self.grouped();
        if groups.is_empty() {
            return write!(f, "0");
        }
        for (ix, ((k, i, j), c)) in groups.iter().enumerate() {
            if ix > 0 {
                write!(f, " + ")?;
            }
            let single = c.terms().len() == 1;
            let coeff_str = c.to_string();
            let mut vars = Vec::new();
            for (name, e) in [("x", *k as i32), ("f", *i as i32), ("f'", *j as i32)] {
                match e {
                    0 => {}
                    1 => vars.push(name.to_string()),
                    e => vars.push(format!("{name}^{e}")),
                }
            }
            if vars.is_empty() {
                write!(f, "({coeff_str})")?;
            } else if single && c.terms()[0].1.abs().is_one() && c.terms()[0].0 == ParamMono::ONE {
                let sign = if c.terms()[0].1.is_negative() { "-" } else { "" };
                write!(f, "{sign}{}", vars.join("*"))?;
            } else {
                write!(f, "({coeff_str})*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    k: u16,
    i: i16,
    j: u16,
    coeff: Vec<ParamTermJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElemJson {
    terms: Vec<TermJson>,
}

impl Serialize for RingElem {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ElemJson {
            terms: self
                .grouped()
                .into_iter()
                .map(|((k, i, j), c)| TermJson { k, i, j, coeff: c.to_json_terms() })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RingElem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let e = ElemJson::deserialize(deserializer)?;
        let mut flat = Vec::new();
        for t in e.terms {
            let c = ParamScalar::from_json_terms(t.coeff).map_err(serde::de::Error::custom)?;
            flat.extend(c.terms().iter().map(|(p, q)| (Mono { x: t.k, f: t.i, fp: t.j, p: *p }, q.clone())));
        }
        Ok(RingElem::from_terms(flat))
    }
}

impl RingElem {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ring element serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, RingError> {
        serde_json::from_str(s).map_err(|e| RingError::Json(e.to_string()))
    }
}
