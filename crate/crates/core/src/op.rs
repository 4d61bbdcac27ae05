//! Linear differential operators `sum_d e_d * D^d` with coefficients in the
//! Painleve IV ring, and the concrete operators of the model: the
//! Hamiltonian, the factors `M+`, `M-`, `Q+`, `Q-` and the ladder pair
//! `c = M+ Q-`, `c† = Q+ M-`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::{rat, rat_frac, ParamScalar, Rational};
use crate::error::OpError;
use crate::ring::RingElem;

/// `sum_d coeffs[d] * D^d`, trimmed so that the top coefficient is nonzero.
/// The zero operator has no coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<RingElem>", into = "Vec<RingElem>")]
pub struct DiffOp {
    coeffs: Vec<RingElem>,
}

impl From<Vec<RingElem>> for DiffOp {
    fn from(coeffs: Vec<RingElem>) -> Self {
        DiffOp::new(coeffs)
    }
}

impl From<DiffOp> for Vec<RingElem> {
    fn from(op: DiffOp) -> Self {
        op.coeffs
    }
}

fn binomial(n: usize, k: usize) -> Rational {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    BigRational::from_integer(acc)
}

impl DiffOp {
    pub fn new(coeffs: Vec<RingElem>) -> Self {
        let mut op = DiffOp { coeffs };
        op.trim();
        op
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn zero() -> Self {
        DiffOp { coeffs: Vec::new() }
    }

    pub fn identity() -> Self {
        Self::multiplication(RingElem::one())
    }

    /// The derivation `D = d/dx`.
    pub fn d() -> Self {
        DiffOp::new(vec![RingElem::zero(), RingElem::one()])
    }

    /// Multiplication by a ring element (an order-0 operator).
    pub fn multiplication(e: RingElem) -> Self {
        DiffOp::new(vec![e])
    }

    /// `sign * D + w`, the first-order factors used throughout.
    pub fn first_order(sign: i64, w: &RingElem) -> Self {
        DiffOp::new(vec![w.clone(), RingElem::int(sign)])
    }

    pub fn coeffs(&self) -> &[RingElem] {
        &self.coeffs
    }

    /// Coefficient of `D^d` (zero beyond the order).
    pub fn coeff(&self, d: usize) -> RingElem {
        self.coeffs.get(d).cloned().unwrap_or_default()
    }

    pub fn order(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&RingElem> {
        self.coeffs.last()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn contains_s(&self) -> bool {
        self.coeffs.iter().any(RingElem::contains_s)
    }

    /// Total number of flat terms over all coefficients.
    pub fn term_count(&self) -> usize {
        self.coeffs.iter().map(RingElem::len).sum()
    }

    pub fn scale(&self, q: &Rational) -> Self {
        DiffOp::new(self.coeffs.iter().map(|c| c.scale(q)).collect())
    }

    pub fn scale_param(&self, c: &ParamScalar) -> Self {
        let e = RingElem::constant(c);
        DiffOp::new(self.coeffs.iter().map(|x| x * &e).collect())
    }

    /// `e * A`: multiplies every coefficient from the left.
    pub fn left_mul(&self, e: &RingElem) -> Self {
        DiffOp::new(self.coeffs.iter().map(|x| x * e).collect())
    }

    /// Operator product `self ∘ rhs`, expanded with `D g = g D + g'`.
    pub fn compose(&self, rhs: &DiffOp) -> DiffOp {
        if self.is_zero() || rhs.is_zero() {
            return DiffOp::zero();
        }
        let da = self.coeffs.len() - 1;
        let db = rhs.coeffs.len() - 1;
        let derivs: Vec<Vec<RingElem>> = rhs.coeffs.par_iter().map(|b| b.derivatives(da)).collect();
        let binoms: Vec<Vec<Rational>> = (0..=da).map(|d| (0..=d).map(|m| binomial(d, m)).collect()).collect();
        // D^d ∘ (b D^e) = sum_m C(d,m) b^(m) D^(d-m+e)
        let out: Vec<RingElem> = (0..=da + db)
            .into_par_iter()
            .map(|target| {
                let mut raw = Vec::new();
                for (d, a) in self.coeffs.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    for m in 0..=d {
                        // e = target - d + m
                        let Some(e) = (target + m).checked_sub(d) else { continue };
                        if e > db {
                            continue;
                        }
                        let b = &derivs[e][m];
                        if b.is_zero() {
                            continue;
                        }
                        a.mul_into(b, &binoms[d][m], &mut raw);
                    }
                }
                RingElem::from_raw(raw)
            })
            .collect();
        DiffOp::new(out)
    }

    pub fn commutator(&self, rhs: &DiffOp) -> DiffOp {
        let (ab, ba) = rayon::join(|| self.compose(rhs), || rhs.compose(self));
        &ab - &ba
    }

    pub fn pow(&self, n: u32) -> DiffOp {
        let mut acc = DiffOp::identity();
        for _ in 0..n {
            acc = self.compose(&acc);
        }
        acc
    }

    /// `sum_d coeffs[d] * e^(d)`.
    pub fn apply(&self, e: &RingElem) -> RingElem {
        let Some(ord) = self.order() else {
            return RingElem::zero();
        };
        let derivs = e.derivatives(ord);
        let mut raw = Vec::new();
        let one = Rational::one();
        for (c, de) in self.coeffs.iter().zip(&derivs) {
            c.mul_into(de, &one, &mut raw);
        }
        RingElem::from_raw(raw)
    }

    /// The operator `Ã` with `A(exp(∫w) p) = exp(∫w) Ã(p)`, obtained by
    /// substituting `D -> D + w`.
    pub fn gauge_conjugate(&self, w: &RingElem) -> DiffOp {
        let shift = DiffOp::first_order(1, w);
        let mut power = DiffOp::identity();
        let mut acc = DiffOp::zero();
        for (d, a) in self.coeffs.iter().enumerate() {
            if d > 0 {
                power = shift.compose(&power);
            }
            if !a.is_zero() {
                acc = &acc + &power.left_mul(a);
            }
        }
        acc
    }

    /// `sum_k coeffs[k] * self^k`, i.e. a polynomial in this operator.
    pub fn polynomial_in(&self, coeffs: &[ParamScalar]) -> DiffOp {
        // Horner: (((c_m) H + c_{m-1}) H + ...)
        let mut acc = DiffOp::zero();
        for c in coeffs.iter().rev() {
            acc = &acc.compose(self) + &DiffOp::multiplication(RingElem::constant(c));
        }
        acc
    }

    /// Writes `self` as `sum_k b_k * base^k` with parameter constants `b_k`,
    /// or returns `None` when no such expansion exists.
    ///
    /// `base` must have a rational constant leading coefficient. The
    /// expansion is found by peeling off the top order repeatedly, which is
    /// the triangular solve of the linear system against `base^0..base^m`.
    pub fn as_polynomial_in(&self, base: &DiffOp) -> Option<Vec<ParamScalar>> {
        if self.is_zero() {
            return Some(Vec::new());
        }
        let r = base.order()?;
        if r == 0 {
            return None;
        }
        let lead_base = base.leading()?.as_constant()?.as_rational()?;
        let ord = self.order()?;
        if ord % r != 0 {
            return None;
        }
        let m = ord / r;
        let mut powers = vec![DiffOp::identity()];
        for k in 1..=m {
            let next = base.compose(&powers[k - 1]);
            powers.push(next);
        }
        let mut rem = self.clone();
        let mut out = vec![ParamScalar::zero(); m + 1];
        for k in (0..=m).rev() {
            match rem.order() {
                None => break,
                Some(o) if o > k * r => return None,
                Some(o) if o == k * r => {
                    let lead = rem.leading()?.as_constant()?;
                    let mut denom = Rational::one();
                    for _ in 0..k {
                        denom *= &lead_base;
                    }
                    let b = lead.scale(&(Rational::one() / denom));
                    rem = &rem - &powers[k].scale_param(&b);
                    out[k] = b;
                }
                Some(_) => {}
            }
        }
        if !rem.is_zero() {
            return None;
        }
        while out.last().is_some_and(ParamScalar::is_zero) {
            out.pop();
        }
        Some(out)
    }
}

impl Add for &DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: &DiffOp) -> DiffOp {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        DiffOp::new((0..n).map(|d| &self.coeff(d) + &rhs.coeff(d)).collect())
    }
}

impl Sub for &DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: &DiffOp) -> DiffOp {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        DiffOp::new((0..n).map(|d| &self.coeff(d) - &rhs.coeff(d)).collect())
    }
}

impl Neg for &DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        DiffOp::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &DiffOp {
    type Output = DiffOp;
    fn mul(self, rhs: &DiffOp) -> DiffOp {
        self.compose(rhs)
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match d {
                0 => write!(f, "[{c}]")?,
                1 => write!(f, "[{c}] D")?,
                _ => write!(f, "[{c}] D^{d}")?,
            }
        }
        Ok(())
    }
}

/// Which superpotential a gauge prefactor `exp(∫W dx)` is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GaugeTag {
    W1,
    W3,
}

impl GaugeTag {
    pub fn which(self) -> WhichW {
        match self {
            GaugeTag::W1 => WhichW::W1,
            GaugeTag::W3 => WhichW::W3,
        }
    }
}

impl fmt::Display for GaugeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeTag::W1 => write!(f, "W1"),
            GaugeTag::W3 => write!(f, "W3"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WhichW {
    W1,
    W2,
    W3,
}

/// `W1 = -f + (f' - s)/(2f)`, `W2 = -f - (f' - s)/(2f)`, `W3 = -2f - x`.
pub fn build_w(which: WhichW) -> RingElem {
    let half = ParamScalar::from_frac(1, 2);
    // (f' - s)/(2f)
    let frac =
        &RingElem::monomial(0, -1, 1, &half) - &RingElem::monomial(0, -1, 0, &ParamScalar::s().scale(&rat_frac(1, 2)));
    match which {
        WhichW::W1 => &(-&RingElem::f()) + &frac,
        WhichW::W2 => &(-&RingElem::f()) - &frac,
        WhichW::W3 => &RingElem::f().scale(&rat(-2)) - &RingElem::x(),
    }
}

/// The potential `-2f' + 4f^2 + 4xf + x^2 - 1`.
pub fn potential() -> RingElem {
    let one = ParamScalar::one();
    RingElem::monomial(0, 0, 1, &ParamScalar::from_int(-2))
        + RingElem::monomial(0, 2, 0, &ParamScalar::from_int(4))
        + RingElem::monomial(1, 1, 0, &ParamScalar::from_int(4))
        + RingElem::monomial(2, 0, 0, &one)
        - RingElem::constant(&one)
}

/// `H = -D^2 - 2f' + 4f^2 + 4xf + x^2 - 1`.
pub fn build_h() -> DiffOp {
    DiffOp::new(vec![potential(), RingElem::zero(), RingElem::int(-1)])
}

/// `(c, c†)` for the standard realization.
pub fn build_ladders() -> Result<(DiffOp, DiffOp), OpError> {
    let r = Realization::new()?;
    Ok((r.c, r.cdag))
}

/// All operators of one realization, built once.
#[derive(Clone, Debug)]
pub struct Realization {
    pub w1: RingElem,
    pub w2: RingElem,
    pub w3: RingElem,
    pub h: DiffOp,
    pub m_plus: DiffOp,
    pub m_minus: DiffOp,
    pub q_plus: DiffOp,
    pub q_minus: DiffOp,
    pub c: DiffOp,
    pub cdag: DiffOp,
}

impl Realization {
    pub fn new() -> Result<Self, OpError> {
        Self::build(false)
    }

    /// Negative control: flips the sign of `W3` inside `Q±` (the Hamiltonian
    /// is left as is), which must break `[H, c] = -2c`.
    pub fn with_w3_sign_flip() -> Result<Self, OpError> {
        Self::build(true)
    }

    fn build(flip_w3: bool) -> Result<Self, OpError> {
        let w1 = build_w(WhichW::W1);
        let w2 = build_w(WhichW::W2);
        let mut w3 = build_w(WhichW::W3);
        if flip_w3 {
            w3 = -&w3;
        }
        let m_plus = DiffOp::first_order(1, &w1).compose(&DiffOp::first_order(1, &w2));
        let m_minus = DiffOp::first_order(-1, &w2).compose(&DiffOp::first_order(-1, &w1));
        let q_plus = DiffOp::first_order(1, &w3);
        let q_minus = DiffOp::first_order(-1, &w3);
        let c = m_plus.compose(&q_minus);
        let cdag = q_plus.compose(&m_minus);
        if c.contains_s() {
            return Err(OpError::SurvivingS("c"));
        }
        if cdag.contains_s() {
            return Err(OpError::SurvivingS("c†"));
        }
        Ok(Realization { w1, w2, w3, h: build_h(), m_plus, m_minus, q_plus, q_minus, c, cdag })
    }

    pub fn w(&self, which: WhichW) -> &RingElem {
        match which {
            WhichW::W1 => &self.w1,
            WhichW::W2 => &self.w2,
            WhichW::W3 => &self.w3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(n: i64) -> RingElem {
        RingElem::int(n)
    }

    #[test]
    fn leibniz_for_d_times_f() {
        let lhs = DiffOp::d().compose(&DiffOp::multiplication(RingElem::f()));
        assert_eq!(lhs, DiffOp::new(vec![RingElem::fp(), RingElem::f()]));
    }

    #[test]
    fn identity_is_neutral() {
        let h = build_h();
        assert_eq!(h.compose(&DiffOp::identity()), h);
        assert_eq!(DiffOp::identity().compose(&h), h);
    }

    #[test]
    fn q_plus_q_minus_is_h() {
        let w3 = build_w(WhichW::W3);
        let prod = DiffOp::first_order(1, &w3).compose(&DiffOp::first_order(-1, &w3));
        // order-0 part is W3' + W3^2
        assert_eq!(prod.coeff(0), &w3.derive() + &(&w3 * &w3));
        assert_eq!(prod, build_h());
    }

    #[test]
    fn self_commutator_vanishes() {
        let h = build_h();
        assert!(h.commutator(&h).is_zero());
    }

    #[test]
    fn apply_basics() {
        assert_eq!(DiffOp::d().apply(&RingElem::f()), RingElem::fp());
        assert_eq!(DiffOp::d().pow(2).apply(&RingElem::f()), RingElem::p4_rhs());
        let e = &RingElem::x() * &RingElem::fp();
        assert_eq!(DiffOp::identity().apply(&e), e);
    }

    #[test]
    fn gauge_of_d_on_one() {
        let w = build_w(WhichW::W3);
        assert_eq!(DiffOp::d().gauge_conjugate(&w).apply(&RingElem::one()), w);
    }

    #[test]
    fn ground_state_energy_zero() {
        let w3 = build_w(WhichW::W3);
        assert!(build_h().gauge_conjugate(&w3).apply(&RingElem::one()).is_zero());
    }

    #[test]
    fn gauge_is_homomorphism() {
        let w = build_w(WhichW::W1);
        let a = DiffOp::new(vec![RingElem::x(), RingElem::f()]);
        let b = DiffOp::new(vec![RingElem::fp(), re(0), RingElem::f_pow(-1)]);
        let lhs = a.compose(&b).gauge_conjugate(&w);
        let rhs = a.gauge_conjugate(&w).compose(&b.gauge_conjugate(&w));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn superpotentials() {
        let w1 = build_w(WhichW::W1);
        let w2 = build_w(WhichW::W2);
        assert_eq!(build_w(WhichW::W3), RingElem::f().scale(&rat(-2)) - RingElem::x());
        assert_eq!(&w1 + &w2, RingElem::f().scale(&rat(-2)));
        let diff = RingElem::monomial(0, -1, 1, &ParamScalar::one()) - RingElem::monomial(0, -1, 0, &ParamScalar::s());
        assert_eq!(&w1 - &w2, diff);
    }

    #[test]
    fn hamiltonian_shape() {
        let h = build_h();
        assert_eq!(h.order(), Some(2));
        assert_eq!(h.coeff(2), re(-1));
        assert!(h.coeff(1).is_zero());
        assert_eq!(h.coeff(0).coeff(0, 2, 0), ParamScalar::from_int(4));
    }

    #[test]
    fn ladder_shapes() {
        let r = Realization::new().unwrap();
        assert_eq!(r.c.order(), Some(3));
        assert_eq!(r.cdag.order(), Some(3));
        assert_eq!(r.m_plus.coeff(1), RingElem::f().scale(&rat(-2)));
        // s cancels from g = W2' + W1 W2
        assert!(!r.m_plus.coeff(0).contains_s());
        assert!(!r.m_minus.contains_s());
    }

    #[test]
    fn polynomial_round_trip() {
        let h = build_h();
        let coeffs = vec![ParamScalar::beta(), ParamScalar::from_int(-3), ParamScalar::alpha()];
        let p = h.polynomial_in(&coeffs);
        assert_eq!(p.as_polynomial_in(&h), Some(coeffs));
        // D alone is not a polynomial in H
        assert_eq!(DiffOp::d().as_polynomial_in(&h), None);
        assert_eq!(DiffOp::multiplication(RingElem::f()).as_polynomial_in(&h), None);
    }

    #[test]
    fn json_is_array_of_elements() {
        let h = build_h();
        let v = serde_json::to_value(&h).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 3);
        let back: DiffOp = serde_json::from_value(v).unwrap();
        assert_eq!(back, h);
    }
}
