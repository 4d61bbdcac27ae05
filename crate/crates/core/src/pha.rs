//! Quadratic polynomial Heisenberg algebras, independent of any realization:
//!
//! ```text
//! [H, c] = -a c,   [H, c†] = a c†,   [c, c†] = F(H) = b2 H^2 + b1 H + b0
//! ```
//!
//! Everything here is a statement about univariate polynomials in `H` over
//! the parameter ring.

use std::fmt;

use serde::Serialize;

use crate::coeff::{rat, rat_frac, ParamScalar, Rational};
use crate::error::PhaError;

/// Univariate polynomial in `H`, coefficients in ascending degree, no
/// trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HPoly {
    coeffs: Vec<ParamScalar>,
}

impl HPoly {
    pub fn new(coeffs: Vec<ParamScalar>) -> Self {
        let mut p = HPoly { coeffs };
        while p.coeffs.last().is_some_and(ParamScalar::is_zero) {
            p.coeffs.pop();
        }
        p
    }

    pub fn zero() -> Self {
        HPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: ParamScalar) -> Self {
        HPoly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[ParamScalar] {
        &self.coeffs
    }

    /// Coefficient of `H^k`.
    pub fn coeff(&self, k: usize) -> ParamScalar {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, h: &ParamScalar) -> ParamScalar {
        let mut acc = ParamScalar::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * h) + c;
        }
        acc
    }

    pub fn add(&self, other: &HPoly) -> HPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        HPoly::new((0..n).map(|k| &self.coeff(k) + &other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &HPoly) -> HPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        HPoly::new((0..n).map(|k| &self.coeff(k) - &other.coeff(k)).collect())
    }

    pub fn neg(&self) -> HPoly {
        HPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, c: &ParamScalar) -> HPoly {
        HPoly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &HPoly) -> HPoly {
        if self.is_zero() || other.is_zero() {
            return HPoly::zero();
        }
        let mut out = vec![ParamScalar::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        HPoly::new(out)
    }

    /// `p(H + shift)`.
    pub fn shift(&self, shift: &ParamScalar) -> HPoly {
        let lin = HPoly::new(vec![shift.clone(), ParamScalar::one()]);
        let mut acc = HPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&HPoly::constant(c.clone()));
        }
        acc
    }
}

impl fmt::Display for HPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*H")?,
                _ => write!(f, "({c})*H^{k}")?,
            }
        }
        Ok(())
    }
}

/// Structure constants `(a, b2, b1, b0)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhaSignature {
    pub a: ParamScalar,
    pub b2: ParamScalar,
    pub b1: ParamScalar,
    pub b0: ParamScalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Raise,
    Lower,
}

impl PhaSignature {
    pub fn new(a: ParamScalar, b2: ParamScalar, b1: ParamScalar, b0: ParamScalar) -> Result<Self, PhaError> {
        if a.is_zero() {
            return Err(PhaError::ZeroShift);
        }
        Ok(PhaSignature { a, b2, b1, b0 })
    }

    /// `[c, c†]` for the Painleve IV ladder pair, with `a = 2`:
    /// `F(H) = 6H^2 - (8 alpha + 4) H + 2(alpha^2 + beta)`.
    ///
    /// This is the orientation the operator computation produces; the
    /// `verify` module re-derives it from scratch.
    pub fn painleve_iv() -> Self {
        Self::painleve_iv_reversed().negate_bracket()
    }

    /// The same pair read with the bracket reversed, `[c†, c] =
    /// -6H^2 + (8 alpha + 4) H - 2(alpha^2 + beta)`. The closed forms
    /// [`fn_lowest`] and [`fn_highest`] are the `R_n` / `S_n` templates
    /// evaluated with these constants.
    pub fn painleve_iv_reversed() -> Self {
        let alpha = ParamScalar::alpha();
        let beta = ParamScalar::beta();
        PhaSignature {
            a: ParamScalar::from_int(2),
            b2: ParamScalar::from_int(-6),
            b1: (&alpha.scale(&rat(8)) + &ParamScalar::from_int(4)),
            b0: (&(&alpha * &alpha) + &beta).scale(&rat(-2)),
        }
    }

    /// Flips the sign of `F` keeping `a`.
    pub fn negate_bracket(&self) -> Self {
        PhaSignature { a: self.a.clone(), b2: -&self.b2, b1: -&self.b1, b0: -&self.b0 }
    }
}

/// `F(H) = b2 H^2 + b1 H + b0`.
pub fn f_poly(sig: &PhaSignature) -> HPoly {
    HPoly::new(vec![sig.b0.clone(), sig.b1.clone(), sig.b2.clone()])
}

/// `6a * M(H)`, well defined for symbolic `a`.
pub fn casimir_m_scaled(sig: &PhaSignature) -> HPoly {
    let a = &sig.a;
    let a2 = a * a;
    // 6a M = 2 b2 H^3 + 3(b1 + a b2) H^2 + (6 b0 + 3 a b1 + a^2 b2) H
    let h3 = sig.b2.scale(&rat(2));
    let h2 = (&sig.b1 + &(a * &sig.b2)).scale(&rat(3));
    let h1 = &(&sig.b0.scale(&rat(6)) + &(a * &sig.b1).scale(&rat(3))) + &(&a2 * &sig.b2);
    HPoly::new(vec![ParamScalar::zero(), h1, h2, h3])
}

/// Casimir partner `M(H)` with `M(H) - M(H - a) = F(H)` and `M(0) = 0`.
/// Needs `a` to be a nonzero rational constant.
pub fn casimir_m(sig: &PhaSignature) -> Result<HPoly, PhaError> {
    let a =
        sig.a.as_rational().filter(|q| *q != rat(0)).ok_or_else(|| PhaError::NonInvertibleShift(sig.a.to_string()))?;
    let inv = Rational::from_integer(1.into()) / (a * rat(6));
    let scaled = casimir_m_scaled(sig);
    Ok(HPoly::new(scaled.coeffs().iter().map(|c| c.scale(&inv)).collect()))
}

/// The nine coefficients `a_0..a_8` of the `R_n` / `S_n` template.
fn template(coeffs: [ParamScalar; 9], n: usize) -> HPoly {
    let n1 = ParamScalar::from_int(n as i64);
    let n2 = &n1 * &n1;
    let n3 = &n2 * &n1;
    let [a0, a1, a2, a3, a4, a5, a6, a7, a8] = coeffs;
    let h2 = &a0 + &(&a1 * &n1);
    let h1 = &(&a2 + &(&a3 * &n1)) + &(&a4 * &n2);
    let h0 = &(&(&a5 + &(&a6 * &n1)) + &(&a7 * &n2)) + &(&a8 * &n3);
    HPoly::new(vec![h0, h1, h2])
}

/// Coefficients `a_0..a_8` for `[c, (c†)^n] = (c†)^(n-1) R_n(H)`.
pub fn rn_coefficients(sig: &PhaSignature) -> [ParamScalar; 9] {
    let (a, b2, b1, b0) = (&sig.a, &sig.b2, &sig.b1, &sig.b0);
    let a2b2 = &(a * a) * b2;
    let ab1 = a * b1;
    let ab2 = a * b2;
    [
        ParamScalar::zero(),
        b2.clone(),
        ParamScalar::zero(),
        &(-&ab2) + b1,
        ab2.clone(),
        ParamScalar::zero(),
        (&(&a2b2 + &b0.scale(&rat(6))) - &ab1.scale(&rat(3))).scale(&rat_frac(1, 6)),
        (&(-&a2b2) + &ab1).scale(&rat_frac(1, 2)),
        a2b2.scale(&rat_frac(1, 3)),
    ]
}

/// Coefficients `a_0..a_8` for `[c†, c^n] = c^(n-1) S_n(H)`.
pub fn sn_coefficients(sig: &PhaSignature) -> [ParamScalar; 9] {
    let (a, b2, b1, b0) = (&sig.a, &sig.b2, &sig.b1, &sig.b0);
    let a2b2 = &(a * a) * b2;
    let ab1 = a * b1;
    let ab2 = a * b2;
    [
        ParamScalar::zero(),
        -b2,
        ParamScalar::zero(),
        &(-&ab2) - b1,
        ab2.clone(),
        ParamScalar::zero(),
        (&(&(-&a2b2) - &b0.scale(&rat(6))) - &ab1.scale(&rat(3))).scale(&rat_frac(1, 6)),
        (&a2b2 + &ab1).scale(&rat_frac(1, 2)),
        a2b2.scale(&rat_frac(-1, 3)),
    ]
}

/// `R_n(H)` with `[c, (c†)^n] = (c†)^(n-1) R_n(H)`.
pub fn rn_poly(sig: &PhaSignature, n: usize) -> Result<HPoly, PhaError> {
    if n == 0 {
        return Err(PhaError::ZeroLevel);
    }
    Ok(template(rn_coefficients(sig), n))
}

/// `S_n(H)` with `[c†, c^n] = c^(n-1) S_n(H)`.
pub fn sn_poly(sig: &PhaSignature, n: usize) -> Result<HPoly, PhaError> {
    if n == 0 {
        return Err(PhaError::ZeroLevel);
    }
    Ok(template(sn_coefficients(sig), n))
}

/// Energy after `n` ladder steps: `E0 + n a` when raising, `E0 - n a` when
/// lowering.
pub fn ladder_energy(e0: &ParamScalar, n: usize, sig: &PhaSignature, dir: Direction) -> ParamScalar {
    let step = sig.a.scale(&rat(n as i64));
    match dir {
        Direction::Raise => e0 + &step,
        Direction::Lower => e0 - &step,
    }
}

/// `-2n (beta + (2 - 2n + alpha)^2)`.
pub fn fn_lowest(alpha: &ParamScalar, beta: &ParamScalar, n: usize) -> Result<ParamScalar, PhaError> {
    if n == 0 {
        return Err(PhaError::ZeroLevel);
    }
    let n = n as i64;
    let inner = alpha + &ParamScalar::from_int(2 - 2 * n);
    Ok((beta + &(&inner * &inner)).scale(&rat(-2 * n)))
}

/// `4n (-beta + 2n^2 + n(-2 + 3s - alpha) - s(2 + alpha))` where `s` must
/// square to `-beta`.
pub fn fn_highest(alpha: &ParamScalar, beta: &ParamScalar, s: &ParamScalar, n: usize) -> Result<ParamScalar, PhaError> {
    if n == 0 {
        return Err(PhaError::ZeroLevel);
    }
    if &(s * s) + beta != ParamScalar::zero() {
        return Err(PhaError::NotSquareRoot { s: s.to_string(), beta: beta.to_string() });
    }
    let nn = ParamScalar::from_int(n as i64);
    let two = ParamScalar::from_int(2);
    let lin = &(&ParamScalar::from_int(-2) + &s.scale(&rat(3))) - alpha;
    let body = &(&(&(-beta) + &(&nn * &nn).scale(&rat(2))) + &(&nn * &lin)) - &(s * &(&two + alpha));
    Ok(body.scale(&rat(4 * n as i64)))
}

/// One `(i, j)` entry of the weight check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairWeight {
    pub i: usize,
    pub j: usize,
    /// `w` in `[H, c_i c_j†] = w c_i c_j†`, namely `a_j - a_i`.
    pub weight: ParamScalar,
    pub commutes: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightReport {
    pub n: usize,
    pub pairs: Vec<PairWeight>,
}

impl WeightReport {
    pub fn all_commute(&self) -> bool {
        self.pairs.iter().all(|p| p.commutes)
    }
}

/// For `H = sum_k H_k` built from independent copies, `[H, c_i c_j†]` only
/// sees `[H_i, c_i] = -a_i c_i` and `[H_j, c_j†] = a_j c_j†`, so
/// `I_ij = c_i c_j†` commutes with `H` exactly when `a_i = a_j`.
/// (`I_ij† = c_i† c_j` has the opposite weight and the same verdict.)
pub fn multidim_weight_check(sigs: &[PhaSignature]) -> Result<WeightReport, PhaError> {
    if sigs.len() < 2 {
        return Err(PhaError::TooFewAxes(sigs.len()));
    }
    let mut pairs = Vec::new();
    for (i, si) in sigs.iter().enumerate() {
        for (j, sj) in sigs.iter().enumerate() {
            let weight = &sj.a - &si.a;
            pairs.push(PairWeight { i, j, commutes: weight.is_zero(), weight });
        }
    }
    Ok(WeightReport { n: sigs.len(), pairs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(n: i64) -> ParamScalar {
        ParamScalar::from_int(n)
    }

    /// A signature whose entries are unrelated parameter polynomials.
    fn generic_sig() -> PhaSignature {
        let al = ParamScalar::alpha();
        let be = ParamScalar::beta();
        let s = ParamScalar::s();
        PhaSignature::new(al.clone(), be.clone(), s.clone(), &(&al * &be) + &ps(3)).unwrap()
    }

    /// Oracle: sum_{m<n} F(H + m a) for R_n, and -sum_{m<n} F(H - m a) for S_n,
    /// obtained by pushing F(H) through the powers of the ladder operators.
    fn telescoped(sig: &PhaSignature, n: usize, sign: i64) -> HPoly {
        let f = f_poly(sig);
        let mut acc = HPoly::zero();
        for m in 0..n {
            acc = acc.add(&f.shift(&sig.a.scale(&rat(sign * m as i64))));
        }
        acc
    }

    #[test]
    fn f_poly_of_reversed_p4() {
        let f = f_poly(&PhaSignature::painleve_iv_reversed());
        assert_eq!(f.coeff(2), ps(-6));
        assert_eq!(f.coeff(1), &ParamScalar::alpha().scale(&rat(8)) + &ps(4));
        assert_eq!(f.eval(&ParamScalar::zero()), PhaSignature::painleve_iv_reversed().b0);
    }

    #[test]
    fn heisenberg_weyl_constant_f() {
        let sig = PhaSignature::new(ps(3), ps(0), ps(0), ParamScalar::beta()).unwrap();
        assert_eq!(f_poly(&sig).degree(), Some(0));
        // M(H) = (b0 / a) H
        let m = casimir_m(&sig).unwrap();
        assert_eq!(m, HPoly::new(vec![ps(0), ParamScalar::beta().scale(&rat_frac(1, 3))]));
    }

    #[test]
    fn casimir_difference_equation_symbolic() {
        let sig = generic_sig();
        let m6 = casimir_m_scaled(&sig);
        let diff = m6.sub(&m6.shift(&-&sig.a));
        let six_a_f = f_poly(&sig).scale(&sig.a.scale(&rat(6)));
        assert_eq!(diff, six_a_f);
        assert!(m6.eval(&ParamScalar::zero()).is_zero());
    }

    #[test]
    fn casimir_difference_equation_rational_shift() {
        for a in [ps(2), ps(-3), ParamScalar::from_frac(1, 2)] {
            let sig = PhaSignature::new(a, ParamScalar::beta(), ParamScalar::s(), ParamScalar::alpha()).unwrap();
            let m = casimir_m(&sig).unwrap();
            assert_eq!(m.sub(&m.shift(&-&sig.a)), f_poly(&sig));
        }
        assert!(matches!(casimir_m(&generic_sig()), Err(PhaError::NonInvertibleShift(_))));
    }

    #[test]
    fn first_templates_are_plus_minus_f() {
        let sig = generic_sig();
        assert_eq!(rn_poly(&sig, 1).unwrap(), f_poly(&sig));
        assert_eq!(sn_poly(&sig, 1).unwrap(), f_poly(&sig).neg());
    }

    #[test]
    fn templates_match_telescoped_sums() {
        let sig = generic_sig();
        for n in 1..=7 {
            assert_eq!(rn_poly(&sig, n).unwrap(), telescoped(&sig, n, 1), "R_{n}");
            assert_eq!(sn_poly(&sig, n).unwrap(), telescoped(&sig, n, -1).neg(), "S_{n}");
        }
    }

    #[test]
    fn rn_increments_are_quadratic_with_b2_lead() {
        let sig = generic_sig();
        for n in 1..=6 {
            let d = rn_poly(&sig, n + 1).unwrap().sub(&rn_poly(&sig, n).unwrap());
            assert_eq!(d.degree(), Some(2));
            assert_eq!(d.coeff(2), sig.b2);
        }
    }

    #[test]
    fn zero_level_is_rejected() {
        let sig = generic_sig();
        assert_eq!(rn_poly(&sig, 0), Err(PhaError::ZeroLevel));
        assert_eq!(sn_poly(&sig, 0), Err(PhaError::ZeroLevel));
    }

    #[test]
    fn energies() {
        let sig = PhaSignature::painleve_iv();
        assert_eq!(ladder_energy(&ps(0), 3, &sig, Direction::Raise), ps(6));
        let e0 = &ParamScalar::alpha() - &ParamScalar::s();
        assert_eq!(ladder_energy(&e0, 1, &sig, Direction::Lower), &e0 - &ps(2));
        assert_eq!(ladder_energy(&e0, 0, &sig, Direction::Lower), e0);
    }

    #[test]
    fn fn_lowest_values() {
        let (a0, b2) = (ps(0), ps(2));
        assert_eq!(fn_lowest(&a0, &b2, 1).unwrap(), ps(-4));
        assert_eq!(fn_lowest(&a0, &b2, 2).unwrap(), ps(-24));
        let sig = PhaSignature::painleve_iv_reversed();
        for n in 1..=6 {
            let via_template = rn_poly(&sig, n).unwrap().eval(&ParamScalar::zero());
            let closed = fn_lowest(&ParamScalar::alpha(), &ParamScalar::beta(), n).unwrap();
            assert_eq!(via_template, closed);
        }
    }

    #[test]
    fn fn_highest_values() {
        assert_eq!(fn_highest(&ps(0), &ps(-1), &ps(1), 1).unwrap(), ps(8));
        assert!(fn_highest(&ps(0), &ps(-1), &ps(2), 1).is_err());
        let sig = PhaSignature::painleve_iv_reversed();
        let (al, be, s) = (ParamScalar::alpha(), ParamScalar::beta(), ParamScalar::s());
        let e0 = &al - &s;
        for n in 1..=6 {
            let via_template = sn_poly(&sig, n).unwrap().eval(&e0);
            assert_eq!(via_template, fn_highest(&al, &be, &s, n).unwrap());
        }
    }

    #[test]
    fn fn_highest_leading_n_term() {
        // fn_highest / 4n = 2n^2 + (lower order in n)
        let (al, be, s) = (ParamScalar::alpha(), ParamScalar::beta(), ParamScalar::s());
        let g = |n: usize| fn_highest(&al, &be, &s, n).unwrap().scale(&rat_frac(1, 4 * n as i64));
        // third finite difference of a quadratic vanishes, second equals 2*2
        let d2 = &(&g(3) - &g(2).scale(&rat(2))) + &g(1);
        assert_eq!(d2, ps(4));
        let d3 = &(&(&g(4) - &g(3).scale(&rat(3))) + &g(2).scale(&rat(3))) - &g(1);
        assert!(d3.is_zero());
    }

    #[test]
    fn weight_check() {
        let two = PhaSignature::painleve_iv();
        let report = multidim_weight_check(&[two.clone(), two.clone(), two.clone()]).unwrap();
        assert!(report.all_commute());
        assert_eq!(report.pairs.len(), 9);

        let mut four = two.clone();
        four.a = ps(4);
        let report = multidim_weight_check(&[two.clone(), four]).unwrap();
        let p12 = report.pairs.iter().find(|p| p.i == 0 && p.j == 1).unwrap();
        assert!(!p12.commutes);
        assert_eq!(p12.weight, ps(2));
        assert!(report.pairs.iter().filter(|p| p.i == p.j).all(|p| p.commutes));

        assert_eq!(multidim_weight_check(&[two]), Err(PhaError::TooFewAxes(1)));
    }
}
