//! Lowest- and highest-weight states as exact ring elements.
//!
//! A state is `exp(∫W dx) * body` where the gauge `W` is `W3` for the lowest
//! weight chain (`psi_0 = exp(∫W3)`, annihilated by `c`) and `W1` for the
//! highest weight chain (`phi_0 = exp(∫W1)`, annihilated by `c†`). Ladder
//! operators act on the body through their gauge-conjugated form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coeff::ParamScalar;
use crate::error::StateError;
use crate::op::{DiffOp, GaugeTag, Realization};
use crate::pha::{ladder_energy, Direction, PhaSignature};
use crate::ring::RingElem;

pub const DEFAULT_TERM_LIMIT: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightType {
    Lowest,
    Highest,
}

impl WeightType {
    pub fn gauge(self) -> GaugeTag {
        match self {
            WeightType::Lowest => GaugeTag::W3,
            WeightType::Highest => GaugeTag::W1,
        }
    }

    /// Direction in which the energy moves as the level grows.
    pub fn direction(self) -> Direction {
        match self {
            WeightType::Lowest => Direction::Raise,
            WeightType::Highest => Direction::Lower,
        }
    }
}

impl fmt::Display for WeightType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightType::Lowest => write!(f, "lowest"),
            WeightType::Highest => write!(f, "highest"),
        }
    }
}

impl std::str::FromStr for WeightType {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lowest" => Ok(WeightType::Lowest),
            "highest" => Ok(WeightType::Highest),
            other => Err(format!("unknown weight type {other:?}, expected lowest or highest")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    C,
    CDag,
}

/// `exp(∫W_gauge) * body` at a given level of a weight chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateExpr {
    pub gauge: GaugeTag,
    pub level: usize,
    pub weight_type: WeightType,
    pub body: RingElem,
}

impl StateExpr {
    /// The polynomial in `x, f, f'` multiplying `exp(∫W) / f^level`.
    pub fn display_polynomial(&self) -> RingElem {
        self.body.shift_f(self.level as i16)
    }

    pub fn is_zero(&self) -> bool {
        self.body.is_zero()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, StateError> {
        serde_json::from_str(s).map_err(|e| StateError::Json(e.to_string()))
    }
}

/// Gauge-conjugated `H`, `c`, `c†` for one gauge, plus the zero-mode energy.
#[derive(Clone, Debug)]
struct Conjugated {
    h: DiffOp,
    c: DiffOp,
    cdag: DiffOp,
    e0: ParamScalar,
}

impl Conjugated {
    fn new(real: &Realization, w: &RingElem) -> Result<Self, StateError> {
        let h = real.h.gauge_conjugate(w);
        let c = real.c.gauge_conjugate(w);
        let cdag = real.cdag.gauge_conjugate(w);
        let h1 = h.apply(&RingElem::one());
        let e0 = h1.as_constant().ok_or_else(|| StateError::NotAnEigenstate(h1.to_string()))?;
        Ok(Conjugated { h, c, cdag, e0 })
    }
}

/// Builds and checks states for both weight types.
#[derive(Clone, Debug)]
pub struct StateBuilder {
    sig: PhaSignature,
    lowest: Conjugated,
    highest: Conjugated,
    term_limit: usize,
}

impl StateBuilder {
    pub fn new() -> Result<Self, StateError> {
        let real = Realization::new()?;
        Self::from_realization(&real)
    }

    pub fn from_realization(real: &Realization) -> Result<Self, StateError> {
        Ok(StateBuilder {
            sig: PhaSignature::painleve_iv(),
            lowest: Conjugated::new(real, &real.w3)?,
            highest: Conjugated::new(real, &real.w1)?,
            term_limit: DEFAULT_TERM_LIMIT,
        })
    }

    pub fn with_term_limit(mut self, limit: usize) -> Self {
        self.term_limit = limit;
        self
    }

    pub fn signature(&self) -> &PhaSignature {
        &self.sig
    }

    fn ops(&self, kind: WeightType) -> &Conjugated {
        match kind {
            WeightType::Lowest => &self.lowest,
            WeightType::Highest => &self.highest,
        }
    }

    /// Energy of the zero mode, read off from `H exp(∫W) = E0 exp(∫W)`.
    pub fn zero_mode_energy(&self, kind: WeightType) -> &ParamScalar {
        &self.ops(kind).e0
    }

    /// Gauge-conjugated `(H, c, c†)` acting on bodies of this weight type.
    pub fn conjugated_ops(&self, kind: WeightType) -> (&DiffOp, &DiffOp, &DiffOp) {
        let o = self.ops(kind);
        (&o.h, &o.c, &o.cdag)
    }

    pub fn zero_mode(&self, kind: WeightType) -> StateExpr {
        StateExpr { gauge: kind.gauge(), level: 0, weight_type: kind, body: RingElem::one() }
    }

    /// Applies `c` or `c†`. Along the lowest-weight chain `c†` raises the
    /// level; along the highest-weight chain `c` does. Lowering the level-0
    /// state gives the zero state at level 0.
    pub fn act_ladder(&self, st: &StateExpr, which: Ladder) -> StateExpr {
        let o = self.ops(st.weight_type);
        let op = match which {
            Ladder::C => &o.c,
            Ladder::CDag => &o.cdag,
        };
        let raises =
            matches!((st.weight_type, which), (WeightType::Lowest, Ladder::CDag) | (WeightType::Highest, Ladder::C));
        let level = if raises { st.level + 1 } else { st.level.saturating_sub(1) };
        StateExpr { gauge: st.gauge, level, weight_type: st.weight_type, body: op.apply(&st.body) }
    }

    fn raising(kind: WeightType) -> Ladder {
        match kind {
            WeightType::Lowest => Ladder::CDag,
            WeightType::Highest => Ladder::C,
        }
    }

    pub fn lowering(kind: WeightType) -> Ladder {
        match kind {
            WeightType::Lowest => Ladder::C,
            WeightType::Highest => Ladder::CDag,
        }
    }

    /// States at levels `0..=n_max`.
    pub fn build_sequence(&self, kind: WeightType, n_max: usize) -> Result<Vec<StateExpr>, StateError> {
        let mut out = vec![self.zero_mode(kind)];
        for level in 1..=n_max {
            let next = self.act_ladder(&out[level - 1], Self::raising(kind));
            if next.body.len() > self.term_limit {
                return Err(StateError::ResourceLimit { level, terms: next.body.len(), limit: self.term_limit });
            }
            out.push(next);
        }
        Ok(out)
    }

    /// `E0 + 2n` (lowest) or `E0 - 2n` (highest).
    pub fn energy(&self, st: &StateExpr) -> ParamScalar {
        ladder_energy(self.zero_mode_energy(st.weight_type), st.level, &self.sig, st.weight_type.direction())
    }

    /// `H~ body - E(n) body`, which is zero for a genuine eigenstate.
    pub fn verify_eigen(&self, st: &StateExpr) -> RingElem {
        let h = &self.ops(st.weight_type).h;
        let e = RingElem::constant(&self.energy(st));
        &h.apply(&st.body) - &(&e * &st.body)
    }
}

/// Support of a state's display polynomial (body times `f^level`) split by
/// the parity of the `f'` exponent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupportLattice {
    pub level: usize,
    /// `(f exponent, even f' exponent)`.
    pub q1: BTreeSet<(i16, u16)>,
    /// `(f exponent, odd f' exponent)`.
    pub q2: BTreeSet<(i16, u16)>,
    /// Highest power of `x` in the coefficient of each `f^i f'^j`.
    pub x_degree: BTreeMap<(i16, u16), u16>,
}

impl SupportLattice {
    pub fn max_x_degree(&self) -> u16 {
        self.x_degree.values().copied().max().unwrap_or(0)
    }

    pub fn f_range(&self) -> Option<(i16, i16)> {
        let all = self.q1.iter().chain(&self.q2).map(|(i, _)| *i);
        let min = all.clone().min()?;
        let max = all.max()?;
        Some((min, max))
    }

    pub fn max_fp(&self) -> Option<u16> {
        self.q1.iter().chain(&self.q2).map(|(_, j)| *j).max()
    }

    /// Rows `i,fp_exp,parity,max_x_degree` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,fp_exp,parity,max_x_degree\n");
        for ((i, j), deg) in &self.x_degree {
            let parity = if j % 2 == 0 { "even" } else { "odd" };
            out.push_str(&format!("{i},{j},{parity},{deg}\n"));
        }
        out
    }
}

pub fn support_lattice(st: &StateExpr) -> SupportLattice {
    let poly = st.display_polynomial();
    let mut q1 = BTreeSet::new();
    let mut q2 = BTreeSet::new();
    let mut x_degree: BTreeMap<(i16, u16), u16> = BTreeMap::new();
    for (m, _) in poly.terms() {
        let key = (m.f, m.fp);
        if m.fp % 2 == 0 {
            q1.insert(key);
        } else {
            q2.insert(key);
        }
        let e = x_degree.entry(key).or_insert(0);
        *e = (*e).max(m.x);
    }
    SupportLattice { level: st.level, q1, q2, x_degree }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pha::{fn_lowest, rn_poly, sn_poly};

    fn builder() -> StateBuilder {
        StateBuilder::new().unwrap()
    }

    #[test]
    fn zero_modes_are_annihilated() {
        let b = builder();
        let psi0 = b.zero_mode(WeightType::Lowest);
        assert!(b.act_ladder(&psi0, Ladder::C).is_zero());
        let phi0 = b.zero_mode(WeightType::Highest);
        assert!(b.act_ladder(&phi0, Ladder::CDag).is_zero());
    }

    #[test]
    fn zero_mode_energies() {
        let b = builder();
        assert!(b.zero_mode_energy(WeightType::Lowest).is_zero());
        assert_eq!(*b.zero_mode_energy(WeightType::Highest), &ParamScalar::alpha() - &ParamScalar::s());
    }

    #[test]
    fn first_states_are_eigenstates() {
        let b = builder();
        for kind in [WeightType::Lowest, WeightType::Highest] {
            for st in b.build_sequence(kind, 2).unwrap() {
                assert!(b.verify_eigen(&st).is_zero(), "{kind} level {}", st.level);
            }
        }
    }

    #[test]
    fn psi1_support() {
        let b = builder();
        let psi = b.build_sequence(WeightType::Lowest, 1).unwrap();
        let lat = support_lattice(&psi[1]);
        assert!(lat.q2.is_empty());
        let expected: BTreeSet<(i16, u16)> = [(4, 0), (3, 0), (2, 0), (1, 0), (0, 0), (0, 2)].into();
        assert_eq!(lat.q1, expected);
        assert!(!psi[1].body.contains_s());
    }

    #[test]
    fn lowering_coefficients_follow_computed_bracket() {
        let b = builder();
        let sig = b.signature().clone();
        let psi = b.build_sequence(WeightType::Lowest, 2).unwrap();
        for n in 1..=2 {
            let lowered = b.act_ladder(&psi[n], Ladder::C);
            assert_eq!(lowered.level, n - 1);
            let coeff = rn_poly(&sig, n).unwrap().eval(&ParamScalar::zero());
            assert_eq!(lowered.body, psi[n - 1].body.scale_param(&coeff));
            // the closed form is the same number with the bracket read the other way
            let closed = fn_lowest(&ParamScalar::alpha(), &ParamScalar::beta(), n).unwrap();
            assert_eq!(coeff, -&closed);
        }
        let phi = b.build_sequence(WeightType::Highest, 1).unwrap();
        let lowered = b.act_ladder(&phi[1], Ladder::CDag);
        let e0 = b.zero_mode_energy(WeightType::Highest).clone();
        let coeff = sn_poly(&sig, 1).unwrap().eval(&e0);
        assert_eq!(lowered.body, phi[0].body.scale_param(&coeff));
    }

    #[test]
    fn level_zero_sequence() {
        let b = builder();
        let seq = b.build_sequence(WeightType::Highest, 0).unwrap();
        assert_eq!(seq.len(), 1);
        assert_eq!(seq[0].body, RingElem::one());
        assert_eq!(seq[0].gauge, GaugeTag::W1);
    }

    #[test]
    fn term_limit_is_enforced() {
        let b = builder().with_term_limit(5);
        let err = b.build_sequence(WeightType::Lowest, 3).unwrap_err();
        assert!(matches!(err, StateError::ResourceLimit { level: 1, .. }));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let b = builder();
        let st = b.build_sequence(WeightType::Highest, 1).unwrap().pop().unwrap();
        let text = st.to_json();
        let back = StateExpr::from_json(&text).unwrap();
        assert_eq!(back, st);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn lattice_csv() {
        let b = builder();
        let st = b.build_sequence(WeightType::Lowest, 1).unwrap().pop().unwrap();
        let csv = support_lattice(&st).to_csv();
        assert!(csv.starts_with("i,fp_exp,parity,max_x_degree\n"));
        assert!(csv.contains("\n4,0,even,0\n"));
        assert!(csv.contains("\n2,0,even,2\n"));
    }
}
