use p4ladder::pha::{fn_highest, fn_lowest};
use p4ladder::states::{Ladder, StateBuilder};
use p4ladder::{ParamScalar, WeightType};

fn alpha() -> ParamScalar {
    ParamScalar::alpha()
}

fn beta() -> ParamScalar {
    ParamScalar::beta()
}

#[test]
fn lowering_lowest_chain_to_level_four() {
    let b = StateBuilder::new().unwrap();
    let psi = b.build_sequence(WeightType::Lowest, 4).unwrap();
    for n in 1..=4 {
        let lowered = b.act_ladder(&psi[n], Ladder::C);
        let closed = fn_lowest(&alpha(), &beta(), n).unwrap();
        // c psi_n = -f_n psi_{n-1} with the c, c† used here.
        assert_eq!(lowered.body, psi[n - 1].body.scale_param(&-&closed), "n = {n}");
    }
}

#[test]
fn lowering_highest_chain_to_level_three() {
    let b = StateBuilder::new().unwrap();
    let phi = b.build_sequence(WeightType::Highest, 3).unwrap();
    for n in 1..=3 {
        let lowered = b.act_ladder(&phi[n], Ladder::CDag);
        let closed = fn_highest(&alpha(), &beta(), &ParamScalar::s(), n).unwrap();
        assert!(closed.contains_s());
        assert_eq!(lowered.body, phi[n - 1].body.scale_param(&-&closed), "n = {n}");
    }
}

#[test]
fn parity_and_growth() {
    let b = StateBuilder::new().unwrap();
    let psi = b.build_sequence(WeightType::Lowest, 4).unwrap();
    for (n, st) in psi.iter().enumerate() {
        assert!(!st.body.contains_s());
        let disp = st.display_polynomial();
        assert_eq!(disp.max_f_exponent(), Some(4 * n as i16));
        assert_eq!(disp.min_f_exponent(), Some(0));
    }
    let phi = b.build_sequence(WeightType::Highest, 3).unwrap();
    for st in &phi[1..] {
        assert!(st.body.contains_s());
        // s^2 is reduced to -beta, so s appears at most linearly.
        for (m, _) in st.body.terms() {
            assert!(m.p.s <= 1);
        }
    }
}
