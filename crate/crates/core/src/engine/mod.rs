//! Exact evaluation: enumerate the joint distribution over all trajectories,
//! then compute every quantity by marginalization of that one table.

mod joint;
mod measures;
mod report;
mod selector;

pub use joint::{build_joint, build_joint_with_workers, JointTable, Units};
pub use report::{
    analyze, conservation_terms, verify_all, verify_conservation, verify_proof_steps,
    verify_stateless_reduction, AnalysisOptions, ConservationTerms, IdentityReport, QuantityPair,
    ReductionCheck, Residuals, StatelessReport, VerificationReport, DEFAULT_TOLERANCE,
};
pub use selector::{Conditioning, Lagged, Process, VariableSelector};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{random_system, Canonical, Dims};
    use crate::system::{validate_system, Coord, ValidatedSystem, Var};

    fn canonical(c: Canonical) -> ValidatedSystem {
        validate_system(c.build().unwrap()).unwrap()
    }

    fn h2(p: f64) -> f64 {
        -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
    }

    fn bsc_bsc(n: usize) -> JointTable {
        build_joint(&canonical(Canonical::BscBsc {
            eps_f: 0.1,
            eps_b: 0.2,
            horizon: n,
        }))
    }

    #[test]
    fn bsc_entropies() {
        let j = bsc_bsc(1);
        let y1 = VariableSelector::new([Coord::output(1)]).unwrap();
        let x1 = VariableSelector::new([Coord::input(1)]).unwrap();
        let h = j.cond_entropy(&y1, &VariableSelector::empty()).unwrap();
        assert!((h - 1.0).abs() < 1e-15);
        let h = j.cond_entropy(&y1, &x1).unwrap();
        assert!((h - h2(0.1)).abs() < 1e-15);
        assert!(j.cond_entropy(&y1, &y1).is_err());
    }

    // Frozen from an independent brute-force enumeration over explicit
    // trajectory tuples (dictionary marginals, log2).
    #[test]
    fn bsc_bsc_frozen_values() {
        let cases = [
            (1, 0.5310044064107187, 0.5310044064107187, 0.0, 0.0),
            (
                2,
                0.9528601094248812,
                0.5951093305215454,
                0.14697652802817174,
                0.21077425087516455,
            ),
            (
                3,
                1.3680130735504785,
                0.6525115157438073,
                0.20990621489123595,
                0.5055953429154357,
            ),
        ];
        for (n, lhs, message, cross, feedback) in cases {
            let j = bsc_bsc(n);
            let t = conservation_terms(&j, true);
            assert!((t.lhs - lhs).abs() < 1e-12, "n={n} lhs {}", t.lhs);
            assert!((t.message - message).abs() < 1e-12, "n={n}");
            assert!((t.cross - cross).abs() < 1e-12, "n={n}");
            assert!((t.feedback - feedback).abs() < 1e-12, "n={n}");
            assert!(t.residual().abs() < 1e-12);
        }
        assert!((bsc_bsc(1).directed_info() - (1.0 - h2(0.1))).abs() < 1e-15);
    }

    #[test]
    fn identity_channel_carries_one_bit() {
        let sys = canonical(Canonical::IdentityNoiselessFb { horizon: 1 });
        let r = verify_conservation(&sys, DEFAULT_TOLERANCE).unwrap();
        assert!((r.term_message - 1.0).abs() < 1e-15);
        assert!((r.lhs - 1.0).abs() < 1e-15);
        assert_eq!(r.term_cross, 0.0);
        assert_eq!(r.term_feedback, 0.0);
        let j = build_joint(&sys);
        let y1 = VariableSelector::new([Coord::output(1)]).unwrap();
        let x1 = VariableSelector::new([Coord::input(1)]).unwrap();
        assert_eq!(j.cond_entropy(&y1, &x1).unwrap(), 0.0);
        let xn = Conditioning::fixed(VariableSelector::history(Var::Input, 1));
        let h = j
            .causal_entropy(
                &Process::outputs(),
                &Conditioning::states().merge(&xn).unwrap(),
            )
            .unwrap();
        assert_eq!(h, 0.0);
    }

    #[test]
    fn stochastic_encoder_breaks_the_identity() {
        let mut d = Dims::binary(1);
        d.stochastic_encoder = true;
        d.alphabets.state = 1;
        d.alphabets.feedback = 1;
        let broken = (0..20).any(|seed| {
            let sys = validate_system(random_system(&d, seed).unwrap()).unwrap();
            let r = verify_conservation(&sys, DEFAULT_TOLERANCE).unwrap();
            !r.encoder_deterministic && !r.conservation_holds
        });
        assert!(broken);
    }

    #[test]
    fn proof_steps_close_on_random_systems() {
        for (dims, seed) in [("n=3", 1), ("n=2,state=3,message=3", 2), ("n=4", 3)] {
            let d: Dims = dims.parse().unwrap();
            let sys = validate_system(random_system(&d, seed).unwrap()).unwrap();
            let r = verify_proof_steps(&sys, DEFAULT_TOLERANCE).unwrap();
            assert!(r.proof_steps_hold, "{dims}: {:?}", r.residuals);
            assert!(
                verify_all(&sys, DEFAULT_TOLERANCE, Units::Bits)
                    .unwrap()
                    .passed
            );
        }
    }

    #[test]
    fn parallel_build_is_bit_identical() {
        let d: Dims = "n=3,message=4,state=3".parse().unwrap();
        let sys = validate_system(random_system(&d, 11).unwrap()).unwrap();
        let serial = build_joint(&sys);
        for workers in [2, 3, 8] {
            assert_eq!(serial, build_joint_with_workers(&sys, workers));
        }
    }

    #[test]
    fn nats_scale_by_ln2() {
        let sys = canonical(Canonical::StateFlip {
            eps: 0.2,
            horizon: 2,
        });
        let bits = analyze(&sys, &AnalysisOptions::default()).unwrap();
        let nats = analyze(
            &sys,
            &AnalysisOptions {
                units: Units::Nats,
                ..AnalysisOptions::default()
            },
        )
        .unwrap();
        let ln2 = std::f64::consts::LN_2;
        for (b, n) in [
            (bits.lhs, nats.lhs),
            (bits.term_message, nats.term_message),
            (bits.term_cross, nats.term_cross),
            (bits.term_feedback, nats.term_feedback),
        ] {
            assert!((b * ln2 - n).abs() < 1e-12);
        }
        assert!(nats.conservation_holds);
    }

    #[test]
    fn stateless_precondition_guard() {
        let sys = canonical(Canonical::StateFlip {
            eps: 0.1,
            horizon: 2,
        });
        assert!(matches!(
            verify_stateless_reduction(&sys, DEFAULT_TOLERANCE),
            Err(crate::Error::Precondition(_))
        ));
        let sys = canonical(Canonical::BscBsc {
            eps_f: 0.1,
            eps_b: 0.2,
            horizon: 3,
        });
        let r = verify_stateless_reduction(&sys, DEFAULT_TOLERANCE).unwrap();
        assert!(r.holds);
        assert!(r.residual.abs() < 1e-12);
    }

    #[test]
    fn directed_info_causal_rejects_overlap() {
        let j = bsc_bsc(2);
        let bad = VariableSelector::new([Coord::state(1)]).unwrap();
        assert!(j.directed_info_causal(&bad).is_err());
    }
}
