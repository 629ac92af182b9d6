mod common;

use common::{h2, hand_terms, Oracle};
use infoflow::engine::{
    build_joint, verify_all, verify_conservation, verify_stateless_reduction, Conditioning,
    JointTable, Process, Units, VariableSelector, DEFAULT_TOLERANCE,
};
use infoflow::scenario::{random_system, Canonical, Dims};
use infoflow::system::{validate_system, Coord, SystemSpec, ValidatedSystem};

fn validated(spec: SystemSpec) -> ValidatedSystem {
    validate_system(spec).unwrap()
}

fn canonical(c: Canonical) -> (SystemSpec, JointTable) {
    let spec = c.build().unwrap();
    let joint = build_joint(&validated(spec.clone()));
    (spec, joint)
}

fn library_terms(j: &JointTable) -> [f64; 5] {
    [
        j.directed_info_causal(&VariableSelector::empty()).unwrap(),
        j.message_info(),
        j.cross_term(),
        j.feedback_directed_info(),
        j.directed_info(),
    ]
}

fn oracle_terms(spec: &SystemSpec) -> [f64; 5] {
    let t = Oracle::new(spec).terms();
    [t.lhs, t.message, t.cross, t.feedback, t.directed_info]
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
    }
}

#[test]
fn bsc_single_use_matches_closed_form() {
    let (_, j) = canonical(Canonical::BscBsc {
        eps_f: 0.1,
        eps_b: 0.2,
        horizon: 1,
    });
    let c = 1.0 - h2(0.1);
    assert_close(&library_terms(&j), &[c, c, 0.0, 0.0, c], 1e-12);
}

// Values produced by a separate brute-force script over the same model.
#[test]
fn bsc_bsc_reference_values() {
    let reference = [
        (1, [0.5310044064107187, 0.5310044064107187, 0.0, 0.0]),
        (
            2,
            [
                0.9528601094248812,
                0.5951093305215454,
                0.14697652802817174,
                0.21077425087516455,
            ],
        ),
        (
            3,
            [
                1.3680130735504785,
                0.6525115157438073,
                0.20990621489123595,
                0.5055953429154357,
            ],
        ),
    ];
    for (n, expected) in reference {
        let (spec, j) = canonical(Canonical::BscBsc {
            eps_f: 0.1,
            eps_b: 0.2,
            horizon: n,
        });
        assert_close(&library_terms(&j)[..4], &expected, 1e-12);
        assert_close(&oracle_terms(&spec)[..4], &expected, 1e-12);
    }
}

#[test]
fn feedback_blind_repetition_code() {
    // x_i = x0 through n independent BSC uses: I(x0; y^n) = H(y^n) - n h2(eps).
    let eps: f64 = 0.15;
    for n in 1..=4usize {
        let (_, j) = canonical(Canonical::FeedbackBlind {
            eps_f: eps,
            eps_b: 0.3,
            horizon: n,
        });
        let mut hy = 0.0;
        for k in 0..=n {
            let q = 0.5
                * (eps.powi(k as i32) * (1.0 - eps).powi((n - k) as i32)
                    + (1.0 - eps).powi(k as i32) * eps.powi((n - k) as i32));
            let binom = (0..k).fold(1.0, |acc, m| acc * (n - m) as f64 / (m + 1) as f64);
            hy -= binom * q * q.log2();
        }
        let info = hy - n as f64 * h2(eps);
        assert_close(&library_terms(&j)[..4], &[info, info, 0.0, 0.0], 1e-12);
    }
}

#[test]
fn noiseless_identity_carries_one_bit() {
    let (_, j) = canonical(Canonical::IdentityNoiselessFb { horizon: 3 });
    assert_close(&library_terms(&j)[..4], &[1.0, 1.0, 0.0, 0.0], 1e-12);
}

#[test]
fn input_independent_is_all_zero() {
    let (_, j) = canonical(Canonical::InputIndependent { horizon: 3 });
    assert_close(&library_terms(&j)[..4], &[0.0; 4], 1e-12);
    let sys = validated(Canonical::InputIndependent { horizon: 3 }.build().unwrap());
    assert!(
        verify_all(&sys, DEFAULT_TOLERANCE, Units::Bits)
            .unwrap()
            .passed
    );
}

#[test]
fn state_flip_single_use() {
    // Knowing s1, the channel is a BSC(eps) from x1 to y1.
    let (_, j) = canonical(Canonical::StateFlip {
        eps: 0.2,
        horizon: 1,
    });
    let lhs = j.directed_info_causal(&VariableSelector::empty()).unwrap();
    assert!((lhs - (1.0 - h2(0.2))).abs() < 1e-12);
    // Without s1 the output is uniform noise.
    assert!(j.directed_info().abs() < 1e-12);
}

#[test]
fn engine_matches_oracle_on_random_systems() {
    for (k, dims) in [
        "n=1",
        "n=2",
        "n=3",
        "n=2,message=3,state=3,output=3",
        "n=3,state=2,feedback=3",
    ]
    .iter()
    .enumerate()
    {
        let d: Dims = dims.parse().unwrap();
        let spec = random_system(&d, 100 + k as u64).unwrap();
        let j = build_joint(&validated(spec.clone()));
        let oracle = Oracle::new(&spec);
        assert!((oracle.total_mass() - 1.0).abs() < 1e-12);
        assert_close(&library_terms(&j), &oracle_terms(&spec), 1e-10);

        let t = oracle.terms();
        assert!((j.input_output_info() - t.input_output).abs() < 1e-10);
        let given_msg = j
            .directed_info_causal(&VariableSelector::message())
            .unwrap();
        assert!((given_msg - t.directed_given_message).abs() < 1e-10);
        assert!((j.joint_feedback_message_info() - t.joint).abs() < 1e-10);
    }
}

#[test]
fn primitives_match_oracle() {
    let d: Dims = "n=2,state=3,message=3".parse().unwrap();
    let spec = random_system(&d, 7).unwrap();
    let j = build_joint(&validated(spec.clone()));
    let o = Oracle::new(&spec);
    let cases: [(&[Coord], &[Coord]); 4] = [
        (&[Coord::output(2)], &[]),
        (&[Coord::output(2), Coord::MESSAGE], &[Coord::state(1)]),
        (&[Coord::feedback(1)], &[Coord::output(1), Coord::input(2)]),
        (
            &[Coord::state(2)],
            &[Coord::MESSAGE, Coord::output(2), Coord::input(1)],
        ),
    ];
    for (target, given) in cases {
        let lib = j
            .cond_entropy(
                &VariableSelector::new(target.to_vec()).unwrap(),
                &VariableSelector::new(given.to_vec()).unwrap(),
            )
            .unwrap();
        assert!(
            (lib - o.cond_entropy(target, given)).abs() < 1e-10,
            "{target:?} | {given:?}"
        );
    }
}

#[test]
fn hand_assembled_library_sums_match_composites() {
    let d: Dims = "n=3,state=2".parse().unwrap();
    let spec = random_system(&d, 8).unwrap();
    let j = build_joint(&validated(spec));
    let h = |a: &[Coord], b: &[Coord]| {
        j.cond_entropy(
            &VariableSelector::new(a.to_vec()).unwrap(),
            &VariableSelector::new(b.to_vec()).unwrap(),
        )
        .unwrap()
    };
    let t = hand_terms(3, &h);
    assert_close(
        &library_terms(&j),
        &[t.lhs, t.message, t.cross, t.feedback, t.directed_info],
        1e-10,
    );
}

#[test]
fn causal_entropy_of_outputs_given_states() {
    let d: Dims = "n=2,state=3".parse().unwrap();
    let spec = random_system(&d, 3).unwrap();
    let j = build_joint(&validated(spec.clone()));
    let o = Oracle::new(&spec);
    let expected = o.cond_entropy(&[Coord::output(1)], &[Coord::state(1)])
        + o.cond_entropy(
            &[Coord::output(2)],
            &[Coord::output(1), Coord::state(1), Coord::state(2)],
        );
    let got = j
        .causal_entropy(&Process::outputs(), &Conditioning::states())
        .unwrap();
    assert!((got - expected).abs() < 1e-10);
}

#[test]
fn stateless_reduction_on_state_blind_system() {
    let mut d: Dims = "n=3,state=3".parse().unwrap();
    d.state_blind_forward = true;
    d.state_blind_encoder = true;
    let sys = validated(random_system(&d, 4).unwrap());
    let r = verify_stateless_reduction(&sys, DEFAULT_TOLERANCE).unwrap();
    assert!(r.holds, "{r:?}");
    assert!(r.residual.abs() < 1e-9);

    d.state_blind_forward = false;
    let sys = validated(random_system(&d, 4).unwrap());
    assert!(verify_stateless_reduction(&sys, DEFAULT_TOLERANCE).is_err());
}

#[test]
fn identity_holds_on_state_dependent_systems() {
    let d: Dims = "n=3,message=4,state=3".parse().unwrap();
    for seed in 0..5 {
        let sys = validated(random_system(&d, seed).unwrap());
        let r = verify_conservation(&sys, DEFAULT_TOLERANCE).unwrap();
        assert!(
            r.conservation_holds && r.proof_steps_hold,
            "{:?}",
            r.residuals
        );
    }
}
