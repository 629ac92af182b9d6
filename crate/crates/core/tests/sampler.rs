use infoflow::engine::build_joint;
use infoflow::sampler::{
    convergence_report, plugin_estimate, plugin_estimates, sample_trajectories,
    write_convergence_csv, Quantity,
};
use infoflow::scenario::{random_system, Canonical, Dims};
use infoflow::system::{validate_system, ValidatedSystem};

fn canonical(c: Canonical) -> ValidatedSystem {
    validate_system(c.build().unwrap()).unwrap()
}

#[test]
fn deterministic_system_has_one_trajectory() {
    let mut spec = Canonical::IdentityNoiselessFb { horizon: 3 }
        .build()
        .unwrap();
    spec.message_prior = vec![0.0, 1.0];
    let sys = validate_system(spec).unwrap();
    let s = sample_trajectories(&sys, 5000, 1).unwrap();
    assert_eq!(s.counts().len(), 1);
    let (&index, &count) = s.counts().iter().next().unwrap();
    assert_eq!(count, 5000);
    let exact = build_joint(&sys);
    assert_eq!(exact.probabilities()[index], 1.0);

    let rows = convergence_report(&sys, Quantity::DirectedInfoCausal, &[10, 100], 4).unwrap();
    for r in rows {
        assert_eq!(r.abs_error_bits, 0.0);
        assert_eq!(r.std_error_bits, 0.0);
    }
}

#[test]
fn total_variation_shrinks_with_count() {
    let sys = validate_system(random_system(&Dims::binary(3), 21).unwrap()).unwrap();
    assert_eq!(sys.trajectory_count(), 4096);
    let exact = build_joint(&sys);
    let tv = |count: u64| {
        let s = sample_trajectories(&sys, count, 8).unwrap();
        let emp = s.empirical_joint().unwrap();
        0.5 * exact
            .probabilities()
            .iter()
            .zip(emp.probabilities())
            .map(|(p, q)| (p - q).abs())
            .sum::<f64>()
    };
    let d = [tv(1_000), tv(100_000), tv(10_000_000)];
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    assert!(d[2] < 0.01, "{d:?}");
}

#[test]
fn input_independent_estimates_are_near_zero() {
    let sys = canonical(Canonical::InputIndependent { horizon: 3 });
    let s = sample_trajectories(&sys, 1_000_000, 17).unwrap();
    let est = plugin_estimates(&s, &Quantity::ALL).unwrap();
    for (q, e) in Quantity::ALL.iter().zip(&est) {
        assert!(e.std_error >= 0.0);
        assert!(e.value.abs() <= 5.0 * e.std_error + 1e-12, "{q:?}: {e:?}");
    }
}

#[test]
fn all_binary_estimates_match_exact() {
    let sys = validate_system(random_system(&Dims::binary(3), 5).unwrap()).unwrap();
    let exact = build_joint(&sys);
    let s = sample_trajectories(&sys, 1_000_000, 99).unwrap();
    let est = plugin_estimates(&s, &Quantity::ALL).unwrap();
    for (q, e) in Quantity::ALL.iter().zip(&est) {
        if *q == Quantity::ConservationResidual {
            continue;
        }
        let truth = q.evaluate(&exact);
        assert!(
            (e.value - truth).abs() <= 5.0 * e.std_error,
            "{q:?}: {e:?} vs {truth}"
        );
    }
}

// With a state alphabet the empirical joint breaks the Markov conditions the
// identity relies on by O(1/N), which the bootstrap cannot see; the residual
// is then a pure plug-in bias that shrinks tenfold per decade of samples.
#[test]
fn residual_bias_shrinks_as_one_over_n() {
    let sys = validate_system(random_system(&Dims::binary(3), 5).unwrap()).unwrap();
    let mean_residual = |count: u64| {
        (0..3u64)
            .map(|seed| {
                let s = sample_trajectories(&sys, count, 500 + seed).unwrap();
                Quantity::ConservationResidual.evaluate(&s.empirical_joint().unwrap())
            })
            .sum::<f64>()
            / 3.0
    };
    let ratio = mean_residual(100_000) / mean_residual(1_000_000);
    assert!(ratio > 5.0 && ratio < 20.0, "{ratio}");
}

#[test]
fn estimates_are_reproducible() {
    let sys = canonical(Canonical::BscBsc {
        eps_f: 0.1,
        eps_b: 0.2,
        horizon: 2,
    });
    let a = plugin_estimate(
        &sample_trajectories(&sys, 20_000, 3).unwrap(),
        Quantity::CrossTerm,
    );
    let b = plugin_estimate(
        &sample_trajectories(&sys, 20_000, 3).unwrap(),
        Quantity::CrossTerm,
    );
    assert_eq!(a.unwrap(), b.unwrap());
}

#[test]
fn std_error_follows_square_root_law() {
    let sys = canonical(Canonical::BscBsc {
        eps_f: 0.1,
        eps_b: 0.2,
        horizon: 3,
    });
    let rows =
        convergence_report(&sys, Quantity::MessageInfo, &[1_000, 10_000, 100_000], 12).unwrap();
    for w in rows.windows(2) {
        let ratio = w[0].std_error_bits / w[1].std_error_bits;
        let expected = 10f64.sqrt();
        assert!(ratio > expected / 2.0 && ratio < expected * 2.0, "{ratio}");
    }
    let mut out = Vec::new();
    write_convergence_csv(&rows, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("count,estimate_bits,std_error_bits,exact_bits,abs_error_bits\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn five_sigma_coverage_over_repetitions() {
    let sys = validate_system(random_system(&Dims::binary(2), 77).unwrap()).unwrap();
    let truth = Quantity::DirectedInfoCausal.evaluate(&build_joint(&sys));
    let covered = (0..100u64)
        .filter(|&rep| {
            let s = sample_trajectories(&sys, 20_000, 1000 + rep).unwrap();
            let e = plugin_estimate(&s, Quantity::DirectedInfoCausal).unwrap();
            (e.value - truth).abs() < 5.0 * e.std_error
        })
        .count();
    assert!(covered >= 95, "{covered}/100");
}
