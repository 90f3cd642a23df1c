use bht_core::analysis::{
    oracle_comparison, remainder_report, run_ensemble, tail_spectrum, EnsembleConfig,
    EnsembleStats, FieldTag,
};
use bht_core::solver::{Method, SolveConfig, SourceSpec};
use bht_core::spectral::Lattice;
use bht_core::velocity::VelocityParams;
use bht_core::Error;

fn config(members: usize, amp: f64, frozen: bool) -> EnsembleConfig {
    let lattice = Lattice::new(48).unwrap();
    EnsembleConfig {
        lattice,
        members,
        base_seed: 17,
        frozen_below: frozen.then_some(4.0),
        velocity: VelocityParams::steep(amp, -2.5).unwrap(),
        source: SourceSpec::unit_shells(lattice, 2.0).unwrap(),
        solve: SolveConfig {
            kappa_bar: 2.0,
            ..SolveConfig::default()
        },
        window: (6.0, 16.0),
        cross_check: true,
        check_truncation: true,
    }
}

#[test]
fn single_member_has_zero_variance() {
    let run = run_ensemble(&config(1, 1.0, false)).unwrap();
    let s = run.stats.field(FieldTag::Theta, 1).unwrap();
    assert!(s.variance.iter().all(|&v| v == 0.0));
    let rec = run.records[0].spectrum(FieldTag::Theta, 1).unwrap();
    assert_eq!(s.mean, rec.sums);
    let r = &run.records[0];
    assert!(r.h1_bound_holds);
    assert!(r.scalar("direct_gap").unwrap() < 1e-8);
    assert!(r.scalar("residual").unwrap() <= 10.0 * 1e-10);
}

#[test]
fn deterministic_quantities_have_zero_variance() {
    let run = run_ensemble(&config(8, 1.0, false)).unwrap();
    // |X_k| = 1 only to rounding, so ‖u‖₂ agrees across seeds to round-off.
    let ul2 = run.stats.scalar("u_l2").unwrap();
    assert!(ul2.variance <= 1e-28 * ul2.mean * ul2.mean);
    let vel = run.stats.field(FieldTag::Velocity, 0).unwrap();
    let peak = vel.mean.iter().fold(0.0f64, |a, &b| a.max(b));
    assert!(vel.variance.iter().all(|&v| v <= 1e-28 * peak * peak));
    assert!(run.stats.field(FieldTag::Theta, 0).unwrap().variance[5] > 0.0);
}

#[test]
fn doubling_members_reproduces_prefix() {
    let small = run_ensemble(&config(4, 1.0, false)).unwrap();
    let big = run_ensemble(&config(8, 1.0, false)).unwrap();
    assert_eq!(small.records, big.records[..4].to_vec());
    let prefix = EnsembleStats::from_records(
        &big.records[..4],
        Lattice::new(small.stats.lattice_n).unwrap(),
    )
    .unwrap();
    assert_eq!(prefix, small.stats);
}

#[test]
fn frozen_members_share_tau() {
    let run = run_ensemble(&config(4, 1.0, true)).unwrap();
    let t0 = &run.records[0].tau_power;
    assert!(run.records.iter().all(|r| &r.tau_power == t0));
    assert_eq!(run.stats.scalar("grad_tau_sq").unwrap().variance, 0.0);
}

#[test]
fn low_and_high_first_iterates_are_orthogonal_on_average() {
    let m = 64;
    let run = run_ensemble(&config(m, 1.0, true)).unwrap();
    let s = run.stats.scalar("lh_inner").unwrap();
    assert!(s.variance > 0.0);
    assert!(s.mean.abs() <= 5.0 * s.stderr(m), "{s:?}");
    for r in &run.records {
        assert!(r.scalar("split_defect").unwrap() < 1e-13);
        assert_eq!(r.scalar("vartheta1_l_above_3kb").unwrap(), 0.0);
    }
}

#[test]
fn monte_carlo_matches_oracle_on_a_small_lattice() {
    let run = run_ensemble(&config(96, 1.0, true)).unwrap();
    let cmp = oracle_comparison(&run.stats, (6, 16), 5.0).unwrap();
    assert!(cmp.pass_fraction >= 0.95, "{:?}", cmp.rows);
    assert!(cmp.rms_relative_deviation < 0.1);
}

#[test]
fn tails_are_cumulative_and_monotone() {
    let run = run_ensemble(&config(2, 1.0, false)).unwrap();
    let t = tail_spectrum(&run.stats, FieldTag::Theta, 1).unwrap();
    let grad_sq = run.stats.scalar("grad_theta_sq").unwrap().mean;
    assert!((t[0].1 - grad_sq).abs() <= 1e-12 * grad_sq);
    assert!(t.windows(2).all(|w| w[1].1 <= w[0].1));
    assert!(matches!(
        run.stats.scalar("nope"),
        Err(Error::UnknownField(_))
    ));
}

#[test]
fn zero_velocity_has_zero_remainders() {
    let cfg = config(2, 0.0, false);
    let run = run_ensemble(&cfg).unwrap();
    let rep = remainder_report(&run.stats, 2.0, &cfg.velocity, cfg.lattice, cfg.window).unwrap();
    assert!(rep
        .rows
        .iter()
        .all(|r| r.leading == 0.0 && r.vartheta_rem == 0.0 && r.phi == 0.0 && r.ratio == 0.0));
}

#[test]
fn failing_member_reports_index_and_seed() {
    let mut cfg = config(3, 30.0, false);
    cfg.solve.method = Method::FixedPoint;
    cfg.solve.max_iter = 50;
    match run_ensemble(&cfg) {
        Err(Error::Realization { index, seed, .. }) => {
            assert_eq!(index, 0);
            assert_eq!(seed, cfg.seed(0));
        }
        other => panic!("expected a realization error, got {other:?}"),
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = config(2, 1.0, false);
    cfg.window = (4.0, 16.0);
    assert!(run_ensemble(&cfg).is_err());
    let mut cfg = config(2, 1.0, false);
    cfg.window = (6.0, 40.0);
    assert!(run_ensemble(&cfg).is_err());
    let mut cfg = config(0, 1.0, false);
    cfg.members = 0;
    assert!(run_ensemble(&cfg).is_err());
}
