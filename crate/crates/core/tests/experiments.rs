use orchid::experiments::{self, OscillatorOptions};
use orchid::OrchidParams;

#[test]
fn default_oscillator_run_synchronises() {
    let params = OrchidParams { n: 25, coupling: 3.0, step_budget: 600, ..Default::default() };
    let run = experiments::run_oscillator(&params, 7, OscillatorOptions::default()).unwrap();
    assert!(run.max_r() >= 0.95, "max r {}", run.max_r());
    assert!(run.final_r() >= 0.95, "final r {}", run.final_r());
}

#[test]
fn zero_coupling_stays_incoherent() {
    let noiseless = OrchidParams { n: 25, coherence_min: 1.0, coherence_max: 1.0, ..Default::default() };
    let sweep = experiments::coupling_sweep(&[0.0], &noiseless, 5, 21).unwrap();
    assert!(sweep.points[0].mean < 0.5, "{:?}", sweep.points[0]);
}

#[test]
fn coherence_endpoints() {
    let params = OrchidParams::default();
    let sweep = experiments::coherence_sweep(&[0.2, 0.9, 1.0], &params, 5, 22).unwrap();
    let theta = params.binding_threshold;
    assert!(sweep.points[0].mean < theta, "c=0.2: {:?}", sweep.points[0]);
    assert!(sweep.points[1].mean > theta, "c=0.9: {:?}", sweep.points[1]);
    assert!(sweep.points[2].mean >= 0.95, "c=1.0: {:?}", sweep.points[2]);
}

#[test]
fn honest_only_consensus_is_valid() {
    let params = OrchidParams { n: 30, byz_fraction: 0.0, ..Default::default() };
    for outcome in experiments::consensus_trials(&params, 20, 23).unwrap() {
        assert!(outcome.converged);
        assert_eq!(outcome.consensus_value, Some(params.honest_value));
    }
}

#[test]
fn agreement_up_to_forty_percent() {
    for (i, byz) in [0.1, 0.2, 0.33, 0.4].into_iter().enumerate() {
        let params = OrchidParams { n: 30, byz_fraction: byz, ..Default::default() };
        let outcomes = experiments::consensus_trials(&params, 15, 24 + i as u64).unwrap();
        for o in &outcomes {
            assert!(o.converged, "byz {byz}");
            assert!(o.steps_to_converge.unwrap() <= params.step_budget);
            assert_eq!(o.message_count, o.rounds_executed as u64 * o.messages_per_round);
            assert_eq!(o.messages_per_round, o.topology.degree_sum() as u64);
            assert!(o.commit_fraction_series.windows(2).all(|w| w[1] >= w[0]));
        }
    }
}

#[test]
fn ten_percent_byzantine_reference_run() {
    let params = OrchidParams { n: 30, byz_fraction: 0.1, ..Default::default() };
    let outcomes = experiments::consensus_trials(&params, 20, 25).unwrap();
    let r: Vec<f64> = outcomes.iter().map(|o| o.final_r).collect();
    let mean_r = orchid::stats::mean(&r);
    assert!((mean_r - 0.843).abs() <= 0.15, "mean final r {mean_r}");

    let sweep = experiments::byzantine_sweep(&[0.1], &params, 20, 25).unwrap();
    let median = sweep.time.points[0].median;
    assert!((2.0..=6.0).contains(&median), "median {median}");
}

#[test]
fn honest_only_sweep_point_converges() {
    let params = OrchidParams { n: 30, ..Default::default() };
    let sweep = experiments::byzantine_sweep(&[0.0], &params, 10, 26).unwrap();
    assert_eq!(sweep.rate.points[0].mean, 1.0);
}

#[test]
fn sweeps_are_reproducible() {
    let params = OrchidParams::default();
    let a = experiments::coupling_sweep(&[0.5, 2.0], &params, 4, 27).unwrap();
    let b = experiments::coupling_sweep(&[0.5, 2.0], &params, 4, 27).unwrap();
    assert_eq!(a, b);
    let x = experiments::table1_report(&params, 3, 28).unwrap();
    let y = experiments::table1_report(&params, 3, 28).unwrap();
    assert_eq!(x, y);
}
