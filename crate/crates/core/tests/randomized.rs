use proptest::prelude::*;
use starklab_core::integrator::{IntegrationConfig, PruferSolver};
use starklab_core::potentials::{BumpFunction, PotentialSpec, RandomBump};
use starklab_core::randomized::{
    block_statistics, dimension_report, run_block_ensemble, BlockOptions, ThetaMode, KAPPA,
};
use starklab_core::transforms::PruferState;

fn template() -> RandomBump {
    RandomBump::new(BumpFunction::default(), 0)
}

fn increment(bump: RandomBump, n: u64) -> f64 {
    let spec = PotentialSpec::RandomBump(bump);
    let cfg = IntegrationConfig::default();
    let (a, b) = ((n as f64).powi(3), ((n + 1) as f64).powi(3));
    let mut s = PruferSolver::new(&spec, 0.3, a, PruferState { log_r: 0.0, theta: 0.9 }, &cfg).unwrap();
    s.advance(b, |_, _, _| {}).unwrap();
    s.state().log_r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn block_ignores_other_phases(seed in 0u64..1000, n in 3u64..9, other in 1u64..40, phase in 0.0f64..std::f64::consts::TAU) {
        prop_assume!(other != n);
        let base = RandomBump::new(BumpFunction::default(), seed);
        let moved = base.clone().with_phase(other, phase);
        prop_assert_eq!(increment(base, n).to_bits(), increment(moved, n).to_bits());
    }

    #[test]
    fn dimension_and_pure_point_partition(
        energies in prop::collection::vec(-3.0f64..3.0, 1..20),
        norm in 0.0f64..400.0,
    ) {
        let r = dimension_report(&BumpFunction::default(), &energies, norm);
        for i in 0..energies.len() {
            let flags = [r.dimension[i].is_some(), r.pure_point[i], r.boundary[i]];
            prop_assert_eq!(flags.iter().filter(|&&f| f).count(), 1);
            if let Some(d) = r.dimension[i] {
                prop_assert!((0.0..=1.0).contains(&d));
            }
        }
    }
}

#[test]
fn mean_increment_matches_leading_term() {
    let t = template();
    let cfg = IntegrationConfig::default();
    let opts = BlockOptions { theta: ThetaMode::Random, antithetic: true };
    let inc = run_block_ensemble(&t, 0.0, 20, 600, 11, &cfg, opts).unwrap();
    let s = block_statistics(&inc, &t, 0.0, true).unwrap();
    let target = KAPPA * s.expected;
    assert!((s.mean - target).abs() <= 3.0 * s.stderr, "mean {} target {} stderr {}", s.mean, target, s.stderr);
    assert!(s.max_abs <= s.envelope);
}

#[test]
fn increment_variance_falls_like_inverse_n() {
    let t = template();
    let cfg = IntegrationConfig::default();
    let opts = BlockOptions::default();
    let scaled: Vec<f64> = [10u64, 20, 40, 80]
        .iter()
        .map(|&n| {
            let inc = run_block_ensemble(&t, 0.0, n, 100, 5, &cfg, opts).unwrap();
            n as f64 * block_statistics(&inc, &t, 0.0, false).unwrap().variance
        })
        .collect();
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(hi / lo < 2.0, "n·var = {scaled:?}");
}
