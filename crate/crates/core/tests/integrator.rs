use starklab_core::integrator::{
    integrate_direct, integrate_prufer, wronskian, IntegrationConfig, PruferSolver, Trajectory,
};
use starklab_core::potentials::{BumpFunction, PotentialSpec, RandomBump};
use starklab_core::transforms::{u_pair_of_phi, x_of_xi, PruferState};
use starklab_core::LIOUVILLE_C;
use starklab_oracles::airy::airy_neg;

fn specs() -> Vec<PotentialSpec> {
    vec![
        PotentialSpec::Zero,
        PotentialSpec::power_decay(1.0, 0.3).unwrap(),
        PotentialSpec::RandomBump(RandomBump::new(BumpFunction::default(), 3)),
    ]
}

#[test]
fn direct_run_tracks_airy() {
    let a = airy_neg(1.0);
    let cfg = IntegrationConfig::default();
    let t = integrate_direct(&PotentialSpec::Zero, 0.0, (1.0, 200.0), (a.ai, -a.aip), &cfg).unwrap();
    let u = t.u();
    for (i, &x) in t.x().iter().enumerate() {
        let r = airy_neg(x);
        assert!((u[i] - r.ai).abs() <= 1e-7 * r.modulus(), "x = {x}");
    }
}

fn final_phi(t: &Trajectory) -> (f64, f64) {
    t.phi_pair(t.len() - 1)
}

#[test]
fn prufer_and_direct_agree() {
    let cfg = IntegrationConfig::default();
    let beta = 0.4;
    for spec in specs() {
        for e in [-2.0, 0.0, 3.0] {
            let p = integrate_prufer(&spec, e, (1.0, 1e3), beta, &cfg).unwrap();
            let (u0, du0) = u_pair_of_phi(LIOUVILLE_C, beta.sin(), beta.cos());
            let d = integrate_direct(&spec, e, (LIOUVILLE_C, x_of_xi(1e3).unwrap()), (u0, du0), &cfg).unwrap();
            let (a, b) = (final_phi(&p), final_phi(&d));
            let scale = a.0.hypot(a.1);
            assert!((a.0 - b.0).hypot(a.1 - b.1) <= 1e-7 * scale, "{} E={e}: {a:?} {b:?}", spec.label());
        }
    }
}

#[test]
fn wronskian_is_conserved() {
    let cfg = IntegrationConfig::default();
    for spec in specs() {
        let t1 = integrate_prufer(&spec, 0.5, (1.0, 2e4), std::f64::consts::FRAC_PI_2, &cfg).unwrap();
        let t2 = integrate_prufer(&spec, 0.5, (1.0, 2e4), 0.0, &cfg).unwrap();
        let w = wronskian(&t1, &t2).unwrap();
        let drift = w.iter().map(|v| (v - w[0]).abs()).fold(0.0, f64::max) / w[0].abs();
        assert!(drift < 1e-8, "{}: {drift:e}", spec.label());
    }
}

fn log_r_at(spec: &PotentialSpec, e: f64, xi: f64, cfg: &IntegrationConfig) -> f64 {
    let mut s = PruferSolver::new(spec, e, 1.0, PruferState { log_r: 0.0, theta: 1.1 }, cfg).unwrap();
    s.advance(xi, |_, _, _| {}).unwrap();
    s.state().log_r
}

#[test]
fn halving_tolerances_barely_moves_log_r() {
    let cfg = IntegrationConfig::default();
    for spec in specs() {
        let a = log_r_at(&spec, 1.0, 1e4, &cfg);
        let b = log_r_at(&spec, 1.0, 1e4, &cfg.scaled(0.5));
        assert!((a - b).abs() < 1e-6, "{}: {:e}", spec.label(), (a - b).abs());
    }
}

#[test]
fn continuous_in_energy() {
    let cfg = IntegrationConfig::default();
    let spec = PotentialSpec::power_decay(2.0, 0.5).unwrap();
    let base = log_r_at(&spec, 0.7, 5e3, &cfg);
    let mut prev = f64::INFINITY;
    for d in [1e-2, 1e-4, 1e-6] {
        let gap = (log_r_at(&spec, 0.7 + d, 5e3, &cfg) - base).abs();
        assert!(gap < prev.max(1e-9));
        prev = gap;
    }
    assert!(prev < 1e-4);
}
