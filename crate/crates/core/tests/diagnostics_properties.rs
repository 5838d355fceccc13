use iapd_core::bench::generate_l1ls;
use iapd_core::diagnostics::{certify, energy, energy_terms, CertifyConfig, EnergyMonitor};
use iapd_core::linalg::Vector;
use iapd_core::problem::{compute_reference_with, SaddleProblem, StepParams};
use iapd_core::solvers::{iapd_step, IapdOption, IapdState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64) -> (SaddleProblem, StepParams) {
    let inst = generate_l1ls(40, 80, 0.1, seed).unwrap();
    let norm = inst.problem.norm_k();
    let s = StepParams::new(0.98 / (2.0 * norm), 2.0 / norm, 5.0).unwrap();
    (inst.problem, s)
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::new((0..n).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap()
}

#[test]
fn initial_energy_matches_closed_form() {
    let (p, s) = instance(1);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let x1 = random_vector(&mut rng, p.n());
        let y1 = random_vector(&mut rng, p.m());
        let x = random_vector(&mut rng, p.n());
        let y = random_vector(&mut rng, p.m());
        let st = IapdState::new(&p, &s, &x1, &y1).unwrap();
        let e = energy_terms(&p, &s, &st, &x, &y).unwrap();
        assert_eq!(e.i4, 0.0);
        // t1² (L(x1, y) - L(x, y1)) + ||x1 - x||² / (2 alpha) + t2² ||y1 - y||² / (2 beta)
        let (t1, t2) = (st.t, st.t_next);
        let closed = t1 * t1 * (p.lagrangian(&x1, &y).unwrap() - p.lagrangian(&x, &y1).unwrap())
            + x1.dist_sq(&x) / (2.0 * s.alpha)
            + t2 * t2 * y1.dist_sq(&y) / (2.0 * s.beta);
        assert!(
            (e.energy - closed).abs() <= 1e-12 * closed.abs().max(1.0),
            "{} vs {closed}",
            e.energy
        );
    }
}

#[test]
fn energy_is_nonincreasing_on_seeded_instances() {
    for seed in [1, 2, 3] {
        let (p, s) = instance(seed);
        let r = compute_reference_with(&p, &s, IapdOption::Option1, 10_000).unwrap();
        for option in [IapdOption::Option1, IapdOption::Option2] {
            let mut st =
                IapdState::new(&p, &s, &Vector::zeros(p.n()), &Vector::zeros(p.m())).unwrap();
            let mon = EnergyMonitor::new(&p, &s, &r, &st).unwrap();
            let mut reports = vec![mon.report(&st).unwrap()];
            for _ in 0..1000 {
                st = iapd_step(&p, &s, &st, option).unwrap();
                reports.push(mon.report(&st).unwrap());
            }
            let cfg = CertifyConfig::new(&p, &s, &r);
            let cert = certify(&reports, &cfg);
            assert!(cert.passed(), "seed {seed} {option:?}: {cert:?}");
            for rep in &reports {
                assert_eq!(rep.energy, rep.i1 + rep.i2 + rep.i3 + rep.i4);
                assert!(rep.gap_ref >= -1e-9 * (1.0 + rep.gap_ref.abs()) - cfg.slack);
            }
        }
    }
}

#[test]
fn standalone_energy_uses_own_baseline() {
    let (p, s) = instance(2);
    let r = compute_reference_with(&p, &s, IapdOption::Option1, 2000).unwrap();
    let mut st = IapdState::new(&p, &s, &Vector::zeros(p.n()), &Vector::zeros(p.m())).unwrap();
    for _ in 0..10 {
        st = iapd_step(&p, &s, &st, IapdOption::Option1).unwrap();
    }
    let rep = energy(&p, &s, &st, &r).unwrap();
    assert_eq!(rep.k, 11);
    assert_eq!(rep.bound_gap, rep.energy / (st.t * st.t));
    assert!(rep.gap_ref <= rep.bound_gap);
}
