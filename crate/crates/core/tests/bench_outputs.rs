use iapd_core::bench::{
    generate_l1ls, generate_nnls, read_csv, run_benchmark, Algorithm, CertificateState, Experiment,
    ExperimentConfig, StepOverrides,
};

#[test]
fn generators_are_deterministic() {
    let a = generate_l1ls(30, 50, 0.1, 42).unwrap();
    let b = generate_l1ls(30, 50, 0.1, 42).unwrap();
    assert_eq!(a.problem.k.to_dense(), b.problem.k.to_dense());
    assert_eq!(a.planted, b.planted);
    assert_eq!(a.noise, b.noise);
    assert_eq!(a.rhs, b.rhs);
    let c = generate_l1ls(30, 50, 0.1, 43).unwrap();
    assert_ne!(a.rhs, c.rhs);

    let a = generate_nnls(30, 50, 0.2, 42).unwrap();
    let b = generate_nnls(30, 50, 0.2, 42).unwrap();
    assert_eq!(a.problem.k.triplets(), b.problem.k.triplets());
    assert_eq!(a.rhs, b.rhs);
}

#[test]
fn planted_support_sizes() {
    for n in [1, 2, 19, 20, 21, 400] {
        let expected = (0.95 * n as f64).round() as usize;
        assert_eq!(
            generate_l1ls(3, n, 0.1, 1).unwrap().support_size(),
            expected
        );
    }
    for n in [1, 10, 40, 200] {
        let expected = (0.05 * n as f64).round() as usize;
        assert_eq!(
            generate_nnls(3, n, 0.5, 1).unwrap().support_size(),
            expected
        );
    }
}

#[test]
fn planted_values_in_range() {
    let l = generate_l1ls(5, 200, 0.1, 8).unwrap();
    assert!(l.planted.iter().all(|v| (-10.0..=10.0).contains(v)));
    let n = generate_nnls(5, 200, 0.5, 8).unwrap();
    assert!(n.planted.iter().all(|v| (0.0..=100.0).contains(v)));
    assert!(n
        .problem
        .k
        .triplets()
        .iter()
        .all(|t| (0.0..=0.1).contains(&t.2)));
}

#[test]
fn nnls_density_concentrates() {
    let inst = generate_nnls(400, 200, 0.1, 11).unwrap();
    let density = inst.problem.k.nnz() as f64 / 80_000.0;
    assert!((0.08..=0.12).contains(&density), "{density}");
}

#[test]
fn l1ls_noise_has_variance_one_tenth() {
    let inst = generate_l1ls(20_000, 1, 0.1, 5).unwrap();
    let w = inst.noise.unwrap();
    let var = w.norm_sq() / w.len() as f64;
    assert!((var - 0.1).abs() < 0.005, "{var}");
}

fn small(experiment: Experiment, dir: &std::path::Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(experiment);
    cfg.m = 30;
    cfg.n = 40;
    cfg.density = 0.3;
    cfg.iters = 120;
    cfg.out_dir = Some(dir.to_path_buf());
    cfg
}

#[test]
fn benchmark_writes_all_files_and_certifies_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(Experiment::L1ls, dir.path());
    let report = run_benchmark(&cfg).unwrap();
    assert!(report.is_complete());
    assert_eq!(report.runs.len(), 6);
    for a in Algorithm::ALL {
        let rows = read_csv(dir.path().join(format!("{a}.csv"))).unwrap();
        assert_eq!(rows.len(), 120);
        assert_eq!(rows, report.run(a).unwrap().trace);
        assert!(rows.windows(2).all(|w| w[0].k < w[1].k));
        assert!(rows.iter().all(|r| r.objective.is_finite()));
        assert_eq!(rows.iter().all(|r| r.energy.is_some()), a.is_iapd());
    }
    for a in [Algorithm::IapdOp1, Algorithm::IapdOp2] {
        let rows = read_csv(dir.path().join(format!("{a}.csv"))).unwrap();
        let state = CertificateState::read(dir.path().join(format!("{a}.cert.json"))).unwrap();
        let from_disk = state.certify(&rows).unwrap();
        let in_memory = report.run(a).unwrap().certificate.clone().unwrap();
        assert_eq!(from_disk, in_memory);
        assert!(from_disk.passed());
    }
    let plot = std::fs::read_to_string(dir.path().join("plotdata.tsv")).unwrap();
    assert_eq!(plot.lines().count(), 121);
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("iapd-op1:") && summary.contains("slope_objective="));
}

#[test]
fn traces_are_identical_across_runs() {
    let strip = |cfg: &ExperimentConfig| {
        let r = run_benchmark(cfg).unwrap();
        r.runs
            .into_iter()
            .flat_map(|run| run.trace)
            .map(|mut row| {
                row.elapsed_s = 0.0;
                row
            })
            .collect::<Vec<_>>()
    };
    for e in [Experiment::L1ls, Experiment::Nnls] {
        let mut cfg = ExperimentConfig::new(e);
        cfg.m = 25;
        cfg.n = 35;
        cfg.density = 0.3;
        cfg.iters = 60;
        assert_eq!(strip(&cfg), strip(&cfg));
    }
}

#[test]
fn rejected_override_skips_only_iapd() {
    let mut cfg = ExperimentConfig::new(Experiment::Nnls);
    cfg.m = 20;
    cfg.n = 20;
    cfg.density = 0.5;
    cfg.iters = 20;
    cfg.overrides = StepOverrides {
        alpha: Some(100.0),
        ..StepOverrides::default()
    };
    let report = run_benchmark(&cfg).unwrap();
    assert!(!report.is_complete());
    let skipped: Vec<_> = report.skipped.iter().map(|(a, _)| *a).collect();
    assert_eq!(skipped, vec![Algorithm::IapdOp1, Algorithm::IapdOp2]);
    assert_eq!(report.runs.len(), 4);
    assert!(report
        .summary()
        .contains("iapd-op1: skipped: invalid parameters"));
}

#[test]
fn invalid_config_is_rejected() {
    let mut cfg = ExperimentConfig::new(Experiment::Nnls);
    cfg.density = 1.5;
    assert!(run_benchmark(&cfg).is_err());
}
