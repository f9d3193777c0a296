use std::sync::Arc;

use grpda_core::linalg::{dist, max_abs_diff, LinearMap};
use grpda_core::problems::{generate, InstanceSpec};
use grpda_core::prox::{conjugate_prox_coefficients, ProxOracle};
use grpda_core::rng::Stream;
use grpda_core::solvers::{
    fista_next_t, grpda_step, psi0, run, AccelConfig, GrpdaConfig, IterateState, PdConfig, ProxGradConfig, RelaxConfig,
    RhoSchedule, RunOptions, Scheme, Solver, CSV_HEADER, DEFAULT_ZETA,
};
use grpda_core::{Error, SaddleProblem, GOLDEN_RATIO};

fn scalar_ls(k: f64, b: f64) -> SaddleProblem {
    let map = Arc::new(LinearMap::from_rows(&[vec![k]]).unwrap());
    SaddleProblem::new(map, ProxOracle::Zero, ProxOracle::LeastSquaresConjugate { b: vec![b] }).unwrap()
}

fn lasso(p: usize, q: usize, seed: u64) -> SaddleProblem {
    generate(&InstanceSpec::lasso(p, q, 2.min(q), seed)).unwrap().problem
}

fn drive(problem: &SaddleProblem, scheme: Scheme, iters: usize) -> Solver<'_> {
    let (x0, y0) = problem.default_start();
    let mut s = Solver::new(problem, scheme, x0, y0).unwrap();
    for _ in 0..iters {
        s.step().unwrap();
    }
    s
}

#[test]
fn zero_operator_is_stationary() {
    let problem = SaddleProblem::new(Arc::new(LinearMap::zeros(3, 4)), ProxOracle::Zero, ProxOracle::Zero).unwrap();
    let cfg = GrpdaConfig::with_steps(&problem, 1.5, 0.7, 0.3).unwrap();
    let x0 = vec![1.0, -2.0, 0.5, 3.0];
    let y0 = vec![0.25, 4.0, -1.0];
    let mut s = IterateState::new(x0.clone(), y0.clone()).unwrap();
    for _ in 0..50 {
        grpda_step(&problem, &cfg, &mut s).unwrap();
        assert_eq!(s.x, s.z);
        assert_eq!((&s.x, &s.y), (&x0, &y0));
    }
}

#[test]
fn scalar_least_squares_converges() {
    let problem = scalar_ls(2.0, 4.0);
    let cfg = GrpdaConfig::from_beta(&problem, GOLDEN_RATIO, 1.0, DEFAULT_ZETA).unwrap();
    let s = drive(&problem, Scheme::Grpda(cfg), 2000);
    assert!((s.state().x[0] - 2.0).abs() < 1e-8, "{}", s.state().x[0]);
}

#[test]
fn pda_scalar_converges() {
    let problem = scalar_ls(1.0, 1.0);
    let s = drive(&problem, Scheme::Pda(PdConfig { tau: 0.9, sigma: 0.9 }), 2000);
    assert!((s.state().x[0] - 1.0).abs() < 1e-8);
}

#[test]
fn small_lasso_matches_enumeration() {
    let mut rng = Stream::new(35);
    let rows: Vec<Vec<f64>> = (0..3).map(|_| rng.normal_vec(5)).collect();
    let b = rng.normal_vec(3);
    let mu = 0.1;
    let k = Arc::new(LinearMap::from_rows(&rows).unwrap());
    let problem = SaddleProblem::lasso(Arc::clone(&k), b.clone(), mu).unwrap();
    let cfg = RelaxConfig::from_beta(&problem, 2.0, 1.0, DEFAULT_ZETA, RhoSchedule::Constant(1.49)).unwrap();
    let s = drive(&problem, Scheme::Rgrpda(cfg), 50_000);
    let x = &s.state().x;
    let r: Vec<f64> = k.matvec(x).unwrap().iter().zip(&b).map(|(a, c)| a - c).collect();
    let g = k.adjoint_matvec(&r).unwrap();
    let residual = x.iter().zip(&g).fold(0.0f64, |m, (xi, gi)| {
        let v = if *xi != 0.0 {
            (gi + mu * xi.signum()).abs()
        } else {
            (gi.abs() - mu).max(0.0)
        };
        m.max(v)
    });
    assert!(residual <= 1e-6, "subgradient residual {residual}");
    let oracle = grpda_oracles::lasso_enumerate(&rows, &b, mu);
    assert!(max_abs_diff(x, &oracle) <= 1e-6, "{x:?} vs {oracle:?}");
}

#[test]
fn step_size_gate() {
    let problem = lasso(10, 20, 1);
    let l = problem.norm_bound();
    let psi = 1.5;
    let beta = 4.0;
    assert!(GrpdaConfig::from_beta(&problem, psi, beta, 0.99).is_ok());
    let tau = (psi / beta).sqrt() / l;
    assert!(GrpdaConfig::with_steps(&problem, psi, tau, beta * tau).is_err());
    assert!(GrpdaConfig::with_steps(&problem, psi, 1.01 * tau, beta * tau).is_err());
    assert!(GrpdaConfig::with_steps(&problem, 2.0, 0.5 * tau, beta * tau).is_ok());
    assert!(GrpdaConfig::with_steps(&problem, 2.01, 0.5 * tau, beta * tau).is_err());
    let game = generate(&InstanceSpec::matrix_game(
        grpda_core::problems::GeneratorCase::Uniform,
        5,
        5,
        1,
    ))
    .unwrap();
    assert!(GrpdaConfig::from_beta(&game.problem, 2.0, 1.0, 0.99).is_err());
    assert!(GrpdaConfig::from_beta(&game.problem, GOLDEN_RATIO, 1.0, 0.99).is_ok());
}

#[test]
fn convex_combination_identity() {
    let problem = lasso(12, 20, 3);
    let mirrored = problem.mirror();
    let cases: Vec<(&SaddleProblem, Scheme, f64)> = vec![
        (
            &problem,
            Scheme::Grpda(GrpdaConfig::from_beta(&problem, 1.3, 10.0, 0.99).unwrap()),
            1.3,
        ),
        (
            &mirrored,
            Scheme::Agrpda(AccelConfig {
                psi: 1.5,
                beta0: 1.0,
                gamma: 1.0,
            }),
            1.5,
        ),
        (
            &problem,
            Scheme::Rgrpda(RelaxConfig::from_beta(&problem, 2.0, 10.0, 0.99, RhoSchedule::Constant(1.0)).unwrap()),
            2.0,
        ),
    ];
    for (p, scheme, psi) in cases {
        let (x0, y0) = p.default_start();
        let mut s = Solver::new(p, scheme, x0, y0).unwrap();
        for _ in 0..300 {
            let before = s.state().clone();
            s.step().unwrap();
            let z = &s.state().z;
            for i in 0..z.len() {
                let r = psi * z[i] - (psi - 1.0) * before.x[i] - before.z[i];
                assert!(r.abs() <= 1e-12 * (1.0 + before.x[i].abs() + before.z[i].abs()), "{r}");
            }
        }
    }
}

#[test]
fn accelerated_without_strong_convexity_is_fixed_step() {
    let problem = lasso(15, 25, 4).mirror();
    let (psi, beta0) = (1.5, 2.0);
    let acc = AccelConfig { psi, beta0, gamma: 0.0 };
    let tau0 = (psi / beta0).sqrt() / problem.norm_bound();
    // τ₀σ₀L² = ψ sits on the boundary, so the fixed-step config is assembled directly
    let fixed = GrpdaConfig {
        psi,
        tau: tau0,
        sigma: beta0 * tau0,
        beta: beta0,
        zeta: 1.0,
    };
    let (x0, y0) = problem.default_start();
    let mut a = Solver::new(&problem, Scheme::Agrpda(acc), x0.clone(), y0.clone()).unwrap();
    let mut g = IterateState::new(x0, y0).unwrap();
    for _ in 0..1000 {
        a.step().unwrap();
        grpda_step(&problem, &fixed, &mut g).unwrap();
        let st = a.state();
        assert_eq!(max_abs_diff(&st.x, &g.x), 0.0);
        assert_eq!(max_abs_diff(&st.y, &g.y), 0.0);
        assert_eq!(max_abs_diff(&st.z, &g.z), 0.0);
        let acc = a.accel().unwrap();
        assert_eq!((acc.beta, acc.tau), (beta0, tau0));
    }
}

/// Fixed-step sweep with the dual prox written as `ηu + ϱb`.
fn specialized_step(k: &LinearMap, g: &ProxOracle, b: &[f64], cfg: &RelaxConfig, s: &mut IterateState) {
    let c = conjugate_prox_coefficients(&ProxOracle::LeastSquaresConjugate { b: b.to_vec() }, cfg.sigma).unwrap();
    s.z = s.next_z(cfg.psi);
    let kty = k.adjoint_matvec(&s.y).unwrap();
    let v: Vec<f64> = s.z.iter().zip(&kty).map(|(z, w)| z - cfg.tau * w).collect();
    s.x = g.prox(cfg.tau, &v).unwrap();
    let kx = k.matvec(&s.x).unwrap();
    s.y =
        s.y.iter()
            .zip(&kx)
            .zip(b)
            .map(|((y, w), bi)| c.eta * (y + cfg.sigma * w) + c.varrho * bi)
            .collect();
}

#[test]
fn unit_relaxation_is_specialized_fixed_step() {
    let inst = generate(&InstanceSpec::lasso(12, 18, 3, 6)).unwrap();
    let problem = &inst.problem;
    let b = inst.b().unwrap().to_vec();
    let cfg = RelaxConfig::from_beta(problem, 1.6, 5.0, 0.99, RhoSchedule::Constant(1.0)).unwrap();
    let (x0, ym1) = problem.default_start();
    let mut r = Solver::new(problem, Scheme::Rgrpda(cfg.clone()), x0.clone(), ym1.clone()).unwrap();
    let c = cfg.coefficients;
    let kx0 = inst.k.matvec(&x0).unwrap();
    let y0: Vec<f64> = ym1
        .iter()
        .zip(&kx0)
        .zip(&b)
        .map(|((y, w), bi)| c.eta * (y + cfg.sigma * w) + c.varrho * bi)
        .collect();
    let mut g = IterateState::new(x0, y0).unwrap();
    let gcfg = GrpdaConfig::with_steps(problem, cfg.psi, cfg.tau, cfg.sigma).unwrap();
    let mut h = g.clone();
    for _ in 0..1000 {
        let y_before = g.y.clone();
        r.step().unwrap();
        specialized_step(&inst.k, problem.g(), &b, &cfg, &mut g);
        grpda_step(problem, &gcfg, &mut h).unwrap();
        let st = r.state();
        assert!(max_abs_diff(&st.x, &g.x) <= 1e-12);
        assert!(max_abs_diff(&st.z, &g.z) <= 1e-12);
        assert!(max_abs_diff(&st.y, &y_before) <= 1e-12);
        assert!(max_abs_diff(&h.x, &g.x) <= 1e-12);
    }
}

#[test]
fn accelerated_parameter_bounds() {
    let problem = generate(&InstanceSpec::lasso(20, 40, 4, 12)).unwrap().problem.mirror();
    let acc = AccelConfig {
        psi: 1.5,
        beta0: 1.0,
        gamma: 1.0,
    };
    let (x0, y0) = problem.default_start();
    let mut s = Solver::new(&problem, Scheme::Agrpda(acc), x0, y0).unwrap();
    let first = s.accel().unwrap().clone();
    assert!((first.phi_r - 10.0 / 9.0).abs() < 1e-15);
    assert!((first.psi0 - psi0()).abs() == 0.0 && (psi0().powi(3) - psi0() - 1.0).abs() < 1e-13);
    let low = first.omega_low();
    let phi = first.phi_r;
    let l = first.l;
    let chain_low = 1.0 / (phi * (1.0 + first.gamma * phi.sqrt() * first.tau0)).sqrt();
    let (mut beta, mut tau) = (first.beta, first.tau);
    for _ in 0..3000 {
        s.step().unwrap();
        let a = s.accel().unwrap();
        assert!(a.beta >= beta);
        assert!(a.omega > low - 1e-15 && a.omega < 1.0, "{} vs {low}", a.omega);
        assert!(a.tau <= phi * tau * (1.0 + 1e-12));
        let psi = a.psi;
        let sb = a.beta.sqrt();
        assert!(chain_low * psi.sqrt() / (l * sb) <= a.tau * (1.0 + 1e-12));
        assert!(a.tau <= (a.delta * psi).sqrt() / (l * sb) * (1.0 + 1e-12));
        assert!((a.delta * psi).sqrt() / (l * sb) <= (phi * psi).sqrt() / (l * sb) * (1.0 + 1e-12));
        assert!((phi * psi).sqrt() / (l * sb) <= (phi * psi).sqrt() / (l * a.beta0.sqrt()) * (1.0 + 1e-12));
        beta = a.beta;
        tau = a.tau;
    }
    assert!(beta > 100.0);
}

#[test]
fn accelerated_rejects_bad_parameters() {
    let problem = lasso(6, 8, 1).mirror();
    for psi in [1.3, GOLDEN_RATIO, 1.7] {
        assert!(Scheme::Agrpda(AccelConfig {
            psi,
            beta0: 1.0,
            gamma: 1.0
        })
        .validate(&problem)
        .is_err());
    }
    assert!(Scheme::Agrpda(AccelConfig {
        psi: 1.5,
        beta0: 1.0,
        gamma: 2.0
    })
    .validate(&problem)
    .is_err());
    let unmirrored = lasso(6, 8, 1);
    assert!(Scheme::Agrpda(AccelConfig {
        psi: 1.5,
        beta0: 1.0,
        gamma: 1.0
    })
    .validate(&unmirrored)
    .is_err());
}

#[test]
fn relaxed_equality_constraint_is_feasible() {
    let mut rng = Stream::new(46);
    let rows: Vec<Vec<f64>> = (0..4).map(|_| rng.normal_vec(6)).collect();
    let k = Arc::new(LinearMap::from_rows(&rows).unwrap());
    let x_star: Vec<f64> = rng.normal_vec(6);
    let b = k.matvec(&x_star).unwrap();
    let problem = SaddleProblem::equality_constrained(Arc::clone(&k), b.clone(), ProxOracle::l1(1.0).unwrap()).unwrap();
    let cfg = RelaxConfig::from_beta(&problem, 2.0, 1.0, 0.99, RhoSchedule::Constant(1.49)).unwrap();
    assert_eq!((cfg.coefficients.eta, cfg.coefficients.varrho), (1.0, -cfg.sigma));
    let s = drive(&problem, Scheme::Rgrpda(cfg), 50_000);
    let r = dist(&k.matvec(&s.state().x).unwrap(), &b);
    assert!(r <= 1e-6, "‖Kx − b‖ = {r}");
    assert!(problem.objective(&s.state().x).unwrap().is_finite());
}

#[test]
fn relaxed_rejects_other_duals() {
    let game = generate(&InstanceSpec::matrix_game(
        grpda_core::problems::GeneratorCase::Normal,
        4,
        4,
        0,
    ))
    .unwrap();
    let err = RelaxConfig::from_beta(&game.problem, 2.0, 1.0, 0.99, RhoSchedule::Constant(1.0)).unwrap_err();
    assert!(matches!(err, Error::Unsupported(_)));
    let problem = lasso(5, 6, 0);
    for rho in [0.0, 1.5, -1.0] {
        assert!(RelaxConfig::from_beta(&problem, 2.0, 1.0, 0.99, RhoSchedule::Constant(rho)).is_err());
    }
}

#[test]
fn fista_momentum_sequence() {
    let t1 = fista_next_t(1.0);
    assert!((t1 - GOLDEN_RATIO).abs() < 1e-15);
    assert_eq!(fista_next_t(t1), 0.5 * (1.0 + (1.0 + 4.0 * t1 * t1).sqrt()));
}

#[test]
fn pgm_descends_on_nnls() {
    let spec = InstanceSpec::nnls_random(grpda_core::problems::GeneratorCase::SparseUniform, 30, 60, 5, 0.3, 2);
    let problem = generate(&spec).unwrap().problem;
    let cfg = ProxGradConfig::from_problem(&problem).unwrap();
    let (x0, y0) = problem.default_start();
    let mut s = Solver::new(&problem, Scheme::Pgm(cfg), x0.clone(), y0).unwrap();
    let mut last = problem.objective(&x0).unwrap().to_f64();
    for _ in 0..2000 {
        s.step().unwrap();
        let f = problem.objective(&s.state().x).unwrap().to_f64();
        assert!(f <= last + 1e-12 * (1.0 + last));
        last = f;
    }
    assert!(ProxGradConfig { alpha: 1.0 }.validate(&problem.mirror()).is_err());
}

#[test]
fn baselines_converge_on_lasso() {
    let problem = lasso(10, 15, 8);
    let reference = grpda_core::solvers::reference_run(&problem, &Default::default()).unwrap();
    assert!(reference.converged);
    let defaults = grpda_core::problems::default_config(&InstanceSpec::lasso(10, 15, 2, 8));
    for name in ["grpda", "rgrpda", "pda", "fista", "pgm", "graal", "agrpda"] {
        let p = grpda_core::problems::scheme_problem(name, &problem);
        let d = grpda_core::problems::FamilyDefaults {
            beta: 1.0,
            ..defaults.clone()
        };
        let scheme = grpda_core::problems::default_scheme(name, &p, &d).unwrap();
        let s = drive(&p, scheme, 20_000);
        let (x, _) = s.canonical_point();
        let err = problem.objective(x).unwrap().to_f64() - reference.objective;
        assert!(err.abs() < 1e-6, "{name}: {err}");
    }
}

#[test]
fn arrow_hurwicz_divergence_is_reported_with_trace() {
    let problem = lasso(8, 10, 9);
    let cfg = PdConfig {
        tau: 100.0,
        sigma: 100.0,
    };
    let (x0, y0) = problem.default_start();
    let opts = RunOptions {
        budget: 10_000,
        stride: 1,
        ..Default::default()
    };
    let err = run(&problem, &Scheme::ArrowHurwicz(cfg), x0, y0, &opts).unwrap_err();
    let Error::Diverged { scheme, iteration } = &err.error else {
        panic!("{:?}", err.error)
    };
    assert_eq!(scheme, "arrow-hurwicz");
    let trace = err.trace.expect("partial trace");
    assert_eq!(trace.rows.len(), iteration - 1);
}

#[test]
fn stride_and_budget_row_counts() {
    let problem = lasso(8, 12, 10);
    let cfg = GrpdaConfig::from_beta(&problem, 2.0, 4.0, 0.99).unwrap();
    let (x0, y0) = problem.default_start();
    let count = |budget, stride| {
        let opts = RunOptions {
            budget,
            stride,
            ..Default::default()
        };
        run(&problem, &Scheme::Grpda(cfg), x0.clone(), y0.clone(), &opts)
            .unwrap()
            .rows
            .len()
    };
    assert_eq!(count(100, 10), 11);
    assert_eq!(count(1, 1), 1);
    assert_eq!(count(1, 10), 1);
    assert_eq!(count(100, 1), 100);
    assert_eq!(count(91, 10), 10);
    let opts = RunOptions {
        budget: 0,
        stride: 1,
        ..Default::default()
    };
    assert!(run(&problem, &Scheme::Grpda(cfg), x0, y0, &opts).is_err());
}

#[test]
fn csv_is_deterministic() {
    let spec = InstanceSpec::lasso(10, 20, 3, 77);
    let render = || {
        let problem = generate(&spec).unwrap().problem;
        let reference = grpda_core::solvers::reference_run(
            &problem,
            &grpda_core::solvers::ReferenceOptions {
                max_iter: 30_000,
                ..Default::default()
            },
        )
        .unwrap();
        let cfg = GrpdaConfig::from_beta(&problem, 2.0, 400.0, 0.99).unwrap();
        let (x0, y0) = problem.default_start();
        let opts = RunOptions {
            budget: 500,
            stride: 7,
            reference: Some(reference),
            ..Default::default()
        };
        run(&problem, &Scheme::Grpda(cfg), x0, y0, &opts)
            .unwrap()
            .to_csv_string()
    };
    let a = render();
    assert_eq!(a, render());
    assert!(a.starts_with(CSV_HEADER));
    let last = a.lines().last().unwrap();
    assert_eq!(last.split(',').count(), 8);
    assert!(last.starts_with("500,"));
    assert!(last.ends_with(",0"));
}
