use std::sync::Arc;

use grpda_core::fixedpoint::{
    averaged_excess, averagedness_check, build_map, certify_firm_nonexpansive, AffineFixedPointMap, CertifyMode,
    DEFAULT_SAMPLES,
};
use grpda_core::linalg::{dense_eigenvalues, max_abs_diff, norm, DenseSquareMatrix, LinearMap};
use grpda_core::rng::Stream;
use grpda_core::solvers::{rgrpda_step, IterateState, RelaxConfig, RhoSchedule};
use grpda_core::{ProxOracle, SaddleProblem};

fn random_ls(p: usize, q: usize, g: ProxOracle, seed: u64) -> (SaddleProblem, Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = Stream::new(seed);
    let rows: Vec<Vec<f64>> = (0..p).map(|_| rng.normal_vec(q)).collect();
    let b = rng.normal_vec(p);
    let k = Arc::new(LinearMap::from_rows(&rows).unwrap());
    (
        SaddleProblem::new(k, g, ProxOracle::LeastSquaresConjugate { b: b.clone() }).unwrap(),
        rows,
        b,
    )
}

fn map_with_product(problem: &SaddleProblem, psi: f64, sigma: f64, product: f64) -> AffineFixedPointMap {
    let l = problem.norm_bound();
    build_map(problem, product / (sigma * l * l), sigma, psi).unwrap()
}

fn to_rows(m: &DenseSquareMatrix) -> Vec<Vec<f64>> {
    (0..m.order())
        .map(|i| (0..m.order()).map(|j| m.get(i, j)).collect())
        .collect()
}

#[test]
fn spectral_certificate_on_random_five_by_seven() {
    let (problem, _, _) = random_ls(5, 7, ProxOracle::l1(0.5).unwrap(), 57);
    for psi in [2.0, 1.5, 1.01] {
        let m = map_with_product(&problem, psi, 0.8, 1.99 * psi / 2.0);
        assert!((m.eta - 1.0 / 1.8).abs() < 1e-15);
        let r = certify_firm_nonexpansive(&m, CertifyMode::Spectral, 0, 0).unwrap();
        assert!(r.passed, "ψ = {psi}: {:?}", r.max_modulus);
        assert!(r.max_modulus.unwrap() <= 1.0 + 1e-8);
        assert_eq!(r.eigen.unwrap().eigenvalues.len(), 19);
    }
}

#[test]
fn zero_operator_spectra() {
    let p = 3;
    let q = 2;
    let ls = SaddleProblem::new(
        Arc::new(LinearMap::zeros(p, q)),
        ProxOracle::Zero,
        ProxOracle::LeastSquaresConjugate { b: vec![1.0; p] },
    )
    .unwrap();
    let sigma = 0.5;
    let m = build_map(&ls, 1.0, sigma, 1.7).unwrap();
    let rep = dense_eigenvalues(&m.dense_t(600).unwrap()).unwrap();
    let mut re: Vec<f64> = rep.eigenvalues.iter().map(|c| c.re).collect();
    re.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let eta = 1.0 / (1.0 + sigma);
    let want = [0.0, 0.0, eta, eta, eta, 1.0, 1.0];
    for (g, w) in re.iter().zip(&want) {
        assert!((g - w).abs() < 1e-12, "{re:?}");
    }

    let eq =
        SaddleProblem::equality_constrained(Arc::new(LinearMap::zeros(p, q)), vec![2.0; p], ProxOracle::Zero).unwrap();
    let m = build_map(&eq, 1.0, 3.0, 2.0).unwrap();
    let r = certify_firm_nonexpansive(&m, CertifyMode::Spectral, 0, 0).unwrap();
    for c in &r.eigen.as_ref().unwrap().eigenvalues {
        assert!(c.im.abs() < 1e-12 && (c.re.abs() - 1.0).abs() < 1e-12);
    }
    assert_eq!(r.max_modulus, Some(1.0));
}

#[test]
fn map_reproduces_unit_relaxation_sweep() {
    let (problem, _, _) = random_ls(3, 4, ProxOracle::l1(0.3).unwrap(), 34);
    let cfg = RelaxConfig::from_beta(&problem, 1.8, 2.0, 0.99, RhoSchedule::Constant(1.0)).unwrap();
    let m = build_map(&problem, cfg.tau, cfg.sigma, cfg.psi).unwrap();
    let mut rng = Stream::new(20);
    for _ in 0..20 {
        let xi: Vec<f64> = rng.normal_vec(m.order()).iter().map(|v| 3.0 * v).collect();
        let (z, x, y) = m.split(&xi);
        let mut s = IterateState::new(x.to_vec(), y.to_vec()).unwrap();
        s.z = z.to_vec();
        rgrpda_step(&problem, &cfg, &mut s).unwrap();
        let mut solver = s.z.clone();
        solver.extend(&s.x);
        solver.extend(&s.y);
        assert!(max_abs_diff(&solver, &m.apply(&xi).unwrap()) <= 1e-12);
    }
}

#[test]
fn fixed_points_are_saddle_points() {
    // g = 0 and full column rank: x* solves the normal equations, y* = Kx* − b
    let (problem, rows, b) = random_ls(8, 5, ProxOracle::Zero, 85);
    let ktk: Vec<Vec<f64>> = (0..5)
        .map(|i| (0..5).map(|j| (0..8).map(|r| rows[r][i] * rows[r][j]).sum()).collect())
        .collect();
    let ktb: Vec<f64> = (0..5).map(|i| (0..8).map(|r| rows[r][i] * b[r]).sum()).collect();
    let x = grpda_oracles::solve_dense(&ktk, &ktb).unwrap();
    let kx = problem.k().apply(&x).unwrap();
    let y: Vec<f64> = kx.iter().zip(&b).map(|(a, c)| a - c).collect();
    let mut xi = x.clone();
    xi.extend(&x);
    xi.extend(&y);
    for psi in [1.2, 2.0] {
        let m = map_with_product(&problem, psi, 1.5, 0.9 * psi);
        let g = m.apply(&xi).unwrap();
        let d: Vec<f64> = g.iter().zip(&xi).map(|(a, c)| a - c).collect();
        assert!(norm(&d) <= 1e-8, "{}", norm(&d));
    }
}

#[test]
fn spectral_certificate_is_permutation_invariant() {
    let (problem, _, _) = random_ls(4, 6, ProxOracle::Zero, 46);
    let m = map_with_product(&problem, 1.9, 2.0, 1.5);
    let r = m.reflected(600).unwrap();
    let n = r.order();
    let mut rng = Stream::new(9);
    let base = dense_eigenvalues(&r).unwrap().max_modulus;
    for _ in 0..5 {
        let perm = rng.choose(n, n);
        let mut pm = DenseSquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                pm.set(i, j, r.get(perm[i], perm[j]));
            }
        }
        assert!((dense_eigenvalues(&pm).unwrap().max_modulus - base).abs() <= 1e-8);
    }
}

#[test]
fn dense_cap_applies_to_spectral_mode_only() {
    let (problem, _, _) = random_ls(200, 500, ProxOracle::l1(0.1).unwrap(), 2500);
    let m = map_with_product(&problem, 2.0, 1.0, 1.99);
    assert_eq!(m.order(), 1200);
    assert!(m.dense_t(600).is_err());
    assert!(certify_firm_nonexpansive(&m, CertifyMode::Spectral, 0, 0).is_err());
    let r = certify_firm_nonexpansive(&m, CertifyMode::Sampling, 200, 1).unwrap();
    assert_eq!(r.sampling.unwrap().samples, 200);
}

#[test]
fn identical_pairs_have_zero_excess() {
    let (problem, _, _) = random_ls(4, 6, ProxOracle::l1(0.2).unwrap(), 7);
    let m = map_with_product(&problem, 2.0, 1.0, 1.9);
    let u = Stream::new(3).normal_vec(m.order());
    assert_eq!(averaged_excess(&m, &u, &u).unwrap(), 0.0);
}

/// The spectral radius of 2T − I is at most one but its Euclidean norm is not,
/// so the Euclidean inequalities are violated along the top singular direction.
#[test]
fn euclidean_inequalities_fail_when_reflection_norm_exceeds_one() {
    for (g, seed) in [(ProxOracle::Zero, 11u64), (ProxOracle::l1(0.1).unwrap(), 46)] {
        let (problem, _, _) = random_ls(4, 6, g, seed);
        let m = map_with_product(&problem, 2.0, 1.0, 1.99);
        let spectral = certify_firm_nonexpansive(&m, CertifyMode::Spectral, 0, 0).unwrap();
        assert!(spectral.passed);
        let reflection_norm = grpda_oracles::spectral_norm(&to_rows(&m.reflected(600).unwrap()));
        assert!(reflection_norm > 1.0 + 1e-6, "{reflection_norm}");

        let firm = certify_firm_nonexpansive(&m, CertifyMode::Sampling, DEFAULT_SAMPLES, 5).unwrap();
        let firm = firm.sampling.unwrap();
        assert!(firm.violations > 0 && firm.worst_excess > firm.tolerance);
        let avg = averagedness_check(&m, DEFAULT_SAMPLES, 5).unwrap();
        assert!(avg.violations > 0);
    }
}
