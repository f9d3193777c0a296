use grpda_core::linalg::{dist_sq, dot};
use grpda_core::prox::{check_prox_variational, conjugate_prox_coefficients, moreau_prox, project_simplex, ProxOracle};
use grpda_core::rng::Stream;
use proptest::prelude::*;

fn oracles(dim: usize, rng: &mut Stream) -> Vec<ProxOracle> {
    vec![
        ProxOracle::l1(0.7).unwrap(),
        ProxOracle::NonNeg,
        ProxOracle::Simplex,
        ProxOracle::LeastSquaresConjugate { b: rng.normal_vec(dim) },
        ProxOracle::EqualityConjugate { b: rng.normal_vec(dim) },
        ProxOracle::Zero,
    ]
}

#[test]
fn simplex_projection_matches_enumeration() {
    let mut rng = Stream::new(100);
    for _ in 0..1000 {
        let v: Vec<f64> = (0..10).map(|_| 2.0 * rng.normal()).collect();
        let fast = project_simplex(&v);
        let slow = grpda_oracles::simplex_projection(&v);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-10, "{fast:?} vs {slow:?}");
        }
    }
}

#[test]
fn moreau_identity_for_every_kind() {
    let mut rng = Stream::new(7);
    let dim = 6;
    for oracle in oracles(dim, &mut rng) {
        for _ in 0..1000 {
            let u: Vec<f64> = rng.normal_vec(dim).iter().map(|v| 3.0 * v).collect();
            let sigma = rng.uniform_in(0.1, 10.0);
            let direct = oracle.prox(sigma, &u).unwrap();
            let via = moreau_prox(&oracle, sigma, &u).unwrap();
            let scale = 1.0 + u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in direct.iter().zip(&via) {
                assert!((a - b).abs() <= 1e-12 * scale, "{}: {a} vs {b}", oracle.name());
            }
        }
    }
}

#[test]
fn prox_variational_inequality_for_every_kind() {
    let mut rng = Stream::new(21);
    let dim = 5;
    for oracle in oracles(dim, &mut rng) {
        for _ in 0..100 {
            let v: Vec<f64> = rng.normal_vec(dim).iter().map(|x| 2.0 * x).collect();
            let step = rng.uniform_in(0.05, 5.0);
            let mut candidates: Vec<Vec<f64>> = (0..100).map(|_| rng.normal_vec(dim)).collect();
            for c in &mut candidates {
                oracle.project_domain(c);
            }
            assert!(
                check_prox_variational(&oracle, step, &v, &candidates).unwrap(),
                "{}",
                oracle.name()
            );
        }
    }
}

#[test]
fn affine_coefficients_on_grid() {
    let b = vec![1.0, -2.0, 0.5];
    for k in 0..=40 {
        let sigma = 10f64.powf(-2.0 + 0.1 * k as f64);
        let ls = conjugate_prox_coefficients(&ProxOracle::LeastSquaresConjugate { b: b.clone() }, sigma).unwrap();
        assert!((ls.eta - 1.0 / (1.0 + sigma)).abs() < 1e-15);
        assert!((ls.varrho + sigma / (1.0 + sigma)).abs() < 1e-15);
        let eq = conjugate_prox_coefficients(&ProxOracle::EqualityConjugate { b: b.clone() }, sigma).unwrap();
        assert_eq!((eq.eta, eq.varrho), (1.0, -sigma));
        let u = [0.3, 4.0, -1.0];
        for (oracle, c) in [
            (ProxOracle::LeastSquaresConjugate { b: b.clone() }, ls),
            (ProxOracle::EqualityConjugate { b: b.clone() }, eq),
        ] {
            let p = oracle.prox(sigma, &u).unwrap();
            for i in 0..3 {
                assert!((p[i] - (c.eta * u[i] + c.varrho * b[i])).abs() < 1e-13);
            }
        }
    }
    assert!(conjugate_prox_coefficients(&ProxOracle::NonNeg, 1.0).is_err());
}

fn kind() -> impl Strategy<Value = ProxOracle> {
    prop_oneof![
        (0.01f64..5.0).prop_map(|mu| ProxOracle::L1 { mu }),
        Just(ProxOracle::NonNeg),
        Just(ProxOracle::Simplex),
        prop::collection::vec(-3.0f64..3.0, 4).prop_map(|b| ProxOracle::LeastSquaresConjugate { b }),
        prop::collection::vec(-3.0f64..3.0, 4).prop_map(|b| ProxOracle::EqualityConjugate { b }),
        Just(ProxOracle::Zero),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn prox_is_firmly_nonexpansive(
        oracle in kind(),
        step in 0.01f64..10.0,
        u in prop::collection::vec(-10.0f64..10.0, 4),
        v in prop::collection::vec(-10.0f64..10.0, 4),
    ) {
        let pu = oracle.prox(step, &u).unwrap();
        let pv = oracle.prox(step, &v).unwrap();
        let d: Vec<f64> = pu.iter().zip(&pv).map(|(a, b)| a - b).collect();
        let e: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
        prop_assert!(dot(&d, &d) <= dot(&d, &e) + 1e-10);
        prop_assert!(dist_sq(&pu, &pv) <= dist_sq(&u, &v) + 1e-10);
    }

    #[test]
    fn simplex_projection_lands_on_simplex(v in prop::collection::vec(-50.0f64..50.0, 1..30)) {
        let p = project_simplex(&v);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
