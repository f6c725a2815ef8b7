//! Invariants over random instances, driven by proptest-chosen seeds.

mod common;

use proptest::prelude::*;
use uqrel::processes::{compose_measurement_after_channel, induced_channel, induced_povm, joint_measurement};
use uqrel::sampling::{random_channel, random_density, random_instrument, random_observable, random_povm, rng_from_seed};
use uqrel::systems::{inner_q, seminorm_q};
use uqrel::transport::{pullback_channel, pushforward_channel, pushforward_measurement};
use uqrel::uncertainty::{
    bound_terms_joint, check_relation_error_disturbance, check_relation_errors, disturbance, error, semi_inner_product,
};
use uqrel::{Channel, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pushforward_and_pullback_are_adjoint(seed: u64, d in 2usize..=3) {
        let mut rng = rng_from_seed(seed);
        let rho = random_density(d, &mut rng);
        let a = random_observable(d, &mut rng);
        let c = random_observable(d, &mut rng);
        let t: Channel = random_channel(d, d, 2, &mut rng).unwrap().into();
        let out = t.apply(&rho, &tol()).unwrap();
        let pf = pushforward_channel(&t, &rho, &a, &tol()).unwrap();
        let pb = pullback_channel(&t, &rho, &c, &tol()).unwrap();
        let lhs = inner_q(pf.representative(), &c, &out).unwrap();
        let rhs = inner_q(&a, pb.representative(), &rho).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn errors_lie_between_zero_and_the_seminorm(seed: u64, d in 2usize..=4, n in 1usize..=4) {
        let mut rng = rng_from_seed(seed);
        let rho = random_density(d, &mut rng);
        let a = random_observable(d, &mut rng);
        let m = random_povm(d, n, &mut rng).unwrap();
        let eps = error(&a, &m, &rho, &tol()).unwrap();
        prop_assert!(eps >= 0.0);
        prop_assert!(eps <= seminorm_q(&a, &rho).unwrap() + 1e-12);
        prop_assert!((eps * eps - common::error_sq(&a, &m, &rho)).abs() < 1e-9);
    }

    #[test]
    fn disturbance_matches_the_supremum_oracle(seed: u64, d in 2usize..=3, k in 1usize..=3) {
        let mut rng = rng_from_seed(seed);
        let rho = random_density(d, &mut rng);
        let b = random_observable(d, &mut rng);
        let kc = random_channel(d, d, k, &mut rng).unwrap();
        let eta = disturbance(&b, &kc.clone().into(), &rho, &tol()).unwrap();
        prop_assert!((eta * eta - common::disturbance_sq(kc.kraus(), &rho, &b)).abs() < 1e-9);
    }

    #[test]
    fn post_processing_never_reduces_error(seed: u64, d in 2usize..=3) {
        let mut rng = rng_from_seed(seed);
        let rho = random_density(d, &mut rng);
        let a = random_observable(d, &mut rng);
        let t: Channel = random_channel(d, d, 2, &mut rng).unwrap().into();
        let l = random_povm(d, 3, &mut rng).unwrap();
        let before = disturbance(&a, &t, &rho, &tol()).unwrap();
        let after = error(&a, &compose_measurement_after_channel(&l, &t).unwrap(), &rho, &tol()).unwrap();
        prop_assert!(after >= before - 1e-9);
    }

    #[test]
    fn relations_hold(seed: u64, d in 2usize..=3, outcomes in 1usize..=3, kraus in 1usize..=2) {
        let mut rng = rng_from_seed(seed);
        let rho = random_density(d, &mut rng);
        let a = random_observable(d, &mut rng);
        let b = random_observable(d, &mut rng);
        let ins = random_instrument(d, d, outcomes, kraus, &mut rng).unwrap();
        let l = random_povm(d, 2, &mut rng).unwrap();
        let joint = check_relation_errors(&a, &b, &ins, &l, &rho, &tol()).unwrap();
        prop_assert!(joint.satisfied_full, "{joint:?}");
        let ed = check_relation_error_disturbance(&a, &b, &ins, &rho, &tol()).unwrap();
        prop_assert!(ed.satisfied_simple, "{ed:?}");
        // The disturbance bounds the second error from below.
        prop_assert!(joint.eps_or_eta_b >= ed.eps_or_eta_b - 1e-9);
    }

    #[test]
    fn semi_inner_product_is_cauchy_schwarz(seed: u64, d in 2usize..=3) {
        let mut rng = rng_from_seed(seed);
        let rho = random_density(d, &mut rng);
        let a = random_observable(d, &mut rng);
        let b = random_observable(d, &mut rng);
        let ins = random_instrument(d, d, 2, 2, &mut rng).unwrap();
        let l = random_povm(d, 3, &mut rng).unwrap();
        let m = induced_povm(&ins);
        let n = compose_measurement_after_channel(&l, &induced_channel(&ins).into()).unwrap();
        let j = joint_measurement(&ins, &l).unwrap();
        let s = semi_inner_product(&a, &b, &m, &n, &j, &rho, &tol()).unwrap();
        let bounds = bound_terms_joint(&a, &b, &m, &n, &j, &rho, &tol()).unwrap();
        prop_assert!((s.value.re - bounds.r).abs() < 1e-9 && (s.value.im - bounds.i).abs() < 1e-9);
        prop_assert!(s.value.norm() <= s.norm_first * s.norm_second + 1e-9);
        prop_assert!((s.norm_first - error(&a, &m, &rho, &tol()).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn measurement_pushforward_is_a_weak_value(seed: u64, d in 2usize..=3, n in 2usize..=4) {
        let mut rng = rng_from_seed(seed);
        let rho = random_density(d, &mut rng);
        let a = random_observable(d, &mut rng);
        let m = random_povm(d, n, &mut rng).unwrap();
        let pf = pushforward_measurement(&m, &rho, &a, &tol()).unwrap();
        for (e, v) in m.effects().iter().zip(pf.values().values()) {
            let p = common::tr(&(e.matrix() * rho.matrix())).re;
            let weak = common::re3(e.matrix(), a.matrix(), rho.matrix()) / p;
            prop_assert!((v - weak).abs() < 1e-9 * weak.abs().max(1.0));
        }
    }
}
