use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use proptest::prelude::*;

use qse_core::channels::{
    apply_kraus, completeness_defect, dephasing_fidelity, dephasing_kraus, dephasing_rho, depolarizing_fidelity,
    depolarizing_kraus, depolarizing_rho, noiseless_state,
};
use qse_core::qcore::{check_density, expm_pauli, hermitian_eigenvalues, pauli_combination, unitarity_defect, Mat3, I};
use qse_core::schedule::{solve_target, TargetSpec};
use qse_core::stirap::stirap_fidelity_ket1;
use qse_core::synth::{evolution_operator_2, evolution_operator_2_at, synthesize_2, synthesize_2_planar};
use qse_core::table::format_number;
use qse_core::{Curve, Ket, NoiseModel, Schedule, C64};

fn noise() -> impl Strategy<Value = NoiseModel> {
    (0.0..10.0f64, prop::option::of(0.01..20.0f64), -3.0..3.0f64).prop_map(|(g, memory, bias)| {
        let m = match memory {
            None => NoiseModel::white(g).unwrap(),
            Some(rate) => NoiseModel::ornstein_uhlenbeck(g, rate).unwrap(),
        };
        m.with_bias(bias).unwrap()
    })
}

fn unbiased_noise() -> impl Strategy<Value = NoiseModel> {
    noise().prop_map(|m| m.with_bias(0.0).unwrap())
}

fn curve_from(start: impl Strategy<Value = f64>) -> impl Strategy<Value = Curve> {
    (0..4u8, start, -PI..PI).prop_map(|(kind, start, end)| match kind {
        0 => Curve::Constant(start),
        1 => Curve::Linear { start, end },
        2 => Curve::Smoothstep { start, end },
        _ => Curve::SineSquared { start, end },
    })
}

fn planar() -> impl Strategy<Value = (Schedule, f64)> {
    let theta = curve_from(prop_oneof![Just(0.0), Just(PI), Just(-PI)]);
    (0.1..10.0f64, theta, curve_from(-PI..PI), 0.0..=1.0f64)
        .prop_map(|(duration, theta, alpha, frac)| (Schedule::planar(duration, theta, alpha).unwrap(), frac * duration))
}

proptest! {
    #[test]
    fn pauli_exponential_is_unitary_and_matches_series(x in -5.0..5.0f64, y in -5.0..5.0f64, z in -5.0..5.0f64, dt in 0.0..2.0f64) {
        let u = expm_pauli(x, y, z, dt);
        prop_assert!(unitarity_defect(&u) < 1e-14);
        let series = pauli_combination(x, y, z).scale(-I * dt).expm();
        prop_assert!(u.max_abs_diff(&series) < 1e-12);
    }

    #[test]
    fn planar_synthesis_agrees_with_general((s, t) in planar()) {
        let p = s.point(t);
        let general = synthesize_2(&p);
        prop_assert!(general.max_abs_diff(&synthesize_2_planar(&p)) < 1e-12);
        prop_assert!(unitarity_defect(&evolution_operator_2(&p)) < 1e-13);
    }

    #[test]
    fn target_schedule_reaches_target(size in 0.0..=1.0f64, mu_phase in -PI..PI, nu_phase in -PI..PI, duration in 0.1..10.0f64) {
        let mu = C64::from_polar(size, mu_phase);
        let nu = C64::from_polar((1.0 - size * size).sqrt(), nu_phase);
        let spec = TargetSpec::new(mu, nu).unwrap();
        let s = solve_target(&spec, duration).unwrap();
        let reached = evolution_operator_2_at(&s, duration).unwrap().apply(&Ket::level(0));
        prop_assert!(reached.same_ray(&spec.ket(), 1e-12), "{reached:?} vs {:?}", spec.ket());
    }

    #[test]
    fn kraus_sets_are_complete_and_reproduce_channels((s, t) in planar(), m in noise(), u in unbiased_noise()) {
        let rho0 = noiseless_state(&s, t).unwrap().projector();
        let deph = dephasing_kraus(&m, t);
        prop_assert!(completeness_defect(&deph) < 1e-12);
        prop_assert!(apply_kraus(&deph, &rho0).max_abs_diff(dephasing_rho(&s, &m, t).unwrap().matrix()) < 1e-12);
        let depol = depolarizing_kraus(&u, t).unwrap();
        prop_assert!(completeness_defect(&depol) < 1e-12);
        prop_assert!(apply_kraus(&depol, &rho0).max_abs_diff(depolarizing_rho(&s, &u, t).unwrap().matrix()) < 1e-12);
    }

    #[test]
    fn channel_outputs_are_states((s, t) in planar(), m in noise()) {
        prop_assert!(check_density(dephasing_rho(&s, &m, t).unwrap().matrix(), 1e-12));
        prop_assert!(check_density(depolarizing_rho(&s, &m, t).unwrap().matrix(), 1e-12));
    }

    #[test]
    fn fidelities_are_bounded_and_decay(theta in -PI..PI, m in noise(), t in 0.0..10.0f64, dt in 0.0..5.0f64) {
        prop_assert!((0.0..=1.0 + 1e-15).contains(&dephasing_fidelity(theta, &m, t)));
        // A bias rotates the state back and forth; only the unbiased fidelity is monotone.
        let u = m.with_bias(0.0).unwrap();
        let f = dephasing_fidelity(theta, &u, t);
        prop_assert!(dephasing_fidelity(theta, &u, t + dt) <= f + 1e-15);
        let d = depolarizing_fidelity(&u, t);
        prop_assert!(d >= FRAC_1_SQRT_2 - 1e-15 && d <= 1.0 + 1e-15);
        prop_assert!(depolarizing_fidelity(&u, t + dt) <= d + 1e-15);
    }

    #[test]
    fn dephasing_fidelity_is_symmetric_about_quarter_turn(d in 0.0..FRAC_PI_4, m in noise(), t in 0.0..10.0f64) {
        let gap = dephasing_fidelity(FRAC_PI_4 + d, &m, t) - dephasing_fidelity(FRAC_PI_4 - d, &m, t);
        prop_assert!(gap.abs() < 1e-12);
    }

    #[test]
    fn inversion_fidelity_is_bounded_and_even(alpha in -PI..PI, m in unbiased_noise(), t in 0.0..10.0f64) {
        let f = stirap_fidelity_ket1(alpha, &m, t).unwrap();
        prop_assert!((0.0..=1.0 + 1e-15).contains(&f));
        prop_assert_eq!(f, stirap_fidelity_ket1(-alpha, &m, t).unwrap());
    }

    #[test]
    fn mixtures_of_pure_states_are_densities(w in prop::collection::vec(0.0..1.0f64, 1..5), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let total: f64 = w.iter().sum();
        prop_assume!(total > 1e-3);
        let mut rho = Mat3::zeros();
        for wi in &w {
            let psi = Ket([0; 3].map(|_: i32| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))));
            prop_assume!(psi.norm_sqr() > 1e-6);
            rho = rho + psi.normalized().unwrap().projector().scale_re(wi / total);
        }
        prop_assert!(check_density(&rho, 1e-12));
        let eig = hermitian_eigenvalues(&rho);
        prop_assert!((eig.iter().sum::<f64>() - rho.trace().re).abs() < 1e-12);
    }

    #[test]
    fn csv_numbers_round_trip(v in prop::num::f64::NORMAL | prop::num::f64::ZERO) {
        let text = format_number(v);
        let back: f64 = text.parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-12 * v.abs(), "{v} -> {text}");
    }
}
