use gauss_distill::degauss::{two_copy_degauss, TwoCopyFilterSpec};
use gauss_distill::fock::{epsilon_from_rho, gaussian_fock_state};
use gauss_distill::gaussian::{
    cs_from_rt, epsilon_from_cs, gaussian_cp_map, purity, rt_from_cs, symmetric_gaussian_filter,
    ChannelParametrization, GaussianOperation,
};
use gauss_distill::gaussify::{gaussification_step, sigma_from_rho1};
use gauss_distill::FockArray;
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cs_roundtrip(r in 0.02f64..3.0, t in 0.02f64..1.0) {
        let st = cs_from_rt(r, t).unwrap();
        let ch = rt_from_cs(&st).unwrap();
        let back = cs_from_rt(ch.r(), ch.t()).unwrap();
        prop_assert!((back.c() - st.c()).abs() <= 1e-12 * st.c());
        prop_assert!((back.s() - st.s()).abs() <= 1e-12 * st.c());
    }

    #[test]
    fn epsilon_formula(r in 0.02f64..3.0, t in 0.02f64..1.0) {
        let eps = epsilon_from_cs(&cs_from_rt(r, t).unwrap()).unwrap();
        prop_assert!((eps - (1.0 - t) * r.tanh()).abs() < 1e-12);
    }

    #[test]
    fn purity_is_inverse_root_determinant(r in 0.0f64..2.5, t in 0.01f64..=1.0) {
        let st = cs_from_rt(r, t).unwrap();
        let det = st.covariance().matrix().determinant();
        prop_assert!((purity(&st) - det.sqrt().recip()).abs() < 1e-12);
        prop_assert!(purity(&st) <= 1.0 + 1e-12);
    }

    #[test]
    fn local_filter_keeps_epsilon(r in 0.05f64..3.0, t in 0.05f64..1.0, s in 0.01f64..3.0) {
        let st = cs_from_rt(r, t).unwrap();
        let out = symmetric_gaussian_filter(&st, s).unwrap();
        prop_assert!(out.covariance().is_admissible(1e-9));
        prop_assert!((epsilon_from_cs(&out).unwrap() - epsilon_from_cs(&st).unwrap()).abs() < 1e-10);
        prop_assert!(out.eof() <= st.eof() + 1e-12);
    }

    #[test]
    fn gaussian_maps_stay_physical(r in 0.0f64..2.0, t in 0.05f64..1.0, loss_t in 0.0f64..=1.0, s in 0.0f64..3.0) {
        let gamma = cs_from_rt(r, t).unwrap().covariance();
        let lossy = gaussian_cp_map(&GaussianOperation::local_pure_loss(loss_t, 8.0).unwrap(), &gamma).unwrap();
        prop_assert!(lossy.is_admissible(1e-8));
        let filtered = gaussian_cp_map(&GaussianOperation::local_two_mode_squeezer(s).unwrap(), &gamma).unwrap();
        prop_assert!(filtered.is_admissible(1e-8));
    }

    #[test]
    fn beam_splitter_is_unitary_and_involutory(re in prop::collection::vec(-1.0f64..1.0, 16), im in prop::collection::vec(-1.0f64..1.0, 16)) {
        let data: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        prop_assume!(data.iter().any(|z| z.norm() > 1e-3));
        // keep total photon number below the cutoff so nothing leaves the space
        let mut masked = data.clone();
        for (idx, z) in masked.iter_mut().enumerate() {
            if idx / 4 + idx % 4 > 3 {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        prop_assume!(masked.iter().any(|z| z.norm() > 1e-3));
        let psi = FockArray::pure(vec![4, 4], masked).unwrap().to_density().normalized().unwrap();
        let out = psi.beam_splitter(0, 1).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        prop_assert!((out.purity() - psi.purity()).abs() < 1e-12);
        let back = out.beam_splitter(0, 1).unwrap();
        let worst = back.data().iter().zip(psi.data()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn two_copy_squares_epsilon_and_keeps_symmetry(r in 0.2f64..1.2, t in 0.2f64..0.95, q in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0]) {
        let ch = ChannelParametrization::new(r, t).unwrap();
        let rho = gaussian_fock_state(&ch, 4).unwrap().normalized().unwrap();
        let out = two_copy_degauss(&rho, &rho, TwoCopyFilterSpec::new(q).unwrap(), 1e-30).unwrap();
        prop_assert!(out.rho.hermiticity_error() < 1e-12);
        // the raw filter is not trace non-increasing, so only the normalized state is a density matrix
        prop_assert!(out.rho.normalized().unwrap().validate_density(1e-12, 1e-12).is_ok());
        let eps = epsilon_from_rho(&out.rho).unwrap();
        prop_assert!((eps - ch.epsilon().powi(2)).abs() < 1e-12);

        let step = gaussification_step(&out.rho.normalized().unwrap(), 1e-30).unwrap();
        prop_assert!(step.weight > 0.0 && step.weight <= 1.0 + 1e-12);
        prop_assert!(sigma_from_rho1(&step.rho, 1e-8).is_ok());
    }
}
