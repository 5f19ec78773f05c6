use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rfdress_core::constants::field_for_larmor;
use rfdress_core::dressed::{one_period_propagator, FloquetOptions};
use rfdress_core::linalg::{hermiticity_defect, symmetry_defect, unitarity_defect};
use rfdress_core::loss::angular::{gaunt, spherical_harmonic};
use rfdress_core::loss::{build_channel_hamiltonian, ChannelBasis, TwoAtomSystem};
use rfdress_core::quadrature::gauss_legendre;
use rfdress_core::ramp::{propagate_ramp, RampProfile, RampShape, SpinState};
use rfdress_core::units::{a0_to_m, khz_to_angular};
use rfdress_core::{FieldConfig, SpinSystem};

fn field(rf_khz: f64, larmor_khz: f64, b_par_frac: f64, ratio: f64) -> FieldConfig {
    let w = khz_to_angular(rf_khz);
    let b_perp = field_for_larmor(khz_to_angular(larmor_khz), 2.0);
    FieldConfig::new(b_par_frac * b_perp, b_perp, w, ratio * w, 0.0).unwrap()
}

fn sphere_integral<F: Fn(f64, f64) -> Complex64>(n: usize, f: F) -> Complex64 {
    let (x, w) = gauss_legendre(n);
    let nphi = 2 * n;
    let dphi = 2.0 * PI / nphi as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(&w) {
        let theta = xi.acos();
        for j in 0..nphi {
            acc += f(theta, j as f64 * dphi) * (wi * dphi);
        }
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn one_period_propagator_is_unitary(
        two_j in 1u32..=6,
        ratio in 0.0f64..4.0,
        larmor in 10.0f64..150.0,
        b_par_frac in 0.0f64..0.5,
    ) {
        let spin = SpinSystem::new(two_j as f64 / 2.0, 2.0, 1e-25).unwrap();
        let f = field(300.0, larmor, b_par_frac, ratio);
        let u = one_period_propagator(&spin, &f, &FloquetOptions::default()).unwrap();
        prop_assert!(unitarity_defect(&u) < 1e-9, "defect {}", unitarity_defect(&u));
    }

    #[test]
    fn ramp_preserves_population(
        ratio in 0.0f64..3.5,
        periods in 5.0f64..40.0,
        b_par_frac in 0.0f64..0.3,
        m_index in 0usize..7,
        smooth in any::<bool>(),
    ) {
        let spin = SpinSystem::chromium52();
        let f = field(300.0, 85.0, b_par_frac, 0.0);
        let t = periods * f.rf_period();
        let shape = if smooth { RampShape::Smoothstep } else { RampShape::Linear };
        let ramp = RampProfile::new(t, 0.5 * t, t, ratio * f.rf_omega, shape).unwrap();
        let psi0 = SpinState::bare(&spin, &f, m_index as f64 - 3.0).unwrap();
        let psi = propagate_ramp(&spin, &psi0, &ramp, &f, 1e-12).unwrap();
        let total: f64 = psi.static_populations(&spin, &f).iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "sum {total}");
        prop_assert!((psi.norm() - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_atom_hamiltonian_is_symmetric(
        r_a0 in 200.0f64..1e5,
        ratio in 0.0f64..4.0,
        larmor in 20.0f64..200.0,
        scale in 0.1f64..10.0,
    ) {
        let f = field(500.0, larmor, 0.0, ratio);
        let sys = TwoAtomSystem::chromium_pair().with_dipolar_scale(scale);
        let basis = ChannelBasis::triplet(4).unwrap();
        let h = build_channel_hamiltonian(a0_to_m(r_a0), &f, &sys, &basis).unwrap();
        let size = h.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        prop_assert!(symmetry_defect(&h) <= 1e-13 * size);
    }

    #[test]
    fn spin_hamiltonian_is_hermitian(
        two_j in 1u32..=8,
        bx in -1.0f64..1.0,
        bz in -1.0f64..1.0,
        drive in -3.0f64..3.0,
    ) {
        let ops = SpinSystem::new(two_j as f64 / 2.0, 2.0, 1e-25).unwrap().operators();
        let c = |x: f64| Complex64::new(x, 0.0);
        let h: DMatrix<Complex64> = &ops.jx * c(bx) + &ops.jz * c(bz + drive) + &ops.jy * c(0.3 * bx);
        let size = h.iter().fold(0.0f64, |a, z| a.max(z.norm())).max(1e-300);
        prop_assert!(hermiticity_defect(&h) <= 1e-13 * size);
    }

    #[test]
    fn gaunt_matches_quadrature(
        lp in 0i64..=4,
        l in 0i64..=4,
        k in 0i64..=4,
        mp_u in 0u32..9,
        q_u in 0u32..9,
    ) {
        let mp = (mp_u as i64 % (2 * lp + 1)) - lp;
        let q = (q_u as i64 % (2 * k + 1)) - k;
        let m = mp - q;
        let g = gaunt(lp, mp, k, q, l, m);
        let quad = sphere_integral(12, |t, p| {
            spherical_harmonic(lp, mp, t, p).conj()
                * spherical_harmonic(k, q, t, p)
                * spherical_harmonic(l, m, t, p)
        });
        prop_assert!(quad.im.abs() < 1e-12);
        if g == 0.0 {
            prop_assert!(quad.re.abs() < 1e-12);
        } else {
            prop_assert!((quad.re - g).abs() <= 1e-8 * g.abs(), "{g} vs {}", quad.re);
        }
    }
}
