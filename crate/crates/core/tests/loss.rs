use std::f64::consts::PI;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rfdress_core::constants::{field_for_larmor, CODATA};
use rfdress_core::loss::angular::spherical_harmonic;
use rfdress_core::loss::hamiltonian::{angular_factor, find_dressed};
use rfdress_core::loss::*;
use rfdress_core::quadrature::gauss_legendre;
use rfdress_core::units::khz_to_angular;
use rfdress_core::FieldConfig;

fn field(ratio: f64) -> FieldConfig {
    let w = khz_to_angular(500.0);
    FieldConfig::new(
        0.0,
        field_for_larmor(khz_to_angular(85.0), 2.0),
        w,
        ratio * w,
        0.0,
    )
    .unwrap()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Spin-1/2 components (x, y, z) on both atoms of the 4-dim product space.
fn pair_spins() -> ([Matrix4<Complex64>; 3], [Matrix4<Complex64>; 3]) {
    let i = Complex64::i();
    let sx = [[c(0.0), c(0.5)], [c(0.5), c(0.0)]];
    let sy = [[c(0.0), -0.5 * i], [0.5 * i, c(0.0)]];
    let sz = [[c(0.5), c(0.0)], [c(0.0), c(-0.5)]];
    let id = [[c(1.0), c(0.0)], [c(0.0), c(1.0)]];
    let kron = |a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]| {
        Matrix4::from_fn(|r, col| a[r / 2][col / 2] * b[r % 2][col % 2])
    };
    (
        [kron(sx, id), kron(sy, id), kron(sz, id)],
        [kron(id, sx), kron(id, sy), kron(id, sz)],
    )
}

fn triplet(m: i64) -> [Complex64; 4] {
    let r = 1.0 / 2f64.sqrt();
    match m {
        1 => [c(1.0), c(0.0), c(0.0), c(0.0)],
        0 => [c(0.0), c(r), c(r), c(0.0)],
        _ => [c(0.0), c(0.0), c(0.0), c(1.0)],
    }
}

/// `<a| S1.S2 - 3 (S1.r)(S2.r) |b>` by direct quadrature over the sphere
/// with Cartesian spin operators.
fn brute_force_angular(a: &Channel, b: &Channel) -> Complex64 {
    let (s1, s2) = pair_spins();
    let (x, w) = gauss_legendre(10);
    let nphi = 20;
    let dphi = 2.0 * PI / nphi as f64;
    let (ta, tb) = (triplet(a.m_s), triplet(b.m_s));
    let mut acc = c(0.0);
    for (xi, wi) in x.iter().zip(&w) {
        let theta = xi.acos();
        for k in 0..nphi {
            let phi = k as f64 * dphi;
            let n = [
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ];
            let dot = s1[0] * s2[0] + s1[1] * s2[1] + s1[2] * s2[2];
            let s1n = s1[0] * c(n[0]) + s1[1] * c(n[1]) + s1[2] * c(n[2]);
            let s2n = s2[0] * c(n[0]) + s2[1] * c(n[1]) + s2[2] * c(n[2]);
            let op = dot - s1n * s2n * c(3.0);
            let mut spin = c(0.0);
            for r in 0..4 {
                for col in 0..4 {
                    spin += ta[r].conj() * op[(r, col)] * tb[col];
                }
            }
            let ang = spherical_harmonic(a.l, a.m_l, theta, phi).conj()
                * spherical_harmonic(b.l, b.m_l, theta, phi);
            acc += spin * ang * (wi * dphi);
        }
    }
    acc
}

#[test]
fn dipolar_angular_factor_matches_cartesian_quadrature() {
    let mut channels = Vec::new();
    for m_s in -1..=1 {
        for l in [0, 2] {
            for m_l in -l..=l {
                channels.push(Channel::new(1, m_s, l, m_l, 0).unwrap());
            }
        }
    }
    let mut nonzero = 0;
    for a in &channels {
        for b in &channels {
            let brute = brute_force_angular(a, b);
            let fast = angular_factor(a, b);
            assert!(brute.im.abs() < 1e-12, "{a} {b}");
            assert!(
                (brute.re - fast).abs() <= 1e-8 * fast.abs().max(1e-4),
                "{a} {b}: {fast} vs {}",
                brute.re
            );
            if fast.abs() > 1e-8 {
                nonzero += 1;
                assert_eq!(a.projection(), b.projection());
            }
        }
    }
    assert!(nonzero > 20);
}

#[test]
fn dipolar_element_examples() {
    let r = 912.0 * CODATA.a0;
    let e = Channel::entrance(0);
    assert_eq!(dipole_dipole_element(&e, &e, r, 2.0).unwrap(), 0.0);
    // both s-waves with different m_S: still zero, the rank-2 orbital part needs l' = 2
    let s0 = Channel::new(1, 0, 0, 0, 0).unwrap();
    assert_eq!(dipole_dipole_element(&e, &s0, r, 2.0).unwrap(), 0.0);
    let d = Channel::new(1, 0, 2, -1, 0).unwrap();
    let hz = dipole_dipole_element(&e, &d, r, 2.0).unwrap().abs() / CODATA.h;
    assert!((100.0..1000.0).contains(&hz), "{hz}");
    // scales as R^-3 and (gJ)^2
    let far = dipole_dipole_element(&e, &d, 2.0 * r, 2.0).unwrap().abs() / CODATA.h;
    assert!((far * 8.0 / hz - 1.0).abs() < 1e-12);
    let g1 = dipole_dipole_element(&e, &d, r, 1.0).unwrap().abs() / CODATA.h;
    assert!((g1 * 4.0 / hz - 1.0).abs() < 1e-12);
    assert!(dipole_dipole_element(&e, &d, 0.0, 2.0).is_err());
}

#[test]
fn eigenvalues_reach_asymptotes_far_out() {
    let f = field(1.3);
    let sys = TwoAtomSystem::chromium_pair();
    let n_max = default_n_max(f.ratio());
    let basis = ChannelBasis::triplet(n_max).unwrap();
    let r = 1e5 * CODATA.a0;
    let (vals, _) = ChannelHamiltonian::new(&f, &sys, &basis).unwrap().eigen(r);
    let mut asym: Vec<f64> = Vec::new();
    for d in dressed_states(&f, &sys, n_max).unwrap() {
        for l in [0i64, 2] {
            for m_l in -l..=l {
                if d.embed(l, m_l, &basis).is_some() {
                    asym.push(d.energy + sys.centrifugal(l, r));
                }
            }
        }
    }
    asym.sort_by(f64::total_cmp);
    assert_eq!(asym.len(), vals.len());
    let hw = CODATA.hbar * f.rf_omega;
    let worst = vals
        .iter()
        .zip(&asym)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6 * hw, "{}", worst / hw);
}

#[test]
fn uncoupled_curves_are_shifted_asymptotes() {
    let f = field(0.8);
    let sys = TwoAtomSystem::chromium_pair().with_dipolar_scale(0.0);
    let basis = ChannelBasis::triplet(8).unwrap();
    let grid: Vec<f64> = rfdress_core::sweep::linspace(3000.0, 400.0, 60)
        .iter()
        .map(|r| r * CODATA.a0)
        .collect();
    let curves = adiabatic_potentials(&grid, &f, &sys, &basis).unwrap();
    let hw = CODATA.hbar * f.rf_omega;
    for (k, label) in curves.labels.iter().enumerate() {
        let base = curves.energies[k][0] - sys.centrifugal(label.l, grid[0]);
        for (i, r) in grid.iter().enumerate() {
            let shifted = curves.energies[k][i] - sys.centrifugal(label.l, *r);
            assert!((shifted - base).abs() < 1e-9 * hw, "curve {k} at {i}");
        }
    }
    // uncoupled curves cross freely: the entrance meets the d-wave exit
    let entrance = curves
        .find(CurveLabel {
            manifold: 0,
            rank: 0,
            l: 0,
            m_l: 0,
        })
        .unwrap();
    let exit = curves
        .find(CurveLabel {
            manifold: -1,
            rank: 2,
            l: 2,
            m_l: -1,
        })
        .unwrap();
    let diff: Vec<f64> = (0..grid.len())
        .map(|i| curves.energies[entrance][i] - curves.energies[exit][i])
        .collect();
    assert!(diff[0] > 0.0 && *diff.last().unwrap() < 0.0);
}

#[test]
fn entrance_curve_is_flat_far_out() {
    let f = field(1.0);
    let sys = TwoAtomSystem::chromium_pair();
    let basis = ChannelBasis::triplet(8).unwrap();
    let grid: Vec<f64> = rfdress_core::sweep::logspace(1e5, 3000.0, 30)
        .iter()
        .map(|r| r * CODATA.a0)
        .collect();
    let curves = adiabatic_potentials(&grid, &f, &sys, &basis).unwrap();
    let k = curves
        .find(CurveLabel {
            manifold: 0,
            rank: 0,
            l: 0,
            m_l: 0,
        })
        .unwrap();
    let e = &curves.energies[k];
    let spread = e.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - e.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    assert!(
        spread < 1e-6 * CODATA.hbar * f.rf_omega,
        "{}",
        spread / CODATA.h
    );
}

#[test]
fn resolved_avoided_crossing_is_followed_adiabatically() {
    let f = field(1.0);
    let sys = TwoAtomSystem::chromium_pair();
    let settings = GapSettings::default();
    let est = crossing_gap(&f, &sys, &settings).unwrap();
    let basis = ChannelBasis::triplet(settings.n_max_for(&f)).unwrap();
    let rx = est.r_diabatic;
    let grid = rfdress_core::sweep::linspace(rx + 1.0 * CODATA.a0, rx - 1.0 * CODATA.a0, 201);
    let curves = adiabatic_potentials(&grid, &f, &sys, &basis).unwrap();
    assert!(curves.ambiguous.is_empty(), "{:?}", curves.ambiguous);
    let k = curves
        .find(CurveLabel {
            manifold: 0,
            rank: 0,
            l: 0,
            m_l: 0,
        })
        .unwrap();
    let problem = CrossingProblem::new(&f, &sys, &settings).unwrap();
    let n = grid.len();
    let end = curves.energies[k][n - 1];
    let ham = problem.hamiltonian.at(grid[n - 1]);
    let in_diag = (problem.entrance.transpose() * &ham * &problem.entrance)[(0, 0)];
    let out_diag = (problem.exit.transpose() * &ham * &problem.exit)[(0, 0)];
    // past the crossing the curve that came in as the entrance has exit character
    assert!((end - out_diag).abs() < (end - in_diag).abs());
    // its closest approach to the exit multiplet reproduces the gap search
    let closest = [-1i64, 1]
        .iter()
        .filter_map(|&m_l| {
            curves.find(CurveLabel {
                manifold: -1,
                rank: 2,
                l: 2,
                m_l,
            })
        })
        .map(|j| {
            (0..n)
                .map(|i| (curves.energies[j][i] - curves.energies[k][i]).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    assert!(
        (closest / est.gap - 1.0).abs() < 0.05,
        "{} vs {}",
        closest / CODATA.h,
        est.gap / CODATA.h
    );
}

#[test]
fn gap_grows_with_rf_power_and_matches_two_level_formula() {
    let sys = TwoAtomSystem::chromium_pair();
    let settings = GapSettings::default();
    let gaps: Vec<f64> = [0.25, 0.75, 1.5]
        .iter()
        .map(|&x| {
            let e = crossing_gap(&field(x), &sys, &settings).unwrap();
            assert!((e.two_level_gap / e.gap - 1.0).abs() < 0.05);
            e.gap
        })
        .collect();
    assert!(gaps[0] < gaps[1] && gaps[1] < gaps[2]);
    let vd = dipolar_energy(
        crossing_radius(field(1.0).rf_omega, 2, sys.reduced_mass).unwrap(),
        2.0,
    );
    assert!(gaps[2] < vd);
}

#[test]
fn gap_is_proportional_to_dipolar_prefactor() {
    let settings = GapSettings::default();
    let base = TwoAtomSystem::chromium_pair();
    let g1 = crossing_gap(&field(1.0), &base, &settings).unwrap().gap;
    let g2 = crossing_gap(&field(1.0), &base.with_dipolar_scale(2.0), &settings)
        .unwrap()
        .gap;
    assert!((g2 / g1 - 2.0).abs() < 0.02, "{}", g2 / g1);
}

#[test]
fn gap_converges_in_floquet_truncation() {
    let f = field(1.5);
    let sys = TwoAtomSystem::chromium_pair();
    let mut settings = GapSettings::default();
    let g = crossing_gap(&f, &sys, &settings).unwrap().gap;
    settings.n_max = Some(settings.n_max_for(&f) + 2);
    let g2 = crossing_gap(&f, &sys, &settings).unwrap().gap;
    assert!((g2 / g - 1.0).abs() < 0.01);
}

#[test]
fn same_spin_exit_closes_near_twice_the_first_bessel_peak() {
    // the exit with the entrance's own dressed spin couples through the
    // second rf harmonic of the rotated dipolar tensor, so its coupling
    // changes sign between Omega/w = 1.5 and 2.25
    let sys = TwoAtomSystem::chromium_pair();
    let w = |x: f64| {
        let f = field(x);
        let n_max = default_n_max(x);
        let basis = ChannelBasis::triplet(n_max).unwrap();
        let ds = dressed_states(&f, &sys, n_max).unwrap();
        let vin = find_dressed(&ds, 0, 0)
            .unwrap()
            .embed(0, 0, &basis)
            .unwrap();
        let vout = find_dressed(&ds, -1, 0)
            .unwrap()
            .embed(2, -1, &basis)
            .unwrap();
        let h = ChannelHamiltonian::new(&f, &sys, &basis).unwrap();
        (vin.transpose() * h.angular() * vout)[(0, 0)]
    };
    assert!(w(1.5) * w(2.25) < 0.0);
}

#[test]
fn rejects_basis_that_is_not_closed() {
    let cut = ChannelBasis::from_channels(
        vec![
            Channel::entrance(0),
            Channel::new(1, -1, 2, -1, -1).unwrap(),
        ],
        2,
    )
    .unwrap();
    let r = build_channel_hamiltonian(
        900.0 * CODATA.a0,
        &field(1.0),
        &TwoAtomSystem::chromium_pair(),
        &cut,
    );
    assert!(matches!(r, Err(rfdress_core::Error::BasisNotClosed(_))));
}
