//! Acceptance checks. Prints one PASS/FAIL line per criterion. Exits
//! non-zero on a failure only when `ACCEPTANCE_STRICT=1`, so the rest of a
//! workspace test run still executes.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rfdress_core::bessel::{bessel_j0, j0};
use rfdress_core::classical::{
    analytic_transverse, integrate_classical_spin, time_averaged_moment,
};
use rfdress_core::constants::{field_for_larmor, CODATA};
use rfdress_core::dressed::{
    dressed_energies_analytic, effective_gj_numeric, find_degeneracy_point, one_period_propagator,
    FloquetOptions,
};
use rfdress_core::linalg::{symmetry_defect, unitarity_defect};
use rfdress_core::loss::angular::{gaunt, spherical_harmonic};
use rfdress_core::loss::{
    build_channel_hamiltonian, crossing_gap, crossing_radius, dipolar_energy, ChannelBasis,
    GapSettings, TwoAtomSystem,
};
use rfdress_core::quadrature::gauss_legendre;
use rfdress_core::ramp::{
    adiabatic_fraction, crossover_tau, lz_criterion, propagate_ramp, recovery_probability_vs_tau,
    RampProfile, RampShape, SpinState,
};
use rfdress_core::roots::brent;
use rfdress_core::sweep;
use rfdress_core::trajectory::{
    displacement_curve, simulated_displacement_curve, PipelineSettings,
};
use rfdress_core::units::{
    a0_to_m, gauss_per_cm_to_tesla_per_m, khz_to_angular, m_to_a0, mg_to_tesla, MS, US,
};
use rfdress_core::{Error, FieldConfig, SpinSystem};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn field_khz(rf_khz: f64, larmor_khz: f64, b_par: f64) -> FieldConfig {
    let w = khz_to_angular(rf_khz);
    FieldConfig::new(
        b_par,
        field_for_larmor(khz_to_angular(larmor_khz), 2.0),
        w,
        0.0,
        0.0,
    )
    .unwrap()
}

fn effective_lande() -> Outcome {
    let spin = SpinSystem::chromium52();
    let f = field_khz(300.0, 15.0, 0.0);
    let grid = sweep::linspace(0.0, 2.2, 50);
    let opts = FloquetOptions::default();
    let start = Instant::now();
    let g = sweep::try_map(&grid, |&x| {
        effective_gj_numeric(&spin, &f.with_ratio(x), &opts)
    });
    let secs = start.elapsed().as_secs_f64();
    let g = match g {
        Ok(g) => g,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let worst = grid
        .iter()
        .zip(&g)
        .map(|(x, g)| (g.value - 2.0 * j0(*x)).abs() / 2.0)
        .fold(0.0, f64::max);
    outcome(
        worst < 0.02 && secs < 30.0,
        format!(
            "max |g_num - gJ J0| / gJ = {worst:.2e} (< 2e-2), 50 points in {secs:.1} s (< 30 s)"
        ),
    )
}

fn degeneracy_point() -> Outcome {
    let w = khz_to_angular(300.0);
    let x = match find_degeneracy_point(w) {
        Ok(v) => v / w,
        Err(e) => return outcome(false, e.to_string()),
    };
    let spin = SpinSystem::chromium52();
    let f = field_khz(300.0, 85.0, 0.0).with_ratio(x);
    let unit = CODATA.mu_b * 2.0 * f.b_perp;
    let e_max = dressed_energies_analytic(&spin, &f)
        .unwrap()
        .energies
        .iter()
        .map(|e| e.abs() / unit)
        .fold(0.0, f64::max);
    outcome(
        (x - 2.404826).abs() <= 1e-6 && e_max < 1e-12,
        format!("Omega*/w = {x:.9} (2.404826 +- 1e-6), max |E_m| = {e_max:.1e} mu_B gJ B_perp (< 1e-12)"),
    )
}

fn classical_identity() -> Outcome {
    let start = Instant::now();
    let grid = sweep::linspace(0.0, 20.0, 200);
    let avg_err = grid
        .iter()
        .map(|&x| (time_averaged_moment(x, 1.0).unwrap() - bessel_j0(x).unwrap()).abs())
        .fold(0.0, f64::max);
    let w = khz_to_angular(300.0);
    let f = FieldConfig::new(0.0, 0.0, w, 1.0 * w, 0.0).unwrap();
    let ode_err = |tol: f64| {
        let traj = integrate_classical_spin([1.0, 0.0, 0.0], &f, 2.0, 1000.0 * f.rf_period(), tol)
            .unwrap();
        traj.iter()
            .map(|p| (p.mu[0] - analytic_transverse(p.t, f.rabi_omega, w).unwrap()).abs())
            .fold(0.0, f64::max)
    };
    let (err, loose) = (ode_err(1e-11), ode_err(1e-10));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        avg_err < 1e-10 && err < 1e-7 && secs < 10.0,
        format!(
            "max |<cos> - J0| = {avg_err:.1e} (< 1e-10), ODE over 1000 periods {err:.1e} at tol 1e-11 (< 1e-7; {loose:.2e} at tol 1e-10), {secs:.1} s (< 10 s)"
        ),
    )
}

fn fig1_shape() -> Outcome {
    let spin = SpinSystem::chromium52();
    let closed_grid = sweep::linspace(0.0, 4.3, 87);
    let lab = FieldConfig::new(
        0.0,
        mg_to_tesla(30.4),
        khz_to_angular(300.0),
        0.0,
        gauss_per_cm_to_tesla_per_m(0.25),
    )
    .unwrap();
    let closed = displacement_curve(&spin, &closed_grid, &lab, 35.0 * MS, true).unwrap();
    let exact = closed.iter().all(|p| p.relative == j0(p.ratio).abs());

    let w = khz_to_angular(40_000.0);
    let b_perp = field_for_larmor(khz_to_angular(1_500.0), 2.0);
    let f = FieldConfig::new(
        mg_to_tesla(20.0),
        b_perp,
        w,
        0.0,
        gauss_per_cm_to_tesla_per_m(0.25),
    )
    .unwrap();
    let ratios = [0.5, 1.5, 2.0, 3.0, 4.0];
    let settings = PipelineSettings::default();
    let start = Instant::now();
    let sim = match simulated_displacement_curve(&spin, &ratios, &f, 35.0 * MS, &settings) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("pipeline failed: {e}")),
    };
    let secs = start.elapsed().as_secs_f64();
    let devs: Vec<String> = sim
        .iter()
        .map(|p| {
            format!(
                "{:.1}:{:+.2}%",
                p.ratio,
                100.0 * (p.relative / j0(p.ratio).abs() - 1.0)
            )
        })
        .collect();
    let worst = sim
        .iter()
        .map(|p| (p.relative / j0(p.ratio).abs() - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(
        exact && worst < 0.03,
        format!(
            "closed form == |J0| exactly: {exact}; simulated vs |J0| [{}] (< 3%), {secs:.0} s",
            devs.join(" ")
        ),
    )
}

fn fig3a_behaviour() -> Outcome {
    let spin = SpinSystem::chromium52();
    let f = field_khz(300.0, 85.0, mg_to_tesla(5.0));
    let base =
        RampProfile::new(1.0 * MS, 0.0, 1.0 * MS, 2.8 * f.rf_omega, RampShape::Linear).unwrap();
    let mut taus: Vec<f64> = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
        .iter()
        .map(|t| t * US)
        .collect();
    let sweep_us = [
        10.0, 20.0, 30.0, 50.0, 70.0, 100.0, 150.0, 200.0, 300.0, 500.0, 1000.0,
    ];
    taus.extend(sweep_us.iter().map(|t| t * US));
    let start = Instant::now();
    let pts = match recovery_probability_vs_tau(&spin, &taus, &f, &base, 1e-12) {
        Ok(p) => p,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let secs = start.elapsed().as_secs_f64();
    let slow = pts.last().unwrap().p_lowest();
    let fast: Vec<f64> = pts[..6].iter().map(|p| p.p_highest()).collect();
    let fast_ok = fast.iter().all(|p| *p > 0.5);
    let cross = crossover_tau(&pts[6..]);
    let cross_ok = cross.is_some_and(|t| (10.0 * US..=300.0 * US).contains(&t));
    let fast_txt: Vec<String> = fast.iter().map(|p| format!("{p:.2}")).collect();
    outcome(
        slow > 0.9 && fast_ok && cross_ok && secs < 300.0,
        format!(
            "P(-3) at 1 ms = {slow:.3} (> 0.9); P(+3) at tau = 0..5 us = [{}] (all > 0.5); crossover {} (10-300 us); {secs:.0} s",
            fast_txt.join(" "),
            cross.map_or("none".into(), |t| format!("{:.0} us", t / US)),
        ),
    )
}

fn fig3b_landau_zener() -> Outcome {
    let spin = SpinSystem::chromium52();
    let f = field_khz(500.0, 85.0, 0.0);
    let ramp = RampProfile::new(20.0 * US, 0.0, 0.0, 3.25 * f.rf_omega, RampShape::Linear).unwrap();
    let p = |b_mg: f64| adiabatic_fraction(&spin, &f.with_b_par(mg_to_tesla(b_mg)), &ramp, 1e-12);
    let grid = [2.0, 5.0, 10.0, 20.0, 40.0, 80.0];
    let values = match sweep::try_map(&grid, |&b| p(b)) {
        Ok(v) => v,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let Some(i) = values.windows(2).position(|w| w[0] < 0.5 && w[1] >= 0.5) else {
        return outcome(false, format!("no 50% point on {grid:?} mG: {values:?}"));
    };
    let half = match brent(
        |b| p(b).map_or(f64::NAN, |v| v - 0.5),
        grid[i],
        grid[i + 1],
        0.01,
    ) {
        Ok(b) => b,
        Err(e) => return outcome(false, e.to_string()),
    };
    let lz = lz_criterion(mg_to_tesla(half), f.b_perp, 20.0 * US, 2.0).unwrap();
    outcome(
        (10.0..=40.0).contains(&half) && (0.3..=3.0).contains(&lz),
        format!("50% adiabatic at B_par = {half:.1} mG (10-40 mG), LZ ratio there {lz:.2} (0.3-3)"),
    )
}

fn crossing_radius_check() -> Outcome {
    let sys = TwoAtomSystem::chromium_pair();
    let r = m_to_a0(crossing_radius(khz_to_angular(500.0), 2, sys.reduced_mass).unwrap());
    outcome(
        (r / 900.0 - 1.0).abs() <= 0.05,
        format!("R_c = {r:.1} a0 (900 a0 +- 5%)"),
    )
}

/// Coefficient of determination of a least-squares line through `(x, y)`.
fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn gap_behaviour() -> Outcome {
    let sys = TwoAtomSystem::chromium_pair();
    let f = field_khz(500.0, 85.0, 0.0);
    let settings = GapSettings::default();
    let start = Instant::now();
    let no_rf = matches!(
        crossing_gap(&f, &sys, &settings),
        Err(Error::NoAvoidedCrossing(_))
    );
    let grid = [0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.2, 2.38];
    let est = match sweep::try_map(&grid, |&x| crossing_gap(&f.with_ratio(x), &sys, &settings)) {
        Ok(e) => e,
        Err(e) => return outcome(false, format!("gap sweep failed: {e}")),
    };
    let gaps: Vec<f64> = est.iter().map(|e| e.gap).collect();
    let rises =
        no_rf && gaps[0] < 0.1 * gaps[gaps.len() - 1] && gaps[..5].windows(2).all(|w| w[1] > w[0]);
    let max = gaps.iter().copied().fold(0.0, f64::max);
    let sat = grid[gaps.iter().position(|g| *g >= 0.9 * max).unwrap()];
    let sat_ok = (1.5..=2.5).contains(&sat);
    let r_c = crossing_radius(f.rf_omega, 2, sys.reduced_mass).unwrap();
    let v_d = dipolar_energy(r_c, sys.g_j);
    let scale_ratio = max / v_d;
    let factor_ok = (0.5..=2.0).contains(&scale_ratio);

    let scales = [0.5, 1.0, 2.0];
    let below = f.with_ratio(1.0);
    let scaled = match sweep::try_map(&scales, |&s| {
        crossing_gap(&below, &sys.with_dipolar_scale(s), &settings)
    }) {
        Ok(e) => e,
        Err(e) => return outcome(false, format!("prefactor sweep failed: {e}")),
    };
    let r2 = r_squared(&scales, &scaled.iter().map(|e| e.gap).collect::<Vec<_>>());
    let two_level = est[..grid.len() - 1]
        .iter()
        .map(|e| (e.two_level_gap / e.gap - 1.0).abs())
        .fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    let hz = |e: f64| e / CODATA.h;
    outcome(
        rises && sat_ok && factor_ok && r2 > 0.999 && two_level < 0.05,
        format!(
            "rises from 0: {rises} ({:.1} Hz at 0.1); 90% of max first at {sat} (1.5-2.5); max {:.1} Hz = {scale_ratio:.3} V_d(R_c) with V_d = {:.1} Hz (0.5-2); prefactor R^2 = {r2:.6} (> 0.999); two-level max dev {:.2}% (< 5%); {secs:.0} s",
            hz(gaps[0]),
            hz(max),
            hz(v_d),
            100.0 * two_level,
        ),
    )
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

fn invariants() -> Outcome {
    let start = Instant::now();
    let runner = |cases: u32| {
        TestRunner::new(Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        })
    };
    let mut failures = Vec::new();

    let unitarity = runner(16).run(
        &(1u32..=6, 0.0f64..4.0, 10.0f64..150.0, 0.0f64..0.5),
        |(tj, x, lk, bp)| {
            let spin = SpinSystem::new(tj as f64 / 2.0, 2.0, 1e-25).unwrap();
            let f = field_khz(300.0, lk, 0.0);
            let f = f.with_b_par(bp * f.b_perp).with_ratio(x);
            let d = unitarity_defect(
                &one_period_propagator(&spin, &f, &FloquetOptions::default()).unwrap(),
            );
            prop_assert!(d < 1e-9, "defect {d:e}");
            Ok(())
        },
    );
    if let Err(e) = unitarity {
        failures.push(format!("unitarity: {e}"));
    }

    let hermiticity = runner(64).run(&(200.0f64..1e5, 0.0f64..4.0, 0.1f64..10.0), |(r, x, s)| {
        let f = field_khz(500.0, 85.0, 0.0).with_ratio(x);
        let sys = TwoAtomSystem::chromium_pair().with_dipolar_scale(s);
        let h = build_channel_hamiltonian(a0_to_m(r), &f, &sys, &ChannelBasis::triplet(4).unwrap())
            .unwrap();
        let size = h.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let d = symmetry_defect(&h) / size;
        prop_assert!(d < 1e-13, "relative defect {d:e}");
        Ok(())
    });
    if let Err(e) = hermiticity {
        failures.push(format!("hermiticity: {e}"));
    }

    let normalization = runner(16).run(
        &(0.0f64..3.5, 5.0f64..40.0, 0.0f64..0.3, 0usize..7),
        |(x, periods, bp, k)| {
            let spin = SpinSystem::chromium52();
            let f = field_khz(300.0, 85.0, 0.0);
            let f = f.with_b_par(bp * f.b_perp);
            let t = periods * f.rf_period();
            let ramp = RampProfile::new(t, 0.5 * t, t, x * f.rf_omega, RampShape::Linear).unwrap();
            let psi0 = SpinState::bare(&spin, &f, k as f64 - 3.0).unwrap();
            let psi = propagate_ramp(&spin, &psi0, &ramp, &f, 1e-12).unwrap();
            let d = (psi.static_populations(&spin, &f).iter().sum::<f64>() - 1.0).abs();
            prop_assert!(d < 1e-9, "population sum off by {d:e}");
            Ok(())
        },
    );
    if let Err(e) = normalization {
        failures.push(format!("normalization: {e}"));
    }

    let angular = runner(128).run(
        &(0i64..=4, 0i64..=4, 0i64..=4, 0u32..9, 0u32..9),
        |(lp, l, k, a, b)| {
            let mp = (a as i64 % (2 * lp + 1)) - lp;
            let q = (b as i64 % (2 * k + 1)) - k;
            let m = mp - q;
            let g = gaunt(lp, mp, k, q, l, m);
            let quad = sphere_integral(12, |t, p| {
                spherical_harmonic(lp, mp, t, p).conj()
                    * spherical_harmonic(k, q, t, p)
                    * spherical_harmonic(l, m, t, p)
            });
            if g == 0.0 {
                prop_assert!(quad.norm() < 1e-12);
            } else {
                let d = (quad.re - g).abs() / g.abs();
                prop_assert!(
                    d < 1e-8 && quad.im.abs() < 1e-12,
                    "relative deviation {d:e}"
                );
            }
            Ok(())
        },
    );
    if let Err(e) = angular {
        failures.push(format!("angular: {e}"));
    }

    let secs = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && secs < 120.0;
    let detail = if failures.is_empty() {
        format!("unitarity < 1e-9, hermiticity < 1e-13, normalization < 1e-9, Gaunt vs quadrature < 1e-8 rel; {secs:.1} s (< 120 s)")
    } else {
        failures.join("; ")
    };
    outcome(pass, detail)
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("effective Lande factor", effective_lande),
        ("degeneracy point", degeneracy_point),
        ("classical identity", classical_identity),
        ("displacement curve shape", fig1_shape),
        ("dressing/undressing recovery", fig3a_behaviour),
        ("ramp adiabaticity / Landau-Zener", fig3b_landau_zener),
        ("crossing radius", crossing_radius_check),
        ("gap behaviour", gap_behaviour),
        ("invariant suites", invariants),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {}. {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
