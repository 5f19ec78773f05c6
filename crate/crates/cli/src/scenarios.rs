//! One runner per scenario. Each resolves and checks all of its parameters
//! up front (so `validate` can stop there) and returns the deferred sweep.

use std::f64::consts::PI;

use rfdress_core::bessel::bessel_j0;
use rfdress_core::classical::time_averaged_moment;
use rfdress_core::constants::{field_for_larmor, CHROMIUM_52_MASS_AMU, CODATA};
use rfdress_core::dressed::{
    dressed_energies_analytic, effective_gj_numeric, floquet_quasienergies, lande_factor_dressed,
    FloquetOptions,
};
use rfdress_core::loss::{
    crossing_gap, ChannelBasis, ChannelHamiltonian, ExitChannel, GapSettings, TwoAtomSystem,
};
use rfdress_core::ramp::{
    adiabatic_fraction_vs_bpar, lz_criterion, recovery_probability_vs_tau, RampProfile, RampShape,
};
use rfdress_core::trajectory::{
    branch_displacements, displacement_curve, simulated_displacement_curve, PipelineSettings,
};
use rfdress_core::units::{GAUSS, MILLIGAUSS, MM, MS, US};
use rfdress_core::{sweep, Error, FieldConfig, SpinSystem};

use crate::config::Config;
use crate::csv::{Cell, Table};
use crate::error::CliError;

type Job = Box<dyn FnOnce() -> Result<Table, CliError> + Send>;

/// Resolved scenario, ready to run.
pub struct Plan {
    pub warnings: Vec<String>,
    job: Job,
}

impl Plan {
    pub fn run(self) -> Result<Table, CliError> {
        (self.job)()
    }
}

pub fn plan(scenario: &str, cfg: &Config) -> Result<Plan, CliError> {
    let (job, mut warnings) = match scenario {
        "fig1" => fig1(cfg)?,
        "fig2b" => fig2b(cfg)?,
        "fig3a" => fig3a(cfg)?,
        "fig3b" => fig3b(cfg)?,
        "fig4gap" => fig4gap(cfg)?,
        "gj-sweep" => gj_sweep(cfg)?,
        "quasienergy" => quasienergy(cfg)?,
        "classical-avg" => classical_avg(cfg)?,
        "channels" => channels(cfg)?,
        other => {
            return Err(CliError::config(
                "scenario",
                format!("unknown scenario `{other}`"),
            ))
        }
    };
    let used: Vec<String> = cfg.resolved().into_iter().map(|(k, _)| k).collect();
    for key in cfg.own_keys() {
        if !used.iter().any(|u| u == key) && !matches!(key, "scenario" | "output") {
            warnings.push(format!("key `{key}` is not used by scenario {scenario}"));
        }
    }
    Ok(Plan { warnings, job })
}

type Planned = (Job, Vec<String>);

fn bad(key: &'static str) -> impl Fn(Error) -> CliError {
    move |e| CliError::config(key, e.to_string())
}

fn spin(cfg: &Config) -> Result<SpinSystem, CliError> {
    let j = cfg.positive("spin_j", Some(3.0))?;
    let g_j = cfg.quantity_or("g_j", 2.0)?;
    let mass = cfg.positive("mass", Some(CHROMIUM_52_MASS_AMU * CODATA.amu))?;
    if g_j == 0.0 {
        return Err(CliError::config("g_j", "must be non-zero"));
    }
    SpinSystem::new(j, g_j, mass).map_err(bad("spin_j"))
}

fn g_j(cfg: &Config) -> Result<f64, CliError> {
    let g = cfg.quantity_or("g_j", 2.0)?;
    if g == 0.0 || !g.is_finite() {
        return Err(CliError::config("g_j", "must be non-zero"));
    }
    Ok(g)
}

/// Static and rf fields. `B_perp` is given directly or through its Larmor frequency.
fn field(cfg: &Config, g_j: f64) -> Result<FieldConfig, CliError> {
    let rf = cfg.rf_omega()?;
    let b_perp = match (cfg.quantity("b_perp")?, cfg.quantity("larmor_perp")?) {
        (Some(b), None) => b,
        (None, Some(f)) => field_for_larmor(2.0 * PI * f, g_j),
        (Some(_), Some(_)) => {
            return Err(CliError::config(
                "larmor_perp",
                "conflicts with b_perp; give only one",
            ))
        }
        (None, None) => {
            return Err(CliError::config(
                "b_perp",
                "missing required key (or give larmor_perp)",
            ))
        }
    };
    if b_perp.is_nan() || b_perp <= 0.0 {
        return Err(CliError::config(
            "b_perp",
            format!("must be > 0, got {b_perp}"),
        ));
    }
    let b_par = cfg.quantity_or("b_par", 0.0)?;
    let gradient = cfg.quantity_or("gradient", 0.25 * GAUSS / 1e-2)?;
    FieldConfig::new(b_par, b_perp, rf, 0.0, gradient).map_err(bad("b_par"))
}

fn require_zero_b_par(f: &FieldConfig, scenario: &str) -> Result<(), CliError> {
    if f.b_par != 0.0 {
        return Err(CliError::config(
            "b_par",
            format!("scenario {scenario} requires b_par = 0"),
        ));
    }
    Ok(())
}

fn ratio_grid(cfg: &Config, min: f64, max: f64, points: i64) -> Result<Vec<f64>, CliError> {
    let lo = cfg.non_negative("ratio_min", min)?;
    let hi = cfg.non_negative("ratio_max", max)?;
    let n = cfg.count("ratio_points", points, 1)?;
    if hi < lo {
        return Err(CliError::config(
            "ratio_max",
            format!("must be >= ratio_min ({lo})"),
        ));
    }
    Ok(sweep::linspace(lo, hi, n))
}

fn shape(cfg: &Config) -> Result<RampShape, CliError> {
    Ok(match cfg.choice("ramp_shape", "linear")?.as_str() {
        "smoothstep" => RampShape::Smoothstep,
        _ => RampShape::Linear,
    })
}

fn floquet(cfg: &Config) -> Result<FloquetOptions, CliError> {
    Ok(FloquetOptions {
        tol: cfg.tol(1e-12)?,
        periods: cfg.count("periods", 1, 1)?,
    })
}

fn to_khz(e: f64) -> f64 {
    e / CODATA.h / 1e3
}

fn fig1(cfg: &Config) -> Result<Planned, CliError> {
    let spin = spin(cfg)?;
    let f = field(cfg, spin.g_j())?;
    let grid = ratio_grid(cfg, 0.0, 4.3, 44)?;
    let drift = cfg.positive("drift_time", Some(35.0 * MS))?;
    let settings = PipelineSettings {
        t_up: cfg.positive("t_up", Some(1.0 * MS))?,
        shape: shape(cfg)?,
        tol: cfg.tol(1e-13)?,
        slope_step: cfg.positive("slope_step", Some(1e-3))?,
        floquet: FloquetOptions::default(),
    };
    if grid.iter().any(|r| *r > 6.0) {
        return Err(CliError::config(
            "ratio_max",
            "the simulated pipeline covers ratios up to 6",
        ));
    }
    let g = spin.g_j();
    let warn = f.regime_warnings(g);
    let job: Job = Box::new(move || {
        let analytic = displacement_curve(&spin, &grid, &f, drift, true)?;
        let numeric = simulated_displacement_curve(&spin, &grid, &f, drift, &settings)?;
        let mut t = Table::new([
            "omega_ratio",
            "delta_over_deltamax_analytic",
            "delta_over_deltamax_numeric",
        ]);
        for (a, n) in analytic.iter().zip(&numeric) {
            t.push(vec![a.ratio.into(), a.relative.into(), n.relative.into()]);
        }
        Ok(t)
    });
    Ok((job, warn))
}

fn fig2b(cfg: &Config) -> Result<Planned, CliError> {
    let spin = spin(cfg)?;
    let f = field(cfg, spin.g_j())?;
    let grid = ratio_grid(cfg, 0.0, 4.3, 44)?;
    let drift = cfg.positive("drift_time", Some(45.0 * MS))?;
    if grid.iter().any(|r| *r > 6.0) {
        return Err(CliError::config(
            "ratio_max",
            "branch displacements cover ratios up to 6",
        ));
    }
    let g = spin.g_j();
    let warn = f.regime_warnings(g);
    let job: Job = Box::new(move || {
        let mut t = Table::new(["omega_ratio", "delta_signed_mm", "delta_abs_mm"]);
        for r in grid {
            let b = branch_displacements(&spin, r, &f, drift)?;
            t.push(vec![
                r.into(),
                (b.signed / MM).into(),
                (b.absolute / MM).into(),
            ]);
        }
        Ok(t)
    });
    Ok((job, warn))
}

fn m_label(m: f64) -> String {
    let mag = crate::csv::format_g(m.abs());
    if m < 0.0 {
        format!("p_m_minus{mag}")
    } else if m > 0.0 {
        format!("p_m_plus{mag}")
    } else {
        "p_m_0".into()
    }
}

fn fig3a(cfg: &Config) -> Result<Planned, CliError> {
    let spin = spin(cfg)?;
    let f = field(cfg, spin.g_j())?;
    let peak = cfg.positive("omega_max_ratio", Some(2.8))? * f.rf_omega;
    let t_up = cfg.positive("t_up", Some(1.0 * MS))?;
    let total = cfg.positive("total_time", Some(2.0 * MS))?;
    if total <= t_up {
        return Err(CliError::config(
            "total_time",
            format!("must exceed t_up ({t_up} s)"),
        ));
    }
    let base = RampProfile::new(t_up, 0.0, total - t_up, peak, shape(cfg)?).map_err(bad("t_up"))?;
    let tau_min = cfg.non_negative("tau_min", 0.0)?;
    let tau_max = cfg.non_negative("tau_max", total - t_up)?;
    let n = cfg.count("tau_points", 21, 1)?;
    if tau_max < tau_min {
        return Err(CliError::config("tau_max", "must be >= tau_min"));
    }
    if tau_max > total - t_up {
        return Err(CliError::config(
            "tau_max",
            "must not exceed total_time - t_up",
        ));
    }
    let taus = match cfg.choice("tau_spacing", "linear")?.as_str() {
        "log" if tau_min <= 0.0 => {
            return Err(CliError::config("tau_min", "log spacing needs tau_min > 0"))
        }
        "log" => sweep::logspace(tau_min, tau_max, n),
        _ => sweep::linspace(tau_min, tau_max, n),
    };
    let tol = cfg.tol(1e-12)?;
    // extreme m first, then the rest in ascending order
    let ms = spin.m_values();
    let dim = ms.len();
    let mut order = vec![0, dim - 1];
    order.extend(1..dim - 1);
    let g = spin.g_j();
    let warn = f.regime_warnings(g);
    let job: Job = Box::new(move || {
        let pts = recovery_probability_vs_tau(&spin, &taus, &f, &base, tol)?;
        let mut header = vec!["tau_us".to_string()];
        header.extend(order.iter().map(|&k| m_label(ms[k])));
        let mut t = Table::new(header);
        for p in pts {
            let mut row: Vec<Cell> = vec![(p.tau / US).into()];
            row.extend(order.iter().map(|&k| Cell::Num(p.populations[k])));
            t.push(row);
        }
        Ok(t)
    });
    Ok((job, warn))
}

fn fig3b(cfg: &Config) -> Result<Planned, CliError> {
    let spin = spin(cfg)?;
    let f = field(cfg, spin.g_j())?;
    let peak = cfg.positive("omega_max_ratio", Some(3.25))? * f.rf_omega;
    let ramp_time = cfg.positive("ramp_time", Some(20.0 * US))?;
    let ramp =
        RampProfile::new(ramp_time, 0.0, 0.0, peak, shape(cfg)?).map_err(bad("ramp_time"))?;
    let lo = cfg.non_negative("b_par_min", 0.0)?;
    let hi = cfg.non_negative("b_par_max", 100.0 * MILLIGAUSS)?;
    let n = cfg.count("b_par_points", 21, 1)?;
    if hi < lo {
        return Err(CliError::config("b_par_max", "must be >= b_par_min"));
    }
    let grid = sweep::linspace(lo, hi, n);
    let tol = cfg.tol(1e-12)?;
    let g = spin.g_j();
    let warn = f.with_b_par(lo).regime_warnings(g);
    let job: Job = Box::new(move || {
        let pts = adiabatic_fraction_vs_bpar(&spin, &grid, &f, &ramp, tol)?;
        let mut t = Table::new(["b_par_mg", "p_adiabatic", "lz_ratio"]);
        for (b, p) in pts {
            let lz = lz_criterion(b, f.b_perp, ramp_time, g)?;
            t.push(vec![(b / MILLIGAUSS).into(), p.into(), lz.into()]);
        }
        Ok(t)
    });
    Ok((job, warn))
}

fn fig4gap(cfg: &Config) -> Result<Planned, CliError> {
    let g = g_j(cfg)?;
    let f = field(cfg, g)?;
    require_zero_b_par(&f, "fig4gap")?;
    let mass = cfg.positive("mass", Some(CHROMIUM_52_MASS_AMU * CODATA.amu))?;
    let scale = cfg.positive("dipolar_scale", Some(1.0))?;
    let system = TwoAtomSystem::new(g, 0.5 * mass)
        .map_err(bad("mass"))?
        .with_dipolar_scale(scale);
    let grid = ratio_grid(cfg, 0.25, 2.5, 10)?;
    let rank = cfg.count("exit_rank", 2, 0)?;
    if rank > 2 {
        return Err(CliError::config(
            "exit_rank",
            "triplet states have ranks 0..=2",
        ));
    }
    let m_l = cfg.integer_or("exit_ml", -1)?;
    if m_l.abs() > 2 {
        return Err(CliError::config(
            "exit_ml",
            "d-wave exit channels have |m_l| <= 2",
        ));
    }
    let n_max = cfg.optional_integer("n_max")?;
    if n_max.is_some_and(|n| n < 1) {
        return Err(CliError::config("n_max", "must be >= 1"));
    }
    let window = cfg.positive("window", Some(0.1))?;
    if window >= 1.0 {
        return Err(CliError::config("window", "must be < 1"));
    }
    let settings = GapSettings {
        exit: ExitChannel { rank, m_l },
        n_max,
        coarse_points: cfg.count("coarse_points", 41, 3)?,
        window,
        ..GapSettings::default()
    };
    let warn = f.regime_warnings(g);
    let job: Job = Box::new(move || {
        let rows = sweep::try_map(&grid, |&r| -> Result<Vec<Cell>, Error> {
            if r == 0.0 {
                return Ok(vec![r.into(), 0.0.into(), f64::NAN.into()]);
            }
            let est = crossing_gap(&f.with_ratio(r), &system, &settings)?;
            Ok(vec![
                r.into(),
                (est.gap / CODATA.h).into(),
                (est.r_c / CODATA.a0).into(),
            ])
        })?;
        let mut t = Table::new(["omega_ratio", "gap_hz", "r_c_a0"]);
        rows.into_iter().for_each(|r| t.push(r));
        Ok(t)
    });
    Ok((job, warn))
}

fn gj_sweep(cfg: &Config) -> Result<Planned, CliError> {
    let spin = spin(cfg)?;
    let f = field(cfg, spin.g_j())?;
    require_zero_b_par(&f, "gj-sweep")?;
    let grid = ratio_grid(cfg, 0.0, 4.3, 44)?;
    let opts = floquet(cfg)?;
    let g = spin.g_j();
    let warn = f.regime_warnings(g);
    let job: Job = Box::new(move || {
        let rows = sweep::try_map(&grid, |&r| -> Result<Vec<Cell>, Error> {
            let analytic = lande_factor_dressed(spin.g_j(), r * f.rf_omega, f.rf_omega)?;
            let numeric = effective_gj_numeric(&spin, &f.with_ratio(r), &opts)?;
            Ok(vec![
                r.into(),
                analytic.into(),
                numeric.value.into(),
                Cell::Int(numeric.degenerate as i64),
            ])
        })?;
        let mut t = Table::new(["omega_ratio", "g_analytic", "g_numeric", "degenerate"]);
        rows.into_iter().for_each(|r| t.push(r));
        Ok(t)
    });
    Ok((job, warn))
}

fn quasienergy(cfg: &Config) -> Result<Planned, CliError> {
    let spin = spin(cfg)?;
    let f = field(cfg, spin.g_j())?;
    let grid = ratio_grid(cfg, 0.0, 2.2, 23)?;
    let opts = floquet(cfg)?;
    let g = spin.g_j();
    let warn = f.regime_warnings(g);
    let job: Job = Box::new(move || {
        let blocks = sweep::try_map(&grid, |&r| -> Result<Vec<Vec<Cell>>, Error> {
            let fr = f.with_ratio(r);
            let analytic = dressed_energies_analytic(&spin, &fr)?;
            let numeric = floquet_quasienergies(&spin, &fr, opts.periods, opts.tol)?;
            Ok(spin
                .m_values()
                .into_iter()
                .enumerate()
                .map(|(k, m)| {
                    vec![
                        r.into(),
                        m.into(),
                        to_khz(analytic.energies[k]).into(),
                        to_khz(numeric.energies[k]).into(),
                    ]
                })
                .collect())
        })?;
        let mut t = Table::new(["omega_ratio", "m", "e_analytic_khz", "e_floquet_khz"]);
        blocks.into_iter().flatten().for_each(|r| t.push(r));
        Ok(t)
    });
    Ok((job, warn))
}

fn classical_avg(cfg: &Config) -> Result<Planned, CliError> {
    let w = cfg.rf_omega()?;
    let grid = ratio_grid(cfg, 0.0, 10.0, 101)?;
    let job: Job = Box::new(move || {
        let rows = sweep::try_map(&grid, |&r| -> Result<Vec<Cell>, Error> {
            Ok(vec![
                r.into(),
                time_averaged_moment(r * w, w)?.into(),
                bessel_j0(r)?.into(),
            ])
        })?;
        let mut t = Table::new(["omega_ratio", "time_average", "bessel_j0"]);
        rows.into_iter().for_each(|r| t.push(r));
        Ok(t)
    });
    Ok((job, Vec::new()))
}

fn channels(cfg: &Config) -> Result<Planned, CliError> {
    let g = g_j(cfg)?;
    let f = field(cfg, g)?;
    require_zero_b_par(&f, "channels")?;
    let mass = cfg.positive("mass", Some(CHROMIUM_52_MASS_AMU * CODATA.amu))?;
    let system = TwoAtomSystem::new(g, 0.5 * mass).map_err(bad("mass"))?;
    let n_max = cfg.integer_or("n_max", 8)?;
    let basis = ChannelBasis::triplet(n_max).map_err(bad("n_max"))?;
    let warn = f.regime_warnings(g);
    let job: Job = Box::new(move || {
        let h = ChannelHamiltonian::new(&f, &system, &basis)?;
        let diag = h.asymptotic().diagonal();
        let mut t = Table::new(["index", "s", "m_s", "l", "m_l", "n", "asymptotic_khz"]);
        for (i, c) in basis.channels().iter().enumerate() {
            t.push(vec![
                Cell::Int(i as i64),
                c.s.into(),
                c.m_s.into(),
                c.l.into(),
                c.m_l.into(),
                c.n.into(),
                to_khz(diag[i]).into(),
            ]);
        }
        Ok(t)
    });
    Ok((job, warn))
}
