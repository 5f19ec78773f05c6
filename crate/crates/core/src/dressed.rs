//! Dressed Landé factor and dressed-state energies.
//!
//! The analytic route is the first-order result `g = gJ J0(Omega/w)`. The
//! numerical route builds the one-period propagator of the full
//! time-dependent Hamiltonian, diagonalizes it and follows the quasi-energy
//! branches from `Omega = 0` by continuation. A second numerical route
//! diagonalizes the truncated extended (Shirley) Floquet matrix.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::bessel::{j0, j0_zero};
use crate::constants::CODATA;
use crate::error::{finite, positive, Error};
use crate::field::FieldConfig;
use crate::linalg::{match_columns, unitarity_defect, unitary_eigen};
use crate::ode::Dop853;
use crate::roots::brent;
use crate::schrodinger::{propagate_matrix, DrivenSpin};
use crate::spin::SpinSystem;
use crate::Result;

/// Largest continuation step in `Omega/w`.
pub const MAX_RATIO_STEP: f64 = 0.05;
const MIN_RATIO_STEP: f64 = 1e-6;
/// Half-width of the window around a Bessel zero treated as degenerate.
pub const ZERO_EXCLUSION: f64 = 1e-3;
const MIN_TRACKING_OVERLAP: f64 = 0.5;
/// Eigenphases closer than this are treated as one degenerate cluster.
const CLUSTER_PHASE_TOL: f64 = 1e-6;
/// Minimum resolvable quasi-energy spacing in units of `hbar w`.
pub const AMBIGUOUS_SPACING: f64 = 1e-4;
pub const UNITARITY_LIMIT: f64 = 1e-9;

/// `gJ J0(Omega/w)`.
pub fn lande_factor_dressed(g_j: f64, rabi_omega: f64, rf_omega: f64) -> Result<f64> {
    finite("g_j", g_j)?;
    finite("rabi_omega", rabi_omega)?;
    positive("rf_omega", rf_omega)?;
    Ok(g_j * j0(rabi_omega / rf_omega))
}

/// Whether `|ratio|` lies within [`ZERO_EXCLUSION`] of a zero of `J0`.
pub fn near_bessel_zero(ratio: f64) -> bool {
    nearest_bessel_zero(ratio).is_some_and(|z| (ratio.abs() - z).abs() < ZERO_EXCLUSION)
}

fn nearest_bessel_zero(ratio: f64) -> Option<f64> {
    let x = ratio.abs();
    let mut best: Option<f64> = None;
    for n in 1.. {
        let z = j0_zero(n).ok()?;
        if best.is_none_or(|b| (z - x).abs() < (b - x).abs()) {
            best = Some(z);
        }
        if z > x + 1.0 {
            break;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumMethod {
    Analytic,
    Floquet,
}

/// Per-`m` energies at one value of `Omega/w`.
#[derive(Clone, Debug)]
pub struct DressedSpectrum {
    pub ratio: f64,
    /// Energies (J), index `k` corresponds to `m = -J + k`.
    pub energies: Vec<f64>,
    pub method: SpectrumMethod,
    /// Set when all levels are degenerate at a Bessel zero (`B_par = 0`).
    pub degenerate: bool,
}

impl DressedSpectrum {
    /// Mean spacing between adjacent `m` levels (J).
    pub fn splitting(&self) -> f64 {
        let n = self.energies.len();
        (self.energies[n - 1] - self.energies[0]) / (n - 1) as f64
    }
}

/// `E_m = m mu_B gJ sqrt((B_perp J0)^2 + B_par^2)`.
pub fn dressed_energies_analytic(
    spin: &SpinSystem,
    field: &FieldConfig,
) -> Result<DressedSpectrum> {
    field.validate()?;
    let ratio = field.ratio();
    let b_eff = (field.b_perp * j0(ratio)).hypot(field.b_par);
    let unit = CODATA.mu_b * spin.g_j() * b_eff;
    Ok(DressedSpectrum {
        ratio,
        energies: spin.m_values().into_iter().map(|m| m * unit).collect(),
        method: SpectrumMethod::Analytic,
        degenerate: field.b_par == 0.0 && near_bessel_zero(ratio),
    })
}

/// Numerical settings for the propagator route.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloquetOptions {
    /// Local error tolerance of the integrator.
    pub tol: f64,
    /// Number of rf periods spanned by the propagator; the quasi-energy zone
    /// width is `hbar w / periods`.
    pub periods: usize,
}

impl Default for FloquetOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            periods: 1,
        }
    }
}

impl FloquetOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        positive("tol", self.tol)?;
        if self.periods == 0 {
            return Err(Error::invalid("periods", "must be >= 1"));
        }
        Ok(())
    }

    fn span(&self, field: &FieldConfig) -> f64 {
        self.periods as f64 * field.rf_period()
    }

    pub fn zone_width(&self, field: &FieldConfig) -> f64 {
        CODATA.hbar * field.rf_omega / self.periods as f64
    }
}

/// Eigenvectors of `n.J` along the total static field (x if it vanishes),
/// ordered `m = -J..J`.
pub fn static_basis(spin: &SpinSystem, field: &FieldConfig) -> DMatrix<Complex64> {
    let ops = spin.operators();
    let b = field.b_static();
    let (nx, nz) = if b > 0.0 {
        (field.b_perp / b, field.b_par / b)
    } else {
        (1.0, 0.0)
    };
    let n = spin.dim();
    let proj = DMatrix::from_fn(n, n, |r, c| nx * ops.jx[(r, c)].re + nz * ops.jz[(r, c)].re);
    let eig = SymmetricEigen::new(proj);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    DMatrix::from_fn(n, n, |r, c| {
        let v = eig.eigenvectors.column(order[c]);
        let pivot = v
            .iter()
            .fold(0.0_f64, |a, &x| if x.abs() > a.abs() { x } else { a });
        Complex64::new(v[r] * pivot.signum(), 0.0)
    })
}

/// Propagator over `opts.periods` rf periods starting at `t = 0`.
pub fn one_period_propagator(
    spin: &SpinSystem,
    field: &FieldConfig,
    opts: &FloquetOptions,
) -> Result<DMatrix<Complex64>> {
    Ok(propagator_with_stats(spin, field, opts)?.0)
}

fn propagator_with_stats(
    spin: &SpinSystem,
    field: &FieldConfig,
    opts: &FloquetOptions,
) -> Result<(DMatrix<Complex64>, usize)> {
    field.validate()?;
    opts.validate()?;
    let drive = DrivenSpin::new(spin, field);
    let n = spin.dim();
    let ode = Dop853::new(opts.tol).with_max_step(field.rf_period() / 4.0);
    let rabi = field.rabi_omega;
    let (u, stats) = propagate_matrix(
        &drive,
        |_| rabi,
        &DMatrix::identity(n, n),
        0.0,
        opts.span(field),
        &ode,
    )?;
    Ok((u, stats.accepted))
}

/// Eigen-decomposition of the propagator.
#[derive(Clone, Debug)]
pub struct FloquetModes {
    /// Quasi-energies (J) folded into `[-W/2, W/2)`, `W` the zone width.
    pub quasienergies: Vec<f64>,
    /// Floquet modes at `t = 0`, one per column.
    pub vectors: DMatrix<Complex64>,
    pub eigenphases: Vec<f64>,
    pub zone_width: f64,
    pub unitarity_defect: f64,
    /// Conservative bound on the quasi-energy error (J).
    pub error_estimate: f64,
}

pub fn floquet_modes(
    spin: &SpinSystem,
    field: &FieldConfig,
    opts: &FloquetOptions,
) -> Result<FloquetModes> {
    let (u, steps) = propagator_with_stats(spin, field, opts)?;
    let defect = unitarity_defect(&u);
    if defect > UNITARITY_LIMIT {
        return Err(Error::NonUnitary { defect });
    }
    let (values, vectors) = unitary_eigen(&u)?;
    let span = opts.span(field);
    let eigenphases: Vec<f64> = values.iter().map(|z| z.arg()).collect();
    let quasienergies = eigenphases
        .iter()
        .map(|p| -CODATA.hbar * p / span)
        .collect();
    Ok(FloquetModes {
        quasienergies,
        vectors,
        eigenphases,
        zone_width: opts.zone_width(field),
        unitarity_defect: defect,
        error_estimate: CODATA.hbar / span * (defect + steps as f64 * opts.tol),
    })
}

/// Quasi-energy branches continued from `Omega = 0`.
///
/// Branch `k` starts on the bare state `m = -J + k` of the static field and is
/// followed by eigenvector overlap, so at an exact crossing it passes through
/// (diabatic labelling). Energies are unwrapped, i.e. continuous in `Omega`
/// rather than folded into one zone.
#[derive(Clone, Debug)]
pub struct Branches {
    pub ratio: f64,
    pub energies: Vec<f64>,
    /// Floquet mode of each branch at `t = 0` (columns).
    pub vectors: DMatrix<Complex64>,
    pub zone_width: f64,
    pub unitarity_defect: f64,
    pub error_estimate: f64,
}

impl Branches {
    /// Branch indices sorted by unwrapped energy: the adiabatic labelling,
    /// entry `k` is the branch connected to the `k`-th lowest level.
    pub fn adiabatic_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.energies.len()).collect();
        order.sort_by(|&a, &b| self.energies[a].total_cmp(&self.energies[b]));
        order
    }

    pub fn adiabatic_energies(&self) -> Vec<f64> {
        self.adiabatic_order()
            .into_iter()
            .map(|k| self.energies[k])
            .collect()
    }
}

struct Tracker<'a> {
    spin: &'a SpinSystem,
    field: FieldConfig,
    opts: FloquetOptions,
    vectors: DMatrix<Complex64>,
    energies: Vec<f64>,
    ratio: f64,
    last: Option<(f64, f64)>,
}

impl<'a> Tracker<'a> {
    fn new(spin: &'a SpinSystem, field: &FieldConfig, opts: &FloquetOptions) -> Result<Self> {
        field.validate()?;
        opts.validate()?;
        let unit = CODATA.hbar * spin.gamma().abs() * field.b_static();
        let mut t = Self {
            spin,
            field: field.clone(),
            opts: *opts,
            vectors: static_basis(spin, field),
            energies: spin.m_values().into_iter().map(|m| m * unit).collect(),
            ratio: 0.0,
            last: None,
        };
        if !t.try_step(0.0)? {
            return Err(Error::Continuation {
                ratio: 0.0,
                reason: "Floquet modes at zero rf do not match the static basis".into(),
            });
        }
        Ok(t)
    }

    /// Attempts to move to `ratio`; returns `false` if tracking is unreliable.
    fn try_step(&mut self, ratio: f64) -> Result<bool> {
        let modes = floquet_modes(self.spin, &self.field.with_ratio(ratio), &self.opts)?;
        let mut vecs = modes.vectors.clone();
        let matching = match_columns(
            &self.vectors,
            &mut vecs,
            &modes.eigenphases,
            CLUSTER_PHASE_TOL,
        );
        if matching.min_overlap < MIN_TRACKING_OVERLAP {
            return Ok(false);
        }
        let w = modes.zone_width;
        let mut energies = Vec::with_capacity(self.energies.len());
        for (i, &j) in matching.order.iter().enumerate() {
            let e = modes.quasienergies[j];
            let e = e + w * ((self.energies[i] - e) / w).round();
            if (e - self.energies[i]).abs() > w / 20.0 {
                return Ok(false);
            }
            energies.push(e);
        }
        let n = vecs.nrows();
        self.vectors = DMatrix::from_fn(n, n, |r, c| vecs[(r, matching.order[c])]);
        self.energies = energies;
        self.ratio = ratio;
        self.last = Some((modes.unitarity_defect, modes.error_estimate));
        Ok(true)
    }

    fn advance_to(&mut self, target: f64) -> Result<()> {
        let skip_zeros = self.field.b_par == 0.0 && self.field.b_perp != 0.0;
        let mut h = MAX_RATIO_STEP;
        while self.ratio != target {
            let dir = (target - self.ratio).signum();
            let mut next = if (target - self.ratio).abs() <= h {
                target
            } else {
                self.ratio + dir * h
            };
            if skip_zeros && next != target {
                if let Some(z) = nearest_bessel_zero(next) {
                    let z = z.copysign(dir);
                    if (next - z).abs() < ZERO_EXCLUSION {
                        next = z + dir * 1.5 * ZERO_EXCLUSION;
                        if (next - self.ratio) * (target - next) < 0.0 {
                            next = target;
                        }
                    }
                }
            }
            if self.try_step(next)? {
                h = (h * 1.5).min(MAX_RATIO_STEP);
            } else {
                h *= 0.5;
                if h < MIN_RATIO_STEP {
                    return Err(Error::Continuation {
                        ratio: self.ratio,
                        reason: "step size underflow while tracking branches".into(),
                    });
                }
            }
        }
        Ok(())
    }

    fn snapshot(&self) -> Branches {
        let (defect, err) = self.last.unwrap_or((0.0, 0.0));
        Branches {
            ratio: self.ratio,
            energies: self.energies.clone(),
            vectors: self.vectors.clone(),
            zone_width: self.opts.zone_width(&self.field),
            unitarity_defect: defect,
            error_estimate: err,
        }
    }
}

/// Continues the branches from `Omega = 0` to `field.ratio()`.
pub fn continue_branches(
    spin: &SpinSystem,
    field: &FieldConfig,
    opts: &FloquetOptions,
) -> Result<Branches> {
    let mut tracker = Tracker::new(spin, field, opts)?;
    tracker.advance_to(field.ratio())?;
    Ok(tracker.snapshot())
}

/// Continues once along `ratios` (monotone in one direction from 0) and
/// records the branches at every grid point.
pub fn branch_sweep(
    spin: &SpinSystem,
    field: &FieldConfig,
    ratios: &[f64],
    opts: &FloquetOptions,
) -> Result<Vec<Branches>> {
    let monotone =
        ratios.windows(2).all(|w| w[1] >= w[0]) || ratios.windows(2).all(|w| w[1] <= w[0]);
    let same_side = ratios.iter().all(|r| *r >= 0.0) || ratios.iter().all(|r| *r <= 0.0);
    if !monotone || !same_side {
        return Err(Error::invalid(
            "ratios",
            "must be monotone and on one side of zero",
        ));
    }
    let mut tracker = Tracker::new(spin, field, opts)?;
    let mut out = Vec::with_capacity(ratios.len());
    for &r in ratios {
        finite("ratio", r)?;
        tracker.advance_to(r)?;
        out.push(tracker.snapshot());
    }
    Ok(out)
}

/// Quasi-energies in the analytic ordering (`m = -J..J`, ascending for
/// `gJ > 0`), taken from the continued branches sorted by energy.
pub fn floquet_quasienergies(
    spin: &SpinSystem,
    field: &FieldConfig,
    periods: usize,
    tol: f64,
) -> Result<DressedSpectrum> {
    let opts = FloquetOptions { tol, periods };
    let branches = continue_branches(spin, field, &opts)?;
    let mut energies = branches.adiabatic_energies();
    let threshold = AMBIGUOUS_SPACING * CODATA.hbar * field.rf_omega;
    let spacing = energies
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if spacing < threshold {
        return Err(Error::AmbiguousBranch { spacing, threshold });
    }
    if spin.g_j() < 0.0 {
        energies.reverse();
    }
    Ok(DressedSpectrum {
        ratio: field.ratio(),
        energies,
        method: SpectrumMethod::Floquet,
        degenerate: false,
    })
}

/// Numerical effective Landé factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveG {
    pub value: f64,
    /// `Omega/w` sits on a Bessel zero; `value` is reported as 0.
    pub degenerate: bool,
}

/// `(eps_{m+1} - eps_m) / (mu_B B_perp)` on the branches continued from
/// `Omega = 0`, for the central pair of levels. Requires `B_par = 0`.
pub fn effective_gj_numeric(
    spin: &SpinSystem,
    field: &FieldConfig,
    opts: &FloquetOptions,
) -> Result<EffectiveG> {
    field.validate()?;
    if field.b_par != 0.0 {
        return Err(Error::invalid(
            "b_par",
            "effective g extraction requires b_par = 0",
        ));
    }
    positive("b_perp", field.b_perp)?;
    if near_bessel_zero(field.ratio()) {
        return Ok(EffectiveG {
            value: 0.0,
            degenerate: true,
        });
    }
    let branches = continue_branches(spin, field, opts)?;
    let k = (spin.dim() - 1) / 2;
    let mut split = branches.energies[k + 1] - branches.energies[k];
    // continuation started from the static-field ordering, which is by m only
    // when gJ > 0
    if spin.g_j() < 0.0 {
        split = -split;
    }
    Ok(EffectiveG {
        value: split / (CODATA.mu_b * field.b_perp),
        degenerate: false,
    })
}

/// `Omega*` at the first zero of the dressed Landé factor.
pub fn find_degeneracy_point(rf_omega: f64) -> Result<f64> {
    positive("rf_omega", rf_omega)?;
    let x = brent(
        |x| lande_factor_dressed(1.0, x * rf_omega, rf_omega).unwrap_or(f64::NAN),
        2.0,
        3.0,
        1e-15,
    )?;
    Ok(x * rf_omega)
}

/// Folds `e` into `[-w/2, w/2)`.
pub fn fold(e: f64, w: f64) -> f64 {
    e - w * ((e + 0.5 * w) / w).floor()
}

/// Default photon-number cutoff of the extended Floquet matrix.
pub fn default_photon_cutoff(ratio: f64) -> usize {
    10usize.max((3.0 * ratio.abs()).ceil() as usize) + 8
}

/// Quasi-energies (J) from the truncated extended Floquet matrix, folded into
/// `[-hbar w/2, hbar w/2)` and sorted.
pub fn extended_floquet_quasienergies(
    spin: &SpinSystem,
    field: &FieldConfig,
    n_max: Option<usize>,
) -> Result<Vec<f64>> {
    field.validate()?;
    let n_max = n_max.unwrap_or_else(|| default_photon_cutoff(field.ratio()));
    let ops = spin.operators();
    let d = spin.dim();
    let blocks = 2 * n_max + 1;
    let size = d * blocks;
    let hw = CODATA.hbar * field.rf_omega;
    let g = CODATA.hbar * spin.gamma();
    let half_rabi = 0.5 * CODATA.hbar * field.rabi_omega;
    let mut h = DMatrix::<f64>::zeros(size, size);
    for b in 0..blocks {
        let photons = b as f64 - n_max as f64;
        for r in 0..d {
            for c in 0..d {
                let v = g * (field.b_par * ops.jz[(r, c)].re + field.b_perp * ops.jx[(r, c)].re);
                h[(b * d + r, b * d + c)] = v;
            }
            h[(b * d + r, b * d + r)] += photons * hw;
            if b + 1 < blocks {
                let v = half_rabi * ops.jz[(r, r)].re;
                h[(b * d + r, (b + 1) * d + r)] = v;
                h[((b + 1) * d + r, b * d + r)] = v;
            }
        }
    }
    let eig = SymmetricEigen::new(h);
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    values.truncate(d);
    let mut out: Vec<f64> = values.into_iter().map(|e| fold(e, hw)).collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Rf phase `w t` reduced to `[0, 2 pi)`.
pub fn rf_phase(field: &FieldConfig, t: f64) -> f64 {
    (field.rf_omega * t).rem_euclid(2.0 * PI)
}
