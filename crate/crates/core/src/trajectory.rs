//! Centre-of-mass drift of dressed atoms along the horizontal trap axis.
//!
//! The magnetic potential of a state with moment `m g mu_B` in the gradient
//! `b'` is `V(x) = m g mu_B b' |x|`: for `gJ > 0` the `m = -J` state is
//! expelled from the centre. Displacements are reported outward, relative to
//! an `m = 0` reference, so that `Delta = -(1/2) m g mu_B b' t^2 / M` is
//! positive for `m < 0` and `g, b' > 0`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bessel::j0;
use crate::constants::CODATA;
use crate::dressed::{continue_branches, FloquetOptions};
use crate::error::{finite, non_negative, positive, Error};
use crate::field::FieldConfig;
use crate::ode::{Dop853, Stepper};
use crate::ramp::{next_period_boundary, propagate_ramp_until, RampProfile, RampShape, SpinState};
use crate::spin::SpinSystem;
use crate::sweep;
use crate::units::{MM, UM};
use crate::Result;

/// Largest `Omega/w` accepted by the displacement curves.
pub const MAX_CURVE_RATIO: f64 = 6.0;
/// Default start position relative to the trap centre.
pub const DEFAULT_SEED_OFFSET: f64 = 10.0 * UM;

fn check_ratio(ratio: f64) -> Result<f64> {
    finite("ratio", ratio)?;
    if !(0.0..=MAX_CURVE_RATIO).contains(&ratio) {
        return Err(Error::invalid(
            "ratio",
            format!("{ratio} outside [0, {MAX_CURVE_RATIO}]"),
        ));
    }
    Ok(ratio)
}

/// Closed-form outward displacement `-(1/2) m g_eff mu_B b' t^2 / M` (m).
pub fn drift_displacement(
    g_eff: f64,
    m: f64,
    field: &FieldConfig,
    t: f64,
    mass: f64,
) -> Result<f64> {
    finite("g_eff", g_eff)?;
    finite("m", m)?;
    non_negative("t", t)?;
    positive("mass", mass)?;
    field.validate()?;
    Ok(-0.5 * m * g_eff * CODATA.mu_b * field.gradient * t * t / mass)
}

/// One point of a displacement curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisplacementPoint {
    pub ratio: f64,
    /// `Delta / Delta_max`, with `Delta_max` the displacement without rf.
    pub relative: f64,
    /// Outward displacement of `m = -J` (m).
    pub absolute: f64,
}

/// Displacement of `m = -J` versus `Omega/w` from the dressed Landé factor.
/// With `adiabatic` the state follows `|J0|` past the zeros; otherwise it
/// keeps the sign of `J0`.
pub fn displacement_curve(
    spin: &SpinSystem,
    ratio_grid: &[f64],
    field: &FieldConfig,
    t: f64,
    adiabatic: bool,
) -> Result<Vec<DisplacementPoint>> {
    let m = -spin.j();
    let max = drift_displacement(spin.g_j(), m, field, t, spin.mass())?;
    ratio_grid
        .iter()
        .map(|&r| {
            let r = check_ratio(r)?;
            let s = if adiabatic { j0(r).abs() } else { j0(r) };
            Ok(DisplacementPoint {
                ratio: r,
                relative: s,
                absolute: s * max,
            })
        })
        .collect()
}

/// Displacements of the two extreme dressed branches after a fast ramp.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchDisplacements {
    /// Branch crossing the zero diabatically: `Delta_max J0`.
    pub signed: f64,
    /// Branch following the avoided crossing: `Delta_max |J0|`.
    pub absolute: f64,
}

pub fn branch_displacements(
    spin: &SpinSystem,
    ratio: f64,
    field: &FieldConfig,
    t: f64,
) -> Result<BranchDisplacements> {
    let r = check_ratio(ratio)?;
    let max = drift_displacement(spin.g_j(), -spin.j(), field, t, spin.mass())?;
    Ok(BranchDisplacements {
        signed: max * j0(r),
        absolute: max * j0(r).abs(),
    })
}

/// Longitudinal optical potential along the trap axis.
#[derive(Clone)]
pub enum LongitudinalPotential {
    Flat,
    /// `U(x) = -depth / (1 + ((x - waist_offset) / rayleigh_length)^2)`.
    GaussianBeam {
        depth: f64,
        rayleigh_length: f64,
        waist_offset: f64,
    },
    /// Arbitrary `U(x)` (J); the force is taken by central differences.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for LongitudinalPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Flat => f.write_str("Flat"),
            Self::GaussianBeam {
                depth,
                rayleigh_length,
                waist_offset,
            } => f
                .debug_struct("GaussianBeam")
                .field("depth", depth)
                .field("rayleigh_length", rayleigh_length)
                .field("waist_offset", waist_offset)
                .finish(),
            Self::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl LongitudinalPotential {
    pub fn energy(&self, x: f64) -> f64 {
        match self {
            Self::Flat => 0.0,
            Self::GaussianBeam {
                depth,
                rayleigh_length,
                waist_offset,
            } => {
                let u = (x - waist_offset) / rayleigh_length;
                -depth / (1.0 + u * u)
            }
            Self::Custom(u) => u(x),
        }
    }

    /// `-dU/dx` (N).
    pub fn force(&self, x: f64) -> f64 {
        match self {
            Self::Flat => 0.0,
            Self::GaussianBeam {
                depth,
                rayleigh_length,
                waist_offset,
            } => {
                let u = (x - waist_offset) / rayleigh_length;
                let d = 1.0 + u * u;
                -2.0 * depth * u / (rayleigh_length * d * d)
            }
            Self::Custom(u) => {
                let h = 1e-3 * UM;
                -(u(x + h) - u(x - h)) / (2.0 * h)
            }
        }
    }
}

/// Spatial dependence of the magnetic energy along the trap axis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MagneticProfile {
    /// `V = m g mu_B b' |x|`: field minimum at the trap centre.
    #[default]
    VShaped,
    /// `V = m g mu_B b' x`: uniform gradient, no kink.
    Linear,
}

#[derive(Clone, Debug)]
pub struct TrapConfig {
    pub potential: LongitudinalPotential,
    pub magnetic: MagneticProfile,
    pub drift_time: f64,
    /// Start position; its sign fixes the side of the `|x|` kink.
    pub seed_offset: f64,
}

impl TrapConfig {
    pub fn new(
        potential: LongitudinalPotential,
        magnetic: MagneticProfile,
        drift_time: f64,
    ) -> Result<Self> {
        let trap = Self {
            potential,
            magnetic,
            drift_time,
            seed_offset: DEFAULT_SEED_OFFSET,
        };
        trap.validate()?;
        Ok(trap)
    }

    pub fn flat(drift_time: f64) -> Result<Self> {
        Self::new(
            LongitudinalPotential::Flat,
            MagneticProfile::VShaped,
            drift_time,
        )
    }

    pub fn with_seed_offset(mut self, x0: f64) -> Result<Self> {
        self.seed_offset = x0;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        positive("drift_time", self.drift_time)?;
        finite("seed_offset", self.seed_offset)?;
        if self.seed_offset == 0.0 {
            return Err(Error::invalid(
                "seed_offset",
                "must be non-zero to fix the side of the kink",
            ));
        }
        finite("potential", self.potential.energy(self.seed_offset))?;
        if let LongitudinalPotential::GaussianBeam {
            rayleigh_length, ..
        } = self.potential
        {
            positive("rayleigh_length", rayleigh_length)?;
        }
        if self.magnetic == MagneticProfile::VShaped {
            // m = -1 with g, b' > 0 must be pushed away from the centre
            let push = magnetic_force(self.magnetic, -1.0, 1.0, 1.0, self.seed_offset);
            assert!(
                push * self.seed_offset > 0.0,
                "anti-confining sign convention violated"
            );
        }
        Ok(())
    }
}

/// `-dV/dx` with `V` set by `profile`, in units where `mu_B = 1`.
fn magnetic_force(profile: MagneticProfile, m: f64, g: f64, gradient: f64, x: f64) -> f64 {
    let slope = match profile {
        MagneticProfile::VShaped => x.signum(),
        MagneticProfile::Linear => 1.0,
    };
    -m * g * gradient * slope
}

/// Trajectories of a dressed state and of the `m = 0` reference.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryResult {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub reference: Vec<f64>,
    /// `(x_m - x_0)` signed so that motion away from the seed side is positive.
    pub displacement_rel: Vec<f64>,
}

impl TrajectoryResult {
    pub fn final_displacement(&self) -> f64 {
        *self.displacement_rel.last().expect("non-empty")
    }
}

/// Samples stored per trajectory.
const TRAJECTORY_SAMPLES: usize = 200;

#[allow(clippy::too_many_arguments)]
fn integrate_drift(
    potential: &LongitudinalPotential,
    magnetic: MagneticProfile,
    magnetic_scale: f64,
    m_g: f64,
    x0: f64,
    mass: f64,
    times: &[f64],
    tol: f64,
) -> Result<Vec<f64>> {
    // scaled units: mm and ms
    let (lx, lt) = (MM, 1e-3);
    let accel = lt * lt / (lx * mass);
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let x = y[0] * lx;
        let f = potential.force(x) + magnetic_scale * magnetic_force(magnetic, m_g, 1.0, 1.0, x);
        dy[0] = y[1];
        dy[1] = f * accel;
    };
    let mut stepper = Stepper::new(Dop853::new(tol), rhs, 0.0, &[x0 / lx, 0.0]);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        stepper.advance_to(t / lt)?;
        out.push(stepper.y()[0] * lx);
    }
    Ok(out)
}

/// Integrates the drift of `m` with the dressed factor `g_eff`, and of an
/// `m = 0` reference in the same trap.
pub fn simulate_drift_with_g(
    spin: &SpinSystem,
    m: f64,
    g_eff: f64,
    field: &FieldConfig,
    trap: &TrapConfig,
    tol: f64,
) -> Result<TrajectoryResult> {
    field.validate()?;
    trap.validate()?;
    finite("g_eff", g_eff)?;
    positive("tol", tol)?;
    if spin.index_of(m).is_none() {
        return Err(Error::invalid(
            "m",
            format!("{m} is not a projection of spin {}", spin.j()),
        ));
    }
    let times: Vec<f64> = sweep::linspace(0.0, trap.drift_time, TRAJECTORY_SAMPLES + 1);
    let scale = CODATA.mu_b * field.gradient;
    let run = |mg: f64| {
        integrate_drift(
            &trap.potential,
            trap.magnetic,
            scale,
            mg,
            trap.seed_offset,
            spin.mass(),
            &times,
            tol,
        )
    };
    let positions = run(m * g_eff)?;
    let reference = run(0.0)?;
    let side = trap.seed_offset.signum();
    let displacement_rel = positions
        .iter()
        .zip(&reference)
        .map(|(a, b)| side * (a - b))
        .collect();
    Ok(TrajectoryResult {
        times,
        positions,
        reference,
        displacement_rel,
    })
}

/// [`simulate_drift_with_g`] with `g_eff = gJ J0(Omega/w)`.
pub fn simulate_drift_ode(
    spin: &SpinSystem,
    m: f64,
    field: &FieldConfig,
    trap: &TrapConfig,
    rf_ratio: f64,
    tol: f64,
) -> Result<TrajectoryResult> {
    let g_eff = spin.g_j() * j0(check_ratio(rf_ratio)?);
    simulate_drift_with_g(spin, m, g_eff, field, trap, tol)
}

/// Settings of the simulated dressing-and-drift pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineSettings {
    pub t_up: f64,
    pub shape: RampShape,
    /// Integration tolerance of the ramp propagation.
    pub tol: f64,
    /// Relative step in `B_perp` for the branch moments.
    pub slope_step: f64,
    pub floquet: FloquetOptions,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            t_up: 1e-3,
            shape: RampShape::Linear,
            tol: 1e-13,
            slope_step: 1e-3,
            floquet: FloquetOptions::default(),
        }
    }
}

/// Dressed branches at one `Omega/w`, in adiabatic (energy) order.
#[derive(Clone, Debug)]
pub struct BranchMoments {
    pub ratio: f64,
    pub energies: Vec<f64>,
    /// `-d eps_k / d B_perp` (J/T): the force on branch `k` is this times `b'`.
    pub moments: Vec<f64>,
    /// Floquet modes at integer periods (columns).
    pub vectors: DMatrix<Complex64>,
}

/// Quasi-energies, modes and magnetic moments of the continued branches.
pub fn branch_moments(
    spin: &SpinSystem,
    field: &FieldConfig,
    step: f64,
    opts: &FloquetOptions,
) -> Result<BranchMoments> {
    positive("slope_step", step)?;
    positive("b_perp", field.b_perp)?;
    let d = step * field.b_perp;
    let at = |b: f64| continue_branches(spin, &field.with_b_perp(b), opts);
    let centre = at(field.b_perp)?;
    let up = at(field.b_perp + d)?.adiabatic_energies();
    let down = at(field.b_perp - d)?.adiabatic_energies();
    let order = centre.adiabatic_order();
    let n = order.len();
    Ok(BranchMoments {
        ratio: field.ratio(),
        energies: centre.adiabatic_energies(),
        moments: up
            .iter()
            .zip(&down)
            .map(|(u, l)| -(u - l) / (2.0 * d))
            .collect(),
        vectors: DMatrix::from_fn(n, n, |r, c| centre.vectors[(r, order[c])]),
    })
}

/// One point of the simulated displacement curve.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedDisplacement {
    pub ratio: f64,
    /// Branch populations after the ramp, adiabatic order.
    pub populations: Vec<f64>,
    /// Population-weighted moment `sum_k P_k mu_k` (J/T).
    pub moment: f64,
    /// Outward displacement `(1/2) moment b' t^2 / M` (m).
    pub absolute: f64,
    /// Displacement relative to the rf-free value.
    pub relative: f64,
}

fn simulate_point(
    spin: &SpinSystem,
    field: &FieldConfig,
    ratio: f64,
    t_drift: f64,
    settings: &PipelineSettings,
) -> Result<SimulatedDisplacement> {
    let peak = ratio * field.rf_omega;
    let dressed = field.with_rabi(peak);
    let branches = branch_moments(spin, &dressed, settings.slope_step, &settings.floquet)?;
    let state0 = SpinState::bare(spin, field, -spin.j())?;
    let ramp = RampProfile::new(settings.t_up, f64::MAX, 0.0, peak, settings.shape)?;
    // hold until the next full rf period, where the Floquet modes apply
    let t_end = next_period_boundary(field, settings.t_up);
    let psi = propagate_ramp_until(spin, &state0, &ramp, field, t_end, settings.tol)?;
    let populations = psi.populations_in(&branches.vectors);
    let moment: f64 = populations
        .iter()
        .zip(&branches.moments)
        .map(|(p, m)| p * m)
        .sum();
    Ok(SimulatedDisplacement {
        ratio,
        populations,
        moment,
        absolute: 0.5 * moment * field.gradient * t_drift * t_drift / spin.mass(),
        relative: f64::NAN,
    })
}

/// Ramps `|m = -J>` up in `settings.t_up`, projects onto the Floquet branches
/// and drifts each branch with its own moment. Relative values are normalized
/// by the same pipeline at `Omega = 0`.
pub fn simulated_displacement_curve(
    spin: &SpinSystem,
    ratio_grid: &[f64],
    field: &FieldConfig,
    t_drift: f64,
    settings: &PipelineSettings,
) -> Result<Vec<SimulatedDisplacement>> {
    field.validate()?;
    non_negative("t_drift", t_drift)?;
    positive("t_up", settings.t_up)?;
    for &r in ratio_grid {
        check_ratio(r)?;
    }
    let mut grid = vec![0.0];
    grid.extend_from_slice(ratio_grid);
    let points = sweep::try_map(&grid, |&r| {
        simulate_point(spin, field, r, t_drift, settings)
    })?;
    let reference = points[0].moment;
    if reference == 0.0 {
        return Err(Error::invalid("b_perp", "no magnetic moment without rf"));
    }
    Ok(points
        .into_iter()
        .skip(1)
        .map(|p| SimulatedDisplacement {
            relative: p.moment / reference,
            ..p
        })
        .collect())
}
