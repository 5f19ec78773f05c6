//! Spin dynamics through rf power ramps.
//!
//! The Rabi envelope rises over `t_up`, holds, and falls over `t_down`. The
//! state is propagated in the `|m>` basis along the rf axis; populations are
//! read out in the basis quantized along the static field.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::constants::CODATA;
use crate::dressed::{continue_branches, static_basis, FloquetOptions};
use crate::error::{finite, non_negative, positive, Error};
use crate::field::FieldConfig;
use crate::ode::{Dop853, Stepper};
use crate::schrodinger::{from_interleaved, to_interleaved, RotatingFrameSpin};
use crate::spin::SpinSystem;
use crate::sweep;
use crate::Result;

/// Steps per rf period enforced during propagation.
const STEPS_PER_PERIOD: f64 = 16.0;
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RampShape {
    #[default]
    Linear,
    /// `3s^2 - 2s^3`: zero slope at both ends.
    Smoothstep,
}

impl RampShape {
    /// `[s1, s2, s3]` with `S(u) = s1 u + s2 u^2 + s3 u^3`.
    fn coefficients(self) -> [f64; 3] {
        match self {
            RampShape::Linear => [1.0, 0.0, 0.0],
            RampShape::Smoothstep => [0.0, 3.0, -2.0],
        }
    }

    fn eval(self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let [a, b, c] = self.coefficients();
        u * (a + u * (b + u * c))
    }

    /// Coefficients of `tau -> S(alpha + beta tau)` in powers of `tau`.
    fn shifted(self, alpha: f64, beta: f64) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, s) in self.coefficients().into_iter().enumerate() {
            let k = i + 1;
            let mut binom = 1.0;
            for (j, o) in out.iter_mut().enumerate().take(k + 1) {
                *o += s * binom * alpha.powi((k - j) as i32) * beta.powi(j as i32);
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
        }
        out
    }
}

/// Up / hold / down envelope of the Rabi frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct RampProfile {
    pub t_up: f64,
    pub t_hold: f64,
    pub t_down: f64,
    /// Peak Rabi angular frequency (rad/s).
    pub omega_max: f64,
    pub shape: RampShape,
}

impl RampProfile {
    pub fn new(
        t_up: f64,
        t_hold: f64,
        t_down: f64,
        omega_max: f64,
        shape: RampShape,
    ) -> Result<Self> {
        let r = Self {
            t_up,
            t_hold,
            t_down,
            omega_max,
            shape,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("t_up", self.t_up)?;
        non_negative("t_hold", self.t_hold)?;
        non_negative("t_down", self.t_down)?;
        non_negative("omega_max", self.omega_max)?;
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.t_up + self.t_hold + self.t_down
    }

    /// Segment boundaries where the envelope has kinks.
    pub fn breakpoints(&self) -> [f64; 3] {
        [self.t_up, self.t_up + self.t_hold, self.duration()]
    }

    /// Rabi frequency at time `t`; zero before 0 and after the ramp.
    pub fn rabi_at(&self, t: f64) -> f64 {
        let [a, b, c] = self.breakpoints();
        if t < 0.0 || t >= c {
            0.0
        } else if t < a {
            self.omega_max * self.shape.eval(t / self.t_up)
        } else if t < b {
            self.omega_max
        } else {
            self.omega_max * self.shape.eval((c - t) / self.t_down)
        }
    }

    /// Dressing / undressing protocol of fixed total length: up in `t_up`,
    /// hold `total - t_up - tau`, down in `tau`.
    pub fn with_fixed_total(&self, tau: f64, total: f64) -> Result<Self> {
        let hold = total - self.t_up - tau;
        if hold < -1e-15 * total {
            return Err(Error::invalid(
                "tau",
                format!("ramp-down {tau:e} s exceeds the protocol length {total:e} s"),
            ));
        }
        Self::new(self.t_up, hold.max(0.0), tau, self.omega_max, self.shape)
    }
}

/// Envelope polynomial `Omega(start + tau) = sum c_k tau^k` on `[start, end]`.
#[derive(Clone, Copy, Debug)]
struct Segment {
    start: f64,
    end: f64,
    c: [f64; 4],
}

impl Segment {
    /// Antiderivative of `Omega(t) cos(wt)` at `t`, from repeated integration
    /// by parts (exact for cubics).
    fn antiderivative(&self, t: f64, w: f64) -> f64 {
        let x = t - self.start;
        let c = self.c;
        let p0 = c[0] + x * (c[1] + x * (c[2] + x * c[3]));
        let p1 = c[1] + x * (2.0 * c[2] + x * 3.0 * c[3]);
        let p2 = 2.0 * c[2] + 6.0 * c[3] * x;
        let p3 = 6.0 * c[3];
        let (s, co) = (w * t).sin_cos();
        s * (p0 / w - p2 / (w * w * w)) + co * (p1 / (w * w) - p3 / (w * w * w * w))
    }
}

/// Accumulated rf phase `phi(t) = int_0^t Omega(t') cos(wt') dt'` of a ramp.
#[derive(Clone, Debug)]
struct RfPhase {
    w: f64,
    segments: Vec<Segment>,
    /// Phase at the start of each segment.
    prefix: Vec<f64>,
}

impl RfPhase {
    /// Closed-form phase of `ramp` on `[0, horizon]`.
    fn new(ramp: &RampProfile, w: f64, horizon: f64) -> Self {
        let [a, b, c] = ramp.breakpoints();
        let om = ramp.omega_max;
        let candidates = [
            (0.0, a, ramp.shape.shifted(0.0, 1.0 / ramp.t_up)),
            (a, b, [om, 0.0, 0.0, 0.0]),
            (b, c, ramp.shape.shifted(1.0, -1.0 / ramp.t_down)),
        ];
        let mut segments = Vec::new();
        for (i, (start, end, poly)) in candidates.into_iter().enumerate() {
            if end.is_nan() || end <= start || start >= horizon {
                continue;
            }
            let c = if i == 1 { poly } else { poly.map(|x| x * om) };
            segments.push(Segment {
                start,
                end: end.min(horizon),
                c,
            });
        }
        let mut prefix = Vec::with_capacity(segments.len());
        let mut acc = 0.0;
        for s in &segments {
            prefix.push(acc);
            acc += s.antiderivative(s.end, w) - s.antiderivative(s.start, w);
        }
        Self {
            w,
            segments,
            prefix,
        }
    }

    fn at(&self, t: f64) -> f64 {
        let Some(i) = self.segments.iter().rposition(|s| s.start <= t) else {
            return 0.0;
        };
        let s = &self.segments[i];
        self.prefix[i] + s.antiderivative(t.min(s.end), self.w) - s.antiderivative(s.start, self.w)
    }
}

/// Normalized amplitudes over `|m>` (`m = -J..J`) along the rf axis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinState {
    amplitudes: Vec<Complex64>,
}

impl SpinState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let s = Self { amplitudes };
        let defect = (s.norm() - 1.0).abs();
        if defect.is_nan() || defect > NORM_TOLERANCE {
            return Err(Error::invalid(
                "amplitudes",
                format!("norm deviates from 1 by {defect:e}"),
            ));
        }
        Ok(s)
    }

    /// Normalizes arbitrary non-zero amplitudes.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::invalid("amplitudes", "must be finite and non-zero"));
        }
        Self::new(amplitudes.into_iter().map(|z| z / n).collect())
    }

    /// `|m>` quantized along the total static field.
    pub fn bare(spin: &SpinSystem, field: &FieldConfig, m: f64) -> Result<Self> {
        let k = spin.index_of(m).ok_or_else(|| {
            Error::invalid("m", format!("{m} is not a projection of spin {}", spin.j()))
        })?;
        let basis = static_basis(spin, field);
        Self::new(basis.column(k).iter().copied().collect())
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `|<b_k|psi>|^2` for the orthonormal columns `b_k` of `basis`.
    pub fn populations_in(&self, basis: &DMatrix<Complex64>) -> Vec<f64> {
        (0..basis.ncols())
            .map(|k| {
                basis
                    .column(k)
                    .iter()
                    .zip(&self.amplitudes)
                    .map(|(b, a)| b.conj() * a)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .collect()
    }

    /// Populations of `|m>` along the static field of `field`.
    pub fn static_populations(&self, spin: &SpinSystem, field: &FieldConfig) -> Vec<f64> {
        self.populations_in(&static_basis(spin, field))
    }

    /// `|<other|self>|^2`.
    pub fn overlap(&self, other: &SpinState) -> f64 {
        other
            .amplitudes
            .iter()
            .zip(&self.amplitudes)
            .map(|(b, a)| b.conj() * a)
            .sum::<Complex64>()
            .norm_sqr()
    }
}

/// Propagates `state0` through the full ramp.
pub fn propagate_ramp(
    spin: &SpinSystem,
    state0: &SpinState,
    ramp: &RampProfile,
    field: &FieldConfig,
    tol: f64,
) -> Result<SpinState> {
    propagate_ramp_until(spin, state0, ramp, field, ramp.duration(), tol)
}

/// Propagates `state0` under the ramp envelope from 0 to `t_end`.
pub fn propagate_ramp_until(
    spin: &SpinSystem,
    state0: &SpinState,
    ramp: &RampProfile,
    field: &FieldConfig,
    t_end: f64,
    tol: f64,
) -> Result<SpinState> {
    field.validate()?;
    ramp.validate()?;
    positive("tol", tol)?;
    non_negative("t_end", t_end)?;
    if state0.dim() != spin.dim() {
        return Err(Error::invalid(
            "state0",
            "dimension does not match the spin",
        ));
    }
    // integrate in the frame co-rotating with the rf phase
    let drive = RotatingFrameSpin::new(spin, field);
    let phase = RfPhase::new(ramp, field.rf_omega, t_end);
    let opts = Dop853::new(tol).with_max_step(field.rf_period() / STEPS_PER_PERIOD);
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| drive.derivative(phase.at(t), y, dy);
    let mut stepper = Stepper::new(opts, rhs, 0.0, &to_interleaved(state0.amplitudes()));
    for b in ramp.breakpoints() {
        if b > 0.0 && b < t_end {
            stepper.advance_to(b)?;
        }
    }
    stepper.advance_to(t_end)?;
    let mut amplitudes = from_interleaved(stepper.y());
    drive.to_lab(phase.at(t_end), &mut amplitudes);
    let out = SpinState { amplitudes };
    let drift = (out.norm() - 1.0).abs();
    if drift > 1e-9 {
        return Err(Error::invalid(
            "tol",
            format!("norm drifted by {drift:e}; tighten the integration tolerance"),
        ));
    }
    Ok(out)
}

/// Stern-Gerlach image of a state.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationReadout {
    pub m_values: Vec<f64>,
    pub populations: Vec<f64>,
    /// Displacement of each `m` component after the drift (m).
    pub positions: Vec<f64>,
}

/// Populations along the static field and the ballistic displacement of each
/// component in the gradient, `x_m = -(1/2) m gJ mu_B b' t^2 / M` (force
/// `-dV/dx` for `V = m gJ mu_B b' x`).
pub fn stern_gerlach_readout(
    state: &SpinState,
    field: &FieldConfig,
    t_drift: f64,
    spin: &SpinSystem,
) -> Result<PopulationReadout> {
    positive("t_drift", t_drift)?;
    field.validate()?;
    let m_values = spin.m_values();
    let accel = CODATA.mu_b * spin.g_j() * field.gradient / spin.mass();
    let positions = m_values
        .iter()
        .map(|m| -0.5 * m * accel * t_drift * t_drift)
        .collect();
    Ok(PopulationReadout {
        populations: state.static_populations(spin, field),
        m_values,
        positions,
    })
}

/// Landau-Zener adiabaticity ratio `w_par^2 dt / (3 w_perp)`; `>> 1` means adiabatic.
pub fn lz_criterion(b_par: f64, b_perp: f64, dt_ramp: f64, g_j: f64) -> Result<f64> {
    finite("b_par", b_par)?;
    positive("b_perp", b_perp.abs())?;
    positive("dt_ramp", dt_ramp)?;
    finite("g_j", g_j)?;
    let w = |b: f64| (g_j * CODATA.mu_b * b / CODATA.hbar).abs();
    Ok(w(b_par).powi(2) * dt_ramp / (3.0 * w(b_perp)))
}

/// One point of the dressing / undressing protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryPoint {
    pub tau: f64,
    /// Final populations along the static field, `m = -J..J`.
    pub populations: Vec<f64>,
}

impl RecoveryPoint {
    pub fn p_lowest(&self) -> f64 {
        self.populations[0]
    }

    pub fn p_highest(&self) -> f64 {
        *self.populations.last().expect("non-empty")
    }
}

/// Starts in `|m = -J>`, ramps up over `ramp_base.t_up`, holds, ramps down
/// over each `tau`, keeping the total `ramp_base.duration()` fixed.
pub fn recovery_probability_vs_tau(
    spin: &SpinSystem,
    tau_grid: &[f64],
    field: &FieldConfig,
    ramp_base: &RampProfile,
    tol: f64,
) -> Result<Vec<RecoveryPoint>> {
    let total = ramp_base.duration();
    let state0 = SpinState::bare(spin, field, -spin.j())?;
    sweep::try_map(tau_grid, |&tau| {
        let ramp = ramp_base.with_fixed_total(tau, total)?;
        let psi = propagate_ramp(spin, &state0, &ramp, field, tol)?;
        Ok(RecoveryPoint {
            tau,
            populations: psi.static_populations(spin, field),
        })
    })
}

/// First `tau` at which the recovered `|m = -J>` population rises through
/// 0.5, by linear interpolation on the grid.
pub fn crossover_tau(points: &[RecoveryPoint]) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let (a, b) = (w[0].p_lowest(), w[1].p_lowest());
        (a < 0.5 && b >= 0.5).then(|| w[0].tau + (0.5 - a) / (b - a) * (w[1].tau - w[0].tau))
    })
}

/// Populations of the Floquet branches at the peak of `field.rabi_omega`, in
/// adiabatic (energy-rank) order, entry 0 being the branch connected to the
/// initial `|m = -J>` for `gJ > 0`. `state` must be taken at an integer number
/// of rf periods.
pub fn dressed_populations(
    spin: &SpinSystem,
    field: &FieldConfig,
    state: &SpinState,
    opts: &FloquetOptions,
) -> Result<Vec<f64>> {
    let branches = continue_branches(spin, field, opts)?;
    let mut order = branches.adiabatic_order();
    if spin.g_j() < 0.0 {
        order.reverse();
    }
    let pops = state.populations_in(&branches.vectors);
    Ok(order.into_iter().map(|k| pops[k]).collect())
}

/// Time of the first integer rf period at or after `t`.
pub fn next_period_boundary(field: &FieldConfig, t: f64) -> f64 {
    let p = field.rf_period();
    let n = (t / p - 1e-9).ceil().max(0.0);
    n * p
}

/// Population left in the adiabatically continued branch after ramping up
/// over `ramp.t_up` to `ramp.omega_max`, for each `B_par`. The state is
/// projected at the first integer rf period after the ramp ends.
pub fn adiabatic_fraction_vs_bpar(
    spin: &SpinSystem,
    bpar_grid: &[f64],
    field: &FieldConfig,
    ramp: &RampProfile,
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    sweep::try_map(bpar_grid, |&b| {
        let f = field.with_b_par(b);
        Ok((b, adiabatic_fraction(spin, &f, ramp, tol)?))
    })
}

/// Single point of [`adiabatic_fraction_vs_bpar`].
pub fn adiabatic_fraction(
    spin: &SpinSystem,
    field: &FieldConfig,
    ramp: &RampProfile,
    tol: f64,
) -> Result<f64> {
    let up = RampProfile::new(ramp.t_up, f64::MAX, 0.0, ramp.omega_max, ramp.shape)?;
    let state0 = SpinState::bare(spin, field, -spin.j())?;
    let t_end = next_period_boundary(field, ramp.t_up);
    let psi = propagate_ramp_until(spin, &state0, &up, field, t_end, tol)?;
    let pops = dressed_populations(
        spin,
        &field.with_rabi(ramp.omega_max),
        &psi,
        &FloquetOptions::default(),
    )?;
    Ok(pops[0])
}
