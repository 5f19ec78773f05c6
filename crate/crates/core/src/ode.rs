//! Adaptive explicit Runge-Kutta integration (Dormand-Prince 8(5,3)).
//!
//! States are flat `f64` slices; complex amplitudes are stored as interleaved
//! `(re, im)` pairs by the callers.

use thiserror::Error;

use crate::ode_tableau::{A, B, C, E3, E5, STAGES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("exceeded {max} steps at t = {t:e}")]
    TooManySteps { t: f64, max: usize },
    #[error("non-finite state at t = {t:e}")]
    NonFinite { t: f64 },
    #[error("cannot integrate backwards from t = {from:e} to t = {to:e}")]
    Backwards { from: f64, to: f64 },
}

#[derive(Clone, Debug)]
pub struct Dop853 {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step, e.g. a fraction of a drive period.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Dop853 {
    pub fn new(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_step: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1` in place.
    pub fn integrate<F>(&self, f: F, t0: f64, t1: f64, y: &mut [f64]) -> Result<Stats, OdeError>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let mut stepper = Stepper::new(self.clone(), f, t0, y);
        stepper.advance_to(t1)?;
        y.copy_from_slice(stepper.y());
        Ok(stepper.stats())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Stateful integrator that keeps its step size between `advance_to` calls.
pub struct Stepper<F> {
    opts: Dop853,
    f: F,
    t: f64,
    y: Vec<f64>,
    h: Option<f64>,
    k: Vec<Vec<f64>>,
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
    stats: Stats,
    fresh: bool,
}

impl<F> Stepper<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    pub fn new(opts: Dop853, f: F, t0: f64, y0: &[f64]) -> Self {
        let n = y0.len();
        Self {
            opts,
            f,
            t: t0,
            y: y0.to_vec(),
            h: None,
            k: vec![vec![0.0; n]; STAGES + 1],
            ytmp: vec![0.0; n],
            ynew: vec![0.0; n],
            stats: Stats::default(),
            fresh: true,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Replaces the state (e.g. after renormalization) without touching the step size.
    pub fn set_state(&mut self, y: &[f64]) {
        self.y.copy_from_slice(y);
        self.fresh = true;
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    pub fn advance_to(&mut self, t_target: f64) -> Result<(), OdeError> {
        self.advance_observed(t_target, |_, _| {})
    }

    /// Advances to `t_target`, calling `observe(t, y)` after every accepted step.
    pub fn advance_observed<O>(&mut self, t_target: f64, mut observe: O) -> Result<(), OdeError>
    where
        O: FnMut(f64, &[f64]),
    {
        if t_target < self.t {
            return Err(OdeError::Backwards {
                from: self.t,
                to: t_target,
            });
        }
        if t_target == self.t {
            return Ok(());
        }
        if self.fresh {
            (self.f)(self.t, &self.y, &mut self.k[0]);
            self.stats.evaluations += 1;
            self.fresh = false;
        }
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(t_target),
        };
        let exponent = -1.0 / 8.0;
        let mut rejected_last = false;
        while self.t < t_target {
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(OdeError::TooManySteps {
                    t: self.t,
                    max: self.opts.max_steps,
                });
            }
            h = h.min(self.opts.max_step);
            let remaining = t_target - self.t;
            if remaining <= 100.0 * f64::EPSILON * self.t.abs() {
                // rounding residue of the previous step
                self.t = t_target;
                break;
            }
            // stretch a step that would stop just short of the target
            let clipped = h * 1.01 >= remaining;
            let step = if clipped { remaining } else { h };
            if step < 10.0 * f64::EPSILON * self.t.abs().max(f64::MIN_POSITIVE) {
                return Err(OdeError::StepSizeUnderflow { t: self.t, h: step });
            }
            let err = self.try_step(step);
            if !err.is_finite() {
                // shrink and retry, a blow-up usually means an oversized step
                h = step * 0.2;
                self.stats.rejected += 1;
                rejected_last = true;
                if h < 10.0 * f64::EPSILON * self.t.abs().max(f64::MIN_POSITIVE) {
                    return Err(OdeError::NonFinite { t: self.t });
                }
                continue;
            }
            if err <= 1.0 {
                self.t = if clipped { t_target } else { self.t + step };
                std::mem::swap(&mut self.y, &mut self.ynew);
                self.k.swap(0, STAGES);
                self.stats.accepted += 1;
                observe(self.t, &self.y);
                let mut factor = if err == 0.0 {
                    10.0
                } else {
                    (0.9 * err.powf(exponent)).min(10.0)
                };
                if rejected_last {
                    factor = factor.min(1.0);
                }
                rejected_last = false;
                // keep the untruncated step when the last step was only clipped
                h = if clipped {
                    h.max(step * factor)
                } else {
                    step * factor
                };
            } else {
                self.stats.rejected += 1;
                rejected_last = true;
                h = step * (0.9 * err.powf(exponent)).max(0.2);
            }
        }
        self.h = Some(h);
        Ok(())
    }

    /// Computes a trial step into `ynew` and returns the scaled error norm.
    fn try_step(&mut self, h: f64) -> f64 {
        let n = self.y.len();
        for s in 1..STAGES {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, a) in A[s][..s].iter().enumerate() {
                    if *a != 0.0 {
                        acc += a * self.k[j][i];
                    }
                }
                self.ytmp[i] = self.y[i] + h * acc;
            }
            (self.f)(self.t + C[s] * h, &self.ytmp, &mut self.k[s]);
        }
        for i in 0..n {
            let mut acc = 0.0;
            for (j, b) in B.iter().enumerate() {
                if *b != 0.0 {
                    acc += b * self.k[j][i];
                }
            }
            self.ynew[i] = self.y[i] + h * acc;
        }
        (self.f)(self.t + h, &self.ynew, &mut self.k[STAGES]);
        self.stats.evaluations += STAGES;

        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..n {
            let scale = self.opts.atol + self.opts.rtol * self.y[i].abs().max(self.ynew[i].abs());
            let mut e5 = 0.0;
            let mut e3 = 0.0;
            for j in 0..=STAGES {
                e5 += E5[j] * self.k[j][i];
                e3 += E3[j] * self.k[j][i];
            }
            err5 += (e5 / scale).powi(2);
            err3 += (e3 / scale).powi(2);
        }
        if err5 == 0.0 && err3 == 0.0 {
            return 0.0;
        }
        h * err5 / ((err5 + 0.01 * err3) * n as f64).sqrt()
    }

    fn initial_step(&mut self, t_target: f64) -> f64 {
        let n = self.y.len() as f64;
        let scale = |y: f64| self.opts.atol + self.opts.rtol * y.abs();
        let d0 = (self.y.iter().map(|&y| (y / scale(y)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (self
            .y
            .iter()
            .zip(&self.k[0])
            .map(|(&y, &f)| (f / scale(y)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6 * (t_target - self.t)
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(t_target - self.t).min(self.opts.max_step);
        for i in 0..self.y.len() {
            self.ytmp[i] = self.y[i] + h0 * self.k[0][i];
        }
        let mut f1 = vec![0.0; self.y.len()];
        (self.f)(self.t + h0, &self.ytmp, &mut f1);
        self.stats.evaluations += 1;
        let d2 = (f1
            .iter()
            .zip(&self.k[0])
            .zip(&self.y)
            .map(|((a, b), &y)| ((a - b) / scale(y)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
            / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6 * h0)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut y = [1.0];
        let stats = Dop853::new(1e-12)
            .integrate(|_, y, dy| dy[0] = -y[0], 0.0, 5.0, &mut y)
            .unwrap();
        assert!((y[0] - (-5f64).exp()).abs() < 1e-12);
        assert!(stats.accepted > 0);
    }

    #[test]
    fn harmonic_oscillator_long_run() {
        // 100 periods of x'' = -x
        let mut y = [1.0, 0.0];
        let t1 = 200.0 * std::f64::consts::PI;
        Dop853::new(1e-12)
            .integrate(
                |_, y, dy| {
                    dy[0] = y[1];
                    dy[1] = -y[0];
                },
                0.0,
                t1,
                &mut y,
            )
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9, "{}", y[0]);
        assert!(y[1].abs() < 1e-9);
    }

    #[test]
    fn stepper_hits_intermediate_targets() {
        let mut s = Stepper::new(
            Dop853::new(1e-12),
            |t, _y: &[f64], dy: &mut [f64]| dy[0] = t.cos(),
            0.0,
            &[0.0],
        );
        for k in 1..=10 {
            let t = 0.37 * k as f64;
            s.advance_to(t).unwrap();
            assert_eq!(s.t(), t);
            assert!((s.y()[0] - t.sin()).abs() < 1e-11);
        }
    }

    #[test]
    fn respects_max_step() {
        let mut count = 0;
        let mut s = Stepper::new(
            Dop853::new(1e-6).with_max_step(0.01),
            |_, _y: &[f64], dy: &mut [f64]| dy[0] = 1.0,
            0.0,
            &[0.0],
        );
        s.advance_observed(1.0, |_, _| count += 1).unwrap();
        assert!(count >= 100);
    }

    #[test]
    fn backwards_is_rejected() {
        let mut s = Stepper::new(
            Dop853::new(1e-6),
            |_, _y: &[f64], dy: &mut [f64]| dy[0] = 1.0,
            1.0,
            &[0.0],
        );
        assert!(matches!(s.advance_to(0.0), Err(OdeError::Backwards { .. })));
    }

    #[test]
    fn step_limit_reports_failure() {
        let mut opts = Dop853::new(1e-12);
        opts.max_steps = 5;
        let mut y = [1.0, 0.0];
        let r = opts.integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            1000.0,
            &mut y,
        );
        assert!(matches!(r, Err(OdeError::TooManySteps { .. })));
    }
}
