//! Explicit time integration (forward Euler, two-stage Runge–Kutta) and
//! CFL-based time step selection.

use crate::error::{IcapError, Result};
use crate::flowfields::FaceVelocity;
use crate::grid::CellField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    Euler,
    /// Heun / explicit trapezoidal rule.
    Rk2,
    /// Explicit midpoint rule.
    Rk2Midpoint,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Euler => "euler",
            Integrator::Rk2 => "rk2",
            Integrator::Rk2Midpoint => "rk2-midpoint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeControl {
    pub cfl: f64,
    pub t_end: f64,
    pub scheme: Integrator,
}

impl TimeControl {
    pub fn new(cfl: f64, t_end: f64, scheme: Integrator) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(IcapError::Config(format!("Courant number must lie in (0, 1], got {cfl}")));
        }
        if !(t_end >= 0.0) || !t_end.is_finite() {
            return Err(IcapError::Config(format!("final time must be finite and >= 0, got {t_end}")));
        }
        Ok(Self { cfl, t_end, scheme })
    }
}

/// `Δt = ν h / max |face mean|`.
pub fn dt_from_cfl(v: &FaceVelocity, nu: f64) -> Result<f64> {
    let speed = v.max_speed();
    if !(speed > 0.0) {
        return Err(IcapError::NoTransport);
    }
    Ok(nu * v.grid().h / speed)
}

/// State vector of a semi-discrete system.
pub trait OdeState: Clone {
    /// `self += a * other`.
    fn axpy(&mut self, a: f64, other: &Self);
    fn is_finite(&self) -> bool;
}

impl OdeState for CellField {
    fn axpy(&mut self, a: f64, other: &Self) {
        CellField::axpy(self, a, other)
    }

    fn is_finite(&self) -> bool {
        CellField::is_finite(self)
    }
}

impl OdeState for Vec<f64> {
    fn axpy(&mut self, a: f64, other: &Self) {
        self.iter_mut().zip(other).for_each(|(s, o)| *s += a * o);
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

/// A semi-discrete right-hand side. Implementations refresh any boundary
/// data of `state` (ghost cells) before evaluating.
pub trait RateOperator<S> {
    fn rate(&self, state: &mut S, t: f64, out: &mut S) -> Result<()>;
}

impl<S, F> RateOperator<S> for F
where
    F: Fn(&mut S, f64, &mut S) -> Result<()>,
{
    fn rate(&self, state: &mut S, t: f64, out: &mut S) -> Result<()> {
        self(state, t, out)
    }
}

/// Scratch buffers for one integrator step.
pub struct Stepper<S> {
    k1: S,
    k2: S,
    stage: S,
}

impl<S: OdeState> Stepper<S> {
    pub fn new(template: &S) -> Self {
        Self { k1: template.clone(), k2: template.clone(), stage: template.clone() }
    }

    /// Advances `state` from `t` to `t + dt`.
    pub fn step<R: RateOperator<S>>(
        &mut self,
        scheme: Integrator,
        op: &R,
        state: &mut S,
        t: f64,
        dt: f64,
    ) -> Result<()> {
        match scheme {
            Integrator::Euler => {
                op.rate(state, t, &mut self.k1)?;
                state.axpy(dt, &self.k1);
            }
            Integrator::Rk2 => {
                op.rate(state, t, &mut self.k1)?;
                self.stage.clone_from(state);
                self.stage.axpy(dt, &self.k1);
                op.rate(&mut self.stage, t + dt, &mut self.k2)?;
                state.axpy(0.5 * dt, &self.k1);
                state.axpy(0.5 * dt, &self.k2);
            }
            Integrator::Rk2Midpoint => {
                op.rate(state, t, &mut self.k1)?;
                self.stage.clone_from(state);
                self.stage.axpy(0.5 * dt, &self.k1);
                op.rate(&mut self.stage, t + 0.5 * dt, &mut self.k2)?;
                state.axpy(dt, &self.k2);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvanceSummary {
    pub steps: usize,
    pub t_final: f64,
}

/// Integrates from `t0` to `tc.t_end` with nominal step `dt`.
///
/// Steps are shortened to land exactly on every requested snapshot time and
/// on `t_end`. `on_step(t, state, is_snapshot)` is called after every
/// accepted step, and once at `t0` (flagged as a snapshot if `t0` is one).
/// A non-finite state aborts with [`IcapError::Instability`], leaving `state`
/// at the last finite value.
pub fn advance<S, R>(
    state: &mut S,
    t0: f64,
    op: &R,
    tc: &TimeControl,
    dt: f64,
    snapshots: &[f64],
    mut on_step: impl FnMut(f64, &S, bool),
) -> Result<AdvanceSummary>
where
    S: OdeState,
    R: RateOperator<S>,
{
    if !(dt > 0.0) {
        return Err(IcapError::Config(format!("time step must be positive, got {dt}")));
    }
    let mut marks: Vec<f64> = snapshots
        .iter()
        .copied()
        .filter(|&s| s > t0 && s < tc.t_end)
        .collect();
    marks.push(tc.t_end);
    marks.sort_by(|a, b| a.total_cmp(b));
    marks.dedup();
    let is_snap = |t: f64| snapshots.contains(&t);

    let mut stepper = Stepper::new(state);
    let mut last_good = state.clone();
    let mut t = t0;
    let mut steps = 0usize;
    on_step(t, state, is_snap(t));

    for &target in &marks {
        while t < target {
            // avoid a sliver step from round-off in the accumulated time
            let remaining = target - t;
            let (h, lands) = if remaining <= dt * (1.0 + 1e-10) { (remaining, true) } else { (dt, false) };
            last_good.clone_from(state);
            stepper.step(tc.scheme, op, state, t, h)?;
            steps += 1;
            t = if lands { target } else { t + h };
            if !state.is_finite() {
                state.clone_from(&last_good);
                return Err(IcapError::Instability { time: t, step: steps });
            }
            on_step(t, state, lands && is_snap(t));
        }
    }
    Ok(AdvanceSummary { steps, t_final: t })
}
