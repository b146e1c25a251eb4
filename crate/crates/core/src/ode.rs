//! Fixed-step RK4 integration of 3-D autonomous and scalar-driven vector fields.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interference::ScalarSeries;

/// A point in 3-D phase space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State3 {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl State3 {
    pub const ZERO: State3 = State3 { x1: 0.0, x2: 0.0, x3: 0.0 };

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn norm(&self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3).sqrt()
    }

    pub fn distance(&self, other: &State3) -> f64 {
        (*self - *other).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }
}

impl From<[f64; 3]> for State3 {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl Add for State3 {
    type Output = State3;
    fn add(self, o: State3) -> State3 {
        State3::new(self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3)
    }
}

impl Sub for State3 {
    type Output = State3;
    fn sub(self, o: State3) -> State3 {
        State3::new(self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3)
    }
}

impl Mul<State3> for f64 {
    type Output = State3;
    fn mul(self, s: State3) -> State3 {
        State3::new(self * s.x1, self * s.x2, self * s.x3)
    }
}

/// Uniform sampling grid: sample `i` sits at `t0 + i * dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step must be positive and finite, got {dt}")));
        }
        if n == 0 {
            return Err(Error::Config("grid needs at least one sample".into()));
        }
        if !t0.is_finite() {
            return Err(Error::Config(format!("start time must be finite, got {t0}")));
        }
        Ok(Self { t0, dt, n })
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Total covered time span, `(n - 1) * dt`.
    pub fn span(&self) -> f64 {
        (self.n - 1) as f64 * self.dt
    }

    /// The grid that starts where this one ends (sample `n` of this grid is
    /// sample 0 of the next).
    pub fn following(&self, n: usize) -> Self {
        Self { t0: self.time(self.n), dt: self.dt, n }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<State3>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> State3 {
        *self.states.last().expect("trajectory is never empty")
    }

    /// Projects one coordinate onto a scalar series on the same grid.
    pub fn component(&self, index: usize) -> ScalarSeries {
        let values = self
            .states
            .iter()
            .map(|s| match index {
                0 => s.x1,
                1 => s.x2,
                2 => s.x3,
                _ => panic!("coordinate index {index} out of range"),
            })
            .collect();
        ScalarSeries { grid: self.grid, values }
    }
}

/// Autonomous (or explicitly time-dependent) vector field over `State3`.
pub trait VectorField: Sync {
    fn eval(&self, t: f64, s: State3) -> State3;
}

impl<F> VectorField for F
where
    F: Fn(f64, State3) -> State3 + Sync,
{
    fn eval(&self, t: f64, s: State3) -> State3 {
        self(t, s)
    }
}

/// Vector field that also reads one scalar drive sample.
pub trait DrivenField: Sync {
    fn eval(&self, t: f64, s: State3, drive: f64) -> State3;
}

/// How the drive value is reconstructed between two grid samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveHold {
    /// The sample at step start is held for the whole step.
    #[default]
    ZeroOrder,
    /// Linear interpolation toward the next sample (the last step holds).
    Linear,
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step<F: VectorField + ?Sized>(field: &F, s: State3, t: f64, dt: f64) -> Result<State3> {
    let next = rk4_raw(field, s, t, dt);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::Blowup { time: t, step: None })
    }
}

#[inline]
pub(crate) fn rk4_raw<F: VectorField + ?Sized>(field: &F, s: State3, t: f64, dt: f64) -> State3 {
    let h2 = 0.5 * dt;
    let k1 = field.eval(t, s);
    let k2 = field.eval(t + h2, s + h2 * k1);
    let k3 = field.eval(t + h2, s + h2 * k2);
    let k4 = field.eval(t + dt, s + dt * k3);
    s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

#[inline]
fn rk4_driven_raw<F: DrivenField + ?Sized>(
    field: &F,
    s: State3,
    t: f64,
    dt: f64,
    drive_start: f64,
    drive_mid: f64,
    drive_end: f64,
) -> State3 {
    let h2 = 0.5 * dt;
    let k1 = field.eval(t, s, drive_start);
    let k2 = field.eval(t + h2, s + h2 * k1, drive_mid);
    let k3 = field.eval(t + h2, s + h2 * k2, drive_mid);
    let k4 = field.eval(t + dt, s + dt * k3, drive_end);
    s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

pub fn integrate<F: VectorField + ?Sized>(field: &F, s0: State3, grid: TimeGrid) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(grid.n);
    states.push(s0);
    let mut s = s0;
    for i in 0..grid.n - 1 {
        let t = grid.time(i);
        s = rk4_raw(field, s, t, grid.dt);
        if !s.is_finite() {
            return Err(Error::Blowup { time: t, step: Some(i) });
        }
        states.push(s);
    }
    Ok(Trajectory { grid, states })
}

/// Advances `steps` RK4 steps and returns only the final state.
pub fn advance<F: VectorField + ?Sized>(field: &F, s0: State3, t0: f64, dt: f64, steps: usize) -> Result<State3> {
    let mut s = s0;
    for i in 0..steps {
        let t = t0 + i as f64 * dt;
        s = rk4_raw(field, s, t, dt);
        if !s.is_finite() {
            return Err(Error::Blowup { time: t, step: Some(i) });
        }
    }
    Ok(s)
}

/// Integrates a driven field over the drive's grid with zero-order hold.
///
/// Step `i` consumes exactly drive sample `i`; the trajectory has one state
/// per drive sample.
pub fn integrate_driven<F: DrivenField + ?Sized>(field: &F, s0: State3, drive: &ScalarSeries) -> Result<Trajectory> {
    integrate_driven_with(field, s0, drive, DriveHold::ZeroOrder)
}

pub fn integrate_driven_with<F: DrivenField + ?Sized>(
    field: &F,
    s0: State3,
    drive: &ScalarSeries,
    hold: DriveHold,
) -> Result<Trajectory> {
    let grid = drive.grid;
    let v = &drive.values;
    let mut states = Vec::with_capacity(grid.n);
    states.push(s0);
    let mut s = s0;
    for i in 0..grid.n - 1 {
        let t = grid.time(i);
        let (a, m, b) = match hold {
            DriveHold::ZeroOrder => (v[i], v[i], v[i]),
            DriveHold::Linear => (v[i], 0.5 * (v[i] + v[i + 1]), v[i + 1]),
        };
        s = rk4_driven_raw(field, s, t, grid.dt, a, m, b);
        if !s.is_finite() {
            return Err(Error::Blowup { time: t, step: Some(i) });
        }
        states.push(s);
    }
    Ok(Trajectory { grid, states })
}

/// Continues a driven integration past the last sample of a previous run:
/// returns the state after consuming every sample of `drive` from `s0`.
pub fn advance_driven<F: DrivenField + ?Sized>(field: &F, s0: State3, drive: &ScalarSeries) -> Result<State3> {
    let grid = drive.grid;
    let mut s = s0;
    for (i, &u) in drive.values.iter().enumerate() {
        let t = grid.time(i);
        s = rk4_driven_raw(field, s, t, grid.dt, u, u, u);
        if !s.is_finite() {
            return Err(Error::Blowup { time: t, step: Some(i) });
        }
    }
    Ok(s)
}

/// Integrates a drive system and a receiver coupled through the drive's
/// first coordinate as one 6-D system, so every RK4 stage of the receiver
/// sees the exact drive value of that stage.
pub fn integrate_coupled<D, R>(drive: &D, receiver: &R, x0: State3, y0: State3, grid: TimeGrid) -> Result<(Trajectory, Trajectory)>
where
    D: VectorField + ?Sized,
    R: DrivenField + ?Sized,
{
    let dt = grid.dt;
    let h2 = 0.5 * dt;
    let mut xs = Vec::with_capacity(grid.n);
    let mut ys = Vec::with_capacity(grid.n);
    let (mut x, mut y) = (x0, y0);
    xs.push(x);
    ys.push(y);
    for i in 0..grid.n - 1 {
        let t = grid.time(i);
        let kx1 = drive.eval(t, x);
        let ky1 = receiver.eval(t, y, x.x1);
        let (x2, y2) = (x + h2 * kx1, y + h2 * ky1);
        let kx2 = drive.eval(t + h2, x2);
        let ky2 = receiver.eval(t + h2, y2, x2.x1);
        let (x3, y3) = (x + h2 * kx2, y + h2 * ky2);
        let kx3 = drive.eval(t + h2, x3);
        let ky3 = receiver.eval(t + h2, y3, x3.x1);
        let (x4, y4) = (x + dt * kx3, y + dt * ky3);
        let kx4 = drive.eval(t + dt, x4);
        let ky4 = receiver.eval(t + dt, y4, x4.x1);
        x = x + (dt / 6.0) * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
        y = y + (dt / 6.0) * (ky1 + 2.0 * ky2 + 2.0 * ky3 + ky4);
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Blowup { time: t, step: Some(i) });
        }
        xs.push(x);
        ys.push(y);
    }
    Ok((Trajectory { grid, states: xs }, Trajectory { grid, states: ys }))
}
