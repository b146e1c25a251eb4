#![allow(dead_code)]

use chaos_denoise::interference::ScalarSeries;
use chaos_denoise::models::{drive_field, CouplingVariant, LorenzDrive, LorenzParams};
use chaos_denoise::ode::{advance, integrate, State3, TimeGrid, Trajectory};

pub const DT: f64 = 1e-3;

pub fn lorenz() -> LorenzDrive {
    drive_field(LorenzParams::standard(), CouplingVariant::Standard)
}

/// A state on the attractor, reached from (1, 1, 1) after `warmup` steps.
pub fn on_attractor(warmup: usize) -> State3 {
    advance(&lorenz(), State3::new(1.0, 1.0, 1.0), 0.0, DT, warmup).unwrap()
}

pub fn attractor(n: usize) -> Trajectory {
    integrate(&lorenz(), on_attractor(10_000), TimeGrid::new(0.0, DT, n).unwrap()).unwrap()
}

pub fn sine(n: usize, amplitude: f64, freq: f64) -> ScalarSeries {
    let g = TimeGrid::new(0.0, DT, n).unwrap();
    let values = (0..n).map(|i| amplitude * (std::f64::consts::TAU * freq * g.time(i)).sin()).collect();
    ScalarSeries::new(g, values).unwrap()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) }
}

/// Maximum error at time `t_end` of RK4 on x'' = -x from (1, 0).
pub fn oscillator_error(dt: f64, t_end: f64) -> f64 {
    let field = |_t: f64, s: State3| State3::new(s.x2, -s.x1, 0.0);
    let steps = (t_end / dt).round() as usize;
    let end = advance(&field, State3::new(1.0, 0.0, 0.0), 0.0, dt, steps).unwrap();
    let t = steps as f64 * dt;
    (end.x1 - t.cos()).abs().max((end.x2 + t.sin()).abs())
}
