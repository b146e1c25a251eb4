mod common;

use chaos_denoise::interference::ScalarSeries;
use chaos_denoise::models::{response_field, CouplingVariant, LorenzParams};
use chaos_denoise::ode::{
    advance_driven, integrate, integrate_coupled, integrate_driven, integrate_driven_with, DriveHold, State3,
    TimeGrid,
};
use common::*;

#[test]
fn rk4_is_fourth_order() {
    let errs: Vec<f64> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&dt| oscillator_error(dt, 10.0)).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 4.0).abs() < 0.2, "observed order {order}");
    }
}

#[test]
fn integration_is_deterministic() {
    let a = attractor(20_000);
    let b = attractor(20_000);
    assert_eq!(a.states, b.states);
}

#[test]
fn lorenz_stays_bounded() {
    let tr = attractor(100_000);
    let max = tr.states.iter().map(|s| s.norm()).fold(0.0, f64::max);
    assert!(max < 200.0, "max norm {max}");
    assert!(tr.states.iter().all(|s| s.is_finite()));
}

#[test]
fn coupled_receiver_started_on_the_drive_copies_it() {
    let p = LorenzParams::standard();
    let x0 = on_attractor(5_000);
    let g = TimeGrid::new(0.0, DT, 5_000).unwrap();
    let (x, y) = integrate_coupled(&lorenz(), &response_field(p, CouplingVariant::Standard), x0, x0, g).unwrap();
    assert_eq!(x.states, y.states);
}

#[test]
fn sampled_drive_keeps_receiver_close() {
    let tr = attractor(20_000);
    let resp = response_field(LorenzParams::standard(), CouplingVariant::Standard);
    for hold in [DriveHold::ZeroOrder, DriveHold::Linear] {
        let y = integrate_driven_with(&resp, tr.states[0], &tr.component(0), hold).unwrap();
        let worst = y.states.iter().zip(&tr.states).map(|(a, b)| a.distance(b)).fold(0.0, f64::max);
        assert!(worst < 0.5, "{hold:?}: {worst}");
    }
}

#[test]
fn driven_runs_agree_with_their_endpoint() {
    let tr = attractor(3_000);
    let resp = response_field(LorenzParams::standard(), CouplingVariant::Standard);
    let s = tr.component(0);
    let y0 = State3::new(3.0, -2.0, 40.0);
    let full = integrate_driven(&resp, y0, &s).unwrap();
    assert_eq!(full.len(), s.len());
    // advancing consumes every sample, so stop one short to land on the last state
    let head = ScalarSeries::new(TimeGrid::new(0.0, DT, s.len() - 1).unwrap(), s.values[..s.len() - 1].to_vec()).unwrap();
    assert_eq!(advance_driven(&resp, y0, &head).unwrap(), full.last());
}

#[test]
fn zero_drive_decays_to_origin() {
    let g = TimeGrid::new(0.0, DT, 20_000).unwrap();
    let resp = response_field(LorenzParams::standard(), CouplingVariant::Standard);
    let y = integrate_driven(&resp, State3::new(5.0, 5.0, 5.0), &ScalarSeries::zeros(g)).unwrap();
    assert!(y.last().norm() < 1e-6, "{:?}", y.last());
}

#[test]
fn time_grid_is_exact_in_index() {
    let g = TimeGrid::new(2.0, 1e-3, 5_001).unwrap();
    assert_eq!(g.time(0), 2.0);
    assert!((g.time(5_000) - 7.0).abs() < 1e-12);
    let tr = integrate(&lorenz(), on_attractor(0), g).unwrap();
    assert_eq!(tr.len(), 5_001);
}
