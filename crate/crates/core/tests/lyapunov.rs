mod common;

use chaos_denoise::lyapunov::{lyapunov_benettin, lyapunov_wolf, BenettinConfig, EmbeddingSpec, WolfConfig};
use chaos_denoise::models::{drive_field, CouplingVariant, LorenzParams};
use chaos_denoise::ode::State3;
use common::*;

fn benettin(cfg: BenettinConfig) -> f64 {
    lyapunov_benettin(&lorenz(), State3::new(1.0, 1.0, 1.0), &cfg).unwrap().lambda_max
}

#[test]
fn benettin_ignores_its_tuning_knobs() {
    let base = benettin(BenettinConfig::default());
    let half = benettin(BenettinConfig { delta0: 5e-9, ..BenettinConfig::default() });
    let sparse = benettin(BenettinConfig { renorm_every: 20, ..BenettinConfig::default() });
    for v in [half, sparse] {
        assert!((v / base - 1.0).abs() < 0.02, "{v} vs {base}");
    }
}

#[test]
fn benettin_is_reproducible() {
    assert_eq!(benettin(BenettinConfig::default()), benettin(BenettinConfig::default()));
}

#[test]
fn printed_parameters_are_not_chaotic() {
    let field = drive_field(LorenzParams::as_printed(), CouplingVariant::AsPrinted);
    let est = lyapunov_benettin(&field, State3::new(1.0, 1.0, 1.0), &BenettinConfig::default()).unwrap();
    assert!(est.lambda_max < 0.05, "{est:?}");
}

fn fixed_wolf(n: usize, warmup: usize) -> f64 {
    let x = chaos_denoise::ode::integrate(
        &lorenz(),
        on_attractor(warmup),
        chaos_denoise::ode::TimeGrid::new(0.0, DT, n).unwrap(),
    )
    .unwrap()
    .component(0);
    let mut cfg = WolfConfig::for_series(&x);
    cfg.embedding = EmbeddingSpec { dimension: 3, delay: 100 };
    cfg.evolve_steps = 100;
    cfg.theiler_window = 200;
    lyapunov_wolf(&x, &cfg).unwrap().lambda_max
}

#[test]
fn wolf_settles_as_series_grow() {
    let short = median((0..3).map(|k| fixed_wolf(20_000, 10_000 + 7_000 * k)).collect());
    let long = median((0..3).map(|k| fixed_wolf(60_000, 10_000 + 7_000 * k)).collect());
    eprintln!("median wolf: 2e4 -> {short:.3}, 6e4 -> {long:.3}");
    assert!((long - 1.4).abs() <= (short - 1.4).abs() + 0.1);
    assert!((long / 1.4 - 1.0).abs() < 0.35, "{long}");
}

#[test]
fn wolf_sign_matches_dynamics() {
    let chaotic = attractor(30_000).component(0);
    let est = lyapunov_wolf(&chaotic, &WolfConfig::for_series(&chaotic)).unwrap();
    assert!(est.lambda_max > 0.5, "{est:?}");
    let periodic = sine(30_000, 10.0, 3.0);
    let est = lyapunov_wolf(&periodic, &WolfConfig::for_series(&periodic)).unwrap();
    assert!(est.lambda_max.abs() < 0.05, "{est:?}");
}
