//! Scalar series, interference generators, DC translation and the SNR metric.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::TimeGrid;

/// Uniformly sampled scalar signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSeries {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl ScalarSeries {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::GridMismatch(format!(
                "grid has {} samples but {} values were given",
                grid.n,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Config(format!("series value at index {i} is not finite")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self { grid, values: vec![0.0; grid.n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sum of squares.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    fn check_same_grid(&self, other: &ScalarSeries) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    None,
    Uniform,
    Sine,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(NoiseKind::None),
            "uniform" => Ok(NoiseKind::Uniform),
            "sine" => Ok(NoiseKind::Sine),
            other => Err(Error::Config(format!("unknown noise kind '{other}' (none, uniform, sine)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    /// Uniform: half-width of the support. Sine: peak amplitude.
    pub amplitude: f64,
    /// Hz, sine only.
    pub frequency: f64,
    /// Radians, sine only.
    pub phase: f64,
    /// Uniform only.
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { kind: NoiseKind::None, amplitude: 0.0, frequency: 50.0, phase: 0.0, seed: 0 }
    }
}

impl NoiseSpec {
    pub fn uniform(amplitude: f64, seed: u64) -> Self {
        Self { kind: NoiseKind::Uniform, amplitude, seed, ..Self::default() }
    }

    pub fn sine(amplitude: f64, frequency: f64, phase: f64) -> Self {
        Self { kind: NoiseKind::Sine, amplitude, frequency, phase, ..Self::default() }
    }

    /// Mean power (mean square) of the interference in the long-run limit.
    pub fn mean_power(&self) -> f64 {
        match self.kind {
            NoiseKind::None => 0.0,
            NoiseKind::Uniform => self.amplitude * self.amplitude / 3.0,
            NoiseKind::Sine => self.amplitude * self.amplitude / 2.0,
        }
    }

    /// Same spec with the amplitude rescaled so that its long-run mean power
    /// equals `power`.
    pub fn with_mean_power(self, power: f64) -> Self {
        let amplitude = match self.kind {
            NoiseKind::None => 0.0,
            NoiseKind::Uniform => (3.0 * power).sqrt(),
            NoiseKind::Sine => (2.0 * power).sqrt(),
        };
        Self { amplitude, ..self }
    }
}

pub fn generate_noise(spec: &NoiseSpec, grid: TimeGrid) -> Result<ScalarSeries> {
    if !(spec.amplitude >= 0.0 && spec.amplitude.is_finite()) {
        return Err(Error::Config(format!("noise amplitude must be a finite value >= 0, got {}", spec.amplitude)));
    }
    let a = spec.amplitude;
    let values = match spec.kind {
        NoiseKind::None => vec![0.0; grid.n],
        NoiseKind::Uniform => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            if a == 0.0 {
                vec![0.0; grid.n]
            } else {
                (0..grid.n).map(|_| rng.gen_range(-a..=a)).collect()
            }
        }
        NoiseKind::Sine => {
            let w = 2.0 * std::f64::consts::PI * spec.frequency;
            (0..grid.n).map(|i| a * (w * grid.time(i) + spec.phase).sin()).collect()
        }
    };
    Ok(ScalarSeries { grid, values })
}

pub fn add_series(a: &ScalarSeries, b: &ScalarSeries) -> Result<ScalarSeries> {
    a.check_same_grid(b)?;
    let values = a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect();
    Ok(ScalarSeries { grid: a.grid, values })
}

pub fn sub_series(a: &ScalarSeries, b: &ScalarSeries) -> Result<ScalarSeries> {
    a.check_same_grid(b)?;
    let values = a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect();
    Ok(ScalarSeries { grid: a.grid, values })
}

/// Shifts every sample by the constant offset `d`.
pub fn add_dc(u: &ScalarSeries, d: f64) -> ScalarSeries {
    u.map(|v| v + d)
}

/// +1 for non-negative values (zero included), -1 otherwise.
#[inline]
pub fn sign_of(value: f64) -> f64 {
    if value >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// `10 log10(sum s^2 / sum u^2)` in dB.
///
/// Returns `f64::INFINITY` when the noise has zero power; callers report that
/// case as "clean" (see [`format_snr`]).
pub fn snr_db(signal: &ScalarSeries, noise: &ScalarSeries) -> Result<f64> {
    signal.check_same_grid(noise)?;
    let pn = noise.energy();
    if pn == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (signal.energy() / pn).log10())
}

pub fn format_snr(db: f64) -> String {
    if db == f64::INFINITY {
        "clean".to_string()
    } else {
        format!("{db:.17e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::new(0.0, 1e-3, n).unwrap()
    }

    fn ramp(n: usize) -> ScalarSeries {
        ScalarSeries::new(grid(n), (0..n).map(|i| (i as f64 * 0.37).sin() * 5.0 + 1.0).collect()).unwrap()
    }

    #[test]
    fn none_is_all_zero() {
        let s = generate_noise(&NoiseSpec::default(), grid(17)).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn whole_period_sine_has_zero_mean() {
        // 1000 samples at 1 ms = 1 s; 50 Hz covers 50 full periods
        let s = generate_noise(&NoiseSpec::sine(1.0, 50.0, 0.0), grid(1000)).unwrap();
        assert!(s.mean().abs() < 1e-9, "mean {}", s.mean());
    }

    #[test]
    fn uniform_moments() {
        let s = generate_noise(&NoiseSpec::uniform(1.0, 7), grid(100_000)).unwrap();
        let m = s.mean();
        let var = s.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (s.len() - 1) as f64;
        assert!(m.abs() < 0.02);
        assert!((var - 1.0 / 3.0).abs() < 0.05 / 3.0, "variance {var}");
        assert!(s.values.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn uniform_is_seeded() {
        let a = generate_noise(&NoiseSpec::uniform(2.0, 42), grid(500)).unwrap();
        let b = generate_noise(&NoiseSpec::uniform(2.0, 42), grid(500)).unwrap();
        let c = generate_noise(&NoiseSpec::uniform(2.0, 43), grid(500)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn negative_amplitude_rejected() {
        assert!(generate_noise(&NoiseSpec::uniform(-1.0, 0), grid(5)).is_err());
    }

    #[test]
    fn addition_laws() {
        let a = ramp(64);
        let b = generate_noise(&NoiseSpec::uniform(3.0, 1), grid(64)).unwrap();
        assert_eq!(add_series(&a, &ScalarSeries::zeros(a.grid)).unwrap(), a);
        assert_eq!(add_series(&a, &b).unwrap(), add_series(&b, &a).unwrap());
        let back = sub_series(&add_series(&a, &b).unwrap(), &b).unwrap();
        for (x, y) in back.values.iter().zip(&a.values) {
            assert!((x - y).abs() <= 8.0 * f64::EPSILON * (1.0 + y.abs()));
        }
        assert!(add_series(&a, &ramp(10)).is_err());
    }

    #[test]
    fn dc_offset() {
        let u = generate_noise(&NoiseSpec::uniform(2.0, 3), grid(5000)).unwrap();
        assert_eq!(add_dc(&u, 0.0), u);
        let v = add_dc(&u, 2.0);
        assert!(v.values.iter().all(|&x| x >= 0.0));
        assert!((v.mean() - (u.mean() + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn sign_convention() {
        assert_eq!(sign_of(0.0), 1.0);
        assert_eq!(sign_of(3.7), 1.0);
        assert_eq!(sign_of(-1e-12), -1.0);
    }

    #[test]
    fn snr_identities() {
        let s = ramp(200);
        assert_eq!(snr_db(&s, &s).unwrap(), 0.0);
        let scaled = s.map(|v| v / 10f64.sqrt());
        assert!((snr_db(&s, &scaled).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(snr_db(&s, &ScalarSeries::zeros(s.grid)).unwrap(), f64::INFINITY);
        assert_eq!(format_snr(f64::INFINITY), "clean");
    }

    proptest! {
        #[test]
        fn snr_scales_with_noise_amplitude(alpha in 0.01f64..100.0, seed in any::<u64>()) {
            let s = ramp(300);
            let u = generate_noise(&NoiseSpec::uniform(1.0, seed), s.grid).unwrap();
            let base = snr_db(&s, &u).unwrap();
            let scaled = snr_db(&s, &u.map(|v| alpha * v)).unwrap();
            prop_assert!((scaled - (base - 20.0 * alpha.log10())).abs() < 1e-9);
        }

        #[test]
        fn dc_shifts_every_sample(d in -10.0f64..10.0, seed in any::<u64>()) {
            let u = generate_noise(&NoiseSpec::uniform(1.5, seed), grid(100)).unwrap();
            let v = add_dc(&u, d);
            let max_u = u.values.iter().cloned().fold(f64::MIN, f64::max);
            let max_v = v.values.iter().cloned().fold(f64::MIN, f64::max);
            prop_assert!((max_v - max_u - d).abs() < 1e-12);
            for (a, b) in u.values.iter().zip(&v.values) {
                prop_assert_eq!(*b, *a + d);
            }
        }
    }
}
