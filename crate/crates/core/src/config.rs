//! Flat `key = value` experiment configuration (TOML syntax, no tables).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::denoiser::{DenoiseConfig, OffsetHandling};
use crate::error::{Error, Result};
use crate::interference::{NoiseKind, NoiseSpec};
use crate::models::{CouplingVariant, LorenzParams, Preset};
use crate::ode::{DriveHold, State3, TimeGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub variant: CouplingVariant,

    pub t0: f64,
    pub dt: f64,
    /// Samples in the analysed window.
    pub n: usize,
    /// Drive steps discarded before anything is recorded.
    pub warmup: usize,
    /// Receiver lead-in: steps the response is driven by the channel before
    /// the analysed window starts.
    pub sync_steps: usize,
    pub init_x1: f64,
    pub init_x2: f64,
    pub init_x3: f64,

    pub noise_kind: NoiseKind,
    pub noise_amplitude: f64,
    /// When set, overrides `noise_amplitude` so the window starts at this SNR.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_target_snr_db: Option<f64>,
    pub noise_frequency: f64,
    pub noise_phase: f64,
    pub seed: u64,

    pub k: usize,
    pub eta: f64,
    pub d: f64,
    pub l0: f64,
    pub dl: f64,
    pub l_min: f64,
    pub passes: usize,
    pub lambda_max: f64,
    /// Defaults to `12 / lambda_max` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
    pub resimulate_response: bool,
    pub offset: OffsetHandling,
    pub hold: DriveHold,
    /// Estimate lambda from the received series instead of using `lambda_max`.
    pub estimate_lambda: bool,

    pub out_dir: PathBuf,
    pub emit_series: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let dn = DenoiseConfig::default();
        Self {
            preset: Preset::Standard,
            variant: CouplingVariant::Standard,
            t0: 0.0,
            dt: 1e-3,
            n: 5000,
            warmup: 10_000,
            sync_steps: 10_000,
            init_x1: 1.0,
            init_x2: 1.0,
            init_x3: 1.0,
            noise_kind: NoiseKind::Uniform,
            noise_amplitude: 2.0,
            noise_target_snr_db: None,
            noise_frequency: 50.0,
            noise_phase: 0.0,
            seed: 1,
            k: dn.k,
            eta: dn.eta,
            d: dn.d,
            l0: dn.l0,
            dl: dn.dl,
            l_min: dn.l_min,
            passes: dn.passes,
            lambda_max: dn.lambda_max,
            tau_max: None,
            resimulate_response: dn.resimulate_response,
            offset: dn.offset,
            hold: dn.hold,
            estimate_lambda: false,
            out_dir: PathBuf::from("out"),
            emit_series: true,
        }
    }
}

impl ExperimentConfig {
    /// Uniform noise tuned to an initial SNR of 19.7 dB.
    pub fn uniform_preset() -> Self {
        Self { noise_kind: NoiseKind::Uniform, noise_target_snr_db: Some(19.7), ..Self::default() }
    }

    /// 50 Hz sine interference tuned to an initial SNR of 18.0 dB.
    pub fn sine_preset() -> Self {
        Self { noise_kind: NoiseKind::Sine, noise_target_snr_db: Some(18.0), ..Self::default() }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(message) => Error::ConfigFile { path: path.to_owned(), message },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|source| Error::Io { path: path.to_owned(), source })
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        self.window_grid()?;
        self.denoise_config().validate()?;
        if !(self.noise_amplitude >= 0.0 && self.noise_amplitude.is_finite()) {
            return Err(Error::Config(format!("noise_amplitude must be >= 0, got {}", self.noise_amplitude)));
        }
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config(format!("seed must fit in a signed 64-bit integer, got {}", self.seed)));
        }
        if let Some(snr) = self.noise_target_snr_db {
            if !snr.is_finite() {
                return Err(Error::Config("noise_target_snr_db must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> LorenzParams {
        self.preset.params()
    }

    pub fn initial_state(&self) -> State3 {
        State3::new(self.init_x1, self.init_x2, self.init_x3)
    }

    pub fn window_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t0, self.dt, self.n)
    }

    /// Lead-in plus window, ending where the window ends.
    pub fn channel_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.t0 - self.sync_steps as f64 * self.dt, self.dt, self.sync_steps + self.n)
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec {
            kind: self.noise_kind,
            amplitude: self.noise_amplitude,
            frequency: self.noise_frequency,
            phase: self.noise_phase,
            seed: self.seed,
        }
    }

    pub fn denoise_config(&self) -> DenoiseConfig {
        DenoiseConfig {
            k: self.k,
            eta: self.eta,
            d: self.d,
            l0: self.l0,
            dl: self.dl,
            l_min: self.l_min,
            passes: self.passes,
            lambda_max: self.lambda_max,
            tau_max: self.tau_max.unwrap_or(12.0 / self.lambda_max),
            resimulate_response: self.resimulate_response,
            offset: self.offset,
            hold: self.hold,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_round_trip() {
        for cfg in [ExperimentConfig::default(), ExperimentConfig::uniform_preset(), ExperimentConfig::sine_preset()] {
            assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
        }
    }

    #[test]
    fn partial_file_uses_defaults() {
        let cfg = ExperimentConfig::parse("n = 100\nnoise_kind = \"sine\"\n").unwrap();
        assert_eq!(cfg.n, 100);
        assert_eq!(cfg.noise_kind, NoiseKind::Sine);
        assert_eq!(cfg.d, 2.0);
    }

    #[test]
    fn errors_carry_line_context() {
        let err = ExperimentConfig::parse("n = 100\nk = \"twenty\"\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(ExperimentConfig::parse("bogus_key = 1\n").is_err());
        assert!(ExperimentConfig::parse("k = 1\n").is_err());
        assert!(ExperimentConfig::parse("dt = 0.0\n").is_err());
    }

    #[test]
    fn file_errors_name_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "passes = -3\n").unwrap();
        let err = ExperimentConfig::load(&path).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("bad.toml"));
    }

    #[test]
    fn tau_cap_follows_lambda() {
        let cfg = ExperimentConfig { lambda_max: 2.0, ..Default::default() };
        assert_eq!(cfg.denoise_config().tau_max, 6.0);
    }

    proptest! {
        #[test]
        fn arbitrary_values_round_trip(
            dt in 1e-6f64..1.0,
            n in 1usize..100_000,
            amp in 0.0f64..100.0,
            d in -50.0f64..50.0,
            l0 in 1e-3f64..100.0,
            eta in 0.0f64..10.0,
            seed in 0..=i64::MAX as u64,
            target in proptest::option::of(-20.0f64..60.0),
        ) {
            let cfg = ExperimentConfig {
                dt, n, noise_amplitude: amp, d, l0, eta, seed, noise_target_snr_db: target,
                ..Default::default()
            };
            prop_assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
        }
    }
}
