//! Interference removal by escape-time measurement.
//!
//! Every received sample is treated as a small deviation from the true orbit.
//! The deviated state is released into a free-running copy of the drive
//! system and followed until it separates from the synchronized response by
//! a fixed length `L`. If that takes time `tau`, the deviation was about
//! `L * exp(-lambda * (tau + eta))`, which is then subtracted from the sample.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interference::{add_dc, sign_of, snr_db, sub_series, ScalarSeries};
use crate::models::{drive_field, response_field, CouplingVariant, LorenzParams};
use crate::ode::{integrate_driven_with, rk4_raw, DriveHold, State3, Trajectory, VectorField};

/// What happens to the DC offset once all passes are done.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetHandling {
    /// The offset is part of the deviation the passes remove; whatever is
    /// left of it stays in the output.
    #[default]
    Keep,
    /// Subtract `d` from the output after the last pass.
    Subtract,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenoiseConfig {
    /// Section length in samples.
    pub k: usize,
    /// Safety margin added to every escape time.
    pub eta: f64,
    /// DC offset added before processing.
    pub d: f64,
    /// Fixed length for the first pass.
    pub l0: f64,
    /// Amount `L` shrinks by after each pass.
    pub dl: f64,
    pub l_min: f64,
    pub passes: usize,
    pub lambda_max: f64,
    /// Escape-time cap; deviations that have not reached `L` by then are
    /// left alone.
    pub tau_max: f64,
    pub resimulate_response: bool,
    pub offset: OffsetHandling,
    pub hold: DriveHold,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        let lambda_max = 1.40;
        Self {
            k: 20,
            eta: 1.0,
            d: 2.0,
            l0: 6.0,
            dl: 1.0,
            l_min: 1.0,
            passes: 5,
            lambda_max,
            tau_max: 12.0 / lambda_max,
            resimulate_response: true,
            offset: OffsetHandling::Keep,
            hold: DriveHold::ZeroOrder,
        }
    }
}

impl DenoiseConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.k < 2 {
            return fail("section length k must be at least 2");
        }
        if !(self.l0 > 0.0 && self.l0.is_finite()) {
            return fail("initial fixed length L0 must be positive");
        }
        if !(self.l_min > 0.0 && self.l_min.is_finite()) {
            return fail("L floor must be positive");
        }
        if !(self.dl >= 0.0 && self.dl.is_finite()) {
            return fail("L decrement must be >= 0");
        }
        if !(self.lambda_max > 0.0 && self.lambda_max.is_finite()) {
            return fail("lambda_max must be positive");
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return fail("eta must be >= 0");
        }
        if !(self.tau_max > 0.0 && self.tau_max.is_finite()) {
            return fail("tau_max must be positive");
        }
        if !self.d.is_finite() {
            return fail("DC offset must be finite");
        }
        Ok(())
    }

    /// Fixed length used in pass `p` (zero based).
    pub fn length_for_pass(&self, p: usize) -> f64 {
        (self.l0 - self.dl * p as f64).max(self.l_min)
    }
}

/// Splits `0..n` into consecutive ranges of `k` samples; a shorter remainder
/// becomes its own final section.
pub fn partition_sections(n: usize, k: usize) -> Result<Vec<Range<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("section length must be at least 2, got {k}")));
    }
    Ok((0..n).step_by(k).map(|start| start..(start + k).min(n)).collect())
}

/// Marks samples at or above their section mean as "large".
///
/// Sections whose values are all equal are marked small throughout.
pub fn classify_large(series: &ScalarSeries, ranges: &[Range<usize>]) -> Vec<bool> {
    let mut mask = vec![false; series.len()];
    for r in ranges {
        let w = &series.values[r.clone()];
        if w.is_empty() || w.iter().all(|&v| v == w[0]) {
            continue;
        }
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        for (m, &v) in mask[r.clone()].iter_mut().zip(w) {
            *m = v >= mean;
        }
    }
    mask
}

/// Deviated starting state: the received scalar replaces the driven
/// coordinate of the synchronized response state.
#[inline]
pub fn seed_auxiliary(received_sample: f64, response_state: State3) -> State3 {
    State3::new(received_sample, response_state.x2, response_state.x3)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeMeasurement {
    pub tau: f64,
    pub reached: bool,
    pub final_separation: f64,
}

/// Follows the auxiliary system from `aux_start` next to `reference` (from
/// `start_index` on) until their distance reaches `length`.
///
/// The crossing is resolved on grid points. Returns `reached = false` when
/// the separation stays below `length` for the whole `tau_max`, and
/// [`Error::NotEnoughData`] when the reference ends before either outcome is
/// known.
pub fn measure_escape_time<F: VectorField + ?Sized>(
    aux: &F,
    aux_start: State3,
    reference: &Trajectory,
    start_index: usize,
    length: f64,
    tau_max: f64,
) -> Result<EscapeMeasurement> {
    let grid = reference.grid;
    if start_index >= reference.len() {
        return Err(Error::NotEnoughData { index: start_index });
    }
    let dt = grid.dt;
    let max_steps = (tau_max / dt).floor() as usize;
    let mut z = aux_start;
    let mut sep = z.distance(&reference.states[start_index]);
    if sep >= length {
        return Ok(EscapeMeasurement { tau: 0.0, reached: true, final_separation: sep });
    }
    for j in 1..=max_steps {
        let idx = start_index + j;
        if idx >= reference.len() {
            return Err(Error::NotEnoughData { index: start_index });
        }
        z = rk4_raw(aux, z, grid.time(idx - 1), dt);
        if !z.is_finite() {
            return Err(Error::Blowup { time: grid.time(idx - 1), step: Some(idx - 1) });
        }
        sep = z.distance(&reference.states[idx]);
        if sep >= length {
            return Ok(EscapeMeasurement { tau: j as f64 * dt, reached: true, final_separation: sep });
        }
    }
    Ok(EscapeMeasurement { tau: max_steps as f64 * dt, reached: false, final_separation: sep })
}

/// `L * exp(-lambda * (tau + eta))`.
#[inline]
pub fn estimate_deviation(length: f64, lambda_max: f64, tau: f64, eta: f64) -> f64 {
    length * (-lambda_max * (tau + eta)).exp()
}

#[inline]
pub fn signed_estimate(length: f64, lambda_max: f64, tau: f64, eta: f64, sign: f64) -> f64 {
    sign * estimate_deviation(length, lambda_max, tau, eta)
}

/// What a pass did with one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Small,
    Reduced,
    Unreached,
    NoLookahead,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PassDiagnostics {
    pub reduced: usize,
    pub small: usize,
    pub unreached: usize,
    pub no_lookahead: usize,
    pub mean_tau: f64,
    pub max_estimate: f64,
    #[serde(skip)]
    pub status: Vec<PointStatus>,
}

enum PointOutcome {
    Small,
    Reduced { tau: f64, estimate: f64 },
    Unreached,
    NoLookahead,
}

/// One reduction sweep over the (DC-shifted) received series.
///
/// Samples that are classified small, never escape, or lack lookahead are
/// copied through untouched.
pub fn denoise_pass(
    received: &ScalarSeries,
    response: &Trajectory,
    aux: &(impl VectorField + ?Sized),
    cfg: &DenoiseConfig,
    length: f64,
) -> Result<(ScalarSeries, PassDiagnostics)> {
    cfg.validate()?;
    if response.len() != received.len() {
        return Err(Error::GridMismatch(format!(
            "response has {} states, received series {} samples",
            response.len(),
            received.len()
        )));
    }
    let ranges = partition_sections(received.len(), cfg.k)?;
    let mask = classify_large(received, &ranges);
    let sign = sign_of(cfg.d);

    let outcomes: Vec<PointOutcome> = (0..received.len())
        .into_par_iter()
        .map(|i| {
            if !mask[i] {
                return Ok(PointOutcome::Small);
            }
            let start = seed_auxiliary(received.values[i], response.states[i]);
            match measure_escape_time(aux, start, response, i, length, cfg.tau_max) {
                Ok(m) if m.reached => Ok(PointOutcome::Reduced {
                    tau: m.tau,
                    estimate: signed_estimate(length, cfg.lambda_max, m.tau, cfg.eta, sign),
                }),
                Ok(_) => Ok(PointOutcome::Unreached),
                Err(Error::NotEnoughData { .. }) => Ok(PointOutcome::NoLookahead),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let mut cleaned = received.clone();
    let mut diag = PassDiagnostics { status: Vec::with_capacity(outcomes.len()), ..Default::default() };
    let mut tau_sum = 0.0;
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let status = match outcome {
            PointOutcome::Small => PointStatus::Small,
            PointOutcome::Unreached => PointStatus::Unreached,
            PointOutcome::NoLookahead => PointStatus::NoLookahead,
            PointOutcome::Reduced { tau, estimate } => {
                tau_sum += tau;
                diag.max_estimate = diag.max_estimate.max(estimate.abs());
                cleaned.values[i] -= estimate;
                PointStatus::Reduced
            }
        };
        match status {
            PointStatus::Small => diag.small += 1,
            PointStatus::Reduced => diag.reduced += 1,
            PointStatus::Unreached => diag.unreached += 1,
            PointStatus::NoLookahead => diag.no_lookahead += 1,
        }
        diag.status.push(status);
    }
    if diag.reduced > 0 {
        diag.mean_tau = tau_sum / diag.reduced as f64;
    }
    Ok((cleaned, diag))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassReport {
    pub length: f64,
    pub diagnostics: PassDiagnostics,
    /// Against the ground-truth clean signal, when one was supplied.
    pub snr_db: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DenoiseOutput {
    pub cleaned: ScalarSeries,
    /// Received series after the DC shift.
    pub shifted: ScalarSeries,
    pub passes: Vec<PassReport>,
}

/// Full procedure: shift by `d`, synchronize a response to the shifted
/// signal, then run `passes` reduction sweeps with a shrinking `L`.
///
/// `response_start` is the receiver state at the first sample. When `clean`
/// is given, the SNR after every pass is recorded, with the remaining
/// interference measured as `result - clean`.
pub fn denoise(
    received: &ScalarSeries,
    cfg: &DenoiseConfig,
    params: LorenzParams,
    variant: CouplingVariant,
    response_start: State3,
    clean: Option<&ScalarSeries>,
) -> Result<DenoiseOutput> {
    cfg.validate()?;
    params.validate()?;
    let response_field = response_field(params, variant);
    let aux = drive_field(params, variant);

    let shifted = add_dc(received, cfg.d);
    let mut current = shifted.clone();
    let mut response = integrate_driven_with(&response_field, response_start, &current, cfg.hold)?;
    let mut passes = Vec::with_capacity(cfg.passes);

    for p in 0..cfg.passes {
        if p > 0 && cfg.resimulate_response {
            response = integrate_driven_with(&response_field, response_start, &current, cfg.hold)?;
        }
        let length = cfg.length_for_pass(p);
        let (next, diagnostics) = denoise_pass(&current, &response, &aux, cfg, length)?;
        current = next;
        let snr = match clean {
            Some(c) => Some(residual_snr(&current, c, cfg)?),
            None => None,
        };
        passes.push(PassReport { length, diagnostics, snr_db: snr });
    }

    let cleaned = match cfg.offset {
        OffsetHandling::Keep => current,
        OffsetHandling::Subtract => add_dc(&current, -cfg.d),
    };
    Ok(DenoiseOutput { cleaned, shifted, passes })
}

/// SNR of an intermediate result as it would be returned, i.e. after the
/// configured offset handling.
fn residual_snr(current: &ScalarSeries, clean: &ScalarSeries, cfg: &DenoiseConfig) -> Result<f64> {
    let mut residual = sub_series(current, clean)?;
    if cfg.offset == OffsetHandling::Subtract {
        residual = add_dc(&residual, -cfg.d);
    }
    snr_db(clean, &residual)
}
