//! Experiment orchestration: simulate the channel, run the denoiser, score
//! every stage against the known interference, and write CSV outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::denoiser::{denoise, DenoiseOutput, PassDiagnostics};
use crate::error::{Error, Result};
use crate::interference::{add_dc, add_series, format_snr, generate_noise, snr_db, sub_series, ScalarSeries};
use crate::lyapunov::{lyapunov_wolf, WolfConfig};
use crate::models::{drive_field, response_field};
use crate::ode::{advance, advance_driven, integrate, State3, TimeGrid, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    /// Received signal against the injected interference.
    pub snr_initial: f64,
    /// After the DC offset, counted as interference.
    pub snr_after_dc: f64,
    pub snr_per_pass: Vec<f64>,
    /// SNR of the returned series.
    pub snr_final: f64,
    pub gain: f64,
    pub lambda_used: f64,
    pub noise_amplitude: f64,
    pub passes: Vec<PassDiagnostics>,
    pub lengths: Vec<f64>,
}

impl StageReport {
    /// `final - initial`, with two clean stages counting as no change.
    pub fn recompute_gain(snr_initial: f64, snr_final: f64) -> f64 {
        if snr_initial == snr_final {
            0.0
        } else {
            snr_final - snr_initial
        }
    }
}

/// Everything one run produces.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub report: StageReport,
    /// Drive trajectory over the analysed window.
    pub drive: Trajectory,
    pub clean: ScalarSeries,
    pub noise: ScalarSeries,
    pub received: ScalarSeries,
    pub cleaned: ScalarSeries,
}

/// Drive trajectory over lead-in plus window, starting on the attractor.
pub fn simulate_drive(cfg: &ExperimentConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let field = drive_field(cfg.params(), cfg.variant);
    let grid = cfg.channel_grid()?;
    let warm = advance(&field, cfg.initial_state(), grid.t0 - cfg.warmup as f64 * cfg.dt, cfg.dt, cfg.warmup)?;
    integrate(&field, warm, grid)
}

fn window<T: Clone>(values: &[T], skip: usize) -> Vec<T> {
    values[skip..].to_vec()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    cfg.validate()?;
    let params = cfg.params();
    let lead = cfg.sync_steps;
    let win_grid = cfg.window_grid()?;
    let chan_grid = cfg.channel_grid()?;

    let full = simulate_drive(cfg)?;
    let drive = Trajectory { grid: win_grid, states: window(&full.states, lead) };
    let clean = drive.component(0);

    let mut spec = cfg.noise_spec();
    if let Some(target) = cfg.noise_target_snr_db {
        let signal_power = clean.energy() / clean.len() as f64;
        spec = spec.with_mean_power(signal_power / 10f64.powf(target / 10.0));
    }
    let chan_noise = generate_noise(&spec, chan_grid)?;
    let noise = ScalarSeries::new(win_grid, window(&chan_noise.values, lead))?;
    let received = add_series(&clean, &noise)?;

    // the receiver listens to the (offset) channel during the lead-in
    let response = response_field(params, cfg.variant);
    let response_start = if lead > 0 {
        let lead_grid = TimeGrid::new(chan_grid.t0, cfg.dt, lead)?;
        let lead_in: Vec<f64> =
            (0..lead).map(|i| full.states[i].x1 + chan_noise.values[i] + cfg.d).collect();
        advance_driven(&response, State3::ZERO, &ScalarSeries::new(lead_grid, lead_in)?)?
    } else {
        State3::ZERO
    };

    let mut dcfg = cfg.denoise_config();
    if cfg.estimate_lambda {
        let est = lyapunov_wolf(&received, &WolfConfig::for_series(&received))?;
        if est.lambda_max.is_nan() || est.lambda_max <= 0.0 {
            return Err(Error::Config(format!(
                "estimated exponent {} is not positive; set lambda_max explicitly",
                est.lambda_max
            )));
        }
        dcfg.lambda_max = est.lambda_max;
        if cfg.tau_max.is_none() {
            dcfg.tau_max = 12.0 / est.lambda_max;
        }
    }

    let DenoiseOutput { cleaned, passes, .. } =
        denoise(&received, &dcfg, params, cfg.variant, response_start, Some(&clean))?;

    let snr_initial = snr_db(&clean, &noise)?;
    let snr_after_dc = snr_db(&clean, &add_dc(&noise, cfg.d))?;
    let snr_final = snr_db(&clean, &sub_series(&cleaned, &clean)?)?;
    let snr_per_pass: Vec<f64> = passes.iter().map(|p| p.snr_db.expect("clean signal supplied")).collect();
    let report = StageReport {
        snr_initial,
        snr_after_dc,
        gain: StageReport::recompute_gain(snr_initial, snr_final),
        snr_final,
        snr_per_pass,
        lambda_used: dcfg.lambda_max,
        noise_amplitude: spec.amplitude,
        lengths: passes.iter().map(|p| p.length).collect(),
        passes: passes.into_iter().map(|p| p.diagnostics).collect(),
    };
    Ok(ExperimentRun { report, drive, clean, noise, received, cleaned })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io { path: path.to_owned(), source })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_owned(), source }
}

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `t,x1,x2,x3` rows. When `first` is given it replaces the first
/// coordinate (a contaminated or cleaned transmitted signal).
pub fn emit_phase_portrait(trajectory: &Trajectory, first: Option<&ScalarSeries>, path: &Path) -> Result<()> {
    if let Some(s) = first {
        if s.len() != trajectory.len() {
            return Err(Error::GridMismatch(format!(
                "portrait column has {} samples, trajectory {}",
                s.len(),
                trajectory.len()
            )));
        }
    }
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "t,x1,x2,x3").map_err(&err)?;
    for (i, st) in trajectory.states.iter().enumerate() {
        let x1 = first.map_or(st.x1, |s| s.values[i]);
        writeln!(w, "{},{},{},{}", num(trajectory.grid.time(i)), num(x1), num(st.x2), num(st.x3)).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

/// Writes `t` plus one column per named series.
pub fn write_series(path: &Path, columns: &[(&str, &ScalarSeries)]) -> Result<()> {
    let Some((_, first)) = columns.first() else {
        return Err(Error::Config("no series to write".into()));
    };
    let grid = first.grid;
    if columns.iter().any(|(_, s)| s.grid != grid) {
        return Err(Error::GridMismatch("series written together must share a grid".into()));
    }
    let mut w = create(path)?;
    let err = io_err(path);
    let header: Vec<&str> = std::iter::once("t").chain(columns.iter().map(|(n, _)| *n)).collect();
    writeln!(w, "{}", header.join(",")).map_err(&err)?;
    for i in 0..grid.n {
        let row: Vec<String> =
            std::iter::once(num(grid.time(i))).chain(columns.iter().map(|(_, s)| num(s.values[i]))).collect();
        writeln!(w, "{}", row.join(",")).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

/// `stage,pass,length,snr_db,reduced,small,unreached,no_lookahead,mean_tau`
pub fn write_report(path: &Path, report: &StageReport) -> Result<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "stage,pass,length,snr_db,reduced,small,unreached,no_lookahead,mean_tau").map_err(&err)?;
    writeln!(w, "initial,0,,{},,,,,", format_snr(report.snr_initial)).map_err(&err)?;
    writeln!(w, "after_dc,0,,{},,,,,", format_snr(report.snr_after_dc)).map_err(&err)?;
    for (p, ((snr, diag), length)) in report.snr_per_pass.iter().zip(&report.passes).zip(&report.lengths).enumerate() {
        writeln!(
            w,
            "pass,{},{},{},{},{},{},{},{}",
            p + 1,
            num(*length),
            format_snr(*snr),
            diag.reduced,
            diag.small,
            diag.unreached,
            diag.no_lookahead,
            num(diag.mean_tau)
        )
        .map_err(&err)?;
    }
    w.flush().map_err(&err)
}

/// `snr_initial_db,snr_after_dc_db,snr_final_db,gain_db,lambda_max,noise_amplitude`
pub fn write_summary(path: &Path, report: &StageReport) -> Result<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "snr_initial_db,snr_after_dc_db,snr_final_db,gain_db,lambda_max,noise_amplitude").map_err(&err)?;
    writeln!(
        w,
        "{},{},{},{},{},{}",
        format_snr(report.snr_initial),
        format_snr(report.snr_after_dc),
        format_snr(report.snr_final),
        num(report.gain),
        num(report.lambda_used),
        num(report.noise_amplitude)
    )
    .map_err(&err)?;
    w.flush().map_err(&err)
}

/// Writes report, summary and (optionally) series and portrait files into
/// `dir`; returns the paths written.
pub fn write_outputs(run: &ExperimentRun, dir: &Path, emit_series: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = vec![dir.join("report.csv"), dir.join("summary.csv")];
    write_report(&written[0], &run.report)?;
    write_summary(&written[1], &run.report)?;
    if emit_series {
        let series = dir.join("series.csv");
        write_series(
            &series,
            &[("clean", &run.clean), ("noise", &run.noise), ("received", &run.received), ("cleaned", &run.cleaned)],
        )?;
        let clean = dir.join("portrait_clean.csv");
        let before = dir.join("portrait_before.csv");
        let after = dir.join("portrait_after.csv");
        emit_phase_portrait(&run.drive, None, &clean)?;
        emit_phase_portrait(&run.drive, Some(&run.received), &before)?;
        emit_phase_portrait(&run.drive, Some(&run.cleaned), &after)?;
        written.extend([series, clean, before, after]);
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub level: f64,
    pub d: f64,
    pub l0: f64,
    pub stage1: f64,
    pub stage2: f64,
    pub stage3: f64,
}

/// Per-level configuration: `d` equals the noise bound, `L0 = 3 d`, and
/// the decrement and floor keep the default `L0 : dL : L_min` ratio of 6:1:1.
pub fn level_config(base: &ExperimentConfig, level: f64) -> ExperimentConfig {
    let d = level;
    let l0 = 3.0 * d;
    ExperimentConfig {
        noise_amplitude: level,
        noise_target_snr_db: None,
        d,
        l0,
        dl: l0 / 6.0,
        l_min: l0 / 6.0,
        ..base.clone()
    }
}

/// One run per noise amplitude, in parallel; rows come back in input order.
pub fn sweep_noise_levels(levels: &[f64], base: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    levels
        .par_iter()
        .map(|&level| {
            if !(level > 0.0 && level.is_finite()) {
                return Err(Error::Config(format!("sweep levels must be positive, got {level}")));
            }
            let cfg = level_config(base, level);
            let run = run_experiment(&cfg)?;
            Ok(SweepRow {
                level,
                d: cfg.d,
                l0: cfg.l0,
                stage1: run.report.snr_initial,
                stage2: run.report.snr_after_dc,
                stage3: run.report.snr_final,
            })
        })
        .collect()
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "level,d,L,stage1_db,stage2_db,stage3_db").map_err(&err)?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            num(r.level),
            num(r.d),
            num(r.l0),
            format_snr(r.stage1),
            format_snr(r.stage2),
            format_snr(r.stage3)
        )
        .map_err(&err)?;
    }
    w.flush().map_err(&err)
}

impl ExperimentRun {
    /// Root-mean-square difference between the cleaned and clean signals,
    /// and between the received and clean signals.
    pub fn rmse(&self) -> (f64, f64) {
        let n = self.clean.len() as f64;
        let r = |s: &ScalarSeries| {
            (s.values.iter().zip(&self.clean.values).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n).sqrt()
        };
        (r(&self.cleaned), r(&self.received))
    }
}
