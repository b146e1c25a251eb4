use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chaos_denoise::config::ExperimentConfig;
use chaos_denoise::harness::{run_experiment, simulate_drive, sweep_noise_levels, write_outputs, write_series, write_sweep};
use chaos_denoise::interference::NoiseKind;
use chaos_denoise::lyapunov::{lyapunov_benettin, lyapunov_wolf, BenettinConfig, WolfConfig};
use chaos_denoise::models::drive_field;
use chaos_denoise::{Error, Result};

#[derive(Parser)]
#[command(name = "chaos-denoise", version, about = "Lyapunov-exponent interference removal for synchronized Lorenz systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the drive system and write its transmitted signal.
    Simulate(Common),
    /// Run the full pipeline: noise, DC offset, denoising passes, SNR report.
    Denoise(Common),
    /// Estimate the largest Lyapunov exponent from the model and from the series.
    Lyapunov(Common),
    /// Repeat the pipeline over several uniform-noise amplitudes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated noise amplitudes.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        levels: Vec<f64>,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment file (flat key = value); built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    passes: Option<usize>,
    /// none, uniform or sine.
    #[arg(long)]
    noise_kind: Option<NoiseKind>,
    #[arg(long)]
    noise_amplitude: Option<f64>,
    #[arg(long)]
    emit_series: Option<bool>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::uniform_preset(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(dir) = &self.out_dir {
            cfg.out_dir = dir.clone();
        }
        if let Some(p) = self.passes {
            cfg.passes = p;
        }
        if let Some(kind) = self.noise_kind {
            cfg.noise_kind = kind;
        }
        if let Some(a) = self.noise_amplitude {
            cfg.noise_amplitude = a;
            cfg.noise_target_snr_db = None;
        }
        if let Some(e) = self.emit_series {
            cfg.emit_series = e;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn db(snr: f64) -> String {
    if snr.is_infinite() { "clean".into() } else { format!("{snr:.3}") }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = common.load()?;
            let drive = simulate_drive(&cfg)?;
            std::fs::create_dir_all(&cfg.out_dir).map_err(|source| Error::Io { path: cfg.out_dir.clone(), source })?;
            let path = cfg.out_dir.join("drive.csv");
            write_series(&path, &[("x1", &drive.component(0)), ("x2", &drive.component(1)), ("x3", &drive.component(2))])?;
            println!("wrote {}", path.display());
        }
        Command::Denoise(common) => {
            let cfg = common.load()?;
            let run = run_experiment(&cfg)?;
            let r = &run.report;
            println!("noise amplitude   {:.6}", r.noise_amplitude);
            println!("lambda used       {:.6}", r.lambda_used);
            println!("stage 1 (noisy)   {} dB", db(r.snr_initial));
            println!("stage 2 (+dc)     {} dB", db(r.snr_after_dc));
            for (i, (snr, l)) in r.snr_per_pass.iter().zip(&r.lengths).enumerate() {
                println!("pass {} (L = {l})   {} dB", i + 1, db(*snr));
            }
            println!("gain              {:.3} dB", r.gain);
            for path in write_outputs(&run, &cfg.out_dir, cfg.emit_series)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Lyapunov(common) => {
            let cfg = common.load()?;
            let field = drive_field(cfg.params(), cfg.variant);
            let benettin = lyapunov_benettin(
                &field,
                cfg.initial_state(),
                &BenettinConfig { dt: cfg.dt, seed: cfg.seed, ..BenettinConfig::default() },
            )?;
            println!(
                "two-trajectory    {:.4} +/- {:.4} ({} renormalizations)",
                benettin.lambda_max, benettin.ci_halfwidth, benettin.segments
            );
            let run = run_experiment(&ExperimentConfig { passes: 0, ..cfg.clone() })?;
            for (label, series) in [("clean series", &run.clean), ("received series", &run.received)] {
                let wc = WolfConfig::for_series(series);
                match lyapunov_wolf(series, &wc) {
                    Ok(e) => println!(
                        "{label:<17} {:.4} +/- {:.4} ({} segments, delay {})",
                        e.lambda_max, e.ci_halfwidth, e.segments, wc.embedding.delay
                    ),
                    Err(e) => println!("{label:<17} unavailable: {e}"),
                }
            }
        }
        Command::Sweep { common, levels } => {
            let cfg = common.load()?;
            let rows = sweep_noise_levels(&levels, &cfg)?;
            std::fs::create_dir_all(&cfg.out_dir).map_err(|source| Error::Io { path: cfg.out_dir.clone(), source })?;
            let path = cfg.out_dir.join("sweep.csv");
            write_sweep(&path, &rows)?;
            println!("{:>8} {:>8} {:>8} {:>10} {:>10} {:>10}", "level", "d", "L", "stage1", "stage2", "stage3");
            for r in &rows {
                println!(
                    "{:>8.3} {:>8.3} {:>8.3} {:>10.3} {:>10.3} {:>10.3}",
                    r.level, r.d, r.l0, r.stage1, r.stage2, r.stage3
                );
            }
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
