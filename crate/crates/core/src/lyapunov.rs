//! Largest Lyapunov exponent: a model-based two-trajectory estimator and a
//! data-based fixed-evolution-time estimator working on a delay embedding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interference::ScalarSeries;
use crate::ode::{advance, rk4_raw, State3, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    /// Per unit of model time.
    pub lambda_max: f64,
    /// Renormalizations (two-trajectory) or evolution segments (embedding).
    pub segments: usize,
    /// 95% half-width from the scatter of block-averaged rates.
    pub ci_halfwidth: f64,
    /// Separation collapses (two-trajectory) or skipped segments (embedding).
    pub events: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenettinConfig {
    pub dt: f64,
    /// Accumulation time, after the transient.
    pub t_total: f64,
    pub renorm_every: usize,
    pub delta0: f64,
    /// Time integrated and discarded before accumulation starts.
    pub transient: f64,
    /// Seeds the random direction used after a separation collapse.
    pub seed: u64,
}

impl Default for BenettinConfig {
    fn default() -> Self {
        Self { dt: 1e-3, t_total: 200.0, renorm_every: 10, delta0: 1e-8, transient: 10.0, seed: 0 }
    }
}

/// Two-trajectory estimator with periodic renormalization.
///
/// A perturbed copy starts `delta0` away from the fiducial orbit; every
/// `renorm_every` steps the log growth of the separation is accumulated and
/// the separation is rescaled to `delta0` along its current direction.
pub fn lyapunov_benettin<F: VectorField + ?Sized>(field: &F, s0: State3, cfg: &BenettinConfig) -> Result<LyapunovEstimate> {
    if !(cfg.dt > 0.0 && cfg.t_total > 0.0 && cfg.delta0 > 0.0 && cfg.renorm_every > 0 && cfg.transient >= 0.0) {
        return Err(Error::Config(format!("invalid two-trajectory settings: {cfg:?}")));
    }
    let dt = cfg.dt;
    let transient_steps = (cfg.transient / dt).round() as usize;
    let mut x = advance(field, s0, 0.0, dt, transient_steps)?;
    let mut t = transient_steps as f64 * dt;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let unit = |rng: &mut ChaCha8Rng| loop {
        let v = State3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            break (1.0 / n) * v;
        }
    };
    let mut y = x + (cfg.delta0 / 3f64.sqrt()) * State3::new(1.0, 1.0, 1.0);

    let segments = ((cfg.t_total / dt) / cfg.renorm_every as f64).round().max(1.0) as usize;
    let seg_time = cfg.renorm_every as f64 * dt;
    let mut logs = Vec::with_capacity(segments);
    let mut collapses = 0;
    for _ in 0..segments {
        for _ in 0..cfg.renorm_every {
            x = rk4_raw(field, x, t, dt);
            y = rk4_raw(field, y, t, dt);
            t += dt;
        }
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Blowup { time: t, step: None });
        }
        let sep = y - x;
        let d = sep.norm();
        if d == 0.0 || !d.is_finite() {
            collapses += 1;
            logs.push(0.0);
            y = x + cfg.delta0 * unit(&mut rng);
            continue;
        }
        logs.push((d / cfg.delta0).ln());
        y = x + (cfg.delta0 / d) * sep;
    }
    let total_time = segments as f64 * seg_time;
    let lambda_max = logs.iter().sum::<f64>() / total_time;
    Ok(LyapunovEstimate { lambda_max, segments, ci_halfwidth: block_halfwidth(&logs, seg_time), events: collapses })
}

/// 95% half-width of the mean rate, from up to 20 contiguous blocks.
fn block_halfwidth(logs: &[f64], seg_time: f64) -> f64 {
    let blocks = 20.min(logs.len());
    if blocks < 2 {
        return f64::NAN;
    }
    let per = logs.len() / blocks;
    let rates: Vec<f64> =
        logs.chunks_exact(per).take(blocks).map(|c| c.iter().sum::<f64>() / (c.len() as f64 * seg_time)).collect();
    let m = rates.iter().sum::<f64>() / rates.len() as f64;
    let var = rates.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (rates.len() - 1) as f64;
    1.96 * (var / rates.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingSpec {
    pub dimension: usize,
    /// In samples.
    pub delay: usize,
}

impl EmbeddingSpec {
    pub fn validate(&self, len: usize) -> Result<()> {
        if self.dimension == 0 || self.delay == 0 {
            return Err(Error::Config("embedding dimension and delay must be >= 1".into()));
        }
        if (self.dimension - 1) * self.delay >= len {
            return Err(Error::Config(format!(
                "series of {len} samples is too short for dimension {} and delay {}",
                self.dimension, self.delay
            )));
        }
        Ok(())
    }

    pub fn points(&self, len: usize) -> usize {
        len - (self.dimension - 1) * self.delay
    }
}

/// Delay vectors `[s(i), s(i + delay), ...]`, stored row-major.
pub fn embed(series: &ScalarSeries, emb: EmbeddingSpec) -> Result<Vec<f64>> {
    emb.validate(series.len())?;
    let m = emb.dimension;
    let n = emb.points(series.len());
    let mut out = Vec::with_capacity(n * m);
    for i in 0..n {
        for c in 0..m {
            out.push(series.values[i + c * emb.delay]);
        }
    }
    Ok(out)
}

/// First lag at which the sample autocorrelation drops to zero or below.
///
/// Lorenz-type signals often never cross zero at useful lags; then the first
/// lag where it falls below `1/e` is used, and `len / 10` as a last resort.
pub fn first_autocorrelation_zero(series: &ScalarSeries) -> usize {
    let n = series.len();
    let mean = series.mean();
    let c: Vec<f64> = series.values.iter().map(|v| v - mean).collect();
    let c0: f64 = c.iter().map(|v| v * v).sum();
    if c0 == 0.0 || n < 4 {
        return 1;
    }
    let mut below_e = None;
    for lag in 1..n / 2 {
        let r = c[..n - lag].iter().zip(&c[lag..]).map(|(a, b)| a * b).sum::<f64>() / c0;
        if r <= 0.0 {
            return lag;
        }
        if below_e.is_none() && r < std::f64::consts::E.recip() {
            below_e = Some(lag);
            // a zero crossing further out than 4x the decay lag is not useful
        } else if below_e.is_some_and(|l| lag > 4 * l) {
            break;
        }
    }
    below_e.unwrap_or((n / 10).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WolfConfig {
    pub embedding: EmbeddingSpec,
    /// Samples each neighbor pair is followed before replacement.
    pub evolve_steps: usize,
    pub min_sep: f64,
    pub max_sep: f64,
    /// Minimum index distance between a point and an admissible neighbor.
    pub theiler_window: usize,
}

impl WolfConfig {
    /// Defaults scaled to the series: dimension 3, delay at the first
    /// autocorrelation zero, separations as fractions of the standard
    /// deviation.
    pub fn for_series(series: &ScalarSeries) -> Self {
        let mean = series.mean();
        let std = (series.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / series.len() as f64).sqrt();
        let delay = first_autocorrelation_zero(series);
        Self {
            embedding: EmbeddingSpec { dimension: 3, delay },
            evolve_steps: delay.max(1),
            min_sep: 1e-3 * std,
            max_sep: 0.1 * std,
            theiler_window: 2 * delay,
        }
    }
}

struct Embedded<'a> {
    data: &'a [f64],
    dim: usize,
}

impl Embedded<'_> {
    #[inline]
    fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.point(i).iter().zip(self.point(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// Angle between the vectors `i -> j` and `i -> k`.
    #[inline]
    fn angle(&self, i: usize, j: usize, k: usize) -> f64 {
        let (p, a, b) = (self.point(i), self.point(j), self.point(k));
        let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
        for c in 0..self.dim {
            let u = a[c] - p[c];
            let v = b[c] - p[c];
            dot += u * v;
            na += u * u;
            nb += v * v;
        }
        let denom = (na * nb).sqrt();
        if denom == 0.0 {
            return std::f64::consts::PI;
        }
        (dot / denom).clamp(-1.0, 1.0).acos()
    }
}

/// Fixed-evolution-time estimator on a delay embedding of a scalar series.
///
/// A fiducial point and a nearby point (outside the Theiler window) are
/// followed for `evolve_steps` samples and the log stretch of their distance
/// is accumulated. The replacement neighbor is the admissible point (distance
/// in `[min_sep, max_sep]`, outside the Theiler window) whose direction from
/// the new fiducial deviates least from the evolved separation. If none
/// exists `max_sep` is doubled once; failing that the segment is skipped.
pub fn lyapunov_wolf(series: &ScalarSeries, cfg: &WolfConfig) -> Result<LyapunovEstimate> {
    if !(cfg.min_sep > 0.0 && cfg.min_sep < cfg.max_sep) {
        return Err(Error::Config(format!("need 0 < min_sep < max_sep, got {} and {}", cfg.min_sep, cfg.max_sep)));
    }
    if cfg.evolve_steps == 0 {
        return Err(Error::Config("evolve_steps must be >= 1".into()));
    }
    let data = embed(series, cfg.embedding)?;
    let emb = Embedded { data: &data, dim: cfg.embedding.dimension };
    let n = cfg.embedding.points(series.len());
    let evolve = cfg.evolve_steps;
    if n <= evolve + cfg.theiler_window + 1 {
        return Err(Error::Config(format!("embedded series of {n} points is too short to evolve {evolve} steps")));
    }
    let last_start = n - evolve; // exclusive bound for indices that can still be evolved

    let admissible = |i: usize, k: usize| k.abs_diff(i) > cfg.theiler_window && k < last_start;

    // nearest admissible neighbour with distance >= min_sep, optionally capped
    let nearest = |i: usize, cap: f64| -> Option<usize> {
        (0..last_start)
            .into_par_iter()
            .filter(|&k| admissible(i, k))
            .filter_map(|k| {
                let d = emb.dist(i, k);
                (d >= cfg.min_sep && d <= cap).then_some((d, k))
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, k)| k)
    };

    // replacement with the smallest orientation change; the evolved
    // neighbour itself has angle zero and wins while it stays admissible
    let replace = |i: usize, evolved: usize, cap: f64| -> Option<usize> {
        (0..last_start)
            .into_par_iter()
            .filter(|&k| admissible(i, k))
            .filter_map(|k| {
                let d = emb.dist(i, k);
                (d >= cfg.min_sep && d <= cap).then(|| (emb.angle(i, evolved, k), d, k))
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)))
            .map(|(_, _, k)| k)
    };

    let mut logs = Vec::new();
    let mut skipped = 0usize;
    let mut fid = 0usize;
    let mut neighbor = find_start(fid, &nearest, cfg.max_sep);

    while fid < last_start {
        let Some(nb) = neighbor else {
            skipped += 1;
            fid += evolve;
            if fid < last_start {
                neighbor = find_start(fid, &nearest, cfg.max_sep);
            }
            continue;
        };
        let d0 = emb.dist(fid, nb);
        let d1 = emb.dist(fid + evolve, nb + evolve);
        if d0 > 0.0 && d1 > 0.0 {
            logs.push((d1 / d0).ln());
        } else {
            skipped += 1;
        }
        fid += evolve;
        let evolved = nb + evolve;
        if fid >= last_start {
            break;
        }
        neighbor = replace(fid, evolved, cfg.max_sep).or_else(|| replace(fid, evolved, 2.0 * cfg.max_sep));
    }

    if logs.is_empty() {
        return Err(Error::Config("no admissible neighbour pairs found; widen max_sep".into()));
    }
    let seg_time = evolve as f64 * series.grid.dt;
    let lambda_max = logs.iter().sum::<f64>() / (logs.len() as f64 * seg_time);
    Ok(LyapunovEstimate { lambda_max, segments: logs.len(), ci_halfwidth: block_halfwidth(&logs, seg_time), events: skipped })
}

fn find_start(fid: usize, nearest: &(impl Fn(usize, f64) -> Option<usize> + ?Sized), max_sep: f64) -> Option<usize> {
    nearest(fid, max_sep).or_else(|| nearest(fid, 2.0 * max_sep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::TimeGrid;

    fn cfg(t_total: f64) -> BenettinConfig {
        BenettinConfig { t_total, transient: 0.0, ..Default::default() }
    }

    #[test]
    fn linear_growth_rate() {
        let lin = |_t: f64, s: State3| s;
        let est = lyapunov_benettin(&lin, State3::new(1e-3, 0.0, 0.0), &cfg(10.0)).unwrap();
        assert!((est.lambda_max - 1.0).abs() < 0.01, "{est:?}");
    }

    #[test]
    fn contracting_rate_is_not_clamped() {
        let lin = |_t: f64, s: State3| -1.0 * s;
        let est = lyapunov_benettin(&lin, State3::new(1.0, 2.0, 3.0), &cfg(10.0)).unwrap();
        assert!((est.lambda_max + 1.0).abs() < 0.01, "{est:?}");
    }

    #[test]
    fn rejects_bad_settings() {
        let lin = |_t: f64, s: State3| s;
        let bad = BenettinConfig { renorm_every: 0, ..Default::default() };
        assert!(lyapunov_benettin(&lin, State3::ZERO, &bad).is_err());
    }

    #[test]
    fn embedding_layout() {
        let g = TimeGrid::new(0.0, 1.0, 6).unwrap();
        let s = ScalarSeries::new(g, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let e = embed(&s, EmbeddingSpec { dimension: 3, delay: 2 }).unwrap();
        assert_eq!(e, vec![0.0, 2.0, 4.0, 1.0, 3.0, 5.0]);
        assert!(embed(&s, EmbeddingSpec { dimension: 4, delay: 2 }).is_err());
        assert!(embed(&s, EmbeddingSpec { dimension: 0, delay: 1 }).is_err());
    }

    #[test]
    fn autocorrelation_zero_of_a_sine_is_quarter_period() {
        let g = TimeGrid::new(0.0, 1e-3, 4000).unwrap();
        let s = ScalarSeries::new(g, (0..4000).map(|i| (2.0 * std::f64::consts::PI * i as f64 / 400.0).sin()).collect())
            .unwrap();
        let lag = first_autocorrelation_zero(&s);
        assert!((lag as i64 - 100).abs() <= 2, "lag {lag}");
    }

    #[test]
    fn wolf_rejects_inverted_separations() {
        let g = TimeGrid::new(0.0, 1e-3, 1000).unwrap();
        let s = ScalarSeries::new(g, (0..1000).map(|i| (i as f64 * 0.01).sin()).collect()).unwrap();
        let mut c = WolfConfig::for_series(&s);
        c.min_sep = c.max_sep;
        assert!(lyapunov_wolf(&s, &c).is_err());
    }
}
