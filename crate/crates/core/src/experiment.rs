//! Config-driven ergodic experiments: rate-versus-SNR sweeps, asymptotic
//! trend studies, and tabular CSV/JSON emission.
//!
//! Every run is a pure function of its configuration: trial `t` draws its
//! paths from seed `base_seed ^ t`, trials are reduced in index order, and
//! float formatting uses shortest round-trip representations, so re-running a
//! command yields byte-identical output.

use std::fmt;
use std::io::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::ArrayConfig;
use crate::capacity::gaussian_capacity;
use crate::channel::{
    angular_channel, sample_rayleigh_paths, sample_rayleigh_paths_clipped, truncate_effective,
    AngularChannel, PathSet,
};
use crate::covariance::{critical_sigma, dense_sigma, hermitian_sqrt, q_from_sigma};
use crate::error::{Error, Result};
use crate::mi::{sic_rate_sum, Constellation, SchemeInput};
use crate::sic::{effective_channel, sinr_profile};
use crate::CMatrix;

/// Signaling scheme for one sweep curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Gaussian,
    Qpsk,
    Qam16,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scheme::Gaussian => "gaussian",
            Scheme::Qpsk => "qpsk",
            Scheme::Qam16 => "qam16",
        };
        f.write_str(s)
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Scheme::Gaussian),
            "qpsk" => Ok(Scheme::Qpsk),
            "qam16" => Ok(Scheme::Qam16),
            other => Err(Error::Config(format!(
                "unknown scheme '{other}' (expected gaussian|qpsk|qam16)"
            ))),
        }
    }
}

/// Transmit covariance selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceMode {
    /// Dense pattern for `Δ_t < 1/2`, uniform (critical) for `Δ_t = 1/2`.
    #[default]
    Auto,
    Dense,
    Critical,
}

impl FromStr for CovarianceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(CovarianceMode::Auto),
            "dense" => Ok(CovarianceMode::Dense),
            "critical" => Ok(CovarianceMode::Critical),
            other => Err(Error::Config(format!(
                "unknown covariance mode '{other}' (expected auto|dense|critical)"
            ))),
        }
    }
}

fn default_lt() -> f64 {
    3.0
}
fn default_lr() -> f64 {
    1.0
}
fn default_dt_list() -> Vec<f64> {
    vec![0.5, 0.25]
}
fn default_dr() -> f64 {
    0.5
}
fn default_snr_grid() -> Vec<f64> {
    (-10..=15).map(f64::from).collect()
}
fn default_trials() -> usize {
    500
}
fn default_seed() -> u64 {
    2016
}
fn default_schemes() -> Vec<Scheme> {
    vec![Scheme::Gaussian, Scheme::Qpsk, Scheme::Qam16]
}

/// Full description of an ergodic sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_lt")]
    pub lt: f64,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_dt_list")]
    pub dt_list: Vec<f64>,
    #[serde(default = "default_dr")]
    pub dr: f64,
    /// Path count; defaults to `4·min{L_t, L_r}` (at least 1).
    #[serde(default)]
    pub paths: Option<usize>,
    /// Normalized-SNR grid in dB.
    #[serde(default = "default_snr_grid")]
    pub snr_grid_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default)]
    pub covariance: CovarianceMode,
    /// Clip directional cosines to `[-(1-ε), 1-ε]` when set.
    #[serde(default)]
    pub clip_eps: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lt: default_lt(),
            lr: default_lr(),
            dt_list: default_dt_list(),
            dr: default_dr(),
            paths: None,
            snr_grid_db: default_snr_grid(),
            trials: default_trials(),
            base_seed: default_seed(),
            schemes: default_schemes(),
            covariance: CovarianceMode::Auto,
            clip_eps: None,
        }
    }
}

impl ExperimentConfig {
    pub fn path_count(&self) -> usize {
        self.paths
            .unwrap_or_else(|| ((4.0 * self.lt.min(self.lr)).round() as usize).max(1))
    }

    fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.dt_list.is_empty() {
            return Err(Error::Config("at least one transmit separation is required".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::Config("SNR grid is empty".into()));
        }
        for &dt in &self.dt_list {
            ArrayConfig::new(self.lt, dt)?;
        }
        ArrayConfig::new(self.lr, self.dr)?;
        Ok(())
    }
}

/// One aggregated result row.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RatePoint {
    pub snr_db: f64,
    pub scheme: Scheme,
    pub dt: f64,
    pub rate_nats: f64,
    pub rate_bits: f64,
    /// Rate in nats divided by `2·min{L_t, L_r}`.
    pub normalized_rate: f64,
    pub trials: usize,
    /// Standard error of the normalized rate across trials.
    pub stderr: f64,
    /// Actual SNR `γ = γ̃·4Δ_tΔ_r`, recorded so dense and critical rows can
    /// be compared at identical normalized SNR.
    pub gamma: f64,
}

/// A sweep result with per-trial detail retained.
#[derive(Debug, Clone)]
pub struct SweepData {
    pub points: Vec<RatePoint>,
    /// Per-point per-trial rates in nats, aligned with `points`.
    pub trial_rates: Vec<Vec<f64>>,
    pub normalizer: f64,
}

struct CurveContext {
    dt: f64,
    tx: ArrayConfig,
    q: CMatrix,
    q_sqrt: CMatrix,
}

fn build_covariance(
    lt: f64,
    tx: &ArrayConfig,
    mode: CovarianceMode,
) -> Result<(CMatrix, CMatrix)> {
    let lt_int = lt.round();
    if (lt - lt_int).abs() > 1e-9 || lt_int < 1.0 {
        return Err(Error::Config(format!(
            "the dense/critical covariance patterns need an integer L_t, got {lt}"
        )));
    }
    let lt_int = lt_int as usize;
    let dt = tx.separation();
    let use_dense = match mode {
        CovarianceMode::Dense => true,
        CovarianceMode::Critical => false,
        CovarianceMode::Auto => dt < 0.5,
    };
    let spec = if use_dense {
        dense_sigma(lt_int, tx.elements()).map_err(|e| {
            Error::Config(format!("dense covariance invalid for dt={dt}, L_t={lt_int}: {e}"))
        })?
    } else {
        if tx.elements() != 2 * lt_int {
            return Err(Error::Config(format!(
                "critical covariance needs M = 2 L_t, but dt={dt} gives M={}",
                tx.elements()
            )));
        }
        critical_sigma(lt_int)?
    };
    let q = q_from_sigma(&spec, tx)?;
    let q_sqrt = hermitian_sqrt(&q)?;
    Ok((q, q_sqrt))
}

fn sample_for(cfg: &ExperimentConfig, trial: u64) -> Result<PathSet> {
    let seed = cfg.base_seed ^ trial;
    match cfg.clip_eps {
        Some(eps) => sample_rayleigh_paths_clipped(cfg.path_count(), seed, eps),
        None => sample_rayleigh_paths(cfg.path_count(), seed),
    }
}

fn scheme_rate(
    scheme: Scheme,
    ch: &AngularChannel,
    ctx: &CurveContext,
    profile: &crate::sic::SinrProfile,
    snr_norm: f64,
) -> Result<f64> {
    match scheme {
        Scheme::Gaussian => {
            let rate =
                gaussian_capacity(&ch.matrix, &ctx.tx, &ch.rx_cfg, &ctx.q, snr_norm)?.nats;
            // Chain-rule self-check: the SIC per-stream sum must reproduce
            // the log-det capacity on every trial.
            let sum = profile.sum_rate_nats();
            let rel = (sum - rate).abs() / rate.abs().max(1.0);
            if rel > 1e-8 {
                return Err(Error::Numerical(format!(
                    "SIC sum identity violated (dt={}, snr={snr_norm}): \
                     sum={sum}, logdet={rate}, rel={rel:.3e}",
                    ctx.dt
                )));
            }
            Ok(rate)
        }
        Scheme::Qpsk => {
            Ok(sic_rate_sum(profile, SchemeInput::Constellation(&Constellation::qpsk()))?.nats)
        }
        Scheme::Qam16 => {
            Ok(sic_rate_sum(profile, SchemeInput::Constellation(&Constellation::qam16()))?.nats)
        }
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Run an ergodic sweep, retaining per-trial rates.
pub fn run_sweep_detailed(cfg: &ExperimentConfig) -> Result<SweepData> {
    cfg.validate()?;
    let rx = ArrayConfig::new(cfg.lr, cfg.dr)?;
    let normalizer = 2.0 * cfg.lt.min(cfg.lr);

    let mut contexts = Vec::new();
    for &dt in &cfg.dt_list {
        let tx = ArrayConfig::new(cfg.lt, dt)?;
        let (q, q_sqrt) = build_covariance(cfg.lt, &tx, cfg.covariance)?;
        contexts.push(CurveContext { dt, tx, q, q_sqrt });
    }

    // (dt, snr, scheme) combo index, dt-major.
    let combos: Vec<(usize, usize, usize)> = (0..contexts.len())
        .flat_map(|c| {
            let cfg = &cfg;
            (0..cfg.snr_grid_db.len())
                .flat_map(move |s| (0..cfg.schemes.len()).map(move |k| (c, s, k)))
        })
        .collect();

    let per_trial: Vec<Vec<f64>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let paths = sample_for(cfg, t)?;
            let mut rates = vec![0.0f64; combos.len()];
            let mut idx = 0;
            for ctx in &contexts {
                let ch = angular_channel(&paths, &ctx.tx, &rx);
                for &snr_db in &cfg.snr_grid_db {
                    let snr_norm = 10f64.powf(snr_db / 10.0);
                    let eff = effective_channel(&ch, &ctx.q_sqrt, snr_norm)?;
                    let profile = sinr_profile(&eff);
                    for &scheme in &cfg.schemes {
                        rates[idx] = scheme_rate(scheme, &ch, ctx, &profile, snr_norm)?;
                        idx += 1;
                    }
                }
            }
            Ok(rates)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::with_capacity(combos.len());
    let mut trial_rates = Vec::with_capacity(combos.len());
    for (i, &(c, s, k)) in combos.iter().enumerate() {
        let values: Vec<f64> = per_trial.iter().map(|row| row[i]).collect();
        let (mean, _) = mean_and_stderr(&values);
        let normalized: Vec<f64> = values.iter().map(|v| v / normalizer).collect();
        let (_, stderr) = mean_and_stderr(&normalized);
        let dt = contexts[c].dt;
        let snr_db = cfg.snr_grid_db[s];
        let snr_norm = 10f64.powf(snr_db / 10.0);
        points.push(RatePoint {
            snr_db,
            scheme: cfg.schemes[k],
            dt,
            rate_nats: mean,
            rate_bits: mean / std::f64::consts::LN_2,
            normalized_rate: mean / normalizer,
            trials: cfg.trials,
            stderr,
            gamma: snr_norm * 4.0 * dt * cfg.dr,
        });
        trial_rates.push(values);
    }
    Ok(SweepData { points, trial_rates, normalizer })
}

/// Run an ergodic sweep and return the aggregated rows.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<RatePoint>> {
    Ok(run_sweep_detailed(cfg)?.points)
}

/// Parameters for the asymptotic trend studies.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    /// Array-length ladder for studies 1 and 2 (increasing).
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    /// Separation ladder for study 3 (decreasing).
    #[serde(default = "default_study_dts")]
    pub dt_list: Vec<f64>,
    /// Fixed transmit separation for studies 1 and 2.
    #[serde(default = "default_study_dt")]
    pub dt: f64,
    #[serde(default = "default_dr")]
    pub dr: f64,
    /// Load `α = L_t/L_r`; studies 1 and 2 scale `L_r = L_t/α`.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Fixed arrays for study 3.
    #[serde(default = "default_lt")]
    pub lt: f64,
    #[serde(default = "default_lr")]
    pub lr: f64,
    /// Normalized SNR `γ̃` (linear).
    #[serde(default = "default_study_snr")]
    pub snr_norm: f64,
    #[serde(default = "default_study_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    #[serde(default)]
    pub paths: Option<usize>,
}

fn default_sizes() -> Vec<usize> {
    vec![2, 4, 8]
}
fn default_study_dts() -> Vec<f64> {
    vec![0.5, 0.25, 0.125]
}
fn default_study_dt() -> f64 {
    0.25
}
fn default_alpha() -> f64 {
    1.0
}
fn default_study_snr() -> f64 {
    1.0
}
fn default_study_trials() -> usize {
    200
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            sizes: default_sizes(),
            dt_list: default_study_dts(),
            dt: default_study_dt(),
            dr: default_dr(),
            alpha: default_alpha(),
            lt: default_lt(),
            lr: default_lr(),
            snr_norm: default_study_snr(),
            trials: default_study_trials(),
            base_seed: default_seed(),
            paths: None,
        }
    }
}

/// One row of a trend study: the ergodic normalized gap at one ladder point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapPoint {
    pub study: u8,
    /// `L_t` for studies 1 and 2, `Δ_t` for study 3.
    pub param: f64,
    /// Ergodic normalized capacity gap in nats.
    pub gap: f64,
    pub trials: usize,
    pub stderr: f64,
}

fn ergodic_gap(
    trials: usize,
    base_seed: u64,
    p: usize,
    per_trial: impl Fn(u64) -> Result<f64> + Sync,
) -> Result<(f64, f64)> {
    let _ = p;
    let gaps: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| per_trial(base_seed ^ t))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_and_stderr(&gaps))
}

/// Run one of the three trend studies.
///
/// Study 1: normalized capacity loss from beamspace truncation per `L_t`.
/// Study 2: normalized gap between the critically spaced capacity and the
/// densely spaced truncated capacity per `L_t`.
/// Study 3: normalized gap between constrained capacity and the QPSK SIC
/// bound per `Δ_t`.
pub fn run_theorem_study(which: u8, cfg: &StudyConfig) -> Result<Vec<GapPoint>> {
    if cfg.trials < 1 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    match which {
        1 => study_truncation(cfg),
        2 => study_dense_vs_critical(cfg),
        3 => study_qpsk_gap(cfg),
        other => Err(Error::Config(format!("unknown theorem study {other} (expected 1, 2, or 3)"))),
    }
}

fn ladder_arrays(cfg: &StudyConfig, lt: usize) -> Result<(ArrayConfig, ArrayConfig, usize)> {
    let ltf = lt as f64;
    let lrf = ltf / cfg.alpha;
    let tx = ArrayConfig::new(ltf, cfg.dt)?;
    let rx = ArrayConfig::new(lrf, cfg.dr)?;
    let p = cfg
        .paths
        .unwrap_or_else(|| ((4.0 * ltf.min(lrf)).round() as usize).max(1));
    Ok((tx, rx, p))
}

fn study_truncation(cfg: &StudyConfig) -> Result<Vec<GapPoint>> {
    let mut out = Vec::new();
    for &lt in &cfg.sizes {
        let (tx, _, p) = ladder_arrays(cfg, lt)?;
        // Both arrays densely spaced: the dense covariance already confines the
        // input to the kept transmit beams, so only receive-side truncation can
        // produce a loss, and it needs Δ_r < 1/2 to drop any beam.
        let rx = ArrayConfig::new(lt as f64 / cfg.alpha, cfg.dt)?;
        let (q, _) = build_covariance(lt as f64, &tx, CovarianceMode::Auto)?;
        let normalizer = 2.0 * tx.length().min(rx.length());
        let (gap, stderr) = ergodic_gap(cfg.trials, cfg.base_seed, p, |seed| {
            let ps = sample_rayleigh_paths(p, seed)?;
            let ch = angular_channel(&ps, &tx, &rx);
            let truncated = truncate_effective(&ch);
            let full = gaussian_capacity(&ch.matrix, &tx, &rx, &q, cfg.snr_norm)?.nats;
            let trunc = gaussian_capacity(&truncated.matrix, &tx, &rx, &q, cfg.snr_norm)?.nats;
            Ok((full - trunc).abs() / normalizer)
        })?;
        out.push(GapPoint { study: 1, param: lt as f64, gap, trials: cfg.trials, stderr });
    }
    Ok(out)
}

fn study_dense_vs_critical(cfg: &StudyConfig) -> Result<Vec<GapPoint>> {
    let mut out = Vec::new();
    for &lt in &cfg.sizes {
        let (tx_dense, rx_dense, p) = ladder_arrays(cfg, lt)?;
        let lrf = lt as f64 / cfg.alpha;
        let tx_crit = ArrayConfig::new(lt as f64, 0.5)?;
        let rx_crit = ArrayConfig::new(lrf, 0.5)?;
        let (q_dense, _) = build_covariance(lt as f64, &tx_dense, CovarianceMode::Auto)?;
        let (q_crit, _) = build_covariance(lt as f64, &tx_crit, CovarianceMode::Critical)?;
        let normalizer = 2.0 * (lt as f64).min(lrf);
        let (gap, stderr) = ergodic_gap(cfg.trials, cfg.base_seed, p, |seed| {
            let ps = sample_rayleigh_paths(p, seed)?;
            let ch_crit = angular_channel(&ps, &tx_crit, &rx_crit);
            let ch_dense = angular_channel(&ps, &tx_dense, &rx_dense);
            let truncated = truncate_effective(&ch_dense);
            let c_crit =
                gaussian_capacity(&ch_crit.matrix, &tx_crit, &rx_crit, &q_crit, cfg.snr_norm)?
                    .nats;
            let c_dense =
                gaussian_capacity(&truncated.matrix, &tx_dense, &rx_dense, &q_dense, cfg.snr_norm)?
                    .nats;
            Ok((c_crit - c_dense).abs() / normalizer)
        })?;
        out.push(GapPoint { study: 2, param: lt as f64, gap, trials: cfg.trials, stderr });
    }
    Ok(out)
}

fn study_qpsk_gap(cfg: &StudyConfig) -> Result<Vec<GapPoint>> {
    let qpsk = Constellation::qpsk();
    let rx = ArrayConfig::new(cfg.lr, cfg.dr)?;
    let normalizer = 2.0 * cfg.lt.min(cfg.lr);
    let p = cfg
        .paths
        .unwrap_or_else(|| ((4.0 * cfg.lt.min(cfg.lr)).round() as usize).max(1));
    let mut out = Vec::new();
    for &dt in &cfg.dt_list {
        let tx = ArrayConfig::new(cfg.lt, dt)?;
        let (q, q_sqrt) = build_covariance(cfg.lt, &tx, CovarianceMode::Auto)?;
        let (gap, stderr) = ergodic_gap(cfg.trials, cfg.base_seed, p, |seed| {
            let ps = sample_rayleigh_paths(p, seed)?;
            let ch = angular_channel(&ps, &tx, &rx);
            let c_opt = gaussian_capacity(&ch.matrix, &tx, &rx, &q, cfg.snr_norm)?.nats;
            let eff = effective_channel(&ch, &q_sqrt, cfg.snr_norm)?;
            let profile = sinr_profile(&eff);
            let c_qpsk = sic_rate_sum(&profile, SchemeInput::Constellation(&qpsk))?.nats;
            Ok((c_opt - c_qpsk) / normalizer)
        })?;
        out.push(GapPoint { study: 3, param: dt, gap, trials: cfg.trials, stderr });
    }
    Ok(out)
}

/// Output format for [`emit`] and [`emit_gaps`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

impl FromStr for EmitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(EmitFormat::Csv),
            "json" => Ok(EmitFormat::Json),
            other => Err(Error::Config(format!("unknown format '{other}' (expected csv|json)"))),
        }
    }
}

fn to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Numerical(e.to_string()))?;
    for row in rows {
        w.serialize(row).map_err(|e| Error::Numerical(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Numerical(e.to_string()))
}

fn to_json<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut s = serde_json::to_string_pretty(rows).map_err(|e| Error::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Render sweep rows in the stable column order
/// `snr_db,scheme,dt,rate_nats,rate_bits,normalized_rate,trials,stderr,gamma`.
pub fn render(points: &[RatePoint], format: EmitFormat) -> Result<String> {
    match format {
        EmitFormat::Csv => to_csv(
            points,
            &[
                "snr_db",
                "scheme",
                "dt",
                "rate_nats",
                "rate_bits",
                "normalized_rate",
                "trials",
                "stderr",
                "gamma",
            ],
        ),
        EmitFormat::Json => to_json(points),
    }
}

/// Render trend-study rows (`study,param,gap,trials,stderr`).
pub fn render_gaps(points: &[GapPoint], format: EmitFormat) -> Result<String> {
    match format {
        EmitFormat::Csv => to_csv(points, &["study", "param", "gap", "trials", "stderr"]),
        EmitFormat::Json => to_json(points),
    }
}

fn write_output(path: &str, content: &str) -> Result<()> {
    if path == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(content.as_bytes())
            .map_err(|e| Error::Io { path: "<stdout>".into(), source: e })
    } else {
        std::fs::write(path, content).map_err(|e| Error::Io { path: path.into(), source: e })
    }
}

/// Write sweep rows to `path` (`-` for stdout).
pub fn emit(points: &[RatePoint], format: EmitFormat, path: &str) -> Result<()> {
    write_output(path, &render(points, format)?)
}

/// Write trend-study rows to `path` (`-` for stdout).
pub fn emit_gaps(points: &[GapPoint], format: EmitFormat, path: &str) -> Result<()> {
    write_output(path, &render_gaps(points, format)?)
}

/// Parse sweep rows back from CSV (round-trip support for golden tests).
pub fn parse_csv(text: &str) -> Result<Vec<RatePoint>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec.map_err(|e| Error::Config(format!("csv parse: {e}")))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            snr_grid_db: vec![0.0, 10.0],
            trials: 4,
            ..Default::default()
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = tiny_config();
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        let csv_a = render(&a, EmitFormat::Csv).unwrap();
        let csv_b = render(&b, EmitFormat::Csv).unwrap();
        assert_eq!(csv_a, csv_b);
    }

    #[test]
    fn sweep_row_bookkeeping() {
        let cfg = tiny_config();
        let points = run_sweep(&cfg).unwrap();
        assert_eq!(points.len(), 2 * 2 * 3); // dt × snr × scheme
        for p in &points {
            assert!((p.rate_bits - p.rate_nats / std::f64::consts::LN_2).abs() < 1e-12);
            assert!((p.normalized_rate - p.rate_nats / 2.0).abs() < 1e-12);
            let snr = 10f64.powf(p.snr_db / 10.0);
            assert!((p.gamma - snr * 4.0 * p.dt * cfg.dr).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_dominates_constellations() {
        let cfg = tiny_config();
        let points = run_sweep(&cfg).unwrap();
        for p in &points {
            if p.scheme == Scheme::Gaussian {
                continue;
            }
            let gauss = points
                .iter()
                .find(|q| {
                    q.scheme == Scheme::Gaussian && q.snr_db == p.snr_db && q.dt == p.dt
                })
                .unwrap();
            assert!(p.rate_nats <= gauss.rate_nats + 1e-9);
        }
    }

    #[test]
    fn forced_dense_at_critical_spacing_reports_parameters() {
        let cfg = ExperimentConfig {
            dt_list: vec![0.5],
            covariance: CovarianceMode::Dense,
            trials: 1,
            snr_grid_db: vec![0.0],
            ..Default::default()
        };
        let err = run_sweep(&cfg).unwrap_err().to_string();
        assert!(err.contains("0.5"), "error should name the separation: {err}");
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let cfg = ExperimentConfig { trials: 2, snr_grid_db: vec![3.0], ..Default::default() };
        let points = run_sweep(&cfg).unwrap();
        let text = render(&points, EmitFormat::Csv).unwrap();
        let parsed = parse_csv(&text).unwrap();
        let text2 = render(&parsed, EmitFormat::Csv).unwrap();
        assert_eq!(text, text2);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn json_and_csv_carry_identical_values() {
        let cfg = ExperimentConfig { trials: 2, snr_grid_db: vec![5.0], ..Default::default() };
        let points = run_sweep(&cfg).unwrap();
        let json = render(&points, EmitFormat::Json).unwrap();
        let parsed: Vec<RatePoint> = serde_json::from_str(&json).unwrap();
        assert_eq!(points, parsed);
    }

    #[test]
    fn empty_point_list_gives_header_only_csv() {
        let text = render(&[], EmitFormat::Csv).unwrap();
        assert_eq!(
            text,
            "snr_db,scheme,dt,rate_nats,rate_bits,normalized_rate,trials,stderr,gamma\n"
        );
    }

    #[test]
    fn study_configs_validate() {
        let cfg = StudyConfig { trials: 0, ..Default::default() };
        assert!(run_theorem_study(1, &cfg).is_err());
        assert!(run_theorem_study(9, &StudyConfig::default()).is_err());
    }

    #[test]
    fn theorem_studies_smoke() {
        let cfg = StudyConfig {
            sizes: vec![1, 2],
            dt_list: vec![0.5, 0.25],
            trials: 8,
            ..Default::default()
        };
        for which in 1..=3u8 {
            let rows = run_theorem_study(which, &cfg).unwrap();
            assert_eq!(rows.len(), 2);
            for r in &rows {
                assert!(r.gap.is_finite() && r.gap >= -1e-12, "study {which}: {r:?}");
            }
        }
    }
}
