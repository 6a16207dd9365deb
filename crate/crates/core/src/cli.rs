//! Config-driven experiments behind the `otoc-rmt` binary.
//!
//! A config is a TOML document with the sections `[spectrum]`, `[ensemble]`,
//! `[operators]`, `[run]`, `[output]` and the optional `[moments]` and
//! `[variance]`. Unknown keys are rejected. Energies are measured in mean
//! spacings `d`, so `levels_per_window = N = Δ/d` is the only chaos-strength
//! knob; `beta` and every time are given in units of `1/Δ`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analytic::{correlated_moment, corr_tr_z_squared, first_moment, mean_tr_z, MomentSpec};
use crate::ensemble::{sample_member, EigenvalueMode, EnsembleConfig, OverlapMode, SpectrumModel, WindowShape, DEFAULT_BAND_CUTOFF};
use crate::observables::{OperatorKind, Support};
use crate::otoc::{run_series, EnvelopeFit, NormalizationMode, OtocSeries, PairSpec, RunConfig};
use crate::propagator::{build_y_block, ComplexArgument};
use crate::stats::ComplexAccumulator;
use crate::wick::{exact_moment, exact_trace, variance_decomposition, PatternFilter, Restrict, TraceFactor};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const WORKERS_ENV: &str = "OTOC_RMT_WORKERS";
pub const SERIES_HEADER: &str = "t,C_mean,C_stderr,C_analytic,F_mean_re,F_mean_im,F_stderr,F_analytic_re,F_analytic_im";

#[derive(Debug, Parser)]
#[command(name = "otoc-rmt", version, about = "OTOC Monte Carlo and leading-order theory for banded random matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Ensemble seed; overrides `[ensemble] seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; overrides `[run] workers`.
    #[arg(long, global = true, env = WORKERS_ENV)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo C(t), F(t) against the predictions; writes series.csv and summary.json.
    Run { config: PathBuf },
    /// Closed-form moments against the contraction oracle and Monte Carlo; writes moments.json.
    ValidateMoments { config: PathBuf },
    /// N-doubling study of var[F] and of the exact trace correlations; writes variance.json.
    VarianceReport { config: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    pub operators: OperatorSection,
    pub run: RunSection,
    #[serde(default)]
    pub moments: MomentsSection,
    #[serde(default)]
    pub variance: VarianceSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub dimension: usize,
    pub levels_per_window: f64,
    #[serde(default = "one")]
    pub mean_spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub eigenvalue_mode: EigenvalueMode,
    pub overlap_mode: OverlapMode,
    pub band_cutoff: f64,
    pub window: WindowShape,
    pub seed: u64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            eigenvalue_mode: EigenvalueMode::Picket,
            overlap_mode: OverlapMode::Gaussian,
            band_cutoff: DEFAULT_BAND_CUTOFF,
            window: WindowShape::Gaussian,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    pub kind: OperatorKind,
    /// Inclusive `[lo, hi]`.
    pub support: [usize; 2],
    #[serde(default = "four")]
    pub bandwidth: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// βΔ.
    #[serde(default)]
    pub beta: f64,
    /// Last time of the grid, in `1/Δ`.
    pub t_max: f64,
    pub t_points: usize,
    pub members: usize,
    #[serde(default)]
    pub normalization: NormalizationMode,
    pub workers: Option<usize>,
    /// Upper end of the envelope fit, in `1/Δ`.
    #[serde(default = "envelope_t_max")]
    pub envelope_t_max: f64,
    /// Grid times (in `1/Δ`) at which ⟨C⟩ is compared with its asymptote.
    #[serde(default)]
    pub asymptote_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentsSection {
    /// Randomized (χ, m) instances per order.
    pub instances: usize,
    pub mc_points: usize,
    pub mc_members: usize,
}

impl Default for MomentsSection {
    fn default() -> Self {
        Self { instances: 20, mc_points: 10, mc_members: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VarianceSection {
    /// Two values of N; D scales with N.
    pub levels: [f64; 2],
    pub members: usize,
    /// Time (in `1/Δ`) at which var[F] is measured.
    pub t: f64,
}

impl Default for VarianceSection {
    fn default() -> Self {
        Self { levels: [16.0, 32.0], members: 400, t: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

fn one() -> f64 {
    1.0
}

fn four() -> usize {
    4
}

fn envelope_t_max() -> f64 {
    2.5
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn spectrum(&self) -> Result<SpectrumModel> {
        let s = &self.spectrum;
        SpectrumModel::new(s.dimension, s.mean_spacing, s.levels_per_window * s.mean_spacing)
    }

    pub fn ensemble(&self) -> Result<EnsembleConfig> {
        let e = &self.ensemble;
        Ok(EnsembleConfig {
            spectrum: self.spectrum()?,
            eigenvalue_mode: e.eigenvalue_mode,
            overlap_mode: e.overlap_mode,
            window: e.window,
            band_cutoff: e.band_cutoff,
            seed: e.seed,
        })
    }

    pub fn pair(&self) -> Result<PairSpec> {
        let [lo, hi] = self.operators.support;
        if lo > hi || hi >= self.spectrum.dimension {
            return Err(Error::InvalidConfig(format!(
                "support [{lo}, {hi}] does not fit dimension {}",
                self.spectrum.dimension
            )));
        }
        Ok(PairSpec {
            kind: self.operators.kind,
            support: Support::new(lo, hi),
            bandwidth: self.operators.bandwidth,
            seed: self.operators.seed,
        })
    }

    /// Evenly spaced grid on [0, t_max] in raw time units.
    pub fn t_grid(&self) -> Result<Vec<f64>> {
        let r = &self.run;
        if r.t_points == 0 || !(r.t_max >= 0.0 && r.t_max.is_finite()) {
            return Err(Error::InvalidConfig("t_points must be positive and t_max non-negative".into()));
        }
        let delta = self.spectrum()?.delta();
        if r.t_points == 1 {
            return Ok(vec![0.0]);
        }
        let step = r.t_max / (r.t_points - 1) as f64;
        Ok((0..r.t_points).map(|k| k as f64 * step / delta).collect())
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        let config = RunConfig {
            ensemble: self.ensemble()?,
            pair: self.pair()?,
            beta: self.run.beta / self.spectrum()?.delta(),
            t_grid: self.t_grid()?,
            members: self.run.members,
            normalization: self.run.normalization,
            workers: self.run.workers,
        };
        config.validate()?;
        Ok(config)
    }

    fn apply_overrides(&mut self, cli: &Cli) {
        if let Some(seed) = cli.seed {
            self.ensemble.seed = seed;
        }
        if let Some(w) = cli.workers {
            self.run.workers = Some(w);
        }
        if let Some(dir) = &cli.out_dir {
            self.output.dir = dir.clone();
        }
    }
}

/// Whether every acceptance band a command evaluated held.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    BandFailure,
}

impl Outcome {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::BandFailure
        }
    }

    /// 0 when all bands hold, 2 otherwise.
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::BandFailure => 2,
        }
    }
}

/// Executes the parsed command line.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let path = match &cli.command {
        Command::Run { config } | Command::ValidateMoments { config } | Command::VarianceReport { config } => config,
    };
    let mut config = ExperimentConfig::load(path)?;
    config.apply_overrides(cli);
    fs::create_dir_all(&config.output.dir)?;
    match cli.command {
        Command::Run { .. } => cmd_run(&config),
        Command::ValidateMoments { .. } => cmd_validate_moments(&config),
        Command::VarianceReport { .. } => cmd_variance_report(&config),
    }
}

pub fn series_csv(series: &OtocSeries) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for k in 0..series.t.len() {
        let row = [
            series.t[k],
            series.c_mean[k],
            series.c_stderr[k],
            series.c_analytic[k],
            series.f_mean[k].re,
            series.f_mean[k].im,
            series.f_stderr[k],
            series.f_analytic[k].re,
            series.f_analytic[k].im,
        ];
        let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeBand {
    pub fit: Option<EnvelopeFit>,
    pub target: f64,
    pub relative_error: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Bands {
    pub envelope: EnvelopeBand,
    pub f_pointwise_fraction: f64,
    pub f_pointwise_pass: bool,
    pub asymptote: Vec<crate::otoc::AsymptoteCheck>,
    pub pass: bool,
}

/// Evaluates the OTOC acceptance bands of a finished series.
pub fn evaluate_bands(series: &OtocSeries, model: &SpectrumModel, envelope_t_max: f64, asymptote_times: &[f64]) -> Bands {
    let delta = model.delta();
    let n = model.levels_per_window();
    let t_max = envelope_t_max / delta;
    let target = 2.0 * delta * delta;
    let fit = series.envelope_fit(t_max);
    let relative_error = fit.map(|f| (f.coefficient - target).abs() / target);
    let envelope = EnvelopeBand { fit, target, relative_error, pass: relative_error.is_some_and(|e| e <= 0.1) };
    let fraction = series.f_pointwise_fraction(t_max, n);
    let asymptote: Vec<_> = series
        .asymptote_checks(0.0, n)
        .into_iter()
        .filter(|c| asymptote_times.iter().any(|&a| (c.t * delta - a).abs() < 1e-9 * a.max(1.0)))
        .collect();
    let pass = envelope.pass && fraction >= 0.9 && asymptote.iter().all(|c| c.pass);
    Bands { envelope, f_pointwise_fraction: fraction, f_pointwise_pass: fraction >= 0.9, asymptote, pass }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

pub fn cmd_run(config: &ExperimentConfig) -> Result<Outcome> {
    let run = config.run_config()?;
    let model = run.ensemble.spectrum;
    let delta = model.delta();
    for &a in &config.run.asymptote_times {
        if !run.t_grid.iter().any(|&t| (t * delta - a).abs() < 1e-9 * a.max(1.0)) {
            return Err(Error::InvalidConfig(format!("asymptote time {a} is not on the grid")));
        }
    }
    let (bands_valid, warnings) = match run.validate_acceptance() {
        Ok(w) => (true, w),
        Err(e) => (false, vec![format!("acceptance bands skipped: {e}")]),
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let series = run_series(&run)?;
    fs::write(config.output.dir.join("series.csv"), series_csv(&series))?;

    let bands = bands_valid.then(|| evaluate_bands(&series, &model, config.run.envelope_t_max, &config.run.asymptote_times));
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "N": model.levels_per_window(),
        "D": model.dimension(),
        "delta": delta,
        "M": series.members,
        "failed_members": series.failed,
        "t_delta": series.t.iter().map(|t| t * delta).collect::<Vec<_>>(),
        "tr_z": series.tr_z,
        "tr_z_hf": model.tr_z_hf(run.beta),
        "c_asymptote": series.c_asymptote,
        "max_residue": series.max_residue,
        "envelope_coefficient": bands.as_ref().and_then(|b| b.envelope.fit.map(|f| f.coefficient)),
        "envelope_coefficient_over_delta2": bands.as_ref().and_then(|b| b.envelope.fit.map(|f| f.coefficient / (delta * delta))),
        "bands": bands,
        "warnings": warnings,
    });
    write_json(&config.output.dir.join("summary.json"), &summary)?;
    Ok(Outcome::from_pass(bands.is_none_or(|b| b.pass)))
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentCheck {
    pub name: String,
    pub value: Complex64,
    pub reference: Complex64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl MomentCheck {
    fn relative(name: String, value: Complex64, reference: Complex64, tolerance: f64) -> Self {
        let relative_error = (value - reference).norm() / reference.norm();
        Self { name, value, reference, relative_error, tolerance, pass: relative_error <= tolerance }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct McMomentCheck {
    pub m: usize,
    pub chi: Complex64,
    pub mc: Complex64,
    pub stderr: f64,
    pub analytic: Complex64,
    pub pass: bool,
}

/// Random χ with −1/(4Δ) ≤ Re χ ≤ 0, |Im χ| ≤ 2/Δ, and indices within `spread` levels of `center`.
fn random_instance(rng: &mut ChaCha8Rng, k: usize, model: &SpectrumModel, center: usize, spread: usize) -> (Vec<Complex64>, Vec<usize>) {
    let delta = model.delta();
    let chis = (0..k)
        .map(|_| Complex64::new(-rng.random::<f64>() / (4.0 * delta), (4.0 * rng.random::<f64>() - 2.0) / delta))
        .collect();
    let lo = center.saturating_sub(spread);
    let hi = (center + spread).min(model.dimension() - 1);
    let m = (0..k).map(|_| rng.random_range(lo..=hi)).collect();
    (chis, m)
}

/// Gaussian-mode Monte Carlo of ⟨Y_mm(χ)⟩ against the first moment.
pub fn mc_first_moments(ensemble: &EnsembleConfig, points: &[(usize, Complex64)], members: usize) -> Result<Vec<McMomentCheck>> {
    let mut acc = vec![ComplexAccumulator::default(); points.len()];
    for i in 0..members as u64 {
        let member = sample_member(ensemble, i)?;
        for (a, &(m, chi)) in acc.iter_mut().zip(points) {
            let y = build_y_block(&member, ComplexArgument::new(chi)?, m..m + 1)?;
            a.push(y.y[(0, 0)]);
        }
    }
    let model = &ensemble.spectrum;
    Ok(points
        .iter()
        .zip(&acc)
        .map(|(&(m, chi), a)| {
            let analytic = first_moment(chi, model.energy(m), model.delta());
            let mc = a.mean();
            let stderr = a.stderr();
            McMomentCheck { m, chi, mc, stderr, analytic, pass: (mc - analytic).norm() <= 3.0 * stderr }
        })
        .collect())
}

pub fn cmd_validate_moments(config: &ExperimentConfig) -> Result<Outcome> {
    let model = config.spectrum()?;
    let ensemble = config.ensemble()?;
    let m = &config.moments;
    let mut rng = ChaCha8Rng::seed_from_u64(ensemble.seed);
    let center = model.dimension() / 2;
    let spread = (2.0 * model.levels_per_window()) as usize;
    let mut checks = Vec::new();
    for k in 1..=3 {
        for i in 0..m.instances {
            let (chis, idx) = random_instance(&mut rng, k, &model, center, spread);
            let spec = MomentSpec::chain(chis.clone(), idx.clone());
            let (value, reference, tol) = if k == 1 {
                (first_moment(chis[0], model.energy(idx[0]), model.delta()), exact_moment(&spec, &model, Restrict::All)?, 1e-12)
            } else {
                (correlated_moment(&spec, &model)?, exact_moment(&spec, &model, Restrict::ConnectedNonCrossing)?, 1e-8)
            };
            checks.push(MomentCheck::relative(format!("k{k}_chain_{i}"), value, reference, tol));
        }
    }
    let beta = config.run.beta / model.delta();
    let z = TraceFactor::partition_function(beta, model.dimension());
    let one = Complex64::new(1.0, 0.0);
    checks.push(MomentCheck::relative(
        "tr_z_mean".into(),
        one * mean_tr_z(beta, &model),
        exact_trace(std::slice::from_ref(&z), &model, PatternFilter::All)?,
        1e-10,
    ));
    checks.push(MomentCheck::relative(
        "tr_z_squared_corr".into(),
        one * corr_tr_z_squared(beta, &model),
        exact_trace(&[z.clone(), z], &model, PatternFilter::LinkedNonCrossing)?,
        1e-10,
    ));

    let mc_ensemble = EnsembleConfig { overlap_mode: OverlapMode::Gaussian, ..ensemble };
    let points: Vec<(usize, Complex64)> = (0..m.mc_points)
        .map(|_| {
            let (chis, idx) = random_instance(&mut rng, 1, &model, center, spread);
            (idx[0], chis[0])
        })
        .collect();
    let mc = mc_first_moments(&mc_ensemble, &points, m.mc_members)?;

    let pass = checks.iter().all(|c| c.pass) && mc.iter().all(|c| c.pass);
    write_json(
        &config.output.dir.join("moments.json"),
        &json!({
            "schema_version": SCHEMA_VERSION,
            "config": config,
            "checks": checks,
            "monte_carlo": mc,
            "pass": pass,
        }),
    )?;
    Ok(Outcome::from_pass(pass))
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceRow {
    pub levels_per_window: f64,
    pub dimension: usize,
    pub members: usize,
    pub f_mean: Complex64,
    pub relative_variance: f64,
    pub oracle_ratio: f64,
}

pub fn cmd_variance_report(config: &ExperimentConfig) -> Result<Outcome> {
    let base = config.spectrum()?;
    let per_level = base.dimension() as f64 / base.levels_per_window();
    let support_len = config.operators.support[1] - config.operators.support[0] + 1;
    let v = &config.variance;
    let mut rows = Vec::new();
    for &n in &v.levels {
        let d = (per_level * n).round() as usize;
        let model = SpectrumModel::new(d, base.mean_spacing(), n * base.mean_spacing())?;
        let mut run = config.run_config()?;
        run.ensemble.spectrum = model;
        run.pair.support = Support::centered(d, support_len);
        run.beta = config.run.beta / model.delta();
        run.t_grid = vec![v.t / model.delta()];
        run.members = v.members;
        let series = run_series(&run)?;
        // Tr Z is extensive: its 1/N slope is taken at the base dimension
        let fixed = SpectrumModel::new(base.dimension(), base.mean_spacing(), n * base.mean_spacing())?;
        let z = TraceFactor::partition_function(run.beta, base.dimension());
        let oracle = variance_decomposition(&z, &z, &fixed)?;
        rows.push(VarianceRow {
            levels_per_window: n,
            dimension: d,
            members: series.members,
            f_mean: series.f_mean[0],
            relative_variance: series.f_relative_variance()[0],
            oracle_ratio: oracle.ratio_all,
        });
    }
    let mc_halving = rows[1].relative_variance / rows[0].relative_variance;
    let oracle_halving = rows[1].oracle_ratio / rows[0].oracle_ratio;
    let expected = v.levels[0] / v.levels[1];
    let mc_pass = (mc_halving / expected - 1.0).abs() <= 0.3;
    let oracle_pass = (oracle_halving / expected - 1.0).abs() <= 0.05;
    write_json(
        &config.output.dir.join("variance.json"),
        &json!({
            "schema_version": SCHEMA_VERSION,
            "config": config,
            "rows": rows,
            "expected_ratio": expected,
            "mc_ratio": mc_halving,
            "mc_pass": mc_pass,
            "oracle_ratio": oracle_halving,
            "oracle_pass": oracle_pass,
        }),
    )?;
    Ok(Outcome::from_pass(mc_pass && oracle_pass))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[spectrum]
dimension = 128
levels_per_window = 4

[operators]
kind = "hopping"
support = [56, 71]

[run]
t_max = 2.0
t_points = 5
members = 4
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.spectrum.mean_spacing, 1.0);
        assert_eq!(c.operators.bandwidth, 4);
        assert_eq!(c.ensemble.overlap_mode, OverlapMode::Gaussian);
        assert_eq!(c.output.dir, PathBuf::from("out"));
        let grid = c.t_grid().unwrap();
        assert_eq!(grid.len(), 5);
        assert!((grid[4] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn unknown_key_is_named_with_its_line() {
        let text = MINIMAL.replace("members = 4", "members = 4\nfoo = 1");
        let msg = ExperimentConfig::from_toml(&text).unwrap_err().to_string();
        assert!(msg.contains("foo"), "{msg}");
        assert!(msg.contains("line 14"), "{msg}");
    }

    #[test]
    fn missing_section_is_rejected() {
        let text = MINIMAL.replace("[operators]\nkind = \"hopping\"\nsupport = [56, 71]\n", "");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn csv_has_exact_header_and_one_row_per_time() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let s = run_series(&c.run_config().unwrap()).unwrap();
        let csv = series_csv(&s);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SERIES_HEADER);
        assert_eq!(lines.len(), 6);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 9 && !l.contains(' ')));
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }

    #[test]
    fn support_outside_dimension_is_an_error() {
        let text = MINIMAL.replace("[56, 71]", "[120, 130]");
        let c = ExperimentConfig::from_toml(&text).unwrap();
        assert!(matches!(c.run_config(), Err(Error::InvalidConfig(_))));
    }
}
