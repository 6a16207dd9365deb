//! Monte Carlo estimation of C(t) and F(t) over ensemble members.
//!
//! Per member and time, with `U = Y(−it)` and `Z = Y(−β)`:
//!
//! ```text
//! C(t) = −[T₁ + T₂ − T₃ − T₄] / Tr Z
//! T₁ = Tr(V U W U† V U W Y(it−β))      T₂ = Tr(V Y(−β−it) W U† V U W U†)
//! T₃ = Tr(Z W U† V² U W)               T₄ = Tr(Z V U W² U† V)
//! F(t) = Tr(V Y(χ) W Y(χ)† V Y(χ) W Y(χ)†) / Tr Z,   χ = −β/4 − it
//! ```
//!
//! In the first two traces the Boltzmann factor is merged into the adjacent
//! propagator. For orthogonal O this is the group law and changes nothing;
//! for independent Gaussian amplitudes it is the form whose ensemble average
//! the leading-order theory describes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{c_asymptote, c_prediction, f_prediction, mean_tr_z, LocalPair};
use crate::ensemble::{sample_member, EnsembleConfig, EnsembleMember};
use crate::observables::{generate_pair, ObservablePair, OperatorKind, Support};
use crate::propagator::{trace_z, ComplexArgument, OverlapBlock};
use crate::stats::{weighted_line_fit, ComplexAccumulator, RealAccumulator, Summary};
use crate::{Error, Result};

/// Allowed imaginary residue of C relative to the magnitude of its four traces.
pub const HERMITICITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    /// Each member divides by its own Tr Z.
    #[default]
    PerMember,
    /// Every member divides by the closed-form ⟨Tr Z⟩.
    MeanZ,
}

/// Recipe for the operator pair of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    pub kind: OperatorKind,
    pub support: Support,
    pub bandwidth: usize,
    pub seed: u64,
}

impl PairSpec {
    pub fn generate(&self, d: usize) -> Result<ObservablePair> {
        generate_pair(d, self.kind, self.support, self.bandwidth, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub ensemble: EnsembleConfig,
    pub pair: PairSpec,
    pub beta: f64,
    pub t_grid: Vec<f64>,
    pub members: usize,
    pub normalization: NormalizationMode,
    /// Thread count; `None` uses the global pool. Results do not depend on it.
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.ensemble.validate()?;
        if self.members < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 members, got {}", self.members)));
        }
        if self.t_grid.is_empty() {
            return Err(Error::InvalidConfig("time grid is empty".into()));
        }
        if self.t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidConfig("times must be finite and non-negative".into()));
        }
        if self.t_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidConfig("time grid must be sorted".into()));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!("β must be non-negative, got {}", self.beta)));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("worker count must be positive".into()));
        }
        Ok(())
    }

    /// Extra limits for runs compared against the large-N theory. Returns warnings.
    pub fn validate_acceptance(&self) -> Result<Vec<String>> {
        self.validate()?;
        let model = &self.ensemble.spectrum;
        let n = model.levels_per_window();
        let mut warnings = Vec::new();
        if n < 8.0 {
            return Err(Error::InvalidConfig(format!("N = {n} is below 8")));
        }
        if n < 16.0 {
            warnings.push(format!("N = {n} is below 16; 1/N corrections are sizeable"));
        }
        if self.beta > 1.0 / (4.0 * model.delta()) + 1e-12 {
            return Err(Error::InvalidConfig(format!("β = {} exceeds 1/(4Δ)", self.beta)));
        }
        let b = self.ensemble.band_levels();
        let s = self.pair.support;
        if s.lo < b || s.hi + b >= model.dimension() {
            return Err(Error::InvalidConfig(format!(
                "support [{}, {}] must stay {b} levels away from the spectrum edges",
                s.lo, s.hi
            )));
        }
        Ok(warnings)
    }
}

/// C and F of one member at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub c: f64,
    pub f: Complex64,
    /// |Im C| relative to the trace scale.
    pub residue: f64,
}

/// Which Tr Z divides the traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Denominator {
    Member,
    Fixed(f64),
}

fn cplx(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|x| Complex64::new(x, 0.0))
}

fn tr(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    a.iter().zip(b.transpose().iter()).map(|(x, y)| x * y).sum()
}

/// Per-member state reused across the time grid.
pub struct MemberEvaluator {
    block: OverlapBlock,
    v: DMatrix<Complex64>,
    w: DMatrix<Complex64>,
    v2: DMatrix<Complex64>,
    w2: DMatrix<Complex64>,
    wzw: DMatrix<Complex64>,
    vzv: DMatrix<Complex64>,
    beta: f64,
    denom: f64,
}

impl MemberEvaluator {
    pub fn new(member: &EnsembleMember, pair: &ObservablePair, beta: f64, denominator: Denominator) -> Result<Self> {
        if pair.dimension() != member.dimension() {
            return Err(Error::InvalidConfig("operator and member dimensions differ".into()));
        }
        let block = OverlapBlock::new(member, pair.support.range());
        let (vb, wb) = pair.blocks();
        let v = cplx(&vb);
        let w = cplx(&wb);
        let z = block.build(ComplexArgument::boltzmann(beta)?)?.y;
        let denom = match denominator {
            Denominator::Member => trace_z(member, beta)?,
            Denominator::Fixed(x) => x,
        };
        Ok(Self {
            v2: &v * &v,
            w2: &w * &w,
            wzw: &w * &z * &w,
            vzv: &v * &z * &v,
            block,
            v,
            w,
            beta,
            denom,
        })
    }

    /// The Tr Z this member divides by.
    pub fn denominator(&self) -> f64 {
        self.denom
    }

    pub fn eval(&self, t: f64) -> Result<Point> {
        let u = self.block.build(ComplexArgument::evolution(t)?)?.y;
        let ub = u.map(|z| z.conj());
        let (ym, y) = if self.beta == 0.0 {
            (u.clone(), u.clone())
        } else {
            (
                self.block.build(ComplexArgument::new(Complex64::new(-self.beta, -t))?)?.y,
                self.block.build(ComplexArgument::regularized(self.beta, t)?)?.y,
            )
        };
        let p = &self.v * &u;
        let q = &self.w * &ub;
        let pq = &p * &q;
        let t1 = tr(&(&pq * &p), &(&self.w * ym.map(|z| z.conj())));
        let t2 = tr(&(&self.v * &ym), &(&q * &pq));
        let t3 = tr(&(&self.wzw * &ub), &(&self.v2 * &u));
        let t4 = tr(&(&self.vzv * &u), &(&self.w2 * &ub));
        let c = -(t1 + t2 - t3 - t4) / self.denom;
        let scale = (t1.norm() + t2.norm() + t3.norm() + t4.norm()) / self.denom.abs();
        let residue = if scale > 0.0 { c.im.abs() / scale } else { 0.0 };
        if residue > HERMITICITY_TOL {
            return Err(Error::InvalidConfig(format!("C(t = {t}) has imaginary residue {residue:.2e}")));
        }
        let a = &self.v * &y * &self.w * y.map(|z| z.conj());
        let f = tr(&a, &a) / self.denom;
        Ok(Point { c: c.re, f, residue })
    }
}

/// C(t) of one member, normalized by its own Tr Z.
pub fn eval_c(member: &EnsembleMember, pair: &ObservablePair, beta: f64, t: f64) -> Result<f64> {
    Ok(MemberEvaluator::new(member, pair, beta, Denominator::Member)?.eval(t)?.c)
}

/// F(t) of one member, normalized by its own Tr Z.
pub fn eval_f(member: &EnsembleMember, pair: &ObservablePair, beta: f64, t: f64) -> Result<Complex64> {
    Ok(MemberEvaluator::new(member, pair, beta, Denominator::Member)?.eval(t)?.f)
}

/// Sample statistics of C and F on the time grid, with the leading-order predictions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OtocSeries {
    pub t: Vec<f64>,
    pub c_mean: Vec<f64>,
    pub c_var: Vec<f64>,
    pub c_stderr: Vec<f64>,
    pub f_mean: Vec<Complex64>,
    pub f_var: Vec<f64>,
    pub f_stderr: Vec<f64>,
    pub c_analytic: Vec<f64>,
    pub f_analytic: Vec<Complex64>,
    /// |⟨F⟩| prediction with the Gaussian envelope exp{−2t²Δ²} removed.
    pub f_content: Vec<f64>,
    pub c_asymptote: f64,
    /// Members that entered the statistics.
    pub members: usize,
    pub failed: usize,
    pub failures: Vec<String>,
    pub tr_z: Summary<f64>,
    /// Per time, fraction of members with |F − ⟨F⟩| above five standard deviations.
    pub outlier_fraction: Vec<f64>,
    pub max_residue: f64,
}

/// Weighted fit of −log(|⟨F⟩_MC| / content) against t².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeFit {
    /// Fitted quadratic coefficient; the prediction is 2Δ².
    pub coefficient: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

/// ⟨C⟩ at one late time against the time-independent limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoteCheck {
    pub t: f64,
    pub mc: f64,
    pub stderr: f64,
    pub asymptote: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OtocSeries {
    /// var[F]/|⟨F⟩|² per time.
    pub fn f_relative_variance(&self) -> Vec<f64> {
        self.f_var.iter().zip(&self.f_mean).map(|(v, m)| v / m.norm_sqr()).collect()
    }

    fn upto(&self, t_max: f64) -> impl Iterator<Item = usize> + '_ {
        (0..self.t.len()).filter(move |&k| self.t[k] <= t_max * (1.0 + 1e-12))
    }

    /// Envelope fit over times `≤ t_max`, each point weighted by (|⟨F⟩|/stderr)².
    pub fn envelope_fit(&self, t_max: f64) -> Option<EnvelopeFit> {
        let (mut x, mut y, mut w) = (Vec::new(), Vec::new(), Vec::new());
        for k in self.upto(t_max) {
            let f = self.f_mean[k].norm();
            if f > 0.0 && self.f_content[k] > 0.0 && self.f_stderr[k] > 0.0 {
                x.push(self.t[k] * self.t[k]);
                y.push(-(f / self.f_content[k]).ln());
                w.push((f / self.f_stderr[k]).powi(2));
            }
        }
        let (intercept, coefficient, stderr) = weighted_line_fit(&x, &y, &w)?;
        Some(EnvelopeFit { coefficient, stderr, intercept, points: x.len() })
    }

    /// Fraction of times `≤ t_max` with |F_MC − F_pred| ≤ 3·stderr + (2/n)·|F_pred|.
    pub fn f_pointwise_fraction(&self, t_max: f64, n: f64) -> f64 {
        let ks: Vec<usize> = self.upto(t_max).collect();
        let ok = ks
            .iter()
            .filter(|&&k| {
                let a = self.f_analytic[k];
                (self.f_mean[k] - a).norm() <= 3.0 * self.f_stderr[k] + 2.0 / n * a.norm()
            })
            .count();
        ok as f64 / ks.len().max(1) as f64
    }

    /// Checks ⟨C⟩ against the asymptote at every time `≥ t_min`, with tolerance 3·stderr + 2/n relative.
    pub fn asymptote_checks(&self, t_min: f64, n: f64) -> Vec<AsymptoteCheck> {
        (0..self.t.len())
            .filter(|&k| self.t[k] >= t_min * (1.0 - 1e-12))
            .map(|k| {
                let tolerance = 3.0 * self.c_stderr[k] + 2.0 / n * self.c_asymptote.abs();
                AsymptoteCheck {
                    t: self.t[k],
                    mc: self.c_mean[k],
                    stderr: self.c_stderr[k],
                    asymptote: self.c_asymptote,
                    tolerance,
                    pass: (self.c_mean[k] - self.c_asymptote).abs() <= tolerance,
                }
            })
            .collect()
    }
}

struct MemberResult {
    points: Vec<Point>,
    tr_z: f64,
}

fn evaluate_member(config: &RunConfig, pair: &ObservablePair, denominator: Denominator, index: u64) -> Result<MemberResult> {
    let member = sample_member(&config.ensemble, index)?;
    let ev = MemberEvaluator::new(&member, pair, config.beta, denominator)?;
    let tr_z = match denominator {
        Denominator::Member => ev.denominator(),
        Denominator::Fixed(_) => trace_z(&member, config.beta)?,
    };
    let points = config.t_grid.iter().map(|&t| ev.eval(t)).collect::<Result<Vec<_>>>()?;
    Ok(MemberResult { points, tr_z })
}

/// Runs members `0..config.members`.
pub fn run_series(config: &RunConfig) -> Result<OtocSeries> {
    let indices: Vec<u64> = (0..config.members as u64).collect();
    run_members(config, &indices)
}

/// Runs the given member indices; accumulation follows the order of `indices`.
pub fn run_members(config: &RunConfig, indices: &[u64]) -> Result<OtocSeries> {
    config.validate()?;
    let model = config.ensemble.spectrum;
    let pair = config.pair.generate(model.dimension())?;
    let denominator = match config.normalization {
        NormalizationMode::PerMember => Denominator::Member,
        NormalizationMode::MeanZ => Denominator::Fixed(mean_tr_z(config.beta, &model)),
    };
    let work = || -> Vec<Result<MemberResult>> {
        indices
            .par_iter()
            .map(|&i| evaluate_member(config, &pair, denominator, i))
            .collect()
    };
    let results = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let nt = config.t_grid.len();
    let mut c_acc = vec![RealAccumulator::default(); nt];
    let mut f_acc = vec![ComplexAccumulator::default(); nt];
    let mut z_acc = RealAccumulator::default();
    let mut failures = Vec::new();
    let mut samples: Vec<Vec<Complex64>> = Vec::with_capacity(indices.len());
    let mut max_residue = 0.0f64;
    for (i, r) in indices.iter().zip(results) {
        match r {
            Ok(m) => {
                z_acc.push(m.tr_z);
                for (k, p) in m.points.iter().enumerate() {
                    c_acc[k].push(p.c);
                    f_acc[k].push(p.f);
                    max_residue = max_residue.max(p.residue);
                }
                samples.push(m.points.iter().map(|p| p.f).collect());
            }
            Err(e) => failures.push(format!("member {i}: {e}")),
        }
    }
    let total = indices.len();
    if failures.len() * 100 > total || samples.len() < 2 {
        return Err(Error::RunFailed {
            failed: failures.len(),
            total,
            first: failures.first().cloned().unwrap_or_default(),
        });
    }

    let outlier_fraction = (0..nt)
        .map(|k| {
            let mean = f_acc[k].mean();
            let sd = f_acc[k].variance().sqrt();
            let n = samples.iter().filter(|s| (s[k] - mean).norm() > 5.0 * sd).count();
            n as f64 / samples.len() as f64
        })
        .collect();

    let local = LocalPair::new(&pair, &model);
    Ok(OtocSeries {
        t: config.t_grid.clone(),
        c_mean: c_acc.iter().map(|a| a.mean()).collect(),
        c_var: c_acc.iter().map(|a| a.variance()).collect(),
        c_stderr: c_acc.iter().map(|a| a.stderr()).collect(),
        f_mean: f_acc.iter().map(|a| a.mean()).collect(),
        f_var: f_acc.iter().map(|a| a.variance()).collect(),
        f_stderr: f_acc.iter().map(|a| a.stderr()).collect(),
        c_analytic: config.t_grid.iter().map(|&t| c_prediction(&local, config.beta, t, &model)).collect(),
        f_analytic: config.t_grid.iter().map(|&t| f_prediction(&local, config.beta, t, &model)).collect(),
        f_content: config
            .t_grid
            .iter()
            .map(|&t| f_prediction(&local, config.beta, t, &model).norm() * (2.0 * (t * model.delta()).powi(2)).exp())
            .collect(),
        c_asymptote: c_asymptote(&local, config.beta, &model),
        members: samples.len(),
        failed: failures.len(),
        failures,
        tr_z: z_acc.summary(),
        outlier_fraction,
        max_residue,
    })
}

/// Sample statistics of Tr Z over members `0..members`.
pub fn sample_tr_z(ensemble: &EnsembleConfig, beta: f64, members: usize) -> Result<Summary<f64>> {
    let values = (0..members as u64)
        .into_par_iter()
        .map(|i| trace_z(&sample_member(ensemble, i)?, beta))
        .collect::<Result<Vec<f64>>>()?;
    let mut acc = RealAccumulator::default();
    values.iter().for_each(|&x| acc.push(x));
    Ok(acc.summary())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{OverlapMode, SpectrumModel};

    fn small_config(members: usize) -> RunConfig {
        let model = SpectrumModel::with_levels(64, 4.0).unwrap();
        RunConfig {
            ensemble: EnsembleConfig::new(model, 3),
            pair: PairSpec {
                kind: OperatorKind::RandomOffdiag,
                support: Support::new(24, 39),
                bandwidth: 3,
                seed: 1,
            },
            beta: 0.05,
            t_grid: vec![0.0, 0.1, 0.25],
            members,
            normalization: NormalizationMode::PerMember,
            workers: Some(1),
        }
    }

    #[test]
    fn validation() {
        let mut c = small_config(1);
        assert!(c.validate().is_err());
        c.members = 4;
        c.t_grid = vec![0.2, 0.1];
        assert!(c.validate().is_err());
        c.t_grid = vec![];
        assert!(c.validate().is_err());
        c.t_grid = vec![-0.1];
        assert!(c.validate().is_err());
        c.t_grid = vec![0.0];
        assert!(c.validate().is_ok());
        // N = 4 is too small for acceptance runs
        assert!(c.validate_acceptance().is_err());
    }

    #[test]
    fn identical_members_have_zero_variance() {
        let c = small_config(2);
        let s = run_members(&c, &[5, 5]).unwrap();
        assert!(s.c_var.iter().all(|&v| v == 0.0));
        assert!(s.f_var.iter().all(|&v| v == 0.0));
        assert_eq!(s.members, 2);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut c = small_config(6);
        let a = run_series(&c).unwrap();
        c.workers = Some(3);
        let b = run_series(&c).unwrap();
        c.workers = None;
        let g = run_series(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, g);
    }

    #[test]
    fn stderr_is_sqrt_var_over_m() {
        let s = run_series(&small_config(8)).unwrap();
        for k in 0..3 {
            assert!((s.c_stderr[k] - (s.c_var[k] / 8.0).sqrt()).abs() < 1e-15);
            assert!((s.f_stderr[k] - (s.f_var[k] / 8.0).sqrt()).abs() < 1e-15);
        }
        assert_eq!(s.c_analytic.len(), 3);
    }

    #[test]
    fn commuting_operators_give_zero_at_origin() {
        let model = SpectrumModel::with_levels(32, 4.0).unwrap();
        let mem = sample_member(&EnsembleConfig::new(model, 8).with_overlap(OverlapMode::Orthogonalized), 0).unwrap();
        let p = generate_pair(32, OperatorKind::RandomOffdiag, Support::new(8, 23), 2, 4).unwrap();
        let same = ObservablePair::from_matrices(p.v.clone(), p.v.clone(), p.support).unwrap();
        let c = eval_c(&mem, &same, 0.1, 0.0).unwrap();
        assert!(c.abs() < 1e-10, "{c}");
    }

    #[test]
    fn f_at_origin_is_bare_trace_when_orthogonal() {
        let model = SpectrumModel::with_levels(32, 4.0).unwrap();
        let mem = sample_member(&EnsembleConfig::new(model, 2).with_overlap(OverlapMode::Orthogonalized), 0).unwrap();
        let p = generate_pair(32, OperatorKind::RandomOffdiag, Support::new(4, 27), 2, 9).unwrap();
        let f = eval_f(&mem, &p, 0.0, 0.0).unwrap();
        let direct = (&p.v * &p.w * &p.v * &p.w).trace() / 32.0;
        assert!((f - Complex64::new(direct, 0.0)).norm() < 1e-12 * direct.abs());
    }

    #[test]
    fn f_matches_dense_chain_on_toy_member() {
        let model = SpectrumModel::with_levels(16, 2.0).unwrap();
        let mem = sample_member(&EnsembleConfig::new(model, 6), 1).unwrap();
        let p = generate_pair(16, OperatorKind::RandomOffdiag, Support::new(2, 13), 2, 3).unwrap();
        let (beta, t) = (0.2, 0.7);
        let o = mem.o_dense();
        let chi = Complex64::new(-beta / 4.0, -t);
        let y = DMatrix::from_fn(16, 16, |m, n| {
            (0..o.ncols()).map(|a| Complex64::new(o[(m, a)] * o[(n, a)], 0.0) * (chi * mem.e[a]).exp()).sum::<Complex64>()
        });
        let yd = y.adjoint();
        let v = cplx(&p.v);
        let w = cplx(&p.w);
        let chain = &v * &y * &w * &yd * &v * &y * &w * &yd;
        let tz: f64 = (0..16).map(|m| (0..o.ncols()).map(|a| o[(m, a)].powi(2) * (-beta * mem.e[a]).exp()).sum::<f64>()).sum();
        let expected = chain.trace() / tz;
        let got = eval_f(&mem, &p, beta, t).unwrap();
        assert!((got - expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn too_many_failures_abort() {
        let mut c = small_config(4);
        c.beta = 50.0;
        assert!(matches!(run_series(&c), Err(Error::RunFailed { failed: 4, total: 4, .. })));
    }
}
