//! Hartree-Fock spectrum model and sampling of ensemble members `(O, {E_α})`.
//!
//! In the HF basis the Hamiltonian of a member is `H = O diag(E) Oᵀ`. The
//! overlap amplitudes `O_{mα}` are centred Gaussians whose variance is a
//! normalized Gaussian window of width Δ in `ℰ_m − Ē_α`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::linalg::{orthogonality_defect, polar_factor, BandedRows};
use crate::{Error, Result};

/// Equally spaced HF spectrum `ℰ_m = m·d`, `m = 0..D`, with constant density `ρ = 1/d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumModel {
    dimension: usize,
    mean_spacing: f64,
    delta: f64,
}

impl SpectrumModel {
    pub fn new(dimension: usize, mean_spacing: f64, delta: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidModel("dimension must be at least 1".into()));
        }
        if !(mean_spacing > 0.0 && mean_spacing.is_finite()) {
            return Err(Error::InvalidModel(format!("mean spacing must be positive, got {mean_spacing}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidModel(format!("Δ must be positive, got {delta}")));
        }
        if delta / mean_spacing < 1.0 {
            return Err(Error::InvalidModel(format!(
                "N = Δ/d = {} is below 1",
                delta / mean_spacing
            )));
        }
        Ok(Self {
            dimension,
            mean_spacing,
            delta,
        })
    }

    /// Spectrum with unit spacing and `N` levels per correlation window.
    pub fn with_levels(dimension: usize, levels_per_window: f64) -> Result<Self> {
        Self::new(dimension, 1.0, levels_per_window)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn mean_spacing(&self) -> f64 {
        self.mean_spacing
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// ρ = 1/d.
    pub fn density(&self) -> f64 {
        1.0 / self.mean_spacing
    }

    /// N = Δρ.
    pub fn levels_per_window(&self) -> f64 {
        self.delta * self.density()
    }

    pub fn energy(&self, m: usize) -> f64 {
        m as f64 * self.mean_spacing
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.dimension).map(|m| self.energy(m)).collect()
    }

    /// Tr Z_HF = Σ_m exp{−βℰ_m}.
    pub fn tr_z_hf(&self, beta: f64) -> f64 {
        (0..self.dimension).map(|m| (-beta * self.energy(m)).exp()).sum()
    }
}

/// Normalized Gaussian window F(ℰ − Ē) = exp{−(ℰ−Ē)²/2Δ²}/(√(2π)ρΔ).
pub fn window_weight(e_m: f64, ebar_alpha: f64, model: &SpectrumModel) -> f64 {
    let x = e_m - ebar_alpha;
    let delta = model.delta();
    (-x * x / (2.0 * delta * delta)).exp() / ((2.0 * PI).sqrt() * model.density() * delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenvalueMode {
    /// E_α = Ē_α.
    #[default]
    Picket,
    /// GOE eigenvalues unfolded to constant density.
    GoeUnfolded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapMode {
    /// Independent banded Gaussian amplitudes on a padded eigenvalue grid.
    #[default]
    Gaussian,
    /// Polar factor of a square banded Gaussian draw; exactly orthogonal.
    Orthogonalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowShape {
    #[default]
    Gaussian,
    /// Reserved. Sampling with it returns [`Error::Unsupported`].
    Lorentzian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub spectrum: SpectrumModel,
    pub eigenvalue_mode: EigenvalueMode,
    pub overlap_mode: OverlapMode,
    #[serde(default)]
    pub window: WindowShape,
    /// Entries with |ℰ_m − Ē_α| > c_b·Δ are zero.
    pub band_cutoff: f64,
    pub seed: u64,
}

pub const DEFAULT_BAND_CUTOFF: f64 = 6.0;

impl EnsembleConfig {
    pub fn new(spectrum: SpectrumModel, seed: u64) -> Self {
        Self {
            spectrum,
            eigenvalue_mode: EigenvalueMode::Picket,
            overlap_mode: OverlapMode::Gaussian,
            window: WindowShape::Gaussian,
            band_cutoff: DEFAULT_BAND_CUTOFF,
            seed,
        }
    }

    pub fn with_overlap(mut self, mode: OverlapMode) -> Self {
        self.overlap_mode = mode;
        self
    }

    pub fn with_eigenvalues(mut self, mode: EigenvalueMode) -> Self {
        self.eigenvalue_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.band_cutoff.is_nan() || self.band_cutoff < 4.0 {
            return Err(Error::InvalidConfig(format!(
                "band cutoff must be at least 4, got {}",
                self.band_cutoff
            )));
        }
        if self.window == WindowShape::Lorentzian {
            return Err(Error::Unsupported("Lorentzian window"));
        }
        Ok(())
    }

    /// Band half-width in levels, floor(c_b·N).
    pub fn band_levels(&self) -> usize {
        (self.band_cutoff * self.spectrum.levels_per_window() + 1e-9).floor() as usize
    }

    /// Levels added below and above the HF grid on the eigenvalue side.
    pub fn padding(&self) -> usize {
        match self.overlap_mode {
            OverlapMode::Gaussian => self.band_levels(),
            OverlapMode::Orthogonalized => 0,
        }
    }

    /// Number of eigenvalues per member.
    pub fn eigen_count(&self) -> usize {
        self.spectrum.dimension() + 2 * self.padding()
    }

    /// The picket grid Ē_α = (α − P)·d.
    pub fn mean_eigenvalues(&self) -> Vec<f64> {
        let p = self.padding() as f64;
        let d = self.spectrum.mean_spacing();
        (0..self.eigen_count()).map(|a| (a as f64 - p) * d).collect()
    }

    /// Whether O_{mα} lies inside the band.
    pub fn in_band(&self, m: usize, alpha: usize) -> bool {
        let shifted = alpha as isize - self.padding() as isize;
        (m as isize - shifted).unsigned_abs() <= self.band_levels()
    }
}

/// One realization of the ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMember {
    pub index: u64,
    pub overlap_mode: OverlapMode,
    /// D × A overlap amplitudes, A = D in orthogonalized mode, D + 2P in gaussian mode.
    pub o: BandedRows,
    pub e: Vec<f64>,
    pub ebar: Vec<f64>,
}

impl EnsembleMember {
    /// Member from explicit parts, for hand-built toy instances.
    pub fn from_parts(index: u64, overlap_mode: OverlapMode, o: &DMatrix<f64>, e: Vec<f64>, ebar: Vec<f64>) -> Result<Self> {
        if o.ncols() != e.len() || e.len() != ebar.len() {
            return Err(Error::InvalidConfig(format!(
                "O has {} columns but {} eigenvalues and {} mean eigenvalues",
                o.ncols(),
                e.len(),
                ebar.len()
            )));
        }
        Ok(Self {
            index,
            overlap_mode,
            o: BandedRows::from_dense(o),
            e,
            ebar,
        })
    }

    pub fn dimension(&self) -> usize {
        self.o.nrows()
    }

    pub fn o_dense(&self) -> DMatrix<f64> {
        self.o.to_dense()
    }
}

fn member_rng(seed: u64, index: u64, attempt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index ^ (attempt << 56));
    rng
}

const POLAR_TOL: f64 = 1e-13;
const POLAR_MAX_ITER: usize = 100;
const MAX_ATTEMPTS: u64 = 4;

/// Samples member `member_index`. Identical `(config, member_index)` gives a bitwise-identical member.
pub fn sample_member(config: &EnsembleConfig, member_index: u64) -> Result<EnsembleMember> {
    config.validate()?;
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = member_rng(config.seed, member_index, attempt);
        match try_sample(config, member_index, &mut rng) {
            Ok(m) => return Ok(m),
            Err(e @ Error::Orthogonalization { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

fn try_sample(config: &EnsembleConfig, index: u64, rng: &mut ChaCha8Rng) -> Result<EnsembleMember> {
    let d = config.spectrum.dimension();
    let a = config.eigen_count();
    let ebar = config.mean_eigenvalues();
    let b = config.band_levels();
    let p = config.padding();

    let mut rows = Vec::with_capacity(d);
    for m in 0..d {
        let e_m = config.spectrum.energy(m);
        // column span of row m in padded coordinates
        let lo = (m + p).saturating_sub(b);
        let hi = (m + p + b + 1).min(a);
        let vals: Vec<f64> = (lo..hi)
            .map(|alpha| {
                let sd = window_weight(e_m, ebar[alpha], &config.spectrum).sqrt();
                let z: f64 = rng.sample(StandardNormal);
                z * sd
            })
            .collect();
        rows.push((lo, vals));
    }
    let draw = BandedRows::from_rows(a, rows);

    let o = match config.overlap_mode {
        OverlapMode::Gaussian => draw,
        OverlapMode::Orthogonalized => {
            let (factor, iterations) = match polar_factor(draw.to_dense(), POLAR_TOL, POLAR_MAX_ITER) {
                Ok(p) => (p.factor, p.iterations),
                Err(p) => {
                    return Err(Error::Orthogonalization {
                        member: index,
                        iterations: p.iterations,
                        residual: p.residual,
                    })
                }
            };
            let defect = orthogonality_defect(&factor);
            if defect > 1e-12 {
                return Err(Error::Orthogonalization {
                    member: index,
                    iterations,
                    residual: defect,
                });
            }
            BandedRows::from_dense(&factor)
        }
    };

    let e = match config.eigenvalue_mode {
        EigenvalueMode::Picket => ebar.clone(),
        EigenvalueMode::GoeUnfolded => {
            let lambda = goe_eigenvalues(a, rng);
            unfold_semicircle(&lambda, config.spectrum.mean_spacing(), p)
        }
    };

    Ok(EnsembleMember {
        index,
        overlap_mode: config.overlap_mode,
        o,
        e,
        ebar,
    })
}

/// Sorted eigenvalues of a K×K GOE matrix (off-diagonal variance 1/2, diagonal variance 1),
/// sampled through the tridiagonal β = 1 model.
pub fn goe_eigenvalues<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        let z: f64 = rng.sample(StandardNormal);
        t[(i, i)] = z;
    }
    for i in 0..k.saturating_sub(1) {
        let dof = (k - 1 - i) as f64;
        let c: f64 = ChiSquared::new(dof).expect("positive dof").sample(rng);
        let off = (c / 2.0).sqrt();
        t[(i, i + 1)] = off;
        t[(i + 1, i)] = off;
    }
    let mut ev: Vec<f64> = t.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Maps GOE eigenvalues through the semicircle CDF (radius √(2K)) onto a grid
/// of spacing `d`, offset so that level α sits near (α − padding)·d.
pub fn unfold_semicircle(lambda: &[f64], d: f64, padding: usize) -> Vec<f64> {
    let k = lambda.len() as f64;
    let r = (2.0 * k).sqrt();
    lambda
        .iter()
        .map(|&x| {
            let u = (x / r).clamp(-1.0, 1.0);
            let cdf = 0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / PI;
            (k * cdf - 0.5 - padding as f64) * d
        })
        .collect()
}

/// H = O diag(E) Oᵀ.
pub fn build_hamiltonian(member: &EnsembleMember) -> DMatrix<f64> {
    let o = member.o_dense();
    let scaled = &o * DMatrix::from_diagonal(&DVector::from_column_slice(&member.e));
    let h = scaled * o.transpose();
    // symmetrize away rounding asymmetry of the gemm
    (&h + h.transpose()) * 0.5
}
