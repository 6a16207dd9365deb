//! Leading-order large-N closed forms: moments of `Y(χ)`, partition-function
//! averages, and the ensemble averages of `C(t)` and `F(t)`.
//!
//! Every four-point average below keeps the three leading contraction
//! patterns of `Tr(A₁Y₁A₂Y₂A₃Y₃A₄Y₄)` for zero-diagonal operators: all four
//! factors replaced by their means, and the two ways of correlating
//! opposite factors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::ensemble::SpectrumModel;
use crate::observables::ObservablePair;
use crate::{Error, Result};

pub const MAX_MOMENT_ORDER: usize = 8;

/// ⟨Y_mm(χ)⟩ = exp{χ²Δ²/2 + χℰ_m}; off-diagonal means vanish.
pub fn first_moment(chi: Complex64, energy: f64, delta: f64) -> Complex64 {
    (chi * chi * (delta * delta / 2.0) + chi * energy).exp()
}

/// Product Π_j Y_{m_j n_j}(χ_j).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSpec {
    pub chis: Vec<Complex64>,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl MomentSpec {
    /// Cyclic chain n_j = m_{j+1}.
    pub fn chain(chis: Vec<Complex64>, m: Vec<usize>) -> Self {
        assert_eq!(chis.len(), m.len(), "one index per factor");
        let mut cols = m.clone();
        cols.rotate_left(1);
        Self { chis, rows: m, cols }
    }

    pub fn order(&self) -> usize {
        self.chis.len()
    }

    /// χ = Σ_j χ_j.
    pub fn chi_total(&self) -> Complex64 {
        self.chis.iter().sum()
    }

    pub fn is_chain(&self) -> bool {
        let k = self.rows.len();
        (0..k).all(|j| self.cols[j] == self.rows[(j + 1) % k])
    }
}

/// Connected part of the chain moment:
/// (1/√k)(√(2π)ρΔ)^{−(k−1)} exp{χΣℰ/k + χ²Δ²/2k − Σ_{j<l}(ℰ_j−ℰ_l)²/2kΔ²}.
/// Zero when the indices do not form a chain.
pub fn correlated_moment(spec: &MomentSpec, model: &SpectrumModel) -> Result<Complex64> {
    let k = spec.order();
    if k == 0 || k > MAX_MOMENT_ORDER {
        return Err(Error::OrderOutOfRange { k, max: MAX_MOMENT_ORDER });
    }
    if !spec.is_chain() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let e: Vec<f64> = spec.rows.iter().map(|&m| model.energy(m)).collect();
    let delta = model.delta();
    let kf = k as f64;
    let chi = spec.chi_total();
    let mut spread = 0.0;
    for j in 0..k {
        for l in j + 1..k {
            spread += (e[j] - e[l]).powi(2);
        }
    }
    let mean_e = e.iter().sum::<f64>() / kf;
    let prefactor = kf.sqrt().recip() * ((2.0 * PI).sqrt() * model.density() * delta).powi(-(k as i32 - 1));
    let exponent = chi * mean_e + chi * chi * (delta * delta / (2.0 * kf)) - spread / (2.0 * kf * delta * delta);
    Ok(exponent.exp() * prefactor)
}

/// k = 2 connected moment for a pair of HF energies and total argument χ.
pub fn pair_correlation(chi: Complex64, e1: f64, e2: f64, model: &SpectrumModel) -> Complex64 {
    let delta = model.delta();
    let pre = 1.0 / (2.0 * PI.sqrt() * model.density() * delta);
    (chi * ((e1 + e2) / 2.0) + chi * chi * (delta * delta / 4.0) - (e1 - e2).powi(2) / (4.0 * delta * delta)).exp() * pre
}

/// ⟨Tr Z⟩ = exp{β²Δ²/2} Tr Z_HF.
pub fn mean_tr_z(beta: f64, model: &SpectrumModel) -> f64 {
    let delta = model.delta();
    (beta * beta * delta * delta / 2.0).exp() * model.tr_z_hf(beta)
}

/// ⟨(Tr Z)²⟩_corr = exp{β²Δ²} Σ_m exp{−2βℰ_m}/(2√πρΔ).
pub fn corr_tr_z_squared(beta: f64, model: &SpectrumModel) -> f64 {
    let delta = model.delta();
    let pre = 1.0 / (2.0 * PI.sqrt() * model.density() * delta);
    (beta * beta * delta * delta).exp() * pre * model.tr_z_hf(2.0 * beta)
}

/// The three leading pieces of a four-point trace average.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FourPoint {
    /// All factors replaced by their means.
    pub means: Complex64,
    /// Factors 1 and 3 correlated, 2 and 4 at their means.
    pub pair13: Complex64,
    /// Factors 2 and 4 correlated, 1 and 3 at their means.
    pub pair24: Complex64,
}

impl FourPoint {
    pub fn total(&self) -> Complex64 {
        self.means + self.pair13 + self.pair24
    }

    fn add(self, o: Self) -> Self {
        Self {
            means: self.means + o.means,
            pair13: self.pair13 + o.pair13,
            pair24: self.pair24 + o.pair24,
        }
    }
}

fn to_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|x| Complex64::new(x, 0.0))
}

fn diag_phase(chi: Complex64, energies: &[f64]) -> DVector<Complex64> {
    DVector::from_iterator(energies.len(), energies.iter().map(|&e| (chi * e).exp()))
}

fn times_diag(a: &DMatrix<Complex64>, d: &DVector<Complex64>) -> DMatrix<Complex64> {
    let mut out = a.clone();
    for (j, dj) in d.iter().enumerate() {
        out.column_mut(j).iter_mut().for_each(|x| *x *= dj);
    }
    out
}

fn trace_of_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    a.iter().zip(b.transpose().iter()).map(|(x, y)| x * y).sum()
}

fn pair_sum(chi: Complex64, x: &[Complex64], y: &[Complex64], energies: &[f64], model: &SpectrumModel) -> Complex64 {
    // Gaussian factor χ²Δ²/4 is applied by the caller
    let delta = model.delta();
    let pre = 1.0 / (2.0 * PI.sqrt() * model.density() * delta);
    let mut total = Complex64::new(0.0, 0.0);
    for (i, &ei) in energies.iter().enumerate() {
        if x[i] == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut row = Complex64::new(0.0, 0.0);
        for (j, &ej) in energies.iter().enumerate() {
            if y[j] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let w = (chi * ((ei + ej) / 2.0) - (ei - ej).powi(2) / (4.0 * delta * delta)).exp();
            row += w * y[j];
        }
        total += x[i] * row;
    }
    total * pre
}

/// Leading pieces of ⟨Tr(A₁Y(χ₁)A₂Y(χ₂)A₃Y(χ₃)A₄Y(χ₄))⟩ for zero-diagonal A_i.
///
/// The operators act on HF levels with the given `energies`. Each piece is
/// multiplied by exp{g + shift} where g is its own Gaussian exponent, so a
/// caller can strip a known common envelope without overflow.
pub fn four_point_leading(
    ops: [&DMatrix<f64>; 4],
    chis: [Complex64; 4],
    energies: &[f64],
    model: &SpectrumModel,
    shift: Complex64,
) -> FourPoint {
    let d2 = model.delta().powi(2);
    let a: Vec<DMatrix<Complex64>> = ops.iter().map(|m| to_complex(m)).collect();
    let dg: Vec<DVector<Complex64>> = chis.iter().map(|&c| diag_phase(c, energies)).collect();
    let ad: Vec<DMatrix<Complex64>> = (0..4).map(|i| times_diag(&a[i], &dg[i])).collect();
    let g = |c: Complex64| c * c * (d2 / 2.0);

    let left = &ad[0] * &ad[1];
    let right = &ad[2] * &ad[3];
    let means = trace_of_product(&left, &right) * (g(chis[0]) + g(chis[1]) + g(chis[2]) + g(chis[3]) + shift).exp();

    let c13 = chis[0] + chis[2];
    let x13: Vec<Complex64> = (&ad[1] * &a[2]).diagonal().iter().copied().collect();
    let y13: Vec<Complex64> = (&ad[3] * &a[0]).diagonal().iter().copied().collect();
    let pair13 = pair_sum(c13, &y13, &x13, energies, model) * (c13 * c13 * (d2 / 4.0) + g(chis[1]) + g(chis[3]) + shift).exp();

    let c24 = chis[1] + chis[3];
    let x24: Vec<Complex64> = (&ad[0] * &a[1]).diagonal().iter().copied().collect();
    let y24: Vec<Complex64> = (&ad[2] * &a[3]).diagonal().iter().copied().collect();
    let pair24 = pair_sum(c24, &x24, &y24, energies, model) * (c24 * c24 * (d2 / 4.0) + g(chis[0]) + g(chis[2]) + shift).exp();

    FourPoint { means, pair13, pair24 }
}

/// V and W on their support window together with the HF energies of that window.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPair {
    pub v: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub energies: Vec<f64>,
}

impl LocalPair {
    pub fn new(pair: &ObservablePair, model: &SpectrumModel) -> Self {
        let (v, w) = pair.blocks();
        let energies = pair.support.range().map(|m| model.energy(m)).collect();
        Self { v, w, energies }
    }
}

/// F₀ with its three pieces; ⟨F(t)⟩ = exp{−2t²Δ² − 3β²Δ²/8} F₀ / Tr Z_HF.
pub fn f0(pair: &LocalPair, beta: f64, t: f64, model: &SpectrumModel) -> FourPoint {
    let chi = Complex64::new(-beta / 4.0, -t);
    let strip = -(chi * chi + chi.conj() * chi.conj()) * model.delta().powi(2);
    four_point_leading(
        [&pair.v, &pair.w, &pair.v, &pair.w],
        [chi, chi.conj(), chi, chi.conj()],
        &pair.energies,
        model,
        strip,
    )
}

pub fn f_prediction(pair: &LocalPair, beta: f64, t: f64, model: &SpectrumModel) -> Complex64 {
    let d2 = model.delta().powi(2);
    let envelope = (-2.0 * t * t * d2 - 3.0 * beta * beta * d2 / 8.0).exp();
    f0(pair, beta, t, model).total() * envelope / model.tr_z_hf(beta)
}

/// Time-independent limit of ⟨C(t)⟩:
/// [Σ_{m,l} (W Z_HF W)_mm c_ml (V²)_ll + (V ↔ W)] / Tr Z_HF with c_ml = exp{−(ℰ_m−ℰ_l)²/4Δ²}/(2√πρΔ).
pub fn c_asymptote(pair: &LocalPair, beta: f64, model: &SpectrumModel) -> f64 {
    let zhf: Vec<f64> = pair.energies.iter().map(|&e| (-beta * e).exp()).collect();
    let z = DMatrix::from_diagonal(&DVector::from_vec(zhf));
    let half = |a: &DMatrix<f64>, b: &DMatrix<f64>| -> f64 {
        let outer = (a * &z * a).diagonal();
        let inner = (b * b).diagonal();
        let x: Vec<Complex64> = outer.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let y: Vec<Complex64> = inner.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        pair_sum(Complex64::new(0.0, 0.0), &x, &y, &pair.energies, model).re
    };
    (half(&pair.w, &pair.v) + half(&pair.v, &pair.w)) / model.tr_z_hf(beta)
}

/// Single-decay numerator S(t) = Tr(Z_HF W e^{iH_HF t} V² e^{−iH_HF t} W) + Tr(Z_HF V e^{−iH_HF t} W² e^{iH_HF t} V);
/// it enters ⟨C(t)⟩ as exp{−t²Δ²} S(t) / Tr Z_HF.
pub fn single_decay(pair: &LocalPair, beta: f64, t: f64) -> f64 {
    let e = &pair.energies;
    let z = diag_phase(Complex64::new(-beta, 0.0), e);
    let fwd = diag_phase(Complex64::new(0.0, -t), e);
    let back = diag_phase(Complex64::new(0.0, t), e);
    let v = to_complex(&pair.v);
    let w = to_complex(&pair.w);
    let v2 = &v * &v;
    let w2 = &w * &w;
    let zw = DMatrix::from_diagonal(&z) * &w;
    let t3 = trace_of_product(&(&zw * DMatrix::from_diagonal(&back) * &v2), &(DMatrix::from_diagonal(&fwd) * &w));
    let zv = DMatrix::from_diagonal(&z) * &v;
    let t4 = trace_of_product(&(&zv * DMatrix::from_diagonal(&fwd) * &w2), &(DMatrix::from_diagonal(&back) * &v));
    (t3 + t4).re
}

/// C₀ with its three pieces, summed over the two time-ordered traces; the
/// factor exp{−β²Δ²/2} from ⟨Tr Z⟩ is included, so the traces contribute
/// −exp{−2t²Δ²} C₀ / Tr Z_HF to ⟨C(t)⟩.
pub fn c0(pair: &LocalPair, beta: f64, t: f64, model: &SpectrumModel) -> FourPoint {
    let d2 = model.delta().powi(2);
    let shift = Complex64::new(2.0 * t * t * d2 - beta * beta * d2 / 2.0, 0.0);
    let fwd = Complex64::new(0.0, -t);
    let back = Complex64::new(0.0, t);
    let ops = [&pair.v, &pair.w, &pair.v, &pair.w];
    // Tr(V U W U† V U W Y(it−β)) and Tr(V Y(−β−it) W U† V U W U†)
    let first = four_point_leading(ops, [fwd, back, fwd, Complex64::new(-beta, t)], &pair.energies, model, shift);
    let second = four_point_leading(ops, [Complex64::new(-beta, -t), back, fwd, back], &pair.energies, model, shift);
    first.add(second)
}

/// Leading-order ⟨C(t)⟩ = −e^{−2t²Δ²} C₀/Tr Z_HF + e^{−t²Δ²} S(t)/Tr Z_HF + asymptote.
pub fn c_prediction(pair: &LocalPair, beta: f64, t: f64, model: &SpectrumModel) -> f64 {
    let d2 = model.delta().powi(2);
    let zhf = model.tr_z_hf(beta);
    let decaying = -(-2.0 * t * t * d2).exp() * c0(pair, beta, t, model).total().re / zhf;
    let single = (-t * t * d2).exp() * single_decay(pair, beta, t) / zhf;
    decaying + single + c_asymptote(pair, beta, model)
}

/// Ratio |C₀ term(t)| / |asymptote| relative to the same ratio at t = 0.
pub fn c0_envelope_ratio(pair: &LocalPair, beta: f64, t: f64, model: &SpectrumModel) -> f64 {
    let d2 = model.delta().powi(2);
    let at = |s: f64| (-2.0 * s * s * d2).exp() * c0(pair, beta, s, model).total().norm();
    at(t) / at(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionKind {
    FirstMoment,
    CorrMoment,
    TrZ,
    TrZ2Corr,
    COfT,
    FOfT,
    F0,
    C0,
    CAsymptote,
}

/// A closed-form value together with the inputs that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticPrediction {
    pub kind: PredictionKind,
    pub value: Complex64,
    pub inputs: Vec<(String, f64)>,
}

impl AnalyticPrediction {
    pub fn new(kind: PredictionKind, value: Complex64, inputs: Vec<(String, f64)>) -> Result<Self> {
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::InvalidConfig(format!("{kind:?} prediction is not finite")));
        }
        Ok(Self { kind, value, inputs })
    }
}
