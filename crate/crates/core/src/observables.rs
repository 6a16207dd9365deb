//! Test operators V and W with vanishing one-point functions.
//!
//! Both operators are real symmetric with zero diagonal in the HF basis, so any
//! window-weighted thermal average of their diagonal vanishes identically.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::ensemble::SpectrumModel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    RandomOffdiag,
    Hopping,
    /// Supplied directly through [`ObservablePair::from_matrices`].
    Custom,
}

/// Inclusive HF index range `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Support {
    pub lo: usize,
    pub hi: usize,
}

impl Support {
    pub fn new(lo: usize, hi: usize) -> Self {
        Self { lo, hi }
    }

    /// `len` sites centred in a spectrum of dimension `d`.
    pub fn centered(d: usize, len: usize) -> Self {
        let lo = d.saturating_sub(len) / 2;
        Self { lo, hi: lo + len - 1 }
    }

    pub fn len(&self) -> usize {
        (self.hi + 1).saturating_sub(self.lo)
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn range(&self) -> Range<usize> {
        self.lo..self.hi + 1
    }

    pub fn contains(&self, m: usize) -> bool {
        self.lo <= m && m <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservablePair {
    pub v: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub kind: OperatorKind,
    pub support: Support,
}

impl ObservablePair {
    /// Wraps explicit matrices after checking symmetry, zero diagonal and support.
    pub fn from_matrices(v: DMatrix<f64>, w: DMatrix<f64>, support: Support) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        let d = v.nrows();
        if !v.is_square() || w.shape() != v.shape() || support.hi >= d {
            return Err(Error::InvalidConfig("operator shapes do not match the support".into()));
        }
        for (name, a) in [("V", &v), ("W", &w)] {
            for i in 0..d {
                if a[(i, i)] != 0.0 {
                    return Err(Error::InvalidConfig(format!("{name} has a nonzero diagonal entry at {i}")));
                }
                for j in 0..d {
                    if a[(i, j)] != a[(j, i)] {
                        return Err(Error::InvalidConfig(format!("{name} is not symmetric at ({i}, {j})")));
                    }
                    if a[(i, j)] != 0.0 && !(support.contains(i) && support.contains(j)) {
                        return Err(Error::InvalidConfig(format!("{name} has an entry outside the support at ({i}, {j})")));
                    }
                }
            }
        }
        Ok(Self {
            v,
            w,
            kind: OperatorKind::Custom,
            support,
        })
    }

    pub fn dimension(&self) -> usize {
        self.v.nrows()
    }

    /// V and W restricted to the support window.
    pub fn blocks(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let r = self.support.range();
        let s = r.len();
        (
            self.v.view((r.start, r.start), (s, s)).into_owned(),
            self.w.view((r.start, r.start), (s, s)).into_owned(),
        )
    }
}

/// Builds a `(V, W)` pair of the requested kind on `support`.
pub fn generate_pair(d: usize, kind: OperatorKind, support: Support, bandwidth: usize, seed: u64) -> Result<ObservablePair> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    if support.hi >= d {
        return Err(Error::InvalidConfig(format!("support [{}, {}] exceeds dimension {d}", support.lo, support.hi)));
    }
    if bandwidth == 0 {
        return Err(Error::InvalidConfig("bandwidth must be at least 1".into()));
    }
    let (v, w) = match kind {
        OperatorKind::Hopping => {
            let mut v = DMatrix::zeros(d, d);
            let mut w = DMatrix::zeros(d, d);
            for m in support.lo..support.hi {
                v[(m, m + 1)] = 1.0;
                v[(m + 1, m)] = 1.0;
                if m > support.lo {
                    w[(m, m + 1)] = 1.0;
                    w[(m + 1, m)] = 1.0;
                }
            }
            (v, w)
        }
        OperatorKind::RandomOffdiag => {
            let mut v = random_banded(d, support, bandwidth, seed, 0);
            let mut w = random_banded(d, support, bandwidth, seed, 1);
            for a in [&mut v, &mut w] {
                let norm = a.norm();
                if norm == 0.0 {
                    return Err(Error::InvalidConfig("support too small for off-diagonal entries".into()));
                }
                *a *= (d as f64).sqrt() / norm;
            }
            (v, w)
        }
        OperatorKind::Custom => {
            return Err(Error::InvalidConfig("custom operators are built with ObservablePair::from_matrices".into()))
        }
    };
    Ok(ObservablePair { v, w, kind, support })
}

fn random_banded(d: usize, support: Support, bandwidth: usize, seed: u64, stream: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut a = DMatrix::zeros(d, d);
    for m in support.range() {
        for n in m + 1..=(m + bandwidth).min(support.hi) {
            let x: f64 = rng.sample(StandardNormal);
            a[(m, n)] = x;
            a[(n, m)] = x;
        }
    }
    a
}

/// Σ_m A_mm exp{−βℰ_m} exp{−(ℰ_m − ℰ_n)²/(2kΔ²)}.
pub fn check_one_point(a: &DMatrix<f64>, spectrum: &SpectrumModel, beta: f64, k: usize, n: usize) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    let delta = spectrum.delta();
    let en = spectrum.energy(n);
    (0..a.nrows().min(spectrum.dimension()))
        .map(|m| {
            let em = spectrum.energy(m);
            a[(m, m)] * (-beta * em).exp() * (-(em - en).powi(2) / (2.0 * k as f64 * delta * delta)).exp()
        })
        .sum()
}
