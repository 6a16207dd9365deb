//! Complex propagators `Y(χ) = O diag(exp{χE}) Oᵀ` of an ensemble member.
//!
//! `U(t) = Y(−it)` and `Z = Y(−β)`. Operators in this crate are local in the HF
//! index, so every trace only needs `Y` on a window of rows and columns; the
//! window block costs two real products of the banded rows.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::ops::Range;

use crate::ensemble::EnsembleMember;
use crate::{Error, Result};

/// Largest admissible |χ·E| before exp leaves the double range.
pub const EXP_LIMIT: f64 = 700.0;

/// Complex argument χ with Re χ ≤ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexArgument(Complex64);

impl ComplexArgument {
    pub fn new(chi: Complex64) -> Result<Self> {
        if !(chi.re.is_finite() && chi.im.is_finite()) {
            return Err(Error::InvalidConfig(format!("χ = {chi} is not finite")));
        }
        if chi.re > 0.0 {
            return Err(Error::InvalidConfig(format!("χ = {chi} has positive real part")));
        }
        Ok(Self(chi))
    }

    /// χ = −β/4 − it.
    pub fn regularized(beta: f64, t: f64) -> Result<Self> {
        check_beta(beta)?;
        Self::new(Complex64::new(-beta / 4.0, -t))
    }

    /// χ = −β.
    pub fn boltzmann(beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Self::new(Complex64::new(-beta, 0.0))
    }

    /// χ = −it.
    pub fn evolution(t: f64) -> Result<Self> {
        Self::new(Complex64::new(0.0, -t))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn conj(self) -> Self {
        Self(self.0.conj())
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("β must be non-negative, got {beta}")))
    }
}

/// Block of `Y(χ)` over a window of HF indices (rows and columns alike).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPropagator {
    pub y: DMatrix<Complex64>,
    pub chi: ComplexArgument,
    pub member_index: u64,
    pub window: Range<usize>,
}

impl ComplexPropagator {
    /// `Y(χ*) = Y(χ)†`, obtained without a rebuild since O is real and Y symmetric.
    pub fn adjoint(&self) -> Self {
        Self {
            y: self.y.map(|z| z.conj()),
            chi: self.chi.conj(),
            member_index: self.member_index,
            window: self.window.clone(),
        }
    }
}

/// Window-restricted overlap rows shared across many χ for one member.
#[derive(Debug, Clone)]
pub struct OverlapBlock {
    a: DMatrix<f64>,
    e: Vec<f64>,
    window: Range<usize>,
    member_index: u64,
}

impl OverlapBlock {
    pub fn new(member: &EnsembleMember, window: Range<usize>) -> Self {
        assert!(window.end <= member.dimension(), "window exceeds dimension");
        let cols = member.o.column_span(window.clone());
        Self {
            a: member.o.dense_block(window.clone(), cols.clone()),
            e: member.e[cols].to_vec(),
            window,
            member_index: member.index,
        }
    }

    pub fn window(&self) -> Range<usize> {
        self.window.clone()
    }

    /// Y(χ) on the window.
    pub fn build(&self, chi: ComplexArgument) -> Result<ComplexPropagator> {
        let c = chi.value();
        check_range(c, &self.e)?;
        let (wr, wi): (Vec<f64>, Vec<f64>) = self
            .e
            .iter()
            .map(|&e| {
                let z = (c * e).exp();
                (z.re, z.im)
            })
            .unzip();
        let at = self.a.transpose();
        let mut scaled = self.a.clone();
        for (j, w) in wr.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*w);
        }
        let re = &scaled * &at;
        let y = if c.im == 0.0 {
            re.map(|x| Complex64::new(x, 0.0))
        } else {
            let mut scaled = self.a.clone();
            for (j, w) in wi.iter().enumerate() {
                scaled.column_mut(j).scale_mut(*w);
            }
            let im = &scaled * &at;
            re.zip_map(&im, Complex64::new)
        };
        Ok(ComplexPropagator {
            y,
            chi,
            member_index: self.member_index,
            window: self.window.clone(),
        })
    }
}

fn check_range(chi: Complex64, e: &[f64]) -> Result<()> {
    let worst = e.iter().fold(0.0f64, |acc, &x| acc.max(x.abs())) * chi.norm();
    if worst > EXP_LIMIT {
        Err(Error::Overflow {
            magnitude: worst,
            limit: EXP_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// Full D×D `Y(χ)`.
pub fn build_y(member: &EnsembleMember, chi: ComplexArgument) -> Result<ComplexPropagator> {
    build_y_block(member, chi, 0..member.dimension())
}

/// `Y(χ)` restricted to rows and columns in `window`.
pub fn build_y_block(member: &EnsembleMember, chi: ComplexArgument, window: Range<usize>) -> Result<ComplexPropagator> {
    OverlapBlock::new(member, window).build(chi)
}

/// Tr Y(−β) = Σ_{m,α} O_{mα}² exp{−βE_α}.
pub fn trace_z(member: &EnsembleMember, beta: f64) -> Result<f64> {
    let chi = ComplexArgument::boltzmann(beta)?;
    check_range(chi.value(), &member.e)?;
    let w: Vec<f64> = member.e.iter().map(|&e| (-beta * e).exp()).collect();
    Ok(member.o.weighted_square_sum(&w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{build_hamiltonian, sample_member, EnsembleConfig, OverlapMode, SpectrumModel};
    use proptest::prelude::*;

    fn orth_member(seed: u64) -> EnsembleMember {
        let c = EnsembleConfig::new(SpectrumModel::with_levels(32, 4.0).unwrap(), seed).with_overlap(OverlapMode::Orthogonalized);
        sample_member(&c, 0).unwrap()
    }

    fn gauss_member(seed: u64) -> EnsembleMember {
        let c = EnsembleConfig::new(SpectrumModel::with_levels(40, 4.0).unwrap(), seed);
        sample_member(&c, 1).unwrap()
    }

    fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        a.zip_map(b, |x, y| (x - y).norm()).amax()
    }

    #[test]
    fn argument_contract() {
        assert!(ComplexArgument::new(Complex64::new(0.1, 0.0)).is_err());
        assert!(ComplexArgument::new(Complex64::new(f64::NAN, 0.0)).is_err());
        assert!(ComplexArgument::boltzmann(-1.0).is_err());
        let chi = ComplexArgument::regularized(0.5, 1.0).unwrap();
        assert_eq!(chi.value(), Complex64::new(-0.125, -1.0));
    }

    #[test]
    fn identity_at_zero_argument() {
        let m = orth_member(1);
        let y = build_y(&m, ComplexArgument::evolution(0.0).unwrap()).unwrap();
        assert!(max_diff(&y.y, &DMatrix::identity(32, 32)) < 1e-12);
    }

    #[test]
    fn trace_z_at_zero_beta_is_dimension() {
        assert!((trace_z(&orth_member(2), 0.0).unwrap() - 32.0).abs() < 1e-12);
    }

    #[test]
    fn overflow_guard() {
        let m = gauss_member(3);
        let err = build_y(&m, ComplexArgument::boltzmann(20.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Overflow { .. }));
        assert!(trace_z(&m, 20.0).is_err());
    }

    #[test]
    fn block_equals_slice_of_full() {
        let m = gauss_member(4);
        let chi = ComplexArgument::regularized(0.1, 0.3).unwrap();
        let full = build_y(&m, chi).unwrap();
        let block = build_y_block(&m, chi, 10..25).unwrap();
        let slice = full.y.view((10, 10), (15, 15)).into_owned();
        assert!(max_diff(&block.y, &slice) < 1e-14);
    }

    #[test]
    fn thermal_square_matches_exponential_of_h() {
        let m = orth_member(5);
        let (beta, t) = (0.5 / 4.0, 1.0 / 4.0);
        let y = build_y(&m, ComplexArgument::regularized(beta, t).unwrap()).unwrap();
        let prod = &y.y * y.adjoint().y;
        let h = build_hamiltonian(&m);
        let target = (h * (-beta / 2.0)).exp().map(|x| Complex64::new(x, 0.0));
        assert!(max_diff(&prod, &target) < 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn adjoint_is_conjugate_argument(seed in 0u64..500, beta in 0.0f64..0.2, t in -2.0f64..2.0, orth in any::<bool>()) {
            let m = if orth { orth_member(seed) } else { gauss_member(seed) };
            let chi = ComplexArgument::regularized(beta, t).unwrap();
            let y = build_y(&m, chi).unwrap();
            let yc = build_y(&m, chi.conj()).unwrap();
            prop_assert!(max_diff(&y.y.adjoint(), &yc.y) < 1e-12);
            prop_assert!(max_diff(&y.y, &y.y.transpose()) < 1e-12);
        }

        #[test]
        fn group_law_when_orthogonal(seed in 0u64..500, b1 in 0.0f64..0.1, b2 in 0.0f64..0.1, t1 in -1.0f64..1.0, t2 in -1.0f64..1.0) {
            let m = orth_member(seed);
            let c1 = ComplexArgument::new(Complex64::new(-b1, t1)).unwrap();
            let c2 = ComplexArgument::new(Complex64::new(-b2, t2)).unwrap();
            let c12 = ComplexArgument::new(c1.value() + c2.value()).unwrap();
            let lhs = build_y(&m, c1).unwrap().y * build_y(&m, c2).unwrap().y;
            prop_assert!(max_diff(&lhs, &build_y(&m, c12).unwrap().y) < 1e-10);
        }

        #[test]
        fn evolution_is_unitary_when_orthogonal(seed in 0u64..500, t in -3.0f64..3.0) {
            let m = orth_member(seed);
            let u = build_y(&m, ComplexArgument::evolution(t).unwrap()).unwrap();
            let prod = &u.y * u.y.adjoint();
            prop_assert!(max_diff(&prod, &DMatrix::identity(32, 32)) < 1e-10);
        }
    }
}
