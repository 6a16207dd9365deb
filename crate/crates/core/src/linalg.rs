//! Small dense and row-banded helpers shared by the ensemble and propagator code.

use nalgebra::DMatrix;

/// Row-compressed matrix whose nonzeros in each row form one contiguous column span.
///
/// Gaussian-mode overlap matrices are banded, so each row stores only the
/// columns within the band cutoff. Orthogonalized members use full-width spans.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedRows {
    nrows: usize,
    ncols: usize,
    first: Vec<usize>,
    ptr: Vec<usize>,
    data: Vec<f64>,
}

impl BandedRows {
    /// Builds from per-row `(first_column, values)`.
    pub fn from_rows(ncols: usize, rows: Vec<(usize, Vec<f64>)>) -> Self {
        let nrows = rows.len();
        let mut first = Vec::with_capacity(nrows);
        let mut ptr = Vec::with_capacity(nrows + 1);
        let mut data = Vec::new();
        ptr.push(0);
        for (f, vals) in rows {
            assert!(f + vals.len() <= ncols, "row span exceeds column count");
            first.push(f);
            data.extend_from_slice(&vals);
            ptr.push(data.len());
        }
        Self {
            nrows,
            ncols,
            first,
            ptr,
            data,
        }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let rows = (0..m.nrows())
            .map(|i| (0, m.row(i).iter().copied().collect()))
            .collect();
        Self::from_rows(m.ncols(), rows)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// First stored column and the stored values of row `i`.
    pub fn row(&self, i: usize) -> (usize, &[f64]) {
        (self.first[i], &self.data[self.ptr[i]..self.ptr[i + 1]])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (f, vals) = self.row(i);
        if j < f || j >= f + vals.len() {
            0.0
        } else {
            vals[j - f]
        }
    }

    /// Union of the stored column spans over a range of rows.
    pub fn column_span(&self, rows: std::ops::Range<usize>) -> std::ops::Range<usize> {
        let mut lo = self.ncols;
        let mut hi = 0;
        for i in rows {
            let (f, vals) = self.row(i);
            if vals.is_empty() {
                continue;
            }
            lo = lo.min(f);
            hi = hi.max(f + vals.len());
        }
        if lo >= hi {
            0..0
        } else {
            lo..hi
        }
    }

    /// Dense copy of the rows `rows` restricted to the columns `cols`.
    pub fn dense_block(
        &self,
        rows: std::ops::Range<usize>,
        cols: std::ops::Range<usize>,
    ) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(rows.len(), cols.len());
        for (r, i) in rows.enumerate() {
            let (f, vals) = self.row(i);
            for (k, &v) in vals.iter().enumerate() {
                let j = f + k;
                if cols.contains(&j) {
                    out[(r, j - cols.start)] = v;
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.dense_block(0..self.nrows, 0..self.ncols)
    }

    /// Σ_j A_ij² w_j over every stored entry.
    pub fn weighted_square_sum(&self, w: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.nrows {
            let (f, vals) = self.row(i);
            total += vals
                .iter()
                .zip(&w[f..f + vals.len()])
                .map(|(a, wj)| a * a * wj)
                .sum::<f64>();
        }
        total
    }
}

/// Outcome of the scaled Newton iteration for the orthogonal polar factor.
#[derive(Debug, Clone)]
pub struct PolarOutcome {
    pub factor: DMatrix<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Nearest orthogonal matrix to a square `x`, by X ← (γX + X⁻ᵀ/γ)/2 with
/// Frobenius-norm scaling. Returns `Err` with the last residual if the
/// iteration stalls or meets a singular iterate.
pub fn polar_factor(mut x: DMatrix<f64>, tol: f64, max_iter: usize) -> Result<PolarOutcome, PolarOutcome> {
    assert!(x.is_square());
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let Some(inv) = x.clone().try_inverse() else {
            return Err(PolarOutcome {
                factor: x,
                iterations: it,
                residual,
            });
        };
        let inv_t = inv.transpose();
        // scaling only while far from convergence; it slows the quadratic tail otherwise
        let gamma = if residual > 1e-2 {
            (inv_t.norm() / x.norm()).sqrt()
        } else {
            1.0
        };
        let next = (&x * gamma + inv_t / gamma) * 0.5;
        residual = (&next - &x).norm() / next.norm();
        x = next;
        if !residual.is_finite() {
            break;
        }
        if residual < tol {
            return Ok(PolarOutcome {
                factor: x,
                iterations: it,
                residual,
            });
        }
    }
    Err(PolarOutcome {
        factor: x,
        iterations: max_iter,
        residual,
    })
}

/// max |AᵀA − I| entrywise.
pub fn orthogonality_defect(a: &DMatrix<f64>) -> f64 {
    let g = a.transpose() * a;
    let n = g.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn banded_roundtrip() {
        let b = BandedRows::from_rows(5, vec![(0, vec![1.0, 2.0]), (2, vec![3.0]), (1, vec![4.0, 5.0, 6.0])]);
        let d = b.to_dense();
        assert_eq!(d[(0, 1)], 2.0);
        assert_eq!(d[(1, 2)], 3.0);
        assert_eq!(d[(2, 3)], 6.0);
        assert_eq!(b.get(1, 0), 0.0);
        assert_eq!(b.column_span(0..2), 0..3);
        assert_eq!(BandedRows::from_dense(&d).to_dense(), d);
        let w = [1.0, 1.0, 2.0, 1.0, 1.0];
        assert_eq!(b.weighted_square_sum(&w), 1.0 + 4.0 + 18.0 + 16.0 + 25.0 * 2.0 + 36.0);
    }

    #[test]
    fn polar_of_symmetric_positive_is_identity() {
        let x = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let p = polar_factor(x, 1e-14, 50).unwrap();
        assert!((p.factor - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn polar_matches_svd() {
        let x = DMatrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.7 + if i == j { 3.0 } else { 0.0 });
        let svd = x.clone().svd(true, true);
        let expected = svd.u.unwrap() * svd.v_t.unwrap();
        let p = polar_factor(x, 1e-14, 60).unwrap();
        assert!((p.factor.clone() - expected).amax() < 1e-11);
        assert!(orthogonality_defect(&p.factor) < 1e-12);
    }

    #[test]
    fn polar_singular_fails() {
        let x = DMatrix::<f64>::zeros(3, 3);
        assert!(polar_factor(x, 1e-13, 20).is_err());
    }
}
