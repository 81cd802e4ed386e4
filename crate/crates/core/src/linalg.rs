//! Dense matrix substrate: spectra, partial transpose, eigenvalues, singular
//! values and Haar-random unitaries.
//!
//! An `nm x nm` matrix is read as an `m x m` grid of `n x n` blocks. Row index
//! `i = a + n * c` addresses row `a` of block-row `c`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Relative tolerance for clamping slightly negative eigenvalues.
pub const TOL_NONNEG: f64 = 1e-9;
/// Relative tolerance for the hermiticity check.
pub const TOL_HERM: f64 = 1e-9;
/// Default relative tolerance for PSD tests.
pub const TOL_PSD: f64 = 1e-9;

/// A validated spectrum of an `nm`-dimensional PSD operator, sorted
/// non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
    n: usize,
    m: usize,
}

impl Spectrum {
    /// Sorts `raw` descending and clamps tiny negatives to zero.
    pub fn new(raw: &[f64], n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::ZeroDimension { n, m });
        }
        if raw.len() != n * m {
            return Err(Error::WrongLength {
                expected: n * m,
                got: raw.len(),
                n,
                m,
            });
        }
        if let Some(i) = raw.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let scale = raw.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if let Some(i) = raw.iter().position(|&v| v < -TOL_NONNEG * scale) {
            return Err(Error::NegativeEigenvalue {
                index: i,
                value: raw[i],
            });
        }
        let mut values: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Spectrum { values, n, m })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `min(n, m)`, the size of the certificate matrices.
    pub fn p(&self) -> usize {
        self.n.min(self.m)
    }

    pub fn dim(&self) -> usize {
        self.n * self.m
    }

    /// `lambda(i)` is the i-th largest eigenvalue, 1-based.
    pub fn lambda(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    /// Largest eigenvalue, used as the scale for relative tolerances.
    pub fn max(&self) -> f64 {
        self.values[0]
    }

    /// The same eigenvalues read under different factor dimensions.
    pub fn with_dims(&self, n: usize, m: usize) -> Result<Self> {
        Spectrum::new(&self.values, n, m)
    }

    /// Every eigenvalue multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        Spectrum {
            values: self.values.iter().map(|v| v * c).collect(),
            n: self.n,
            m: self.m,
        }
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    let mut dev = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Dense square self-adjoint matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Validates hermiticity within [`TOL_HERM`] relative to the largest entry,
    /// then stores the exactly symmetrised matrix.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotHermitian(f64::INFINITY));
        }
        let dev = hermitian_deviation(&m);
        if dev > TOL_HERM * max_abs(&m) {
            return Err(Error::NotHermitian(dev));
        }
        let sym = (&m + m.adjoint()).scale(0.5);
        Ok(HermitianMatrix(sym))
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|v| Complex64::new(v, 0.0)))
    }

    /// `diag(values)`.
    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(*v, 0.0);
        }
        HermitianMatrix(m)
    }

    /// `b b*`.
    pub fn outer(b: &[Complex64]) -> Self {
        let d = b.len();
        HermitianMatrix(CMatrix::from_fn(d, d, |i, j| b[i] * b[j].conj()))
    }

    /// `U diag(values) U*`.
    pub fn conjugated_diagonal(u: &CMatrix, values: &[f64]) -> Result<Self> {
        if !u.is_square() || u.nrows() != values.len() {
            return Err(Error::LengthMismatch(u.nrows(), values.len()));
        }
        let mut ud = u.clone();
        for (j, v) in values.iter().enumerate() {
            ud.column_mut(j).scale_mut(*v);
        }
        Self::new(ud * u.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    /// `v* M v`, real for hermitian `M`.
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.dim() {
            let mut row = Complex64::new(0.0, 0.0);
            for j in 0..self.dim() {
                row += self.0[(i, j)] * v[j];
            }
            acc += v[i].conj() * row;
        }
        acc.re
    }

    pub fn partial_transpose(&self, n: usize, m: usize) -> Result<Self> {
        partial_transpose(&self.0, n, m).map(HermitianMatrix)
    }

    /// All eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.0.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |a, v| a.min(*v))
    }
}

/// Swaps blocks `(k, l)` and `(l, k)` of a square matrix viewed as an `m x m`
/// grid of `n x n` blocks. Works on any square matrix, hermitian or not.
pub fn partial_transpose(a: &CMatrix, n: usize, m: usize) -> Result<CMatrix> {
    if a.nrows() != n * m || a.ncols() != n * m {
        return Err(Error::DimMismatch {
            rows: a.nrows(),
            cols: a.ncols(),
            n,
            m,
        });
    }
    let mut out = CMatrix::zeros(n * m, n * m);
    for k in 0..m {
        for l in 0..m {
            // block (k, l) of the result is block (l, k) of the input
            out.view_mut((k * n, l * n), (n, n))
                .copy_from(&a.view((l * n, k * n), (n, n)));
        }
    }
    Ok(out)
}

/// Eigenvalues of a hermitian matrix, descending.
pub fn sym_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    Ok(HermitianMatrix::new(a.clone())?.eigenvalues())
}

/// Result of a PSD test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCheck {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

/// PSD within `tol * max(1, max|entry|)`.
pub fn is_psd(a: &CMatrix, tol: f64) -> Result<PsdCheck> {
    let h = HermitianMatrix::new(a.clone())?;
    let min = h.min_eigenvalue();
    Ok(PsdCheck {
        is_psd: min >= -tol * h.max_abs().max(1.0),
        min_eigenvalue: min,
    })
}

/// Rectangular complex matrix; used for the `n x m` reshape of a vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RectMatrix(pub CMatrix);

impl RectMatrix {
    /// Arranges the `m` consecutive `n`-dimensional subvectors of `b` as
    /// columns of an `n x m` matrix.
    pub fn reshape(b: &[Complex64], n: usize, m: usize) -> Result<Self> {
        if b.len() != n * m {
            return Err(Error::LengthMismatch(b.len(), n * m));
        }
        Ok(RectMatrix(CMatrix::from_column_slice(n, m, b)))
    }

    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(&self.0)
    }
}

/// The `min(rows, cols)` singular values, descending.
pub fn singular_values(b: &CMatrix) -> Vec<f64> {
    if b.nrows() == 0 || b.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = b.clone().singular_values().iter().map(|v| v.max(0.0)).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Haar-distributed `dim x dim` unitary, deterministic in `seed`.
///
/// QR of a complex Ginibre matrix with the phases of `diag(R)` moved into `Q`.
pub fn haar_unitary(dim: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_with(dim, &mut rng)
}

pub fn haar_unitary_with<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * s, im * s)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn real(m: &CMatrix) -> DMatrix<f64> {
        m.map(|z| z.re)
    }

    #[test]
    fn spectrum_sorts_and_validates() {
        let s = Spectrum::new(&[0.1, 0.4, 0.3, 0.2], 2, 2).unwrap();
        assert_eq!(s.values(), &[0.4, 0.3, 0.2, 0.1]);
        assert_eq!(s.p(), 2);
        let s = Spectrum::new(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 2, 3).unwrap();
        assert_eq!(s.values(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            Spectrum::new(&[0.5, -0.1, 0.3, 0.3], 2, 2),
            Err(Error::NegativeEigenvalue { index: 1, .. })
        ));
        assert!(matches!(
            Spectrum::new(&[0.5, 0.3, 0.3], 2, 2),
            Err(Error::WrongLength { expected: 4, got: 3, .. })
        ));
        assert!(Spectrum::new(&[], 0, 2).is_err());
        assert!(Spectrum::new(&[f64::NAN, 0.0, 0.0, 0.0], 2, 2).is_err());
    }

    #[test]
    fn spectrum_clamps_noise() {
        let s = Spectrum::new(&[1.0, -1e-12, 0.5, 0.5], 2, 2).unwrap();
        assert_eq!(s.values(), &[1.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn partial_transpose_of_bell_projector() {
        let w = [c(1.0), c(0.0), c(0.0), c(1.0)];
        let m = HermitianMatrix::outer(&w);
        let pt = m.partial_transpose(2, 2).unwrap();
        let expect = dmatrix![
            1.0, 0.0, 0.0, 0.0;
            0.0, 0.0, 1.0, 0.0;
            0.0, 1.0, 0.0, 0.0;
            0.0, 0.0, 0.0, 1.0
        ];
        assert_eq!(real(pt.matrix()), expect);
        let ev = pt.eigenvalues();
        let want = [1.0, 1.0, 1.0, -1.0];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_transpose_of_product_transposes_outer_factor() {
        let q = haar_unitary(3, 1);
        let p = haar_unitary(2, 2);
        let pt = partial_transpose(&kron(&q, &p), 2, 3).unwrap();
        assert_eq!(pt, kron(&q.transpose(), &p));
    }

    #[test]
    fn partial_transpose_keeps_diagonal_and_checks_dims() {
        let d = HermitianMatrix::diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(d.partial_transpose(3, 2).unwrap(), d);
        assert_eq!(d.partial_transpose(2, 3).unwrap(), d);
        assert!(matches!(
            d.partial_transpose(2, 2),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(sym_eigenvalues(&CMatrix::identity(3, 3)).unwrap(), vec![1.0; 3]);
        let x = dmatrix![c(0.0), c(1.0); c(1.0), c(0.0)];
        let ev = sym_eigenvalues(&x).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] + 1.0).abs() < 1e-14);
        let bad = dmatrix![c(0.0), c(1.0); c(2.0), c(0.0)];
        assert!(matches!(sym_eigenvalues(&bad), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn psd_examples() {
        let z = is_psd(&CMatrix::zeros(3, 3), TOL_PSD).unwrap();
        assert!(z.is_psd);
        assert_eq!(z.min_eigenvalue, 0.0);
        let d = is_psd(&dmatrix![c(2.0), c(0.0); c(0.0), c(-1.0)], TOL_PSD).unwrap();
        assert!(!d.is_psd);
        assert!((d.min_eigenvalue + 1.0).abs() < 1e-14);
        let r1 = is_psd(&dmatrix![c(1.0), c(1.0); c(1.0), c(1.0)], TOL_PSD).unwrap();
        assert!(r1.is_psd);
        assert!(r1.min_eigenvalue.abs() < 1e-14);
    }

    #[test]
    fn singular_value_examples() {
        let d = dmatrix![c(3.0), c(0.0); c(0.0), c(1.0)];
        let sv = singular_values(&d);
        assert!((sv[0] - 3.0).abs() < 1e-14 && (sv[1] - 1.0).abs() < 1e-14);
        assert_eq!(singular_values(&CMatrix::zeros(2, 3)), vec![0.0, 0.0]);
        let col = RectMatrix::reshape(&[c(1.0), c(1.0)], 2, 1).unwrap();
        let sv = col.singular_values();
        assert_eq!(sv.len(), 1);
        assert!((sv[0] - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn reshape_is_column_major() {
        let b: Vec<Complex64> = (0..6).map(|i| c(i as f64)).collect();
        let r = RectMatrix::reshape(&b, 2, 3).unwrap();
        assert_eq!(r.0[(1, 0)], c(1.0));
        assert_eq!(r.0[(0, 2)], c(4.0));
    }

    #[test]
    fn haar_unitary_is_unitary_and_deterministic() {
        for dim in [1, 2, 5, 9] {
            let u = haar_unitary(dim, 42);
            let err = (&u * u.adjoint() - CMatrix::identity(dim, dim)).camax();
            assert!(err < 1e-12, "dim {dim}: {err}");
            assert_eq!(u, haar_unitary(dim, 42));
        }
        let u1 = haar_unitary(1, 3);
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert_ne!(haar_unitary(3, 1), haar_unitary(3, 2));
    }
}
