//! Certificate matrices `Λ(σ+, σ−)` and the spectral PPT test built on them.
//!
//! For a spectrum `λ_1 >= ... >= λ_nm` and a pair of orderings,
//! `Λ[k][l] = λ_{nm+1-σ+(k,l)}` on and above the diagonal and
//! `Λ[k][l] = -λ_{σ−(l,k)}` below it. The operator is PPT under every
//! `n ⊗ m` decomposition iff `Λ + Λᵀ` is PSD for every pair in `Σ±(p)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::Spectrum;
use crate::orderings::{enumerate_sigma, s_minus, s_plus, IndexPair, OrderingPair};

/// Default verdict tolerance, relative to the largest eigenvalue.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A `p x p` certificate matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaMatrix {
    entries: DMatrix<f64>,
    pair: OrderingPair,
}

impl LambdaMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn pair(&self) -> &OrderingPair {
        &self.pair
    }

    pub fn p(&self) -> usize {
        self.entries.nrows()
    }

    /// `Λ + Λᵀ`.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        &self.entries + self.entries.transpose()
    }
}

pub fn lambda_matrix(s: &Spectrum, pair: &OrderingPair) -> Result<LambdaMatrix> {
    let p = s.p();
    if pair.p() != p {
        return Err(Error::PMismatch {
            expected: p,
            got: pair.p(),
        });
    }
    let nm = s.dim();
    let mut entries = DMatrix::zeros(p, p);
    for ip in s_plus(p) {
        entries[(ip.k - 1, ip.l - 1)] = s.lambda(nm + 1 - pair.sigma_plus(ip));
    }
    for ip in s_minus(p) {
        entries[(ip.l - 1, ip.k - 1)] = -s.lambda(pair.sigma_minus(ip));
    }
    Ok(LambdaMatrix {
        entries,
        pair: pair.clone(),
    })
}

/// `xᵀ Λ x`.
pub fn quadratic_form(lambda: &LambdaMatrix, x: &[f64]) -> f64 {
    let e = &lambda.entries;
    let p = e.nrows();
    let mut acc = 0.0;
    for k in 0..p {
        for l in 0..p {
            acc += x[k] * e[(k, l)] * x[l];
        }
    }
    acc
}

/// Outcome of the spectral test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    AbsPpt,
    NotAbsPpt,
}

/// Smallest eigenvalue of `Λ + Λᵀ` for one ordering pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMargin {
    pub index: usize,
    pub margin: f64,
    pub eigenvector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub status: Status,
    /// Minimum over pairs of the smallest eigenvalue of `Λ + Λᵀ`.
    pub margin: f64,
    /// Margin in `[-threshold, 0)`: reported as PPT but on the numerical
    /// boundary of the region.
    pub boundary: bool,
    /// Relative tolerance as given.
    pub tol: f64,
    /// `tol * λ_1`, the absolute cut-off applied to `margin`.
    pub threshold: f64,
    /// Index into `Σ±(p)` of the pair with the smallest margin.
    pub worst_index: usize,
    pub failing_pair: Option<OrderingPair>,
    /// Unit eigenvector for the smallest eigenvalue of the failing pair.
    pub witness_x: Option<Vec<f64>>,
    pub per_pair: Vec<PairMargin>,
}

impl Verdict {
    pub fn is_abs_ppt(&self) -> bool {
        self.status == Status::AbsPpt
    }
}

fn min_eigenpair(sym: DMatrix<f64>) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(sym);
    let (i, &val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
    // fix the sign so the largest-magnitude entry is positive
    let lead = v
        .iter()
        .copied()
        .fold(0.0f64, |a, c| if c.abs() > a.abs() { c } else { a });
    if lead < 0.0 {
        v.iter_mut().for_each(|c| *c = -*c);
    }
    (val, v)
}

/// The spectral certificate with the default [`Execution`].
pub fn certify_abs_ppt(s: &Spectrum, tol: f64) -> Result<Verdict> {
    certify_abs_ppt_with(s, tol, Execution::default())
}

/// Tests `Λ + Λᵀ ⪰ 0` for every pair in `Σ±(p)`.
///
/// Status is `NotAbsPpt` iff the worst margin is below `-tol * λ_1`. Ties for
/// the worst margin go to the earliest pair in canonical order.
pub fn certify_abs_ppt_with(s: &Spectrum, tol: f64, exec: Execution) -> Result<Verdict> {
    let sigma = enumerate_sigma(s.p())?;
    let per_pair: Vec<PairMargin> = exec.map_range(sigma.len(), |i| {
        let lam = lambda_matrix(s, &sigma.pairs[i]).expect("p matches");
        let (margin, eigenvector) = min_eigenpair(lam.symmetrized());
        PairMargin {
            index: i,
            margin,
            eigenvector,
        }
    });
    let worst = per_pair
        .iter()
        .reduce(|a, b| if b.margin < a.margin { b } else { a })
        .expect("Σ± is never empty");
    let threshold = tol * s.max();
    let failing = worst.margin < -threshold;
    Ok(Verdict {
        status: if failing {
            Status::NotAbsPpt
        } else {
            Status::AbsPpt
        },
        margin: worst.margin,
        boundary: !failing && worst.margin < 0.0,
        tol,
        threshold,
        worst_index: worst.index,
        failing_pair: failing.then(|| sigma.pairs[worst.index].clone()),
        witness_x: failing.then(|| worst.eigenvector.clone()),
        per_pair,
    })
}

/// Certifies many spectra; this is the outer data-parallel loop for sweeps.
pub fn certify_batch(spectra: &[Spectrum], tol: f64, exec: Execution) -> Vec<Result<Verdict>> {
    exec.map_slice(spectra, |s| certify_abs_ppt_with(s, tol, Execution::Sequential))
}

fn require_p(s: &Spectrum, p: usize) -> Result<()> {
    if s.p() != p {
        return Err(Error::PMismatch {
            expected: p,
            got: s.p(),
        });
    }
    Ok(())
}

/// Closed form for `min(n, m) = 2`:
/// `λ_1 <= λ_{2n-1} + 2 sqrt(λ_{2n} λ_{2n-2})`, with `2n = nm`.
///
/// With `t = tol * λ_1` this evaluates
/// `λ_1 - λ_{2n-1} <= sqrt(4 λ_{2n} λ_{2n-2} + 2t(λ_{2n} + λ_{2n-2}) + t²)`,
/// which is exactly `λ_min(Λ + Λᵀ) >= -t`, so it shares the verdict of
/// [`certify_abs_ppt`]. At `tol = 0` it is the displayed inequality.
pub fn closed_form_p2(s: &Spectrum, tol: f64) -> Result<bool> {
    let (lhs, rhs) = closed_form_p2_sides(s, tol)?;
    Ok(lhs <= rhs)
}

/// Both sides of [`closed_form_p2`].
pub fn closed_form_p2_sides(s: &Spectrum, tol: f64) -> Result<(f64, f64)> {
    require_p(s, 2)?;
    let nm = s.dim();
    let t = tol * s.max();
    let a = s.lambda(nm);
    let b = s.lambda(nm - 2);
    let lhs = s.lambda(1) - s.lambda(nm - 1);
    let rhs = (4.0 * a * b + 2.0 * t * (a + b) + t * t).sqrt();
    Ok((lhs, rhs))
}

/// The two symmetric `3 x 3` matrices whose joint PSD-ness decides the
/// `min(n, m) = 3` case. The first ranks `(2,2)` above `(1,3)`.
pub fn lmi_p3(s: &Spectrum) -> Result<[DMatrix<f64>; 2]> {
    require_p(s, 3)?;
    let nm = s.dim();
    let l = |i: usize| s.lambda(i);
    let top = |i: usize| s.lambda(nm - i);
    let first = DMatrix::from_row_slice(
        3,
        3,
        &[
            2.0 * top(0),
            top(1) - l(1),
            top(3) - l(2),
            top(1) - l(1),
            2.0 * top(2),
            top(4) - l(3),
            top(3) - l(2),
            top(4) - l(3),
            2.0 * top(5),
        ],
    );
    let second = DMatrix::from_row_slice(
        3,
        3,
        &[
            2.0 * top(0),
            top(1) - l(1),
            top(2) - l(2),
            top(1) - l(1),
            2.0 * top(3),
            top(4) - l(3),
            top(2) - l(2),
            top(4) - l(3),
            2.0 * top(5),
        ],
    );
    Ok([first, second])
}

/// The `Σ±(3)` member ranking `(2,2)` above `(1,3)` when `first` is true.
pub fn p3_pair(first: bool) -> OrderingPair {
    let sigma = enumerate_sigma(3).expect("p = 3 is always enumerable");
    let want = |pr: &&OrderingPair| {
        (pr.sigma_plus(IndexPair::new(2, 2)) < pr.sigma_plus(IndexPair::new(1, 3))) == first
    };
    sigma.pairs.iter().find(want).expect("both orders exist").clone()
}
