//! Independent checks of the certificate: rank-one partial-transpose spectra,
//! the rearrangement minimum, explicit counterexamples and Haar sampling.

use std::ops::{Add, Mul};

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::lmi::{lambda_matrix, quadratic_form};
use crate::linalg::{haar_unitary, CMatrix, HermitianMatrix, RectMatrix, Spectrum};
use crate::orderings::{s_minus, s_plus, OrderingPair};

/// `{x_k²} ∪ {+x_k x_l, -x_k x_l : k < l}`, sorted descending.
pub fn e_set(x: &[f64]) -> Vec<f64> {
    let p = x.len();
    let mut out = Vec::with_capacity(p * p);
    for k in 0..p {
        out.push(x[k] * x[k]);
        for l in k + 1..p {
            out.push(x[k] * x[l]);
            out.push(-x[k] * x[l]);
        }
    }
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// [`e_set`] of the singular values of `b` reshaped to `n x m`, padded with
/// `p|n - m|` zeros and sorted descending.
pub fn predicted_rank1_pt_spectrum(b: &[Complex64], n: usize, m: usize) -> Result<Vec<f64>> {
    let sv = RectMatrix::reshape(b, n, m)?.singular_values();
    let mut e = e_set(&sv);
    e.resize(n * m, 0.0);
    e.sort_by(|a, b| b.total_cmp(a));
    Ok(e)
}

/// Eigenvalues of `pt(b b*)`, descending.
pub fn rank1_pt_spectrum(b: &[Complex64], n: usize, m: usize) -> Result<Vec<f64>> {
    if b.len() != n * m {
        return Err(Error::LengthMismatch(b.len(), n * m));
    }
    Ok(HermitianMatrix::outer(b).partial_transpose(n, m)?.eigenvalues())
}

/// 0-based position of `x_k` (1-based `k`) in the vector built by
/// [`vector_from_x`]: diagonal entry `(k, k)` of the `n x m` reshape.
fn diag_position(k: usize, n: usize) -> usize {
    (k - 1) * (n + 1)
}

/// The vector whose reshape is `diag(x)`, so that `pt(b b*)` has spectrum
/// `e_set(|x|)` plus zeros.
pub fn vector_from_x(x: &[f64], n: usize, m: usize) -> Result<Vec<Complex64>> {
    let p = n.min(m);
    if x.len() != p {
        return Err(Error::PMismatch {
            expected: p,
            got: x.len(),
        });
    }
    let mut b = vec![Complex64::zero(); n * m];
    for (k, v) in x.iter().enumerate() {
        b[diag_position(k + 1, n)] = Complex64::new(*v, 0.0);
    }
    Ok(b)
}

/// `Σ a_{N+1-k} b_k` with both sorted descending: the smallest value of
/// `Σ a_π(k) b_k` over permutations `π`.
pub fn rearrangement_min<T>(a: &[T], b: &[T]) -> Result<T>
where
    T: Copy + PartialOrd + Add<Output = T> + Mul<Output = T> + Zero,
{
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let desc = |v: &[T]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
        v
    };
    let a = desc(a);
    let b = desc(b);
    Ok(a.iter()
        .rev()
        .zip(&b)
        .fold(T::zero(), |acc, (x, y)| acc + *x * *y))
}

/// An explicit operator with the given spectrum whose partial transpose is
/// not PSD.
#[derive(Debug, Clone)]
pub struct CounterexampleWitness {
    pub matrix: HermitianMatrix,
    pub b: Vec<Complex64>,
    /// `b* pt(M) b`.
    pub value: f64,
    pub pair: OrderingPair,
    pub x: Vec<f64>,
}

/// Assembles `M` directly in the eigenbasis of `pt(b b*)` for
/// `b = vector_from_x(x)`:
///
/// * `e_{(k,k)}` (eigenvalue `x_k²`) gets `λ_{nm+1-σ+(k,k)}`,
/// * `(e_{(k,l)} + e_{(l,k)})/√2` (eigenvalue `x_k x_l`) gets
///   `λ_{nm+1-σ+(k,l)}`,
/// * `(e_{(k,l)} - e_{(l,k)})/√2` (eigenvalue `-x_k x_l`) gets `λ_{σ−(k,l)}`,
/// * the unused eigenvalues fill the remaining standard basis vectors in
///   ascending index order.
///
/// Here `e_{(a,c)}` is the basis vector at `a + n c`. Then
/// `b* pt(M) b = xᵀ Λ x`.
pub fn build_counterexample(
    s: &Spectrum,
    pair: &OrderingPair,
    x: &[f64],
) -> Result<CounterexampleWitness> {
    let lam = lambda_matrix(s, pair)?;
    let q = quadratic_form(&lam, x);
    if q >= 0.0 {
        return Err(Error::NotAViolation(q));
    }
    let (n, m) = (s.n(), s.m());
    let nm = n * m;
    let p = s.p();
    let b = vector_from_x(x, n, m)?;
    let at = |a: usize, c: usize| (a - 1) + n * (c - 1);

    let mut used_pos = vec![false; nm];
    let mut used_lambda = vec![false; nm + 1];
    let mut out = CMatrix::zeros(nm, nm);
    let h = std::f64::consts::FRAC_1_SQRT_2;

    for ip in s_plus(p) {
        let li = nm + 1 - pair.sigma_plus(ip);
        used_lambda[li] = true;
        let val = s.lambda(li);
        if ip.is_diagonal() {
            let i = at(ip.k, ip.k);
            used_pos[i] = true;
            out[(i, i)] += Complex64::new(val, 0.0);
        } else {
            let (i, j) = (at(ip.l, ip.k), at(ip.k, ip.l));
            used_pos[i] = true;
            used_pos[j] = true;
            add_projector(&mut out, i, j, h, h, val);
        }
    }
    for ip in s_minus(p) {
        let li = pair.sigma_minus(ip);
        used_lambda[li] = true;
        let (i, j) = (at(ip.l, ip.k), at(ip.k, ip.l));
        add_projector(&mut out, i, j, h, -h, s.lambda(li));
    }
    let free_pos = (0..nm).filter(|&i| !used_pos[i]);
    let free_lambda = (1..=nm).filter(|&i| !used_lambda[i]);
    for (i, li) in free_pos.zip(free_lambda) {
        out[(i, i)] += Complex64::new(s.lambda(li), 0.0);
    }

    let matrix = HermitianMatrix::new(out)?;
    let value = matrix.partial_transpose(n, m)?.expectation(&b);
    Ok(CounterexampleWitness {
        matrix,
        b,
        value,
        pair: pair.clone(),
        x: x.to_vec(),
    })
}

// out += val * v v* with v = ci e_i + cj e_j
fn add_projector(out: &mut CMatrix, i: usize, j: usize, ci: f64, cj: f64, val: f64) {
    for (r, cr) in [(i, ci), (j, cj)] {
        for (c, cc) in [(i, ci), (j, cj)] {
            out[(r, c)] += Complex64::new(val * cr * cc, 0.0);
        }
    }
}

/// A Haar sample whose conjugated spectrum is not PPT.
#[derive(Debug, Clone)]
pub struct FalsifyHit {
    pub trial: u64,
    /// Seed that reproduces the unitary via [`haar_unitary`].
    pub trial_seed: u64,
    pub unitary: CMatrix,
    pub min_eigenvalue: f64,
}

/// Seed of trial `t` under master seed `seed` (SplitMix64 finaliser).
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed
        .wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Smallest eigenvalue of `pt(U diag(λ) U*)`.
pub fn conjugated_pt_min(s: &Spectrum, u: &CMatrix) -> f64 {
    HermitianMatrix::conjugated_diagonal(u, s.values())
        .and_then(|a| a.partial_transpose(s.n(), s.m()))
        .map(|pt| pt.min_eigenvalue())
        .unwrap_or(f64::NAN)
}

/// Samples `trials` Haar unitaries and returns the lowest-index one for which
/// `pt(U diag(λ) U*)` has an eigenvalue below `-tol * λ_1`.
pub fn random_falsify(s: &Spectrum, trials: u64, seed: u64, tol: f64) -> Option<FalsifyHit> {
    random_falsify_with(s, trials, seed, tol, Execution::default())
}

pub fn random_falsify_with(
    s: &Spectrum,
    trials: u64,
    seed: u64,
    tol: f64,
    exec: Execution,
) -> Option<FalsifyHit> {
    let threshold = -tol * s.max();
    exec.find_first(trials, |t| {
        let ts = trial_seed(seed, t);
        let u = haar_unitary(s.dim(), ts);
        let min = conjugated_pt_min(s, &u);
        (min < threshold).then_some(FalsifyHit {
            trial: t,
            trial_seed: ts,
            unitary: u,
            min_eigenvalue: min,
        })
    })
}
