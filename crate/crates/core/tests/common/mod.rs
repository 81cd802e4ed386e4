#![allow(dead_code)]

use absppt::Spectrum;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// Uniform on the probability simplex.
pub fn dirichlet<R: Rng>(len: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// `(1 - t) * uniform + t * dirichlet` with `t` uniform in `[0, 1]`, so both
/// verdicts show up in bulk.
pub fn mixed_spectrum<R: Rng>(n: usize, m: usize, rng: &mut R) -> Spectrum {
    let len = n * m;
    let t: f64 = rng.random();
    let d = dirichlet(len, rng);
    let raw: Vec<f64> = d
        .iter()
        .map(|v| (1.0 - t) / len as f64 + t * v)
        .collect();
    Spectrum::new(&raw, n, m).unwrap()
}

pub fn complex_gaussian<R: Rng>(len: usize, rng: &mut R) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

/// Minimum of `Σ a_π(k) b_k` over all permutations, by Heap's algorithm.
pub fn brute_force_min<T>(a: &[T], b: &[T]) -> T
where
    T: Copy + PartialOrd + std::ops::Add<Output = T> + std::ops::Mul<Output = T> + Default,
{
    let mut perm: Vec<usize> = (0..a.len()).collect();
    let eval = |perm: &[usize]| {
        perm.iter()
            .zip(b)
            .fold(T::default(), |acc, (&i, &y)| acc + a[i] * y)
    };
    let mut best = eval(&perm);
    let n = perm.len();
    let mut c = vec![0; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let v = eval(&perm);
            if v < best {
                best = v;
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}
