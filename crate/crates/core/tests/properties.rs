mod common;

use absppt::exec::Execution;
use absppt::linalg::{
    haar_unitary, is_psd, kron, partial_transpose, singular_values, CMatrix, HermitianMatrix,
    TOL_PSD,
};
use absppt::lmi::{certify_abs_ppt, certify_abs_ppt_with, lambda_matrix, lmi_p3, quadratic_form};
use absppt::oracle::{
    build_counterexample, random_falsify, rank1_pt_spectrum, rearrangement_min, vector_from_x,
};
use absppt::orderings::{
    dominance_relations, enumerate_sigma, extend_ordering, is_compatible, p_minus, p_plus,
    realizable_exact, s_minus, s_plus,
};
use absppt::{Spectrum, Status};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn cmatrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), rows * cols).prop_map(move |v| {
        CMatrix::from_iterator(rows, cols, v.into_iter().map(|(a, b)| Complex64::new(a, b)))
    })
}

fn hermitian(dim: usize) -> impl Strategy<Value = CMatrix> {
    cmatrix(dim, dim).prop_map(|a| &a + a.adjoint())
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    prop::sample::select(vec![(1, 3), (2, 2), (2, 3), (3, 2), (3, 3), (2, 4), (4, 3)])
}

fn spectrum() -> impl Strategy<Value = Spectrum> {
    dims().prop_flat_map(|(n, m)| {
        (prop::collection::vec(0.0..1.0f64, n * m), 0.0..1.0f64).prop_map(move |(raw, t)| {
            // shrink toward the uniform spectrum so both verdicts occur
            let mean = raw.iter().sum::<f64>() / raw.len() as f64;
            let mixed: Vec<f64> = raw.iter().map(|v| (1.0 - t) * mean + t * v).collect();
            Spectrum::new(&mixed, n, m).unwrap()
        })
    })
}

fn descending(p: usize) -> impl Strategy<Value = Vec<f64>> {
    // small integers make ties and zeros common
    prop::collection::vec(prop_oneof![0u8..4, 0u8..20], p).prop_map(|mut v| {
        v.sort_unstable_by(|a, b| b.cmp(a));
        v.into_iter().map(f64::from).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_transpose_is_involution((n, m) in dims(), seed in any::<u64>()) {
        let a = haar_unitary(n * m, seed);
        let twice = partial_transpose(&partial_transpose(&a, n, m).unwrap(), n, m).unwrap();
        prop_assert_eq!(&twice, &a);
        let pt = partial_transpose(&a, n, m).unwrap();
        prop_assert_eq!(pt.trace(), a.trace());
    }

    #[test]
    fn partial_transpose_of_product(q in cmatrix(3, 3), p in cmatrix(2, 2)) {
        let pt = partial_transpose(&kron(&q, &p), 2, 3).unwrap();
        prop_assert_eq!(pt, kron(&q.transpose(), &p));
    }

    #[test]
    fn eigenvalues_sum_to_trace(a in hermitian(6)) {
        let h = HermitianMatrix::new(a).unwrap();
        let ev = h.eigenvalues();
        prop_assert!(ev.windows(2).all(|w| w[0] >= w[1]));
        let scale = h.max_abs().max(1e-300);
        prop_assert!((ev.iter().sum::<f64>() - h.trace()).abs() <= 1e-10 * 6.0 * scale);
    }

    #[test]
    fn singular_values_match_gram_eigenvalues(b in cmatrix(2, 4)) {
        let sv = singular_values(&b);
        let gram = HermitianMatrix::new(b.adjoint() * &b).unwrap().eigenvalues();
        for (s, g) in sv.iter().zip(&gram) {
            prop_assert!((s * s - g).abs() < 1e-10);
        }
    }

    #[test]
    fn every_nonneg_descending_x_has_a_compatible_pair(x in (1usize..=4).prop_flat_map(descending)) {
        let sigma = enumerate_sigma(x.len()).unwrap();
        prop_assert!(sigma.first_compatible(&x).is_some(), "x = {:?}", x);
    }

    #[test]
    fn quadratic_form_matches_raw_sum(s in spectrum(), x in prop::collection::vec(-2.0..2.0f64, 4)) {
        let p = s.p();
        let x = &x[..p];
        let nm = s.dim();
        for pair in &enumerate_sigma(p).unwrap().pairs {
            let lam = lambda_matrix(&s, pair).unwrap();
            let mut raw = 0.0;
            let mut scale = 0.0;
            for ip in s_plus(p) {
                let t = s.lambda(nm + 1 - pair.sigma_plus(ip)) * ip.product(x);
                raw += t;
                scale += t.abs();
            }
            for ip in s_minus(p) {
                let t = s.lambda(pair.sigma_minus(ip)) * ip.product(x);
                raw -= t;
                scale += t.abs();
            }
            prop_assert!((quadratic_form(&lam, x) - raw).abs() <= 1e-12 * scale.max(1e-300));
        }
    }

    #[test]
    fn lambda_entries_are_the_right_multisets(s in spectrum()) {
        let p = s.p();
        let nm = s.dim();
        for pair in &enumerate_sigma(p).unwrap().pairs {
            let e = lambda_matrix(&s, pair).unwrap().entries().clone();
            let mut upper: Vec<f64> = Vec::new();
            let mut lower: Vec<f64> = Vec::new();
            for k in 0..p {
                for l in 0..p {
                    if k <= l { upper.push(e[(k, l)]) } else { lower.push(-e[(k, l)]) }
                }
            }
            let mut want_upper: Vec<f64> = (nm + 1 - p_plus(p)..=nm).map(|i| s.lambda(i)).collect();
            let mut want_lower: Vec<f64> = (1..=p_minus(p)).map(|i| s.lambda(i)).collect();
            for v in [&mut upper, &mut lower, &mut want_upper, &mut want_lower] {
                v.sort_by(f64::total_cmp);
            }
            prop_assert_eq!(upper, want_upper);
            prop_assert_eq!(lower, want_lower);
        }
    }

    #[test]
    fn verdict_is_scale_invariant(s in spectrum(), c in 1e-3..1e3f64) {
        let a = certify_abs_ppt(&s, TOL).unwrap();
        let b = certify_abs_ppt(&s.scaled(c), TOL).unwrap();
        // skip instances within tolerance of the boundary
        if a.margin.abs() > 1e-6 * s.max() {
            prop_assert_eq!(a.status, b.status);
        }
    }

    #[test]
    fn p3_certificate_matches_closed_form_lmis(raw in prop::collection::vec(0.0..1.0f64, 9), t in 0.0..1.0f64) {
        let mixed: Vec<f64> = raw.iter().map(|v| (1.0 - t) / 9.0 + t * v / 4.5).collect();
        let s = Spectrum::new(&mixed, 3, 3).unwrap();
        let v = certify_abs_ppt(&s, TOL).unwrap();
        let both = lmi_p3(&s).unwrap().into_iter().all(|m| {
            m.symmetric_eigenvalues().min() >= -TOL * s.max()
        });
        prop_assert_eq!(v.is_abs_ppt(), both);
    }

    #[test]
    fn parallel_and_sequential_verdicts_agree(s in spectrum()) {
        let a = certify_abs_ppt_with(&s, TOL, Execution::Sequential).unwrap();
        let b = certify_abs_ppt_with(&s, TOL, Execution::Parallel).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn rank1_spectrum_bridges_to_quadratic_form(s in spectrum(), x in prop::collection::vec(-2.0..2.0f64, 4)) {
        let p = s.p();
        let x = &x[..p];
        let b = vector_from_x(x, s.n(), s.m()).unwrap();
        let mu = rank1_pt_spectrum(&b, s.n(), s.m()).unwrap();
        let lhs = rearrangement_min(s.values(), &mu).unwrap();
        let mut xs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        xs.sort_by(|a, b| b.total_cmp(a));
        let pair = enumerate_sigma(p).unwrap().first_compatible(&xs).unwrap().clone();
        let rhs = quadratic_form(&lambda_matrix(&s, &pair).unwrap(), &xs);
        prop_assert!((lhs - rhs).abs() < 1e-10, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn counterexamples_are_sound(s in spectrum()) {
        let v = certify_abs_ppt(&s, TOL).unwrap();
        if v.status == Status::NotAbsPpt {
            let pair = v.failing_pair.unwrap();
            let x = v.witness_x.unwrap();
            let w = build_counterexample(&s, &pair, &x).unwrap();
            prop_assert!(w.value < -v.threshold);
            let ev = w.matrix.eigenvalues();
            for (a, b) in ev.iter().zip(s.values()) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            let pt = w.matrix.partial_transpose(s.n(), s.m()).unwrap();
            prop_assert!(!is_psd(pt.matrix(), TOL_PSD).unwrap().is_psd);
        }
    }

    #[test]
    fn rearrangement_is_below_random_unitary_pairings(
        a in prop::collection::vec(-1.0..1.0f64, 4),
        b in prop::collection::vec(-1.0..1.0f64, 4),
        seed in any::<u64>(),
    ) {
        let formula = rearrangement_min(&a, &b).unwrap();
        let bd = HermitianMatrix::diagonal(&b);
        let mut best = f64::INFINITY;
        for t in 0..200 {
            let u = haar_unitary(4, seed.wrapping_add(t));
            let a_rot = HermitianMatrix::conjugated_diagonal(&u, &a).unwrap();
            let inner: f64 = (0..4).map(|i| a_rot.matrix()[(i, i)].re * bd.matrix()[(i, i)].re).sum();
            best = best.min(inner);
        }
        prop_assert!(best >= formula - 1e-12);
        // the minimum is attained by the permutation pairing
        let mut sa = a.clone();
        sa.sort_by(|x, y| x.total_cmp(y));
        let mut sb = b.clone();
        sb.sort_by(|x, y| y.total_cmp(x));
        let paired: f64 = sa.iter().zip(&sb).map(|(x, y)| x * y).sum();
        prop_assert!((paired - formula).abs() < 1e-12);
    }
}

#[test]
fn enumerated_pairs_extend_dominance_and_are_witnessed() {
    for p in 1..=5 {
        let sigma = enumerate_sigma(p).unwrap();
        let rel = dominance_relations(p);
        for (pair, y) in sigma.pairs.iter().zip(&sigma.witnesses) {
            for (a, b) in &rel {
                assert!(pair.sigma_plus(*a) < pair.sigma_plus(*b));
            }
            assert!(y.windows(2).all(|w| w[0] > w[1]) && *y.last().unwrap() > 0.0);
            let x: Vec<f64> = y.iter().map(|v| v.exp()).collect();
            assert!(is_compatible(pair, &x));
            let exact = realizable_exact(p, &pair.plus_order()).unwrap();
            assert!(exact.is_some());
        }
    }
}

#[test]
fn extensions_restrict_to_their_source() {
    for q in 1..=4 {
        for p in q..=5 {
            let target = enumerate_sigma(p).unwrap();
            for pair in &enumerate_sigma(q).unwrap().pairs {
                let ext = extend_ordering(pair, p).unwrap();
                assert_eq!(ext.restrict(q).as_ref(), Some(pair));
                assert!(target.pairs.contains(&ext));
            }
        }
    }
}

#[test]
fn largest_eigenvalues_only_appear_negated() {
    let raw: Vec<f64> = (1..=16).map(|i| i as f64).collect();
    let s = Spectrum::new(&raw, 4, 4).unwrap();
    for pair in &enumerate_sigma(4).unwrap().pairs {
        let e = lambda_matrix(&s, pair).unwrap().entries().clone();
        for k in 0..4 {
            for l in 0..4 {
                let v = e[(k, l)];
                if k <= l {
                    // p+ = 10 smallest: 1..=10
                    assert!((1.0..=10.0).contains(&v));
                } else {
                    // p- = 6 largest: 11..=16
                    assert!((-16.0..=-11.0).contains(&v));
                }
            }
        }
    }
}

#[test]
fn closed_form_agrees_on_random_p2_spectra() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..2000 {
        let n = 2 + i % 4;
        let s = common::mixed_spectrum(2, n, &mut rng);
        let v = certify_abs_ppt(&s, TOL).unwrap();
        assert_eq!(v.is_abs_ppt(), absppt::lmi::closed_form_p2(&s, TOL).unwrap());
    }
}

#[test]
fn falsifier_respects_certificate() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut tested = 0;
    while tested < 10 {
        let s = common::mixed_spectrum(2, 3, &mut rng);
        if certify_abs_ppt(&s, TOL).unwrap().is_abs_ppt() {
            assert!(random_falsify(&s, 200, tested, TOL).is_none());
            tested += 1;
        }
    }
}
