//! Orderings of index pairs by decreasing product `x_k x_l`.
//!
//! `S+(p)` holds the pairs `(k, l)` with `1 <= k <= l <= p` and `S-(p)` those
//! with `k < l`. Both are indexed column-major (`(1,1), (1,2), (2,2), (1,3),
//! ...`), so `S±(q)` is a prefix of `S±(p)` for `q < p`.
//!
//! Realizability is decided in log space: a product order `x_a x_b > x_c x_d`
//! becomes the linear constraint `y_a + y_b - y_c - y_d >= 1` on `y = log x`,
//! the slack of one being free by homogeneity.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::feasibility::System;

/// Largest `p` enumerated unless overridden by `ABS_PPT_PMAX`.
pub const DEFAULT_P_MAX: usize = 6;

/// Environment variable overriding [`DEFAULT_P_MAX`].
pub const P_MAX_ENV: &str = "ABS_PPT_PMAX";

/// The configured enumeration limit.
pub fn p_max() -> usize {
    std::env::var(P_MAX_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_P_MAX)
}

/// An index pair `(k, l)`, 1-based, `k <= l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexPair {
    pub k: usize,
    pub l: usize,
}

impl IndexPair {
    pub fn new(k: usize, l: usize) -> Self {
        debug_assert!(1 <= k && k <= l);
        IndexPair { k, l }
    }

    /// Position in the column-major listing of `S+`.
    pub fn plus_index(self) -> usize {
        self.l * (self.l - 1) / 2 + self.k - 1
    }

    /// Position in the column-major listing of `S-`; requires `k < l`.
    pub fn minus_index(self) -> usize {
        debug_assert!(self.k < self.l);
        (self.l - 1) * (self.l - 2) / 2 + self.k - 1
    }

    pub fn is_diagonal(self) -> bool {
        self.k == self.l
    }

    /// `x_k x_l` for a 1-based index pair.
    pub fn product(self, x: &[f64]) -> f64 {
        x[self.k - 1] * x[self.l - 1]
    }

    /// Coefficients of `y_k + y_l`.
    fn sum_coeffs(self, p: usize) -> Vec<i64> {
        let mut c = vec![0; p];
        c[self.k - 1] += 1;
        c[self.l - 1] += 1;
        c
    }

    fn sum(self, y: &[BigRational]) -> BigRational {
        &y[self.k - 1] + &y[self.l - 1]
    }
}

impl fmt::Display for IndexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k, self.l)
    }
}

/// `p(p+1)/2`.
pub fn p_plus(p: usize) -> usize {
    p * (p + 1) / 2
}

/// `p(p-1)/2`.
pub fn p_minus(p: usize) -> usize {
    p * p.saturating_sub(1) / 2
}

/// `S+(p)` in column-major order.
pub fn s_plus(p: usize) -> Vec<IndexPair> {
    (1..=p)
        .flat_map(|l| (1..=l).map(move |k| IndexPair::new(k, l)))
        .collect()
}

/// `S-(p)` in column-major order.
pub fn s_minus(p: usize) -> Vec<IndexPair> {
    (2..=p)
        .flat_map(|l| (1..l).map(move |k| IndexPair::new(k, l)))
        .collect()
}

/// Forced precedences: `(a, b)` with `a.k <= b.k`, `a.l <= b.l`, `a != b`.
///
/// For any strictly decreasing positive `x`, `x_a >= x_b` holds for every
/// returned pair, so every compatible ordering is a linear extension.
pub fn dominance_relations(p: usize) -> Vec<(IndexPair, IndexPair)> {
    let s = s_plus(p);
    let mut out = Vec::new();
    for &a in &s {
        for &b in &s {
            if a != b && a.k <= b.k && a.l <= b.l {
                out.push((a, b));
            }
        }
    }
    out
}

/// A pair of orderings `(σ+, σ−)` with ranks starting at 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderingPair {
    p: usize,
    plus: Vec<usize>,
    minus: Vec<usize>,
}

fn is_bijection(ranks: &[usize]) -> bool {
    let mut seen = vec![false; ranks.len()];
    ranks.iter().all(|&r| {
        (1..=ranks.len()).contains(&r) && !std::mem::replace(&mut seen[r - 1], true)
    })
}

impl OrderingPair {
    /// Builds the pair from explicit rank vectors indexed by
    /// [`IndexPair::plus_index`] and [`IndexPair::minus_index`].
    ///
    /// `σ−` must rank `S-` in the order `σ+` does.
    pub fn new(p: usize, plus: Vec<usize>, minus: Vec<usize>) -> Result<Self> {
        if plus.len() != p_plus(p) || !is_bijection(&plus) {
            return Err(Error::NotABijection(p_plus(p)));
        }
        if minus.len() != p_minus(p) || !is_bijection(&minus) {
            return Err(Error::NotABijection(p_minus(p)));
        }
        let pair = OrderingPair { p, plus, minus };
        if pair.minus != induced_sigma_minus(p, &pair.plus) {
            return Err(Error::NotABijection(p_minus(p)));
        }
        Ok(pair)
    }

    /// `σ+` from a listing of `S+(p)` by rank, with `σ−` induced.
    pub fn from_plus_order(p: usize, order: &[IndexPair]) -> Result<Self> {
        let plus = plus_ranks(p, order)?;
        let minus = induced_sigma_minus(p, &plus);
        Ok(OrderingPair { p, plus, minus })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// `σ+(k, l)`.
    pub fn sigma_plus(&self, pair: IndexPair) -> usize {
        self.plus[pair.plus_index()]
    }

    /// `σ−(k, l)`, `k < l`.
    pub fn sigma_minus(&self, pair: IndexPair) -> usize {
        self.minus[pair.minus_index()]
    }

    pub fn plus_ranks(&self) -> &[usize] {
        &self.plus
    }

    pub fn minus_ranks(&self) -> &[usize] {
        &self.minus
    }

    /// `S+` listed by increasing `σ+`.
    pub fn plus_order(&self) -> Vec<IndexPair> {
        order_from_ranks(&s_plus(self.p), &self.plus)
    }

    /// `S-` listed by increasing `σ−`.
    pub fn minus_order(&self) -> Vec<IndexPair> {
        order_from_ranks(&s_minus(self.p), &self.minus)
    }

    /// Restriction to `S±(q)`. `None` if `S+(q)` does not occupy the first
    /// `p+(q)` ranks.
    pub fn restrict(&self, q: usize) -> Option<OrderingPair> {
        if q > self.p {
            return None;
        }
        let plus = self.plus[..p_plus(q)].to_vec();
        let minus = self.minus[..p_minus(q)].to_vec();
        OrderingPair::new(q, plus, minus).ok()
    }
}

fn order_from_ranks(set: &[IndexPair], ranks: &[usize]) -> Vec<IndexPair> {
    let mut order = set.to_vec();
    for (pair, &r) in set.iter().zip(ranks) {
        order[r - 1] = *pair;
    }
    order
}

fn plus_ranks(p: usize, order: &[IndexPair]) -> Result<Vec<usize>> {
    let size = p_plus(p);
    if order.len() != size {
        return Err(Error::NotABijection(size));
    }
    let mut ranks = vec![0; size];
    for (r, pair) in order.iter().enumerate() {
        if pair.k < 1 || pair.k > pair.l || pair.l > p || ranks[pair.plus_index()] != 0 {
            return Err(Error::NotABijection(size));
        }
        ranks[pair.plus_index()] = r + 1;
    }
    Ok(ranks)
}

/// The ordering of `S-(p)` that ranks its members as `σ+` does.
pub fn induced_sigma_minus(p: usize, plus: &[usize]) -> Vec<usize> {
    let minus_set = s_minus(p);
    let mut by_plus: Vec<(usize, usize)> = minus_set
        .iter()
        .enumerate()
        .map(|(i, pair)| (plus[pair.plus_index()], i))
        .collect();
    by_plus.sort_unstable();
    let mut ranks = vec![0; minus_set.len()];
    for (r, (_, i)) in by_plus.into_iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

fn chain_system(p: usize) -> System {
    let mut sys = System::new(p);
    for k in 0..p {
        let mut row = vec![0; p];
        row[k] = 1;
        if k + 1 < p {
            row[k + 1] = -1;
        }
        sys.push(row);
    }
    sys
}

fn push_greater(sys: &mut System, p: usize, hi: IndexPair, lo: IndexPair) {
    let a = hi.sum_coeffs(p);
    let b = lo.sum_coeffs(p);
    sys.push(a.iter().zip(&b).map(|(x, y)| x - y).collect());
}

fn to_f64(y: &[BigRational]) -> Vec<f64> {
    y.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()
}

/// Exact realizability of a total order of `S+(p)` by strictly decreasing
/// `y_1 > ... > y_p > 0` with strictly decreasing sums `y_k + y_l`.
///
/// Returns the exact witness `y` when realizable.
pub fn realizable_exact(p: usize, order: &[IndexPair]) -> Result<Option<Vec<BigRational>>> {
    plus_ranks(p, order)?;
    let mut sys = chain_system(p);
    for w in order.windows(2) {
        push_greater(&mut sys, p, w[0], w[1]);
    }
    Ok(sys.solve())
}

/// [`realizable_exact`] with the witness rounded to `f64`.
pub fn realizable(p: usize, order: &[IndexPair]) -> Result<Option<Vec<f64>>> {
    Ok(realizable_exact(p, order)?.map(|y| to_f64(&y)))
}

/// True iff `σ+` ranks products of `x` non-increasingly and `σ−` preserves the
/// `σ+` order on `S-`.
pub fn is_compatible(pair: &OrderingPair, x: &[f64]) -> bool {
    if x.len() != pair.p {
        return false;
    }
    let order = pair.plus_order();
    let plus_ok = order.windows(2).all(|w| w[0].product(x) >= w[1].product(x));
    plus_ok && pair.minus == induced_sigma_minus(pair.p, &pair.plus)
}

/// `Σ±(p)` with one realizing log-space witness per pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSet {
    pub p: usize,
    pub pairs: Vec<OrderingPair>,
    /// `witnesses[i]` is a strictly decreasing positive `y` whose sums
    /// `y_k + y_l` are ordered by `pairs[i]`; `exp(y)` is compatible with it.
    pub witnesses: Vec<Vec<f64>>,
}

impl SigmaSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// First pair in canonical order compatible with a descending
    /// non-negative `x`.
    pub fn first_compatible(&self, x: &[f64]) -> Option<&OrderingPair> {
        self.pairs.iter().find(|pair| is_compatible(pair, x))
    }
}

struct Enumerator {
    p: usize,
    set: Vec<IndexPair>,
    // preds[i]: plus-indices that must precede set[i]
    preds: Vec<Vec<usize>>,
    out: Vec<(Vec<usize>, Vec<BigRational>)>,
}

impl Enumerator {
    fn new(p: usize) -> Self {
        let set = s_plus(p);
        let mut preds = vec![Vec::new(); set.len()];
        for (a, b) in dominance_relations(p) {
            preds[b.plus_index()].push(a.plus_index());
        }
        Enumerator {
            p,
            set,
            preds,
            out: Vec::new(),
        }
    }

    fn prefix_system(&self, prefix: &[usize], placed: &[bool]) -> System {
        let mut sys = chain_system(self.p);
        for w in prefix.windows(2) {
            push_greater(&mut sys, self.p, self.set[w[0]], self.set[w[1]]);
        }
        if let Some(&last) = prefix.last() {
            for (i, &done) in placed.iter().enumerate() {
                if !done {
                    push_greater(&mut sys, self.p, self.set[last], self.set[i]);
                }
            }
        }
        sys
    }

    fn run(&mut self) {
        let n = self.set.len();
        let y = chain_system(self.p).solve().expect("chain is feasible");
        let mut prefix = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        self.extend(&mut prefix, &mut placed, y);
    }

    fn extend(&mut self, prefix: &mut Vec<usize>, placed: &mut [bool], y: Vec<BigRational>) {
        let n = self.set.len();
        if prefix.len() == n {
            self.out.push((prefix.clone(), y));
            return;
        }
        let available: Vec<usize> = (0..n)
            .filter(|&i| !placed[i] && self.preds[i].iter().all(|&j| placed[j]))
            .collect();
        for c in available {
            placed[c] = true;
            prefix.push(c);
            // the parent's witness already separates c from the rest when c
            // is its strict maximum with unit slack
            let sc = self.set[c].sum(&y);
            let reuse = (0..n)
                .filter(|&i| !placed[i])
                .all(|i| &sc - self.set[i].sum(&y) >= BigRational::one());
            let next = if reuse {
                Some(y.clone())
            } else {
                self.prefix_system(prefix, placed).solve()
            };
            if let Some(next) = next {
                self.extend(prefix, placed, next);
            }
            prefix.pop();
            placed[c] = false;
        }
    }
}

/// Enumerates `Σ±(p)` without consulting the cache.
///
/// Backtracks over linear extensions of the dominance order in lexicographic
/// order of the column-major `S+` listing, pruning any prefix `c_1 > ... > c_t`
/// for which `c_t` cannot also exceed every unplaced pair.
pub fn enumerate_sigma_uncached(p: usize) -> SigmaSet {
    if p == 0 {
        return SigmaSet {
            p,
            pairs: Vec::new(),
            witnesses: Vec::new(),
        };
    }
    let mut e = Enumerator::new(p);
    e.run();
    let set = e.set.clone();
    let mut pairs = Vec::with_capacity(e.out.len());
    let mut witnesses = Vec::with_capacity(e.out.len());
    for (idx, y) in e.out {
        let order: Vec<IndexPair> = idx.iter().map(|&i| set[i]).collect();
        pairs.push(OrderingPair::from_plus_order(p, &order).expect("valid order"));
        witnesses.push(to_f64(&y));
    }
    SigmaSet {
        p,
        pairs,
        witnesses,
    }
}

type Slot = Arc<OnceLock<Arc<SigmaSet>>>;

fn cache() -> &'static Mutex<HashMap<usize, Slot>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Slot>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `Σ±(p)` for `1 <= p <= limit`, memoized per `p`.
pub fn enumerate_sigma_with_limit(p: usize, limit: usize) -> Result<Arc<SigmaSet>> {
    if p > limit {
        return Err(Error::PTooLarge { p, max: limit });
    }
    let slot = {
        let mut map = cache().lock().unwrap_or_else(|e| e.into_inner());
        map.entry(p).or_default().clone()
    };
    Ok(slot
        .get_or_init(|| Arc::new(enumerate_sigma_uncached(p)))
        .clone())
}

/// `Σ±(p)` bounded by [`p_max`].
pub fn enumerate_sigma(p: usize) -> Result<Arc<SigmaSet>> {
    enumerate_sigma_with_limit(p, p_max())
}

/// Extends a realizable pair at level `q` to a realizable pair at level `p`
/// that agrees with it on `S±(q)`.
///
/// Keeps a realizing `y` on the first `q` coordinates and appends values
/// below `2 y_q - y_1`, so every new sum falls below every old one.
pub fn extend_ordering(pair: &OrderingPair, p: usize) -> Result<OrderingPair> {
    extend_ordering_with_limit(pair, p, p_max())
}

pub fn extend_ordering_with_limit(
    pair: &OrderingPair,
    p: usize,
    limit: usize,
) -> Result<OrderingPair> {
    let q = pair.p;
    if p > limit {
        return Err(Error::PTooLarge { p, max: limit });
    }
    if p < q {
        return Err(Error::PMismatch {
            expected: q,
            got: p,
        });
    }
    let y = realizable_exact(q, &pair.plus_order())?.ok_or(Error::NotRealizable)?;
    if p == q {
        return Ok(pair.clone());
    }
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    let ceiling = if q == 0 {
        int(0)
    } else {
        int(2) * &y[q - 1] - &y[0]
    };
    // offsets j + frac with distinct dyadic fractions avoid accidental ties;
    // a tie would make the sort ambiguous, which the exact check catches
    for attempt in 0..16i64 {
        let mut full = y.clone();
        for j in 1..=(p - q) as i64 {
            let frac = BigRational::new(
                BigInt::from((j * 7919 + attempt * 104_729) % 1021 + 1),
                BigInt::from(2048 + attempt),
            );
            full.push(&ceiling - int(j) - frac);
        }
        let mut order = s_plus(p);
        order.sort_by(|a, b| b.sum(&full).cmp(&a.sum(&full)));
        if realizable_exact(p, &order)?.is_some() {
            let ext = OrderingPair::from_plus_order(p, &order)?;
            debug_assert_eq!(ext.restrict(q).as_ref(), Some(pair));
            return Ok(ext);
        }
    }
    Err(Error::NotRealizable)
}
