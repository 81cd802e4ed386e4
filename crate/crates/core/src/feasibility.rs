//! Exact feasibility of `A y >= 1, y >= 0` for small integer matrices.
//!
//! Phase-one simplex over arbitrary-precision rationals with Bland's rule, so
//! the answer never depends on rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A system of constraints `row · y >= 1` over `vars` non-negative unknowns.
#[derive(Debug, Clone, Default)]
pub struct System {
    vars: usize,
    rows: Vec<Vec<i64>>,
}

impl System {
    pub fn new(vars: usize) -> Self {
        System {
            vars,
            rows: Vec::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Adds `coeffs · y >= 1`.
    pub fn push(&mut self, coeffs: Vec<i64>) {
        assert_eq!(coeffs.len(), self.vars);
        self.rows.push(coeffs);
    }

    /// True if `y` satisfies every row exactly.
    pub fn satisfied_by(&self, y: &[BigRational]) -> bool {
        y.iter().all(|v| !v.is_negative())
            && self.rows.iter().all(|row| dot(row, y) >= BigRational::one())
    }

    /// A feasible point, or `None` if the system is infeasible.
    pub fn solve(&self) -> Option<Vec<BigRational>> {
        if self.rows.is_empty() {
            return Some(vec![BigRational::zero(); self.vars]);
        }
        Tableau::phase_one(self).run()
    }
}

fn dot(row: &[i64], y: &[BigRational]) -> BigRational {
    row.iter()
        .zip(y)
        .filter(|(c, _)| **c != 0)
        .fold(BigRational::zero(), |acc, (c, v)| {
            acc + v * BigRational::from_integer(BigInt::from(*c))
        })
}

struct Tableau {
    vars: usize,
    // columns: vars | surplus (r) | artificial (r) | rhs
    cells: Vec<Vec<BigRational>>,
    // reduced costs of the phase-one objective, same layout, last = -objective
    cost: Vec<BigRational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn phase_one(sys: &System) -> Self {
        let r = sys.rows.len();
        let width = sys.vars + 2 * r + 1;
        let mut cells = Vec::with_capacity(r);
        for (i, row) in sys.rows.iter().enumerate() {
            let mut line = vec![BigRational::zero(); width];
            for (j, c) in row.iter().enumerate() {
                line[j] = BigRational::from_integer(BigInt::from(*c));
            }
            line[sys.vars + i] = -BigRational::one();
            line[sys.vars + r + i] = BigRational::one();
            line[width - 1] = BigRational::one();
            cells.push(line);
        }
        let mut cost = vec![BigRational::zero(); width];
        for line in &cells {
            for j in 0..sys.vars + r {
                cost[j] -= &line[j];
            }
            cost[width - 1] -= &line[width - 1];
        }
        Tableau {
            vars: sys.vars,
            cells,
            cost,
            basis: (0..r).map(|i| sys.vars + r + i).collect(),
        }
    }

    fn run(mut self) -> Option<Vec<BigRational>> {
        let width = self.cost.len();
        loop {
            // Bland: lowest-index column with negative reduced cost
            let Some(enter) = (0..width - 1).find(|&j| self.cost[j].is_negative()) else {
                break;
            };
            let mut leave: Option<(usize, BigRational)> = None;
            for (i, line) in self.cells.iter().enumerate() {
                if !line[enter].is_positive() {
                    continue;
                }
                let ratio = &line[width - 1] / &line[enter];
                let better = match &leave {
                    None => true,
                    Some((li, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            // phase one is bounded below by zero
            let (row, _) = leave.expect("phase-one objective is bounded");
            self.pivot(row, enter);
        }
        if !self.cost[width - 1].is_zero() {
            return None;
        }
        let mut y = vec![BigRational::zero(); self.vars];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.vars {
                y[b] = self.cells[i][width - 1].clone();
            }
        }
        Some(y)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.cost.len();
        let piv = self.cells[row][col].clone();
        if !piv.is_one() {
            for v in self.cells[row].iter_mut() {
                if !v.is_zero() {
                    *v /= &piv;
                }
            }
        }
        let prow = self.cells[row].clone();
        let nz: Vec<usize> = (0..width).filter(|&j| !prow[j].is_zero()).collect();
        for (i, line) in self.cells.iter_mut().enumerate() {
            if i == row || line[col].is_zero() {
                continue;
            }
            let f = line[col].clone();
            for &j in &nz {
                line[j] -= &f * &prow[j];
            }
        }
        if !self.cost[col].is_zero() {
            let f = self.cost[col].clone();
            for &j in &nz {
                self.cost[j] -= &f * &prow[j];
            }
        }
        self.basis[row] = col;
    }
}
