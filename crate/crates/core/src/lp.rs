//! Two-phase tableau simplex with Bland's rule, generic over [`Scalar`].
//!
//! Problems are given in equality standard form
//! `maximize cᵀx subject to Ax = b, x ≥ 0`. With [`Rational`] every pivot is
//! exact and the returned dual vector certifies optimality exactly.

use crate::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("constraint matrix is {rows}x{cols} but b has {b} entries and c has {c}")]
    Shape {
        rows: usize,
        cols: usize,
        b: usize,
        c: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<S: Scalar> {
    pub objective: Vec<S>,
    pub a: Vec<Vec<S>>,
    pub b: Vec<S>,
}

pub type ExactLp = LinearProgram<Rational>;
pub type FloatLp = LinearProgram<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S: Scalar> {
    pub status: LpStatus,
    /// Primal optimum (meaningful when `Optimal`).
    pub x: Vec<S>,
    pub value: S,
    /// Dual vector `y` with `Aᵀy ≥ c` and `bᵀy = value` (when `Optimal`).
    pub dual: Vec<S>,
}

struct Tableau<S: Scalar> {
    rows: Vec<Vec<S>>, // each row: n + m coefficients, then rhs
    basis: Vec<usize>,
    n: usize,
    m: usize,
}

impl<S: Scalar> Tableau<S> {
    fn width(&self) -> usize {
        self.n + self.m
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col].clone();
            if f.is_zero() {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = v.clone() - f.clone() * pv.clone();
            }
            // keep exact zeros exact, and snap float noise
            if !S::EXACT {
                for v in row.iter_mut() {
                    if v.is_negligible() {
                        *v = S::zero();
                    }
                }
            }
        }
        self.basis[r] = col;
    }

    fn reduced_costs(&self, cost: &[S]) -> Vec<S> {
        let mut r: Vec<S> = cost.to_vec();
        for (row, &bv) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[bv];
            if cb.is_zero() {
                continue;
            }
            for (rj, v) in r.iter_mut().zip(row.iter()) {
                *rj = rj.clone() - cb.clone() * v.clone();
            }
        }
        r
    }

    fn value(&self, cost: &[S]) -> S {
        let w = self.width();
        self.rows
            .iter()
            .zip(&self.basis)
            .fold(S::zero(), |acc, (row, &bv)| acc + cost[bv].clone() * row[w].clone())
    }

    /// Runs Bland's-rule simplex; `allowed` bounds the entering columns.
    /// Returns false when unbounded.
    fn optimize(&mut self, cost: &[S], allowed: usize) -> bool {
        let w = self.width();
        loop {
            let r = self.reduced_costs(cost);
            let Some(col) = (0..allowed).find(|&j| r[j].is_positive_strict()) else {
                return true;
            };
            let mut best: Option<(usize, S)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[col].is_positive_strict() {
                    continue;
                }
                let ratio = row[w].clone() / row[col].clone();
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (!(ratio > *br) && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((i, _)) => self.pivot(i, col),
                None => return false,
            }
        }
    }
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(objective: Vec<S>, a: Vec<Vec<S>>, b: Vec<S>) -> Result<Self, LpError> {
        let n = objective.len();
        if a.len() != b.len() || a.iter().any(|r| r.len() != n) {
            return Err(LpError::Shape {
                rows: a.len(),
                cols: a.first().map_or(0, Vec::len),
                b: b.len(),
                c: n,
            });
        }
        Ok(LinearProgram { objective, a, b })
    }

    pub fn solve(&self) -> LpSolution<S> {
        let n = self.objective.len();
        let m = self.a.len();
        let mut signs = Vec::with_capacity(m);
        let mut rows = Vec::with_capacity(m);
        for (i, (ai, bi)) in self.a.iter().zip(&self.b).enumerate() {
            let neg = bi.is_negative();
            let s = if neg { -S::one() } else { S::one() };
            signs.push(s.clone());
            let mut row: Vec<S> = ai.iter().map(|v| v.clone() * s.clone()).collect();
            row.extend((0..m).map(|k| if k == i { S::one() } else { S::zero() }));
            row.push(bi.clone() * s);
            rows.push(row);
        }
        let mut t = Tableau {
            rows,
            basis: (n..n + m).collect(),
            n,
            m,
        };

        // phase 1: maximize -Σ artificials
        let mut phase1 = vec![S::zero(); n + m];
        for c in phase1.iter_mut().skip(n) {
            *c = -S::one();
        }
        t.optimize(&phase1, n);
        let infeasible = LpSolution {
            status: LpStatus::Infeasible,
            x: vec![S::zero(); n],
            value: S::zero(),
            dual: vec![S::zero(); m],
        };
        if t.value(&phase1).is_negative_strict() {
            return infeasible;
        }
        // drive artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= n {
                match (0..n).find(|&j| !t.rows[i][j].is_negligible()) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }

        let mut cost = self.objective.clone();
        cost.extend((0..m).map(|_| S::zero()));
        if !t.optimize(&cost, n) {
            return LpSolution {
                status: LpStatus::Unbounded,
                x: vec![S::zero(); n],
                value: S::zero(),
                dual: vec![S::zero(); m],
            };
        }
        let w = t.width();
        let mut x = vec![S::zero(); n];
        for (row, &bv) in t.rows.iter().zip(&t.basis) {
            if bv < n {
                x[bv] = row[w].clone();
            }
        }
        // y' = c_Bᵀ B⁻¹, read from the artificial columns; undo row sign flips
        let mut dual = vec![S::zero(); m];
        for (row, &bv) in t.rows.iter().zip(&t.basis) {
            let cb = cost[bv].clone();
            if cb.is_zero() {
                continue;
            }
            for (k, d) in dual.iter_mut().enumerate() {
                *d = d.clone() + cb.clone() * row[n + k].clone();
            }
        }
        for (d, s) in dual.iter_mut().zip(&signs) {
            *d = d.clone() * s.clone();
        }
        let value = t.value(&cost);
        LpSolution {
            status: LpStatus::Optimal,
            x,
            value,
            dual,
        }
    }

    /// Checks primal feasibility of `x`.
    pub fn is_feasible(&self, x: &[S]) -> bool {
        x.iter().all(|v| !v.is_negative_strict())
            && self.a.iter().zip(&self.b).all(|(row, bi)| {
                let lhs = row
                    .iter()
                    .zip(x)
                    .fold(S::zero(), |acc, (a, v)| acc + a.clone() * v.clone());
                (lhs - bi.clone()).is_negligible()
            })
    }

    /// Checks that `y` is dual feasible (`Aᵀy ≥ c`) with objective `bᵀy =
    /// value`, which certifies that no feasible point exceeds `value`.
    pub fn certifies(&self, y: &[S], value: &S) -> bool {
        let n = self.objective.len();
        let dual_ok = (0..n).all(|j| {
            let col = self
                .a
                .iter()
                .zip(y)
                .fold(S::zero(), |acc, (row, yi)| acc + row[j].clone() * yi.clone());
            !(col - self.objective[j].clone()).is_negative_strict()
        });
        let by = self
            .b
            .iter()
            .zip(y)
            .fold(S::zero(), |acc, (b, yi)| acc + b.clone() * yi.clone());
        dual_ok && (by - value.clone()).is_negligible()
    }

    pub fn objective_at(&self, x: &[S]) -> S {
        self.objective
            .iter()
            .zip(x)
            .fold(S::zero(), |acc, (c, v)| acc + c.clone() * v.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn small_exact_lp() {
        // max x + y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let lp = ExactLp::new(
            vec![int(1), int(1), int(0), int(0)],
            vec![
                vec![int(1), int(2), int(1), int(0)],
                vec![int(3), int(1), int(0), int(1)],
            ],
            vec![int(4), int(6)],
        )
        .unwrap();
        let s = lp.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.value, rat(14, 5));
        assert!(lp.is_feasible(&s.x));
        assert!(lp.certifies(&s.dual, &s.value));
    }

    #[test]
    fn redundant_and_negative_rows() {
        // x + y = 1 stated twice, -x = -1/2
        let lp = ExactLp::new(
            vec![int(0), int(1)],
            vec![vec![int(1), int(1)], vec![int(2), int(2)], vec![int(-1), int(0)]],
            vec![int(1), int(2), rat(-1, 2)],
        )
        .unwrap();
        let s = lp.solve();
        assert_eq!(s.value, rat(1, 2));
        assert!(lp.certifies(&s.dual, &s.value));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = ExactLp::new(vec![int(1)], vec![vec![int(1)], vec![int(1)]], vec![int(1), int(2)]).unwrap();
        assert_eq!(lp.solve().status, LpStatus::Infeasible);
        let lp = ExactLp::new(vec![int(1), int(0)], vec![vec![int(1), int(-1)]], vec![int(1)]).unwrap();
        assert_eq!(lp.solve().status, LpStatus::Unbounded);
    }

    #[test]
    fn float_matches_exact() {
        let lp = FloatLp::new(
            vec![1.0, 1.0, 0.0, 0.0],
            vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]],
            vec![4.0, 6.0],
        )
        .unwrap();
        let s = lp.solve();
        assert!((s.value - 2.8).abs() < 1e-12);
    }
}
