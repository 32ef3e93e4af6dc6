//! Exact two-phase simplex over rationals with Bland's rule.

use num_traits::{Signed, Zero};

use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Q {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = &*v / &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v = &*v - &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost · x` over columns `< allowed`; returns false if unbounded.
    fn optimize(&mut self, cost: &[Q], allowed: usize) -> bool {
        loop {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.rows[i][j].is_zero() {
                        rc -= &cost[b] * &self.rows[i][j];
                    }
                }
                if rc.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if a.is_positive() {
                    let ratio = self.rhs(i) / a;
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// Minimizes `c · x` subject to `A x ≤ b` and `x ≥ 0`.
pub fn minimize(c: &[Q], a: &[Vec<Q>], b: &[Q]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    let negative: Vec<usize> = (0..m).filter(|&i| b[i].is_negative()).collect();
    let k = negative.len();
    let width = n + m + k;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    for i in 0..m {
        let sign = if b[i].is_negative() { -Q::from_integer(1.into()) } else { Q::from_integer(1.into()) };
        let mut row = vec![Q::zero(); width + 1];
        for j in 0..n {
            row[j] = &a[i][j] * &sign;
        }
        row[n + i] = sign.clone();
        row[width] = &b[i] * &sign;
        if let Some(p) = negative.iter().position(|&x| x == i) {
            row[n + m + p] = Q::from_integer(1.into());
            basis.push(n + m + p);
        } else {
            basis.push(n + i);
        }
        rows.push(row);
    }
    let mut t = Tableau { rows, basis, width };
    if k > 0 {
        let mut phase1 = vec![Q::zero(); width];
        for v in phase1.iter_mut().skip(n + m) {
            *v = Q::from_integer(1.into());
        }
        t.optimize(&phase1, width);
        let infeas: Q = (0..m).filter(|&i| t.basis[i] >= n + m).map(|i| t.rhs(i).clone()).sum();
        if infeas.is_positive() {
            return LpOutcome::Infeasible;
        }
        // drive zero-level artificials out of the basis
        for i in 0..m {
            if t.basis[i] >= n + m {
                if let Some(j) = (0..n + m).find(|&j| !t.rows[i][j].is_zero()) {
                    t.pivot(i, j);
                }
            }
        }
    }
    let mut cost = vec![Q::zero(); width];
    cost[..n].clone_from_slice(c);
    if !t.optimize(&cost, n + m) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rhs(i).clone();
        }
    }
    let value = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn small_programs() {
        // min -x - y  s.t. x + 2y ≤ 4, 3x + y ≤ 6  → x = 8/5, y = 6/5
        let r = minimize(&[qi(-1), qi(-1)], &[vec![qi(1), qi(2)], vec![qi(3), qi(1)]], &[qi(4), qi(6)]);
        assert_eq!(r, LpOutcome::Optimal { x: vec![q(8, 5), q(6, 5)], value: q(-14, 5) });
        // min x s.t. -x ≤ -3 (x ≥ 3)
        let r = minimize(&[qi(1)], &[vec![qi(-1)]], &[qi(-3)]);
        assert_eq!(r, LpOutcome::Optimal { x: vec![qi(3)], value: qi(3) });
        // infeasible: x ≤ 1, x ≥ 2
        let r = minimize(&[qi(1)], &[vec![qi(1)], vec![qi(-1)]], &[qi(1), qi(-2)]);
        assert_eq!(r, LpOutcome::Infeasible);
        // unbounded: min -x with no upper bound
        let r = minimize(&[qi(-1)], &[vec![qi(-1)]], &[qi(0)]);
        assert_eq!(r, LpOutcome::Unbounded);
    }

    #[test]
    fn minimax_of_distances() {
        // min μ with |t - 1| ≤ μ, |t - 3| ≤ 2μ, 0 ≤ t ≤ 4 → t = 5/3, μ = 2/3
        let a = vec![
            vec![qi(1), qi(-1)],
            vec![qi(-1), qi(-1)],
            vec![qi(1), qi(-2)],
            vec![qi(-1), qi(-2)],
            vec![qi(1), qi(0)],
        ];
        let b = vec![qi(1), qi(-1), qi(3), qi(-3), qi(4)];
        match minimize(&[qi(0), qi(1)], &a, &b) {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, q(2, 3));
                assert_eq!(x[0], q(5, 3));
            }
            other => panic!("{other:?}"),
        }
    }
}
