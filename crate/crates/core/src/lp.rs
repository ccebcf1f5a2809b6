//! Exact two-phase simplex over the rationals (Bland's rule).
//!
//! Problems are stated with free variables: maximize `c·x` subject to
//! `A x <= b`.

use num_traits::{One, Signed, Zero};

use crate::rational::Q;

#[derive(Clone, Debug, PartialEq)]
pub enum LpResult {
    Optimal { value: Q, x: Vec<Q> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Q>>, // each row: coefficients followed by rhs
    obj: Vec<Q>,       // reduced-cost row, last entry = -objective value
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for x in self.rows[r].iter_mut() {
            *x *= &inv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&prow) {
                    *x -= &f * p;
                }
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (x, p) in self.obj.iter_mut().zip(&prow) {
                *x -= &f * p;
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes; `obj[j] < 0` means column j improves the objective.
    /// Returns false if unbounded. Columns `>= allowed` never enter.
    fn run(&mut self, allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| self.obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[self.ncols] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Maximize `c·x` subject to `a x <= b` with `x` free.
pub fn maximize(c: &[Q], a: &[Vec<Q>], b: &[Q]) -> LpResult {
    let n = c.len();
    let m = a.len();
    // columns: x+ (n), x- (n), slack (m), artificial (m)
    let nv = 2 * n + m;
    let ncols = nv + m;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art_rows = Vec::new();
    for i in 0..m {
        let mut row = vec![Q::zero(); ncols + 1];
        let neg = b[i].is_negative();
        let sgn = if neg { -Q::one() } else { Q::one() };
        for j in 0..n {
            row[j] = &sgn * &a[i][j];
            row[n + j] = -&sgn * &a[i][j];
        }
        row[2 * n + i] = sgn.clone();
        row[ncols] = &sgn * &b[i];
        if neg {
            row[nv + i] = Q::one();
            basis.push(nv + i);
            art_rows.push(i);
        } else {
            basis.push(2 * n + i);
        }
        rows.push(row);
    }
    let mut t = Tableau { rows, obj: vec![Q::zero(); ncols + 1], basis, ncols };
    if !art_rows.is_empty() {
        // phase 1: maximize -sum(artificials)
        for &i in &art_rows {
            t.obj[nv + i] = Q::one();
        }
        for &i in &art_rows {
            let row = t.rows[i].clone();
            for (x, p) in t.obj.iter_mut().zip(&row) {
                *x -= p;
            }
        }
        t.run(ncols);
        if t.obj[ncols].is_negative() {
            return LpResult::Infeasible;
        }
        // drive remaining artificials out of the basis
        for r in 0..m {
            if t.basis[r] >= nv {
                if let Some(c) = (0..nv).find(|&j| !t.rows[r][j].is_zero()) {
                    t.pivot(r, c);
                }
            }
        }
    }
    // phase 2
    t.obj = vec![Q::zero(); ncols + 1];
    for j in 0..n {
        t.obj[j] = -c[j].clone();
        t.obj[n + j] = c[j].clone();
    }
    for r in 0..m {
        let bc = t.basis[r];
        if !t.obj[bc].is_zero() {
            let f = t.obj[bc].clone();
            let row = t.rows[r].clone();
            for (x, p) in t.obj.iter_mut().zip(&row) {
                *x -= &f * p;
            }
        }
    }
    if !t.run(nv) {
        return LpResult::Unbounded;
    }
    let mut vals = vec![Q::zero(); ncols];
    for (r, &bc) in t.basis.iter().enumerate() {
        vals[bc] = t.rows[r][ncols].clone();
    }
    let x: Vec<Q> = (0..n).map(|j| &vals[j] - &vals[n + j]).collect();
    let value = crate::rational::dot(c, &x);
    LpResult::Optimal { value, x }
}

/// Some point with `a x <= b`, if one exists.
pub fn feasible_point(a: &[Vec<Q>], b: &[Q], n: usize) -> Option<Vec<Q>> {
    match maximize(&vec![Q::zero(); n], a, b) {
        LpResult::Optimal { x, .. } => Some(x),
        _ => None,
    }
}

/// Maximal `t <= 1` such that `a x >= t` componentwise is feasible together
/// with the extra constraints `e x <= f`; returns `(t, x)`.
pub fn max_margin(a: &[Vec<Q>], extra: &[Vec<Q>], f: &[Q], n: usize) -> Option<(Q, Vec<Q>)> {
    // variables (x, t): -a x + t <= 0, t <= 1, e x <= f
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for r in a {
        let mut row: Vec<Q> = r.iter().map(|v| -v).collect();
        row.push(Q::one());
        rows.push(row);
        rhs.push(Q::zero());
    }
    let mut tr = vec![Q::zero(); n];
    tr.push(Q::one());
    rows.push(tr);
    rhs.push(Q::one());
    for (r, v) in extra.iter().zip(f) {
        let mut row = r.clone();
        row.push(Q::zero());
        rows.push(row);
        rhs.push(v.clone());
    }
    let mut c = vec![Q::zero(); n];
    c.push(Q::one());
    match maximize(&c, &rows, &rhs) {
        LpResult::Optimal { value, mut x } => {
            x.pop();
            Some((value, x))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf, qvec};

    #[test]
    fn simple_max() {
        // max x + y, x <= 1, y <= 2, x + y <= 5/2
        let a = vec![qvec(&[1, 0]), qvec(&[0, 1]), qvec(&[1, 1])];
        let b = vec![q(1), q(2), qf(5, 2)];
        match maximize(&qvec(&[1, 1]), &a, &b) {
            LpResult::Optimal { value, .. } => assert_eq!(value, qf(5, 2)),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = vec![qvec(&[1]), qvec(&[-1])];
        assert_eq!(maximize(&qvec(&[0]), &a, &qvec(&[-1, -1])), LpResult::Infeasible);
        assert_eq!(maximize(&qvec(&[1]), &[qvec(&[-1])], &qvec(&[0])), LpResult::Unbounded);
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // x >= 2, x <= 3 ; max -x  -> -2
        let a = vec![qvec(&[-1]), qvec(&[1])];
        match maximize(&qvec(&[-1]), &a, &qvec(&[-2, 3])) {
            LpResult::Optimal { value, x } => {
                assert_eq!(value, q(-2));
                assert_eq!(x, qvec(&[2]));
            }
            r => panic!("{r:?}"),
        }
    }
}
