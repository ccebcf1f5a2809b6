//! Exact linear algebra over the rationals and the integers: echelon forms,
//! kernels, Hermite and Smith normal forms, and finitely generated abelian
//! group descriptors.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{qz, Q, Z};
use crate::Error;

pub type QMat = Vec<Vec<Q>>;
pub type ZMat = Vec<Vec<Z>>;

pub fn transpose<T: Clone>(m: &[Vec<T>]) -> Vec<Vec<T>> {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn mat_vec(m: &[Vec<Q>], v: &[Q]) -> Vec<Q> {
    m.iter().map(|row| crate::rational::dot(row, v)).collect()
}

pub fn vec_mat(v: &[Q], m: &[Vec<Q>], ncols: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); ncols];
    for (c, row) in v.iter().zip(m) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(row) {
            *o += c * x;
        }
    }
    out
}

pub fn mat_mul(a: &[Vec<Q>], b: &[Vec<Q>]) -> QMat {
    let ncols = b.first().map_or(0, |r| r.len());
    a.iter().map(|row| vec_mat(row, b, ncols)).collect()
}

pub fn identity(n: usize) -> QMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
}

pub fn to_q(m: &[Vec<Z>]) -> QMat {
    m.iter().map(|r| r.iter().map(qz).collect()).collect()
}

/// Reduced row echelon form and pivot columns.
pub fn rref(m: &[Vec<Q>]) -> (QMat, Vec<usize>) {
    let mut a: QMat = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

pub fn rank(m: &[Vec<Q>]) -> usize {
    rref(m).1.len()
}

/// Basis of the right kernel `{x : m x = 0}`.
pub fn nullspace(m: &[Vec<Q>], ncols: usize) -> QMat {
    let (r, pivots) = rref(m);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Q::zero(); ncols];
            x[f] = Q::one();
            for (row, &p) in r.iter().zip(&pivots) {
                x[p] = -row[f].clone();
            }
            x
        })
        .collect()
}

/// Some solution of `a x = b`, if one exists.
pub fn solve(a: &[Vec<Q>], b: &[Q], ncols: usize) -> Option<Vec<Q>> {
    let aug: QMat = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut x = vec![Q::zero(); ncols];
    for (row, &p) in r.iter().zip(&pivots) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}

/// Coordinates of `v` in the span of the rows of `basis`.
pub fn coords_in(basis: &[Vec<Q>], v: &[Q]) -> Option<Vec<Q>> {
    if basis.is_empty() {
        return if crate::rational::is_zero_vec(v) { Some(Vec::new()) } else { None };
    }
    solve(&transpose(basis), v, basis.len())
}

pub fn inverse(m: &[Vec<Q>]) -> Option<QMat> {
    let n = m.len();
    let aug: QMat = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn det(m: &[Vec<Q>]) -> Q {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] / &a[c][c];
                for j in c..n {
                    let t = &f * &a[c][j];
                    a[i][j] -= t;
                }
            }
        }
    }
    d
}

/// A maximal independent subset of rows (in order of appearance).
pub fn independent_rows(rows: &[Vec<Q>]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut acc: QMat = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        acc.push(r.clone());
        if rank(&acc) > chosen.len() {
            chosen.push(i);
        } else {
            acc.pop();
        }
    }
    chosen
}

// ---------------------------------------------------------------------------
// Integer normal forms

/// Row Hermite normal form of the lattice spanned by `rows`: nonzero rows in
/// echelon form with positive pivots and entries above each pivot reduced
/// into `[0, pivot)`.
pub fn hnf_rows(rows: &[Vec<Z>]) -> ZMat {
    let mut a: ZMat = rows.to_vec();
    let ncols = a.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        loop {
            // pick the smallest nonzero entry in column c at or below row r
            let mut best: Option<usize> = None;
            for i in r..a.len() {
                if !a[i][c].is_zero() && best.is_none_or(|b| a[i][c].abs() < a[b][c].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            a.swap(r, b);
            let mut done = true;
            for i in r + 1..a.len() {
                if !a[i][c].is_zero() {
                    let f = a[i][c].div_floor(&a[r][c]);
                    for j in 0..ncols {
                        let t = &f * &a[r][j];
                        a[i][j] -= t;
                    }
                    if !a[i][c].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for x in a[r].iter_mut() {
                *x = -x.clone();
            }
        }
        for i in 0..r {
            let f = a[i][c].div_floor(&a[r][c]);
            if !f.is_zero() {
                for j in 0..ncols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
            }
        }
        r += 1;
    }
    a.truncate(r);
    a.retain(|row| row.iter().any(|x| !x.is_zero()));
    a
}

/// Smith normal form `u * m * v = diag(d)` with unimodular `u`, `v`.
#[derive(Clone, Debug)]
pub struct Smith {
    /// Diagonal entries, `d[i] | d[i+1]`, trailing zeros omitted.
    pub diag: Vec<Z>,
    pub u: ZMat,
    pub v: ZMat,
}

fn zid(n: usize) -> ZMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { Z::one() } else { Z::zero() }).collect()).collect()
}

pub fn smith(m: &[Vec<Z>], ncols: usize) -> Smith {
    let rows = m.len();
    let mut a: ZMat = m.to_vec();
    let mut u = zid(rows);
    let mut v = zid(ncols);
    let row_op = |a: &mut ZMat, u: &mut ZMat, dst: usize, src: usize, f: &Z| {
        for j in 0..a[0].len() {
            let t = f * &a[src][j];
            a[dst][j] -= t;
        }
        for j in 0..u[0].len() {
            let t = f * &u[src][j];
            u[dst][j] -= t;
        }
    };
    let col_op = |a: &mut ZMat, v: &mut ZMat, dst: usize, src: usize, f: &Z| {
        for row in a.iter_mut() {
            let t = f * &row[src];
            row[dst] -= t;
        }
        for row in v.iter_mut() {
            let t = f * &row[src];
            row[dst] -= t;
        }
    };
    let mut t = 0;
    while t < rows.min(ncols) {
        // find pivot of minimal absolute value in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..ncols {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        u.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        let mut clean = true;
        for i in t + 1..rows {
            if !a[i][t].is_zero() {
                let f = a[i][t].div_floor(&a[t][t]);
                row_op(&mut a, &mut u, i, t, &f);
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
        }
        for j in t + 1..ncols {
            if !a[t][j].is_zero() {
                let f = a[t][j].div_floor(&a[t][t]);
                col_op(&mut a, &mut v, j, t, &f);
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
        }
        if !clean {
            continue;
        }
        // divisibility: if some entry is not divisible by the pivot, add its row
        let mut fixed = true;
        'outer: for i in t + 1..rows {
            for j in t + 1..ncols {
                if !(&a[i][j] % &a[t][t]).is_zero() {
                    let f = -Z::one();
                    row_op(&mut a, &mut u, t, i, &f);
                    fixed = false;
                    break 'outer;
                }
            }
        }
        if !fixed {
            continue;
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        t += 1;
    }
    let diag = (0..t).map(|i| a[i][i].clone()).collect();
    Smith { diag, u, v }
}

/// Basis of `{x in Z^n : m x = 0}` (columns returned as vectors).
pub fn int_kernel(m: &[Vec<Z>], ncols: usize) -> ZMat {
    if m.is_empty() {
        return zid(ncols);
    }
    let s = smith(m, ncols);
    let r = s.diag.len();
    (r..ncols).map(|j| s.v.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Some integer solution of `m x = b`.
pub fn int_solve(m: &[Vec<Z>], b: &[Z], ncols: usize) -> Option<Vec<Z>> {
    let s = smith(m, ncols);
    let ub: Vec<Z> = s.u.iter().map(|row| row.iter().zip(b).fold(Z::zero(), |acc, (x, y)| acc + x * y)).collect();
    let mut y = vec![Z::zero(); ncols];
    for (i, val) in ub.iter().enumerate() {
        if i < s.diag.len() {
            let (qt, rm) = val.div_rem(&s.diag[i]);
            if !rm.is_zero() {
                return None;
            }
            y[i] = qt;
        } else if !val.is_zero() {
            return None;
        }
    }
    Some(s.v.iter().map(|row| row.iter().zip(&y).fold(Z::zero(), |acc, (x, yy)| acc + x * yy)).collect())
}

// ---------------------------------------------------------------------------
// Abelian groups

/// A finitely generated abelian group `Z^free ⊕ Z/d1 ⊕ ... ⊕ Z/dk` with
/// `1 < d1 | d2 | ... | dk`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbelianGroup {
    pub free_rank: usize,
    #[serde(with = "zlist")]
    pub torsion: Vec<Z>,
}

mod zlist {
    use super::Z;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Z], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Z>, D::Error> {
        let v: Vec<String> = Vec::deserialize(d)?;
        v.iter().map(|s| s.parse().map_err(serde::de::Error::custom)).collect()
    }
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        AbelianGroup { free_rank: 0, torsion: Vec::new() }
    }

    pub fn free(rank: usize) -> Self {
        AbelianGroup { free_rank: rank, torsion: Vec::new() }
    }

    pub fn cyclic(d: &Z) -> Self {
        if d.is_zero() {
            return Self::free(1);
        }
        Self::from_factors(0, std::slice::from_ref(d))
    }

    /// Normalizes an arbitrary list of cyclic orders (zeros mean `Z`).
    pub fn from_factors(free: usize, orders: &[Z]) -> Self {
        let mut free_rank = free;
        let diag: Vec<Vec<Z>> = orders
            .iter()
            .enumerate()
            .map(|(i, d)| (0..orders.len()).map(|j| if i == j { d.abs() } else { Z::zero() }).collect())
            .collect();
        let s = smith(&diag, orders.len());
        free_rank += orders.len() - s.diag.len();
        let torsion = s.diag.into_iter().filter(|d| !d.is_one()).collect();
        AbelianGroup { free_rank, torsion }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Order of a finite group, `None` if infinite.
    pub fn order(&self) -> Option<Z> {
        (self.free_rank == 0).then(|| self.torsion.iter().product())
    }

    pub fn direct_sum(&self, other: &AbelianGroup) -> AbelianGroup {
        let mut orders = self.torsion.clone();
        orders.extend(other.torsion.iter().cloned());
        Self::from_factors(self.free_rank + other.free_rank, &orders)
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for d in &self.torsion {
            parts.push(format!("Z/{d}"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// The quotient `<sup> / <sub>` of integer lattices given by generators.
/// Fails if `sub` is not contained in `sup`.
pub fn quotient_group(sup: &[Vec<Z>], sub: &[Vec<Z>]) -> crate::Result<AbelianGroup> {
    let basis = hnf_rows(sup);
    let r = basis.len();
    let bq = to_q(&basis);
    let mut coeffs: ZMat = Vec::new();
    for g in sub {
        let gq: Vec<Q> = g.iter().map(qz).collect();
        let c = coords_in(&bq, &gq).ok_or_else(|| Error::NotContained("sublattice not contained in lattice".into()))?;
        if c.iter().any(|x| !x.is_integer()) {
            return Err(Error::NotContained("sublattice not contained in lattice".into()));
        }
        coeffs.push(c.iter().map(|x| x.to_integer()).collect());
    }
    if coeffs.is_empty() {
        return Ok(AbelianGroup::free(r));
    }
    let s = smith(&coeffs, r);
    let free_rank = r - s.diag.len();
    let torsion = s.diag.into_iter().filter(|d| !d.is_one()).collect();
    Ok(AbelianGroup { free_rank, torsion })
}

/// Cokernel `Z^m / image(cols)` of an integer matrix with `m` rows.
pub fn cokernel(m: &[Vec<Z>], nrows: usize) -> AbelianGroup {
    let sup = zid(nrows);
    let cols = transpose(m);
    quotient_group(&sup, &cols).expect("image is contained in the ambient lattice")
}
