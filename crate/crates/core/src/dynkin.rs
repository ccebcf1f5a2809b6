//! Finite and affine Dynkin data: Gram and Cartan matrices in Bourbaki node
//! order, positive roots, highest roots, diagram automorphisms, and
//! identification of Cartan matrices up to relabeling.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, QMat};
use crate::rational::{q, qf, Q};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FiniteType {
    pub letter: char,
    pub rank: usize,
}

impl fmt::Display for FiniteType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.letter, self.rank)
    }
}

impl FiniteType {
    /// Accepts every valid Cartan type, including the low-rank coincidences
    /// `B1`, `C1`, `D3` used internally.
    pub fn new(letter: char, rank: usize) -> Result<Self> {
        let ok = match letter {
            'A' => rank >= 1,
            'B' | 'C' => rank >= 1,
            'D' => rank >= 3,
            'E' => (6..=8).contains(&rank),
            'F' => rank == 4,
            'G' => rank == 2,
            _ => false,
        };
        if ok {
            Ok(FiniteType { letter, rank })
        } else {
            Err(Error::InvalidType(format!("{letter}{rank}")))
        }
    }

    /// Squared lengths of the simple roots (long roots have length 2).
    pub fn lengths(&self) -> Vec<Q> {
        let n = self.rank;
        match self.letter {
            'B' => (0..n).map(|i| if i + 1 == n { q(1) } else { q(2) }).collect(),
            'C' if n > 1 => (0..n).map(|i| if i + 1 == n { q(2) } else { q(1) }).collect(),
            'F' => vec![q(2), q(2), q(1), q(1)],
            'G' => vec![qf(2, 3), q(2)],
            _ => vec![q(2); n],
        }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.rank;
        match self.letter {
            'A' | 'B' | 'C' | 'F' | 'G' => (1..n).map(|i| (i - 1, i)).collect(),
            'D' => {
                let mut e: Vec<_> = (1..n - 1).map(|i| (i - 1, i)).collect();
                e.push((n - 3, n - 1));
                e
            }
            'E' => {
                let mut e = vec![(0, 2), (1, 3), (2, 3)];
                e.extend((4..n).map(|i| (i - 1, i)));
                e
            }
            _ => Vec::new(),
        }
    }

    pub fn gram(&self) -> QMat {
        let d = self.lengths();
        let n = self.rank;
        let mut g = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            g[i][i] = d[i].clone();
        }
        for (i, j) in self.edges() {
            let m = if d[i] > d[j] { d[i].clone() } else { d[j].clone() };
            let v = -m / q(2);
            g[i][j] = v.clone();
            g[j][i] = v;
        }
        g
    }

    pub fn cartan(&self) -> Vec<Vec<i64>> {
        cartan_of(&self.gram(), &linalg::identity(self.rank))
    }

    /// Positive roots in simple-root coordinates, sorted by height then
    /// lexicographically.
    pub fn positive_roots(&self) -> Vec<Vec<i64>> {
        let a = self.cartan();
        let n = self.rank;
        let mut roots: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        let mut k = 0;
        while k < roots.len() {
            let b = roots[k].clone();
            for i in 0..n {
                let unit = (0..n).all(|j| b[j] == i64::from(i == j));
                if unit {
                    continue;
                }
                let p: i64 = (0..n).map(|j| b[j] * a[j][i]).sum();
                let mut r = b.clone();
                r[i] -= p;
                if r.iter().all(|&x| x >= 0) && !roots.contains(&r) {
                    roots.push(r);
                }
            }
            k += 1;
        }
        roots.sort_by_key(|r| (r.iter().sum::<i64>(), r.clone()));
        roots
    }

    pub fn highest_root(&self) -> Vec<i64> {
        self.positive_roots().pop().expect("nonempty")
    }

    /// Highest root among the short ones (the highest root if simply laced).
    pub fn highest_short_root(&self) -> Vec<i64> {
        let g = self.gram();
        let norm = |r: &Vec<i64>| -> Q {
            let v: Vec<Q> = r.iter().map(|&x| q(x)).collect();
            crate::rational::dot(&v, &linalg::mat_vec(&g, &v))
        };
        let roots = self.positive_roots();
        let min = roots.iter().map(norm).min().expect("nonempty");
        roots.into_iter().rfind(|r| norm(r) == min).expect("nonempty")
    }

    /// Dimension of the compact simply connected group.
    pub fn group_dim(&self) -> usize {
        let n = self.rank;
        match (self.letter, n) {
            ('A', _) => n * (n + 2),
            ('B' | 'C', _) => n * (2 * n + 1),
            ('D', _) => n * (2 * n - 1),
            ('E', 6) => 78,
            ('E', 7) => 133,
            ('E', 8) => 248,
            ('F', _) => 52,
            ('G', _) => 14,
            _ => unreachable!("validated type"),
        }
    }

    /// Diagram automorphisms as node permutations (identity first).
    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        let n = self.rank;
        let id: Vec<usize> = (0..n).collect();
        let mut out = vec![id.clone()];
        match self.letter {
            'A' if n >= 2 => out.push((0..n).rev().collect()),
            'D' if n == 4 => {
                for p in [[0, 3, 2], [2, 0, 3], [2, 3, 0], [3, 0, 2], [3, 2, 0]] {
                    let mut s = id.clone();
                    s[0] = p[0];
                    s[2] = p[1];
                    s[3] = p[2];
                    out.push(s);
                }
            }
            'D' if n >= 5 => {
                let mut s = id.clone();
                s.swap(n - 2, n - 1);
                out.push(s);
            }
            'E' if n == 6 => out.push(vec![5, 1, 4, 3, 2, 0]),
            _ => {}
        }
        out
    }

    /// Canonical form of a type up to isomorphism of root systems.
    pub fn canonical(&self) -> FiniteType {
        match (self.letter, self.rank) {
            ('B' | 'C', 1) => FiniteType { letter: 'A', rank: 1 },
            ('B', 2) => FiniteType { letter: 'C', rank: 2 },
            ('D', 3) => FiniteType { letter: 'A', rank: 3 },
            _ => *self,
        }
    }
}

/// `cartan[i][j] = ⟨g_i, g_j^∨⟩ = 2⟨g_i,g_j⟩/⟨g_j,g_j⟩` for gradient rows.
pub fn cartan_of(gram: &[Vec<Q>], grads: &[Vec<Q>]) -> Vec<Vec<i64>> {
    let lowered: QMat = grads.iter().map(|g| linalg::mat_vec(gram, g)).collect();
    let pair = |i: usize, j: usize| crate::rational::dot(&grads[i], &lowered[j]);
    (0..grads.len())
        .map(|i| {
            (0..grads.len())
                .map(|j| {
                    let v = q(2) * pair(i, j) / pair(j, j);
                    if v.is_integer() {
                        i64::try_from(v.to_integer()).unwrap_or(i64::MIN)
                    } else {
                        i64::MIN
                    }
                })
                .collect()
        })
        .collect()
}

/// Finite types of rank `n`, one per isomorphism class.
fn finite_candidates(n: usize) -> Vec<FiniteType> {
    let mut c = vec![FiniteType { letter: 'A', rank: n }];
    if n >= 3 {
        c.push(FiniteType { letter: 'B', rank: n });
    }
    if n >= 2 {
        c.push(FiniteType { letter: 'C', rank: n });
    }
    if n >= 4 {
        c.push(FiniteType { letter: 'D', rank: n });
    }
    if (6..=8).contains(&n) {
        c.push(FiniteType { letter: 'E', rank: n });
    }
    if n == 4 {
        c.push(FiniteType { letter: 'F', rank: 4 });
    }
    if n == 2 {
        c.push(FiniteType { letter: 'G', rank: 2 });
    }
    c
}

/// Connected components of the Coxeter graph of a Cartan matrix.
pub fn components(cartan: &[Vec<i64>]) -> Vec<Vec<usize>> {
    let n = cartan.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut k = 0;
        while k < comp.len() {
            let i = comp[k];
            for j in 0..n {
                if !seen[j] && (cartan[i][j] != 0 || cartan[j][i] != 0) {
                    seen[j] = true;
                    comp.push(j);
                }
            }
            k += 1;
        }
        comp.sort();
        out.push(comp);
    }
    out
}

/// Find `p` with `target[i][j] == m[nodes[p[i]]][nodes[p[j]]]`.
fn match_cartan(target: &[Vec<i64>], m: &[Vec<i64>], nodes: &[usize]) -> Option<Vec<usize>> {
    let n = target.len();
    if n != nodes.len() {
        return None;
    }
    fn rec(
        k: usize,
        target: &[Vec<i64>],
        m: &[Vec<i64>],
        nodes: &[usize],
        p: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        let n = target.len();
        if k == n {
            return true;
        }
        for c in 0..n {
            if used[c] {
                continue;
            }
            let ok = (0..k)
                .all(|i| target[i][k] == m[nodes[p[i]]][nodes[c]] && target[k][i] == m[nodes[c]][nodes[p[i]]])
                && target[k][k] == m[nodes[c]][nodes[c]];
            if ok {
                used[c] = true;
                p.push(c);
                if rec(k + 1, target, m, nodes, p, used) {
                    return true;
                }
                p.pop();
                used[c] = false;
            }
        }
        false
    }
    let mut p = Vec::new();
    let mut used = vec![false; n];
    rec(0, target, m, nodes, &mut p, &mut used).then(|| p.iter().map(|&c| nodes[c]).collect())
}

/// Identifies a finite-type component; returns the type and, for each
/// Bourbaki node, the index of the matching input node.
pub fn identify_finite(cartan: &[Vec<i64>], nodes: &[usize]) -> Option<(FiniteType, Vec<usize>)> {
    for t in finite_candidates(nodes.len()) {
        if let Some(p) = match_cartan(&t.cartan(), cartan, nodes) {
            return Some((t, p));
        }
    }
    None
}

/// Decomposes a finite-type Cartan matrix into canonical components, sorted
/// by type. Errors if some component is not of finite type.
pub fn classify_finite(cartan: &[Vec<i64>]) -> Result<Vec<(FiniteType, Vec<usize>)>> {
    let mut out = Vec::new();
    for comp in components(cartan) {
        let found = identify_finite(cartan, &comp)
            .ok_or_else(|| Error::InvalidType("Cartan matrix is not of finite type".into()))?;
        out.push(found);
    }
    out.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    Ok(out)
}

/// Name of a product of finite types, e.g. `A1×C2`; `∅` when empty.
pub fn product_name(types: &[FiniteType]) -> String {
    if types.is_empty() {
        return "∅".into();
    }
    types.iter().map(|t| t.to_string()).collect::<Vec<_>>().join("×")
}

// ---------------------------------------------------------------------------
// Affine data

/// An irreducible affine type `X_N^(r)` (Kac notation).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineType {
    pub letter: char,
    pub rank: usize,
    pub twist: usize,
}

impl fmt::Display for AffineType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}^({})", self.letter, self.rank, self.twist)
    }
}

/// Seed data of an affine type: the finite system `Y` of the walls through
/// the origin and the coefficients of `ψ` with `α₀ = 1 − ψ`.
#[derive(Clone, Debug)]
pub struct AffineSeed {
    pub finite: FiniteType,
    pub psi: Vec<i64>,
}

impl AffineType {
    pub fn new(letter: char, rank: usize, twist: usize) -> Result<Self> {
        let bad = || Error::InvalidType(format!("{letter}{rank}^({twist})"));
        match twist {
            1 => {
                FiniteType::new(letter, rank).map_err(|_| bad())?;
                if matches!(letter, 'B' | 'C') && rank < 2 {
                    return Err(bad());
                }
            }
            2 => {
                let ok = match letter {
                    'A' => rank >= 2,
                    'D' => rank >= 3,
                    'E' => rank == 6,
                    _ => false,
                };
                if !ok {
                    return Err(bad());
                }
            }
            3 => {
                if !(letter == 'D' && rank == 4) {
                    return Err(bad());
                }
            }
            _ => return Err(bad()),
        }
        Ok(AffineType { letter, rank, twist })
    }

    pub fn seed(&self) -> AffineSeed {
        let n = self.rank;
        let (finite, psi) = match (self.letter, self.twist) {
            (_, 1) => {
                let y = FiniteType { letter: self.letter, rank: n };
                (y, y.highest_root())
            }
            ('A', 2) if n.is_multiple_of(2) => {
                let y = FiniteType { letter: 'B', rank: n / 2 };
                (y, y.highest_short_root().iter().map(|x| 2 * x).collect())
            }
            ('A', 2) => {
                let y = FiniteType { letter: 'C', rank: n.div_ceil(2) };
                (y, y.highest_short_root())
            }
            ('D', 2) => {
                let y = FiniteType { letter: 'B', rank: n - 1 };
                (y, y.highest_short_root())
            }
            ('E', 2) => {
                let y = FiniteType { letter: 'F', rank: 4 };
                (y, y.highest_short_root())
            }
            ('D', 3) => {
                let y = FiniteType { letter: 'G', rank: 2 };
                (y, y.highest_short_root())
            }
            _ => unreachable!("validated affine type"),
        };
        AffineSeed { finite, psi }
    }

    /// Number of simple roots.
    pub fn nodes(&self) -> usize {
        self.seed().finite.rank + 1
    }

    /// Gradients (rows, in the basis of the simple roots of `Y`), Gram
    /// matrix normalized so that the longest simple gradient has squared
    /// length 2, and the constants of α₀, α₁, …
    pub fn realization(&self) -> (QMat, QMat, Vec<Q>) {
        let seed = self.seed();
        let n = seed.finite.rank;
        let mut grads: QMat = Vec::with_capacity(n + 1);
        grads.push(seed.psi.iter().map(|&x| q(-x)).collect());
        grads.extend(linalg::identity(n));
        let mut gram = seed.finite.gram();
        let longest =
            grads.iter().map(|g| crate::rational::dot(g, &linalg::mat_vec(&gram, g))).max().expect("nonempty");
        let f = q(2) / longest;
        for row in gram.iter_mut() {
            for x in row.iter_mut() {
                *x *= &f;
            }
        }
        let mut consts = vec![Q::zero(); n + 1];
        consts[0] = q(1);
        (grads, gram, consts)
    }

    pub fn cartan(&self) -> Vec<Vec<i64>> {
        let (grads, gram, _) = self.realization();
        cartan_of(&gram, &grads)
    }

    /// Canonical representative up to isomorphism of affine root systems.
    pub fn canonical(&self) -> AffineType {
        match (self.letter, self.rank, self.twist) {
            ('B', 2, 1) => AffineType { letter: 'C', rank: 2, twist: 1 },
            ('D', 3, 1) => AffineType { letter: 'A', rank: 3, twist: 1 },
            ('A', 3, 2) => AffineType { letter: 'D', rank: 3, twist: 2 },
            _ => *self,
        }
    }
}

/// Affine types with `nodes` simple roots, one per isomorphism class.
fn affine_candidates(nodes: usize) -> Vec<AffineType> {
    let n = nodes - 1;
    let mut c = Vec::new();
    for t in finite_candidates(n) {
        c.push(AffineType { letter: t.letter, rank: n, twist: 1 });
    }
    c.push(AffineType { letter: 'A', rank: 2 * n, twist: 2 });
    if n >= 3 {
        c.push(AffineType { letter: 'A', rank: 2 * n - 1, twist: 2 });
    }
    if n >= 2 {
        c.push(AffineType { letter: 'D', rank: n + 1, twist: 2 });
    }
    if n == 4 {
        c.push(AffineType { letter: 'E', rank: 6, twist: 2 });
    }
    if n == 2 {
        c.push(AffineType { letter: 'D', rank: 4, twist: 3 });
    }
    c
}

/// Identifies an affine component; returns the type and, for each node of
/// the standard realization (α₀ first), the matching input node.
pub fn identify_affine(cartan: &[Vec<i64>], nodes: &[usize]) -> Option<(AffineType, Vec<usize>)> {
    if nodes.len() < 2 {
        return None;
    }
    for t in affine_candidates(nodes.len()) {
        if let Some(p) = match_cartan(&t.cartan(), cartan, nodes) {
            return Some((t, p));
        }
    }
    None
}

/// Parses `A2`, `A1~1`, `A2^(2)` or `A2^2`.
pub fn parse_type(s: &str) -> Result<(char, usize, Option<usize>)> {
    let bad = || Error::Parse(format!("not a Dynkin type: {s:?}"));
    let s = s.trim();
    let mut chars = s.chars();
    let letter = chars.next().ok_or_else(bad)?.to_ascii_uppercase();
    let rest: &str = chars.as_str();
    let (rank, twist) = if let Some((r, t)) = rest.split_once('~') {
        (r, Some(t))
    } else if let Some((r, t)) = rest.split_once('^') {
        (r, Some(t.trim_start_matches('(').trim_end_matches(')')))
    } else {
        (rest, None)
    };
    let rank: usize = rank.parse().map_err(|_| bad())?;
    let twist = match twist {
        Some(t) => Some(t.parse().map_err(|_| bad())?),
        None => None,
    };
    Ok((letter, rank, twist))
}

/// True if the matrix has a negative entry off the diagonal only where the
/// transposed entry is also negative (a generalized Cartan matrix shape).
pub fn is_generalized_cartan(c: &[Vec<i64>]) -> bool {
    let n = c.len();
    (0..n).all(|i| {
        c[i][i] == 2
            && (0..n).all(|j| i == j || (c[i][j] <= 0 && (c[i][j] == 0) == (c[j][i] == 0) && c[i][j] != i64::MIN))
    })
}

/// Whether `v` (integer coefficients) is a root of `t`, up to sign.
pub fn is_root(t: &FiniteType, v: &[i64]) -> bool {
    let pos = t.positive_roots();
    let neg: Vec<i64> = v.iter().map(|x| -x).collect();
    pos.iter().any(|r| r.as_slice() == v || *r == neg)
}
