//! Metric vector spaces, affine functionals and lattices.
//!
//! Coordinates: vectors of `𝔞̄` (gradients, lattice elements, coroots) are
//! written in a fixed basis with Gram matrix `G`. Points of `𝔞` use the dual
//! coordinates, so that a functional `c + g` evaluates as `c + g·x` and a
//! vector `v` translates a point by `G v`.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, AbelianGroup, QMat};
use crate::rational::{self, common_denominator, dot, qz, serde_q, Q, Z};
use crate::{check_dim, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSpace {
    #[serde(with = "serde_q::mat")]
    pub gram: QMat,
    #[serde(with = "serde_q::vec")]
    pub factor_scales: Vec<Q>,
}

impl MetricSpace {
    pub fn new(gram: QMat, factor_scales: Vec<Q>) -> Result<Self> {
        let n = gram.len();
        for row in &gram {
            check_dim(n, row.len())?;
        }
        for i in 0..n {
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidMetric("gram matrix is not symmetric".into()));
                }
            }
        }
        for k in 1..=n {
            let minor: QMat = gram[..k].iter().map(|r| r[..k].to_vec()).collect();
            if !linalg::det(&minor).is_positive() {
                return Err(Error::InvalidMetric("gram matrix is not positive definite".into()));
            }
        }
        if factor_scales.iter().any(|s| !s.is_positive()) {
            return Err(Error::InvalidMetric("factor scales must be positive".into()));
        }
        Ok(MetricSpace { gram, factor_scales })
    }

    /// Euclidean space with the identity Gram matrix.
    pub fn euclidean(n: usize) -> Self {
        MetricSpace { gram: linalg::identity(n), factor_scales: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    /// Gram-matrix times a vector: the point displacement of a vector.
    pub fn lower(&self, v: &[Q]) -> Vec<Q> {
        linalg::mat_vec(&self.gram, v)
    }

    pub fn pair(&self, a: &[Q], b: &[Q]) -> Q {
        dot(a, &self.lower(b))
    }

    pub fn norm2(&self, a: &[Q]) -> Q {
        self.pair(a, a)
    }

    /// Direct sum of metric spaces.
    pub fn direct_sum(parts: &[MetricSpace]) -> MetricSpace {
        let n: usize = parts.iter().map(|p| p.dim()).sum();
        let mut gram = vec![vec![Q::zero(); n]; n];
        let mut off = 0;
        let mut scales = Vec::new();
        for p in parts {
            for i in 0..p.dim() {
                for j in 0..p.dim() {
                    gram[off + i][off + j] = p.gram[i][j].clone();
                }
            }
            off += p.dim();
            scales.extend(p.factor_scales.iter().cloned());
        }
        MetricSpace { gram, factor_scales: scales }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RationalVector {
    #[serde(with = "serde_q::vec")]
    pub coords: Vec<Q>,
}

impl RationalVector {
    pub fn new(coords: Vec<Q>) -> Self {
        RationalVector { coords }
    }

    pub fn zero(n: usize) -> Self {
        RationalVector { coords: vec![Q::zero(); n] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        rational::is_zero_vec(&self.coords)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AffinePoint {
    #[serde(with = "serde_q::vec")]
    pub coords: Vec<Q>,
}

impl AffinePoint {
    pub fn new(coords: Vec<Q>) -> Self {
        AffinePoint { coords }
    }

    pub fn origin(n: usize) -> Self {
        AffinePoint { coords: vec![Q::zero(); n] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Translate by the vector `v`.
    pub fn translate(&self, space: &MetricSpace, v: &[Q]) -> AffinePoint {
        AffinePoint::new(rational::add_vec(&self.coords, &space.lower(v)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineFunctional {
    pub gradient: RationalVector,
    #[serde(with = "serde_q")]
    pub constant: Q,
}

impl std::fmt::Display for AffineFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} + {}·x", rational::fmt_q(&self.constant), rational::fmt_vec(self.grad()))
    }
}

impl AffineFunctional {
    pub fn new(gradient: Vec<Q>, constant: Q) -> Self {
        AffineFunctional { gradient: RationalVector::new(gradient), constant }
    }

    pub fn dim(&self) -> usize {
        self.gradient.dim()
    }

    pub fn grad(&self) -> &[Q] {
        &self.gradient.coords
    }

    pub fn evaluate(&self, x: &AffinePoint) -> Result<Q> {
        check_dim(self.dim(), x.dim())?;
        Ok(&self.constant + dot(self.grad(), &x.coords))
    }

    /// Evaluation without the dimension check, for internal hot loops.
    pub(crate) fn eval(&self, x: &[Q]) -> Q {
        &self.constant + dot(self.grad(), x)
    }

    pub fn coroot(&self, space: &MetricSpace) -> Result<RationalVector> {
        check_dim(space.dim(), self.dim())?;
        if self.gradient.is_zero() {
            return Err(Error::ZeroGradient);
        }
        let n2 = space.norm2(self.grad());
        let f = Q::from_integer(Z::from(2)) / n2;
        Ok(RationalVector::new(rational::scale_vec(&f, self.grad())))
    }

    pub fn reflect_point(&self, space: &MetricSpace, x: &AffinePoint) -> Result<AffinePoint> {
        let cr = self.coroot(space)?;
        let v = self.evaluate(x)?;
        let shift = space.lower(&cr.coords);
        Ok(AffinePoint::new(rational::sub_vec(&x.coords, &rational::scale_vec(&v, &shift))))
    }

    pub fn reflect_functional(&self, space: &MetricSpace, g: &AffineFunctional) -> Result<AffineFunctional> {
        let cr = self.coroot(space)?;
        check_dim(self.dim(), g.dim())?;
        let k = space.pair(g.grad(), &cr.coords);
        Ok(self.reflect_with_pairing(g, &k))
    }

    /// `g - k·self`.
    pub(crate) fn reflect_with_pairing(&self, g: &AffineFunctional, k: &Q) -> AffineFunctional {
        AffineFunctional::new(
            rational::sub_vec(g.grad(), &rational::scale_vec(k, self.grad())),
            &g.constant - k * &self.constant,
        )
    }

    pub fn neg(&self) -> AffineFunctional {
        AffineFunctional::new(rational::neg_vec(self.grad()), -self.constant.clone())
    }

    pub fn scale(&self, c: &Q) -> AffineFunctional {
        AffineFunctional::new(rational::scale_vec(c, self.grad()), c * &self.constant)
    }

    pub fn is_constant(&self) -> bool {
        self.gradient.is_zero()
    }
}

/// Evaluate without checking, exposed for sibling modules.
pub fn eval(f: &AffineFunctional, x: &[Q]) -> Q {
    f.eval(x)
}

/// A discrete subgroup of `𝔞̄`, stored by its canonical Hermite basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    pub dim: usize,
    #[serde(with = "serde_q::mat")]
    pub generators: QMat,
}

impl Lattice {
    /// Lattice spanned by arbitrary rational generators (dependent allowed).
    pub fn new(dim: usize, gens: &[Vec<Q>]) -> Result<Self> {
        for g in gens {
            check_dim(dim, g.len())?;
        }
        let d = common_denominator(gens.iter().flatten());
        let ints: Vec<Vec<Z>> = gens.iter().map(|g| g.iter().map(|x| (x * qz(&d)).to_integer()).collect()).collect();
        let h = linalg::hnf_rows(&ints);
        let generators = h.iter().map(|r| r.iter().map(|x| Q::new(x.clone(), d.clone())).collect()).collect();
        Ok(Lattice { dim, generators })
    }

    pub fn zero(dim: usize) -> Self {
        Lattice { dim, generators: Vec::new() }
    }

    pub fn standard(dim: usize) -> Self {
        Lattice { dim, generators: linalg::identity(dim) }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim
    }

    /// Integer coordinates of `v` in the basis, if `v` is a member.
    pub fn coordinates(&self, v: &[Q]) -> Option<Vec<Z>> {
        let c = linalg::coords_in(&self.generators, v)?;
        if c.iter().all(|x| x.is_integer()) {
            Some(c.iter().map(|x| x.to_integer()).collect())
        } else {
            None
        }
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        v.len() == self.dim && self.coordinates(v).is_some()
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.generators.iter().all(|g| self.contains(g))
    }

    pub fn sum(&self, other: &Lattice) -> Result<Lattice> {
        let mut g = self.generators.clone();
        g.extend(other.generators.iter().cloned());
        Lattice::new(self.dim, &g)
    }

    pub fn scaled(&self, c: &Q) -> Lattice {
        let g: QMat = self.generators.iter().map(|r| rational::scale_vec(c, r)).collect();
        Lattice::new(self.dim, &g).expect("dimensions preserved")
    }

    /// `{χ : ⟨L, χ⟩ ⊆ ℤ}`; requires a full-rank lattice.
    pub fn dual(&self, space: &MetricSpace) -> Result<Lattice> {
        check_dim(space.dim(), self.dim)?;
        if !self.is_full_rank() {
            return Err(Error::NotFullRank(format!("rank {} in dimension {}", self.rank(), self.dim)));
        }
        let bg = linalg::mat_mul(&self.generators, &space.gram);
        let inv = linalg::inverse(&bg).expect("full-rank lattice times gram is invertible");
        Lattice::new(self.dim, &linalg::transpose(&inv))
    }

    /// Rational span (row-reduced basis).
    pub fn span(&self) -> QMat {
        linalg::rref(&self.generators).0
    }
}

/// Invariant factors of `A/B`; fails unless `B ⊆ A`.
pub fn lattice_quotient(a: &Lattice, b: &Lattice) -> Result<AbelianGroup> {
    check_dim(a.dim, b.dim)?;
    if !a.contains_lattice(b) {
        return Err(Error::NotContained("second lattice is not a sublattice".into()));
    }
    let coeffs: Vec<Vec<Z>> = b.generators.iter().map(|g| a.coordinates(g).expect("checked membership")).collect();
    let ident: Vec<Vec<Z>> =
        (0..a.rank()).map(|i| (0..a.rank()).map(|j| if i == j { Z::one() } else { Z::zero() }).collect()).collect();
    linalg::quotient_group(&ident, &coeffs)
}

/// Invariant factors of `A / (B + V)` for a rational subspace `V` spanned by
/// the rows of `subspace`, computed after projecting along `V`.
pub fn lattice_quotient_mod(a: &Lattice, b: &Lattice, subspace: &[Vec<Q>]) -> Result<AbelianGroup> {
    check_dim(a.dim, b.dim)?;
    let n = a.dim;
    // rows of `proj` annihilate V, and their common kernel is exactly V
    let proj: QMat = if subspace.is_empty() { linalg::identity(n) } else { linalg::nullspace(subspace, n) };
    let image = |l: &Lattice| -> Result<Lattice> {
        let g: QMat = l.generators.iter().map(|v| linalg::mat_vec(&proj, v)).collect();
        Lattice::new(proj.len(), &g)
    };
    lattice_quotient(&image(a)?, &image(b)?)
}
