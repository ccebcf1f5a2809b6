//! Integral affine root systems: construction from Dynkin data or from
//! simple roots, labels, alcoves, root enumeration in a box, folding into
//! the alcove, stabilizer subsystems and torus fixed-point groups.

use std::collections::{BTreeSet, HashSet, VecDeque};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dynkin::{self, AffineType, FiniteType};
use crate::euclid::{AffineFunctional, AffinePoint, Lattice, MetricSpace, RationalVector};
use crate::linalg::{self, AbelianGroup, QMat};
use crate::lp;
use crate::rational::{self, dot, q, qz, serde_q, Q, Z};
use crate::{check_dim, Error, Result};

/// One factor of a system to be built: `twist = 0` is a finite (linear)
/// system, `twist = r ≥ 1` the affine type `X_N^(r)`, letter `T` a torus.
/// `cycle = m > 1` applies the substitution `(m^*α)(a) = α(ma)/m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeSpec {
    #[serde(rename = "type")]
    pub letter: char,
    pub rank: usize,
    #[serde(default = "one_usize")]
    pub twist: usize,
    #[serde(default = "one_q", with = "serde_q")]
    pub scale: Q,
    #[serde(default = "one_usize")]
    pub cycle: usize,
}

fn one_usize() -> usize {
    1
}

fn one_q() -> Q {
    Q::one()
}

impl TypeSpec {
    pub fn new(letter: char, rank: usize, twist: usize) -> Self {
        TypeSpec { letter, rank, twist, scale: Q::one(), cycle: 1 }
    }

    pub fn scaled(mut self, scale: Q) -> Self {
        self.scale = scale;
        self
    }

    pub fn cycled(mut self, m: usize) -> Self {
        self.cycle = m;
        self
    }

    /// Parses `A2`, `A1~1`, `A2^(2)`, `T3`.
    pub fn parse(s: &str) -> Result<Self> {
        let (letter, rank, twist) = dynkin::parse_type(s)?;
        Ok(TypeSpec::new(letter, rank, twist.unwrap_or(0)))
    }
}

/// An irreducible component of an affine root system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub name: String,
    pub affine: bool,
    /// Indices into `simple_roots`.
    pub roots: Vec<usize>,
    /// Primitive positive relation `Σ a_i ᾱ_i = 0` (affine components only).
    pub labels: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub affine_type: Option<AffineType>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub finite_type: Option<FiniteType>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineRootSystem {
    pub space: MetricSpace,
    pub simple_roots: Vec<AffineFunctional>,
    pub components: Vec<Component>,
    pub lattice: Lattice,
}

/// A bounded box `lo ≤ x ≤ hi` in point coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub lo: Vec<Q>,
    pub hi: Vec<Q>,
}

impl Region {
    pub fn new(lo: Vec<Q>, hi: Vec<Q>) -> Self {
        Region { lo, hi }
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        x.iter().zip(&self.lo).zip(&self.hi).all(|((v, l), h)| l <= v && v <= h)
    }

    /// Range of an affine functional over the box.
    fn range(&self, f: &AffineFunctional) -> (Q, Q) {
        let mut lo = f.constant.clone();
        let mut hi = f.constant.clone();
        for ((g, l), h) in f.grad().iter().zip(&self.lo).zip(&self.hi) {
            let a = g * l;
            let b = g * h;
            if a < b {
                lo += a;
                hi += b;
            } else {
                lo += b;
                hi += a;
            }
        }
        (lo, hi)
    }

    pub fn meets_wall(&self, f: &AffineFunctional) -> bool {
        let (lo, hi) = self.range(f);
        !lo.is_positive() && !hi.is_negative()
    }
}

/// A finite subsystem `Φ_x` presented by its simple roots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteSubsystem {
    /// Indices of the simple roots of the ambient system vanishing at `x`.
    pub indices: Vec<usize>,
    pub roots: Vec<AffineFunctional>,
    /// Components with their Bourbaki node order (positions in `roots`).
    pub types: Vec<(FiniteType, Vec<usize>)>,
}

impl FiniteSubsystem {
    pub fn rank(&self) -> usize {
        self.roots.len()
    }

    pub fn type_name(&self) -> String {
        let t: Vec<FiniteType> = self.types.iter().map(|(t, _)| *t).collect();
        dynkin::product_name(&t)
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// The alcove `{x : α_i(x) ≥ 0}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alcove {
    pub walls: Vec<AffineFunctional>,
    /// Vertices when the alcove is a product of simplices.
    pub vertices: Option<Vec<AffinePoint>>,
    /// Dimension of the unbounded directions (finite and torus parts).
    pub recession_dim: usize,
}

impl Alcove {
    pub fn contains(&self, x: &AffinePoint) -> Result<bool> {
        for w in &self.walls {
            if w.evaluate(x)?.is_negative() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// An element of `A = 𝔞̄/Λ^∨`, stored by a representative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusElement {
    pub coords: RationalVector,
}

impl TorusElement {
    /// The phase `⟨χ, a⟩ mod 1` of the character `χ̃` at this element.
    pub fn phase(&self, space: &MetricSpace, chi: &[Q]) -> Q {
        rational::frac_q(&space.pair(chi, &self.coords.coords))
    }

    /// Equality in `A`: the difference lies in `Λ^∨`.
    pub fn same_class(&self, other: &TorusElement, coweights: &Lattice) -> bool {
        coweights.contains(&rational::sub_vec(&self.coords.coords, &other.coords.coords))
    }
}

fn block_place(gram: &mut QMat, off: usize, block: &QMat) {
    for (i, row) in block.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            gram[off + i][off + j] = x.clone();
        }
    }
}

fn component_name(spec: &TypeSpec) -> String {
    let base = match (spec.letter, spec.twist) {
        ('T', _) => format!("T{}", spec.rank),
        (l, 0) => format!("{l}{}", spec.rank),
        (l, r) => format!("{l}{}^({r})", spec.rank),
    };
    if spec.cycle > 1 {
        format!("{}^*{base}", spec.cycle)
    } else {
        base
    }
}

/// Primitive positive integer vector spanning a one-dimensional kernel.
fn relation_labels(grads: &[Vec<Q>]) -> Option<Vec<u64>> {
    let k = linalg::nullspace(&linalg::transpose(grads), grads.len());
    if k.len() != 1 {
        return None;
    }
    let mut v = rational::primitive_integer(&k[0]);
    if v.iter().any(|x| x.is_negative()) {
        v = v.into_iter().map(|x| -x).collect();
    }
    if v.iter().any(|x| !x.is_positive()) {
        return None;
    }
    v.iter().map(|x| u64::try_from(x).ok()).collect()
}

impl AffineRootSystem {
    /// Builds the product of the given factors in block coordinates. The
    /// lattice is the weight lattice on root-carrying blocks and the
    /// standard lattice on torus blocks.
    pub fn build_from_type(specs: &[TypeSpec]) -> Result<Self> {
        struct Block {
            grads: QMat,
            consts: Vec<Q>,
            gram: QMat,
            comp: Option<Component>,
        }
        let mut blocks = Vec::new();
        for spec in specs {
            if !spec.scale.is_positive() {
                return Err(Error::InvalidMetric("factor scale must be positive".into()));
            }
            if spec.cycle == 0 {
                return Err(Error::InvalidType("cycle length must be positive".into()));
            }
            let m = q(spec.cycle as i64);
            let name = component_name(spec);
            let (grads, mut gram, mut consts, comp) = if spec.letter == 'T' {
                if spec.rank == 0 {
                    return Err(Error::InvalidType("T0".into()));
                }
                (Vec::new(), linalg::identity(spec.rank), Vec::new(), None)
            } else if spec.twist == 0 {
                let t = FiniteType::new(spec.letter, spec.rank)?;
                let comp = Component {
                    name,
                    affine: false,
                    roots: Vec::new(),
                    labels: Vec::new(),
                    affine_type: None,
                    finite_type: Some(t.canonical()),
                };
                (linalg::identity(t.rank), t.gram(), vec![Q::zero(); t.rank], Some(comp))
            } else {
                let t = AffineType::new(spec.letter, spec.rank, spec.twist)?;
                let (grads, gram, consts) = t.realization();
                let labels =
                    relation_labels(&grads).ok_or_else(|| Error::InvalidType(format!("{t}: degenerate relation")))?;
                let comp = Component {
                    name,
                    affine: true,
                    roots: Vec::new(),
                    labels,
                    affine_type: Some(t.canonical()),
                    finite_type: None,
                };
                (grads, gram, consts, Some(comp))
            };
            let f = &spec.scale / &m;
            for row in gram.iter_mut() {
                for x in row.iter_mut() {
                    *x *= &f;
                }
            }
            for c in consts.iter_mut() {
                *c /= &m;
            }
            blocks.push(Block { grads, consts, gram, comp });
        }
        let dim: usize = blocks.iter().map(|b| b.gram.len()).sum();
        let mut gram = vec![vec![Q::zero(); dim]; dim];
        let mut simple_roots = Vec::new();
        let mut components = Vec::new();
        let mut torus_dims = Vec::new();
        let mut off = 0;
        for b in blocks {
            let k = b.gram.len();
            block_place(&mut gram, off, &b.gram);
            let start = simple_roots.len();
            for (g, c) in b.grads.iter().zip(&b.consts) {
                let mut full = vec![Q::zero(); dim];
                full[off..off + k].clone_from_slice(g);
                simple_roots.push(AffineFunctional::new(full, c.clone()));
            }
            match b.comp {
                Some(mut comp) => {
                    comp.roots = (start..simple_roots.len()).collect();
                    components.push(comp);
                }
                None => torus_dims.extend(off..off + k),
            }
            off += k;
        }
        let space = MetricSpace::new(gram, specs.iter().map(|s| s.scale.clone()).collect())?;
        let mut rs = AffineRootSystem { lattice: Lattice::zero(dim), space, simple_roots, components };
        let mut gens = rs.weight_lattice_on_span()?.generators;
        for &d in &torus_dims {
            let mut e = vec![Q::zero(); dim];
            e[d] = Q::one();
            gens.push(e);
        }
        rs.lattice = Lattice::new(dim, &gens)?;
        Ok(rs)
    }

    /// Assembles a system from explicit simple roots, discovering the
    /// irreducible components and their labels. Validates the Cartan
    /// integers and integrality against `lattice`.
    pub fn from_simple_roots(
        space: MetricSpace,
        simple_roots: Vec<AffineFunctional>,
        lattice: Lattice,
    ) -> Result<Self> {
        for r in &simple_roots {
            check_dim(space.dim(), r.dim())?;
            if r.is_constant() {
                return Err(Error::ZeroGradient);
            }
        }
        let grads: QMat = simple_roots.iter().map(|r| r.grad().to_vec()).collect();
        let cartan = dynkin::cartan_of(&space.gram, &grads);
        if !dynkin::is_generalized_cartan(&cartan) {
            return Err(Error::Inconsistent("simple roots have non-integral or positive Cartan pairings".into()));
        }
        let mut components = Vec::new();
        for nodes in dynkin::components(&cartan) {
            let cg: QMat = nodes.iter().map(|&i| grads[i].clone()).collect();
            if linalg::rank(&cg) == nodes.len() {
                let (t, _) = dynkin::identify_finite(&cartan, &nodes)
                    .ok_or_else(|| Error::Inconsistent("independent simple roots of non-finite type".into()))?;
                components.push(Component {
                    name: t.canonical().to_string(),
                    affine: false,
                    roots: nodes,
                    labels: Vec::new(),
                    affine_type: None,
                    finite_type: Some(t.canonical()),
                });
            } else {
                let labels = relation_labels(&cg)
                    .ok_or_else(|| Error::Inconsistent("dependent simple roots without a positive relation".into()))?;
                let at = dynkin::identify_affine(&cartan, &nodes).map(|(t, _)| t.canonical());
                components.push(Component {
                    name: at.map_or_else(|| "affine".to_string(), |t| t.to_string()),
                    affine: true,
                    roots: nodes,
                    labels,
                    affine_type: at,
                    finite_type: None,
                });
            }
        }
        let rs = AffineRootSystem { space, simple_roots, components, lattice };
        rs.check_integral()?;
        Ok(rs)
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn with_lattice(mut self, lattice: Lattice) -> Result<Self> {
        self.lattice = lattice;
        self.check_integral()?;
        Ok(self)
    }

    pub fn gradients(&self) -> QMat {
        self.simple_roots.iter().map(|r| r.grad().to_vec()).collect()
    }

    /// All gradients `Φ̄` (with both signs, as a set; proportional
    /// gradients such as `β` and `2β` are both kept).
    pub fn gradient_roots(&self) -> Vec<Vec<Q>> {
        let grads = self.gradients();
        let coroots: Vec<Vec<Q>> =
            self.simple_roots.iter().map(|r| r.coroot(&self.space).expect("nonzero").coords).collect();
        let lowered: QMat = coroots.iter().map(|c| self.space.lower(c)).collect();
        let mut seen: BTreeSet<Vec<Q>> = BTreeSet::new();
        let mut queue: VecDeque<Vec<Q>> = VecDeque::new();
        for g in &grads {
            for v in [g.clone(), rational::neg_vec(g)] {
                if seen.insert(v.clone()) {
                    queue.push_back(v);
                }
            }
        }
        while let Some(b) = queue.pop_front() {
            for (g, lc) in grads.iter().zip(&lowered) {
                let k = dot(&b, lc);
                if k.is_zero() {
                    continue;
                }
                let r = rational::sub_vec(&b, &rational::scale_vec(&k, g));
                if seen.insert(r.clone()) {
                    queue.push_back(r);
                }
            }
        }
        seen.into_iter().collect()
    }

    pub fn coroot_lattice(&self) -> Result<Lattice> {
        let cor: QMat = self
            .gradient_roots()
            .iter()
            .map(|g| {
                let n2 = self.space.norm2(g);
                rational::scale_vec(&(q(2) / n2), g)
            })
            .collect();
        Lattice::new(self.dim(), &cor)
    }

    pub fn root_lattice(&self) -> Result<Lattice> {
        Lattice::new(self.dim(), &self.gradient_roots())
    }

    /// `⟨Φ̄^∨⟩^∨`; errors if `Φ̄` does not span.
    pub fn weight_lattice(&self) -> Result<Lattice> {
        let cl = self.coroot_lattice()?;
        if !cl.is_full_rank() {
            return Err(Error::NonSpanning(format!("gradients span {} of {} dimensions", cl.rank(), self.dim())));
        }
        cl.dual(&self.space)
    }

    /// Weight lattice of the root-carrying span: vectors in `ℝΦ̄` pairing
    /// integrally with all coroots.
    fn weight_lattice_on_span(&self) -> Result<Lattice> {
        let n = self.dim();
        let cl = self.coroot_lattice()?;
        if cl.rank() == 0 {
            return Ok(Lattice::zero(n));
        }
        // basis b_j of ℝΦ̄ = span of coroots; find v = Σ y_j b_j with
        // ⟨v, c_i⟩ = δ_ij for the coroot basis c_i.
        let basis = &cl.generators;
        let m: QMat = basis.iter().map(|c| basis.iter().map(|b| self.space.pair(b, c)).collect()).collect();
        let inv = linalg::inverse(&m).expect("gram on span is invertible");
        let gens: QMat = (0..basis.len())
            .map(|j| {
                let y: Vec<Q> = inv.iter().map(|row| row[j].clone()).collect();
                linalg::vec_mat(&y, basis, n)
            })
            .collect();
        Lattice::new(n, &gens)
    }

    /// Checks `Φ̄ ⊂ Λ` and `⟨Λ, Φ̄^∨⟩ ⊆ ℤ`.
    pub fn check_integral(&self) -> Result<()> {
        for g in self.gradient_roots() {
            if !self.lattice.contains(&g) {
                return Err(Error::Integrality(format!("gradient {} not in the lattice", rational::fmt_vec(&g))));
            }
            let c = rational::scale_vec(&(q(2) / self.space.norm2(&g)), &g);
            for l in &self.lattice.generators {
                if !self.space.pair(l, &c).is_integer() {
                    return Err(Error::Integrality(format!(
                        "coroot of {} not integral on the lattice",
                        rational::fmt_vec(&g)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn evaluate_all(&self, x: &AffinePoint) -> Result<Vec<Q>> {
        self.simple_roots.iter().map(|r| r.evaluate(x)).collect()
    }

    pub fn in_alcove(&self, x: &AffinePoint) -> Result<bool> {
        Ok(self.evaluate_all(x)?.iter().all(|v| !v.is_negative()))
    }

    /// Indices of simple roots vanishing at `x`.
    pub fn walls_through(&self, x: &AffinePoint) -> Result<Vec<usize>> {
        Ok(self.evaluate_all(x)?.iter().enumerate().filter(|(_, v)| v.is_zero()).map(|(i, _)| i).collect())
    }

    pub fn reflect(&self, i: usize, x: &AffinePoint) -> AffinePoint {
        self.simple_roots[i].reflect_point(&self.space, x).expect("nonzero gradient")
    }

    /// A point in the interior of the alcove: every simple root of an
    /// affine component takes the same value there, finite ones take 1.
    pub fn reference_point(&self) -> AffinePoint {
        let n = self.dim();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for c in &self.components {
            let t = if c.affine {
                let total: u64 = c.labels.iter().sum();
                let s: Q =
                    c.roots.iter().zip(&c.labels).map(|(&i, &a)| q(a as i64) * &self.simple_roots[i].constant).sum();
                s / q(total as i64)
            } else {
                Q::one()
            };
            for &i in &c.roots {
                let r = &self.simple_roots[i];
                rows.push(r.grad().to_vec());
                rhs.push(&t - &r.constant);
            }
        }
        let x = linalg::solve(&rows, &rhs, n).expect("consistent alcove equations");
        AffinePoint::new(x)
    }

    pub fn alcove(&self) -> Alcove {
        let affine_rank: usize = self.affine_components().map(|c| c.roots.len() - 1).sum();
        Alcove { walls: self.simple_roots.clone(), vertices: self.vertices(), recession_dim: self.dim() - affine_rank }
    }

    /// Vertices of the alcove when every component is affine and there is
    /// no torus part; `None` otherwise.
    pub fn vertices(&self) -> Option<Vec<AffinePoint>> {
        let n = self.dim();
        if self.components.iter().any(|c| !c.affine) {
            return None;
        }
        let rk: usize = self.components.iter().map(|c| c.roots.len() - 1).sum();
        if rk != n {
            return None;
        }
        let mut choices: Vec<Vec<usize>> = vec![Vec::new()];
        for c in &self.components {
            let mut next = Vec::new();
            for ch in &choices {
                for &j in &c.roots {
                    let mut v = ch.clone();
                    v.push(j);
                    next.push(v);
                }
            }
            choices = next;
        }
        let mut out = Vec::new();
        for ch in choices {
            let mut rows = Vec::new();
            let mut rhs = Vec::new();
            for (i, r) in self.simple_roots.iter().enumerate() {
                if !ch.contains(&i) {
                    rows.push(r.grad().to_vec());
                    rhs.push(-r.constant.clone());
                }
            }
            out.push(AffinePoint::new(linalg::solve(&rows, &rhs, n)?));
        }
        Some(out)
    }

    /// All roots whose wall meets the region, one per pair `±α`, signed to
    /// be positive on the alcove interior; sorted.
    pub fn enumerate_roots(&self, region: &Region) -> Result<Vec<AffineFunctional>> {
        let n = self.dim();
        check_dim(n, region.lo.len())?;
        check_dim(n, region.hi.len())?;
        if self.simple_roots.is_empty() || region.lo.iter().zip(&region.hi).any(|(l, h)| l > h) {
            return Ok(Vec::new());
        }
        let xref = self.reference_point();
        let mut box_rows: QMat = Vec::new();
        let mut box_rhs: Vec<Q> = Vec::new();
        for j in 0..n {
            let mut e = vec![Q::zero(); n];
            e[j] = Q::one();
            box_rows.push(e.clone());
            box_rhs.push(region.hi[j].clone());
            box_rows.push(rational::neg_vec(&e));
            box_rhs.push(-region.lo[j].clone());
        }
        // An alcove meeting the box has its reference point within the
        // alcove radius R of the box, and |Δx_j|² ≤ G_jj R² coordinatewise.
        let radius2: Option<Q> = self.vertices().map(|vs| {
            let ginv = linalg::inverse(&self.space.gram).expect("positive definite");
            vs.iter()
                .map(|v| {
                    let d = rational::sub_vec(&v.coords, &xref.coords);
                    dot(&d, &linalg::mat_vec(&ginv, &d))
                })
                .max()
                .unwrap_or_else(Q::zero)
        });
        let near_box = |p: &AffinePoint, r2: &Q| -> bool {
            (0..n).all(|j| {
                let x = &p.coords[j];
                let gap = if x < &region.lo[j] {
                    &region.lo[j] - x
                } else if x > &region.hi[j] {
                    x - &region.hi[j]
                } else {
                    return true;
                };
                &gap * &gap <= &self.space.gram[j][j] * r2
            })
        };
        let meets = |walls: &[AffineFunctional], p: &AffinePoint| -> bool {
            if region.contains(&p.coords) {
                return true;
            }
            if let Some(r2) = &radius2 {
                return near_box(p, r2);
            }
            let mut rows = box_rows.clone();
            let mut rhs = box_rhs.clone();
            for w in walls {
                rows.push(rational::neg_vec(w.grad()));
                rhs.push(w.constant.clone());
            }
            lp::feasible_point(&rows, &rhs, n).is_some()
        };
        let key = |walls: &[AffineFunctional]| -> Vec<AffineFunctional> {
            let mut k = walls.to_vec();
            k.sort();
            k
        };
        let mut seen: HashSet<Vec<AffineFunctional>> = HashSet::new();
        let mut roots: BTreeSet<AffineFunctional> = BTreeSet::new();
        let mut queue: VecDeque<(Vec<AffineFunctional>, AffinePoint)> = VecDeque::new();
        let start = self.simple_roots.clone();
        if !meets(&start, &xref) {
            // the box may miss the fundamental alcove; seed from a folded
            // point of the box instead
            let centre: Vec<Q> = region.lo.iter().zip(&region.hi).map(|(l, h)| (l + h) / q(2)).collect();
            let (_, word) = self.fold_to_alcove(&AffinePoint::new(centre));
            // the alcove containing the centre is w·A with
            // w = s_{i1} ⋯ s_{ik}; its walls are α_j ∘ w⁻¹
            let mut walls = start;
            let mut p = xref.clone();
            for &i in word.iter().rev() {
                let a = &self.simple_roots[i];
                walls = walls.iter().map(|b| a.reflect_functional(&self.space, b).expect("nonzero")).collect();
                p = a.reflect_point(&self.space, &p).expect("nonzero");
            }
            seen.insert(key(&walls));
            queue.push_back((walls, p));
        } else {
            seen.insert(key(&start));
            queue.push_back((start, xref.clone()));
        }
        while let Some((walls, p)) = queue.pop_front() {
            for j in 0..walls.len() {
                let w = &walls[j];
                if !region.meets_wall(w) {
                    continue;
                }
                let canon = if w.eval(&xref.coords).is_negative() { w.neg() } else { w.clone() };
                roots.insert(canon);
                let next: Vec<AffineFunctional> =
                    walls.iter().map(|b| w.reflect_functional(&self.space, b).expect("nonzero")).collect();
                let k = key(&next);
                if seen.contains(&k) {
                    continue;
                }
                let np = w.reflect_point(&self.space, &p).expect("nonzero");
                if meets(&next, &np) {
                    seen.insert(k);
                    queue.push_back((next, np));
                }
            }
        }
        Ok(roots.into_iter().collect())
    }

    /// Folds `x` into the alcove. Returns `(y, [i1, …, ik])` with
    /// `x = s_{i1} s_{i2} ⋯ s_{ik}(y)`.
    pub fn fold_to_alcove(&self, x: &AffinePoint) -> (AffinePoint, Vec<usize>) {
        let shifts = self.reflection_shifts();
        let m = self.simple_roots.len();
        // α_j(s_i y) = α_j(y) − α_i(y) ⟨ᾱ_j, α_i^∨⟩
        let cartan: Vec<Vec<Q>> =
            shifts.iter().map(|s| self.simple_roots.iter().map(|r| rational::dot(r.grad(), s)).collect()).collect();
        let mut values: Vec<Q> = self.simple_roots.iter().map(|r| r.eval(&x.coords)).collect();
        let mut moved = vec![Q::zero(); m];
        let mut word = Vec::new();
        while let Some(i) = values.iter().position(Q::is_negative) {
            let v = values[i].clone();
            for (j, c) in cartan[i].iter().enumerate() {
                if !c.is_zero() {
                    values[j] -= &v * c;
                }
            }
            moved[i] += &v;
            word.push(i);
        }
        let mut y = x.coords.clone();
        for (v, s) in moved.iter().zip(&shifts) {
            if !v.is_zero() {
                y = rational::sub_vec(&y, &rational::scale_vec(v, s));
            }
        }
        (AffinePoint::new(y), word)
    }

    /// `s_{i1}(s_{i2}(⋯ s_{ik}(y)))`.
    pub fn apply_word(&self, word: &[usize], y: &AffinePoint) -> AffinePoint {
        let shifts = self.reflection_shifts();
        let coords = word.iter().rev().fold(y.coords.clone(), |p, &i| {
            let v = self.simple_roots[i].eval(&p);
            rational::sub_vec(&p, &rational::scale_vec(&v, &shifts[i]))
        });
        AffinePoint::new(coords)
    }

    /// `G α_i^∨` per simple root, so that `s_i(x) = x − α_i(x) G α_i^∨`.
    fn reflection_shifts(&self) -> Vec<Vec<Q>> {
        self.simple_roots
            .iter()
            .map(|r| self.space.lower(&r.coroot(&self.space).expect("nonzero gradient").coords))
            .collect()
    }

    /// Roots vanishing at a point of the alcove, presented by the alcove
    /// walls through it.
    pub fn stabilizer_roots(&self, x: &AffinePoint) -> Result<FiniteSubsystem> {
        if !self.in_alcove(x)? {
            return Err(Error::OutsideAlcove(rational::fmt_vec(&x.coords)));
        }
        Ok(self.subsystem(&self.walls_through(x)?))
    }

    /// The finite subsystem generated by a proper subset of simple roots.
    pub fn subsystem(&self, indices: &[usize]) -> FiniteSubsystem {
        let roots: Vec<AffineFunctional> = indices.iter().map(|&i| self.simple_roots[i].clone()).collect();
        let grads: QMat = roots.iter().map(|r| r.grad().to_vec()).collect();
        let cartan = dynkin::cartan_of(&self.space.gram, &grads);
        let types = dynkin::classify_finite(&cartan).expect("proper subdiagrams of affine diagrams are of finite type");
        FiniteSubsystem { indices: indices.to_vec(), roots, types }
    }

    /// Affine components as `(labels, root indices)`.
    pub fn affine_components(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| c.affine)
    }
}

/// `π₀(A^{Φ_x}) = (ℤΦ̄_x)^∨ / (Λ^∨ + (ℝΦ̄_x)^∨)` and `dim A^{Φ_x}`.
///
/// With simple roots `ᾱ_i` of `Φ_x`, the map `v ↦ (⟨ᾱ_i, v⟩)_i` identifies
/// the quotient with `ℤ^k / ρ(Λ^∨)`.
pub fn torus_fixed_group(
    space: &MetricSpace,
    phi_x: &FiniteSubsystem,
    lattice: &Lattice,
) -> Result<(AbelianGroup, usize)> {
    let dual = lattice.dual(space)?;
    let k = phi_x.rank();
    let image = rho_image(space, phi_x, &dual)?;
    let ident: Vec<Vec<Z>> =
        (0..k).map(|i| (0..k).map(|j| if i == j { Z::one() } else { Z::zero() }).collect()).collect();
    let g = linalg::quotient_group(&ident, &image)?;
    Ok((g, space.dim() - k))
}

/// `ρ(v) = (⟨ᾱ_i, v⟩)_i` applied to the generators of `lattice`.
pub fn rho_image(space: &MetricSpace, phi_x: &FiniteSubsystem, lattice: &Lattice) -> Result<Vec<Vec<Z>>> {
    let mut out = Vec::new();
    for v in &lattice.generators {
        let mut row = Vec::new();
        for r in &phi_x.roots {
            let p = space.pair(r.grad(), v);
            if !p.is_integer() {
                return Err(Error::Integrality(format!(
                    "root {} pairs non-integrally with a coweight",
                    rational::fmt_vec(r.grad())
                )));
            }
            row.push(p.to_integer());
        }
        out.push(row);
    }
    Ok(out)
}

/// Serializable description of a system.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub components: Vec<TypeSpec>,
    #[serde(default)]
    pub lattice: LatticeSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(untagged)]
pub enum LatticeSpec {
    #[default]
    #[serde(skip)]
    Default,
    Named(String),
    Explicit(#[serde(with = "serde_q::mat")] QMat),
}

impl SystemSpec {
    pub fn build(&self) -> Result<AffineRootSystem> {
        let rs = AffineRootSystem::build_from_type(&self.components)?;
        let lattice = match &self.lattice {
            LatticeSpec::Default => return Ok(rs),
            LatticeSpec::Named(s) if s == "weight" => return Ok(rs),
            LatticeSpec::Named(s) if s == "root" => rs.root_lattice()?,
            LatticeSpec::Named(s) => return Err(Error::Parse(format!("unknown lattice name {s:?}"))),
            LatticeSpec::Explicit(g) => Lattice::new(rs.dim(), g)?,
        };
        rs.with_lattice(lattice)
    }
}

/// Integer labels of an affine component as big integers.
pub fn labels_z(c: &Component) -> Vec<Z> {
    c.labels.iter().map(|&a| Z::from(a)).collect()
}

/// `Σ a_i ᾱ_i` for a component (zero for a valid affine component).
pub fn label_relation(rs: &AffineRootSystem, c: &Component) -> Vec<Q> {
    let mut s = vec![Q::zero(); rs.dim()];
    for (&i, &a) in c.roots.iter().zip(&c.labels) {
        s = rational::add_vec(&s, &rational::scale_vec(&qz(&Z::from(a)), rs.simple_roots[i].grad()));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{qf, qvec};

    fn a1() -> AffineRootSystem {
        AffineRootSystem::build_from_type(&[TypeSpec::new('A', 1, 1)]).unwrap()
    }

    #[test]
    fn a1_affine_matches_examples() {
        let rs = a1();
        assert_eq!(rs.space.gram, vec![qvec(&[2])]);
        assert_eq!(rs.simple_roots[0], AffineFunctional::new(qvec(&[-1]), q(1)));
        assert_eq!(rs.simple_roots[1], AffineFunctional::new(qvec(&[1]), q(0)));
        assert_eq!(rs.components[0].labels, vec![1, 1]);
        let v = rs.vertices().unwrap();
        assert!(v.contains(&AffinePoint::new(qvec(&[0]))));
        assert!(v.contains(&AffinePoint::new(qvec(&[1]))));
        // weight lattice (1/2)Z
        assert_eq!(rs.lattice, Lattice::new(1, &[vec![qf(1, 2)]]).unwrap());
    }

    #[test]
    fn a2_twisted_relation() {
        let rs = AffineRootSystem::build_from_type(&[TypeSpec::new('A', 2, 2)]).unwrap();
        let g0 = rs.simple_roots[0].grad().to_vec();
        let g1 = rs.simple_roots[1].grad().to_vec();
        assert_eq!(g0, rational::scale_vec(&q(-2), &g1));
        assert_eq!(rs.components[0].labels, vec![1, 2]);
        assert_eq!(rs.lattice, Lattice::new(1, &[g1]).unwrap());
    }

    #[test]
    fn c2_labels_and_vertices() {
        let rs = AffineRootSystem::build_from_type(&[TypeSpec::new('C', 2, 1)]).unwrap();
        assert_eq!(rs.components[0].labels, vec![1, 2, 1]);
        assert_eq!(rs.vertices().unwrap().len(), 3);
    }

    #[test]
    fn fold_examples() {
        let rs = a1();
        let (y, w) = rs.fold_to_alcove(&AffinePoint::new(vec![qf(13, 10)]));
        assert_eq!(y.coords, vec![qf(7, 10)]);
        assert_eq!(w.len(), 1);
        let (y, _) = rs.fold_to_alcove(&AffinePoint::new(vec![qf(-2, 5)]));
        assert_eq!(y.coords, vec![qf(2, 5)]);
        let x = AffinePoint::new(vec![qf(1, 3)]);
        assert_eq!(rs.fold_to_alcove(&x), (x.clone(), Vec::new()));
    }

    #[test]
    fn enumerate_a1() {
        let rs = a1();
        let region = Region::new(vec![qf(-1, 4)], vec![qf(5, 4)]);
        let roots = rs.enumerate_roots(&region).unwrap();
        let zeros: Vec<Q> = roots.iter().map(|r| -&r.constant / &r.grad()[0]).collect();
        assert_eq!(roots.len(), 2);
        assert!(zeros.contains(&q(0)) && zeros.contains(&q(1)));
        let empty = AffineRootSystem::build_from_type(&[TypeSpec::new('T', 1, 0)]).unwrap();
        assert!(empty.enumerate_roots(&region).unwrap().is_empty());
    }

    #[test]
    fn stabilizer_examples() {
        let rs = a1();
        let s = rs.stabilizer_roots(&AffinePoint::new(qvec(&[0]))).unwrap();
        assert_eq!(s.type_name(), "A1");
        let s = rs.stabilizer_roots(&AffinePoint::new(vec![qf(1, 2)])).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn weight_lattice_needs_span() {
        let t = AffineRootSystem::build_from_type(&[TypeSpec::new('T', 1, 0)]).unwrap();
        assert!(matches!(t.weight_lattice(), Err(Error::NonSpanning(_))));
    }
}
