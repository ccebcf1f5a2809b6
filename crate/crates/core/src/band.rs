//! Finite invariants of the band: the numbers `d_I`, component groups of
//! stalks, restriction maps between them, and Čech cohomology of the
//! resulting constructible sheaf over a polytope.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::euclid::{eval, AffinePoint, Lattice};
use crate::linalg::{self, AbelianGroup, ZMat};
use crate::polytope::Polytope;
use crate::rational::{self, Q, Z};
use crate::rootsys::{self, AffineRootSystem};
use crate::{Error, Result};

/// `d_I = gcd{a_j : j ∈ I'}` where `I'` is the complement of `I` in the
/// component's node set `0..labels.len()`.
pub fn d_i(labels: &[u64], i: &[usize]) -> Result<u64> {
    let comp: Vec<u64> = (0..labels.len()).filter(|j| !i.contains(j)).map(|j| labels[j]).collect();
    if comp.is_empty() {
        return Err(Error::EmptyComplement(format!("{i:?}")));
    }
    Ok(comp.into_iter().fold(0u64, |g, a| g.gcd(&a)))
}

/// `p_I(v) = Σ_{i∈I} a_i v_i mod d_I` for `v` indexed like `i`.
pub fn stalk_map_pi(labels: &[u64], i: &[usize], v: &[Z]) -> Result<Z> {
    crate::check_dim(i.len(), v.len())?;
    let d = Z::from(d_i(labels, i)?);
    let s: Z = i.iter().zip(v).map(|(&k, x)| Z::from(labels[k]) * x).sum();
    Ok(s.mod_floor(&d))
}

/// Per affine component: local indices vanishing at `x`, labels and `d_I`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentStalk {
    pub component: String,
    /// Local node indices (positions in the component) vanishing at `x`.
    pub nodes: Vec<usize>,
    /// Global simple-root indices vanishing at `x`.
    pub roots: Vec<usize>,
    pub labels: Vec<u64>,
    pub d: u64,
}

/// `I_x` decomposed by affine component.
pub fn component_stalks(rs: &AffineRootSystem, x: &AffinePoint) -> Result<Vec<ComponentStalk>> {
    let walls = rs.walls_through(x)?;
    if !rs.in_alcove(x)? {
        return Err(Error::OutsideAlcove(rational::fmt_vec(&x.coords)));
    }
    rs.affine_components()
        .map(|c| {
            let nodes: Vec<usize> = (0..c.roots.len()).filter(|&k| walls.contains(&c.roots[k])).collect();
            let roots = nodes.iter().map(|&k| c.roots[k]).collect();
            let d = d_i(&c.labels, &nodes)?;
            Ok(ComponentStalk { component: c.name.clone(), nodes, roots, labels: c.labels.clone(), d })
        })
        .collect()
}

/// `ℤΦ̄ ⊕ Λ^W`: the adjoint-type lattice commensurable with `Λ`.
pub fn adjoint_lattice(rs: &AffineRootSystem) -> Result<Lattice> {
    let n = rs.dim();
    let roots = rs.root_lattice()?;
    let grads = rs.gradients();
    // Λ^W = {λ ∈ Λ : ⟨λ, ᾱ⟩ = 0 for all roots}
    let gens = &rs.lattice.generators;
    let pairing: Vec<Vec<Q>> = grads.iter().map(|g| gens.iter().map(|l| rs.space.pair(g, l)).collect()).collect();
    let den = rational::common_denominator(pairing.iter().flatten());
    let zp: ZMat = pairing.iter().map(|r| r.iter().map(|x| (x * rational::qz(&den)).to_integer()).collect()).collect();
    let kernel = if zp.is_empty() {
        (0..gens.len()).map(|i| (0..gens.len()).map(|j| if i == j { Z::one() } else { Z::zero() }).collect()).collect()
    } else {
        linalg::int_kernel(&zp, gens.len())
    };
    let invariant: Vec<Vec<Q>> = kernel
        .iter()
        .map(|c| {
            let mut v = vec![Q::zero(); n];
            for (k, g) in c.iter().zip(gens) {
                v = rational::add_vec(&v, &rational::scale_vec(&rational::qz(k), g));
            }
            v
        })
        .collect();
    roots.sum(&Lattice::new(n, &invariant)?)
}

pub fn is_adjoint(rs: &AffineRootSystem) -> Result<bool> {
    Ok(adjoint_lattice(rs)? == rs.lattice)
}

/// Replaces `Λ` by `ℤΦ̄ ⊕ Λ^W`.
pub fn adjoint_normalization(rs: &AffineRootSystem) -> Result<AffineRootSystem> {
    rs.clone().with_lattice(adjoint_lattice(rs)?)
}

/// The stalk `π₀(A^{Φ_x})`. For adjoint `Λ` this is `⊕ ℤ/d_I` over affine
/// components, checked against the Smith normal form of `ρ_x`; otherwise
/// the Smith normal form alone.
pub fn stalk_group(rs: &AffineRootSystem, x: &AffinePoint) -> Result<AbelianGroup> {
    let phi_x = rs.stabilizer_roots(x)?;
    let (snf, _) = rootsys::torus_fixed_group(&rs.space, &phi_x, &rs.lattice)?;
    if !is_adjoint(rs)? {
        return Ok(snf);
    }
    let orders: Vec<Z> = component_stalks(rs, x)?.iter().map(|c| Z::from(c.d)).collect();
    let by_labels = AbelianGroup::from_factors(0, &orders);
    if by_labels != snf {
        return Err(Error::Inconsistent(format!(
            "stalk at {}: labels give {by_labels}, Smith form gives {snf}",
            rational::fmt_vec(&x.coords)
        )));
    }
    Ok(by_labels)
}

/// Checks the restriction from the stalk at `x` to the stalk at a nearby
/// `y` with `I_y ⊆ I_x`: `d_{I_y} | d_{I_x}` and `d_{I_y} | a_i` for
/// `i ∈ I_x ∖ I_y`, so that `[1] ↦ [1]` makes the square with `p_I` commute.
pub fn restriction_check(rs: &AffineRootSystem, x: &AffinePoint, y: &AffinePoint) -> Result<bool> {
    let sx = component_stalks(rs, x)?;
    let sy = component_stalks(rs, y)?;
    for (cx, cy) in sx.iter().zip(&sy) {
        if !cy.nodes.iter().all(|k| cx.nodes.contains(k)) {
            return Err(Error::Inconsistent(format!(
                "walls at {} are not a subset of those at {}",
                rational::fmt_vec(&y.coords),
                rational::fmt_vec(&x.coords)
            )));
        }
        if cx.d % cy.d != 0 {
            return Ok(false);
        }
        for (pos, &k) in cx.nodes.iter().enumerate() {
            // image of e_k both ways round the square
            let mut e = vec![Z::zero(); cx.nodes.len()];
            e[pos] = Z::one();
            let down = stalk_map_pi(&cx.labels, &cx.nodes, &e)?.mod_floor(&Z::from(cy.d));
            let proj: Vec<Z> = cy.nodes.iter().map(|j| if *j == k { Z::one() } else { Z::zero() }).collect();
            let across = stalk_map_pi(&cy.labels, &cy.nodes, &proj)?;
            if down != across {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Verifies exactness of `0 → 𝔎_x → Λ^∨ → ℤ^{I_x} → ⊕ℤ/d_I → 0` with
/// `ρ_x(v) = (⟨ᾱ_i, v⟩)_{i∈I_x}` and `ψ_x = ⊕ p_I`. Requires adjoint `Λ`.
pub fn kernel_sequence_check(rs: &AffineRootSystem, x: &AffinePoint) -> Result<bool> {
    if !is_adjoint(rs)? {
        return Err(Error::Inconsistent("lattice is not of adjoint type".into()));
    }
    let phi_x = rs.stabilizer_roots(x)?;
    let coweights = rs.lattice.dual(&rs.space)?;
    let image = rootsys::rho_image(&rs.space, &phi_x, &coweights)?;
    let stalks = component_stalks(rs, x)?;
    let k = phi_x.indices.len();

    // ψ ∘ ρ = 0
    for row in &image {
        for c in &stalks {
            let v: Vec<Z> =
                c.roots.iter().map(|r| row[phi_x.indices.iter().position(|i| i == r).expect("wall")].clone()).collect();
            if !stalk_map_pi(&c.labels, &c.nodes, &v)?.is_zero() {
                return Ok(false);
            }
        }
    }
    // ψ surjective
    for c in &stalks {
        let g = c.nodes.iter().fold(c.d, |g, &n| g.gcd(&c.labels[n]));
        if g != 1 {
            return Ok(false);
        }
    }
    // im ρ = ker ψ: both have index ∏ d_I
    let ident: ZMat = (0..k).map(|i| (0..k).map(|j| if i == j { Z::one() } else { Z::zero() }).collect()).collect();
    let coker = linalg::quotient_group(&ident, &image)?;
    let expected: Z = stalks.iter().map(|c| Z::from(c.d)).product();
    if coker.order() != Some(expected) {
        return Ok(false);
    }
    // ker ρ has rank dim − rank Φ̄_x
    let kernel = if image.is_empty() || k == 0 {
        coweights.rank()
    } else {
        linalg::int_kernel(&linalg::transpose(&image), image.len()).len()
    };
    Ok(kernel == rs.dim() - k)
}

/// One stratum of a constructible sheaf: a face with stalk `ℤ^n / R`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheafFace {
    pub vertices: Vec<usize>,
    /// Simple roots vanishing on the face, when built from a root system.
    #[serde(default)]
    pub walls: Vec<usize>,
    pub rank: usize,
    #[serde(with = "crate::rational::serde_z::mat")]
    pub relations: ZMat,
    pub stalk: AbelianGroup,
}

/// A sheaf constructible with respect to the face stratification: stalks
/// on open faces and restriction maps from a face to every face containing
/// it (`rank(G) × rank(F)` integer matrices).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructibleSheaf {
    pub faces: Vec<SheafFace>,
    #[serde(with = "restriction_map")]
    pub restrictions: BTreeMap<(usize, usize), ZMat>,
}

mod restriction_map {
    use super::{BTreeMap, ZMat};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        from: usize,
        to: usize,
        #[serde(with = "crate::rational::serde_z::mat")]
        matrix: ZMat,
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<(usize, usize), ZMat>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(m.iter().map(|(&(from, to), matrix)| Entry { from, to, matrix: matrix.clone() }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(usize, usize), ZMat>, D::Error> {
        let v: Vec<Entry> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|e| ((e.from, e.to), e.matrix)).collect())
    }
}

fn zid(n: usize) -> ZMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { Z::one() } else { Z::zero() }).collect()).collect()
}

fn zmat_vec(m: &[Vec<Z>], v: &[Z]) -> Vec<Z> {
    m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn zmat_mul(a: &[Vec<Z>], b: &[Vec<Z>], inner: usize, cols: usize) -> ZMat {
    a.iter().map(|r| (0..cols).map(|j| (0..inner).map(|k| &r[k] * &b[k][j]).sum()).collect()).collect()
}

/// Whether `v` lies in the lattice spanned by `rows` inside `ℤ^n`.
fn in_span_z(rows: &[Vec<Z>], v: &[Z]) -> bool {
    if v.iter().all(Z::is_zero) {
        return true;
    }
    if rows.is_empty() {
        return false;
    }
    linalg::int_solve(&linalg::transpose(rows), v, rows.len()).is_some()
}

fn is_subface(a: &[usize], b: &[usize]) -> bool {
    a.len() < b.len() && a.iter().all(|v| b.contains(v))
}

impl ConstructibleSheaf {
    /// Assembles a sheaf from face data, validating that restrictions
    /// preserve relations and compose compatibly.
    pub fn new(faces: Vec<(Vec<usize>, usize, ZMat)>, restrictions: BTreeMap<(usize, usize), ZMat>) -> Result<Self> {
        let faces: Vec<SheafFace> = faces
            .into_iter()
            .map(|(vertices, rank, relations)| {
                let stalk = linalg::quotient_group(&zid(rank), &relations)?;
                Ok(SheafFace { vertices, walls: Vec::new(), rank, relations, stalk })
            })
            .collect::<Result<_>>()?;
        let sheaf = ConstructibleSheaf { faces, restrictions };
        sheaf.validate()?;
        Ok(sheaf)
    }

    /// Faces strictly containing face `f`.
    fn above(&self, f: usize) -> Vec<usize> {
        (0..self.faces.len()).filter(|&g| is_subface(&self.faces[f].vertices, &self.faces[g].vertices)).collect()
    }

    fn restriction(&self, f: usize, g: usize) -> Result<&ZMat> {
        self.restrictions.get(&(f, g)).ok_or_else(|| Error::Inconsistent(format!("missing restriction {f} -> {g}")))
    }

    pub fn validate(&self) -> Result<()> {
        for f in 0..self.faces.len() {
            for g in self.above(f) {
                let m = self.restriction(f, g)?;
                let (nf, ng) = (self.faces[f].rank, self.faces[g].rank);
                if m.len() != ng || m.iter().any(|r| r.len() != nf) {
                    return Err(Error::Inconsistent(format!("restriction {f} -> {g} has wrong shape")));
                }
                for r in &self.faces[f].relations {
                    if !in_span_z(&self.faces[g].relations, &zmat_vec(m, r)) {
                        return Err(Error::Inconsistent(format!("restriction {f} -> {g} does not preserve relations")));
                    }
                }
                for h in self.above(g) {
                    let direct = self.restriction(f, h)?;
                    let via = zmat_mul(self.restriction(g, h)?, m, ng, nf);
                    for j in 0..nf {
                        let diff: Vec<Z> = (0..self.faces[h].rank).map(|i| &via[i][j] - &direct[i][j]).collect();
                        if !in_span_z(&self.faces[h].relations, &diff) {
                            return Err(Error::Inconsistent(format!(
                                "restrictions {f} -> {g} -> {h} and {f} -> {h} differ"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The sheaf of component groups over a polytope inside the alcove:
    /// on the open face `F` the stalk is `ℤ^{I_F} / ρ_F(Λ^∨)` and
    /// restriction is the coordinate projection `ℤ^{I_F} → ℤ^{I_G}`.
    pub fn component_sheaf(rs: &AffineRootSystem, polytope: &Polytope) -> Result<Self> {
        let coweights = rs.lattice.dual(&rs.space)?;
        let mut faces = Vec::new();
        for face in polytope.faces() {
            let b = polytope.barycenter(&face.vertices);
            let x = AffinePoint::new(b);
            if !rs.in_alcove(&x)? {
                return Err(Error::OutsideAlcove(rational::fmt_vec(&x.coords)));
            }
            let walls: Vec<usize> = (0..rs.simple_roots.len())
                .filter(|&i| face.vertices.iter().all(|&v| eval(&rs.simple_roots[i], &polytope.vertices[v]).is_zero()))
                .collect();
            let phi = rs.subsystem(&walls);
            let relations =
                if walls.is_empty() { Vec::new() } else { rootsys::rho_image(&rs.space, &phi, &coweights)? };
            let stalk = linalg::quotient_group(&zid(walls.len()), &relations)?;
            faces.push(SheafFace { vertices: face.vertices, rank: walls.len(), walls, relations, stalk });
        }
        let mut restrictions = BTreeMap::new();
        for f in 0..faces.len() {
            for g in 0..faces.len() {
                if is_subface(&faces[f].vertices, &faces[g].vertices) {
                    let m: ZMat = faces[g]
                        .walls
                        .iter()
                        .map(|w| faces[f].walls.iter().map(|v| if v == w { Z::one() } else { Z::zero() }).collect())
                        .collect();
                    restrictions.insert((f, g), m);
                }
            }
        }
        let sheaf = ConstructibleSheaf { faces, restrictions };
        sheaf.validate()?;
        Ok(sheaf)
    }

    /// Strict chains `F_0 < … < F_p` of the face poset, by length.
    fn chains(&self) -> Vec<Vec<Vec<usize>>> {
        let n = self.faces.len();
        let mut by_len: Vec<Vec<Vec<usize>>> = vec![(0..n).map(|f| vec![f]).collect()];
        loop {
            let last = by_len.last().expect("nonempty");
            let next: Vec<Vec<usize>> = last
                .iter()
                .flat_map(|c| {
                    let top = *c.last().expect("nonempty chain");
                    self.above(top).into_iter().map(move |g| {
                        let mut c2 = c.clone();
                        c2.push(g);
                        c2
                    })
                })
                .collect();
            if next.is_empty() {
                break;
            }
            by_len.push(next);
        }
        by_len
    }

    /// Čech cohomology `H^0, …, H^d` for the cover of the polytope by open
    /// stars of barycenters in its barycentric subdivision. The nerve is the
    /// order complex of the face poset; sections over the star of a chain are
    /// the stalk at its largest face.
    pub fn cech_cohomology(&self) -> Result<Vec<AbelianGroup>> {
        let chains = self.chains();
        let offsets: Vec<Vec<usize>> = chains
            .iter()
            .map(|cs| {
                let mut o = Vec::with_capacity(cs.len() + 1);
                let mut acc = 0;
                for c in cs {
                    o.push(acc);
                    acc += self.faces[*c.last().expect("chain")].rank;
                }
                o.push(acc);
                o
            })
            .collect();
        let total = |p: usize| *offsets[p].last().expect("offsets");
        let index: Vec<BTreeMap<Vec<usize>, usize>> =
            chains.iter().map(|cs| cs.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect()).collect();

        // d_p : C^p → C^{p+1}, as a (rows = dim C^{p+1}) × (cols = dim C^p) matrix
        let mut diffs: Vec<ZMat> = Vec::new();
        for p in 0..chains.len().saturating_sub(1) {
            let mut d = vec![vec![Z::zero(); total(p)]; total(p + 1)];
            for (si, sigma) in chains[p + 1].iter().enumerate() {
                let row0 = offsets[p + 1][si];
                let top = sigma[p + 1];
                for j in 0..=p + 1 {
                    let mut tau = sigma.clone();
                    tau.remove(j);
                    let ti = index[p][&tau];
                    let col0 = offsets[p][ti];
                    let sign = if j % 2 == 0 { Z::one() } else { -Z::one() };
                    let block =
                        if j == p + 1 { self.restriction(sigma[p], top)?.clone() } else { zid(self.faces[top].rank) };
                    for (r, brow) in block.iter().enumerate() {
                        for (c, x) in brow.iter().enumerate() {
                            d[row0 + r][col0 + c] += &sign * x;
                        }
                    }
                }
            }
            diffs.push(d);
        }

        let relations = |p: usize| -> ZMat {
            let mut out = Vec::new();
            for (ci, c) in chains[p].iter().enumerate() {
                let f = &self.faces[*c.last().expect("chain")];
                for r in &f.relations {
                    let mut v = vec![Z::zero(); total(p)];
                    for (k, x) in r.iter().enumerate() {
                        v[offsets[p][ci] + k] = x.clone();
                    }
                    out.push(v);
                }
            }
            out
        };

        let mut groups = Vec::new();
        for p in 0..chains.len() {
            let n = total(p);
            // cocycles: {x : d x ∈ R_{p+1}}
            let cocycles: ZMat = if p + 1 < chains.len() {
                let d = &diffs[p];
                let rel = relations(p + 1);
                let mut m: ZMat = d.clone();
                for (i, row) in m.iter_mut().enumerate() {
                    for r in &rel {
                        row.push(-r[i].clone());
                    }
                }
                if m.is_empty() {
                    zid(n)
                } else {
                    linalg::int_kernel(&m, n + rel.len()).into_iter().map(|v| v[..n].to_vec()).collect()
                }
            } else {
                zid(n)
            };
            let mut bounds = relations(p);
            if p > 0 {
                bounds.extend(linalg::transpose(&diffs[p - 1]));
            }
            groups.push(linalg::quotient_group(&cocycles, &bounds)?);
        }
        Ok(groups)
    }
}

/// Hull of the edge midpoints of a polytope, a convex sub-polytope that
/// avoids every vertex.
pub fn edge_midpoint_polytope(p: &Polytope) -> Result<Polytope> {
    let half = Q::new(Z::one(), Z::from(2));
    let pts: Vec<Vec<Q>> = p
        .edges()
        .into_iter()
        .map(|(a, b)| rational::scale_vec(&half, &rational::add_vec(&p.vertices[a], &p.vertices[b])))
        .collect();
    Polytope::new(&pts)
}
