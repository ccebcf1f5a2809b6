//! Vertex-wise sphericity of momentum pairs: tangent cones, weight monoids,
//! matching against the model catalog, and certificates.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::catalog::{self, Catalog, LeviModel, RankOneModel};
use crate::dynkin::FiniteType;
use crate::euclid::{AffineFunctional, AffinePoint, Lattice};
use crate::linalg::{self, QMat, ZMat};
use crate::localroot::{self, LocalRootSystem};
use crate::pair::MomentumPair;
use crate::polytope::{subsets, Cone};
use crate::rational::{self, serde_q, Q, Z};
use crate::twist::{self, CentralizerDatum};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Cones and monoids

/// `ℝ_{≥0}(𝒫 − a)` at vertex `i`, as a cone of vectors.
pub fn tangent_cone(pair: &MomentumPair, i: usize) -> Result<Cone> {
    if i >= pair.polytope.vertices.len() {
        return Err(Error::NotAVertex(format!("index {i}")));
    }
    let gens = pair.vertex_vectors(i);
    Ok(Cone::from_generators(pair.datum.root_system.dim(), &gens))
}

/// `ℝ_{≥0}(𝒫 − a)` at an arbitrary point `a ∈ 𝒫`.
pub fn tangent_cone_at(pair: &MomentumPair, a: &[Q]) -> Result<Cone> {
    crate::check_dim(pair.polytope.ambient_dim(), a.len())?;
    if !pair.polytope.contains(a) {
        return Err(Error::NotContained(format!("{} is not in the polytope", rational::fmt_vec(a))));
    }
    let ginv = linalg::inverse(&pair.datum.root_system.space.gram).expect("positive definite");
    let gens: QMat = pair.polytope.vertices.iter().map(|v| linalg::mat_vec(&ginv, &rational::sub_vec(v, a))).collect();
    Ok(Cone::from_generators(pair.datum.root_system.dim(), &gens))
}

fn zq(v: &[Z]) -> Vec<Q> {
    v.iter().map(rational::qz).collect()
}

fn int_inverse(m: &[Vec<Z>]) -> ZMat {
    let inv = linalg::inverse(&linalg::to_q(m)).expect("unimodular");
    inv.iter().map(|r| r.iter().map(|x| x.to_integer()).collect()).collect()
}

fn int_vec_mat(v: &[Z], m: &[Vec<Z>], ncols: usize) -> Vec<Z> {
    let mut out = vec![Z::zero(); ncols];
    for (c, row) in v.iter().zip(m) {
        for (o, x) in out.iter_mut().zip(row) {
            *o += c * x;
        }
    }
    out
}

/// Basis of `ℤ^n ∩ span(rows)`.
fn saturated_span(rows: &[Vec<Q>], n: usize) -> ZMat {
    let perp = linalg::nullspace(rows, n);
    let perp_z: ZMat = perp.iter().map(|r| rational::primitive_integer(r)).collect();
    if perp_z.is_empty() {
        return (0..n).map(|i| (0..n).map(|j| Z::from((i == j) as i64)).collect()).collect();
    }
    linalg::int_kernel(&perp_z, n)
}

/// Hilbert basis of a full-dimensional pointed cone in `ℤ^m`.
fn hilbert_basis_pointed(gens: &[Vec<Q>], m: usize) -> Vec<Vec<Z>> {
    if m == 0 {
        return Vec::new();
    }
    let cone = Cone::from_generators(m, gens);
    let rays: Vec<Vec<Z>> = cone.rays.iter().map(|r| rational::primitive_integer(r)).collect();
    let mut cands: std::collections::BTreeSet<Vec<Z>> = rays.iter().cloned().collect();
    for sub in subsets(rays.len(), m) {
        let r: ZMat = sub.iter().map(|&i| rays[i].clone()).collect();
        let rq = linalg::to_q(&r);
        let Some(rinv) = linalg::inverse(&rq) else { continue };
        let s = linalg::smith(&r, m);
        let vinv = int_inverse(&s.v);
        let d: Vec<Z> = s.diag.clone();
        // y ranges over ∏ [0, d_i)
        let mut y = vec![Z::zero(); m];
        loop {
            let x = int_vec_mat(&y, &vinv, m);
            let lam = linalg::vec_mat(&zq(&x), &rinv, m);
            let frac: Vec<Q> = lam.iter().map(rational::frac_q).collect();
            let p = linalg::vec_mat(&frac, &rq, m);
            if !rational::is_zero_vec(&p) {
                cands.insert(p.iter().map(|v| v.to_integer()).collect());
            }
            let mut k = 0;
            loop {
                if k == m {
                    break;
                }
                y[k] += 1;
                if y[k] < d[k] {
                    break;
                }
                y[k] = Z::zero();
                k += 1;
            }
            if k == m {
                break;
            }
        }
    }
    let list: Vec<Vec<Z>> = cands.into_iter().collect();
    list.iter()
        .filter(|x| {
            !list
                .iter()
                .any(|y| y != *x && cone.contains(&zq(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<Z>>())))
        })
        .cloned()
        .collect()
}

/// Generators of the monoid `ℤ^n ∩ ℝ_{≥0}(gens)`: the Hilbert basis when
/// the cone is pointed; otherwise lifts of the Hilbert basis of the pointed
/// quotient together with a basis of the lineality lattice and its
/// negatives.
pub fn hilbert_basis(gens: &[Vec<Q>], n: usize) -> Result<Vec<Vec<Z>>> {
    for g in gens {
        crate::check_dim(n, g.len())?;
    }
    let gens: QMat = gens.iter().filter(|g| !rational::is_zero_vec(g)).cloned().collect();
    if gens.is_empty() {
        return Ok(Vec::new());
    }
    let s = saturated_span(&gens, n);
    let k = s.len();
    let sq = linalg::to_q(&s);
    let local: QMat = gens.iter().map(|g| linalg::coords_in(&sq, g).expect("in span")).collect();
    let cone = Cone::from_generators(k, &local);
    let out_local: Vec<Vec<Z>> = if cone.lineality.is_empty() {
        hilbert_basis_pointed(&local, k)
    } else {
        let l0 = saturated_span(&cone.lineality, k);
        let l = l0.len();
        let sm = linalg::smith(&l0, k);
        let w = int_inverse(&sm.v);
        let vq = linalg::to_q(&sm.v);
        let proj: QMat = local.iter().map(|g| linalg::vec_mat(g, &vq, k)[l..].to_vec()).collect();
        let mut out: Vec<Vec<Z>> = hilbert_basis_pointed(&proj, k - l)
            .iter()
            .map(|q| {
                let mut c = vec![Z::zero(); l];
                c.extend(q.iter().cloned());
                int_vec_mat(&c, &w, k)
            })
            .collect();
        for b in &w[..l] {
            out.push(b.clone());
            out.push(b.iter().map(|x| -x).collect());
        }
        out
    };
    let mut out: Vec<Vec<Z>> = out_local.iter().map(|c| int_vec_mat(c, &s, n)).collect();
    out.sort();
    Ok(out)
}

/// Generators of `cone ∩ Λ` as vectors; `Λ` must span the cone.
pub fn weight_monoid(cone: &Cone, lattice: &Lattice) -> Result<QMat> {
    let gens = lattice_coords(lattice, &cone.generators)?;
    let hb = hilbert_basis(&gens, lattice.rank())?;
    Ok(hb.iter().map(|z| linalg::vec_mat(&zq(z), &lattice.generators, lattice.dim)).collect())
}

fn lattice_coords(lattice: &Lattice, vs: &[Vec<Q>]) -> Result<QMat> {
    vs.iter()
        .map(|v| {
            linalg::coords_in(&lattice.generators, v)
                .ok_or_else(|| Error::NotContained(format!("{} is not in the span of Λ", rational::fmt_vec(v))))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum VertexVerdict {
    Spherical { model: String },
    NotSpherical { reason: String },
    Unknown { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexReport {
    pub vertex: usize,
    #[serde(with = "serde_q::vec")]
    pub point: Vec<Q>,
    pub centralizer: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centralizer_group: Option<String>,
    /// Alcove walls through the vertex.
    pub walls: Vec<usize>,
    #[serde(with = "serde_q::mat")]
    pub tangent_cone: QMat,
    /// Monoid generators as vectors.
    #[serde(with = "serde_q::mat")]
    pub hilbert_basis: QMat,
    /// Pairings `⟨h, ᾱ_j^∨⟩` with the walls through the vertex.
    #[serde(with = "serde_q::mat")]
    pub levi_pairings: QMat,
    pub verdict: VertexVerdict,
    /// Spherical roots of the matched model as affine roots vanishing at
    /// the vertex, when recorded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spherical_roots: Option<Vec<AffineFunctional>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    Spherical { models: Vec<String> },
    NotSpherical { vertex: usize, reason: String },
    Unknown { vertex: usize, reason: String },
}

impl Verdict {
    pub fn is_spherical(&self) -> bool {
        matches!(self, Verdict::Spherical { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Spherical { .. } => "Spherical",
            Verdict::NotSpherical { .. } => "NotSpherical",
            Verdict::Unknown { .. } => "Unknown",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub verdict: Verdict,
    pub vertices: Vec<VertexReport>,
}

enum Outcome {
    Hit { name: String, roots: Option<Vec<AffineFunctional>> },
    Miss(String),
    Open(String),
}

// ---------------------------------------------------------------------------
// Vertex checks

struct Local<'a> {
    pair: &'a MomentumPair,
    cent: CentralizerDatum,
    /// Walls through the vertex, in the order of `cent.subsystem.roots`.
    roots: Vec<AffineFunctional>,
    coroots: QMat,
    /// Monoid generators in lattice coordinates and as vectors.
    hb: Vec<Vec<Z>>,
    hb_vec: QMat,
    pairings: Vec<Vec<Z>>,
}

impl Local<'_> {
    fn is_torus(&self, k: usize) -> bool {
        self.pairings[k].iter().all(|x| x.is_zero())
    }
}

/// `ℂ^k × (ℂ*)^l` if the monoid generated by `elems` is free.
fn torus_module(elems: &[Vec<Z>]) -> Option<String> {
    if elems.is_empty() {
        return Some("point".into());
    }
    let pairs = elems
        .iter()
        .filter(|e| {
            let neg: Vec<Z> = e.iter().map(|x| -x).collect();
            e.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_positive()) && elems.contains(&neg)
        })
        .count();
    let rank = linalg::rank(&elems.iter().map(|e| zq(e)).collect::<QMat>());
    if elems.len() - pairs != rank {
        return None;
    }
    let k = elems.len() - 2 * pairs;
    let mut parts = Vec::new();
    if k > 0 {
        parts.push(format!("ℂ^{k}"));
    }
    if pairs > 0 {
        parts.push(format!("(ℂ*)^{pairs}"));
    }
    Some(parts.join("×"))
}

fn permutations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) {
                cur.push(i);
                rec(n, k, cur, out);
                cur.pop();
            }
        }
    }
    rec(n, k, &mut cur, &mut out);
    out
}

fn sorted(mut v: Vec<Vec<Z>>) -> Vec<Vec<Z>> {
    v.sort();
    v
}

/// Matches a semisimple-rank-one vertex against a rank-one model.
fn match_rank_one(l: &Local, m: &RankOneModel, root_vec: &[Q], root_fn: &AffineFunctional) -> Option<Outcome> {
    let r = l.pair.lattice.rank();
    let re = m.rank();
    let h = &l.hb;
    if re > r {
        return None;
    }
    let extra = h.len() as i64 - m.basis.len() as i64 - (r - re) as i64;
    if extra < 0 || extra as usize > r - re {
        return None;
    }
    let k2 = extra as usize;
    let k1 = r - re - k2;
    let pad = |v: &[Z]| -> Vec<Z> {
        let mut w = v.to_vec();
        w.resize(r, Z::zero());
        w
    };
    let mut s: Vec<Vec<Z>> = m.basis.iter().map(|b| pad(b)).collect();
    let unit = |i: usize, sgn: i64| -> Vec<Z> { (0..r).map(|j| Z::from(if j == i { sgn } else { 0 })).collect() };
    for t in 0..k1 {
        s.push(unit(re + t, 1));
    }
    for t in 0..k2 {
        s.push(unit(re + k1 + t, 1));
        s.push(unit(re + k1 + t, -1));
    }
    let mut pairing = m.pairing.clone();
    pairing.resize(r, Q::zero());
    let sq: QMat = s.iter().map(|x| zq(x)).collect();
    let basis_idx = linalg::independent_rows(&sq);
    if basis_idx.len() != r {
        return None;
    }
    let sb: QMat = basis_idx.iter().map(|&i| sq[i].clone()).collect();
    let sb_inv = linalg::inverse(&sb)?;
    let c_pair = |z: &[Z]| -> Z {
        let v = linalg::vec_mat(&zq(z), &l.pair.lattice.generators, l.pair.lattice.dim);
        l.pair.datum.root_system.space.pair(&v, &l.coroots[0]).to_integer()
    };
    let target = sorted(h.clone());
    for assign in permutations(h.len(), r) {
        let hb_rows: QMat = assign.iter().map(|&j| zq(&h[j])).collect();
        let phi = linalg::mat_mul(&sb_inv, &hb_rows);
        let image: Vec<Vec<Q>> = sq.iter().map(|x| linalg::vec_mat(x, &phi, r)).collect();
        if image.iter().any(|v| v.iter().any(|x| !x.is_integer())) {
            continue;
        }
        let image_z: Vec<Vec<Z>> = image.iter().map(|v| v.iter().map(|x| x.to_integer()).collect()).collect();
        if sorted(image_z.clone()) != target {
            continue;
        }
        if s.iter().zip(&image_z).any(|(x, y)| rational::qz(&c_pair(y)) != rational::dot(&pairing, &zq(x))) {
            continue;
        }
        let to_vec = |abstract_v: &[Q]| -> Vec<Q> {
            let mut a = abstract_v.to_vec();
            a.resize(r, Q::zero());
            let lc = linalg::vec_mat(&a, &phi, r);
            linalg::vec_mat(&lc, &l.pair.lattice.generators, l.pair.lattice.dim)
        };
        if let Some(b) = &m.root {
            if to_vec(b) != root_vec {
                continue;
            }
        }
        let roots = m.spherical_roots.as_ref().and_then(|srs| {
            srs.iter()
                .map(|sr| {
                    let v = to_vec(sr);
                    linalg::coords_in(&[root_vec.to_vec()], &v).map(|c| root_fn.scale(&c[0]))
                })
                .collect::<Option<Vec<_>>>()
        });
        return Some(Outcome::Hit { name: m.name.clone(), roots });
    }
    None
}

fn rank_one(l: &Local, catalog: &Catalog) -> Result<Outcome> {
    let max_c = l.pairings.iter().flatten().map(|x| x.abs()).max().unwrap_or_default();
    let max_param = i64::try_from(max_c).unwrap_or(i64::MAX - 1).saturating_add(1).max(2);
    let models = catalog.rank_one_models(l.pair.lattice.rank(), max_param)?;
    let root_fn = &l.roots[0];
    for m in &models {
        if let Some(hit) = match_rank_one(l, m, root_fn.grad(), root_fn) {
            return Ok(hit);
        }
    }
    Ok(Outcome::Miss(format!(
        "no smooth affine spherical model of semisimple rank one has the weight monoid {}",
        describe_monoid(l)
    )))
}

fn describe_monoid(l: &Local) -> String {
    let parts: Vec<String> = l
        .hb_vec
        .iter()
        .zip(&l.pairings)
        .map(|(v, c)| {
            let cs: Vec<String> = c.iter().map(|x| x.to_string()).collect();
            format!("{}⟨{}⟩", rational::fmt_vec(v), cs.join(","))
        })
        .collect();
    format!("{{{}}}", parts.join(", "))
}

/// Components of the centralizer, as `(type, positions in l.roots)`.
fn levi_components(l: &Local) -> Vec<(FiniteType, Vec<usize>)> {
    l.cent.subsystem.types.clone()
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    parent[x] = r;
    r
}

fn match_levi_group(
    l: &Local,
    catalog: &Catalog,
    comps: &[(FiniteType, Vec<usize>)],
    elems: &[usize],
) -> Result<Option<(String, Option<Vec<AffineFunctional>>)>> {
    // per element, the fundamental-weight coordinates on each component
    let coords =
        |e: usize, c: &(FiniteType, Vec<usize>)| -> Vec<Z> { c.1.iter().map(|&p| l.pairings[e][p].clone()).collect() };
    if comps.len() == 1 && comps[0].0 == FiniteType::new('A', 1).expect("valid") {
        let mut got: Vec<Z> = elems.iter().map(|&e| coords(e, &comps[0])[0].clone()).collect();
        got.sort();
        let max_c = got.iter().map(|x| x.abs()).max().unwrap_or_default();
        let top = i64::try_from(max_c).unwrap_or(i64::MAX - 1).saturating_add(1).max(2);
        let root_fn = &l.roots[comps[0].1[0]];
        for m in catalog.rank_one_models(1, top)? {
            let mut want: Vec<Z> = m.basis.iter().map(|b| m.pair(&zq(b)).to_integer()).collect();
            want.sort();
            if want == got {
                let roots = m.spherical_roots.as_ref().map(|srs| {
                    srs.iter()
                        .map(|sr| {
                            // a spherical root pairs with the coroot to m.pair(sr), i.e. is (m.pair(sr)/2)·α
                            root_fn.scale(&(m.pair(sr) / rational::q(2)))
                        })
                        .collect()
                });
                return Ok(Some((m.name.clone(), roots)));
            }
        }
        return Ok(None);
    }
    let types: Vec<FiniteType> = comps.iter().map(|c| c.0).collect();
    for model in catalog.levi_models(&types)? {
        if let Some(roots) = match_levi_model(l, &model, comps, elems, &coords) {
            return Ok(Some((model.name.clone(), roots)));
        }
    }
    Ok(match_double(comps, elems, &coords).map(|name| (name, None)))
}

fn perfect_matchings(types: &[FiniteType]) -> Vec<Vec<(usize, usize)>> {
    fn rec(
        types: &[FiniteType],
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        let Some(a) = used.iter().position(|u| !u) else {
            out.push(cur.clone());
            return;
        };
        used[a] = true;
        for b in a + 1..types.len() {
            if !used[b] && types[a] == types[b] {
                used[b] = true;
                cur.push((a, b));
                rec(types, used, cur, out);
                cur.pop();
                used[b] = false;
            }
        }
        used[a] = false;
    }
    let mut out = Vec::new();
    if types.len().is_multiple_of(2) {
        rec(types, &mut vec![false; types.len()], &mut Vec::new(), &mut out);
    }
    out
}

/// Recognizes `K × K / diag` for a possibly non-simply-connected `K`: the
/// components pair up, each weight is `(λ, λ*)`, and the `λ` form the
/// dominant part of a full-rank lattice.
fn match_double(comps: &[(FiniteType, Vec<usize>)], elems: &[usize], coords: &Coords) -> Option<String> {
    let types: Vec<FiniteType> = comps.iter().map(|c| c.0).collect();
    'matching: for m in perfect_matchings(&types) {
        for &(a, b) in &m {
            let ok = comps[a].0.automorphisms().iter().any(|sigma| {
                elems.iter().all(|&e| {
                    let (x, y) = (coords(e, &comps[a]), coords(e, &comps[b]));
                    (0..x.len()).all(|g| y[sigma[g]] == x[g])
                })
            });
            if !ok {
                continue 'matching;
            }
        }
        let half: Vec<Vec<Z>> =
            elems.iter().map(|&e| m.iter().flat_map(|&(a, _)| coords(e, &comps[a])).collect()).collect();
        let r = half.first().map_or(0, |h| h.len());
        let basis = linalg::hnf_rows(&half);
        if basis.len() != r {
            continue;
        }
        let bq: QMat = basis.iter().map(|b| zq(b)).collect();
        let inv = linalg::inverse(&bq)?;
        let Ok(hb) = hilbert_basis(&inv, r) else { continue };
        let mapped: Vec<Vec<Z>> =
            hb.iter().map(|y| linalg::vec_mat(&zq(y), &bq, r).iter().map(|x| x.to_integer()).collect()).collect();
        if sorted(mapped) != sorted(half.clone()) {
            continue;
        }
        let mut factors: Vec<FiniteType> = m.iter().map(|&(a, _)| comps[a].0).collect();
        factors.sort();
        let names: Vec<String> = factors.iter().map(catalog::compact_name).collect();
        let k = if names.len() == 1 { names[0].clone() } else { format!("({})", names.join("×")) };
        let gens: QMat = half.iter().map(|h| zq(h)).collect();
        let quotient =
            Lattice::new(r, &gens).and_then(|l| crate::euclid::lattice_quotient(&Lattice::standard(r), &l)).ok()?;
        let name = match quotient.torsion.as_slice() {
            [] => format!("D({k})"),
            [d] => format!("D({k}/μ{d})"),
            _ => format!("D({k}/{quotient})"),
        };
        return Some(name);
    }
    None
}

type Coords<'a> = dyn Fn(usize, &(FiniteType, Vec<usize>)) -> Vec<Z> + 'a;

/// Tries every assignment of group components to model factors and every
/// diagram automorphism of the factors; returns the matched spherical roots.
fn match_levi_model(
    l: &Local,
    model: &LeviModel,
    comps: &[(FiniteType, Vec<usize>)],
    elems: &[usize],
    coords: &Coords,
) -> Option<Option<Vec<AffineFunctional>>> {
    let k = comps.len();
    if model.types.len() != k || model.basis.len() != elems.len() {
        return None;
    }
    let want = sorted(model.basis.clone());
    for perm in permutations(k, k) {
        // model factor p is group component perm[p]
        if (0..k).any(|p| comps[perm[p]].0 != model.types[p]) {
            continue;
        }
        let autos: Vec<Vec<Vec<usize>>> = (0..k).map(|p| model.types[p].automorphisms()).collect();
        let mut choice = vec![0usize; k];
        loop {
            let got: Vec<Vec<Z>> = elems
                .iter()
                .map(|&e| {
                    let mut row = Vec::new();
                    for p in 0..k {
                        let c = coords(e, &comps[perm[p]]);
                        let sigma = &autos[p][choice[p]];
                        let mut w = vec![Z::zero(); c.len()];
                        for (g, x) in c.into_iter().enumerate() {
                            w[sigma[g]] = x;
                        }
                        row.extend(w);
                    }
                    row
                })
                .collect();
            if sorted(got) == want {
                let roots = model.spherical_roots.as_ref().map(|srs| {
                    srs.iter()
                        .map(|sr| {
                            let mut f: Option<AffineFunctional> = None;
                            let mut offset = 0;
                            for p in 0..k {
                                let sigma = &autos[p][choice[p]];
                                let comp = &comps[perm[p]];
                                for (g, &pos) in comp.1.iter().enumerate() {
                                    let coef = &sr[offset + sigma[g]];
                                    if coef.is_zero() {
                                        continue;
                                    }
                                    let term = l.roots[pos].scale(coef);
                                    f = Some(match f {
                                        None => term,
                                        Some(acc) => add_functionals(&acc, &term),
                                    });
                                }
                                offset += model.types[p].rank;
                            }
                            f.expect("spherical roots are nonzero")
                        })
                        .collect()
                });
                return Some(roots);
            }
            // next automorphism combination
            let mut p = 0;
            while p < k {
                choice[p] += 1;
                if choice[p] < autos[p].len() {
                    break;
                }
                choice[p] = 0;
                p += 1;
            }
            if p == k {
                break;
            }
        }
    }
    None
}

fn add_functionals(a: &AffineFunctional, b: &AffineFunctional) -> AffineFunctional {
    AffineFunctional::new(rational::add_vec(a.grad(), b.grad()), &a.constant + &b.constant)
}

fn higher_rank(l: &Local, catalog: &Catalog) -> Result<Outcome> {
    let comps = levi_components(l);
    let space = &l.pair.datum.root_system.space;
    let span: QMat = l.roots.iter().map(|r| r.grad().to_vec()).collect();
    let mut parent: Vec<usize> = (0..comps.len()).collect();
    let mut torus = Vec::new();
    let mut touching: Vec<Vec<usize>> = Vec::new();
    for (e, h) in l.hb_vec.iter().enumerate() {
        let touched: Vec<usize> = comps
            .iter()
            .enumerate()
            .filter(|(_, c)| c.1.iter().any(|&p| !l.pairings[e][p].is_zero()))
            .map(|(i, _)| i)
            .collect();
        let c = twist::projection_coords(space, &span, h);
        let along = linalg::vec_mat(&c, &span, h.len());
        let has_torus = !rational::is_zero_vec(&rational::sub_vec(h, &along));
        if touched.is_empty() {
            torus.push(e);
        } else if has_torus {
            return Ok(Outcome::Open(format!(
                "weight {} mixes the central torus with the semisimple part; monoid {}",
                rational::fmt_vec(h),
                describe_monoid(l)
            )));
        }
        for w in touched.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
        touching.push(touched);
    }
    let mut groups: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for i in 0..comps.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().0.push(i);
    }
    for (e, t) in touching.iter().enumerate() {
        if let Some(&first) = t.first() {
            let root = find(&mut parent, first);
            groups.get_mut(&root).expect("group exists").1.push(e);
        }
    }
    let mut names = Vec::new();
    let mut roots: Option<Vec<AffineFunctional>> = Some(Vec::new());
    for (members, elems) in groups.values() {
        if elems.is_empty() {
            continue;
        }
        let cs: Vec<(FiniteType, Vec<usize>)> = members.iter().map(|&i| comps[i].clone()).collect();
        match match_levi_group(l, catalog, &cs, elems)? {
            Some((name, r)) => {
                names.push(name);
                match (&mut roots, r) {
                    (Some(acc), Some(r)) => acc.extend(r),
                    _ => roots = None,
                }
            }
            None => {
                let types: Vec<FiniteType> = cs.iter().map(|c| c.0).collect();
                let ws: Vec<String> = elems
                    .iter()
                    .map(|&e| {
                        let v: Vec<String> =
                            cs.iter().flat_map(|c| c.1.iter().map(|&p| l.pairings[e][p].to_string())).collect();
                        format!("({})", v.join(","))
                    })
                    .collect();
                return Ok(Outcome::Open(format!(
                    "no catalog entry for {} with weight monoid {{{}}} in fundamental-weight coordinates",
                    crate::dynkin::product_name(&types),
                    ws.join(", ")
                )));
            }
        }
    }
    if !torus.is_empty() {
        let elems: Vec<Vec<Z>> = torus.iter().map(|&e| l.hb[e].clone()).collect();
        match torus_module(&elems) {
            Some(n) => names.push(n),
            None => return Ok(Outcome::Open(format!("torus part of the monoid {} is not free", describe_monoid(l)))),
        }
    }
    let name = if names.is_empty() { "point".to_string() } else { names.join("×") };
    Ok(Outcome::Hit { name, roots })
}

/// Runs the necessary conditions and the catalog match at vertex `i`.
pub fn check_spherical_at(pair: &MomentumPair, i: usize, catalog: &Catalog) -> Result<VertexReport> {
    if i >= pair.polytope.vertices.len() {
        return Err(Error::NotAVertex(format!("index {i}")));
    }
    let rs = &pair.datum.root_system;
    let a = AffinePoint::new(pair.polytope.vertices[i].clone());
    let cent = twist::centralizer_datum(&pair.datum, &a)?;
    let walls = cent.subsystem.indices.clone();
    let cone = tangent_cone(pair, i)?;
    let mut report = VertexReport {
        vertex: i,
        point: a.coords.clone(),
        centralizer: cent.label.clone(),
        centralizer_group: cent.group_name.clone(),
        walls: walls.clone(),
        tangent_cone: cone.generators.clone(),
        hilbert_basis: Vec::new(),
        levi_pairings: Vec::new(),
        verdict: VertexVerdict::Unknown { reason: String::new() },
        spherical_roots: None,
    };
    let fail = |mut r: VertexReport, reason: String| {
        r.verdict = VertexVerdict::NotSpherical { reason };
        Ok(r)
    };
    if !pair.datum.lattice().contains_lattice(&pair.lattice) {
        return fail(report, "integrality: Λ is not contained in the character lattice Λ_τ".into());
    }
    let dirs = pair.direction_vectors();
    let lat_span = linalg::rank(&pair.lattice.generators);
    let mut both = dirs.clone();
    both.extend(pair.lattice.generators.iter().cloned());
    if lat_span != dirs.len() || linalg::rank(&both) != lat_span {
        return fail(report, "Λ does not span the direction space of the polytope".into());
    }
    let gens = lattice_coords(&pair.lattice, &cone.generators)?;
    let hb = hilbert_basis(&gens, pair.lattice.rank())?;
    let hb_vec: QMat = hb.iter().map(|z| linalg::vec_mat(&zq(z), &pair.lattice.generators, rs.dim())).collect();
    let generated = Lattice::new(rs.dim(), &hb_vec)?;
    if !(generated.contains_lattice(&pair.lattice) && pair.lattice.contains_lattice(&generated)) {
        return fail(report, "the monoid does not generate Λ".into());
    }
    let roots = cent.subsystem.roots.clone();
    let coroots: QMat = roots.iter().map(|r| r.coroot(&rs.space).map(|c| c.coords)).collect::<Result<_>>()?;
    let mut pairings = Vec::new();
    for h in &hb_vec {
        let mut row = Vec::new();
        for c in &coroots {
            let p = rs.space.pair(h, c);
            if !p.is_integer() {
                return fail(report, "integrality: a weight pairs non-integrally with a coroot".into());
            }
            row.push(p.to_integer());
        }
        pairings.push(row);
    }
    report.hilbert_basis = hb_vec.clone();
    report.levi_pairings = pairings.iter().map(|r| zq(r)).collect();
    let l = Local { pair, cent, roots, coroots, hb, hb_vec, pairings };
    let all_torus = (0..l.hb.len()).all(|k| l.is_torus(k));
    let outcome = if all_torus {
        match torus_module(&l.hb) {
            Some(name) => Outcome::Hit { name, roots: Some(Vec::new()) },
            None => Outcome::Miss(format!(
                "the monoid {} is not free, so no smooth affine toric model exists",
                describe_monoid(&l)
            )),
        }
    } else if l.roots.len() == 1 {
        rank_one(&l, catalog)?
    } else {
        higher_rank(&l, catalog)?
    };
    match outcome {
        Outcome::Hit { name, roots } => {
            report.verdict = VertexVerdict::Spherical { model: name };
            report.spherical_roots = roots;
        }
        Outcome::Miss(reason) => report.verdict = VertexVerdict::NotSpherical { reason },
        Outcome::Open(reason) => report.verdict = VertexVerdict::Unknown { reason },
    }
    Ok(report)
}

/// Checks every vertex; any `NotSpherical` wins over `Unknown`, and the
/// lowest vertex index is reported.
pub fn check_pair(pair: &MomentumPair, catalog: &Catalog) -> Result<PairReport> {
    let rs = &pair.datum.root_system;
    for v in &pair.polytope.vertices {
        if !rs.in_alcove(&AffinePoint::new(v.clone()))? {
            return Err(Error::OutsideAlcove(rational::fmt_vec(v)));
        }
    }
    let reports: Vec<VertexReport> =
        (0..pair.polytope.vertices.len()).map(|i| check_spherical_at(pair, i, catalog)).collect::<Result<_>>()?;
    let negative = reports.iter().find_map(|r| match &r.verdict {
        VertexVerdict::NotSpherical { reason } => {
            Some(Verdict::NotSpherical { vertex: r.vertex, reason: reason.clone() })
        }
        _ => None,
    });
    let open = reports.iter().find_map(|r| match &r.verdict {
        VertexVerdict::Unknown { reason } => Some(Verdict::Unknown { vertex: r.vertex, reason: reason.clone() }),
        _ => None,
    });
    let verdict = negative.or(open).unwrap_or_else(|| Verdict::Spherical {
        models: reports
            .iter()
            .map(|r| match &r.verdict {
                VertexVerdict::Spherical { model } => model.clone(),
                _ => unreachable!("all vertices are spherical"),
            })
            .collect(),
    });
    Ok(PairReport { verdict, vertices: reports })
}

// ---------------------------------------------------------------------------
// Certificates

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexCertificate {
    #[serde(flatten)]
    pub report: VertexReport,
    pub model: String,
    /// The local piece `K ×^{K_a} X`.
    pub induced: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandRootSystem {
    pub type_name: String,
    pub simple_roots: Vec<AffineFunctional>,
    /// Indices of simple roots that are twice a primitive wall.
    pub doubled: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub group: String,
    #[serde(with = "serde_q::mat")]
    pub polytope: QMat,
    #[serde(with = "serde_q::mat")]
    pub lattice: QMat,
    pub vertices: Vec<VertexCertificate>,
    pub rank: usize,
    pub group_dim: usize,
    pub generic_centralizer: String,
    pub generic_centralizer_dim: usize,
    /// `dim K − dim L_M + 2 rk M`.
    pub dimension: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_root_system: Option<BandRootSystem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_note: Option<String>,
}

/// Name of `K` from its factors.
pub fn group_name(pair: &MomentumPair) -> String {
    let g = &pair.datum.group;
    let names: Vec<String> = g
        .factors
        .iter()
        .map(|f| match f.letter {
            'T' => format!("T^{}", f.rank),
            l => FiniteType::new(l, f.rank).map_or_else(|_| format!("{l}{}", f.rank), |t| catalog::compact_name(&t)),
        })
        .collect();
    names.join("×")
}

/// Full report for a spherical pair; fails with `NotSpherical` otherwise.
pub fn certificate(pair: &MomentumPair, catalog: &Catalog) -> Result<Certificate> {
    let report = check_pair(pair, catalog)?;
    if !report.verdict.is_spherical() {
        return Err(Error::NotSpherical(format!("verdict is {}", report.verdict.name())));
    }
    let k_name = group_name(pair);
    let group_dim = pair.datum.group.group_dim();
    let all: Vec<usize> = (0..pair.polytope.vertices.len()).collect();
    let bary = AffinePoint::new(pair.polytope.barycenter(&all));
    let generic = twist::centralizer_datum(&pair.datum, &bary)?;
    let rank = pair.lattice.rank();
    let dimension = group_dim + 2 * rank - generic.dim();
    let mut vertices = Vec::new();
    for r in &report.vertices {
        let model = match &r.verdict {
            VertexVerdict::Spherical { model } => model.clone(),
            _ => unreachable!("checked spherical"),
        };
        let cent = twist::centralizer_datum(&pair.datum, &AffinePoint::new(r.point.clone()))?;
        let l_name = cent.group_name.clone().unwrap_or_else(|| cent.label.clone());
        let induced = if cent.dim() == group_dim && !pair.datum.group.factors.is_empty() {
            model.clone()
        } else {
            format!("{k_name}×^{{{l_name}}}{model}")
        };
        vertices.push(VertexCertificate { report: r.clone(), model, induced });
    }
    let (band_root_system, band_note) = band_system(pair, &report.vertices);
    Ok(Certificate {
        group: k_name,
        polytope: pair.polytope.vertices.clone(),
        lattice: pair.lattice.generators.clone(),
        vertices,
        rank,
        group_dim,
        generic_centralizer: generic.group_name.clone().unwrap_or(generic.label.clone()),
        generic_centralizer_dim: generic.dim(),
        dimension,
        band_root_system,
        band_note,
    })
}

fn band_system(pair: &MomentumPair, reports: &[VertexReport]) -> (Option<BandRootSystem>, Option<String>) {
    let Some(local): Option<Vec<Vec<AffineFunctional>>> = reports.iter().map(|r| r.spherical_roots.clone()).collect()
    else {
        return (None, Some("some local models carry no spherical-root data".into()));
    };
    if local.iter().all(|s| s.is_empty()) {
        let empty = BandRootSystem { type_name: "∅".into(), simple_roots: Vec::new(), doubled: Vec::new() };
        return (Some(empty), None);
    }
    let glued = LocalRootSystem::from_vertex_systems(
        pair.datum.root_system.space.clone(),
        pair.polytope.clone(),
        pair.lattice.clone(),
        &local,
    )
    .and_then(|l| localroot::glue_local_system(&l));
    match glued {
        Ok(g) => {
            let names: Vec<String> = g.root_system.components.iter().map(|c| c.name.clone()).collect();
            let type_name = if names.is_empty() { "∅".into() } else { names.join("×") };
            (Some(BandRootSystem { type_name, simple_roots: g.root_system.simple_roots, doubled: g.doubled }), None)
        }
        Err(e) => (None, Some(format!("gluing failed: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{qvec, zvec};

    fn brute_force(gens: &[Vec<i64>], bound: i64) -> Vec<Vec<Z>> {
        // irreducible lattice points of the cone with coordinates in [-bound, bound]
        let n = gens[0].len();
        let g: QMat = gens.iter().map(|v| qvec(v)).collect();
        let cone = Cone::from_generators(n, &g);
        let mut pts: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..n {
            pts = pts.into_iter().flat_map(|p| (-bound..=bound).map(move |x| [p.clone(), vec![x]].concat())).collect();
        }
        let inside: Vec<Vec<i64>> =
            pts.into_iter().filter(|p| p.iter().any(|&x| x != 0) && cone.contains(&qvec(p))).collect();
        inside
            .iter()
            .filter(|x| {
                !inside.iter().any(|y| {
                    let d: Vec<i64> = x.iter().zip(y.iter()).map(|(a, b)| a - b).collect();
                    y != *x && d.iter().any(|&v| v != 0) && cone.contains(&qvec(&d))
                })
            })
            .map(|x| zvec(x))
            .collect()
    }

    #[test]
    fn monoid_examples() {
        assert_eq!(hilbert_basis(&[qvec(&[1])], 1).unwrap(), vec![zvec(&[1])]);
        assert_eq!(hilbert_basis(&[qvec(&[1, 0]), qvec(&[0, 1])], 2).unwrap(), vec![zvec(&[0, 1]), zvec(&[1, 0])]);
        let got = hilbert_basis(&[qvec(&[1, 1]), qvec(&[1, -1])], 2).unwrap();
        let mut want = brute_force(&[vec![1, 1], vec![1, -1]], 2);
        want.sort();
        assert_eq!(got, want);
        assert_eq!(want.len(), 3);
    }

    #[test]
    fn monoid_matches_brute_force() {
        let cases: Vec<Vec<Vec<i64>>> = vec![
            vec![vec![1, 0], vec![1, 3]],
            vec![vec![2, -1], vec![-1, 2]],
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 2]],
            vec![vec![1, 2, 0], vec![0, 1, 3], vec![2, 0, 1]],
        ];
        for c in cases {
            let g: QMat = c.iter().map(|v| qvec(v)).collect();
            let got = hilbert_basis(&g, c[0].len()).unwrap();
            let mut want = brute_force(&c, 6);
            want.sort();
            assert_eq!(got, want, "cone {c:?}");
        }
    }

    #[test]
    fn monoid_with_lineality() {
        let hb = hilbert_basis(&[qvec(&[1, 0]), qvec(&[-1, 0]), qvec(&[1, 2])], 2).unwrap();
        // half plane y ≥ 0: ±(1,0) and some lift of (0,1)
        assert_eq!(hb.len(), 3);
        assert!(hb.contains(&zvec(&[1, 0])) && hb.contains(&zvec(&[-1, 0])));
        assert!(hb.iter().any(|v| v[1] == Z::from(1)));
        // a line inside the plane
        let hb = hilbert_basis(&[qvec(&[1, 1]), qvec(&[-1, -1])], 2).unwrap();
        assert_eq!(hb, vec![zvec(&[-1, -1]), zvec(&[1, 1])]);
    }
}
