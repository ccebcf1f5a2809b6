//! Rational polytopes and polyhedral cones: affine hulls, facets, the face
//! lattice, extreme rays and membership.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::{self, QMat};
use crate::rational::{self, dot, serde_q, Q};
use crate::{Error, Result};

/// Iterates over all `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Primitive integer representative of a direction (sign kept).
fn direction_key(v: &[Q]) -> Vec<Q> {
    let p = rational::primitive_integer(v);
    p.iter().map(rational::qz).collect()
}

/// A polyhedral cone in `ℝ^n` given by generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cone {
    pub dim: usize,
    /// Original generators.
    #[serde(with = "serde_q::mat")]
    pub generators: QMat,
    /// Basis of the linear span.
    #[serde(with = "serde_q::mat")]
    pub span: QMat,
    /// Basis of the lineality space.
    #[serde(with = "serde_q::mat")]
    pub lineality: QMat,
    /// Facet normals `h` with `h·v ≥ 0` on the cone (unique up to the
    /// orthogonal complement of the span).
    #[serde(with = "serde_q::mat")]
    pub facets: QMat,
    /// One primitive generator per extreme ray of the cone modulo lineality.
    #[serde(with = "serde_q::mat")]
    pub rays: QMat,
}

impl Cone {
    pub fn from_generators(dim: usize, gens: &[Vec<Q>]) -> Cone {
        let gens: QMat = gens.iter().filter(|g| !rational::is_zero_vec(g)).cloned().collect();
        let span = if gens.is_empty() { Vec::new() } else { linalg::rref(&gens).0 };
        let s = span.len();
        let perp = linalg::nullspace(&span, dim);
        let mut facets: QMat = Vec::new();
        let mut keys: BTreeSet<Vec<Q>> = BTreeSet::new();
        if s > 0 {
            let idx: Vec<usize> = (0..gens.len()).collect();
            for sub in subsets(idx.len(), s - 1) {
                let rows: QMat = sub.iter().map(|&i| gens[i].clone()).collect();
                if linalg::rank(&rows) != s - 1 {
                    continue;
                }
                let mut sys = rows;
                sys.extend(perp.iter().cloned());
                let ns = linalg::nullspace(&sys, dim);
                if ns.len() != 1 {
                    continue;
                }
                let mut h = ns[0].clone();
                let vals: Vec<Q> = gens.iter().map(|g| dot(&h, g)).collect();
                let pos = vals.iter().any(|v| v.is_positive());
                let neg = vals.iter().any(|v| v.is_negative());
                if pos && neg {
                    continue;
                }
                if neg {
                    h = rational::neg_vec(&h);
                }
                if !pos && !neg {
                    continue;
                }
                let k = direction_key(&h);
                if keys.insert(k.clone()) {
                    facets.push(k);
                }
            }
        }
        let lineality = if s == 0 {
            Vec::new()
        } else {
            let mut sys = facets.clone();
            sys.extend(perp.iter().cloned());
            linalg::nullspace(&sys, dim)
        };
        let ldim = lineality.len();
        // extreme rays modulo lineality, represented in the orthogonal
        // complement of the lineality space
        let lperp = if ldim == 0 { linalg::identity(dim) } else { linalg::nullspace(&lineality, dim) };
        let project = |v: &[Q]| -> Vec<Q> {
            if ldim == 0 {
                return v.to_vec();
            }
            // v = l + w with l in lineality, w ⟂ lineality (plain dot)
            let mut basis = lineality.clone();
            basis.extend(lperp.iter().cloned());
            let c = linalg::coords_in(&basis, v).expect("basis spans");
            let w: Vec<Q> = c[ldim..].to_vec();
            linalg::vec_mat(&w, &lperp, dim)
        };
        let mut rays: QMat = Vec::new();
        let mut rkeys: BTreeSet<Vec<Q>> = BTreeSet::new();
        for g in &gens {
            let w = project(g);
            if rational::is_zero_vec(&w) {
                continue;
            }
            let mut tight: QMat = facets.iter().filter(|h| dot(h, g).is_zero()).cloned().collect();
            tight.extend(perp.iter().cloned());
            let face_dim = linalg::nullspace(&tight, dim).len();
            if face_dim == ldim + 1 {
                let k = direction_key(&w);
                if rkeys.insert(k.clone()) {
                    rays.push(k);
                }
            }
        }
        Cone { dim, generators: gens, span, lineality, facets, rays }
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    pub fn span_dim(&self) -> usize {
        self.span.len()
    }

    pub fn in_span(&self, v: &[Q]) -> bool {
        rational::is_zero_vec(v) || linalg::coords_in(&self.span, v).is_some()
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.in_span(v) && self.facets.iter().all(|h| !dot(h, v).is_negative())
    }

    /// Whether the cone is its whole span.
    pub fn is_full_span(&self) -> bool {
        self.lineality.len() == self.span.len()
    }
}

/// A convex polytope given by points (reduced to its vertices).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polytope {
    #[serde(with = "serde_q::mat")]
    pub vertices: QMat,
    /// Facets as sorted vertex-index sets.
    pub facets: Vec<Vec<usize>>,
    /// Dimension of the affine hull.
    pub dim: usize,
}

/// A face of a polytope: its vertex indices and dimension.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Face {
    pub dim: usize,
    pub vertices: Vec<usize>,
}

impl Polytope {
    pub fn new(points: &[Vec<Q>]) -> Result<Polytope> {
        if points.is_empty() {
            return Err(Error::Inconsistent("polytope needs at least one point".into()));
        }
        let n = points[0].len();
        for p in points {
            crate::check_dim(n, p.len())?;
        }
        let mut pts: QMat = Vec::new();
        for p in points {
            if !pts.contains(p) {
                pts.push(p.clone());
            }
        }
        let (dim, hull_coords) = hull_coordinates(&pts);
        let facets_all = facets_of(&hull_coords, dim);
        // keep only extreme points
        let keep: Vec<usize> = (0..pts.len())
            .filter(|&i| {
                if dim == 0 {
                    return true;
                }
                let tight: Vec<&Vec<usize>> = facets_all.iter().filter(|f| f.contains(&i)).collect();
                // vertex iff the tight facets meet in a single point
                let common: BTreeSet<usize> = tight
                    .iter()
                    .fold(None::<BTreeSet<usize>>, |acc, f| {
                        let s: BTreeSet<usize> = f.iter().cloned().collect();
                        Some(match acc {
                            None => s,
                            Some(a) => a.intersection(&s).cloned().collect(),
                        })
                    })
                    .unwrap_or_default();
                common.len() == 1 && common.contains(&i)
            })
            .collect();
        let vertices: QMat = keep.iter().map(|&i| pts[i].clone()).collect();
        let (dim, hc) = hull_coordinates(&vertices);
        let facets = facets_of(&hc, dim);
        Ok(Polytope { vertices, facets, dim })
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices[0].len()
    }

    /// Basis of the direction space of the affine hull.
    pub fn direction_space(&self) -> QMat {
        let p0 = &self.vertices[0];
        let diffs: QMat = self.vertices[1..].iter().map(|v| rational::sub_vec(v, p0)).collect();
        if diffs.is_empty() {
            return Vec::new();
        }
        linalg::rref(&diffs).0
    }

    /// All nonempty faces including the polytope itself, sorted by
    /// dimension then vertex set.
    pub fn faces(&self) -> Vec<Face> {
        let all: Vec<usize> = (0..self.vertices.len()).collect();
        let mut sets: BTreeSet<Vec<usize>> = BTreeSet::new();
        sets.insert(all);
        let mut frontier: Vec<Vec<usize>> = self.facets.clone();
        for f in &frontier {
            sets.insert(f.clone());
        }
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for f in &frontier {
                for g in &self.facets {
                    let inter: Vec<usize> = f.iter().filter(|i| g.contains(i)).cloned().collect();
                    if !inter.is_empty() && sets.insert(inter.clone()) {
                        next.push(inter);
                    }
                }
            }
            frontier = next;
        }
        for i in 0..self.vertices.len() {
            sets.insert(vec![i]);
        }
        let mut faces: Vec<Face> = sets
            .into_iter()
            .map(|vs| {
                let pts: QMat = vs.iter().map(|&i| self.vertices[i].clone()).collect();
                Face { dim: affine_rank(&pts), vertices: vs }
            })
            .collect();
        faces.sort();
        faces
    }

    pub fn barycenter(&self, vs: &[usize]) -> Vec<Q> {
        let n = self.ambient_dim();
        let mut s = vec![Q::zero(); n];
        for &i in vs {
            s = rational::add_vec(&s, &self.vertices[i]);
        }
        rational::scale_vec(&Q::new(1.into(), (vs.len() as i64).into()), &s)
    }

    /// Tangent cone at a vertex: generated by `v_j − a`.
    pub fn vertex_directions(&self, i: usize) -> QMat {
        let a = &self.vertices[i];
        self.vertices.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| rational::sub_vec(v, a)).collect()
    }

    pub fn vertex_index(&self, p: &[Q]) -> Option<usize> {
        self.vertices.iter().position(|v| v.as_slice() == p)
    }

    /// Membership by an exact LP on convex combinations.
    pub fn contains(&self, p: &[Q]) -> bool {
        let m = self.vertices.len();
        let n = self.ambient_dim();
        // variables λ ≥ 0, Σλ = 1, Σ λ_i v_i = p
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for j in 0..n {
            let r: Vec<Q> = self.vertices.iter().map(|v| v[j].clone()).collect();
            rows.push(r.clone());
            rhs.push(p[j].clone());
            rows.push(rational::neg_vec(&r));
            rhs.push(-p[j].clone());
        }
        let one = vec![Q::from_integer(1.into()); m];
        rows.push(one.clone());
        rhs.push(Q::from_integer(1.into()));
        rows.push(rational::neg_vec(&one));
        rhs.push(Q::from_integer((-1).into()));
        for i in 0..m {
            let mut e = vec![Q::zero(); m];
            e[i] = Q::from_integer((-1).into());
            rows.push(e);
            rhs.push(Q::zero());
        }
        crate::lp::feasible_point(&rows, &rhs, m).is_some()
    }

    /// Edges (one-dimensional faces) as vertex pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.faces().into_iter().filter(|f| f.dim == 1).map(|f| (f.vertices[0], f.vertices[1])).collect()
    }
}

/// Affine dimension of a point set.
pub fn affine_rank(pts: &[Vec<Q>]) -> usize {
    if pts.len() <= 1 {
        return 0;
    }
    let diffs: QMat = pts[1..].iter().map(|p| rational::sub_vec(p, &pts[0])).collect();
    linalg::rank(&diffs)
}

/// Dimension of the affine hull and coordinates of each point in it.
fn hull_coordinates(pts: &[Vec<Q>]) -> (usize, QMat) {
    let p0 = &pts[0];
    let diffs: QMat = pts.iter().map(|p| rational::sub_vec(p, p0)).collect();
    let nonzero: QMat = diffs.iter().filter(|d| !rational::is_zero_vec(d)).cloned().collect();
    if nonzero.is_empty() {
        return (0, vec![Vec::new(); pts.len()]);
    }
    let basis = linalg::rref(&nonzero).0;
    let coords: QMat = diffs.iter().map(|d| linalg::coords_in(&basis, d).expect("in hull")).collect();
    (basis.len(), coords)
}

/// Facets of a full-dimensional point configuration in `ℝ^d`.
fn facets_of(pts: &[Vec<Q>], d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return Vec::new();
    }
    let mut out: BTreeSet<Vec<usize>> = BTreeSet::new();
    for sub in subsets(pts.len(), d) {
        let base = &pts[sub[0]];
        let diffs: QMat = sub[1..].iter().map(|&i| rational::sub_vec(&pts[i], base)).collect();
        if d > 1 && linalg::rank(&diffs) != d - 1 {
            continue;
        }
        let h = if d == 1 {
            vec![Q::from_integer(1.into())]
        } else {
            let ns = linalg::nullspace(&diffs, d);
            if ns.len() != 1 {
                continue;
            }
            ns[0].clone()
        };
        let c = dot(&h, base);
        let vals: Vec<Q> = pts.iter().map(|p| dot(&h, p) - &c).collect();
        let pos = vals.iter().any(|v| v.is_positive());
        let neg = vals.iter().any(|v| v.is_negative());
        if pos && neg {
            continue;
        }
        let on: Vec<usize> = (0..pts.len()).filter(|&i| vals[i].is_zero()).collect();
        out.insert(on);
    }
    out.into_iter().collect()
}
