//! Local root systems on a polytope: ambiguous reflections, the bijection
//! between subsets of ambiguous walls and integral root systems with a given
//! Weyl group, simple-system validation, and gluing of vertex data into one
//! affine root system.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::euclid::{eval, AffineFunctional, AffinePoint, Lattice, MetricSpace};
use crate::linalg::QMat;
use crate::lp;
use crate::polytope::Polytope;
use crate::rational::{self, q, qz, Q, Z};
use crate::rootsys::AffineRootSystem;
use crate::{Error, Result};

/// Scales `f` by a positive factor so that its gradient is primitive in `Λ`.
pub fn primitive_wall(f: &AffineFunctional, lattice: &Lattice) -> Result<AffineFunctional> {
    if f.is_constant() {
        return Err(Error::ZeroGradient);
    }
    let c = crate::linalg::coords_in(&lattice.generators, f.grad()).ok_or_else(|| {
        Error::Integrality(format!("wall gradient {} is not in the span of the lattice", rational::fmt_vec(f.grad())))
    })?;
    let d = rational::common_denominator(&c);
    let ints: Vec<Z> = c.iter().map(|x| (x * qz(&d)).to_integer()).collect();
    let g = rational::gcd_all(&ints);
    // f = (g/d) · π with π primitive
    Ok(f.scale(&Q::new(d, g)))
}

/// Whether `f`'s gradient is a primitive element of `Λ`.
pub fn is_primitive(f: &AffineFunctional, lattice: &Lattice) -> bool {
    match lattice.coordinates(f.grad()) {
        Some(c) => rational::gcd_all(&c).is_one(),
        None => false,
    }
}

/// `Σ^a = {s : ⟨Λ, π̄_s^∨⟩ ⊆ 2ℤ}` for walls with primitive gradients.
pub fn ambiguous_reflections(space: &MetricSpace, walls: &[AffineFunctional], lattice: &Lattice) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, w) in walls.iter().enumerate() {
        if !is_primitive(w, lattice) {
            return Err(Error::NotPrimitive(rational::fmt_vec(w.grad())));
        }
        let n2 = space.norm2(w.grad());
        let ambiguous = lattice.generators.iter().all(|l| {
            let p = q(2) * space.pair(l, w.grad()) / &n2;
            p.is_integer() && p.to_integer().is_even()
        });
        if ambiguous {
            out.push(i);
        }
    }
    Ok(out)
}

/// `Φ_I` with simple roots `2π_s` for `s ∈ I` and `π_s` otherwise.
pub fn root_system_from_subset(
    space: &MetricSpace,
    walls: &[AffineFunctional],
    lattice: &Lattice,
    subset: &[usize],
) -> Result<AffineRootSystem> {
    let amb = ambiguous_reflections(space, walls, lattice)?;
    if let Some(s) = subset.iter().find(|s| !amb.contains(s)) {
        return Err(Error::Inconsistent(format!("wall {s} is not ambiguous")));
    }
    let roots: Vec<AffineFunctional> =
        walls.iter().enumerate().map(|(i, w)| if subset.contains(&i) { w.scale(&q(2)) } else { w.clone() }).collect();
    AffineRootSystem::from_simple_roots(space.clone(), roots, lattice.clone())
}

/// Simple roots `α_s` with `ᾱ_s / 2 ∈ Λ`, i.e. `α_s = 2π_s`.
pub fn sigma_a_of_phi(rs: &AffineRootSystem) -> Vec<usize> {
    rs.simple_roots
        .iter()
        .enumerate()
        .filter(|(_, r)| rs.lattice.contains(&rational::scale_vec(&Q::new(1.into(), 2.into()), r.grad())))
        .map(|(i, _)| i)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SimpleSystemReport {
    Accepted {
        /// The alcove `{α_i ≥ 0}` (its walls).
        alcove: Vec<AffineFunctional>,
        /// A point where every `α_i` is positive.
        #[serde(with = "crate::rational::serde_q::vec")]
        interior_point: Vec<Q>,
    },
    Rejected {
        pair: Option<(usize, usize)>,
        /// `4⟨ᾱ_i,ᾱ_j⟩² / (‖ᾱ_i‖²‖ᾱ_j‖²)` for the offending pair.
        #[serde(with = "crate::rational::serde_q::vec")]
        cos2_times_4: Vec<Q>,
        reason: String,
    },
}

impl SimpleSystemReport {
    pub fn is_accepted(&self) -> bool {
        matches!(self, SimpleSystemReport::Accepted { .. })
    }
}

/// Checks pairwise angles `π − π/ℓ` and the existence of a point where all
/// functionals are positive.
pub fn validate_simple_system(space: &MetricSpace, fs: &[AffineFunctional]) -> SimpleSystemReport {
    for i in 0..fs.len() {
        for j in i + 1..fs.len() {
            let p = space.pair(fs[i].grad(), fs[j].grad());
            let v = q(4) * &p * &p / (space.norm2(fs[i].grad()) * space.norm2(fs[j].grad()));
            let allowed = (0..=4).any(|k| v == q(k));
            if p.is_positive() || !allowed {
                return SimpleSystemReport::Rejected {
                    pair: Some((i, j)),
                    cos2_times_4: vec![v],
                    reason: if p.is_positive() {
                        "acute angle between walls".into()
                    } else {
                        "angle is not of the form π − π/ℓ".into()
                    },
                };
            }
        }
    }
    let n = space.dim();
    // maximize t subject to −g_i·x + t ≤ c_i, t ≤ 1
    let mut a: QMat = Vec::new();
    let mut b: Vec<Q> = Vec::new();
    for f in fs {
        let mut row = rational::neg_vec(f.grad());
        row.push(Q::one());
        a.push(row);
        b.push(f.constant.clone());
    }
    let mut tr = vec![Q::zero(); n];
    tr.push(Q::one());
    a.push(tr);
    b.push(Q::one());
    let mut c = vec![Q::zero(); n];
    c.push(Q::one());
    match lp::maximize(&c, &a, &b) {
        lp::LpResult::Optimal { value, mut x } if value.is_positive() => {
            x.pop();
            SimpleSystemReport::Accepted { alcove: fs.to_vec(), interior_point: x }
        }
        _ => SimpleSystemReport::Rejected {
            pair: None,
            cos2_times_4: Vec::new(),
            reason: "no point where all functionals are positive".into(),
        },
    }
}

/// All roots of the finite root system generated by `simple` (both signs).
pub fn finite_closure(space: &MetricSpace, simple: &[AffineFunctional]) -> Vec<AffineFunctional> {
    let mut seen: BTreeSet<AffineFunctional> = BTreeSet::new();
    let mut queue: VecDeque<AffineFunctional> = VecDeque::new();
    for s in simple {
        for r in [s.clone(), s.neg()] {
            if seen.insert(r.clone()) {
                queue.push_back(r);
            }
        }
    }
    while let Some(b) = queue.pop_front() {
        for s in simple {
            let r = s.reflect_functional(space, &b).expect("nonzero gradient");
            if seen.insert(r.clone()) {
                queue.push_back(r);
            }
        }
    }
    seen.into_iter().collect()
}

/// Sign of a functional on a polytope: `Some(true)` if `≥ 0` at all
/// vertices, `Some(false)` if `≤ 0`, `None` if it changes sign.
fn sign_on(f: &AffineFunctional, p: &Polytope) -> Option<bool> {
    let vals: Vec<Q> = p.vertices.iter().map(|v| eval(f, v)).collect();
    let pos = vals.iter().any(|v| v.is_positive());
    let neg = vals.iter().any(|v| v.is_negative());
    match (pos, neg) {
        (true, true) => None,
        (_, true) => Some(false),
        (true, false) => Some(true),
        // vanishing on 𝒫: fall back to a fixed order
        (false, false) => Some(f.grad().iter().find(|x| !x.is_zero()).is_none_or(|x| x.is_positive())),
    }
}

/// Simple roots of the positive system (nonnegative on `𝒫`) of a finite
/// root system, sorted.
pub fn simple_roots_on(roots: &[AffineFunctional], polytope: &Polytope) -> Result<Vec<AffineFunctional>> {
    let mut pos = Vec::new();
    for r in roots {
        match sign_on(r, polytope) {
            None => {
                return Err(Error::Inconsistent(format!(
                    "root {} changes sign on the polytope",
                    rational::fmt_vec(r.grad())
                )))
            }
            Some(true) => pos.push(r.clone()),
            Some(false) => {}
        }
    }
    let set: BTreeSet<AffineFunctional> = pos.iter().cloned().collect();
    let mut simple: Vec<AffineFunctional> = pos
        .iter()
        .filter(|r| {
            !pos.iter().any(|a| {
                let b = AffineFunctional::new(rational::sub_vec(r.grad(), a.grad()), &r.constant - &a.constant);
                set.contains(&b)
            })
        })
        .cloned()
        .collect();
    simple.sort();
    Ok(simple)
}

/// Per-face root systems, given by simple roots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceSystem {
    /// Vertex indices of the face.
    pub vertices: Vec<usize>,
    pub simple_roots: Vec<AffineFunctional>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalRootSystem {
    pub space: MetricSpace,
    pub polytope: Polytope,
    pub lattice: Lattice,
    /// One entry per face, vertices first.
    pub faces: Vec<FaceSystem>,
}

impl LocalRootSystem {
    /// Derives all face systems from the vertex systems: the roots of
    /// `Φ(v)` vanishing on a face `F ∋ v`. Checks that every vertex of a face
    /// induces the same face system.
    pub fn from_vertex_systems(
        space: MetricSpace,
        polytope: Polytope,
        lattice: Lattice,
        vertex_roots: &[Vec<AffineFunctional>],
    ) -> Result<Self> {
        if vertex_roots.len() != polytope.vertices.len() {
            return Err(Error::Inconsistent("one root system per vertex required".into()));
        }
        let closures: Vec<Vec<AffineFunctional>> = vertex_roots.iter().map(|s| finite_closure(&space, s)).collect();
        for (i, sys) in vertex_roots.iter().enumerate() {
            for r in sys {
                if !eval(r, &polytope.vertices[i]).is_zero() {
                    return Err(Error::Inconsistent(format!(
                        "root {} does not vanish at vertex {i}",
                        rational::fmt_vec(r.grad())
                    )));
                }
            }
        }
        let mut faces = Vec::new();
        for face in polytope.faces() {
            let mut found: Option<Vec<AffineFunctional>> = None;
            for &v in &face.vertices {
                let vanishing: Vec<AffineFunctional> = closures[v]
                    .iter()
                    .filter(|r| face.vertices.iter().all(|&w| eval(r, &polytope.vertices[w]).is_zero()))
                    .cloned()
                    .collect();
                let simple = simple_roots_on(&vanishing, &polytope)?;
                match &found {
                    None => found = Some(simple),
                    Some(s) if *s == simple => {}
                    Some(_) => {
                        return Err(Error::Inconsistent(format!(
                            "vertices of face {:?} induce different root systems",
                            face.vertices
                        )))
                    }
                }
            }
            faces.push(FaceSystem { vertices: face.vertices, simple_roots: found.unwrap_or_default() });
        }
        faces.sort_by(|a, b| (a.vertices.len(), &a.vertices).cmp(&(b.vertices.len(), &b.vertices)));
        Ok(LocalRootSystem { space, polytope, lattice, faces })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlueOutcome {
    pub root_system: AffineRootSystem,
    /// The primitive walls `π_s`.
    pub walls: Vec<AffineFunctional>,
    /// Indices of walls with `α_s = 2π_s`.
    pub doubled: Vec<usize>,
}

/// Reconstructs the global affine root system from a local root system and
/// verifies it restricts to the given data on every face.
pub fn glue_local_system(l: &LocalRootSystem) -> Result<GlueOutcome> {
    let space = &l.space;
    let mut walls: BTreeMap<AffineFunctional, bool> = BTreeMap::new();
    for f in &l.faces {
        for r in &f.simple_roots {
            let mut pi = primitive_wall(r, &l.lattice)?;
            if sign_on(&pi, &l.polytope) == Some(false) {
                pi = pi.neg();
            }
            let doubled = pi.scale(&q(2)) == *r || pi.scale(&q(-2)) == *r;
            if let Some(prev) = walls.insert(pi.clone(), doubled) {
                if prev != doubled {
                    return Err(Error::Inconsistent(format!(
                        "wall {} is used both with π and 2π",
                        rational::fmt_vec(pi.grad())
                    )));
                }
            }
        }
    }
    let list: Vec<AffineFunctional> = walls.keys().cloned().collect();
    if let SimpleSystemReport::Rejected { reason, pair, .. } = validate_simple_system(space, &list) {
        return Err(Error::Inconsistent(format!("walls rejected ({reason}) at {pair:?}")));
    }
    let doubled: Vec<usize> = walls.values().enumerate().filter(|(_, &d)| d).map(|(i, _)| i).collect();
    let rs = root_system_from_subset(space, &list, &l.lattice, &doubled)?;
    for f in &l.faces {
        let b = AffinePoint::new(l.polytope.barycenter(&f.vertices));
        let mut here: Vec<AffineFunctional> =
            rs.simple_roots.iter().filter(|r| eval(r, &b.coords).is_zero()).cloned().collect();
        here.sort();
        let mut want = f.simple_roots.clone();
        want.sort();
        if here != want {
            return Err(Error::Inconsistent(format!(
                "glued system differs from the local data on face {:?}",
                f.vertices
            )));
        }
    }
    Ok(GlueOutcome { root_system: rs, walls: list, doubled })
}

/// The subset lattice used by the round-trip property: all `I ⊆ Σ^a`.
pub fn all_subsets(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << items.len()) {
        out.push(items.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &s)| s).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{qf, qvec};

    fn line2() -> MetricSpace {
        MetricSpace::new(vec![qvec(&[2])], vec![q(1)]).unwrap()
    }

    #[test]
    fn a1_ambiguity() {
        let sp = line2();
        let alpha = AffineFunctional::new(qvec(&[1]), q(0));
        // Λ = Zω with ω = α/2: the primitive wall is ω and ⟨ω, ω^∨⟩ = 2
        let omega_lat = Lattice::new(1, &[vec![qf(1, 2)]]).unwrap();
        let pi = primitive_wall(&alpha, &omega_lat).unwrap();
        assert_eq!(pi.grad(), &[qf(1, 2)][..]);
        assert_eq!(ambiguous_reflections(&sp, &[pi], &omega_lat).unwrap(), vec![0]);
        let root_lat = Lattice::new(1, &[qvec(&[1])]).unwrap();
        assert_eq!(ambiguous_reflections(&sp, std::slice::from_ref(&alpha), &root_lat).unwrap(), vec![0]);
        assert!(ambiguous_reflections(&sp, &[alpha.scale(&q(2))], &root_lat).is_err());
    }

    #[test]
    fn a1_subset_construction() {
        let sp = line2();
        let pi = AffineFunctional::new(qvec(&[1]), q(0));
        let lat = Lattice::new(1, &[qvec(&[1])]).unwrap();
        let rs = root_system_from_subset(&sp, std::slice::from_ref(&pi), &lat, &[0]).unwrap();
        assert_eq!(rs.simple_roots, vec![pi.scale(&q(2))]);
        assert_eq!(sigma_a_of_phi(&rs), vec![0]);
        let rs = root_system_from_subset(&sp, &[pi], &lat, &[]).unwrap();
        assert!(sigma_a_of_phi(&rs).is_empty());
    }

    #[test]
    fn simple_system_angles() {
        let e = MetricSpace::euclidean(2);
        let one = validate_simple_system(&e, &[AffineFunctional::new(qvec(&[1, 0]), q(0))]);
        assert!(one.is_accepted());
        // 120 degrees: (1,0) and (-1/2, √3/2) realized with gram of A2
        let a2 = MetricSpace::new(vec![qvec(&[2, -1]), qvec(&[-1, 2])], vec![]).unwrap();
        let fs = [AffineFunctional::new(qvec(&[1, 0]), q(0)), AffineFunctional::new(qvec(&[0, 1]), q(0))];
        assert!(validate_simple_system(&a2, &fs).is_accepted());
        // 45 degrees
        let fs = [AffineFunctional::new(qvec(&[1, 0]), q(0)), AffineFunctional::new(qvec(&[1, 1]), q(0))];
        assert!(!validate_simple_system(&e, &fs).is_accepted());
    }

    #[test]
    fn glue_recovers_alcove_systems() {
        use crate::rootsys::TypeSpec;
        for t in ["A2~1", "C2~1", "G2~1", "A2^(2)", "A1~1"] {
            let rs = AffineRootSystem::build_from_type(&[TypeSpec::parse(t).unwrap()]).unwrap();
            let verts: Vec<Vec<Q>> = rs.vertices().unwrap().into_iter().map(|v| v.coords).collect();
            let poly = Polytope::new(&verts).unwrap();
            let vsys: Vec<Vec<AffineFunctional>> = poly
                .vertices
                .iter()
                .map(|v| rs.simple_roots.iter().filter(|r| eval(r, v).is_zero()).cloned().collect())
                .collect();
            let l = LocalRootSystem::from_vertex_systems(rs.space.clone(), poly, rs.lattice.clone(), &vsys).unwrap();
            let out = glue_local_system(&l).unwrap();
            let mut a = out.root_system.simple_roots.clone();
            let mut b = rs.simple_roots.clone();
            a.sort();
            b.sort();
            assert_eq!(a, b, "{t}");
        }
    }

    #[test]
    fn a2_root_lattice_has_no_ambiguity() {
        let a2 = MetricSpace::new(vec![qvec(&[2, -1]), qvec(&[-1, 2])], vec![]).unwrap();
        let lat = Lattice::new(2, &[qvec(&[1, 0]), qvec(&[0, 1])]).unwrap();
        let walls = [
            AffineFunctional::new(qvec(&[1, 0]), q(0)),
            AffineFunctional::new(qvec(&[0, 1]), q(0)),
            AffineFunctional::new(qvec(&[-1, -1]), q(1)),
        ];
        assert!(ambiguous_reflections(&a2, &walls, &lat).unwrap().is_empty());
    }
}
