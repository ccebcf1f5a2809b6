//! Twisted conjugation data of a simply connected compact group with a
//! twist: the affine root system on `𝔞 = 𝔱^τ`, its lattice `Λ_τ`, the
//! alcove, centralizer root data and tangent chambers.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dynkin::FiniteType;
use crate::euclid::{self, AffinePoint, Lattice};
use crate::linalg::{self, AbelianGroup, QMat};
use crate::polytope::Cone;
use crate::rational::{self, serde_q, Q, Z};
use crate::rootsys::{AffineRootSystem, Alcove, FiniteSubsystem, TypeSpec};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSpec {
    #[serde(rename = "type")]
    pub letter: char,
    pub rank: usize,
    #[serde(default = "one_q", with = "serde_q")]
    pub scale: Q,
}

fn one_q() -> Q {
    Q::one()
}

/// Diagram-automorphism order: one value for every cycle, or one per cycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiagramOrder {
    Uniform(usize),
    PerCycle(Vec<usize>),
}

impl Default for DiagramOrder {
    fn default() -> Self {
        DiagramOrder::Uniform(1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct TwistSpec {
    /// `permutation[i]` is the image of factor `i`; identity if empty.
    #[serde(default)]
    pub permutation: Vec<usize>,
    #[serde(default)]
    pub diagram_order: DiagramOrder,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub factors: Vec<FactorSpec>,
    #[serde(default)]
    pub twist: TwistSpec,
    /// Optional translation of the alcove (inner part of the twist), in
    /// point coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_vec")]
    pub translation: Option<Vec<Q>>,
}

mod opt_vec {
    use super::Q;
    use crate::rational::{fmt_q, serde_q::QString};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<Q>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.collect_seq(v.iter().map(fmt_q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Q>>, D::Error> {
        let v: Option<Vec<QString>> = Option::deserialize(d)?;
        match v {
            None => Ok(None),
            Some(v) => {
                v.iter().map(|x| x.parse().map_err(serde::de::Error::custom)).collect::<Result<Vec<Q>, _>>().map(Some)
            }
        }
    }
}

impl GroupSpec {
    /// A product of simple factors without twist.
    pub fn untwisted(factors: &[(char, usize)]) -> Self {
        GroupSpec {
            factors: factors.iter().map(|&(letter, rank)| FactorSpec { letter, rank, scale: Q::one() }).collect(),
            twist: TwistSpec::default(),
            translation: None,
        }
    }

    pub fn with_twist(mut self, permutation: Vec<usize>, order: usize) -> Self {
        self.twist = TwistSpec { permutation, diagram_order: DiagramOrder::Uniform(order) };
        self
    }

    pub fn with_scales(mut self, scales: &[Q]) -> Self {
        for (f, s) in self.factors.iter_mut().zip(scales) {
            f.scale = s.clone();
        }
        self
    }

    /// Cycles of the factor permutation, each starting at its least element.
    pub fn cycles(&self) -> Result<Vec<Vec<usize>>> {
        let n = self.factors.len();
        let perm: Vec<usize> =
            if self.twist.permutation.is_empty() { (0..n).collect() } else { self.twist.permutation.clone() };
        if perm.len() != n {
            return Err(Error::InvalidTwist("permutation length differs from factor count".into()));
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidTwist("not a permutation".into()));
            }
            seen[p] = true;
        }
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut i = perm[s];
            while i != s {
                seen[i] = true;
                c.push(i);
                i = perm[i];
            }
            cycles.push(c);
        }
        Ok(cycles)
    }

    /// One `TypeSpec` per twist cycle.
    pub fn type_specs(&self) -> Result<Vec<TypeSpec>> {
        let cycles = self.cycles()?;
        let orders: Vec<usize> = match &self.twist.diagram_order {
            DiagramOrder::Uniform(r) => vec![*r; cycles.len()],
            DiagramOrder::PerCycle(v) => {
                if v.len() != cycles.len() {
                    return Err(Error::InvalidTwist(format!("{} diagram orders for {} cycles", v.len(), cycles.len())));
                }
                v.clone()
            }
        };
        let mut out = Vec::new();
        for (c, &r) in cycles.iter().zip(&orders) {
            let f = &self.factors[c[0]];
            if c.iter().any(|&i| self.factors[i] != *f) {
                return Err(Error::InvalidTwist("permuted factors must be identical".into()));
            }
            if !(1..=3).contains(&r) {
                return Err(Error::InvalidTwist(format!("diagram order {r}")));
            }
            if f.letter == 'T' {
                if r != 1 {
                    return Err(Error::InvalidTwist("a torus factor has no diagram automorphism".into()));
                }
                out.push(TypeSpec { letter: 'T', rank: f.rank, twist: 0, scale: f.scale.clone(), cycle: 1 });
                continue;
            }
            crate::dynkin::AffineType::new(f.letter, f.rank, r).map_err(|e| Error::InvalidTwist(e.to_string()))?;
            out.push(TypeSpec { letter: f.letter, rank: f.rank, twist: r, scale: f.scale.clone(), cycle: c.len() });
        }
        Ok(out)
    }

    /// `dim K` (torus factors count their rank).
    pub fn group_dim(&self) -> usize {
        self.factors
            .iter()
            .map(|f| match f.letter {
                'T' => f.rank,
                l => FiniteType::new(l, f.rank).map_or(0, |t| t.group_dim()),
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistedDatum {
    pub group: GroupSpec,
    /// `Φ_τ` with lattice `Λ_τ`.
    pub root_system: AffineRootSystem,
    pub alcove: Alcove,
    /// Factor indices of each twist cycle, aligned with the components.
    pub cycles: Vec<Vec<usize>>,
}

impl TwistedDatum {
    pub fn lattice(&self) -> &Lattice {
        &self.root_system.lattice
    }
}

pub fn twisted_datum(g: &GroupSpec) -> Result<TwistedDatum> {
    let specs = g.type_specs()?;
    let mut rs = AffineRootSystem::build_from_type(&specs)?;
    if let Some(t) = &g.translation {
        crate::check_dim(rs.dim(), t.len())?;
        for r in rs.simple_roots.iter_mut() {
            r.constant = &r.constant + rational::dot(r.grad(), t);
        }
    }
    let alcove = rs.alcove();
    Ok(TwistedDatum { group: g.clone(), root_system: rs, alcove, cycles: g.cycles()? })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentralizerDatum {
    pub point: AffinePoint,
    pub subsystem: FiniteSubsystem,
    /// Canonical Dynkin types of the components of `Φ̄_τ(a)`.
    pub types: Vec<FiniteType>,
    /// `pr(Λ_τ) / ℤΦ̄_τ(a)`, with `pr` the orthogonal projection onto `ℝΦ̄_τ(a)`.
    pub lattice_invariants: AbelianGroup,
    /// Rank of the maximal torus (`dim 𝔞`).
    pub torus_rank: usize,
    pub label: String,
    /// Group name when the root datum determines it as a product.
    pub group_name: Option<String>,
}

impl CentralizerDatum {
    pub fn semisimple_rank(&self) -> usize {
        self.subsystem.rank()
    }

    /// `dim K_{aτ} = dim 𝔞 + #roots`.
    pub fn dim(&self) -> usize {
        self.torus_rank + self.types.iter().map(|t| 2 * t.positive_roots().len()).sum::<usize>()
    }
}

/// Coordinates of the orthogonal projection of `v` onto the span of the
/// rows of `basis`, in that basis.
pub fn projection_coords(space: &euclid::MetricSpace, basis: &[Vec<Q>], v: &[Q]) -> Vec<Q> {
    let m: QMat = basis.iter().map(|b| basis.iter().map(|c| space.pair(b, c)).collect()).collect();
    let rhs: Vec<Q> = basis.iter().map(|b| space.pair(b, v)).collect();
    let inv = linalg::inverse(&m).expect("independent basis");
    linalg::mat_vec(&inv, &rhs)
}

fn fundamental_weights(t: &FiniteType) -> QMat {
    let a: QMat = t.cartan().iter().map(|r| r.iter().map(|&x| rational::q(x)).collect()).collect();
    linalg::inverse(&a).expect("finite Cartan matrices are invertible")
}

/// Name of the compact group with root system `t` and character lattice
/// `lat` (in simple-root coordinates, Bourbaki order).
pub fn component_group_name(t: &FiniteType, lat: &Lattice) -> String {
    let r = t.rank;
    let roots = Lattice::standard(r);
    let k = euclid::lattice_quotient(lat, &roots).ok().and_then(|g| g.order()).unwrap_or_else(Z::one);
    let weights = Lattice::new(r, &fundamental_weights(t)).expect("rank matches");
    let c = euclid::lattice_quotient(&weights, &roots).ok().and_then(|g| g.order()).unwrap_or_else(Z::one);
    let f = &c / &k;
    let sc = f.is_one();
    let ad = f == c;
    let n = r;
    match t.letter {
        'A' if n == 1 => {
            if sc {
                "SU(2)".into()
            } else {
                "SO(3)".into()
            }
        }
        'A' if n == 3 && f == Z::from(2) => "SO(6)".into(),
        'A' if sc => format!("SU({})", n + 1),
        'A' if ad => format!("PSU({})", n + 1),
        'A' => format!("SU({})/μ{}", n + 1, f),
        'B' => {
            if sc {
                format!("Spin({})", 2 * n + 1)
            } else {
                format!("SO({})", 2 * n + 1)
            }
        }
        'C' if sc => format!("Sp({})", 2 * n),
        'C' if n == 2 => "SO(5)".into(),
        'C' => format!("PSp({})", 2 * n),
        'D' if sc => format!("Spin({})", 2 * n),
        'D' if ad => format!("PSO({})", 2 * n),
        'D' => {
            let w1 = fundamental_weights(t)[0].clone();
            if lat.contains(&w1) {
                format!("SO({})", 2 * n)
            } else {
                format!("HSpin({})", 2 * n)
            }
        }
        'E' if sc => format!("E{n}"),
        'E' => format!("E{n}/μ{f}"),
        l => format!("{l}{n}"),
    }
}

pub fn centralizer_datum(d: &TwistedDatum, a: &AffinePoint) -> Result<CentralizerDatum> {
    centralizer_for(&d.root_system, &d.root_system.lattice, a)
}

/// Centralizer data for an arbitrary system and lattice.
pub fn centralizer_for(rs: &AffineRootSystem, lattice: &Lattice, a: &AffinePoint) -> Result<CentralizerDatum> {
    let sub = rs.stabilizer_roots(a)?;
    let space = &rs.space;
    let n = rs.dim();
    let basis: QMat = sub.roots.iter().map(|r| r.grad().to_vec()).collect();
    let k = basis.len();
    let types: Vec<FiniteType> = sub.types.iter().map(|(t, _)| t.canonical()).collect();
    let (invariants, group_name) = if k == 0 {
        (AbelianGroup::trivial(), Some(format!("T^{n}")))
    } else {
        let pr: QMat = lattice.generators.iter().map(|v| projection_coords(space, &basis, v)).collect();
        let pr_lat = Lattice::new(k, &pr)?;
        let inv = euclid::lattice_quotient(&pr_lat, &Lattice::standard(k))?;
        // per-component names when everything splits
        let split_torus = lattice.generators.iter().all(|v| {
            let c = projection_coords(space, &basis, v);
            lattice.contains(&linalg::vec_mat(&c, &basis, n))
        });
        let mut names = Vec::new();
        let mut comp_index = Z::one();
        let mut comps = Vec::new();
        for (t, order) in &sub.types {
            let proj: QMat = pr.iter().map(|c| order.iter().map(|&i| c[i].clone()).collect()).collect();
            let cl = Lattice::new(t.rank, &proj)?;
            comp_index *= euclid::lattice_quotient(&cl, &Lattice::standard(t.rank))?.order().unwrap_or_else(Z::one);
            comps.push((*t, cl));
        }
        let split = inv.order() == Some(comp_index);
        comps.sort_by_key(|a| a.0);
        for (t, cl) in &comps {
            names.push(component_group_name(t, cl));
        }
        if n > k {
            names.push(format!("T^{}", n - k));
        }
        let name = (split && split_torus).then(|| names.join("×"));
        (inv, name)
    };
    let label = format!("{} | {}", crate::dynkin::product_name(&types), invariants);
    Ok(CentralizerDatum {
        point: a.clone(),
        subsystem: sub,
        types,
        lattice_invariants: invariants,
        torus_rank: n,
        label,
        group_name,
    })
}

/// `ℝ_{≥0}(𝒜 − a)` as a cone of vectors: `⟨ᾱ_i, t⟩ ≥ 0` for the walls
/// through `a`.
pub fn tangent_cone_chamber(d: &TwistedDatum, a: &AffinePoint) -> Result<Cone> {
    let rs = &d.root_system;
    if !rs.in_alcove(a)? {
        return Err(Error::OutsideAlcove(rational::fmt_vec(&a.coords)));
    }
    let walls = rs.walls_through(a)?;
    Ok(chamber_cone(rs, &walls))
}

/// The cone `{t : ⟨ᾱ_i, t⟩ ≥ 0, i ∈ walls}` for independent walls.
pub fn chamber_cone(rs: &AffineRootSystem, walls: &[usize]) -> Cone {
    let n = rs.dim();
    let rows: QMat = walls.iter().map(|&i| rs.space.lower(rs.simple_roots[i].grad())).collect();
    let mut gens: QMat = Vec::new();
    for j in 0..rows.len() {
        let e: Vec<Q> = (0..rows.len()).map(|i| if i == j { Q::one() } else { Q::zero() }).collect();
        gens.push(linalg::solve(&rows, &e, n).expect("independent walls"));
    }
    let lin = if rows.is_empty() { linalg::identity(n) } else { linalg::nullspace(&rows, n) };
    for l in lin {
        gens.push(rational::neg_vec(&l));
        gens.push(l);
    }
    Cone::from_generators(n, &gens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{qf, qvec};

    #[test]
    fn su_n_untwisted() {
        let d = twisted_datum(&GroupSpec::untwisted(&[('A', 3)])).unwrap();
        assert_eq!(d.root_system.components[0].name, "A3^(1)");
    }

    #[test]
    fn su_odd_outer() {
        let d = twisted_datum(&GroupSpec::untwisted(&[('A', 4)]).with_twist(vec![0], 2)).unwrap();
        assert_eq!(d.root_system.components[0].name, "A4^(2)");
        assert_eq!(d.root_system.components[0].labels, vec![1, 2, 2]);
    }

    #[test]
    fn swap_gives_pullback() {
        let g = GroupSpec::untwisted(&[('A', 1), ('A', 1)]).with_twist(vec![1, 0], 1);
        let d = twisted_datum(&g).unwrap();
        let rs = &d.root_system;
        assert_eq!(rs.dim(), 1);
        // (2^*α)(a) = α(2a)/2: constant halves
        assert_eq!(rs.simple_roots[0].constant, qf(1, 2));
        assert_eq!(rs.components[0].name, "2^*A1^(1)");
    }

    #[test]
    fn a2_twisted_endpoints() {
        let d = twisted_datum(&GroupSpec::untwisted(&[('A', 2)]).with_twist(vec![0], 2)).unwrap();
        let v = d.alcove.vertices.clone().unwrap();
        let mut names: Vec<String> = v.iter().map(|p| centralizer_datum(&d, p).unwrap().group_name.unwrap()).collect();
        names.sort();
        assert_eq!(names, vec!["SO(3)", "SU(2)"]);
    }

    #[test]
    fn chamber_examples() {
        let d = twisted_datum(&GroupSpec::untwisted(&[('A', 1)])).unwrap();
        let c = tangent_cone_chamber(&d, &AffinePoint::new(qvec(&[0]))).unwrap();
        assert!(c.contains(&qvec(&[1])) && !c.contains(&qvec(&[-1])));
        let c = tangent_cone_chamber(&d, &AffinePoint::new(vec![qf(1, 2)])).unwrap();
        assert!(c.is_full_span());
        assert!(tangent_cone_chamber(&d, &AffinePoint::new(qvec(&[2]))).is_err());
    }

    #[test]
    fn invalid_twists() {
        assert!(twisted_datum(&GroupSpec::untwisted(&[('B', 3)]).with_twist(vec![0], 2)).is_err());
        assert!(twisted_datum(&GroupSpec::untwisted(&[('A', 1), ('A', 2)]).with_twist(vec![1, 0], 1)).is_err());
        assert!(twisted_datum(&GroupSpec::untwisted(&[('A', 1)]).with_twist(vec![1], 1)).is_err());
    }
}
