//! Momentum pairs `(𝒫, Λ)`: a polytope inside the alcove of a twisted group
//! together with a lattice of translations, and their JSON description.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dynkin::{AffineType, FiniteType};
use crate::euclid::{AffinePoint, Lattice};
use crate::linalg::{self, QMat};
use crate::polytope::Polytope;
use crate::rational::{self, serde_q, Q};
use crate::rootsys::TypeSpec;
use crate::twist::{self, GroupSpec, TwistedDatum};
use crate::{Error, Result};

/// How coordinates of points and vectors are read, block by block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Coordinates {
    /// Expansion `Σ c_i α_i` in the simple roots.
    #[default]
    SimpleRoots,
    /// Expansion `Σ c_i ω_i` in the fundamental weights.
    FundamentalWeights,
    /// Standard `ε` coordinates of the classical realizations and `G₂`, `F₄`.
    Epsilon,
    /// Raw values: points by the simple-root values `α_i(x)`, vectors in the
    /// simple-root basis.
    Values,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeSpec {
    #[serde(with = "serde_q::mat")]
    pub vertices: Vec<Vec<Q>>,
    #[serde(default)]
    pub coordinates: Coordinates,
}

/// Named lattices of the group datum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedLattice {
    /// Weight lattice of the gradients.
    Weight,
    /// Root lattice of the gradients.
    Root,
    /// The character lattice `Λ_τ` of the group datum.
    Characters,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairLatticeSpec {
    #[serde(default, with = "serde_q::mat", skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<Vec<Q>>,
    /// Defaults to the polytope's coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Coordinates>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub named: Option<NamedLattice>,
    /// Scales a named lattice.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_q")]
    pub multiple: Option<Q>,
}

mod opt_q {
    use super::Q;
    use crate::rational::{fmt_q, serde_q::QString};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Q>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_str(&fmt_q(x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Q>, D::Error> {
        let v: Option<QString> = Option::deserialize(d)?;
        v.map(|x| x.parse().map_err(serde::de::Error::custom)).transpose()
    }
}

impl PairLatticeSpec {
    pub fn explicit(generators: Vec<Vec<Q>>, coordinates: Coordinates) -> Self {
        PairLatticeSpec { generators, coordinates: Some(coordinates), named: None, multiple: None }
    }

    pub fn named(named: NamedLattice, multiple: i64) -> Self {
        PairLatticeSpec {
            generators: Vec::new(),
            coordinates: None,
            named: Some(named),
            multiple: (multiple != 1).then(|| rational::q(multiple)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSpec {
    pub group: GroupSpec,
    pub polytope: PolytopeSpec,
    pub lattice: PairLatticeSpec,
}

/// A polytope in the alcove (point coordinates) and a lattice of vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentumPair {
    pub datum: TwistedDatum,
    pub polytope: Polytope,
    pub lattice: Lattice,
}

/// One coordinate block of a group datum.
struct Block {
    offset: usize,
    dim: usize,
    /// Finite system whose simple roots form the block's vector basis.
    seed: Option<FiniteType>,
}

fn blocks(specs: &[TypeSpec]) -> Result<Vec<Block>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for s in specs {
        let seed = match (s.letter, s.twist) {
            ('T', _) => None,
            (l, 0) => Some(FiniteType::new(l, s.rank)?),
            (l, r) => Some(AffineType::new(l, s.rank, r)?.seed().finite),
        };
        let dim = seed.map_or(s.rank, |t| t.rank);
        out.push(Block { offset, dim, seed });
        offset += dim;
    }
    Ok(out)
}

/// Simple roots of a finite type in `ε` coordinates, and whether vectors
/// are projected to the sum-zero hyperplane first.
pub fn epsilon_realization(t: &FiniteType) -> Result<(QMat, bool)> {
    let n = t.rank;
    let e = |i: usize, len: usize| -> Vec<Q> { (0..len).map(|k| if k == i { Q::one() } else { Q::zero() }).collect() };
    let diff = |i: usize, j: usize, len: usize| rational::sub_vec(&e(i, len), &e(j, len));
    match t.letter {
        'A' => Ok(((0..n).map(|i| diff(i, i + 1, n + 1)).collect(), true)),
        'B' | 'C' | 'D' => {
            let mut rows: QMat = (0..n.saturating_sub(1)).map(|i| diff(i, i + 1, n)).collect();
            let last = match t.letter {
                'B' => e(n - 1, n),
                'C' => rational::scale_vec(&rational::q(2), &e(n - 1, n)),
                _ => rational::add_vec(&e(n - 2, n), &e(n - 1, n)),
            };
            rows.push(last);
            Ok((rows, false))
        }
        'G' => Ok((vec![rational::qvec(&[1, -1, 0]), rational::qvec(&[-2, 1, 1])], true)),
        'F' => {
            let h = rational::qf(1, 2);
            Ok((
                vec![
                    rational::qvec(&[0, 1, -1, 0]),
                    rational::qvec(&[0, 0, 1, -1]),
                    rational::qvec(&[0, 0, 0, 1]),
                    vec![h.clone(), -h.clone(), -h.clone(), -h],
                ],
                false,
            ))
        }
        _ => Err(Error::Parse(format!("no epsilon coordinates for type {t}"))),
    }
}

fn block_width(b: &Block, c: Coordinates) -> Result<usize> {
    match (c, b.seed) {
        (Coordinates::Epsilon, Some(t)) => Ok(epsilon_realization(&t)?.0[0].len()),
        _ => Ok(b.dim),
    }
}

fn sub_gram(d: &TwistedDatum, b: &Block) -> QMat {
    d.root_system.space.gram[b.offset..b.offset + b.dim]
        .iter()
        .map(|r| r[b.offset..b.offset + b.dim].to_vec())
        .collect()
}

/// Splits a flat coordinate list into blocks.
fn split<'a>(v: &'a [Q], widths: &[usize]) -> Result<Vec<&'a [Q]>> {
    let total: usize = widths.iter().sum();
    crate::check_dim(total, v.len())?;
    let mut out = Vec::new();
    let mut k = 0;
    for &w in widths {
        out.push(&v[k..k + w]);
        k += w;
    }
    Ok(out)
}

fn block_vector(d: &TwistedDatum, b: &Block, c: Coordinates, v: &[Q]) -> Result<Vec<Q>> {
    let Some(t) = b.seed else { return Ok(v.to_vec()) };
    match c {
        Coordinates::SimpleRoots | Coordinates::Values => Ok(v.to_vec()),
        Coordinates::FundamentalWeights => {
            let g = sub_gram(d, b);
            let cartan: QMat = crate::dynkin::cartan_of(&g, &linalg::identity(b.dim))
                .iter()
                .map(|r| r.iter().map(|&x| rational::q(x)).collect())
                .collect();
            let w = linalg::inverse(&cartan).expect("finite Cartan matrix");
            Ok(linalg::vec_mat(v, &w, b.dim))
        }
        Coordinates::Epsilon => {
            let (m, sum_zero) = epsilon_realization(&t)?;
            let mut rhs = v.to_vec();
            if sum_zero {
                let mean = rhs.iter().fold(Q::zero(), |a, x| a + x) / rational::q(rhs.len() as i64);
                rhs = rhs.iter().map(|x| x - &mean).collect();
            }
            linalg::solve(&linalg::transpose(&m), &rhs, b.dim)
                .ok_or_else(|| Error::Parse(format!("{} is not in the span of the roots", rational::fmt_vec(v))))
        }
    }
}

fn block_point(d: &TwistedDatum, b: &Block, c: Coordinates, v: &[Q]) -> Result<Vec<Q>> {
    match (c, b.seed) {
        (Coordinates::Values, _) => Ok(v.to_vec()),
        (Coordinates::Epsilon, Some(t)) => Ok(linalg::mat_vec(&epsilon_realization(&t)?.0, v)),
        // α_j(Σ c_i ω_i) = c_j |α_j|²/2 in the normalized metric, so that
        // rescaling a factor does not move its alcove
        (Coordinates::FundamentalWeights, Some(t)) => {
            Ok(v.iter().zip(t.lengths()).map(|(c, l)| c * l / rational::q(2)).collect())
        }
        _ => {
            let vec = block_vector(d, b, c, v)?;
            Ok(linalg::mat_vec(&sub_gram(d, b), &vec))
        }
    }
}

/// Converts a flat vector given in `c` coordinates to the datum's basis.
pub fn vector_from(d: &TwistedDatum, c: Coordinates, v: &[Q]) -> Result<Vec<Q>> {
    let bs = blocks(&d.group.type_specs()?)?;
    let widths: Vec<usize> = bs.iter().map(|b| block_width(b, c)).collect::<Result<_>>()?;
    let parts = split(v, &widths)?;
    let mut out = Vec::new();
    for (b, p) in bs.iter().zip(parts) {
        out.extend(block_vector(d, b, c, p)?);
    }
    Ok(out)
}

/// Converts a flat point given in `c` coordinates to point coordinates.
pub fn point_from(d: &TwistedDatum, c: Coordinates, v: &[Q]) -> Result<AffinePoint> {
    let bs = blocks(&d.group.type_specs()?)?;
    let widths: Vec<usize> = bs.iter().map(|b| block_width(b, c)).collect::<Result<_>>()?;
    let parts = split(v, &widths)?;
    let mut out = Vec::new();
    for (b, p) in bs.iter().zip(parts) {
        out.extend(block_point(d, b, c, p)?);
    }
    Ok(AffinePoint::new(out))
}

impl PairSpec {
    pub fn build(&self) -> Result<MomentumPair> {
        let datum = twist::twisted_datum(&self.group)?;
        let rs = &datum.root_system;
        let mut points = Vec::new();
        for v in &self.polytope.vertices {
            let p = point_from(&datum, self.polytope.coordinates, v)?;
            if !rs.in_alcove(&p)? {
                return Err(Error::OutsideAlcove(rational::fmt_vec(&p.coords)));
            }
            points.push(p.coords);
        }
        if points.is_empty() {
            return Err(Error::Parse("polytope has no vertices".into()));
        }
        let polytope = Polytope::new(&points)?;
        let lattice = match self.lattice.named {
            Some(named) => {
                if !self.lattice.generators.is_empty() {
                    return Err(Error::Parse("lattice has both a name and generators".into()));
                }
                let base = match named {
                    NamedLattice::Weight => rs.weight_lattice()?,
                    NamedLattice::Root => rs.root_lattice()?,
                    NamedLattice::Characters => datum.lattice().clone(),
                };
                match &self.lattice.multiple {
                    Some(k) => base.scaled(k),
                    None => base,
                }
            }
            None => {
                let c = self.lattice.coordinates.unwrap_or(self.polytope.coordinates);
                let gens: QMat =
                    self.lattice.generators.iter().map(|g| vector_from(&datum, c, g)).collect::<Result<_>>()?;
                Lattice::new(rs.dim(), &gens)?
            }
        };
        Ok(MomentumPair { datum, polytope, lattice })
    }
}

impl MomentumPair {
    /// Direction vectors `G⁻¹(v − a)` from vertex `i` to the other vertices.
    pub fn vertex_vectors(&self, i: usize) -> Vec<Vec<Q>> {
        let ginv = linalg::inverse(&self.datum.root_system.space.gram).expect("positive definite");
        self.polytope.vertex_directions(i).iter().map(|d| linalg::mat_vec(&ginv, d)).collect()
    }

    /// Basis of the direction space of `𝒫` as vectors.
    pub fn direction_vectors(&self) -> QMat {
        let ginv = linalg::inverse(&self.datum.root_system.space.gram).expect("positive definite");
        self.polytope.direction_space().iter().map(|d| linalg::mat_vec(&ginv, d)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{qf, qvec};

    #[test]
    fn fundamental_weight_points() {
        let g = GroupSpec::untwisted(&[('A', 2)]);
        let d = twist::twisted_datum(&g).unwrap();
        let p = point_from(&d, Coordinates::FundamentalWeights, &[qf(1, 2), q0()]).unwrap();
        assert_eq!(p.coords, vec![qf(1, 2), q0()]);
        let w = vector_from(&d, Coordinates::FundamentalWeights, &qvec(&[1, 0])).unwrap();
        assert_eq!(w, vec![qf(2, 3), qf(1, 3)]);
    }

    fn q0() -> Q {
        Q::zero()
    }

    #[test]
    fn epsilon_points_and_vectors() {
        let g = GroupSpec::untwisted(&[('C', 2)]);
        let d = twist::twisted_datum(&g).unwrap();
        // α₁ = ε₁ − ε₂, α₂ = 2ε₂
        let p = point_from(&d, Coordinates::Epsilon, &[qf(1, 4), q0()]).unwrap();
        assert_eq!(p.coords, vec![qf(1, 4), q0()]);
        let e1 = vector_from(&d, Coordinates::Epsilon, &qvec(&[1, 0])).unwrap();
        assert_eq!(e1, vec![qf(1, 1), qf(1, 2)]);
        // type A projects to the sum-zero hyperplane
        let g = GroupSpec::untwisted(&[('A', 1)]);
        let d = twist::twisted_datum(&g).unwrap();
        let v = vector_from(&d, Coordinates::Epsilon, &qvec(&[1, 0])).unwrap();
        assert_eq!(v, vec![qf(1, 2)]);
    }

    #[test]
    fn pair_json_round_trip() {
        let spec = PairSpec {
            group: GroupSpec::untwisted(&[('A', 2)]),
            polytope: PolytopeSpec {
                vertices: vec![qvec(&[0, 0]), qvec(&[1, 0])],
                coordinates: Coordinates::FundamentalWeights,
            },
            lattice: PairLatticeSpec::explicit(vec![qvec(&[1, 0])], Coordinates::FundamentalWeights),
        };
        let s = serde_json::to_string(&spec).unwrap();
        let back: PairSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
        let pair = spec.build().unwrap();
        assert_eq!(pair.lattice.rank(), 1);
    }

    #[test]
    fn outside_alcove_is_rejected() {
        let spec = PairSpec {
            group: GroupSpec::untwisted(&[('A', 1)]),
            polytope: PolytopeSpec { vertices: vec![qvec(&[2])], coordinates: Coordinates::FundamentalWeights },
            lattice: PairLatticeSpec::named(NamedLattice::Weight, 1),
        };
        assert!(matches!(spec.build(), Err(Error::OutsideAlcove(_))));
    }
}
