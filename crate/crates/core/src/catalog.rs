//! Catalog of local models: smooth affine spherical varieties keyed by
//! their weight monoids.
//!
//! Two kinds of entries exist. Rank-one entries describe varieties for a
//! centralizer with a single simple root, in abstract lattice coordinates
//! together with the pairing against the coroot. Levi entries describe
//! varieties for semisimple centralizers by Hilbert bases in
//! fundamental-weight coordinates, either explicitly or as a family over a
//! Dynkin type.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dynkin::{self, FiniteType};
use crate::linalg;
use crate::rational::{self, Q, Z};
use crate::{Error, Result};

/// Environment variable naming a catalog file that replaces the bundled one.
pub const CATALOG_ENV: &str = "QHAM_CATALOG";

const BUNDLED: &str = include_str!("../data/catalog.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub min: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankOneEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<Parameter>,
    /// Hilbert basis of the weight monoid in abstract lattice coordinates.
    pub basis: Vec<Vec<String>>,
    /// Linear form giving the pairing with the coroot.
    pub pairing: Vec<String>,
    /// The simple root in abstract coordinates, when it lies in the lattice span.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<Vec<String>>,
    /// Spherical roots in abstract coordinates; absent when not recorded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spherical_roots: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub note: String,
}

/// A rank-one entry with its parameter substituted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankOneModel {
    pub name: String,
    pub basis: Vec<Vec<Z>>,
    pub pairing: Vec<Q>,
    pub root: Option<Vec<Q>>,
    pub spherical_roots: Option<Vec<Vec<Q>>>,
}

impl RankOneModel {
    pub fn rank(&self) -> usize {
        self.pairing.len()
    }

    pub fn pair(&self, v: &[Q]) -> Q {
        rational::dot(&self.pairing, v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Family {
    /// Dynkin letter, or `*` for any type.
    pub letter: char,
    pub min_rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_rank: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightRule {
    /// `{ω₁}`.
    First,
    /// All fundamental weights.
    All,
    /// `{ω₁, …, ω_{n−1}, 2ω_n}`.
    LastDoubled,
    /// `{(ω_i, ω_i)}` on two copies of the same type.
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootRule {
    None,
    /// `α_i + α_{i+1}` along the Dynkin chain.
    AdjacentSums,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SphericalRoots {
    Rule(RootRule),
    /// Simple-root coordinates, concatenated over the factors.
    Explicit(Vec<Vec<String>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeviEntry {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    /// Explicit factor types such as `C2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levi: Option<Vec<String>>,
    /// Number of identical factors of a family.
    #[serde(default = "one_usize")]
    pub copies: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightRule>,
    /// Explicit Hilbert basis in fundamental-weight coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spherical_roots: Option<SphericalRoots>,
    #[serde(default)]
    pub note: String,
}

fn one_usize() -> usize {
    1
}

/// A Levi entry instantiated on concrete factor types.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeviModel {
    pub name: String,
    pub types: Vec<FiniteType>,
    /// Hilbert basis in fundamental-weight coordinates, concatenated.
    pub basis: Vec<Vec<Z>>,
    /// Spherical roots in simple-root coordinates, concatenated.
    pub spherical_roots: Option<Vec<Vec<Q>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub rank_one: Vec<RankOneEntry>,
    pub levi: Vec<LeviEntry>,
}

/// Evaluates `[-][coefficient]parameter` or a plain rational.
fn eval_expr(s: &str, param: Option<(&str, i64)>) -> Result<Q> {
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, t),
    };
    let value = match param {
        Some((name, v)) if body.ends_with(name) => {
            let coef = body[..body.len() - name.len()].trim();
            let c = if coef.is_empty() { Q::one() } else { rational::parse_q(coef)? };
            c * rational::q(v)
        }
        _ => rational::parse_q(body)?,
    };
    Ok(if neg { -value } else { value })
}

fn eval_row(row: &[String], param: Option<(&str, i64)>) -> Result<Vec<Q>> {
    row.iter().map(|s| eval_expr(s, param)).collect()
}

fn to_int_row(row: &[Q], what: &str) -> Result<Vec<Z>> {
    row.iter()
        .map(|x| {
            if x.is_integer() {
                Ok(x.to_integer())
            } else {
                Err(Error::Catalog(format!("{what}: non-integral entry {}", rational::fmt_q(x))))
            }
        })
        .collect()
}

/// Replaces `{key}` placeholders in a name.
pub fn fill_name(template: &str, values: &[(&str, String)]) -> String {
    let mut out = template.to_string();
    for (k, v) in values {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

/// Name of the compact simply connected group of a type.
pub fn compact_name(t: &FiniteType) -> String {
    let n = t.rank;
    match t.letter {
        'A' => format!("SU({})", n + 1),
        'B' => format!("Spin({})", 2 * n + 1),
        'C' => format!("Sp({})", 2 * n),
        'D' => format!("Spin({})", 2 * n),
        l => format!("{l}{n}"),
    }
}

impl RankOneEntry {
    /// Instances with parameter values up to `max_param`.
    pub fn instances(&self, max_param: i64) -> Result<Vec<RankOneModel>> {
        let values: Vec<Option<(&str, i64)>> = match &self.parameter {
            None => vec![None],
            Some(p) => (p.min..=max_param.max(p.min)).map(|v| Some((p.name.as_str(), v))).collect(),
        };
        let mut out = Vec::new();
        for val in values {
            let name = match val {
                Some((k, v)) => fill_name(&self.name, &[(k, v.to_string())]),
                None => self.name.clone(),
            };
            let basis =
                self.basis.iter().map(|r| to_int_row(&eval_row(r, val)?, &self.name)).collect::<Result<Vec<_>>>()?;
            let pairing = eval_row(&self.pairing, val)?;
            let root = self.root.as_ref().map(|r| eval_row(r, val)).transpose()?;
            let spherical_roots = self
                .spherical_roots
                .as_ref()
                .map(|rs| rs.iter().map(|r| eval_row(r, val)).collect::<Result<Vec<_>>>())
                .transpose()?;
            out.push(RankOneModel { name, basis, pairing, root, spherical_roots });
        }
        Ok(out)
    }
}

fn unit(n: usize, i: usize, k: i64) -> Vec<Z> {
    (0..n).map(|j| if j == i { Z::from(k) } else { Z::zero() }).collect()
}

fn parse_levi_type(s: &str) -> Result<FiniteType> {
    let (letter, rank, twist) = dynkin::parse_type(s)?;
    if twist.is_some() {
        return Err(Error::Catalog(format!("levi factor {s} is not of finite type")));
    }
    Ok(FiniteType::new(letter, rank)?.canonical())
}

impl LeviEntry {
    /// The factor types the entry applies to, if it is explicit.
    pub fn explicit_types(&self) -> Result<Option<Vec<FiniteType>>> {
        self.levi.as_ref().map(|l| l.iter().map(|s| parse_levi_type(s)).collect()).transpose()
    }

    /// Instantiates the entry on factors of the given types (in the order
    /// the entry prescribes), or `None` if the entry does not apply.
    pub fn instantiate(&self, types: &[FiniteType]) -> Result<Option<LeviModel>> {
        if let Some(explicit) = self.explicit_types()? {
            let mut a = explicit.clone();
            let mut b = types.to_vec();
            a.sort();
            b.sort();
            if a != b {
                return Ok(None);
            }
            let basis = self
                .basis
                .as_ref()
                .ok_or_else(|| Error::Catalog(format!("{}: explicit entry without basis", self.name)))?
                .iter()
                .map(|r| to_int_row(&eval_row(r, None)?, &self.name))
                .collect::<Result<Vec<_>>>()?;
            let roots = self.roots_for(&explicit)?;
            return Ok(Some(LeviModel { name: self.name.clone(), types: explicit, basis, spherical_roots: roots }));
        }
        let Some(fam) = &self.family else {
            return Err(Error::Catalog(format!("{}: neither family nor levi", self.name)));
        };
        if types.len() != self.copies || types.is_empty() {
            return Ok(None);
        }
        let t = types[0];
        if types.iter().any(|u| *u != t) {
            return Ok(None);
        }
        if fam.letter != '*' && fam.letter != t.letter {
            return Ok(None);
        }
        if t.rank < fam.min_rank || fam.max_rank.is_some_and(|m| t.rank > m) {
            return Ok(None);
        }
        let n = t.rank;
        let rule = self.weights.ok_or_else(|| Error::Catalog(format!("{}: family without weight rule", self.name)))?;
        let basis: Vec<Vec<Z>> = match rule {
            WeightRule::First => vec![unit(n, 0, 1)],
            WeightRule::All => (0..n).map(|i| unit(n, i, 1)).collect(),
            WeightRule::LastDoubled => (0..n).map(|i| unit(n, i, if i + 1 == n { 2 } else { 1 })).collect(),
            WeightRule::Diagonal => (0..n)
                .map(|i| {
                    let mut r = Vec::new();
                    for _ in 0..self.copies {
                        r.extend(unit(n, i, 1));
                    }
                    r
                })
                .collect(),
        };
        let name = fill_name(
            &self.name,
            &[
                ("rank", n.to_string()),
                ("rank+1", (n + 1).to_string()),
                ("2rank", (2 * n).to_string()),
                ("group", compact_name(&t)),
            ],
        );
        let roots = self.roots_for(types)?;
        Ok(Some(LeviModel { name, types: types.to_vec(), basis, spherical_roots: roots }))
    }

    fn roots_for(&self, types: &[FiniteType]) -> Result<Option<Vec<Vec<Q>>>> {
        let total: usize = types.iter().map(|t| t.rank).sum();
        match &self.spherical_roots {
            None => Ok(None),
            Some(SphericalRoots::Rule(RootRule::None)) => Ok(Some(Vec::new())),
            Some(SphericalRoots::Rule(RootRule::AdjacentSums)) => {
                let mut out = Vec::new();
                let mut offset = 0;
                for t in types {
                    for (i, j) in t.edges() {
                        let mut v = vec![Q::zero(); total];
                        v[offset + i] = Q::one();
                        v[offset + j] = Q::one();
                        out.push(v);
                    }
                    offset += t.rank;
                }
                Ok(Some(out))
            }
            Some(SphericalRoots::Explicit(rows)) => {
                rows.iter().map(|r| eval_row(r, None)).collect::<Result<Vec<_>>>().map(Some)
            }
        }
    }
}

impl Catalog {
    pub fn bundled() -> Catalog {
        Catalog::from_json(BUNDLED).expect("bundled catalog is valid")
    }

    /// The catalog named by `QHAM_CATALOG`, or the bundled one.
    pub fn load() -> Result<Catalog> {
        match std::env::var_os(CATALOG_ENV) {
            Some(path) => {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Catalog(format!("cannot read {}: {e}", path.to_string_lossy())))?;
                Catalog::from_json(&text)
            }
            None => Ok(Catalog::bundled()),
        }
    }

    pub fn from_json(text: &str) -> Result<Catalog> {
        let c: Catalog = serde_json::from_str(text).map_err(|e| Error::Catalog(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Checks unique names, consistent dimensions, `c(β) = 2` and that every
    /// basis is the Hilbert basis of a saturated monoid generating its lattice.
    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        for n in self.rank_one.iter().map(|e| &e.name).chain(self.levi.iter().map(|e| &e.name)) {
            if !names.insert(n.clone()) {
                return Err(Error::Catalog(format!("duplicate entry {n}")));
            }
        }
        for e in &self.rank_one {
            let top = e.parameter.as_ref().map_or(0, |p| p.min + 3);
            for m in e.instances(top)? {
                let r = m.rank();
                if m.basis.iter().any(|b| b.len() != r) {
                    return Err(Error::Catalog(format!("{}: basis rows of the wrong length", m.name)));
                }
                if let Some(b) = &m.root {
                    if b.len() != r || m.pair(b) != rational::q(2) {
                        return Err(Error::Catalog(format!("{}: root must pair to 2", m.name)));
                    }
                }
                check_saturated(&m.name, &m.basis, r)?;
            }
        }
        for e in &self.levi {
            if e.family.is_some() == e.levi.is_some() {
                return Err(Error::Catalog(format!("{}: give exactly one of family and levi", e.name)));
            }
            if let Some(types) = e.explicit_types()? {
                let m = e.instantiate(&types)?.expect("explicit entry applies to its own types");
                let r: usize = types.iter().map(|t| t.rank).sum();
                if m.basis.iter().any(|b| b.len() != r) {
                    return Err(Error::Catalog(format!("{}: basis rows of the wrong length", e.name)));
                }
                if m.spherical_roots.as_ref().is_some_and(|s| s.iter().any(|b| b.len() != r)) {
                    return Err(Error::Catalog(format!("{}: spherical roots of the wrong length", e.name)));
                }
                check_saturated(&e.name, &m.basis, r)?;
            } else if e.weights.is_none() {
                return Err(Error::Catalog(format!("{}: family without weight rule", e.name)));
            }
        }
        Ok(())
    }

    /// All rank-one models of lattice rank at most `rank`.
    pub fn rank_one_models(&self, rank: usize, max_param: i64) -> Result<Vec<RankOneModel>> {
        let mut out = Vec::new();
        for e in &self.rank_one {
            for m in e.instances(max_param)? {
                if m.rank() <= rank {
                    out.push(m);
                }
            }
        }
        Ok(out)
    }

    /// Levi models applying to the given factor types, in catalog order.
    pub fn levi_models(&self, types: &[FiniteType]) -> Result<Vec<LeviModel>> {
        let mut out = Vec::new();
        for e in &self.levi {
            if let Some(m) = e.instantiate(types)? {
                out.push(m);
            }
        }
        Ok(out)
    }
}

fn check_saturated(name: &str, basis: &[Vec<Z>], r: usize) -> Result<()> {
    // the monoid lives in the lattice its basis generates
    let lat = linalg::hnf_rows(basis);
    if lat.len() != r {
        return Err(Error::Catalog(format!("{name}: basis does not have full rank {r}")));
    }
    let lq = linalg::to_q(&lat);
    let coords: Vec<Vec<Q>> = basis
        .iter()
        .map(|b| linalg::coords_in(&lq, &b.iter().map(rational::qz).collect::<Vec<_>>()).expect("in span"))
        .collect();
    let mut a = crate::spherical::hilbert_basis(&coords, r)?;
    let mut b: Vec<Vec<Z>> = coords.iter().map(|c| c.iter().map(|x| x.to_integer()).collect()).collect();
    a.sort();
    b.sort();
    if a != b {
        return Err(Error::Catalog(format!("{name}: basis is not the Hilbert basis of its saturated monoid")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_catalog_validates() {
        let c = Catalog::bundled();
        assert!(c.rank_one.len() >= 9);
        let mu = c.rank_one_models(3, 4).unwrap();
        assert!(mu.iter().any(|m| m.name == "SL(2)/μ3"));
        assert!(mu.iter().any(|m| m.name == "SL(2)×^ℂ*ℂ_1"));
    }

    #[test]
    fn families_instantiate() {
        let c = Catalog::bundled();
        let a3 = FiniteType::new('A', 3).unwrap();
        let names: Vec<String> = c.levi_models(&[a3]).unwrap().into_iter().map(|m| m.name).collect();
        assert_eq!(names, vec!["ℂ^4", "X_4"]);
        let x4 = c.levi_models(&[a3]).unwrap().remove(1);
        assert_eq!(x4.spherical_roots.unwrap().len(), 2);
        let c2 = FiniteType::new('C', 2).unwrap();
        let names: Vec<String> = c.levi_models(&[c2]).unwrap().into_iter().map(|m| m.name).collect();
        assert_eq!(names, vec!["ℂ^4", "Y_2", "Z_2"]);
        let a1 = FiniteType::new('A', 1).unwrap();
        let d = c.levi_models(&[a1, a1]).unwrap();
        assert_eq!(d[0].name, "D(SU(2))");
        assert_eq!(d[0].basis, vec![rational::zvec(&[1, 1])]);
    }

    #[test]
    fn rejects_bad_catalogs() {
        let dup = r#"{"rank_one":[{"name":"x","basis":[["1"]],"pairing":["1"]},
                     {"name":"x","basis":[["1"]],"pairing":["2"]}],"levi":[]}"#;
        assert!(Catalog::from_json(dup).is_err());
        let unsat =
            r#"{"rank_one":[{"name":"x","basis":[["1","0"],["1","3"],["1","1"]],"pairing":["1","0"]}],"levi":[]}"#;
        assert!(Catalog::from_json(unsat).is_err());
        let not_hb =
            r#"{"rank_one":[{"name":"x","basis":[["1","0"],["0","1"],["1","1"]],"pairing":["1","0"]}],"levi":[]}"#;
        assert!(Catalog::from_json(not_hb).is_err());
        let bad_root = r#"{"rank_one":[{"name":"x","basis":[["1"]],"pairing":["1"],"root":["1"]}],"levi":[]}"#;
        assert!(Catalog::from_json(bad_root).is_err());
    }

    #[test]
    fn expressions() {
        assert_eq!(eval_expr("-n", Some(("n", 3))).unwrap(), rational::q(-3));
        assert_eq!(eval_expr("2m", Some(("m", 3))).unwrap(), rational::q(6));
        assert_eq!(eval_expr("1/2", None).unwrap(), rational::qf(1, 2));
    }
}
