//! The bundled regression suite of momentum pairs with known verdicts.

use serde::{Deserialize, Serialize};

use qham::catalog::Catalog;
use qham::dynkin::FiniteType;
use qham::pair::{Coordinates, NamedLattice, PairLatticeSpec, PairSpec, PolytopeSpec};
use qham::rational::{q, qf, Q};
use qham::spherical::{self, Verdict};
use qham::twist::{self, GroupSpec};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub verdict: String,
    /// Local models, compared as a multiset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub models: Option<Vec<String>>,
    /// Type of the glued band root system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_type: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleEntry {
    pub name: String,
    pub spec: PairSpec,
    pub expected: Expected,
    /// Where the example comes from in the literature.
    pub locator: String,
    /// Whether the expected data was worked out by hand rather than quoted.
    pub derived: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleResult {
    pub name: String,
    pub locator: String,
    pub expected: Expected,
    pub verdict: String,
    pub models: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_type: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

fn spherical(models: Option<Vec<String>>) -> Expected {
    Expected { verdict: "Spherical".into(), models, band_type: None }
}

fn not_spherical() -> Expected {
    Expected { verdict: "NotSpherical".into(), models: None, band_type: None }
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn unit(n: usize, i: usize, k: i64) -> Vec<Q> {
    (0..n).map(|j| if j == i { q(k) } else { q(0) }).collect()
}

/// Alcove vertices of a group in point coordinates.
fn alcove_vertices(g: &GroupSpec) -> Vec<Vec<Q>> {
    let d = twist::twisted_datum(g).expect("valid example group");
    d.alcove.vertices.expect("compact alcove").into_iter().map(|p| p.coords).collect()
}

fn values(vertices: Vec<Vec<Q>>) -> PolytopeSpec {
    PolytopeSpec { vertices, coordinates: Coordinates::Values }
}

fn entry(name: String, spec: PairSpec, expected: Expected, locator: &str, derived: bool) -> ExampleEntry {
    ExampleEntry { name, spec, expected, locator: locator.into(), derived }
}

/// `−w₀` on the nodes of a simple type.
fn star(t: &FiniteType) -> Vec<usize> {
    let n = t.rank;
    match t.letter {
        'A' => (0..n).rev().collect(),
        'D' if n % 2 == 1 => {
            let mut s: Vec<usize> = (0..n).collect();
            s.swap(n - 2, n - 1);
            s
        }
        'E' if n == 6 => vec![5, 1, 4, 3, 2, 0],
        _ => (0..n).collect(),
    }
}

fn doubles() -> Vec<ExampleEntry> {
    let mut out = Vec::new();
    for (l, n) in [('A', 1), ('A', 2), ('C', 2), ('G', 2)] {
        let t = FiniteType::new(l, n).expect("valid");
        let s = star(&t);
        let base = alcove_vertices(&GroupSpec::untwisted(&[(l, n)]));
        let vertices: Vec<Vec<Q>> = base
            .iter()
            .map(|v| {
                let mut w = v.clone();
                w.extend(s.iter().map(|&j| v[j].clone()));
                w
            })
            .collect();
        let gens: Vec<Vec<Q>> = (0..n)
            .map(|i| {
                let mut g = unit(n, i, 1);
                g.extend(unit(n, s[i], 1));
                g
            })
            .collect();
        let models = (l, n) == ('A', 1);
        out.push(entry(
            format!("double {}", qham::catalog::compact_name(&t)),
            PairSpec {
                group: GroupSpec::untwisted(&[(l, n), (l, n)]),
                polytope: values(vertices),
                lattice: PairLatticeSpec::explicit(gens, Coordinates::FundamentalWeights),
            },
            spherical(models.then(|| strings(&["D(SU(2))", "D(SU(2))"]))),
            "Examples: doubles",
            false,
        ));
    }
    out.push(entry(
        "double SU(2), unequal factor scales".into(),
        PairSpec {
            group: GroupSpec::untwisted(&[('A', 1), ('A', 1)]).with_scales(&[q(1), q(2)]),
            polytope: values(vec![vec![q(0), q(0)], vec![q(1), q(1)]]),
            lattice: PairLatticeSpec::explicit(vec![vec![q(1), q(1)]], Coordinates::FundamentalWeights),
        },
        not_spherical(),
        "Examples: doubles, remark on the metric",
        false,
    ));
    out
}

fn rank_one() -> Vec<ExampleEntry> {
    let mut out = Vec::new();
    let su2 = [(1, "ℂ^2"), (2, "SO(3)/SO(2)"), (4, "SO(3)/O(2)")];
    for (k, model) in su2 {
        out.push(entry(
            format!("SU(2), alcove, {k}P"),
            PairSpec {
                group: GroupSpec::untwisted(&[('A', 1)]),
                polytope: values(vec![vec![q(0)], vec![q(1)]]),
                lattice: PairLatticeSpec::explicit(vec![vec![q(k)]], Coordinates::FundamentalWeights),
            },
            spherical(Some(strings(&[model, model]))),
            "Examples: groups of rank 1",
            false,
        ));
    }
    let g = GroupSpec::untwisted(&[('A', 2)]).with_twist(vec![0], 2);
    let cases: [(i64, Expected); 3] = [
        (1, spherical(Some(strings(&["ℂ^2", "SO(3)/SO(2)"])))),
        (2, spherical(Some(strings(&["SO(3)/SO(2)", "SO(3)/O(2)"])))),
        (4, not_spherical()),
    ];
    for (k, expected) in cases {
        out.push(entry(
            format!("SU(3) with outer twist, alcove, {k}P"),
            PairSpec {
                group: g.clone(),
                polytope: values(alcove_vertices(&g)),
                lattice: PairLatticeSpec::named(NamedLattice::Weight, k),
            },
            expected,
            "Examples: groups of rank 1, twisted case",
            false,
        ));
    }
    out
}

fn spinning_spheres() -> Vec<ExampleEntry> {
    (2..=5)
        .map(|n: usize| {
            let r = n - 1;
            let model = format!("ℂ^{n}");
            entry(
                format!("spinning {}-sphere", 2 * n),
                PairSpec {
                    group: GroupSpec::untwisted(&[('A', r)]),
                    polytope: values(vec![vec![q(0); r], unit(r, 0, 1)]),
                    lattice: PairLatticeSpec::explicit(vec![unit(r, 0, 1)], Coordinates::FundamentalWeights),
                },
                spherical(Some(vec![model.clone(), model])),
                "Examples: manifolds of rank 1",
                false,
            )
        })
        .collect()
}

fn grassmannians() -> Vec<ExampleEntry> {
    let mut out = Vec::new();
    for n in 2..=4usize {
        for k in 1..=n {
            let x = |m: usize| -> Vec<Q> { (0..n).map(|i| if i < m { qf(1, 2) } else { q(0) }).collect() };
            out.push(entry(
                format!("Sp({}) quaternionic Grassmannian Gr_{k}(ℍ^{})", 2 * n, n + 1),
                PairSpec {
                    group: GroupSpec::untwisted(&[('C', n)]),
                    polytope: PolytopeSpec { vertices: vec![x(k - 1), x(k)], coordinates: Coordinates::Epsilon },
                    lattice: PairLatticeSpec::explicit(vec![unit(n, k - 1, 1)], Coordinates::Epsilon),
                },
                spherical(Some(vec![format!("ℂ^{}", 2 * n - 2 * k + 2), format!("ℂ^{}", 2 * k)])),
                "Examples: manifolds of rank 1, quaternionic Grassmannians",
                false,
            ));
        }
    }
    out
}

/// Name of the glued band system of the surjective `SU(n)` pair.
pub fn su_band_type(n: usize) -> String {
    match n {
        2 => "∅".into(),
        _ if n % 2 == 1 => format!("A{}^(1)", n - 1),
        _ => format!("A{0}^(1)×A{0}^(1)", n / 2 - 1),
    }
}

fn surjective() -> Vec<ExampleEntry> {
    let mut out = Vec::new();
    for n in 2..=5usize {
        let g = GroupSpec::untwisted(&[('A', n - 1)]);
        let model = if n == 2 { "ℂ^2".to_string() } else { format!("X_{n}") };
        let mut e = spherical(Some(vec![model; n]));
        e.band_type = Some(su_band_type(n));
        out.push(entry(
            format!("SU({n}), surjective, free"),
            PairSpec {
                group: g.clone(),
                polytope: values(alcove_vertices(&g)),
                lattice: PairLatticeSpec::named(NamedLattice::Weight, 1),
            },
            e,
            "Examples: surjective momentum maps",
            false,
        ));
    }
    for n in 2..=3usize {
        let g = GroupSpec::untwisted(&[('C', n)]);
        out.push(entry(
            format!("Sp({}), surjective, free", 2 * n),
            PairSpec {
                group: g.clone(),
                polytope: values(alcove_vertices(&g)),
                lattice: PairLatticeSpec::named(NamedLattice::Weight, 1),
            },
            spherical(None),
            "Examples: surjective momentum maps",
            false,
        ));
    }
    for n in 1..=2usize {
        let g = GroupSpec::untwisted(&[('A', 2 * n)]).with_twist(vec![0], 2);
        out.push(entry(
            format!("SU({}) with outer twist, surjective, free", 2 * n + 1),
            PairSpec {
                group: g.clone(),
                polytope: values(alcove_vertices(&g)),
                lattice: PairLatticeSpec::named(NamedLattice::Weight, 1),
            },
            spherical(None),
            "Examples: surjective momentum maps, twisted case",
            false,
        ));
    }
    out
}

fn triangles() -> Vec<ExampleEntry> {
    let f = |a: i64, b: i64| qf(a, b);
    let su3 = GroupSpec::untwisted(&[('A', 2)]);
    let sp4 = GroupSpec::untwisted(&[('C', 2)]);
    let g2 = GroupSpec::untwisted(&[('G', 2)]);
    let t1 = vec![vec![f(1, 2), q(0)], vec![f(1, 2), f(1, 2)], vec![q(0), f(1, 2)]];
    let t2 = vec![vec![f(2, 3), q(0)], vec![f(1, 3), f(2, 3)], vec![q(0), f(1, 3)]];
    let t3 = vec![vec![f(1, 4), q(0)], vec![f(1, 2), f(1, 4)], vec![f(1, 4), f(1, 4)]];
    let t4 = vec![vec![f(1, 3), q(0)], vec![f(1, 2), f(1, 6)], vec![f(1, 6), f(1, 6)]];
    let t5 = vec![vec![q(0), f(1, 3)], vec![f(1, 9), f(1, 3)], vec![f(2, 9), q(0)]];
    let mk =
        |name: &str, g: &GroupSpec, pts: Vec<Vec<Q>>, coords: Coordinates, lat: NamedLattice, models: Option<&str>| {
            entry(
                name.into(),
                PairSpec {
                    group: g.clone(),
                    polytope: PolytopeSpec { vertices: pts, coordinates: coords },
                    lattice: PairLatticeSpec::named(lat, 1),
                },
                spherical(models.map(|m| vec![m.to_string(); 3])),
                "Examples: inscribed triangles",
                true,
            )
        };
    vec![
        mk(
            "SU(3) triangle of edge midpoints, P",
            &su3,
            t1.clone(),
            Coordinates::Values,
            NamedLattice::Weight,
            Some("SL(2)"),
        ),
        mk("SU(3) triangle of edge midpoints, R", &su3, t1, Coordinates::Values, NamedLattice::Root, Some("SL(2)/μ3")),
        mk("SU(3) rotated triangle, R", &su3, t2, Coordinates::Values, NamedLattice::Root, Some("SL(2)×^ℂ*ℂ_1")),
        mk("Sp(4) triangle of edge midpoints, R", &sp4, t3, Coordinates::Epsilon, NamedLattice::Root, None),
        mk("Sp(4) rotated triangle, R", &sp4, t4, Coordinates::Epsilon, NamedLattice::Root, None),
        mk("G2 triangle, R", &g2, t5, Coordinates::Values, NamedLattice::Root, None),
    ]
}

/// Every bundled example, in a fixed order.
pub fn all() -> Vec<ExampleEntry> {
    let mut out = doubles();
    out.extend(rank_one());
    out.extend(spinning_spheres());
    out.extend(grassmannians());
    out.extend(surjective());
    out.extend(triangles());
    out
}

fn sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v
}

pub fn run(e: &ExampleEntry, catalog: &Catalog) -> ExampleResult {
    let mut res = ExampleResult {
        name: e.name.clone(),
        locator: e.locator.clone(),
        expected: e.expected.clone(),
        verdict: String::new(),
        models: Vec::new(),
        band_type: None,
        dimension: None,
        passed: false,
        detail: None,
    };
    let outcome = (|| -> qham::Result<()> {
        let pair = e.spec.build()?;
        let report = spherical::check_pair(&pair, catalog)?;
        res.verdict = report.verdict.name().to_string();
        match &report.verdict {
            Verdict::Spherical { models } => {
                res.models = models.clone();
                let cert = spherical::certificate(&pair, catalog)?;
                res.dimension = Some(cert.dimension);
                res.band_type = cert.band_root_system.map(|b| b.type_name);
            }
            Verdict::NotSpherical { vertex, reason } | Verdict::Unknown { vertex, reason } => {
                res.detail = Some(format!("vertex {vertex}: {reason}"));
            }
        }
        Ok(())
    })();
    if let Err(err) = outcome {
        res.verdict = "Error".into();
        res.detail = Some(err.to_string());
        return res;
    }
    let mut ok = res.verdict == e.expected.verdict;
    if let Some(m) = &e.expected.models {
        ok &= sorted(m.clone()) == sorted(res.models.clone());
    }
    if let Some(b) = &e.expected.band_type {
        ok &= res.band_type.as_ref() == Some(b);
    }
    res.passed = ok;
    res
}

pub fn run_all(catalog: &Catalog) -> Vec<ExampleResult> {
    all().iter().map(|e| run(e, catalog)).collect()
}
