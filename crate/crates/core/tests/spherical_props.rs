//! Hilbert bases against lattice-point enumeration, tangent cones along
//! edges, and symmetry of verdicts.

use std::collections::HashMap;

use num_traits::{One, Zero};
use proptest::prelude::*;
use serde_json::json;

use qham::catalog::Catalog;
use qham::pair::{MomentumPair, PairSpec};
use qham::polytope::{Cone, Polytope};
use qham::rational::{self, q, qf, Q, Z};
use qham::spherical::{self, Verdict};

fn int_vec(n: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-3i64..=3, n)
}

fn cone_gens() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (1usize..=3).prop_flat_map(|n| (Just(n), proptest::collection::vec(int_vec(n), 1..=n + 2)))
}

/// Whether `x` in a pointed cone is a sum of basis elements: peel off one
/// element at a time, staying in the cone.
fn decomposes(x: &[Z], basis: &[Vec<Z>], cone: &Cone, memo: &mut HashMap<Vec<Z>, bool>) -> bool {
    if x.iter().all(Z::is_zero) {
        return true;
    }
    if let Some(&r) = memo.get(x) {
        return r;
    }
    let mut ok = false;
    for b in basis {
        let y: Vec<Z> = x.iter().zip(b).map(|(u, v)| u - v).collect();
        let yq: Vec<Q> = y.iter().map(rational::qz).collect();
        if cone.contains(&yq) && decomposes(&y, basis, cone, memo) {
            ok = true;
            break;
        }
    }
    memo.insert(x.to_vec(), ok);
    ok
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hilbert_basis_generates_the_lattice_points_of_the_cone((n, gens) in cone_gens()) {
        let gens: Vec<Vec<Q>> = gens.iter().map(|g| g.iter().map(|&x| q(x)).collect()).collect();
        let cone = Cone::from_generators(n, &gens);
        prop_assume!(cone.is_pointed() && cone.span_dim() > 0);
        let hb = spherical::hilbert_basis(&gens, n).unwrap();
        let hbq: Vec<Vec<Q>> = hb.iter().map(|z| z.iter().map(rational::qz).collect()).collect();
        for h in &hbq {
            prop_assert!(cone.contains(h));
        }
        let regenerated = Cone::from_generators(n, &hbq);
        for g in &gens {
            prop_assert!(regenerated.contains(g));
        }

        let mut memo = HashMap::new();
        let side = 13i64.pow(n as u32);
        for k in 0..side {
            let v: Vec<Q> = (0..n).map(|j| q((k / 13i64.pow(j as u32)) % 13 - 6)).collect();
            if cone.contains(&v) {
                let z: Vec<Z> = v.iter().map(|x| x.to_integer()).collect();
                prop_assert!(decomposes(&z, &hb, &cone, &mut memo), "{} not generated", rational::fmt_vec(&v));
            }
        }
    }
}

fn build(v: serde_json::Value) -> MomentumPair {
    let spec: PairSpec = serde_json::from_value(v).unwrap();
    spec.build().unwrap()
}

fn group_pair(letter: &str, rank: usize, vertices: &[Vec<Q>], lattice: serde_json::Value) -> serde_json::Value {
    let vs: Vec<Vec<String>> = vertices.iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect();
    json!({
        "group": {"factors": [{"type": letter, "rank": rank, "scale": "1"}], "twist": {"permutation": [], "diagram_order": 1}},
        "polytope": {"vertices": vs, "coordinates": "values"},
        "lattice": lattice,
    })
}

fn fw(gens: &[Vec<i64>]) -> serde_json::Value {
    let gs: Vec<Vec<String>> = gens.iter().map(|g| g.iter().map(|x| x.to_string()).collect()).collect();
    json!({"generators": gs, "coordinates": "fundamental-weights"})
}

fn alcove_pair(letter: &str, rank: usize) -> MomentumPair {
    let spec = json!({
        "group": {"factors": [{"type": letter, "rank": rank, "scale": "1"}], "twist": {"permutation": [], "diagram_order": 1}},
        "polytope": {"vertices": [], "coordinates": "values"},
        "lattice": {"named": "weight"},
    });
    let spec: PairSpec = serde_json::from_value(spec).unwrap();
    let d = qham::twist::twisted_datum(&spec.group).unwrap();
    let vs: Vec<Vec<Q>> = d.alcove.vertices.clone().unwrap().into_iter().map(|p| p.coords).collect();
    let lattice = d.root_system.weight_lattice().unwrap();
    MomentumPair { polytope: Polytope::new(&vs).unwrap(), lattice, datum: d }
}

fn same_cone(a: &Cone, b: &Cone) -> bool {
    a.generators.iter().all(|g| b.contains(g)) && b.generators.iter().all(|g| a.contains(g))
}

#[test]
fn tangent_cone_is_constant_along_open_edges() {
    for (letter, rank) in [("A", 2), ("C", 2), ("G", 2), ("A", 3), ("B", 3)] {
        let pair = alcove_pair(letter, rank);
        let p = &pair.polytope;
        let mut edges = 0;
        for (a, b) in p.edges() {
            let at = |t: Q| -> Vec<Q> {
                let s = Q::one() - &t;
                rational::add_vec(&rational::scale_vec(&s, &p.vertices[a]), &rational::scale_vec(&t, &p.vertices[b]))
            };
            let base = spherical::tangent_cone_at(&pair, &at(qf(1, 2))).unwrap();
            assert_eq!(base.span_dim(), rank);
            for t in [qf(1, 7), qf(1, 3), qf(5, 6)] {
                let c = spherical::tangent_cone_at(&pair, &at(t)).unwrap();
                assert!(same_cone(&base, &c), "{letter}{rank} edge {a}-{b}");
            }
            let end = spherical::tangent_cone(&pair, a).unwrap();
            assert!(!same_cone(&base, &end));
            edges += 1;
        }
        assert_eq!(edges, (rank + 1) * rank / 2);
    }
}

fn summary(v: &Verdict) -> (String, Vec<String>) {
    match v {
        Verdict::Spherical { models } => {
            let mut m = models.clone();
            m.sort();
            ("Spherical".into(), m)
        }
        other => (other.name().into(), Vec::new()),
    }
}

fn verdict(spec: serde_json::Value, catalog: &Catalog) -> (String, Vec<String>) {
    summary(&spherical::check_pair(&build(spec), catalog).unwrap().verdict)
}

/// Group letter and rank, vertex values, lattice generators and a diagram
/// automorphism as a permutation of simple roots.
type Case = (&'static str, usize, Vec<Vec<Q>>, Vec<Vec<i64>>, Vec<usize>);

/// Pairs together with a diagram automorphism acting on point values and
/// fundamental-weight coordinates.
fn symmetric_cases() -> Vec<Case> {
    let h = qf(1, 2);
    let z = Q::zero;
    vec![
        ("A", 2, vec![vec![z(), z()], vec![q(1), z()], vec![z(), q(1)]], vec![vec![1, 0], vec![0, 1]], vec![1, 0]),
        ("A", 2, vec![vec![z(), z()], vec![q(1), z()], vec![z(), q(1)]], vec![vec![2, 0], vec![0, 2]], vec![1, 0]),
        (
            "A",
            2,
            vec![vec![h.clone(), z()], vec![h.clone(), h.clone()], vec![z(), h.clone()]],
            vec![vec![1, 0], vec![0, 1]],
            vec![1, 0],
        ),
        ("A", 2, vec![vec![z(), z()], vec![q(1), z()]], vec![vec![1, 0]], vec![1, 0]),
        ("A", 3, vec![vec![z(), z(), z()], vec![q(1), z(), z()]], vec![vec![1, 0, 0]], vec![2, 1, 0]),
        ("A", 4, vec![vec![z(), z(), z(), z()], vec![q(1), z(), z(), z()]], vec![vec![1, 0, 0, 0]], vec![3, 2, 1, 0]),
        ("A", 3, vec![vec![z(), z(), z()], vec![z(), q(1), z()]], vec![vec![0, 2, 0]], vec![2, 1, 0]),
        ("D", 4, vec![vec![z(), z(), z(), z()], vec![q(1), z(), z(), z()]], vec![vec![1, 0, 0, 0]], vec![2, 1, 3, 0]),
    ]
}

fn permute<T: Clone>(v: &[T], sigma: &[usize]) -> Vec<T> {
    let mut out = v.to_vec();
    for (i, x) in v.iter().enumerate() {
        out[sigma[i]] = x.clone();
    }
    out
}

#[test]
fn verdicts_ignore_vertex_order() {
    let catalog = Catalog::bundled();
    for (letter, rank, vs, lat, _) in symmetric_cases() {
        let expected = verdict(group_pair(letter, rank, &vs, fw(&lat)), &catalog);
        let mut rotated = vs.clone();
        rotated.rotate_left(1);
        let mut reversed = vs.clone();
        reversed.reverse();
        for order in [rotated, reversed] {
            assert_eq!(
                verdict(group_pair(letter, rank, &order, fw(&lat)), &catalog),
                expected,
                "{letter}{rank} {vs:?}"
            );
        }
    }
}

#[test]
fn verdicts_ignore_diagram_automorphisms() {
    let catalog = Catalog::bundled();
    let mut spherical = 0;
    for (letter, rank, vs, lat, sigma) in symmetric_cases() {
        let expected = verdict(group_pair(letter, rank, &vs, fw(&lat)), &catalog);
        let vs2: Vec<Vec<Q>> = vs.iter().map(|v| permute(v, &sigma)).collect();
        let lat2: Vec<Vec<i64>> = lat.iter().map(|g| permute(g, &sigma)).collect();
        assert_eq!(verdict(group_pair(letter, rank, &vs2, fw(&lat2)), &catalog), expected, "{letter}{rank} {vs:?}");
        spherical += usize::from(expected.0 == "Spherical");
    }
    assert!(spherical >= 5);
}
