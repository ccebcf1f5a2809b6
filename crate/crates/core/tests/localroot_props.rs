//! Ambiguous reflections, the subset correspondence and gluing of local
//! root systems.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use qham::band;
use qham::euclid::{AffineFunctional, Lattice, MetricSpace};
use qham::localroot::{self, LocalRootSystem};
use qham::polytope::Polytope;
use qham::rational::{self, q, Q};
use qham::rootsys::{AffineRootSystem, Region, TypeSpec};

struct Configuration {
    name: String,
    space: MetricSpace,
    walls: Vec<AffineFunctional>,
    lattice: Lattice,
}

/// Lattices between the root and weight lattices of `rs`.
fn intermediate_lattices(rs: &AffineRootSystem) -> Vec<Lattice> {
    let weights = rs.lattice.clone();
    let roots = rs.root_lattice().unwrap();
    let n = rs.dim();
    let mut out: Vec<Lattice> = vec![weights.clone()];
    for k in 0..4usize.pow(n as u32) {
        let mut w = vec![Q::zero(); n];
        for (i, p) in weights.generators.iter().enumerate() {
            let c = q(((k / 4usize.pow(i as u32)) % 4) as i64);
            w = rational::add_vec(&w, &rational::scale_vec(&c, p));
        }
        let mut gens = roots.generators.clone();
        gens.push(w);
        let l = Lattice::new(n, &gens).unwrap();
        if !out.iter().any(|m| m.contains_lattice(&l) && l.contains_lattice(m)) {
            out.push(l);
        }
    }
    out
}

fn configurations(max_rank: usize) -> Vec<Configuration> {
    let types =
        ["A1", "A2", "B2", "G2", "A1~1", "A2~1", "C2~1", "G2~1", "A2^(2)", "A4^(2)", "A3", "B3", "C3", "A3~1", "C3~1"];
    let mut out = Vec::new();
    let mut specs: Vec<(String, Vec<TypeSpec>)> =
        types.iter().map(|t| (t.to_string(), vec![TypeSpec::parse(t).unwrap()])).collect();
    specs.push(("A1×A1".into(), vec![TypeSpec::parse("A1").unwrap(), TypeSpec::parse("A1").unwrap()]));
    specs.push(("A1~1×A1~1".into(), vec![TypeSpec::parse("A1~1").unwrap(), TypeSpec::parse("A1~1").unwrap()]));
    for (name, spec) in specs {
        let rs = AffineRootSystem::build_from_type(&spec).unwrap();
        if rs.dim() > max_rank {
            continue;
        }
        for (k, lattice) in intermediate_lattices(&rs).into_iter().enumerate() {
            let walls = rs.simple_roots.iter().map(|r| localroot::primitive_wall(r, &lattice).unwrap()).collect();
            out.push(Configuration { name: format!("{name}/Λ{k}"), space: rs.space.clone(), walls, lattice });
        }
    }
    out
}

#[test]
fn subsets_round_trip_through_doubled_systems() {
    let mut checked = 0;
    for c in configurations(3) {
        let amb = localroot::ambiguous_reflections(&c.space, &c.walls, &c.lattice).unwrap();
        if amb.len() > 3 {
            continue;
        }
        let mut systems: BTreeSet<Vec<AffineFunctional>> = BTreeSet::new();
        let subsets = localroot::all_subsets(&amb);
        for i in &subsets {
            let rs = localroot::root_system_from_subset(&c.space, &c.walls, &c.lattice, i)
                .unwrap_or_else(|e| panic!("{} {:?}: {e}", c.name, i));
            let back = localroot::sigma_a_of_phi(&rs);
            assert_eq!(&back, i, "{}", c.name);
            let mut simple = rs.simple_roots.clone();
            simple.sort();
            systems.insert(simple);
            checked += 1;
        }
        assert_eq!(systems.len(), subsets.len(), "{}: distinct subsets give equal systems", c.name);
    }
    assert!(checked >= 60, "only {checked} subsets");
}

#[test]
fn non_ambiguous_walls_cannot_be_doubled() {
    for c in configurations(2) {
        let amb = localroot::ambiguous_reflections(&c.space, &c.walls, &c.lattice).unwrap();
        for s in 0..c.walls.len() {
            if !amb.contains(&s) {
                assert!(localroot::root_system_from_subset(&c.space, &c.walls, &c.lattice, &[s]).is_err());
            }
        }
    }
}

fn vertex_systems(rs: &AffineRootSystem, poly: &Polytope) -> Vec<Vec<AffineFunctional>> {
    poly.vertices.iter().map(|v| rs.stabilizer_roots(&qham::AffinePoint::new(v.clone())).unwrap().roots).collect()
}

fn region(n: usize) -> Region {
    Region::new(vec![q(-1); n], vec![q(2); n])
}

#[test]
fn gluing_alcove_restrictions_recovers_the_system() {
    let mut systems: Vec<(String, AffineRootSystem)> = Vec::new();
    for c in configurations(2) {
        let amb = localroot::ambiguous_reflections(&c.space, &c.walls, &c.lattice).unwrap();
        for i in localroot::all_subsets(&amb) {
            let rs = localroot::root_system_from_subset(&c.space, &c.walls, &c.lattice, &i).unwrap();
            if rs.vertices().is_some() {
                systems.push((format!("{} {:?}", c.name, i), rs));
            }
        }
    }
    assert!(systems.len() >= 10);
    for (name, rs) in systems {
        let verts: Vec<Vec<Q>> = rs.vertices().unwrap().into_iter().map(|v| v.coords).collect();
        let poly = Polytope::new(&verts).unwrap();
        let l = LocalRootSystem::from_vertex_systems(
            rs.space.clone(),
            poly,
            rs.lattice.clone(),
            &vertex_systems(&rs, &Polytope::new(&verts).unwrap()),
        )
        .unwrap();
        let glued = localroot::glue_local_system(&l).unwrap_or_else(|e| panic!("{name}: {e}"));
        let r = region(rs.dim());
        assert_eq!(glued.root_system.enumerate_roots(&r).unwrap(), rs.enumerate_roots(&r).unwrap(), "{name}");
    }
}

#[test]
fn glued_roots_have_constant_sign_on_subpolytopes() {
    for t in ["A2~1", "C2~1", "G2~1", "A2^(2)", "A1~1"] {
        let rs = AffineRootSystem::build_from_type(&[TypeSpec::parse(t).unwrap()]).unwrap();
        let verts: Vec<Vec<Q>> = rs.vertices().unwrap().into_iter().map(|v| v.coords).collect();
        let alcove = Polytope::new(&verts).unwrap();
        let mut polys = vec![band::edge_midpoint_polytope(&alcove).unwrap()];
        for i in 0..verts.len() {
            let others: Vec<usize> = (0..verts.len()).filter(|&j| j != i).collect();
            polys.push(Polytope::new(&[verts[i].clone(), alcove.barycenter(&others)]).unwrap());
        }
        for poly in polys {
            let l = LocalRootSystem::from_vertex_systems(
                rs.space.clone(),
                poly.clone(),
                rs.lattice.clone(),
                &vertex_systems(&rs, &poly),
            )
            .unwrap();
            let glued = localroot::glue_local_system(&l).unwrap_or_else(|e| panic!("{t}: {e}"));
            for root in glued.root_system.enumerate_roots(&region(rs.dim())).unwrap() {
                let values: Vec<Q> = poly.vertices.iter().map(|v| qham::euclid::eval(&root, v)).collect();
                let pos = values.iter().all(|x| !x.is_negative());
                let neg = values.iter().all(|x| !x.is_positive());
                assert!(pos || neg, "{t}: root {root} changes sign on {:?}", poly.vertices);
            }
        }
    }
}
