//! Acceptance criteria 1 to 9, one PASS/FAIL line each with its runtime.
//!
//! Run with `cargo test -p qham-cli --test acceptance -- --nocapture` to see
//! the report. Time limits are checked against the elapsed wall clock of
//! each criterion.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use num_integer::Integer;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qham::band::{self, ConstructibleSheaf};
use qham::catalog::Catalog;
use qham::dynkin::FiniteType;
use qham::euclid::{eval, AffineFunctional, Lattice};
use qham::linalg::AbelianGroup;
use qham::localroot;
use qham::pair::{NamedLattice, PairLatticeSpec, PairSpec, PolytopeSpec};
use qham::polytope::Polytope;
use qham::rational::{self, q, qf, Q, Z};
use qham::rootsys::{self, AffineRootSystem, TypeSpec};
use qham::spherical;
use qham::twist::{self, GroupSpec};
use qham::AffinePoint;
use qham_cli::examples;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// 1 -------------------------------------------------------------------------

fn labels() -> Outcome {
    let mut built = 0;
    for letter in ['A', 'B', 'C', 'D', 'E', 'F', 'G'] {
        for rank in 1..=8 {
            for twist in 1..=3 {
                let Ok(rs) = AffineRootSystem::build_from_type(&[TypeSpec::new(letter, rank, twist)]) else { continue };
                built += 1;
                let c = &rs.components[0];
                check(c.labels.iter().all(|&a| a > 0), || format!("{}: non-positive label", c.name))?;
                let g = c.labels.iter().fold(0u64, |g, &a| g.gcd(&a));
                check(g == 1, || format!("{}: labels {:?} not primitive", c.name, c.labels))?;
                let mut sum = vec![Q::zero(); rs.dim()];
                for (&a, &i) in c.labels.iter().zip(&c.roots) {
                    sum = rational::add_vec(&sum, &rational::scale_vec(&q(a as i64), rs.simple_roots[i].grad()));
                }
                check(rational::is_zero_vec(&sum), || format!("{}: Σ aᵢᾱᵢ ≠ 0", c.name))?;
            }
        }
    }
    let rs = AffineRootSystem::build_from_type(&[TypeSpec::new('A', 2, 2)]).map_err(err)?;
    let (g0, g1) = (rs.simple_roots[0].grad(), rs.simple_roots[1].grad());
    check(g0.to_vec() == rational::scale_vec(&q(-2), g1), || "A2^(2): ᾱ0 ≠ −2ᾱ1".into())?;
    Ok(format!("{built} affine types, ᾱ0 = −2ᾱ1 for A2^(2)"))
}

// 2 -------------------------------------------------------------------------

fn small_systems() -> Vec<AffineRootSystem> {
    let specs: Vec<Vec<TypeSpec>> = vec![
        vec![TypeSpec::new('A', 1, 1)],
        vec![TypeSpec::new('A', 2, 1)],
        vec![TypeSpec::new('C', 2, 1)],
        vec![TypeSpec::new('G', 2, 1)],
        vec![TypeSpec::new('A', 2, 2)],
        vec![TypeSpec::new('A', 4, 2)],
        vec![TypeSpec::new('D', 4, 3)],
        vec![TypeSpec::new('A', 1, 1), TypeSpec::new('A', 1, 1)],
        vec![TypeSpec::new('A', 3, 1)],
        vec![TypeSpec::new('B', 3, 1)],
        vec![TypeSpec::new('C', 3, 1)],
        vec![TypeSpec::new('A', 6, 2)],
        vec![TypeSpec::new('A', 1, 1), TypeSpec::new('A', 2, 1)],
    ];
    specs.iter().map(|s| AffineRootSystem::build_from_type(s).unwrap()).collect()
}

/// Random points with coordinates in `[−2, 2]` and denominators up to 12.
fn fundamental_domain() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let systems = small_systems();
    for rs in &systems {
        let n = rs.dim();
        let k = rs.simple_roots.len();
        for _ in 0..1000 {
            let x = AffinePoint::new(
                (0..n)
                    .map(|_| {
                        let d = rng.gen_range(1..=12);
                        qf(rng.gen_range(-2 * d..=2 * d), d)
                    })
                    .collect(),
            );
            let (y, w) = rs.fold_to_alcove(&x);
            check(rs.in_alcove(&y).map_err(err)?, || format!("{}: fold left the alcove", rs.components[0].name))?;
            check(rs.apply_word(&w, &y) == x, || "fold word does not return to the input".into())?;
            let word: Vec<usize> = (0..rng.gen_range(0..16)).map(|_| rng.gen_range(0..k)).collect();
            let (z, _) = rs.fold_to_alcove(&rs.apply_word(&word, &y));
            check(z == y, || format!("{}: refolding a Weyl translate moved the point", rs.components[0].name))?;
        }
    }
    Ok(format!("{} systems × 1000 points", systems.len()))
}

// 3 -------------------------------------------------------------------------

fn adjoint(spec: &TypeSpec) -> Option<AffineRootSystem> {
    let rs = AffineRootSystem::build_from_type(std::slice::from_ref(spec)).ok()?;
    band::adjoint_normalization(&rs).ok()
}

fn alcove(rs: &AffineRootSystem) -> Polytope {
    let verts: Vec<Vec<Q>> = rs.vertices().unwrap().into_iter().map(|v| v.coords).collect();
    Polytope::new(&verts).unwrap()
}

fn vanishing_nodes(rs: &AffineRootSystem, x: &[Q]) -> Vec<usize> {
    let c = &rs.components[0];
    (0..c.roots.len()).filter(|&k| eval(&rs.simple_roots[c.roots[k]], x).is_zero()).collect()
}

fn stalk_oracle() -> Outcome {
    let (mut types, mut faces) = (0, 0);
    for letter in ['A', 'B', 'C', 'D', 'F', 'G'] {
        for rank in 1..=4 {
            for twist in 1..=3 {
                let Some(rs) = adjoint(&TypeSpec::new(letter, rank, twist)) else { continue };
                types += 1;
                let p = alcove(&rs);
                for face in p.faces() {
                    let x = p.barycenter(&face.vertices);
                    let d = band::d_i(&rs.components[0].labels, &vanishing_nodes(&rs, &x)).map_err(err)?;
                    let phi = rs.stabilizer_roots(&AffinePoint::new(x)).map_err(err)?;
                    let (snf, _) = rootsys::torus_fixed_group(&rs.space, &phi, &rs.lattice).map_err(err)?;
                    check(snf == AbelianGroup::from_factors(0, &[Z::from(d)]), || {
                        format!(
                            "{} face {:?}: Smith form {snf}, labels give ℤ/{d}",
                            rs.components[0].name, face.vertices
                        )
                    })?;
                    faces += 1;
                }
            }
        }
    }
    Ok(format!("{types} adjoint types, {faces} faces, 0 mismatches"))
}

// 4 -------------------------------------------------------------------------

fn prime_powers(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while m > 1 {
        let mut e = 0;
        while m.is_multiple_of(p) {
            m /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    out
}

/// `⊕_p ℤ/p^{e(p)}` with `e(p)` the deepest filtration step `{p^j | d_I}`
/// met by the polytope, read off at its vertices.
fn filtration_h0(rs: &AffineRootSystem, p: &Polytope) -> AbelianGroup {
    let labels = &rs.components[0].labels;
    let mut e: std::collections::BTreeMap<u64, u32> = Default::default();
    for v in &p.vertices {
        for (prime, k) in prime_powers(band::d_i(labels, &vanishing_nodes(rs, v)).unwrap()) {
            let slot = e.entry(prime).or_insert(0);
            *slot = (*slot).max(k);
        }
    }
    let factors: Vec<Z> = e.iter().map(|(&p, &k)| Z::from(p.pow(k))).collect();
    AbelianGroup::from_factors(0, &factors)
}

fn cech_vanishing() -> Outcome {
    let mut polys = 0;
    for t in ["C2~1", "G2~1", "A2^(2)", "C3~1"] {
        let rs = adjoint(&TypeSpec::parse(t).map_err(err)?).ok_or("adjoint normalization failed")?;
        let a = alcove(&rs);
        let mut list = Vec::new();
        for face in a.faces() {
            let vs: Vec<Vec<Q>> = face.vertices.iter().map(|&v| a.vertices[v].clone()).collect();
            list.push(Polytope::new(&vs).map_err(err)?);
        }
        let all: Vec<usize> = (0..a.vertices.len()).collect();
        let c = a.barycenter(&all);
        let generic: Vec<Vec<Q>> = a
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = qf(1, 3 + i as i64);
                rational::add_vec(&rational::scale_vec(&(Q::from(Z::from(1)) - &w), v), &rational::scale_vec(&w, &c))
            })
            .collect();
        list.push(Polytope::new(&generic).map_err(err)?);
        for p in list {
            let h = ConstructibleSheaf::component_sheaf(&rs, &p).map_err(err)?.cech_cohomology().map_err(err)?;
            let expected = filtration_h0(&rs, &p);
            check(h[0] == expected, || format!("{t}: H⁰ = {}, filtration gives {expected}", h[0]))?;
            check(h[1..].iter().all(AbelianGroup::is_trivial), || format!("{t}: higher cohomology {h:?}"))?;
            polys += 1;
        }
    }
    Ok(format!("{polys} polytopes"))
}

// 5 -------------------------------------------------------------------------

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

fn round_trip() -> Outcome {
    let mut specs: Vec<Vec<TypeSpec>> = Vec::new();
    for letter in ['A', 'B', 'C', 'D', 'G'] {
        for rank in 1..=4 {
            for twist in 0..=3 {
                specs.push(vec![TypeSpec::new(letter, rank, twist)]);
            }
        }
    }
    for (a, b) in [(0, 0), (0, 1), (1, 1)] {
        specs.push(vec![TypeSpec::new('A', 1, a), TypeSpec::new('A', 1, b)]);
    }
    let (mut configs, mut subsets) = (0, 0);
    for spec in specs {
        let Ok(rs) = AffineRootSystem::build_from_type(&spec) else { continue };
        if rs.dim() > 2 {
            continue;
        }
        for lattice in intermediate_lattices(&rs) {
            let walls: Vec<AffineFunctional> = rs
                .simple_roots
                .iter()
                .map(|r| localroot::primitive_wall(r, &lattice))
                .collect::<Result<_, _>>()
                .map_err(err)?;
            let amb = localroot::ambiguous_reflections(&rs.space, &walls, &lattice).map_err(err)?;
            configs += 1;
            let mut seen = BTreeSet::new();
            let all = localroot::all_subsets(&amb);
            for i in &all {
                let phi = localroot::root_system_from_subset(&rs.space, &walls, &lattice, i).map_err(err)?;
                let back = localroot::sigma_a_of_phi(&phi);
                check(&back == i, || format!("{:?}: Σ^a(Φ_I) = {back:?} for I = {i:?}", spec))?;
                let mut simple = phi.simple_roots.clone();
                simple.sort();
                seen.insert(simple);
                subsets += 1;
            }
            check(seen.len() == all.len(), || format!("{spec:?}: distinct subsets give equal systems"))?;
        }
    }
    Ok(format!("{configs} configurations, {subsets} subsets"))
}

// 6 -------------------------------------------------------------------------

fn example_suite() -> Outcome {
    let results = examples::run_all(&Catalog::bundled());
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    check(failed.is_empty(), || format!("failed: {failed:?}"))?;
    let negatives: Vec<&str> =
        results.iter().filter(|r| r.verdict == "NotSpherical").map(|r| r.name.as_str()).collect();
    check(negatives.len() == 2, || format!("negatives: {negatives:?}"))?;
    let triangles = results.iter().filter(|r| r.name.contains("triangle")).count();
    check(triangles >= 5, || format!("{triangles} triangles"))?;
    Ok(format!("{} pairs, negatives {negatives:?}", results.len()))
}

// 7 -------------------------------------------------------------------------

fn band_root_system() -> Outcome {
    let catalog = Catalog::bundled();
    for n in 3..=6usize {
        let g = GroupSpec::untwisted(&[('A', n - 1)]);
        let d = twist::twisted_datum(&g).map_err(err)?;
        let vertices: Vec<Vec<Q>> =
            (0..n).map(|i| (0..n - 1).map(|j| if i > 0 && j == i - 1 { q(1) } else { q(0) }).collect()).collect();
        let spec = PairSpec {
            group: g,
            polytope: PolytopeSpec { vertices, coordinates: qham::pair::Coordinates::Values },
            lattice: PairLatticeSpec::named(NamedLattice::Weight, 1),
        };
        let pair = spec.build().map_err(err)?;
        let cert = spherical::certificate(&pair, &catalog).map_err(err)?;
        let band = cert.band_root_system.ok_or_else(|| format!("SU({n}): no band root system"))?;
        // α_0 = 1 + x_n − x_1, α_i = x_i − x_{i+1}; the expected roots are
        // 1 + x_n − x_2 = α_0 + α_1, x_i − x_{i+2} = α_i + α_{i+1}, and
        // 1 + x_{n−1} − x_1 = α_{n−1} + α_0.
        let rs = &d.root_system;
        let alpha = |i: usize| &rs.simple_roots[rs.components[0].roots[i % n]];
        let expected: BTreeSet<AffineFunctional> = (0..n)
            .map(|i| {
                let (a, b) = (alpha(i), alpha(i + 1));
                AffineFunctional::new(rational::add_vec(a.grad(), b.grad()), &a.constant + &b.constant)
            })
            .collect();
        let got: BTreeSet<AffineFunctional> = band.simple_roots.iter().cloned().collect();
        check(got == expected, || {
            let show = |s: &BTreeSet<AffineFunctional>| s.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; ");
            format!("SU({n}): glued {} expected {}", show(&got), show(&expected))
        })?;
        let ty = if n % 2 == 1 { format!("A{}^(1)", n - 1) } else { format!("A{0}^(1)×A{0}^(1)", n / 2 - 1) };
        check(band.type_name == ty, || format!("SU({n}): type {} expected {ty}", band.type_name))?;
    }
    Ok("n = 3, 4, 5, 6".into())
}

// 8 -------------------------------------------------------------------------

/// Low-rank coincidences folded to one name.
fn canonical(t: &FiniteType) -> String {
    match (t.letter, t.rank) {
        ('B' | 'C', 1) => "A1".into(),
        ('B', 2) => "C2".into(),
        _ => t.to_string(),
    }
}

fn centralizer_table() -> Outcome {
    let mut checked = 0;
    for n in 2..=6usize {
        let d = twist::twisted_datum(&GroupSpec::untwisted(&[('C', n)])).map_err(err)?;
        let rs = &d.root_system;
        for v in d.alcove.vertices.clone().unwrap() {
            let nodes = vanishing_nodes(rs, &v.coords);
            let i = (0..=n).find(|k| !nodes.contains(k)).ok_or("vertex on every wall")?;
            let c = twist::centralizer_datum(&d, &v).map_err(err)?;
            let mut got: Vec<String> = c.types.iter().map(canonical).collect();
            got.sort();
            let mut want: Vec<String> =
                [i, n - i].iter().filter(|&&k| k > 0).map(|&k| canonical(&FiniteType::new('C', k).unwrap())).collect();
            want.sort();
            check(got == want, || format!("Sp({}) at x_{i}: {got:?}, expected {want:?}", 2 * n))?;
            let twos = vec![Z::from(2); want.len()];
            check(c.lattice_invariants == AbelianGroup::from_factors(0, &twos), || {
                format!("Sp({}) at x_{i}: lattice invariant {}", 2 * n, c.lattice_invariants)
            })?;
            checked += 1;
        }
    }
    let d = twist::twisted_datum(&GroupSpec::untwisted(&[('A', 2)]).with_twist(vec![0], 2)).map_err(err)?;
    let mut invariants = BTreeSet::new();
    let mut names = BTreeSet::new();
    for v in d.alcove.vertices.clone().unwrap() {
        let c = twist::centralizer_datum(&d, &v).map_err(err)?;
        invariants.insert(c.lattice_invariants.to_string());
        names.insert(c.group_name.unwrap_or(c.label));
    }
    let want: BTreeSet<String> = [AbelianGroup::from_factors(0, &[Z::from(2)]), AbelianGroup::from_factors(0, &[])]
        .iter()
        .map(|g| g.to_string())
        .collect();
    check(invariants == want, || format!("A2^(2) endpoints: {invariants:?}"))?;
    check(names.contains("SU(2)") && names.contains("SO(3)"), || format!("A2^(2) endpoints: {names:?}"))?;
    Ok(format!("{checked} Sp vertices, A2^(2) endpoints {names:?}"))
}

// 9 -------------------------------------------------------------------------

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_qham")).args(["examples", "--all", "--format", "json"]).output().map_err(err)
    };
    let (a, b) = (run()?, run()?);
    check(a.status.success(), || format!("exit {:?}", a.status.code()))?;
    check(!a.stdout.is_empty() && a.stdout == b.stdout, || "outputs differ".into())?;
    Ok(format!("{} bytes", a.stdout.len()))
}

// ---------------------------------------------------------------------------

struct Criterion {
    id: u32,
    title: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

#[test]
fn acceptance() {
    let criteria = [
        Criterion { id: 1, title: "labels", limit: secs(1), run: labels },
        Criterion { id: 2, title: "fundamental domain", limit: secs(5), run: fundamental_domain },
        Criterion { id: 3, title: "stalk oracle equivalence", limit: None, run: stalk_oracle },
        Criterion { id: 4, title: "Čech vanishing", limit: secs(10), run: cech_vanishing },
        Criterion { id: 5, title: "subset round trip", limit: secs(1), run: round_trip },
        Criterion { id: 6, title: "example suite", limit: secs(10), run: example_suite },
        Criterion { id: 7, title: "band root system of surjective SU(n)", limit: None, run: band_root_system },
        Criterion { id: 8, title: "centralizer table", limit: None, run: centralizer_table },
        Criterion { id: 9, title: "determinism", limit: None, run: determinism },
    ];
    let mut failures = Vec::new();
    for c in criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let late = c.limit.is_some_and(|l| elapsed > l);
        let limit = c.limit.map_or("none".to_string(), |l| format!("{}s", l.as_secs()));
        let (status, detail) = match (&outcome, late) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the time limit")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        println!("criterion {}: {status} {} [{:.2}s, limit {limit}] {detail}", c.id, c.title, elapsed.as_secs_f64());
        if status == "FAIL" {
            failures.push(c.id);
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
