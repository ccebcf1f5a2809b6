//! Property tests for reflections, dual lattices and lattice quotients.

use num_traits::{Signed, Zero};
use proptest::prelude::*;

use qham::euclid::{lattice_quotient, AffineFunctional, AffinePoint, Lattice, MetricSpace};
use qham::rational::{q, qf, Q, Z};

fn small_q() -> impl Strategy<Value = Q> {
    (-12i64..=12, 1i64..=6).prop_map(|(n, d)| qf(n, d))
}

fn vec_q(n: usize) -> impl Strategy<Value = Vec<Q>> {
    proptest::collection::vec(small_q(), n)
}

/// Positive definite Gram matrices `MᵀM + I` with small integer `M`.
fn gram(n: usize) -> impl Strategy<Value = Vec<Vec<Q>>> {
    proptest::collection::vec(proptest::collection::vec(-2i64..=2, n), n).prop_map(move |m| {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let s: i64 = (0..n).map(|k| m[k][i] * m[k][j]).sum();
                        q(s + i64::from(i == j))
                    })
                    .collect()
            })
            .collect()
    })
}

fn space_and_dim() -> impl Strategy<Value = (MetricSpace, usize)> {
    (1usize..=3)
        .prop_flat_map(|n| gram(n).prop_map(move |g| (MetricSpace::new(g, vec![]).expect("positive definite"), n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_is_an_involution_and_negates(
        (space, n) in space_and_dim(),
        grad in vec_q(3),
        c in small_q(),
        x in vec_q(3),
    ) {
        let grad = grad[..n].to_vec();
        prop_assume!(grad.iter().any(|x| !x.is_zero()));
        let f = AffineFunctional::new(grad, c);
        let x = AffinePoint::new(x[..n].to_vec());
        let y = f.reflect_point(&space, &x).unwrap();
        prop_assert_eq!(f.reflect_point(&space, &y).unwrap(), x.clone());
        prop_assert_eq!(f.evaluate(&y).unwrap(), -f.evaluate(&x).unwrap());
    }

    #[test]
    fn dual_of_dual_is_the_lattice((space, n) in space_and_dim(), gens in proptest::collection::vec(vec_q(3), 3..5)) {
        let gens: Vec<Vec<Q>> = gens.into_iter().map(|g| g[..n].to_vec()).collect();
        let l = Lattice::new(n, &gens).unwrap();
        prop_assume!(l.is_full_rank());
        let dd = l.dual(&space).unwrap().dual(&space).unwrap();
        prop_assert!(dd.contains_lattice(&l) && l.contains_lattice(&dd));
    }

    #[test]
    fn quotient_matches_coset_enumeration(a in -6i64..=6, b in -6i64..=6, c in -6i64..=6, d in -6i64..=6) {
        let det = a * d - b * c;
        prop_assume!(det != 0 && det.abs() <= 24);
        let sub = Lattice::new(2, &[vec![q(a), q(b)], vec![q(c), q(d)]]).unwrap();
        let g = lattice_quotient(&Lattice::standard(2), &sub).unwrap();
        let (order, exponent) = brute_force_quotient(&sub, det.abs());
        prop_assert_eq!(g.free_rank, 0);
        let got_order: Z = g.torsion.iter().product();
        prop_assert_eq!(got_order, Z::from(order));
        let got_exp = g.torsion.last().cloned().unwrap_or_else(|| Z::from(1));
        prop_assert_eq!(got_exp, Z::from(exponent));
    }
}

/// Order and exponent of `ℤ² / sub` by enumerating cosets in a box.
fn brute_force_quotient(sub: &Lattice, det: i64) -> (usize, i64) {
    let in_sub = |x: i64, y: i64| sub.contains(&[q(x), q(y)]);
    let mut reps: Vec<(i64, i64)> = Vec::new();
    for x in 0..det {
        for y in 0..det {
            if !reps.iter().any(|&(u, v)| in_sub(x - u, y - v)) {
                reps.push((x, y));
            }
        }
    }
    let exponent = (1..=det)
        .find(|&e| reps.iter().all(|&(x, y)| in_sub(e * x, e * y)))
        .expect("the determinant kills the quotient");
    (reps.len(), exponent)
}

#[test]
fn quotient_of_diagonal_example() {
    let sub = Lattice::new(2, &[vec![q(2), q(0)], vec![q(0), q(4)]]).unwrap();
    let g = lattice_quotient(&Lattice::standard(2), &sub).unwrap();
    assert_eq!(g.torsion, vec![Z::from(2), Z::from(4)]);
    assert!(g.torsion.iter().all(|x| x.is_positive()));
}
