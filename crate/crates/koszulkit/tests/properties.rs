//! Property-based invariants for the linear algebra core, the poset
//! layer and the bar homology.

use koszulkit::bar;
use koszulkit::builder::{self, GeneratorSpec};
use koszulkit::linalg::{self, FieldSpec, SparseMatrix};
use koszulkit::poset::Poset;

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(seed: u64, rows: usize, cols: usize) -> SparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = SparseMatrix::zero(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            if rng.gen_bool(0.55) {
                let v = rng.gen_range(-3i64..=3);
                m.set(i, j, BigInt::from(v));
            }
        }
    }
    m
}

fn random_poset(seed: u64, size: usize, density_percent: u8) -> Poset {
    builder::generate(&GeneratorSpec::Random {
        seed,
        size,
        density: f64::from(density_percent) / 100.0,
    })
    .unwrap()
}

fn fields() -> [FieldSpec; 3] {
    [
        FieldSpec::Rationals,
        FieldSpec::prime_field(2).unwrap(),
        FieldSpec::prime_field(32003).unwrap(),
    ]
}

fn apply(m: &SparseMatrix, v: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); m.rows()];
    for (i, j, a) in m.entries() {
        out[i] += a * &v[j];
    }
    out
}

fn is_zero_in(field: FieldSpec, v: &[BigInt]) -> bool {
    match field {
        FieldSpec::Rationals => v.iter().all(Zero::is_zero),
        FieldSpec::PrimeField { p } => {
            let p = BigInt::from(p);
            v.iter().all(|a| (a % &p).is_zero())
        }
    }
}

fn same_span(field: FieldSpec, a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> bool {
    a.len() == b.len()
        && a.iter().all(|v| linalg::in_span(b, v, field))
        && b.iter().all(|v| linalg::in_span(a, v, field))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_vectors_annihilate_and_count(
        seed in any::<u64>(),
        rows in 0usize..6,
        cols in 0usize..6,
    ) {
        let m = random_matrix(seed, rows, cols);
        for field in fields() {
            let rank = linalg::rank(&m, field);
            let kernel = linalg::kernel_basis(&m, field);
            prop_assert_eq!(rank + kernel.len(), cols);
            for v in &kernel {
                prop_assert!(is_zero_in(field, &apply(&m, v)));
                prop_assert!(!is_zero_in(field, v), "kernel vector must be nonzero");
            }
        }
    }

    #[test]
    fn rank_only_drops_under_specialization(
        seed in any::<u64>(),
        rows in 1usize..6,
        cols in 1usize..6,
        p in prop::sample::select(vec![2u64, 3, 5, 7, 32003]),
    ) {
        let m = random_matrix(seed, rows, cols);
        let rq = linalg::rank(&m, FieldSpec::Rationals);
        let rp = linalg::rank(&m, FieldSpec::prime_field(p).unwrap());
        prop_assert!(rp <= rq);
    }

    #[test]
    fn intersection_is_commutative_and_associative(
        seed in any::<u64>(),
        dim in 1usize..5,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut basis = |count: usize| -> Vec<Vec<BigInt>> {
            (0..count)
                .map(|_| (0..dim).map(|_| BigInt::from(rng.gen_range(-2i64..=2))).collect())
                .filter(|v: &Vec<BigInt>| v.iter().any(|a| !a.is_zero()))
                .collect()
        };
        let a = basis(2);
        let b = basis(2);
        let c = basis(1);
        for field in fields() {
            let ab = linalg::intersect_subspaces(&[a.clone(), b.clone()], dim, field).unwrap();
            let ba = linalg::intersect_subspaces(&[b.clone(), a.clone()], dim, field).unwrap();
            prop_assert!(same_span(field, &ab, &ba));

            let abc =
                linalg::intersect_subspaces(&[a.clone(), b.clone(), c.clone()], dim, field)
                    .unwrap();
            let nested =
                linalg::intersect_subspaces(&[ab.clone(), c.clone()], dim, field).unwrap();
            prop_assert!(same_span(field, &abc, &nested));

            for v in &ab {
                prop_assert!(linalg::in_span(&a, v, field));
                prop_assert!(linalg::in_span(&b, v, field));
            }
        }
    }

    #[test]
    fn dual_is_involutive_and_preserves_lengths(
        seed in any::<u64>(),
        size in 1usize..10,
        density in 10u8..90,
    ) {
        let p = random_poset(seed, size, density);
        let d = p.dual();
        prop_assert!(d.is_graded());
        prop_assert_eq!(d.dual(), p.clone());
        let mut forward = Vec::new();
        let mut backward = Vec::new();
        for i in 0..p.len() {
            for j in 0..p.len() {
                if p.leq(i, j) {
                    forward.push(p.length_idx(i, j).unwrap());
                }
                if d.leq(i, j) {
                    backward.push(d.length_idx(i, j).unwrap());
                }
            }
        }
        forward.sort_unstable();
        backward.sort_unstable();
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn interval_lengths_are_additive(
        seed in any::<u64>(),
        size in 1usize..10,
        density in 10u8..90,
    ) {
        let p = random_poset(seed, size, density);
        for x in 0..p.len() {
            for y in 0..p.len() {
                for z in 0..p.len() {
                    if p.leq(x, y) && p.leq(y, z) {
                        prop_assert_eq!(
                            p.length_idx(x, z).unwrap(),
                            p.length_idx(x, y).unwrap() + p.length_idx(y, z).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn bar_differential_squares_to_zero(
        seed in any::<u64>(),
        size in 2usize..10,
        density in 20u8..95,
    ) {
        let p = random_poset(seed, size, density);
        let l = p.max_interval_length();
        for m in 0..=l {
            for n in 2..=m + 1 {
                let outer = bar::build_differential(&p, n, m).unwrap();
                let inner = bar::build_differential(&p, n - 1, m).unwrap();
                prop_assert!(inner.mul(&outer).is_zero_matrix());
            }
        }
    }

    #[test]
    fn tor_vanishing_shape(
        seed in any::<u64>(),
        size in 1usize..10,
        density in 10u8..90,
    ) {
        let p = random_poset(seed, size, density);
        let f = FieldSpec::Rationals;
        let l = p.max_interval_length();
        prop_assert_eq!(bar::tor_dimension(&p, 0, 0, f).unwrap(), p.len());
        for m in 0..=l {
            // below the diagonal and the strongly graded row vanish
            prop_assert_eq!(bar::tor_dimension(&p, m + 1, m, f).unwrap(), 0);
            if m >= 1 {
                prop_assert_eq!(bar::tor_dimension(&p, 0, m, f).unwrap(), 0);
            }
            if m >= 2 {
                prop_assert_eq!(bar::tor_dimension(&p, 1, m, f).unwrap(), 0);
            }
        }
        // beyond the largest interval everything is empty
        prop_assert_eq!(bar::tor_dimension(&p, 1, l + 1, f).unwrap(), 0);
        prop_assert!(bar::enumerate_chains(&p, 1, l + 1).unwrap().is_empty());
    }

    #[test]
    fn tor_table_agrees_with_cellwise_dimension(
        seed in any::<u64>(),
        size in 1usize..9,
        density in 10u8..90,
    ) {
        let p = random_poset(seed, size, density);
        let f = FieldSpec::prime_field(32003).unwrap();
        let t = bar::tor_table(&p, f).unwrap();
        for (&(n, m), &dim) in &t.dims {
            prop_assert_eq!(dim, bar::tor_dimension(&p, n, m, f).unwrap());
        }
    }

    #[test]
    fn koszulity_certificate_transfers_up(
        seed in any::<u64>(),
        size in 1usize..8,
        density in 10u8..90,
    ) {
        // adjoining above a singleton always preserves the verdict both ways
        let p = random_poset(seed, size, density);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
        let u = p.name(rng.gen_range(0..p.len())).to_string();
        let bigger = builder::adjoin_above(&p, "fresh", &[u]).unwrap();
        let before = bar::tor_table(&p, FieldSpec::Rationals).unwrap().koszul;
        let after = bar::tor_table(&bigger, FieldSpec::Rationals).unwrap().koszul;
        prop_assert_eq!(before, after);
    }
}
