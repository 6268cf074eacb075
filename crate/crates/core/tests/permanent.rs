mod common;

use std::time::{Duration, Instant};

use common::{close, random_matrix, rng};
use mbci::permanent::{permanent_batch, permanent_naive, permanent_ryser, permanent_with, Method};
use mbci::C64;
use ndarray::{s, Array2};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ryser_matches_naive(n in 1usize..=7, seed in any::<u64>()) {
        let a = random_matrix(n, n, &mut rng(seed));
        let fast = permanent_ryser(a.view()).unwrap();
        let slow = permanent_naive(a.view()).unwrap();
        prop_assert!(close(fast, slow, 1e-10), "{fast} vs {slow}");
    }

    #[test]
    fn invariant_under_row_and_column_permutations(n in 2usize..=6, seed in any::<u64>(), shift in 1usize..6) {
        let a = random_matrix(n, n, &mut rng(seed));
        let p = permanent_ryser(a.view()).unwrap();
        let rows = Array2::from_shape_fn((n, n), |(i, j)| a[[(i + shift) % n, j]]);
        let cols = Array2::from_shape_fn((n, n), |(i, j)| a[[i, (n - 1 - j + shift) % n]]);
        prop_assert!(close(permanent_ryser(rows.view()).unwrap(), p, 1e-10));
        prop_assert!(close(permanent_ryser(cols.view()).unwrap(), p, 1e-10));
        prop_assert!(close(permanent_ryser(a.t()).unwrap(), p, 1e-10));
    }

    #[test]
    fn linear_in_each_row(n in 1usize..=6, seed in any::<u64>(), row in 0usize..6) {
        let row = row % n;
        let mut r = rng(seed);
        let a = random_matrix(n, n, &mut r);
        let b = random_matrix(1, n, &mut r);
        let z = common::complex_normal(&mut r);
        let mut with_b = a.clone();
        with_b.row_mut(row).assign(&b.row(0));
        let mut mixed = a.clone();
        let combo = &a.row(row) + &(&b.row(0) * z);
        mixed.row_mut(row).assign(&combo);
        let expected = permanent_ryser(a.view()).unwrap() + z * permanent_ryser(with_b.view()).unwrap();
        prop_assert!(close(permanent_ryser(mixed.view()).unwrap(), expected, 1e-9));
    }

    #[test]
    fn block_diagonal_factorizes(p in 1usize..=4, q in 1usize..=4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_matrix(p, p, &mut r);
        let b = random_matrix(q, q, &mut r);
        let mut m = Array2::<C64>::zeros((p + q, p + q));
        m.slice_mut(s![..p, ..p]).assign(&a);
        m.slice_mut(s![p.., p..]).assign(&b);
        let expected = permanent_ryser(a.view()).unwrap() * permanent_ryser(b.view()).unwrap();
        prop_assert!(close(permanent_ryser(m.view()).unwrap(), expected, 1e-10));
    }
}

#[test]
fn ones_matrix_gives_factorial() {
    for n in 1..=12 {
        let a = Array2::from_elem((n, n), C64::new(1.0, 0.0));
        let expected: f64 = (1..=n).map(|k| k as f64).product();
        let p = permanent_ryser(a.view()).unwrap();
        assert!(
            (p.re - expected).abs() <= 1e-12 * expected && p.im == 0.0,
            "n={n}: {p}"
        );
    }
}

#[test]
fn size_twenty_is_fast() {
    let a = random_matrix(20, 20, &mut rng(20));
    let start = Instant::now();
    let p = permanent_ryser(a.view()).unwrap();
    assert!(start.elapsed() < Duration::from_secs(5));
    assert!(p.is_finite());
}

#[test]
fn batch_matches_single() {
    let mut r = rng(3);
    let ms: Vec<_> = (0..10).map(|_| random_matrix(5, 5, &mut r)).collect();
    let batch = permanent_batch(&ms).unwrap();
    for (m, p) in ms.iter().zip(batch) {
        assert_eq!(p, permanent_ryser(m.view()).unwrap());
    }
    let mixed = vec![random_matrix(2, 2, &mut r), random_matrix(3, 3, &mut r)];
    assert!(permanent_batch(&mixed).is_err());
}

#[test]
fn method_choice_is_reported() {
    let a = random_matrix(4, 4, &mut rng(1));
    let r = permanent_with(a.view(), Method::Naive).unwrap();
    assert_eq!((r.n, r.method), (4, Method::Naive));
    assert!(permanent_ryser(random_matrix(2, 3, &mut rng(1)).view()).is_err());
}
