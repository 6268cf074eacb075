#![allow(dead_code)]

use mbci::photonics::GramMatrix;
use mbci::types::JonesVector;
use mbci::C64;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn complex_normal<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Array2<C64> {
    Array2::from_shape_simple_fn((rows, cols), || complex_normal(rng))
}

pub fn random_jones<R: Rng>(rng: &mut R) -> JonesVector {
    JonesVector::new(complex_normal(rng), complex_normal(rng)).unwrap()
}

/// Gram matrix of `n` random unit vectors in C^dim.
pub fn random_gram<R: Rng>(n: usize, dim: usize, rng: &mut R) -> GramMatrix {
    let vs: Vec<Vec<C64>> = (0..n)
        .map(|_| {
            let v: Vec<C64> = (0..dim).map(|_| complex_normal(rng)).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|z| z / norm).collect()
        })
        .collect();
    let mut g = Array2::from_shape_fn((n, n), |(i, j)| {
        vs[i].iter().zip(&vs[j]).map(|(a, b)| a.conj() * b).sum()
    });
    for i in 0..n {
        g[[i, i]] = C64::new(1.0, 0.0);
    }
    GramMatrix::from_matrix(g).unwrap()
}

pub fn close(a: C64, b: C64, rel: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm()).max(1e-300)
}
