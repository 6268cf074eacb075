//! Matrix permanents: Ryser's inclusion–exclusion formula with Gray-code
//! row-sum updates, and a factorial-time enumeration used as an oracle.

use std::fmt;

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub const NAIVE_LIMIT: usize = 10;
pub const RYSER_LIMIT: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ryser,
    Naive,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Ryser => "ryser",
            Method::Naive => "naive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermanentResult {
    pub value: C64,
    pub n: usize,
    pub method: Method,
}

pub fn permanent_with(a: ArrayView2<C64>, method: Method) -> Result<PermanentResult> {
    let value = match method {
        Method::Ryser => permanent_ryser(a)?,
        Method::Naive => permanent_naive(a)?,
    };
    Ok(PermanentResult {
        value,
        n: a.nrows(),
        method,
    })
}

fn square_dim(a: &ArrayView2<C64>) -> Result<usize> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::NotSquare { rows: r, cols: c });
    }
    Ok(r)
}

/// Σ_σ Π_i a[i][σ(i)] over all permutations, by Heap's algorithm.
pub fn permanent_naive(a: ArrayView2<C64>) -> Result<C64> {
    let n = square_dim(&a)?;
    if n > NAIVE_LIMIT {
        return Err(Error::TooLarge {
            what: "naive permanent",
            size: n,
            limit: NAIVE_LIMIT,
        });
    }
    let mut sigma: Vec<usize> = (0..n).collect();
    let product = |sigma: &[usize]| {
        sigma
            .iter()
            .enumerate()
            .map(|(i, &j)| a[[i, j]])
            .product::<C64>()
    };
    let mut total = product(&sigma);
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                sigma.swap(0, i);
            } else {
                sigma.swap(c[i], i);
            }
            total += product(&sigma);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(total)
}

/// Kahan-compensated complex accumulator.
#[derive(Default)]
struct KahanSum {
    sum: C64,
    comp: C64,
}

impl KahanSum {
    fn add(&mut self, x: C64) {
        let y_re = x.re - self.comp.re;
        let t_re = self.sum.re + y_re;
        self.comp.re = (t_re - self.sum.re) - y_re;
        self.sum.re = t_re;
        let y_im = x.im - self.comp.im;
        let t_im = self.sum.im + y_im;
        self.comp.im = (t_im - self.sum.im) - y_im;
        self.sum.im = t_im;
    }
}

/// perm(A) = (−1)^n Σ_{S⊆cols} (−1)^{|S|} Π_i Σ_{j∈S} a[i][j], visiting the
/// subsets in Gray-code order so each step adds or removes one column.
pub fn permanent_ryser(a: ArrayView2<C64>) -> Result<C64> {
    let n = square_dim(&a)?;
    if n > RYSER_LIMIT {
        return Err(Error::TooLarge {
            what: "ryser permanent",
            size: n,
            limit: RYSER_LIMIT,
        });
    }
    match n {
        0 => return Ok(C64::new(1.0, 0.0)),
        1 => return Ok(a[[0, 0]]),
        2 => return Ok(a[[0, 0]] * a[[1, 1]] + a[[0, 1]] * a[[1, 0]]),
        _ => {}
    }
    // row-major copy so each column update walks contiguous memory
    let cols: Vec<C64> = a.t().iter().copied().collect();
    let mut row_sums = vec![C64::new(0.0, 0.0); n];
    let mut total = KahanSum::default();
    let mut gray: u64 = 0;
    for k in 1..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        gray ^= 1 << j;
        let col = &cols[j * n..(j + 1) * n];
        if gray & (1 << j) != 0 {
            row_sums.iter_mut().zip(col).for_each(|(s, v)| *s += v);
        } else {
            row_sums.iter_mut().zip(col).for_each(|(s, v)| *s -= v);
        }
        let prod: C64 = row_sums.iter().product();
        if (n - gray.count_ones() as usize).is_multiple_of(2) {
            total.add(prod);
        } else {
            total.add(-prod);
        }
    }
    Ok(total.sum)
}

pub fn permanent(a: ArrayView2<C64>) -> Result<C64> {
    permanent_ryser(a)
}

/// Ryser permanents of a batch of equally sized matrices, evaluated in
/// parallel; output `i` belongs to input `i`.
pub fn permanent_batch(matrices: &[Array2<C64>]) -> Result<Vec<C64>> {
    if let Some(first) = matrices.first() {
        let dim = first.dim();
        if let Some(m) = matrices.iter().find(|m| m.dim() != dim) {
            return Err(Error::SizeMismatch(format!(
                "batch mixes {:?} and {:?} matrices",
                dim,
                m.dim()
            )));
        }
    }
    matrices
        .par_iter()
        .map(|m| permanent_ryser(m.view()))
        .collect()
}
