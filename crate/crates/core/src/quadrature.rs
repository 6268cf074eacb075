//! One-dimensional quadrature rules used by the overlap integrals, the
//! mean-time reduction of landscapes and the averaged-probability oracle.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const MIN_LEVEL: usize = 5;
const MAX_LEVEL: usize = 22;

/// Romberg integration of a complex integrand on `[a, b]`: trapezoid sums
/// with interval halving and Richardson extrapolation.
///
/// Converges when successive diagonal entries differ by at most
/// `rel_tol * |I| + abs_tol`.
pub fn romberg_complex<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<C64>
where
    F: Fn(f64) -> C64,
{
    let h0 = b - a;
    let mut prev_row: Vec<C64> = vec![(f(a) + f(b)) * (0.5 * h0)];
    let mut last_change = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        let pieces = 1usize << (level - 1);
        let h = h0 / pieces as f64;
        let mut mid = C64::new(0.0, 0.0);
        for k in 0..pieces {
            mid += f(a + (k as f64 + 0.5) * h);
        }
        let mut row = Vec::with_capacity(level + 1);
        row.push(prev_row[0] * 0.5 + mid * (0.5 * h));
        let mut factor = 1.0;
        for j in 1..=level {
            factor *= 4.0;
            let extrapolated = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (factor - 1.0);
            row.push(extrapolated);
        }
        let best = row[level];
        last_change = (best - prev_row[level - 1]).norm();
        if level >= MIN_LEVEL && last_change <= rel_tol * best.norm() + abs_tol {
            return Ok(best);
        }
        prev_row = row;
    }
    Err(Error::QuadratureFailure {
        tol: rel_tol,
        estimate: prev_row[MAX_LEVEL].norm(),
        change: last_change,
    })
}

pub fn romberg<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    romberg_complex(|x| C64::new(f(x), 0.0), a, b, rel_tol, abs_tol).map(|z| z.re)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
