//! Probabilities of N-fold detections that resolve neither time nor
//! polarization: a sum over permutations ρ of overlap factors f_ρ times
//! permanents of interference-type matrices 𝒜_ρ, its two limits, output
//! tables and a direct time-quadrature oracle.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::correlation::{rate_polarization_insensitive, Experiment};
use crate::error::{Error, Result};
use crate::network::Interferometer;
use crate::permanent::permanent_ryser;
use crate::photonics::{temporal_gram_matrix, GramMatrix, WINDOW_SIGMAS};
use crate::quadrature::gauss_legendre;
use crate::types::{JonesVector, PolarizationBasis, PortSample, Tolerances};

pub const MAX_PHOTONS: usize = 10;
pub const MAX_TABLE_ENTRIES: usize = 1_000_000;
pub const MAX_ORACLE_PHOTONS: usize = 3;

/// A bijection on {0..N−1}, stored as its image array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &i in &image {
            if i >= image.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Validation(format!("{image:?} is not a permutation")));
            }
        }
        Ok(Self(image))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Self(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// All N! permutations, generated by Heap's algorithm.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut a: Vec<usize> = (0..n).collect();
        let mut out = vec![Self(a.clone())];
        let mut c = vec![0usize; n];
        let mut i = 1;
        while i < n {
            if c[i] < i {
                if i % 2 == 0 {
                    a.swap(0, i);
                } else {
                    a.swap(c[i], i);
                }
                out.push(Self(a.clone()));
                c[i] += 1;
                i = 1;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        out
    }
}

/// f_ρ = Π_s g[s][ρ(s)].
pub fn overlap_factor(g: &GramMatrix, rho: &Permutation) -> Result<C64> {
    if g.size() != rho.len() {
        return Err(Error::SizeMismatch(format!(
            "gram matrix {} vs permutation {}",
            g.size(),
            rho.len()
        )));
    }
    Ok((0..rho.len()).map(|s| g.get(s, rho.apply(s))).product())
}

/// 𝒜_ρ[d][s] = U*[d][s]·U[d][ρ(s)].
pub fn interference_matrix(
    u: &Interferometer,
    outputs: &PortSample,
    inputs: &PortSample,
    rho: &Permutation,
) -> Result<Array2<C64>> {
    let sub = u.submatrix(outputs, inputs)?;
    if rho.len() != inputs.len() {
        return Err(Error::SizeMismatch(format!(
            "permutation of {} for {} photons",
            rho.len(),
            inputs.len()
        )));
    }
    Ok(interference_of(&sub.entries, rho))
}

fn interference_of(sub: &Array2<C64>, rho: &Permutation) -> Array2<C64> {
    Array2::from_shape_fn(sub.dim(), |(d, s)| {
        sub[[d, s]].conj() * sub[[d, rho.apply(s)]]
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragedResult {
    /// Real part of the permutation sum.
    pub value: f64,
    /// Imaginary part of the unpaired term sum; zero up to roundoff.
    pub imaginary_residue: f64,
    /// f_ρ·perm 𝒜_ρ for each ρ, in generation order.
    pub terms: Vec<(Permutation, C64)>,
}

/// Σ_ρ f_ρ perm[conj(W[d][s])·W[d][ρ(s)]] for an N×N amplitude matrix `w`.
/// Terms for ρ and ρ⁻¹ are complex conjugates and are added as pairs.
fn permutation_sum(w: &Array2<C64>, g: &GramMatrix) -> Result<AveragedResult> {
    let n = w.nrows();
    if g.size() != n {
        return Err(Error::SizeMismatch(format!(
            "gram matrix {} for {} photons",
            g.size(),
            n
        )));
    }
    if n > MAX_PHOTONS {
        return Err(Error::TooLarge {
            what: "averaged probability photon count",
            size: n,
            limit: MAX_PHOTONS,
        });
    }
    let mut terms = Vec::new();
    let mut raw = C64::new(0.0, 0.0);
    let mut paired = 0.0;
    for rho in Permutation::all(n) {
        let f = overlap_factor(g, &rho)?;
        let term = if f == C64::new(0.0, 0.0) {
            f
        } else {
            f * permanent_ryser(interference_of(w, &rho).view())?
        };
        raw += term;
        let inv = rho.inverse();
        if inv == rho {
            paired += term.re;
        } else if rho < inv {
            paired += 2.0 * term.re;
        }
        terms.push((rho, term));
    }
    Ok(AveragedResult {
        value: paired,
        imaginary_residue: raw.im,
        terms,
    })
}

/// P_av(D; S) = Σ_ρ f_ρ(S)·perm 𝒜_ρ^(D,S).
pub fn averaged_probability(
    u: &Interferometer,
    outputs: &PortSample,
    inputs: &PortSample,
    g: &GramMatrix,
) -> Result<AveragedResult> {
    let sub = u.submatrix(outputs, inputs)?;
    permutation_sum(&sub.entries, g)
}

/// Fully distinguishable limit: perm[|U_{d,s}|²].
pub fn averaged_probability_distinguishable(
    u: &Interferometer,
    outputs: &PortSample,
    inputs: &PortSample,
) -> Result<f64> {
    let sub = u.submatrix(outputs, inputs)?;
    let abs2 = sub.entries.mapv(|z| C64::new(z.norm_sqr(), 0.0));
    Ok(permanent_ryser(abs2.view())?.re)
}

/// Fully indistinguishable limit: |perm U^(D,S)|².
pub fn averaged_probability_ideal(
    u: &Interferometer,
    outputs: &PortSample,
    inputs: &PortSample,
) -> Result<f64> {
    let sub = u.submatrix(outputs, inputs)?;
    Ok(permanent_ryser(sub.entries.view())?.norm_sqr())
}

/// Probability of detecting the N photons in `outputs` with detector `d`
/// registering basis vector `pols[d]`, integrated over all detection times.
pub fn polarization_resolved_probability(
    exp: &Experiment,
    outputs: &PortSample,
    pols: &[JonesVector],
    tol: &Tolerances,
) -> Result<f64> {
    if pols.len() != outputs.len() {
        return Err(Error::SizeMismatch(format!(
            "{} polarizations for {} detectors",
            pols.len(),
            outputs.len()
        )));
    }
    let sub = exp.network().submatrix(outputs, exp.inputs())?;
    let photons = exp.photons();
    let w = Array2::from_shape_fn(sub.entries.dim(), |(d, s)| {
        sub.entries[[d, s]] * pols[d].inner(photons[s].polarization())
    });
    let g = temporal_gram_matrix(photons, tol)?;
    Ok(permutation_sum(&w, &g)?.value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PavTable {
    pub inputs: PortSample,
    /// Every collision-free output sample in lexicographic order.
    pub entries: Vec<(PortSample, f64)>,
    /// Σ_D P_av(D); the remainder up to 1 is carried by bunched outcomes.
    pub total_mass: f64,
}

impl PavTable {
    pub fn probability(&self, outputs: &PortSample) -> Option<f64> {
        self.entries
            .binary_search_by(|(d, _)| d.indices().cmp(outputs.indices()))
            .ok()
            .map(|i| self.entries[i].1)
    }
}

pub fn binomial(m: usize, n: usize) -> u128 {
    if n > m {
        return 0;
    }
    let n = n.min(m - n);
    let mut acc: u128 = 1;
    for k in 0..n {
        acc = acc.saturating_mul((m - k) as u128) / (k as u128 + 1);
    }
    acc
}

/// All n-subsets of {0..m−1} in lexicographic order.
pub fn combinations(m: usize, n: usize) -> Vec<Vec<usize>> {
    if n > m {
        return vec![];
    }
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..n).collect();
    loop {
        out.push(c.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if c[i] < m - n + i {
                break;
            }
        }
        c[i] += 1;
        for j in (i + 1)..n {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// P_av for every collision-free output sample.
pub fn pav_table(u: &Interferometer, inputs: &PortSample, g: &GramMatrix) -> Result<PavTable> {
    let m = u.modes();
    let n = inputs.len();
    let count = binomial(m, n);
    if count > MAX_TABLE_ENTRIES as u128 {
        return Err(Error::TooLarge {
            what: "output sample count",
            size: count.min(usize::MAX as u128) as usize,
            limit: MAX_TABLE_ENTRIES,
        });
    }
    let entries = combinations(m, n)
        .into_par_iter()
        .map(|d| {
            let d = PortSample::new(&d, m)?;
            let p = averaged_probability(u, &d, inputs, g)?.value;
            Ok((d, p))
        })
        .collect::<Result<Vec<_>>>()?;
    let total_mass = entries.iter().map(|(_, p)| p).sum();
    Ok(PavTable {
        inputs: inputs.clone(),
        entries,
        total_mass,
    })
}

/// Node counts per time axis tried by the oracle, doubling from the first.
const ORACLE_NODES: [usize; 5] = [32, 64, 128, 256, 512];

/// Direct quadrature of the polarization-summed rate over all N detection
/// times with a tensor-product Gauss–Legendre rule, refined until two
/// successive node counts agree. Independent of the permutation-sum route;
/// N ≤ 3.
pub fn pav_quadrature_oracle(
    exp: &Experiment,
    outputs: &PortSample,
    basis: &PolarizationBasis,
    tol: &Tolerances,
) -> Result<f64> {
    let n = exp.photon_count();
    if n > MAX_ORACLE_PHOTONS {
        return Err(Error::TooLarge {
            what: "quadrature oracle photon count",
            size: n,
            limit: MAX_ORACLE_PHOTONS,
        });
    }
    // validates sizes before integrating
    rate_polarization_insensitive(exp, outputs, &vec![0.0; n], basis)?;
    let sub = exp.network().submatrix(outputs, exp.inputs())?.entries;
    let proj: Vec<[C64; 2]> = exp
        .photons()
        .iter()
        .map(|p| {
            [
                basis.first.inner(p.polarization()),
                basis.second.inner(p.polarization()),
            ]
        })
        .collect();
    let window = exp.time_window(WINDOW_SIGMAS);
    // 512³ nodes is out of reach for three photons
    let max_nodes = if n == 3 { 256 } else { 512 };
    let mut previous: Option<f64> = None;
    let mut change = f64::INFINITY;
    for nodes in ORACLE_NODES.into_iter().filter(|&k| k <= max_nodes) {
        let estimate = tensor_rule(exp, &sub, &proj, window, nodes)?;
        if let Some(p) = previous {
            change = (estimate - p).abs();
            if change <= tol.quadrature_rel_tol * estimate.abs() + 1e-13 {
                return Ok(estimate);
            }
        }
        previous = Some(estimate);
    }
    Err(Error::QuadratureFailure {
        tol: tol.quadrature_rel_tol,
        estimate: previous.unwrap_or(f64::NAN),
        change,
    })
}

fn tensor_rule(
    exp: &Experiment,
    sub: &Array2<C64>,
    proj: &[[C64; 2]],
    (center, half): (f64, f64),
    nodes: usize,
) -> Result<f64> {
    let n = sub.nrows();
    let (x, w) = gauss_legendre(nodes);
    let times: Vec<f64> = x.iter().map(|x| center + half * x).collect();
    // amp[s][k] = χ_s(t_k)
    let amp: Vec<Vec<C64>> = exp
        .photons()
        .iter()
        .map(|p| times.iter().map(|&t| p.scalar(t)).collect())
        .collect();
    let inner_points = nodes.pow(n as u32 - 1);
    let slices = (0..nodes)
        .into_par_iter()
        .map(|first| {
            let mut t = Array2::<C64>::zeros((n, n));
            let mut acc = 0.0;
            let mut idx = [0usize; MAX_ORACLE_PHOTONS];
            for rest in 0..inner_points {
                idx[0] = first;
                let mut r = rest;
                let mut weight = w[first];
                for slot in idx.iter_mut().take(n).skip(1) {
                    *slot = r % nodes;
                    r /= nodes;
                    weight *= w[*slot];
                }
                let mut rate = 0.0;
                for outcome in 0..(1usize << n) {
                    for d in 0..n {
                        let b = (outcome >> d) & 1;
                        for s in 0..n {
                            t[[d, s]] = sub[[d, s]] * proj[s][b] * amp[s][idx[d]];
                        }
                    }
                    rate += permanent_ryser(t.view())?.norm_sqr();
                }
                acc += weight * rate;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(slices.iter().sum::<f64>() * half.powi(n as i32))
}
