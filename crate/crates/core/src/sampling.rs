//! Exact sampling of complete detection events (output ports, detection
//! times, basis polarizations) from the N-fold rate, restricted to
//! collision-free outputs.
//!
//! Proposals come from a mixture envelope: by Cauchy–Schwarz over the N!
//! terms of the permanent, |perm T|² ≤ N!·perm(|T|²) entrywise, and every
//! term of the right-hand side is a product of normalized single-photon
//! densities with a closed-form total weight. Drawing a term, then its times,
//! and accepting with probability |perm T|² / (N!·perm |T|²) yields events
//! distributed exactly as the rate.

use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::averaged::{binomial, combinations, pav_table, PavTable, Permutation};
use crate::correlation::{DetectionEvent, Experiment};
use crate::error::{Error, Result};
use crate::permanent::permanent_ryser;
use crate::photonics::{SpectralShape, TemporalAmplitude, WINDOW_SIGMAS};
use crate::types::{PolarizationBasis, PortSample, Tolerances};

pub const MAX_SAMPLER_PHOTONS: usize = 6;
pub const MAX_SAMPLER_OUTPUTS: usize = 10_000;
/// Collision-free mass below which sampling is refused.
pub const MIN_COLLISION_FREE_MASS: f64 = 1e-12;
const ENVELOPE_SLACK: f64 = 1e-12;
const INVERSE_CDF_POINTS: usize = 4097;

#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub max_rejections_per_sample: u64,
    pub basis: PolarizationBasis,
    pub tolerances: Tolerances,
}

impl SamplerConfig {
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        Self {
            experiment,
            seed,
            max_rejections_per_sample: 1_000_000,
            basis: PolarizationBasis::standard(),
            tolerances: Tolerances::default(),
        }
    }
}

/// One accepted event. `basis_indices[d]` is 0 for the first basis vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledEvent {
    #[serde(rename = "ports")]
    pub outputs: PortSample,
    pub times: Vec<f64>,
    pub basis_indices: Vec<usize>,
}

impl SampledEvent {
    pub fn to_detection_event(&self, basis: &PolarizationBasis) -> DetectionEvent {
        DetectionEvent {
            outputs: self.outputs.clone(),
            times: self.times.clone(),
            polarizations: self
                .basis_indices
                .iter()
                .map(|&b| *basis.vector(b))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub events: Vec<SampledEvent>,
    pub proposals: u64,
    pub acceptances: u64,
}

impl SampleBatch {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            return 0.0;
        }
        self.acceptances as f64 / self.proposals as f64
    }
}

/// One mixture component of the envelope for a fixed output sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeTerm {
    /// Detector index → photon index.
    pub sigma: Permutation,
    pub basis_indices: Vec<usize>,
    pub weight: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Weights N!·Π_d |U[d][σ(d)]|²·|⟨e_{λ_d}, ε_{σ(d)}⟩|² of every (σ, λ) term.
pub fn envelope_term_weights(
    exp: &Experiment,
    outputs: &PortSample,
    basis: &PolarizationBasis,
) -> Result<Vec<EnvelopeTerm>> {
    let sub = exp.network().submatrix(outputs, exp.inputs())?;
    let n = outputs.len();
    if n > MAX_SAMPLER_PHOTONS {
        return Err(Error::TooLarge {
            what: "sampler photon count",
            size: n,
            limit: MAX_SAMPLER_PHOTONS,
        });
    }
    let pol_prob: Vec<[f64; 2]> = exp
        .photons()
        .iter()
        .map(|p| {
            [
                basis.first.inner(p.polarization()).norm_sqr(),
                basis.second.inner(p.polarization()).norm_sqr(),
            ]
        })
        .collect();
    let nf = factorial(n);
    let mut terms = Vec::with_capacity(nf as usize * (1 << n));
    for sigma in Permutation::all(n) {
        for outcome in 0usize..(1 << n) {
            let basis_indices: Vec<usize> = (0..n).map(|d| (outcome >> d) & 1).collect();
            let weight = nf
                * (0..n)
                    .map(|d| {
                        sub.entries[[d, sigma.apply(d)]].norm_sqr()
                            * pol_prob[sigma.apply(d)][basis_indices[d]]
                    })
                    .product::<f64>();
            terms.push(EnvelopeTerm {
                sigma: sigma.clone(),
                basis_indices,
                weight,
            });
        }
    }
    Ok(terms)
}

enum TimeSampler {
    Normal(Normal<f64>),
    /// Tabulated CDF of |χ(t)|² on a uniform grid.
    InverseCdf {
        times: Vec<f64>,
        cdf: Vec<f64>,
    },
}

impl TimeSampler {
    fn for_photon(chi: &TemporalAmplitude) -> Result<Self> {
        if let SpectralShape::Gaussian { .. } = chi.source().shape() {
            let normal = Normal::new(chi.arrival_time(), chi.temporal_sigma())
                .map_err(|e| Error::Validation(format!("time distribution: {e}")))?;
            return Ok(Self::Normal(normal));
        }
        let half = WINDOW_SIGMAS * chi.temporal_sigma();
        let lo = chi.arrival_time() - half;
        let step = 2.0 * half / (INVERSE_CDF_POINTS - 1) as f64;
        let times: Vec<f64> = (0..INVERSE_CDF_POINTS)
            .map(|k| lo + k as f64 * step)
            .collect();
        let density: Vec<f64> = times.iter().map(|&t| chi.intensity(t)).collect();
        let mut cdf = vec![0.0; INVERSE_CDF_POINTS];
        for k in 1..INVERSE_CDF_POINTS {
            cdf[k] = cdf[k - 1] + 0.5 * step * (density[k] + density[k - 1]);
        }
        let total = cdf[INVERSE_CDF_POINTS - 1];
        if total.is_nan() || total <= 0.0 {
            return Err(Error::Validation("photon has no temporal support".into()));
        }
        cdf.iter_mut().for_each(|c| *c /= total);
        Ok(Self::InverseCdf { times, cdf })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Normal(n) => n.sample(rng),
            Self::InverseCdf { times, cdf } => {
                let u: f64 = rng.random();
                let k = cdf.partition_point(|&c| c < u).clamp(1, cdf.len() - 1);
                let span = cdf[k] - cdf[k - 1];
                let frac = if span > 0.0 {
                    (u - cdf[k - 1]) / span
                } else {
                    0.5
                };
                times[k - 1] + frac * (times[k] - times[k - 1])
            }
        }
    }
}

/// Rejection sampler for one experiment.
pub struct Sampler {
    cfg: SamplerConfig,
    outputs: Vec<PortSample>,
    output_index: WeightedIndex<f64>,
    time_samplers: Vec<TimeSampler>,
    pol_probs: Vec<[f64; 2]>,
    table: PavTable,
}

impl Sampler {
    pub fn new(cfg: SamplerConfig) -> Result<Self> {
        let exp = &cfg.experiment;
        let n = exp.photon_count();
        let m = exp.network().modes();
        if n > MAX_SAMPLER_PHOTONS {
            return Err(Error::TooLarge {
                what: "sampler photon count",
                size: n,
                limit: MAX_SAMPLER_PHOTONS,
            });
        }
        let count = binomial(m, n);
        if count > MAX_SAMPLER_OUTPUTS as u128 {
            return Err(Error::TooLarge {
                what: "sampler output sample count",
                size: count as usize,
                limit: MAX_SAMPLER_OUTPUTS,
            });
        }
        let gram = exp.gram(&cfg.tolerances)?;
        let table = pav_table(exp.network(), exp.inputs(), &gram)?;
        if table.total_mass <= MIN_COLLISION_FREE_MASS {
            return Err(Error::ZeroCollisionFreeMass(table.total_mass));
        }
        let outputs: Vec<PortSample> = combinations(m, n)
            .iter()
            .map(|d| PortSample::new(d, m))
            .collect::<Result<_>>()?;
        let weights = outputs
            .par_iter()
            .map(|d| {
                let sub = exp.network().submatrix(d, exp.inputs())?;
                let abs2 = sub.entries.mapv(|z| C64::new(z.norm_sqr(), 0.0));
                Ok(permanent_ryser(abs2.view())?.re.max(0.0))
            })
            .collect::<Result<Vec<f64>>>()?;
        let output_index = WeightedIndex::new(&weights)
            .map_err(|e| Error::Validation(format!("output proposal weights: {e}")))?;
        let time_samplers = exp
            .photons()
            .iter()
            .map(TimeSampler::for_photon)
            .collect::<Result<_>>()?;
        let pol_probs = exp
            .photons()
            .iter()
            .map(|p| {
                [
                    cfg.basis.first.inner(p.polarization()).norm_sqr(),
                    cfg.basis.second.inner(p.polarization()).norm_sqr(),
                ]
            })
            .collect();
        Ok(Self {
            cfg,
            outputs,
            output_index,
            time_samplers,
            pol_probs,
            table,
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    /// Averaged probabilities of every collision-free output.
    pub fn table(&self) -> &PavTable {
        &self.table
    }

    pub fn collision_free_mass(&self) -> f64 {
        self.table.total_mass
    }

    /// Draws one accepted event; also returns the number of proposals used.
    pub fn sample_event<R: Rng>(&self, rng: &mut R) -> Result<(SampledEvent, u64)> {
        let exp = &self.cfg.experiment;
        let n = exp.photon_count();
        let inputs = exp.inputs().indices();
        let perms = Permutation::all(n);
        let mut t = Array2::<C64>::zeros((n, n));
        let mut abs2 = Array2::<C64>::zeros((n, n));
        for proposal in 1..=self.cfg.max_rejections_per_sample {
            let outputs = &self.outputs[self.output_index.sample(rng)];
            let sub = exp.network().rows_cols(outputs.indices(), inputs);
            let sigma_weights: Vec<f64> = perms
                .iter()
                .map(|s| (0..n).map(|d| sub[[d, s.apply(d)]].norm_sqr()).product())
                .collect();
            let sigma = match WeightedIndex::new(&sigma_weights) {
                Ok(w) => &perms[w.sample(rng)],
                Err(_) => continue,
            };
            let mut basis_indices = Vec::with_capacity(n);
            let mut times = Vec::with_capacity(n);
            for d in 0..n {
                let photon = sigma.apply(d);
                let probs = self.pol_probs[photon];
                let u: f64 = rng.random::<f64>() * (probs[0] + probs[1]);
                basis_indices.push(usize::from(u >= probs[0]));
                times.push(self.time_samplers[photon].sample(rng));
            }
            for d in 0..n {
                let p = self.cfg.basis.vector(basis_indices[d]);
                for s in 0..n {
                    let z = sub[[d, s]] * exp.photons()[s].projected(p, times[d]);
                    t[[d, s]] = z;
                    abs2[[d, s]] = C64::new(z.norm_sqr(), 0.0);
                }
            }
            let rate = permanent_ryser(t.view())?.norm_sqr();
            let envelope = factorial(n) * permanent_ryser(abs2.view())?.re;
            if rate > envelope * (1.0 + ENVELOPE_SLACK) + f64::MIN_POSITIVE {
                return Err(Error::EnvelopeViolation { rate, envelope });
            }
            if envelope > 0.0 && rng.random::<f64>() * envelope < rate {
                let event = SampledEvent {
                    outputs: outputs.clone(),
                    times,
                    basis_indices,
                };
                return Ok((event, proposal));
            }
        }
        Err(Error::RejectionBudgetExceeded(
            self.cfg.max_rejections_per_sample,
        ))
    }

    /// `count` events; event `i` uses its own stream of a seeded ChaCha8
    /// generator, so the batch is reproducible and independent of threading.
    pub fn sample_batch(&self, count: usize) -> Result<SampleBatch> {
        let drawn = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
                rng.set_stream(i as u64);
                self.sample_event(&mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        let proposals = drawn.iter().map(|(_, p)| p).sum();
        let events: Vec<SampledEvent> = drawn.into_iter().map(|(e, _)| e).collect();
        Ok(SampleBatch {
            acceptances: events.len() as u64,
            events,
            proposals,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson χ² of the batch's output-sample counts against `table`
/// renormalized to its collision-free mass.
pub fn empirical_check(batch: &SampleBatch, table: &PavTable) -> Result<ChiSquareReport> {
    if batch.events.is_empty() {
        return Err(Error::Validation(
            "empirical check needs a non-empty batch".into(),
        ));
    }
    if table.total_mass.is_nan() || table.total_mass <= 0.0 {
        return Err(Error::ZeroCollisionFreeMass(table.total_mass));
    }
    let mut counts: HashMap<&[usize], u64> = HashMap::new();
    for e in &batch.events {
        *counts.entry(e.outputs.indices()).or_default() += 1;
    }
    let total = batch.events.len() as f64;
    let mut statistic = 0.0;
    let mut bins = 0usize;
    let mut matched = 0u64;
    for (d, p) in &table.entries {
        let observed = counts.get(d.indices()).copied().unwrap_or(0);
        matched += observed;
        let expected = total * p.max(0.0) / table.total_mass;
        if expected <= 0.0 {
            if observed > 0 {
                statistic = f64::INFINITY;
            }
            continue;
        }
        bins += 1;
        statistic += (observed as f64 - expected).powi(2) / expected;
    }
    if matched < batch.events.len() as u64 {
        // events on samples missing from the table
        statistic = f64::INFINITY;
    }
    let dof = bins.saturating_sub(1);
    let p_value = if statistic.is_infinite() {
        0.0
    } else if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64)
            .map_err(|e| Error::Validation(format!("chi-squared: {e}")))?;
        dist.sf(statistic)
    };
    Ok(ChiSquareReport {
        statistic,
        dof,
        p_value,
    })
}

/// Kolmogorov–Smirnov distance between the empirical distribution of
/// `samples` and `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
