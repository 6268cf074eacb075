//! Time- and polarization-resolved N-fold detection rates, the equal-time
//! factorization, three-photon landscapes and polarization scans.

use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::Interferometer;
use crate::permanent::permanent_ryser;
use crate::photonics::{gram_matrix, GramMatrix, SpectralAmplitude, TemporalAmplitude};
use crate::quadrature::gauss_legendre;
use crate::types::{JonesVector, PolarizationBasis, PortSample, Tolerances};

pub const MAX_GRID_NODES: usize = 10_000_000;

/// N photons in arbitrary pure spectral states entering ports `inputs`.
#[derive(Debug, Clone)]
pub struct Experiment {
    network: Interferometer,
    inputs: PortSample,
    photons: Vec<TemporalAmplitude>,
    delay: f64,
}

impl Experiment {
    pub fn new(
        network: Interferometer,
        inputs: PortSample,
        spectra: Vec<SpectralAmplitude>,
        delay: f64,
    ) -> Result<Self> {
        if inputs.modes() != network.modes() {
            return Err(Error::SizeMismatch(format!(
                "input sample declared for {} ports, network has {}",
                inputs.modes(),
                network.modes()
            )));
        }
        if spectra.len() != inputs.len() {
            return Err(Error::SizeMismatch(format!(
                "{} photons for {} input ports",
                spectra.len(),
                inputs.len()
            )));
        }
        let photons = spectra
            .into_iter()
            .map(|s| TemporalAmplitude::new(s, delay))
            .collect();
        Ok(Self {
            network,
            inputs,
            photons,
            delay,
        })
    }

    pub fn network(&self) -> &Interferometer {
        &self.network
    }

    pub fn inputs(&self) -> &PortSample {
        &self.inputs
    }

    pub fn photons(&self) -> &[TemporalAmplitude] {
        &self.photons
    }

    pub fn photon_count(&self) -> usize {
        self.photons.len()
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn gram(&self, tol: &Tolerances) -> Result<GramMatrix> {
        gram_matrix(&self.photons, tol)
    }

    /// Center and half-width of the time window containing every pulse.
    pub fn time_window(&self, sigmas: f64) -> (f64, f64) {
        let lo = self
            .photons
            .iter()
            .map(|p| p.arrival_time())
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .photons
            .iter()
            .map(|p| p.arrival_time())
            .fold(f64::NEG_INFINITY, f64::max);
        let sigma = self.max_sigma();
        (0.5 * (lo + hi), 0.5 * (hi - lo) + sigmas * sigma)
    }

    pub fn max_sigma(&self) -> f64 {
        self.photons
            .iter()
            .map(|p| p.temporal_sigma())
            .fold(0.0, f64::max)
    }

    fn check_outputs(&self, outputs: &PortSample) -> Result<()> {
        if outputs.modes() != self.network.modes() {
            return Err(Error::SizeMismatch(format!(
                "output sample declared for {} ports, network has {}",
                outputs.modes(),
                self.network.modes()
            )));
        }
        if outputs.len() != self.photons.len() {
            return Err(Error::SizeMismatch(format!(
                "{} detectors for {} photons",
                outputs.len(),
                self.photons.len()
            )));
        }
        Ok(())
    }
}

/// One N-fold detection: ports, times and detected polarizations, aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionEvent {
    pub outputs: PortSample,
    pub times: Vec<f64>,
    pub polarizations: Vec<JonesVector>,
}

impl DetectionEvent {
    pub fn new(
        outputs: PortSample,
        times: Vec<f64>,
        polarizations: Vec<JonesVector>,
    ) -> Result<Self> {
        if times.len() != outputs.len() || polarizations.len() != outputs.len() {
            return Err(Error::SizeMismatch(format!(
                "{} ports, {} times, {} polarizations",
                outputs.len(),
                times.len(),
                polarizations.len()
            )));
        }
        Ok(Self {
            outputs,
            times,
            polarizations,
        })
    }

    /// All detectors at time `t` with polarization `p`.
    pub fn equal(outputs: PortSample, t: f64, p: JonesVector) -> Self {
        let n = outputs.len();
        Self {
            outputs,
            times: vec![t; n],
            polarizations: vec![p; n],
        }
    }
}

/// T[d][s] = U[d][s]·⟨p_d, χ_s(t_d)⟩, rows ordered by the output sample and
/// columns by the input sample.
pub fn detection_matrix(exp: &Experiment, ev: &DetectionEvent) -> Result<Array2<C64>> {
    exp.check_outputs(&ev.outputs)?;
    Ok(detection_matrix_unchecked(
        exp,
        ev.outputs.indices(),
        &ev.times,
        &ev.polarizations,
    ))
}

fn detection_matrix_unchecked(
    exp: &Experiment,
    outputs: &[usize],
    times: &[f64],
    pols: &[JonesVector],
) -> Array2<C64> {
    let n = outputs.len();
    let inputs = exp.inputs.indices();
    Array2::from_shape_fn((n, n), |(i, j)| {
        exp.network.entry(outputs[i], inputs[j]) * exp.photons[j].projected(&pols[i], times[i])
    })
}

/// N-fold detection rate |perm T|².
pub fn rate(exp: &Experiment, ev: &DetectionEvent) -> Result<f64> {
    let t = detection_matrix(exp, ev)?;
    Ok(permanent_ryser(t.view())?.norm_sqr())
}

/// Rate summed over all 2^N outcomes of a polarization measurement in `basis`.
pub fn rate_polarization_insensitive(
    exp: &Experiment,
    outputs: &PortSample,
    times: &[f64],
    basis: &PolarizationBasis,
) -> Result<f64> {
    exp.check_outputs(outputs)?;
    if times.len() != outputs.len() {
        return Err(Error::SizeMismatch(format!(
            "{} times for {} detectors",
            times.len(),
            outputs.len()
        )));
    }
    insensitive_unchecked(exp, outputs.indices(), times, basis)
}

fn insensitive_unchecked(
    exp: &Experiment,
    outputs: &[usize],
    times: &[f64],
    basis: &PolarizationBasis,
) -> Result<f64> {
    let n = outputs.len();
    if n >= 32 {
        return Err(Error::TooLarge {
            what: "polarization outcome count (photons)",
            size: n,
            limit: 31,
        });
    }
    let inputs = exp.inputs.indices();
    // scalar amplitudes and polarization projections are shared by all outcomes
    let scalar = Array2::from_shape_fn((n, n), |(i, j)| {
        exp.network.entry(outputs[i], inputs[j]) * exp.photons[j].scalar(times[i])
    });
    let proj: Vec<[C64; 2]> = exp
        .photons
        .iter()
        .map(|p| {
            [
                basis.first.inner(p.polarization()),
                basis.second.inner(p.polarization()),
            ]
        })
        .collect();
    let mut total = 0.0;
    let mut t = Array2::<C64>::zeros((n, n));
    for outcome in 0u32..(1 << n) {
        for i in 0..n {
            let b = ((outcome >> i) & 1) as usize;
            for j in 0..n {
                t[[i, j]] = scalar[[i, j]] * proj[j][b];
            }
        }
        total += permanent_ryser(t.view())?.norm_sqr();
    }
    Ok(total)
}

/// |perm U^(D,S)|²·Π_s |⟨p, χ_s(t)⟩|², the rate when every detector fires at
/// time `t` in polarization `p`.
pub fn equal_time_rate(
    exp: &Experiment,
    outputs: &PortSample,
    t: f64,
    p: &JonesVector,
) -> Result<f64> {
    exp.check_outputs(outputs)?;
    let sub = exp.network.submatrix(outputs, &exp.inputs)?;
    let perm = permanent_ryser(sub.entries.view())?.norm_sqr();
    let factor: f64 = exp
        .photons
        .iter()
        .map(|chi| chi.projected(p, t).norm_sqr())
        .product();
    Ok(perm * factor)
}

/// How the absolute (mean) detection time is handled in a landscape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanTime {
    /// Gauss–Legendre integral over the mean time, `nodes` points spanning
    /// ±`half_width_sigmas` temporal sigmas around the pulses.
    Marginal {
        nodes: usize,
        half_width_sigmas: f64,
    },
    /// Mean detection time held at a fixed value.
    Fixed(f64),
}

impl Default for MeanTime {
    fn default() -> Self {
        MeanTime::Marginal {
            nodes: 64,
            half_width_sigmas: 8.0,
        }
    }
}

impl FromStr for MeanTime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "marginal" {
            return Ok(Self::default());
        }
        if let Some(v) = s.strip_prefix("fixed:") {
            let t: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad mean time {v:?}")))?;
            if !t.is_finite() {
                return Err(Error::Parse(format!("mean time must be finite, got {v:?}")));
            }
            return Ok(Self::Fixed(t));
        }
        Err(Error::Parse(format!(
            "mean-time mode must be \"marginal\" or \"fixed:<t>\", got {s:?}"
        )))
    }
}

/// Row-major 2D grid: rows follow `x`, columns follow `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2 {
    pub x_name: String,
    pub x: Vec<f64>,
    pub y_name: String,
    pub y: Vec<f64>,
    pub values: Vec<f64>,
}

impl Grid2 {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.y.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.y.len()..(i + 1) * self.y.len()]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.x.len()).map(|i| self.get(i, j)).collect()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Index of the node closest to `(x, y)`.
    pub fn nearest(&self, x: f64, y: f64) -> (usize, usize) {
        let idx = |axis: &[f64], v: f64| {
            axis.iter()
                .enumerate()
                .min_by(|a, b| (a.1 - v).abs().total_cmp(&(b.1 - v).abs()))
                .map(|(i, _)| i)
                .unwrap_or(0)
        };
        (idx(&self.x, x), idx(&self.y, y))
    }
}

/// `steps` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..steps)
            .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// Relative-time axes of a three-photon landscape.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeGrid {
    pub tau21: Vec<f64>,
    pub tau32: Vec<f64>,
}

impl LandscapeGrid {
    /// Both axes over `[-range, range]` with `steps` points.
    pub fn symmetric(range: f64, steps: usize) -> Self {
        Self {
            tau21: linspace(-range, range, steps),
            tau32: linspace(-range, range, steps),
        }
    }

    pub fn nodes(&self) -> usize {
        self.tau21.len().saturating_mul(self.tau32.len())
    }
}

/// Polarization-insensitive three-fold rate at relative times (τ21, τ32),
/// reduced over the mean detection time according to `mode`.
pub fn landscape_node(
    exp: &Experiment,
    outputs: &PortSample,
    tau21: f64,
    tau32: f64,
    mode: &MeanTime,
    basis: &PolarizationBasis,
) -> Result<f64> {
    let nodes = match mode {
        MeanTime::Marginal { nodes, .. } => gauss_legendre(*nodes),
        MeanTime::Fixed(_) => (vec![], vec![]),
    };
    landscape_node_with(exp, outputs.indices(), tau21, tau32, mode, &nodes, basis)
}

fn landscape_node_with(
    exp: &Experiment,
    outputs: &[usize],
    tau21: f64,
    tau32: f64,
    mode: &MeanTime,
    rule: &(Vec<f64>, Vec<f64>),
    basis: &PolarizationBasis,
) -> Result<f64> {
    let at_mean = |mean: f64| {
        let t1 = mean - (2.0 * tau21 + tau32) / 3.0;
        let times = [t1, t1 + tau21, t1 + tau21 + tau32];
        insensitive_unchecked(exp, outputs, &times, basis)
    };
    match mode {
        MeanTime::Fixed(t) => at_mean(*t),
        MeanTime::Marginal {
            half_width_sigmas, ..
        } => {
            let (center, half) = exp.time_window(*half_width_sigmas);
            let mut acc = 0.0;
            for (x, w) in rule.0.iter().zip(&rule.1) {
                acc += w * at_mean(center + half * x)?;
            }
            Ok(acc * half)
        }
    }
}

/// Three-photon coincidence landscape over relative detection times. Rows
/// follow τ21 = t2 − t1, columns τ32 = t3 − t2.
pub fn landscape(
    exp: &Experiment,
    outputs: &PortSample,
    grid: &LandscapeGrid,
    mode: &MeanTime,
    basis: &PolarizationBasis,
) -> Result<Grid2> {
    require_three(exp)?;
    exp.check_outputs(outputs)?;
    let nodes = grid.nodes();
    if nodes > MAX_GRID_NODES {
        return Err(Error::GridTooFine {
            nodes,
            limit: MAX_GRID_NODES,
        });
    }
    if let MeanTime::Marginal { nodes: 0, .. } = mode {
        return Err(Error::Validation(
            "mean-time quadrature needs at least one node".into(),
        ));
    }
    let rule = match mode {
        MeanTime::Marginal { nodes, .. } => gauss_legendre(*nodes),
        MeanTime::Fixed(_) => (vec![], vec![]),
    };
    let cols = grid.tau32.len();
    let values = (0..nodes)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / cols, k % cols);
            landscape_node_with(
                exp,
                outputs.indices(),
                grid.tau21[i],
                grid.tau32[j],
                mode,
                &rule,
                basis,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Grid2 {
        x_name: "tau21".into(),
        x: grid.tau21.clone(),
        y_name: "tau32".into(),
        y: grid.tau32.clone(),
        values,
    })
}

fn require_three(exp: &Experiment) -> Result<()> {
    if exp.photon_count() != 3 {
        return Err(Error::Validation(format!(
            "needs exactly 3 photons, experiment has {}",
            exp.photon_count()
        )));
    }
    Ok(())
}

/// Rate at equal detection times `t` with the first detector projecting on
/// `trigger` and the other two on linear polarizations α (rows) and β (columns).
pub fn polarization_scan(
    exp: &Experiment,
    outputs: &PortSample,
    t: f64,
    trigger: &JonesVector,
    alphas: &[f64],
    betas: &[f64],
) -> Result<Grid2> {
    require_three(exp)?;
    exp.check_outputs(outputs)?;
    let nodes = alphas.len().saturating_mul(betas.len());
    if nodes > MAX_GRID_NODES {
        return Err(Error::GridTooFine {
            nodes,
            limit: MAX_GRID_NODES,
        });
    }
    let times = [t; 3];
    let values = (0..nodes)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (alphas[k / betas.len()], betas[k % betas.len()]);
            let pols = [*trigger, JonesVector::linear(a), JonesVector::linear(b)];
            let m = detection_matrix_unchecked(exp, outputs.indices(), &times, &pols);
            Ok(permanent_ryser(m.view())?.norm_sqr())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Grid2 {
        x_name: "alpha".into(),
        x: alphas.to_vec(),
        y_name: "beta".into(),
        y: betas.to_vec(),
        values,
    })
}

/// (max − min)/(max + min); zero for an all-zero grid.
pub fn fringe_visibility(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if values.is_empty() || max + min <= 0.0 {
        return 0.0;
    }
    (max - min) / (max + min)
}
