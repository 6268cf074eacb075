//! Experiment configuration files.
//!
//! Frequencies are multiples of a reference bandwidth Δω_ref = 1 and times are
//! multiples of 1/Δω_ref. Port labels are 1-based.
//!
//! ```json
//! {
//!   "network": "tritter_fig2a",
//!   "input_ports": [1, 2, 3],
//!   "photons": [
//!     {"omega0_rel": 100.0, "polarization": "H"},
//!     {"omega0_rel": 108.0, "bandwidth_rel": 1.0, "t0_rel": 0.0, "polarization": "linear:30"}
//!   ],
//!   "delta_t_rel": 0.0
//! }
//! ```

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::correlation::Experiment;
use crate::error::{Error, Result};
use crate::network::{Interferometer, NetworkSpec};
use crate::photonics::{SampledSpectrum, SpectralAmplitude};
use crate::types::{JonesVector, PolarizationBasis, PortSample, Tolerances};

/// Upper bound on tabulated spectrum length accepted from a config.
pub const MAX_SPECTRUM_POINTS: usize = 1 << 16;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    network: String,
    input_ports: Vec<usize>,
    photons: Vec<RawPhoton>,
    #[serde(default)]
    delta_t_rel: f64,
    #[serde(default)]
    output_ports: Option<Vec<usize>>,
    #[serde(default)]
    basis: Option<PolarizationSpec>,
    #[serde(default)]
    tolerances: Option<RawTolerances>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhoton {
    #[serde(default)]
    omega0_rel: f64,
    #[serde(default = "one")]
    bandwidth_rel: f64,
    #[serde(default)]
    t0_rel: f64,
    #[serde(default)]
    polarization: Option<PolarizationSpec>,
    #[serde(default)]
    spectrum: Option<RawSpectrum>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    omega_start_rel: f64,
    omega_step_rel: f64,
    values: Vec<[f64; 2]>,
    #[serde(default)]
    normalize: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    unitarity: Option<f64>,
    normalization: Option<f64>,
    quadrature_rel: Option<f64>,
}

fn one() -> f64 {
    1.0
}

/// `"H"`, `"V"`, `"D"`, `"A"`, `"R"`, `"L"`, `"linear:<deg>"` or a complex
/// pair `[[re, im], [re, im]]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PolarizationSpec {
    Name(String),
    Pair([[f64; 2]; 2]),
}

impl PolarizationSpec {
    pub fn resolve(&self) -> Result<JonesVector> {
        match self {
            Self::Name(s) => parse_polarization(s),
            Self::Pair([a, b]) => JonesVector::new(C64::new(a[0], a[1]), C64::new(b[0], b[1])),
        }
    }
}

pub fn parse_polarization(s: &str) -> Result<JonesVector> {
    let s = s.trim();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match s {
        "H" | "h" => return Ok(JonesVector::horizontal()),
        "V" | "v" => return Ok(JonesVector::vertical()),
        "D" | "d" => return Ok(JonesVector::linear(std::f64::consts::FRAC_PI_4)),
        "A" | "a" => return Ok(JonesVector::linear(-std::f64::consts::FRAC_PI_4)),
        "R" | "r" => return JonesVector::new(C64::new(r, 0.0), C64::new(0.0, -r)),
        "L" | "l" => return JonesVector::new(C64::new(r, 0.0), C64::new(0.0, r)),
        _ => {}
    }
    if let Some(deg) = s.strip_prefix("linear:") {
        let deg: f64 = deg
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad polarization angle in {s:?}")))?;
        if !deg.is_finite() {
            return Err(Error::Parse(format!(
                "polarization angle must be finite in {s:?}"
            )));
        }
        return Ok(JonesVector::linear(deg.to_radians()));
    }
    Err(Error::Parse(format!("unknown polarization {s:?}")))
}

/// A validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub network_spec: NetworkSpec,
    pub network: Interferometer,
    pub inputs: PortSample,
    pub photons: Vec<SpectralAmplitude>,
    pub delta_t: f64,
    pub outputs: Option<PortSample>,
    pub basis: PolarizationBasis,
    pub tolerances: Tolerances,
    /// SHA-256 of the config bytes.
    pub hash: String,
}

impl ExperimentConfig {
    pub fn experiment(&self) -> Result<Experiment> {
        Experiment::new(
            self.network.clone(),
            self.inputs.clone(),
            self.photons.clone(),
            self.delta_t,
        )
    }

    /// Configured output sample, or the first N ports.
    pub fn default_outputs(&self) -> Result<PortSample> {
        match &self.outputs {
            Some(o) => Ok(o.clone()),
            None => PortSample::first(self.inputs.len(), self.network.modes()),
        }
    }
}

pub fn config_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    parse_config_str(&text, &base)
}

/// Parses and validates a config; `file:` networks resolve against `base_dir`.
pub fn parse_config_str(text: &str, base_dir: &Path) -> Result<ExperimentConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let tolerances = match &raw.tolerances {
        None => Tolerances::default(),
        Some(t) => {
            let d = Tolerances::default();
            Tolerances::new(
                t.unitarity.unwrap_or(d.unitarity_tol),
                t.normalization.unwrap_or(d.normalization_tol),
                t.quadrature_rel.unwrap_or(d.quadrature_rel_tol),
            )?
        }
    };
    let network_spec: NetworkSpec = raw.network.parse()?;
    let network = Interferometer::from_spec(&network_spec, base_dir, tolerances.unitarity_tol)?;
    let modes = network.modes();
    let inputs = PortSample::from_one_based(&raw.input_ports, modes)
        .map_err(|e| Error::Validation(format!("input_ports: {e}")))?;
    if raw.photons.len() != inputs.len() {
        return Err(Error::Validation(format!(
            "photons: {} photons listed for {} input ports",
            raw.photons.len(),
            inputs.len()
        )));
    }
    // photons are listed in the order of `input_ports`; align them with the sorted sample
    let mut order: Vec<usize> = (0..raw.input_ports.len()).collect();
    order.sort_by_key(|&i| raw.input_ports[i]);
    let photons = order
        .into_iter()
        .map(|i| {
            build_photon(&raw.photons[i], &tolerances)
                .map_err(|e| Error::Validation(format!("photons[{i}]: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if !raw.delta_t_rel.is_finite() {
        return Err(Error::Validation("delta_t_rel must be finite".into()));
    }
    let outputs = raw
        .output_ports
        .as_deref()
        .map(|o| {
            PortSample::from_one_based(o, modes)
                .map_err(|e| Error::Validation(format!("output_ports: {e}")))
        })
        .transpose()?;
    if let Some(o) = &outputs {
        if o.len() != inputs.len() {
            return Err(Error::Validation(format!(
                "output_ports: {} ports for {} photons",
                o.len(),
                inputs.len()
            )));
        }
    }
    let basis = match &raw.basis {
        Some(b) => PolarizationBasis::from_first(b.resolve()?),
        None => PolarizationBasis::standard(),
    };
    Ok(ExperimentConfig {
        network_spec,
        network,
        inputs,
        photons,
        delta_t: raw.delta_t_rel,
        outputs,
        basis,
        tolerances,
        hash: config_hash(text.as_bytes()),
    })
}

fn build_photon(raw: &RawPhoton, tol: &Tolerances) -> Result<SpectralAmplitude> {
    let pol = match &raw.polarization {
        Some(p) => p.resolve()?,
        None => JonesVector::horizontal(),
    };
    match &raw.spectrum {
        None => SpectralAmplitude::gaussian(raw.omega0_rel, raw.bandwidth_rel, raw.t0_rel, pol),
        Some(s) => {
            if s.values.len() > MAX_SPECTRUM_POINTS {
                return Err(Error::TooLarge {
                    what: "spectrum length",
                    size: s.values.len(),
                    limit: MAX_SPECTRUM_POINTS,
                });
            }
            let values = s.values.iter().map(|v| C64::new(v[0], v[1])).collect();
            let spectrum = SampledSpectrum::new(s.omega_start_rel, s.omega_step_rel, values)?;
            if s.normalize {
                SpectralAmplitude::sampled_normalized(spectrum, pol)
            } else {
                SpectralAmplitude::sampled(spectrum, pol, tol.normalization_tol)
            }
        }
    }
}
