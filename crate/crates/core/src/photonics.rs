//! Photon wavepackets: spectral amplitudes, their temporal transforms,
//! detection densities and the pairwise overlap (Gram) matrix.
//!
//! Conventions: the Fourier transform is unitary with kernel `e^{-iωt}`,
//! emission time enters the spectrum as `e^{iωt₀}`, and polarization is a
//! constant Jones vector factored out of the spectrum.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quadrature::romberg_complex;
use crate::types::{JonesVector, Tolerances};

/// Half-width of overlap quadrature windows, in temporal standard deviations.
pub const WINDOW_SIGMAS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralShape {
    /// Gaussian spectrum with |ξ|² of variance `bandwidth²`.
    Gaussian {
        center: f64,
        bandwidth: f64,
        emission_time: f64,
    },
    Sampled(SampledSpectrum),
}

/// Complex spectrum tabulated on a uniform frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSpectrum {
    omega_start: f64,
    omega_step: f64,
    values: Vec<C64>,
}

impl SampledSpectrum {
    pub const MIN_POINTS: usize = 8;

    pub fn new(omega_start: f64, omega_step: f64, values: Vec<C64>) -> Result<Self> {
        if values.len() < Self::MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} points, got {}",
                Self::MIN_POINTS,
                values.len()
            )));
        }
        if !(omega_step > 0.0 && omega_step.is_finite() && omega_start.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "bad grid start {omega_start} / step {omega_step}"
            )));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::InvalidGrid("non-finite spectral value".into()));
        }
        Ok(Self {
            omega_start,
            omega_step,
            values,
        })
    }

    pub fn omega(&self, k: usize) -> f64 {
        self.omega_start + k as f64 * self.omega_step
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn omega_step(&self) -> f64 {
        self.omega_step
    }

    fn trapezoid_weight(&self, k: usize) -> f64 {
        if k == 0 || k + 1 == self.values.len() {
            0.5 * self.omega_step
        } else {
            self.omega_step
        }
    }

    /// Trapezoid estimate of ∫|ξ|² dω.
    pub fn norm_sqr(&self) -> f64 {
        (0..self.values.len())
            .map(|k| self.trapezoid_weight(k) * self.values[k].norm_sqr())
            .sum()
    }

    fn scaled(mut self, factor: f64) -> Self {
        for v in &mut self.values {
            *v *= factor;
        }
        self
    }

    fn derivative(&self, k: usize) -> C64 {
        let n = self.values.len();
        let h = self.omega_step;
        if k == 0 {
            (self.values[1] - self.values[0]) / h
        } else if k + 1 == n {
            (self.values[n - 1] - self.values[n - 2]) / h
        } else {
            (self.values[k + 1] - self.values[k - 1]) / (2.0 * h)
        }
    }

    /// Mean and standard deviation of the arrival time, from ⟨t⟩ = ∫Im(ξ*ξ')dω
    /// and ⟨t²⟩ = ∫|ξ'|²dω.
    fn time_moments(&self) -> (f64, f64) {
        let mut mean = 0.0;
        let mut second = 0.0;
        for k in 0..self.values.len() {
            let d = self.derivative(k);
            let w = self.trapezoid_weight(k);
            mean += w * (self.values[k].conj() * d).im;
            second += w * d.norm_sqr();
        }
        let var = (second - mean * mean).max(0.0);
        // a flat spectrum still has a time width of about one grid period
        let floor = 1.0 / (self.omega_step * self.values.len() as f64);
        (mean, var.sqrt().max(floor))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAmplitude {
    shape: SpectralShape,
    polarization: JonesVector,
}

impl SpectralAmplitude {
    pub fn gaussian(
        center: f64,
        bandwidth: f64,
        emission_time: f64,
        polarization: JonesVector,
    ) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::NonPositiveBandwidth(bandwidth));
        }
        if !center.is_finite() || !emission_time.is_finite() {
            return Err(Error::Validation(
                "gaussian photon parameters must be finite".into(),
            ));
        }
        Ok(Self {
            shape: SpectralShape::Gaussian {
                center,
                bandwidth,
                emission_time,
            },
            polarization,
        })
    }

    /// A tabulated spectrum that must already satisfy ∫|ξ|²dω = 1 within `tol`.
    pub fn sampled(spectrum: SampledSpectrum, polarization: JonesVector, tol: f64) -> Result<Self> {
        let norm = spectrum.norm_sqr();
        if (norm - 1.0).abs() > tol {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            shape: SpectralShape::Sampled(spectrum),
            polarization,
        })
    }

    /// A tabulated spectrum rescaled to unit norm.
    pub fn sampled_normalized(
        spectrum: SampledSpectrum,
        polarization: JonesVector,
    ) -> Result<Self> {
        let norm = spectrum.norm_sqr();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized { norm });
        }
        let spectrum = spectrum.scaled(norm.sqrt().recip());
        Ok(Self {
            shape: SpectralShape::Sampled(spectrum),
            polarization,
        })
    }

    pub fn shape(&self) -> &SpectralShape {
        &self.shape
    }

    pub fn polarization(&self) -> &JonesVector {
        &self.polarization
    }

    /// Scalar spectral amplitude ξ(ω). Sampled spectra are interpolated linearly
    /// and vanish outside their grid.
    pub fn eval(&self, omega: f64) -> C64 {
        match &self.shape {
            SpectralShape::Gaussian {
                center,
                bandwidth,
                emission_time,
            } => {
                let norm = (2.0 * PI * bandwidth * bandwidth).powf(-0.25);
                let x = (omega - center) / bandwidth;
                C64::from_polar(norm * (-0.25 * x * x).exp(), omega * emission_time)
            }
            SpectralShape::Sampled(s) => {
                let pos = (omega - s.omega_start) / s.omega_step;
                if pos < 0.0 || pos > (s.values.len() - 1) as f64 {
                    return C64::new(0.0, 0.0);
                }
                let k = (pos.floor() as usize).min(s.values.len() - 2);
                let frac = pos - k as f64;
                s.values[k] * (1.0 - frac) + s.values[k + 1] * frac
            }
        }
    }
}

/// χ(t) = F[ξ](t − Δt).
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalAmplitude {
    source: SpectralAmplitude,
    delay: f64,
    arrival: f64,
    sigma: f64,
}

impl TemporalAmplitude {
    pub fn new(source: SpectralAmplitude, delay: f64) -> Self {
        let (mean, sigma) = match &source.shape {
            SpectralShape::Gaussian {
                bandwidth,
                emission_time,
                ..
            } => (*emission_time, 0.5 / bandwidth),
            SpectralShape::Sampled(s) => s.time_moments(),
        };
        Self {
            source,
            delay,
            arrival: mean + delay,
            sigma,
        }
    }

    pub fn source(&self) -> &SpectralAmplitude {
        &self.source
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn polarization(&self) -> &JonesVector {
        &self.source.polarization
    }

    /// Mean arrival time at the detectors.
    pub fn arrival_time(&self) -> f64 {
        self.arrival
    }

    /// Standard deviation of |χ(t)|².
    pub fn temporal_sigma(&self) -> f64 {
        self.sigma
    }

    /// Scalar temporal amplitude, polarization excluded.
    pub fn scalar(&self, t: f64) -> C64 {
        let u = t - self.delay;
        match &self.source.shape {
            SpectralShape::Gaussian {
                center,
                bandwidth,
                emission_time,
            } => {
                let v = u - emission_time;
                let peak = (2.0 * bandwidth * bandwidth / PI).powf(0.25);
                C64::from_polar(peak * (-(bandwidth * v).powi(2)).exp(), -center * v)
            }
            SpectralShape::Sampled(s) => {
                let mut acc = C64::new(0.0, 0.0);
                for (k, v) in s.values.iter().enumerate() {
                    acc += v * C64::from_polar(s.trapezoid_weight(k), -s.omega(k) * u);
                }
                acc / (2.0 * PI).sqrt()
            }
        }
    }

    pub fn eval(&self, t: f64) -> (C64, JonesVector) {
        (self.scalar(t), self.source.polarization)
    }

    /// Amplitude projected on the detector polarization `p`.
    pub fn projected(&self, p: &JonesVector, t: f64) -> C64 {
        p.inner(&self.source.polarization) * self.scalar(t)
    }

    /// |χ(t)|² ignoring polarization.
    pub fn intensity(&self, t: f64) -> f64 {
        self.scalar(t).norm_sqr()
    }
}

pub fn to_temporal(source: &SpectralAmplitude, delay: f64) -> TemporalAmplitude {
    TemporalAmplitude::new(source.clone(), delay)
}

/// |⟨p, ε⟩|²·|χ(t)|².
pub fn detection_density(chi: &TemporalAmplitude, p: &JonesVector, t: f64) -> f64 {
    p.inner(chi.polarization()).norm_sqr() * chi.intensity(t)
}

/// ∫χ*_a(t)·χ_b(t)dt including the polarization inner product.
pub fn overlap(a: &TemporalAmplitude, b: &TemporalAmplitude, rel_tol: f64) -> Result<C64> {
    let pol = a.polarization().inner(b.polarization());
    if pol == C64::new(0.0, 0.0) {
        return Ok(pol);
    }
    Ok(pol * temporal_overlap(a, b, rel_tol)?)
}

/// Time overlap ∫χ*_a χ_b dt without the polarization factor.
pub fn temporal_overlap(a: &TemporalAmplitude, b: &TemporalAmplitude, rel_tol: f64) -> Result<C64> {
    if let (
        SpectralShape::Gaussian {
            center: wa,
            bandwidth: sa,
            emission_time: ta,
        },
        SpectralShape::Gaussian {
            center: wb,
            bandwidth: sb,
            emission_time: tb,
        },
    ) = (&a.source.shape, &b.source.shape)
    {
        return Ok(gaussian_overlap(
            *wa,
            *sa,
            ta + a.delay,
            *wb,
            *sb,
            tb + b.delay,
        ));
    }
    overlap_by_quadrature(a, b, rel_tol)
}

fn gaussian_overlap(wa: f64, sa: f64, ta: f64, wb: f64, sb: f64, tb: f64) -> C64 {
    let (va, vb) = (sa * sa, sb * sb);
    let sum = va + vb;
    let tau = tb - ta;
    let dw = wa - wb;
    let prefactor = (2.0 * sa * sb / sum).sqrt();
    let mean_freq = (wa * vb + wb * va) / sum;
    let log_mag = -dw * dw / (4.0 * sum) - tau * tau * va * vb / sum;
    C64::from_polar(prefactor * log_mag.exp(), mean_freq * tau)
}

/// Adaptive quadrature of the overlap over a window covering both pulses.
pub fn overlap_by_quadrature(
    a: &TemporalAmplitude,
    b: &TemporalAmplitude,
    rel_tol: f64,
) -> Result<C64> {
    let sigma = a.sigma.max(b.sigma);
    let lo = a.arrival.min(b.arrival) - WINDOW_SIGMAS * sigma;
    let hi = a.arrival.max(b.arrival) + WINDOW_SIGMAS * sigma;
    romberg_complex(|t| a.scalar(t).conj() * b.scalar(t), lo, hi, rel_tol, 1e-14)
}

/// Hermitian matrix of pairwise photon overlaps, rows and columns in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    g: Array2<C64>,
}

impl GramMatrix {
    const HERMITIAN_TOL: f64 = 1e-12;
    const PSD_TOL: f64 = 1e-10;

    /// Validates a user-supplied overlap matrix.
    pub fn from_matrix(g: Array2<C64>) -> Result<Self> {
        let (r, c) = g.dim();
        if r != c {
            return Err(Error::NotSquare { rows: r, cols: c });
        }
        for i in 0..r {
            if (g[[i, i]] - C64::new(1.0, 0.0)).norm() > Self::HERMITIAN_TOL {
                return Err(Error::Validation(format!(
                    "gram diagonal entry {i} is {}, not 1",
                    g[[i, i]]
                )));
            }
            for j in 0..r {
                if (g[[i, j]] - g[[j, i]].conj()).norm() > Self::HERMITIAN_TOL {
                    return Err(Error::Validation(format!(
                        "gram matrix not Hermitian at ({i},{j})"
                    )));
                }
                if g[[i, j]].norm() > 1.0 + Self::HERMITIAN_TOL {
                    return Err(Error::Validation(format!("|g[{i},{j}]| exceeds 1")));
                }
            }
        }
        let gram = Self { g };
        let min = gram.min_eigenvalue();
        if min < -Self::PSD_TOL {
            return Err(Error::Validation(format!(
                "gram matrix not positive semidefinite (eigenvalue {min:e})"
            )));
        }
        Ok(gram)
    }

    /// Perfectly indistinguishable photons.
    pub fn ones(n: usize) -> Self {
        Self {
            g: Array2::from_elem((n, n), C64::new(1.0, 0.0)),
        }
    }

    /// Perfectly distinguishable photons.
    pub fn identity(n: usize) -> Self {
        Self { g: Array2::eye(n) }
    }

    pub fn size(&self) -> usize {
        self.g.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.g[[i, j]]
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.g
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.size();
        if n == 0 {
            return 0.0;
        }
        let m = DMatrix::from_fn(n, n, |i, j| self.g[[i, j]]);
        m.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn gram_matrix(photons: &[TemporalAmplitude], tol: &Tolerances) -> Result<GramMatrix> {
    let n = photons.len();
    if n == 0 {
        return Err(Error::Validation(
            "gram matrix needs at least one photon".into(),
        ));
    }
    let mut g = Array2::from_elem((n, n), C64::new(0.0, 0.0));
    for i in 0..n {
        g[[i, i]] = C64::new(1.0, 0.0);
        for j in (i + 1)..n {
            let v = overlap(&photons[i], &photons[j], tol.quadrature_rel_tol)?;
            g[[i, j]] = v;
            g[[j, i]] = v.conj();
        }
    }
    Ok(GramMatrix { g })
}

/// Gram matrix of the time overlaps alone, polarization factors excluded.
pub fn temporal_gram_matrix(photons: &[TemporalAmplitude], tol: &Tolerances) -> Result<GramMatrix> {
    let n = photons.len();
    if n == 0 {
        return Err(Error::Validation(
            "gram matrix needs at least one photon".into(),
        ));
    }
    let mut g = Array2::from_elem((n, n), C64::new(0.0, 0.0));
    for i in 0..n {
        g[[i, i]] = C64::new(1.0, 0.0);
        for j in (i + 1)..n {
            let v = temporal_overlap(&photons[i], &photons[j], tol.quadrature_rel_tol)?;
            g[[i, j]] = v;
            g[[j, i]] = v.conj();
        }
    }
    Ok(GramMatrix { g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::romberg;

    fn h() -> JonesVector {
        JonesVector::horizontal()
    }

    fn gauss(w: f64, bw: f64, t0: f64) -> TemporalAmplitude {
        TemporalAmplitude::new(SpectralAmplitude::gaussian(w, bw, t0, h()).unwrap(), 0.0)
    }

    #[test]
    fn gaussian_spectrum_normalized() {
        let s = SpectralAmplitude::gaussian(100.0, 1.0, 0.0, h()).unwrap();
        let n = romberg(|w| s.eval(w).norm_sqr(), 85.0, 115.0, 1e-12, 0.0).unwrap();
        assert!((n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_bandwidth() {
        assert!(matches!(
            SpectralAmplitude::gaussian(0.0, 0.0, 0.0, h()),
            Err(Error::NonPositiveBandwidth(_))
        ));
        assert!(SpectralAmplitude::gaussian(0.0, -1.0, 0.0, h()).is_err());
    }

    #[test]
    fn temporal_peak_follows_delay() {
        let chi = TemporalAmplitude::new(
            SpectralAmplitude::gaussian(3.0, 1.0, 0.0, h()).unwrap(),
            2.5,
        );
        assert!(chi.intensity(2.5) > chi.intensity(2.49));
        assert!(chi.intensity(2.5) > chi.intensity(2.51));
        assert_eq!(chi.arrival_time(), 2.5);
        let late = gauss(0.0, 1.0, 4.0);
        assert!(
            late.intensity(4.0) > late.intensity(3.9) && late.intensity(4.0) > late.intensity(4.1)
        );
    }

    #[test]
    fn temporal_tails_vanish() {
        let chi = gauss(5.0, 1.0, 0.0);
        assert!(chi.scalar(50.0).norm() < 1e-300);
        assert!(chi.scalar(-50.0).norm() < 1e-300);
    }

    #[test]
    fn density_one_sigma_from_peak() {
        let chi = gauss(7.0, 1.0, 0.0);
        let sigma = chi.temporal_sigma();
        assert_eq!(sigma, 0.5);
        let ratio = detection_density(&chi, &h(), sigma) / detection_density(&chi, &h(), 0.0);
        assert!((ratio - (-0.5f64).exp()).abs() < 1e-14);
        assert_eq!(detection_density(&chi, &JonesVector::vertical(), 0.1), 0.0);
    }

    #[test]
    fn identical_and_orthogonal_overlaps() {
        let a = gauss(1.0, 1.3, 0.2);
        assert!((overlap(&a, &a, 1e-9).unwrap() - 1.0).norm() < 1e-14);
        let v = TemporalAmplitude::new(
            SpectralAmplitude::gaussian(1.0, 1.3, 0.2, JonesVector::vertical()).unwrap(),
            0.0,
        );
        assert_eq!(overlap(&a, &v, 1e-9).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn gram_identity_and_ones() {
        let same = vec![gauss(0.0, 1.0, 0.0); 3];
        let g = gram_matrix(&same, &Tolerances::default()).unwrap();
        assert!(g.matrix().iter().all(|v| (v - 1.0).norm() < 1e-14));
        assert!(g.min_eigenvalue() > -1e-10);
        let pols = [h(), JonesVector::vertical()];
        let orth: Vec<_> = pols
            .iter()
            .map(|p| {
                TemporalAmplitude::new(SpectralAmplitude::gaussian(0.0, 1.0, 0.0, *p).unwrap(), 0.0)
            })
            .collect();
        let g = gram_matrix(&orth, &Tolerances::default()).unwrap();
        assert_eq!(g, GramMatrix::identity(2));
    }

    #[test]
    fn gram_validation() {
        let mut m = Array2::eye(2);
        m[[0, 1]] = C64::new(0.5, 0.1);
        assert!(GramMatrix::from_matrix(m.clone()).is_err());
        m[[1, 0]] = C64::new(0.5, -0.1);
        assert!(GramMatrix::from_matrix(m.clone()).is_ok());
        // Hermitian with unit entries but not PSD
        let mut bad = Array2::from_elem((3, 3), C64::new(-1.0, 0.0));
        for i in 0..3 {
            bad[[i, i]] = C64::new(1.0, 0.0);
        }
        assert!(GramMatrix::from_matrix(bad).is_err());
    }

    #[test]
    fn sampled_requires_normalization_and_grid() {
        assert!(SampledSpectrum::new(0.0, 0.1, vec![C64::new(1.0, 0.0); 4]).is_err());
        assert!(SampledSpectrum::new(0.0, 0.0, vec![C64::new(1.0, 0.0); 8]).is_err());
        let s = SampledSpectrum::new(0.0, 0.1, vec![C64::new(1.0, 0.0); 8]).unwrap();
        assert!(matches!(
            SpectralAmplitude::sampled(s.clone(), h(), 1e-8),
            Err(Error::NotNormalized { .. })
        ));
        let n = SpectralAmplitude::sampled_normalized(s, h()).unwrap();
        match n.shape() {
            SpectralShape::Sampled(s) => assert!((s.norm_sqr() - 1.0).abs() < 1e-14),
            _ => unreachable!(),
        }
    }
}
