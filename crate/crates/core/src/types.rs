//! Value types shared by every other module: ports, port samples,
//! polarization (Jones) vectors and numeric tolerances.

use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// A 0-based port label. File and CLI input use 1-based labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortIndex(usize);

impl PortIndex {
    pub fn new(index: usize, modes: usize) -> Result<Self> {
        if index >= modes {
            return Err(Error::OutOfRange { index, modes });
        }
        Ok(Self(index))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn one_based(self) -> usize {
        self.0 + 1
    }
}

/// A collision-free set of N ports out of M, kept strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortSample {
    ports: Vec<usize>,
    modes: usize,
}

impl PortSample {
    pub fn new(indices: &[usize], modes: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Validation(
                "port sample must contain at least one port".into(),
            ));
        }
        let mut ports = indices.to_vec();
        ports.sort_unstable();
        for &p in &ports {
            if p >= modes {
                return Err(Error::OutOfRange { index: p, modes });
            }
        }
        if let Some(w) = ports.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicatePort { port: w[0] });
        }
        Ok(Self { ports, modes })
    }

    /// Builds a sample from 1-based labels as written in config files.
    pub fn from_one_based(labels: &[usize], modes: usize) -> Result<Self> {
        let zero_based = labels
            .iter()
            .map(|&l| {
                l.checked_sub(1)
                    .ok_or_else(|| Error::Validation("port labels are 1-based; got 0".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&zero_based, modes)
    }

    /// Ports `0..n`.
    pub fn first(n: usize, modes: usize) -> Result<Self> {
        Self::new(&(0..n).collect::<Vec<_>>(), modes)
    }

    pub fn indices(&self) -> &[usize] {
        &self.ports
    }

    pub fn port(&self, i: usize) -> PortIndex {
        PortIndex(self.ports[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = PortIndex> + '_ {
        self.ports.iter().map(|&p| PortIndex(p))
    }

    pub fn len(&self) -> usize {
        self.ports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ports.is_empty()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.ports.iter().map(|p| p + 1).collect()
    }
}

/// Serialized as its 1-based labels.
impl serde::Serialize for PortSample {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl fmt::Display for PortSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.one_based().iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

/// Normalized polarization state in a fixed transverse basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesVector {
    e1: C64,
    e2: C64,
}

impl JonesVector {
    /// Normalizes `(e1, e2)`.
    pub fn new(e1: C64, e2: C64) -> Result<Self> {
        let norm = (e1.norm_sqr() + e2.norm_sqr()).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::ZeroJones);
        }
        Ok(Self {
            e1: e1 / norm,
            e2: e2 / norm,
        })
    }

    pub fn horizontal() -> Self {
        Self {
            e1: C64::new(1.0, 0.0),
            e2: C64::new(0.0, 0.0),
        }
    }

    pub fn vertical() -> Self {
        Self {
            e1: C64::new(0.0, 0.0),
            e2: C64::new(1.0, 0.0),
        }
    }

    /// Linear polarization at `angle` radians from H.
    pub fn linear(angle: f64) -> Self {
        Self {
            e1: C64::new(angle.cos(), 0.0),
            e2: C64::new(angle.sin(), 0.0),
        }
    }

    pub fn e1(&self) -> C64 {
        self.e1
    }

    pub fn e2(&self) -> C64 {
        self.e2
    }

    /// Hermitian inner product, conjugating `self`.
    pub fn inner(&self, other: &JonesVector) -> C64 {
        self.e1.conj() * other.e1 + self.e2.conj() * other.e2
    }

    /// The state orthogonal to `self` completing an orthonormal basis.
    pub fn orthogonal(&self) -> Self {
        Self {
            e1: -self.e2.conj(),
            e2: self.e1.conj(),
        }
    }
}

/// `jones_inner(a, b)`, conjugating the detector vector `a`.
pub fn jones_inner(a: &JonesVector, b: &JonesVector) -> C64 {
    a.inner(b)
}

/// Orthonormal measurement basis {e1, e2}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationBasis {
    pub first: JonesVector,
    pub second: JonesVector,
}

impl PolarizationBasis {
    pub fn from_first(first: JonesVector) -> Self {
        Self {
            first,
            second: first.orthogonal(),
        }
    }

    /// H/V.
    pub fn standard() -> Self {
        Self::from_first(JonesVector::horizontal())
    }

    pub fn diagonal() -> Self {
        Self::from_first(JonesVector::linear(std::f64::consts::FRAC_PI_4))
    }

    pub fn circular() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_first(JonesVector {
            e1: C64::new(s, 0.0),
            e2: C64::new(0.0, s),
        })
    }

    pub fn vector(&self, index: usize) -> &JonesVector {
        match index {
            0 => &self.first,
            _ => &self.second,
        }
    }
}

impl Default for PolarizationBasis {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub unitarity_tol: f64,
    pub normalization_tol: f64,
    pub quadrature_rel_tol: f64,
}

impl Tolerances {
    pub fn new(
        unitarity_tol: f64,
        normalization_tol: f64,
        quadrature_rel_tol: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("unitarity_tol", unitarity_tol),
            ("normalization_tol", normalization_tol),
            ("quadrature_rel_tol", quadrature_rel_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(Self {
            unitarity_tol,
            normalization_tol,
            quadrature_rel_tol,
        })
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unitarity_tol: 1e-10,
            normalization_tol: 1e-8,
            quadrature_rel_tol: 1e-9,
        }
    }
}
