//! Interferometer unitaries: validation, named builders, Haar-random
//! generation and N×N submatrix extraction.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::types::PortSample;

/// Upper bound on port counts accepted from configs and builders.
pub const MAX_MODES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitarityReport {
    pub max_deviation: f64,
    pub pass: bool,
}

/// Largest entry of |U†U − I|.
pub fn check_unitary(m: ArrayView2<C64>, tol: f64) -> Result<UnitarityReport> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::NotSquare { rows: r, cols: c });
    }
    let mut max_deviation: f64 = 0.0;
    let mut nan = false;
    for i in 0..r {
        for j in 0..r {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..r {
                acc += m[[k, i]].conj() * m[[k, j]];
            }
            if i == j {
                acc -= 1.0;
            }
            let dev = acc.norm();
            nan |= dev.is_nan();
            max_deviation = max_deviation.max(dev);
        }
    }
    if nan {
        max_deviation = f64::NAN;
    }
    Ok(UnitarityReport {
        max_deviation,
        pass: max_deviation <= tol,
    })
}

/// An M-port lossless interferometer.
#[derive(Debug, Clone, PartialEq)]
pub struct Interferometer {
    u: Array2<C64>,
}

impl Interferometer {
    /// Wraps `u` after checking unitarity to `tol`.
    pub fn new(u: Array2<C64>, tol: f64) -> Result<Self> {
        let report = check_unitary(u.view(), tol)?;
        if !report.pass {
            return Err(Error::NotUnitary {
                deviation: report.max_deviation,
                tol,
            });
        }
        if u.nrows() == 0 {
            return Err(Error::Validation(
                "interferometer needs at least one port".into(),
            ));
        }
        Ok(Self { u })
    }

    pub fn modes(&self) -> usize {
        self.u.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.u
    }

    pub fn entry(&self, d: usize, s: usize) -> C64 {
        self.u[[d, s]]
    }

    /// (1/√2)[[1, i], [i, 1]].
    pub fn beamsplitter() -> Self {
        let a = C64::new(FRAC_1_SQRT_2, 0.0);
        let b = C64::new(0.0, FRAC_1_SQRT_2);
        Self {
            u: ndarray::arr2(&[[a, b], [b, a]]),
        }
    }

    /// Three-port splitter whose permanent vanishes.
    pub fn tritter_zero_permanent() -> Self {
        let r3 = 3f64.sqrt();
        let re = |x: f64| C64::new(x / r3, 0.0);
        let im = |x: f64| C64::new(0.0, x / r3);
        Self {
            u: ndarray::arr2(&[
                [re(1.0), im(1.0), im(-1.0)],
                [im(1.0), re((1.0 - r3) / 2.0), re(-(1.0 + r3) / 2.0)],
                [im(1.0), re((r3 + 1.0) / 2.0), re((r3 - 1.0) / 2.0)],
            ]),
        }
    }

    /// Symmetric multiport U[d][s] = exp(2πi·d·s/M)/√M with 1-based d, s.
    pub fn fourier(modes: usize) -> Result<Self> {
        if modes < 2 {
            return Err(Error::Validation(format!(
                "fourier multiport needs M >= 2, got {modes}"
            )));
        }
        check_modes(modes)?;
        let norm = (modes as f64).sqrt().recip();
        let u = Array2::from_shape_fn((modes, modes), |(d, s)| {
            // reduce the exponent mod M before scaling to keep phases exact
            let k = ((d + 1) * (s + 1)) % modes;
            C64::from_polar(norm, 2.0 * PI * k as f64 / modes as f64)
        });
        Ok(Self { u })
    }

    /// Haar-random unitary from Gram–Schmidt orthonormalization of a complex
    /// Ginibre matrix. Gram–Schmidt yields the QR factor with a positive real
    /// R-diagonal, which is the phase convention that makes Q Haar distributed.
    pub fn haar(modes: usize, seed: u64) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Validation("haar unitary needs M >= 1".into()));
        }
        check_modes(modes)?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let scale = FRAC_1_SQRT_2;
        let mut cols: Vec<Vec<C64>> = (0..modes)
            .map(|_| {
                (0..modes)
                    .map(|_| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        C64::new(re * scale, im * scale)
                    })
                    .collect()
            })
            .collect();
        for j in 0..modes {
            // two passes of modified Gram–Schmidt for orthogonality at 1e-15
            for _ in 0..2 {
                for k in 0..j {
                    let proj: C64 = cols[k]
                        .iter()
                        .zip(&cols[j])
                        .map(|(q, v)| q.conj() * v)
                        .sum();
                    let (done, rest) = cols.split_at_mut(j);
                    for (v, q) in rest[0].iter_mut().zip(&done[k]) {
                        *v -= proj * q;
                    }
                }
            }
            let norm = cols[j].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            for v in &mut cols[j] {
                *v /= norm;
            }
        }
        let u = Array2::from_shape_fn((modes, modes), |(r, c)| cols[c][r]);
        Ok(Self { u })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            u: self.u.t().mapv(|z| z.conj()),
        }
    }

    /// Rows indexed by `outputs`, columns by `inputs`.
    pub fn submatrix(&self, outputs: &PortSample, inputs: &PortSample) -> Result<Submatrix> {
        if outputs.len() != inputs.len() {
            return Err(Error::SizeMismatch(format!(
                "output sample has {} ports, input sample {}",
                outputs.len(),
                inputs.len()
            )));
        }
        for sample in [outputs, inputs] {
            if sample.modes() != self.modes() {
                return Err(Error::SizeMismatch(format!(
                    "sample declared for {} ports, network has {}",
                    sample.modes(),
                    self.modes()
                )));
            }
        }
        Ok(Submatrix {
            entries: self.rows_cols(outputs.indices(), inputs.indices()),
            rows: outputs.clone(),
            cols: inputs.clone(),
        })
    }

    /// Unchecked row/column selection in the given order.
    pub fn rows_cols(&self, rows: &[usize], cols: &[usize]) -> Array2<C64> {
        Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| {
            self.u[[rows[i], cols[j]]]
        })
    }

    /// Parses a row-major JSON matrix of `[re, im]` pairs.
    pub fn from_json_str(text: &str, tol: f64) -> Result<Self> {
        Self::new(parse_matrix_json(text)?, tol)
    }

    pub fn load(path: &Path, tol: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, tol)
    }

    pub fn from_spec(spec: &NetworkSpec, base_dir: &Path, tol: f64) -> Result<Self> {
        match spec {
            NetworkSpec::Beamsplitter => Ok(Self::beamsplitter()),
            NetworkSpec::TritterZeroPermanent => Ok(Self::tritter_zero_permanent()),
            NetworkSpec::Fourier(m) => Self::fourier(*m),
            NetworkSpec::Haar { modes, seed } => Self::haar(*modes, *seed),
            NetworkSpec::File(p) => {
                let path = if p.is_absolute() {
                    p.clone()
                } else {
                    base_dir.join(p)
                };
                Self::load(&path, tol)
            }
        }
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<[f64; 2]>> = self
            .u
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        serde_json::to_string(&rows).expect("matrix serializes")
    }
}

fn check_modes(modes: usize) -> Result<()> {
    if modes > MAX_MODES {
        return Err(Error::TooLarge {
            what: "port count",
            size: modes,
            limit: MAX_MODES,
        });
    }
    Ok(())
}

/// Parses `[[[re, im], ...], ...]` into a dense complex matrix. Rows must have
/// equal length; squareness is not checked here.
pub fn parse_matrix_json(text: &str) -> Result<Array2<C64>> {
    let rows: Vec<Vec<[f64; 2]>> =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("matrix json: {e}")))?;
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(Error::Parse("matrix rows have unequal lengths".into()));
    }
    if n_rows > MAX_MODES || n_cols > MAX_MODES {
        return Err(Error::TooLarge {
            what: "matrix dimension",
            size: n_rows.max(n_cols),
            limit: MAX_MODES,
        });
    }
    Ok(Array2::from_shape_fn((n_rows, n_cols), |(i, j)| {
        C64::new(rows[i][j][0], rows[i][j][1])
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Submatrix {
    pub entries: Array2<C64>,
    pub rows: PortSample,
    pub cols: PortSample,
}

/// Named interferometer: `beamsplitter`, `tritter_fig2a`, `fourier:M`,
/// `haar:M:seed` or `file:path`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NetworkSpec {
    Beamsplitter,
    TritterZeroPermanent,
    Fourier(usize),
    Haar { modes: usize, seed: u64 },
    File(PathBuf),
}

impl FromStr for NetworkSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("unknown network spec {s:?}"));
        let int = |v: &str, what: &str| {
            v.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad {what} {v:?} in network spec")))
        };
        let modes = |v: &str| -> Result<usize> {
            let m = int(v, "port count")?;
            if m > MAX_MODES as u64 {
                return Err(Error::TooLarge {
                    what: "port count",
                    size: m as usize,
                    limit: MAX_MODES,
                });
            }
            Ok(m as usize)
        };
        match s {
            "beamsplitter" => return Ok(Self::Beamsplitter),
            "tritter_fig2a" => return Ok(Self::TritterZeroPermanent),
            _ => {}
        }
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "fourier" => Ok(Self::Fourier(modes(rest)?)),
            "haar" => {
                let (m, seed) = rest.split_once(':').ok_or_else(bad)?;
                Ok(Self::Haar {
                    modes: modes(m)?,
                    seed: int(seed, "seed")?,
                })
            }
            "file" if !rest.is_empty() => Ok(Self::File(PathBuf::from(rest))),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for NetworkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Beamsplitter => write!(f, "beamsplitter"),
            Self::TritterZeroPermanent => write!(f, "tritter_fig2a"),
            Self::Fourier(m) => write!(f, "fourier:{m}"),
            Self::Haar { modes, seed } => write!(f, "haar:{modes}:{seed}"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_unitary() {
        let r = check_unitary(Array2::<C64>::eye(4).view(), 1e-12).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_deviation, 0.0);
    }

    #[test]
    fn all_ones_is_not_unitary() {
        let m = Array2::from_elem((3, 3), C64::new(1.0 / 3f64.sqrt(), 0.0));
        assert!(!check_unitary(m.view(), 1e-10).unwrap().pass);
        assert!(matches!(
            Interferometer::new(m, 1e-10),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn not_square() {
        let m = Array2::<C64>::zeros((2, 3));
        assert!(matches!(
            check_unitary(m.view(), 1e-10),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn builders_are_unitary() {
        let nets = [
            Interferometer::beamsplitter(),
            Interferometer::tritter_zero_permanent(),
            Interferometer::fourier(2).unwrap(),
            Interferometer::fourier(3).unwrap(),
            Interferometer::fourier(7).unwrap(),
            Interferometer::haar(5, 1).unwrap(),
        ];
        for n in &nets {
            let r = check_unitary(n.matrix().view(), 1e-12).unwrap();
            assert!(r.pass, "{n:?} deviates by {}", r.max_deviation);
        }
        let bs = check_unitary(Interferometer::beamsplitter().matrix().view(), 1e-15).unwrap();
        assert!(bs.max_deviation < 1e-15);
    }

    #[test]
    fn tritter_entries() {
        let t = Interferometer::tritter_zero_permanent();
        assert!((t.entry(0, 0) - C64::new(1.0 / 3f64.sqrt(), 0.0)).norm() < 1e-16);
        assert!((t.entry(0, 2) - C64::new(0.0, -1.0 / 3f64.sqrt())).norm() < 1e-16);
    }

    #[test]
    fn fourier_two_is_balanced() {
        let f = Interferometer::fourier(2).unwrap();
        assert!(f
            .matrix()
            .iter()
            .all(|z| (z.norm() - FRAC_1_SQRT_2).abs() < 1e-15));
    }

    #[test]
    fn haar_deterministic_and_trivial_case() {
        assert_eq!(
            Interferometer::haar(4, 9).unwrap(),
            Interferometer::haar(4, 9).unwrap()
        );
        assert_ne!(
            Interferometer::haar(4, 9).unwrap(),
            Interferometer::haar(4, 10).unwrap()
        );
        let one = Interferometer::haar(1, 3).unwrap();
        assert!((one.entry(0, 0).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn submatrix_selection() {
        let t = Interferometer::tritter_zero_permanent();
        let all = PortSample::first(3, 3).unwrap();
        assert_eq!(t.submatrix(&all, &all).unwrap().entries, *t.matrix());
        let d = PortSample::new(&[0], 3).unwrap();
        let s = PortSample::new(&[2], 3).unwrap();
        let sub = t.submatrix(&d, &s).unwrap();
        assert!((sub.entries[[0, 0]] - C64::new(0.0, -1.0 / 3f64.sqrt())).norm() < 1e-16);
        let two = PortSample::first(2, 3).unwrap();
        assert!(matches!(t.submatrix(&two, &s), Err(Error::SizeMismatch(_))));
        let swapped = t.rows_cols(&[1, 0], &[0, 1]);
        let straight = t.rows_cols(&[0, 1], &[0, 1]);
        assert_eq!(swapped.row(0), straight.row(1));
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(
            "beamsplitter".parse::<NetworkSpec>().unwrap(),
            NetworkSpec::Beamsplitter
        );
        assert_eq!(
            "fourier:4".parse::<NetworkSpec>().unwrap(),
            NetworkSpec::Fourier(4)
        );
        assert_eq!(
            "haar:6:42".parse::<NetworkSpec>().unwrap(),
            NetworkSpec::Haar { modes: 6, seed: 42 }
        );
        assert_eq!(
            "file:u.json".parse::<NetworkSpec>().unwrap(),
            NetworkSpec::File("u.json".into())
        );
        for bad in [
            "",
            "fourier",
            "fourier:x",
            "haar:3",
            "file:",
            "fourier:99999999999",
            "magic",
        ] {
            assert!(bad.parse::<NetworkSpec>().is_err(), "{bad}");
        }
        let spec = NetworkSpec::Haar { modes: 3, seed: 7 };
        assert_eq!(spec.to_string().parse::<NetworkSpec>().unwrap(), spec);
    }

    #[test]
    fn json_round_trip() {
        let h = Interferometer::haar(3, 5).unwrap();
        let back = Interferometer::from_json_str(&h.to_json(), 1e-10).unwrap();
        assert_eq!(back, h);
        assert!(parse_matrix_json("[[[1,0]],[[0,1],[1,0]]]").is_err());
        assert!(Interferometer::from_json_str("[[[1,0],[0,0]],[[0,0],[2,0]]]", 1e-10).is_err());
    }
}
