//! Signals on the cyclic group `Z_L`, time-frequency shifts, the window
//! zoo, the short-time Fourier transform and grid surrogates of the
//! modulation and Wiener amalgam norms.
//!
//! DFT convention: `f^(k) = sum_n f(n) exp(-2 pi i k n / L)`, unnormalised.
//! With it, `sum_{x, omega} |V_phi f(x, omega)|^2 = L ||f||^2 ||phi||^2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointset::{RefLattice, TorusParams};

/// Number of wraps kept on each side when periodising the Gaussian.
const GAUSSIAN_WRAPS: i64 = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    torus: TorusParams,
    samples: Vec<Complex64>,
}

impl Signal {
    pub fn new(torus: TorusParams, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != torus.len() {
            return Err(Error::LengthMismatch {
                expected: torus.len(),
                got: samples.len(),
            });
        }
        Ok(Self { torus, samples })
    }

    pub fn from_real(torus: TorusParams, samples: &[f64]) -> Result<Self> {
        Self::new(
            torus,
            samples.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn zeros(torus: TorusParams) -> Self {
        Self {
            torus,
            samples: vec![Complex64::new(0.0, 0.0); torus.len()],
        }
    }

    /// Unit impulse at sample `k`.
    pub fn impulse(torus: TorusParams, k: usize) -> Self {
        let mut s = Self::zeros(torus);
        s.samples[k % torus.len()] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn torus(&self) -> TorusParams {
        self.torus
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn norm(&self) -> f64 {
        self.samples
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `<self, other> = sum_n self[n] conj(other[n])`.
    pub fn inner(&self, other: &Signal) -> Complex64 {
        inner(&self.samples, &other.samples)
    }

    pub fn scale(&self, c: Complex64) -> Signal {
        Signal {
            torus: self.torus,
            samples: self.samples.iter().map(|z| z * c).collect(),
        }
    }

    pub fn normalized(&self) -> Signal {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        self.scale(Complex64::new(1.0 / n, 0.0))
    }

    fn check_same(&self, other: &Signal) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(())
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// `exp(2 pi i k / L)` for `k` reduced mod L, exact at the quarter points.
pub(crate) fn root_of_unity(k: i64, l: usize) -> Complex64 {
    let l = l as i64;
    let k = k.rem_euclid(l);
    if 4 * k % l == 0 {
        return match 4 * k / l {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / l as f64)
}

/// Cyclic shift by `round(x)` samples: `(T_x f)(n) = f(n - x)`.
pub fn translate(f: &Signal, x: f64) -> Signal {
    let l = f.len();
    let k = f.torus.nearest(x);
    let mut samples = vec![Complex64::new(0.0, 0.0); l];
    for (n, s) in samples.iter_mut().enumerate() {
        *s = f.samples[(n + l - k) % l];
    }
    Signal {
        torus: f.torus,
        samples,
    }
}

/// `(M_omega f)(n) = exp(2 pi i omega n / L) f(n)`, `omega` rounded to the grid.
pub fn modulate(f: &Signal, omega: f64) -> Signal {
    let l = f.len();
    let w = f.torus.nearest(omega) as i64;
    let samples = f
        .samples
        .iter()
        .enumerate()
        .map(|(n, z)| z * root_of_unity(w * n as i64, l))
        .collect();
    Signal {
        torus: f.torus,
        samples,
    }
}

/// `M_omega T_x f`.
pub fn tf_shift(f: &Signal, x: f64, omega: f64) -> Signal {
    modulate(&translate(f, x), omega)
}

/// `M_w T_x f` at integer grid parameters, written into `out`.
pub(crate) fn tf_shift_into(f: &[Complex64], x: usize, w: usize, out: &mut [Complex64]) {
    let l = f.len();
    for n in 0..l {
        out[n] = f[(n + l - x) % l] * root_of_unity((w * n) as i64, l);
    }
}

/// Periodised self-dual Gaussian `sum_k exp(-pi (n + kL)^2 / L)`, unit norm.
pub fn gaussian_window(torus: TorusParams) -> Signal {
    let l = torus.len() as f64;
    let samples: Vec<f64> = (0..torus.len())
        .map(|n| {
            (-GAUSSIAN_WRAPS..=GAUSSIAN_WRAPS)
                .map(|k| {
                    let t = n as f64 + k as f64 * l;
                    (-PI * t * t / l).exp()
                })
                .sum()
        })
        .collect();
    Signal::from_real(torus, &samples)
        .expect("length matches")
        .normalized()
}

/// Normalised indicator of the `width` samples `[-width/2, width/2)`.
pub fn box_window(torus: TorusParams, width: usize) -> Result<Signal> {
    let l = torus.len();
    if width == 0 || !l.is_multiple_of(width) {
        return Err(Error::InvalidWidth { width, l });
    }
    let mut samples = vec![0.0; l];
    let start = l - width / 2;
    for k in 0..width {
        samples[(start + k) % l] = 1.0;
    }
    Ok(Signal::from_real(torus, &samples)?.normalized())
}

/// `phi(t) = ((e^{2 pi i t} + 1) / 2) chi_[-1/2, 1/2](t)` sampled at `t = n / (L/2)`, unit norm.
///
/// Its translates by `L/4` satisfy `sum_k |phi(n - kL/4)|^2 = const`.
pub fn cosine_bump_window(torus: TorusParams) -> Result<Signal> {
    let l = torus.len();
    if !l.is_multiple_of(4) {
        return Err(Error::InvalidWidth { width: l / 4, l });
    }
    let half = (l / 2) as f64;
    let samples = (0..l)
        .map(|n| {
            let signed = if n <= l / 2 {
                n as f64
            } else {
                n as f64 - l as f64
            };
            let t = signed / half;
            if t.abs() <= 0.5 {
                (Complex64::from_polar(1.0, 2.0 * PI * t) + 1.0) / 2.0
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(Signal::new(torus, samples)?.normalized())
}

/// Named windows selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Gaussian,
    Box { width: usize },
    CosineBump,
}

impl WindowKind {
    /// Parse `gaussian`, `cosine_bump`, `box` (width `sqrt L` when it divides L) or `box:W`.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "gaussian" => Ok(Self::Gaussian),
            "cosine_bump" | "cosine-bump" | "bump" => Ok(Self::CosineBump),
            "box" => Ok(Self::Box { width: 0 }),
            _ => {
                if let Some(w) = name.strip_prefix("box:") {
                    let width = w
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad box width {w:?}")))?;
                    if width == 0 {
                        return Err(Error::Parse("box width must be positive".into()));
                    }
                    return Ok(Self::Box { width });
                }
                Err(Error::Parse(format!(
                    "unknown window {name:?} (gaussian, box, box:W, cosine_bump)"
                )))
            }
        }
    }

    pub fn build(&self, torus: TorusParams) -> Result<Signal> {
        match *self {
            Self::Gaussian => Ok(gaussian_window(torus)),
            Self::CosineBump => cosine_bump_window(torus),
            Self::Box { width: 0 } => {
                let l = torus.len();
                let w = (l as f64).sqrt().round() as usize;
                if w * w != l {
                    return Err(Error::InvalidWidth { width: w, l });
                }
                box_window(torus, w)
            }
            Self::Box { width } => box_window(torus, width),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Gaussian => "gaussian".into(),
            Self::CosineBump => "cosine_bump".into(),
            Self::Box { width: 0 } => "box".into(),
            Self::Box { width } => format!("box:{width}"),
        }
    }
}

/// Nonnegative real function on the `L x L` grid, time-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealGrid {
    pub l: usize,
    pub values: Vec<f64>,
}

impl RealGrid {
    pub fn zeros(l: usize) -> Self {
        Self {
            l,
            values: vec![0.0; l * l],
        }
    }

    pub fn get(&self, x: usize, w: usize) -> f64 {
        self.values[x * self.l + w]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// `V_phi f` on the full integer grid.
#[derive(Clone, Debug, PartialEq)]
pub struct StftGrid {
    pub l: usize,
    /// `values[x * L + omega] = <f, M_omega T_x phi>`.
    pub values: Vec<Complex64>,
    pub window_norm: f64,
}

impl StftGrid {
    pub fn get(&self, x: usize, w: usize) -> Complex64 {
        self.values[x * self.l + w]
    }

    pub fn magnitude(&self) -> RealGrid {
        RealGrid {
            l: self.l,
            values: self.values.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }

    /// CSV with header `x,omega,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,omega,re,im\n");
        for x in 0..self.l {
            for w in 0..self.l {
                let z = self.get(x, w);
                out.push_str(&format!("{x},{w},{:.16e},{:.16e}\n", z.re, z.im));
            }
        }
        out
    }
}

/// `V_phi f(x, omega) = <f, M_omega T_x phi>`, one FFT per time shift.
pub fn stft(f: &Signal, phi: &Signal) -> Result<StftGrid> {
    f.check_same(phi)?;
    let l = f.len();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(l);
    let rows: Vec<Vec<Complex64>> = (0..l)
        .into_par_iter()
        .map(|x| {
            let mut row: Vec<Complex64> = (0..l)
                .map(|n| f.samples[n] * phi.samples[(n + l - x) % l].conj())
                .collect();
            fft.process(&mut row);
            row
        })
        .collect();
    Ok(StftGrid {
        l,
        values: rows.concat(),
        window_norm: phi.norm(),
    })
}

/// Grid surrogate of `||f||_{M^p} = ||V_gamma f||_p` with the Gaussian window; `p = inf` allowed.
pub fn mp_norm(f: &Signal, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let grid = stft(f, &gaussian_window(f.torus))?;
    Ok(lp_norm(grid.values.iter().map(|z| z.norm()), p))
}

/// `(sum_cells sup_cell F^p)^{1/p}` over the `a x b` cell tiling of the torus.
pub fn amalgam_norm(grid: &RealGrid, p: f64, lat: RefLattice) -> Result<f64> {
    check_exponent(p)?;
    let torus = TorusParams::new(grid.l)?;
    let lat = RefLattice::new(lat.a_step(), lat.b_step(), torus)?;
    Ok(lp_norm(cell_maxima(grid, lat).into_iter(), p))
}

/// Cell suprema of `grid`, indexed `[k * (L/b) + n]` for the cell at `(k a, n b)`.
pub fn cell_maxima(grid: &RealGrid, lat: RefLattice) -> Vec<f64> {
    let l = grid.l;
    let (a, b) = (lat.a_step(), lat.b_step());
    let (ka, nb) = (l / a, l / b);
    let mut out = vec![0.0f64; ka * nb];
    for x in 0..l {
        for w in 0..l {
            let cell = (x / a) * nb + w / b;
            out[cell] = out[cell].max(grid.get(x, w));
        }
    }
    out
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

pub(crate) fn lp_norm(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        values.map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}
