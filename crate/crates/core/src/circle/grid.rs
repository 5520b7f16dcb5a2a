use std::cell::RefCell;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::trig::TrigPoly;
use crate::error::{Error, Result};

pub const MAX_GRID_EXP: u32 = 26;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn transform(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let fft = if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        };
        fft.process(buf);
    });
}

/// Smallest `q` with `bandwidth < 2^(q-1)`.
pub fn required_grid_exp(bandwidth: i64) -> u32 {
    let mut q = 1;
    while (1i64 << (q - 1)) <= bandwidth {
        q += 1;
    }
    q
}

/// Samples on the dyadic grid `e^{2πij/2^q}`, `j = 0..2^q`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    q: u32,
    samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(q: u32, samples: Vec<Complex64>) -> Result<Self> {
        if q == 0 || q > MAX_GRID_EXP {
            return Err(Error::pre(format!("grid exponent {q} outside 1..={MAX_GRID_EXP}")));
        }
        if samples.len() != 1usize << q {
            return Err(Error::pre(format!("{} samples for a grid of size 2^{q}", samples.len())));
        }
        Ok(Self { q, samples })
    }

    pub fn from_fn(q: u32, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let n = 1usize << q.min(MAX_GRID_EXP);
        Self::new(q, (0..n).map(|j| f(TAU * j as f64 / n as f64)).collect())
    }

    pub fn from_real(q: u32, values: Vec<f64>) -> Result<Self> {
        Self::new(q, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    /// Point values of `f` at the grid nodes. Frequencies wrap modulo `2^q`,
    /// which is exact at the nodes whatever the bandwidth.
    pub fn sample(f: &TrigPoly, q: u32) -> Result<Self> {
        if q == 0 || q > MAX_GRID_EXP {
            return Err(Error::pre(format!("grid exponent {q} outside 1..={MAX_GRID_EXP}")));
        }
        let n = 1usize << q;
        let mut buf = vec![Complex64::default(); n];
        for (k, c) in f.terms() {
            buf[k.rem_euclid(n as i64) as usize] += c;
        }
        transform(&mut buf, true);
        Ok(Self { q, samples: buf })
    }

    /// Like [`GridFunction::sample`], but refuses grids too coarse to recover `f` again.
    pub fn to_grid(f: &TrigPoly, q: u32) -> Result<Self> {
        let bw = f.bandwidth();
        if q == 0 || bw >= 1i64 << (q - 1) {
            return Err(Error::Aliasing {
                bandwidth: bw,
                required_q: required_grid_exp(bw),
            });
        }
        Self::sample(f, q)
    }

    /// Fourier coefficients `lo..=hi` by the discrete transform.
    pub fn coefficients(&self, lo: i64, hi: i64) -> Result<Vec<Complex64>> {
        let n = self.len() as i64;
        let bw = lo.abs().max(hi.abs());
        if lo > hi || bw >= n / 2 {
            return Err(Error::Aliasing {
                bandwidth: bw,
                required_q: required_grid_exp(bw),
            });
        }
        let mut buf = self.samples.clone();
        transform(&mut buf, false);
        let scale = 1.0 / n as f64;
        Ok((lo..=hi).map(|k| buf[k.rem_euclid(n) as usize] * scale).collect())
    }

    /// Every discrete Fourier coefficient, indexed by `k mod 2^q`.
    pub fn dft(&self) -> Vec<Complex64> {
        let mut buf = self.samples.clone();
        transform(&mut buf, false);
        let scale = 1.0 / self.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    pub fn from_grid(&self, lo: i64, hi: i64) -> Result<TrigPoly> {
        let coeffs = self.coefficients(lo, hi)?;
        Ok(TrigPoly::from_terms((lo..=hi).zip(coeffs)))
    }

    pub fn q(&self) -> u32 {
        self.q
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

    pub fn theta(&self, j: usize) -> f64 {
        TAU * j as f64 / self.len() as f64
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.len() as f64
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            q: self.q,
            samples: self.samples.iter().map(|&c| f(c)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.q != other.q {
            return Err(Error::pre(format!("grid exponents differ: {} vs {}", self.q, other.q)));
        }
        Ok(Self {
            q: self.q,
            samples: self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.samples.iter().map(|c| c.norm()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Trapezoidal mean, i.e. `∫ u dm` on the grid.
    pub fn mean(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / self.len() as f64
    }

    pub fn mean_abs(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).sum::<f64>() / self.len() as f64
    }
}
