use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::spectra::SpectralSet;

/// Relative size below which a product coefficient counts as a cancellation ghost.
pub const CANCELLATION_THRESHOLD: f64 = 1e-15;

/// Sparse Laurent polynomial `Σ c_k z^k` on the unit circle. Zero
/// coefficients are never stored, so the key set is the spectrum.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrigPoly {
    coeffs: BTreeMap<i64, Complex64>,
}

/// A coefficient removed from a product because it cancelled to roundoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cancellation {
    pub k: i64,
    pub magnitude: f64,
    pub largest_term: f64,
}

/// Outcome of a spectral inclusion test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumCheck {
    pub inside: bool,
    pub offenders: Vec<i64>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0, c)
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn monomial(k: i64, c: Complex64) -> Self {
        let mut p = Self::zero();
        p.set(k, c);
        p
    }

    /// `z^k` with unit coefficient.
    pub fn z(k: i64) -> Self {
        Self::monomial(k, Complex64::new(1.0, 0.0))
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, Complex64)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (k, c) in terms {
            let cur = p.coeff(k);
            p.set(k, cur + c);
        }
        p
    }

    fn set(&mut self, k: i64, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, c);
        }
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn spectrum(&self) -> Vec<i64> {
        self.coeffs.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_freq(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_freq(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Largest `|k|` in the spectrum (0 for the zero polynomial).
    pub fn bandwidth(&self) -> i64 {
        match (self.min_freq(), self.max_freq()) {
            (Some(a), Some(b)) => a.abs().max(b.abs()),
            _ => 0,
        }
    }

    /// Degree of `|f|` as a trigonometric polynomial in θ: `⌈(max − min) / 2⌉`.
    pub fn modulus_degree(&self) -> i64 {
        match (self.min_freq(), self.max_freq()) {
            (Some(a), Some(b)) => (b - a + 1) / 2,
            _ => 0,
        }
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Coefficient-space ℓ² norm.
    pub fn l2_coeff_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_analytic(&self) -> bool {
        self.min_freq().map_or(true, |k| k >= 0)
    }

    /// `conj(f)`: the coefficient at `k` moves to `-k`, conjugated.
    pub fn conj(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&k, c)| (-k, c.conj())).collect(),
        }
    }

    /// True iff `c(-k) = conj(c(k))` for every `k`, up to `tol` relative to the largest coefficient.
    pub fn is_real_valued(&self, tol: f64) -> bool {
        let scale = self.max_coeff_abs().max(f64::MIN_POSITIVE);
        self.coeffs
            .iter()
            .all(|(&k, &c)| (self.coeff(-k).conj() - c).norm() <= tol * scale)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_terms(self.terms().map(|(k, c)| (k, c * s)))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `z^n · f`
    pub fn shift(&self, n: i64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&k, &c)| (k + n, c)).collect(),
        }
    }

    /// Point evaluation at `e^{iθ}`.
    pub fn eval(&self, theta: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&k, &c)| c * Complex64::from_polar(1.0, (k as f64) * theta))
            .sum()
    }

    /// Evaluation at an arbitrary complex point (for analytic or Laurent use).
    pub fn eval_at(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().map(|(&k, &c)| c * z.powi(k as i32)).sum()
    }

    /// Grid point `e^{2πij/n}` evaluation, used by tests and small grids.
    pub fn eval_grid_point(&self, j: usize, n: usize) -> Complex64 {
        self.eval(TAU * j as f64 / n as f64)
    }

    /// Exact sparse convolution without dropping anything: every frequency in
    /// `spec f + spec g` is present, together with its largest contributing term.
    pub fn raw_product(&self, other: &Self) -> BTreeMap<i64, (Complex64, f64)> {
        let mut out: BTreeMap<i64, (Complex64, f64)> = BTreeMap::new();
        for (&a, &ca) in &self.coeffs {
            for (&b, &cb) in &other.coeffs {
                let term = ca * cb;
                let e = out.entry(a + b).or_default();
                e.0 += term;
                e.1 = e.1.max(term.norm());
            }
        }
        out
    }

    /// Product with the cancellations that were dropped.
    pub fn multiply(&self, other: &Self) -> (Self, Vec<Cancellation>) {
        let mut dropped = Vec::new();
        let mut coeffs = BTreeMap::new();
        for (k, (c, largest)) in self.raw_product(other) {
            if c.norm() <= CANCELLATION_THRESHOLD * largest {
                dropped.push(Cancellation {
                    k,
                    magnitude: c.norm(),
                    largest_term: largest,
                });
            } else {
                coeffs.insert(k, c);
            }
        }
        if !dropped.is_empty() {
            log::debug!("product dropped {} cancelled coefficient(s)", dropped.len());
        }
        (Self { coeffs }, dropped)
    }

    /// `Σ α_j Re(z^{n_j})`; frequency 0 contributes the real constant `α_j`.
    pub fn real_combination(alpha: &[f64], frequencies: &[i64]) -> Result<Self> {
        if alpha.len() != frequencies.len() {
            return Err(Error::pre(format!(
                "{} weights for {} frequencies",
                alpha.len(),
                frequencies.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &n in frequencies {
            if n < 0 {
                return Err(Error::pre(format!("frequency {n} is negative")));
            }
            if !seen.insert(n) {
                return Err(Error::pre(format!("frequency {n} repeated")));
            }
        }
        let mut terms = Vec::with_capacity(2 * alpha.len());
        for (&a, &n) in alpha.iter().zip(frequencies) {
            if n == 0 {
                terms.push((0, Complex64::new(a, 0.0)));
            } else {
                terms.push((n, Complex64::new(a / 2.0, 0.0)));
                terms.push((-n, Complex64::new(a / 2.0, 0.0)));
            }
        }
        Ok(Self::from_terms(terms))
    }

    pub fn spectrum_in(&self, set: &SpectralSet) -> SpectrumCheck {
        let offenders: Vec<i64> = self.coeffs.keys().copied().filter(|&k| !set.contains(k)).collect();
        SpectrumCheck {
            inside: offenders.is_empty(),
            offenders,
        }
    }

    /// Keep only the coefficients whose frequency lies in `set`.
    pub fn restrict_to(&self, set: &SpectralSet) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| set.contains(**k))
                .map(|(&k, &c)| (k, c))
                .collect(),
        }
    }

    /// Drop coefficients with modulus at most `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(_, c)| c.norm() > tol)
                .map(|(&k, &c)| (k, c))
                .collect(),
        }
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn max_coeff_distance(&self, other: &Self) -> f64 {
        (self - other).max_coeff_abs()
    }
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        TrigPoly::from_terms(self.terms().chain(rhs.terms()))
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        TrigPoly::from_terms(self.terms().chain(rhs.terms().map(|(k, c)| (k, -c))))
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale_real(-1.0)
    }
}

impl Mul for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        self.multiply(rhs).0
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for TrigPoly {
            type Output = TrigPoly;
            fn $m(self, rhs: TrigPoly) -> TrigPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Serialized as a JSON array of `[k, re, im]` triples sorted by `k`.
impl Serialize for TrigPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let triples: Vec<(i64, f64, f64)> = self.terms().map(|(k, c)| (k, c.re, c.im)).collect();
        triples.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let triples: Vec<(i64, f64, f64)> = Vec::deserialize(d)?;
        let mut coeffs = BTreeMap::new();
        for (k, re, im) in triples {
            if !re.is_finite() || !im.is_finite() {
                return Err(D::Error::custom(format!("non-finite coefficient at frequency {k}")));
            }
            let c = Complex64::new(re, im);
            if coeffs.insert(k, c).is_some() {
                return Err(D::Error::custom(format!("frequency {k} listed twice")));
            }
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(TrigPoly { coeffs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn product_examples() {
        let re_z2 = TrigPoly::real_combination(&[1.0], &[2]).unwrap();
        let (p, dropped) = TrigPoly::z(2).multiply(&re_z2);
        assert!(dropped.is_empty());
        assert_eq!(p, TrigPoly::from_terms([(0, c(0.5)), (4, c(0.5))]));
        assert_eq!(p.spectrum(), vec![0, 4]);

        let f = TrigPoly::from_terms([(1, c(0.3)), (-2, Complex64::new(0.0, 1.0))]);
        assert_eq!(&f * &TrigPoly::one(), f);

        let p = &TrigPoly::z(1) * &re_z2;
        assert_eq!(p, TrigPoly::from_terms([(-1, c(0.5)), (3, c(0.5))]));
    }

    #[test]
    fn cancellation_is_dropped_and_reported() {
        let a = TrigPoly::from_terms([(0, c(1.0)), (1, c(1.0))]);
        let b = TrigPoly::from_terms([(0, c(1.0)), (1, c(-1.0))]);
        let (p, dropped) = a.multiply(&b);
        assert_eq!(p, TrigPoly::from_terms([(0, c(1.0)), (2, c(-1.0))]));
        assert_eq!(dropped.len(), 1);
        assert_eq!(dropped[0].k, 1);
    }

    #[test]
    fn real_combination_examples() {
        let h = TrigPoly::real_combination(&[1.0], &[3]).unwrap();
        assert_eq!(h, TrigPoly::from_terms([(3, c(0.5)), (-3, c(0.5))]));
        let h = TrigPoly::real_combination(&[0.0, 1.0, 0.0], &[1, 2, 3]).unwrap();
        assert_eq!(h, TrigPoly::real_combination(&[1.0], &[2]).unwrap());
        assert!(TrigPoly::real_combination(&[], &[]).unwrap().is_zero());
        let h = TrigPoly::real_combination(&[2.0, 1.0], &[0, 1]).unwrap();
        assert_eq!(h.coeff(0), c(2.0));
        assert!(h.is_real_valued(0.0));
    }

    #[test]
    fn real_combination_rejects_bad_frequencies() {
        assert!(TrigPoly::real_combination(&[1.0, 1.0], &[2, 2]).is_err());
        assert!(TrigPoly::real_combination(&[1.0], &[-1]).is_err());
        assert!(TrigPoly::real_combination(&[1.0], &[1, 2]).is_err());
    }

    #[test]
    fn spectrum_inclusion_examples() {
        let even: SpectralSet = "AP(2,0)".parse().unwrap();
        let zplus = SpectralSet::nonnegative();
        let p = TrigPoly::from_terms([(0, c(0.5)), (4, c(0.5))]);
        assert!(p.spectrum_in(&even).inside);
        assert!(TrigPoly::z(1).spectrum_in(&zplus).inside);
        let chk = TrigPoly::z(-1).spectrum_in(&zplus);
        assert!(!chk.inside);
        assert_eq!(chk.offenders, vec![-1]);
        let p = TrigPoly::from_terms([(-1, c(0.5)), (3, c(0.5))]);
        assert!(p.spectrum_in(&SpectralSet::integers_without([0])).inside);
    }

    #[test]
    fn conjugation_moves_frequencies() {
        let f = TrigPoly::from_terms([(2, Complex64::new(1.0, 2.0))]);
        assert_eq!(f.conj(), TrigPoly::from_terms([(-2, Complex64::new(1.0, -2.0))]));
        assert!((&f + &f.conj()).is_real_valued(0.0));
    }

    #[test]
    fn json_shape_is_sorted_triples() {
        let f = TrigPoly::from_terms([(3, c(0.5)), (-1, Complex64::new(0.25, -1.5))]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, "[[-1,0.25,-1.5],[3,0.5,0.0]]");
        let back: TrigPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<TrigPoly>("[[1,1.0,0.0],[1,2.0,0.0]]").is_err());
    }
}
