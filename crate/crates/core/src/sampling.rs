//! Seeded random inputs: sparse polynomials, unit-norm rescaling, outer polynomials.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::circle::{norm_l1, norm_linf, TrigPoly};
use crate::error::{Error, Result};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// `sparsity` distinct frequencies from `frequencies`, with standard complex Gaussian coefficients.
pub fn random_poly<R: Rng + ?Sized>(rng: &mut R, frequencies: &[i64], sparsity: usize) -> Result<TrigPoly> {
    if sparsity == 0 || sparsity > frequencies.len() {
        return Err(Error::pre(format!(
            "cannot pick {sparsity} frequencies out of {}",
            frequencies.len()
        )));
    }
    let chosen: Vec<i64> = frequencies.choose_multiple(rng, sparsity).copied().collect();
    let mut terms = Vec::with_capacity(sparsity);
    for k in chosen {
        terms.push((k, gaussian(rng)));
    }
    Ok(TrigPoly::from_terms(terms))
}

/// Rescale to unit L¹ norm.
pub fn normalize_l1(f: &TrigPoly, q: u32) -> Result<TrigPoly> {
    let n = norm_l1(f, q)?.value;
    if n == 0.0 {
        return Err(Error::pre("cannot normalize the zero polynomial"));
    }
    Ok(f.scale_real(1.0 / n))
}

/// Rescale to unit sup norm (by the refined maximum).
pub fn normalize_linf(f: &TrigPoly, q: u32) -> Result<TrigPoly> {
    let n = norm_linf(f, q)?.value;
    if n == 0.0 {
        return Err(Error::pre("cannot normalize the zero polynomial"));
    }
    Ok(f.scale_real(1.0 / n))
}

/// `Π (z - r_i)` with `degree` random roots of modulus in `[rmin, rmax]`.
pub fn random_roots_poly<R: Rng + ?Sized>(rng: &mut R, degree: usize, rmin: f64, rmax: f64) -> TrigPoly {
    let mut p = TrigPoly::one();
    for _ in 0..degree {
        let r = rng.gen_range(rmin..=rmax);
        let t = rng.gen_range(0.0..std::f64::consts::TAU);
        let root = Complex64::from_polar(r, t);
        p = &p * &TrigPoly::from_terms([(0, -root), (1, Complex64::new(1.0, 0.0))]);
    }
    p
}

/// Unit-L¹-norm analytic polynomial whose roots all lie outside the closed disk.
pub fn random_outer<R: Rng + ?Sized>(rng: &mut R, degree: usize, q: u32) -> Result<TrigPoly> {
    normalize_l1(&random_roots_poly(rng, degree, 1.2, 3.0), q)
}
