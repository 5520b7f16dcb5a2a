use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{L1_RESIDUAL_TOL, NULL_TOL, UNIT_NORM_TOL};
use crate::circle::{norm_l1, norm_linf, GridFunction, QuadratureValue, TrigPoly};
use crate::error::{Error, Result};
use crate::linalg::{right_singular_real, sign_normalize};
use crate::spectra::{SpectralSet, DEFAULT_BAND};

/// Relative size of the smallest nonzero coefficient kept in `u - f`.
const DISTINCT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum L1Method {
    Periodic {
        period: u64,
    },
    Cofinite {
        excluded: Vec<i64>,
        alpha: Vec<f64>,
        singular_values: Vec<f64>,
    },
    Search {
        degree: i64,
        constraints: Vec<i64>,
        singular_values: Vec<f64>,
    },
}

/// `f = (u + v)/2` with `u, v = f(1 ± ε(h - c))`, both in the unit ball of L¹_Λ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Witness {
    pub h: TrigPoly,
    /// `c = ∫|f|h dm / ∫|f| dm`
    pub shift: f64,
    pub epsilon: f64,
    pub u: TrigPoly,
    pub v: TrigPoly,
    /// Largest `|(fh)^(k)|` over `k ∉ Λ`.
    pub residual: f64,
    /// Variance of `h` over the grid points where `f` does not vanish.
    pub nonconstancy: f64,
    pub norm_f: QuadratureValue,
    pub norm_u: QuadratureValue,
    pub norm_v: QuadratureValue,
    pub construction: L1Method,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankProfile {
    pub parameters: usize,
    pub constraints: usize,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SearchOutcome {
    Witness(Box<L1Witness>),
    Inconclusive { degree: i64, profile: RankProfile },
}

impl SearchOutcome {
    pub fn witness(&self) -> Option<&L1Witness> {
        match self {
            SearchOutcome::Witness(w) => Some(w),
            SearchOutcome::Inconclusive { .. } => None,
        }
    }
}

fn unit_l1_gate(f: &TrigPoly, q: u32) -> Result<QuadratureValue> {
    if f.is_zero() {
        return Err(Error::pre("f is identically zero"));
    }
    let n = norm_l1(f, q)?;
    if (n.value - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::pre(format!("‖f‖₁ = {} is not 1", n.value)));
    }
    Ok(n)
}

fn spectrum_gate(f: &TrigPoly, set: &SpectralSet) -> Result<()> {
    let check = f.spectrum_in(set);
    if !check.inside {
        return Err(Error::pre(format!("spectrum of f leaves the set at {:?}", check.offenders)));
    }
    Ok(())
}

/// Largest coefficient of `fh` outside the set, computed without any dropping.
pub(crate) fn off_set_residual(f: &TrigPoly, h: &TrigPoly, set: &SpectralSet) -> f64 {
    f.raw_product(h)
        .into_iter()
        .filter(|(k, _)| !set.contains(*k))
        .map(|(_, (c, _))| c.norm())
        .fold(0.0, f64::max)
}

/// Variance of `h` over grid points with `|f| > 1e-8 ‖f‖∞`, if it clears `1e-12 ‖h‖∞²`.
fn nonconstancy(f: &TrigPoly, h: &TrigPoly, q: u32) -> Result<Option<f64>> {
    let fg = GridFunction::sample(f, q)?;
    let hg = GridFunction::sample(h, q)?;
    let fmax = fg.max_abs();
    let vals: Vec<f64> = fg
        .samples()
        .iter()
        .zip(hg.samples())
        .filter(|(a, _)| a.norm() > 1e-8 * fmax)
        .map(|(_, b)| b.re)
        .collect();
    if vals.is_empty() {
        return Ok(None);
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
    let hmax = hg.max_abs();
    Ok((var > 1e-12 * hmax * hmax).then_some(var))
}

/// Shift, scale and split: the midpoint pair for a real `h` with `fh ∈ L¹_Λ`.
fn complete(
    f: &TrigPoly,
    set: &SpectralSet,
    h: TrigPoly,
    residual: f64,
    nonconstancy: f64,
    norm_f: QuadratureValue,
    construction: L1Method,
    q: u32,
) -> Result<L1Witness> {
    // Same grid as the certified norm, so ∫|f|(h - c) vanishes in the quadrature itself.
    let fg = GridFunction::sample(f, norm_f.q)?;
    let hg = GridFunction::sample(&h, norm_f.q)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in fg.samples().iter().zip(hg.samples()) {
        num += a.norm() * b.re;
        den += a.norm();
    }
    let shift = num / den;
    let centered = &h - &TrigPoly::constant(Complex64::new(shift, 0.0));
    let sup = norm_linf(&centered, q)?;
    if sup.upper == 0.0 {
        return Err(Error::Anomaly("h is constant".into()));
    }
    let epsilon = 1.0 / sup.upper;
    let perturbation = f.multiply(&centered).0.scale_real(epsilon).restrict_to(set);
    if perturbation.max_coeff_abs() <= DISTINCT_TOL * f.max_coeff_abs() {
        return Err(Error::Anomaly("the perturbation f·ε(h - c) vanishes".into()));
    }
    let u = f + &perturbation;
    let v = f - &perturbation;
    let norm_u = norm_l1(&u, q)?;
    let norm_v = norm_l1(&v, q)?;
    for (name, n) in [("u", norm_u), ("v", norm_v)] {
        if (n.value - norm_f.value).abs() > L1_RESIDUAL_TOL {
            return Err(Error::Anomaly(format!(
                "‖{name}‖₁ = {} differs from ‖f‖₁ = {}",
                n.value, norm_f.value
            )));
        }
    }
    Ok(L1Witness {
        h,
        shift,
        epsilon,
        u,
        v,
        residual,
        nonconstancy,
        norm_f,
        norm_u,
        norm_v,
        construction,
    })
}

/// Witness `h = Re(z^n)` for a set with period `n`.
pub fn periodic_witness(f: &TrigPoly, set: &SpectralSet, q: u32) -> Result<L1Witness> {
    let norm_f = unit_l1_gate(f, q)?;
    spectrum_gate(f, set)?;
    let period = set
        .period_of(DEFAULT_BAND as u64)?
        .ok_or_else(|| Error::pre(format!("{set} has no period up to {DEFAULT_BAND}")))?;
    let n = period.n as i64;
    for shifted in [f.shift(n), f.shift(-n)] {
        let check = shifted.spectrum_in(set);
        if !check.inside {
            return Err(Error::pre(format!(
                "shifting f by ±{n} leaves the set at {:?}",
                check.offenders
            )));
        }
    }
    let h = TrigPoly::real_combination(&[1.0], &[n])?;
    let residual = off_set_residual(f, &h, set);
    let var = nonconstancy(f, &h, q)?.ok_or_else(|| Error::Anomaly("Re(z^n) is constant on supp f".into()))?;
    complete(f, set, h, residual, var, norm_f, L1Method::Periodic { period: period.n }, q)
}

/// Null vector of the real map `α ↦ ((f h_α)^(k_ν))_ν`, `h_α = Re Σ α_j z^j`, `j = 1..2N+1`.
pub fn cofinite_l1_witness(f: &TrigPoly, set: &SpectralSet, q: u32) -> Result<L1Witness> {
    let norm_f = unit_l1_gate(f, q)?;
    spectrum_gate(f, set)?;
    let excluded = set
        .finite_complement()
        .ok_or_else(|| Error::pre(format!("{set} is not cofinite in Z")))?;
    let n = excluded.len();
    let m = 2 * n + 1;
    let mut s = DMatrix::<f64>::zeros(2 * n, m);
    for (nu, &k) in excluded.iter().enumerate() {
        for j in 1..=m as i64 {
            let gamma = (f.coeff(k - j) + f.coeff(k + j)) / 2.0;
            s[(2 * nu, j as usize - 1)] = gamma.re;
            s[(2 * nu + 1, j as usize - 1)] = gamma.im;
        }
    }
    let rs = right_singular_real(&s)?;
    if rs.smallest() > NULL_TOL * rs.largest() {
        return Err(Error::Anomaly(format!(
            "S has no numerical kernel; singular values {:?}",
            rs.values
        )));
    }
    let freqs: Vec<i64> = (1..=m as i64).collect();
    for mut alpha in rs.null_space(NULL_TOL).into_iter().rev() {
        sign_normalize(&mut alpha);
        let alpha: Vec<f64> = alpha.iter().copied().collect();
        let h = TrigPoly::real_combination(&alpha, &freqs)?;
        let residual = off_set_residual(f, &h, set);
        if residual > L1_RESIDUAL_TOL {
            continue;
        }
        let Some(var) = nonconstancy(f, &h, q)? else {
            continue;
        };
        let method = L1Method::Cofinite {
            excluded: excluded.clone(),
            alpha,
            singular_values: rs.values.clone(),
        };
        return complete(f, set, h, residual, var, norm_f, method, q);
    }
    Err(Error::Anomaly(format!(
        "no kernel vector of S gives a witness; singular values {:?}",
        rs.values
    )))
}

/// `h` from the search parameters `[a0?, x_1, y_1, …, x_D, y_D]`, `ĥ(j) = (x_j + i y_j)/2`.
fn search_h(params: &DVector<f64>, degree: i64, allow_constant: bool) -> TrigPoly {
    let off = allow_constant as usize;
    let mut terms = Vec::new();
    if allow_constant {
        terms.push((0, Complex64::new(params[0], 0.0)));
    }
    for j in 1..=degree {
        let base = off + 2 * (j as usize - 1);
        let c = Complex64::new(params[base], params[base + 1]) / 2.0;
        terms.push((j, c));
        terms.push((-j, c.conj()));
    }
    TrigPoly::from_terms(terms)
}

/// Real `h` of degree at most `D` with `(fh)^(k) = 0` for every `k ∉ Λ`, if the
/// truncated system has a solution that is not constant on `supp f`.
pub fn general_l1_witness_search(
    f: &TrigPoly,
    set: &SpectralSet,
    degree: i64,
    allow_constant: bool,
    q: u32,
) -> Result<SearchOutcome> {
    if degree < 1 {
        return Err(Error::pre(format!("degree {degree} < 1")));
    }
    let norm_f = unit_l1_gate(f, q)?;
    spectrum_gate(f, set)?;
    let (lo, hi) = (f.min_freq().unwrap() - degree, f.max_freq().unwrap() + degree);
    let constraints = set.complement_in_band(lo, hi);
    let off = allow_constant as usize;
    let params = off + 2 * degree as usize;
    let i = Complex64::new(0.0, 1.0);
    let mut a = DMatrix::<f64>::zeros(2 * constraints.len(), params);
    for (row, &k) in constraints.iter().enumerate() {
        if allow_constant {
            let c = f.coeff(k);
            a[(2 * row, 0)] = c.re;
            a[(2 * row + 1, 0)] = c.im;
        }
        for j in 1..=degree {
            let (lo_c, hi_c) = (f.coeff(k - j), f.coeff(k + j));
            let x = (lo_c + hi_c) / 2.0;
            let y = i * (lo_c - hi_c) / 2.0;
            let col = off + 2 * (j as usize - 1);
            a[(2 * row, col)] = x.re;
            a[(2 * row + 1, col)] = x.im;
            a[(2 * row, col + 1)] = y.re;
            a[(2 * row + 1, col + 1)] = y.im;
        }
    }
    let rs = right_singular_real(&a)?;
    let rank = rs.rank(NULL_TOL);
    let profile = RankProfile {
        parameters: params,
        constraints: constraints.len(),
        rank,
        singular_values: rs.values.clone(),
    };

    // Constants are never witnesses: drop the a0 component and re-orthonormalize.
    let mut kernel: Vec<DVector<f64>> = Vec::new();
    for mut v in rs.null_space(NULL_TOL).into_iter().rev() {
        if allow_constant {
            v[0] = 0.0;
        }
        for _ in 0..2 {
            for u in &kernel {
                let d = u.dot(&v);
                v -= u * d;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            kernel.push(v / n);
        }
    }
    for mut v in kernel {
        sign_normalize(&mut v);
        let h = search_h(&v, degree, allow_constant);
        let residual = off_set_residual(f, &h, set);
        if residual > L1_RESIDUAL_TOL {
            continue;
        }
        let Some(var) = nonconstancy(f, &h, q)? else {
            continue;
        };
        let method = L1Method::Search {
            degree,
            constraints: constraints.clone(),
            singular_values: rs.values.clone(),
        };
        let w = complete(f, set, h, residual, var, norm_f, method, q)?;
        return Ok(SearchOutcome::Witness(Box::new(w)));
    }
    Ok(SearchOutcome::Inconclusive { degree, profile })
}

/// Independent re-check of an L¹ witness from its serialized data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Verification {
    /// Largest coefficient of `u + v - 2f`, relative to the largest coefficient of `f`.
    pub midpoint_error: f64,
    pub u_inside: bool,
    pub v_inside: bool,
    pub distinct: bool,
    pub norm_u: f64,
    pub norm_v: f64,
    pub residual: f64,
    /// `∫|f|(h - c) dm`
    pub centered_mass: f64,
    pub ok: bool,
}

pub fn verify_l1_witness(f: &TrigPoly, set: &SpectralSet, w: &L1Witness, q: u32) -> Result<L1Verification> {
    let sum = &w.u + &w.v;
    let midpoint_error = sum.max_coeff_distance(&f.scale_real(2.0)) / f.max_coeff_abs().max(f64::MIN_POSITIVE);
    let u_inside = w.u.spectrum_in(set).inside;
    let v_inside = w.v.spectrum_in(set).inside;
    let distinct = w.u.max_coeff_distance(&w.v) > DISTINCT_TOL * f.max_coeff_abs();
    let norm_u = norm_l1(&w.u, q)?.value;
    let norm_v = norm_l1(&w.v, q)?.value;
    let residual = off_set_residual(f, &w.h, set);
    let nf = norm_l1(f, q)?;
    let fg = GridFunction::sample(f, nf.q)?;
    let hg = GridFunction::sample(&w.h, nf.q)?;
    let centered_mass = fg
        .samples()
        .iter()
        .zip(hg.samples())
        .map(|(a, b)| a.norm() * (b.re - w.shift))
        .sum::<f64>()
        / fg.len() as f64;
    let ok = midpoint_error <= 1e-14
        && u_inside
        && v_inside
        && distinct
        && norm_u <= 1.0 + L1_RESIDUAL_TOL
        && norm_v <= 1.0 + L1_RESIDUAL_TOL
        && residual <= L1_RESIDUAL_TOL
        && centered_mass.abs() <= 1e-10;
    Ok(L1Verification {
        midpoint_error,
        u_inside,
        v_inside,
        distinct,
        norm_u,
        norm_v,
        residual,
        centered_mass,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn periodic_z2_over_even() {
        let set: SpectralSet = "AP(2,0)".parse().unwrap();
        let w = periodic_witness(&TrigPoly::z(2), &set, 16).unwrap();
        assert_eq!(w.h, TrigPoly::real_combination(&[1.0], &[2]).unwrap());
        assert!(w.shift.abs() < 1e-15);
        assert!((w.epsilon - 1.0).abs() < 1e-9);
        // u = z² + (z⁴ + 1)/2
        let expect = TrigPoly::from_terms([(0, c(0.5)), (2, c(1.0)), (4, c(0.5))]);
        assert!(w.u.max_coeff_distance(&expect) < 1e-9);
        assert!((w.norm_u.value - 1.0).abs() < 1e-9);
        assert!(verify_l1_witness(&TrigPoly::z(2), &set, &w, 16).unwrap().ok);
    }

    #[test]
    fn periodic_requires_period() {
        let err = periodic_witness(&TrigPoly::z(1), &SpectralSet::nonnegative(), 16).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn cofinite_z_without_zero() {
        let set = SpectralSet::integers_without([0]);
        let w = cofinite_l1_witness(&TrigPoly::z(1), &set, 16).unwrap();
        // The α₁ = 0 hyperplane: h carries no Re(z) component.
        assert_eq!(w.h.coeff(1), c(0.0));
        assert!(w.residual == 0.0);
        assert!(verify_l1_witness(&TrigPoly::z(1), &set, &w, 16).unwrap().ok);
    }

    #[test]
    fn cofinite_two_gaps() {
        let set = SpectralSet::integers_without([0, 4]);
        let w = cofinite_l1_witness(&TrigPoly::z(1), &set, 16).unwrap();
        assert!(w.residual <= 1e-12);
        assert!(w.u.spectrum_in(&set).inside && w.v.spectrum_in(&set).inside);
        assert!(w.h.max_freq().unwrap() <= 5);
    }

    #[test]
    fn unit_norm_gate() {
        let set = SpectralSet::integers_without([0]);
        let err = cofinite_l1_witness(&TrigPoly::monomial(1, c(0.5)), &set, 16).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn search_finds_re_z2_for_z2() {
        let set = SpectralSet::nonnegative_without([1]);
        let out = general_l1_witness_search(&TrigPoly::z(2), &set, 2, true, 16).unwrap();
        let w = out.witness().expect("witness");
        // ĥ(±1) is forced to vanish.
        assert!(w.h.coeff(1).norm() < 1e-12 && w.h.coeff(-1).norm() < 1e-12);
        assert!(w.h.coeff(2).norm() > 0.1);
        assert!(verify_l1_witness(&TrigPoly::z(2), &set, w, 16).unwrap().ok);
    }

    #[test]
    fn search_full_l1() {
        let out = general_l1_witness_search(&TrigPoly::z(1), &SpectralSet::integers(), 1, false, 16).unwrap();
        assert!(out.witness().is_some());
    }

    #[test]
    fn search_outer_is_inconclusive() {
        let f = TrigPoly::from_terms([(0, c(std::f64::consts::FRAC_PI_4)), (1, c(std::f64::consts::FRAC_PI_4))]);
        let out = general_l1_witness_search(&f, &SpectralSet::nonnegative(), 4, true, 16).unwrap();
        assert!(matches!(out, SearchOutcome::Inconclusive { .. }));
        assert!(general_l1_witness_search(&f, &SpectralSet::nonnegative(), 0, true, 16).is_err());
    }
}
