//! Roots, inner–outer splitting and the classical extreme-point criteria for
//! ball(H¹) and ball(H∞).

mod logint;
mod roots;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use logint::{log_integral, Arc, Divergence, LogIntegral, LogIntegralReport, VanishingPoint, ARC_TOL, MAX_ORDER, NORM_TOL};
pub use roots::{polynomial_roots, Root};

use crate::circle::{norm_l1, norm_linf, QuadratureValue, SupNorm, TrigPoly};
use crate::error::{Error, Result};
use crate::spectra::SpectralSet;

/// Roots within this distance of the unit circle count as boundary zeros.
pub const BOUNDARY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub degree: usize,
    pub roots_inside: Vec<Root>,
    pub roots_on_boundary: Vec<Root>,
    pub roots_outside: Vec<Root>,
    pub is_outer: bool,
    pub blaschke_degree: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Region {
    Inside,
    Boundary,
    Outside,
}

fn region(modulus: f64) -> Region {
    if (modulus - 1.0).abs() <= BOUNDARY_TOL {
        Region::Boundary
    } else if modulus < 1.0 {
        Region::Inside
    } else {
        Region::Outside
    }
}

fn analytic_coeffs(f: &TrigPoly) -> Result<Vec<Complex64>> {
    if f.is_zero() {
        return Err(Error::pre("f is identically zero"));
    }
    if !f.is_analytic() {
        return Err(Error::pre(format!(
            "f has negative frequency {} and is not an analytic polynomial",
            f.min_freq().unwrap()
        )));
    }
    let d = f.max_freq().unwrap() as usize;
    let mut c = vec![Complex64::default(); d + 1];
    for (k, v) in f.terms() {
        c[k as usize] = v;
    }
    Ok(c)
}

/// Locate every root of the analytic polynomial `f` and split inner from outer.
pub fn factorize(f: &TrigPoly) -> Result<FactorizationReport> {
    let coeffs = analytic_coeffs(f)?;
    let roots = polynomial_roots(&coeffs)?;
    let mut report = FactorizationReport {
        degree: coeffs.len() - 1,
        roots_inside: Vec::new(),
        roots_on_boundary: Vec::new(),
        roots_outside: Vec::new(),
        is_outer: true,
        blaschke_degree: 0,
    };
    for r in roots {
        let lo = region(r.modulus - r.uncertainty);
        let hi = region(r.modulus + r.uncertainty);
        if lo != hi {
            return Err(Error::IllConditionedRoots {
                re: r.value.re,
                im: r.value.im,
                multiplicity: r.multiplicity,
                radius: r.uncertainty,
                residual: r.residual,
            });
        }
        match region(r.modulus) {
            Region::Inside => {
                report.blaschke_degree += r.multiplicity;
                report.roots_inside.push(r);
            }
            Region::Boundary => report.roots_on_boundary.push(r),
            Region::Outside => report.roots_outside.push(r),
        }
    }
    report.is_outer = report.roots_inside.is_empty();
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Extreme,
    NonExtreme,
    NotUnitNorm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H1Classification {
    pub verdict: Verdict,
    pub norm: QuadratureValue,
    pub factorization: FactorizationReport,
    /// The criterion describes ball(H¹), i.e. spectrum in Z₊.
    pub scope: String,
}

/// Outer and of unit L¹ norm, or not.
pub fn classify_h1_extreme(f: &TrigPoly, q: u32) -> Result<H1Classification> {
    let factorization = factorize(f)?;
    let norm = norm_l1(f, q)?;
    let verdict = if (norm.value - 1.0).abs() > NORM_TOL {
        Verdict::NotUnitNorm
    } else if factorization.is_outer {
        Verdict::Extreme
    } else {
        Verdict::NonExtreme
    };
    Ok(H1Classification {
        verdict,
        norm,
        factorization,
        scope: "ball(H1): spectrum in Zplus".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HinfClassification {
    pub verdict: Verdict,
    pub norm: SupNorm,
    pub log_integral: Option<LogIntegralReport>,
    pub scope: String,
}

/// The divergent-log-integral criterion, on the sets where it is known to hold:
/// Z₊ minus finitely many points, and 2Z₊.
pub fn classify_hinf_extreme(f: &TrigPoly, set: &SpectralSet, q: u32) -> Result<HinfClassification> {
    let scope = match set.finite_gaps_in_nonnegative() {
        Some(gaps) => format!("ball(H∞(Λ)), Λ = Zplus minus {} point(s)", gaps.len()),
        None if set.is_even_nonnegative() => "ball(H∞(2Zplus))".to_string(),
        None => {
            return Err(Error::OutOfScope(format!(
                "{set}: the log-integral criterion is established only for Zplus minus a finite set and for 2Zplus"
            )))
        }
    };
    if f.is_zero() {
        return Err(Error::pre("f is identically zero"));
    }
    let check = f.spectrum_in(set);
    if !check.inside {
        return Err(Error::pre(format!("spectrum of f leaves the set at {:?}", check.offenders)));
    }
    let norm = norm_linf(f, q)?;
    if !norm.within(1.0, NORM_TOL) {
        return Ok(HinfClassification {
            verdict: Verdict::NotUnitNorm,
            norm,
            log_integral: None,
            scope,
        });
    }
    let report = log_integral(f, q)?;
    let verdict = if report.is_divergent() {
        Verdict::Extreme
    } else {
        Verdict::NonExtreme
    };
    Ok(HinfClassification {
        verdict,
        norm,
        log_integral: Some(report),
        scope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn one_plus_z_has_boundary_root() {
        let r = factorize(&TrigPoly::from_terms([(0, c(1.0)), (1, c(1.0))])).unwrap();
        assert_eq!(r.roots_on_boundary.len(), 1);
        assert!((r.roots_on_boundary[0].value + 1.0).norm() < 1e-14);
        assert!(r.is_outer);
        assert_eq!(r.blaschke_degree, 0);
    }

    #[test]
    fn monomial_and_inner_zero() {
        let r = factorize(&TrigPoly::z(2)).unwrap();
        assert_eq!(r.roots_inside[0].multiplicity, 2);
        assert!(!r.is_outer);
        assert_eq!(r.blaschke_degree, 2);
        let r = factorize(&TrigPoly::from_terms([(0, c(-0.5)), (1, c(1.0))])).unwrap();
        assert_eq!(r.blaschke_degree, 1);
        assert!((r.roots_inside[0].value - 0.5).norm() < 1e-15);
    }

    #[test]
    fn factorize_refuses_bad_input() {
        assert!(factorize(&TrigPoly::zero()).is_err());
        assert!(factorize(&TrigPoly::z(-1)).is_err());
    }

    #[test]
    fn h1_examples() {
        let f = TrigPoly::from_terms([(0, c(PI / 4.0)), (1, c(PI / 4.0))]);
        assert_eq!(classify_h1_extreme(&f, 16).unwrap().verdict, Verdict::Extreme);
        assert_eq!(classify_h1_extreme(&TrigPoly::z(2), 16).unwrap().verdict, Verdict::NonExtreme);
        let f = TrigPoly::from_terms([(0, c(1.0)), (1, c(1.0))]);
        assert_eq!(classify_h1_extreme(&f, 16).unwrap().verdict, Verdict::NotUnitNorm);
    }

    #[test]
    fn hinf_examples() {
        let zplus = SpectralSet::nonnegative();
        assert_eq!(
            classify_hinf_extreme(&TrigPoly::z(1), &zplus, 16).unwrap().verdict,
            Verdict::Extreme
        );
        let f = TrigPoly::from_terms([(0, c(0.5)), (1, c(0.5))]);
        assert_eq!(classify_hinf_extreme(&f, &zplus, 16).unwrap().verdict, Verdict::NonExtreme);
        let even: SpectralSet = "AP(2,0) & Zplus".parse().unwrap();
        assert_eq!(
            classify_hinf_extreme(&TrigPoly::z(2), &even, 16).unwrap().verdict,
            Verdict::Extreme
        );
    }

    #[test]
    fn hinf_refuses_outside_scope() {
        let sparse: SpectralSet = "Zplus \\ pow2".parse().unwrap();
        let err = classify_hinf_extreme(&TrigPoly::z(3), &sparse, 16).unwrap_err();
        assert!(matches!(err, Error::OutOfScope(_)));
        let z: SpectralSet = SpectralSet::integers();
        assert!(matches!(
            classify_hinf_extreme(&TrigPoly::z(1), &z, 16).unwrap_err(),
            Error::OutOfScope(_)
        ));
    }
}
