use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ExtremalityCertificate, Exponent, Verdict, LINF_TOL, MEAS_TOL, UNIT_NORM_TOL};
use crate::circle::{norm_linf, GridFunction, TrigPoly, MAX_GRID_EXP};
use crate::error::{Error, Result};
use crate::spectra::{FamilyTag, SpectralSet};

/// Bisection depth used to locate the ends of unimodular arcs inside a grid cell.
const ARC_DEPTH: u32 = 20;
/// `|f|² - 1` counts as the zero polynomial below this coefficient size.
const UNIMODULAR_COEFF_TOL: f64 = 1e-12;

/// Normalized measure of `E_f = {|f| = 1}`, enclosed as `lower <= m(E_f) <= upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureEnclosure {
    pub lower: f64,
    pub upper: f64,
    /// Fraction of grid nodes with `1 - |f| <= MEAS_TOL`.
    pub estimate: f64,
    pub q: u32,
    pub depth: u32,
    /// Largest discrete coefficient outside the set or the declared band, when sampled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_leak: Option<f64>,
    pub note: String,
}

fn dset_gate(set: &SpectralSet) -> Result<()> {
    if !set.has_tag(FamilyTag::DsetByCitation) {
        return Err(Error::pre(format!(
            "{set} carries no dset-by-citation tag; the D-set hypothesis cannot be checked numerically"
        )));
    }
    Ok(())
}

fn criterion(set: &SpectralSet) -> String {
    format!("ball(L∞_Λ), Λ = {set} a D-set by citation: m(|f| = 1) > 0 suffices")
}

/// For a polynomial `f`, `|f| = 1` on a set of positive measure forces `|f|² - 1 ≡ 0`,
/// so the measure is exactly 0 or 1.
pub fn dset_extreme_certificate(f: &TrigPoly, set: &SpectralSet, q: u32) -> Result<ExtremalityCertificate> {
    dset_gate(set)?;
    if f.is_zero() {
        return Err(Error::pre("f is identically zero"));
    }
    let check = f.spectrum_in(set);
    if !check.inside {
        return Err(Error::pre(format!("spectrum of f leaves the set at {:?}", check.offenders)));
    }
    let norm = norm_linf(f, q)?;
    if !norm.within(1.0, UNIT_NORM_TOL) {
        return Err(Error::pre(format!("‖f‖∞ = {} is not 1", norm.value)));
    }
    let (square, _) = f.multiply(&f.conj());
    let defect = (&square - &TrigPoly::one()).max_coeff_abs();
    let fg = GridFunction::sample(f, q)?;
    let estimate = fg.samples().iter().filter(|v| 1.0 - v.norm() <= MEAS_TOL).count() as f64 / fg.len() as f64;
    let verdict = if defect <= UNIMODULAR_COEFF_TOL {
        let measure = MeasureEnclosure {
            lower: 1.0,
            upper: 1.0,
            estimate,
            q,
            depth: 0,
            spectral_leak: None,
            note: format!("|f|² - 1 vanishes identically (largest coefficient {defect:e})"),
        };
        Verdict::ExtremeByDset { measure }
    } else {
        let note = format!(
            "|f|² - 1 is a nonzero trigonometric polynomial of degree {}, so |f| = 1 at finitely many points",
            square.bandwidth()
        );
        Verdict::Inconclusive {
            degree: None,
            rank_profile: None,
            reason: format!("m(|f| = 1) = 0 (grid estimate {estimate}); {note}"),
        }
    };
    Ok(ExtremalityCertificate::new(Exponent::Infinity, set, verdict, criterion(set)))
}

/// The D-set test for a function known only through point evaluations, with a declared
/// spectral band `lo..=hi`. The band is not enforced; the leak outside the set is reported.
pub fn dset_extreme_certificate_sampled(
    f: impl Fn(f64) -> Complex64,
    band: (i64, i64),
    set: &SpectralSet,
    q: u32,
) -> Result<ExtremalityCertificate> {
    dset_gate(set)?;
    if q == 0 || q > MAX_GRID_EXP {
        return Err(Error::pre(format!("grid exponent {q} outside 1..={MAX_GRID_EXP}")));
    }
    let fg = GridFunction::from_fn(q, &f)?;
    let max = fg.max_abs();
    if max > 1.0 + LINF_TOL || max < 1.0 - UNIT_NORM_TOL {
        return Err(Error::pre(format!("grid sup {max} is not 1")));
    }
    let inside = |t: f64| 1.0 - f(t).norm() <= MEAS_TOL;
    let n = fg.len();
    let h = fg.spacing();
    let on: Vec<bool> = fg.samples().iter().map(|v| 1.0 - v.norm() <= MEAS_TOL).collect();
    let estimate = on.iter().filter(|&&b| b).count() as f64 / n as f64;

    let (mut lower, mut upper) = (0.0, 0.0);
    for j in 0..n {
        let (a, b) = (on[j], on[(j + 1) % n]);
        match (a, b) {
            (true, true) => {
                lower += h;
                upper += h;
            }
            (false, false) => {}
            _ => {
                // Bisect to the point where membership flips.
                let (mut lo, mut hi) = (fg.theta(j), fg.theta(j) + h);
                for _ in 0..ARC_DEPTH {
                    let mid = 0.5 * (lo + hi);
                    if inside(mid) == a {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t0 = fg.theta(j);
                if a {
                    lower += lo - t0;
                    upper += hi - t0;
                } else {
                    lower += t0 + h - hi;
                    upper += t0 + h - lo;
                }
            }
        }
    }
    let (lower, upper) = (lower / TAU, (upper / TAU).min(1.0));

    let dft = fg.dft();
    let half = n as i64 / 2;
    let leak = dft
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = if i as i64 >= half { i as i64 - n as i64 } else { i as i64 };
            (k, c.norm())
        })
        .filter(|&(k, _)| !set.contains(k) || k < band.0 || k > band.1)
        .map(|(_, v)| v)
        .fold(0.0, f64::max);

    let measure = MeasureEnclosure {
        lower,
        upper,
        estimate,
        q,
        depth: ARC_DEPTH,
        spectral_leak: Some(leak),
        note: format!("grid fraction with arc ends bisected to depth {ARC_DEPTH}"),
    };
    let verdict = if lower > 0.0 {
        Verdict::ExtremeByDset { measure }
    } else {
        Verdict::Inconclusive {
            degree: None,
            rank_profile: None,
            reason: format!("lower enclosure of m(|f| = 1) is 0 (estimate {estimate})"),
        }
    };
    Ok(ExtremalityCertificate::new(Exponent::Infinity, set, verdict, criterion(set)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParallelogramCheck {
    /// `|f ± g| <= 1` at every node.
    pub hypothesis_holds: bool,
    /// Largest `|f ± g| - 1`.
    pub hypothesis_excess: f64,
    /// Largest `|g|² - (1 - |f|²)`.
    pub max_violation: f64,
    /// `max_violation <= tol`, or the hypothesis fails and nothing is asserted.
    pub bound_holds: bool,
}

/// `|f|² + |g|² = ½(|f+g|² + |f-g|²)`, so `‖f ± g‖∞ <= 1` forces `|g|² <= 1 - |f|²`.
pub fn parallelogram_bound(f: &GridFunction, g: &GridFunction, tol: f64) -> Result<ParallelogramCheck> {
    if f.q() != g.q() {
        return Err(Error::pre(format!("grids 2^{} and 2^{} differ", f.q(), g.q())));
    }
    let mut excess = f64::NEG_INFINITY;
    let mut violation = f64::NEG_INFINITY;
    for (a, b) in f.samples().iter().zip(g.samples()) {
        excess = excess.max((a + b).norm() - 1.0).max((a - b).norm() - 1.0);
        violation = violation.max(b.norm_sqr() - (1.0 - a.norm_sqr()));
    }
    let hypothesis_holds = excess <= 0.0;
    Ok(ParallelogramCheck {
        hypothesis_holds,
        hypothesis_excess: excess,
        max_violation: violation,
        bound_holds: !hypothesis_holds || violation <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn lacunary() -> SpectralSet {
        "negpow(2)+Zplus".parse().unwrap()
    }

    #[test]
    fn z_is_extreme_by_dset() {
        let cert = dset_extreme_certificate(&TrigPoly::z(1), &lacunary(), 16).unwrap();
        match cert.verdict {
            Verdict::ExtremeByDset { measure } => assert_eq!((measure.lower, measure.upper), (1.0, 1.0)),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn half_one_plus_z_is_inconclusive() {
        let f = TrigPoly::from_terms([(0, c(0.5)), (1, c(0.5))]);
        let cert = dset_extreme_certificate(&f, &lacunary(), 16).unwrap();
        assert!(cert.verdict.is_inconclusive());
    }

    #[test]
    fn untagged_set_is_refused() {
        assert!(dset_extreme_certificate(&TrigPoly::z(1), &SpectralSet::integers(), 16).is_err());
    }

    #[test]
    fn sampled_arc_measure() {
        // |f| = 1 on [0, π), |f| = 1/2 on [π, 2π).
        let f = |t: f64| if t.rem_euclid(TAU) < std::f64::consts::PI { c(1.0) } else { c(0.5) };
        let cert = dset_extreme_certificate_sampled(f, (0, 64), &lacunary(), 10).unwrap();
        match cert.verdict {
            Verdict::ExtremeByDset { measure } => {
                assert!(measure.lower <= 0.5 && 0.5 <= measure.upper + 1e-15, "{measure:?}");
                assert!(measure.upper - measure.lower < 1e-8);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn parallelogram_examples() {
        let q = 10;
        let f = GridFunction::sample(&TrigPoly::from_terms([(0, c(0.5)), (1, c(0.5))]), q).unwrap();
        let g = GridFunction::sample(&TrigPoly::from_terms([(0, c(0.5)), (1, c(-0.5))]), q).unwrap();
        let r = parallelogram_bound(&f, &g, 1e-12).unwrap();
        assert!(r.hypothesis_excess <= 1e-15);
        assert!(r.max_violation <= 1e-12 && r.bound_holds);

        let z = GridFunction::sample(&TrigPoly::z(1), q).unwrap();
        let big = GridFunction::sample(&TrigPoly::constant(c(0.5)), q).unwrap();
        let r = parallelogram_bound(&z, &big, 1e-12).unwrap();
        assert!(!r.hypothesis_holds && r.bound_holds);
    }
}
