use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ExtremalityCertificate, Exponent, Verdict, Witness, LINF_TOL, MEAS_TOL, NULL_TOL, UNIT_NORM_TOL};
use crate::circle::{norm_linf, GridFunction, SupNorm, TrigPoly, MAX_NORM_Q};
use crate::error::{Error, Result};
use crate::linalg::{phase_normalize, right_singular_complex};
use crate::spectra::SpectralSet;

/// Extra grid levels used to check `‖f ± gp‖∞` beyond the construction grid.
const CHECK_LEVELS: u32 = 2;
/// Finer grids tried when the construction grid sees at most one deficient node.
const REFINE_LEVELS: u32 = 4;

/// `f = ½(f + gp) + ½(f - gp)` with `g = 1 - |f|` and `p` analytic of degree `N`.
///
/// `g` is a grid object, recomputable from `f` at `q`, so it is not stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinfWitness {
    /// Normalized so that the upper enclosure of `‖p‖∞` is 1.
    pub p: TrigPoly,
    pub q: u32,
    pub excluded: Vec<i64>,
    /// `|(gp)^(k_ν)|` from the transform at `q`.
    pub residuals: Vec<f64>,
    /// The same coefficients from the transform at `q + 1`.
    pub residuals_fine: Vec<f64>,
    pub singular_values: Vec<f64>,
    /// Fraction of the nodes at `q` with `1 - |f| > MEAS_TOL`.
    pub deficit_fraction: f64,
    /// Grid maxima of `|f + gp|` and `|f - gp|` at `q + 2`.
    pub sup_plus: f64,
    pub sup_minus: f64,
    /// `|f ± gp| <= |f| + |g||p| <= max(1, 2‖f‖∞ - 1)` pointwise.
    pub analytic_bound: f64,
    /// Grid maximum of `|gp|` at `q + 2`.
    pub gp_max: f64,
    pub norm_f: SupNorm,
}

fn deficit(f: &TrigPoly, q: u32) -> Result<GridFunction> {
    let fg = GridFunction::sample(f, q)?;
    Ok(fg.map(|v| Complex64::new(1.0 - v.norm(), 0.0)))
}

fn count_deficient(g: &GridFunction) -> usize {
    g.samples().iter().filter(|v| v.re > MEAS_TOL).count()
}

/// `(gp)^(k)` for each `k`, using the discrete coefficients of `g`.
fn product_coeffs(g_hat: &[Complex64], p: &TrigPoly, ks: &[i64]) -> Vec<Complex64> {
    let n = g_hat.len() as i64;
    ks.iter()
        .map(|&k| p.terms().map(|(j, b)| b * g_hat[(k - j).rem_euclid(n) as usize]).sum())
        .collect()
}

struct Gate {
    excluded: Vec<i64>,
    norm: SupNorm,
}

fn gate(f: &TrigPoly, set: &SpectralSet, q: u32) -> Result<Gate> {
    if f.is_zero() {
        return Err(Error::pre("f is identically zero"));
    }
    let check = f.spectrum_in(set);
    if !check.inside {
        return Err(Error::pre(format!("spectrum of f leaves the set at {:?}", check.offenders)));
    }
    let excluded = set
        .finite_complement()
        .ok_or_else(|| Error::pre(format!("{set} is not cofinite in Z")))?;
    let norm = norm_linf(f, q)?;
    if !norm.within(1.0, UNIT_NORM_TOL) {
        return Err(Error::pre(format!("‖f‖∞ = {} is not 1", norm.value)));
    }
    Ok(Gate { excluded, norm })
}

fn grid_sups(f: &TrigPoly, p: &TrigPoly, q: u32) -> Result<(f64, f64, f64)> {
    let fg = GridFunction::sample(f, q)?;
    let pg = GridFunction::sample(p, q)?;
    let (mut plus, mut minus, mut gp) = (0.0f64, 0.0f64, 0.0f64);
    for (a, b) in fg.samples().iter().zip(pg.samples()) {
        let d = b * (1.0 - a.norm());
        plus = plus.max((a + d).norm());
        minus = minus.max((a - d).norm());
        gp = gp.max(d.norm());
    }
    Ok((plus, minus, gp))
}

/// Null vector of `T: β ↦ ((g Σ β_j z^j)^(k_ν))_ν`, `j = 0..N`, on the grid `2^q`.
pub fn cofinite_linf_witness(f: &TrigPoly, set: &SpectralSet, q: u32) -> Result<LinfWitness> {
    let Gate { excluded, norm } = gate(f, set, q)?;
    if q + CHECK_LEVELS > crate::circle::MAX_GRID_EXP {
        return Err(Error::pre(format!("grid exponent {q} too large")));
    }
    let g = deficit(f, q)?;
    let deficient = count_deficient(&g);
    // frac_tol = 2^-q: at least two deficient nodes.
    if deficient < 2 {
        return Err(Error::pre(format!(
            "|f| = 1 on the grid 2^{q} up to {deficient} node(s); f is extreme by the unimodularity \
             criterion, use classify_linf_cofinite"
        )));
    }
    let g_hat = g.dft();
    let n_ex = excluded.len();
    let n = g_hat.len() as i64;
    let mut t = DMatrix::<Complex64>::zeros(n_ex, n_ex + 1);
    for (nu, &k) in excluded.iter().enumerate() {
        for j in 0..=n_ex as i64 {
            t[(nu, j as usize)] = g_hat[(k - j).rem_euclid(n) as usize];
        }
    }
    let rs = right_singular_complex(&t)?;
    if rs.smallest() > NULL_TOL * rs.largest() {
        return Err(Error::Anomaly(format!(
            "T has no numerical kernel; singular values {:?}",
            rs.values
        )));
    }
    let mut beta = rs.vectors.last().cloned().expect("T has at least one column");
    phase_normalize(&mut beta);
    let p = TrigPoly::from_terms(beta.iter().enumerate().map(|(j, &b)| (j as i64, b)));
    let p_norm = norm_linf(&p, q.min(MAX_NORM_Q))?;
    if p_norm.upper == 0.0 {
        return Err(Error::Anomaly("null vector gives p = 0".into()));
    }
    let p = p.scale_real(1.0 / p_norm.upper);

    let residuals: Vec<f64> = product_coeffs(&g_hat, &p, &excluded).iter().map(|c| c.norm()).collect();
    let fine_hat = deficit(f, q + 1)?.dft();
    let residuals_fine: Vec<f64> = product_coeffs(&fine_hat, &p, &excluded).iter().map(|c| c.norm()).collect();
    let worst = residuals.iter().chain(&residuals_fine).copied().fold(0.0, f64::max);
    if worst > LINF_TOL {
        return Err(Error::Anomaly(format!("spectral residual {worst:e} exceeds {LINF_TOL:e}")));
    }

    let (sup_plus, sup_minus, gp_max) = grid_sups(f, &p, q + CHECK_LEVELS)?;
    let analytic_bound = (2.0 * norm.upper - 1.0).max(1.0);
    if analytic_bound > 1.0 + LINF_TOL || sup_plus > 1.0 + LINF_TOL || sup_minus > 1.0 + LINF_TOL {
        return Err(Error::Anomaly(format!(
            "‖f ± gp‖∞ check failed: grid {sup_plus}, {sup_minus}; bound {analytic_bound}"
        )));
    }
    if gp_max <= MEAS_TOL * MEAS_TOL {
        return Err(Error::Anomaly("gp vanishes on the grid".into()));
    }
    Ok(LinfWitness {
        p,
        q,
        excluded,
        residuals,
        residuals_fine,
        singular_values: rs.values,
        deficit_fraction: deficient as f64 / g.len() as f64,
        sup_plus,
        sup_minus,
        analytic_bound,
        gp_max,
        norm_f: norm,
    })
}

/// Extreme iff `|f| = 1` a.e.; otherwise non-extreme with an explicit witness.
pub fn classify_linf_cofinite(f: &TrigPoly, set: &SpectralSet, q: u32) -> Result<ExtremalityCertificate> {
    let Gate { excluded, .. } = gate(f, set, q)?;
    let criterion = format!("ball(L∞_Λ), Z minus Λ = {excluded:?}: extreme iff |f| = 1 a.e.");
    let top = (q + REFINE_LEVELS).min(crate::circle::MAX_GRID_EXP - CHECK_LEVELS);
    let mut max_deficit = 0.0f64;
    let mut seen = false;
    for qq in q..=top.max(q) {
        let g = deficit(f, qq)?;
        max_deficit = g.samples().iter().map(|v| v.re).fold(max_deficit, f64::max);
        let count = count_deficient(&g);
        if count >= 2 {
            let w = cofinite_linf_witness(f, set, qq)?;
            return Ok(ExtremalityCertificate::non_extreme(
                Exponent::Infinity,
                set,
                Witness::Linf(w),
                criterion,
            ));
        }
        seen |= count > 0;
        // A clean pair of grids settles it; an isolated offender needs finer grids.
        if !seen && qq > q {
            break;
        }
    }
    let verdict = if seen {
        Verdict::Inconclusive {
            degree: None,
            rank_profile: None,
            reason: format!("a single deficient node persists up to grid 2^{top}"),
        }
    } else {
        Verdict::ExtremeByUnimodular {
            max_deficit,
            note: format!("no node with 1 - |f| > {MEAS_TOL:e} on grids 2^{q} and 2^{}", q + 1),
        }
    };
    Ok(ExtremalityCertificate::new(Exponent::Infinity, set, verdict, criterion))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinfVerification {
    pub p_inside: bool,
    pub p_norm: f64,
    pub max_residual: f64,
    pub sup_plus: f64,
    pub sup_minus: f64,
    pub gp_max: f64,
    pub ok: bool,
}

/// Recompute residuals and sup norms of a serialized L∞ witness from `f` alone.
pub fn verify_linf_witness(f: &TrigPoly, set: &SpectralSet, w: &LinfWitness) -> Result<LinfVerification> {
    let excluded = set
        .finite_complement()
        .ok_or_else(|| Error::pre(format!("{set} is not cofinite in Z")))?;
    let p_inside = w.p.is_analytic() && w.p.max_freq().unwrap_or(0) <= excluded.len() as i64;
    let p_norm = norm_linf(&w.p, w.q.min(MAX_NORM_Q))?.upper;
    let mut max_residual = 0.0f64;
    for qq in [w.q, w.q + 1] {
        let g_hat = deficit(f, qq)?.dft();
        for c in product_coeffs(&g_hat, &w.p, &excluded) {
            max_residual = max_residual.max(c.norm());
        }
    }
    let (sup_plus, sup_minus, gp_max) = grid_sups(f, &w.p, w.q + CHECK_LEVELS + 1)?;
    let ok = p_inside
        && p_norm <= 1.0 + 1e-12
        && max_residual <= LINF_TOL
        && sup_plus <= 1.0 + LINF_TOL
        && sup_minus <= 1.0 + LINF_TOL
        && gp_max > 0.0;
    Ok(LinfVerification {
        p_inside,
        p_norm,
        max_residual,
        sup_plus,
        sup_minus,
        gp_max,
        ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn half_z_z2() -> TrigPoly {
        TrigPoly::from_terms([(1, c(0.5)), (2, c(0.5))])
    }

    #[test]
    fn one_gap_matches_closed_form() {
        let set = SpectralSet::integers_without([0]);
        let w = cofinite_linf_witness(&half_z_z2(), &set, 16).unwrap();
        // g = 1 - |cos(θ/2)|: ĝ(0) = 1 - 2/π, ĝ(-1) = -2/(3π); β₀ĝ(0) + β₁ĝ(-1) = 0.
        let (g0, gm1) = (1.0 - 2.0 / PI, -2.0 / (3.0 * PI));
        let ratio = w.p.coeff(1) / w.p.coeff(0);
        assert!((ratio - c(-g0 / gm1)).norm() < 1e-8, "{ratio}");
        assert!(w.residuals[0] <= 1e-10);
        let v = verify_linf_witness(&half_z_z2(), &set, &w).unwrap();
        assert!(v.ok, "{v:?}");
    }

    #[test]
    fn unimodular_is_refused() {
        let set = SpectralSet::integers_without([0]);
        let err = cofinite_linf_witness(&TrigPoly::z(1), &set, 16).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn two_gaps() {
        let f = TrigPoly::from_terms([(1, c(0.5)), (3, c(0.5))]);
        let set = SpectralSet::integers_without([0, 2]);
        let w = cofinite_linf_witness(&f, &set, 16).unwrap();
        assert!(w.sup_plus <= 1.0 + 1e-8 && w.sup_minus <= 1.0 + 1e-8);
        assert_eq!(w.residuals.len(), 2);
    }

    #[test]
    fn classification() {
        let set = SpectralSet::integers_without([0]);
        let cert = classify_linf_cofinite(&TrigPoly::z(5), &set, 16).unwrap();
        assert!(matches!(cert.verdict, Verdict::ExtremeByUnimodular { .. }));
        let cert = classify_linf_cofinite(&half_z_z2(), &set, 16).unwrap();
        assert!(cert.verdict.is_non_extreme());
        // cos θ = (z + z̄)/2
        let real = TrigPoly::from_terms([(1, c(0.5)), (-1, c(0.5))]);
        let cert = classify_linf_cofinite(&real, &set, 16).unwrap();
        assert!(cert.verdict.is_non_extreme());
    }

    #[test]
    fn norm_gate() {
        let set = SpectralSet::integers_without([0]);
        assert!(classify_linf_cofinite(&TrigPoly::monomial(1, c(0.9)), &set, 16).is_err());
        assert!(classify_linf_cofinite(&TrigPoly::z(1), &SpectralSet::nonnegative(), 16).is_err());
    }
}
