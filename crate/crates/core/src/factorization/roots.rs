use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NEWTON_ITERS: usize = 60;
const SCHUR_ITERS: usize = 10_000;
const ABERTH_ITERS: usize = 500;
/// Eigenvalues of an `m`-fold root scatter by about `ε^{1/m}`; this groups them.
const CLUSTER_TOL: f64 = 1e-5;

/// A root with multiplicity and an error estimate for its location.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
    pub modulus: f64,
    pub uncertainty: f64,
    pub residual: f64,
}

/// Value and first `m` derivatives of `Σ c_k z^k` at `z`, by repeated Horner.
pub(crate) fn derivatives(coeffs: &[Complex64], z: Complex64, m: usize) -> Vec<Complex64> {
    let mut work = coeffs.to_vec();
    let mut out = Vec::with_capacity(m + 1);
    let mut fact = 1.0;
    for order in 0..=m {
        if work.is_empty() {
            out.push(Complex64::default());
            continue;
        }
        let n = work.len();
        let mut acc = work[n - 1];
        let mut quotient = vec![Complex64::default(); n - 1];
        for k in (0..n - 1).rev() {
            quotient[k] = acc;
            acc = acc * z + work[k];
        }
        if order > 0 {
            fact *= order as f64;
        }
        out.push(acc * fact);
        work = quotient;
    }
    out
}

/// Scale of the rounding error in evaluating `P(z)`.
fn eval_scale(coeffs: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

/// Newton's method on the `order`-th derivative; returns the point and the last step size.
fn newton(coeffs: &[Complex64], mut z: Complex64, order: usize) -> (Complex64, f64) {
    let mut last_step = f64::INFINITY;
    for _ in 0..NEWTON_ITERS {
        let d = derivatives(coeffs, z, order + 1);
        if d[order + 1].norm() == 0.0 {
            break;
        }
        let step = d[order] / d[order + 1];
        if !(step.norm() < last_step) && last_step.is_finite() {
            break;
        }
        z -= step;
        last_step = step.norm();
        if last_step <= 4.0 * f64::EPSILON * z.norm().max(1.0) {
            break;
        }
    }
    let d = derivatives(coeffs, z, order + 1);
    let err = if d[order + 1].norm() > 0.0 {
        (d[order] / d[order + 1]).norm()
    } else {
        f64::INFINITY
    };
    (z, err)
}

/// Roots of `Σ c_k z^k` (ascending, nonzero constant and leading coefficients).
fn companion_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    if d == 1 {
        return Ok(vec![-coeffs[0] / lead]);
    }
    let mut m = DMatrix::from_element(d, d, Complex64::default());
    for i in 1..d {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -coeffs[i] / lead;
    }
    // The unbounded Schur iteration can stall on companion matrices with symmetric
    // spectra (even polynomials); cap it and fall back to Aberth.
    if let Some(ev) = Schur::try_new(m, f64::EPSILON, SCHUR_ITERS).and_then(|s| s.eigenvalues()) {
        return Ok(ev.iter().copied().collect());
    }
    aberth_roots(coeffs)
}

/// Aberth–Ehrlich simultaneous iteration from points on a circle of the Cauchy-bound radius.
fn aberth_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d].norm();
    let radius = coeffs[..d].iter().map(|c| c.norm() / lead).fold(0.0, f64::max).max(1e-3);
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * (k as f64 + 0.25) / d as f64 + 0.4))
        .collect();
    for _ in 0..ABERTH_ITERS {
        let mut moved = 0.0f64;
        for i in 0..d {
            let dv = derivatives(coeffs, z[i], 1);
            if dv[0].norm() == 0.0 {
                continue;
            }
            let ratio = dv[0] / dv[1];
            let repulsion: Complex64 = (0..d).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / z[i].norm().max(1.0));
            }
        }
        if moved <= 1e-15 {
            return Ok(z);
        }
    }
    if z.iter().all(|r| r.is_finite()) {
        Ok(z)
    } else {
        Err(Error::Anomaly("companion eigenvalues and Aberth iteration both failed".into()))
    }
}

/// All roots of the polynomial with ascending coefficients `coeffs`, grouped
/// into clusters. Roots at 0 are split off exactly first.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Root>> {
    let zero = Complex64::default();
    let Some(top) = coeffs.iter().rposition(|c| *c != zero) else {
        return Err(Error::pre("the zero polynomial has no finite root set"));
    };
    let low = coeffs.iter().position(|c| *c != zero).unwrap();
    let mut out = Vec::new();
    if low > 0 {
        out.push(Root {
            value: zero,
            multiplicity: low,
            modulus: 0.0,
            uncertainty: 0.0,
            residual: 0.0,
        });
    }
    let p = &coeffs[low..=top];
    if p.len() == 1 {
        return Ok(out);
    }

    let polished: Vec<Complex64> = companion_roots(p)?
        .into_iter()
        .map(|r| newton(p, r, 0).0)
        .collect();

    let mut cluster_of: Vec<usize> = (0..polished.len()).collect();
    for i in 0..polished.len() {
        for j in 0..i {
            let tol = CLUSTER_TOL * polished[i].norm().max(1.0);
            if (polished[i] - polished[j]).norm() <= tol {
                let (a, b) = (cluster_of[i], cluster_of[j]);
                cluster_of.iter_mut().filter(|c| **c == a).for_each(|c| *c = b);
            }
        }
    }
    let mut ids: Vec<usize> = cluster_of.clone();
    ids.sort_unstable();
    ids.dedup();
    for id in ids {
        let members: Vec<Complex64> = (0..polished.len())
            .filter(|&i| cluster_of[i] == id)
            .map(|i| polished[i])
            .collect();
        let m = members.len();
        let mean = members.iter().sum::<Complex64>() / m as f64;
        // The (m-1)-th derivative has a simple root at an m-fold root.
        let (value, uncertainty) = newton(p, mean, m - 1);
        let residual = derivatives(p, value, 0)[0].norm();
        out.push(Root {
            value,
            multiplicity: m,
            modulus: value.norm(),
            uncertainty: uncertainty.max(4.0 * f64::EPSILON * value.norm()),
            residual,
        });
    }
    out.sort_by(|a, b| {
        a.modulus
            .partial_cmp(&b.modulus)
            .unwrap()
            .then(a.value.arg().partial_cmp(&b.value.arg()).unwrap())
    });
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for r in &out {
        let bound = (1e-10 * scale).max(1e-12 * eval_scale(coeffs, r.value));
        if r.residual > bound && r.multiplicity == 1 {
            return Err(Error::IllConditionedRoots {
                re: r.value.re,
                im: r.value.im,
                multiplicity: r.multiplicity,
                radius: r.uncertainty,
                residual: r.residual,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn derivative_table() {
        // 1 + 2z + 3z² at z = 2: 17, 14, 6.
        let d = derivatives(&[c(1.0), c(2.0), c(3.0)], c(2.0), 3);
        assert_eq!(d, vec![c(17.0), c(14.0), c(6.0), c(0.0)]);
    }

    #[test]
    fn zero_roots_are_exact() {
        let r = polynomial_roots(&[c(0.0), c(0.0), c(1.0)]).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 2);
        assert_eq!(r[0].value, c(0.0));
    }

    #[test]
    fn double_boundary_root_is_one_cluster() {
        // (1+z)²
        let r = polynomial_roots(&[c(1.0), c(2.0), c(1.0)]).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 2);
        assert!((r[0].value + 1.0).norm() < 1e-12);
        assert!(r[0].uncertainty < 1e-12);
    }

    #[test]
    fn simple_roots_are_polished() {
        // (z - 0.5)(z - 2)(z + i) = z³ + (i - 2.5)z² + (1 - 2.5i)z + i
        let i = Complex64::new(0.0, 1.0);
        let coeffs = [i, Complex64::new(1.0, -2.5), Complex64::new(-2.5, 1.0), c(1.0)];
        let r = polynomial_roots(&coeffs).unwrap();
        assert_eq!(r.len(), 3);
        for root in &r {
            assert!(root.residual <= 1e-12, "{root:?}");
        }
        assert!((r[0].value - 0.5).norm() < 1e-12);
        assert!((r[1].value + i).norm() < 1e-12);
        assert!((r[2].value - 2.0).norm() < 1e-12);
    }

    #[test]
    fn zero_polynomial_is_refused() {
        assert!(polynomial_roots(&[c(0.0), c(0.0)]).is_err());
    }

    #[test]
    fn even_polynomial_terminates() {
        // a + b z^2 + c z^4 once stalled the uncapped Schur iteration.
        let p = [
            Complex64::new(-0.45014570801661496, 0.06611959670682063),
            c(0.0),
            Complex64::new(-0.40134577712930514, -0.10081235255976939),
            c(0.0),
            Complex64::new(-0.7934869913734609, -0.4325926046948389),
        ];
        let roots = polynomial_roots(&p).unwrap();
        assert_eq!(roots.iter().map(|r| r.multiplicity).sum::<usize>(), 4);
        for r in &roots {
            assert!(roots.iter().any(|s| (s.value + r.value).norm() < 1e-12));
            assert!(r.residual < 1e-14);
        }
    }

    #[test]
    fn aberth_matches_known_roots() {
        // (z - 1)(z + 2)(z - i) = z^3 + (1 - i) z^2 + (-2 - i) z + 2i
        let i = Complex64::i();
        let p = [2.0 * i, c(-2.0) - i, c(1.0) - i, c(1.0)];
        let mut got = aberth_roots(&p).unwrap();
        for want in [c(1.0), c(-2.0), i] {
            let k = (0..got.len()).min_by(|&a, &b| (got[a] - want).norm().total_cmp(&(got[b] - want).norm())).unwrap();
            assert!((got[k] - want).norm() < 1e-12);
            got.remove(k);
        }
    }
}
