//! Kernels of Toeplitz operators with trigonometric polynomial symbols, truncated at a
//! degree cap. `f` is in the kernel of `T_φ` iff `(φf)^(k) = 0` for every `k >= 0`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circle::TrigPoly;
use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, phase_normalize, right_singular_complex};

/// Relative singular value floor for the constraint matrix.
pub const KERNEL_NULL_TOL: f64 = 1e-10;
/// Largest `|(φf)^(k)|`, `k >= 0`, accepted by [`kernel_membership`].
pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelBasis {
    pub symbol: TrigPoly,
    #[serde(rename = "cap")]
    pub degree_cap: i64,
    pub dimension: usize,
    /// Orthonormal in the coefficient inner product.
    pub basis: Vec<TrigPoly>,
    /// Largest `|(φb)^(k)|` over basis elements `b` and `k >= 0`.
    pub residual: f64,
    pub singular_values: Vec<f64>,
    pub note: String,
}

/// Largest `|(φf)^(k)|` over `k >= 0`, from the exact product.
fn analytic_residual(phi: &TrigPoly, f: &TrigPoly) -> f64 {
    phi.raw_product(f)
        .into_iter()
        .filter(|(k, _)| *k >= 0)
        .map(|(_, (c, _))| c.norm())
        .fold(0.0, f64::max)
}

/// The kernel of `T_φ` among analytic polynomials of degree at most `cap`.
pub fn kernel_basis(phi: &TrigPoly, cap: i64) -> Result<KernelBasis> {
    if phi.is_zero() {
        return Err(Error::pre("the zero symbol has every function in its kernel"));
    }
    if cap < 0 {
        return Err(Error::pre(format!("degree cap {cap} < 0")));
    }
    let cols = cap as usize + 1;
    let top = phi.max_freq().unwrap() + cap;
    let rows: Vec<i64> = (0..=top.max(-1)).collect();
    let mut m = DMatrix::<Complex64>::zeros(rows.len(), cols);
    for (r, &k) in rows.iter().enumerate() {
        for j in 0..cols {
            m[(r, j)] = phi.coeff(k - j as i64);
        }
    }
    let rs = right_singular_complex(&m)?;
    let null = orthonormalize(&rs.null_space(KERNEL_NULL_TOL), KERNEL_NULL_TOL);
    let basis: Vec<TrigPoly> = null
        .into_iter()
        .map(|mut v| {
            phase_normalize(&mut v);
            TrigPoly::from_terms(v.iter().enumerate().map(|(j, &c)| (j as i64, c)))
        })
        .collect();
    let residual = basis.iter().map(|b| analytic_residual(phi, b)).fold(0.0, f64::max);
    Ok(KernelBasis {
        symbol: phi.clone(),
        degree_cap: cap,
        dimension: basis.len(),
        basis,
        residual,
        singular_values: rs.values,
        note: format!("kernel among polynomials of degree <= {cap} only; the full kernel may be larger"),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    pub residual: f64,
}

/// Whether the analytic polynomial `f` satisfies `(φf)^(k) = 0` for all `k >= 0`.
pub fn kernel_membership(phi: &TrigPoly, f: &TrigPoly) -> Result<Membership> {
    if !f.is_analytic() {
        return Err(Error::pre(format!(
            "f has negative frequency {}",
            f.min_freq().unwrap_or_default()
        )));
    }
    let residual = analytic_residual(phi, f);
    Ok(Membership {
        member: !f.is_zero() && residual <= MEMBERSHIP_TOL,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn zbar_cubed_cap_five() {
        let k = kernel_basis(&TrigPoly::z(-3), 5).unwrap();
        assert_eq!(k.dimension, 3);
        for b in &k.basis {
            assert!(b.max_freq().unwrap() <= 2 || b.terms().all(|(j, c)| j <= 2 || c.norm() < 1e-14));
            assert!(kernel_membership(&TrigPoly::z(-3), b).unwrap().member);
        }
        assert!(k.residual <= 1e-12);
    }

    #[test]
    fn analytic_symbols_have_trivial_kernel() {
        for phi in [TrigPoly::z(1), TrigPoly::from_terms([(0, c(1.0)), (1, c(2.0))])] {
            for cap in 0..6 {
                assert_eq!(kernel_basis(&phi, cap).unwrap().dimension, 0);
            }
        }
    }

    #[test]
    fn cap_below_every_constraint() {
        // φ = z̄^10 with cap 3: no k >= 0 is reachable, so everything is in the kernel.
        assert_eq!(kernel_basis(&TrigPoly::z(-10), 3).unwrap().dimension, 4);
    }

    #[test]
    fn membership_examples() {
        let phi = TrigPoly::z(-2);
        assert!(kernel_membership(&phi, &TrigPoly::one()).unwrap().member);
        let m = kernel_membership(&phi, &TrigPoly::z(2)).unwrap();
        assert!(!m.member && m.residual == 1.0);
        assert!(!kernel_membership(&TrigPoly::one(), &TrigPoly::z(3)).unwrap().member);
        assert!(kernel_membership(&phi, &TrigPoly::z(-1)).is_err());
    }

    #[test]
    fn zero_symbol_is_refused() {
        assert!(kernel_basis(&TrigPoly::zero(), 3).is_err());
    }
}
