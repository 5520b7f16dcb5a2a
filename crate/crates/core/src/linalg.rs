//! Null spaces of small dense matrices through the singular value decomposition.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

const SVD_MAX_ITER: usize = 100_000;

/// Right singular vectors with their singular values, sorted by decreasing
/// singular value. Wide matrices are padded with zero rows, so there is one
/// singular value per column.
#[derive(Clone, Debug)]
pub struct RightSingular<T> {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<T>>,
}

impl<T> RightSingular<T> {
    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn smallest(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Numerical rank at singular values above `rel_tol * largest`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.largest();
        self.values.iter().filter(|&&s| s > cut).count()
    }

    /// Orthonormal basis of the numerical null space.
    pub fn null_space(&self, rel_tol: f64) -> Vec<DVector<T>>
    where
        T: Clone,
    {
        let r = self.rank(rel_tol);
        self.vectors[r..].to_vec()
    }
}

fn pad_rows<T: nalgebra::ComplexField>(a: &DMatrix<T>) -> DMatrix<T> {
    if a.nrows() >= a.ncols() {
        return a.clone();
    }
    let mut p = DMatrix::from_element(a.ncols(), a.ncols(), T::zero());
    p.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    p
}

pub fn right_singular_real(a: &DMatrix<f64>) -> Result<RightSingular<f64>> {
    if a.ncols() == 0 {
        return Ok(RightSingular {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let svd = SVD::try_new(pad_rows(a), false, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Anomaly("singular value decomposition did not converge".into()))?;
    let v_t = svd.v_t.expect("requested right singular vectors");
    Ok(RightSingular {
        values: svd.singular_values.iter().copied().collect(),
        vectors: (0..v_t.nrows()).map(|i| v_t.row(i).transpose()).collect(),
    })
}

pub fn right_singular_complex(a: &DMatrix<Complex64>) -> Result<RightSingular<Complex64>> {
    if a.ncols() == 0 {
        return Ok(RightSingular {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let svd = SVD::try_new(pad_rows(a), false, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::Anomaly("singular value decomposition did not converge".into()))?;
    let v_t = svd.v_t.expect("requested right singular vectors");
    // Rows of V^H are conjugated right singular vectors.
    Ok(RightSingular {
        values: svd.singular_values.iter().copied().collect(),
        vectors: (0..v_t.nrows()).map(|i| v_t.row(i).adjoint()).collect(),
    })
}

/// Flip the sign so the largest-magnitude entry is positive.
pub fn sign_normalize(v: &mut DVector<f64>) {
    let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if pivot < 0.0 {
        v.neg_mut();
    }
}

/// Rotate the phase so the largest-magnitude entry is real and positive.
pub fn phase_normalize(v: &mut DVector<Complex64>) {
    let pivot = v
        .iter()
        .copied()
        .fold(Complex64::default(), |m, x| if x.norm() > m.norm() { x } else { m });
    if pivot.norm() > 0.0 {
        let rot = pivot.conj() / pivot.norm();
        v.iter_mut().for_each(|x| *x *= rot);
    }
}

/// Modified Gram–Schmidt on complex vectors; drops vectors that fall below `tol` after projection.
pub fn orthonormalize(vectors: &[DVector<Complex64>], tol: f64) -> Vec<DVector<Complex64>> {
    let mut out: Vec<DVector<Complex64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &out {
                let proj = u.dotc(&w);
                w -= u * proj;
            }
        }
        let n = w.norm();
        if n > tol {
            out.push(w / Complex64::new(n, 0.0));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_real_matrix_has_null_vector() {
        // [0.5 0 0] annihilates e2 and e3.
        let a = DMatrix::from_row_slice(1, 3, &[0.5, 0.0, 0.0]);
        let rs = right_singular_real(&a).unwrap();
        assert_eq!(rs.values.len(), 3);
        assert_eq!(rs.rank(1e-12), 1);
        let ns = rs.null_space(1e-12);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((a.clone() * v).norm() < 1e-14);
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_null_vector() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let a = DMatrix::from_row_slice(1, 2, &[one, i]);
        let rs = right_singular_complex(&a).unwrap();
        let mut v = rs.vectors[1].clone();
        phase_normalize(&mut v);
        assert!((a * &v).norm() < 1e-14);
        assert!(rs.smallest() < 1e-14);
        let big = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let pivot = v.iter().find(|x| (x.norm() - big).abs() < 1e-15).unwrap();
        assert!(pivot.im.abs() < 1e-15 && pivot.re > 0.0);
    }

    #[test]
    fn sign_normalization_is_deterministic() {
        let mut v = DVector::from_vec(vec![0.1, -0.9, 0.3]);
        sign_normalize(&mut v);
        assert_eq!(v[1], 0.9);
    }

    #[test]
    fn gram_schmidt_drops_dependent_vectors() {
        let e = |k: usize| {
            let mut v = DVector::from_element(3, Complex64::default());
            v[k] = Complex64::new(1.0, 0.0);
            v
        };
        let vs = vec![e(0), e(0) * Complex64::new(2.0, 0.0), e(1) + e(0)];
        let o = orthonormalize(&vs, 1e-12);
        assert_eq!(o.len(), 2);
        assert!(o[0].dotc(&o[1]).norm() < 1e-15);
    }
}
