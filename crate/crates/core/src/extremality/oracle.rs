//! Brute-force check for a perturbation `g` with `‖f ± g‖∞ <= 1`: a linear program over the
//! coefficients of `g` in a finite basis, with each disk constraint replaced by a polygon.

use std::f64::consts::{PI, TAU};

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{LINF_TOL, NULL_TOL, UNIT_NORM_TOL};
use crate::circle::{golden_max, norm_linf, GridFunction, TrigPoly, DEFAULT_Q};
use crate::error::{Error, Result};
use crate::linalg::right_singular_real;
use crate::spectra::SpectralSet;

/// Grid used to re-verify a candidate and to compute spectral residuals.
const VERIFY_Q: u32 = DEFAULT_Q;
/// Slack allowed in `‖f ± g‖∞ <= 1` at verification.
const VERIFY_TOL: f64 = 1e-9;
/// Local maxima of `|f|` above this level get an extra constraint point.
const PEAK_LEVEL: f64 = 0.99;
const MAX_BOX: f64 = 1e6;
const MAX_LP_ITER: u32 = 200;

/// How candidate perturbations are built from the basis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weight {
    /// `g = Σ c_i b_i`; every basis element must have spectrum in Λ.
    #[default]
    None,
    /// `g = (1 - |f|) Σ c_i b_i`, with `ĝ(k) = 0` imposed at each excluded `k` (Λ cofinite).
    Deficit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// The disk constraints are imposed at the `2^q` grid nodes.
    pub q: u32,
    /// Polygon sides.
    pub k: usize,
    /// Random objectives tried.
    pub reps: usize,
    pub seed: u64,
    pub weight: Weight,
    /// Smallest `‖g‖∞` accepted as a witness.
    pub tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            q: 8,
            k: 64,
            reps: 8,
            seed: 0,
            weight: Weight::None,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleWitness {
    pub weight: Weight,
    /// `Σ c_i b_i`, already scaled; `g = p` or `g = (1 - |f|) p`.
    pub p: TrigPoly,
    pub coefficients: Vec<Complex64>,
    /// Factor applied to the LP solution before it verified.
    pub scale: f64,
    pub g_sup: f64,
    pub sup_plus: f64,
    pub sup_minus: f64,
    /// Largest `|ĝ(k)|` over the excluded `k` (`Deficit` only).
    pub spectral_residual: f64,
    /// Index of the objective that produced the witness.
    pub repetition: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum OracleOutcome {
    NonExtreme(Box<OracleWitness>),
    Inconclusive {
        repetitions: usize,
        /// Largest `‖g‖∞` among LP solutions, before verification.
        max_g_sup: f64,
        reason: String,
    },
}

impl OracleOutcome {
    pub fn is_non_extreme(&self) -> bool {
        matches!(self, OracleOutcome::NonExtreme(_))
    }
}

/// Constraint nodes: the grid plus refined local maxima of `|f|` near 1.
fn nodes(f: &TrigPoly, q: u32) -> Result<Vec<f64>> {
    let fg = GridFunction::sample(f, q)?;
    let m = fg.modulus();
    let n = m.len();
    let h = fg.spacing();
    let mut out: Vec<f64> = (0..n).map(|j| fg.theta(j)).collect();
    for j in 0..n {
        let (prev, next) = (m[(j + n - 1) % n], m[(j + 1) % n]);
        if m[j] > PEAK_LEVEL && m[j] > prev && m[j] >= next {
            let t = fg.theta(j);
            let (peak, _) = golden_max(|s| f.eval(s).norm(), t - h, t + h, 60);
            out.push(peak.rem_euclid(TAU));
        }
    }
    Ok(out)
}

/// `(w b)^(k)` from the discrete coefficients of `w` at `VERIFY_Q`.
fn weighted_coeff(w_hat: &[Complex64], b: &TrigPoly, k: i64) -> Complex64 {
    let n = w_hat.len() as i64;
    b.terms().map(|(l, c)| c * w_hat[(k - l).rem_euclid(n) as usize]).sum()
}

struct Problem {
    /// Columns span the admissible coefficient vectors `x = [Re c_0, Im c_0, …]`.
    null: DMatrix<f64>,
    a: CscMatrix<f64>,
    b: Vec<f64>,
}

fn assemble(f: &TrigPoly, basis: &[TrigPoly], excluded: &[i64], w_hat: Option<&[Complex64]>, opts: &OracleOptions) -> Result<Problem> {
    let nb = basis.len();
    let nx = 2 * nb;

    // Spectral equalities, solved exactly by restricting to their null space.
    let null = match w_hat {
        Some(w_hat) if !excluded.is_empty() => {
            let mut e = DMatrix::<f64>::zeros(2 * excluded.len(), nx);
            for (r, &k) in excluded.iter().enumerate() {
                for (i, b) in basis.iter().enumerate() {
                    let a = weighted_coeff(w_hat, b, k);
                    e[(2 * r, 2 * i)] = a.re;
                    e[(2 * r, 2 * i + 1)] = -a.im;
                    e[(2 * r + 1, 2 * i)] = a.im;
                    e[(2 * r + 1, 2 * i + 1)] = a.re;
                }
            }
            let rs = right_singular_real(&e)?;
            let cols = rs.null_space(NULL_TOL);
            if cols.is_empty() {
                DMatrix::zeros(nx, 0)
            } else {
                DMatrix::from_columns(&cols)
            }
        }
        _ => DMatrix::identity(nx, nx),
    };
    let nz = null.ncols();

    let thetas = nodes(f, opts.q)?;
    let weighted = w_hat.is_some();
    let mut dense: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut col_max = vec![0.0f64; nb];
    let half_angle = PI / opts.k as f64;
    let edge = half_angle.cos();
    for &t in &thetas {
        let fv = f.eval(t);
        let r = fv.norm().min(1.0);
        let phi = if fv.norm() > 0.0 { fv.arg() } else { 0.0 };
        let w = if weighted { 1.0 - fv.norm() } else { 1.0 };
        let bv: Vec<Complex64> = basis.iter().map(|b| b.eval(t) * w).collect();
        for (i, v) in bv.iter().enumerate() {
            col_max[i] = col_max[i].max(v.norm());
        }
        if bv.iter().all(|v| v.norm() == 0.0) {
            continue;
        }
        // Polygon with a vertex on the ray through f(t).
        for m in 0..opts.k {
            let rot = TAU * (m as f64 + 0.5) / opts.k as f64;
            let u = Complex64::from_polar(1.0, phi + rot);
            let rhs = edge - r * rot.cos();
            let mut row = vec![0.0; nx];
            for (i, v) in bv.iter().enumerate() {
                let p = u.conj() * v;
                row[2 * i] = p.re;
                row[2 * i + 1] = -p.im;
            }
            dense.push((row.iter().map(|x| -x).collect(), rhs));
            dense.push((row, rhs));
        }
    }
    for i in 0..nb {
        let bound = if col_max[i] > 0.0 { (4.0 / col_max[i]).min(MAX_BOX) } else { MAX_BOX };
        for j in [2 * i, 2 * i + 1] {
            for s in [1.0, -1.0] {
                let mut row = vec![0.0; nx];
                row[j] = s;
                dense.push((row, bound));
            }
        }
    }

    let (mut ii, mut jj, mut vv) = (Vec::new(), Vec::new(), Vec::new());
    let mut b = Vec::with_capacity(dense.len());
    for (r, (row, rhs)) in dense.iter().enumerate() {
        let row = DVector::from_row_slice(row);
        let projected = null.tr_mul(&row);
        for c in 0..nz {
            if projected[c] != 0.0 {
                ii.push(r);
                jj.push(c);
                vv.push(projected[c]);
            }
        }
        b.push(*rhs);
    }
    let a = CscMatrix::new_from_triplets(dense.len(), nz, ii, jj, vv);
    Ok(Problem { null, a, b })
}

fn solve(problem: &Problem, objective: &DVector<f64>) -> Option<DVector<f64>> {
    let nz = problem.null.ncols();
    let p = CscMatrix::<f64>::zeros((nz, nz));
    let c: Vec<f64> = (-problem.null.tr_mul(objective)).iter().copied().collect();
    let cones = [SupportedConeT::NonnegativeConeT(problem.b.len())];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(MAX_LP_ITER)
        .build()
        .ok()?;
    let mut solver = DefaultSolver::new(&p, &c, &problem.a, &problem.b, &cones, settings);
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {
            Some(&problem.null * DVector::from_column_slice(&solver.solution.x))
        }
        _ => None,
    }
}

struct Checked {
    g_sup: f64,
    sup_plus: f64,
    sup_minus: f64,
    residual: f64,
}

fn check(f: &TrigPoly, p: &TrigPoly, weight: Weight, excluded: &[i64], w_hat: Option<&[Complex64]>) -> Result<Checked> {
    match weight {
        Weight::None => Ok(Checked {
            g_sup: norm_linf(p, VERIFY_Q)?.value,
            sup_plus: norm_linf(&(f + p), VERIFY_Q)?.upper,
            sup_minus: norm_linf(&(f - p), VERIFY_Q)?.upper,
            residual: 0.0,
        }),
        Weight::Deficit => {
            let fg = GridFunction::sample(f, VERIFY_Q)?;
            let pg = GridFunction::sample(p, VERIFY_Q)?;
            let (mut g_sup, mut sup_plus, mut sup_minus) = (0.0f64, 0.0f64, 0.0f64);
            for (a, b) in fg.samples().iter().zip(pg.samples()) {
                let g = b * (1.0 - a.norm());
                g_sup = g_sup.max(g.norm());
                sup_plus = sup_plus.max((a + g).norm());
                sup_minus = sup_minus.max((a - g).norm());
            }
            let w_hat = w_hat.expect("deficit weight has coefficients");
            let residual = excluded
                .iter()
                .map(|&k| weighted_coeff(w_hat, p, k).norm())
                .fold(0.0, f64::max);
            Ok(Checked {
                g_sup,
                sup_plus,
                sup_minus,
                residual,
            })
        }
    }
}

/// Search `span(basis)` for a perturbation `g ≠ 0` with `‖f ± g‖∞ <= 1`.
pub fn linf_feasibility_oracle(
    f: &TrigPoly,
    basis: &[TrigPoly],
    set: &SpectralSet,
    opts: &OracleOptions,
) -> Result<OracleOutcome> {
    if basis.is_empty() {
        return Err(Error::pre("the perturbation basis is empty"));
    }
    if opts.k < 3 || opts.reps == 0 {
        return Err(Error::pre(format!("need K >= 3 and at least one objective, got K = {}", opts.k)));
    }
    if f.is_zero() {
        return Err(Error::pre("f is identically zero"));
    }
    let check_f = f.spectrum_in(set);
    if !check_f.inside {
        return Err(Error::pre(format!("spectrum of f leaves the set at {:?}", check_f.offenders)));
    }
    let norm = norm_linf(f, VERIFY_Q)?;
    if !norm.within(1.0, UNIT_NORM_TOL) {
        return Err(Error::pre(format!("‖f‖∞ = {} is not 1", norm.value)));
    }
    let (excluded, w_hat) = match opts.weight {
        Weight::None => {
            for b in basis {
                let c = b.spectrum_in(set);
                if !c.inside {
                    return Err(Error::pre(format!("basis element leaves the set at {:?}", c.offenders)));
                }
            }
            (Vec::new(), None)
        }
        Weight::Deficit => {
            let excluded = set
                .finite_complement()
                .ok_or_else(|| Error::pre(format!("the deficit weight needs a cofinite set, got {set}")))?;
            let fg = GridFunction::sample(f, VERIFY_Q)?;
            let w = fg.map(|v| Complex64::new(1.0 - v.norm(), 0.0));
            (excluded, Some(w.dft()))
        }
    };

    let problem = assemble(f, basis, &excluded, w_hat.as_deref(), opts)?;
    if problem.null.ncols() == 0 {
        return Ok(OracleOutcome::Inconclusive {
            repetitions: 0,
            max_g_sup: 0.0,
            reason: "the spectral constraints leave no admissible coefficients".into(),
        });
    }
    let nx = 2 * basis.len();
    let mut max_g_sup = 0.0f64;
    for rep in 0..opts.reps {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(rep as u64);
        let objective = DVector::from_iterator(nx, (0..nx).map(|_| StandardNormal.sample(&mut rng)));
        let Some(x) = solve(&problem, &objective) else {
            continue;
        };
        let coeffs: Vec<Complex64> = (0..basis.len()).map(|i| Complex64::new(x[2 * i], x[2 * i + 1])).collect();
        let p0 = basis
            .iter()
            .zip(&coeffs)
            .fold(TrigPoly::zero(), |acc, (b, &c)| &acc + &b.scale(c));
        let mut scale = 1.0;
        let mut first = true;
        loop {
            let p = p0.scale_real(scale);
            let c = check(f, &p, opts.weight, &excluded, w_hat.as_deref())?;
            if first {
                max_g_sup = max_g_sup.max(c.g_sup);
                first = false;
            }
            if c.g_sup < opts.tol {
                break;
            }
            if c.sup_plus <= 1.0 + VERIFY_TOL && c.sup_minus <= 1.0 + VERIFY_TOL && c.residual <= LINF_TOL {
                return Ok(OracleOutcome::NonExtreme(Box::new(OracleWitness {
                    weight: opts.weight,
                    p,
                    coefficients: coeffs.iter().map(|c| c * scale).collect(),
                    scale,
                    g_sup: c.g_sup,
                    sup_plus: c.sup_plus,
                    sup_minus: c.sup_minus,
                    spectral_residual: c.residual,
                    repetition: rep,
                })));
            }
            scale /= 2.0;
        }
    }
    Ok(OracleOutcome::Inconclusive {
        repetitions: opts.reps,
        max_g_sup,
        reason: format!(
            "no verified perturbation with ‖g‖∞ >= {:e} over {} objectives",
            opts.tol, opts.reps
        ),
    })
}
