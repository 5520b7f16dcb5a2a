use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::grid::GridFunction;
use super::trig::TrigPoly;
use crate::error::{Error, Result};

pub const MIN_NORM_Q: u32 = 8;
pub const MAX_NORM_Q: u32 = 20;
pub const DEFAULT_Q: u32 = 16;
pub const QUADRATURE_TOL: f64 = 1e-10;

const MIN_WINDOW_SAMPLES: usize = 64;
const MAX_WINDOW_SAMPLES: usize = 1 << 14;
// Window spacing target: σh'/2 below this keeps 1 - cos under 1e-10.
const WINDOW_PHASE: f64 = 1e-5;
const MAX_CANDIDATES: usize = 64;

/// A quadrature value with the difference between the last two refinements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureValue {
    pub value: f64,
    pub error: f64,
    pub q: u32,
}

/// Sup norm with a rigorous-up-to-roundoff enclosure `lower <= ‖f‖∞ <= upper`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupNorm {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub argmax: f64,
}

impl SupNorm {
    /// True if the enclosure meets `[target - tol, target + tol]`.
    pub fn within(&self, target: f64, tol: f64) -> bool {
        self.upper >= target - tol && self.lower <= target + tol
    }
}

fn check_q(q: u32) -> Result<()> {
    if !(MIN_NORM_Q..=MAX_NORM_Q).contains(&q) {
        return Err(Error::pre(format!(
            "grid exponent {q} outside {MIN_NORM_Q}..={MAX_NORM_Q}"
        )));
    }
    Ok(())
}

/// Grid exponent at which the trapezoidal rule starts to see all of `f`'s oscillation.
pub(crate) fn resolving_q(f: &TrigPoly) -> u32 {
    super::grid::required_grid_exp(2 * f.modulus_degree().max(1))
}

/// `‖f‖₁` by the trapezoidal rule, certified by agreement of consecutive grids.
pub fn norm_l1(f: &TrigPoly, q: u32) -> Result<QuadratureValue> {
    mean_abs_certified(f, q, |v| v)
}

/// `∫ |f| w(|f|)`-style quadrature with the same certification loop as [`norm_l1`].
pub(crate) fn mean_abs_certified(f: &TrigPoly, q: u32, weight: impl Fn(f64) -> f64) -> Result<QuadratureValue> {
    check_q(q)?;
    if f.is_zero() {
        return Ok(QuadratureValue { value: 0.0, error: 0.0, q });
    }
    let start = q.max(resolving_q(f)).min(MAX_NORM_Q);
    let coarse_of = |g: &GridFunction| -> f64 {
        g.samples().iter().step_by(2).map(|c| weight(c.norm())).sum::<f64>() * 2.0 / g.len() as f64
    };
    let fine_of = |g: &GridFunction| -> f64 { g.samples().iter().map(|c| weight(c.norm())).sum::<f64>() / g.len() as f64 };
    let mut last = (0.0, 0.0);
    for qq in start..MAX_NORM_Q {
        let g = GridFunction::sample(f, qq + 1)?;
        let (coarse, fine) = (coarse_of(&g), fine_of(&g));
        let err = (fine - coarse).abs();
        if err <= QUADRATURE_TOL * fine.abs().max(1.0) {
            return Ok(QuadratureValue {
                value: fine,
                error: err,
                q: qq + 1,
            });
        }
        last = (coarse, fine);
    }
    Err(Error::QuadratureNotConverged {
        q: MAX_NORM_Q,
        coarse: last.0,
        fine: last.1,
    })
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `‖f‖∞` from a grid maximum, refined by golden section, with an upper
/// bound from Bernstein's inequality: if `|f|` peaks at `θ*` with value `M`
/// then `|f(θ)| >= M cos(σ|θ-θ*|)`, where `σ` is half the spectral width.
pub fn norm_linf(f: &TrigPoly, q: u32) -> Result<SupNorm> {
    check_q(q)?;
    if f.is_zero() {
        return Ok(SupNorm {
            value: 0.0,
            lower: 0.0,
            upper: 0.0,
            argmax: 0.0,
        });
    }
    let sigma = (f.max_freq().unwrap() - f.min_freq().unwrap()) as f64 / 2.0;
    let roundoff = 8.0 * f64::EPSILON * f.terms().map(|(_, c)| c.norm()).sum::<f64>();
    let abs_at = |t: f64| f.eval(t).norm();

    // Need σh/2 <= π/4 so the cosine factor stays well away from zero.
    let mut qq = q;
    while sigma * TAU / (1u64 << qq) as f64 > std::f64::consts::FRAC_PI_2 {
        qq += 1;
    }
    let g = GridFunction::sample(f, qq)?;
    let h = g.spacing();
    let moduli = g.modulus();
    let grid_max = moduli.iter().copied().fold(0.0, f64::max);
    let threshold = grid_max * (sigma * h / 2.0).cos();
    let candidates: Vec<usize> = (0..moduli.len()).filter(|&j| moduli[j] >= threshold).collect();

    let (best_theta, best_val, upper) = if candidates.len() <= MAX_CANDIDATES {
        let per = ((sigma * h / (2.0 * WINDOW_PHASE)).ceil() as usize).clamp(MIN_WINDOW_SAMPLES, MAX_WINDOW_SAMPLES);
        let hw = h / per as f64;
        let mut best = (0.0, 0.0);
        for &j in &candidates {
            let t0 = g.theta(j) - h / 2.0;
            for i in 0..=per {
                let t = t0 + i as f64 * hw;
                let v = abs_at(t);
                if v > best.1 {
                    best = (t, v);
                }
            }
        }
        let upper = best.1 / (sigma * hw / 2.0).cos();
        let (t, v) = golden_max(abs_at, best.0 - hw, best.0 + hw, 60);
        if v > best.1 {
            (t, v, upper)
        } else {
            (best.0, best.1, upper)
        }
    } else {
        let qf = (qq + 4).min(super::grid::MAX_GRID_EXP);
        let fine = GridFunction::sample(f, qf)?;
        let hf = fine.spacing();
        let (j, m) = fine
            .modulus()
            .into_iter()
            .enumerate()
            .fold((0, 0.0), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
        let upper = m / (sigma * hf / 2.0).cos();
        let t0 = fine.theta(j);
        let (t, v) = golden_max(abs_at, t0 - hf, t0 + hf, 60);
        if v > m {
            (t, v, upper)
        } else {
            (t0, m, upper)
        }
    };
    Ok(SupNorm {
        value: best_val,
        lower: best_val,
        upper: upper.max(best_val) + roundoff,
        argmax: best_theta.rem_euclid(TAU),
    })
}
