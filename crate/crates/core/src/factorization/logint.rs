use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::circle::{golden_max, norm_linf, GridFunction, TrigPoly, MAX_NORM_Q, MIN_NORM_Q};
use crate::error::{Error, Result};

/// Values of `1 - |f|` below this count as zero.
pub const ARC_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-8;
pub const MAX_ORDER: f64 = 20.0;

// Minima deeper than this are inspected for contact with the unit circle.
const CONTACT_FILTER: f64 = 1e-4;
// Below this `1 - |f|` is dominated by rounding and says nothing about the order.
const ROUNDOFF_FLOOR: f64 = 1e-13;
const FLAT_SUBSAMPLES: usize = 8;
const MAX_FLAT_EVALS: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishingPoint {
    pub theta: f64,
    pub order: f64,
    pub coefficient: f64,
}

/// An arc `[start, end]` (angles, `end` may exceed 2π) on which `|f| = 1` to tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Divergence {
    UnimodularArc,
    HighOrderContact { theta: f64, order: f64 },
    NonPowerLaw { theta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum LogIntegral {
    Finite { value: f64, error: f64 },
    Divergent { reason: Divergence },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogIntegralReport {
    pub integral: LogIntegral,
    pub vanishing_points: Vec<VanishingPoint>,
    pub unimodular_arcs: Vec<Arc>,
    pub q: u32,
}

impl LogIntegralReport {
    pub fn is_divergent(&self) -> bool {
        matches!(self.integral, LogIntegral::Divergent { .. })
    }

    pub fn value(&self) -> Option<f64> {
        match self.integral {
            LogIntegral::Finite { value, .. } => Some(value),
            LogIntegral::Divergent { .. } => None,
        }
    }
}

struct Pass {
    outcome: std::result::Result<f64, Divergence>,
    points: Vec<VanishingPoint>,
    arcs: Vec<Arc>,
}

enum Contact {
    None,
    Point(VanishingPoint),
    Divergent(Divergence),
}

fn deficit(f: &TrigPoly, theta: f64) -> f64 {
    (1.0 - f.eval(theta).norm()).max(0.0)
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// `log|2 sin(x/2)|`, whose mean over the circle is zero.
fn log_chord(x: f64) -> f64 {
    (2.0 * (x / 2.0).sin()).abs().ln()
}

/// Locate the minimum of `1 - |f|` near `theta` and fit `a|θ-θ0|^p` on radii 2^-6..2^-12.
fn contact(f: &TrigPoly, theta: f64, h: f64) -> Contact {
    let (t0, neg) = golden_max(|t| -deficit(f, t), theta - h, theta + h, 80);
    if -neg >= ARC_TOL {
        return Contact::None;
    }
    let t0 = t0.rem_euclid(TAU);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for e in 6..=12 {
        let r = (2.0f64).powi(-e);
        let (wl, wr) = (deficit(f, t0 - r), deficit(f, t0 + r));
        if wl >= ROUNDOFF_FLOOR && wr >= ROUNDOFF_FLOOR {
            xs.push(r.ln());
            ys.push(0.5 * (wl.ln() + wr.ln()));
        }
    }
    if xs.len() < 3 {
        return Contact::Divergent(Divergence::NonPowerLaw { theta: t0 });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let p = sxy / sxx;
    let b = my - p * mx;
    let misfit = xs.iter().zip(&ys).map(|(x, y)| (y - b - p * x).abs()).fold(0.0, f64::max);
    if !(p > 0.0) || misfit > 0.25 {
        return Contact::Divergent(Divergence::NonPowerLaw { theta: t0 });
    }
    if p >= MAX_ORDER {
        return Contact::Divergent(Divergence::HighOrderContact { theta: t0, order: p });
    }
    let (order, coefficient) = if (p - p.round()).abs() < 0.15 {
        // Integer order: Richardson on the two smallest usable radii (even correction term).
        let p = p.round();
        let k = xs.len();
        let a_r = (ys[k - 1] - p * xs[k - 1]).exp();
        let a_2r = (ys[k - 2] - p * xs[k - 2]).exp();
        let ratio = (xs[k - 2] - xs[k - 1]).exp();
        let c = ratio * ratio;
        (p, (c * a_r - a_2r) / (c - 1.0))
    } else {
        (p, b.exp())
    };
    Contact::Point(VanishingPoint {
        theta: t0,
        order,
        coefficient: if coefficient > 0.0 { coefficient } else { b.exp() },
    })
}

fn single_pass(f: &TrigPoly, q: u32) -> Result<Pass> {
    let g = GridFunction::sample(f, q)?;
    let n = g.len();
    let h = g.spacing();
    let w: Vec<f64> = g.samples().iter().map(|c| (1.0 - c.norm()).max(0.0)).collect();
    let mut arcs = Vec::new();

    let small: Vec<bool> = w.iter().map(|&v| v < ARC_TOL).collect();
    if small.iter().all(|&s| s) {
        arcs.push(Arc { start: 0.0, end: TAU });
        return Ok(Pass {
            outcome: Err(Divergence::UnimodularArc),
            points: Vec::new(),
            arcs,
        });
    }
    // Maximal cyclic runs of sub-tolerance nodes. A run is usually a point contact
    // seen by several nodes; it only counts as an arc if no power law fits it.
    let mut runs: Vec<(usize, Option<Arc>)> = Vec::new();
    let first_big = small.iter().position(|&s| !s).unwrap();
    let mut j = 0;
    while j < n {
        let idx = (first_big + j) % n;
        if !small[idx] {
            j += 1;
            continue;
        }
        let start = j;
        while j < n && small[(first_big + j) % n] {
            j += 1;
        }
        let len = j - start;
        let s = first_big + start;
        if len == 1 {
            runs.push((s % n, None));
            continue;
        }
        let step = h / FLAT_SUBSAMPLES as f64;
        let total = (len - 1) * FLAT_SUBSAMPLES;
        let stride = total.div_ceil(MAX_FLAT_EVALS).max(1);
        let flat = (0..=total)
            .step_by(stride)
            .all(|i| deficit(f, g.theta(s % n) + i as f64 * step) < ARC_TOL);
        let arc = flat.then(|| {
            let start = g.theta(s % n);
            Arc {
                start,
                end: start + (len - 1) as f64 * h,
            }
        });
        runs.push(((s + len / 2) % n, arc));
    }
    let mut candidates: Vec<(usize, Option<Arc>)> = runs;
    for j in 0..n {
        let (prev, next) = (w[(j + n - 1) % n], w[(j + 1) % n]);
        if w[j] < CONTACT_FILTER && w[j] < prev && w[j] <= next && !small[j] {
            candidates.push((j, None));
        }
    }
    candidates.sort_unstable_by_key(|c| c.0);
    candidates.dedup_by_key(|c| c.0);

    let mut points: Vec<VanishingPoint> = Vec::new();
    for &(j, arc) in &candidates {
        match contact(f, g.theta(j), h) {
            Contact::None => {}
            Contact::Divergent(Divergence::NonPowerLaw { .. }) if arc.is_some() => {
                arcs.extend(arc);
                return Ok(Pass {
                    outcome: Err(Divergence::UnimodularArc),
                    points,
                    arcs,
                });
            }
            Contact::Divergent(d) => {
                return Ok(Pass {
                    outcome: Err(d),
                    points,
                    arcs,
                })
            }
            Contact::Point(vp) => {
                if points.iter().all(|p| angle_gap(p.theta, vp.theta) > 2.0 * h) {
                    points.push(vp);
                }
            }
        }
    }

    let mut sum = 0.0;
    for j in 0..n {
        let t = g.theta(j);
        if w[j] < ARC_TOL {
            let (vi, near) = points
                .iter()
                .enumerate()
                .map(|(i, p)| (i, angle_gap(p.theta, t)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .ok_or_else(|| Error::Anomaly(format!("unexplained contact with the unit circle at θ = {t}")))?;
            // A contact a|θ-θ0|^p stays below ARC_TOL out to (ARC_TOL/a)^(1/p).
            let p = &points[vi];
            let reach = 2.0 * (ARC_TOL / p.coefficient).powf(1.0 / p.order);
            if near > (4.0 * h).max(reach) {
                return Err(Error::Anomaly(format!(
                    "unexplained contact with the unit circle at θ = {t}"
                )));
            }
            let others: f64 = points
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != vi)
                .map(|(_, p)| p.order * log_chord(t - p.theta))
                .sum();
            sum += points[vi].coefficient.ln() - others;
        } else {
            let sing: f64 = points.iter().map(|p| p.order * log_chord(t - p.theta)).sum();
            sum += w[j].ln() - sing;
        }
    }
    Ok(Pass {
        outcome: Ok(sum / n as f64),
        points,
        arcs,
    })
}

/// `∫ log(1 - |f|) dm`, or the reason it diverges.
pub fn log_integral(f: &TrigPoly, q: u32) -> Result<LogIntegralReport> {
    if !(MIN_NORM_Q..=MAX_NORM_Q).contains(&q) {
        return Err(Error::pre(format!(
            "grid exponent {q} outside {MIN_NORM_Q}..={MAX_NORM_Q}"
        )));
    }
    let sup = norm_linf(f, q)?;
    if sup.lower > 1.0 + NORM_TOL {
        return Err(Error::pre(format!("‖f‖∞ = {} exceeds 1", sup.lower)));
    }
    let coarse = single_pass(f, q)?;
    let fine = single_pass(f, q + 1)?;
    let integral = match (coarse.outcome, fine.outcome) {
        (Ok(a), Ok(b)) => LogIntegral::Finite {
            value: b,
            error: (a - b).abs(),
        },
        (_, Err(reason)) | (Err(reason), _) => LogIntegral::Divergent { reason },
    };
    Ok(LogIntegralReport {
        integral,
        vanishing_points: fine.points,
        unimodular_arcs: if fine.arcs.is_empty() { coarse.arcs } else { fine.arcs },
        q: q + 1,
    })
}
