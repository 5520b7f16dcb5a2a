//! Seeded trial runner.

use std::io::Write;
use std::time::Instant;

use lacunary_core::circle::TrigPoly;
use lacunary_core::extremality::{Exponent, OracleOptions};
use lacunary_core::sampling::{normalize_l1, normalize_linf, random_poly};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::commands::{self, Outcome};
use crate::config::{FunctionSource, Task, Validated};
use crate::error::CliResult;

#[derive(Clone, Debug, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub set: String,
    pub task: String,
    /// The trial's function as a JSON coefficient list.
    pub f: String,
    pub verdict: String,
    pub residual: Option<f64>,
    pub detail: String,
    /// Last column so payload comparisons can drop it.
    pub wall_ms: f64,
}

/// The random function of trial `trial`: Gaussian coefficients on `sparsity` frequencies
/// drawn without replacement, scaled to unit norm in `L^p`.
pub fn random_function(
    frequencies: &[i64],
    sparsity: usize,
    seed: u64,
    trial: usize,
    p: Exponent,
    q: u32,
) -> CliResult<TrigPoly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let f = random_poly(&mut rng, frequencies, sparsity)?;
    Ok(match p {
        Exponent::One => normalize_l1(&f, q)?,
        Exponent::Infinity => normalize_linf(&f, q)?,
    })
}

fn run_task(v: &Validated, f: &TrigPoly) -> CliResult<Outcome> {
    let c = &v.config;
    let s = &c.search;
    match (c.task, c.space.p) {
        (Task::Witness, Exponent::One) => commands::witness_l1(f, &v.set, s.degree, s.q),
        (Task::Witness, Exponent::Infinity) => commands::witness_linf(f, &v.set, s.q),
        (Task::Search, _) => commands::search(f, &v.set, s.degree, s.q),
        (Task::ClassifyH1, _) => commands::classify_h1(f, s.q),
        (Task::ClassifyHinf, _) => commands::classify_hinf(f, &v.set, s.q),
        (Task::ClassifyLinf, _) => commands::classify_linf(f, &v.set, s.q),
        (Task::DsetCheck, _) => commands::dset_check(f, &v.set, s.q),
        (Task::LogIntegral, _) => commands::log_integral_report(f, s.q),
        (Task::Oracle, _) => {
            let opts = OracleOptions {
                k: s.k,
                reps: s.objectives,
                seed: function_seed(v),
                weight: s.weight,
                ..OracleOptions::default()
            };
            commands::oracle(f, v.basis.as_deref().unwrap_or_default(), &v.set, &opts)
        }
    }
}

fn function_seed(v: &Validated) -> u64 {
    match v.config.function {
        FunctionSource::Random { seed, .. } => seed,
        FunctionSource::Explicit { .. } => 0,
    }
}

fn task_name(task: Task) -> String {
    serde_json::to_value(task).unwrap().as_str().unwrap().to_string()
}

fn run_trial(v: &Validated, trial: usize) -> TrialRow {
    let start = Instant::now();
    let c = &v.config;
    let f = match (&c.function, &v.explicit) {
        (_, Some(f)) => Ok(f.clone()),
        (FunctionSource::Random { sparsity, seed, .. }, None) => {
            random_function(&v.frequencies, *sparsity, *seed, trial, c.space.p, c.search.q)
        }
        _ => unreachable!("validated configs carry an explicit function or a frequency pool"),
    };
    let (f_text, outcome) = match f {
        Ok(f) => (serde_json::to_string(&f).unwrap(), run_task(v, &f)),
        Err(e) => (String::new(), Err(e)),
    };
    let (verdict, residual, detail) = match outcome {
        Ok(o) => (o.verdict, o.residual, o.detail),
        Err(e) if e.exit_code() == 2 => ("anomaly".to_string(), None, e.to_string()),
        Err(e) => ("refused".to_string(), None, e.to_string()),
    };
    TrialRow {
        trial,
        seed: function_seed(v),
        set: v.set.canonical(),
        task: task_name(c.task),
        f: f_text,
        verdict,
        residual,
        detail,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Runs every trial concurrently; rows come back in trial order.
pub fn run(v: &Validated) -> Vec<TrialRow> {
    (0..v.config.search.reps)
        .into_par_iter()
        .map(|t| run_trial(v, t))
        .collect()
}

pub fn write_csv<W: Write>(rows: &[TrialRow], out: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Verdict counts and residual quantiles.
pub fn summary(v: &Validated, rows: &[TrialRow]) -> Value {
    let mut counts = std::collections::BTreeMap::<&str, usize>::new();
    for r in rows {
        *counts.entry(r.verdict.as_str()).or_default() += 1;
    }
    let mut res: Vec<f64> = rows.iter().filter_map(|r| r.residual).collect();
    res.sort_by(f64::total_cmp);
    let quantiles = if res.is_empty() {
        Value::Null
    } else {
        json!({
            "min": res[0],
            "median": quantile(&res, 0.5),
            "p90": quantile(&res, 0.9),
            "max": res[res.len() - 1],
        })
    };
    json!({
        "trials": rows.len(),
        "counts": counts,
        "residual_quantiles": quantiles,
        "config": v.config,
    })
}
