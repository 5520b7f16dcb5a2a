//! One function per subcommand. Each returns an [`Outcome`]: a short verdict for tables and
//! the full JSON body for reports.

use lacunary_core::circle::TrigPoly;
use lacunary_core::extremality::{
    classify_linf_cofinite, cofinite_l1_witness, cofinite_linf_witness, dset_extreme_certificate,
    general_l1_witness_search, linf_feasibility_oracle, periodic_witness, verify_l1_witness, verify_linf_witness,
    ExtremalityCertificate, Exponent, L1Witness, OracleOptions, OracleOutcome, SearchOutcome, Verdict, Witness,
};
use lacunary_core::factorization::{classify_h1_extreme, classify_hinf_extreme, log_integral, LogIntegral};
use lacunary_core::spectra::{SpectralSet, DEFAULT_BAND};
use lacunary_core::toeplitz::{kernel_basis, kernel_membership};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliResult;

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub verdict: String,
    /// The headline residual of the operation, when it has one.
    pub residual: Option<f64>,
    pub detail: String,
    pub body: Value,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn set_info(set: &SpectralSet, band: i64) -> CliResult<Outcome> {
    let tags: Vec<String> = set.classify_families().iter().map(|t| t.to_string()).collect();
    let period = set.period_of(DEFAULT_BAND as u64)?;
    let body = json!({
        "set": set.canonical(),
        "tags": tags,
        "period": period,
        "finite_complement": set.finite_complement(),
        "gaps_in_nonnegative": set.finite_gaps_in_nonnegative(),
        "members": set.members_in_band(-band, band),
        "band": band,
    });
    Ok(Outcome {
        verdict: "info".into(),
        residual: None,
        detail: tags.join(" "),
        body,
    })
}

fn l1_outcome(f: &TrigPoly, set: &SpectralSet, w: L1Witness, criterion: &str, q: u32) -> CliResult<Outcome> {
    let verification = verify_l1_witness(f, set, &w, q)?;
    let residual = w.residual;
    let cert = ExtremalityCertificate::non_extreme(Exponent::One, set, Witness::L1(w), criterion);
    Ok(Outcome {
        verdict: cert.verdict.label().into(),
        residual: Some(residual),
        detail: criterion.into(),
        body: json!({ "certificate": cert, "verification": verification }),
    })
}

/// Periodic sets first, then cofinite sets, then the truncated search.
pub fn witness_l1(f: &TrigPoly, set: &SpectralSet, degree: i64, q: u32) -> CliResult<Outcome> {
    if set.period_of(DEFAULT_BAND as u64)?.is_some() {
        let w = periodic_witness(f, set, q)?;
        return l1_outcome(f, set, w, "periodic set: h = Re(z^n)", q);
    }
    if set.finite_complement().is_some() {
        let w = cofinite_l1_witness(f, set, q)?;
        return l1_outcome(f, set, w, "cofinite set: null vector of S", q);
    }
    search(f, set, degree, q)
}

pub fn search(f: &TrigPoly, set: &SpectralSet, degree: i64, q: u32) -> CliResult<Outcome> {
    match general_l1_witness_search(f, set, degree, true, q)? {
        SearchOutcome::Witness(w) => l1_outcome(f, set, *w, &format!("witness search at degree {degree}"), q),
        SearchOutcome::Inconclusive { degree, profile } => {
            let cert = ExtremalityCertificate::new(
                Exponent::One,
                set,
                Verdict::Inconclusive {
                    degree: Some(degree),
                    rank_profile: Some(profile),
                    reason: format!("no real h of degree <= {degree} keeps fh in the space"),
                },
                format!("witness search at degree {degree}"),
            );
            Ok(Outcome {
                verdict: cert.verdict.label().into(),
                residual: None,
                detail: format!("degree {degree}"),
                body: json!({ "certificate": cert }),
            })
        }
    }
}

fn linf_cert_outcome(f: &TrigPoly, set: &SpectralSet, cert: ExtremalityCertificate) -> CliResult<Outcome> {
    let (residual, verification) = match &cert.verdict {
        Verdict::NonExtreme { witness } => match witness.as_ref() {
            Witness::Linf(w) => {
                let v = verify_linf_witness(f, set, w)?;
                (Some(v.max_residual), Some(v))
            }
            _ => (None, None),
        },
        _ => (None, None),
    };
    Ok(Outcome {
        verdict: cert.verdict.label().into(),
        residual,
        detail: cert.criterion.clone(),
        body: json!({ "certificate": cert, "verification": verification }),
    })
}

pub fn witness_linf(f: &TrigPoly, set: &SpectralSet, q: u32) -> CliResult<Outcome> {
    let w = cofinite_linf_witness(f, set, q)?;
    let cert = ExtremalityCertificate::non_extreme(
        Exponent::Infinity,
        set,
        Witness::Linf(w),
        "cofinite set: f = ½(f + gp) + ½(f - gp)",
    );
    linf_cert_outcome(f, set, cert)
}

pub fn classify_linf(f: &TrigPoly, set: &SpectralSet, q: u32) -> CliResult<Outcome> {
    let cert = classify_linf_cofinite(f, set, q)?;
    linf_cert_outcome(f, set, cert)
}

pub fn classify_h1(f: &TrigPoly, q: u32) -> CliResult<Outcome> {
    let c = classify_h1_extreme(f, q)?;
    let label = to_value(&c.verdict).as_str().unwrap_or_default().to_string();
    Ok(Outcome {
        verdict: label,
        residual: Some(c.norm.error),
        detail: format!(
            "roots inside {}, on the circle {}, outside {}",
            c.factorization.blaschke_degree,
            c.factorization.roots_on_boundary.iter().map(|r| r.multiplicity).sum::<usize>(),
            c.factorization.roots_outside.iter().map(|r| r.multiplicity).sum::<usize>()
        ),
        body: to_value(&c),
    })
}

pub fn classify_hinf(f: &TrigPoly, set: &SpectralSet, q: u32) -> CliResult<Outcome> {
    let c = classify_hinf_extreme(f, set, q)?;
    let label = to_value(&c.verdict).as_str().unwrap_or_default().to_string();
    let residual = match c.log_integral.as_ref().map(|r| &r.integral) {
        Some(LogIntegral::Finite { error, .. }) => Some(*error),
        _ => None,
    };
    Ok(Outcome {
        verdict: label,
        residual,
        detail: c.scope.clone(),
        body: to_value(&c),
    })
}

pub fn dset_check(f: &TrigPoly, set: &SpectralSet, q: u32) -> CliResult<Outcome> {
    let cert = dset_extreme_certificate(f, set, q)?;
    Ok(Outcome {
        verdict: cert.verdict.label().into(),
        residual: None,
        detail: cert.criterion.clone(),
        body: json!({ "certificate": cert }),
    })
}

pub fn log_integral_report(f: &TrigPoly, q: u32) -> CliResult<Outcome> {
    let r = log_integral(f, q)?;
    let (verdict, residual, detail) = match &r.integral {
        LogIntegral::Finite { value, error } => ("finite", Some(*error), format!("{value}")),
        LogIntegral::Divergent { reason } => ("divergent", None, to_value(reason)["kind"].as_str().unwrap_or_default().to_string()),
    };
    Ok(Outcome {
        verdict: verdict.into(),
        residual,
        detail,
        body: to_value(&r),
    })
}

pub fn toeplitz_kernel(phi: &TrigPoly, cap: i64) -> CliResult<Outcome> {
    let k = kernel_basis(phi, cap)?;
    let membership: Vec<_> = k
        .basis
        .iter()
        .map(|b| kernel_membership(phi, b))
        .collect::<Result<_, _>>()?;
    Ok(Outcome {
        verdict: format!("dimension {}", k.dimension),
        residual: Some(k.residual),
        detail: k.note.clone(),
        body: json!({ "kernel": k, "membership": membership }),
    })
}

pub fn oracle(f: &TrigPoly, basis: &[TrigPoly], set: &SpectralSet, opts: &OracleOptions) -> CliResult<Outcome> {
    let out = linf_feasibility_oracle(f, basis, set, opts)?;
    let (verdict, residual) = match &out {
        OracleOutcome::NonExtreme(w) => ("non-extreme", Some(w.spectral_residual)),
        OracleOutcome::Inconclusive { .. } => ("inconclusive", None),
    };
    Ok(Outcome {
        verdict: verdict.into(),
        residual,
        detail: format!("{} basis element(s), K = {}, {:?} weight", basis.len(), opts.k, opts.weight),
        body: json!({ "options": opts, "outcome": out }),
    })
}

/// `{1, z, …, z^N}` with `N = |Z \ Λ|`, the perturbations of the cofinite L∞ construction.
pub fn deficit_basis(set: &SpectralSet) -> Option<Vec<TrigPoly>> {
    set.finite_complement()
        .map(|ex| (0..=ex.len() as i64).map(TrigPoly::z).collect())
}
