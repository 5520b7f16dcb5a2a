//! Witnesses of non-extremality and certificates of extremality for the unit
//! balls of L¹_Λ and L∞_Λ.

mod dset;
mod l1;
mod linf;
mod oracle;

use serde::{Deserialize, Serialize};

pub use dset::{
    dset_extreme_certificate, dset_extreme_certificate_sampled, parallelogram_bound, MeasureEnclosure,
    ParallelogramCheck,
};
pub use l1::{
    cofinite_l1_witness, general_l1_witness_search, periodic_witness, verify_l1_witness, L1Method, L1Verification,
    L1Witness, RankProfile, SearchOutcome,
};
pub use linf::{classify_linf_cofinite, cofinite_linf_witness, verify_linf_witness, LinfVerification, LinfWitness};
pub use oracle::{linf_feasibility_oracle, OracleOptions, OracleOutcome, OracleWitness, Weight};

use crate::factorization::{FactorizationReport, LogIntegralReport};
use crate::spectra::SpectralSet;

/// Gate on `| ‖f‖ - 1 |` for every witness constructor.
pub const UNIT_NORM_TOL: f64 = 1e-8;
/// Largest admissible off-Λ coefficient of `fh` for an L¹ witness.
pub const L1_RESIDUAL_TOL: f64 = 1e-9;
/// Largest admissible off-Λ coefficient of `gp` and excess of `‖f ± gp‖∞` over 1.
pub const LINF_TOL: f64 = 1e-8;
/// Points with `1 - |f|` above this count as non-unimodular.
pub const MEAS_TOL: f64 = 1e-9;
/// Relative floor below which a singular value counts as zero.
pub const NULL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exponent {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "inf")]
    Infinity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Space {
    pub p: Exponent,
    pub set: SpectralSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    L1(L1Witness),
    Linf(LinfWitness),
    Oracle(OracleWitness),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    NonExtreme {
        witness: Box<Witness>,
    },
    ExtremeByDset {
        measure: MeasureEnclosure,
    },
    ExtremeByOuter {
        factorization: FactorizationReport,
    },
    ExtremeByLogIntegral {
        log_integral: LogIntegralReport,
    },
    ExtremeByUnimodular {
        /// Largest `1 - |f|` seen on the grids checked.
        max_deficit: f64,
        note: String,
    },
    Inconclusive {
        degree: Option<i64>,
        rank_profile: Option<RankProfile>,
        reason: String,
    },
}

impl Verdict {
    pub fn is_extreme(&self) -> bool {
        matches!(
            self,
            Verdict::ExtremeByDset { .. }
                | Verdict::ExtremeByOuter { .. }
                | Verdict::ExtremeByLogIntegral { .. }
                | Verdict::ExtremeByUnimodular { .. }
        )
    }

    pub fn is_non_extreme(&self) -> bool {
        matches!(self, Verdict::NonExtreme { .. })
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Inconclusive { .. })
    }

    /// Short label used in tables.
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::NonExtreme { .. } => "non-extreme",
            Verdict::ExtremeByDset { .. } => "extreme-by-dset",
            Verdict::ExtremeByOuter { .. } => "extreme-by-outer",
            Verdict::ExtremeByLogIntegral { .. } => "extreme-by-log-integral",
            Verdict::ExtremeByUnimodular { .. } => "extreme-by-unimodular",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// A verdict together with the space it refers to and the scope of the criterion used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalityCertificate {
    pub space: Space,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub criterion: String,
}

impl ExtremalityCertificate {
    pub fn new(p: Exponent, set: &SpectralSet, verdict: Verdict, criterion: impl Into<String>) -> Self {
        Self {
            space: Space { p, set: set.clone() },
            verdict,
            criterion: criterion.into(),
        }
    }

    pub fn non_extreme(p: Exponent, set: &SpectralSet, witness: Witness, criterion: impl Into<String>) -> Self {
        Self::new(
            p,
            set,
            Verdict::NonExtreme {
                witness: Box::new(witness),
            },
            criterion,
        )
    }
}
