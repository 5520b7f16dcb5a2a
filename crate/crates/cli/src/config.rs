//! Experiment configuration for `scan`.

use std::path::PathBuf;

use lacunary_core::circle::{parse_trig_poly, TrigPoly, MAX_NORM_Q, MIN_NORM_Q};
use lacunary_core::extremality::{Exponent, Weight};
use lacunary_core::spectra::SpectralSet;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    /// L¹: the witness constructions; L∞: the unimodularity classification.
    Witness,
    Search,
    ClassifyH1,
    ClassifyHinf,
    ClassifyLinf,
    DsetCheck,
    LogIntegral,
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub p: Exponent,
    pub set: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSource {
    Explicit {
        expr: String,
    },
    /// `sparsity` frequencies of the set in `[-band, band]`, Gaussian coefficients,
    /// rescaled to unit norm in the space.
    Random {
        sparsity: usize,
        band: i64,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchParams {
    pub degree: i64,
    pub q: u32,
    /// Polygon sides for the oracle.
    pub k: usize,
    /// Number of trials.
    pub reps: usize,
    /// Random objectives per oracle call.
    pub objectives: usize,
    pub weight: Weight,
    /// Oracle basis as expressions; defaults to `{1, z, …, z^N}` for `Z` minus `N` points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            degree: 8,
            q: 16,
            k: 64,
            reps: 1,
            objectives: 8,
            weight: Weight::Deficit,
            basis: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            path: None,
            format: Format::Csv,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceConfig,
    pub task: Task,
    pub function: FunctionSource,
    #[serde(default)]
    pub search: SearchParams,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A config with its set, expressions and basis parsed.
#[derive(Clone, Debug)]
pub struct Validated {
    pub config: ExperimentConfig,
    pub set: SpectralSet,
    pub explicit: Option<TrigPoly>,
    /// Candidate frequencies for random functions.
    pub frequencies: Vec<i64>,
    pub basis: Option<Vec<TrigPoly>>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The canonical form: every default spelled out, fixed key order.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Every check that can fail before a trial runs.
    pub fn validate(self) -> CliResult<Validated> {
        let bad = |m: String| Err(CliError::Input(m));
        let set: SpectralSet = self
            .space
            .set
            .parse()
            .map_err(|e| CliError::Input(format!("space.set {:?}: {e}", self.space.set)))?;
        let s = &self.search;
        if s.reps == 0 {
            return bad("search.reps must be at least 1".into());
        }
        if !(MIN_NORM_Q..=MAX_NORM_Q).contains(&s.q) {
            return bad(format!("search.q = {} outside {MIN_NORM_Q}..={MAX_NORM_Q}", s.q));
        }
        if s.degree < 1 {
            return bad(format!("search.degree = {} < 1", s.degree));
        }
        if s.k < 3 || s.objectives == 0 {
            return bad("search.k must be at least 3 and search.objectives at least 1".into());
        }
        let needs = match self.task {
            Task::Witness | Task::Search => None,
            Task::ClassifyH1 => Some(Exponent::One),
            _ => Some(Exponent::Infinity),
        };
        if let Some(p) = needs {
            if p != self.space.p {
                return bad(format!("task {:?} works in p = {p:?}, not {:?}", self.task, self.space.p));
            }
        }
        if self.task == Task::Search && self.space.p != Exponent::One {
            return bad("task search is an L¹ construction".into());
        }
        let (explicit, frequencies) = match &self.function {
            FunctionSource::Explicit { expr } => {
                let f = parse_trig_poly(expr).map_err(|e| CliError::Input(format!("function.expr {expr:?}: {e}")))?;
                (Some(f), Vec::new())
            }
            FunctionSource::Random { sparsity, band, .. } => {
                if *band < 0 {
                    return bad(format!("function.band = {band} < 0"));
                }
                let freqs = set.members_in_band(-band, *band);
                if *sparsity == 0 || *sparsity > freqs.len() {
                    return bad(format!(
                        "function.sparsity = {sparsity} but the set has {} member(s) in [-{band}, {band}]",
                        freqs.len()
                    ));
                }
                (None, freqs)
            }
        };
        let basis = match (&s.basis, self.task) {
            (Some(exprs), _) => Some(
                exprs
                    .iter()
                    .map(|e| parse_trig_poly(e).map_err(|err| CliError::Input(format!("search.basis {e:?}: {err}"))))
                    .collect::<CliResult<Vec<_>>>()?,
            ),
            (None, Task::Oracle) => Some(crate::commands::deficit_basis(&set).ok_or_else(|| {
                CliError::Input("task oracle needs search.basis unless the set is Z minus finitely many points".into())
            })?),
            (None, _) => None,
        };
        Ok(Validated {
            config: self,
            set,
            explicit,
            frequencies,
            basis,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"space":{"p":"1","set":"Z \\ {0}"},"task":"witness",
        "function":{"source":"random","sparsity":3,"band":6,"seed":1}}"#;

    #[test]
    fn canonical_round_trip() {
        let c = ExperimentConfig::from_json(MINIMAL).unwrap();
        let text = c.to_canonical_json();
        let again = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(c, again);
        assert_eq!(text, again.to_canonical_json());
    }

    #[test]
    fn validation_errors() {
        let mut c = ExperimentConfig::from_json(MINIMAL).unwrap();
        c.search.reps = 0;
        assert!(c.clone().validate().is_err());
        c.search.reps = 3;
        assert!(c.clone().validate().is_ok());
        c.task = Task::ClassifyLinf;
        assert!(c.clone().validate().is_err());
        assert!(ExperimentConfig::from_json(r#"{"space":{"p":"2","set":"Z"}}"#).is_err());
        let bad_set = MINIMAL.replace("Z \\\\ {0}", "Z \\\\ {0");
        let c = ExperimentConfig::from_json(&bad_set).unwrap();
        assert!(matches!(c.validate(), Err(CliError::Input(_))));
    }
}
