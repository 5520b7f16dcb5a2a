use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub wall_ms: f64,
}

/// What every subcommand writes: enough to re-verify the result without rerunning it.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub library_version: &'static str,
    pub command: String,
    pub input: Value,
    pub verdict: String,
    pub residual: Option<f64>,
    pub detail: String,
    pub result: Value,
    pub timings: Timings,
}

impl Report {
    pub fn new(command: &str, input: Value, outcome: crate::commands::Outcome, wall_ms: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            library_version: lacunary_core::VERSION,
            command: command.into(),
            input,
            verdict: outcome.verdict,
            residual: outcome.residual,
            detail: outcome.detail,
            result: outcome.body,
            timings: Timings { wall_ms },
        }
    }

    /// One header row and one data row.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["command", "verdict", "residual", "detail", "wall_ms"])?;
        w.write_record([
            self.command.clone(),
            self.verdict.clone(),
            self.residual.map(|r| format!("{r:e}")).unwrap_or_default(),
            self.detail.clone(),
            self.timings.wall_ms.to_string(),
        ])?;
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }
}
