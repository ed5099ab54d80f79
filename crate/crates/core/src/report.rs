//! Sandwich reports: bounds against empirical quantization error, as CSV or JSON.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quantizer_engine::DistortionEstimate;
use crate::regularity::SIGMAS;

/// Fixed CSV header of a report.
pub const CSV_COLUMNS: [&str; 10] = [
    "space_id", "n", "L_n", "U_n", "v_hat", "v_ci", "scaled_L", "scaled_U", "scaled_v", "pass",
];

/// One row of a sandwich report; missing bounds are empty cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub space_id: String,
    pub n: u64,
    #[serde(rename = "L_n")]
    pub l_n: Option<f64>,
    #[serde(rename = "U_n")]
    pub u_n: Option<f64>,
    pub v_hat: f64,
    pub v_ci: f64,
    #[serde(rename = "scaled_L")]
    pub scaled_l: Option<f64>,
    #[serde(rename = "scaled_U")]
    pub scaled_u: Option<f64>,
    pub scaled_v: f64,
    pub pass: bool,
    /// Why a bound is missing; JSON only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A list of rows for one space; scaled columns are multiplied by n^exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub space_id: String,
    pub exponent: f64,
    /// The lower check compares L_n with the estimate, which itself
    /// over-estimates V_n, so it is weaker than L_n ≤ V_n.
    pub lower_check: &'static str,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).map_err(csv_err)?;
        for r in &self.rows {
            w.serialize((
                &r.space_id, r.n, r.l_n, r.u_n, r.v_hat, r.v_ci, r.scaled_l, r.scaled_u, r.scaled_v, r.pass,
            ))
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Degenerate(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Degenerate(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Degenerate(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Degenerate(format!("csv: {e}"))
}

/// Builds rows for each n from bound callbacks and an estimator.
///
/// A failing bound callback leaves its cell empty and its side of the check
/// vacuous; the reason is kept in `note`. Estimator failures abort.
pub fn sandwich_report<L, U, E>(
    space_id: &str,
    ns: &[u64],
    exponent: f64,
    lower: L,
    upper: U,
    mut estimate: E,
) -> Result<BoundReport>
where
    L: Fn(f64) -> Result<f64>,
    U: Fn(f64) -> Result<f64>,
    E: FnMut(u64) -> Result<DistortionEstimate>,
{
    if ns.is_empty() || ns.contains(&0) {
        return Err(domain("sandwich_report", "n list must be nonempty and positive"));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let nf = n as f64;
        let scale = nf.powf(exponent);
        let mut notes = Vec::new();
        let mut take = |side: &str, r: Result<f64>| match r {
            Ok(v) => Some(v),
            Err(e) => {
                notes.push(format!("{side}: {e}"));
                None
            }
        };
        let l_n = take("L_n", lower(nf));
        let u_n = take("U_n", upper(nf));
        let est = estimate(n)?;
        let slack = SIGMAS * est.ci_halfwidth;
        let pass = l_n.is_none_or(|l| l <= est.mean + slack) && u_n.is_none_or(|u| est.mean - slack <= u);
        rows.push(BoundRow {
            space_id: space_id.to_string(),
            n,
            l_n,
            u_n,
            v_hat: est.mean,
            v_ci: est.ci_halfwidth,
            scaled_l: l_n.map(|v| v * scale),
            scaled_u: u_n.map(|v| v * scale),
            scaled_v: est.mean * scale,
            pass,
            note: (!notes.is_empty()).then(|| notes.join("; ")),
        });
    }
    Ok(BoundReport {
        space_id: space_id.to_string(),
        exponent,
        lower_check: "L_n <= v_hat + 3 ci",
        rows,
    })
}
