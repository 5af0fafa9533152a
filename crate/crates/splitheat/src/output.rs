//! CSV emission for error tables and timing records.
//!
//! Columns: `scheme,domain,datum,p,lambda,T,h_level,N_k,tau,E_u,rate,wall_ms`.
//! `E_u` carries five significant digits (`1.4669E-3`), `rate` two decimals
//! and is empty where no rate exists.

use std::io::Write;

use crate::harness::{ErrorTable, ExperimentPlan, TimingRecord};
use crate::Result;

pub const HEADER: [&str; 12] = ["scheme", "domain", "datum", "p", "lambda", "T", "h_level", "N_k", "tau", "E_u", "rate", "wall_ms"];

pub fn format_error(e: f64) -> String {
    format!("{e:.4E}")
}

pub fn format_rate(rate: Option<f64>) -> String {
    rate.map(|r| format!("{r:.2}")).unwrap_or_default()
}

#[allow(clippy::too_many_arguments)]
fn record(plan: &ExperimentPlan, scheme: &str, n: usize, tau: f64, e: f64, rate: Option<f64>, wall_ms: f64) -> [String; 12] {
    [
        scheme.to_string(),
        plan.domain.id().to_string(),
        plan.datum.id().to_string(),
        plan.p.to_string(),
        plan.lambda.value().to_string(),
        plan.final_time.to_string(),
        plan.mesh_level.to_string(),
        n.to_string(),
        format!("{tau:e}"),
        format_error(e),
        format_rate(rate),
        format!("{wall_ms:.1}"),
    ]
}

/// Write `tables` (header once) to `out`.
pub fn write_tables<W: Write>(out: W, tables: &[ErrorTable]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for t in tables {
        for row in &t.rows {
            w.write_record(record(&t.plan, t.plan.scheme.id(), row.steps, row.tau, row.error, row.rate, row.wall_ms))?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Write timing records in the table schema with an empty rate column.
pub fn write_timing<W: Write>(out: W, plan: &ExperimentPlan, records: &[TimingRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record(record(plan, r.scheme.id(), r.steps, r.tau, r.error, None, r.wall_ms))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
