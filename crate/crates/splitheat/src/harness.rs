//! Convergence tables and timing comparisons.
//!
//! A table row at step count `N` reports the sequential error
//! `E_u = ‖u_N(T) - u_{N/2}(T)‖_{L²}` on a fixed mesh, and the rate
//! `log₂(E_{k-1}/E_k)` against the previous row.

use std::time::Instant;

use log::{info, warn};
use splitheat_core::fem::interpolate;
use splitheat_core::flows::{run, RunRecord};
use splitheat_core::verify::halving_rates;
use splitheat_core::{CgOptions, Domain, FeFunction, FemOperators, InitialDatum, Lambda, PicardConfig, ProblemSpec, Scheme};

use crate::{Error, Result};

/// Everything needed to produce one error table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub domain: Domain,
    pub datum: InitialDatum,
    pub scheme: Scheme,
    pub p: f64,
    pub lambda: Lambda,
    pub final_time: f64,
    pub mesh_level: u32,
    /// Step counts `N_k`; `τ_k = T/N_k`. Each entry doubles the previous one.
    pub steps: Vec<usize>,
    pub solver: CgOptions,
    pub picard: PicardConfig,
}

impl ExperimentPlan {
    /// Square, `φ₀`, `p = 5/2`, `λ = 1`, `T = 0.1`, Lie, `N_k = 128..2048` at level 6.
    pub fn standard() -> Self {
        ExperimentPlan {
            domain: Domain::UnitSquare,
            datum: InitialDatum::Phi0,
            scheme: Scheme::Lie,
            p: 2.5,
            lambda: Lambda::Plus,
            final_time: 0.1,
            mesh_level: 6,
            steps: vec![128, 256, 512, 1024, 2048],
            solver: CgOptions::default(),
            picard: PicardConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.datum.domain() != self.domain {
            return Err(Error::param(format!("datum {} is not defined on the {} domain", self.datum.id(), self.domain.id())));
        }
        if self.mesh_level == 0 || self.mesh_level > self.domain.max_level() {
            return Err(Error::param(format!(
                "mesh level {} outside 1..={} for {}",
                self.mesh_level,
                self.domain.max_level(),
                self.domain.id()
            )));
        }
        let first = *self.steps.first().ok_or_else(|| Error::param("the step ladder is empty"))?;
        if first < 2 || first % 2 != 0 {
            return Err(Error::param("the first step count must be even so that N/2 exists"));
        }
        if let Some(w) = self.steps.windows(2).find(|w| w[1] != 2 * w[0]) {
            return Err(Error::param(format!("step counts must double: {} then {}", w[0], w[1])));
        }
        if !(self.final_time > 0.0) || !self.final_time.is_finite() {
            return Err(Error::param("T must be positive"));
        }
        self.picard.validate()?;
        self.spec(first).validate()?;
        Ok(())
    }

    /// Problem specification for `n` steps.
    pub fn spec(&self, n: usize) -> ProblemSpec {
        ProblemSpec {
            scheme: self.scheme,
            datum: self.datum,
            mesh_level: self.mesh_level,
            picard: self.picard,
            ..ProblemSpec::new(self.p, self.lambda, self.final_time, self.final_time)
        }
        .with_steps(n)
    }

    /// Assemble the operators and interpolate the datum.
    pub fn discretize(&self) -> Result<(FemOperators, FeFunction)> {
        let ops = FemOperators::assemble(self.domain.build(self.mesh_level)?)?.with_solver(self.solver);
        let datum = self.datum;
        let phi = interpolate(ops.mesh().expect("assembled from a mesh"), |x| datum.eval(x).unwrap_or(f64::NAN))?;
        Ok((ops, phi))
    }
}

/// One line of an [`ErrorTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub steps: usize,
    pub tau: f64,
    pub error: f64,
    /// Absent on the first row.
    pub rate: Option<f64>,
    /// Wall time of the run with `steps` steps.
    pub wall_ms: f64,
    /// Largest `‖uⁿ‖/‖u^{n-1/2}‖` over the diffusion substeps of the run (Lie only).
    pub diffusion_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub plan: ExperimentPlan,
    pub rows: Vec<TableRow>,
}

impl ErrorTable {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.rate).collect()
    }

    /// Largest gap between the stored rates and rates recomputed from the error column.
    pub fn rate_consistency(&self) -> f64 {
        halving_rates(&self.errors()).iter().zip(self.rates()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn timed_run(phi: &FeFunction, ops: &FemOperators, spec: &ProblemSpec) -> Result<(RunRecord, f64)> {
    let start = Instant::now();
    let record = run(phi, ops, spec)?;
    Ok((record, start.elapsed().as_secs_f64() * 1e3))
}

/// `‖u_fine(T) - u_coarse(T)‖_{L²}` for two step counts on the same mesh.
pub fn sequential_error(plan: &ExperimentPlan, ops: &FemOperators, phi: &FeFunction, fine: usize, coarse: usize) -> Result<f64> {
    let a = run(phi, ops, &plan.spec(fine))?.solution;
    let b = if coarse == fine { a.clone() } else { run(phi, ops, &plan.spec(coarse))?.solution };
    Ok(ops.l2_distance(&a, &b)?)
}

/// Produce the error table of `plan`. Every step count is run once; the
/// first row additionally needs a run with half its steps.
pub fn run_table(plan: &ExperimentPlan) -> Result<ErrorTable> {
    plan.validate()?;
    let (ops, phi) = plan.discretize()?;
    run_table_with(plan, &ops, &phi)
}

/// [`run_table`] on operators and a datum that are already built.
pub fn run_table_with(plan: &ExperimentPlan, ops: &FemOperators, phi: &FeFunction) -> Result<ErrorTable> {
    plan.validate()?;
    let first = plan.spec(plan.steps[0]);
    let h = splitheat_core::flows::horizons(phi, &first);
    if h.exceeds_t1 {
        warn!("T = {} reaches the blow-up horizon T1 = {:.4e}", plan.final_time, h.t1);
    }
    if h.tau_exceeds_half_t1 {
        warn!("tau = {:.4e} exceeds T1/2 = {:.4e}", first.tau, h.t1 / 2.0);
    }

    let mut previous = run(phi, ops, &plan.spec(plan.steps[0] / 2))?.solution;
    let mut rows: Vec<TableRow> = Vec::with_capacity(plan.steps.len());
    for &n in &plan.steps {
        let (record, wall_ms) = timed_run(phi, ops, &plan.spec(n))?;
        let error = ops.l2_distance(&record.solution, &previous)?;
        let rate = rows.last().map(|r| (r.error / error).log2());
        info!("{} N={n} E_u={error:.4E} rate={} ({wall_ms:.0} ms)", plan.scheme.id(), rate.map_or("-".into(), |r| format!("{r:.2}")));
        rows.push(TableRow { steps: n, tau: record.tau, error, rate, wall_ms, diffusion_ratio: record.max_diffusion_ratio });
        previous = record.solution;
    }
    Ok(ErrorTable { plan: plan.clone(), rows })
}

/// Cost and accuracy of one scheme at a fixed step count.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRecord {
    pub scheme: Scheme,
    pub steps: usize,
    pub tau: f64,
    /// Sequential error against the run with half the steps.
    pub error: f64,
    /// Median wall time of the full run with `steps` steps.
    pub wall_ms: f64,
    pub linear_iterations: usize,
    pub picard_iterations: usize,
}

/// Time every scheme of `schemes` on the mesh and datum of `plan` with `steps`
/// steps, taking the median of `repetitions` runs.
pub fn run_timing(plan: &ExperimentPlan, schemes: &[Scheme], steps: usize, repetitions: usize) -> Result<Vec<TimingRecord>> {
    if repetitions == 0 {
        return Err(Error::param("at least one timing repetition is needed"));
    }
    let mut base = plan.clone();
    base.steps = vec![steps];
    base.validate()?;
    let (ops, phi) = base.discretize()?;
    let mut out = Vec::with_capacity(schemes.len());
    for &scheme in schemes {
        let plan = ExperimentPlan { scheme, ..base.clone() };
        let coarse = run(&phi, &ops, &plan.spec(steps / 2))?.solution;
        let mut times = Vec::with_capacity(repetitions);
        let mut last = None;
        for _ in 0..repetitions {
            let (record, ms) = timed_run(&phi, &ops, &plan.spec(steps))?;
            times.push(ms);
            last = Some(record);
        }
        let record = last.expect("at least one repetition");
        times.sort_by(f64::total_cmp);
        let wall_ms = times[times.len() / 2];
        let error = ops.l2_distance(&record.solution, &coarse)?;
        info!(
            "timing {}: N={steps} E_u={error:.4E} median {wall_ms:.0} ms, {} CG iterations, {} Picard iterations",
            scheme.id(),
            record.linear_iterations,
            record.picard_iterations
        );
        out.push(TimingRecord {
            scheme,
            steps,
            tau: record.tau,
            error,
            wall_ms,
            linear_iterations: record.linear_iterations,
            picard_iterations: record.picard_iterations,
        });
    }
    Ok(out)
}
