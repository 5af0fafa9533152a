//! Independent oracles and convergence diagnostics.

use alloc::vec::Vec;

use crate::fem::{interpolate, FemOperators};
use crate::flows::{self, blowup_time, Lambda, NormIndex, ProblemSpec, RunRecord, Scheme, TheoryDiagnostics};
use crate::initdata::InitialDatum;
use crate::math::{abs_pow, ln, log2};
use crate::mesh::Domain;
use crate::{Error, Result};

/// Integrate `w' = λ|w|^{p-1}w` from `w0` over `[0, t]` with classical RK4
/// and `substeps` uniform steps.
///
/// For `λ = +1` the run is refused when `t` reaches the blow-up time of `w0`.
pub fn ode_oracle(w0: f64, p: f64, lambda: Lambda, t: f64, substeps: usize) -> Result<f64> {
    if substeps == 0 || !(t >= 0.0) || !(p > 1.0) {
        return Err(Error::param("ode_oracle needs substeps >= 1, t >= 0 and p > 1"));
    }
    if lambda == Lambda::Plus && t >= blowup_time(w0, p) {
        return Err(Error::BlowUp { step: 0, node: None, magnitude: w0.abs(), t1_bound: blowup_time(w0, p) });
    }
    let l = lambda.value();
    let f = |w: f64| l * abs_pow(w, p - 1.0) * w;
    let h = t / substeps as f64;
    let mut w = w0;
    for _ in 0..substeps {
        let k1 = f(w);
        let k2 = f(w + 0.5 * h * k1);
        let k3 = f(w + 0.5 * h * k2);
        let k4 = f(w + h * k3);
        w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !w.is_finite() {
            return Err(Error::BlowUp { step: 0, node: None, magnitude: w0.abs(), t1_bound: blowup_time(w0, p) });
        }
    }
    Ok(w)
}

/// Least-squares line through `(log τ, log error)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub taus: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
}

impl OrderFit {
    /// Fit `log e = slope·log τ + intercept`; needs at least three points.
    pub fn fit(taus: Vec<f64>, errors: Vec<f64>) -> Result<Self> {
        if taus.len() != errors.len() || taus.len() < 3 {
            return Err(Error::param("an order fit needs at least three (tau, error) pairs"));
        }
        if taus.iter().chain(&errors).any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::param("order fit requires positive finite taus and errors"));
        }
        let (slope, intercept) = least_squares(&taus, &errors);
        Ok(OrderFit { taus, errors, slope, intercept })
    }

    /// Slope recomputed from the stored points.
    pub fn recompute_slope(&self) -> f64 {
        least_squares(&self.taus, &self.errors).0
    }
}

fn least_squares(taus: &[f64], errors: &[f64]) -> (f64, f64) {
    let x: Vec<f64> = taus.iter().map(|&t| ln(t)).collect();
    let y: Vec<f64> = errors.iter().map(|&e| ln(e)).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `log₂(e_{k-1}/e_k)` for consecutive entries of an error column.
pub fn halving_rates(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| log2(w[0] / w[1])).collect()
}

/// Setup of a temporal order study on a fixed mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStudy {
    pub domain: Domain,
    pub datum: InitialDatum,
    pub p: f64,
    pub lambda: Lambda,
    pub final_time: f64,
    pub mesh_level: u32,
    /// Step counts `N` of the ladder; `τ = T/N`.
    pub ladder: Vec<usize>,
}

/// Refinement factor between the finest ladder step and the reference run.
pub const REFERENCE_REFINEMENT: usize = 16;

/// Measure the temporal order of the Lie scheme.
///
/// Each ladder run is compared in L² with a reference run on the same mesh
/// whose step is 16 times smaller than the smallest ladder step.
pub fn splitting_order(study: &OrderStudy, ops: &FemOperators) -> Result<OrderFit> {
    if study.ladder.len() < 3 {
        return Err(Error::param("the tau ladder needs at least three levels"));
    }
    if study.datum.domain() != study.domain {
        return Err(Error::param("datum is not defined on this domain"));
    }
    let mesh = ops.mesh().ok_or_else(|| Error::param("order study needs operators with a mesh"))?;
    let phi = interpolate(mesh, |x| study.datum.eval(x).unwrap_or(f64::NAN))?;
    let base = ProblemSpec {
        datum: study.datum,
        mesh_level: study.mesh_level,
        scheme: Scheme::Lie,
        ..ProblemSpec::new(study.p, study.lambda, study.final_time, study.final_time)
    };
    let finest = *study.ladder.iter().max().unwrap_or(&1);
    let reference = flows::run(&phi, ops, &base.clone().with_steps(finest * REFERENCE_REFINEMENT))?.solution;
    let mut taus = Vec::with_capacity(study.ladder.len());
    let mut errors = Vec::with_capacity(study.ladder.len());
    for &n in &study.ladder {
        let spec = base.clone().with_steps(n);
        let u = flows::run(&phi, ops, &spec)?.solution;
        taus.push(spec.tau);
        errors.push(ops.l2_distance(&u, &reference)?);
    }
    OrderFit::fit(taus, errors)
}

/// `sup_n (nτ)^{(d/2)(1/q - 1/r)} ‖uⁿ‖_{L^r}` over a recorded run.
pub fn weighted_sup_diagnostic(record: &RunRecord, q: f64, r: NormIndex) -> Result<f64> {
    Ok(TheoryDiagnostics::new(record.dim, record.p, q, r)?.weighted_sup(record))
}
