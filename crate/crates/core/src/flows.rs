//! The splitting core.
//!
//! A Lie step first advances every nodal value by the exact flow of
//! `w' = λ|w|^{p-1}w`,
//!
//! ```text
//! N(τ)w = w · (1 - (p-1)λτ|w|^{p-1})^{-1/(p-1)},
//! ```
//!
//! and then takes one implicit Euler step of the heat equation with the same
//! `τ`. After `n` steps the result approximates `(S(τ)N(τ))ⁿ φ`.

use alloc::format;
use alloc::vec::Vec;

use crate::comparators::{self, PicardConfig};
use crate::fem::{DiffusionOperator, FeFunction, FemOperators};
use crate::initdata::InitialDatum;
use crate::math::{abs_pow, exp, ln_1p, powf, round};
use crate::{Error, Result};

/// Sign of the reaction term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lambda {
    /// `λ = +1`: solutions may blow up in finite time.
    Plus,
    /// `λ = -1`: dissipative reaction.
    Minus,
}

impl Lambda {
    pub fn value(self) -> f64 {
        match self {
            Lambda::Plus => 1.0,
            Lambda::Minus => -1.0,
        }
    }

    /// Accepts exactly `1.0` or `-1.0`.
    pub fn from_value(v: f64) -> Result<Self> {
        if v == 1.0 {
            Ok(Lambda::Plus)
        } else if v == -1.0 {
            Ok(Lambda::Minus)
        } else {
            Err(Error::param(format!("lambda must be 1 or -1, got {v}")))
        }
    }
}

/// Time integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Lie splitting: exact nonlinear flow, then implicit diffusion.
    Lie,
    /// Fully implicit Euler with Picard iteration.
    Type1,
    /// Implicit Euler with the reaction coefficient frozen at the old step.
    Type2,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Lie, Scheme::Type1, Scheme::Type2];

    pub fn id(self) -> &'static str {
        match self {
            Scheme::Lie => "lie",
            Scheme::Type1 => "type1",
            Scheme::Type2 => "type2",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.id() == id)
    }
}

/// Parameters of one time integration.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    /// Exponent of the nonlinearity, `p ≥ 2`.
    pub p: f64,
    pub lambda: Lambda,
    /// Time step.
    pub tau: f64,
    /// Final time `T`; must be an integer multiple of `tau`.
    pub final_time: f64,
    pub scheme: Scheme,
    pub datum: InitialDatum,
    pub mesh_level: u32,
    /// Used by [`Scheme::Type1`] only.
    pub picard: PicardConfig,
}

impl ProblemSpec {
    /// Lie scheme on `phi0` at mesh level 6 with the given physical parameters.
    pub fn new(p: f64, lambda: Lambda, tau: f64, final_time: f64) -> Self {
        ProblemSpec {
            p,
            lambda,
            tau,
            final_time,
            scheme: Scheme::Lie,
            datum: InitialDatum::Phi0,
            mesh_level: 6,
            picard: PicardConfig::default(),
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_datum(mut self, datum: InitialDatum) -> Self {
        self.datum = datum;
        self
    }

    pub fn with_mesh_level(mut self, level: u32) -> Self {
        self.mesh_level = level;
        self
    }

    /// Same problem with `n` steps to the same final time.
    pub fn with_steps(mut self, n: usize) -> Self {
        self.tau = self.final_time / n as f64;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 2.0) || !self.p.is_finite() {
            return Err(Error::param(format!("p must be a finite number >= 2, got {}", self.p)));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::param(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.final_time > 0.0) || !self.final_time.is_finite() {
            return Err(Error::param(format!("final time must be positive, got {}", self.final_time)));
        }
        if self.tau > self.final_time * (1.0 + 1e-12) {
            return Err(Error::param("tau must not exceed the final time"));
        }
        self.picard.validate()?;
        self.num_steps().map(|_| ())
    }

    /// `N = T/τ`, which must be an integer to within `1e-12` relative.
    pub fn num_steps(&self) -> Result<usize> {
        let ratio = self.final_time / self.tau;
        let n = round(ratio);
        if n < 1.0 || (n * self.tau - self.final_time).abs() > 1e-12 * self.final_time.max(1.0) {
            return Err(Error::param(format!(
                "tau = {} does not divide T = {} into a whole number of steps",
                self.tau, self.final_time
            )));
        }
        Ok(n as usize)
    }
}

/// `1 - (p-1)λτ|w|^{p-1}` written as `1 - a`; returns `a`.
#[inline]
fn flow_load(w: f64, p: f64, lambda: f64, tau: f64) -> f64 {
    (p - 1.0) * lambda * tau * abs_pow(w, p - 1.0)
}

/// Blow-up horizon `((p-1)|w|^{p-1})^{-1}` for a magnitude `|w|`.
pub fn blowup_time(magnitude: f64, p: f64) -> f64 {
    let m = abs_pow(magnitude, p - 1.0);
    if m == 0.0 {
        f64::INFINITY
    } else {
        1.0 / ((p - 1.0) * m)
    }
}

#[inline]
fn flow_unchecked(w: f64, p: f64, lambda: f64, tau: f64) -> f64 {
    if w == 0.0 {
        return 0.0;
    }
    let a = flow_load(w, p, lambda, tau);
    // (1 - a)^{-1/(p-1)} via log1p keeps full accuracy for small a.
    w * exp(-ln_1p(-a) / (p - 1.0))
}

/// Exact solution at time `tau` of `w' = λ|w|^{p-1}w`, `w(0) = w`.
pub fn nonlinear_flow(w: f64, p: f64, lambda: Lambda, tau: f64) -> Result<f64> {
    if !(p > 1.0) || !(tau >= 0.0) || !w.is_finite() {
        return Err(Error::param(format!("nonlinear_flow: invalid arguments w={w}, p={p}, tau={tau}")));
    }
    let a = flow_load(w, p, lambda.value(), tau);
    if !(1.0 - a > 0.0) {
        return Err(Error::BlowUp { step: 0, node: None, magnitude: w.abs(), t1_bound: blowup_time(w, p) });
    }
    Ok(flow_unchecked(w, p, lambda.value(), tau))
}

/// Apply [`nonlinear_flow`] at every node.
///
/// The denominator is monotone in `|w|`, so only the largest node is checked.
pub fn apply_nonlinear_flow(u: &FeFunction, spec: &ProblemSpec) -> Result<FeFunction> {
    let lambda = spec.lambda.value();
    if let Some((node, mag)) = u.argmax_abs() {
        if !mag.is_finite() {
            return Err(Error::NonFinite { index: node });
        }
        let a = flow_load(mag, spec.p, lambda, spec.tau);
        if !(1.0 - a > 0.0) {
            return Err(Error::BlowUp { step: 0, node: Some(node), magnitude: mag, t1_bound: blowup_time(mag, spec.p) });
        }
    }
    let values: Vec<f64> = u.values().iter().map(|&w| flow_unchecked(w, spec.p, lambda, spec.tau)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    Ok(FeFunction::from_values(values))
}

/// Time horizons derived from the discrete initial datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizons {
    /// `T₁ = ((p-1)‖φ‖_∞^{p-1})^{-1}`; infinite for a zero datum.
    pub t1: f64,
    /// `min(T₁, T)` for `λ = +1`, `T` for `λ = -1`.
    pub effective: f64,
    /// Max absolute nodal value of the interpolated datum.
    pub sup_norm_phi: f64,
    /// `λ = +1` and `T ≥ T₁`: the run may hit the blow-up guard.
    pub exceeds_t1: bool,
    /// `λ = +1` and `τ > T₁/2`.
    pub tau_exceeds_half_t1: bool,
}

/// Compute [`Horizons`] for `phi`.
pub fn horizons(phi: &FeFunction, spec: &ProblemSpec) -> Horizons {
    let sup = phi.max_abs();
    let t1 = blowup_time(sup, spec.p);
    let focusing = spec.lambda == Lambda::Plus;
    Horizons {
        t1,
        effective: if focusing { t1.min(spec.final_time) } else { spec.final_time },
        sup_norm_phi: sup,
        exceeds_t1: focusing && spec.final_time >= t1,
        tau_exceeds_half_t1: focusing && spec.tau > t1 / 2.0,
    }
}

/// Norms of the discrete solution after step `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub n: usize,
    pub time: f64,
    pub l2: f64,
    pub max_abs: f64,
}

/// Work counters of a single step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub linear_iterations: usize,
    pub picard_iterations: usize,
    /// `‖uⁿ‖ / ‖u^{n-1/2}‖` for the diffusion substep of a Lie step.
    pub diffusion_ratio: Option<f64>,
    /// `‖uⁿ‖_{L²}`, when the step already computed it.
    pub l2: Option<f64>,
}

/// Result of a full time integration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub solution: FeFunction,
    pub scheme: Scheme,
    pub steps: usize,
    pub tau: f64,
    pub dim: usize,
    pub p: f64,
    pub horizons: Horizons,
    pub history: Vec<StepRecord>,
    pub linear_iterations: usize,
    pub picard_iterations: usize,
    /// Largest `‖uⁿ‖/‖u^{n-1/2}‖` over all Lie diffusion substeps (0 for other schemes).
    pub max_diffusion_ratio: f64,
    /// Largest ratio of `‖uⁿ‖_∞^{p-1}` to the a-priori bound
    /// `M/(1 - (p-1)nτM)`, `M = ‖φ‖_∞^{p-1}`, over the steps with
    /// `(p-1)nτM < 1` (`λ = +1` only; 0 otherwise).
    pub max_bound_ratio: f64,
}

/// One Lie step with a prebuilt diffusion operator.
pub fn lie_step_with(
    u_prev: &FeFunction,
    ops: &FemOperators,
    diffusion: &DiffusionOperator,
    spec: &ProblemSpec,
) -> Result<(FeFunction, StepStats)> {
    let u_half = apply_nonlinear_flow(u_prev, spec)?;
    let (u, report, [before, after]) = diffusion.step_measured(ops, &u_half)?;
    let ratio = if before > 0.0 { after / before } else { 0.0 };
    let stats = StepStats { linear_iterations: report.iterations, picard_iterations: 0, diffusion_ratio: Some(ratio), l2: Some(after) };
    Ok((u, stats))
}

/// One Lie step `S(τ)N(τ)`: nonlinear flow first, then implicit diffusion.
pub fn lie_step(u_prev: &FeFunction, ops: &FemOperators, spec: &ProblemSpec) -> Result<FeFunction> {
    let diffusion = ops.diffusion_operator(spec.tau)?;
    Ok(lie_step_with(u_prev, ops, &diffusion, spec)?.0)
}

/// Run the Lie scheme from `phi` to `spec.final_time`.
pub fn run_lie(phi: &FeFunction, ops: &FemOperators, spec: &ProblemSpec) -> Result<RunRecord> {
    let spec = ProblemSpec { scheme: Scheme::Lie, ..spec.clone() };
    run(phi, ops, &spec)
}

/// Run `spec.scheme` from `phi` to `spec.final_time`.
///
/// Matrices that do not change between steps are built once. Step errors
/// carry the 1-based index of the failing step.
pub fn run(phi: &FeFunction, ops: &FemOperators, spec: &ProblemSpec) -> Result<RunRecord> {
    spec.validate()?;
    if phi.len() != ops.num_vertices() {
        return Err(Error::param("initial datum does not belong to this mesh"));
    }
    let steps = spec.num_steps()?;
    let horizons = horizons(phi, spec);
    let diffusion = match spec.scheme {
        Scheme::Lie | Scheme::Type1 => Some(ops.diffusion_operator(spec.tau)?),
        Scheme::Type2 => None,
    };

    let m = abs_pow(horizons.sup_norm_phi, spec.p - 1.0);
    let mut record = RunRecord {
        solution: phi.clone(),
        scheme: spec.scheme,
        steps,
        tau: spec.tau,
        dim: ops.dim(),
        p: spec.p,
        horizons,
        history: Vec::with_capacity(steps),
        linear_iterations: 0,
        picard_iterations: 0,
        max_diffusion_ratio: 0.0,
        max_bound_ratio: 0.0,
    };
    for n in 1..=steps {
        let u_prev = &record.solution;
        let step = match (spec.scheme, &diffusion) {
            (Scheme::Lie, Some(d)) => lie_step_with(u_prev, ops, d, spec),
            (Scheme::Type1, Some(d)) => comparators::type1_step_with(u_prev, ops, d, spec, &spec.picard, 1.0),
            _ => comparators::type2_step_with(u_prev, ops, spec, 1.0),
        };
        let (u, stats) = step.map_err(|e| e.at_step(n))?;
        if let Some(i) = u.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        record.linear_iterations += stats.linear_iterations;
        record.picard_iterations += stats.picard_iterations;
        if let Some(r) = stats.diffusion_ratio {
            record.max_diffusion_ratio = record.max_diffusion_ratio.max(r);
        }
        let time = n as f64 * spec.tau;
        let max_abs = u.max_abs();
        if spec.lambda == Lambda::Plus && m > 0.0 {
            let load = (spec.p - 1.0) * time * m;
            if load < 1.0 {
                let bound = m / (1.0 - load);
                record.max_bound_ratio = record.max_bound_ratio.max(powf(max_abs, spec.p - 1.0) / bound);
            }
        }
        let l2 = match stats.l2 {
            Some(v) => v,
            None => ops.l2_norm(&u)?,
        };
        record.history.push(StepRecord { n, time, l2, max_abs });
        record.solution = u;
    }
    Ok(record)
}

/// Lebesgue exponent available for discrete norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormIndex {
    /// Mass-matrix L² norm.
    Two,
    /// Max absolute nodal value.
    Infinity,
}

impl NormIndex {
    pub fn reciprocal(self) -> f64 {
        match self {
            NormIndex::Two => 0.5,
            NormIndex::Infinity => 0.0,
        }
    }
}

/// Parameters of the weighted-norm diagnostic
/// `sup_n (nτ)^{(d/2)(1/q - 1/r)} ‖uⁿ‖_{L^r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryDiagnostics {
    pub dim: usize,
    pub q: f64,
    pub r: NormIndex,
    /// `μ = d(p-1)/(2q)`, required to be below 1.
    pub mu: f64,
}

impl TheoryDiagnostics {
    pub fn new(dim: usize, p: f64, q: f64, r: NormIndex) -> Result<Self> {
        if !(q >= 1.0) {
            return Err(Error::param("q must be at least 1"));
        }
        let mu = dim as f64 * (p - 1.0) / (2.0 * q);
        if !(mu < 1.0) {
            return Err(Error::param(format!("q = {q} must exceed d(p-1)/2 = {}", dim as f64 * (p - 1.0) / 2.0)));
        }
        if r.reciprocal() > 1.0 / q {
            return Err(Error::param("r must be at least q"));
        }
        Ok(TheoryDiagnostics { dim, q, r, mu })
    }

    /// Weight exponent `(d/2)(1/q - 1/r)`.
    pub fn weight_exponent(&self) -> f64 {
        self.dim as f64 / 2.0 * (1.0 / self.q - self.r.reciprocal())
    }

    /// Weighted values `(nτ)^e ‖uⁿ‖_{L^r}` for every step of a run.
    pub fn weighted_values(&self, record: &RunRecord) -> Vec<f64> {
        let e = self.weight_exponent();
        record
            .history
            .iter()
            .map(|s| {
                let norm = match self.r {
                    NormIndex::Two => s.l2,
                    NormIndex::Infinity => s.max_abs,
                };
                if e == 0.0 {
                    norm
                } else {
                    powf(s.time, e) * norm
                }
            })
            .collect()
    }

    /// Supremum of [`TheoryDiagnostics::weighted_values`].
    pub fn weighted_sup(&self, record: &RunRecord) -> f64 {
        self.weighted_values(record).into_iter().fold(0.0, f64::max)
    }
}
