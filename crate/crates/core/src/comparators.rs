//! Implicit Euler reference schemes.
//!
//! * Type 1, fully implicit: `(uⁿ - uⁿ⁻¹)/τ = Δuⁿ + λ|uⁿ|^{p-1}uⁿ`, with the
//!   nonlinear system resolved by Picard iteration on the fixed matrix `M + τK`.
//! * Type 2, semi-implicit: `(uⁿ - uⁿ⁻¹)/τ = Δuⁿ + λ|uⁿ⁻¹|^{p-1}uⁿ`. The frozen
//!   coefficient enters as a vertex-quadrature weighted mass term, so the
//!   system matrix changes every step and is re-assembled.

use alloc::vec::Vec;

use crate::fem::{solve_checked, DiffusionOperator, FeFunction, FemOperators};
use crate::flows::{ProblemSpec, StepStats};
use crate::math::abs_pow;
use crate::{Error, Result};

/// Stopping rule for the Picard iteration of the fully implicit scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    /// Relative L² increment `‖v⁽ᵐ⁺¹⁾ - v⁽ᵐ⁾‖ / ‖v⁽ᵐ⁺¹⁾‖` at which to stop.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig { tol: 1e-10, max_iter: 50 }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::param("Picard tolerance must be positive and max_iter at least 1"));
        }
        Ok(())
    }
}

/// Outcome of [`picard_iterate`].
#[derive(Debug, Clone, PartialEq)]
pub struct PicardOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub last_increment: f64,
}

/// Fixed-point iteration `v ← map(v)` from `seed` until the relative
/// increment measured by `norm` drops to `cfg.tol`.
pub fn picard_iterate(
    seed: Vec<f64>,
    cfg: &PicardConfig,
    mut map: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    norm: impl Fn(&[f64]) -> f64,
) -> Result<PicardOutcome> {
    cfg.validate()?;
    let mut v = seed;
    let mut increment = f64::INFINITY;
    for m in 1..=cfg.max_iter {
        let next = map(&v)?;
        let diff: Vec<f64> = next.iter().zip(&v).map(|(a, b)| a - b).collect();
        let size = norm(&next);
        let step = norm(&diff);
        increment = if size > 0.0 { step / size } else { step };
        v = next;
        if increment <= cfg.tol {
            return Ok(PicardOutcome { solution: v, iterations: m, last_increment: increment });
        }
    }
    Err(Error::PicardDivergence { step: 0, iterations: cfg.max_iter, last_increment: increment })
}

/// Nodal reaction `|v|^{p-1} v`.
#[inline]
fn reaction(v: f64, p: f64) -> f64 {
    abs_pow(v, p - 1.0) * v
}

/// Type 1 step with a prebuilt `M + τK`. `scale` multiplies `λ`; 0 switches
/// the reaction off.
pub(crate) fn type1_step_with(
    u_prev: &FeFunction,
    ops: &FemOperators,
    diffusion: &DiffusionOperator,
    spec: &ProblemSpec,
    cfg: &PicardConfig,
    scale: f64,
) -> Result<(FeFunction, StepStats)> {
    let prev = ops.restrict(u_prev)?;
    let coeff = scale * spec.lambda.value() * spec.tau;
    let mut linear_iterations = 0;
    let outcome = picard_iterate(
        prev.clone(),
        cfg,
        |v| {
            let forced: Vec<f64> = prev.iter().zip(v).map(|(&u0, &vi)| u0 + coeff * reaction(vi, spec.p)).collect();
            let rhs = ops.mass_interior().spmv(&forced)?;
            let mut x = v.to_vec();
            linear_iterations += diffusion.solve(ops, &rhs, &mut x)?.iterations;
            if let Some(i) = x.iter().position(|a| !a.is_finite()) {
                return Err(Error::NonFinite { index: ops.interior_vertices()[i] });
            }
            Ok(x)
        },
        |x| ops.l2_norm_interior(x),
    )?;
    Ok((
        ops.extend(&outcome.solution),
        StepStats {
            linear_iterations,
            picard_iterations: outcome.iterations,
            diffusion_ratio: None,
            l2: Some(ops.l2_norm_interior(&outcome.solution)),
        },
    ))
}

/// One fully implicit Euler step, resolved by Picard iteration.
pub fn type1_step(u_prev: &FeFunction, ops: &FemOperators, spec: &ProblemSpec, cfg: &PicardConfig) -> Result<FeFunction> {
    let diffusion = ops.diffusion_operator(spec.tau)?;
    Ok(type1_step_with(u_prev, ops, &diffusion, spec, cfg, 1.0)?.0)
}

/// Type 2 step. Re-assembles `M + τK - τλ·W(|uⁿ⁻¹|^{p-1})` and solves once.
pub(crate) fn type2_step_with(
    u_prev: &FeFunction,
    ops: &FemOperators,
    spec: &ProblemSpec,
    scale: f64,
) -> Result<(FeFunction, StepStats)> {
    if !(spec.tau > 0.0) {
        return Err(Error::param("time step must be positive"));
    }
    let weights: Vec<f64> = u_prev.values().iter().map(|&v| abs_pow(v, spec.p - 1.0)).collect();
    let system = ops.assemble_system(1.0, spec.tau, -scale * spec.tau * spec.lambda.value(), Some(&weights))?;
    let mut x = ops.restrict(u_prev)?;
    let rhs = ops.mass_interior().spmv(&x)?;
    let report = solve_checked(&system, &rhs, &mut x, ops.solver(), "semi-implicit step")?;
    let l2 = Some(ops.l2_norm_interior(&x));
    Ok((ops.extend(&x), StepStats { linear_iterations: report.iterations, picard_iterations: 0, diffusion_ratio: None, l2 }))
}

/// One semi-implicit Euler step with the reaction coefficient frozen at `u_prev`.
pub fn type2_step(u_prev: &FeFunction, ops: &FemOperators, spec: &ProblemSpec) -> Result<FeFunction> {
    Ok(type2_step_with(u_prev, ops, spec, 1.0)?.0)
}
