//! Self-checks behind `splitheat verify`.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitheat_core::flows::nonlinear_flow;
use splitheat_core::verify::{ode_oracle, splitting_order, OrderFit, OrderStudy};
use splitheat_core::{Domain, FemOperators, InitialDatum, Lambda};

use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        CheckOutcome { name: name.into(), passed, detail }
    }
}

fn random_lambda(rng: &mut ChaCha8Rng) -> Lambda {
    if rng.gen_bool(0.5) {
        Lambda::Plus
    } else {
        Lambda::Minus
    }
}

/// `τ` log-uniform over three decades below `cap`, so the flow load
/// `(p-1)τ|w|^{p-1}` stays above `5e-4`. Below that `(N(τ)w - w)/τ` is
/// mostly cancellation noise.
fn admissible_tau(rng: &mut ChaCha8Rng, cap: f64) -> f64 {
    cap * 10f64.powf(-rng.gen_range(0.0..3.0))
}

/// `(N(τ)w - w)/τ`.
fn quotient(w: f64, p: f64, l: Lambda, tau: f64) -> Result<f64> {
    Ok((nonlinear_flow(w, p, l, tau)? - w) / tau)
}

/// Closed-form flow against RK4 on `samples` random points inside the guard
/// region, plus the `p = 2` closed forms.
pub fn flow_oracle(samples: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < samples {
        let p = rng.gen_range(2.0..4.0);
        let w: f64 = rng.gen_range(-2.0..2.0);
        let t = rng.gen_range(0.0..0.2);
        let l = random_lambda(&mut rng);
        if (p - 1.0) * t * w.abs().powf(p - 1.0) > 0.5 || w == 0.0 {
            continue;
        }
        let exact = nonlinear_flow(w, p, l, t)?;
        let oracle = ode_oracle(w, p, l, t, 2000)?;
        worst = worst.max(((exact - oracle) / oracle).abs());
        done += 1;
    }
    let mut closed: f64 = 0.0;
    for (w, tau) in [(1.0, 0.5), (0.3, 0.9), (-2.0, 0.1), (1.7, 0.25)] {
        let plus = nonlinear_flow(w, 2.0, Lambda::Plus, tau)?;
        let minus = nonlinear_flow(w, 2.0, Lambda::Minus, tau)?;
        closed = closed.max((plus - w / (1.0 - tau * f64::abs(w))).abs());
        closed = closed.max((minus - w / (1.0 + tau * f64::abs(w))).abs());
    }
    Ok(CheckOutcome::new(
        "nonlinear flow vs RK4 oracle",
        worst <= 1e-8 && closed <= 1e-10,
        format!("{samples} samples, max rel err {worst:.2e}; p=2 closed forms max err {closed:.2e}"),
    ))
}

/// Consistency bound `|(N(τ)-I)u/τ - λ|u|^{p-1}u| ≤ 4p τ|u|^{2p-1}`
/// whenever `(p-1)τ|u|^{p-1} ≤ 1/2`.
pub fn consistency_bound(samples: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = rng.gen_range(2.0..5.0);
        let u: f64 = rng.gen_range(-3.0..3.0);
        let cap = 0.5 / ((p - 1.0) * u.abs().powf(p - 1.0));
        let tau = admissible_tau(&mut rng, cap);
        let l = random_lambda(&mut rng);
        let lhs = (quotient(u, p, l, tau)? - l.value() * u.abs().powf(p - 1.0) * u).abs();
        let rhs = 4.0 * p * tau * u.abs().powf(2.0 * p - 1.0);
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    Ok(CheckOutcome::new("consistency bound, c_p = 4p", worst <= 1.0 + 1e-9, format!("{samples} samples, max lhs/rhs {worst:.4}")))
}

/// Lipschitz bound `|(N(τ)-I)u/τ - (N(τ)-I)v/τ| ≤ 12(p-1)|u-v|(|u|^{p-1}+|v|^{p-1})`
/// for `τ ≤ min(|u|^{1-p}, |v|^{1-p}) / (2(p-1))`.
pub fn lipschitz_bound(samples: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = rng.gen_range(2.0..5.0);
        let u: f64 = rng.gen_range(-3.0..3.0);
        let v: f64 = if rng.gen_bool(0.5) { u + rng.gen_range(-1e-2..1e-2) } else { rng.gen_range(-3.0..3.0) };
        let big = u.abs().max(v.abs());
        let cap = 0.5 / ((p - 1.0) * big.powf(p - 1.0));
        let tau = admissible_tau(&mut rng, cap);
        let l = random_lambda(&mut rng);
        let lhs = (quotient(u, p, l, tau)? - quotient(v, p, l, tau)?).abs();
        let rhs = 12.0 * (p - 1.0) * (u - v).abs() * (u.abs().powf(p - 1.0) + v.abs().powf(p - 1.0));
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    Ok(CheckOutcome::new("Lipschitz bound, c_p = 12(p-1)", worst <= 1.0 + 1e-9, format!("{samples} samples, max lhs/rhs {worst:.4}")))
}

/// Temporal order of the Lie scheme on the unit square with `φ₀`.
pub fn order_study(lambda: Lambda, p: f64, final_time: f64, level: u32, ladder: &[usize]) -> Result<(CheckOutcome, OrderFit)> {
    let ops = FemOperators::assemble(Domain::UnitSquare.build(level)?)?;
    let study = OrderStudy {
        domain: Domain::UnitSquare,
        datum: InitialDatum::Phi0,
        p,
        lambda,
        final_time,
        mesh_level: level,
        ladder: ladder.to_vec(),
    };
    let fit = splitting_order(&study, &ops)?;
    let outcome = CheckOutcome::new(
        format!("splitting order, lambda = {}", lambda.value()),
        (0.9..=1.1).contains(&fit.slope),
        format!("level {level}, ladder {ladder:?}, slope {:.4}", fit.slope),
    );
    Ok((outcome, fit))
}

/// CSV with one line per ladder point: `lambda,tau,error,slope,intercept`.
pub fn write_fits<W: Write>(out: W, fits: &[(Lambda, OrderFit)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "tau", "error", "slope", "intercept"])?;
    for (l, fit) in fits {
        for (tau, e) in fit.taus.iter().zip(&fit.errors) {
            w.write_record([
                l.value().to_string(),
                format!("{tau:e}"),
                format!("{e:.4E}"),
                format!("{:.4}", fit.slope),
                format!("{:.4}", fit.intercept),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
