//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if any
//! criterion fails.
//!
//! Runs as a single test so the timing criterion never shares the machine
//! with other tests of this binary.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitheat::harness::{run_table, run_table_with, run_timing, ErrorTable, ExperimentPlan};
use splitheat_core::fem::diffusion_step;
use splitheat_core::flows::{nonlinear_flow, run};
use splitheat_core::verify::{splitting_order, OrderStudy};
use splitheat_core::{Domain, FeFunction, FemOperators, InitialDatum, Lambda, Scheme};

// Reference sequential errors on the unit square, h = 2^-7, phi0.
const REFERENCE_E128: f64 = 1.4669e-3;
const E128_REL_TOL: f64 = 0.10;
const SQUARE_RATE_TOL: f64 = 0.05;
const MESH_ROBUST_REL_TOL: f64 = 0.01;
const LSHAPE_RATE_TOL: f64 = 0.10;
const LSHAPE_LATE_RATE_BAND: (f64, f64) = (0.95, 1.25);
const CUBE_RATE_TOL: f64 = 0.07;
const ORDER_SLOPE_BAND: (f64, f64) = (0.9, 1.1);
const ORACLE_REL_TOL: f64 = 1e-8;
const CLOSED_FORM_TOL: f64 = 1e-10;
const TIMING_ERROR_SPREAD: f64 = 3.0;
const SYMMETRY_REL_TOL: f64 = 1e-13;
const KERNEL_TOL: f64 = 1e-12;

struct Report {
    lines: Vec<(usize, bool, String)>,
}

impl Report {
    fn record(&mut self, id: usize, name: &str, passed: bool, detail: String) {
        let status = if passed { "PASS" } else { "FAIL" };
        println!("{status} [{id}] {name}: {detail}");
        self.lines.push((id, passed, name.to_string()));
    }
}

fn fmt_rates(rates: &[f64]) -> String {
    rates.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", ")
}

fn rates_within(t: &ErrorTable, lo: f64, hi: f64) -> bool {
    let r = t.rates();
    !r.is_empty() && r.iter().all(|x| (lo..=hi).contains(x))
}

fn plan(domain: Domain, datum: InitialDatum, level: u32, final_time: f64) -> ExperimentPlan {
    ExperimentPlan { domain, datum, mesh_level: level, final_time, ..ExperimentPlan::standard() }
}

/// RK4 for w' = λ|w|^{p-1}w, written independently of the library.
fn rk4(w0: f64, p: f64, lambda: f64, t: f64, steps: usize) -> f64 {
    let f = |w: f64| lambda * w.abs().powf(p - 1.0) * w;
    let h = t / steps as f64;
    let mut w = w0;
    for _ in 0..steps {
        let k1 = f(w);
        let k2 = f(w + 0.5 * h * k1);
        let k3 = f(w + 0.5 * h * k2);
        let k4 = f(w + h * k3);
        w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    w
}

fn quotient(u: f64, p: f64, l: Lambda, tau: f64) -> f64 {
    (nonlinear_flow(u, p, l, tau).unwrap() - u) / tau
}

fn random_lambda(rng: &mut ChaCha8Rng) -> Lambda {
    if rng.gen_bool(0.5) {
        Lambda::Plus
    } else {
        Lambda::Minus
    }
}

#[test]
fn acceptance() {
    let mut report = Report { lines: Vec::new() };
    let mut tables: Vec<ErrorTable> = Vec::new();

    // 1. Square, h = 2^-7, phi0, N_k = 128..2048.
    let square7 = run_table(&plan(Domain::UnitSquare, InitialDatum::Phi0, 7, 0.1)).unwrap();
    let e128 = square7.rows[0].error;
    let rel = (e128 - REFERENCE_E128).abs() / REFERENCE_E128;
    report.record(
        1,
        "square h=2^-7 table",
        rates_within(&square7, 1.0 - SQUARE_RATE_TOL, 1.0 + SQUARE_RATE_TOL) && rel <= E128_REL_TOL,
        format!(
            "rates [{}] (need 1 +/- {SQUARE_RATE_TOL}); E_u(128) = {e128:.4e} vs {REFERENCE_E128:.4e}, rel diff {rel:.3} (need <= {E128_REL_TOL})",
            fmt_rates(&square7.rates())
        ),
    );

    // 2. Mesh robustness at N = 256.
    let square6_plan = ExperimentPlan { steps: vec![256], ..plan(Domain::UnitSquare, InitialDatum::Phi0, 6, 0.1) };
    let (ops6, phi6) = square6_plan.discretize().unwrap();
    let square6 = run_table_with(&square6_plan, &ops6, &phi6).unwrap();
    let (e6, e7) = (square6.rows[0].error, square7.rows[1].error);
    let rel = (e6 - e7).abs() / e7;
    report.record(
        2,
        "mesh robustness j=6 vs j=7 at N=256",
        rel <= MESH_ROBUST_REL_TOL,
        format!("E_u {e6:.5e} vs {e7:.5e}, rel diff {rel:.2e} (need <= {MESH_ROBUST_REL_TOL})"),
    );

    // 3. L-shape, h = 2^-6, singular datum.
    let mut ok = true;
    let mut detail = Vec::new();
    for t in [0.1, 0.5, 1.0] {
        let table = run_table(&plan(Domain::LShape, InitialDatum::Sing, 6, t)).unwrap();
        let (lo, hi) = if t < 1.0 { (1.0 - LSHAPE_RATE_TOL, 1.0 + LSHAPE_RATE_TOL) } else { LSHAPE_LATE_RATE_BAND };
        let pass = rates_within(&table, lo, hi);
        ok &= pass;
        detail.push(format!("T={t}: [{}] in [{lo}, {hi}] {}", fmt_rates(&table.rates()), if pass { "ok" } else { "out" }));
        tables.push(table);
    }
    report.record(3, "L-shape singular datum tables", ok, detail.join("; "));

    // 4. Cube, h = 2^-4.
    let mut ok = true;
    let mut detail = Vec::new();
    for datum in [InitialDatum::VarPhi0, InitialDatum::VarPhi1, InitialDatum::VarPhi2] {
        let table = run_table(&plan(Domain::UnitCube, datum, 4, 0.1)).unwrap();
        let pass = rates_within(&table, 1.0 - CUBE_RATE_TOL, 1.0 + CUBE_RATE_TOL);
        ok &= pass;
        detail.push(format!("{}: [{}]", datum.id(), fmt_rates(&table.rates())));
        tables.push(table);
    }
    report.record(4, "cube h=2^-4 tables", ok, format!("{} (need 1 +/- {CUBE_RATE_TOL})", detail.join("; ")));

    // 5. Splitting order against a fine-step reference, both signs of lambda.
    let mut ok = true;
    let mut detail = Vec::new();
    for lambda in [Lambda::Plus, Lambda::Minus] {
        let study = OrderStudy {
            domain: Domain::UnitSquare,
            datum: InitialDatum::Phi0,
            p: 2.5,
            lambda,
            final_time: 0.1,
            mesh_level: 6,
            ladder: vec![32, 64, 128, 256],
        };
        let fit = splitting_order(&study, &ops6).unwrap();
        let pass = (ORDER_SLOPE_BAND.0..=ORDER_SLOPE_BAND.1).contains(&fit.slope);
        ok &= pass;
        detail.push(format!("lambda={}: slope {:.4}", lambda.value(), fit.slope));
    }
    report.record(5, "splitting order", ok, format!("{} (need in {ORDER_SLOPE_BAND:?})", detail.join("; ")));

    // 6. Closed-form flow vs RK4, plus p = 2 closed forms.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 1000 {
        let p = rng.gen_range(2.0..4.0);
        let w: f64 = rng.gen_range(-2.0..2.0);
        let t = rng.gen_range(0.0..0.2);
        let l = random_lambda(&mut rng);
        if w == 0.0 || (p - 1.0) * t * w.abs().powf(p - 1.0) > 0.5 {
            continue;
        }
        let exact = nonlinear_flow(w, p, l, t).unwrap();
        worst = worst.max(((exact - rk4(w, p, l.value(), t, 4000)) / exact).abs());
        n += 1;
    }
    let mut closed: f64 = 0.0;
    for _ in 0..1000 {
        let w: f64 = rng.gen_range(-2.0..2.0);
        let tau = rng.gen_range(0.0..0.9) / w.abs().max(1e-3);
        closed = closed.max((nonlinear_flow(w, 2.0, Lambda::Plus, tau).unwrap() - w / (1.0 - tau * w.abs())).abs());
        closed = closed.max((nonlinear_flow(w, 2.0, Lambda::Minus, tau).unwrap() - w / (1.0 + tau * w.abs())).abs());
    }
    report.record(
        6,
        "nonlinear flow oracle",
        worst <= ORACLE_REL_TOL && closed <= CLOSED_FORM_TOL,
        format!("1000 samples, max rel err {worst:.2e} (need <= {ORACLE_REL_TOL}); p=2 closed forms max err {closed:.2e}"),
    );

    // 7. Scalar inequalities on 10^4 samples each, tau within the admissible range.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst2, mut worst1): (f64, f64) = (0.0, 0.0);
    for _ in 0..10_000 {
        let p = rng.gen_range(2.0..5.0);
        let u: f64 = rng.gen_range(-3.0..3.0);
        let v: f64 = if rng.gen_bool(0.5) { u + rng.gen_range(-1e-2..1e-2) } else { rng.gen_range(-3.0..3.0) };
        let l = random_lambda(&mut rng);

        let cap_u = 0.5 / ((p - 1.0) * u.abs().powf(p - 1.0));
        let tau = cap_u * 10f64.powf(-rng.gen_range(0.0..3.0));
        let lhs = (quotient(u, p, l, tau) - l.value() * u.abs().powf(p - 1.0) * u).abs();
        let rhs = 4.0 * p * tau * u.abs().powf(2.0 * p - 1.0);
        if rhs > 0.0 {
            worst2 = worst2.max(lhs / rhs);
        }

        let cap_uv = 0.5 / ((p - 1.0) * u.abs().max(v.abs()).powf(p - 1.0));
        let tau = cap_uv * 10f64.powf(-rng.gen_range(0.0..3.0));
        let lhs = (quotient(u, p, l, tau) - quotient(v, p, l, tau)).abs();
        let rhs = 12.0 * (p - 1.0) * (u - v).abs() * (u.abs().powf(p - 1.0) + v.abs().powf(p - 1.0));
        if rhs > 0.0 {
            worst1 = worst1.max(lhs / rhs);
        }
    }
    report.record(
        7,
        "scalar flow inequalities",
        worst2 <= 1.0 && worst1 <= 1.0,
        format!("max lhs/rhs: consistency (4p) {worst2:.4}, Lipschitz (12(p-1)) {worst1:.4} (need <= 1)"),
    );

    // 8. Timing at h = 2^-7, N = 256.
    let timing = run_timing(&plan(Domain::UnitSquare, InitialDatum::Phi0, 7, 0.1), &Scheme::ALL, 256, 3).unwrap();
    let get = |s: Scheme| timing.iter().find(|r| r.scheme == s).unwrap();
    let (lie, t1, t2) = (get(Scheme::Lie), get(Scheme::Type1), get(Scheme::Type2));
    let errors = [lie.error, t1.error, t2.error];
    let spread = errors.iter().cloned().fold(0.0, f64::max) / errors.iter().cloned().fold(f64::INFINITY, f64::min);
    report.record(
        8,
        "timing order lie < type2 <= type1",
        lie.wall_ms < t2.wall_ms && t2.wall_ms <= t1.wall_ms && spread <= TIMING_ERROR_SPREAD,
        format!(
            "median ms lie {:.0}, type2 {:.0}, type1 {:.0}; E_u {:.4e} / {:.4e} / {:.4e}, spread {spread:.2} (need <= {TIMING_ERROR_SPREAD})",
            lie.wall_ms, t2.wall_ms, t1.wall_ms, lie.error, t2.error, t1.error
        ),
    );

    // 9. Stability, operator structure and determinism.
    tables.push(square7);
    tables.push(square6.clone());
    let worst_ratio = tables.iter().flat_map(|t| t.rows.iter().map(|r| r.diffusion_ratio)).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut sym: f64 = 0.0;
    let mut entrywise: f64 = 0.0;
    let mut kernel: f64 = 0.0;
    let mut measure: f64 = 0.0;
    let mut random_ratio: f64 = 0.0;
    for (domain, level) in [(Domain::UnitSquare, 5), (Domain::LShape, 4), (Domain::UnitCube, 3)] {
        let ops = FemOperators::assemble(domain.build(level).unwrap()).unwrap();
        let nv = ops.num_vertices();
        for m in [ops.mass(), ops.stiffness()] {
            for _ in 0..5 {
                let x: Vec<f64> = (0..nv).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let y: Vec<f64> = (0..nv).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let (a, b) = (m.bilinear(&x, &y).unwrap(), m.bilinear(&y, &x).unwrap());
                // Rounding in both sums is bounded relative to |x|ᵀ|M||y|.
                let scale: f64 = (0..nv).map(|r| m.row(r).map(|(c, v)| (x[r] * v * y[c]).abs()).sum::<f64>()).sum();
                sym = sym.max((a - b).abs() / scale);
            }
            entrywise = entrywise.max(m.asymmetry());
        }
        let k1 = ops.stiffness().spmv(&vec![1.0; nv]).unwrap();
        kernel = kernel.max(k1.iter().fold(0.0, |m, v| m.max(v.abs())));
        let total: f64 = ops.mass().values().iter().sum();
        measure = measure.max((total - domain.measure()).abs() / domain.measure());
        for tau in [1e-4, 1e-2, 1.0] {
            let mut u: Vec<f64> = (0..nv).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for (i, v) in u.iter_mut().enumerate() {
                if ops.is_boundary(i) {
                    *v = 0.0;
                }
            }
            let u = FeFunction::from_values(u);
            let next = diffusion_step(&ops, &u, tau).unwrap();
            random_ratio = random_ratio.max(ops.l2_norm(&next).unwrap() / ops.l2_norm(&u).unwrap());
        }
    }
    let mut bitwise = true;
    for scheme in Scheme::ALL {
        let p = ExperimentPlan { scheme, ..square6_plan.clone() };
        let a = run(&phi6, &ops6, &p.spec(256)).unwrap().solution;
        let b = run(&phi6, &ops6, &p.spec(256)).unwrap().solution;
        bitwise &= a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits());
    }
    let again = run_table_with(&square6_plan, &ops6, &phi6).unwrap();
    bitwise &= again.rows[0].error.to_bits() == square6.rows[0].error.to_bits();
    let start = Instant::now();
    let fresh = run_table(&square6_plan).unwrap();
    bitwise &= fresh.rows[0].error.to_bits() == square6.rows[0].error.to_bits();
    report.record(
        9,
        "stability, operator structure, determinism",
        worst_ratio <= 1.0 && random_ratio <= 1.0 && sym <= SYMMETRY_REL_TOL && entrywise == 0.0 && kernel <= KERNEL_TOL && measure <= 1e-12 && bitwise,
        format!(
            "max diffusion L2 ratio {worst_ratio:.6} (runs), {random_ratio:.6} (random data); symmetry {sym:.1e} (entrywise {entrywise:.1e}); |K1| {kernel:.1e}; \
             mass total rel err {measure:.1e}; bit-identical reruns {bitwise} ({:.0} ms rerun)",
            start.elapsed().as_secs_f64() * 1e3
        ),
    );

    let failed: Vec<String> = report.lines.iter().filter(|l| !l.1).map(|l| format!("[{}] {}", l.0, l.2)).collect();
    println!("{} of {} criteria passed", report.lines.len() - failed.len(), report.lines.len());
    assert!(failed.is_empty(), "failing criteria: {}", failed.join(", "));
}
