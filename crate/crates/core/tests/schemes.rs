use splitheat_core::fem::interpolate;
use splitheat_core::flows::{run, NormIndex};
use splitheat_core::verify::weighted_sup_diagnostic;
use splitheat_core::{FeFunction, FemOperators, InitialDatum, Lambda, Mesh, ProblemSpec, Scheme};

fn square(j: u32) -> (FemOperators, FeFunction) {
    let ops = FemOperators::assemble(Mesh::unit_square(j).unwrap()).unwrap();
    let phi = interpolate(ops.mesh().unwrap(), |x| InitialDatum::Phi0.eval(x).unwrap()).unwrap();
    (ops, phi)
}

#[test]
fn schemes_agree_as_tau_shrinks() {
    let (ops, phi) = square(5);
    let base = ProblemSpec::new(2.5, Lambda::Plus, 0.1, 0.1).with_mesh_level(5);
    let solve = |scheme: Scheme, n: usize| run(&phi, &ops, &base.clone().with_scheme(scheme).with_steps(n)).unwrap().solution;

    let lie = solve(Scheme::Lie, 1024);
    let lie_seq = ops.l2_distance(&lie, &solve(Scheme::Lie, 512)).unwrap();
    let t1 = solve(Scheme::Type1, 1024);
    let t2 = solve(Scheme::Type2, 1024);
    for (a, b) in [(&lie, &t1), (&lie, &t2), (&t1, &t2)] {
        let d = ops.l2_distance(a, b).unwrap();
        assert!(d < 3.0 * lie_seq, "difference {d:e} vs Lie sequential error {lie_seq:e}");
    }
}

#[test]
fn table_size_run_completes() {
    let (ops, phi) = square(6);
    let spec = ProblemSpec::new(2.5, Lambda::Plus, 0.1, 0.1).with_steps(128);
    let rec = run(&phi, &ops, &spec).unwrap();
    assert_eq!(rec.history.len(), 128);
    assert!(rec.solution.is_finite());
    assert!(rec.max_diffusion_ratio <= 1.0);
    assert!((rec.horizons.t1 - 1.0 / 1.5).abs() < 1e-12);
    assert!(rec.max_bound_ratio <= 1.0);
}

#[test]
fn weighted_sup_stays_bounded() {
    let (ops, phi) = square(6);
    let spec = ProblemSpec::new(2.5, Lambda::Plus, 0.1, 0.1).with_steps(128);
    let rec = run(&phi, &ops, &spec).unwrap();
    let sup = weighted_sup_diagnostic(&rec, 2.0, NormIndex::Infinity).unwrap();
    // Weight exponent (d/2)(1/q - 1/r) = 1/2 for d = 2, q = 2, r = ∞.
    let first = rec.tau.sqrt() * rec.history[0].max_abs;
    assert!(sup.is_finite() && sup > 0.0);
    assert!(sup <= 10.0 * first, "sup {sup} vs first {first}");
}

#[test]
fn dissipative_run_respects_soft_maximum() {
    let (ops, phi) = square(5);
    for scheme in Scheme::ALL {
        let spec = ProblemSpec::new(3.0, Lambda::Minus, 0.1, 0.1).with_scheme(scheme).with_steps(64);
        let rec = run(&phi, &ops, &spec).unwrap();
        let peak = rec.history.iter().map(|s| s.max_abs).fold(0.0, f64::max);
        assert!(peak <= 1.05 * phi.max_abs(), "{scheme:?}: {peak}");
        assert!(rec.history.windows(2).all(|w| w[1].l2 <= w[0].l2));
    }
}

#[test]
fn runs_are_bit_reproducible() {
    let (ops, phi) = square(5);
    for scheme in Scheme::ALL {
        let spec = ProblemSpec::new(2.5, Lambda::Plus, 0.1, 0.1).with_scheme(scheme).with_steps(32);
        let a = run(&phi, &ops, &spec).unwrap().solution;
        let b = run(&phi, &ops, &spec).unwrap().solution;
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}

#[test]
fn lshape_and_cube_runs() {
    for (mesh, datum) in [(Mesh::lshape(4).unwrap(), InitialDatum::Sing), (Mesh::unit_cube(3).unwrap(), InitialDatum::VarPhi2)] {
        let ops = FemOperators::assemble(mesh).unwrap();
        let phi = interpolate(ops.mesh().unwrap(), |x| datum.eval(x).unwrap()).unwrap();
        let rec = run(&phi, &ops, &ProblemSpec::new(2.5, Lambda::Plus, 0.1, 0.1).with_steps(16)).unwrap();
        assert!(rec.solution.is_finite());
        for v in ops.mesh().unwrap().boundary_mask().iter().zip(rec.solution.values()).filter(|(b, _)| **b) {
            assert_eq!(*v.1, 0.0);
        }
    }
}
