//! Cross-method checks: every quantity here is computed two independent ways.

use std::f64::consts::{PI, SQRT_2};

use blockade::c64;
use blockade::hilbert::{expectation, mode_lowering, BasisLabel, DensityMatrix, OperatorMatrix, StateVector};
use blockade::liouville::{build_liouvillian, evolve, solve_steady_state, Liouvillian};
use blockade::model::{JcParams, KerrParams, ModelKind, ModelParams};
use blockade::observables::{Correlator, OutputMixSpec};
use blockade::sweep::{convergence_check, run_sweep, Axis, SweepSpec};
use blockade::weakdrive::{closed_form_kerr, g2out_from_amplitudes, solve_amplitudes};
use blockade::Error;

fn fig1(eps: f64) -> ModelParams {
    ModelParams::Kerr(KerrParams { eps, ..KerrParams::default() })
}

fn liouvillian(params: &ModelParams, cutoff: usize) -> Liouvillian {
    let space = params.space(cutoff).unwrap();
    build_liouvillian(&params.hamiltonian(&space).unwrap(), &params.channels(&space).unwrap()).unwrap()
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn quartic_table_matches_explicit_products() {
    let params = fig1(0.1);
    let space = params.space(4).unwrap();
    let rho = solve_steady_state(&liouvillian(&params, 4)).unwrap().rho;
    let corr = Correlator::new(&space).unwrap();
    let table = corr.cross_table(&rho).unwrap();
    let a = mode_lowering(&space).unwrap();
    let ad = [a[0].adjoint(), a[1].adjoint()];
    for j in 0..2 {
        for k in 0..2 {
            for l in 0..2 {
                for m in 0..2 {
                    let op = &(&(&ad[j] * &ad[k]) * &a[l]) * &a[m];
                    let want = expectation(&rho, &op).unwrap();
                    let got = table[j][k][l][m];
                    assert!((got - want).norm() < 1e-12 * (1.0 + want.norm()), "{j}{k}{l}{m}");
                    // (j,k,l,m) and (m,l,k,j) are Hermitian conjugates.
                    assert!((got - table[m][l][k][j].conj()).norm() < 1e-14);
                }
            }
        }
    }
    // Explicit output operator a_out = sqrt(k1) a1 + e^{i phi} sqrt(k2) a2.
    for phi in [0.0, 0.3, PI, 4.0] {
        let spec = OutputMixSpec::new(phi, 1.0, 1.0);
        let b = &a[0] + &a[1].scale(c64::from_polar(1.0, phi));
        let bd = b.adjoint();
        let n = expectation(&rho, &(&bd * &b)).unwrap().re;
        let num = expectation(&rho, &(&(&bd * &bd) * &(&b * &b))).unwrap().re;
        assert!(relative(corr.n_out(&rho, &spec).unwrap(), n) < 1e-10);
        assert!(relative(corr.g2_out(&rho, &spec).unwrap(), num / (n * n)) < 1e-8);
    }
}

#[test]
fn weak_drive_matches_master_equation_at_fig1() {
    let params = fig1(0.01);
    let space = params.space(4).unwrap();
    let rho = solve_steady_state(&liouvillian(&params, 4)).unwrap().rho;
    let me = Correlator::new(&space).unwrap().report(&rho, &params.output_mix()).unwrap();
    let wd = solve_amplitudes(&params).unwrap().statistics(&params.output_mix()).unwrap();
    assert!(relative(wd.g2_1.unwrap(), me.g2_1.unwrap()) < 0.01);
    assert!(relative(wd.g2_2.unwrap(), me.g2_2.unwrap()) < 0.01);
    assert!(relative(wd.g2_out.unwrap(), me.g2_out.unwrap()) < 0.05);
    assert!(relative(wd.n1, me.n1) < 0.01);
}

#[test]
fn closed_form_amplitudes_match_linear_solve() {
    let u = 50.0;
    let params = ModelParams::Kerr(KerrParams { u, delta2: 2.0 * u, eps: 0.1, ..KerrParams::default() });
    let solved = solve_amplitudes(&params).unwrap();
    let closed = closed_form_kerr(u, 1.0, 0.1);
    for (n1, n2) in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
        let (s, c) = (solved.photon(n1, n2).unwrap(), closed.photon(n1, n2).unwrap());
        assert!((s - c).norm() < 0.1 * s.norm(), "C{n1}{n2}: {s} vs {c}");
    }
    let closed20 = closed_form_kerr(20.0, 1.0, 0.1);
    let (c20, c11, c02) =
        (closed20.photon(2, 0).unwrap(), closed20.photon(1, 1).unwrap(), closed20.photon(0, 2).unwrap());
    assert!((c20.norm() / c11.norm() - SQRT_2).abs() < 0.1);
    assert!(c02.norm() < 0.1 * c20.norm());
    // Hard-core limit: two-photon amplitudes vanish.
    let hard = closed_form_kerr(1e8, 1.0, 0.1);
    assert!(hard.photon(2, 0).unwrap().norm() < 1e-8);
    assert!(hard.photon(1, 1).unwrap().norm() < 1e-8);
}

#[test]
fn kerr_interference_cancels_in_the_hard_core_limit() {
    let u = 1e6;
    let params = ModelParams::Kerr(KerrParams { u, delta2: 2.0 * u, ..KerrParams::default() });
    let amps = solve_amplitudes(&params).unwrap();
    let (c20, c11) = (amps.photon(2, 0).unwrap(), amps.photon(1, 1).unwrap());
    assert!((c20 - c11 * SQRT_2).norm() < 1e-4 * c20.norm());
}

#[test]
fn linear_amplitudes_factorize() {
    let params = ModelParams::Kerr(KerrParams { u: 0.0, delta1: 0.7, delta2: -1.3, ..KerrParams::default() });
    let a = solve_amplitudes(&params).unwrap();
    let (c10, c01) = (a.photon(1, 0).unwrap(), a.photon(0, 1).unwrap());
    assert!((a.photon(2, 0).unwrap() - c10 * c10 / SQRT_2).norm() < 1e-12);
    assert!((a.photon(1, 1).unwrap() - c10 * c01).norm() < 1e-12);
    assert!((a.photon(0, 2).unwrap() - c01 * c01 / SQRT_2).norm() < 1e-12);

    let jc = ModelParams::Jc(JcParams { g: 0.0, ..JcParams::default() });
    let a = solve_amplitudes(&jc).unwrap();
    let (c10, c01) = (a.photon(1, 0).unwrap(), a.photon(0, 1).unwrap());
    assert!((a.photon(2, 0).unwrap() - c10 * c10 / SQRT_2).norm() < 1e-12);
    assert!((a.photon(1, 1).unwrap() - c10 * c01).norm() < 1e-12);
}

#[test]
fn amplitude_statistics_do_not_depend_on_drive() {
    for params in [fig1(0.1), ModelParams::Jc(JcParams::default())] {
        let half = match params {
            ModelParams::Kerr(p) => ModelParams::Kerr(KerrParams { eps: p.eps / 2.0, ..p }),
            ModelParams::Jc(p) => ModelParams::Jc(JcParams { eps: p.eps / 2.0, ..p }),
        };
        let a = solve_amplitudes(&params).unwrap().statistics(&params.output_mix()).unwrap();
        let b = solve_amplitudes(&half).unwrap().statistics(&half.output_mix()).unwrap();
        for (x, y) in [(a.g2_1, b.g2_1), (a.g2_2, b.g2_2), (a.g2_out, b.g2_out)] {
            assert!(relative(x.unwrap(), y.unwrap()) < 0.005);
        }
        assert!(relative(b.n1, a.n1 / 4.0) < 1e-9);
    }
}

#[test]
fn jc_interference_condition_sharpens_with_coupling() {
    let mut previous = f64::INFINITY;
    for g in [20.0, 50.0, 100.0] {
        let params = ModelParams::Jc(JcParams::resonant(g, -g, -2.0 * g / 3.0));
        let amps = solve_amplitudes(&params).unwrap();
        // Cavity 1 carries the TLS and is driven on the lower polariton, so the
        // pair that must cancel at phi = pi is (C_g20, C_g11); C_g02 stays negligible.
        let c11 = amps.get(BasisLabel::ground(1, 1)).unwrap();
        let c20 = amps.get(BasisLabel::ground(2, 0)).unwrap();
        let c02 = amps.get(BasisLabel::ground(0, 2)).unwrap();
        let mismatch = (c20 - c11 * SQRT_2).norm() / c11.norm();
        assert!(c02.norm() < 0.2 * c11.norm());
        assert!(mismatch < previous, "g = {g}: {mismatch} vs {previous}");
        previous = mismatch;
    }
}

#[test]
fn weak_drive_output_matches_master_equation_for_jc() {
    let params = ModelParams::Jc(JcParams { eps: 0.01, ..JcParams::default() });
    let space = params.space(3).unwrap();
    let rho = solve_steady_state(&liouvillian(&params, 3)).unwrap().rho;
    let me = Correlator::new(&space).unwrap().report(&rho, &params.output_mix()).unwrap();
    let amps = solve_amplitudes(&params).unwrap();
    let wd = g2out_from_amplitudes(&amps, &params.output_mix()).unwrap();
    assert!(relative(wd, me.g2_out.unwrap()) < 0.05);
}

#[test]
fn evolution_relaxes_to_the_steady_state() {
    let params = fig1(0.1);
    let l = liouvillian(&params, 3);
    let steady = solve_steady_state(&l).unwrap().rho;
    let space = params.space(3).unwrap();
    // Start far from equilibrium: one photon in each cavity.
    let start = DensityMatrix::pure(&StateVector::basis(&space, BasisLabel::fock(1, 1)).unwrap()).unwrap();
    let evolved = evolve(&start, &l, l.recommended_step(), 20.0).unwrap();
    let diff = (evolved.as_operator() - steady.as_operator()).max_abs();
    assert!(diff < 1e-6, "{diff:e}");
}

#[test]
fn tls_population_decays_at_its_full_rate() {
    // kappa_a = 2 with a kappa_a / 2 dissipator: the excited population decays at rate 2.
    let params = ModelParams::Jc(JcParams { g: 0.0, eps: 0.0, ..JcParams::default() });
    let space = params.space(1).unwrap();
    let l = liouvillian(&params, 1);
    let e = space.encode(BasisLabel::excited(0, 0)).unwrap();
    let excited = OperatorMatrix::from_fn(space.total_dim(), |i, j| {
        if i == e && j == e { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) }
    });
    let rate = l.apply(&excited).unwrap().get(e, e).re;
    assert!((rate + 2.0).abs() < 1e-12);
    let start = DensityMatrix::new(excited).unwrap();
    let later = evolve(&start, &l, 1e-3, 0.5).unwrap();
    assert!((later.as_operator().get(e, e).re - (-1.0f64).exp()).abs() < 1e-9);
}

#[test]
fn dark_tls_makes_the_steady_state_degenerate() {
    let params = ModelParams::Jc(JcParams { g: 0.0, delta_a: 0.0, kappa_a: 0.0, ..JcParams::default() });
    assert!(matches!(solve_steady_state(&liouvillian(&params, 2)), Err(Error::Degenerate(_))));
}

#[test]
fn destructive_interference_bunches_the_output() {
    let params = ModelParams::Kerr(KerrParams { delta2: 0.0, ..KerrParams::default() });
    let space = params.space(4).unwrap();
    let rho = solve_steady_state(&liouvillian(&params, 4)).unwrap().rho;
    let corr = Correlator::new(&space).unwrap();
    let report = corr.report(&rho, &params.output_mix()).unwrap();
    assert!(report.g2_out.unwrap() > 100.0);
    assert!(relative(report.n2, report.n1) < 0.05);
    assert!(report.n_out < 1e-2 * (report.n1 + report.n2));
}

#[test]
fn truncation_checks() {
    let fig1 = SweepSpec::new(ModelKind::Kerr).cutoff(4).axis(Axis::linear("delta1", -5.0, 5.0, 5));
    let report = convergence_check(&fig1).unwrap();
    assert!(report.converged, "{report:?}");
    assert!(report.max_relative_change.values().all(|&c| c < 1e-3));

    let strong = SweepSpec::new(ModelKind::Kerr).cutoff(2).param("eps", 0.5);
    assert!(!convergence_check(&strong).unwrap().converged);

    let dark = SweepSpec::new(ModelKind::Kerr).cutoff(2).param("eps", 0.0);
    let report = convergence_check(&dark).unwrap();
    assert!(report.max_relative_change.values().all(|&c| c == 0.0));
}

#[test]
fn sweeps_are_reproducible() {
    let spec = SweepSpec::new(ModelKind::Kerr)
        .cutoff(3)
        .axis(Axis::linear("phi", 0.0, 2.0 * PI, 9))
        .axis(Axis::linear("delta", -40.0, 40.0, 5));
    let a = run_sweep(&spec).unwrap().to_csv_string().unwrap();
    let b = run_sweep(&spec).unwrap().to_csv_string().unwrap();
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 46);
    assert!(!a.contains("NaN") && !a.contains("inf"));
}
