use std::f64::consts::{PI, TAU};

use blockade::c64;
use blockade::hilbert::{
    build_mode_operator, build_tls_operator, embed, expectation, BasisLabel, CompositeSpace, DensityMatrix, ModeOp,
    OperatorMatrix, Slot, TlsLevel, TlsOp,
};
use blockade::liouville::{build_liouvillian, solve_steady_state, STEADY_RESIDUAL_TOL};
use blockade::model::{effective_hamiltonian, JcParams, KerrParams, ModelParams};
use blockade::observables::{Correlator, Mode, OutputMixSpec};
use proptest::prelude::*;

fn max_diff(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    (a - b).max_abs()
}

/// Random density matrix `A A^dag / tr` from a seed matrix of entries in [-1, 1].
fn random_rho(dim: usize, entries: &[(f64, f64)]) -> DensityMatrix {
    let a = OperatorMatrix::from_fn(dim, |i, j| {
        let (re, im) = entries[(i * dim + j) % entries.len()];
        c64::new(re, im)
    });
    let m = &a * &a.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale(c64::new(1.0 / tr, 0.0))).unwrap()
}

fn entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
}

fn kerr_params() -> impl Strategy<Value = KerrParams> {
    (-30.0..30.0f64, -60.0..60.0f64, 0.0..40.0f64, 0.0..0.5f64, 0.2..3.0f64, 0.2..3.0f64, 0.0..TAU).prop_map(
        |(delta1, delta2, u, eps, kappa1, kappa2, phi)| KerrParams { delta1, delta2, u, eps, kappa1, kappa2, phi },
    )
}

fn jc_params() -> impl Strategy<Value = JcParams> {
    (
        -30.0..30.0f64,
        -30.0..30.0f64,
        -30.0..30.0f64,
        0.0..30.0f64,
        0.0..0.5f64,
        0.2..3.0f64,
        0.2..3.0f64,
        0.0..4.0f64,
        0.0..TAU,
    )
        .prop_map(|(delta1, delta_a, delta2, g, eps, kappa1, kappa2, kappa_a, phi)| JcParams {
            delta1,
            delta_a,
            delta2,
            g,
            eps,
            kappa1,
            kappa2,
            kappa_a,
            phi,
        })
}

fn any_model() -> impl Strategy<Value = ModelParams> {
    prop_oneof![kerr_params().prop_map(ModelParams::Kerr), jc_params().prop_map(ModelParams::Jc)]
}

/// Direct `-i[H, rho] + sum c (2 C rho C^dag - C^dag C rho - rho C^dag C)`.
fn rhs(params: &ModelParams, space: &CompositeSpace, rho: &OperatorMatrix) -> OperatorMatrix {
    let h = params.hamiltonian(space).unwrap();
    let mut out = (&(&h * rho) - &(rho * &h)).scale(c64::new(0.0, -1.0));
    for ch in params.channels(space).unwrap() {
        let c = &ch.operator;
        let cd = c.adjoint();
        let cdc = &cd * c;
        let jump = (&(c * rho) * &cd).scale(c64::new(2.0, 0.0));
        let term = &(&jump - &(&cdc * rho)) - &(rho * &cdc);
        out = &out + &term.scale(c64::new(ch.coefficient, 0.0));
    }
    out
}

#[test]
fn encode_decode_bijection_up_to_cutoff_six() {
    for c1 in 1..=6 {
        for c2 in 1..=6 {
            for tls in [false, true] {
                let space = CompositeSpace::new([c1, c2], tls).unwrap();
                let mut seen = vec![false; space.total_dim()];
                for n1 in 0..=c1 {
                    for n2 in 0..=c2 {
                        let levels: &[Option<TlsLevel>] =
                            if tls { &[Some(TlsLevel::Ground), Some(TlsLevel::Excited)] } else { &[None] };
                        for &level in levels {
                            let label = BasisLabel { n1, n2, tls: level };
                            let idx = space.encode(label).unwrap();
                            assert!(!seen[idx]);
                            seen[idx] = true;
                            assert_eq!(space.decode(idx).unwrap(), label);
                        }
                    }
                }
                assert!(seen.iter().all(|&s| s));
                assert!(space.decode(space.total_dim()).is_err());
            }
        }
    }
}

#[test]
fn embedding_is_a_homomorphism() {
    let kinds = [ModeOp::Annihilation, ModeOp::Creation, ModeOp::Number];
    let tls_kinds = [TlsOp::Lowering, TlsOp::Raising, TlsOp::ExcitationProjector];
    for cutoff in 1..=3 {
        let space = CompositeSpace::with_tls(cutoff).unwrap();
        for slot in [Slot::Mode1, Slot::Mode2] {
            for a in kinds {
                for b in kinds {
                    let (a, b) = (build_mode_operator(a, cutoff).unwrap(), build_mode_operator(b, cutoff).unwrap());
                    let lhs = embed(&(&a * &b), slot, &space).unwrap();
                    let rhs = &embed(&a, slot, &space).unwrap() * &embed(&b, slot, &space).unwrap();
                    assert!(max_diff(&lhs, &rhs) < 1e-12);
                }
            }
        }
        for a in tls_kinds {
            for b in tls_kinds {
                let (a, b) = (build_tls_operator(a), build_tls_operator(b));
                let lhs = embed(&(&a * &b), Slot::Tls, &space).unwrap();
                let rhs = &embed(&a, Slot::Tls, &space).unwrap() * &embed(&b, Slot::Tls, &space).unwrap();
                assert!(max_diff(&lhs, &rhs) < 1e-12);
            }
        }
    }
}

#[test]
fn different_slots_commute() {
    for cutoff in 1..=4 {
        let space = CompositeSpace::with_tls(cutoff).unwrap();
        let a = build_mode_operator(ModeOp::Annihilation, cutoff).unwrap();
        let ad = build_mode_operator(ModeOp::Creation, cutoff).unwrap();
        let ops = [
            embed(&a, Slot::Mode1, &space).unwrap(),
            embed(&ad, Slot::Mode1, &space).unwrap(),
            embed(&a, Slot::Mode2, &space).unwrap(),
            embed(&ad, Slot::Mode2, &space).unwrap(),
            embed(&build_tls_operator(TlsOp::Lowering), Slot::Tls, &space).unwrap(),
        ];
        let slot = [0, 0, 1, 1, 2];
        for i in 0..ops.len() {
            for j in 0..ops.len() {
                if slot[i] != slot[j] {
                    assert!(ops[i].commutator(&ops[j]).max_abs() < 1e-12);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hermitian_expectations_are_real(seed in entries(64), h in entries(81)) {
        let space = CompositeSpace::two_modes(2).unwrap();
        let rho = random_rho(space.total_dim(), &seed);
        let a = OperatorMatrix::from_fn(9, |i, j| c64::new(h[i * 9 + j].0, h[i * 9 + j].1));
        let herm = &a + &a.adjoint();
        prop_assert!(expectation(&rho, &herm).unwrap().im.abs() < 1e-10);
    }

    #[test]
    fn hamiltonians_are_hermitian(params in any_model(), cutoff in 1usize..4) {
        let space = params.space(cutoff).unwrap();
        let h = params.hamiltonian(&space).unwrap();
        prop_assert!(h.hermitian_deviation() < 1e-12);
    }

    #[test]
    fn undriven_hamiltonians_preserve_excitations(params in any_model(), cutoff in 1usize..4) {
        let params = match params {
            ModelParams::Kerr(p) => ModelParams::Kerr(KerrParams { eps: 0.0, ..p }),
            ModelParams::Jc(p) => ModelParams::Jc(JcParams { eps: 0.0, ..p }),
        };
        let space = params.space(cutoff).unwrap();
        let h = params.hamiltonian(&space).unwrap();
        for (i, j, v) in h.nonzeros() {
            let (a, b) = (space.decode(i).unwrap(), space.decode(j).unwrap());
            prop_assert!(a.excitations() == b.excitations() || v.norm() == 0.0);
        }
    }

    #[test]
    fn decay_part_is_dissipative(params in any_model(), cutoff in 1usize..4) {
        let space = params.space(cutoff).unwrap();
        let h = params.hamiltonian(&space).unwrap();
        let heff = effective_hamiltonian(&h, &params.channels(&space).unwrap()).unwrap();
        // (H_eff - H_eff^dag) / 2i is the decay part; its eigenvalues must be <= 0.
        let anti = (&heff - &heff.adjoint()).scale(c64::new(0.0, -0.5));
        let eig = anti.as_mat().self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
        prop_assert!(eig.iter().all(|&e| e <= 1e-12));
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity(params in any_model(), seed in entries(64)) {
        let space = params.space(2).unwrap();
        let l = build_liouvillian(&params.hamiltonian(&space).unwrap(), &params.channels(&space).unwrap()).unwrap();
        let rho = random_rho(space.total_dim(), &seed);
        let drho = l.apply(rho.as_operator()).unwrap();
        prop_assert!(drho.trace().norm() < 1e-12 * (1.0 + drho.max_abs()));
        prop_assert!(drho.hermitian_deviation() < 1e-12 * (1.0 + drho.max_abs()));
    }

    #[test]
    fn generator_matches_direct_rhs(params in any_model(), seed in entries(64)) {
        let space = params.space(2).unwrap();
        let l = build_liouvillian(&params.hamiltonian(&space).unwrap(), &params.channels(&space).unwrap()).unwrap();
        let rho = random_rho(space.total_dim(), &seed);
        let got = l.apply(rho.as_operator()).unwrap();
        let want = rhs(&params, &space, rho.as_operator());
        prop_assert!(max_diff(&got, &want) < 1e-10);
    }

    #[test]
    fn steady_states_are_density_matrices(params in any_model()) {
        let space = params.space(2).unwrap();
        let l = build_liouvillian(&params.hamiltonian(&space).unwrap(), &params.channels(&space).unwrap()).unwrap();
        let steady = solve_steady_state(&l).unwrap();
        prop_assert!(steady.residual < STEADY_RESIDUAL_TOL);
        prop_assert!(steady.rho.check().unwrap().is_valid());
    }

    #[test]
    fn single_channel_output_reduces_to_cavity_one(seed in entries(81), phi in -10.0..10.0f64, kappa1 in 0.1..5.0f64) {
        let space = CompositeSpace::two_modes(2).unwrap();
        let rho = random_rho(space.total_dim(), &seed);
        let corr = Correlator::new(&space).unwrap();
        let spec = OutputMixSpec::new(phi, kappa1, 0.0);
        let out = corr.g2_out(&rho, &spec).unwrap();
        let one = corr.g2_cavity(&rho, Mode::One).unwrap();
        prop_assert!((out - one).abs() <= 1e-10 * one.max(1.0));
        let n1 = corr.mean_photon(&rho, Mode::One).unwrap();
        prop_assert!((corr.n_out(&rho, &spec).unwrap() - kappa1 * n1).abs() < 1e-12 * (1.0 + kappa1 * n1));
    }

    #[test]
    fn output_statistics_are_two_pi_periodic(seed in entries(81), phi in -10.0..10.0f64, turns in -3i32..4) {
        let space = CompositeSpace::two_modes(2).unwrap();
        let rho = random_rho(space.total_dim(), &seed);
        let corr = Correlator::new(&space).unwrap();
        let a = corr.report(&rho, &OutputMixSpec::new(phi, 1.0, 1.0)).unwrap();
        let b = corr.report(&rho, &OutputMixSpec::new(phi + TAU * turns as f64, 1.0, 1.0)).unwrap();
        prop_assert!((a.n_out - b.n_out).abs() <= 1e-12 * a.n_out.max(1.0));
        let (x, y) = (a.g2_out.unwrap(), b.g2_out.unwrap());
        prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
    }

    #[test]
    fn output_numerator_is_real(seed in entries(81), phi in 0.0..TAU, k1 in 0.1..3.0f64, k2 in 0.1..3.0f64) {
        let space = CompositeSpace::two_modes(2).unwrap();
        let rho = random_rho(space.total_dim(), &seed);
        // An imaginary residue above tolerance surfaces as a numerical error.
        prop_assert!(Correlator::new(&space).unwrap().g2_out(&rho, &OutputMixSpec::new(phi, k1, k2)).is_ok());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn linear_cavities_mix_to_coherent_light(
        delta1 in -5.0..5.0f64,
        delta in -10.0..10.0f64,
        eps in 0.01..0.1f64,
        phi in 0.0..TAU,
        k2 in 0.5..2.0f64,
    ) {
        let params = ModelParams::Kerr(KerrParams { delta1, delta2: delta1 + delta, u: 0.0, eps, kappa1: 1.0, kappa2: k2, phi });
        let space = params.space(5).unwrap();
        let l = build_liouvillian(&params.hamiltonian(&space).unwrap(), &params.channels(&space).unwrap()).unwrap();
        let rho = solve_steady_state(&l).unwrap().rho;
        let report = Correlator::new(&space).unwrap().report(&rho, &params.output_mix()).unwrap();
        prop_assume!(report.n_out > 1e-6);
        prop_assert!((report.g2_out.unwrap() - 1.0).abs() < 1e-6);
        prop_assert!((report.g2_1.unwrap() - 1.0).abs() < 1e-6);
        prop_assert!((report.g2_2.unwrap() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn coherent_mixing_at_equal_fields() {
    // Identical linear cavities: phi = 0 gives coherent output, phi = pi cancels it.
    let base = KerrParams { delta1: 0.0, delta2: 0.0, u: 0.0, eps: 0.1, kappa1: 1.0, kappa2: 1.0, phi: 0.0 };
    let space = ModelParams::Kerr(base).space(4).unwrap();
    let p = ModelParams::Kerr(base);
    let l = build_liouvillian(&p.hamiltonian(&space).unwrap(), &p.channels(&space).unwrap()).unwrap();
    let rho = solve_steady_state(&l).unwrap().rho;
    let corr = Correlator::new(&space).unwrap();
    let g2 = corr.g2_out(&rho, &OutputMixSpec::new(0.0, 1.0, 1.0)).unwrap();
    assert!((g2 - 1.0).abs() < 1e-6);
    // Only truncation residue survives in the dark port.
    let dark = corr.n_out(&rho, &OutputMixSpec::new(PI, 1.0, 1.0)).unwrap();
    let n1 = corr.mean_photon(&rho, Mode::One).unwrap();
    assert!(dark < 1e-8 * n1, "{dark:e}");
}
