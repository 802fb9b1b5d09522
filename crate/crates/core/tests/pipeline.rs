//! End-to-end structural checks of the entangler chain: the four-term
//! pre-selection state, the post-selected coincidence coefficients after the
//! analysis interferometers, and the dense-oracle route for the classical
//! Hong-Ou-Mandel plateau.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tbsim_core::elements::{
    apply_delay_interferometer, apply_switch, InterferometerSetting, SwitchSchedule,
};
use tbsim_core::experiments::{self, ExperimentConfig, Phases};
use tbsim_core::fock::{
    dense::dense_oracle_apply, tensor, Branch, Mode, Occupation, Port, PureState,
};
use tbsim_core::source::{prepare_timebin_qubit, single_pair};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn polar(r: f64, phi: f64) -> Complex64 {
    Complex64::from_polar(r, phi)
}

fn occ(pairs: &[(Port, u8)]) -> Occupation {
    Occupation::from_counts(pairs.iter().map(|&(p, b)| (Mode::new(p, b), 1)))
}

/// The switch turns the two prepared qubits into the four-term state with
/// coefficients (-1, -e^{i phi_b}, +e^{i phi_a}, +e^{i(phi_a+phi_b)})/2.
#[test]
fn entangler_pre_selection_four_terms() {
    let (phi_a, phi_b) = (0.83, -1.21);
    let mut state = single_pair();
    state = prepare_timebin_qubit(&state, Port::A, phi_a).unwrap();
    state = prepare_timebin_qubit(&state, Port::B, phi_b).unwrap();
    let out = apply_switch(
        &state,
        &SwitchSchedule::entangler(),
        (Port::A, Port::B),
        (Port::C, Port::D),
    )
    .unwrap();

    assert_eq!(out.len(), 4);
    let cases = [
        (occ(&[(Port::C, 1), (Port::D, 1)]), polar(0.5, 0.0) * c(-1.0, 0.0)),
        (occ(&[(Port::D, 1), (Port::D, 2)]), polar(0.5, phi_b) * c(-1.0, 0.0)),
        (occ(&[(Port::C, 1), (Port::C, 2)]), polar(0.5, phi_a)),
        (occ(&[(Port::C, 2), (Port::D, 2)]), polar(0.5, phi_a + phi_b)),
    ];
    for (target, expected) in cases {
        let amp = out.amplitude(&target);
        assert!(
            (amp - expected).norm() < 1e-12,
            "{target}: {amp} vs {expected}"
        );
    }
}

/// Post-selected state through the analysis interferometers keeps same-bin
/// coincidences with coefficients proportional to
/// (-1, e^{i(a+b)} - e^{i(c+d)}, e^{i(a+b+c+d)}) on bins (t1, t2, t3).
#[test]
fn analysis_chain_reproduces_coincidence_coefficients() {
    let (phi_a, phi_b, phi_c, phi_d) = (0.4, 0.9, 0.35, 1.9);
    let mut cfg = ExperimentConfig::ideal();
    cfg.phases = Phases {
        alice: phi_a,
        bob: phi_b,
        charlie: phi_c,
        david: phi_d,
    };
    let (entangled, prob) = experiments::run_entangler(&cfg).unwrap();
    assert!((prob - 0.5).abs() < 1e-12);

    let after_c = apply_delay_interferometer(
        &entangled,
        &InterferometerSetting::analysis(Port::C, phi_c),
    )
    .unwrap();
    let after_d = apply_delay_interferometer(
        &after_c,
        &InterferometerSetting::analysis(Port::D, phi_d),
    )
    .unwrap();

    let scale = 1.0 / (4.0 * 2f64.sqrt());
    let sum_ab = polar(1.0, phi_a + phi_b);
    let sum_cd = polar(1.0, phi_c + phi_d);
    let expected = [
        (occ(&[(Port::C, 1), (Port::D, 1)]), c(-scale, 0.0)),
        (
            occ(&[(Port::C, 2), (Port::D, 2)]),
            (sum_ab - sum_cd) * scale,
        ),
        (
            occ(&[(Port::C, 3), (Port::D, 3)]),
            polar(scale, phi_a + phi_b + phi_c + phi_d),
        ),
    ];
    for (target, value) in expected {
        let amp = after_d.amplitude(&target);
        assert!((amp - value).norm() < 1e-12, "{target}: {amp} vs {value}");
    }
}

/// Same-bin coefficients keep their printed ratios for random phases.
#[test]
fn coincidence_coefficient_ratios_over_random_phases() {
    let mut rng = ChaCha8Rng::seed_from_u64(93);
    for _ in 0..10 {
        let phases: Vec<f64> = (0..4)
            .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
            .collect();
        let (phi_a, phi_b, phi_c, phi_d) = (phases[0], phases[1], phases[2], phases[3]);
        let mut cfg = ExperimentConfig::ideal();
        cfg.phases = Phases {
            alice: phi_a,
            bob: phi_b,
            charlie: phi_c,
            david: phi_d,
        };
        let (entangled, _) = experiments::run_entangler(&cfg).unwrap();
        let analyzed = apply_delay_interferometer(
            &apply_delay_interferometer(
                &entangled,
                &InterferometerSetting::analysis(Port::C, phi_c),
            )
            .unwrap(),
            &InterferometerSetting::analysis(Port::D, phi_d),
        )
        .unwrap();
        let a1 = analyzed.amplitude(&occ(&[(Port::C, 1), (Port::D, 1)]));
        let a3 = analyzed.amplitude(&occ(&[(Port::C, 3), (Port::D, 3)]));
        // t1 and t3 coefficients always have unit magnitude ratio and carry
        // the full phase sum.
        assert!((a1.norm() - a3.norm()).abs() < 1e-12);
        let ratio = a3 / a1;
        let expected = polar(1.0, phi_a + phi_b + phi_c + phi_d) / c(-1.0, 0.0);
        assert!((ratio - expected).norm() < 1e-12);
    }
}

/// Classical plateau: fully distinguishable photons through the 50/50 switch
/// give coincidence probability 1/2, via the sparse pipeline and via the
/// dense oracle applied per branch.
#[test]
fn hom_plateau_matches_dense_oracle() {
    // Distinguishable pair: Alice parallel, Bob orthogonal.
    let state = tensor(
        &PureState::basis(Occupation::single(Mode::new(Port::A, 1))),
        &PureState::basis(Occupation::single(Mode::with_branch(
            Port::B,
            1,
            Branch::Orthogonal,
        ))),
    )
    .unwrap();

    // Sparse route: the scheduled switch.
    let sparse = apply_switch(
        &state,
        &SwitchSchedule::fifty_fifty(),
        (Port::A, Port::B),
        (Port::C, Port::D),
    )
    .unwrap();
    let coincidence = |s: &PureState| -> f64 {
        s.terms()
            .filter(|(o, _)| o.at_gate(Port::C, 1) >= 1 && o.at_gate(Port::D, 1) >= 1)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    };
    let p_sparse = coincidence(&sparse);

    // Dense route: in-place mode-pair map per branch, then port relabeling.
    let m = SwitchSchedule::rotation(std::f64::consts::FRAC_PI_2);
    let mut dense = state.clone();
    for branch in [Branch::Parallel, Branch::Orthogonal] {
        dense = dense_oracle_apply(
            &dense,
            Mode::with_branch(Port::A, 1, branch),
            Mode::with_branch(Port::B, 1, branch),
            &m,
        )
        .unwrap();
    }
    let dense = dense
        .map_modes(|mode| match mode.port {
            Port::A => Mode::with_branch(Port::C, mode.bin, mode.branch),
            Port::B => Mode::with_branch(Port::D, mode.bin, mode.branch),
            _ => mode,
        })
        .unwrap();
    let p_dense = coincidence(&dense);

    assert!((p_sparse - 0.5).abs() < 1e-10, "sparse plateau {p_sparse}");
    assert!((p_sparse - p_dense).abs() < 1e-10);

    // Indistinguishable photons null instead.
    let matched = tensor(
        &PureState::basis(Occupation::single(Mode::new(Port::A, 1))),
        &PureState::basis(Occupation::single(Mode::new(Port::B, 1))),
    )
    .unwrap();
    let nulled = apply_switch(
        &matched,
        &SwitchSchedule::fifty_fifty(),
        (Port::A, Port::B),
        (Port::C, Port::D),
    )
    .unwrap();
    assert!(coincidence(&nulled) < 1e-12);
}
