//! Gate constructions on time-bin qubits: the tunable partial-PBS switch
//! setting and the post-selected three-switch CZ gate built from it.
//!
//! Qubit basis ordering is {t2 t2, t2 t1, t1 t2, t1 t1}, so the CZ sign
//! lands on the t1 t1 element.

use num_complex::Complex64;

use crate::elements::{apply_switch, attenuator, SwitchSchedule};
use crate::fock::{project, Mode, Occupation, Port, PureState, C_ZERO};
use crate::{Error, Result};

/// cos(theta/2) = 1/sqrt(3): the first bin couples partially, the second
/// passes untouched.
pub fn partial_pbs_schedule() -> SwitchSchedule {
    let theta = 2.0 * (1.0 / 3f64.sqrt()).acos();
    SwitchSchedule::ideal([(1, theta), (2, 0.0)])
}

/// Post-selected two-qubit operator reconstructed from the four basis
/// inputs, with per-input success probabilities and the fidelity to the
/// ideal controlled-Z.
#[derive(Clone, Debug)]
pub struct GateReport {
    /// Operator on {t2t2, t2t1, t1t2, t1t1}, columns = basis inputs.
    pub operator: [[Complex64; 4]; 4],
    pub success_probabilities: [f64; 4],
    /// Process fidelity of the post-selected operator to CZ.
    pub fidelity: f64,
    pub max_off_diagonal: f64,
    /// Concurrence of the post-selected output for |+>|+> input.
    pub plus_plus_concurrence: f64,
}

/// Single-photon time-bin qubit on `port`: amp_t1 |t1> + amp_t2 |t2>.
pub fn qubit(port: Port, amp_t1: Complex64, amp_t2: Complex64) -> PureState {
    PureState::from_terms(
        [
            (Occupation::single(Mode::new(port, 1)), amp_t1),
            (Occupation::single(Mode::new(port, 2)), amp_t2),
        ],
        Default::default(),
    )
    .expect("single photon fits any limits")
}

fn basis_qubit(port: Port, bin: u8) -> PureState {
    PureState::basis(Occupation::single(Mode::new(port, bin)))
}

/// CZ circuit: partial PBS between the qubit ports, then a 1/sqrt(3)
/// attenuation of the non-interacting bin t2 on each output rail (a switch
/// with a vacuum second input, here the attenuator element).
fn cz_circuit(input: &PureState) -> Result<PureState> {
    for (occ, _) in input.terms() {
        if occ.at_port(Port::A) != 1 || occ.at_port(Port::B) != 1 {
            return Err(Error::NotSinglePhotonInput);
        }
    }
    let tau = 1.0 / 3f64.sqrt();
    let mixed = apply_switch(input, &partial_pbs_schedule(), (Port::A, Port::B), (Port::C, Port::D))?;
    let after_c = attenuator(&mixed, Port::C, 2, tau)?;
    attenuator(&after_c, Port::D, 2, tau)
}

/// Run the CZ gate on a two-qubit input (ports A and B) and post-select one
/// photon on each output rail. Returns the renormalized post-selected state,
/// the success probability, and optionally the full gate report.
pub fn cz_gate(input: &PureState, report: bool) -> Result<(PureState, f64, Option<GateReport>)> {
    let circuit_out = cz_circuit(input)?;
    let (state, probability) = project(&circuit_out, |occ| {
        occ.at_port(Port::C) == 1 && occ.at_port(Port::D) == 1
    })?;
    let report = if report { Some(cz_report()?) } else { None };
    Ok((state, probability, report))
}

/// Basis outcome occupations in {t2t2, t2t1, t1t2, t1t1} order on (C, D).
fn output_basis() -> [Occupation; 4] {
    let occ = |cb: u8, db: u8| {
        Occupation::from_counts([(Mode::new(Port::C, cb), 1), (Mode::new(Port::D, db), 1)])
    };
    [occ(2, 2), occ(2, 1), occ(1, 2), occ(1, 1)]
}

/// Reconstruct the post-selected operator from the four computational basis
/// inputs and validate it on the |+>|+> superposition input.
pub fn cz_report() -> Result<GateReport> {
    let outputs = output_basis();
    let inputs = [(2u8, 2u8), (2, 1), (1, 2), (1, 1)];
    let mut operator = [[C_ZERO; 4]; 4];
    let mut success = [0.0f64; 4];
    for (col, &(qa, qb)) in inputs.iter().enumerate() {
        let input = crate::fock::tensor(&basis_qubit(Port::A, qa), &basis_qubit(Port::B, qb))?;
        let raw = cz_circuit(&input)?;
        let mut kept = 0.0;
        for (row, occ) in outputs.iter().enumerate() {
            let amp = raw.amplitude(occ);
            operator[row][col] = amp;
            kept += amp.norm_sqr();
        }
        success[col] = kept;
    }

    // Process fidelity |Tr(CZ† M)|^2 / (Tr(M†M) Tr(CZ†CZ)).
    let cz_diag = [1.0, 1.0, 1.0, -1.0];
    let mut trace = C_ZERO;
    let mut gram = 0.0;
    let mut off = 0.0f64;
    for row in 0..4 {
        for col in 0..4 {
            gram += operator[row][col].norm_sqr();
            if row == col {
                trace += Complex64::new(cz_diag[row], 0.0) * operator[row][col];
            } else {
                off = off.max(operator[row][col].norm());
            }
        }
    }
    let fidelity = trace.norm_sqr() / (gram * 4.0);

    // |+>|+> input must come out maximally entangled.
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let plus = |port| qubit(port, Complex64::new(r, 0.0), Complex64::new(r, 0.0));
    let input = crate::fock::tensor(&plus(Port::A), &plus(Port::B))?;
    let (state, _) = project(&cz_circuit(&input)?, |occ| {
        occ.at_port(Port::C) == 1 && occ.at_port(Port::D) == 1
    })?;
    let amps: Vec<Complex64> = outputs.iter().map(|occ| state.amplitude(occ)).collect();
    let plus_plus_concurrence = concurrence(&[amps[0], amps[1], amps[2], amps[3]]);

    Ok(GateReport {
        operator,
        success_probabilities: success,
        fidelity,
        max_off_diagonal: off,
        plus_plus_concurrence,
    })
}

/// Concurrence of a pure two-qubit state (a|00> + b|01> + c|10> + d|11>):
/// C = 2 |ad - bc| / norm^2.
pub fn concurrence(amps: &[Complex64; 4]) -> f64 {
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    2.0 * (amps[0] * amps[3] - amps[1] * amps[2]).norm() / norm
}

/// Check that the entangler schedule routes single photons like a PBS:
/// first bin exchanged, second bin transmitted, each with probability 1.
pub fn entangler_as_pbs_check() -> Result<bool> {
    let schedule = SwitchSchedule::entangler();
    let cases = [
        (Port::A, 1u8, Port::D),
        (Port::A, 2, Port::C),
        (Port::B, 1, Port::C),
        (Port::B, 2, Port::D),
    ];
    for (in_port, bin, expected) in cases {
        let state = basis_qubit(in_port, bin);
        let out = apply_switch(&state, &schedule, (Port::A, Port::B), (Port::C, Port::D))?;
        let amp = out.amplitude(&Occupation::single(Mode::new(expected, bin)));
        if (amp.norm_sqr() - 1.0).abs() > 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn partial_pbs_single_photon_amplitudes() {
        let schedule = partial_pbs_schedule();
        let state = basis_qubit(Port::A, 1);
        let out = apply_switch(&state, &schedule, (Port::A, Port::B), (Port::C, Port::D)).unwrap();
        let kept = out.amplitude(&Occupation::single(Mode::new(Port::C, 1)));
        let crossed = out.amplitude(&Occupation::single(Mode::new(Port::D, 1)));
        let t = 1.0 / 3f64.sqrt();
        assert!((kept - c(t, 0.0)).norm() < 1e-12);
        assert!((kept.norm_sqr() - 1.0 / 3.0).abs() < 1e-12);
        assert!((crossed.norm_sqr() - 2.0 / 3.0).abs() < 1e-12);

        let passed = apply_switch(
            &basis_qubit(Port::A, 2),
            &schedule,
            (Port::A, Port::B),
            (Port::C, Port::D),
        )
        .unwrap();
        let amp = passed.amplitude(&Occupation::single(Mode::new(Port::C, 2)));
        assert!((amp.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_pbs_two_photon_interference_sign() {
        // Both photons in the interacting bin: same-port-kept amplitude is
        // cos^2 - sin^2 = -1/3, the phase resource of the gate.
        let input = crate::fock::tensor(&basis_qubit(Port::A, 1), &basis_qubit(Port::B, 1)).unwrap();
        let out = apply_switch(
            &input,
            &partial_pbs_schedule(),
            (Port::A, Port::B),
            (Port::C, Port::D),
        )
        .unwrap();
        let kept = Occupation::from_counts([
            (Mode::new(Port::C, 1), 1),
            (Mode::new(Port::D, 1), 1),
        ]);
        assert!((out.amplitude(&kept) - c(-1.0 / 3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn cz_basis_actions() {
        // |t2 t2> passes with amplitude 1/3; |t1 t1> flips sign.
        let input = crate::fock::tensor(&basis_qubit(Port::A, 2), &basis_qubit(Port::B, 2)).unwrap();
        let (state, prob, _) = cz_gate(&input, false).unwrap();
        assert!((prob - 1.0 / 9.0).abs() < 1e-10);
        let out = Occupation::from_counts([
            (Mode::new(Port::C, 2), 1),
            (Mode::new(Port::D, 2), 1),
        ]);
        assert!((state.amplitude(&out).norm() - 1.0).abs() < 1e-10);

        let input = crate::fock::tensor(&basis_qubit(Port::A, 1), &basis_qubit(Port::B, 1)).unwrap();
        let raw = cz_circuit(&input).unwrap();
        let out = Occupation::from_counts([
            (Mode::new(Port::C, 1), 1),
            (Mode::new(Port::D, 1), 1),
        ]);
        assert!((raw.amplitude(&out) - c(-1.0 / 3.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn cz_report_contract() {
        let report = cz_report().unwrap();
        for p in report.success_probabilities {
            assert!((p - 1.0 / 9.0).abs() < 1e-10, "success {p}");
        }
        assert!(report.max_off_diagonal < 1e-10);
        assert!((report.fidelity - 1.0).abs() < 1e-10);
        assert!((report.plus_plus_concurrence - 1.0).abs() < 1e-9);
        let expected = [1.0, 1.0, 1.0, -1.0];
        for (i, sign) in expected.iter().enumerate() {
            let entry = report.operator[i][i];
            assert!((entry - c(sign / 3.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn cz_symmetric_under_qubit_swap() {
        let q1 = qubit(Port::A, c(0.8, 0.0), c(0.0, 0.6));
        let q2 = qubit(Port::B, c(0.6, 0.0), c(0.8, 0.0));
        let input = crate::fock::tensor(&q1, &q2).unwrap();
        let (out, p, _) = cz_gate(&input, false).unwrap();

        let q1s = qubit(Port::A, c(0.6, 0.0), c(0.8, 0.0));
        let q2s = qubit(Port::B, c(0.8, 0.0), c(0.0, 0.6));
        let swapped = crate::fock::tensor(&q1s, &q2s).unwrap();
        let (out_s, p_s, _) = cz_gate(&swapped, false).unwrap();

        assert!((p - p_s).abs() < 1e-10);
        // Swapping the qubits swaps C and D outcomes.
        let occ = |cb: u8, db: u8| {
            Occupation::from_counts([(Mode::new(Port::C, cb), 1), (Mode::new(Port::D, db), 1)])
        };
        for cb in [1u8, 2] {
            for db in [1u8, 2] {
                let a = out.amplitude(&occ(cb, db));
                let b = out_s.amplitude(&occ(db, cb));
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn cz_rejects_multi_photon_input() {
        let bad = PureState::basis(Occupation::from_counts([
            (Mode::new(Port::A, 1), 2),
            (Mode::new(Port::B, 1), 1),
        ]));
        assert!(matches!(cz_gate(&bad, false), Err(Error::NotSinglePhotonInput)));
    }

    #[test]
    fn pbs_truth_table_holds() {
        assert!(entangler_as_pbs_check().unwrap());
    }

    #[test]
    fn concurrence_reference_values() {
        let r = 0.5;
        let bell = [c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)];
        assert!((concurrence(&bell) - 1.0).abs() < 1e-12);
        let product = [c(1.0, 0.0), C_ZERO, C_ZERO, C_ZERO];
        assert!(concurrence(&product) < 1e-12);
    }
}
