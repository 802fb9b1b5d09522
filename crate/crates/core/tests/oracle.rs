//! Sparse-engine cross-checks against the dense brute-force oracle, plus the
//! algebraic properties of the mode-pair map on randomized inputs.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tbsim_core::fock::{
    apply_mode_pair_unitary, dense::dense_oracle_apply, max_amplitude_diff, Limits, Mat2, Mode,
    Occupation, Port, PureState,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Haar-ish random 2x2 unitary from three phases and one rotation angle.
fn random_unitary(rng: &mut ChaCha8Rng) -> Mat2 {
    let theta: f64 = rng.random::<f64>() * std::f64::consts::PI;
    let (alpha, beta, gamma) = (
        rng.random::<f64>() * std::f64::consts::TAU,
        rng.random::<f64>() * std::f64::consts::TAU,
        rng.random::<f64>() * std::f64::consts::TAU,
    );
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let (ea, eb, eg) = (
        Complex64::from_polar(1.0, alpha),
        Complex64::from_polar(1.0, beta),
        Complex64::from_polar(1.0, gamma),
    );
    // diag(ea, eb) * R(theta) * diag(eg, 1)
    [
        [ea * eg * ct, ea * st],
        [-eb * eg * st, eb * ct],
    ]
}

fn matmul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn mode_pool() -> Vec<Mode> {
    vec![
        Mode::new(Port::A, 1),
        Mode::new(Port::A, 2),
        Mode::new(Port::B, 1),
        Mode::new(Port::B, 2),
        Mode::new(Port::C, 1),
        Mode::new(Port::D, 1),
    ]
}

/// Random normalized state over the pool with at most 3 photons per term.
fn random_state(rng: &mut ChaCha8Rng) -> PureState {
    let pool = mode_pool();
    let n_terms = 1 + rng.random_range(0..4usize);
    let mut terms = Vec::new();
    for _ in 0..n_terms {
        let photons = 1 + rng.random_range(0..3u32);
        let mut occ = Occupation::vacuum();
        for _ in 0..photons {
            occ.add(pool[rng.random_range(0..pool.len())], 1);
        }
        let amp = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        terms.push((occ, amp));
    }
    let state = PureState::from_terms(terms, Limits::default()).expect("in range");
    state.normalized()
}

#[test]
fn sparse_matches_dense_over_200_random_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(7001);
    let pool = mode_pool();
    for case in 0..200 {
        let state = random_state(&mut rng);
        let u = pool[rng.random_range(0..pool.len())];
        let v = loop {
            let m = pool[rng.random_range(0..pool.len())];
            if m != u {
                break m;
            }
        };
        let m = random_unitary(&mut rng);
        let sparse = apply_mode_pair_unitary(&state, u, v, &m).expect("sparse apply");
        let dense = dense_oracle_apply(&state, u, v, &m).expect("dense apply");
        let diff = max_amplitude_diff(&sparse, &dense);
        assert!(diff < 1e-10, "case {case}: max amplitude diff {diff:.3e}");
    }
}

#[test]
fn unitarity_preserves_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(7002);
    let u = Mode::new(Port::A, 1);
    let v = Mode::new(Port::B, 1);
    for _ in 0..50 {
        let state = random_state(&mut rng);
        let m = random_unitary(&mut rng);
        let out = apply_mode_pair_unitary(&state, u, v, &m).expect("apply");
        assert!((out.norm_sqr() - state.norm_sqr()).abs() < 1e-12);
    }
}

#[test]
fn composition_equals_matrix_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(7003);
    let u = Mode::new(Port::A, 1);
    let v = Mode::new(Port::B, 1);
    for _ in 0..50 {
        let state = random_state(&mut rng);
        let m1 = random_unitary(&mut rng);
        let m2 = random_unitary(&mut rng);
        let chained = apply_mode_pair_unitary(
            &apply_mode_pair_unitary(&state, u, v, &m1).expect("first"),
            u,
            v,
            &m2,
        )
        .expect("second");
        let fused = apply_mode_pair_unitary(&state, u, v, &matmul(&m2, &m1)).expect("fused");
        assert!(max_amplitude_diff(&chained, &fused) < 1e-10);
    }
}

#[test]
fn dense_oracle_conserves_photon_number() {
    let mut rng = ChaCha8Rng::seed_from_u64(7004);
    let u = Mode::new(Port::C, 1);
    let v = Mode::new(Port::D, 1);
    for _ in 0..20 {
        let state = random_state(&mut rng);
        let m = random_unitary(&mut rng);
        let out = dense_oracle_apply(&state, u, v, &m).expect("dense");
        let totals_in: std::collections::BTreeSet<u32> =
            state.terms().map(|(o, _)| o.total()).collect();
        for (occ, _) in out.terms() {
            assert!(totals_in.contains(&occ.total()));
        }
    }
}
