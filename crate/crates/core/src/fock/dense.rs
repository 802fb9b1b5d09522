//! Brute-force dense oracle for the mode-pair map.
//!
//! Enumerates the full Fock basis over the state's modes, builds the explicit
//! matrix of the two-mode substitution by expanding
//! (m00 a† + m10 b†)^j (m01 a† + m11 b†)^k with binomial coefficients and
//! sqrt(n!) normalizations, and applies it densely. Deliberately independent
//! of the sparse [`LinearMap`](super::LinearMap) path it cross-checks.

use std::collections::BTreeMap;

use super::{Mode, Occupation, PureState, C_ZERO, FACTORIALS};
use crate::{Error, Result};

const MAX_MODES: usize = 8;
const MAX_PHOTONS: u32 = 4;

fn binomial(n: u32, k: u32) -> f64 {
    FACTORIALS[n as usize] / (FACTORIALS[k as usize] * FACTORIALS[(n - k) as usize])
}

/// All occupations of `modes` with total photon number <= cap.
fn enumerate_basis(modes: &[Mode], cap: u32) -> Vec<Occupation> {
    let mut basis = Vec::new();
    let mut counts = vec![0u32; modes.len()];
    fill(modes, cap, 0, &mut counts, &mut basis);
    basis
}

fn fill(modes: &[Mode], remaining: u32, idx: usize, counts: &mut Vec<u32>, out: &mut Vec<Occupation>) {
    if idx == modes.len() {
        out.push(Occupation::from_counts(
            modes.iter().copied().zip(counts.iter().copied()),
        ));
        return;
    }
    for n in 0..=remaining {
        counts[idx] = n;
        fill(modes, remaining - n, idx + 1, counts, out);
    }
    counts[idx] = 0;
}

/// Apply the two-mode map densely. Must agree with
/// [`apply_mode_pair_unitary`](super::apply_mode_pair_unitary) (or the
/// isometry variant) within 1e-10 elementwise.
pub fn dense_oracle_apply(
    state: &PureState,
    u: Mode,
    v: Mode,
    m: &super::Mat2,
) -> Result<PureState> {
    let mut modes: Vec<Mode> = state.mode_set().into_iter().collect();
    if !modes.contains(&u) {
        modes.push(u);
    }
    if !modes.contains(&v) {
        modes.push(v);
    }
    modes.sort();
    let photons = state.max_total();
    if modes.len() > MAX_MODES || photons > MAX_PHOTONS {
        return Err(Error::DimensionTooLarge {
            modes: modes.len(),
            photons,
        });
    }

    let basis = enumerate_basis(&modes, photons);
    let index: BTreeMap<&Occupation, usize> =
        basis.iter().enumerate().map(|(i, o)| (o, i)).collect();
    let dim = basis.len();

    // Explicit matrix, column per input basis state.
    let mut matrix = vec![vec![C_ZERO; dim]; dim];
    for (col, occ) in basis.iter().enumerate() {
        let j = occ.count(u);
        let k = occ.count(v);
        let mut rest = Occupation::vacuum();
        for (&mode, &n) in occ.iter() {
            if mode != u && mode != v {
                rest.add(mode, n);
            }
        }
        for p in 0..=j {
            for q in 0..=k {
                let r = p + q;
                let s = j + k - r;
                let coeff = binomial(j, p)
                    * binomial(k, q)
                    * (FACTORIALS[r as usize] * FACTORIALS[s as usize]
                        / (FACTORIALS[j as usize] * FACTORIALS[k as usize]))
                        .sqrt();
                let weight = m[0][0].powu(p)
                    * m[1][0].powu(j - p)
                    * m[0][1].powu(q)
                    * m[1][1].powu(k - q)
                    * coeff;
                let mut row_occ = rest.clone();
                row_occ.add(u, r);
                row_occ.add(v, s);
                let row = index[&row_occ];
                matrix[row][col] += weight;
            }
        }
    }

    let mut x = vec![C_ZERO; dim];
    for (occ, amp) in state.terms() {
        x[index[occ]] = *amp;
    }
    let mut y = vec![C_ZERO; dim];
    for (row, m_row) in matrix.iter().enumerate() {
        let mut acc = C_ZERO;
        for (col, &m_rc) in m_row.iter().enumerate() {
            acc += m_rc * x[col];
        }
        y[row] = acc;
    }

    PureState::from_terms(
        basis.into_iter().zip(y).filter(|(_, a)| a.norm_sqr() > 0.0),
        state.limits(),
    )
}
