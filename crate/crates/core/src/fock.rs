//! Sparse pure states of bosonic modes and the creation-operator substitution
//! engine that every optical element reduces to.
//!
//! A mode is labeled by (port, time bin, distinguishability branch). An
//! [`Occupation`] maps modes to photon counts; a [`PureState`] maps
//! occupations to complex amplitudes. States may be subnormalized: norms are
//! never silently renormalized except inside [`project`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;

use crate::{Error, Result};

pub mod dense;

pub(crate) const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Factorials 0!..12!, exact in f64. Occupation counts stay far below 12.
pub(crate) const FACTORIALS: [f64; 13] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
];

/// Spatial rail of a mode: the switch inputs A/B, outputs C/D, and numbered
/// ancilla rails introduced by attenuators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Port {
    A,
    B,
    C,
    D,
    Anc(u8),
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Port::A => write!(f, "A"),
            Port::B => write!(f, "B"),
            Port::C => write!(f, "C"),
            Port::D => write!(f, "D"),
            Port::Anc(k) => write!(f, "anc{k}"),
        }
    }
}

/// Distinguishability sub-mode. Photons in the orthogonal branch never
/// interfere with parallel-branch photons; elements act on both branches
/// identically but separately.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    #[default]
    Parallel,
    Orthogonal,
}

/// A single bosonic mode: (port, time bin, branch). Bins are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    pub port: Port,
    pub bin: u8,
    pub branch: Branch,
}

impl Mode {
    pub fn new(port: Port, bin: u8) -> Self {
        debug_assert!(bin >= 1, "time bins are 1-based");
        Mode {
            port,
            bin,
            branch: Branch::Parallel,
        }
    }

    pub fn with_branch(port: Port, bin: u8, branch: Branch) -> Self {
        debug_assert!(bin >= 1, "time bins are 1-based");
        Mode { port, bin, branch }
    }

    /// Same (port, bin) in the orthogonal branch.
    pub fn orthogonal(self) -> Self {
        Mode {
            branch: Branch::Orthogonal,
            ..self
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:t{}", self.port, self.bin)?;
        if self.branch == Branch::Orthogonal {
            write!(f, "~")?;
        }
        Ok(())
    }
}

/// Per-simulation caps: total photons per term, number of time bins, and the
/// amplitude pruning threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Limits {
    pub n_max: u32,
    pub t_max: u8,
    pub tolerance: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            n_max: 4,
            t_max: 3,
            tolerance: 1e-12,
        }
    }
}

impl Limits {
    pub fn with_photon_cap(n_max: u32) -> Self {
        Limits {
            n_max,
            ..Limits::default()
        }
    }

    /// Loosest combination of two limit sets.
    pub fn merged(self, other: Limits) -> Limits {
        Limits {
            n_max: self.n_max.max(other.n_max),
            t_max: self.t_max.max(other.t_max),
            tolerance: self.tolerance.min(other.tolerance),
        }
    }
}

/// Occupation vector: which modes hold how many photons. Zero counts are
/// never stored, so equal occupations have equal maps.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Occupation {
    counts: BTreeMap<Mode, u32>,
}

impl Occupation {
    pub fn vacuum() -> Self {
        Occupation::default()
    }

    pub fn single(mode: Mode) -> Self {
        let mut occ = Occupation::default();
        occ.add(mode, 1);
        occ
    }

    pub fn from_counts<I: IntoIterator<Item = (Mode, u32)>>(counts: I) -> Self {
        let mut occ = Occupation::default();
        for (mode, n) in counts {
            occ.add(mode, n);
        }
        occ
    }

    pub fn add(&mut self, mode: Mode, n: u32) {
        if n == 0 {
            return;
        }
        *self.counts.entry(mode).or_insert(0) += n;
    }

    pub fn count(&self, mode: Mode) -> u32 {
        self.counts.get(&mode).copied().unwrap_or(0)
    }

    /// Total photon number.
    pub fn total(&self) -> u32 {
        self.counts.values().sum()
    }

    /// Photons at a port, over all bins and branches.
    pub fn at_port(&self, port: Port) -> u32 {
        self.counts
            .iter()
            .filter(|(m, _)| m.port == port)
            .map(|(_, n)| n)
            .sum()
    }

    /// Photons at (port, bin), summed over branches — what a gated detector sees.
    pub fn at_gate(&self, port: Port, bin: u8) -> u32 {
        self.counts
            .iter()
            .filter(|(m, _)| m.port == port && m.bin == bin)
            .map(|(_, n)| n)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &u32)> {
        self.counts.iter()
    }

    pub fn modes(&self) -> impl Iterator<Item = &Mode> {
        self.counts.keys()
    }

    pub fn is_vacuum(&self) -> bool {
        self.counts.is_empty()
    }

    /// Product of n! over all occupied modes.
    fn factorial_product(&self) -> f64 {
        self.counts
            .values()
            .map(|&n| FACTORIALS[n as usize])
            .product()
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_vacuum() {
            return write!(f, "|vac>");
        }
        write!(f, "|")?;
        for (i, (mode, n)) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n} {mode}")?;
        }
        write!(f, ">")
    }
}

/// Sparse pure state: occupation vectors with complex amplitudes.
/// Subnormalized states are first-class (post-selection and lossy maps
/// produce them); amplitudes below `limits.tolerance` are pruned after every
/// element application.
#[derive(Clone, Debug)]
pub struct PureState {
    terms: BTreeMap<Occupation, Complex64>,
    limits: Limits,
}

impl PureState {
    pub fn vacuum() -> Self {
        Self::vacuum_with(Limits::default())
    }

    pub fn vacuum_with(limits: Limits) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Occupation::vacuum(), Complex64::new(1.0, 0.0));
        PureState { terms, limits }
    }

    /// Basis state with amplitude 1.
    pub fn basis(occ: Occupation) -> Self {
        Self::basis_with(occ, Limits::default())
    }

    pub fn basis_with(occ: Occupation, limits: Limits) -> Self {
        assert!(
            occ.total() <= limits.n_max,
            "basis occupation exceeds photon cap"
        );
        let mut terms = BTreeMap::new();
        terms.insert(occ, Complex64::new(1.0, 0.0));
        PureState { terms, limits }
    }

    pub fn from_terms<I: IntoIterator<Item = (Occupation, Complex64)>>(
        entries: I,
        limits: Limits,
    ) -> Result<Self> {
        let mut terms: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, amp) in entries {
            if occ.total() > limits.n_max {
                return Err(Error::TruncationOverflow {
                    n_max: limits.n_max,
                });
            }
            *terms.entry(occ).or_insert(C_ZERO) += amp;
        }
        let mut state = PureState { terms, limits };
        state.prune();
        Ok(state)
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn amplitude(&self, occ: &Occupation) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or(C_ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Largest total photon number over stored terms.
    pub fn max_total(&self) -> u32 {
        self.terms.keys().map(|o| o.total()).max().unwrap_or(0)
    }

    /// Union of all occupied modes.
    pub fn mode_set(&self) -> BTreeSet<Mode> {
        self.terms
            .keys()
            .flat_map(|o| o.modes().copied())
            .collect()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(o, a)| (o.clone(), a * factor))
            .collect();
        let mut state = PureState {
            terms,
            limits: self.limits,
        };
        state.prune();
        state
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        assert!(n > 0.0, "cannot normalize a zero state");
        self.scaled(Complex64::new(1.0 / n, 0.0))
    }

    /// Raw inner product <self|other> over the shared basis.
    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.terms
            .iter()
            .map(|(occ, amp)| amp.conj() * other.amplitude(occ))
            .sum()
    }

    /// |<self|other>|^2 with both sides normalized.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.overlap(other).norm_sqr() / (self.norm_sqr() * other.norm_sqr())
    }

    /// Relabel modes through an injective map. Fails if two occupied modes
    /// collide after relabeling.
    pub fn map_modes(&self, f: impl Fn(Mode) -> Mode) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (occ, amp) in &self.terms {
            let mut new_occ = Occupation::vacuum();
            for (&mode, &n) in occ.iter() {
                let target = f(mode);
                if new_occ.count(target) > 0 {
                    return Err(Error::ModeCollision(target));
                }
                new_occ.add(target, n);
            }
            terms.insert(new_occ, *amp);
        }
        Ok(PureState {
            terms,
            limits: self.limits,
        })
    }

    fn prune(&mut self) {
        let tol = self.limits.tolerance;
        self.terms.retain(|_, amp| amp.norm() >= tol);
    }
}

/// Tensor product of states over disjoint mode sets; amplitudes multiply.
pub fn tensor(a: &PureState, b: &PureState) -> Result<PureState> {
    let modes_a = a.mode_set();
    for mode in b.mode_set() {
        if modes_a.contains(&mode) {
            return Err(Error::ModeCollision(mode));
        }
    }
    let limits = a.limits().merged(b.limits());
    let mut terms: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    for (occ_a, amp_a) in a.terms() {
        for (occ_b, amp_b) in b.terms() {
            let mut occ = occ_a.clone();
            for (&mode, &n) in occ_b.iter() {
                occ.add(mode, n);
            }
            if occ.total() > limits.n_max {
                return Err(Error::TruncationOverflow {
                    n_max: limits.n_max,
                });
            }
            *terms.entry(occ).or_insert(C_ZERO) += amp_a * amp_b;
        }
    }
    let mut state = PureState { terms, limits };
    state.prune();
    Ok(state)
}

/// Keep the terms satisfying `pred`, renormalize them, and return the kept
/// probability (kept norm^2 over input norm^2).
pub fn project(
    state: &PureState,
    pred: impl Fn(&Occupation) -> bool,
) -> Result<(PureState, f64)> {
    let total = state.norm_sqr();
    let kept: BTreeMap<Occupation, Complex64> = state
        .terms()
        .filter(|(occ, _)| pred(occ))
        .map(|(o, a)| (o.clone(), *a))
        .collect();
    let kept_norm: f64 = kept.values().map(|a| a.norm_sqr()).sum();
    if kept.is_empty() || kept_norm == 0.0 {
        return Err(Error::EmptyProjection);
    }
    let mut projected = PureState {
        terms: kept,
        limits: state.limits(),
    };
    projected = projected.scaled(Complex64::new(1.0 / kept_norm.sqrt(), 0.0));
    Ok((projected, kept_norm / total))
}

/// 2x2 complex matrix. Column j is the image of input creation operator j:
/// for `apply_mode_pair_unitary(state, u, v, m)`,
/// `a†_u -> m[0][0] a†_u + m[1][0] a†_v` and `a†_v -> m[0][1] a†_u + m[1][1] a†_v`.
pub type Mat2 = [[Complex64; 2]; 2];

/// Max-abs deviation of m†m from the identity.
pub fn unitarity_deviation(m: &Mat2) -> f64 {
    let mut dev = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let dot: Complex64 = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
            let target = if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                C_ZERO
            };
            dev = dev.max((dot - target).norm());
        }
    }
    dev
}

/// Apply a two-mode bosonic unitary: checks unitarity to 1e-12, preserves
/// norm and photon number per term.
pub fn apply_mode_pair_unitary(state: &PureState, u: Mode, v: Mode, m: &Mat2) -> Result<PureState> {
    let dev = unitarity_deviation(m);
    if dev > 1e-12 {
        return Err(Error::NonUnitaryMatrix { deviation: dev });
    }
    apply_mode_pair_isometry(state, u, v, m)
}

/// Same map without the unitarity check; used for attenuators and other
/// norm-reducing couplings.
pub fn apply_mode_pair_isometry(
    state: &PureState,
    u: Mode,
    v: Mode,
    m: &Mat2,
) -> Result<PureState> {
    if u == v {
        return Err(Error::ModeCollision(u));
    }
    let mut map = LinearMap::new();
    map.insert(u, vec![(u, m[0][0]), (v, m[1][0])]);
    map.insert(v, vec![(u, m[0][1]), (v, m[1][1])]);
    map.apply(state)
}

/// A linear substitution on creation operators: each ruled mode maps to a
/// superposition of target modes, unruled modes pass through. Applying the
/// map expands every n-photon factor multinomially and restores the
/// sqrt(n!) normalization of the resulting occupations.
#[derive(Clone, Debug, Default)]
pub struct LinearMap {
    rules: BTreeMap<Mode, Vec<(Mode, Complex64)>>,
}

impl LinearMap {
    pub fn new() -> Self {
        LinearMap::default()
    }

    pub fn insert(&mut self, mode: Mode, targets: Vec<(Mode, Complex64)>) {
        // Zero coefficients only add dead branches to the expansion.
        let targets: Vec<(Mode, Complex64)> = targets
            .into_iter()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .collect();
        self.rules.insert(mode, targets);
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        let limits = state.limits();
        let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, &amp) in state.terms() {
            // Split the occupation into ruled factors and pass-through modes.
            let mut seed = Occupation::vacuum();
            let mut ruled: Vec<(&[(Mode, Complex64)], u32)> = Vec::new();
            for (&mode, &n) in occ.iter() {
                match self.rules.get(&mode) {
                    Some(targets) => ruled.push((targets.as_slice(), n)),
                    None => seed.add(mode, n),
                }
            }
            let norm_in = occ.factorial_product().sqrt();

            let mut poly: BTreeMap<Occupation, Complex64> = BTreeMap::new();
            poly.insert(seed, amp / norm_in);
            for (targets, n) in ruled {
                let expansion = expand_power(targets, n);
                let mut next: BTreeMap<Occupation, Complex64> = BTreeMap::new();
                for (mono, coeff) in &poly {
                    for (addend, weight) in &expansion {
                        let mut merged = mono.clone();
                        for &(mode, k) in addend {
                            merged.add(mode, k);
                        }
                        *next.entry(merged).or_insert(C_ZERO) += coeff * weight;
                    }
                }
                poly = next;
            }

            for (mono, coeff) in poly {
                if coeff.norm_sqr() == 0.0 {
                    continue;
                }
                if mono.total() > limits.n_max {
                    return Err(Error::TruncationOverflow {
                        n_max: limits.n_max,
                    });
                }
                let norm_out = mono.factorial_product().sqrt();
                *out.entry(mono).or_insert(C_ZERO) += coeff * norm_out;
            }
        }
        let mut result = PureState { terms: out, limits };
        result.prune();
        Ok(result)
    }
}

/// Expand (sum_j c_j a†_j)^n into monomials with multinomial coefficients.
fn expand_power(targets: &[(Mode, Complex64)], n: u32) -> Vec<(Vec<(Mode, u32)>, Complex64)> {
    let mut out = Vec::new();
    let mut ks = vec![0u32; targets.len()];
    compositions(targets, n, 0, &mut ks, &mut out);
    out
}

fn compositions(
    targets: &[(Mode, Complex64)],
    remaining: u32,
    idx: usize,
    ks: &mut Vec<u32>,
    out: &mut Vec<(Vec<(Mode, u32)>, Complex64)>,
) {
    if targets.is_empty() {
        // All coefficients were zero: the whole factor vanishes unless n == 0.
        if remaining == 0 {
            out.push((Vec::new(), Complex64::new(1.0, 0.0)));
        }
        return;
    }
    if idx == targets.len() - 1 {
        ks[idx] = remaining;
        let n: u32 = ks.iter().sum();
        let mut coeff = Complex64::new(FACTORIALS[n as usize], 0.0);
        let mut mono = Vec::new();
        for (j, &(mode, c)) in targets.iter().enumerate() {
            let k = ks[j];
            coeff /= FACTORIALS[k as usize];
            coeff *= c.powu(k);
            if k > 0 {
                mono.push((mode, k));
            }
        }
        out.push((mono, coeff));
        return;
    }
    for k in 0..=remaining {
        ks[idx] = k;
        compositions(targets, remaining - k, idx + 1, ks, out);
    }
}

/// Largest absolute amplitude difference between two states over the union of
/// their bases. Test utility shared with the dense oracle.
pub fn max_amplitude_diff(a: &PureState, b: &PureState) -> f64 {
    let mut keys: BTreeSet<&Occupation> = a.terms().map(|(o, _)| o).collect();
    keys.extend(b.terms().map(|(o, _)| o));
    keys.iter()
        .map(|occ| (a.amplitude(occ) - b.amplitude(occ)).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rotation(theta: f64) -> Mat2 {
        let h = theta / 2.0;
        [
            [c(h.cos(), 0.0), c(h.sin(), 0.0)],
            [c(-h.sin(), 0.0), c(h.cos(), 0.0)],
        ]
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let u = Mode::new(Port::A, 1);
        let v = Mode::new(Port::B, 1);
        let occ = Occupation::from_counts([(u, 2), (v, 1)]);
        let state = PureState::basis(occ.clone());
        let id = [[c(1.0, 0.0), C_ZERO], [C_ZERO, c(1.0, 0.0)]];
        let out = apply_mode_pair_unitary(&state, u, v, &id).unwrap();
        assert!(max_amplitude_diff(&state, &out) < 1e-15);
        assert_eq!(out.amplitude(&occ), c(1.0, 0.0));
    }

    #[test]
    fn theta_pi_swaps_with_sign() {
        // cos(pi/2) = 0, sin(pi/2) = 1: a†_u -> -a†_v.
        let u = Mode::new(Port::A, 1);
        let v = Mode::new(Port::B, 1);
        let state = PureState::basis(Occupation::single(u));
        let out = apply_mode_pair_unitary(&state, u, v, &rotation(std::f64::consts::PI)).unwrap();
        assert_eq!(out.len(), 1);
        let amp = out.amplitude(&Occupation::single(v));
        assert!((amp - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn fifty_fifty_hom_bunching() {
        // theta = pi/2 on |1,1> -> (|2,0> - |0,2>)/sqrt(2), no |1,1> left.
        let u = Mode::new(Port::A, 1);
        let v = Mode::new(Port::B, 1);
        let occ_in = Occupation::from_counts([(u, 1), (v, 1)]);
        let state = PureState::basis(occ_in.clone());
        let out =
            apply_mode_pair_unitary(&state, u, v, &rotation(std::f64::consts::FRAC_PI_2)).unwrap();
        let two_u = Occupation::from_counts([(u, 2)]);
        let two_v = Occupation::from_counts([(v, 2)]);
        assert!((out.amplitude(&two_u) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!((out.amplitude(&two_v) - c(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!(out.amplitude(&occ_in).norm() < 1e-12);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_unitary_rejected() {
        let u = Mode::new(Port::A, 1);
        let v = Mode::new(Port::B, 1);
        let state = PureState::basis(Occupation::single(u));
        let m = [[c(1.0, 0.0), C_ZERO], [C_ZERO, c(0.5, 0.0)]];
        match apply_mode_pair_unitary(&state, u, v, &m) {
            Err(Error::NonUnitaryMatrix { .. }) => {}
            other => panic!("expected NonUnitaryMatrix, got {other:?}"),
        }
        // The isometry variant accepts it.
        assert!(apply_mode_pair_isometry(&state, u, v, &m).is_ok());
    }

    #[test]
    fn tensor_vacuum_is_identity() {
        let a = PureState::basis(Occupation::single(Mode::new(Port::A, 1)));
        let vac = PureState::vacuum();
        let out = tensor(&a, &vac).unwrap();
        assert!(max_amplitude_diff(&a, &out) < 1e-15);
    }

    #[test]
    fn tensor_multiplies_norms() {
        let u = Mode::new(Port::A, 1);
        let v = Mode::new(Port::B, 1);
        let a = PureState::from_terms(
            vec![
                (Occupation::single(u), c(FRAC_1_SQRT_2, 0.0)),
                (Occupation::single(Mode::new(Port::A, 2)), c(0.0, FRAC_1_SQRT_2)),
            ],
            Limits::default(),
        )
        .unwrap();
        let b = PureState::from_terms(
            vec![
                (Occupation::single(v), c(0.6, 0.0)),
                (Occupation::single(Mode::new(Port::B, 2)), c(0.0, 0.8)),
            ],
            Limits::default(),
        )
        .unwrap();
        let out = tensor(&a, &b).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_rejects_mode_collision() {
        let a = PureState::basis(Occupation::single(Mode::new(Port::A, 1)));
        let b = PureState::basis(Occupation::single(Mode::new(Port::A, 1)));
        match tensor(&a, &b) {
            Err(Error::ModeCollision(_)) => {}
            other => panic!("expected ModeCollision, got {other:?}"),
        }
    }

    #[test]
    fn project_always_true_renormalizes() {
        let u = Mode::new(Port::A, 1);
        let state = PureState::basis(Occupation::single(u)).scaled(c(0.5, 0.0));
        let (out, p) = project(&state, |_| true).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn project_empty_is_error() {
        let state = PureState::basis(Occupation::from_counts([(Mode::new(Port::A, 1), 2)]));
        match project(&state, |occ| occ.total() >= 5) {
            Err(Error::EmptyProjection) => {}
            other => panic!("expected EmptyProjection, got {other:?}"),
        }
    }

    #[test]
    fn project_is_idempotent() {
        let u = Mode::new(Port::C, 1);
        let v = Mode::new(Port::D, 1);
        let w = Mode::new(Port::C, 2);
        let state = PureState::from_terms(
            vec![
                (Occupation::from_counts([(u, 1), (v, 1)]), c(0.5, 0.0)),
                (Occupation::from_counts([(w, 1), (v, 1)]), c(0.0, 0.5)),
                (Occupation::from_counts([(w, 2)]), c(0.5, 0.5)),
            ],
            Limits::default(),
        )
        .unwrap();
        let pred = |occ: &Occupation| occ.at_port(Port::C) >= 1 && occ.at_port(Port::D) >= 1;
        let (once, _) = project(&state, pred).unwrap();
        let (twice, p2) = project(&once, pred).unwrap();
        assert!((p2 - 1.0).abs() < 1e-12);
        assert!(max_amplitude_diff(&once, &twice) < 1e-12);
    }

    #[test]
    fn photon_number_conserved_per_term() {
        let u = Mode::new(Port::A, 1);
        let v = Mode::new(Port::B, 1);
        let state = PureState::basis(Occupation::from_counts([(u, 2), (v, 1)]));
        let out = apply_mode_pair_unitary(&state, u, v, &rotation(1.234)).unwrap();
        for (occ, _) in out.terms() {
            assert_eq!(occ.total(), 3);
        }
    }

    #[test]
    fn truncation_overflow_detected() {
        let u = Mode::new(Port::A, 1);
        let occ = Occupation::from_counts([(u, 5)]);
        match PureState::from_terms(vec![(occ, c(1.0, 0.0))], Limits::default()) {
            Err(Error::TruncationOverflow { .. }) => {}
            other => panic!("expected TruncationOverflow, got {other:?}"),
        }
    }

    #[test]
    fn mode_ordering_is_port_bin_branch() {
        let a1 = Mode::new(Port::A, 1);
        let a2 = Mode::new(Port::A, 2);
        let b1 = Mode::new(Port::B, 1);
        let a1o = Mode::new(Port::A, 1).orthogonal();
        assert!(a1 < a2);
        assert!(a2 < b1);
        assert!(a1 < a1o);
        assert!(a1o < a2);
    }
}
