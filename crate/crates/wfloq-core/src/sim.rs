//! Shot-based statevector simulator.
//!
//! Supports Y-rotations and CNOTs, exact Pauli expectations, seeded shot
//! sampling, and expectation estimation from a single counts table for any
//! set of observables with pairwise-disjoint supports.
//!
//! Bit order is little-endian throughout: qubit 0 is the least-significant
//! bit of a basis-state index, and the last character of a rendered
//! bitstring.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest simulable register; 2^22 amplitudes is 64 MiB.
pub const MAX_QUBITS: usize = 22;

/// A gate in the restricted set used by both encodings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    /// Rotation about Y: `[[cos t/2, -sin t/2], [sin t/2, cos t/2]]`.
    Ry { qubit: usize, angle: f64 },
    /// Controlled NOT.
    Cnot { control: usize, target: usize },
}

/// An ordered list of gates on a fixed-width register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    qubit_count: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubit_count: usize) -> Result<Self> {
        if qubit_count == 0 || qubit_count > MAX_QUBITS {
            return Err(Error::Capability(format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {qubit_count}"
            )));
        }
        Ok(Self {
            qubit_count,
            gates: Vec::new(),
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.qubit_count {
            return Err(Error::OutOfRange {
                index: qubit,
                len: self.qubit_count,
            });
        }
        Ok(())
    }

    pub fn ry(&mut self, qubit: usize, angle: f64) -> Result<&mut Self> {
        self.check_qubit(qubit)?;
        self.gates.push(Gate::Ry { qubit, angle });
        Ok(self)
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> Result<&mut Self> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::Config(
                "CNOT control and target must differ".into(),
            ));
        }
        self.gates.push(Gate::Cnot { control, target });
        Ok(self)
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.qubit_count > self.qubit_count {
            return Err(Error::Dimension {
                expected: self.qubit_count,
                got: other.qubit_count,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(self)
    }

    pub fn rotation_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Ry { .. }))
            .count()
    }

    pub fn cnot_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Cnot { .. }))
            .count()
    }

    /// One gate per line, for debugging.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for gate in &self.gates {
            match gate {
                Gate::Ry { qubit, angle } => out.push_str(&format!("ry {qubit} {angle:?}\n")),
                Gate::Cnot { control, target } => {
                    out.push_str(&format!("cnot {control} {target}\n"))
                }
            }
        }
        out
    }
}

/// Normalization tolerance for statevectors.
pub const NORM_TOL: f64 = 1e-10;

/// A `2^n` complex amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    qubit_count: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// The all-zeros computational basis state.
    pub fn zero_state(qubit_count: usize) -> Result<Self> {
        if qubit_count == 0 || qubit_count > MAX_QUBITS {
            return Err(Error::Capability(format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {qubit_count}"
            )));
        }
        let mut amplitudes = vec![Complex64::ZERO; 1 << qubit_count];
        amplitudes[0] = Complex64::ONE;
        Ok(Self {
            qubit_count,
            amplitudes,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::Ry { qubit, angle } => {
                if qubit >= self.qubit_count {
                    return Err(Error::OutOfRange {
                        index: qubit,
                        len: self.qubit_count,
                    });
                }
                let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
                let bit = 1usize << qubit;
                for base in 0..self.amplitudes.len() {
                    if base & bit != 0 {
                        continue;
                    }
                    let i0 = base;
                    let i1 = base | bit;
                    let a0 = self.amplitudes[i0];
                    let a1 = self.amplitudes[i1];
                    self.amplitudes[i0] = c * a0 - s * a1;
                    self.amplitudes[i1] = s * a0 + c * a1;
                }
            }
            Gate::Cnot { control, target } => {
                if control >= self.qubit_count || target >= self.qubit_count {
                    return Err(Error::OutOfRange {
                        index: control.max(target),
                        len: self.qubit_count,
                    });
                }
                if control == target {
                    return Err(Error::Config(
                        "CNOT control and target must differ".into(),
                    ));
                }
                let cbit = 1usize << control;
                let tbit = 1usize << target;
                for base in 0..self.amplitudes.len() {
                    // Visit each swapped pair once via the target-0 member.
                    if base & cbit != 0 && base & tbit == 0 {
                        self.amplitudes.swap(base, base | tbit);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Runs a circuit on `|0...0>` and returns the final state.
pub fn run_circuit(circuit: &Circuit) -> Result<Statevector> {
    let mut state = Statevector::zero_state(circuit.qubit_count())?;
    for gate in circuit.gates() {
        state.apply(gate)?;
    }
    Ok(state)
}

/// One letter of a Pauli string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(PauliLetter::I),
            'X' => Ok(PauliLetter::X),
            'Y' => Ok(PauliLetter::Y),
            'Z' => Ok(PauliLetter::Z),
            other => Err(Error::Parse(format!("unknown Pauli letter '{other}'"))),
        }
    }

    fn as_char(&self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }
}

/// An n-qubit Pauli operator, one letter per qubit (index = qubit).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliString {
    letters: Vec<PauliLetter>,
}

impl PauliString {
    pub fn new(letters: Vec<PauliLetter>) -> Self {
        Self { letters }
    }

    /// The identity on `n` qubits with `letter` at the given positions.
    pub fn from_support(n: usize, letter: PauliLetter, support: &[usize]) -> Result<Self> {
        let mut letters = vec![PauliLetter::I; n];
        for &q in support {
            if q >= n {
                return Err(Error::OutOfRange { index: q, len: n });
            }
            letters[q] = letter;
        }
        Ok(Self { letters })
    }

    /// Single-letter observable on one qubit.
    pub fn single(n: usize, qubit: usize, letter: PauliLetter) -> Result<Self> {
        Self::from_support(n, letter, &[qubit])
    }

    pub fn parse(text: &str) -> Result<Self> {
        let letters = text
            .chars()
            .map(PauliLetter::from_char)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { letters })
    }

    pub fn qubit_count(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[PauliLetter] {
        &self.letters
    }

    pub fn letter(&self, qubit: usize) -> PauliLetter {
        self.letters[qubit]
    }

    /// Qubits carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        self.letters
            .iter()
            .enumerate()
            .filter_map(|(q, &l)| (l != PauliLetter::I).then_some(q))
            .collect()
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&l| l != PauliLetter::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }
}

impl fmt::Display for PauliString {
    /// Letters in qubit order, qubit 0 first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for letter in &self.letters {
            write!(f, "{}", letter.as_char())?;
        }
        Ok(())
    }
}

/// Exact `<psi|P|psi>` without sampling.
///
/// The all-identity string returns 1 by definition.
pub fn exact_expectation(state: &Statevector, observable: &PauliString) -> Result<f64> {
    if observable.qubit_count() != state.qubit_count() {
        return Err(Error::Dimension {
            expected: state.qubit_count(),
            got: observable.qubit_count(),
        });
    }
    if observable.is_identity() {
        return Ok(1.0);
    }
    let mut flip_mask = 0usize;
    let mut z_mask = 0usize;
    let mut y_mask = 0usize;
    for (q, &letter) in observable.letters().iter().enumerate() {
        match letter {
            PauliLetter::I => {}
            PauliLetter::X => flip_mask |= 1 << q,
            PauliLetter::Y => {
                flip_mask |= 1 << q;
                y_mask |= 1 << q;
            }
            PauliLetter::Z => z_mask |= 1 << q,
        }
    }
    let y_count = y_mask.count_ones() as usize;
    // Global phase of the Y letters: Y = i * (flip) * (phase per set bit).
    let i_power = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut total = Complex64::ZERO;
    for (index, amp) in state.amplitudes().iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        // (P|psi>)_target picks up amplitude from `index`, with sign from Z/Y
        // bits of `index` and the i-power from the Y count.
        let target = index ^ flip_mask;
        let z_sign = if ((index & z_mask).count_ones()
            + (index & y_mask).count_ones()) % 2
            == 0
        {
            1.0
        } else {
            -1.0
        };
        let phase = i_power[y_count % 4] * z_sign;
        total += state.amplitudes()[target].conj() * phase * amp;
    }
    Ok(total.re)
}

/// Histogram of measured bitstrings over a number of shots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsTable {
    qubit_count: usize,
    shots: u64,
    counts: BTreeMap<u64, u64>,
}

impl CountsTable {
    pub fn new(qubit_count: usize, counts: BTreeMap<u64, u64>) -> Result<Self> {
        let shots = counts.values().sum();
        if shots == 0 {
            return Err(Error::Domain("counts table must hold at least one shot".into()));
        }
        if counts.keys().any(|&k| k >> qubit_count != 0) {
            return Err(Error::Domain(
                "outcome exceeds the register width".into(),
            ));
        }
        Ok(Self {
            qubit_count,
            shots,
            counts,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    /// Outcomes and counts, keyed by basis-state index.
    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    /// Renders an outcome as a bitstring, qubit `n-1` first (so qubit 0 is
    /// the last character, keeping the little-endian convention readable).
    pub fn bit_string(&self, outcome: u64) -> String {
        (0..self.qubit_count)
            .rev()
            .map(|q| if outcome >> q & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// CSV document with a `bitstring,count` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bitstring,count\n");
        for (&outcome, &count) in &self.counts {
            out.push_str(&format!("{},{}\n", self.bit_string(outcome), count));
        }
        out
    }
}

/// Draws `shots` independent basis outcomes from `|amplitude|^2`.
/// Deterministic for a fixed seed.
pub fn sample_counts(state: &Statevector, shots: u64, seed: u64) -> Result<CountsTable> {
    if shots == 0 {
        return Err(Error::Domain("shot count must be >= 1".into()));
    }
    let mut cumulative = Vec::with_capacity(state.amplitudes().len());
    let mut acc = 0.0;
    for amp in state.amplitudes() {
        acc += amp.norm_sqr();
        cumulative.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for _ in 0..shots {
        let draw: f64 = rng.random::<f64>() * total;
        let outcome = cumulative.partition_point(|&c| c <= draw);
        let outcome = outcome.min(cumulative.len() - 1) as u64;
        *counts.entry(outcome).or_insert(0) += 1;
    }
    CountsTable::new(state.qubit_count(), counts)
}

/// Signed parity average over the support qubits:
/// `(1/S) sum_outcomes (-1)^(ones on support) * count`.
pub fn expectation_from_counts(counts: &CountsTable, support: &[usize]) -> Result<f64> {
    if support.is_empty() {
        return Err(Error::Domain("observable support must be non-empty".into()));
    }
    let mut mask = 0u64;
    for &q in support {
        if q >= counts.qubit_count() {
            return Err(Error::OutOfRange {
                index: q,
                len: counts.qubit_count(),
            });
        }
        mask |= 1 << q;
    }
    let mut signed = 0i64;
    for (&outcome, &count) in counts.counts() {
        if (outcome & mask).count_ones() % 2 == 0 {
            signed += count as i64;
        } else {
            signed -= count as i64;
        }
    }
    Ok(signed as f64 / counts.shots() as f64)
}

/// Expectations of several observables from one counts table.
///
/// The observables must have pairwise-disjoint supports, and the counts must
/// have been taken in a basis compatible with all of them (see
/// [`basis_plan`]). Each value equals [`expectation_from_counts`] on the
/// observable's support.
pub fn multi_expectations(
    counts: &CountsTable,
    observables: &[PauliString],
) -> Result<Vec<f64>> {
    let mut used = 0u64;
    for obs in observables {
        let mut mask = 0u64;
        for q in obs.support() {
            mask |= 1 << q;
        }
        if mask == 0 {
            return Err(Error::Domain("observable support must be non-empty".into()));
        }
        if used & mask != 0 {
            return Err(Error::Config(
                "observables measured together must not share qubits".into(),
            ));
        }
        used |= mask;
    }
    observables
        .iter()
        .map(|obs| expectation_from_counts(counts, &obs.support()))
        .collect()
}

/// Pre-measurement circuit rotating every X-measured qubit into the Z basis.
///
/// Appending `RY(-pi/2)` on a qubit maps a Z measurement to an X measurement
/// of the original state; Z-measured qubits need nothing. Y letters are not
/// supported by either encoding's measurement step.
pub fn basis_plan(qubit_count: usize, observables: &[PauliString]) -> Result<Circuit> {
    let mut circuit = Circuit::new(qubit_count)?;
    let mut used = vec![false; qubit_count];
    for obs in observables {
        if obs.qubit_count() != qubit_count {
            return Err(Error::Dimension {
                expected: qubit_count,
                got: obs.qubit_count(),
            });
        }
        for q in obs.support() {
            if used[q] {
                return Err(Error::Config(
                    "observables measured together must not share qubits".into(),
                ));
            }
            used[q] = true;
            match obs.letter(q) {
                PauliLetter::Z => {}
                PauliLetter::X => {
                    circuit.ry(q, -std::f64::consts::FRAC_PI_2)?;
                }
                PauliLetter::Y => {
                    return Err(Error::Capability(
                        "Y-basis measurement is not supported".into(),
                    ));
                }
                PauliLetter::I => unreachable!("support excludes identities"),
            }
        }
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn ry_state(angle: f64) -> Statevector {
        let mut c = Circuit::new(1).unwrap();
        c.ry(0, angle).unwrap();
        run_circuit(&c).unwrap()
    }

    #[test]
    fn identity_rotation_keeps_zero_state() {
        let state = ry_state(0.0);
        assert_relative_eq!(state.amplitudes()[0].re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(state.amplitudes()[1].re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn pi_rotation_flips_to_one() {
        let state = ry_state(PI);
        assert!(state.amplitudes()[0].norm() < 1e-15);
        assert_relative_eq!(state.amplitudes()[1].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn bell_like_state_from_ry_and_cnot() {
        let mut c = Circuit::new(2).unwrap();
        c.ry(0, FRAC_PI_2).unwrap();
        c.cnot(0, 1).unwrap();
        let state = run_circuit(&c).unwrap();
        let r = 1.0 / 2f64.sqrt();
        let expect = [r, 0.0, 0.0, r];
        for (amp, want) in state.amplitudes().iter().zip(expect) {
            assert_relative_eq!(amp.re, want, epsilon = 1e-15);
            assert_relative_eq!(amp.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn gates_preserve_norm() {
        let mut c = Circuit::new(4).unwrap();
        c.ry(0, 0.3).unwrap();
        c.ry(2, 2.1).unwrap();
        c.cnot(0, 3).unwrap();
        c.ry(3, -1.2).unwrap();
        c.cnot(2, 1).unwrap();
        let state = run_circuit(&c).unwrap();
        assert_relative_eq!(state.norm_sqr(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn expectation_of_z_on_zero_state() {
        let state = Statevector::zero_state(1).unwrap();
        let z = PauliString::parse("Z").unwrap();
        assert_relative_eq!(exact_expectation(&state, &z).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rotation_expectations_are_cos_and_sin() {
        let z = PauliString::parse("Z").unwrap();
        let x = PauliString::parse("X").unwrap();
        for step in 0..100 {
            let theta = step as f64 * 2.0 * PI / 100.0;
            let state = ry_state(theta);
            assert_relative_eq!(
                exact_expectation(&state, &z).unwrap(),
                theta.cos(),
                epsilon = 1e-12
            );
            assert_relative_eq!(
                exact_expectation(&state, &x).unwrap(),
                theta.sin(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn bell_state_zz_expectation() {
        let mut c = Circuit::new(2).unwrap();
        c.ry(0, FRAC_PI_2).unwrap();
        c.cnot(0, 1).unwrap();
        let state = run_circuit(&c).unwrap();
        let zz = PauliString::parse("ZZ").unwrap();
        assert_relative_eq!(exact_expectation(&state, &zz).unwrap(), 1.0, epsilon = 1e-12);
        // Single-qubit marginals vanish.
        let zi = PauliString::parse("ZI").unwrap();
        assert!(exact_expectation(&state, &zi).unwrap().abs() < 1e-12);
    }

    #[test]
    fn yy_expectation_on_bell_state() {
        let mut c = Circuit::new(2).unwrap();
        c.ry(0, FRAC_PI_2).unwrap();
        c.cnot(0, 1).unwrap();
        let state = run_circuit(&c).unwrap();
        let yy = PauliString::parse("YY").unwrap();
        // (|00> + |11>)/sqrt(2): <YY> = -1.
        assert_relative_eq!(exact_expectation(&state, &yy).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn all_identity_expectation_is_one() {
        let state = ry_state(1.234);
        let id = PauliString::parse("I").unwrap();
        assert_eq!(exact_expectation(&state, &id).unwrap(), 1.0);
    }

    #[test]
    fn expectations_stay_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let mut c = Circuit::new(3).unwrap();
            for q in 0..3 {
                c.ry(q, rng.random_range(0.0..2.0 * PI)).unwrap();
            }
            c.cnot(0, 1).unwrap();
            c.cnot(1, 2).unwrap();
            let state = run_circuit(&c).unwrap();
            for text in ["ZII", "XXI", "ZYY", "XZX", "YYY"] {
                let p = PauliString::parse(text).unwrap();
                let e = exact_expectation(&state, &p).unwrap();
                assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&e), "{text} -> {e}");
            }
        }
    }

    #[test]
    fn sampling_zero_state_hits_zero_string() {
        let state = Statevector::zero_state(3).unwrap();
        let counts = sample_counts(&state, 500, 1).unwrap();
        assert_eq!(counts.shots(), 500);
        assert_eq!(counts.counts().len(), 1);
        assert_eq!(counts.counts()[&0], 500);
    }

    #[test]
    fn sampling_uniform_superposition_is_balanced() {
        let state = ry_state(FRAC_PI_2);
        let shots = 1_000_000u64;
        let counts = sample_counts(&state, shots, 42).unwrap();
        let ones = *counts.counts().get(&1).unwrap_or(&0) as f64;
        let sigma = (shots as f64 * 0.25).sqrt();
        assert!((ones - shots as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let state = ry_state(1.0);
        let a = sample_counts(&state, 4096, 7).unwrap();
        let b = sample_counts(&state, 4096, 7).unwrap();
        assert_eq!(a, b);
        let c = sample_counts(&state, 4096, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_shots_rejected() {
        let state = Statevector::zero_state(1).unwrap();
        assert!(sample_counts(&state, 0, 1).is_err());
    }

    fn table(entries: &[(&str, u64)]) -> CountsTable {
        let n = entries[0].0.len();
        let mut counts = BTreeMap::new();
        for &(s, c) in entries {
            let outcome = u64::from_str_radix(s, 2).unwrap();
            counts.insert(outcome, c);
        }
        CountsTable::new(n, counts).unwrap()
    }

    #[test]
    fn parity_average_on_single_qubit_support() {
        let counts = table(&[("00", 50), ("11", 50)]);
        assert_eq!(expectation_from_counts(&counts, &[0]).unwrap(), 0.0);
        assert_eq!(expectation_from_counts(&counts, &[0, 1]).unwrap(), 1.0);
    }

    #[test]
    fn empty_support_rejected() {
        let counts = table(&[("0", 10)]);
        assert!(expectation_from_counts(&counts, &[]).is_err());
    }

    #[test]
    fn parity_average_matches_independent_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut counts = BTreeMap::new();
        for outcome in 0..16u64 {
            counts.insert(outcome, rng.random_range(0..100));
        }
        let counts = CountsTable::new(4, counts).unwrap();
        let support = vec![1, 3];
        // Oracle: direct loop over outcomes.
        let mut acc = 0.0;
        for (&outcome, &c) in counts.counts() {
            let ones = (outcome >> 1 & 1) + (outcome >> 3 & 1);
            let sign = if ones % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * c as f64;
        }
        let expected = acc / counts.shots() as f64;
        assert_relative_eq!(
            expectation_from_counts(&counts, &support).unwrap(),
            expected,
            epsilon = 1e-15
        );
    }

    #[test]
    fn multi_expectations_single_outcome() {
        let counts = table(&[("01", 100)]);
        let z0 = PauliString::single(2, 0, PauliLetter::Z).unwrap();
        let z1 = PauliString::single(2, 1, PauliLetter::Z).unwrap();
        // Outcome "01": qubit 0 reads 1 -> -1, qubit 1 reads 0 -> +1.
        let values = multi_expectations(&counts, &[z0, z1]).unwrap();
        assert_eq!(values, vec![-1.0, 1.0]);
    }

    #[test]
    fn multi_expectations_balanced_table() {
        let counts = table(&[("00", 50), ("11", 50)]);
        let z0 = PauliString::single(2, 0, PauliLetter::Z).unwrap();
        let z1 = PauliString::single(2, 1, PauliLetter::Z).unwrap();
        assert_eq!(multi_expectations(&counts, &[z0, z1]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn overlapping_supports_rejected() {
        let counts = table(&[("00", 1)]);
        let z0 = PauliString::single(2, 0, PauliLetter::Z).unwrap();
        let x0 = PauliString::single(2, 0, PauliLetter::X).unwrap();
        assert!(multi_expectations(&counts, &[z0, x0]).is_err());
    }

    #[test]
    fn multi_expectations_equal_per_support_values() {
        let state = {
            let mut c = Circuit::new(4).unwrap();
            for q in 0..4 {
                c.ry(q, 0.3 + q as f64).unwrap();
            }
            run_circuit(&c).unwrap()
        };
        let counts = sample_counts(&state, 4096, 5).unwrap();
        let observables: Vec<PauliString> = (0..4)
            .map(|q| PauliString::single(4, q, PauliLetter::Z).unwrap())
            .collect();
        let joint = multi_expectations(&counts, &observables).unwrap();
        for (q, obs) in observables.iter().enumerate() {
            let single = expectation_from_counts(&counts, &obs.support()).unwrap();
            assert_eq!(joint[q], single);
        }
    }

    #[test]
    fn basis_plan_all_z_is_empty() {
        let z0 = PauliString::single(3, 0, PauliLetter::Z).unwrap();
        let z2 = PauliString::single(3, 2, PauliLetter::Z).unwrap();
        let plan = basis_plan(3, &[z0, z2]).unwrap();
        assert!(plan.gates().is_empty());
    }

    #[test]
    fn basis_plan_rotates_only_x_qubits() {
        let x0 = PauliString::single(2, 0, PauliLetter::X).unwrap();
        let z1 = PauliString::single(2, 1, PauliLetter::Z).unwrap();
        let plan = basis_plan(2, &[x0, z1]).unwrap();
        assert_eq!(plan.gates().len(), 1);
        assert!(matches!(
            plan.gates()[0],
            Gate::Ry { qubit: 0, angle } if (angle + FRAC_PI_2).abs() < 1e-15
        ));
    }

    #[test]
    fn basis_plan_conjugation_identity() {
        // <X> before the plan equals <Z> after it, checked numerically.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let theta = rng.random_range(0.0..2.0 * PI);
            let mut c = Circuit::new(1).unwrap();
            c.ry(0, theta).unwrap();
            let bare = run_circuit(&c).unwrap();
            let x = PauliString::parse("X").unwrap();
            let before = exact_expectation(&bare, &x).unwrap();

            let plan = basis_plan(1, &[x.clone()]).unwrap();
            let mut with_plan = c.clone();
            with_plan.extend(&plan).unwrap();
            let rotated = run_circuit(&with_plan).unwrap();
            let z = PauliString::parse("Z").unwrap();
            let after = exact_expectation(&rotated, &z).unwrap();
            assert_relative_eq!(before, after, epsilon = 1e-12);
        }
    }

    #[test]
    fn basis_plan_rejects_y() {
        let y0 = PauliString::single(1, 0, PauliLetter::Y).unwrap();
        assert!(basis_plan(1, &[y0]).is_err());
    }

    #[test]
    fn counts_csv_renders_bitstrings_msb_first() {
        let counts = table(&[("01", 3), ("10", 7)]);
        let csv = counts.to_csv();
        assert_eq!(csv, "bitstring,count\n01,3\n10,7\n");
    }

    #[test]
    fn circuit_text_format() {
        let mut c = Circuit::new(2).unwrap();
        c.ry(0, 0.5).unwrap();
        c.cnot(0, 1).unwrap();
        assert_eq!(c.to_text(), "ry 0 0.5\ncnot 0 1\n");
    }

    #[test]
    fn circuit_rejects_bad_indices() {
        let mut c = Circuit::new(2).unwrap();
        assert!(c.ry(2, 0.1).is_err());
        assert!(c.cnot(0, 0).is_err());
        assert!(Circuit::new(MAX_QUBITS + 1).is_err());
    }
}
