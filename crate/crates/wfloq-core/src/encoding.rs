//! Variable-to-observable encodings.
//!
//! PCE maps binary variables to k-body Pauli correlators over the X, Y and Z
//! blocks (capacity `3 * C(n, k)`), read out from a layered hardware-style
//! ansatz. SQOE maps two variables per qubit to the Z and transformed-X
//! expectations of a single Y-rotation, so one parameter drives two spins and
//! any number of qubits can serve a problem by cycling parameter batches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farm::Layout;
use crate::qubo::SpinVector;
use crate::sim::{
    multi_expectations, run_circuit, sample_counts, Circuit, PauliLetter, PauliString, MAX_QUBITS,
};

/// Default step-function scale `t` for decoding spins.
pub const DEFAULT_STEP_SCALE: f64 = 5.0;

/// Which encoding produced a variable map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    Pce,
    Sqoe,
}

/// Per-variable observable assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingMap {
    pub kind: EncodingKind,
    observables: Vec<PauliString>,
}

impl EncodingMap {
    pub fn observables(&self) -> &[PauliString] {
        &self.observables
    }

    pub fn variable_count(&self) -> usize {
        self.observables.len()
    }

    /// Text form, one `index pauli` line per variable.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, obs) in self.observables.iter().enumerate() {
            out.push_str(&format!("{i} {obs}\n"));
        }
        out
    }

    pub fn from_text(kind: EncodingKind, text: &str) -> Result<Self> {
        let mut observables = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let index: usize = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("line {lineno}: missing index")))?
                .parse()
                .map_err(|e| Error::Parse(format!("line {lineno}: {e}")))?;
            if index != observables.len() {
                return Err(Error::Parse(format!(
                    "line {lineno}: expected variable {} next",
                    observables.len()
                )));
            }
            let pauli = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("line {lineno}: missing Pauli string")))?;
            observables.push(PauliString::parse(pauli)?);
        }
        Ok(Self { kind, observables })
    }
}

/// Binomial coefficient, saturating at `usize::MAX`.
fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// PCE shape parameters: `n` qubits, correlator body size `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PceConfig {
    pub qubits: usize,
    pub body: usize,
}

impl PceConfig {
    pub fn new(qubits: usize, body: usize) -> Result<Self> {
        if body == 0 || body > qubits {
            return Err(Error::Config(format!(
                "correlator body must lie in 1..=qubits, got k={body}, n={qubits}"
            )));
        }
        if qubits > MAX_QUBITS {
            return Err(Error::Capability(format!(
                "{qubits} qubits exceed the {MAX_QUBITS}-qubit simulator limit"
            )));
        }
        Ok(Self { qubits, body })
    }

    /// Number of distinct correlators: `3 * C(n, k)`.
    pub fn capacity(&self) -> usize {
        pce_capacity(self.qubits, self.body)
    }
}

/// Total PCE capacity `3 * C(n, k)`.
pub fn pce_capacity(n: usize, k: usize) -> usize {
    binomial(n, k).saturating_mul(3)
}

/// Smallest qubit count whose capacity covers `variables` at body size `k`.
pub fn pce_minimal_qubits(variables: usize, k: usize) -> Result<usize> {
    for n in k.max(1)..=MAX_QUBITS {
        if pce_capacity(n, k) >= variables {
            return Ok(n);
        }
    }
    Err(Error::Capability(format!(
        "no register up to {MAX_QUBITS} qubits offers 3*C(n,{k}) >= {variables}"
    )))
}

/// Lexicographic k-subsets of `0..n`.
fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        current[i] += 1;
        for j in (i + 1)..k {
            current[j] = current[j - 1] + 1;
        }
    }
}

/// Enumerates the first `count` weight-k correlators: the X block, then the
/// Y block, then the Z block, each over lexicographic support positions.
pub fn pce_enumerate(n: usize, k: usize, count: usize) -> Result<EncodingMap> {
    let config = PceConfig::new(n, k)?;
    if config.capacity() < count {
        return Err(Error::Capability(format!(
            "PCE capacity 3*C({n},{k}) = {} cannot host {count} variables",
            config.capacity()
        )));
    }
    let supports = k_subsets(n, k);
    let mut observables = Vec::with_capacity(count);
    'blocks: for letter in [PauliLetter::X, PauliLetter::Y, PauliLetter::Z] {
        for support in &supports {
            if observables.len() == count {
                break 'blocks;
            }
            observables.push(PauliString::from_support(n, letter, support)?);
        }
    }
    Ok(EncodingMap {
        kind: EncodingKind::Pce,
        observables,
    })
}

/// Parameterized circuit template: rotations reference a parameter slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AnsatzOp {
    Ry { qubit: usize, parameter: usize },
    Cnot { control: usize, target: usize },
}

/// The PCE ansatz skeleton plus its parameter count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzTemplate {
    qubit_count: usize,
    parameter_count: usize,
    ops: Vec<AnsatzOp>,
}

impl AnsatzTemplate {
    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_count
    }

    pub fn ops(&self) -> &[AnsatzOp] {
        &self.ops
    }

    pub fn rotation_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, AnsatzOp::Ry { .. }))
            .count()
    }

    pub fn cnot_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, AnsatzOp::Cnot { .. }))
            .count()
    }

    /// Binds parameter values into a concrete circuit.
    pub fn bind(&self, parameters: &[f64]) -> Result<Circuit> {
        if parameters.len() != self.parameter_count {
            return Err(Error::Dimension {
                expected: self.parameter_count,
                got: parameters.len(),
            });
        }
        let mut circuit = Circuit::new(self.qubit_count)?;
        for op in &self.ops {
            match *op {
                AnsatzOp::Ry { qubit, parameter } => {
                    circuit.ry(qubit, parameters[parameter])?;
                }
                AnsatzOp::Cnot { control, target } => {
                    circuit.cnot(control, target)?;
                }
            }
        }
        Ok(circuit)
    }
}

/// Builds the layered PCE ansatz: `k + 1` blocks, each a per-qubit RY layer,
/// a linear CNOT chain, and a second RY layer.
///
/// Totals `2(k+1)n` rotations and `(k+1)(n-1)` CNOTs.
pub fn pce_build_ansatz(n: usize, k: usize) -> Result<AnsatzTemplate> {
    if n < 2 {
        return Err(Error::Config(
            "the entangling ansatz needs at least 2 qubits".into(),
        ));
    }
    if n > MAX_QUBITS {
        return Err(Error::Capability(format!(
            "{n} qubits exceed the {MAX_QUBITS}-qubit simulator limit"
        )));
    }
    let blocks = k + 1;
    let mut ops = Vec::new();
    let mut parameter = 0;
    for _ in 0..blocks {
        for qubit in 0..n {
            ops.push(AnsatzOp::Ry { qubit, parameter });
            parameter += 1;
        }
        for qubit in 0..(n - 1) {
            ops.push(AnsatzOp::Cnot {
                control: qubit,
                target: qubit + 1,
            });
        }
        for qubit in 0..n {
            ops.push(AnsatzOp::Ry { qubit, parameter });
            parameter += 1;
        }
    }
    Ok(AnsatzTemplate {
        qubit_count: n,
        parameter_count: parameter,
        ops,
    })
}

/// Which single-qubit observable a variable reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotAxis {
    Z,
    X,
}

/// The transformed X readout: `sin(scale * (theta - shift))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XTransform {
    pub scale: f64,
    pub shift: f64,
}

impl Default for XTransform {
    fn default() -> Self {
        Self {
            scale: 0.3,
            shift: 3.5,
        }
    }
}

/// SQOE assignment: one rotation parameter per pair of variables, cycled over
/// `qubits` physical qubits in batches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqoeConfig {
    qubits: usize,
    variable_count: usize,
    pub transform: XTransform,
    pub step_scale: f64,
}

impl SqoeConfig {
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    /// Length of the persistent parameter store: one angle per variable pair.
    pub fn parameter_count(&self) -> usize {
        self.variable_count.div_ceil(2)
    }

    /// Number of circuit batches needed to read every variable once.
    pub fn batch_count(&self) -> usize {
        self.parameter_count().div_ceil(self.qubits)
    }

    /// Physical qubit hosting a parameter within its batch.
    pub fn parameter_qubit(&self, parameter: usize) -> usize {
        parameter % self.qubits
    }

    pub fn parameter_batch(&self, parameter: usize) -> usize {
        parameter / self.qubits
    }

    /// The variables driven by one parameter: `2m` on the Z slot and, when
    /// present, `2m + 1` on the X slot.
    pub fn variables_of_parameter(&self, parameter: usize) -> (usize, Option<usize>) {
        let z = 2 * parameter;
        let x = z + 1;
        (z, (x < self.variable_count).then_some(x))
    }

    /// Slot of a variable: (parameter, qubit, axis).
    pub fn slot(&self, variable: usize) -> (usize, usize, SlotAxis) {
        let parameter = variable / 2;
        let axis = if variable % 2 == 0 {
            SlotAxis::Z
        } else {
            SlotAxis::X
        };
        (parameter, self.parameter_qubit(parameter), axis)
    }

    /// Raw readout of one slot at angle `theta`.
    pub fn slot_value(&self, axis: SlotAxis, theta: f64) -> f64 {
        match axis {
            SlotAxis::Z => theta.cos(),
            SlotAxis::X => (self.transform.scale * (theta - self.transform.shift)).sin(),
        }
    }

    /// The per-variable observable map (slot qubits within a batch).
    pub fn encoding_map(&self) -> EncodingMap {
        let observables = (0..self.variable_count)
            .map(|v| {
                let (_, qubit, axis) = self.slot(v);
                let letter = match axis {
                    SlotAxis::Z => PauliLetter::Z,
                    SlotAxis::X => PauliLetter::X,
                };
                PauliString::single(self.qubits, qubit, letter)
                    .expect("slot qubits are in range by construction")
            })
            .collect();
        EncodingMap {
            kind: EncodingKind::Sqoe,
            observables,
        }
    }
}

/// Assigns `variable_count` variables to Z/X slots over `qubits` qubits.
///
/// Variable `2m` reads the Z slot of parameter `m` and variable `2m + 1` its
/// transformed X slot. With fewer than `ceil(N/2)` qubits the parameters
/// cycle through circuit batches against the persistent store.
pub fn sqoe_assign(variable_count: usize, qubits: usize) -> Result<SqoeConfig> {
    if qubits == 0 {
        return Err(Error::Config("SQOE needs at least one qubit".into()));
    }
    if qubits > MAX_QUBITS {
        return Err(Error::Capability(format!(
            "{qubits} qubits exceed the {MAX_QUBITS}-qubit simulator limit"
        )));
    }
    if variable_count == 0 {
        return Err(Error::Config("no variables to encode".into()));
    }
    Ok(SqoeConfig {
        qubits,
        variable_count,
        transform: XTransform::default(),
        step_scale: DEFAULT_STEP_SCALE,
    })
}

/// Analytic raw values for every variable: `cos(theta_m)` on Z slots and
/// `sin(scale (theta_m - shift))` on X slots.
pub fn sqoe_expectations(config: &SqoeConfig, theta: &[f64]) -> Result<Vec<f64>> {
    if theta.len() != config.parameter_count() {
        return Err(Error::Dimension {
            expected: config.parameter_count(),
            got: theta.len(),
        });
    }
    Ok((0..config.variable_count())
        .map(|v| {
            let (parameter, _, axis) = config.slot(v);
            config.slot_value(axis, theta[parameter])
        })
        .collect())
}

/// Shot-based raw values: per batch, the Z slots come from the counts of one
/// `RY(theta)` product circuit and the X slots from the counts of a second
/// circuit rotated by the transformed angles, both read as per-qubit Z
/// parities from a single counts table each.
pub fn sqoe_expectations_sampled(
    config: &SqoeConfig,
    theta: &[f64],
    shots: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    if theta.len() != config.parameter_count() {
        return Err(Error::Dimension {
            expected: config.parameter_count(),
            got: theta.len(),
        });
    }
    let mut raw = vec![0.0; config.variable_count()];
    for batch in 0..config.batch_count() {
        let first = batch * config.qubits();
        let last = (first + config.qubits()).min(config.parameter_count());
        let params = first..last;

        let mut z_circuit = Circuit::new(config.qubits())?;
        let mut x_circuit = Circuit::new(config.qubits())?;
        for m in params.clone() {
            let qubit = config.parameter_qubit(m);
            z_circuit.ry(qubit, theta[m])?;
            // <Z> of RY(phi - pi/2) equals sin(phi), the transformed X readout,
            // keeping one rotation per qubit.
            x_circuit.ry(
                qubit,
                config.transform.scale * (theta[m] - config.transform.shift)
                    - std::f64::consts::FRAC_PI_2,
            )?;
        }
        let observables: Vec<PauliString> = params
            .clone()
            .map(|m| {
                PauliString::single(config.qubits(), config.parameter_qubit(m), PauliLetter::Z)
            })
            .collect::<Result<_>>()?;

        let z_seed = seed.wrapping_add(2 * batch as u64);
        let x_seed = seed.wrapping_add(2 * batch as u64 + 1);
        let z_counts = sample_counts(&run_circuit(&z_circuit)?, shots, z_seed)?;
        let z_values = multi_expectations(&z_counts, &observables)?;
        let x_counts = sample_counts(&run_circuit(&x_circuit)?, shots, x_seed)?;
        let x_values = multi_expectations(&x_counts, &observables)?;

        for (offset, m) in params.enumerate() {
            let (z_var, x_var) = config.variables_of_parameter(m);
            raw[z_var] = z_values[offset];
            if let Some(x_var) = x_var {
                raw[x_var] = x_values[offset];
            }
        }
    }
    Ok(raw)
}

/// Decodes raw observable values into a relaxed spin vector
/// `s_i = tanh(t * raw_i)` and a rounded layout (`raw_i > 0` occupies the
/// site; a raw value of exactly zero rounds down).
pub fn decode_spins(raw: &[f64], step_scale: f64) -> Result<(SpinVector, Layout)> {
    if !(step_scale > 0.0) {
        return Err(Error::Config(format!(
            "step scale must be positive, got {step_scale}"
        )));
    }
    let relaxed = SpinVector::new(raw.iter().map(|&r| (step_scale * r).tanh()).collect())?;
    let layout = Layout::from_bools(raw.iter().map(|&r| r > 0.0).collect());
    Ok((relaxed, layout))
}
