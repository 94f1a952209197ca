//! Dense statevector simulation for the handful of gates the feature map needs.
//!
//! Basis index `b` stores qubit `k` in bit `k` (qubit 0 is the least
//! significant bit). Phase gates use the positive-exponent convention
//! `exp(+i·θ·Z)`, not `RZ(θ) = exp(-i·θ·Z/2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 20;

/// Pure state of `num_qubits` qubits stored as `2^num_qubits` amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn check_qubit_count(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::config(format!("qubit count must be in 1..={MAX_QUBITS}, got {num_qubits}")));
    }
    Ok(())
}

impl QuantumState {
    /// The all-zeros basis state `|0…0⟩`.
    pub fn zero_state(num_qubits: usize) -> Result<Self> {
        check_qubit_count(num_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    /// Builds a state from raw amplitudes, rescaling them to unit norm.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::arg(format!("amplitude count must be a power of two >= 2, got {len}")));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_qubit_count(num_qubits)?;
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::arg("non-finite amplitude"));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::arg("zero vector is not a state"));
        }
        Ok(Self { num_qubits, amplitudes: amplitudes.into_iter().map(|a| a / norm).collect() })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Born-rule probabilities of every computational basis outcome.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::arg(format!(
                "qubit {qubit} out of range for {}-qubit state",
                self.num_qubits
            )));
        }
        Ok(())
    }

    pub fn apply_hadamard(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let stride = 1usize << qubit;
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        for block in self.amplitudes.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = (x + y) * scale;
                *a1 = (x - y) * scale;
            }
        }
        Ok(())
    }

    /// Applies `exp(i·angle·Z_qubit)`.
    pub fn apply_phase_z(&mut self, qubit: usize, angle: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        if !angle.is_finite() {
            return Err(Error::arg(format!("non-finite phase angle {angle}")));
        }
        let plus = Complex64::from_polar(1.0, angle);
        let minus = plus.conj();
        for (b, amp) in self.amplitudes.iter_mut().enumerate() {
            *amp *= if (b >> qubit) & 1 == 0 { plus } else { minus };
        }
        Ok(())
    }

    /// Applies `exp(i·angle·Z_a·Z_b)`.
    pub fn apply_zz_phase(&mut self, qubit_a: usize, qubit_b: usize, angle: f64) -> Result<()> {
        self.check_qubit(qubit_a)?;
        self.check_qubit(qubit_b)?;
        if qubit_a == qubit_b {
            return Err(Error::arg(format!("ZZ phase needs two distinct qubits, got {qubit_a} twice")));
        }
        if !angle.is_finite() {
            return Err(Error::arg(format!("non-finite phase angle {angle}")));
        }
        let plus = Complex64::from_polar(1.0, angle);
        let minus = plus.conj();
        for (b, amp) in self.amplitudes.iter_mut().enumerate() {
            let parity = ((b >> qubit_a) ^ (b >> qubit_b)) & 1;
            *amp *= if parity == 0 { plus } else { minus };
        }
        Ok(())
    }

    /// `⟨self|other⟩ = Σ conj(self_k)·other_k`.
    pub fn inner_product(&self, other: &QuantumState) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::arg(format!(
                "inner product of {}-qubit and {}-qubit states",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// Squared overlap `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &QuantumState) -> Result<f64> {
        Ok(self.inner_product(other)?.norm_sqr())
    }
}

/// One gate of the encoding circuits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Hadamard(usize),
    PhaseZ(usize, f64),
    ZzPhase(usize, usize, f64),
}

impl Gate {
    pub fn inverse(self) -> Gate {
        match self {
            Gate::Hadamard(q) => Gate::Hadamard(q),
            Gate::PhaseZ(q, t) => Gate::PhaseZ(q, -t),
            Gate::ZzPhase(a, b, t) => Gate::ZzPhase(a, b, -t),
        }
    }
}

impl QuantumState {
    pub fn apply(&mut self, gate: Gate) -> Result<()> {
        match gate {
            Gate::Hadamard(q) => self.apply_hadamard(q),
            Gate::PhaseZ(q, t) => self.apply_phase_z(q, t),
            Gate::ZzPhase(a, b, t) => self.apply_zz_phase(a, b, t),
        }
    }

    pub fn apply_all(&mut self, gates: &[Gate]) -> Result<()> {
        gates.iter().try_for_each(|&g| self.apply(g))
    }

    /// Applies the adjoint of the circuit `gates`.
    pub fn apply_all_inverse(&mut self, gates: &[Gate]) -> Result<()> {
        gates.iter().rev().try_for_each(|&g| self.apply(g.inverse()))
    }
}
