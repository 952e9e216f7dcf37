"""Brute-force statevector oracle: exact amplitudes, distributions and expectations.

Amplitude index x has qubit 0 as its most significant bit, the convention
shared by every module.
"""
import math
from dataclasses import dataclass

import numpy as np

from scpsim import bits, defaults, kernels
from scpsim.circuit import PHASE8, PauliZMask
from scpsim.errors import CapacityError, ValidationError

_H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]])
OMEGA = np.exp(1j * np.pi / 4)


@dataclass(frozen=True, eq=False)
class StateVector:
    n: int
    amps: np.ndarray

    def probabilities(self):
        return np.abs(self.amps) ** 2

    def norm(self):
        return float(np.sqrt(np.sum(self.probabilities())))


@dataclass(frozen=True, eq=False)
class OutputDistribution:
    m: int
    probs: np.ndarray

    def pauli_expectation(self, s):
        s = bits.to_int(s)
        signs = 1.0 - 2.0 * kernels.masked_parity(np.arange(1 << self.m, dtype=np.int64), s)
        return float(np.dot(signs, self.probs))

    def fourier(self):
        """p^(s) for every s, as a dense length-2^m vector."""
        return kernels.fwht(self.probs) / (1 << self.m)


def _check_capacity(n, cap=defaults.MAX_ORACLE_QUBITS):
    if n > cap:
        raise CapacityError(f"dense simulation limited to {cap} qubits, got {n}")


def apply_gate(psi, n, g, inner=1):
    """Apply one gate in place to ``psi`` viewed as (2^n, inner)."""
    if g.kind in ("H", "X"):
        q = g.qubits[0]
        kernels.sv_apply_1q(psi, 1 << q, (1 << (n - 1 - q)) * inner, _H if g.kind == "H" else _X)
    else:
        mask = bits.mask_of(g.qubits, n)
        kernels.sv_apply_phase(psi, n, inner, mask, OMEGA ** PHASE8[g.kind])
    return psi


def apply_gates(psi, n, gates, inner=1):
    for g in gates:
        apply_gate(psi, n, g, inner)
    return psi


def run(c):
    """C|0^n> by sequential gate application."""
    _check_capacity(c.n)
    psi = np.zeros(1 << c.n, dtype=np.complex128)
    psi[0] = 1.0
    apply_gates(psi, c.n, c.gates)
    return StateVector(c.n, psi)


def unitary(c, cap=defaults.MAX_DENSE_QUBITS):
    """Dense matrix of the circuit (columns are images of basis states)."""
    _check_capacity(c.n, cap)
    dim = 1 << c.n
    u = np.eye(dim, dtype=np.complex128).reshape(-1)
    apply_gates(u, c.n, c.gates, inner=dim)
    return u.reshape(dim, dim)


def marginal(state, m):
    probs = state.probabilities()
    return OutputDistribution(m, probs.reshape(1 << m, -1).sum(axis=1))


def output_distribution(c):
    return marginal(run(c), c.m)


def _dist(c):
    return c if isinstance(c, OutputDistribution) else output_distribution(c)


def pauli_expectation_exact(c, s):
    """<0^n| C^dag (Z(s) (x) I) C |0^n> for a circuit (or a precomputed distribution)."""
    dist = _dist(c)
    mask = PauliZMask.parse(s, dist.m)
    return dist.pauli_expectation(mask.s)


def acceptance_probability_exact(c, f):
    """p(C, f) = sum_x f(x) p_m(x)."""
    dist = _dist(c)
    if f.m != dist.m:
        raise ValidationError(f"function takes {f.m} bits but the circuit measures {dist.m}")
    values = f.eval(np.arange(1 << dist.m, dtype=np.int64)).astype(np.float64)
    return float(np.dot(values, dist.probs))
