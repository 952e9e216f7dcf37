"""Hadamard-test reduction of Pauli expectations to commuting circuits.

The (n+1)-qubit test circuit H_a (C^dag) CZ(a, s) C H_a factors into one
composite gate per measured qubit j with s_j = 1,

    G_j = (H (x) C^dag)(CZ_{a,j} (x) I)(H (x) C) = H_a ctrl-V_j H_a,  V_j = C^dag Z_j C,

and the V_j commute because they are conjugates of commuting Z_j by the same
C. Only gates in the backward lightcone of j touch V_j, so each G_j acts on
{a} plus that lightcone. Quantum access is emulated: the ancilla marginal is
computed exactly and sampled as a Bernoulli variable.
"""
import math
from dataclasses import dataclass

import numpy as np

from scpsim import bits, boolfn, defaults, oracle, rng
from scpsim.backends import Estimate
from scpsim.circuit import Gate, PauliZMask, QuantumCircuit, cone_gates, depth, lightcone, max_arity
from scpsim.errors import CapacityError, ValidationError


@dataclass(frozen=True, eq=False)
class HadamardTestCircuit:
    base: QuantumCircuit
    s: PauliZMask
    circuit: QuantumCircuit  # n + 1 qubits, ancilla last

    @property
    def ancilla(self):
        return self.base.n


@dataclass(frozen=True)
class CompositeGate:
    j: int
    support: tuple
    gates: tuple  # elementary gates over the n + 1 qubit register


@dataclass(frozen=True, eq=False)
class CommutingCircuit:
    n_plus_1: int
    base: QuantumCircuit
    s: PauliZMask
    gates: tuple

    @property
    def gate_count(self):
        return len(self.gates)

    @property
    def locality(self):
        return max((len(g.support) for g in self.gates), default=0)


def _inverse_gates(gates):
    return [g.inverse() for g in reversed(gates)]


def build_hadamard_test(c, s):
    s = PauliZMask.parse(s, c.m)
    if s.s == 0:
        raise ValidationError("s = 0^m needs no Hadamard test (the expectation is 1)")
    a = c.n
    fwd = [list(layer) for layer in c.layers] or [[]]
    inv = [[g.inverse() for g in layer] for layer in reversed(c.layers)] or [[]]
    fwd[0].insert(0, Gate("H", (a,)))
    inv[0].insert(0, Gate("H", (a,)))
    cz = [[Gate("CZ", (a, j))] for j in s.qubits]
    big = QuantumCircuit(c.n + 1, c.n + 1, fwd + cz + inv)
    return HadamardTestCircuit(c, s, big)


def _ancilla_zero_prob(psi):
    probs = np.abs(psi) ** 2
    return float(np.sum(probs[0::2]))


def ancilla_prob0(h):
    """Prob(ancilla = 0) from the dense (n+1)-qubit state.

    Cross-checked against the ancilla marginal of the output distribution.
    """
    if h.circuit.n > defaults.MAX_ORACLE_QUBITS:
        raise CapacityError(f"Hadamard test needs {h.circuit.n} qubits (limit {defaults.MAX_ORACLE_QUBITS})")
    state = oracle.run(h.circuit)
    dense = _ancilla_zero_prob(state.amps)
    dist = oracle.marginal(state, h.circuit.n)
    marginal = (1.0 + dist.pauli_expectation(1)) / 2
    if abs(dense - marginal) > defaults.NORM_TOL:
        raise AssertionError(f"ancilla probability mismatch: {dense} vs {marginal}")
    return dense


def regroup_commuting(h):
    c, a = h.base, h.ancilla
    out = []
    for j in h.s.qubits:
        cone = cone_gates(c, j)
        gates = [Gate("H", (a,))] + cone + [Gate("CZ", (a, j))] + _inverse_gates(cone) + [Gate("H", (a,))]
        support = tuple(sorted({a} | lightcone(c, j)))
        out.append(CompositeGate(j, support, tuple(gates)))
    return CommutingCircuit(c.n + 1, c, h.s, tuple(out))


def commuting_state(cc):
    """The (n+1)-qubit state produced by the composite gates from |0>."""
    if cc.n_plus_1 > defaults.MAX_ORACLE_QUBITS:
        raise CapacityError(f"commuting circuit needs {cc.n_plus_1} qubits")
    psi = np.zeros(1 << cc.n_plus_1, dtype=np.complex128)
    psi[0] = 1.0
    for g in cc.gates:
        oracle.apply_gates(psi, cc.n_plus_1, g.gates)
    return psi


def commuting_unitary(cc):
    """Dense product of the composite gates (small registers only)."""
    n = cc.n_plus_1
    if n > defaults.MAX_DENSE_QUBITS:
        raise CapacityError(f"dense unitary limited to {defaults.MAX_DENSE_QUBITS} qubits")
    dim = 1 << n
    u = np.eye(dim, dtype=np.complex128).reshape(-1)
    for g in cc.gates:
        oracle.apply_gates(u, n, g.gates, inner=dim)
    return u.reshape(dim, dim)


def _local(gates, index):
    return [Gate(g.kind, tuple(index[q] for q in g.qubits)) for g in gates]


def commutator_norm(g1, g2):
    """max |[G1, G2]| entry, computed on the union of the two supports."""
    union = sorted(set(g1.support) | set(g2.support))
    k = len(union)
    if k > defaults.MAX_DENSE_QUBITS:
        raise CapacityError(f"commutator support of {k} qubits exceeds the dense limit")
    index = {q: i for i, q in enumerate(union)}
    a, b = _local(g1.gates, index), _local(g2.gates, index)
    dim = 1 << k
    ab = np.eye(dim, dtype=np.complex128).reshape(-1)
    ba = ab.copy()
    # columns transform as G1 (G2 e_x) and G2 (G1 e_x)
    oracle.apply_gates(ab, k, b, inner=dim)
    oracle.apply_gates(ab, k, a, inner=dim)
    oracle.apply_gates(ba, k, a, inner=dim)
    oracle.apply_gates(ba, k, b, inner=dim)
    return float(np.max(np.abs(ab - ba)))


def max_commutator_norm(cc):
    worst = 0.0
    for i, g1 in enumerate(cc.gates):
        for g2 in cc.gates[i + 1:]:
            worst = max(worst, commutator_norm(g1, g2))
    return worst


def total_variation(p, q):
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


def commuting_sample_count(epsilon, delta):
    return defaults.COMMUTING_SAMPLE_MULTIPLIER * math.ceil(2 * math.log(2 / delta) / epsilon**2)


def estimate_expectation_commuting(c, s, epsilon, delta, seed):
    """<Z(s)> from Bernoulli samples of the ancilla of the commuting circuit."""
    h = build_hadamard_test(c, s)
    cc = regroup_commuting(h)
    p0 = min(1.0, max(0.0, _ancilla_zero_prob(commuting_state(cc))))
    k = commuting_sample_count(epsilon, delta)
    ones = int(rng.stream(seed, "commuting", h.s.s).binomial(k, 1.0 - p0))
    return Estimate(1.0 - 2.0 * ones / k, k, "hoeffding")


def _signed_support(f):
    spec = boolfn.wht_spectrum(f)
    # g = 1 - 2f shares every non-zero index of f^ apart from 0^m
    return sorted(s for s in spec.coeffs if s), spec


def resource_report(cc, f):
    """Gate-count, locality and lightcone bounds for one commuting circuit."""
    support, spec = _signed_support(f)
    deg = boolfn.degree(spec) if support else 0
    c = cc.base
    cone_max = max(len(lightcone(c, j)) for j in range(c.m))
    rec = {
        "s": bits.to_bits(cc.s.s, c.m),
        "gate_count": cc.gate_count,
        "degree": deg,
        "locality": cc.locality,
        "lightcone_bound": 1 + cone_max,
    }
    ok = cc.gate_count == cc.s.weight and cc.gate_count <= deg and cc.locality <= rec["lightcone_bound"]
    if max_arity(c) <= 2:
        rec["depth_bound"] = 2 ** depth(c) + 1
        ok = ok and cc.locality <= rec["depth_bound"]
    rec["pass"] = bool(ok)
    return rec


def reports_for_function(c, f):
    """One report per non-zero s in the support of g^; a single degenerate record for f = 1."""
    if f.m != c.m:
        raise ValidationError(f"function takes {f.m} bits but the circuit measures {c.m}")
    support, _ = _signed_support(f)
    if not support:
        return [{"s": bits.to_bits(0, c.m), "gate_count": 0, "degree": 0, "locality": 0,
                 "lightcone_bound": 1, "degenerate": True, "pass": True}]
    return [resource_report(regroup_commuting(build_hadamard_test(c, s)), f) for s in support]
