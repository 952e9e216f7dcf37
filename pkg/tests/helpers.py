"""Independent dense reference: Kronecker-built unitaries and brute-force sums.

Nothing here calls the package kernels, so comparisons against it are genuine
second routes.
"""
import itertools
import math

import numpy as np

H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
X = np.array([[0, 1], [1, 0]])
PHASES = {"T": np.exp(1j * np.pi / 4), "TDG": np.exp(-1j * np.pi / 4), "S": 1j, "SDG": -1j,
          "Z": -1, "CZ": -1, "CCZ": -1}
PAULI = {"I": np.eye(2), "X": X, "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}


def bit(x, q, n):
    return (x >> (n - 1 - q)) & 1


def dense_gate(kind, qubits, n):
    if kind in ("H", "X"):
        q = qubits[0]
        return np.kron(np.kron(np.eye(1 << q), H if kind == "H" else X), np.eye(1 << (n - 1 - q)))
    diag = np.array([PHASES[kind] if all(bit(x, q, n) for q in qubits) else 1.0
                     for x in range(1 << n)], dtype=complex)
    return np.diag(diag)


def dense_unitary(gates, n):
    u = np.eye(1 << n, dtype=complex)
    for g in gates:
        u = dense_gate(g.kind, g.qubits, n) @ u
    return u


def dense_state(c):
    return dense_unitary(c.gates, c.n)[:, 0]


def dense_pauli(letters):
    out = np.array([[1.0 + 0j]])
    for ch in letters:
        out = np.kron(out, PAULI[ch])
    return out


def z_string(s, m, n):
    """Z on each qubit j < m with bit j of s (MSB first) set."""
    return "".join("Z" if j < m and (s >> (m - 1 - j)) & 1 else "I" for j in range(n))


def brute_coefficient(values, s):
    m = len(values).bit_length() - 1
    return sum(v * (-1) ** bin(x & s).count("1") for x, v in enumerate(values)) / len(values)


def marginal_probs(state, m, n):
    probs = np.zeros(1 << m)
    for x, a in enumerate(state):
        probs[x >> (n - m)] += abs(a) ** 2
    return probs


def all_bitstrings(m):
    return ["".join(b) for b in itertools.product("01", repeat=m)]
