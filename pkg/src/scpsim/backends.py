"""Pauli-expectation backends.

The sampling backend realises the CT-state / ECS-operation estimator: draw
x ~ |<x|phi>|^2 and average Y(x) = <x|A|phi> / <x|phi>, whose mean is
<phi|A|phi> and whose second moment is ||A phi||^2 <= 1. The Clifford backend
pushes Z(s) through the Clifford part with stabilizer update rules and reads
the expectation off the product input state exactly.
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from scpsim import bits, defaults, kernels, oracle, rng
from scpsim.circuit import CLIFFORD, PHASE8, PauliZMask
from scpsim.errors import CapacityError, UnsupportedFamilyError, ValidationError

BACKENDS = ("exact", "ct-ecs", "clifford", "commuting")
OMEGA = np.exp(1j * np.pi / 4)
_I_POW = (1, 1j, -1, -1j)


@dataclass(frozen=True)
class Estimate:
    """A backend answer plus how it was obtained (``path`` names the tail bound)."""

    value: float
    samples: int = 0
    path: str = "exact"

    def __float__(self):
        return float(self.value)


# Pauli operators ----------------------------------------------------------

_LETTER_XZ = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_XZ_LETTER = {v: k for k, v in _LETTER_XZ.items()}


@dataclass(frozen=True)
class PauliOperator:
    """``i**phase`` times a tensor product of I/X/Y/Z letters (qubit 0 first)."""

    phase: int
    letters: str

    def __post_init__(self):
        object.__setattr__(self, "phase", int(self.phase) % 4)
        if set(self.letters) - set("IXYZ"):
            raise ValidationError(f"bad Pauli letters {self.letters!r}")

    @classmethod
    def from_z_mask(cls, mask, n):
        mask = PauliZMask.parse(mask)
        letters = ["I"] * n
        for q in mask.qubits:
            letters[q] = "Z"
        return cls(0, "".join(letters))

    @classmethod
    def parse(cls, text):
        sign = {"+": 0, "-": 2, "+i": 1, "-i": 3, "i": 1}
        for prefix in ("+i", "-i", "i", "+", "-"):
            if text.startswith(prefix):
                return cls(sign[prefix], text[len(prefix):])
        return cls(0, text)

    @property
    def n(self):
        return len(self.letters)

    @property
    def coefficient(self):
        return _I_POW[self.phase]

    @property
    def hermitian(self):
        return self.phase in (0, 2)

    @property
    def x_mask(self):
        return bits.mask_of([i for i, c in enumerate(self.letters) if c in "XY"], self.n)

    @property
    def z_mask(self):
        return bits.mask_of([i for i, c in enumerate(self.letters) if c in "ZY"], self.n)

    def __mul__(self, other):
        if self.n != other.n:
            raise ValidationError("Pauli length mismatch")
        k = self.phase + other.phase
        out = []
        for a, b in zip(self.letters, other.letters):
            (x1, z1), (x2, z2) = _LETTER_XZ[a], _LETTER_XZ[b]
            # letters as i^{xz} X^x Z^z; Z^z1 X^x2 = (-1)^{z1 x2} X^x2 Z^z1
            k += x1 * z1 + x2 * z2 + 2 * z1 * x2
            x, z = x1 ^ x2, z1 ^ z2
            k -= x * z
            out.append(_XZ_LETTER[(x, z)])
        return PauliOperator(k, "".join(out))

    def to_dense(self):
        mats = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
                "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}
        out = np.array([[1.0 + 0j]])
        for c in self.letters:
            out = np.kron(out, mats[c])
        return self.coefficient * out

    def __str__(self):
        return ("+", "+i", "-", "-i")[self.phase] + self.letters


def conjugate_pauli_through_clifford(E, p):
    """E^dag p E for a Clifford gate list E (first gate applied first), exact phase.

    Works in the ``i^k X^x Z^z`` form and updates gate by gate from the last
    gate of E backwards.
    """
    bad = [g for g in E if g.kind not in CLIFFORD]
    if bad:
        raise ValidationError(f"non-Clifford gate {bad[0]}")
    n = p.n
    x = [_LETTER_XZ[c][0] for c in p.letters]
    z = [_LETTER_XZ[c][1] for c in p.letters]
    k = p.phase + p.letters.count("Y")
    for g in reversed(E):
        q = g.qubits
        if any(i >= n for i in q):
            raise ValidationError(f"gate {g} outside {n}-qubit Pauli")
        a = q[0]
        if g.kind == "H":
            k += 2 * x[a] * z[a]
            x[a], z[a] = z[a], x[a]
        elif g.kind == "S":
            k += 3 * x[a]
            z[a] ^= x[a]
        elif g.kind == "SDG":
            k += x[a]
            z[a] ^= x[a]
        elif g.kind == "Z":
            k += 2 * x[a]
        elif g.kind == "X":
            k += 2 * z[a]
        else:  # CZ
            b = q[1]
            k += 2 * x[a] * x[b]
            z[a] ^= x[b]
            z[b] ^= x[a]
    letters = "".join(_XZ_LETTER[(xi, zi)] for xi, zi in zip(x, z))
    return PauliOperator(k - letters.count("Y"), letters)


# CT states and ECS operations ----------------------------------------------

@dataclass(frozen=True)
class CTState:
    """Sampler plus amplitude evaluator; both vectorised over int64 basis indices."""

    n: int
    sample: Callable  # (generator, size) -> int64 array
    amplitude: Callable  # int64 array -> complex array
    flat_magnitude: Optional[float] = None

    def to_dense(self):
        if self.n > defaults.MAX_DENSE_QUBITS:
            raise CapacityError("dense view limited to 12 qubits")
        return self.amplitude(np.arange(1 << self.n, dtype=np.int64))


@dataclass(frozen=True)
class ECSOperation:
    """Hermitian unitary with s(n) non-zeros per column: column x holds beta_j(x) at row gamma_j(x)."""

    n: int
    sparsity: int
    beta: Callable  # (j, xs) -> complex array
    gamma: Callable  # (j, xs) -> int64 array
    label: str = ""

    @property
    def basis_preserving(self):
        return self.sparsity == 1

    def to_dense(self):
        if self.n > 10:
            raise CapacityError("dense ECS assembly limited to 10 qubits")
        dim = 1 << self.n
        xs = np.arange(dim, dtype=np.int64)
        out = np.zeros((dim, dim), dtype=np.complex128)
        for j in range(self.sparsity):
            np.add.at(out, (self.gamma(j, xs), xs), self.beta(j, xs))
        return out


class BasisPermutation:
    """A permutation-with-phase unitary given as a gate list over X and diagonal gates.

    Not necessarily Hermitian (T and S are allowed), so it keeps both
    directions: ``forward`` maps x to (y, phase) with U|x> = w^phase |y>, w = e^{i pi/4}.
    """

    def __init__(self, n, gates):
        rows = []
        for g in gates:
            mask = bits.mask_of(g.qubits, n)
            if g.kind == "X":
                rows.append((0, mask, 0))
            elif g.kind in PHASE8:
                rows.append((1, mask, PHASE8[g.kind]))
            else:
                raise ValidationError(f"{g.kind} is not basis-preserving")
        self.n = n
        self.gates = tuple(gates)
        self.prog = np.array(rows, dtype=np.int64).reshape(-1, 3)

    def forward(self, xs):
        return kernels.monomial_apply(xs, self.prog, inverse=False)

    def inverse(self, ys):
        return kernels.monomial_apply(ys, self.prog, inverse=True)


_PREP_ALIASES = {"0": "0", "|0>": "0", "+": "+", "H|0>": "+", "T+": "T+", "TH|0>": "T+"}


def product_ct_state(preps):
    """Product of per-qubit |0>, H|0> or TH|0> preparations."""
    try:
        preps = [_PREP_ALIASES[p] for p in preps]
    except KeyError as exc:
        raise ValidationError(f"unsupported preparation {exc.args[0]!r}") from None
    n = len(preps)
    free = bits.mask_of([q for q, p in enumerate(preps) if p != "0"], n)
    tmask = bits.mask_of([q for q, p in enumerate(preps) if p == "T+"], n)
    k = bits.weight(free)
    mag = 2.0 ** (-k / 2)
    phases = OMEGA ** np.arange(8)

    def sample(gen, size):
        return gen.integers(0, 1 << n, size=size, dtype=np.int64) & free

    def amplitude(xs):
        xs = np.asarray(xs, dtype=np.int64)
        amp = mag * phases[np.bitwise_count(xs & tmask).astype(np.int64) & 7]
        return np.where((xs & ~free) == 0, amp, 0.0)

    return CTState(n, sample, amplitude, mag)


def apply_basis_preserving(phi, U):
    """U|phi> as a CT state, for a basis-preserving ECS operation or a BasisPermutation."""
    if isinstance(U, BasisPermutation):
        def sample(gen, size):
            return U.forward(phi.sample(gen, size))[0]

        def amplitude(ys):
            xs, ph = U.inverse(np.asarray(ys, dtype=np.int64))
            return OMEGA ** (-ph) * phi.amplitude(xs)
    else:
        if not U.basis_preserving:
            raise ValidationError("operation is not basis-preserving")

        def sample(gen, size):
            return U.gamma(0, phi.sample(gen, size))

        def amplitude(ys):
            ys = np.asarray(ys, dtype=np.int64)
            return np.conj(U.beta(0, ys)) * phi.amplitude(U.gamma(0, ys))
    return CTState(phi.n, sample, amplitude, phi.flat_magnitude)


def ecs_from_pauli(p):
    """A Hermitian Pauli as a sparsity-1 ECS operation."""
    if not p.hermitian:
        raise ValidationError(f"Pauli {p} is not Hermitian")
    xm, zm = p.x_mask, p.z_mask
    coef = p.coefficient * _I_POW[p.letters.count("Y") % 4]

    # P|x> = coef * (-1)^{popcount(x & zmask)} |x ^ xmask>, letter order X^x Z^z with Y = iXZ
    def beta(j, xs):
        return coef * (1.0 - 2.0 * kernels.masked_parity(xs, zm))

    def gamma(j, xs):
        return np.asarray(xs, dtype=np.int64) ^ xm

    return ECSOperation(p.n, 1, beta, gamma, str(p))


def ecs_for_simon_type(R, s, n):
    """H_R (Z(s) (x) I) H_R: X on s-qubits inside R, Z on s-qubits outside R."""
    s = PauliZMask.parse(s)
    R = set(R)
    letters = ["I"] * n
    for q in s.qubits:
        letters[q] = "X" if q in R else "Z"
    return ecs_from_pauli(PauliOperator(0, "".join(letters)))


def y_values(phi, A, xs):
    """Y(x) = sum_j conj(beta_j(x)) phi(gamma_j(x)) / phi(x)."""
    den = phi.amplitude(xs)
    assert np.all(den != 0), "sampled a basis state outside the CT support"
    num = np.zeros(len(xs), dtype=np.complex128)
    for j in range(A.sparsity):
        num += np.conj(A.beta(j, xs)) * phi.amplitude(A.gamma(j, xs))
    return num / den


def enumerate_moments(phi, A):
    """Exact E[Y], E[|Y|^2] and max |Y| over p_phi by enumeration (small n)."""
    if phi.n > defaults.MAX_DENSE_QUBITS:
        raise CapacityError("enumeration limited to 12 qubits")
    xs = np.arange(1 << phi.n, dtype=np.int64)
    p = np.abs(phi.amplitude(xs)) ** 2
    xs, p = xs[p > 0], p[p > 0]
    y = y_values(phi, A, xs)
    return complex(np.sum(p * y)), float(np.sum(p * np.abs(y) ** 2)), float(np.max(np.abs(y)))


def hoeffding_count(epsilon, delta):
    return math.ceil(2 * math.log(2 / delta) / epsilon**2)


def estimate_ct_ecs(phi, A, epsilon, delta, seed, path="auto"):
    """<phi|A|phi> within epsilon with probability >= 1 - delta.

    When phi has flat magnitudes and A is basis-preserving, |Y| <= 1 and a
    Hoeffding count of samples suffices; otherwise a median of means over
    18*ceil(ln(1/delta)) groups of ceil(6/eps^2) samples is used.
    """
    if path == "auto":
        path = "hoeffding" if (phi.flat_magnitude is not None and A.basis_preserving) else "median-of-means"
    if path == "hoeffding":
        groups, size = 1, hoeffding_count(epsilon, delta)
    elif path == "median-of-means":
        groups = defaults.MOM_GROUP_FACTOR * math.ceil(math.log(1 / delta))
        size = math.ceil(defaults.MOM_GROUP_SIZE_FACTOR / epsilon**2)
    else:
        raise ValidationError(f"unknown tail-bound path {path!r}")
    total = groups * size
    if total > defaults.MAX_SAMPLES:
        raise CapacityError(f"CT/ECS estimate needs {total} samples (epsilon={epsilon:g})")
    gen = rng.stream(seed, "ct-ecs")
    means = np.empty(groups)
    for gi in range(groups):
        acc, left = 0.0, size
        while left:
            chunk = min(left, defaults.SAMPLE_CHUNK)
            xs = phi.sample(gen, chunk)
            acc += float(np.sum(y_values(phi, A, xs).real))
            left -= chunk
        means[gi] = acc / size
    value = float(means[0]) if groups == 1 else float(np.median(means))
    return Estimate(value, total, path)


# circuit-family routing -----------------------------------------------------

def simon_parts(c):
    """(Q, D, R) of a Simon-type circuit, validated."""
    if c.family != "simon_type":
        raise UnsupportedFamilyError(f"{c.family} circuit is not Simon-type")
    Q, R = c.section_gates("Q"), c.section_gates("R")
    if any(g.kind != "H" for g in Q + R):
        raise ValidationError("Q and R sections must hold only H gates")
    D = c.section_gates("D")
    covered = len(Q) + len(D) + len(R)
    if covered != c.size:
        raise ValidationError("Simon-type circuit has gates outside its Q/D/R sections")
    return {g.qubits[0] for g in Q}, D, {g.qubits[0] for g in R}


def clifford_magic_parts(c):
    """The Clifford tail E of a Clifford Magic circuit, validated."""
    if c.family != "clifford_magic":
        raise UnsupportedFamilyError(f"{c.family} circuit is not Clifford Magic")
    H, T, E = c.section_gates("H"), c.section_gates("T"), c.section_gates("E")
    full = set(range(c.n))
    if ({g.qubits[0] for g in H} != full or any(g.kind != "H" for g in H) or len(H) != c.n
            or {g.qubits[0] for g in T} != full or any(g.kind != "T" for g in T) or len(T) != c.n):
        raise ValidationError("Clifford Magic circuit must start with H on all qubits then T on all qubits")
    if len(H) + len(T) + len(E) != c.size:
        raise ValidationError("Clifford Magic circuit has gates outside its H/T/E sections")
    return E


def ct_ecs_pair(c, s):
    """The (CT state, ECS observable) pair whose expectation is <Z(s)> after c."""
    mask = PauliZMask.parse(s, c.m)
    if c.family == "simon_type":
        Q, D, R = simon_parts(c)
        phi = product_ct_state(["+" if q in Q else "0" for q in range(c.n)])
        if D:
            phi = apply_basis_preserving(phi, BasisPermutation(c.n, D))
        return phi, ecs_for_simon_type(R, mask, c.n)
    if c.family == "clifford_magic":
        E = clifford_magic_parts(c)
        phi = product_ct_state(["T+"] * c.n)
        p = conjugate_pauli_through_clifford(E, PauliOperator.from_z_mask(mask, c.n))
        return phi, ecs_from_pauli(p)
    raise UnsupportedFamilyError(
        "ct-ecs handles simon_type and clifford_magic circuits; use 'exact' or 'commuting'")


_TPLUS_EXPECT = {"I": 1.0, "X": math.cos(math.pi / 4), "Y": math.sin(math.pi / 4), "Z": 0.0}
_ZERO_EXPECT = {"I": 1.0, "X": 0.0, "Y": 0.0, "Z": 1.0}


def clifford_expectation(c, s):
    """Exact <Z(s)> via Pauli conjugation, for Clifford Magic or all-Clifford circuits."""
    mask = PauliZMask.parse(s, c.m)
    z = PauliOperator.from_z_mask(mask, c.n)
    if c.family == "clifford_magic":
        p, table = conjugate_pauli_through_clifford(clifford_magic_parts(c), z), _TPLUS_EXPECT
    elif all(g.kind in CLIFFORD for g in c.gates):
        p, table = conjugate_pauli_through_clifford(c.gates, z), _ZERO_EXPECT
    else:
        raise UnsupportedFamilyError("clifford backend needs a Clifford Magic or all-Clifford circuit")
    return p.coefficient.real * math.prod(table[ch] for ch in p.letters)


def backend_expectation(c, s, epsilon, delta, seed, backend="ct-ecs"):
    """Estimate <0|C^dag (Z(s) (x) I) C|0> with the named backend."""
    mask = PauliZMask.parse(s, c.m)
    if mask.s == 0:
        return Estimate(1.0, 0, "identity")
    if backend == "exact":
        return Estimate(oracle.pauli_expectation_exact(c, mask), 0, "exact")
    if backend == "ct-ecs":
        phi, A = ct_ecs_pair(c, mask)
        return estimate_ct_ecs(phi, A, epsilon, delta, seed)
    if backend == "clifford":
        return Estimate(clifford_expectation(c, mask), 0, "tableau")
    if backend == "commuting":
        from scpsim import commuting

        return commuting.estimate_expectation_commuting(c, mask, epsilon, delta, seed)
    raise ValidationError(f"unknown backend {backend!r}; choose from {', '.join(BACKENDS)}")


def check_backend(c, backend):
    """Raise early when ``backend`` cannot serve circuits like ``c``."""
    if backend not in BACKENDS:
        raise ValidationError(f"unknown backend {backend!r}; choose from {', '.join(BACKENDS)}")
    if backend == "ct-ecs":
        if c.family == "simon_type":
            simon_parts(c)
        elif c.family == "clifford_magic":
            clifford_magic_parts(c)
        else:
            raise UnsupportedFamilyError(
                "ct-ecs handles simon_type and clifford_magic circuits; use 'exact' or 'commuting'")
    elif backend == "clifford":
        if c.family == "clifford_magic":
            clifford_magic_parts(c)
        elif not all(g.kind in CLIFFORD for g in c.gates):
            raise UnsupportedFamilyError("clifford backend needs a Clifford Magic or all-Clifford circuit")
    elif backend == "commuting" and c.n + 1 > defaults.MAX_ORACLE_QUBITS:
        raise CapacityError(f"commuting emulation needs {c.n + 1} qubits")
    elif backend == "exact" and c.n > defaults.MAX_ORACLE_QUBITS:
        raise CapacityError(f"exact backend limited to {defaults.MAX_ORACLE_QUBITS} qubits")


def auto_backend(c):
    """ct-ecs for the two simulable families, the statevector oracle otherwise."""
    return "ct-ecs" if c.family in ("simon_type", "clifford_magic") else "exact"
