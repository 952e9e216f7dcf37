"""Layered circuit IR over {H, T, CZ} plus derived S, Z, X, CCZ (and T^dag, S^dag).

Qubits are 0-based; in basis-state integers qubit 0 is the most significant
bit. Measured qubits are the prefix ``0..m-1``.
"""
from dataclasses import dataclass

import numpy as np

from scpsim import bits
from scpsim.errors import ParseError, ValidationError

ARITY = {"H": 1, "T": 1, "S": 1, "Z": 1, "X": 1, "TDG": 1, "SDG": 1, "CZ": 2, "CCZ": 3}
INVERSE = {"T": "TDG", "TDG": "T", "S": "SDG", "SDG": "S"}
DIAGONAL = frozenset({"T", "S", "Z", "TDG", "SDG", "CZ", "CCZ"})
CLIFFORD = frozenset({"H", "S", "SDG", "Z", "X", "CZ"})
# phase in eighth-turns picked up by |1..1> on the gate's qubits
PHASE8 = {"T": 1, "S": 2, "Z": 4, "TDG": 7, "SDG": 6, "CZ": 4, "CCZ": 4}
SECTIONS = ("Q", "D", "R", "E", "T", "H")
FAMILIES = ("generic", "simon_type", "clifford_magic")


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple

    def __post_init__(self):
        if self.kind not in ARITY:
            raise ValidationError(f"unknown gate {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != ARITY[self.kind]:
            raise ValidationError(f"{self.kind} takes {ARITY[self.kind]} qubit(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValidationError(f"repeated qubit in {self.kind} {self.qubits}")

    def inverse(self):
        return Gate(INVERSE.get(self.kind, self.kind), self.qubits)

    def __str__(self):
        return " ".join([self.kind, *map(str, self.qubits)])


def gate(kind, *qubits):
    return Gate(kind.upper(), qubits)


@dataclass(frozen=True)
class PauliZMask:
    """Z(s) on the measured prefix; ``s`` is an m-bit integer, qubit 0 = MSB."""

    m: int
    s: int

    def __post_init__(self):
        if self.m < 1 or not 0 <= self.s < (1 << self.m):
            raise ValidationError(f"mask {self.s} does not fit in {self.m} bits")

    @classmethod
    def parse(cls, s, m=None):
        if isinstance(s, PauliZMask):
            return s
        if isinstance(s, str):
            if m is not None and len(s) != m:
                raise ValidationError(f"mask {s!r} must have {m} bits")
            return cls(len(s), bits.to_int(s))
        if m is None:
            raise ValidationError("m is required for an integer mask")
        return cls(m, int(s))

    @property
    def qubits(self):
        return bits.positions(self.s, self.m)

    @property
    def weight(self):
        return bits.weight(self.s)

    def full_mask(self, n):
        """Bit mask of Z(s) (x) I_{n-m} on n-qubit basis integers."""
        return self.s << (n - self.m)

    def __str__(self):
        return bits.to_bits(self.s, self.m)


@dataclass(frozen=True)
class QuantumCircuit:
    n: int
    m: int
    layers: tuple
    family: str = "generic"
    sections: tuple = ()  # (name, first layer index) pairs

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("circuit needs at least one qubit")
        if not 1 <= self.m <= self.n:
            raise ValidationError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}")
        layers = tuple(tuple(layer) for layer in self.layers)
        object.__setattr__(self, "layers", layers)
        for li, layer in enumerate(layers):
            used = set()
            for g in layer:
                for q in g.qubits:
                    if not 0 <= q < self.n:
                        raise ValidationError(f"qubit {q} out of range in layer {li}")
                    if q in used:
                        raise ValidationError(f"layer {li} touches qubit {q} twice")
                    used.add(q)
        object.__setattr__(self, "sections", tuple((str(a), int(b)) for a, b in self.sections))

    @property
    def gates(self):
        return [g for layer in self.layers for g in layer]

    @property
    def size(self):
        return sum(len(layer) for layer in self.layers)

    def section_gates(self, name):
        """Gates of a builder section, in order (empty when absent)."""
        bounds = list(self.sections) + [("", len(self.layers))]
        out = []
        for (sec, start), (_, stop) in zip(bounds, bounds[1:]):
            if sec == name:
                out.extend(g for layer in self.layers[start:stop] for g in layer)
        return out

    @property
    def is_iqp(self):
        if self.family != "simon_type":
            return False
        full = set(range(self.n))
        q = {g.qubits[0] for g in self.section_gates("Q")}
        r = {g.qubits[0] for g in self.section_gates("R")}
        return q == full and r == full and all(g.kind in DIAGONAL for g in self.section_gates("D"))

    def inverse(self):
        return QuantumCircuit(self.n, self.m,
                              [[g.inverse() for g in layer] for layer in reversed(self.layers)])

    def render(self):
        header = f"qc n={self.n} m={self.m}"
        if self.family != "generic":
            header += f" family={self.family}"
        out = [header]
        starts = {start: name for name, start in self.sections}
        for li, layer in enumerate(self.layers):
            if li in starts:
                out.append(f"#section {starts[li]}")
            out.append("/ " + "; ".join(str(g) for g in layer))
        return "\n".join(out) + "\n"


def pack_layers(gates):
    """Greedy left-packing: each gate goes one layer after the last one touching its qubits."""
    layers = []
    last = {}
    for g in gates:
        li = max((last.get(q, -1) for q in g.qubits), default=-1) + 1
        if li == len(layers):
            layers.append([])
        layers[li].append(g)
        for q in g.qubits:
            last[q] = li
    return layers


def depth(c):
    return len(pack_layers(c.gates))


def lightcone(c, j):
    """Backward lightcone of output qubit ``j``: every input qubit that can influence it."""
    if not 0 <= j < c.n:
        raise ValidationError(f"qubit {j} out of range")
    cone = {j}
    for layer in reversed(c.layers):
        for g in layer:
            if cone.intersection(g.qubits):
                cone.update(g.qubits)
    return cone


def cone_gates(c, j):
    """The gates inside the backward lightcone of ``j``, in circuit order."""
    cone = {j}
    picked = []
    for layer in reversed(c.layers):
        for g in layer:
            if cone.intersection(g.qubits):
                cone.update(g.qubits)
                picked.append(g)
    return picked[::-1]


def max_arity(c):
    return max((len(g.qubits) for g in c.gates), default=1)


def lightcone_size_bound(c):
    """min(n, a^d) where a is the largest gate arity (2^d for 2-local circuits)."""
    return min(c.n, max(2, max_arity(c)) ** depth(c))


# parsing ------------------------------------------------------------------

def _tokens(text):
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "section":
                if len(parts) != 2 or parts[1] not in SECTIONS:
                    raise ParseError(f"bad section marker {line!r}", line_no)
                yield "section", parts[1], line_no
            continue
        for k, chunk in enumerate(line.split("/")):
            if k:
                yield "slash", None, line_no
            for item in chunk.split(";"):
                if item.strip():
                    yield "item", item.strip(), line_no


def _parse_gate(tok, n, line_no):
    parts = tok.split()
    name = parts[0].upper()
    if name not in ARITY:
        raise ParseError(f"unknown gate {parts[0]!r}", line_no)
    try:
        qs = [int(p) for p in parts[1:]]
    except ValueError:
        raise ParseError(f"bad qubit index in {tok!r}", line_no) from None
    if len(qs) != ARITY[name]:
        raise ParseError(f"{name} takes {ARITY[name]} qubit(s), got {len(qs)}", line_no)
    if any(not 0 <= q < n for q in qs):
        raise ParseError(f"qubit out of range in {tok!r} (n={n})", line_no)
    try:
        return Gate(name, qs)
    except ValidationError as exc:
        raise ParseError(str(exc), line_no) from None


def parse_circuit(text):
    """Parse the ``qc n=<int> m=<int>`` layered text format.

    Layers are separated by ``/``, gates in a layer by ``;``; ``#section X``
    lines mark the start of a builder section; other ``#`` lines are comments.
    """
    tokens = list(_tokens(text))
    if not tokens or tokens[0][0] != "item":
        raise ParseError("missing 'qc' header", tokens[0][2] if tokens else 1)
    _, head, head_line = tokens[0]
    words = head.split()
    if words[0] != "qc":
        raise ParseError("header must start with 'qc'", head_line)
    meta = {}
    for w in words[1:]:
        if "=" not in w:
            raise ParseError(f"expected key=value in header, got {w!r}", head_line)
        k, v = w.split("=", 1)
        meta[k] = v
    try:
        n, m = int(meta["n"]), int(meta["m"])
    except (KeyError, ValueError):
        raise ParseError("header needs n=<int> m=<int>", head_line) from None
    layers, sections = [], []
    for kind, value, line_no in tokens[1:]:
        if kind == "section":
            sections.append((value, len(layers)))
        elif kind == "slash":
            layers.append([])
        elif not layers:
            raise ParseError(f"gate {value!r} before the first '/'", line_no)
        else:
            g = _parse_gate(value, n, line_no)
            if any(q in other.qubits for other in layers[-1] for q in g.qubits):
                raise ParseError(f"gate {value!r} overlaps another gate in its layer", line_no)
            layers[-1].append(g)
    try:
        return QuantumCircuit(n, m, layers, meta.get("family", "generic"), sections)
    except ValidationError as exc:
        raise ParseError(str(exc), head_line) from None


# builders -----------------------------------------------------------------

def _sectioned(n, m, family, parts):
    layers, sections = [], []
    for name, gates_ in parts:
        if not gates_:
            continue
        sections.append((name, len(layers)))
        layers.extend(pack_layers(gates_))
    return QuantumCircuit(n, m, layers, family, sections)


def build_simon_type(n, m, Q, R, D):
    """H_R . D . H_Q with D a basis-preserving gate list (no H)."""
    D = list(D)
    if any(g.kind == "H" for g in D):
        raise ValidationError("D must be basis-preserving (no H gates)")
    return _sectioned(n, m, "simon_type", [
        ("Q", [Gate("H", (q,)) for q in sorted(Q)]),
        ("D", D),
        ("R", [Gate("H", (q,)) for q in sorted(R)]),
    ])


def build_clifford_magic(n, m, E):
    """E . T^n . H^n with E a Clifford gate list."""
    E = list(E)
    bad = [g for g in E if g.kind not in CLIFFORD]
    if bad:
        raise ValidationError(f"non-Clifford gate in E: {bad[0]}")
    return _sectioned(n, m, "clifford_magic", [
        ("H", [Gate("H", (q,)) for q in range(n)]),
        ("T", [Gate("T", (q,)) for q in range(n)]),
        ("E", E),
    ])


def build_random_constant_depth(n, m, d, seed):
    """Dense brickwork of exactly ``d`` layers: CZ bricks plus random H/T/S on the rest."""
    if d > 8:
        raise ValidationError("depth is limited to 8")
    gen = np.random.default_rng(seed)
    layers = []
    for li in range(d):
        layer = []
        q = li % 2
        if q == 1:
            layer.append(Gate(str(gen.choice(["H", "T", "S"])), (0,)))
        while q < n:
            if q + 1 < n and gen.random() < 0.7:
                layer.append(Gate("CZ", (q, q + 1)))
                q += 2
            else:
                layer.append(Gate(str(gen.choice(["H", "T", "S"])), (q,)))
                q += 1
        layers.append(layer)
    return QuantumCircuit(n, m, layers)


def random_circuit(n, m, size, seed, kinds=("H", "T", "S", "Z", "X", "CZ", "CCZ")):
    """Random gate sequence, greedily layered (generic family)."""
    gen = np.random.default_rng(seed)
    kinds = [k for k in kinds if ARITY[k] <= n]
    gates_ = []
    for _ in range(size):
        k = str(gen.choice(kinds))
        qs = gen.choice(n, size=ARITY[k], replace=False)
        gates_.append(Gate(k, qs))
    return QuantumCircuit(n, m, pack_layers(gates_))


def random_diagonal_gates(n, count, gen, kinds=("Z", "CZ", "CCZ", "T", "S")):
    kinds = [k for k in kinds if ARITY[k] <= n]
    return [Gate(k, gen.choice(n, size=ARITY[k], replace=False))
            for k in (str(gen.choice(kinds)) for _ in range(count))]


def random_iqp(n, m, count, seed):
    gen = np.random.default_rng(seed)
    full = range(n)
    return build_simon_type(n, m, full, full, random_diagonal_gates(n, count, gen, ("Z", "CZ", "CCZ")))


def random_clifford_gates(n, count, gen, kinds=("H", "S", "CZ")):
    kinds = [k for k in kinds if ARITY[k] <= n]
    return [Gate(k, gen.choice(n, size=ARITY[k], replace=False))
            for k in (str(gen.choice(kinds)) for _ in range(count))]


def random_clifford_magic(n, m, count, seed):
    gen = np.random.default_rng(seed)
    return build_clifford_magic(n, m, random_clifford_gates(n, count, gen))
