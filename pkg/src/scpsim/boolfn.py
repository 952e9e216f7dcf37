"""Boolean post-processing functions and their Fourier analysis.

Inputs are m-bit integers with variable 0 as the most significant bit; every
evaluator is vectorised over numpy ``int64`` arrays. Fourier coefficients
use the convention ``f^(s) = 2^-m sum_x f(x) (-1)^(s.x)``.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from scpsim import bits, defaults, kernels, rng
from scpsim.errors import CapacityError, ParseError, ValidationError

FAMILIES = ("parity", "inner_product", "and", "junta", "truth_table", "sparse_poly")


def _as_array(xs):
    return np.ascontiguousarray(np.atleast_1d(xs), dtype=np.int64)


@dataclass(frozen=True)
class BooleanFunction:
    """A non-zero function {0,1}^m -> {0,1} with a declared Fourier-sparsity bound.

    ``params`` depends on ``family``:

    ``parity``/``and``
        ``()``
    ``inner_product``
        ``(s,)`` with ``s`` an m-bit integer
    ``junta``
        ``(variables, table)``; ``table`` is a 2^k character string indexed by
        the junta variables read MSB first
    ``truth_table``
        ``(table,)``, a 2^m character string in lexicographic order of x
    ``sparse_poly``
        ``((s, coeff), ...)`` giving f itself as a sum of characters
    """

    m: int
    family: str
    params: tuple = ()
    sparsity_bound: int = 0
    _table: np.ndarray = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.m < 1 or self.m > 62:
            raise ValidationError(f"m must be in [1, 62], got {self.m}")
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown function family {self.family!r}")
        self._check_params()
        if self.sparsity_bound < 1:
            object.__setattr__(self, "sparsity_bound", self._default_sparsity())
        if self.m <= defaults.MAX_NONZERO_CHECK_BITS:
            table = self._evaluate(np.arange(1 << self.m, dtype=np.int64))
            if not table.any():
                raise ValidationError("post-processing function must be non-zero")
            object.__setattr__(self, "_table", table)
        elif self.family in ("truth_table", "junta") and "1" not in self.params[-1]:
            raise ValidationError("post-processing function must be non-zero")

    def _check_params(self):
        fam, p, m = self.family, self.params, self.m
        if fam in ("parity", "and"):
            if p:
                raise ValidationError(f"{fam} takes no parameters")
        elif fam == "inner_product":
            if len(p) != 1 or not 0 < p[0] < (1 << m):
                raise ValidationError("inner_product needs a non-zero m-bit s")
        elif fam == "junta":
            variables, table = p
            if len(set(variables)) != len(variables) or any(not 0 <= v < m for v in variables):
                raise ValidationError(f"junta variables out of range or repeated: {variables}")
            if len(table) != 1 << len(variables) or set(table) - {"0", "1"}:
                raise ValidationError("junta table must have 2^k characters in {0,1}")
        elif fam == "truth_table":
            (table,) = p
            if len(table) != 1 << m or set(table) - {"0", "1"}:
                raise ValidationError(f"truth table must have 2^{m} characters in {{0,1}}")
        elif fam == "sparse_poly":
            if not p:
                raise ValidationError("sparse_poly needs at least one term")
            for s, _ in p:
                if not 0 <= s < (1 << m):
                    raise ValidationError(f"term index {s} out of range")

    def _default_sparsity(self):
        fam = self.family
        if fam in ("parity", "inner_product"):
            return 2
        if fam == "junta":
            return 1 << len(self.params[0])
        if fam == "sparse_poly":
            return len(self.params)
        if fam == "truth_table" and self.m <= defaults.MAX_WHT_BITS:
            return len(wht_spectrum(self).coeffs)
        return 1 << self.m

    def _evaluate(self, xs):
        fam, p, m = self.family, self.params, self.m
        if fam == "parity":
            return kernels.masked_parity(xs, (1 << m) - 1)
        if fam == "inner_product":
            return kernels.masked_parity(xs, p[0])
        if fam == "and":
            return (xs == (1 << m) - 1).astype(np.uint8)
        if fam == "junta":
            variables, table = p
            k = len(variables)
            idx = np.zeros_like(xs)
            for i, v in enumerate(variables):
                idx |= ((xs >> (m - 1 - v)) & 1) << (k - 1 - i)
            return np.frombuffer(table.encode(), dtype=np.uint8)[idx] - ord("0")
        if fam == "truth_table":
            return np.frombuffer(p[0].encode(), dtype=np.uint8)[xs] - ord("0")
        total = np.zeros(xs.shape, dtype=np.float64)
        for s, c in p:
            total += c * (1.0 - 2.0 * kernels.masked_parity(xs, s))
        out = np.rint(total)
        if np.any(np.abs(total - out) > 1e-9) or np.any((out != 0) & (out != 1)):
            raise ValidationError("sparse_poly does not evaluate to a Boolean value")
        return out.astype(np.uint8)

    def eval(self, xs):
        """f(x) as uint8 for an int or array of m-bit integers."""
        scalar = np.ndim(xs) == 0
        arr = _as_array(xs)
        out = self._table[arr] if self._table is not None else self._evaluate(arr)
        return int(out[0]) if scalar else out

    def truth_table(self):
        if self._table is None:
            raise CapacityError(f"no truth table above m={defaults.MAX_NONZERO_CHECK_BITS}")
        return self._table

    @property
    def has_truth_table(self):
        return self._table is not None

    def to_text(self):
        lines = [f"fn m={self.m} family={self.family} sparsity={self.sparsity_bound}"]
        if self.family == "inner_product":
            lines.append(f"s={bits.to_bits(self.params[0], self.m)}")
        elif self.family == "junta":
            variables, table = self.params
            lines.append(f"vars={','.join(map(str, variables))} table={table}")
        elif self.family == "truth_table":
            lines.append(self.params[0])
        elif self.family == "sparse_poly":
            for s, c in self.params:
                lines.append(f"s={bits.to_bits(s, self.m)} coeff={c!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SignedFunction:
    """g(x) = (-1)^f(x), the +-1 lift of a Boolean function."""

    source: BooleanFunction
    sparsity_bound: int

    @property
    def m(self):
        return self.source.m

    @property
    def has_truth_table(self):
        return self.source.has_truth_table

    def eval(self, xs):
        scalar = np.ndim(xs) == 0
        out = 1 - 2 * self.source.eval(_as_array(xs)).astype(np.int8)
        return int(out[0]) if scalar else out


@dataclass(frozen=True)
class FourierSpectrum:
    """Sparse map from m-bit indices (ints) to real Fourier coefficients."""

    m: int
    coeffs: dict

    def __getitem__(self, s):
        return self.coeffs.get(bits.to_int(s), 0.0)

    def support(self):
        return sorted(self.coeffs)

    @property
    def sparsity(self):
        return len(self.coeffs)

    def squared_norm(self):
        return math.fsum(c * c for c in self.coeffs.values())

    def as_bits(self):
        return {bits.to_bits(s, self.m): c for s, c in sorted(self.coeffs.items())}


@dataclass(frozen=True)
class KMParams:
    theta: float
    delta: float
    sample_budget: int = 0

    def __post_init__(self):
        if self.theta < 1:
            raise ValidationError("theta must be >= 1")
        if not 0 < self.delta < 0.5:
            raise ValidationError("delta must lie in (0, 1/2)")

    def budget(self, m):
        return self.sample_budget or km_sample_budget(self.theta, self.delta, m)


def km_sample_budget(theta, delta, m):
    """Draws per bucket-weight estimate: ceil(64 theta^4 ln(8 m theta^2 / delta))."""
    return math.ceil(64 * theta**4 * math.log(8 * m * theta**2 / delta))


# constructors -------------------------------------------------------------

def parity(m):
    return BooleanFunction(m, "parity")


def and_function(m):
    return BooleanFunction(m, "and", (), 1 << m)


def junta(m, variables, table):
    return BooleanFunction(m, "junta", (tuple(variables), table))


def constant_one(m):
    return junta(m, (), "1")


def truth_table(table, sparsity_bound=0):
    m = len(table).bit_length() - 1
    if len(table) != 1 << m or m < 1:
        raise ValidationError("truth table length must be a power of two >= 2")
    return BooleanFunction(m, "truth_table", (table,), sparsity_bound)


def sparse_poly(m, terms):
    terms = tuple((bits.to_int(s), float(c)) for s, c in (terms.items() if isinstance(terms, dict) else terms))
    return BooleanFunction(m, "sparse_poly", terms)


def make_inner_product_function(s, m=None):
    """h(x) = s.x mod 2, whose spectrum is {0: 1/2, s: -1/2}."""
    if m is None:
        if not isinstance(s, str):
            raise ValidationError("m is required when s is an integer")
        m = len(s)
    s = bits.to_int(s)
    if s == 0:
        raise ValidationError("s must be non-zero")
    return BooleanFunction(m, "inner_product", (s,), 2)


def random_junta(m, k, rng_, nonconstant=True):
    """Random k-junta on m bits (for test corpora)."""
    variables = tuple(int(v) for v in rng_.choice(m, size=k, replace=False))
    while True:
        table = "".join(rng_.choice(["0", "1"], size=1 << k))
        if "1" in table and (not nonconstant or "0" in table):
            return junta(m, variables, table)


# Fourier analysis ---------------------------------------------------------

def _values(f):
    if isinstance(f, np.ndarray):
        return f.astype(np.float64), int(f.shape[0]).bit_length() - 1
    m = f.m
    if m > defaults.MAX_EXACT_COEFFICIENT_BITS:
        raise CapacityError(f"exact transform limited to m <= {defaults.MAX_EXACT_COEFFICIENT_BITS}")
    return np.asarray(f.eval(np.arange(1 << m, dtype=np.int64)), dtype=np.float64), m


def fourier_coefficient_exact(f, s):
    """2^-m sum_x f(x)(-1)^(s.x) by direct summation.

    ``f`` is a BooleanFunction, SignedFunction or a length-2^m value vector.
    """
    values, m = _values(f)
    if m > defaults.MAX_EXACT_COEFFICIENT_BITS:
        raise CapacityError(f"exact transform limited to m <= {defaults.MAX_EXACT_COEFFICIENT_BITS}")
    signs = 1.0 - 2.0 * kernels.masked_parity(np.arange(1 << m, dtype=np.int64), bits.to_int(s))
    return math.fsum(values * signs) / (1 << m)


def wht_spectrum(f):
    """All 2^m coefficients via the fast transform, zeros dropped."""
    m = f.m if not isinstance(f, np.ndarray) else int(f.shape[0]).bit_length() - 1
    if m > defaults.MAX_WHT_BITS:
        raise CapacityError(f"full transform limited to m <= {defaults.MAX_WHT_BITS}")
    values, m = _values(f)
    hat = kernels.fwht(values) / (1 << m)
    nz = np.flatnonzero(np.abs(hat) >= defaults.ZERO_CUTOFF)
    return FourierSpectrum(m, {int(s): float(hat[s]) for s in nz})


def lift_to_signed(f):
    return SignedFunction(f, f.sparsity_bound + 1)


def degree(spec):
    if not spec.coeffs:
        raise ValidationError("degree of the zero function is undefined")
    return max(bits.weight(s) for s in spec.coeffs)


def _uniform_inputs(gen, m, size):
    return gen.integers(0, 1 << m, size=size, dtype=np.int64)


def coefficient_sample_count(accuracy, delta):
    return math.ceil(4 * math.log(2 / delta) / accuracy**2)


def estimate_fourier_coefficient(g, s, accuracy, delta, seed, rep=0):
    """Mean of g(x)(-1)^(s.x) over K uniform x, K = ceil(4 q^2 ln(2/delta)), q = 1/accuracy.

    Within ``accuracy`` of g^(s) with probability at least 1 - delta.
    """
    if not 0 < accuracy <= 1:
        raise ValidationError("accuracy must lie in (0, 1]")
    if not 0 < delta < 1:
        raise ValidationError("delta must lie in (0, 1)")
    s = bits.to_int(s)
    total_k = coefficient_sample_count(accuracy, delta)
    if total_k > defaults.MAX_SAMPLES:
        raise CapacityError(f"coefficient estimate needs {total_k} samples")
    gen = rng.stream(seed, "coef", s, rep)
    acc = 0
    left = total_k
    while left:
        size = min(left, defaults.SAMPLE_CHUNK)
        xs = _uniform_inputs(gen, g.m, size)
        vals = g.eval(xs).astype(np.int64)
        vals[kernels.masked_parity(xs, s).astype(bool)] *= -1
        acc += int(vals.sum())
        left -= size
    return acc / total_k


def _level_weights(g, k, prefixes, samples, gen):
    """Monte Carlo bucket weights W(rho) for all length-k prefixes in ``prefixes``."""
    m = g.m
    shift = m - k
    use_hist = k <= defaults.KM_HISTOGRAM_MAX_BITS
    hist = np.zeros(1 << k) if use_hist else None
    direct = np.zeros(len(prefixes))
    left = samples
    while left:
        size = min(left, defaults.SAMPLE_CHUNK)
        x1 = gen.integers(0, 1 << k, size=size, dtype=np.int64)
        x2 = gen.integers(0, 1 << k, size=size, dtype=np.int64)
        y = gen.integers(0, 1 << shift, size=size, dtype=np.int64) if shift else 0
        prod = (g.eval((x1 << shift) | y) * g.eval((x2 << shift) | y)).astype(np.float64)
        d = x1 ^ x2
        if use_hist:
            hist += np.bincount(d, weights=prod, minlength=1 << k)
        else:
            for i, rho in enumerate(prefixes):
                par = kernels.masked_parity(d, rho).astype(bool)
                direct[i] += prod.sum() - 2.0 * prod[par].sum()
        left -= size
    if use_hist:
        transformed = kernels.fwht(hist)
        return transformed[np.asarray(prefixes, dtype=np.int64)] / samples
    return direct / samples


def km_significant_set(g, params, seed, exact="auto"):
    """Indices of the significant Fourier coefficients of a +-1 function.

    With probability at least 1 - delta the result L satisfies: every s in L
    has |g^(s)| > 1/(2 theta); every s outside has |g^(s)| < 1/theta; and
    |L| < 4 theta^2.

    ``exact="auto"`` uses the full transform when a truth table exists
    (m <= 20); ``exact=False`` always runs the sampled prefix recursion.
    Returns a frozenset of m-bit integers.
    """
    theta, m = params.theta, g.m
    leaf_threshold = defaults.KM_LEAF_FACTOR / theta
    if exact is True or (exact == "auto" and g.has_truth_table and m <= defaults.MAX_WHT_BITS):
        spec = wht_spectrum(g)
        return frozenset(s for s, c in spec.coeffs.items() if abs(c) >= leaf_threshold)

    samples = params.budget(m)
    if samples > defaults.MAX_SAMPLES:
        raise CapacityError(f"KM weight estimates need {samples} samples each")
    keep = defaults.KM_KEEP_FACTOR / theta**2
    cap = defaults.KM_FRONTIER_FACTOR * theta**2
    frontier = [0]
    for k in range(1, m + 1):
        children = [(rho << 1) | b for rho in frontier for b in (0, 1)]
        weights = _level_weights(g, k, children, samples, rng.stream(seed, "km-level", k))
        frontier = [rho for rho, w in zip(children, weights) if w > keep]
        if len(frontier) > cap:
            raise CapacityError(
                f"KM frontier holds {len(frontier)} prefixes at depth {k} "
                f"(cap {cap:g}); the sparsity promise looks violated")
    leaf_delta = params.delta / (2 * max(1, len(frontier)))
    out = set()
    for s in frontier:
        a = estimate_fourier_coefficient(g, s, 1 / (4 * theta), leaf_delta, seed, rep=k + 1)
        if abs(a) >= leaf_threshold:
            out.add(s)
    return frozenset(out)


# file format --------------------------------------------------------------

def _kv(tokens, line_no):
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ParseError(f"expected key=value, got {tok!r}", line_no)
        key, value = tok.split("=", 1)
        out[key] = value
    return out


def parse_function(text):
    """Parse the ``fn m=<int> family=<tag>`` text format."""
    lines = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), 1)]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError("empty function file", 1)
    line_no, header = lines[0]
    tokens = header.split()
    if tokens[0] != "fn":
        raise ParseError("header must start with 'fn'", line_no)
    head = _kv(tokens[1:], line_no)
    try:
        m = int(head["m"])
        family = head["family"]
    except (KeyError, ValueError) as exc:
        raise ParseError(f"header needs m=<int> and family=<tag> ({exc})", line_no) from None
    sparsity = int(head.get("sparsity", 0))
    body = lines[1:]
    if family in ("parity", "and"):
        if body:
            raise ParseError(f"{family} takes no body", body[0][0])
        return BooleanFunction(m, family, (), sparsity)
    if not body:
        raise ParseError(f"{family} needs a body", line_no + 1)
    if family == "truth_table":
        return BooleanFunction(m, family, (body[0][1],), sparsity)
    if family == "inner_product":
        kv = _kv(body[0][1].split(), body[0][0])
        s = bits.to_int(kv["s"])
        return BooleanFunction(m, family, (s,), sparsity)
    if family == "junta":
        kv = _kv(body[0][1].split(), body[0][0])
        variables = tuple(int(v) for v in kv["vars"].split(",") if v != "")
        return BooleanFunction(m, family, (variables, kv["table"]), sparsity)
    if family == "sparse_poly":
        terms = []
        for ln_no, ln in body:
            kv = _kv(ln.split(), ln_no)
            try:
                terms.append((bits.to_int(kv["s"]), float(kv["coeff"])))
            except (KeyError, ValueError) as exc:
                raise ParseError(f"bad term ({exc})", ln_no) from None
        return BooleanFunction(m, family, tuple(terms), sparsity)
    raise ParseError(f"unknown family {family!r}", line_no)
