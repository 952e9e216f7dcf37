"""Oracle-anchored acceptance checks, shared by the test suite and ``scpsim verify``.

Each check returns a :class:`CheckResult`; ``scale`` shrinks trial counts for
quick runs (1.0 is the full acceptance size).
"""
import math
import time
from dataclasses import dataclass, field

import numpy as np

from scpsim import backends, boolfn, circuit, commuting, kernels, oracle, sim
from scpsim.backends import PauliOperator
from scpsim.circuit import Gate, QuantumCircuit


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:>2} {self.name}: {shown} ({self.seconds:.1f}s)"

    def to_record(self):
        return {"criterion": self.number, "name": self.name, "pass": self.passed,
                "seconds": self.seconds, **self.detail}


def _fmt(v):
    return f"{v:.3g}" if isinstance(v, float) else str(v)


def _trials(n, scale):
    return max(1, int(round(n * scale)))


def _timed(number, name, fn):
    t0 = time.perf_counter()
    passed, detail = fn()
    return CheckResult(number, name, bool(passed), detail, time.perf_counter() - t0)


def _random_truth_table(m, gen):
    while True:
        table = "".join(gen.choice(["0", "1"], size=1 << m))
        if "1" in table:
            return boolfn.truth_table(table)


def _identity_corpus(trials, seed):
    gen = np.random.default_rng(seed)
    for t in range(trials):
        n = int(gen.integers(1, 9))
        m = int(gen.integers(1, min(n, 6) + 1))
        c = circuit.random_circuit(n, m, int(gen.integers(0, 41)), seed=seed * 1000 + t)
        yield c, _random_truth_table(m, gen)


def _state_expectation(state, n, s_full):
    # <psi|Z(s)|psi> straight from amplitudes
    signs = 1.0 - 2.0 * kernels.masked_parity(np.arange(1 << n, dtype=np.int64), s_full)
    return float(np.real(np.vdot(state.amps, signs * state.amps)))


def check_acceptance_identity(scale=1.0, seed=1):
    def run():
        worst = 0.0
        for c, f in _identity_corpus(_trials(200, scale), seed):
            dist = oracle.output_distribution(c)
            direct = oracle.acceptance_probability_exact(dist, f)
            spec = boolfn.wht_spectrum(boolfn.lift_to_signed(f))
            via = 0.5 - 0.5 * math.fsum(ch * oracle.pauli_expectation_exact(dist, s)
                                        for s, ch in spec.coeffs.items())
            worst = max(worst, abs(direct - via))
        return worst <= 1e-9, {"max_abs_diff": worst}
    return _timed(1, "acceptance-probability identity", run)


def check_fourier_distribution(scale=1.0, seed=1):
    def run():
        worst = 0.0
        for c, _ in _identity_corpus(_trials(200, scale), seed):
            state = oracle.run(c)
            hat = oracle.marginal(state, c.m).fourier()
            for s in range(1 << c.m):
                z = _state_expectation(state, c.n, s << (c.n - c.m))
                worst = max(worst, abs(hat[s] - z / (1 << c.m)))
        return worst <= 1e-9, {"max_abs_diff": worst}
    return _timed(2, "Fourier coefficients of the output distribution", run)


def check_parity(scale=1.0, seed=2):
    def run():
        gen = np.random.default_rng(seed)
        worst = 0.0
        for t in range(_trials(50, scale)):
            n = int(gen.integers(1, 9))
            c = circuit.random_circuit(n, n, int(gen.integers(0, 41)), seed=seed * 1000 + t)
            p = oracle.acceptance_probability_exact(c, boolfn.parity(n))
            z = _state_expectation(oracle.run(c), n, (1 << n) - 1)
            worst = max(worst, abs(p - (0.5 - 0.5 * z)))
        return worst <= 1e-9, {"max_abs_diff": worst}
    return _timed(3, "parity identity", run)


def km_violations(L, spec, theta):
    """Count broken KM guarantees of L against an exact spectrum."""
    bad = 0
    bad += sum(1 for s in L if not abs(spec[s]) > 1 / (2 * theta))
    bad += sum(1 for s, ch in spec.coeffs.items() if s not in L and not abs(ch) < 1 / theta)
    bad += 0 if len(L) < 4 * theta**2 else 1
    return bad


def check_km(scale=1.0, seed=3, m=16, theta=8, delta=0.01):
    def run():
        gen = np.random.default_rng(seed)
        runs = _trials(50, scale)
        clean = 0
        for t in range(runs):
            f = boolfn.random_junta(m, 4, gen)
            g = boolfn.lift_to_signed(f)
            spec = boolfn.wht_spectrum(g)
            L = boolfn.km_significant_set(g, boolfn.KMParams(theta, delta), seed * 1000 + t, exact=False)
            clean += km_violations(L, spec, theta) == 0
        need = runs - max(0, runs // 50)
        return clean >= need, {"clean": clean, "runs": runs, "required": need}
    return _timed(4, "significant-set contract (sampled)", run)


def sparse_function(m, gen):
    """A non-zero 3-junta (at most 8 Fourier coefficients)."""
    return boolfn.random_junta(m, min(3, m), gen)


def end_to_end_trial(family, t, seed, p_target=10, delta=0.01):
    gen = np.random.default_rng([seed, t, 0 if family == "iqp" else 1])
    n = int(gen.integers(6, 13))
    m = int(gen.integers(3, min(n, 8) + 1))
    cseed = int(gen.integers(1 << 31))
    if family == "iqp":
        c = circuit.random_iqp(n, m, int(gen.integers(n, 3 * n)), cseed)
    else:
        c = circuit.random_clifford_magic(n, m, int(gen.integers(n, 4 * n)), cseed)
    f = sparse_function(m, gen)
    budget = sim.AccuracyBudget.for_function(f, p_target, delta)
    res = sim.simulate(c, f, "ct-ecs", budget, seed=int(gen.integers(1 << 62)))
    return abs(res.estimate - oracle.acceptance_probability_exact(c, f))


def check_end_to_end(scale=1.0, seed=5, tol=0.05):
    def run():
        trials = _trials(100, scale)
        detail, ok = {}, True
        for family in ("iqp", "clifford_magic"):
            errs = [end_to_end_trial(family, t, seed) for t in range(trials)]
            good = sum(e <= tol for e in errs)
            need = math.ceil(0.95 * trials)
            detail[f"{family}_within"] = f"{good}/{trials}"
            detail[f"{family}_max_err"] = max(errs)
            ok = ok and good >= need
        return ok, detail
    return _timed(5, "end-to-end simulation (ct-ecs)", run)


def dense_to_pauli(mat):
    """Recover (phase, letters) of a dense Pauli matrix by trace overlaps."""
    n = int(mat.shape[0]).bit_length() - 1
    for idx in range(4**n):
        letters = "".join("IXYZ"[(idx >> (2 * (n - 1 - q))) & 3] for q in range(n))
        overlap = np.trace(PauliOperator(0, letters).to_dense().conj().T @ mat) / (1 << n)
        if abs(abs(overlap) - 1) < 1e-9:
            k = int(round(np.angle(overlap) / (np.pi / 2))) % 4
            return k, letters
    raise ValueError("matrix is not a Pauli")


def random_clifford_case(gen, n_max=4, size_max=12):
    n = int(gen.integers(1, n_max + 1))
    kinds = ["H", "S", "CZ"] if n > 1 else ["H", "S"]
    gates = []
    for _ in range(int(gen.integers(0, size_max + 1))):
        k = str(gen.choice(kinds))
        gates.append(Gate(k, tuple(int(q) for q in gen.choice(n, size=2 if k == "CZ" else 1, replace=False))))
    p = PauliOperator(int(gen.integers(4)), "".join(gen.choice(list("IXYZ"), size=n)))
    return n, gates, p


def check_clifford(scale=1.0, seed=6):
    def run():
        gen = np.random.default_rng(seed)
        trials = _trials(500, scale)
        match = 0
        for _ in range(trials):
            n, gates, p = random_clifford_case(gen)
            u = oracle.unitary(QuantumCircuit(n, n, circuit.pack_layers(gates)))
            want = dense_to_pauli(u.conj().T @ p.to_dense() @ u)
            got = backends.conjugate_pauli_through_clifford(gates, p)
            match += (got.phase, got.letters) == want
        return match == trials, {"matches": f"{match}/{trials}"}
    return _timed(6, "Clifford conjugation vs dense", run)


def check_hadamard_test(scale=1.0, seed=7):
    def run():
        gen = np.random.default_rng(seed)
        worst = 0.0
        for t in range(_trials(200, scale)):
            n = int(gen.integers(1, 9))
            m = int(gen.integers(1, n + 1))
            c = circuit.random_circuit(n, m, int(gen.integers(0, 31)), seed=seed * 1000 + t)
            s = int(gen.integers(1, 1 << m))
            p0 = commuting.ancilla_prob0(commuting.build_hadamard_test(c, s))
            worst = max(worst, abs(p0 - (1 + oracle.pauli_expectation_exact(c, s)) / 2))
        return worst <= 1e-9, {"max_abs_diff": worst}
    return _timed(7, "Hadamard-test ancilla probability", run)


def commuting_violations(c, f):
    """Structural checks for every queried s; returns (violations, s count)."""
    bad, count = 0, 0
    support, spec = commuting._signed_support(f)
    deg = boolfn.degree(spec) if support else 0
    two_local = circuit.max_arity(c) <= 2
    cone_max = max(len(circuit.lightcone(c, j)) for j in range(c.m))
    for s in support:
        count += 1
        h = commuting.build_hadamard_test(c, s)
        cc = commuting.regroup_commuting(h)
        tv = commuting.total_variation(oracle.run(h.circuit).probabilities(),
                                       np.abs(commuting.commuting_state(cc)) ** 2)
        bad += tv > 1e-9
        bad += commuting.max_commutator_norm(cc) > 1e-9
        bad += not (cc.gate_count == h.s.weight <= deg)
        bad += cc.locality > 1 + cone_max
        if two_local:
            bad += cc.locality > 2 ** circuit.depth(c) + 1
    return bad, count


def check_commuting_structure(scale=1.0, seed=8):
    def run():
        gen = np.random.default_rng(seed)
        bad = total = 0
        for t in range(_trials(50, scale)):
            n = int(gen.integers(2, 11))
            d = int(gen.integers(1, 4))
            m = int(gen.integers(1, n + 1))
            c = circuit.build_random_constant_depth(n, m, d, seed=seed * 1000 + t)
            b, k = commuting_violations(c, sparse_function(m, gen))
            bad += b
            total += k
        return bad == 0, {"violations": bad, "queried_s": total}
    return _timed(8, "commuting-circuit structure", run)


def _failure_rate_ok(failures, trials, delta):
    sigma = math.sqrt(delta * (1 - delta) / trials)
    return failures / trials <= delta + 3 * sigma


def check_calibration(scale=1.0, seed=9):
    def run():
        trials = _trials(1000, scale)
        gen = np.random.default_rng(seed)
        f = boolfn.random_junta(8, 4, gen)
        g = boolfn.lift_to_signed(f)
        spec = boolfn.wht_spectrum(g)
        s = max(spec.coeffs, key=lambda k: (abs(spec[k]) < 1, k))
        acc, delta = 1 / 5, 0.05
        coef_fail = sum(abs(boolfn.estimate_fourier_coefficient(g, s, acc, delta, seed, rep=t) - spec[s]) > acc
                        for t in range(trials))
        c = circuit.build_random_constant_depth(5, 5, 2, seed=seed)
        s2 = 0b10110
        truth = oracle.pauli_expectation_exact(c, s2)
        eps = 0.1
        comm_fail = sum(abs(commuting.estimate_expectation_commuting(c, s2, eps, delta, seed * 7919 + t).value
                            - truth) > eps for t in range(trials))
        ok = _failure_rate_ok(coef_fail, trials, delta) and _failure_rate_ok(comm_fail, trials, delta)
        return ok, {"coefficient_failures": f"{coef_fail}/{trials}",
                    "commuting_failures": f"{comm_fail}/{trials}"}
    return _timed(9, "estimator calibration", run)


def moment_corpus(seed, count):
    """(label, flat-path?, CT state, ECS observable) pairs at n <= 10."""
    gen = np.random.default_rng(seed)
    for t in range(count):
        n = int(gen.integers(1, 11))
        m = int(gen.integers(1, n + 1))
        s = int(gen.integers(1, 1 << m))
        kind = t % 3
        if kind == 0:
            c = circuit.random_iqp(n, m, int(gen.integers(0, 3 * n + 1)), int(gen.integers(1 << 31)))
        elif kind == 1:
            c = circuit.random_clifford_magic(n, m, int(gen.integers(0, 4 * n + 1)), int(gen.integers(1 << 31)))
        else:
            Q = [q for q in range(n) if gen.random() < 0.6]
            R = [q for q in range(n) if gen.random() < 0.6]
            D = circuit.random_diagonal_gates(n, int(gen.integers(0, 3 * n + 1)), gen,
                                              ("Z", "CZ", "CCZ", "T", "S", "TDG", "SDG"))
            D += [Gate("X", (int(q),)) for q in gen.choice(n, size=int(gen.integers(0, 3)))]
            c = circuit.build_simon_type(n, m, Q, R, D)
        phi, A = backends.ct_ecs_pair(c, s)
        yield ("iqp", "clifford_magic", "simon_type")[kind], c, s, phi, A


def check_moments(scale=1.0, seed=10):
    def run():
        worst_second, worst_max, worst_bias = 0.0, 0.0, 0.0
        for label, c, s, phi, A in moment_corpus(seed, _trials(150, scale)):
            mean, second, top = backends.enumerate_moments(phi, A)
            worst_second = max(worst_second, second)
            worst_bias = max(worst_bias, abs(mean - oracle.pauli_expectation_exact(c, s)))
            worst_max = max(worst_max, top)  # every family here takes the flat path
        ok = worst_second <= 1 + 1e-9 and worst_max <= 1 + 1e-12 and worst_bias <= 1e-9
        return ok, {"max_second_moment": worst_second, "max_abs_Y": worst_max, "max_bias": worst_bias}
    return _timed(10, "second-moment and boundedness certificates", run)


CHECKS = (check_acceptance_identity, check_fourier_distribution, check_parity, check_km, check_end_to_end,
          check_clifford, check_hadamard_test, check_commuting_structure, check_calibration, check_moments)


def run_all(scale=1.0, only=None):
    for i, check in enumerate(CHECKS, start=1):
        if only is None or i in only:
            yield check(scale)
