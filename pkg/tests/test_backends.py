import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from helpers import dense_pauli, dense_state, dense_unitary
from scpsim import backends, circuit, oracle, rng
from scpsim.backends import (BasisPermutation, ECSOperation, PauliOperator, apply_basis_preserving,
                             backend_expectation, conjugate_pauli_through_clifford, ecs_for_simon_type,
                             ecs_from_pauli, enumerate_moments, estimate_ct_ecs, product_ct_state)
from scpsim.circuit import QuantumCircuit, gate
from scpsim.errors import UnsupportedFamilyError, ValidationError
from scpsim.verify import dense_to_pauli, moment_corpus, random_clifford_case

OMEGA = np.exp(1j * np.pi / 4)
paulis = st.integers(1, 4).flatmap(
    lambda n: st.tuples(st.integers(0, 3), st.text("IXYZ", min_size=n, max_size=n)))


# Pauli algebra ---------------------------------------------------------------

@settings(max_examples=80, deadline=None)
@given(st.data())
def test_pauli_product_matches_dense(data):
    n = data.draw(st.integers(1, 4))
    ps = [PauliOperator(data.draw(st.integers(0, 3)), data.draw(st.text("IXYZ", min_size=n, max_size=n)))
          for _ in range(3)]
    a, b, c = ps
    assert np.allclose((a * b).to_dense(), a.to_dense() @ b.to_dense())
    assert (a * b) * c == a * (b * c)


@settings(max_examples=40, deadline=None)
@given(paulis)
def test_pauli_dense_form(p):
    op = PauliOperator(*p)
    assert np.allclose(op.to_dense(), [1, 1j, -1, -1j][p[0]] * dense_pauli(p[1]))
    assert op.hermitian == (p[0] % 2 == 0)


def test_pauli_parse_and_str():
    assert PauliOperator.parse("-iXZ") == PauliOperator(3, "XZ")
    assert str(PauliOperator(2, "YI")) == "-YI"
    with pytest.raises(ValidationError):
        PauliOperator(0, "XQ")


# conjugation -----------------------------------------------------------------

def test_conjugation_examples():
    assert conjugate_pauli_through_clifford([gate("H", 1)], PauliOperator.parse("IZ")) == PauliOperator(0, "IX")
    assert conjugate_pauli_through_clifford([gate("CZ", 0, 1)], PauliOperator.parse("ZI")) == PauliOperator(0, "ZI")
    got = conjugate_pauli_through_clifford([gate("CZ", 0, 1)], PauliOperator.parse("XI"))
    cz = np.diag([1, 1, 1, -1])
    assert np.allclose(got.to_dense(), cz @ dense_pauli("XI") @ cz)
    assert got == PauliOperator(0, "XZ")


def test_conjugation_phase_through_s():
    # S^dag X S = -Y
    assert conjugate_pauli_through_clifford([gate("S", 0)], PauliOperator.parse("X")) == PauliOperator(2, "Y")


def test_conjugation_rejects_non_clifford():
    with pytest.raises(ValidationError):
        conjugate_pauli_through_clifford([gate("T", 0)], PauliOperator.parse("Z"))


def test_conjugation_matches_dense_on_500_circuits():
    gen = np.random.default_rng(21)
    for _ in range(500):
        n, gates, p = random_clifford_case(gen)
        u = dense_unitary(gates, n)
        got = conjugate_pauli_through_clifford(gates, p)
        assert (got.phase, got.letters) == dense_to_pauli(u.conj().T @ p.to_dense() @ u)


def test_conjugation_with_x_z_sdg():
    gen = np.random.default_rng(3)
    for _ in range(100):
        n = int(gen.integers(1, 4))
        gates = [gate(str(k), int(gen.integers(n))) for k in gen.choice(["X", "Z", "SDG", "H", "S"], size=8)]
        p = PauliOperator(int(gen.integers(4)), "".join(gen.choice(list("IXYZ"), size=n)))
        u = dense_unitary(gates, n)
        assert np.allclose(conjugate_pauli_through_clifford(gates, p).to_dense(), u.conj().T @ p.to_dense() @ u)


# ECS operations ------------------------------------------------------------------

def test_ecs_from_pauli_examples():
    z = ecs_from_pauli(PauliOperator.parse("Z"))
    xs = np.array([0, 1])
    assert np.array_equal(z.beta(0, xs), [1, -1]) and np.array_equal(z.gamma(0, xs), xs)
    x = ecs_from_pauli(PauliOperator.parse("X"))
    assert np.array_equal(x.beta(0, xs), [1, 1]) and np.array_equal(x.gamma(0, xs), [1, 0])
    assert np.allclose(ecs_from_pauli(PauliOperator.parse("XZ")).to_dense(), dense_pauli("XZ"))
    with pytest.raises(ValidationError):
        ecs_from_pauli(PauliOperator.parse("iX"))


@settings(max_examples=60, deadline=None)
@given(paulis)
def test_ecs_from_hermitian_pauli_is_exact(p):
    op = PauliOperator(p[0] & 2, p[1])
    a = ecs_from_pauli(op).to_dense()
    assert np.allclose(a, op.to_dense())
    assert np.max(np.abs(a - a.conj().T)) <= 1e-9
    assert np.max(np.abs(a.conj().T @ a - np.eye(len(a)))) <= 1e-9


def test_simon_observable_examples():
    full = ecs_for_simon_type(range(3), "111", 4)
    assert np.allclose(full.to_dense(), dense_pauli("XXXI"))
    none = ecs_for_simon_type([], "101", 4)
    assert np.allclose(none.to_dense(), dense_pauli("ZIZI"))
    h = dense_unitary([gate("H", 0), gate("H", 2)], 3)
    mixed = ecs_for_simon_type([0, 2], "110", 3)
    assert np.allclose(mixed.to_dense(), h @ dense_pauli("ZZI") @ h)


def test_ecs_columns_and_padding():
    a = ecs_from_pauli(PauliOperator(2, "YXZ"))
    xs = np.arange(8)
    assert np.allclose(np.abs(a.beta(0, xs)) ** 2, 1)
    assert a.basis_preserving and a.sparsity == 1


# CT states ---------------------------------------------------------------------

def test_product_state_examples():
    zero = product_ct_state(["0"] * 3)
    assert np.array_equal(zero.sample(rng.stream(1, "t"), 10), np.zeros(10))
    assert zero.amplitude(np.array([0]))[0] == 1
    plus = product_ct_state(["+"] * 3)
    assert np.allclose(plus.to_dense(), 2 ** -1.5)
    t = product_ct_state(["T+"])
    assert np.allclose(t.to_dense(), [1 / math.sqrt(2), OMEGA / math.sqrt(2)])
    assert product_ct_state(["0", "+", "T+"]).flat_magnitude == 0.5
    with pytest.raises(ValidationError):
        product_ct_state(["-"])


@pytest.mark.parametrize("preps", [["+", "0", "T+", "+"], ["T+"] * 5, ["0", "+"]])
def test_product_state_matches_kronecker(preps):
    vec = {"0": np.array([1, 0]), "+": np.array([1, 1]) / math.sqrt(2),
           "T+": np.array([1, OMEGA]) / math.sqrt(2)}
    want = np.array([1.0])
    for p in preps:
        want = np.kron(want, vec[p])
    assert np.allclose(product_ct_state(preps).to_dense(), want)


def _chi_square_ok(phi, draws=100_000, seed=0):
    dense = np.abs(phi.to_dense()) ** 2
    assert abs(dense.sum() - 1) <= 1e-9
    xs = phi.sample(rng.stream(seed, "chi"), draws)
    assert np.all(dense[xs] > 0)
    support = np.flatnonzero(dense > 0)
    observed = np.bincount(xs, minlength=len(dense))[support]
    return stats.chisquare(observed, dense[support] * draws).pvalue > 1e-3


def test_samplers_are_consistent_with_amplitudes():
    gen = np.random.default_rng(5)
    phi = product_ct_state(["+", "T+", "0", "+", "+", "T+"])
    assert _chi_square_ok(phi)
    D = circuit.random_diagonal_gates(6, 12, gen) + [gate("X", 2)]
    assert _chi_square_ok(apply_basis_preserving(phi, BasisPermutation(6, D)))


def test_apply_basis_preserving_examples():
    phi = product_ct_state(["0"] * 3)
    ident = ecs_from_pauli(PauliOperator.parse("III"))
    assert np.allclose(apply_basis_preserving(phi, ident).to_dense(), phi.to_dense())
    flipped = apply_basis_preserving(phi, ecs_from_pauli(PauliOperator.parse("XII")))
    assert np.allclose(flipped.to_dense(), np.eye(8)[4])
    assert flipped.flat_magnitude == phi.flat_magnitude


@pytest.mark.parametrize("seed", range(6))
def test_diagonal_layer_on_plus_state_matches_oracle(seed):
    gen = np.random.default_rng(seed)
    n = int(gen.integers(2, 11))
    D = circuit.random_diagonal_gates(n, 3 * n, gen, ("CZ", "CCZ", "Z"))
    phi = apply_basis_preserving(product_ct_state(["+"] * n), BasisPermutation(n, D))
    ref = oracle.run(QuantumCircuit(n, n, [[gate("H", q) for q in range(n)]] + [[g] for g in D])).amps
    assert np.allclose(phi.to_dense(), ref, atol=1e-12)
    assert np.allclose(np.abs(ref), 2 ** (-n / 2))


def test_basis_permutation_with_non_hermitian_phases():
    gen = np.random.default_rng(8)
    n = 5
    D = circuit.random_diagonal_gates(n, 10, gen, ("T", "S", "TDG", "CZ", "CCZ")) + [gate("X", 1), gate("T", 1)]
    phi = apply_basis_preserving(product_ct_state(["+", "T+", "0", "+", "+"]), BasisPermutation(n, D))
    start = np.kron(np.kron(np.kron(np.kron([1, 1], [1, OMEGA]), [1, 0]), [1, 1]), [1, 1]) / 4
    assert np.allclose(phi.to_dense(), dense_unitary(D, n) @ start, atol=1e-12)


def test_non_basis_preserving_rejected():
    two = ECSOperation(1, 2, lambda j, x: np.ones(len(x)) / math.sqrt(2), lambda j, x: x ^ j)
    with pytest.raises(ValidationError):
        apply_basis_preserving(product_ct_state(["0"]), two)
    with pytest.raises(ValidationError):
        BasisPermutation(2, [gate("H", 0)])


# estimator -----------------------------------------------------------------------

def test_estimator_ground_state_is_exact():
    phi = product_ct_state(["0"] * 4)
    est = estimate_ct_ecs(phi, ecs_from_pauli(PauliOperator.parse("ZIZZ")), 0.1, 0.01, seed=0)
    assert est.value == 1 and est.path == "hoeffding"
    assert est.samples == math.ceil(2 * math.log(200) / 0.01)


def test_estimator_falls_back_to_median_of_means():
    phi = product_ct_state(["+", "+"])
    # a two-sparse Hermitian unitary: (X + Z)/sqrt2 on qubit 0
    hmat = np.array([[1, 1], [1, -1]]) / math.sqrt(2)

    def beta(j, xs):
        b = (xs >> 1) & 1
        return np.where(j == 0, hmat[b, b], hmat[1 - b, b]).astype(complex)

    def gamma(j, xs):
        return xs if j == 0 else xs ^ 2

    A = ECSOperation(2, 2, beta, gamma)
    assert np.allclose(A.to_dense(), np.kron(hmat, np.eye(2)))
    est = estimate_ct_ecs(phi, A, 0.05, 0.01, seed=3)
    assert est.path == "median-of-means"
    assert est.samples == 18 * math.ceil(math.log(100)) * math.ceil(6 / 0.05**2)
    assert abs(est.value - 1 / math.sqrt(2)) <= 0.05


def test_enumerated_moments_for_two_sparse_observable():
    phi = product_ct_state(["T+", "+"])
    hmat = np.array([[1, 1], [1, -1]]) / math.sqrt(2)

    def beta(j, xs):
        b = (xs >> 1) & 1
        return np.where(j == 0, hmat[b, b], hmat[1 - b, b]).astype(complex)

    A = ECSOperation(2, 2, beta, lambda j, xs: xs if j == 0 else xs ^ 2)
    mean, second, _ = enumerate_moments(phi, A)
    psi = phi.to_dense()
    assert mean == pytest.approx(psi.conj() @ A.to_dense() @ psi, abs=1e-12)
    assert second <= 1 + 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_iqp_estimate_within_epsilon(seed):
    c = circuit.random_iqp(10, 5, 14, seed=seed)
    s = int(np.random.default_rng(seed).integers(1, 32))
    est = backend_expectation(c, s, 0.02, 0.01, seed=seed)
    assert abs(est.value - oracle.pauli_expectation_exact(c, s)) <= 0.02


@pytest.mark.parametrize("seed", range(4))
def test_clifford_magic_estimate_within_epsilon(seed):
    c = circuit.random_clifford_magic(10, 6, 20, seed=seed)
    s = int(np.random.default_rng(seed).integers(1, 64))
    est = backend_expectation(c, s, 0.02, 0.01, seed=seed)
    assert abs(est.value - oracle.pauli_expectation_exact(c, s)) <= 0.02


def test_dispatcher_identity_and_errors():
    c = circuit.random_iqp(4, 2, 4, seed=0)
    assert backend_expectation(c, "00", 0.1, 0.1, seed=0).samples == 0
    assert float(backend_expectation(c, 0, 0.1, 0.1, seed=0)) == 1.0
    generic = circuit.random_circuit(3, 3, 8, seed=0)
    with pytest.raises(UnsupportedFamilyError):
        backend_expectation(generic, 1, 0.1, 0.1, seed=0)
    with pytest.raises(ValidationError):
        backend_expectation(c, 1, 0.1, 0.1, seed=0, backend="magic")


def test_clifford_backend_is_exact():
    for seed in range(20):
        c = circuit.random_clifford_magic(6, 4, 15, seed=seed)
        for s in range(16):
            assert backends.clifford_expectation(c, s) == pytest.approx(
                oracle.pauli_expectation_exact(c, s), abs=1e-12)
    stab = circuit.random_circuit(5, 5, 30, seed=1, kinds=("H", "S", "CZ", "X", "Z"))
    for s in range(32):
        assert backends.clifford_expectation(stab, s) == pytest.approx(
            oracle.pauli_expectation_exact(stab, s), abs=1e-12)


@pytest.mark.parametrize("backend", ["exact", "clifford", "commuting"])
def test_other_backends_agree_with_oracle(backend):
    c = circuit.random_clifford_magic(5, 3, 10, seed=4)
    for s in range(1, 8):
        est = backend_expectation(c, s, 0.05, 0.01, seed=s, backend=backend)
        assert abs(est.value - oracle.pauli_expectation_exact(c, s)) <= 0.05


def test_check_backend():
    generic = circuit.random_circuit(3, 3, 8, seed=0, kinds=("H", "T", "CZ"))
    backends.check_backend(generic, "exact")
    with pytest.raises(UnsupportedFamilyError):
        backends.check_backend(generic, "ct-ecs")
    with pytest.raises(UnsupportedFamilyError):
        backends.check_backend(generic, "clifford")
    assert backends.auto_backend(generic) == "exact"
    assert backends.auto_backend(circuit.random_iqp(3, 3, 3, seed=0)) == "ct-ecs"


def test_malformed_family_sections_rejected():
    bad = QuantumCircuit(2, 2, [[gate("H", 0), gate("H", 1)], [gate("T", 0)]], "clifford_magic",
                         (("H", 0), ("T", 1)))
    with pytest.raises(ValidationError):
        backend_expectation(bad, 1, 0.1, 0.1, seed=0)


# certificates -----------------------------------------------------------------------

def test_moment_certificates_on_corpus():
    for label, c, s, phi, A in moment_corpus(seed=42, count=60):
        mean, second, top = enumerate_moments(phi, A)
        assert abs(mean - oracle.pauli_expectation_exact(c, s)) <= 1e-9
        assert second <= 1 + 1e-9
        assert top <= 1 + 1e-12


def test_constructed_operations_are_hermitian_unitaries():
    for label, c, s, phi, A in moment_corpus(seed=7, count=30):
        if A.n > 8:
            continue
        a = A.to_dense()
        assert np.max(np.abs(a - a.conj().T)) <= 1e-9
        assert np.max(np.abs(a.conj().T @ a - np.eye(len(a)))) <= 1e-9
        assert abs(np.sum(np.abs(phi.to_dense()) ** 2) - 1) <= 1e-9


def test_ct_state_matches_oracle_for_simon_circuits():
    for label, c, s, phi, A in moment_corpus(seed=3, count=30):
        if label != "simon_type":
            continue
        q = {g.qubits[0] for g in c.section_gates("R")}
        before = dense_unitary(c.section_gates("R"), c.n) @ dense_state(c)
        assert np.allclose(phi.to_dense(), before, atol=1e-12), q
