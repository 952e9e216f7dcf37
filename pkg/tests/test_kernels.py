"""The compiled kernels and the numpy fallback must agree bit for bit (up to float rounding)."""
import numpy as np
import pytest

from scpsim import _pykernels, kernels

ck = pytest.importorskip("scpsim._ckernels")


def test_dispatch_prefers_compiled():
    assert kernels.IMPLEMENTATION == "cython"


@pytest.mark.parametrize("k", [0, 1, 5, 12])
def test_fwht_agrees(k):
    a = np.random.default_rng(k).normal(size=1 << k)
    x, y = a.copy(), a.copy()
    ck.fwht_inplace(x)
    _pykernels.fwht_inplace(y)
    assert np.allclose(x, y, atol=1e-9)


def test_fwht_is_self_inverse_up_to_scale():
    a = np.random.default_rng(1).normal(size=64)
    assert np.allclose(kernels.fwht(kernels.fwht(a)) / 64, a)


def test_fwht_rejects_bad_length():
    with pytest.raises(ValueError):
        kernels.fwht(np.ones(6))


def test_masked_parity_agrees():
    gen = np.random.default_rng(2)
    xs = gen.integers(0, 1 << 40, size=5000, dtype=np.int64)
    for mask in (0, 1, 0b1011, (1 << 40) - 1):
        want = np.array([bin(int(x) & mask).count("1") & 1 for x in xs[:200]])
        assert np.array_equal(ck.masked_parity(xs, mask), _pykernels.masked_parity(xs, mask))
        assert np.array_equal(kernels.masked_parity(xs[:200], mask), want)


def _random_prog(gen, n, rows):
    prog = []
    for _ in range(rows):
        op = int(gen.integers(2))
        mask = 0
        for q in gen.choice(n, size=int(gen.integers(1, 4)), replace=False):
            mask |= 1 << int(q)
        prog.append((op, mask, int(gen.integers(8)) if op else 0))
    return np.array(prog, dtype=np.int64)


@pytest.mark.parametrize("seed", range(5))
def test_monomial_apply_agrees_and_inverts(seed):
    gen = np.random.default_rng(seed)
    prog = _random_prog(gen, 10, 20)
    xs = gen.integers(0, 1 << 10, size=1000, dtype=np.int64)
    for inverse in (False, True):
        yc, pc = ck.monomial_apply(xs, prog, inverse)
        yp, pp = _pykernels.monomial_apply(xs, prog, inverse)
        assert np.array_equal(yc, yp) and np.array_equal(np.asarray(pc) % 8, np.asarray(pp) % 8)
    ys, ph = kernels.monomial_apply(xs, prog)
    back, ph_back = kernels.monomial_apply(ys, prog, inverse=True)
    assert np.array_equal(back, xs)
    assert np.all((np.asarray(ph) + np.asarray(ph_back)) % 8 == 0)


def test_statevector_kernels_agree():
    gen = np.random.default_rng(4)
    n, inner = 6, 3
    psi = gen.normal(size=(1 << n) * inner) + 1j * gen.normal(size=(1 << n) * inner)
    u = gen.normal(size=(2, 2)) + 1j * gen.normal(size=(2, 2))
    a, b = psi.copy(), psi.copy()
    ck.sv_apply_1q(a, 4, 8 * inner, *map(complex, u.ravel()))
    _pykernels.sv_apply_1q(b, 4, 8 * inner, *map(complex, u.ravel()))
    assert np.allclose(a, b)
    ck.sv_apply_phase(a, n, inner, 0b101001, 1j)
    _pykernels.sv_apply_phase(b, n, inner, 0b101001, 1j)
    assert np.allclose(a, b)
