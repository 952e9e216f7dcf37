import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import brute_coefficient
from scpsim import boolfn
from scpsim.boolfn import KMParams
from scpsim.errors import CapacityError, ParseError, ValidationError


def tables(max_m=8):
    return st.integers(1, max_m).flatmap(
        lambda m: st.text("01", min_size=1 << m, max_size=1 << m).filter(lambda t: "1" in t))


# exact coefficients ---------------------------------------------------------

def test_parity_coefficients():
    f = boolfn.parity(3)
    assert boolfn.fourier_coefficient_exact(f, "111") == -0.5
    assert boolfn.fourier_coefficient_exact(f, "000") == 0.5


def test_zero_function_coefficients_vanish():
    zeros = np.zeros(16)
    assert all(boolfn.fourier_coefficient_exact(zeros, s) == 0 for s in range(16))


def test_and_coefficient_by_hand():
    # (1/4) * sum_x AND(x) (-1)^{x1+x2}: only x = 11 contributes, with sign +1
    assert boolfn.fourier_coefficient_exact(boolfn.and_function(2), "11") == 0.25


def test_coefficient_capacity():
    with pytest.raises(CapacityError):
        boolfn.fourier_coefficient_exact(boolfn.parity(25), 0)


def test_spectrum_examples():
    assert boolfn.wht_spectrum(boolfn.parity(2)).as_bits() == {"00": 0.5, "11": -0.5}
    assert boolfn.wht_spectrum(boolfn.constant_one(3)).as_bits() == {"000": 1.0}
    assert boolfn.wht_spectrum(boolfn.and_function(2)).as_bits() == {
        "00": 0.25, "01": -0.25, "10": -0.25, "11": 0.25}


def test_spectrum_capacity():
    with pytest.raises(CapacityError):
        boolfn.wht_spectrum(boolfn.parity(21))


@settings(max_examples=40, deadline=None)
@given(tables(6))
def test_spectrum_agrees_with_direct_sums(table):
    f = boolfn.truth_table(table)
    spec = boolfn.wht_spectrum(f)
    values = [int(ch) for ch in table]
    for s in range(len(table)):
        want = brute_coefficient(values, s)
        assert spec[s] == pytest.approx(want, abs=1e-12)
        assert boolfn.fourier_coefficient_exact(f, s) == pytest.approx(want, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(tables(12))
def test_parseval_for_signed_lift(table):
    spec = boolfn.wht_spectrum(boolfn.lift_to_signed(boolfn.truth_table(table)))
    assert abs(spec.squared_norm() - 1) <= 1e-9
    assert all(-1 <= c <= 1 for c in spec.coeffs.values())


def test_parseval_at_sixteen_bits():
    f = boolfn.random_junta(16, 6, np.random.default_rng(0))
    assert boolfn.wht_spectrum(boolfn.lift_to_signed(f)).squared_norm() == pytest.approx(1, abs=1e-9)


# lift -------------------------------------------------------------------------

def test_lift_examples():
    assert boolfn.wht_spectrum(boolfn.lift_to_signed(boolfn.parity(2))).as_bits() == {"11": 1.0}
    assert boolfn.wht_spectrum(boolfn.lift_to_signed(boolfn.constant_one(3))).as_bits() == {"000": -1.0}
    assert boolfn.wht_spectrum(boolfn.lift_to_signed(boolfn.and_function(2))).as_bits() == {
        "00": 0.5, "01": 0.5, "10": 0.5, "11": -0.5}


def test_lift_values_and_sparsity():
    f = boolfn.junta(5, (1, 3), "0110")
    g = boolfn.lift_to_signed(f)
    xs = np.arange(32)
    assert np.array_equal(g.eval(xs), 1 - 2 * f.eval(xs).astype(int))
    assert g.sparsity_bound == f.sparsity_bound + 1


@pytest.mark.parametrize("seed", range(100))
def test_lift_relation_on_random_tables(seed):
    gen = np.random.default_rng(seed)
    m = int(gen.integers(1, 11))
    table = "".join(gen.choice(["0", "1"], size=1 << m))
    if "1" not in table:
        table = "1" + table[1:]
    f = boolfn.truth_table(table)
    fs = boolfn.wht_spectrum(f)
    gs = boolfn.wht_spectrum(boolfn.lift_to_signed(f))
    assert gs[0] == pytest.approx(1 - 2 * fs[0], abs=1e-12)
    for s in range(1, 1 << m):
        assert gs[s] == pytest.approx(-2 * fs[s], abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 10), seed=st.integers(0, 2**31))
def test_plancherel(m, seed):
    gen = np.random.default_rng(seed)
    g = 1 - 2 * gen.integers(0, 2, size=1 << m).astype(float)
    p = gen.random(1 << m)
    p /= p.sum()
    ghat = boolfn.wht_spectrum(g)
    phat = np.array([boolfn.fourier_coefficient_exact(p, s) for s in range(1 << m)])
    lhs = np.dot(g, p) / (1 << m)
    rhs = sum(c * phat[s] for s, c in ghat.coeffs.items())
    assert lhs == pytest.approx(rhs, abs=1e-9)


# function families ---------------------------------------------------------

def test_nonzero_enforced():
    with pytest.raises(ValidationError):
        boolfn.truth_table("0000")
    with pytest.raises(ValidationError):
        boolfn.junta(4, (0,), "00")


def test_families_match_declared_spectra():
    assert boolfn.wht_spectrum(boolfn.make_inner_product_function("101")).as_bits() == {
        "000": 0.5, "101": -0.5}
    f = boolfn.sparse_poly(3, {"000": 0.5, "011": -0.5})
    assert boolfn.wht_spectrum(f).as_bits() == {"000": 0.5, "011": -0.5}
    assert f.sparsity_bound == 2


def test_inner_product_function():
    assert np.array_equal(boolfn.make_inner_product_function("111").eval(np.arange(8)),
                          boolfn.parity(3).eval(np.arange(8)))
    h = boolfn.make_inner_product_function("10")
    assert h.eval(0b01) == 0 and h.eval(0b11) == 1
    assert h.sparsity_bound == 2
    with pytest.raises(ValidationError):
        boolfn.make_inner_product_function("000")


def test_sparse_poly_must_be_boolean():
    with pytest.raises(ValidationError):
        boolfn.sparse_poly(2, {"00": 0.5, "11": 0.25})


def test_degree_examples():
    assert boolfn.degree(boolfn.wht_spectrum(boolfn.parity(5))) == 5
    assert boolfn.degree(boolfn.wht_spectrum(boolfn.constant_one(4))) == 0
    assert boolfn.degree(boolfn.wht_spectrum(boolfn.and_function(2))) == 2
    with pytest.raises(ValidationError):
        boolfn.degree(boolfn.FourierSpectrum(3, {}))


def test_large_m_function_evaluates_without_table():
    f = boolfn.junta(40, (3, 39), "0001")
    assert not f.has_truth_table
    assert f.eval((1 << 36) | 1) == 1
    assert f.eval(1 << 36) == 0


@pytest.mark.parametrize("f", [
    boolfn.parity(4), boolfn.and_function(3), boolfn.make_inner_product_function("0110"),
    boolfn.junta(6, (0, 5), "0111"), boolfn.truth_table("0110100110010110"),
    boolfn.sparse_poly(3, {"000": 0.5, "111": -0.5}), boolfn.constant_one(2),
])
def test_text_round_trip(f):
    g = boolfn.parse_function(f.to_text())
    xs = np.arange(1 << f.m)
    assert g.m == f.m and g.sparsity_bound == f.sparsity_bound
    assert np.array_equal(g.eval(xs), f.eval(xs))


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError, match="line 1"):
        boolfn.parse_function("func m=3 family=parity")
    with pytest.raises(ParseError, match="line 2"):
        boolfn.parse_function("fn m=2 family=sparse_poly\ns=01 coef=1")
    with pytest.raises(ParseError):
        boolfn.parse_function("fn m=2 family=mystery\nx")


# sampled estimates ---------------------------------------------------------

def test_sample_count_formula():
    assert boolfn.coefficient_sample_count(0.1, 1e-6) == math.ceil(400 * math.log(2e6))


def test_estimator_examples():
    g = boolfn.lift_to_signed(boolfn.make_inner_product_function("1011"))
    assert abs(boolfn.estimate_fourier_coefficient(g, "1011", 0.1, 1e-6, seed=1) - 1) <= 0.1
    minus = boolfn.lift_to_signed(boolfn.constant_one(3))
    assert boolfn.estimate_fourier_coefficient(minus, 0, 0.2, 0.01, seed=2) == -1
    g_and = boolfn.lift_to_signed(boolfn.and_function(2))
    assert abs(boolfn.estimate_fourier_coefficient(g_and, "00", 0.05, 0.01, seed=3) - 0.5) <= 0.05


def test_estimator_is_seed_deterministic():
    g = boolfn.lift_to_signed(boolfn.junta(10, (1, 4, 7), "00010111"))
    a = boolfn.estimate_fourier_coefficient(g, 0b0100100100, 0.1, 0.01, seed=5)
    assert a == boolfn.estimate_fourier_coefficient(g, 0b0100100100, 0.1, 0.01, seed=5)
    assert a != boolfn.estimate_fourier_coefficient(g, 0b0100100100, 0.1, 0.01, seed=6)


def test_estimator_rejects_bad_arguments():
    g = boolfn.lift_to_signed(boolfn.parity(2))
    with pytest.raises(ValidationError):
        boolfn.estimate_fourier_coefficient(g, 0, 0, 0.1, seed=0)
    with pytest.raises(ValidationError):
        boolfn.estimate_fourier_coefficient(g, 0, 0.5, 1.0, seed=0)


def test_estimator_coverage():
    g = boolfn.lift_to_signed(boolfn.junta(8, (0, 2, 5, 6), "0110100111010010"))
    spec = boolfn.wht_spectrum(g)
    s = max(spec.coeffs, key=lambda k: abs(spec[k]))
    misses = sum(abs(boolfn.estimate_fourier_coefficient(g, s, 0.2, 0.05, seed=9, rep=t) - spec[s]) > 0.2
                 for t in range(1000))
    assert misses / 1000 <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / 1000)


# Kushilevitz-Mansour ----------------------------------------------------------

def test_km_params_validation():
    with pytest.raises(ValidationError):
        KMParams(0.5, 0.1)
    with pytest.raises(ValidationError):
        KMParams(2, 0.5)
    assert KMParams(8, 0.01).budget(16) == math.ceil(64 * 8**4 * math.log(8 * 16 * 64 / 0.01))


@pytest.mark.parametrize("exact", ["auto", False])
def test_km_character(exact):
    g = boolfn.lift_to_signed(boolfn.make_inner_product_function("0110"))
    assert boolfn.km_significant_set(g, KMParams(2, 0.05), seed=1, exact=exact) == {0b0110}


@pytest.mark.parametrize("exact", ["auto", False])
def test_km_constant(exact):
    g = boolfn.lift_to_signed(boolfn.constant_one(5))
    assert boolfn.km_significant_set(g, KMParams(3, 0.05), seed=1, exact=exact) == {0}


def _km_bullets_hold(L, spec, theta):
    return (all(abs(spec[s]) > 1 / (2 * theta) for s in L)
            and all(s in L for s, c in spec.coeffs.items() if abs(c) >= 1 / theta)
            and len(L) < 4 * theta**2)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(3))
def test_km_sampled_on_16_bit_juntas(seed):
    f = boolfn.random_junta(16, 4, np.random.default_rng(seed))
    g = boolfn.lift_to_signed(f)
    spec = boolfn.wht_spectrum(g)
    L = boolfn.km_significant_set(g, KMParams(8, 0.01), seed=seed, exact=False)
    assert _km_bullets_hold(L, spec, 8)
    assert all(s in L for s, c in spec.coeffs.items() if abs(c) >= 1 / 8)
    assert not any(abs(spec[s]) <= 1 / 16 for s in L)


def test_km_without_truth_table():
    # m = 24 has no table, so the sampled recursion runs
    f = boolfn.junta(24, (2, 20), "0110")
    g = boolfn.lift_to_signed(f)
    assert not g.has_truth_table
    assert boolfn.km_significant_set(g, KMParams(2, 0.05, sample_budget=4000), seed=4) == {
        (1 << 21) | (1 << 3)}


def test_km_frontier_capacity(monkeypatch):
    # a bent function spreads weight evenly, so 2^k prefixes survive at depth k;
    # with the frontier cap lowered to theta^2 that trips at depth 7
    xs = np.arange(1 << 12)
    table = "".join(str(v) for v in (sum(((xs >> (2 * i)) & (xs >> (2 * i + 1)) & 1) for i in range(6)) & 1))
    g = boolfn.lift_to_signed(boolfn.truth_table(table))
    monkeypatch.setattr(boolfn.defaults, "KM_FRONTIER_FACTOR", 1)
    with pytest.raises(CapacityError, match="frontier"):
        boolfn.km_significant_set(g, KMParams(8, 0.1, sample_budget=200000), seed=0, exact=False)
