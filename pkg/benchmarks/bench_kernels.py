"""Compiled kernels vs the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel with the best-of-N time for each implementation
and the speed-up. Both implementations are also checked to agree.
"""
import argparse
import timeit

import numpy as np

from scpsim import _pykernels

try:
    from scpsim import _ckernels
except ImportError:  # pragma: no cover
    raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")


def _prog(gen, n, rows):
    out = []
    for _ in range(rows):
        op = int(gen.integers(2))
        mask = 0
        for q in gen.choice(n, size=int(gen.integers(1, 4)), replace=False):
            mask |= 1 << int(q)
        out.append((op, mask, int(gen.integers(8)) if op else 0))
    return np.array(out, dtype=np.int64)


def cases():
    gen = np.random.default_rng(0)
    table = gen.normal(size=1 << 18)
    xs = gen.integers(0, 1 << 30, size=1 << 20, dtype=np.int64)
    prog = _prog(gen, 30, 40)
    psi = (gen.normal(size=1 << 18) + 1j * gen.normal(size=1 << 18)).astype(np.complex128)
    h = 1 / np.sqrt(2)

    def fwht(mod):
        a = table.copy()
        mod.fwht_inplace(a)
        return a

    def parity(mod):
        return np.asarray(mod.masked_parity(xs, 0x2AAAAAAA))

    def monomial(mod):
        y, ph = mod.monomial_apply(xs, prog, False)
        return np.asarray(y), np.asarray(ph) % 8

    def one_qubit(mod):
        a = psi.copy()
        for q in range(18):
            mod.sv_apply_1q(a, 1 << q, 1 << (17 - q), h, h, h, -h)
        return a

    def phase(mod):
        a = psi.copy()
        for q in range(17):
            mod.sv_apply_phase(a, 18, 1, (1 << q) | (1 << (q + 1)), -1)
        return a

    return [("fwht 2^18", fwht), ("masked_parity 2^20", parity), ("monomial_apply 2^20 x 40", monomial),
            ("sv_apply_1q 18 qubits", one_qubit), ("sv_apply_phase 18 qubits", phase)]


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, atol=1e-8)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':<28}{'cython ms':>12}{'python ms':>12}{'speed-up':>10}")
    for name, fn in cases():
        assert _same(fn(_ckernels), fn(_pykernels)), name
        tc = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        tp = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<28}{tc:>12.2f}{tp:>12.2f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
