"""Kernel dispatch: the compiled extension when importable, numpy otherwise.

Set ``SCPSIM_PURE_PYTHON=1`` to force the numpy fallback (results are
identical; only speed differs).
"""
import os

import numpy as np

from scpsim import _pykernels

if os.environ.get("SCPSIM_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from scpsim import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

IMPLEMENTATION = "cython" if _impl is not _pykernels else "python"


def fwht(values):
    """Return the unnormalised Walsh-Hadamard transform of ``values`` (copy)."""
    a = np.array(values, dtype=np.float64, copy=True)
    n = a.shape[0]
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    _impl.fwht_inplace(a)
    return a


def masked_parity(xs, mask):
    return _impl.masked_parity(np.ascontiguousarray(xs, dtype=np.int64), int(mask))


def monomial_apply(xs, prog, inverse=False):
    xs = np.ascontiguousarray(xs, dtype=np.int64)
    prog = np.ascontiguousarray(prog, dtype=np.int64).reshape(-1, 3)
    return _impl.monomial_apply(xs, prog, bool(inverse))


def sv_apply_1q(psi, outer, inner, u):
    _impl.sv_apply_1q(psi, outer, inner, complex(u[0][0]), complex(u[0][1]),
                      complex(u[1][0]), complex(u[1][1]))
    return psi


def sv_apply_phase(psi, nbits, inner, mask, phase):
    _impl.sv_apply_phase(psi, nbits, inner, int(mask), complex(phase))
    return psi
