"""Pure numpy implementations of the hot kernels.

Every function here has a drop-in twin in ``_ckernels.pyx``; the two are
checked against each other in the test suite.
"""
import numpy as np


def fwht_inplace(a):
    """Unnormalised Walsh-Hadamard transform of a float64 vector, in place."""
    n = a.shape[0]
    h = 1
    while h < n:
        v = a.reshape(-1, 2, h)
        x = v[:, 0, :].copy()
        y = v[:, 1, :]
        v[:, 0, :] += y
        np.subtract(x, y, out=v[:, 1, :])
        h *= 2
    return a


def masked_parity(xs, mask):
    """popcount(x & mask) mod 2 for every x, as uint8."""
    return (np.bitwise_count(np.bitwise_and(xs, np.int64(mask))) & 1).astype(np.uint8)


def monomial_apply(xs, prog, inverse):
    """Push basis states through a permutation-with-phase gate program.

    ``prog`` rows are ``(op, mask, k)``: op 0 flips the bits in ``mask``;
    op 1 adds ``k`` eighth-turns of phase when every bit in ``mask`` is set.
    Returns ``(ys, phase8)`` with ``U|x> = exp(i*pi*phase8/4) |y>`` (or the
    inverse program when ``inverse`` is true).
    """
    ys = np.array(xs, dtype=np.int64, copy=True)
    ph = np.zeros(ys.shape[0], dtype=np.int64)
    rows = prog[::-1] if inverse else prog
    sign = -1 if inverse else 1
    for op, mask, k in rows:
        mask = np.int64(mask)
        if op == 0:
            ys ^= mask
        else:
            hit = (ys & mask) == mask
            ph[hit] += sign * int(k)
    ph &= 7
    return ys, ph


def sv_apply_1q(psi, outer, inner, u00, u01, u10, u11):
    """Apply a 2x2 matrix on the middle axis of ``psi`` viewed as (outer, 2, inner)."""
    v = psi.reshape(outer, 2, inner)
    a = v[:, 0, :].copy()
    b = v[:, 1, :].copy()
    v[:, 0, :] = u00 * a + u01 * b
    v[:, 1, :] = u10 * a + u11 * b
    return psi


def sv_apply_phase(psi, nbits, inner, mask, phase):
    """Multiply amplitudes whose row index has every ``mask`` bit set by ``phase``.

    ``psi`` is viewed as ``(2**nbits, inner)``; bit ``nbits-1`` of the row is
    the first tensor axis.
    """
    v = psi.reshape([2] * nbits + [inner])
    idx = [slice(None)] * (nbits + 1)
    for b in range(nbits):
        if (mask >> b) & 1:
            idx[nbits - 1 - b] = 1
    v[tuple(idx)] *= phase
    return psi
