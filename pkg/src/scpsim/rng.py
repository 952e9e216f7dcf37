"""Counter-based random streams derived from one 64-bit master seed.

A stream is a Philox generator keyed by ``(seed, *key)``; the key names the
operation and its indices (for example ``("coef", s, rep)``), so any two
estimators draw from independent streams no matter which worker runs them
or in what order.
"""
import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _key_words(key):
    words = []
    for part in key:
        if isinstance(part, str):
            words.append(zlib.crc32(part.encode()))
        else:
            part = int(part)
            if part < 0:
                raise ValueError("stream keys must be non-negative")
            # split big integers into 32-bit words, length-prefixed
            chunks = []
            while True:
                chunks.append(part & 0xFFFFFFFF)
                part >>= 32
                if not part:
                    break
            words.append(len(chunks))
            words.extend(chunks)
    return tuple(words)


def _seed_sequence(seed, key):
    return np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=_key_words(key))


def stream(seed, *key):
    """Independent ``numpy.random.Generator`` for ``key`` under ``seed``."""
    return np.random.Generator(np.random.Philox(_seed_sequence(seed, key)))


def derive_seed(seed, *key):
    """A 64-bit child seed for handing to another seeded component."""
    lo, hi = _seed_sequence(seed, key).generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)
