"""Deterministic random sources.

Every draw is a pure function of ``(seed, index)``: the pair is packed into
the 128-bit key of a Philox-4x64 counter-based generator, so streams for
different Monte Carlo samples never need coordination and serial and
parallel runs see identical numbers.

Complex Gaussians come from raw 64-bit Philox words through the polar form
of the Box-Muller transform,

    z = sqrt(-ln u1) * exp(2 pi i u2),   u = ((w >> 11) + 1) * 2**-53,

which gives E|z|^2 = 1. Only the raw bit stream and IEEE double arithmetic
are involved, so the numbers do not depend on numpy's sampler versions.
"""

import numpy as np

_MASK64 = (1 << 64) - 1

# Reserved stream indices; Monte Carlo samples use 0, 1, 2, ...
STREAM_ROTATION = 1 << 62
STREAM_MAP = (1 << 62) + 1
STREAM_SELFCHECK = (1 << 62) + 2


def _key(seed, index):
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    return (int(seed) & _MASK64) | ((int(index) & _MASK64) << 64)


def raw_words(seed, index, n):
    """``n`` raw uint64 words of the stream ``(seed, index)``."""
    bg = np.random.Philox(key=_key(seed, index))
    return bg.random_raw(n)


def uniforms(seed, index, n):
    """``n`` doubles in [0, 1) from the top 53 bits of each word."""
    return (raw_words(seed, index, n) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def complex_normals(seed, index, n):
    """``n`` standard complex normals, E|z|^2 = 1."""
    w = raw_words(seed, index, 2 * n) >> np.uint64(11)
    u1 = (w[0::2].astype(np.float64) + 1.0) * 2.0**-53
    u2 = w[1::2].astype(np.float64) * 2.0**-53
    return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


def haar_unitary(d, seed, index=0):
    """Haar-distributed d x d unitary from the QR decomposition of a Ginibre matrix."""
    if d < 1:
        raise ValueError("d must be positive")
    z = complex_normals(seed, index, d * d).reshape(d, d)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    phases = diag / np.abs(diag)
    return q * phases


def random_pure_state(d, seed, index=0):
    """Unit vector distributed according to the Fubini-Study measure."""
    if d < 1:
        raise ValueError("d must be positive")
    z = complex_normals(seed, index, d)
    return z / np.linalg.norm(z)
