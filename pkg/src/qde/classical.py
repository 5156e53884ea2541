"""Classical baker map and a Monte Carlo estimate of its symbolic entropy."""

import math
from dataclasses import dataclass

import numpy as np

from .entropy import EntropyTrace
from .sampling import uniforms

CHUNK = 1 << 18


@dataclass(frozen=True)
class PhasePoint:
    q: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "q", self.q % 1.0)
        object.__setattr__(self, "p", self.p % 1.0)


def baker_step(q, p):
    """Vectorised (q, p) -> (2q - [2q], (p + [2q]) / 2)."""
    b = np.floor(2.0 * np.asarray(q))
    return 2.0 * q - b, (p + b) / 2.0


def baker_inverse(q, p):
    b = np.floor(2.0 * np.asarray(p))
    return (q + b) / 2.0, 2.0 * p - b


def classical_baker_step(g):
    q, p = baker_step(g.q, g.p)
    return PhasePoint(float(q), float(p))


def _word_counts(k, t, n, seed, steps_per_symbol):
    """Histograms of length-1..t symbol words, first symbol least significant."""
    counts = [np.zeros(k**s, dtype=np.int64) for s in range(1, t + 1)]
    for chunk, start in enumerate(range(0, n, CHUNK)):
        m = min(CHUNK, n - start)
        u = uniforms(seed, chunk, 2 * m)
        q, p = u[:m], u[m:]
        code = np.zeros(m, dtype=np.int64)
        for s in range(t):
            sym = np.minimum((k * p).astype(np.int64), k - 1)
            code += sym * k**s
            counts[s] += np.bincount(code, minlength=k ** (s + 1))
            for _ in range(steps_per_symbol):
                q, p = baker_step(q, p)
    return counts


def _plugin_entropy(count, n):
    c = count[count > 0].astype(float)
    f = c / n
    h = float(-np.sum(f * np.log(f)))
    mm = (c.size - 1) / (2.0 * n)
    second = float(np.sum(f * np.log(f) ** 2))
    se = math.sqrt(max(second - h * h, 0.0) / n)
    return h + mm, se


def classical_symbol_entropy(k, t, n_samples, seed=0, steps_per_symbol=1):
    """Entropy (nats) of length-s words of momentum-interval symbols, s = 1 .. t.

    Symbols are floor(k p) read before each step; ``steps_per_symbol = 2``
    samples the squared map. Plug-in estimate with the Miller-Madow
    correction; the number of possible words must stay below n/100.
    """
    if k not in (2, 4, 8):
        raise ValueError("k must be 2, 4 or 8")
    if not 1 <= t <= 12:
        raise ValueError("t must lie in 1..12")
    if k**t > n_samples / 100:
        raise ValueError(f"k^t = {k**t} words need at least {100 * k**t} samples")
    counts = _word_counts(k, t, n_samples, seed, steps_per_symbol)
    pts = [_plugin_entropy(c, n_samples) for c in counts]
    return EntropyTrace(range(1, t + 1), [h for h, _ in pts], [se for _, se in pts])
