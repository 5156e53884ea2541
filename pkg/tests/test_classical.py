import math

import numpy as np
import pytest
from scipy import stats

from qde.classical import (
    PhasePoint,
    baker_inverse,
    baker_step,
    classical_baker_step,
    classical_symbol_entropy,
)
from qde.sampling import uniforms

LN2 = math.log(2)


@pytest.mark.parametrize("start, end", [((0.25, 0.5), (0.5, 0.25)), ((0.75, 0.0), (0.5, 0.5))])
def test_step_examples(start, end):
    g = classical_baker_step(PhasePoint(*start))
    assert (g.q, g.p) == pytest.approx(end, abs=1e-15)


def test_phase_point_wraps():
    g = PhasePoint(1.25, -0.25)
    assert (g.q, g.p) == (0.25, 0.75)


def test_area_preservation():
    n = 1_000_000
    u = uniforms(17, 0, 2 * n)
    q, p = baker_step(u[:n], u[n:])
    counts, _, _ = np.histogram2d(q, p, bins=16, range=[[0, 1], [0, 1]])
    res = stats.chisquare(counts.ravel())
    assert res.pvalue > 0.01


def test_inverse_recovers_points():
    u = uniforms(3, 0, 20_000)
    q0, p0 = u[:10_000], u[10_000:]
    q1, p1 = baker_inverse(*baker_step(q0, p0))
    assert np.max(np.abs(q1 - q0)) < 1e-12
    assert np.max(np.abs(p1 - p0)) < 1e-12


def test_single_symbol_entropy():
    h = classical_symbol_entropy(2, 1, 1_000_000)
    assert abs(h.at(1) - LN2) <= 0.02 * LN2


def test_eight_symbol_words():
    h = classical_symbol_entropy(2, 8, 1_000_000)
    assert abs(h.at(8) - 8 * LN2) <= 0.02 * 8 * LN2


def test_squared_map_k4():
    h = classical_symbol_entropy(4, 4, 1_000_000, steps_per_symbol=2)
    assert abs(h.at(4) - 8 * LN2) <= 0.03 * 8 * LN2


def test_trace_monotone_and_subadditive():
    h = classical_symbol_entropy(4, 4, 400_000, seed=5)
    v, se = h.value, h.stderr
    for t in range(1, len(v)):
        assert v[t] >= v[t - 1] - 3 * se[t]
    for t in range(1, len(v) - 1):
        assert v[t + 1] - v[t] <= v[t] - v[t - 1] + 3 * (se[t + 1] + se[t])


def test_word_cap_and_validation():
    with pytest.raises(ValueError):
        classical_symbol_entropy(2, 12, 100_000)
    with pytest.raises(ValueError):
        classical_symbol_entropy(3, 2, 100_000)
    with pytest.raises(ValueError):
        classical_symbol_entropy(2, 13, 10**9)


def test_deterministic():
    a = classical_symbol_entropy(2, 4, 300_000, seed=9)
    b = classical_symbol_entropy(2, 4, 300_000, seed=9)
    assert a == b
