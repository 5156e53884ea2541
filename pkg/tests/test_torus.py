import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qde.errors import OddDimension
from qde.partition import momentum_partition, rotate_partition
from qde.sampling import haar_unitary
from qde.torus import (
    CoherentStateParams,
    TorusQuantization,
    baker_unitary,
    coherent_state,
    coherent_states,
    dft_matrix,
    grid_centres,
    husimi_of_operator,
    quantize_observable,
    read_pgm,
    translation_operators,
    write_husimi_csv,
    write_pgm,
)


def test_translations_d2():
    u, v = translation_operators(2)
    assert np.allclose(u, [[0, 1], [1, 0]])
    assert np.allclose(v, np.diag([1, -1]))


@pytest.mark.parametrize("d", [2, 3, 7, 16])
def test_translation_order(d):
    u, v = translation_operators(d)
    assert np.allclose(np.linalg.matrix_power(u, d), np.eye(d), atol=1e-12)
    assert np.allclose(np.linalg.matrix_power(v, d), np.eye(d), atol=1e-12)


def test_commutation_d5():
    u, v = translation_operators(5)
    assert np.max(np.abs(u @ v - np.exp(2j * np.pi / 5) * v @ u)) < 1e-12


def test_floquet_phases():
    q = TorusQuantization(6, chi_q=0.25, chi_p=0.5)
    u, v = translation_operators(q)
    assert np.allclose(np.linalg.matrix_power(u, 6), np.exp(2j * np.pi * 0.5) * np.eye(6))
    assert np.max(np.abs(u @ v - np.exp(2j * np.pi / 6) * v @ u)) < 1e-12
    with pytest.raises(ValueError):
        TorusQuantization(6, chi_q=1.0)


def test_dft_small():
    assert np.allclose(dft_matrix(1), [[1]])
    assert np.allclose(dft_matrix(2), np.array([[1, 1], [1, -1]]) / math.sqrt(2), atol=1e-15)
    f = dft_matrix(4)
    assert np.max(np.abs(f @ f.conj().T - np.eye(4))) < 1e-12


@pytest.mark.parametrize("d", [4, 9, 32])
def test_dft_diagonalizes_shift(d):
    u, _ = translation_operators(d)
    f = dft_matrix(d)
    m = f @ u @ f.conj().T
    assert np.max(np.abs(m - np.diag(np.diag(m)))) < 1e-12
    phases = np.sort(np.angle(np.diag(m)) % (2 * np.pi))
    assert np.allclose(phases, 2 * np.pi * np.arange(d) / d, atol=1e-12)


def test_baker_d2():
    assert np.allclose(baker_unitary(2), np.array([[1, 1], [1, -1]]) / math.sqrt(2))


def baker_oracle(d):
    """Entry-by-entry composition of the inverse DFT with two half-size DFTs."""
    h = d // 2
    out = [[0j] * d for _ in range(d)]
    for a in range(d):
        for b in range(d):
            acc = 0j
            for c in range(d):
                finv = cmath.exp(2j * math.pi * a * c / d) / math.sqrt(d)
                if (c < h) == (b < h):
                    cc, bb = c % h, b % h
                    acc += finv * cmath.exp(-2j * math.pi * cc * bb / h) / math.sqrt(h)
            out[a][b] = acc
    return np.array(out)


def test_baker_matches_oracle_d8():
    assert np.max(np.abs(baker_unitary(8) - baker_oracle(8))) < 1e-12


@pytest.mark.parametrize("d", [4, 64, 128, 512])
def test_baker_unitary(d):
    b = baker_unitary(d)
    assert np.max(np.abs(b @ b.conj().T - np.eye(d))) < 1e-12


def test_baker_odd_dimension():
    with pytest.raises(OddDimension):
        baker_unitary(7)


def test_quantize_examples():
    u, v = translation_operators(4)
    assert np.allclose(quantize_observable({(0, 0): 1}, 3), np.eye(3))
    assert np.allclose(quantize_observable({(0, 1): 1}, 3), translation_operators(3)[0])
    vu = quantize_observable({(1, 1): 1}, 4)
    assert np.allclose(vu, v @ u)
    assert np.allclose(u @ v, np.exp(2j * np.pi / 4) * vu)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
                min_size=6, max_size=6),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_quantize_linear(c, s):
    keys = [(0, 1), (1, 0), (2, 3)]
    a = dict(zip(keys, c[:3]))
    b = dict(zip(keys, c[3:]))
    both = {key: a[key] + s * b[key] for key in keys}
    lhs = quantize_observable(both, 5)
    rhs = quantize_observable(a, 5) + s * quantize_observable(b, 5)
    assert np.allclose(lhs, rhs, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.sampled_from([8, 16, 64]))
def test_coherent_state_normalized(q, p, d):
    assert abs(np.linalg.norm(coherent_state(q, p, d)) - 1) < 1e-12


def test_coherent_state_momentum_periodicity():
    a = coherent_state(0.5, 0.5, 64)
    b = coherent_state(0.5, 1.5, 64)
    overlap = abs(np.vdot(a, b))
    assert overlap == pytest.approx(1.0, abs=1e-12)


def test_coherent_state_position_mass():
    d, q0 = 64, 0.25
    a = coherent_state(q0, 0.1, d)
    window = np.abs(np.arange(d) / d - q0) < 3 / math.sqrt(d)
    mass = float(np.sum(np.abs(a[window]) ** 2))
    # direct summation of the periodized Gaussian amplitude at unit squeeze
    amp = [sum(cmath.exp(-math.pi * d / 2 * (j / d - q0 - w) ** 2
                         + 2j * math.pi * d * 0.1 * (j / d - w)) for w in range(-5, 6))
           for j in range(d)]
    prob = [abs(x) ** 2 for x in amp]
    oracle = sum(x for j, x in enumerate(prob) if window[j]) / sum(prob)
    assert mass > 0.95
    assert mass == pytest.approx(oracle, abs=1e-9)


def test_coherent_params_validation():
    with pytest.raises(ValueError):
        CoherentStateParams(winding_cut=2)
    with pytest.raises(ValueError):
        CoherentStateParams(squeeze=0)


def test_squeeze_widens_position_profile():
    # squeeze is the ratio of position width to momentum width
    narrow = coherent_state(0.5, 0.5, 64)
    wide = coherent_state(0.5, 0.5, 64, CoherentStateParams(squeeze=4.0))
    x = np.arange(64) / 64 - 0.5
    spread = lambda a: float(np.sum(np.abs(a) ** 2 * x**2))  # noqa: E731
    assert spread(narrow) < spread(wide)


def test_husimi_identity_is_one():
    g = husimi_of_operator(np.eye(16), 12)
    assert np.allclose(g, 1.0, atol=1e-12)


def test_husimi_lower_half_momentum_projector():
    p = momentum_partition(64, 2)
    g = husimi_of_operator(p[1], 64)
    c = grid_centres(64)
    low = g[:, (c > 0.1) & (c < 0.4)].mean()
    high = g[:, (c > 0.6) & (c < 0.9)].mean()
    assert low >= 0.9
    assert high <= 0.1


def test_husimi_partition_sums_to_one():
    p = momentum_partition(32, 4)
    total = sum(husimi_of_operator(x, 16) for x in p)
    assert np.allclose(total, 1.0, atol=1e-12)


def test_rotated_members_delocalized():
    p = momentum_partition(64, 8)
    r = rotate_partition(p, haar_unitary(64, 3))
    mom = [husimi_of_operator(x, 32).std() for x in p]
    rot = [husimi_of_operator(x, 32).std() for x in r]
    assert max(rot) < 0.5 * min(mom)


@pytest.mark.parametrize("grid_n", [32, 64])
def test_coherent_resolution_of_identity(grid_n):
    d = 16
    c = grid_centres(grid_n)
    qq, pp = np.meshgrid(c, c, indexing="ij")
    s = coherent_states(qq.ravel(), pp.ravel(), d)
    m = (d / grid_n**2) * (s @ s.conj().T)
    assert np.max(np.abs(m - np.eye(d))) <= 5 / grid_n


def test_pgm_roundtrip(tmp_path):
    g = np.outer(np.linspace(0, 1, 5), np.linspace(1, 2, 7))
    top = write_pgm(tmp_path / "g.pgm", g)
    assert top == pytest.approx(g.max())
    back = read_pgm(tmp_path / "g.pgm")
    assert back.shape == g.shape
    assert np.array_equal(back, np.rint(g / g.max() * 255).astype(np.uint8))
    header = (tmp_path / "g.pgm").read_bytes()[:12]
    assert header.startswith(b"P5\n5 7\n255\n")


def test_pgm_orientation(tmp_path):
    g = np.zeros((4, 4))
    g[0, 3] = 1.0  # smallest q, largest p: top-left pixel
    write_pgm(tmp_path / "o.pgm", g)
    body = (tmp_path / "o.pgm").read_bytes().split(b"\n", 3)[3]
    assert body[0] == 255 and sum(body) == 255


def test_husimi_csv(tmp_path):
    g = np.arange(4.0).reshape(2, 2)
    write_husimi_csv(tmp_path / "h.csv", g)
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "q,p,value"
    assert len(lines) == 5
    q, p, v = lines[2].split(",")
    assert (float(q), float(p), float(v)) == (0.25, 0.75, 1.0)
