"""Quantization on the unit-square torus.

Position basis e_0 .. e_{d-1} (0-based). Translation operators, the DFT,
the quantum baker map, Weyl-type observables built from V^j U^k, periodized
Gaussian coherent states and Husimi grids of Kraus operators.
"""

from dataclasses import dataclass

import numpy as np

from .errors import OddDimension
from .matcore import dagger


@dataclass(frozen=True)
class TorusQuantization:
    d: int
    chi_q: float = 0.0
    chi_p: float = 0.0

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"torus dimension must be >= 2, got {self.d}")
        for name in ("chi_q", "chi_p"):
            val = getattr(self, name)
            if not 0.0 <= val < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {val}")


@dataclass(frozen=True)
class CoherentStateParams:
    squeeze: float = 1.0
    winding_cut: int = 5

    def __post_init__(self):
        if self.squeeze <= 0:
            raise ValueError("squeeze must be positive")
        if self.winding_cut < 3:
            raise ValueError("winding_cut must be at least 3")


def _as_quantization(q):
    return q if isinstance(q, TorusQuantization) else TorusQuantization(int(q))


def translation_operators(q):
    """Return ``(U, V)``: the cyclic position shift and the diagonal momentum shift.

    U e_j = e_{j+1}, with the wrap-around picking up exp(2 pi i chi_p);
    V e_j = exp(-2 pi i (j + chi_q) / d) e_j.
    """
    q = _as_quantization(q)
    d = q.d
    u = np.zeros((d, d), dtype=np.complex128)
    u[np.arange(1, d), np.arange(d - 1)] = 1.0
    u[0, d - 1] = np.exp(2j * np.pi * q.chi_p)
    v = np.diag(np.exp(-2j * np.pi * (np.arange(d) + q.chi_q) / d))
    return u, v


def dft_matrix(d):
    """F[k, j] = exp(-2 pi i k j / d) / sqrt(d); row k holds momentum eigenvector k."""
    if d < 1:
        raise ValueError("d must be positive")
    idx = np.arange(d)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / d) / np.sqrt(d)


def baker_unitary(q):
    """Balazs-Voros quantum baker map F_d^{-1} . blockdiag(F_{d/2}, F_{d/2})."""
    q = _as_quantization(q)
    d = q.d
    if d % 2:
        raise OddDimension(f"baker map needs even d, got {d}")
    h = d // 2
    half = dft_matrix(h)
    blocks = np.zeros((d, d), dtype=np.complex128)
    blocks[:h, :h] = half
    blocks[h:, h:] = half
    return dagger(dft_matrix(d)) @ blocks


def quantize_observable(coeffs, q):
    """Sum of a_jk V^j U^k over the nonzero Fourier coefficients ``{(j, k): a_jk}``."""
    q = _as_quantization(q)
    u, v = translation_operators(q)
    out = np.zeros((q.d, q.d), dtype=np.complex128)
    for (j, k), a in coeffs.items():
        if a == 0:
            continue
        out += a * (np.linalg.matrix_power(v, j) @ np.linalg.matrix_power(u, k))
    return out


def coherent_states(qs, ps, d, params=None):
    """Coherent states for the points ``zip(qs, ps)`` as columns of a d x n array."""
    params = params or CoherentStateParams()
    qs = np.atleast_1d(np.asarray(qs, dtype=float))
    ps = np.atleast_1d(np.asarray(ps, dtype=float))
    x = np.arange(d) / d
    w = np.arange(-params.winding_cut, params.winding_cut + 1)
    # axes: (winding, basis index, point)
    shift = x[None, :, None] - w[:, None, None]
    gauss = -(np.pi * d / (2.0 * params.squeeze)) * (shift - qs[None, None, :]) ** 2
    phase = 2j * np.pi * d * ps[None, None, :] * shift
    amp = np.exp(gauss + phase).sum(axis=0)
    return amp / np.linalg.norm(amp, axis=0)


def coherent_state(qpos, ppos, d, params=None):
    """Normalized periodized Gaussian centred at (qpos, ppos) on the torus."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return coherent_states([qpos], [ppos], d, params)[:, 0]


def grid_centres(grid_n):
    return (np.arange(grid_n) + 0.5) / grid_n


def husimi_of_operator(x, grid_n, params=None):
    """Grid of <q,p| X†X |q,p>; entry [a, b] belongs to q_a = (a+1/2)/n, p_b = (b+1/2)/n."""
    x = np.asarray(x, dtype=np.complex128)
    d = x.shape[0]
    c = grid_centres(grid_n)
    qq, pp = np.meshgrid(c, c, indexing="ij")
    states = coherent_states(qq.ravel(), pp.ravel(), d, params)
    m = dagger(x) @ x
    vals = np.sum(states.conj() * (m @ states), axis=0).real
    return vals.reshape(grid_n, grid_n)


def write_pgm(path, grid):
    """Binary P5 image, p increasing upwards and q to the right; 255 = grid maximum.

    Returns the maximum used for scaling.
    """
    g = np.asarray(grid, dtype=float)
    top = float(g.max()) if g.size else 0.0
    scaled = np.zeros_like(g) if top <= 0 else np.clip(g, 0.0, None) / top
    pixels = np.rint(scaled * 255.0).astype(np.uint8)
    image = pixels.T[::-1]  # rows: p descending, columns: q ascending
    rows, cols = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(image.tobytes())
    return top


def read_pgm(path):
    """Inverse of :func:`write_pgm` up to the 8-bit quantization; returns uint8 grid[a, b]."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, dims, maxval, body = data.split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ValueError("not an 8-bit binary PGM file")
    cols, rows = (int(v) for v in dims.split())
    pixels = np.frombuffer(body, dtype=np.uint8, count=rows * cols).reshape(rows, cols)
    return pixels[::-1].T.copy()


def write_husimi_csv(path, grid):
    g = np.asarray(grid, dtype=float)
    c = grid_centres(g.shape[0])
    with open(path, "w", newline="\n") as fh:
        fh.write("q,p,value\n")
        for a, qv in enumerate(c):
            for b, pv in enumerate(c):
                fh.write(f"{qv:.10g},{pv:.10g},{g[a, b]:.12e}\n")
