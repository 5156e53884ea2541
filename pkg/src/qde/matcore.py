"""Dense complex linear algebra shared by every other module.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``; column
vectors are 1-d arrays. Entropies use the natural logarithm.
"""

import numpy as np

from .errors import InvalidDensity, NotHermitian, NotSquare

HERMITIAN_TOL = 1e-8
DENSITY_HERMITIAN_TOL = 1e-10
DENSITY_TRACE_TOL = 1e-10
NEGATIVE_EIG_TOL = 1e-8
EIG_CLIP = 1e-12


def as_cmat(a):
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _require_square(m):
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {m.shape}")


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def hermitian_deviation(m):
    return float(np.max(np.abs(m - dagger(m)))) if m.size else 0.0


def hermitize(m, tol=HERMITIAN_TOL):
    """Return (M + M†)/2, refusing inputs further than ``tol`` from Hermitian."""
    m = np.asarray(m, dtype=np.complex128)
    _require_square(m)
    dev = hermitian_deviation(m)
    if dev > tol:
        raise NotHermitian(f"Hermiticity deviation {dev:.3e} exceeds {tol:.1e}")
    return 0.5 * (m + dagger(m))


def hermitian_spectrum(m, vectors=False):
    """Eigenvalues of a Hermitian matrix in descending order.

    With ``vectors=True`` returns ``(values, Q)`` where the columns of ``Q``
    are the matching orthonormal eigenvectors, so ``M = Q diag(values) Q†``.
    """
    h = hermitize(m)
    if vectors:
        w, q = np.linalg.eigh(h)
        return w[::-1].copy(), q[:, ::-1].copy()
    return np.linalg.eigvalsh(h)[::-1].copy()


def check_density(rho, trace_tol=DENSITY_TRACE_TOL):
    """Validate a density matrix and return its Hermitian part."""
    m = np.asarray(rho, dtype=np.complex128)
    _require_square(m)
    dev = hermitian_deviation(m)
    if dev > DENSITY_HERMITIAN_TOL:
        raise InvalidDensity(f"not Hermitian: deviation {dev:.3e}")
    tr = np.trace(m).real
    if abs(tr - 1.0) > trace_tol:
        raise InvalidDensity(f"trace {tr!r} differs from 1")
    return 0.5 * (m + dagger(m))


def entropy_of_spectrum(values):
    """Sum of -x ln x over eigenvalues, with the clipping convention.

    Values in [-1e-8, 1e-12] count as zero; anything more negative is an
    invalid density spectrum.
    """
    w = np.asarray(values, dtype=float)
    if w.size and w.min() < -NEGATIVE_EIG_TOL:
        raise InvalidDensity(f"negative eigenvalue {w.min():.3e}")
    w = w[w > EIG_CLIP]
    return float(-np.sum(w * np.log(w)))


def von_neumann_entropy(rho):
    """Von Neumann entropy -tr(rho ln rho) in nats."""
    h = check_density(rho)
    return entropy_of_spectrum(np.linalg.eigvalsh(h))


def trace_norm(a):
    """Sum of singular values, via the spectrum of A A†."""
    m = np.asarray(a, dtype=np.complex128)
    _require_square(m)
    w = hermitian_spectrum(m @ dagger(m))
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))


def hs_norm(a):
    """Hilbert-Schmidt (Frobenius) norm."""
    m = np.asarray(a, dtype=np.complex128)
    return float(np.sqrt(np.sum(m.real**2 + m.imag**2)))


def eta(x):
    """The entropy function -x ln x, extended by eta(0) = 0."""
    x = float(x)
    return 0.0 if x <= 0.0 else -x * np.log(x)


def is_unitary(u, tol=1e-10):
    m = np.asarray(u)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(dagger(m) @ m - np.eye(m.shape[0]))) <= tol)
