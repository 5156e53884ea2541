"""Partitions of unity (Kraus sets) and the measurement channel they define."""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidPartition,
    NotDivisible,
    NotUnitary,
)
from .matcore import check_density, dagger, hs_norm, is_unitary
from .torus import dft_matrix

KINDS = ("projective", "bistochastic", "general")
RESOLUTION_TOL = 1e-10


def _resolution_error(ops, adjoint_first=True):
    k, d, _ = ops.shape
    if adjoint_first:
        stacked = ops.reshape(k * d, d)  # rows of every X_j
        total = dagger(stacked) @ stacked
    else:
        stacked = ops.transpose(1, 0, 2).reshape(d, k * d)
        total = stacked @ dagger(stacked)
    return hs_norm(total - np.eye(d))


def _is_projective(ops, tol=RESOLUTION_TOL):
    for a, x in enumerate(ops):
        if np.max(np.abs(x - dagger(x))) > tol or np.max(np.abs(x @ x - x)) > tol:
            return False
        for y in ops[a + 1:]:
            if np.max(np.abs(x @ y)) > tol:
                return False
    return True


@dataclass(frozen=True, eq=False)
class PartitionOfUnity:
    """Ordered Kraus operators X_0 .. X_{k-1} with sum X_j† X_j = 1.

    ``ops`` is a read-only complex array of shape (k, d, d).
    """

    ops: np.ndarray
    kind: str = "general"

    def __post_init__(self):
        ops = np.array(self.ops, dtype=np.complex128)
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2] or ops.shape[0] < 1:
            raise InvalidPartition(f"expected (k, d, d) operators, got shape {ops.shape}")
        if self.kind not in KINDS:
            raise InvalidPartition(f"unknown kind {self.kind!r}")
        if not np.all(np.isfinite(ops)):
            raise InvalidPartition("non-finite operator entries")
        err = _resolution_error(ops)
        if err > RESOLUTION_TOL:
            raise InvalidPartition(f"identity resolution violated by {err:.3e}")
        if self.kind == "projective" and not _is_projective(ops):
            raise InvalidPartition("operators are not mutually orthogonal projectors")
        if self.kind == "bistochastic":
            err = _resolution_error(ops, adjoint_first=False)
            if err > RESOLUTION_TOL:
                raise InvalidPartition(f"sum X X† deviates from identity by {err:.3e}")
        ops.setflags(write=False)
        object.__setattr__(self, "ops", ops)

    @property
    def k(self):
        return self.ops.shape[0]

    @property
    def d(self):
        return self.ops.shape[1]

    def __len__(self):
        return self.k

    def __iter__(self):
        return iter(self.ops)

    def __getitem__(self, j):
        return self.ops[j]


def trivial_partition(d):
    return PartitionOfUnity(np.eye(d)[None], kind="projective")


def _infer_kind(ops, hint):
    if hint == "projective" and _is_projective(ops):
        return "projective"
    if hint in ("projective", "bistochastic") and _resolution_error(ops, False) <= RESOLUTION_TOL:
        return "bistochastic"
    return "general"


def momentum_partition(d, k):
    """k projectors onto contiguous blocks of d/k momentum eigenvectors (rows of the DFT)."""
    if k < 1 or d % k:
        raise NotDivisible(f"k={k} does not divide d={d}")
    f = dft_matrix(d)
    r = d // k
    ops = []
    for j in range(k):
        rows = f[j * r:(j + 1) * r]
        ops.append(rows.T @ rows.conj())
    return PartitionOfUnity(np.array(ops), kind="projective")


def rotate_partition(p, v):
    """Conjugate every member: X_j -> V X_j V†."""
    v = np.asarray(v, dtype=np.complex128)
    if v.shape != (p.d, p.d):
        raise DimensionMismatch(f"rotation of shape {v.shape} for d={p.d}")
    if not is_unitary(v, 1e-10):
        raise NotUnitary("rotation matrix is not unitary to 1e-10")
    return PartitionOfUnity(v @ p.ops @ dagger(v), kind=p.kind)


def refine(x, y):
    """Composition X o Y = {X_j Y_m}, j outer and m inner."""
    if x.d != y.d:
        raise DimensionMismatch(f"dimensions {x.d} and {y.d} differ")
    ops = (x.ops[:, None] @ y.ops[None, :]).reshape(-1, x.d, x.d)
    hint = "projective" if x.kind == y.kind == "projective" else (
        "bistochastic" if {x.kind, y.kind} <= {"projective", "bistochastic"} else "general")
    return PartitionOfUnity(ops, kind=_infer_kind(ops, hint))


def apply_channel(p, rho):
    """rho -> sum_j X_j rho X_j†."""
    rho = check_density(rho)
    if rho.shape[0] != p.d:
        raise DimensionMismatch(f"state of size {rho.shape[0]} for partition with d={p.d}")
    terms = p.ops @ rho @ dagger(p.ops)
    out = terms.sum(axis=0)
    return 0.5 * (out + dagger(out))


def measured_step(u, p, rho):
    """One period of measured dynamics: rho -> sum_j X_j U rho U† X_j†."""
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (p.d, p.d):
        raise DimensionMismatch(f"unitary of shape {u.shape} for d={p.d}")
    if not is_unitary(u, 1e-10):
        raise NotUnitary("dynamics is not unitary to 1e-10")
    rho = check_density(rho)
    return apply_channel(p, u @ rho @ dagger(u))


def measurement_basis(p):
    """Orthonormal basis adapted to a projective partition.

    Returns ``(W, sizes)``: the columns of W span the ranges of P_0, P_1, ...
    in order, ``sizes[j] = rank P_j``, so that P_j = W_j W_j†.
    """
    if p.kind != "projective":
        raise InvalidPartition("measurement basis needs a projective partition")
    cols, sizes = [], []
    for x in p.ops:
        w, vecs = np.linalg.eigh(0.5 * (x + dagger(x)))
        keep = vecs[:, w > 0.5]
        cols.append(keep)
        sizes.append(keep.shape[1])
    return np.concatenate(cols, axis=1), tuple(sizes)


# Binary container: magic, version, d, k, kind, then k*d*d complex entries
# (row-major per operator) as little-endian float64 (re, im) pairs.
_MAGIC = b"QDEP"
_HEADER = struct.Struct("<4sIQQB7x")


def write_container(path, ops, kind="general"):
    ops = np.asarray(ops, dtype=np.complex128)
    if ops.ndim == 2:
        ops = ops[None]
    k, d, _ = ops.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, 1, d, k, KINDS.index(kind)))
        fh.write(np.ascontiguousarray(ops).astype("<c16").tobytes())


def read_container(path):
    """Raw ``(ops, kind)`` from a container file; no validation of the operators."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise InvalidPartition(f"{path}: truncated header")
    magic, version, d, k, kind = _HEADER.unpack_from(data)
    if magic != _MAGIC or version != 1 or kind >= len(KINDS):
        raise InvalidPartition(f"{path}: not a partition container")
    body = data[_HEADER.size:]
    if len(body) != k * d * d * 16:
        raise InvalidPartition(f"{path}: expected {k * d * d} entries")
    ops = np.frombuffer(body, dtype="<c16").astype(np.complex128).reshape(k, d, d)
    return ops, KINDS[kind]


def save_partition(path, p):
    write_container(path, p.ops, p.kind)


def load_partition(path):
    ops, kind = read_container(path)
    return PartitionOfUnity(ops, kind=kind)
