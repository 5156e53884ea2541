"""Multi-time correlation matrices and the entropies built from them.

Symbol sequences (i_1, ..., i_t) of a k-member partition are linearised as
i = sum_s i_s k^(s-1), so the first measurement is the least significant
digit. The t-step operators are K_i = U X_{i_t} ... U X_{i_1}.

Two routes lead to the partial entropy S_t. The Gram route diagonalises the
k^t x k^t matrix tr(K_j† K_i)/d; the doubled-space route iterates the channel
with Kraus operators (U X_j) (x) 1 on the maximally entangled state and
diagonalises a d^2 x d^2 density matrix. Their nonzero spectra coincide.
"""

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CapExceeded,
    DimensionMismatch,
    InvalidDensity,
    InvalidPartition,
    MemoryBudget,
    MissingPoint,
    NotUnitary,
)
from .matcore import (
    NEGATIVE_EIG_TOL,
    dagger,
    entropy_of_spectrum,
    eta,
    hermitize,
    hs_norm,
    is_unitary,
    trace_norm,
    von_neumann_entropy,
)
from .partition import PartitionOfUnity, apply_channel, measured_step, measurement_basis
from .sampling import random_pure_state

DEFAULT_CAP = 4096
# complex entries allowed for a d^2 x d^2 doubled-space state (d = 16)
DEFAULT_OMEGA_BUDGET = 16**4


def worker_count():
    """Threads allowed by QDE_THREADS (0 or unset means one per CPU)."""
    raw = os.environ.get("QDE_THREADS", "0").strip() or "0"
    n = int(raw)
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    t: int
    k: int
    mat: np.ndarray

    def __post_init__(self):
        m = hermitize(self.mat)
        tr = np.trace(m).real
        if abs(tr - 1.0) > 1e-9:
            raise InvalidDensity(f"correlation matrix trace {tr!r}")
        object.__setattr__(self, "mat", m)

    def spectrum(self):
        w = np.linalg.eigvalsh(self.mat)[::-1]
        if w[-1] < -NEGATIVE_EIG_TOL:
            raise InvalidDensity(f"correlation matrix not PSD: {w[-1]:.3e}")
        return w

    def entropy(self):
        return entropy_of_spectrum(self.spectrum())


@dataclass(frozen=True)
class EntropyTrace:
    """Entropy curve: one (t, value, stderr) point per time step, values in nats."""

    t: tuple
    value: tuple
    stderr: tuple = field(default=None)

    def __post_init__(self):
        t = tuple(int(x) for x in self.t)
        v = tuple(float(x) for x in self.value)
        se = tuple(0.0 for _ in t) if self.stderr is None else tuple(float(x) for x in self.stderr)
        if not len(t) == len(v) == len(se):
            raise ValueError("t, value and stderr must have equal length")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "stderr", se)

    def __len__(self):
        return len(self.t)

    def at(self, t):
        try:
            return self.value[self.t.index(t)]
        except ValueError:
            raise MissingPoint(f"trace has no point at t={t}") from None

    def stderr_at(self, t):
        return self.stderr[self.t.index(t)]

    def slope(self, t_lo=None, t_hi=None):
        """Least-squares slope of value against t over [t_lo, t_hi]."""
        pts = [(a, b) for a, b in zip(self.t, self.value)
               if (t_lo is None or a >= t_lo) and (t_hi is None or a <= t_hi)]
        if len(pts) < 2:
            raise MissingPoint("need at least two points for a slope")
        x, y = np.array(pts).T
        return float(np.polyfit(x, y, 1)[0])

    def check_range(self, d):
        top = 2.0 * math.log(d) + 1e-6
        bad = [v for v in self.value if not -1e-12 <= v <= top]
        if bad:
            raise InvalidDensity(f"entropy values {bad} outside [0, 2 ln d]")

    def to_csv(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write("t,value,stderr\n")
            for a, b, c in zip(self.t, self.value, self.stderr):
                fh.write(f"{a},{b:.15e},{c:.15e}\n")

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls([r["t"] for r in rows], [r["value"] for r in rows],
                   [r["stderr"] for r in rows])


@dataclass(frozen=True)
class BoundsReport:
    """Monte Carlo estimates of the entropy gap and its two-sided bound."""

    upper_A: float
    gap: float
    lower_B: float
    n_samples: int
    upper_slack_stderr: float = 0.0
    lower_slack_stderr: float = 0.0

    @property
    def upper_holds(self):
        return self.upper_A + 3 * self.upper_slack_stderr >= self.gap

    @property
    def lower_holds(self):
        return self.gap >= self.lower_B - 3 * self.lower_slack_stderr

    @property
    def holds(self):
        return self.upper_holds and self.lower_holds

    def to_csv(self, path):
        with open(path, "w", newline="\n") as fh:
            fh.write("upper_A,gap,lower_B,n_samples\n")
            fh.write(f"{self.upper_A:.15e},{self.gap:.15e},{self.lower_B:.15e},{self.n_samples}\n")


@dataclass(frozen=True)
class FreeProbeReport:
    t: int
    max_dev: float
    unitary_moments: tuple


def write_free_probe_csv(path, reports):
    n_mom = max((len(r.unitary_moments) for r in reports), default=0)
    header = ["t", "max_dev"] + [f"moment_{n}" for n in range(1, n_mom + 1)]
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for r in reports:
            cells = [str(r.t), f"{r.max_dev:.15e}"]
            cells += [f"{m:.15e}" for m in r.unitary_moments]
            cells += [""] * (n_mom - len(r.unitary_moments))
            fh.write(",".join(cells) + "\n")


def _check_dynamics(p, u):
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (p.d, p.d):
        raise DimensionMismatch(f"unitary of shape {u.shape} for d={p.d}")
    if not is_unitary(u, 1e-10):
        raise NotUnitary("dynamics is not unitary to 1e-10")
    return u


def _check_cap(k, t, cap):
    n = k**t
    if n > cap:
        raise CapExceeded("k^t", n, cap)
    return n


def purification(d):
    """Maximally entangled vector sum_m e_m (x) e_m / sqrt(d), index m*d + m."""
    if d < 1:
        raise ValueError("d must be positive")
    psi = np.zeros(d * d, dtype=np.complex128)
    psi[np.arange(d) * (d + 1)] = 1.0 / np.sqrt(d)
    return psi


def partial_trace(rho, d, keep):
    """Reduce a (d*d)-dimensional operator to factor ``keep`` (0 or 1)."""
    r = np.asarray(rho).reshape(d, d, d, d)
    return np.einsum("ajbj->ab", r) if keep == 0 else np.einsum("jajb->ab", r)


def _extend(ux, ops):
    """Prepend one step to a stack of sequence operators (new symbol most significant)."""
    d = ux.shape[1]
    return (ux[:, None] @ ops[None]).reshape(-1, d, d)


def sequence_operators(p, u, t, cap=DEFAULT_CAP):
    """Stack of the k^t operators K_i = U X_{i_t} ... U X_{i_1}."""
    u = _check_dynamics(p, u)
    _check_cap(p.k, t, cap)
    ux = u @ p.ops
    ops = np.eye(p.d, dtype=np.complex128)[None]
    for _ in range(t):
        ops = _extend(ux, ops)
    return ops


def time_refined_partition(p, u, t, cap=DEFAULT_CAP):
    """The k^t-member partition {K_i} generated by t steps of measured dynamics."""
    kind = "bistochastic" if p.kind in ("projective", "bistochastic") else "general"
    return PartitionOfUnity(sequence_operators(p, u, t, cap), kind=kind)


def _gram(rows, scale):
    return (rows @ dagger(rows)) * scale


def tracial_correlation(p, u, t, cap=DEFAULT_CAP):
    """sigma[i; j] = tr(K_j† K_i) / d for the reference state 1/d."""
    ops = sequence_operators(p, u, t, cap)
    mat = _gram(ops.reshape(ops.shape[0], -1), 1.0 / p.d)
    return CorrelationMatrix(t, p.k, mat)


def _sequence_vectors(p, u, t, alpha):
    ux = u @ p.ops
    vecs = alpha[None, :]
    for _ in range(t):
        # (k, d, n) -> (k, n, d): new symbol is the outer index
        vecs = (ux @ vecs.T).transpose(0, 2, 1).reshape(-1, p.d)
    return vecs


def _as_state(alpha, d):
    a = np.asarray(alpha, dtype=np.complex128).reshape(-1)
    if a.shape[0] != d:
        raise DimensionMismatch(f"state of length {a.shape[0]} for d={d}")
    if abs(np.linalg.norm(a) - 1.0) > 1e-12:
        raise InvalidDensity("state vector is not normalized to 1e-12")
    return a


def state_correlation(p, u, t, alpha, cap=DEFAULT_CAP):
    """sigma_alpha[i; j] = <alpha| K_j† K_i |alpha>."""
    u = _check_dynamics(p, u)
    _check_cap(p.k, t, cap)
    a = _as_state(alpha, p.d)
    vecs = _sequence_vectors(p, u, t, a)
    return CorrelationMatrix(t, p.k, _gram(vecs, 1.0))


def _gram_entropy(rows, scale):
    """Entropy of rows·rows†·scale via whichever side of the Gram pair is smaller."""
    n, m = rows.shape
    g = _gram(rows, scale) if n <= m else (rows.T @ rows.conj()) * scale
    return entropy_of_spectrum(np.linalg.eigvalsh(hermitize(g)))


def _apply_local(a, omega, d):
    """(A (x) 1) Omega (A (x) 1)† without forming the Kronecker product."""
    w = (a @ omega.reshape(d, -1)).reshape(d, d, d, d)
    w = w.transpose(0, 1, 3, 2).reshape(-1, d) @ dagger(a)
    return w.reshape(d, d, d, d).transpose(0, 1, 3, 2).reshape(d * d, d * d)


def _omega_step(ux, omega, d):
    out = np.zeros_like(omega)
    for a in ux:
        out += _apply_local(a, omega, d)
    return 0.5 * (out + dagger(out))


def _check_budget(d, budget, note=""):
    if d**4 > budget:
        raise MemoryBudget("d^4", d**4, budget, note)


def omega_state(p, u, t, memory_budget=DEFAULT_OMEGA_BUDGET):
    """Doubled-space state [Phi_{UX} (x) id]^t (|Psi><Psi|) by explicit channel iteration."""
    u = _check_dynamics(p, u)
    d = p.d
    _check_budget(d, memory_budget)
    psi = purification(d)
    omega = np.outer(psi, psi.conj())
    eye = np.eye(d)
    kraus = [np.kron(u @ x, eye) for x in p.ops]
    for _ in range(t):
        omega = sum(k @ omega @ dagger(k) for k in kraus)
        omega = 0.5 * (omega + dagger(omega))
    return omega


def alf_partial_entropy(p, u, t_max, cap=DEFAULT_CAP, memory_budget=DEFAULT_OMEGA_BUDGET):
    """S_t for t = 1 .. t_max.

    Uses the Gram route while k^t <= cap and switches to iterating the
    doubled-space state beyond that, which needs d^4 <= memory_budget.
    """
    u = _check_dynamics(p, u)
    d = p.d
    if p.k**t_max > cap:
        # fail before any work if the doubled-space route will be needed and cannot run
        _check_budget(d, memory_budget, f"doubled-space route, since k^t={p.k**t_max} > cap={cap}")
    ux = u @ p.ops
    ts, vals = [], []
    ops = np.eye(d, dtype=np.complex128)[None]
    omega = None
    for t in range(1, t_max + 1):
        if omega is None and p.k**t <= cap:
            ops = _extend(ux, ops)
            vals.append(_gram_entropy(ops.reshape(ops.shape[0], -1), 1.0 / d))
        else:
            if omega is None:
                rows = ops.reshape(ops.shape[0], -1)
                omega = (rows.T @ rows.conj()) / d
                ops = None
            omega = _omega_step(ux, omega, d)
            vals.append(entropy_of_spectrum(np.linalg.eigvalsh(omega)))
        ts.append(t)
    return EntropyTrace(ts, vals)


def _basis_pinch_trace(u, p, t_max, alpha):
    """E_t for projective partitions, working in the measurement basis.

    With W the adapted basis the channel is a block-diagonal pinching, so one
    period costs two products with the rotated dynamics W† U W.
    """
    w, sizes = measurement_basis(p)
    edges = np.cumsum((0,) + sizes)
    ut = dagger(w) @ u @ w
    mask = np.zeros((p.d, p.d), dtype=bool)
    for lo, hi in zip(edges[:-1], edges[1:]):
        mask[lo:hi, lo:hi] = True
    a = dagger(w) @ alpha
    rho = np.where(mask, np.outer(a, a.conj()), 0.0)
    out = [entropy_of_spectrum(np.linalg.eigvalsh(rho))]
    for _ in range(t_max - 1):
        rho = np.where(mask, ut @ rho @ dagger(ut), 0.0)
        rho = 0.5 * (rho + dagger(rho))
        out.append(entropy_of_spectrum(np.linalg.eigvalsh(rho)))
    return out


def decoherence_entropy(p, u, t_max, alpha, fast=True):
    """E_t = S([Phi_{UX}]^t |alpha><alpha|) for t = 1 .. t_max.

    [Phi_{UX}]^t equals U (measured_step^(t-1) o Phi_X)(.) U†, and the outer
    U does not change the spectrum, so the state is propagated as one
    measurement followed by t-1 measured steps. Projective partitions take
    the equivalent measurement-basis route unless ``fast`` is False.
    """
    u = _check_dynamics(p, u)
    a = _as_state(alpha, p.d)
    ts = list(range(1, t_max + 1))
    if fast and p.kind == "projective":
        return EntropyTrace(ts, _basis_pinch_trace(u, p, t_max, a))
    rho = apply_channel(p, np.outer(a, a.conj()))
    vals = [von_neumann_entropy(rho)]
    for _ in range(t_max - 1):
        rho = measured_step(u, p, rho)
        vals.append(von_neumann_entropy(rho))
    return EntropyTrace(ts, vals)


def _mean_and_stderr(samples):
    """Column means and standard errors with exactly rounded sums."""
    n = len(samples)
    cols = list(zip(*samples))
    means = [math.fsum(c) / n for c in cols]
    if n < 2:
        return means, [0.0] * len(cols)
    ses = []
    for c, m in zip(cols, means):
        var = math.fsum((x - m) ** 2 for x in c) / (n - 1)
        ses.append(math.sqrt(var / n))
    return means, ses


def mean_decoherence_entropy(p, u, t_max, n_samples=32, seed=0, workers=None):
    """Average of E_t over Haar-random initial states; sample i uses stream (seed, i)."""
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    u = _check_dynamics(p, u)

    def one(i):
        return decoherence_entropy(p, u, t_max, random_pure_state(p.d, seed, i)).value

    workers = workers or worker_count()
    if workers > 1 and n_samples > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(one, range(n_samples)))
    else:
        samples = [one(i) for i in range(n_samples)]
    means, ses = _mean_and_stderr(samples)
    return EntropyTrace(range(1, t_max + 1), means, ses)


def production_rates(s_trace, e_trace):
    """First differences (S_2 - S_1, E_2 - E_1)."""
    return s_trace.at(2) - s_trace.at(1), e_trace.at(2) - e_trace.at(1)


def theorem2_bounds(y, n_samples=256, seed=0):
    """Two-sided bound on S(sigma[Y]) - <S(sigma_alpha[Y])> over Haar-random alpha.

    Per sample, with D = sigma - sigma_alpha: the upper term is
    ||D||_1 ln k + eta(||D||_1) and the lower terms are ||D||_1^2 / 2 and
    ||D||_2^2 / 2; the reported bounds are their sample means (the lower
    bound takes the larger of its two means).
    """
    if n_samples < 16:
        raise ValueError("bounds are reported only for n_samples >= 16")
    ops, d, k = y.ops, y.d, y.k
    rows = ops.reshape(k, -1)
    sigma = _gram(rows, 1.0 / d)
    s_sigma = entropy_of_spectrum(np.linalg.eigvalsh(hermitize(sigma)))
    upper, gaps, sq1, sq2 = [], [], [], []
    for i in range(n_samples):
        alpha = random_pure_state(d, seed, i)
        sig_a = _gram(ops @ alpha, 1.0)
        diff = sigma - sig_a
        n1 = trace_norm(diff)
        n2 = hs_norm(diff)
        upper.append(n1 * math.log(k) + eta(n1))
        gaps.append(s_sigma - entropy_of_spectrum(np.linalg.eigvalsh(hermitize(sig_a))))
        sq1.append(0.5 * n1 * n1)
        sq2.append(0.5 * n2 * n2)
    (a_mean, gap, b1, b2), _ = _mean_and_stderr(list(zip(upper, gaps, sq1, sq2)))
    lower = sq1 if b1 >= b2 else sq2
    _, (se_up,) = _mean_and_stderr([(a - g,) for a, g in zip(upper, gaps)])
    _, (se_lo,) = _mean_and_stderr([(g - b,) for g, b in zip(gaps, lower)])
    return BoundsReport(a_mean, gap, max(b1, b2), n_samples, se_up, se_lo)


def free_independence_probe(p, u, t, alpha=None, cap=DEFAULT_CAP):
    """Distance of sigma[P^t] from delta / k^t, plus |tr U^n| / d for n = 1 .. t."""
    if p.kind != "projective":
        raise InvalidPartition("free-independence probe needs a projective partition")
    u = _check_dynamics(p, u)
    if alpha is None:
        sigma = tracial_correlation(p, u, t, cap).mat
    else:
        sigma = state_correlation(p, u, t, alpha, cap).mat
    n = sigma.shape[0]
    dev = float(np.max(np.abs(sigma - np.eye(n) / n)))
    moments = []
    power = np.eye(p.d, dtype=np.complex128)
    for _ in range(t):
        power = power @ u
        moments.append(float(abs(np.trace(power)) / p.d))
    return FreeProbeReport(t, dev, tuple(moments))
