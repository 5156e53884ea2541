"""Experiment runner and self-check suite behind the ``qde`` command."""

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import entropy as ent
from .errors import ConfigInvalid, InvalidPartition, NotUnitary
from .matcore import is_unitary
from .partition import (
    load_partition,
    momentum_partition,
    read_container,
    rotate_partition,
)
from .sampling import STREAM_MAP, STREAM_ROTATION, haar_unitary, random_pure_state
from .torus import (
    baker_unitary,
    dft_matrix,
    husimi_of_operator,
    translation_operators,
    write_husimi_csv,
    write_pgm,
)

# Relative spread of a Husimi grid above which a Kraus operator counts as localized.
LOCALIZATION_THRESHOLD = 0.5


@dataclass
class RunManifest:
    config: dict
    input_hash: str
    outputs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    husimi: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(c["passed"] for c in self.checks)

    def to_json(self):
        return json.dumps(self.__dict__ | {"ok": self.ok}, indent=2, sort_keys=True)


def build_map(cfg):
    d = cfg.d
    if cfg.map == "baker":
        return baker_unitary(d)
    if cfg.map == "baker_squared":
        b = baker_unitary(d)
        return b @ b
    if cfg.map == "haar_random":
        return haar_unitary(d, cfg.seed, STREAM_MAP)
    if cfg.map == "identity":
        return np.eye(d, dtype=np.complex128)
    ops, _ = read_container(cfg.map_file)
    if ops.shape[0] != 1 or ops.shape[1] != d:
        raise ConfigInvalid("map_file", f"expected one {d}x{d} operator, got shape {ops.shape}")
    if not is_unitary(ops[0], 1e-10):
        raise NotUnitary(f"{cfg.map_file}: map is not unitary to 1e-10")
    return ops[0]


def build_partition(cfg, which=None):
    which = which or cfg.partition
    if which == "momentum":
        return momentum_partition(cfg.d, cfg.k)
    if which == "rotated_momentum":
        v = haar_unitary(cfg.d, cfg.seed, STREAM_ROTATION)
        return rotate_partition(momentum_partition(cfg.d, cfg.k), v)
    p = load_partition(cfg.partition_file)
    if p.d != cfg.d:
        raise ConfigInvalid("partition_file", f"partition has d={p.d}, config has d={cfg.d}")
    return p


def input_hash(cfg):
    """Git-style blob hash of the canonical config plus any custom input files."""
    payload = cfg.to_text().encode()
    for path in (cfg.map_file, cfg.partition_file):
        if path:
            payload += Path(path).read_bytes()
    header = f"blob {len(payload)}\0".encode()
    return hashlib.sha1(header + payload).hexdigest()


def localization(grid):
    g = np.asarray(grid)
    return float(g.std() / g.mean())


def _master_checks(d, k, s_trace, e_trace):
    checks = []
    for t in s_trace.t:
        s, e, se = s_trace.at(t), e_trace.at(t), e_trace.stderr_at(t)
        checks.append({
            "name": f"master_inequality_t{t}",
            "passed": bool(s + 1e-6 >= e - 3 * se
                           and s <= min(t * math.log(k), 2 * math.log(d)) + 1e-8
                           and e <= math.log(d) + 1e-8),
            "detail": f"S={s:.6f} E={e:.6f}+-{se:.6f}",
        })
    return checks


def run(cfg, out_dir):
    """Execute one experiment, write its outputs and a manifest; return the manifest."""
    cfg.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(cfg.as_dict(), input_hash(cfg))

    u = build_map(cfg)
    p = build_partition(cfg)
    if p.k != cfg.k:
        raise ConfigInvalid("k", f"partition file has k={p.k}, config has k={cfg.k}")

    def emit(name, fn):
        t0 = time.perf_counter()
        result = fn()
        manifest.timings[name] = round(time.perf_counter() - t0, 6)
        return result

    s_trace = e_trace = None
    if "s_trace" in cfg.outputs:
        s_trace = emit("s_trace", lambda: ent.alf_partial_entropy(
            p, u, cfg.t_max, cap=cfg.cap, memory_budget=cfg.omega_budget))
        path = out / "s_trace.csv"
        s_trace.to_csv(path)
        manifest.outputs["s_trace"] = str(path)
    if "e_trace" in cfg.outputs:
        e_trace = emit("e_trace", lambda: ent.mean_decoherence_entropy(
            p, u, cfg.t_max, cfg.n_samples, cfg.seed))
        path = out / "e_trace.csv"
        e_trace.to_csv(path)
        manifest.outputs["e_trace"] = str(path)
    if s_trace is not None and e_trace is not None:
        manifest.checks += _master_checks(cfg.d, p.k, s_trace, e_trace)
    if "bounds" in cfg.outputs:
        t_b = cfg.bounds_t or cfg.t_max
        report = emit("bounds", lambda: ent.theorem2_bounds(
            ent.time_refined_partition(p, u, t_b, cap=cfg.cap), cfg.bounds_samples, cfg.seed))
        path = out / "bounds.csv"
        report.to_csv(path)
        manifest.outputs["bounds"] = str(path)
        manifest.checks.append({
            "name": f"theorem2_sandwich_t{t_b}",
            "passed": bool(report.holds),
            "detail": f"A={report.upper_A:.6f} gap={report.gap:.6f} B={report.lower_B:.6f}",
        })
    if "free_probe" in cfg.outputs:
        if p.kind != "projective":
            raise InvalidPartition("free_probe output needs a projective partition")
        reports = emit("free_probe", lambda: [
            ent.free_independence_probe(p, u, t, cap=cfg.cap) for t in range(1, cfg.t_max + 1)])
        path = out / "free_probe.csv"
        ent.write_free_probe_csv(path, reports)
        manifest.outputs["free_probe"] = str(path)
    if "husimi" in cfg.outputs:
        t0 = time.perf_counter()
        for which in cfg.husimi_partitions or (cfg.partition,):
            part = p if which == cfg.partition else build_partition(cfg, which)
            for j, x in enumerate(part):
                grid = husimi_of_operator(x, cfg.grid_n)
                stem = f"husimi_{which}_{j}"
                top = write_pgm(out / f"{stem}.pgm", grid)
                write_husimi_csv(out / f"{stem}.csv", grid)
                loc = localization(grid)
                manifest.outputs[stem] = str(out / f"{stem}.pgm")
                manifest.husimi[stem] = {
                    "max": top,
                    "localization": loc,
                    "localized": loc >= LOCALIZATION_THRESHOLD,
                }
        manifest.timings["husimi"] = round(time.perf_counter() - t0, 6)

    (out / "manifest.json").write_text(manifest.to_json() + "\n")
    return manifest


def _check(rows, name, value, limit, passed=None):
    ok = value <= limit if passed is None else passed
    rows.append((name, value, limit, bool(ok)))


def selfcheck(seed=0, map_file=None):
    """Run the small-dimension consistency suite; returns ``(ok, report_text)``."""
    rows = []
    for d in (4, 8, 16):
        b = baker_unitary(d)
        dev = float(np.max(np.abs(b.conj().T @ b - np.eye(d))))
        _check(rows, f"baker_unitary_d{d}", dev, 1e-12)
        f = dft_matrix(d)
        _check(rows, f"dft_unitary_d{d}", float(np.max(np.abs(f @ f.conj().T - np.eye(d)))), 1e-12)
        uu, vv = translation_operators(d)
        comm = float(np.max(np.abs(uu @ vv - np.exp(2j * np.pi / d) * vv @ uu)))
        _check(rows, f"translation_commutation_d{d}", comm, 1e-12)
    h = haar_unitary(8, seed, STREAM_MAP)
    _check(rows, "haar_unitary_d8", float(np.max(np.abs(h.conj().T @ h - np.eye(8)))), 1e-12)
    if map_file is not None:
        ops, _ = read_container(map_file)
        m = ops[0]
        dev = float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))
        _check(rows, f"custom_map_unitary({Path(map_file).name})", dev, 1e-10)

    for d in (4, 8):
        b = baker_unitary(d)
        p = momentum_partition(d, 2)
        for t in (1, 2, 3):
            omega = np.linalg.eigvalsh(ent.omega_state(p, b, t))[::-1]
            gram = ent.tracial_correlation(p, b, t).spectrum()
            n = min(len(gram), len(omega))
            dev = float(max(np.max(np.abs(omega[:n] - gram[:n])),
                            np.max(np.abs(omega[n:]), initial=0.0)))
            _check(rows, f"omega_vs_gram_d{d}_t{t}", dev, 1e-8)
        alpha = random_pure_state(d, seed, 0)
        chan = ent.decoherence_entropy(p, b, 3, alpha, fast=False)
        for t in (1, 2, 3):
            gram_e = ent.state_correlation(p, b, t, alpha).entropy()
            _check(rows, f"channel_vs_gram_E_d{d}_t{t}", abs(chan.at(t) - gram_e), 1e-8)

    y = momentum_partition(16, 2)
    rep = ent.theorem2_bounds(y, 256, seed)
    _check(rows, "theorem2_sandwich_momentum16", rep.gap, rep.upper_A, passed=rep.holds)
    b16 = baker_unitary(16)
    s = ent.alf_partial_entropy(y, b16, 3)
    e = ent.mean_decoherence_entropy(y, b16, 3, 32, seed)
    for c in _master_checks(16, 2, s, e):
        _check(rows, c["name"], 0.0, 0.0, passed=c["passed"])

    width = max(len(r[0]) for r in rows)
    lines = [f"{'check'.ljust(width)}  {'value':>12}  {'limit':>12}  status"]
    for name, value, limit, ok in rows:
        status = "PASS" if ok else "FAIL"
        lines.append(f"{name.ljust(width)}  {value:12.3e}  {limit:12.3e}  {status}")
    ok = all(r[3] for r in rows)
    lines.append(f"{sum(r[3] for r in rows)}/{len(rows)} checks passed")
    return ok, "\n".join(lines) + "\n"
