"""Flat ``key = value`` experiment configs.

Blank lines and ``#`` comments are ignored. Relative file paths are taken
relative to the directory of the config file.
"""

from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from .errors import ConfigInvalid

MAPS = ("baker", "baker_squared", "haar_random", "identity", "custom-file")
PARTITIONS = ("momentum", "rotated_momentum", "custom-file")
OUTPUTS = ("s_trace", "e_trace", "bounds", "free_probe", "husimi")


@dataclass(frozen=True)
class ExperimentConfig:
    map: str = "baker"
    d: int = 64
    partition: str = "momentum"
    k: int = 2
    t_max: int = 5
    n_samples: int = 32
    seed: int = 0
    outputs: tuple = ("s_trace", "e_trace")
    map_file: str = ""
    partition_file: str = ""
    grid_n: int = 64
    husimi_partitions: tuple = ()
    bounds_t: int = 0
    bounds_samples: int = 256
    cap: int = 4096
    omega_budget: int = 16**4
    long_running: bool = False
    name: str = field(default="", compare=False)

    def validate(self):
        if self.map not in MAPS:
            raise ConfigInvalid("map", f"{self.map!r} is not one of {', '.join(MAPS)}")
        if self.partition not in PARTITIONS:
            raise ConfigInvalid(
                "partition", f"{self.partition!r} is not one of {', '.join(PARTITIONS)}")
        for name in ("d", "k", "t_max", "n_samples", "grid_n", "bounds_samples", "cap",
                     "omega_budget"):
            if getattr(self, name) < 1:
                raise ConfigInvalid(name, "must be a positive integer")
        if self.d < 2:
            raise ConfigInvalid("d", "must be at least 2")
        if self.seed < 0 or self.seed >= 1 << 64:
            raise ConfigInvalid("seed", "must be an unsigned 64-bit integer")
        if self.bounds_t < 0:
            raise ConfigInvalid("bounds_t", "must be non-negative (0 means t_max)")
        if self.map in ("baker", "baker_squared") and self.d % 2:
            raise ConfigInvalid("d", f"baker maps need even d, got {self.d}")
        if self.partition in ("momentum", "rotated_momentum") and self.d % self.k:
            raise ConfigInvalid("k", f"k={self.k} does not divide d={self.d}")
        if self.map == "custom-file" and not self.map_file:
            raise ConfigInvalid("map_file", "required when map = custom-file")
        if self.partition == "custom-file" and not self.partition_file:
            raise ConfigInvalid("partition_file", "required when partition = custom-file")
        for out in self.outputs:
            if out not in OUTPUTS:
                raise ConfigInvalid("outputs", f"unknown output {out!r}")
        if "bounds" in self.outputs and self.bounds_samples < 16:
            raise ConfigInvalid("bounds_samples", "bounds need at least 16 samples")
        for hp in self.husimi_partitions:
            if hp not in PARTITIONS:
                raise ConfigInvalid("husimi_partitions", f"unknown partition {hp!r}")
        return self

    def to_text(self):
        """Canonical config text; parsing it back yields an equal config."""
        lines = []
        for f in fields(self):
            if f.name == "name":
                continue
            val = getattr(self, f.name)
            if isinstance(val, tuple):
                val = ", ".join(val)
            elif isinstance(val, bool):
                val = "true" if val else "false"
            lines.append(f"{f.name} = {val}")
        return "\n".join(lines) + "\n"

    def as_dict(self):
        return asdict(self)


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}


def _convert(key, raw):
    f = _FIELDS.get(key)
    if f is None:
        raise ConfigInvalid(key, "unknown configuration key")
    default = f.default
    raw = str(raw).strip()
    if isinstance(default, bool):
        if raw.lower() in ("1", "true", "yes"):
            return True
        if raw.lower() in ("0", "false", "no"):
            return False
        raise ConfigInvalid(key, f"expected a boolean, got {raw!r}")
    if isinstance(default, int):
        try:
            return int(raw, 0)
        except ValueError:
            raise ConfigInvalid(key, f"expected an integer, got {raw!r}") from None
    if isinstance(default, tuple):
        return tuple(x.strip() for x in raw.split(",") if x.strip())
    return raw


def parse_config_text(text, base_dir=None, name=""):
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        values[key] = _convert(key, raw)
    cfg = ExperimentConfig(name=name, **{k: v for k, v in values.items() if k != "name"})
    if base_dir is not None:
        cfg = _resolve_paths(cfg, Path(base_dir))
    return cfg


def _resolve_paths(cfg, base):
    updates = {}
    for key in ("map_file", "partition_file"):
        val = getattr(cfg, key)
        if val and not Path(val).is_absolute():
            updates[key] = str(base / val)
    return replace(cfg, **updates)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigInvalid("config", f"cannot read {path}: {exc.strerror}") from None
    return parse_config_text(text, base_dir=path.parent, name=path.stem)


def with_overrides(cfg, overrides):
    """Apply ``{key: raw string}`` overrides (e.g. from the command line)."""
    return replace(cfg, **{k: _convert(k, v) for k, v in overrides.items()})


def preset_names():
    files = resources.files("qde").joinpath("presets").iterdir()
    return sorted(p.name[:-4] for p in files if p.name.endswith(".cfg"))


def load_preset(name):
    res = resources.files("qde").joinpath("presets", f"{name}.cfg")
    if not res.is_file():
        raise ConfigInvalid("preset", f"no preset named {name!r}; have {', '.join(preset_names())}")
    return parse_config_text(res.read_text(), name=name)
