"""Command line interface.

Exit codes: 0 success, 2 configuration error, 3 numerical-contract
violation (including failed run checks), 4 resource cap.
"""

import argparse
import sys
from dataclasses import fields

from . import runner
from .config import ExperimentConfig, load_config, load_preset, preset_names, with_overrides
from .errors import ConfigInvalid, ContractViolation, ResourceLimit
from .partition import save_partition, write_container

EXIT_OK, EXIT_CONFIG, EXIT_CONTRACT, EXIT_RESOURCE = 0, 2, 3, 4

_OVERRIDABLE = [f.name for f in fields(ExperimentConfig) if f.name != "name"]


def _add_run(sub):
    p = sub.add_parser("run", help="run an experiment from a config file or preset")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("config", nargs="?", help="path to a key = value config file")
    src.add_argument("--preset", help="name of a shipped preset (see 'qde presets')")
    p.add_argument("--out", default="qde_out", help="output directory (default: qde_out)")
    for name in _OVERRIDABLE:
        flags = [f"--{name}"]
        if "_" in name:
            flags.append(f"--{name.replace('_', '-')}")
        p.add_argument(*flags, dest=f"ov_{name}", metavar="VALUE")


def _parser():
    ap = argparse.ArgumentParser(prog="qde", description=(
        "Dynamical entropy and decoherence of periodically measured quantum maps."))
    sub = ap.add_subparsers(dest="command", required=True)
    _add_run(sub)

    sc = sub.add_parser("selfcheck", help="run the small-dimension consistency suite")
    sc.add_argument("--seed", type=int, default=0)
    sc.add_argument("--map-file", help="also check unitarity of a map container")

    pr = sub.add_parser("presets", help="list shipped presets or print one")
    pr.add_argument("name", nargs="?")

    ex = sub.add_parser("export", help="write the map or partition of a config as a container")
    ex.add_argument("what", choices=("map", "partition"))
    ex.add_argument("output")
    ex.add_argument("--preset")
    ex.add_argument("--config")
    for name in ("map", "partition", "d", "k", "seed"):
        ex.add_argument(f"--{name}", dest=f"ov_{name}", metavar="VALUE")
    return ap


def _config_from(args):
    if getattr(args, "preset", None):
        cfg = load_preset(args.preset)
    elif getattr(args, "config", None):
        cfg = load_config(args.config)
    else:
        cfg = ExperimentConfig()
    overrides = {k[3:]: v for k, v in vars(args).items() if k.startswith("ov_") and v is not None}
    return with_overrides(cfg, overrides).validate()


def _cmd_run(args):
    cfg = _config_from(args)
    manifest = runner.run(cfg, args.out)
    for name, path in manifest.outputs.items():
        print(f"{name}: {path}")
    for c in manifest.checks:
        if not c["passed"]:
            print(f"FAILED {c['name']}: {c['detail']}", file=sys.stderr)
    return EXIT_OK if manifest.ok else EXIT_CONTRACT


def _cmd_selfcheck(args):
    ok, report = runner.selfcheck(args.seed, args.map_file)
    sys.stdout.write(report)
    return EXIT_OK if ok else EXIT_CONTRACT


def _cmd_presets(args):
    if args.name:
        sys.stdout.write(load_preset(args.name).to_text())
    else:
        for name in preset_names():
            cfg = load_preset(name)
            note = "  [long-running]" if cfg.long_running else ""
            print(f"{name}: map={cfg.map} d={cfg.d} partition={cfg.partition} k={cfg.k}{note}")
    return EXIT_OK


def _cmd_export(args):
    cfg = _config_from(args)
    if args.what == "map":
        write_container(args.output, runner.build_map(cfg), "general")
    else:
        save_partition(args.output, runner.build_partition(cfg))
    print(args.output)
    return EXIT_OK


def main(argv=None):
    args = _parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "selfcheck": _cmd_selfcheck,
        "presets": _cmd_presets,
        "export": _cmd_export,
    }[args.command]
    try:
        return handler(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractViolation as exc:
        print(f"numerical contract violated: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except ResourceLimit as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
