"""Command-line entry point ``wignerlab``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from ..errors import ConfigError, WignerLabError
from . import config
from .experiments import run, write_json

COMMANDS = ("evolve-wigner", "evolve-vlasov", "converge", "penrose", "eikonal", "check")


def _parser():
    p = argparse.ArgumentParser(prog="wignerlab", description="Wigner / Vlasov-Benney spectral laboratory")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=name != "check", help="TOML experiment file")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--workers", type=int, default=1, help="concurrent sweep members")
        sp.add_argument("--tol-profile", choices=sorted(config.TOL_PROFILES), default="fast")
        if name == "check":
            sp.add_argument("--seed", type=int, default=0)
    return p


def _error(exc, out):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(payload), file=sys.stderr)
    if out:
        try:
            os.makedirs(out, exist_ok=True)
            write_json(os.path.join(out, "error.json"), payload)
        except OSError:
            pass
    return 2 if isinstance(exc, ConfigError) else 1


def _check(args):
    from .checks import run_checks

    seed = args.seed
    if args.config:
        seed = config.load(args.config, args.tol_profile).seed
    rows = run_checks(seed, strict=args.tol_profile == "strict")
    for name, val, tol, ok in rows:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {val:.3e} (tol {tol:.0e})")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_json(
            os.path.join(args.out, "check.json"),
            {"seed": seed, "results": [{"name": n, "value": v, "tol": t, "passed": ok} for n, v, t, ok in rows]},
        )
    return 0 if all(r[3] for r in rows) else 1


def main(argv=None):
    args = _parser().parse_args(argv)
    out = args.out
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        if args.command == "check":
            return _check(args)
        spec = config.load(args.config, args.tol_profile)
        if spec.kind != args.command:
            raise ConfigError(f"config kind {spec.kind!r} does not match command {args.command!r}")
        out = out or spec.output or f"out-{spec.kind}"
        summary = run(spec, out, args.workers)
        print(json.dumps({"status": "ok", "out": out, "kind": spec.kind}))
        return 0 if summary is not None else 1
    except (WignerLabError, OSError, ValueError) as exc:
        return _error(exc, out)


if __name__ == "__main__":
    sys.exit(main())
