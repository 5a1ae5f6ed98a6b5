"""Command-line entry point: ``gbctopo <command> [flags]``."""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import presets, runs
from .errors import (ConfigError, GatingViolation, GBCError, MethodInapplicable, ParseError,
                     SchemaError)
from .fieldio import atomic_write, dumps

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DEGENERATE = 2
EXIT_INPUT = 3
EXIT_DISAGREE = 4


def parse_params(text):
    out = {}
    if not text:
        return out
    for item in text.split(","):
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--params entry {item!r} is not k=v")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise ConfigError(f"--params value {val!r} for {key!r} is not a number") from None
    return out


def parse_grid(text):
    if text is None:
        return None
    try:
        return [int(x) for x in text.lower().split("x")]
    except ValueError:
        raise ConfigError(f"--grid {text!r} is not of the form N1xN2[...]") from None


def build_parser():
    p = argparse.ArgumentParser(prog="gbctopo", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--manifold", choices=sorted(presets.MANIFOLDS))
        sp.add_argument("--params", help="preset parameters, k=v,...")
        sp.add_argument("--grid", help="resolution N1xN2[xN3xN4]")
        sp.add_argument("--field", help="vector field file (JSON)")
        sp.add_argument("--scalar", help="scalar field file (JSON)")
        sp.add_argument("--out", help="output file (directory for track)")
        sp.add_argument("--config", help="JSON config; its entries override flags")
        sp.add_argument("--tol-zero", type=float, default=1e-10)
        sp.add_argument("--epsilon", default="AUTO")
        sp.add_argument("--winding-radius", default="AUTO")
        sp.add_argument("--strict", action="store_true")
        sp.add_argument("--text", action="store_true", help="plain-text summary on stdout")
        sp.add_argument("-v", "--verbose", action="store_true")

    for name, help_ in [("euler", "Euler characteristic by one or all routes"),
                        ("zeros", "zeros of a vector field with their charges"),
                        ("density", "GBC density or regularized delta density integrals"),
                        ("track", "track zeros of a time-dependent field"),
                        ("verify", "run the structural identity battery")]:
        sp = sub.add_parser(name, help=help_)
        common(sp)
        if name == "euler":
            sp.add_argument("--method", choices=runs.METHODS, default="all")
        if name == "track":
            sp.add_argument("--preset", choices=sorted(presets.SPACETIME))
            sp.add_argument("--frames", help="directory of frame files")
    sub.add_parser("presets", help="list the built-in manifolds and spacetime fields")
    return p


def config_from_args(args):
    d = {"command": args.command}
    for key in ("manifold", "field", "scalar", "out", "tol_zero", "epsilon", "winding_radius",
                "strict", "method", "preset", "frames"):
        val = getattr(args, key, None)
        if val is not None:
            d[key] = val
    d["params"] = parse_params(args.params)
    d["grid"] = parse_grid(args.grid)
    if args.config:
        path = Path(args.config)
        try:
            loaded = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        d.update(loaded)
        d["command"] = args.command
    return runs.RunConfig.from_dict(d)


def list_presets():
    lines = ["manifolds:"]
    for name in presets.MANIFOLDS:
        m = presets.get_manifold(name)
        res = ", ".join("x".join(map(str, c.resolution)) for c in m.charts)
        lines.append(f"  {name:14s} n={m.n} chi={m.chi:2d} charts: {res}")
    lines.append("spacetime fields:")
    for name in presets.SPACETIME:
        lines.append(f"  {name}")
    return "\n".join(lines)


def exit_status(cfg, report):
    if cfg.strict and report.get("degenerate"):
        return EXIT_DEGENERATE
    if cfg.strict and cfg.command == "euler" and cfg.method == "all" and not report.get("agree"):
        return EXIT_DISAGREE
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        print(list_presets())
        return EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        report = runs.RUNNERS[cfg.command](cfg)
    except (ConfigError, ParseError, SchemaError, MethodInapplicable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except GatingViolation as exc:
        print(f"error: {exc} (suggested dt = {exc.suggested_dt})", file=sys.stderr)
        return EXIT_ERROR
    except GBCError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR

    if cfg.command == "track":
        if cfg.out:
            runs.write_track_outputs(report, cfg.out)
        else:
            report.pop("_csv")
    if cfg.command != "track" and cfg.out:
        atomic_write(cfg.out, dumps(report))
    if args.text:
        print(runs.render_text(report))
    elif not cfg.out:
        sys.stdout.write(dumps(report))
    return exit_status(cfg, report)


if __name__ == "__main__":
    sys.exit(main())
