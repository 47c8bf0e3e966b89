"""Command-line interface.

Subcommands ``sweep``, ``constants`` and ``selftest``. Settings may also come
from a flat ``key=value`` file given with ``--config``; keys are the long
flag names without dashes (``lambda=0.05``, ``alpha-min=4``). Flags on the
command line win over the file.

Exit codes: 0 ok, 1 selftest failure, 2 index condition fails,
3 determinant did not converge, 4 I/O error, 64 bad arguments or config.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .symbol import IndexConditionError
from .sweep import (NonConvergenceError, ReportIOError, SweepConfig, constants,
                    emit_report, index_diagnostics, run_sweep)

log = logging.getLogger("opdet")

EXIT_OK, EXIT_SELFTEST, EXIT_INDEX, EXIT_NONCONVERGED, EXIT_IO = 0, 1, 2, 3, 4
EXIT_USAGE = 64  # argparse's default of 2 would collide with EXIT_INDEX


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# flag name -> (SweepConfig field, type)
_KEYS = {
    "family": ("family", str),
    "lambda": ("lam", float),
    "alpha-min": ("alpha_min", float),
    "alpha-max": ("alpha_max", float),
    "alpha-step": ("alpha_step", float),
    "panel-n": ("panel_n", int),
    "tol": ("tol", float),
    "domain-L": ("domain_L", float),
    "format": ("format", str),
    "out": ("out", str),
    "jobs": ("jobs", int),
}


def read_config(path: str) -> dict:
    """Parse a ``key=value`` file into SweepConfig keyword arguments."""
    out = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-")
            if key not in _KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            name, typ = _KEYS[key]
            out[name] = typ(value)
    return out


def _add_common(p):
    p.add_argument("--config", help="key=value settings file")
    p.add_argument("--family", choices=("toda", "window"))
    p.add_argument("--lambda", dest="lam", type=float, help="coupling")
    p.add_argument("--panel-n", dest="panel_n", type=int, help="Gauss-Legendre nodes per panel")
    p.add_argument("--domain-L", dest="domain_L", type=float,
                   help="half-line truncation length for the correction determinants")
    p.add_argument("--out", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="opdet", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sw = sub.add_parser("sweep", help="alpha-sweep of det(I+K_alpha) against its asymptote")
    _add_common(sw)
    sw.add_argument("--alpha-min", dest="alpha_min", type=float)
    sw.add_argument("--alpha-max", dest="alpha_max", type=float)
    sw.add_argument("--alpha-step", dest="alpha_step", type=float)
    sw.add_argument("--tol", type=float, help="grid-doubling tolerance on log det")
    sw.add_argument("--format", choices=("csv", "json"))
    sw.add_argument("--jobs", type=int, help="alpha values computed concurrently")
    sw.add_argument("--predict-only", dest="predict_only", action="store_true", default=None,
                    help="skip the direct determinants")

    co = sub.add_parser("constants", help="G, E and the correction determinants by both routes")
    _add_common(co)

    st = sub.add_parser("selftest", help="closed-form checks")
    st.add_argument("--inject-fault", dest="faults", action="append", default=[],
                    metavar="CHECK=OFFSET", help=argparse.SUPPRESS)
    return parser


def _config(args) -> SweepConfig:
    kw = read_config(args.config) if getattr(args, "config", None) else {}
    for name, _ in _KEYS.values():
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    if getattr(args, "predict_only", None):
        kw["predict_only"] = True
    return SweepConfig(**kw)


def _write(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as f:
            f.write(text)
    except OSError as exc:
        raise ReportIOError(f"cannot write {path}: {exc}") from exc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")

    if args.command == "selftest":
        from .selftest import selftest
        faults = {}
        for item in args.faults:
            name, _, value = item.partition("=")
            faults[name] = float(value)
        results = selftest(faults, out=sys.stdout)
        return EXIT_OK if all(c.passed for c in results) else EXIT_SELFTEST

    try:
        cfg = _config(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc, OSError) else EXIT_USAGE

    try:
        if args.command == "sweep":
            log.info("sweep %s lambda=%g alphas=%s", cfg.family, cfg.lam, cfg.alphas)
            report = run_sweep(cfg)
            emit_report(report, cfg.format, cfg.out)
        else:
            rec = constants(cfg.family, cfg.lam, cfg.domain_L, cfg.panel_n)
            _write(json.dumps(rec, indent=2) + "\n", cfg.out)
    except IndexConditionError:
        print(f"error: {index_diagnostics(cfg.family, cfg.lam)}", file=sys.stderr)
        return EXIT_INDEX
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except ReportIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
