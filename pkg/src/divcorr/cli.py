"""Command-line front end.

Exit codes: 0 success, 1 a check failed, 2 usage error, 3 resource limits.
``--config FILE`` loads a JSON object of flag values; flags given on the
command line win.  Relative output paths (and the default output file when
``--output`` is omitted) go to ``$DIVCORR_OUTPUT_DIR`` if it is set, otherwise
results are written to standard output.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from .arith import SieveInfeasible, divisor_k_window, sieve_window
from .correlation import MODES, METHODS, SAMPLINGS, brute_force_oracle, run_experiment, shift_values
from .majorarc import (
    QuadratureError,
    decay_sweep,
    decomposition_rows,
    dissect,
    i_q_integral,
    rows_to_csv,
)
from .singular import singular_series
from .skfilter import SkParams, desk_params, membership_window
from .verification import CHECKS, run_checks

log = logging.getLogger("divcorr")

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
OUTPUT_ENV = "DIVCORR_OUTPUT_DIR"

# keys that describe the run rather than the computation
_META = {"command", "config", "output", "format", "threads", "seed", "func", "dump_config", "verbose"}


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    thread_count: int = 1
    output_path: str | None = None
    output_format: str = "json"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls(**json.loads(text))

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "ExperimentConfig":
        d = vars(ns)
        params = {k: v for k, v in d.items() if k not in _META}
        return cls(command=d["command"], params=params, seed=d.get("seed"),
                   thread_count=d.get("threads", 1), output_path=d.get("output"),
                   output_format=d.get("format") or "json")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser, formats=("json", "csv"), seed: bool = False):
    p.add_argument("--config", help="JSON file of flag values")
    p.add_argument("--output", help="output file (default: stdout)")
    p.add_argument("--format", choices=formats, default=formats[0])
    p.add_argument("--threads", type=_positive, default=1)
    p.add_argument("--dump-config", action="store_true", help="print the effective configuration and exit")
    if seed:
        p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="divcorr", description="Divisor-correlation laboratory")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sieve", help="d_k (and optionally f_k) over a window")
    p.add_argument("--start", type=_positive, required=True)
    p.add_argument("--len", dest="length", type=_positive, required=True)
    p.add_argument("--k", type=_positive, default=2)
    p.add_argument("--restricted", action="store_true", help="add an f_k column (desk thresholds)")
    p.add_argument("--X", type=int, help="scale for f_k thresholds (default: --start)")
    p.add_argument("--params", help="SkParams JSON file for f_k")
    _common(p, formats=("csv", "json"))
    p.set_defaults(func=cmd_sieve)

    p = sub.add_parser("correlate", help="sampled short-interval correlation report")
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--H1", type=_positive, required=True)
    p.add_argument("--H2", type=_positive, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--mode", choices=MODES, default="dk_dl")
    p.add_argument("--samples", type=_positive, default=50)
    p.add_argument("--qtrunc", type=_positive, default=1000)
    p.add_argument("--method", choices=METHODS, default="auto")
    p.add_argument("--sampling", choices=SAMPLINGS, default="uniform")
    p.add_argument("--params", help="SkParams JSON file (f_k modes)")
    p.add_argument("--include-timing", action="store_true", help="record wall time (breaks byte-identity)")
    _common(p, seed=True)
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("oracle", help="trial-division correlation sums for one window")
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--H1", type=_nonneg, required=True)
    p.add_argument("--H2", type=_positive, required=True)
    p.add_argument("--k", type=_positive, default=2)
    p.add_argument("--l", type=_positive, default=2)
    p.add_argument("--x", type=_positive, required=True)
    _common(p, formats=("csv", "json"))
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="exact-identity suite")
    p.add_argument("--list", action="store_true")
    p.add_argument("--only", nargs="+", choices=list(CHECKS))
    p.add_argument("--corrupt", nargs="*", choices=list(CHECKS),
                   help="test hook: perturb these checks (all when given without names)")
    _common(p, formats=("text", "json"))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("singular", help="truncated singular series with tail bound")
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--qtrunc", type=_positive, default=10**4)
    p.add_argument("--eps", type=float, default=0.1)
    _common(p)
    p.set_defaults(func=cmd_singular)

    p = sub.add_parser("majorarc", help="major-arc sweeps")
    msub = p.add_subparsers(dest="sweep", required=True, parser_class=_Parser)
    d = msub.add_parser("dissect")
    d.add_argument("--Q", type=_positive, required=True)
    d.add_argument("--H1", type=_positive, required=True)
    _common(d, formats=("csv", "json"))
    d = msub.add_parser("decay")
    d.add_argument("--P", type=float, default=1e3)
    d.add_argument("--Q", type=float, default=1e5)
    d.add_argument("--q", type=_positive, default=7)
    d.add_argument("--tmax", type=float, default=1000.0)
    d.add_argument("--tnum", type=_positive, default=101)
    d.add_argument("--X", type=float)
    _common(d, formats=("csv", "json"))
    d = msub.add_parser("decomp")
    d.add_argument("--g", choices=("d2", "d3", "f2"), default="d2")
    d.add_argument("--x", type=_positive, default=10**6)
    d.add_argument("--m", type=_positive, default=1000)
    d.add_argument("--qmax", type=_positive, default=30)
    _common(d, formats=("csv",))
    d = msub.add_parser("iq")
    d.add_argument("--q", type=_positive, required=True)
    d.add_argument("--x", type=float, default=0.0)
    d.add_argument("--H1", type=_positive, required=True)
    d.add_argument("--h", type=int, required=True)
    d.add_argument("--Q", type=_positive, required=True)
    _common(d, formats=("json",))
    p.set_defaults(func=cmd_majorarc)
    return parser


# output ------------------------------------------------------------------

def _resolve_output(path: str | None, default_name: str) -> str | None:
    base = os.environ.get(OUTPUT_ENV)
    if path is None:
        return os.path.join(base, default_name) if base else None
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _emit(text: str, args, default_name: str) -> None:
    path = _resolve_output(args.output, default_name)
    if path is None:
        sys.stdout.write(text)
        return
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
    log.info("wrote %s", path)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _load_params(path: str | None) -> SkParams | None:
    if path is None:
        return None
    with open(path, encoding="utf-8") as fh:
        return SkParams.from_json(fh.read())


# commands ----------------------------------------------------------------

def cmd_sieve(args) -> int:
    table = sieve_window(args.start, args.length)
    dk = divisor_k_window(table, args.k).values
    cols = {"n": table.numbers, "d_k": dk}
    if args.restricted or args.params:
        params = _load_params(args.params) or desk_params(args.X or max(args.start, 16), args.k)
        cols["f_k"] = np.where(membership_window(table, params.for_k(args.k)), dk, 0)
    if args.format == "json":
        text = _dump({"window_start": args.start, "k": args.k,
                      **{k: v.tolist() for k, v in cols.items() if k != "n"}})
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(cols))
        w.writerows(zip(*(c.tolist() for c in cols.values())))
        text = buf.getvalue()
    _emit(text, args, f"sieve.{args.format}")
    return EXIT_OK


def cmd_correlate(args) -> int:
    report = run_experiment(args.X, args.H1, args.H2, args.k, args.l, args.mode,
                            _load_params(args.params), args.samples, args.seed, args.qtrunc,
                            args.threads, args.method, args.sampling)
    text = report.to_csv() if args.format == "csv" else report.to_json(args.include_timing)
    _emit(text, args, f"correlate.{args.format}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    sums = brute_force_oracle(args.X, args.H1, args.H2, args.k, args.l, args.x)
    hs = shift_values(args.H2).tolist()
    if args.format == "json":
        text = _dump({"x": args.x, "h": hs, "sums": sums.tolist()})
    else:
        text = rows_to_csv(["h", "sum"], zip(hs, sums.tolist()))
    _emit(text, args, f"oracle.{args.format}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.list:
        for name, fn in CHECKS.items():
            print(f"{name}: {(fn.__doc__ or '').strip().splitlines()[0]}")
        return EXIT_OK
    corrupt = list(CHECKS) if args.corrupt == [] else (args.corrupt or [])
    results = run_checks(args.only, corrupt)
    if args.format == "json":
        text = _dump([asdict(r) for r in results])
    else:
        text = "".join(r.line() + "\n" for r in results)
    _emit(text, args, f"verify.{'json' if args.format == 'json' else 'txt'}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


def cmd_singular(args) -> int:
    v = singular_series(args.h, args.k, args.l, args.qtrunc, args.eps)
    _emit(_dump(v.to_dict()), args, "singular.json")
    return EXIT_OK


def cmd_majorarc(args) -> int:
    if args.sweep == "dissect":
        d = dissect(args.Q, args.H1)
        text = d.to_csv() if args.format == "csv" else _dump(d.to_dict())
    elif args.sweep == "decay":
        ts = np.linspace(0.0, args.tmax, args.tnum).tolist()
        s = decay_sweep(args.P, args.Q, args.q, ts, args.X)
        log.info("fitted c = %.6g (theta = %.4f)", s.fitted_c, s.theta)
        text = s.to_csv() if args.format == "csv" else _dump(
            {"P": s.P, "Q": s.Q, "X": s.X, "q": s.q, "theta": s.theta,
             "fitted_c": s.fitted_c, "rows": [list(r) for r in s.rows]})
    elif args.sweep == "decomp":
        table = sieve_window(max(1, args.x - 64), args.m + 128)
        if args.g == "f2":
            from .skfilter import f_k_window
            g = f_k_window(table, 2, desk_params(max(args.x, 16), 2))
        else:
            g = divisor_k_window(table, int(args.g[1]))
        rows = decomposition_rows(g, args.x, args.m, args.qmax)
        text = rows_to_csv(["q", "a", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "delta"], rows)
    else:
        val = i_q_integral(args.q, args.x, args.H1, args.h, args.Q)
        text = _dump({"q": args.q, "x": args.x, "H1": args.H1, "h": args.h, "Q": args.Q, "I_q": val})
    _emit(text, args, f"majorarc_{args.sweep}.{args.format}")
    return EXIT_OK


# entry point -------------------------------------------------------------

def _subparser_for(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.ArgumentParser:
    """The (sub)parser that owns the leaf command named in ``argv``."""
    node = parser
    for tok in argv:
        actions = [a for a in node._actions if isinstance(a, argparse._SubParsersAction)]
        if not actions:
            break
        if tok in actions[0].choices:
            node = actions[0].choices[tok]
    return node


def _config_path(argv: list[str]) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config needs a file name")
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _read_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    if isinstance(cfg.get("params"), dict) and "command" in cfg:
        # a saved ExperimentConfig; its run-level fields map back onto flags
        ec = ExperimentConfig(**cfg)
        cfg = dict(ec.params)
        cfg.pop("sweep", None)
        for key, val in (("seed", ec.seed), ("threads", ec.thread_count),
                         ("output", ec.output_path), ("format", ec.output_format)):
            if val is not None:
                cfg[key] = val
    return cfg


def parse(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    path = _config_path(argv)
    if path is not None:
        cfg = _read_config(path)
        leaf = _subparser_for(parser, argv)
        known = {a.dest for a in leaf._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        # config values become defaults, so explicit flags still win
        for a in leaf._actions:
            if a.dest in cfg:
                a.required = False
        leaf.set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if getattr(args, "dump_config", False):
        sys.stdout.write(ExperimentConfig.from_namespace(args).to_json())
        return EXIT_OK
    try:
        return args.func(args)
    except (SieveInfeasible, MemoryError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except QuadratureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
