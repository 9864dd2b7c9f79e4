"""Command-line front end.

Usage::

    stiefel-compare [verify] COMMAND [options]

Commands: theorem1, convex, ncgauss, converse1, converse2, maxentry,
counterexample, alpha-table, selftest. Option values are resolved as
command-line flag > ``--config`` JSON file > built-in default.

Exit codes: 0 on completion, 2 if any verdict is VIOLATED (or a statistical
self-check fails), 1 on usage or runtime errors.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from ._validation import DimensionError
from .constants import alpha_table
from .estimation import VIOLATED
from .experiments import (
    DEFAULT_GRID_DIMS,
    DEFAULT_GRID_NORMS,
    DEFAULT_GRID_PHIS,
    run_convex_comparison,
    run_converse1,
    run_converse2,
    run_counterexample,
    run_distribution_selftests,
    run_maxentry_study,
    run_ncgauss,
    run_sublinear_grid,
)
from .functionals import ConvexFunctional, parse_norm, parse_phi
from .report import emit_report
from .sampling import Dims

__all__ = ["RunConfig", "UsageError", "parse_config", "dispatch", "main"]

COMMANDS = (
    "theorem1",
    "convex",
    "ncgauss",
    "converse1",
    "converse2",
    "maxentry",
    "counterexample",
    "alpha-table",
    "selftest",
)


class UsageError(Exception):
    """Bad command line or configuration; maps to exit code 1."""


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    k: int | None = None
    n_list: tuple = (64, 256)
    norm: str | None = None
    phi: str | None = None
    sense: str = "convex"
    negate: bool = False
    linear_entry: tuple | None = None
    Y: str = "l2"
    Z: str = "l2"
    T: str = "bartlett_R"
    beta: float = 1.5
    a_matrices: str | None = None
    submatrix_j: int | None = None
    factor_override: float | None = None
    n_max: int = 8
    samples: int | None = None
    seed: int = 0
    z: float = 3.0
    output: str = "-"
    format: str = "csv"
    workers: int | None = None


# dest -> (flag, argparse kwargs); the commands each option applies to
_OPTIONS = {
    "n": ("--n", {"type": int, "help": "ambient dimension"}),
    "k": ("--k", {"type": int, "help": "frame dimension (k <= n)"}),
    "n_list": ("--n-list", {"help": "comma-separated dimensions, e.g. 64,256"}),
    "norm": ("--norm", {"help": "spectral | frobenius | max_entry | op:Y->Z | none (convex only)"}),
    "phi": ("--phi", {"help": "identity | hinge(c) | power(m) | exp(theta)"}),
    "sense": ("--sense", {"choices": ("convex", "concave")}),
    "negate": ("--negate", {"action": "store_true", "help": "negate the functional (concave)"}),
    "linear_entry": ("--linear-entry", {"help": "add the entry M[i,j] (1-based 'i,j') to f"}),
    "Y": ("--Y", {"choices": ("l1", "l2", "linf")}),
    "Z": ("--Z", {"choices": ("l1", "l2", "linf")}),
    "T": ("--T", {"choices": ("bartlett_R", "wishart_W")}),
    "beta": ("--beta", {"type": float}),
    "a_matrices": ("--a-matrices", {"help": "JSON file with a list of row-major n x n arrays"}),
    "submatrix_j": ("--submatrix-j", {"type": int, "help": "apply L_j (first j rows, scaled)"}),
    "factor_override": ("--factor-override", {"type": float, "help": "test hook: replace the factor"}),
    "n_max": ("--n-max", {"type": int}),
    "samples": ("--samples", {"type": int}),
    "seed": ("--seed", {"type": int}),
    "z": ("--z", {"type": float, "help": "verdict policy: standard errors of slack"}),
    "output": ("--output", {"help": "output path, '-' for stdout"}),
    "format": ("--format", {"choices": ("csv", "json")}),
    "workers": ("--workers", {"type": int}),
}
_COMMON = ("samples", "seed", "z", "output", "format", "workers")
_COMMAND_OPTIONS = {
    "theorem1": ("n", "k", "norm", "phi", "submatrix_j", "factor_override") + _COMMON,
    "convex": ("n", "k", "norm", "phi", "sense", "negate", "linear_entry") + _COMMON,
    "ncgauss": ("n", "norm", "phi", "a_matrices") + _COMMON,
    "converse1": ("n", "k", "norm") + _COMMON,
    "converse2": ("n", "k", "Y", "Z", "T") + _COMMON,
    "maxentry": ("n_list",) + _COMMON,
    "counterexample": ("n", "k", "beta") + _COMMON,
    "alpha-table": ("n_max", "output", "format"),
    "selftest": ("n", "k") + _COMMON,
}
_DEFAULT_DIMS = {
    "convex": (16, 4),
    "ncgauss": (8, 8),
    "converse1": (16, 4),
    "converse2": (16, 4),
    "counterexample": (8, 8),
    "selftest": (20, 5),
}
_DEFAULT_SAMPLES = {"selftest": 100_000}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser():
    parser = _Parser(prog="stiefel-compare", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for cmd in COMMANDS:
        p = sub.add_parser(cmd, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="JSON file of option values")
        for dest in _COMMAND_OPTIONS[cmd]:
            flag, kwargs = _OPTIONS[dest]
            p.add_argument(flag, dest=dest, **kwargs)
    return parser


def _flag(dest):
    return _OPTIONS[dest][0] if dest in _OPTIONS else dest


def _load_config_file(path, command):
    if not os.path.isfile(path):
        raise UsageError(f"--config: file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--config: cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("--config: top level must be a JSON object")
    allowed = set(_COMMAND_OPTIONS[command]) | {"command"}
    for key in data:
        if key not in allowed:
            raise UsageError(f"--config: unknown key {key!r} for command {command}")
    if data.get("command", command) != command:
        raise UsageError(f"--config: command {data['command']!r} does not match {command!r}")
    data.pop("command", None)
    return data


def _parse_int_list(text, dest):
    if isinstance(text, (list, tuple)):
        items = text
    else:
        items = [t for t in str(text).split(",") if t.strip()]
    try:
        return tuple(int(t) for t in items)
    except ValueError as exc:
        raise UsageError(f"{_flag(dest)}: expected comma-separated integers, got {text!r}") from exc


def parse_config(argv):
    """Parse ``argv`` (without the program name) into a validated RunConfig."""
    argv = list(argv)
    if argv and argv[0] == "verify":
        argv = argv[1:]
    if not argv:
        raise UsageError(f"missing command; choose from {', '.join(COMMANDS)}")
    if argv[0] not in COMMANDS and not argv[0].startswith("-"):
        raise UsageError(f"unknown command {argv[0]!r}; choose from {', '.join(COMMANDS)}")
    ns = vars(_build_parser().parse_args(argv))
    command = ns.pop("command")
    if command is None:
        raise UsageError("missing command")
    values = {}
    config_path = ns.pop("config", None)
    if config_path is not None:
        values.update(_load_config_file(config_path, command))
    values.update(ns)
    known = {f.name for f in fields(RunConfig)}
    for key in values:
        if key not in known:
            raise UsageError(f"unknown option {key!r}")
    cfg = RunConfig(command=command, **values)
    return _finalize(cfg)


def _finalize(cfg):
    cmd = cfg.command
    if cfg.samples is None:
        cfg.samples = _DEFAULT_SAMPLES.get(cmd, 10_000)
    if isinstance(cfg.n_list, str) or isinstance(cfg.n_list, list):
        cfg.n_list = _parse_int_list(cfg.n_list, "n_list")
    if cmd == "ncgauss" and cfg.k is not None:
        raise UsageError("--k: ncgauss uses square n x n matrices")
    if cmd in _DEFAULT_DIMS:
        dn, dk = _DEFAULT_DIMS[cmd]
        if cmd == "ncgauss":
            cfg.k = None
        elif cfg.n is None and cfg.k is None:
            cfg.n, cfg.k = dn, dk
        elif cfg.n is None or cfg.k is None:
            missing = "--n" if cfg.n is None else "--k"
            raise UsageError(f"{missing}: both --n and --k are required when either is given")
    if cmd == "theorem1" and (cfg.n is None) != (cfg.k is None):
        missing = "--n" if cfg.n is None else "--k"
        raise UsageError(f"{missing}: both --n and --k are required when either is given")
    for dest in ("n", "k", "samples", "n_max", "submatrix_j", "workers"):
        v = getattr(cfg, dest)
        if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v < 1):
            raise UsageError(f"{_flag(dest)}: must be a positive integer, got {v!r}")
    if cfg.samples < 2:
        raise UsageError(f"--samples: need at least 2, got {cfg.samples}")
    if cfg.n is not None and cfg.k is not None and cfg.k > cfg.n:
        raise UsageError(f"--k: dimension error, k={cfg.k} exceeds n={cfg.n}")
    if not isinstance(cfg.seed, int) or not 0 <= cfg.seed < 2**64:
        raise UsageError(f"--seed: must be an unsigned 64-bit integer, got {cfg.seed!r}")
    if cfg.z <= 0:
        raise UsageError(f"--z: must be positive, got {cfg.z}")
    if cfg.beta <= 0:
        raise UsageError(f"--beta: must be positive, got {cfg.beta}")
    if cfg.format not in ("csv", "json"):
        raise UsageError(f"--format: expected csv or json, got {cfg.format!r}")
    if cmd == "maxentry" and any(m < 2 for m in cfg.n_list):
        raise UsageError("--n-list: every dimension must be >= 2")
    if cfg.submatrix_j is not None and cfg.n is not None and cfg.submatrix_j > cfg.n:
        raise UsageError(f"--submatrix-j: j={cfg.submatrix_j} exceeds n={cfg.n}")
    if cfg.linear_entry is not None:
        cfg.linear_entry = _parse_int_list(cfg.linear_entry, "linear_entry")
        if len(cfg.linear_entry) != 2:
            raise UsageError("--linear-entry: expected 'i,j'")
    for dest in ("norm", "phi"):
        text = getattr(cfg, dest)
        if text is None or (dest == "norm" and text == "none"):
            continue
        try:
            (parse_norm if dest == "norm" else parse_phi)(text)
        except ValueError as exc:
            raise UsageError(f"{_flag(dest)}: {exc}") from exc
    if cfg.a_matrices is not None and not os.path.isfile(cfg.a_matrices):
        raise UsageError(f"--a-matrices: file not found: {cfg.a_matrices}")
    if cfg.output not in (None, "-"):
        parent = os.path.dirname(os.path.abspath(cfg.output))
        if not os.path.isdir(parent):
            raise UsageError(f"--output: directory does not exist: {parent}")
    return cfg


def load_a_matrices(path, n=None):
    """Read coefficient matrices from JSON.

    Accepts a list (or ``{"A": list}``) whose items are flat row-major arrays
    of length ``n*n`` or nested ``n x n`` lists.
    """
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data.get("A")
    if not isinstance(data, list) or not data:
        raise UsageError("--a-matrices: expected a non-empty list of matrices")
    mats = []
    for item in data:
        arr = np.asarray(item, dtype=np.float64)
        if n is None:
            n = int(round(math.sqrt(arr.size)))
        if arr.size != n * n:
            raise UsageError(f"--a-matrices: every matrix must have {n}x{n} entries")
        mats.append(arr.reshape(n, n))
    return n, mats


def _run(cfg):
    """Execute the configured experiment; return the list of result rows."""
    common = {"n_samples": cfg.samples, "seed": cfg.seed, "workers": cfg.workers}
    cmd = cfg.command
    if cmd == "alpha-table":
        return alpha_table(cfg.n_max)
    if cmd == "theorem1":
        dims_list = DEFAULT_GRID_DIMS if cfg.n is None else [(cfg.n, cfg.k)]
        norms = DEFAULT_GRID_NORMS if cfg.norm is None else [parse_norm(cfg.norm)]
        phis = DEFAULT_GRID_PHIS if cfg.phi is None else [parse_phi(cfg.phi)]
        if cfg.submatrix_j is not None and any(cfg.submatrix_j > d[0] for d in dims_list):
            raise UsageError("--submatrix-j: exceeds n for some grid dimension")
        return run_sublinear_grid(
            dims_list,
            norms,
            phis,
            submatrix_j=cfg.submatrix_j,
            factor_override=cfg.factor_override,
            z=cfg.z,
            **common,
        )
    dims = Dims(cfg.n, cfg.k) if cfg.k is not None else None
    norm = parse_norm(cfg.norm) if cfg.norm not in (None, "none") else None
    phi = parse_phi(cfg.phi or "identity")
    if cmd == "convex":
        linear = None
        if cfg.linear_entry is not None:
            i, j = cfg.linear_entry
            if not (1 <= i <= cfg.n and 1 <= j <= cfg.k):
                raise UsageError("--linear-entry: index out of range")
            linear = np.zeros((cfg.n, cfg.k))
            linear[i - 1, j - 1] = 1.0
        if norm is None and linear is None and cfg.norm is None:
            norm = parse_norm("frobenius")
        if norm is None and linear is None:
            raise UsageError("--norm: 'none' needs --linear-entry")
        f = ConvexFunctional(norm, phi, linear=linear, negate=cfg.negate)
        try:
            return [run_convex_comparison(dims, f, cfg.sense, z=cfg.z, **common)]
        except ValueError as exc:
            raise UsageError(f"--sense: {exc}") from exc
    if cmd == "ncgauss":
        if cfg.a_matrices is None:
            n = cfg.n or 8
            mats = [np.eye(n)]
        else:
            n, mats = load_a_matrices(cfg.a_matrices, cfg.n)
        return [run_ncgauss(n, mats, norm or parse_norm("spectral"), phi, z=cfg.z, **common)]
    if cmd == "converse1":
        norm = norm or parse_norm("spectral")
        if not norm.right_ideal:
            raise UsageError(f"--norm: {norm.label} is not a right operator ideal norm")
        return [run_converse1(dims, norm, z=cfg.z, **common)]
    if cmd == "converse2":
        try:
            return [run_converse2(dims, cfg.Y, cfg.Z, cfg.T, z=cfg.z, **common)]
        except ValueError as exc:
            raise UsageError(f"--Y/--Z: {exc}") from exc
    if cmd == "maxentry":
        return run_maxentry_study(cfg.n_list, **common)
    if cmd == "counterexample":
        return [run_counterexample(cfg.beta, dims, **common)]
    if cmd == "selftest":
        return run_distribution_selftests(dims, z=cfg.z, **common)
    raise UsageError(f"unknown command {cmd!r}")


def _exit_code(cfg, results):
    if cfg.command in ("alpha-table", "counterexample"):
        return 0
    if cfg.command == "selftest":
        return 2 if not all(r.passed for r in results) else 0
    if cfg.command == "maxentry":
        return 2 if any(r.estimate.mean - cfg.z * r.estimate.stderr > r.bound for r in results) else 0
    return 2 if any(r.verdict.status == VIOLATED for r in results) else 0


def dispatch(cfg):
    """Run a parsed configuration, emit its report and return the exit code."""
    try:
        results = _run(cfg)
        context = {"n": cfg.n, "k": cfg.k, "seed": cfg.seed, "samples": cfg.samples}
        emit_report(results, cfg.format, cfg.output, context)
    except UsageError as exc:
        print(f"stiefel-compare: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, DimensionError) as exc:
        print(f"stiefel-compare: error: {exc}", file=sys.stderr)
        return 1
    return _exit_code(cfg, results)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"stiefel-compare: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
