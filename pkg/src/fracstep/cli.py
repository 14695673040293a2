"""Command-line front end.

Each run writes ``report.txt`` and ``report.csv`` (plus ``field.csv`` for
``solve --emit-field``) into ``<out>/<run-name>/``. The default run name is a
digest of the resolved configuration, so identical configs map to the same
directory and byte-identical files.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from fracstep import analysis, caputo
from fracstep.analysis import ConvergenceReport, check_doubling, format_sci
from fracstep.mesh import build_temporal_mesh
from fracstep.problems import get_problem, with_overrides
from fracstep.tfde import SolverError, solve, write_field_csv
from fracstep.weights import METHODS, check_alpha

COMMANDS = ("solve", "study-time", "study-space", "study-truncation", "census")
THREADS_ENV = "FRACSTEP_THREADS"

_DEFAULTS = {
    "problem": "ex1-smooth",
    "alpha": 0.5,
    "r": 1.0,
    "rho": 1.0,
    "beta": 4.0,
    "out": "runs",
    "method": None,
    "emit_field": False,
    "zero_source": False,
    "zero_initial": False,
}
_LIST_KEYS = ("Kt", "Kx", "levels")
_BOOL_KEYS = ("emit_field", "zero_source", "zero_initial")
_FLOAT_KEYS = ("alpha", "r", "rho", "beta")


@dataclass(frozen=True)
class RunConfig:
    command: str
    problem: str
    alpha: float
    r: float
    rho: float
    beta: float
    Kt: tuple[int, ...]
    Kx: tuple[int, ...]
    levels: tuple[int, ...]
    out: str
    method: str | None
    emit_field: bool
    zero_source: bool
    zero_initial: bool
    run_name: str | None = None

    def digest(self) -> str:
        data = asdict(self)
        data.pop("out")
        data.pop("run_name")
        blob = json.dumps(data, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:10]

    @property
    def directory(self) -> Path:
        name = self.run_name or f"{self.command}-{self.digest()}"
        return Path(self.out) / name


class ConfigError(ValueError):
    pass


# {{{ parsing


def _int_list(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    try:
        return tuple(int(v) for v in str(text).replace(" ", "").split(",") if v)
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of integers, got {text!r}") from None


def _as_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def read_config_file(path: str | os.PathLike[str]) -> dict[str, str]:
    """Read ``key = value`` lines; a leading section header is optional."""
    text = Path(path).read_text()
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        parser.read_string(text if text.lstrip().startswith("[") else "[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from None
    values: dict[str, str] = dict(parser.defaults())
    for section in parser.sections():
        values.update(parser[section])
    return {key.replace("-", "_"): value for key, value in values.items()}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracstep",
        description="High-order graded-mesh solver for time-fractional diffusion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, problem=True, lists=("Kt", "Kx")):
        p.add_argument("--config", help="key = value file; command-line flags take precedence")
        p.add_argument("--out", help="output directory (default: runs)")
        p.add_argument("--run-name", dest="run_name", help="subdirectory name (default: config digest)")
        p.add_argument("--alpha", type=float, help="fractional order in (0, 1)")
        p.add_argument("--r", type=float, help="temporal grading exponent, r >= 1")
        p.add_argument(
            "--method", choices=METHODS,
            help="weight evaluation route (default: closed for census, stable otherwise)",
        )
        if problem:
            p.add_argument("--problem", help="ex1-smooth, ex2-singular or monomial:<beta>:<mode>")
            p.add_argument("--rho", type=float, help="diffusion coefficient")
        for key in lists:
            p.add_argument(f"--{key}", help=f"{key} value or comma-separated doubling list")

    p = sub.add_parser("solve", help="single solve, optionally dumping the field")
    common(p)
    p.add_argument("--emit-field", dest="emit_field", action="store_const", const=True)
    p.add_argument("--zero-source", dest="zero_source", action="store_const", const=True)
    p.add_argument("--zero-initial", dest="zero_initial", action="store_const", const=True)

    common(sub.add_parser("study-time", help="temporal convergence study"))
    common(sub.add_parser("study-space", help="spatial convergence study"))

    p = sub.add_parser("study-truncation", help="truncation order of the discrete operator on t^beta")
    common(p, problem=False, lists=("Kt",))
    p.add_argument("--beta", type=float, help="monomial exponent")

    p = sub.add_parser("census", help="sign census of the weight rows")
    common(p, problem=False, lists=("Kt", "levels"))
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file and flags (in increasing precedence)."""
    merged: dict = dict(_DEFAULTS)
    if getattr(args, "config", None):
        merged.update(read_config_file(args.config))
    for key, value in vars(args).items():
        if key != "config" and value is not None:
            merged[key] = value

    try:
        for key in _FLOAT_KEYS:
            merged[key] = float(merged[key])
        for key in _BOOL_KEYS:
            merged[key] = _as_bool(merged[key])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    for key in _LIST_KEYS:
        merged[key] = _int_list(merged.get(key, ""))
    if merged["method"] is None:
        # the census inspects the closed-form coefficients, everything else solves
        merged["method"] = "closed" if merged["command"] == "census" else "stable"

    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(merged) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    cfg = RunConfig(**merged)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    check_alpha(cfg.alpha)
    if not cfg.r >= 1:
        raise ConfigError(f"grading exponent must satisfy r >= 1, got {cfg.r}")
    if cfg.method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}, got {cfg.method!r}")

    def single(key):
        values = getattr(cfg, key)
        if len(values) != 1:
            raise ConfigError(f"{cfg.command} needs a single --{key} value, got {list(values)}")

    def study(key):
        values = getattr(cfg, key)
        if not values:
            raise ConfigError(f"{cfg.command} needs --{key}")
        check_doubling(values)

    if cfg.command == "solve":
        single("Kt")
        single("Kx")
    elif cfg.command == "study-time":
        study("Kt")
        single("Kx")
    elif cfg.command == "study-space":
        single("Kt")
        study("Kx")
    elif cfg.command == "study-truncation":
        study("Kt")
    elif cfg.command == "census":
        single("Kt")
        if not cfg.levels:
            raise ConfigError("census needs --levels")

    if cfg.command in ("solve", "study-time", "study-space"):
        # fails early on unknown names and inconsistent parameters
        get_problem(cfg.problem, cfg.alpha, cfg.rho)


# }}}


# {{{ commands


def _thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def _study_point(job: tuple) -> float:
    # runs in worker processes; problems are rebuilt by name since closures do not pickle
    name, alpha, rho, K_t, K_x, r, method = job
    spec = get_problem(name, alpha, rho).spec
    return analysis.max_nodal_error(solve(spec, K_t, K_x, r, method=method), spec.exact)


def _run_jobs(jobs: list[tuple]) -> list[float]:
    workers = min(_thread_cap(), len(jobs))
    if workers <= 1:
        return [_study_point(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_study_point, jobs))


def _header(cfg: RunConfig) -> str:
    return f"# fracstep {cfg.command}, method = {cfg.method}\n"


def _cmd_study(cfg: RunConfig, axis: str) -> tuple[str, callable]:
    if axis == "temporal":
        levels, fixed = list(cfg.Kt), cfg.Kx[0]
        jobs = [(cfg.problem, cfg.alpha, cfg.rho, K, fixed, cfg.r, cfg.method) for K in levels]
    else:
        levels, fixed = list(cfg.Kx), cfg.Kt[0]
        jobs = [(cfg.problem, cfg.alpha, cfg.rho, fixed, K, cfg.r, cfg.method) for K in levels]
    errors = _run_jobs(jobs)
    report = ConvergenceReport.from_errors(axis, cfg.alpha, cfg.r, cfg.rho, fixed, levels, errors)
    text = _header(cfg) + analysis.report_text(report, title=f"{cfg.problem} {axis} errors")
    return text, lambda path: analysis.write_report_csv([report], path)


def _cmd_truncation(cfg: RunConfig):
    rows = caputo.truncation_order_study(cfg.beta, cfg.alpha, cfg.r, cfg.Kt, method=cfg.method)
    lines = [
        f"Truncation error of the discrete operator on t^{cfg.beta:g}: "
        f"alpha = {cfg.alpha:g}, r = {cfg.r:g}",
        f"{'K_t':>6}  {'max err':>11}  {'order':>7}  {'final err':>11}  {'order':>7}",
    ]
    for row in rows:
        mo = "" if row.max_order is None else f"{row.max_order:.4f}"
        fo = "" if row.final_order is None else f"{row.final_order:.4f}"
        lines.append(
            f"{row.K_t:>6}  {format_sci(row.max_error):>11}  {mo:>7}  "
            f"{format_sci(row.final_error):>11}  {fo:>7}"
        )
    text = _header(cfg) + "\n".join(lines) + "\n"
    return text, lambda path: caputo.write_truncation_csv(rows, cfg.r, cfg.alpha, path)


def _cmd_census(cfg: RunConfig):
    mesh = build_temporal_mesh(1.0, cfg.Kt[0], cfg.r)
    census = analysis.sign_census(mesh, cfg.alpha, cfg.levels, method=cfg.method)
    return _header(cfg) + analysis.census_text(census), lambda path: analysis.write_census_csv(census, path)


def _cmd_solve(cfg: RunConfig, directory: Path):
    problem = get_problem(cfg.problem, cfg.alpha, cfg.rho)
    spec = with_overrides(problem.spec, cfg.zero_source, cfg.zero_initial)
    K_t, K_x = cfg.Kt[0], cfg.Kx[0]
    field = solve(spec, K_t, K_x, cfg.r, method=cfg.method)
    error = analysis.max_nodal_error(field, spec.exact) if spec.exact is not None else None
    peak = float(abs(field.values).max())

    lines = [
        f"Solve {cfg.problem}: alpha = {cfg.alpha:g}, r = {cfg.r:g}, rho = {cfg.rho:g}, "
        f"K_t = {K_t}, K_x = {K_x}",
        f"zero source: {cfg.zero_source}, zero initial data: {cfg.zero_initial}",
        f"max |u|: {format_sci(peak)}",
        f"E_inf:   {'n/a' if error is None else format_sci(error)}",
    ]

    def write_csv(path):
        with open(path, "w", newline="") as outf:
            writer = csv.writer(outf)
            writer.writerow(["K_t", "K_x", "alpha", "r", "rho", "max_abs_u", "E_inf"])
            writer.writerow([K_t, K_x, f"{cfg.alpha:.17g}", f"{cfg.r:.17g}", f"{cfg.rho:.17g}",
                             f"{peak:.17g}", "" if error is None else f"{error:.17g}"])

    if cfg.emit_field:
        write_field_csv(field, directory / "field.csv")
    return _header(cfg) + "\n".join(lines) + "\n", write_csv


def run(cfg: RunConfig, stdout=None) -> Path:
    """Execute a resolved configuration and return the run directory."""
    stdout = stdout or sys.stdout
    directory = cfg.directory
    directory.mkdir(parents=True, exist_ok=True)

    if cfg.command == "solve":
        text, write_csv = _cmd_solve(cfg, directory)
    elif cfg.command == "study-time":
        text, write_csv = _cmd_study(cfg, "temporal")
    elif cfg.command == "study-space":
        text, write_csv = _cmd_study(cfg, "spatial")
    elif cfg.command == "study-truncation":
        text, write_csv = _cmd_truncation(cfg)
    else:
        text, write_csv = _cmd_census(cfg)

    (directory / "report.txt").write_text(text)
    write_csv(directory / "report.csv")
    stdout.write(text)
    stdout.write(f"# written to {directory}\n")
    return directory


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        run(cfg)
    except SolverError as exc:
        print(f"fracstep: solver failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"fracstep: error: {exc}", file=sys.stderr)
        return 2
    return 0


# }}}


if __name__ == "__main__":
    sys.exit(main())
