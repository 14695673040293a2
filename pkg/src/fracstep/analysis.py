"""Error norms, observed orders, coefficient sign census and study reports."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Callable, Sequence

import numpy as np

from fracstep.mesh import TemporalMesh
from fracstep.tfde import ProblemSpec, SolutionField, solve
from fracstep.weights import assemble_row

ZERO_THRESHOLD = 1.0e-14
AXES = ("temporal", "spatial")


def max_nodal_error(
    field: SolutionField, exact: Callable | None, all_times: bool = False
) -> float:
    """Max interior error at the final time (or over all levels if ``all_times``)."""
    if exact is None:
        raise ValueError("error measurement needs an exact solution")
    x = field.smesh.interior
    if not all_times:
        u = np.asarray(exact(x, field.tmesh.nodes[-1]), dtype=np.float64)
        return float(np.max(np.abs(u - field.values[-1, 1:-1])))
    worst = 0.0
    for n, tn in enumerate(field.tmesh.nodes):
        u = np.asarray(exact(x, tn), dtype=np.float64)
        worst = max(worst, float(np.max(np.abs(u - field.values[n, 1:-1]))))
    return worst


def observed_order(E_coarse: float, E_fine: float) -> float:
    """``log2(E_coarse / E_fine)`` for a halving of the step."""
    if not (E_coarse > 0 and E_fine > 0):
        raise ValueError(f"errors must be positive, got {E_coarse!r} and {E_fine!r}")
    return math.log2(E_coarse / E_fine)


def check_doubling(levels: Sequence[int]) -> list[int]:
    levels = [int(k) for k in levels]
    if not levels:
        raise ValueError("need at least one refinement level")
    for coarse, fine in zip(levels, levels[1:]):
        if fine != 2 * coarse:
            raise ValueError(f"levels must form a doubling sequence, got {levels}")
    return levels


# {{{ sign census


@dataclass(frozen=True)
class CensusRow:
    n: int
    positive: int
    negative: int
    zero: int


@dataclass(frozen=True)
class SignCensus:
    N: int
    alpha: float
    r: float
    rows: tuple[CensusRow, ...]
    notes: tuple[str, ...] = ()

    def counts(self) -> dict[int, tuple[int, int]]:
        return {row.n: (row.positive, row.negative) for row in self.rows}


def sign_census(
    mesh: TemporalMesh,
    alpha: float,
    levels: Sequence[int],
    method: str = "closed",
    zero_threshold: float = ZERO_THRESHOLD,
) -> SignCensus:
    """Count positive, negative and (near-)zero ``p_j`` in each requested row.

    A coefficient counts as zero when ``|p_j| <= zero_threshold * max|p_j|``.
    The default evaluates the closed-form weights in double precision; on
    strongly graded meshes the signs of the smallest coefficients are then
    roundoff, and ``method="stable"`` gives the true signs.
    """
    rows = []
    notes = []
    for n in levels:
        if not 1 <= n <= mesh.K_t:
            raise ValueError(f"census level {n} outside 1..{mesh.K_t}")
        p = assemble_row(mesh, alpha, n, method=method).p
        tol = zero_threshold * np.max(np.abs(p))
        zero = int(np.sum(np.abs(p) <= tol))
        pos = int(np.sum(p > tol))
        neg = int(np.sum(p < -tol))
        if zero:
            notes.append(f"level {n}: {zero} coefficient(s) at the zero threshold")
        rows.append(CensusRow(n, pos, neg, zero))
    return SignCensus(mesh.K_t, float(alpha), mesh.r, tuple(rows), tuple(notes))


def census_text(census: SignCensus) -> str:
    lines = [
        f"Coefficient signs, N = {census.N}, alpha = {census.alpha:g}, r = {census.r:g}",
        f"{'n':>4}  {'+ve':>5}  {'-ve':>5}  {'zero':>5}",
    ]
    for row in census.rows:
        lines.append(f"{row.n:>4}  {row.positive:>5}  {row.negative:>5}  {row.zero:>5}")
    lines.extend(f"note: {note}" for note in census.notes)
    return "\n".join(lines) + "\n"


def write_census_csv(census: SignCensus, path: str | PathLike[str]) -> None:
    with open(path, "w", newline="") as outf:
        writer = csv.writer(outf)
        writer.writerow(["N", "alpha", "r", "n", "n_pos", "n_neg", "n_zero"])
        for row in census.rows:
            writer.writerow(
                [census.N, f"{census.alpha:.17g}", f"{census.r:.17g}", row.n,
                 row.positive, row.negative, row.zero]
            )


# }}}


# {{{ convergence studies


@dataclass(frozen=True)
class ConvergenceRow:
    K: int
    error: float
    order: float | None


@dataclass(frozen=True)
class ConvergenceReport:
    """Errors over a doubling sequence of ``K`` along one axis.

    ``fixed_K`` is the resolution held fixed on the other axis.
    """

    axis: str
    alpha: float
    r: float
    rho: float
    fixed_K: int
    rows: tuple[ConvergenceRow, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        check_doubling([row.K for row in self.rows])

    @property
    def errors(self) -> np.ndarray:
        return np.array([row.error for row in self.rows])

    @property
    def orders(self) -> list[float]:
        return [row.order for row in self.rows[1:]]

    @classmethod
    def from_errors(cls, axis, alpha, r, rho, fixed_K, levels, errors) -> ConvergenceReport:
        rows = []
        for i, (K, err) in enumerate(zip(levels, errors)):
            order = observed_order(errors[i - 1], err) if i else None
            rows.append(ConvergenceRow(int(K), float(err), order))
        return cls(axis, float(alpha), float(r), float(rho), int(fixed_K), tuple(rows))


def _study_errors(spec, pairs, r, method) -> list[float]:
    return [max_nodal_error(solve(spec, K_t, K_x, r, method=method), spec.exact) for K_t, K_x in pairs]


def temporal_study(
    spec: ProblemSpec,
    K_t_levels: Sequence[int],
    K_x: int,
    r: float = 1.0,
    method: str = "stable",
) -> ConvergenceReport:
    """Final-time errors for a doubling sequence of ``K_t`` at fixed ``K_x``."""
    levels = check_doubling(K_t_levels)
    errors = _study_errors(spec, [(K, K_x) for K in levels], r, method)
    return ConvergenceReport.from_errors("temporal", spec.alpha, r, spec.rho, K_x, levels, errors)


def spatial_study(
    spec: ProblemSpec,
    K_x_levels: Sequence[int],
    K_t: int,
    r: float = 1.0,
    method: str = "stable",
) -> ConvergenceReport:
    """Final-time errors for a doubling sequence of ``K_x`` at fixed ``K_t``."""
    levels = check_doubling(K_x_levels)
    errors = _study_errors(spec, [(K_t, K) for K in levels], r, method)
    return ConvergenceReport.from_errors("spatial", spec.alpha, r, spec.rho, K_t, levels, errors)


def format_sci(x: float) -> str:
    return f"{x:.4e}"


def report_text(report: ConvergenceReport, title: str | None = None) -> str:
    """Aligned table with ``K``, ``E_inf`` and order columns."""
    K_name, rate_name = ("K_t", "T_rate") if report.axis == "temporal" else ("K_x", "S_rate")
    fixed_name = "K_x" if report.axis == "temporal" else "K_t"
    head = title or f"{report.axis.capitalize()} errors"
    lines = [
        f"{head}: alpha = {report.alpha:g}, r = {report.r:g}, rho = {report.rho:g}, "
        f"{fixed_name} = {report.fixed_K}",
        f"{K_name:>6}  {'E_inf':>11}  {rate_name:>7}",
    ]
    for row in report.rows:
        order = "" if row.order is None else f"{row.order:.4f}"
        lines.append(f"{row.K:>6}  {format_sci(row.error):>11}  {order:>7}")
    return "\n".join(lines) + "\n"


def write_report_csv(reports: Sequence[ConvergenceReport], path: str | PathLike[str]) -> None:
    with open(path, "w", newline="") as outf:
        writer = csv.writer(outf)
        writer.writerow(["axis", "alpha", "r", "rho", "K", "E_inf", "order"])
        for rep in reports:
            for row in rep.rows:
                order = "" if row.order is None else f"{row.order:.17g}"
                writer.writerow(
                    [rep.axis, f"{rep.alpha:.17g}", f"{rep.r:.17g}", f"{rep.rho:.17g}",
                     row.K, f"{row.error:.17g}", order]
                )


def write_plot_data(report: ConvergenceReport, path: str | PathLike[str]) -> None:
    """Two whitespace-separated columns ``log2 K`` and ``log2 E_inf``."""
    with open(path, "w") as outf:
        outf.write("# log2_K log2_E_inf\n")
        for row in report.rows:
            outf.write(f"{math.log2(row.K):.17g} {math.log2(row.error):.17g}\n")


# }}}
