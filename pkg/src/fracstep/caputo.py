"""Discrete Caputo operator on sampled histories and monomial oracles."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from os import PathLike

import numpy as np

from fracstep.mesh import TemporalMesh, build_temporal_mesh
from fracstep.weights import CaputoWeightRow, assemble_row, check_alpha


@dataclass(frozen=True)
class TimeHistory:
    """Samples ``u^0, ..., u^m`` of a scalar function at the first mesh nodes."""

    mesh: TemporalMesh
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or not 1 <= values.size <= self.mesh.K_t + 1:
            raise ValueError(
                f"history must hold between 1 and {self.mesh.K_t + 1} samples, "
                f"got shape {values.shape}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(cls, mesh: TemporalMesh, func) -> TimeHistory:
        return cls(mesh, np.asarray(func(mesh.nodes), dtype=np.float64))


@dataclass(frozen=True)
class MonomialOracle:
    """Exact Caputo derivative of ``t^beta``: ``Gamma(beta+1)/Gamma(beta+1-alpha) t^{beta-alpha}``."""

    beta: float
    alpha: float

    def __post_init__(self) -> None:
        check_alpha(self.alpha)
        if not self.beta > 0:
            raise ValueError(f"monomial exponent must be positive, got beta={self.beta}")

    @property
    def coefficient(self) -> float:
        return math.gamma(self.beta + 1) / math.gamma(self.beta + 1 - self.alpha)

    def __call__(self, t):
        return self.coefficient * np.asarray(t, dtype=np.float64) ** (self.beta - self.alpha)


def apply_discrete_caputo(
    history: TimeHistory,
    alpha: float,
    n: int,
    row: CaputoWeightRow | None = None,
    method: str = "stable",
) -> float:
    """Evaluate ``1/Gamma(2-alpha) sum_j p_j u^{n-j}`` at level ``n``.

    ``history`` must contain exactly ``n + 1`` samples. A precomputed ``row``
    can be passed to avoid reassembling it.
    """
    alpha = check_alpha(alpha)
    if n < 1:
        raise ValueError(f"time level must be at least 1, got {n}")
    u = history.values
    if u.size != n + 1:
        raise ValueError(f"level {n} needs {n + 1} history samples, got {u.size}")

    if row is None:
        row = assemble_row(history.mesh, alpha, n, method=method)
    elif row.n != n:
        raise ValueError(f"weight row is for level {row.n}, not {n}")

    return float(np.sum(row.p * u[::-1])) / math.gamma(2.0 - alpha)


def discrete_caputo_all_levels(
    mesh: TemporalMesh, u: np.ndarray, alpha: float, method: str = "stable"
) -> np.ndarray:
    """Discrete Caputo derivative at every level ``1..K_t`` (entry 0 is ``nan``)."""
    out = np.full(mesh.K_t + 1, np.nan)
    for n in range(1, mesh.K_t + 1):
        out[n] = apply_discrete_caputo(TimeHistory(mesh, u[: n + 1]), alpha, n, method=method)
    return out


@dataclass(frozen=True)
class TruncationRow:
    K_t: int
    final_error: float
    max_error: float
    final_order: float | None
    max_order: float | None


def truncation_order_study(
    beta: float,
    alpha: float,
    r: float,
    levels,
    T: float = 1.0,
    method: str = "stable",
) -> list[TruncationRow]:
    """Truncation error of the discrete operator applied to ``t^beta``.

    Errors are measured against :class:`MonomialOracle` at the final node and
    as the maximum over levels ``n >= 3``. Orders are ``log2`` ratios between
    successive entries of ``levels``, which must double.
    """
    levels = [int(k) for k in levels]
    for coarse, fine in zip(levels, levels[1:]):
        if fine != 2 * coarse:
            raise ValueError(f"levels must form a doubling sequence, got {levels}")

    oracle = MonomialOracle(beta, alpha)
    rows: list[TruncationRow] = []
    for K_t in levels:
        mesh = build_temporal_mesh(T, K_t, r)
        u = mesh.nodes**beta
        approx = discrete_caputo_all_levels(mesh, u, alpha, method=method)
        err = np.abs(approx[3:] - oracle(mesh.nodes[3:]))
        final_error, max_error = float(err[-1]), float(err.max())

        if rows:
            prev = rows[-1]
            final_order = math.log2(prev.final_error / final_error)
            max_order = math.log2(prev.max_error / max_error)
        else:
            final_order = max_order = None

        rows.append(TruncationRow(K_t, final_error, max_error, final_order, max_order))

    return rows


def write_truncation_csv(
    rows: list[TruncationRow], r: float, alpha: float, path: str | PathLike[str]
) -> None:
    """Write the max-over-levels errors and orders, one row per ``K_t``."""
    with open(path, "w", newline="") as outf:
        writer = csv.writer(outf)
        writer.writerow(["K_t", "r", "alpha", "error", "order"])
        for row in rows:
            order = "" if row.max_order is None else f"{row.max_order:.17g}"
            writer.writerow([row.K_t, f"{r:.17g}", f"{alpha:.17g}", f"{row.max_error:.17g}", order])
