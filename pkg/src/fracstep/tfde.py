"""Finite-difference scheme for the 1-D time-fractional diffusion equation.

Solves ``D_t^alpha u - rho u_xx = f`` on ``(0, L) x (0, T]`` with homogeneous
Dirichlet data and ``u(x, 0) = phi(x)``. Time is discretized with the weight
rows of :mod:`fracstep.weights`, space with second-order central differences,
and each level costs one tridiagonal solve.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from os import PathLike
from typing import Callable

import numpy as np

from fracstep.mesh import SpatialMesh, TemporalMesh, build_spatial_mesh, build_temporal_mesh
from fracstep.weights import CaputoWeightRow, assemble_row, check_alpha

# relative pivot floor used by the Thomas elimination
PIVOT_TOL = 1.0e-14


class SolverError(RuntimeError):
    """Raised when a tridiagonal solve breaks down; ``level`` is the time level (or None)."""

    def __init__(self, message: str, level: int | None = None):
        if level is not None:
            message = f"time level {level}: {message}"
        super().__init__(message)
        self.level = level


@dataclass(frozen=True)
class ProblemSpec:
    """Data of one initial-boundary value problem.

    ``source(x, t)`` and ``initial(x)`` must accept numpy arrays of positions.
    ``exact(x, t)`` is optional and only used for error measurement.
    """

    alpha: float
    rho: float
    L: float
    T: float
    source: Callable
    initial: Callable
    exact: Callable | None = None

    def __post_init__(self) -> None:
        check_alpha(self.alpha)
        if not self.rho > 0:
            raise ValueError(f"diffusion coefficient must be positive, got rho={self.rho}")
        if not self.L > 0:
            raise ValueError(f"domain length must be positive, got L={self.L}")
        if not self.T > 0:
            raise ValueError(f"time horizon must be positive, got T={self.T}")
        ends = np.asarray(self.initial(np.array([0.0, self.L])), dtype=np.float64)
        if np.any(np.abs(ends) > 1e-12):
            raise ValueError(
                f"initial data must vanish at both ends for compatibility, got {ends.tolist()}"
            )


@dataclass(frozen=True)
class TridiagonalSystem:
    """Band storage of ``lower[i] x[i] + diagonal[i+1] x[i+1] + upper[i+1] x[i+2]``.

    ``lower`` and ``upper`` have one entry fewer than ``diagonal``.
    """

    lower: np.ndarray
    diagonal: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def __post_init__(self) -> None:
        m = len(self.diagonal)
        if m < 1 or len(self.rhs) != m:
            raise ValueError(f"diagonal and rhs must share a positive length, got {m} and {len(self.rhs)}")
        if len(self.lower) != m - 1 or len(self.upper) != m - 1:
            raise ValueError(
                f"off-diagonals must have length {m - 1}, got {len(self.lower)} and {len(self.upper)}"
            )

    @property
    def size(self) -> int:
        return len(self.diagonal)

    def off_diagonal_row_sums(self) -> np.ndarray:
        sums = np.zeros(self.size)
        sums[1:] += np.abs(self.lower)
        sums[:-1] += np.abs(self.upper)
        return sums

    def is_diagonally_dominant(self) -> bool:
        return bool(np.all(np.abs(self.diagonal) > self.off_diagonal_row_sums()))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        y = self.diagonal * x
        y[1:] += self.lower * x[:-1]
        y[:-1] += self.upper * x[1:]
        return y

    def dense(self) -> np.ndarray:
        m = self.size
        A = np.diag(np.asarray(self.diagonal, dtype=np.float64))
        idx = np.arange(m - 1)
        A[idx + 1, idx] = self.lower
        A[idx, idx + 1] = self.upper
        return A


@dataclass(frozen=True)
class SolutionField:
    """Nodal values ``values[n, i] = u_i^n`` including boundary columns."""

    tmesh: TemporalMesh
    smesh: SpatialMesh
    values: np.ndarray

    def __post_init__(self) -> None:
        expected = (self.tmesh.K_t + 1, self.smesh.K_x + 1)
        if self.values.shape != expected:
            raise ValueError(f"field must have shape {expected}, got {self.values.shape}")

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]


def thomas_solve(system: TridiagonalSystem, level: int | None = None) -> np.ndarray:
    """Solve a tridiagonal system by forward elimination and back substitution.

    No pivoting is done; valid systems are strictly diagonally dominant. A
    pivot smaller than ``PIVOT_TOL * max|diagonal|`` raises :class:`SolverError`.
    """
    # plain Python floats are markedly faster than numpy scalars in this loop
    lo = np.asarray(system.lower, dtype=np.float64).tolist()
    di = np.asarray(system.diagonal, dtype=np.float64).tolist()
    up = np.asarray(system.upper, dtype=np.float64).tolist()
    b = np.asarray(system.rhs, dtype=np.float64).tolist()
    m = len(di)
    floor = PIVOT_TOL * max(abs(v) for v in di)

    cp = [0.0] * m
    dp = [0.0] * m
    piv = di[0]
    if not abs(piv) > floor:
        raise SolverError(f"pivot {piv!r} at row 0 below tolerance {floor!r}", level)
    cp[0] = up[0] / piv if m > 1 else 0.0
    dp[0] = b[0] / piv
    for i in range(1, m):
        piv = di[i] - lo[i - 1] * cp[i - 1]
        if not abs(piv) > floor:
            raise SolverError(f"pivot {piv!r} at row {i} below tolerance {floor!r}", level)
        if i < m - 1:
            cp[i] = up[i] / piv
        dp[i] = (b[i] - lo[i - 1] * dp[i - 1]) / piv

    x = dp
    for i in range(m - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.array(x, dtype=np.float64)


def _history_sum(history: np.ndarray, row: CaputoWeightRow, n: int) -> np.ndarray:
    # history[:, m] holds level m; sum_{k=1}^n p_k u^{n-k} = sum_{m<n} p_{n-m} u^m.
    # The reduction runs along the contiguous axis so numpy sums pairwise.
    return np.sum(history[:, :n] * row.p[n:0:-1], axis=1)


def assemble_step(
    spec: ProblemSpec,
    tmesh: TemporalMesh,
    smesh: SpatialMesh,
    history: np.ndarray,
    row: CaputoWeightRow,
    n: int,
) -> TridiagonalSystem:
    """Tridiagonal system for level ``n`` on the interior nodes.

    ``history`` is indexed ``[i, m]`` (space, time) and must hold levels
    ``0..n-1`` in its first ``n`` columns; boundary rows may be included.
    """
    if not 1 <= n <= tmesh.K_t:
        raise ValueError(f"time level must lie in 1..{tmesh.K_t}, got {n}")
    if row.n != n:
        raise ValueError(f"weight row is for level {row.n}, not {n}")
    if history.shape[0] == smesh.K_x + 1:
        history = history[1:-1]
    if history.shape[0] != smesh.K_x - 1 or history.shape[1] < n:
        raise ValueError(f"history of shape {history.shape} cannot serve level {n}")

    m = smesh.K_x - 1
    mu = smesh.h**2 / math.gamma(2.0 - spec.alpha)
    rho = spec.rho
    x = smesh.interior
    f = np.asarray(spec.source(x, tmesh.nodes[n]), dtype=np.float64) * np.ones(m)

    rhs = -mu * _history_sum(history, row, n) + smesh.h**2 * f
    system = TridiagonalSystem(
        lower=np.full(m - 1, -rho),
        diagonal=np.full(m, mu * row.p[0] + 2.0 * rho),
        upper=np.full(m - 1, -rho),
        rhs=rhs,
    )
    if not system.is_diagonally_dominant():
        raise SolverError(f"system lost diagonal dominance (mu*p0 = {mu * row.p[0]!r})", n)
    return system


def solve(
    spec: ProblemSpec, K_t: int, K_x: int, r: float = 1.0, method: str = "stable"
) -> SolutionField:
    """March the scheme over levels ``1..K_t`` and return the full field."""
    tmesh = build_temporal_mesh(spec.T, K_t, r)
    smesh = build_spatial_mesh(spec.L, K_x)

    # interior history, stored space-major so each level's convolution is contiguous
    history = np.zeros((K_x - 1, K_t + 1))
    history[:, 0] = spec.initial(smesh.interior)
    for n in range(1, K_t + 1):
        row = assemble_row(tmesh, spec.alpha, n, method=method)
        system = assemble_step(spec, tmesh, smesh, history, row, n)
        history[:, n] = thomas_solve(system, level=n)

    values = np.zeros((K_t + 1, K_x + 1))
    values[:, 1:-1] = history.T
    values[0] = spec.initial(smesh.nodes)
    values[0, [0, -1]] = 0.0
    return SolutionField(tmesh, smesh, values)


def write_field_csv(field: SolutionField, path: str | PathLike[str]) -> None:
    """Write the field as rows ``(n, i, t, x, u)``."""
    t = field.tmesh.nodes
    x = field.smesh.nodes
    with open(path, "w", newline="") as outf:
        writer = csv.writer(outf)
        writer.writerow(["n", "i", "t", "x", "u"])
        for n in range(field.values.shape[0]):
            tn = f"{t[n]:.17g}"
            for i in range(field.values.shape[1]):
                writer.writerow([n, i, tn, f"{x[i]:.17g}", f"{field.values[n, i]:.17g}"])
