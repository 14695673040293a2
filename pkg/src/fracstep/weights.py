"""Interpolation weights of the discrete Caputo operator on nonuniform meshes.

On ``[t_0, t_1]`` the history is replaced by its linear interpolant, on
``[t_1, t_2]`` by the quadratic through ``t_0, t_1, t_2`` and on every later
``[t_{k-1}, t_k]`` by the cubic through ``t_{k-3}, ..., t_k``.  Integrating the
interpolant's derivative against ``(t_n - s)^{-alpha}`` gives

    D^alpha u(t_n) ~ 1 / Gamma(2 - alpha) * sum_j p_j u^{n-j}

and this module computes the row ``p_0, ..., p_n`` (without the Gamma factor).

Two evaluation routes are provided:

``"closed"``
    The closed-form power-difference expressions ``a_n``, ``b_n, c_n, d_n``
    and ``w^n_{1..4,k}`` evaluated directly in double precision. They lose
    roughly ``log10((t_n / tau_k)^3)`` digits, which is harmless on uniform
    meshes but destroys the early cubic weights on strongly graded ones.
``"stable"``
    The same integrals computed from kernel moments: a binomial series in
    ``tau_k / (t_n - t_{k-1})`` away from ``t_n`` and exact moments next to it.
    Every interval weight keeps full relative accuracy. This is the default.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from os import PathLike

import numpy as np

from fracstep.mesh import TemporalMesh, build_temporal_mesh

METHODS = ("stable", "closed")

# intervals with tau_k / (t_n - t_{k-1}) at or below this use the series
_FAR_FIELD_RATIO = 0.5
_SERIES_TOL = 1.0e-18
_MAX_SERIES_TERMS = 80


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (1.0e-10 < alpha < 1.0 - 1.0e-10):
        raise ValueError(f"fractional order must lie in (0, 1), got alpha={alpha}")
    return alpha


def _check_method(method: str) -> str:
    if method not in METHODS:
        raise ValueError(f"unknown weight method {method!r}, expected one of {METHODS}")
    return method


def _check_level(mesh: TemporalMesh, n: int, lowest: int = 1) -> int:
    if int(n) != n or not lowest <= n <= mesh.K_t:
        raise ValueError(f"time level must satisfy {lowest} <= n <= {mesh.K_t}, got {n}")
    return int(n)


# {{{ closed-form expressions


def _pow(x: np.ndarray | float, e: float) -> np.ndarray:
    """``x**e`` with an exact zero at ``x == 0`` (the ``k == n`` endpoint)."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    mask = x > 0
    out[mask] = x[mask] ** e
    return out


def _closed_first(mesh: TemporalMesh, alpha: float, n: int) -> float:
    t = mesh.nodes
    tau1 = mesh.step(1)
    e = 1.0 - alpha
    return float((_pow(t[n] - t[0], e) - _pow(t[n] - t[1], e)) / tau1)


def _closed_second(mesh: TemporalMesh, alpha: float, n: int) -> tuple[float, float, float]:
    t = mesh.nodes
    t1, t2 = mesh.step(1), mesh.step(2)
    x1 = t[n] - t[1]
    x2 = 0.0 if n == 2 else t[n] - t[2]

    p1a, p2a = float(_pow(x1, 1 - alpha)), float(_pow(x2, 1 - alpha))
    s = 2.0 / (2.0 - alpha) * float(_pow(x1, 2 - alpha) - _pow(x2, 2 - alpha))

    b = (s - t2 * (p1a + p2a)) / (t1 * (t1 + t2))
    c = -(s + (t1 - t2) * p1a - (t1 + t2) * p2a) / (t1 * t2)
    d = (s + t1 * p1a - (2 * t2 + t1) * p2a) / (t2 * (t1 + t2))
    return b, c, d


def _closed_cubic(mesh: TemporalMesh, alpha: float, n: int) -> np.ndarray:
    """Rows ``(w1, w2, w3, w4)`` for ``k = 3, ..., n``."""
    t = mesh.nodes
    k = np.arange(3, n + 1)
    tk = mesh.steps[k - 1]
    tk1 = mesh.steps[k - 2]
    tk2 = mesh.steps[k - 3]

    y1 = t[n] - t[k - 1]
    y0 = t[n] - t[k]
    y0[-1] = 0.0

    e1_1, e1_0 = _pow(y1, 1 - alpha), _pow(y0, 1 - alpha)
    e2_1, e2_0 = _pow(y1, 2 - alpha), _pow(y0, 2 - alpha)
    c2 = 2.0 / (2.0 - alpha)
    c3 = 6.0 / ((2.0 - alpha) * (3.0 - alpha)) * (_pow(y1, 3 - alpha) - _pow(y0, 3 - alpha))

    s3 = tk + tk1 + tk2
    A1 = 1.0 / (tk * (tk + tk1) * s3)
    A2 = 1.0 / (tk * tk1 * (tk1 + tk2))
    A3 = 1.0 / (tk1 * tk2 * (tk + tk1))
    A4 = 1.0 / (tk2 * (tk1 + tk2) * s3)

    w1 = A1 * (
        tk1 * (tk1 + tk2) * e1_1
        - ((tk + tk1) * (2 * tk + tk1 + tk2) + tk * s3) * e1_0
        + c2 * ((2 * tk1 + tk2) * e2_1 - (3 * tk + 2 * tk1 + tk2) * e2_0)
        + c3
    )
    w2 = A2 * (
        (tk1 * (tk - tk1 - tk2) + tk * (tk1 + tk2)) * e1_1
        + s3 * (tk + tk1) * e1_0
        + c2 * ((tk - 2 * tk1 - tk2) * e2_1 + (2 * tk + 2 * tk1 + tk2) * e2_0)
        - c3
    )
    w3 = A3 * (
        -tk * (tk1 + tk2) * e1_1
        - tk * s3 * e1_0
        + c2 * ((tk1 + tk2 - tk) * e2_1 - (2 * tk + tk1 + tk2) * e2_0)
        + c3
    )
    w4 = A4 * (
        tk1 * tk * e1_1
        + tk * (tk + tk1) * e1_0
        + c2 * ((tk - tk1) * e2_1 + (2 * tk + tk1) * e2_0)
        - c3
    )
    return np.stack([w1, w2, w3, w4], axis=1)


# }}}


# {{{ moment-based evaluation


def _binomial_series_coefficients(alpha: float, nterms: int) -> np.ndarray:
    # (1 - x)^{-alpha} = sum_m c_m x^m
    c = np.ones(nterms + 1)
    for m in range(1, nterms + 1):
        c[m] = c[m - 1] * (alpha + m - 1) / m
    return c


def _lagrange_derivative_coefficients(offsets: np.ndarray) -> np.ndarray:
    """Scaled coefficients of the Lagrange basis derivatives.

    ``offsets`` has shape ``(deg + 1, m)`` and holds node positions relative to
    the left end of each interval, with the right end ``h = offsets[-1]``.
    Returns ``g`` of shape ``(deg + 1, deg, m)`` such that
    ``L_j'(u) = sum_q g[j, q] * u^q / h^{q+1}``.
    """
    npts, m = offsets.shape
    deg = npts - 1
    h = offsets[-1]
    x = offsets / h

    g = np.zeros((npts, deg, m))
    for j in range(npts):
        others = [x[i] for i in range(npts) if i != j]
        denom = np.ones(m)
        for xi in others:
            denom = denom * (x[j] - xi)

        if deg == 1:
            g[j, 0] = 1.0
        elif deg == 2:
            g[j, 0] = -(others[0] + others[1])
            g[j, 1] = 2.0
        elif deg == 3:
            e1 = others[0] + others[1] + others[2]
            e2 = others[0] * others[1] + others[0] * others[2] + others[1] * others[2]
            g[j, 0] = e2
            g[j, 1] = -2.0 * e1
            g[j, 2] = 3.0
        else:
            raise ValueError(f"unsupported interpolation degree {deg}")

        g[j] /= denom

    return g


def _moment_weights(
    offsets: np.ndarray, y1: np.ndarray, y0: np.ndarray, alpha: float
) -> np.ndarray:
    """Compute ``(1 - alpha) int (t_n - s)^{-alpha} L_j'(s) ds`` over each interval.

    ``y1 = t_n - t_{k-1}`` and ``y0 = t_n - t_k`` per interval; the result has
    the shape of ``offsets`` with rows ordered like the interpolation nodes.
    """
    npts, m = offsets.shape
    deg = npts - 1
    h = offsets[-1]
    g = _lagrange_derivative_coefficients(offsets)
    out = np.empty((npts, m))

    ratio = h / y1
    far = ratio <= _FAR_FIELD_RATIO
    near = ~far

    if np.any(far):
        rho = ratio[far]
        rmax = float(rho.max())
        if rmax > 0:
            nterms = int(math.ceil(math.log(_SERIES_TOL) / math.log(rmax)))
            nterms = max(1, min(nterms, _MAX_SERIES_TERMS))
        else:
            nterms = 1
        c = _binomial_series_coefficients(alpha, nterms)

        # sum_{m >= 1} c_m rho^m / (m + q + 1), one column per power q
        powers = rho[None, :] ** np.arange(1, nterms + 1)[:, None]
        tail = np.empty((deg, rho.size))
        for q in range(deg):
            coef = c[1:] / (np.arange(1, nterms + 1) + q + 1)
            tail[q] = coef @ powers

        jump = np.zeros(npts)
        jump[-1], jump[-2] = 1.0, -1.0
        scale = _pow(y1[far], -alpha)
        for j in range(npts):
            corr = np.sum(g[j][:, far] * tail, axis=0)
            out[j, far] = (1.0 - alpha) * scale * (jump[j] + corr)

    if np.any(near):
        hn, a, b = h[near], y1[near], y0[near]
        # M_q / h^{q+1} with M_q = int_b^a z^{-alpha} (a - z)^q dz
        diffs = [
            (_pow(a, i + 1 - alpha) - _pow(b, i + 1 - alpha)) / (i + 1 - alpha)
            for i in range(deg)
        ]
        moments = []
        for q in range(deg):
            mq = np.zeros_like(a)
            for i in range(q + 1):
                mq = mq + math.comb(q, i) * (-1) ** i * a ** (q - i) * diffs[i]
            moments.append(mq / hn ** (q + 1))

        for j in range(npts):
            acc = np.zeros_like(a)
            for q in range(deg):
                acc = acc + g[j, q, near] * moments[q]
            out[j, near] = (1.0 - alpha) * acc

    return out


def _interval_geometry(mesh: TemporalMesh, n: int, k: np.ndarray, deg: int):
    """Node offsets (relative to ``t_{k-1}``) and kernel distances for intervals ``k``."""
    tau = mesh.steps
    t = mesh.nodes
    offsets = np.zeros((deg + 1, k.size))
    offsets[-1] = tau[k - 1]
    acc = np.zeros(k.size)
    for i in range(1, deg):
        acc = acc + tau[k - 1 - i]
        offsets[deg - 1 - i] = -acc

    y1 = t[n] - t[k - 1]
    y0 = t[n] - t[k]
    y0[k == n] = 0.0
    y1[k == n] = tau[n - 1]
    return offsets, y1, y0


def _stable_first(mesh: TemporalMesh, alpha: float, n: int) -> float:
    k = np.array([1])
    offsets, y1, y0 = _interval_geometry(mesh, n, k, 1)
    w = _moment_weights(offsets, y1, y0, alpha)
    return float(w[1, 0])


def _stable_second(mesh: TemporalMesh, alpha: float, n: int) -> tuple[float, float, float]:
    k = np.array([2])
    offsets, y1, y0 = _interval_geometry(mesh, n, k, 2)
    w = _moment_weights(offsets, y1, y0, alpha)
    return float(w[0, 0]), float(w[1, 0]), float(w[2, 0])


def _stable_cubic(mesh: TemporalMesh, alpha: float, n: int) -> np.ndarray:
    k = np.arange(3, n + 1)
    offsets, y1, y0 = _interval_geometry(mesh, n, k, 3)
    w = _moment_weights(offsets, y1, y0, alpha)
    # node order t_{k-3}, ..., t_k -> (w1, w2, w3, w4) = (t_k, ..., t_{k-3})
    return w[::-1].T.copy()


# }}}


# {{{ public api


@dataclass(frozen=True)
class IntervalWeights:
    """All per-interval weights at time level ``n``.

    ``cubic[k - 3]`` holds ``(w1, w2, w3, w4)`` multiplying
    ``(u^k, u^{k-1}, u^{k-2}, u^{k-3})``. ``b, c, d`` are ``nan`` for ``n = 1``.
    """

    n: int
    alpha: float
    a: float
    b: float
    c: float
    d: float
    cubic: np.ndarray


@dataclass(frozen=True)
class CaputoWeightRow:
    """Coefficients ``p_0, ..., p_n``; ``p[j]`` multiplies ``u^{n-j}``.

    The ``1 / Gamma(2 - alpha)`` prefactor is not included.
    """

    n: int
    alpha: float
    p: np.ndarray

    def __len__(self) -> int:
        return self.p.size


def first_interval_weight(
    mesh: TemporalMesh, alpha: float, n: int, method: str = "stable"
) -> float:
    """Weight ``a_n`` of the linear piece on ``[t_0, t_1]``."""
    alpha = check_alpha(alpha)
    n = _check_level(mesh, n)
    if _check_method(method) == "closed":
        return _closed_first(mesh, alpha, n)
    return _stable_first(mesh, alpha, n)


def second_interval_weights(
    mesh: TemporalMesh, alpha: float, n: int, method: str = "stable"
) -> tuple[float, float, float]:
    """Weights ``(b_n, c_n, d_n)`` of the quadratic piece on ``[t_1, t_2]``."""
    alpha = check_alpha(alpha)
    n = _check_level(mesh, n, lowest=2)
    if _check_method(method) == "closed":
        return _closed_second(mesh, alpha, n)
    return _stable_second(mesh, alpha, n)


def cubic_interval_weights(
    mesh: TemporalMesh, alpha: float, n: int, k: int, method: str = "stable"
) -> tuple[float, float, float, float]:
    """Weights ``(w1, w2, w3, w4)`` of the cubic piece on ``[t_{k-1}, t_k]``."""
    alpha = check_alpha(alpha)
    n = _check_level(mesh, n, lowest=3)
    if int(k) != k or not 3 <= k <= n:
        raise ValueError(f"cubic interval index must satisfy 3 <= k <= n={n}, got {k}")

    # only the one interval is needed, so slice a single-column problem
    if _check_method(method) == "closed":
        w = _closed_cubic(mesh, alpha, n)[k - 3]
    else:
        kk = np.array([int(k)])
        offsets, y1, y0 = _interval_geometry(mesh, n, kk, 3)
        w = _moment_weights(offsets, y1, y0, alpha)[::-1, 0]
    return tuple(float(v) for v in w)


def interval_weights(
    mesh: TemporalMesh, alpha: float, n: int, method: str = "stable"
) -> IntervalWeights:
    alpha = check_alpha(alpha)
    n = _check_level(mesh, n)
    closed = _check_method(method) == "closed"

    a = _closed_first(mesh, alpha, n) if closed else _stable_first(mesh, alpha, n)
    if n >= 2:
        b, c, d = _closed_second(mesh, alpha, n) if closed else _stable_second(mesh, alpha, n)
    else:
        b = c = d = math.nan
    if n >= 3:
        cubic = _closed_cubic(mesh, alpha, n) if closed else _stable_cubic(mesh, alpha, n)
    else:
        cubic = np.empty((0, 4))

    cubic.setflags(write=False)
    return IntervalWeights(n=n, alpha=alpha, a=a, b=b, c=c, d=d, cubic=cubic)


def _compensated_sum(terms: np.ndarray) -> np.ndarray:
    """Neumaier summation along the first axis."""
    s = terms[0].copy()
    comp = np.zeros_like(s)
    for x in terms[1:]:
        t = s + x
        big = np.abs(s) >= np.abs(x)
        comp += np.where(big, (s - t) + x, (x - t) + s)
        s = t
    return s + comp


def assemble_row(
    mesh: TemporalMesh, alpha: float, n: int, method: str = "stable"
) -> CaputoWeightRow:
    """Assemble the discrete Caputo row ``p_0, ..., p_n`` at level ``n``."""
    iw = interval_weights(mesh, alpha, n, method=method)

    # contributions to the coefficient of u^m, one layer per source
    layers = np.zeros((6, n + 1))
    layers[0, 1] = iw.a
    layers[0, 0] = -iw.a
    if n >= 2:
        layers[1, 0] = iw.b
        layers[1, 1] = iw.c
        layers[1, 2] = iw.d
    if n >= 3:
        w = iw.cubic
        layers[2, 3 : n + 1] = w[:, 0]
        layers[3, 2:n] = w[:, 1]
        layers[4, 1 : n - 1] = w[:, 2]
        layers[5, 0 : n - 2] = w[:, 3]

    coef = _compensated_sum(layers)
    p = coef[::-1].copy()
    p.setflags(write=False)
    return CaputoWeightRow(n=n, alpha=iw.alpha, p=p)


def uniform_coefficients(alpha: float, n: int, method: str = "stable") -> np.ndarray:
    """Mesh-independent ``g_j = tau^alpha p_j`` on a uniform mesh."""
    mesh = build_temporal_mesh(1.0, max(n, 3), 1.0)
    row = assemble_row(mesh, alpha, n, method=method)
    return row.p * mesh.step(1) ** alpha


def write_row_csv(row: CaputoWeightRow, path: str | PathLike[str]) -> None:
    with open(path, "w", newline="") as outf:
        writer = csv.writer(outf)
        writer.writerow(["j", "p_j"])
        for j, pj in enumerate(row.p):
            writer.writerow([j, f"{pj:.17g}"])


# }}}
