"""Temporal (graded) and spatial (uniform) meshes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TemporalMesh:
    """Graded time grid ``t_n = T (n / K_t)^r`` on ``[0, T]``.

    ``steps[n - 1]`` holds ``tau_n = t_n - t_{n-1}``; use :meth:`step` for the
    one-based lookup used throughout the weight formulas.
    """

    T: float
    K_t: int
    r: float
    nodes: np.ndarray
    steps: np.ndarray

    def step(self, n: int) -> float:
        return float(self.steps[n - 1])

    @property
    def is_uniform(self) -> bool:
        return self.r == 1.0


@dataclass(frozen=True)
class SpatialMesh:
    L: float
    K_x: int
    h: float
    nodes: np.ndarray

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]


def build_temporal_mesh(T: float, K_t: int, r: float = 1.0) -> TemporalMesh:
    """Build the graded temporal mesh.

    The last node is pinned to ``T`` exactly. At least three subintervals are
    required since the cubic part of the Caputo approximation needs three
    prior nodes.
    """
    if not T > 0:
        raise ValueError(f"time horizon must be positive, got T={T}")
    if int(K_t) != K_t or K_t < 3:
        raise ValueError(f"need an integer K_t >= 3, got {K_t}")
    if not r >= 1:
        raise ValueError(f"grading exponent must satisfy r >= 1, got r={r}")

    K_t = int(K_t)
    if r == 1:
        # differencing rounded nodes would leave O(K_t eps) jitter in the steps
        tau = T / K_t
        nodes = tau * np.arange(K_t + 1, dtype=np.float64)
        nodes[-1] = T
        steps = np.full(K_t, tau)
    else:
        nodes = T * (np.arange(K_t + 1, dtype=np.float64) / K_t) ** r
        nodes[0] = 0.0
        nodes[-1] = T
        steps = np.diff(nodes)

    nodes.setflags(write=False)
    steps.setflags(write=False)
    return TemporalMesh(T=float(T), K_t=K_t, r=float(r), nodes=nodes, steps=steps)


def build_spatial_mesh(L: float, K_x: int) -> SpatialMesh:
    if not L > 0:
        raise ValueError(f"domain length must be positive, got L={L}")
    if int(K_x) != K_x or K_x < 2:
        raise ValueError(f"need an integer K_x >= 2, got {K_x}")

    K_x = int(K_x)
    h = L / K_x
    nodes = h * np.arange(K_x + 1, dtype=np.float64)
    nodes[-1] = L
    nodes.setflags(write=False)
    return SpatialMesh(L=float(L), K_x=K_x, h=h, nodes=nodes)
