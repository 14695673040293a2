"""Manufactured test problems with exact solutions ``t^beta sin(mode pi x / L)``."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from fracstep.caputo import MonomialOracle
from fracstep.tfde import ProblemSpec
from fracstep.weights import check_alpha

RESIDUAL_TOL = 1.0e-9
RESIDUAL_POINTS = 20
_RESIDUAL_SEED = 20240611


@dataclass(frozen=True)
class ManufacturedProblem:
    """A problem whose exact solution is ``t^beta sin(mode pi x / L)``.

    The stored source term is checked against the analytic Caputo derivative
    of the exact solution when the object is created.
    """

    name: str
    spec: ProblemSpec
    beta: float
    mode: int
    provenance: str
    smooth: bool = True

    def __post_init__(self) -> None:
        if self.spec.exact is None:
            raise ValueError("a manufactured problem needs an exact solution")
        worst = self.residual_check()
        if worst > RESIDUAL_TOL:
            raise ValueError(
                f"problem {self.name!r}: source term inconsistent with exact solution "
                f"(relative residual {worst:.3e})"
            )

    @property
    def wavenumber(self) -> float:
        return self.mode * math.pi / self.spec.L

    def residual(self, x, t) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(residual, scale)`` of the PDE at points ``(x, t)``.

        The Caputo term comes from the monomial identity, never from the
        discrete operator.
        """
        x = np.asarray(x, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        s = self.spec
        shape = np.sin(self.wavenumber * x)
        caputo = MonomialOracle(self.beta, s.alpha)(t) * shape
        diffusion = s.rho * self.wavenumber**2 * t**self.beta * shape
        f = np.asarray(s.source(x, t), dtype=np.float64)
        scale = np.abs(caputo) + np.abs(diffusion) + np.abs(f)
        return caputo + diffusion - f, scale

    def residual_check(self, npoints: int = RESIDUAL_POINTS) -> float:
        """Largest relative residual over ``npoints`` fixed pseudo-random interior points."""
        rng = np.random.default_rng(_RESIDUAL_SEED)
        x = self.spec.L * rng.uniform(0.02, 0.98, npoints)
        t = self.spec.T * rng.uniform(0.02, 1.0, npoints)
        res, scale = self.residual(x, t)
        exact = np.asarray(self.spec.exact(x, t))
        if np.max(np.abs(exact - t**self.beta * np.sin(self.wavenumber * x))) > 1e-14:
            return math.inf
        return float(np.max(np.abs(res) / np.maximum(scale, np.finfo(float).tiny)))


def example_smooth(alpha: float, rho: float = 1.0) -> ManufacturedProblem:
    """Smooth problem on ``[0, pi] x [0, 1]`` with exact solution ``t^5 sin x``."""
    alpha = check_alpha(alpha)
    c = 120.0 / math.gamma(6.0 - alpha)

    def source(x, t):
        return t**5 * np.sin(x) * (rho + c * t ** (-alpha))

    spec = ProblemSpec(
        alpha=alpha,
        rho=rho,
        L=math.pi,
        T=1.0,
        source=source,
        initial=np.zeros_like,
        exact=lambda x, t: t**5 * np.sin(x),
    )
    return ManufacturedProblem(
        name="ex1-smooth",
        spec=spec,
        beta=5.0,
        mode=1,
        provenance="smooth benchmark, exact solution t^5 sin x",
    )


def example_singular(alpha: float) -> ManufacturedProblem:
    """Problem on ``[0, 1]^2`` with exact solution ``t^{2+alpha} sin(pi x)``.

    The solution is not four times differentiable in time at ``t = 0``.
    """
    alpha = check_alpha(alpha)
    c = math.gamma(3.0 + alpha) / 2.0

    def source(x, t):
        return t**2 * np.sin(np.pi * x) * (c + np.pi**2 * t**alpha)

    spec = ProblemSpec(
        alpha=alpha,
        rho=1.0,
        L=1.0,
        T=1.0,
        source=source,
        initial=np.zeros_like,
        exact=lambda x, t: t ** (2.0 + alpha) * np.sin(np.pi * x),
    )
    return ManufacturedProblem(
        name="ex2-singular",
        spec=spec,
        beta=2.0 + alpha,
        mode=1,
        provenance="weakly singular benchmark, exact solution t^(2+alpha) sin(pi x)",
        smooth=False,
    )


def make_monomial_problem(
    beta: float,
    mode: int = 1,
    L: float = 1.0,
    T: float = 1.0,
    alpha: float = 0.5,
    rho: float = 1.0,
) -> ManufacturedProblem:
    """General problem with exact solution ``t^beta sin(mode pi x / L)``."""
    alpha = check_alpha(alpha)
    if not beta > alpha:
        raise ValueError(f"need beta > alpha, got beta={beta}, alpha={alpha}")
    if int(mode) != mode or mode < 1:
        raise ValueError(f"spatial mode must be a positive integer, got {mode}")
    mode = int(mode)
    kappa = mode * math.pi / L
    c = MonomialOracle(beta, alpha).coefficient

    def source(x, t):
        return np.sin(kappa * x) * (c * t ** (beta - alpha) + rho * kappa**2 * t**beta)

    spec = ProblemSpec(
        alpha=alpha,
        rho=rho,
        L=L,
        T=T,
        source=source,
        initial=np.zeros_like,
        exact=lambda x, t: t**beta * np.sin(kappa * x),
    )
    return ManufacturedProblem(
        name=f"monomial:{beta:g}:{mode}",
        spec=spec,
        beta=float(beta),
        mode=mode,
        provenance="user-defined monomial-in-time manufactured solution",
        smooth=beta >= 4 or float(beta).is_integer(),
    )


PROBLEM_NAMES = ("ex1-smooth", "ex2-singular", "monomial:<beta>:<mode>")


def get_problem(name: str, alpha: float, rho: float = 1.0) -> ManufacturedProblem:
    """Look up a problem by its command-line name."""
    if name == "ex1-smooth":
        return example_smooth(alpha, rho)
    if name == "ex2-singular":
        if rho != 1.0:
            raise ValueError("ex2-singular is defined for rho = 1 only")
        return example_singular(alpha)
    if name.startswith("monomial:"):
        parts = name.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected 'monomial:<beta>:<mode>', got {name!r}")
        try:
            beta, mode = float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ValueError(f"cannot parse problem name {name!r}: {exc}") from None
        return make_monomial_problem(beta, mode, alpha=alpha, rho=rho)
    raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}")


def with_overrides(
    spec: ProblemSpec, zero_source: bool = False, zero_initial: bool = False
) -> ProblemSpec:
    """Copy of ``spec`` with the source and/or initial data replaced by zero.

    The exact solution no longer applies and is dropped unless both are zeroed,
    in which case it is identically zero.
    """
    if not (zero_source or zero_initial):
        return spec
    source = (lambda x, t: np.zeros_like(np.asarray(x, dtype=np.float64))) if zero_source else spec.source
    initial = np.zeros_like if zero_initial else spec.initial
    exact = (lambda x, t: np.zeros_like(np.asarray(x, dtype=np.float64))) if (zero_source and zero_initial) else None
    return replace(spec, source=source, initial=initial, exact=exact)
