import csv
import math

import mpmath as mp
import numpy as np
import pytest

from fracstep.caputo import (
    MonomialOracle,
    TimeHistory,
    apply_discrete_caputo,
    discrete_caputo_all_levels,
    truncation_order_study,
    write_truncation_csv,
)
from fracstep.mesh import build_temporal_mesh
from fracstep.weights import assemble_row, cubic_interval_weights


def test_history_length_checked():
    mesh = build_temporal_mesh(1.0, 4)
    with pytest.raises(ValueError):
        TimeHistory(mesh, np.zeros(6))
    with pytest.raises(ValueError):
        apply_discrete_caputo(TimeHistory(mesh, np.zeros(3)), 0.5, 3)
    with pytest.raises(ValueError):
        apply_discrete_caputo(TimeHistory(mesh, np.zeros(4)), 0.5, 3, row=assemble_row(mesh, 0.5, 2))


def test_monomial_oracle():
    with pytest.raises(ValueError):
        MonomialOracle(0.0, 0.5)
    o = MonomialOracle(1.0, 0.5)
    assert o.coefficient == pytest.approx(1 / math.gamma(1.5))
    assert o(4.0) == pytest.approx(2 / math.gamma(1.5))


@pytest.mark.parametrize("r", [1.0, 3.0, 8.0])
def test_constant_history_is_annihilated(r):
    mesh = build_temporal_mesh(1.0, 40, r)
    c = 3.7
    for n in (1, 2, 3, 20, 40):
        row = assemble_row(mesh, 0.4, n)
        h = TimeHistory(mesh, np.full(n + 1, c))
        tol = 1e-11 * c * np.abs(row.p).max() / math.gamma(1.6)
        assert abs(apply_discrete_caputo(h, 0.4, n, row=row)) <= tol


@pytest.mark.parametrize("r", [1.0, 2.0, 7.0])
@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.9])
def test_linear_history_exact(r, alpha):
    mesh = build_temporal_mesh(1.0, 30, r)
    oracle = MonomialOracle(1.0, alpha)
    approx = discrete_caputo_all_levels(mesh, mesh.nodes.copy(), alpha)
    np.testing.assert_allclose(approx[1:], oracle(mesh.nodes[1:]), rtol=1e-10)


def test_linearity():
    mesh = build_temporal_mesh(1.0, 25, 2.5)
    u = np.sin(3 * mesh.nodes)
    v = mesh.nodes**1.5
    a, b = 2.5, -0.75
    for n in (2, 10, 25):
        f = lambda w: apply_discrete_caputo(TimeHistory(mesh, w[: n + 1]), 0.3, n)
        lhs = f(a * u + b * v)
        rhs = a * f(u) + b * f(v)
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_cubic_intervals_exact_on_cubics():
    alpha, K_t = 0.5, 20
    mesh = build_temporal_mesh(1.0, K_t)
    t = mesh.nodes
    for n in (3, 10, 20):
        for k in range(3, n + 1):
            w = np.array(cubic_interval_weights(mesh, alpha, n, k))
            got = w @ t[[k, k - 1, k - 2, k - 3]] ** 3
            with mp.workdps(30):
                tn = mp.mpf(float(t[n]))
                ref = (1 - mp.mpf(alpha)) * mp.quad(
                    lambda s: (tn - s) ** (-mp.mpf(alpha)) * 3 * s**2, [float(t[k - 1]), float(t[k])]
                )
            assert got == pytest.approx(float(ref), rel=1e-10)


def test_t4_uniform_order():
    rows = truncation_order_study(4.0, 0.5, 1.0, [16, 32, 64])
    assert rows[0].final_order is None
    for row in rows[1:]:
        assert row.max_order == pytest.approx(3.5, abs=0.15)
        assert row.final_order == pytest.approx(3.5, abs=0.15)


def test_t5_uniform_order():
    rows = truncation_order_study(5.0, 0.3, 1.0, [16, 32, 64])
    for row in rows[1:]:
        assert row.max_order == pytest.approx(3.7, abs=0.2)


def test_singular_profile_optimal_grading_order():
    # the rate is approached from below; K_t >= 128 is in the asymptotic range
    rows = truncation_order_study(2.5, 0.5, 7.0, [128, 256, 512])
    for row in rows[1:]:
        assert row.max_order == pytest.approx(3.5, abs=0.2)


def test_singular_profile_uniform_mesh_scaling():
    # on a uniform mesh the level-n error of t^beta scales exactly like tau^(beta - alpha),
    # so the max over levels (attained near t = 0) converges at order beta - alpha = 2
    rows = truncation_order_study(2.5, 0.5, 1.0, [16, 32, 64, 128])
    for row in rows[1:]:
        assert row.max_order == pytest.approx(2.0, abs=0.02)
        assert row.final_order == pytest.approx(3.5, abs=0.15)


@pytest.mark.xfail(strict=True, reason="observed order is 2 (max) / 3.5 (final), never 0.5; see ledger")
def test_singular_profile_uniform_mesh_claimed_rate():
    rows = truncation_order_study(2.5, 0.5, 1.0, [16, 32, 64, 128, 256])
    assert rows[-1].max_order == pytest.approx(0.5, abs=0.2)


@pytest.mark.xfail(strict=True, reason="r = (4-alpha)/alpha over-grades t^(2+alpha) at K_t=128; see ledger")
@pytest.mark.parametrize("alpha", [0.4, 0.6, 0.8])
def test_grading_monotonicity(alpha):
    errs = [truncation_order_study(2 + alpha, alpha, r, [128])[0].max_error
            for r in (1.0, 2.0, (4 - alpha) / alpha)]
    assert errs[0] >= errs[1] >= errs[2]


@pytest.mark.parametrize("alpha", [0.4, 0.6, 0.8])
def test_mild_grading_helps(alpha):
    errs = [truncation_order_study(2 + alpha, alpha, r, [128])[0].max_error for r in (1.0, 2.0)]
    assert errs[1] < errs[0]


def test_study_requires_doubling():
    with pytest.raises(ValueError):
        truncation_order_study(4.0, 0.5, 1.0, [16, 30])


def test_truncation_csv(tmp_path):
    rows = truncation_order_study(4.0, 0.3, 1.0, [8, 16])
    path = tmp_path / "trunc.csv"
    write_truncation_csv(rows, 1.0, 0.3, path)
    with open(path) as inf:
        data = list(csv.reader(inf))
    assert data[0] == ["K_t", "r", "alpha", "error", "order"]
    assert data[1][4] == ""
    assert float(data[2][3]) == rows[1].max_error
    assert float(data[2][4]) == pytest.approx(rows[1].max_order)
