import csv
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracstep.mesh import build_temporal_mesh
from fracstep.weights import (
    METHODS,
    assemble_row,
    check_alpha,
    cubic_interval_weights,
    first_interval_weight,
    interval_weights,
    second_interval_weights,
    uniform_coefficients,
    write_row_csv,
)
from oracles import mp_interval_weights, mp_nodes, mp_row, quadrature_interval, quadrature_row


def g0_closed(alpha):
    return 1 / 3 + 1 / (2 - alpha) + 1 / ((2 - alpha) * (3 - alpha))


@pytest.mark.parametrize("alpha", [0.0, 1.0, 1e-11, 1 - 1e-11, -0.2, 1.5])
def test_alpha_rejected(alpha):
    with pytest.raises(ValueError):
        check_alpha(alpha)


def test_unknown_method_rejected():
    with pytest.raises(ValueError):
        assemble_row(build_temporal_mesh(1.0, 4), 0.5, 2, method="fast")


@pytest.mark.parametrize("method", METHODS)
def test_first_weight_uniform_collapse(method):
    tau = 0.1
    mesh = build_temporal_mesh(1.0, 10)
    assert first_interval_weight(mesh, 0.4, 1, method) == pytest.approx(tau**-0.4, rel=1e-14)
    expected = 10 * (math.sqrt(0.2) - math.sqrt(0.1))
    assert first_interval_weight(mesh, 0.5, 2, method) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("method", METHODS)
def test_first_weight_graded_extended_precision(method):
    mesh = build_temporal_mesh(1.0, 4, 2.0)
    a, _, _ = mp_interval_weights(mp_nodes(1, 4, 2), 0.5, 3)
    assert first_interval_weight(mesh, 0.5, 3, method) == pytest.approx(float(a), rel=1e-13)


@pytest.mark.parametrize("method", METHODS)
def test_second_weights_uniform_extended_precision(method):
    mesh = build_temporal_mesh(1.0, 4)
    _, bcd, _ = mp_interval_weights(mp_nodes(1, 4, 1), 0.3, 4)
    got = second_interval_weights(mesh, 0.3, 4, method)
    np.testing.assert_allclose(got, [float(v) for v in bcd], rtol=1e-12)


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("r", [1.0, 2.5])
def test_second_weights_linear_and_constant(method, r):
    mesh = build_temporal_mesh(1.0, 9, r)
    t = mesh.nodes
    for n in range(2, 10):
        b, c, d = second_interval_weights(mesh, 0.35, n, method)
        assert abs(b + c + d) <= 1e-12 * max(abs(b), abs(c), abs(d))
        exact = (t[n] - t[1]) ** 0.65 - (t[n] - t[2]) ** 0.65
        assert b * t[0] + c * t[1] + d * t[2] == pytest.approx(exact, rel=1e-12)


def test_second_weights_reject_level_one():
    with pytest.raises(ValueError):
        second_interval_weights(build_temporal_mesh(1.0, 4), 0.5, 1)


@pytest.mark.parametrize("k", [2, 6])
def test_cubic_weights_reject_bad_k(k):
    with pytest.raises(ValueError):
        cubic_interval_weights(build_temporal_mesh(1.0, 8), 0.5, 5, k)


@pytest.mark.parametrize("method,r", [("stable", 1.0), ("stable", 3.0), ("closed", 1.0)])
def test_cubic_weights_linear_and_constant(method, r):
    alpha = 0.6
    mesh = build_temporal_mesh(1.0, 12, r)
    t = mesh.nodes
    for n in range(3, 13):
        for k in range(3, n + 1):
            w = np.array(cubic_interval_weights(mesh, alpha, n, k, method))
            assert abs(w.sum()) <= 1e-11 * np.abs(w).max()
            y0 = 0.0 if k == n else (t[n] - t[k]) ** (1 - alpha)
            exact = (t[n] - t[k - 1]) ** (1 - alpha) - y0
            got = w @ t[[k, k - 1, k - 2, k - 3]]
            assert got == pytest.approx(exact, rel=1e-11)


@pytest.mark.parametrize("method", METHODS)
def test_cubic_weights_quadrature_on_basis_vectors(method):
    alpha, n, k = 0.5, 5, 3
    mesh = build_temporal_mesh(1.0, 5)
    got = cubic_interval_weights(mesh, alpha, n, k, method)
    expected = []
    for node in (k, k - 1, k - 2, k - 3):
        e = np.zeros(6)
        e[node] = 1.0
        expected.append(quadrature_interval(mesh.nodes, alpha, n, k, e))
    np.testing.assert_allclose(got, expected, rtol=1e-10, atol=1e-12)


def test_interval_weights_positive_first_weight():
    mesh = build_temporal_mesh(1.0, 30, 4.0)
    for n in range(1, 31):
        assert interval_weights(mesh, 0.7, n).a > 0


def test_row_level_one_uniform():
    tau = 0.125
    row = assemble_row(build_temporal_mesh(1.0, 8), 0.3, 1)
    np.testing.assert_allclose(row.p, [tau**-0.3, -(tau**-0.3)], rtol=1e-14)
    assert len(row) == 2


@pytest.mark.parametrize("method", METHODS)
def test_g0_closed_form(method):
    for n in (3, 4, 10, 40):
        g = uniform_coefficients(0.5, n, method)
        assert g[0] == pytest.approx(1 / 3 + 1 / 1.5 + 1 / (1.5 * 2.5), rel=1e-13)
        assert g[0] == pytest.approx(1.2666666666666666, rel=1e-13)


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_printed_short_rows(method, n):
    mesh = build_temporal_mesh(1.0, 7, 2.3)
    iw = interval_weights(mesh, 0.45, n, method)
    a, b, c, d = iw.a, iw.b, iw.c, iw.d
    w = {(q, k): iw.cubic[k - 3][q - 1] for k in range(3, n + 1) for q in range(1, 5)}
    printed = {
        1: lambda: [a, -a],
        2: lambda: [d, a + c, b - a],
        3: lambda: [w[1, 3], w[2, 3] + d, w[3, 3] + a + c, w[4, 3] + b - a],
        4: lambda: [w[1, 4], w[1, 3] + w[2, 4], w[3, 4] + w[2, 3] + d, w[3, 3] + w[4, 4] + a + c,
            w[4, 3] + b - a],
        5: lambda: [w[1, 5], w[1, 4] + w[2, 5], w[1, 3] + w[2, 4] + w[3, 5], w[2, 3] + w[3, 4] + w[4, 5] + d,
            w[3, 3] + w[4, 4] + a + c, w[4, 3] + b - a],
    }[n]()
    p = assemble_row(mesh, 0.45, n, method).p
    np.testing.assert_allclose(p, printed, rtol=1e-13, atol=1e-13 * np.abs(p).max())


@pytest.mark.parametrize("method", METHODS)
def test_general_rows_follow_recurrence(method):
    n = 9
    mesh = build_temporal_mesh(1.0, 9, 1.8)
    iw = interval_weights(mesh, 0.55, n, method)
    w = {(q, k): iw.cubic[k - 3][q - 1] for k in range(3, n + 1) for q in range(1, 5)}
    expected = [w[1, n], w[1, n - 1] + w[2, n], w[1, n - 2] + w[2, n - 1] + w[3, n]]
    for j in range(3, n - 2):
        expected.append(w[1, n - j] + w[2, n - j + 1] + w[3, n - j + 2] + w[4, n - j + 3])
    expected += [w[2, 3] + w[3, 4] + w[4, 5] + iw.d, w[3, 3] + w[4, 4] + iw.a + iw.c,
                 w[4, 3] + iw.b - iw.a]
    p = assemble_row(mesh, 0.55, n, method).p
    np.testing.assert_allclose(p, expected, rtol=1e-12, atol=1e-13 * np.abs(p).max())


@pytest.mark.parametrize(
    "T,K_t,r,alpha,levels",
    [(1, 20, 1, 0.3, [3, 7, 20]), (1, 16, 3.0, 0.5, [3, 9, 16]), (1, 50, 10.0, 0.5, [10, 30, 50]),
     (2, 40, 6.0, 0.8, [5, 40]), (1, 160, 9.0, 0.4, [80, 160])],
)
def test_stable_rows_match_extended_precision(T, K_t, r, alpha, levels):
    mesh = build_temporal_mesh(T, K_t, r)
    # mp nodes rounded to the double mesh so both see the same geometry
    t = [mp.mpf(float(v)) for v in mesh.nodes]
    for n in levels:
        ref = np.array([float(v) for v in mp_row(t, alpha, n, dps=80)])
        got = assemble_row(mesh, alpha, n).p
        np.testing.assert_allclose(got, ref, rtol=1e-11, atol=1e-13 * np.abs(ref).max())


def test_closed_route_short_rows_match():
    mesh = build_temporal_mesh(1.0, 60)
    for n in (3, 4, 5):
        np.testing.assert_allclose(
            assemble_row(mesh, 0.6, n, "closed").p, assemble_row(mesh, 0.6, n).p, rtol=1e-13
        )


def test_closed_route_loses_far_coefficients():
    # cancellation in the power differences; the reason "stable" is the default
    mesh = build_temporal_mesh(1.0, 160)
    t = [mp.mpf(float(v)) for v in mesh.nodes]
    ref = np.array([float(v) for v in mp_row(t, 0.3, 160, dps=80)])
    err = {m: np.max(np.abs(assemble_row(mesh, 0.3, 160, m).p / ref - 1)) for m in METHODS}
    assert err["stable"] < 1e-12
    assert err["closed"] > 1e-8


def test_quadrature_oracle_rows_small_graded_meshes():
    rng = np.random.default_rng(7)
    for _ in range(6):
        K_t = int(rng.integers(3, 9))
        r = float(rng.uniform(1.0, 3.0))
        alpha = float(rng.uniform(0.1, 0.9))
        mesh = build_temporal_mesh(1.0, K_t, r)
        n = int(rng.integers(1, K_t + 1))
        ref = quadrature_row(mesh.nodes, alpha, n)
        np.testing.assert_allclose(assemble_row(mesh, alpha, n).p, ref, rtol=1e-8,
                                   atol=1e-9 * np.abs(ref).max())


def test_uniform_scaling():
    a = build_temporal_mesh(1.0, 20)
    b = build_temporal_mesh(2.0, 20)
    for n in (1, 2, 3, 11, 20):
        pa = assemble_row(a, 0.35, n).p
        pb = assemble_row(b, 0.35, n).p
        np.testing.assert_allclose(pb, pa * 2**-0.35, rtol=1e-12)


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_uniform_g_properties(alpha):
    for n in range(3, 51):
        g = uniform_coefficients(alpha, n)
        assert g[0] == pytest.approx(g0_closed(alpha), rel=1e-13)
        assert 1 < g[0] < 11 / 6
        assert g[2] > 0
        assert np.all(np.delete(g, [0, 2])[0:] < 0)
        assert abs(g.sum()) <= 1e-12 * np.abs(g).max()


@settings(max_examples=80, deadline=None)
@given(alpha=st.floats(0.02, 0.98), r=st.floats(1.0, 10.0), K_t=st.integers(3, 64), frac=st.floats(0, 1))
def test_row_sum_zero_property(alpha, r, K_t, frac):
    mesh = build_temporal_mesh(1.0, K_t, r)
    n = 1 + int(frac * (K_t - 1))
    p = assemble_row(mesh, alpha, n).p
    assert p.size == n + 1
    assert abs(math.fsum(p)) <= 1e-11 * np.abs(p).max()


def test_row_csv(tmp_path):
    row = assemble_row(build_temporal_mesh(1.0, 6, 2.0), 0.5, 4)
    path = tmp_path / "row.csv"
    write_row_csv(row, path)
    with open(path) as inf:
        rows = list(csv.reader(inf))
    assert rows[0] == ["j", "p_j"]
    assert [int(r[0]) for r in rows[1:]] == list(range(5))
    np.testing.assert_array_equal([float(r[1]) for r in rows[1:]], row.p)


def test_row_is_read_only():
    row = assemble_row(build_temporal_mesh(1.0, 6), 0.5, 4)
    with pytest.raises(ValueError):
        row.p[0] = 1.0
