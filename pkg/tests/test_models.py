from types import SimpleNamespace

import numpy as np
import pytest

from jumplmi.models import (
    FINITO,
    METHODS,
    SAGA,
    SAG,
    SDCA,
    MissingRegularizer,
    NoUniqueMinimizer,
    build_realization,
    equilibrium,
    step_exact,
    verify_fixed_point,
)


def quad_problem(D, b, ell2=0.0):
    D = np.asarray(D, dtype=float)
    b = np.asarray(b, dtype=float)
    return SimpleNamespace(D=D, b=b, ell2=ell2, n=D.shape[0], p=D.shape[1])


def random_problem(rng, n, p, lo=0.2, hi=1.5, ell2=0.0):
    return quad_problem(rng.uniform(lo, hi, size=(n, p)),
                        rng.normal(size=(n, p)), ell2=ell2)


def test_saga_matrices_match_hand_forms():
    alpha = 0.3
    r = build_realization(SAGA, 2, alpha)
    assert r.state_dim == 3
    a1 = r.A(1)
    assert np.allclose(a1, [[0, 0, 0], [0, 1, 0], [alpha / 2, -alpha / 2, 1]])
    assert np.allclose(r.B(1), [[1, 0], [0, 0], [-alpha, 0]])
    assert np.allclose(r.C, [0, 0, 1])


def test_sdca_matrices_match_hand_forms():
    alpha, m = 0.05, 0.4
    r = build_realization(SDCA, 2, alpha, m=m)
    at = alpha * m * 2
    assert r.state_dim == 2
    assert np.allclose(r.A(1), np.diag([1 - at, 1.0]))
    assert np.allclose(r.B(1), [[-at, 0], [0, 0]])
    assert np.allclose(r.C, [1 / (2 * m), 1 / (2 * m)])


def test_finito_matrices_shapes_and_blocks():
    alpha, n = 0.2, 2
    r = build_realization(FINITO, n, alpha)
    assert r.state_dim == 4
    b1 = r.B(1)
    assert np.allclose(b1[:2, :], [[1, 0], [0, 0]])
    assert np.allclose(b1[2:, :], 0.0)
    a2 = r.A(2)
    assert np.allclose(a2[:2, :2], [[1, 0], [0, 0]])
    assert np.allclose(a2[2:, :2], [[0, 0], [-alpha, -alpha]])
    assert np.allclose(a2[2:, 2:], [[1, 0], [0.5, 0.5]])
    assert np.allclose(r.C, [-alpha, -alpha, 0.5, 0.5])


def test_sag_differs_from_saga_only_in_update_rows():
    alpha, n = 0.11, 5
    saga = build_realization(SAGA, n, alpha)
    sag = build_realization(SAG, n, alpha)
    for i in range(1, n + 1):
        a_saga, a_sag = saga.A(i), sag.A(i)
        assert np.allclose(a_saga[:n, :], a_sag[:n, :])
        e = np.ones(n)
        ei = np.eye(n)[:, i - 1]
        assert np.allclose(a_saga[n, :n], -(alpha / n) * (e - n * ei))
        assert np.allclose(a_sag[n, :n], -(alpha / n) * (e - ei))
        assert np.allclose(saga.B(i)[n, :], -alpha * ei)
        assert np.allclose(sag.B(i)[n, :], -(alpha / n) * ei)


def test_b_matrices_touch_only_the_sampled_column():
    rng = np.random.default_rng(0)
    for method in METHODS:
        r = build_realization(method, 4, 0.1, m=0.3 if method == SDCA else None)
        for i in range(1, 5):
            b = r.B(i)
            mask = np.ones(4, dtype=bool)
            mask[i - 1] = False
            assert np.allclose(b[:, mask], 0.0)
            assert np.any(b[:, i - 1] != 0.0)
    _ = rng


def test_realization_validation():
    with pytest.raises(MissingRegularizer):
        build_realization(SDCA, 4, 0.1)
    with pytest.raises(ValueError):
        build_realization(SAGA, 1, 0.1)
    with pytest.raises(ValueError):
        build_realization(SAGA, 4, -0.1)
    with pytest.raises(ValueError):
        build_realization("sagb", 4, 0.1)


def test_equilibrium_symmetric_instance_is_zero():
    prob = quad_problem(np.full((3, 2), 0.8), np.zeros((3, 2)))
    eq = equilibrium(SAGA, prob)
    assert np.allclose(eq.xstar, 0.0)
    assert np.allclose(eq.wstar, 0.0)
    assert np.allclose(eq.xistar, 0.0)


def test_equilibrium_closed_form_and_stationarity():
    rng = np.random.default_rng(42)
    prob = random_problem(rng, n=5, p=3)
    eq = equilibrium(FINITO, prob)
    dbar = prob.D.mean(axis=0)
    bbar = prob.b.mean(axis=0)
    assert np.allclose(eq.xstar, -bbar / dbar)
    grad_avg = (prob.D * eq.xstar[None, :] + prob.b).mean(axis=0)
    assert np.max(np.abs(grad_avg)) < 1e-12
    assert eq.xistar.shape == (10, 3)
    assert np.allclose(eq.xistar[5:], np.tile(eq.xstar, (5, 1)))


def test_equilibrium_sdca_regularized_stationarity():
    rng = np.random.default_rng(1)
    ell2 = 0.3
    prob = random_problem(rng, n=4, p=2, lo=0.0, hi=1.0, ell2=ell2)
    eq = equilibrium(SDCA, prob)
    grad_reg = ell2 * eq.xstar + (prob.D * eq.xstar[None, :] + prob.b).mean(axis=0)
    assert np.max(np.abs(grad_reg)) < 1e-12
    assert np.allclose(eq.xistar, -eq.wstar)
    with pytest.raises(MissingRegularizer):
        equilibrium(SDCA, quad_problem(prob.D, prob.b, ell2=0.0))


def test_equilibrium_rejects_indefinite_average():
    prob = quad_problem([[0.5, -0.6], [0.3, 0.2]], np.zeros((2, 2)))
    with pytest.raises(NoUniqueMinimizer):
        equilibrium(SAGA, prob)


def test_fixed_point_residuals_small_for_all_methods():
    rng = np.random.default_rng(9)
    n, p = 5, 3
    for method in METHODS:
        ell2 = 0.25 if method == SDCA else 0.0
        prob = random_problem(rng, n, p, ell2=ell2)
        r = build_realization(method, n, 0.07, m=ell2 if method == SDCA else None)
        eq = equilibrium(method, prob)
        assert verify_fixed_point(r, eq, p) < 1e-12


def test_fixed_point_detects_corruption():
    rng = np.random.default_rng(10)
    n, p = 5, 3
    prob = random_problem(rng, n, p)
    r = build_realization(SAGA, n, 0.07)
    eq = equilibrium(SAGA, prob)
    eps = 1e-3
    bad_w = eq.wstar.copy()
    bad_w[2, 1] += eps
    corrupt = type(eq)(xstar=eq.xstar, wstar=bad_w, xistar=eq.xistar)
    assert verify_fixed_point(r, corrupt, p) >= eps / 2


def test_step_exact_fixed_point_for_every_index():
    rng = np.random.default_rng(11)
    n, p = 4, 2
    for method in METHODS:
        ell2 = 0.5 if method == SDCA else 0.0
        prob = random_problem(rng, n, p, ell2=ell2)
        r = build_realization(method, n, 0.05, m=ell2 if method == SDCA else None)
        eq = equilibrium(method, prob)
        for i in range(1, n + 1):
            nxt = step_exact(r, eq.xistar, prob, i)
            assert np.max(np.abs(nxt - eq.xistar)) < 1e-12


def grad(prob, i, x):
    return prob.D[i] * x + prob.b[i]


def direct_update(method, prob, alpha, state, i):
    # textbook update rules, written independently of the matrix form
    n, p = prob.n, prob.p
    k = i - 1
    if method in (SAGA, SAG):
        y = state[:n].copy()
        x = state[n].copy()
        g = grad(prob, k, x)
        if method == SAGA:
            x_new = x - alpha * (g - y[k] + y.mean(axis=0))
        else:
            x_new = x - alpha * ((g - y[k]) / n + y.mean(axis=0))
        y_new = y.copy()
        y_new[k] = g
        return np.vstack([y_new, x_new[None, :]])
    if method == FINITO:
        y = state[:n].copy()
        xs = state[n:].copy()
        v = xs.mean(axis=0) - alpha * y.sum(axis=0)
        y_new, xs_new = y.copy(), xs.copy()
        y_new[k] = grad(prob, k, v)
        xs_new[k] = v
        return np.vstack([y_new, xs_new])
    y = state.copy()
    at = alpha * prob.ell2 * n
    x = y.mean(axis=0) / prob.ell2
    y_new = y.copy()
    y_new[k] = (1 - at) * y[k] - at * grad(prob, k, x)
    return y_new


def test_matrix_form_matches_direct_updates():
    rng = np.random.default_rng(12)
    n, p, alpha = 4, 3, 0.06
    for method in METHODS:
        ell2 = 0.35 if method == SDCA else 0.0
        prob = random_problem(rng, n, p, ell2=ell2)
        r = build_realization(method, n, alpha, m=ell2 if method == SDCA else None)
        state = rng.normal(size=(r.state_dim, p))
        for _ in range(20):
            i = int(rng.integers(1, n + 1))
            via_matrix = step_exact(r, state, prob, i)
            via_rules = direct_update(method, prob, alpha, state, i)
            assert np.max(np.abs(via_matrix - via_rules)) < 1e-12
            state = via_matrix
