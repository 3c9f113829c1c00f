"""Problem generation and trajectory checks for the simulation layer.

The generator is audited against its class contract (sector membership,
exact pinning of the averaged curvature, closed-form stationarity);
trajectories are tied entrywise to the matrix-form step; recorded Lyapunov
values are tied to the structured quadratic form; one-step contraction of
certified rates is checked in exact conditional expectation.
"""

import csv
import os
import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumplmi import certificates as certs
from jumplmi import models, simulate
from jumplmi._kernels import finito_trial, saga_trial, sdca_trial
from jumplmi.functions import convex_smooth, smooth_only, strongly_convex


def direct_V(cert, problem, state):
    Pt = cert.P_params.expand(problem.n)
    eq = models.equilibrium(cert.method, problem)
    Xt = np.asarray(state, dtype=float) - eq.xistar
    return float(np.einsum("ap,ab,bp->", Xt, Pt, Xt))


class TestGenerateProblem:
    def test_equal_curvature_minimizer_is_mean_of_centers(self):
        problem = simulate.generate_problem("saga", "sc", 1.0, 1.0, 2, 1, seed=3)
        assert np.allclose(problem.D, 1.0)
        centers = -problem.b / problem.D
        assert np.allclose(problem.xstar, centers.mean(axis=0), atol=1e-12)

    @pytest.mark.parametrize("method,tag", [("saga", "sc"), ("sag", "cvx"),
                                            ("finito", "smooth"),
                                            ("sdca", "cvx")])
    def test_average_curvature_pinned_at_both_ends(self, method, tag):
        problem = simulate.generate_problem(method, tag, 0.1, 1.0, 10, 4, seed=7)
        dbar = problem.D.mean(axis=0)
        assert abs(dbar.min() - 0.1) <= 1e-12
        assert abs(dbar.max() - 1.0) <= 1e-12
        assert np.all(dbar >= 0.1 - 1e-12)
        assert np.all(dbar <= 1.0 + 1e-12)

    def test_single_coordinate_pins_bottom_end(self):
        problem = simulate.generate_problem("saga", "sc", 0.2, 1.0, 12, 1, seed=1)
        assert abs(problem.D.mean(axis=0)[0] - 0.2) <= 1e-12

    @pytest.mark.parametrize("tag,lo", [("sc", 0.1), ("cvx", 0.0), ("smooth", -1.0)])
    def test_component_entries_stay_in_sector(self, tag, lo):
        problem = simulate.generate_problem("saga", tag, 0.1, 1.0, 15, 3, seed=9)
        assert problem.D.min() >= lo - 1e-12
        assert problem.D.max() <= 1.0 + 1e-12

    def test_smooth_only_gets_a_negative_curvature(self):
        problem = simulate.generate_problem("saga", "smooth", 0.1, 1.0, 4, 2, seed=0)
        assert (problem.D < 0).any()

    def test_smooth_only_negative_entry_skipped_when_out_of_room(self):
        # with m/L this close, a negative entry would push others above L
        problem = simulate.generate_problem("saga", "smooth", 0.95, 1.0, 3, 2, seed=0)
        dbar = problem.D.mean(axis=0)
        assert abs(dbar.min() - 0.95) <= 1e-12

    @pytest.mark.parametrize("method,tag", [("saga", "sc"), ("sdca", "cvx")])
    def test_minimizer_is_stationary(self, method, tag):
        problem = simulate.generate_problem(method, tag, 0.05, 1.0, 8, 3, seed=4)
        g = problem.average_grad(problem.xstar)
        scale = max(1.0, float(np.max(np.abs(problem.b))))
        assert np.max(np.abs(g)) <= 1e-12 * scale

    def test_l2_weight_only_for_the_regularized_method(self):
        assert simulate.generate_problem("sdca", "cvx", 0.1, 1.0, 5, 2, seed=1).ell2 == 0.1
        assert simulate.generate_problem("saga", "sc", 0.1, 1.0, 5, 2, seed=1).ell2 == 0.0

    @pytest.mark.parametrize("method,tag", [("saga", "sc"), ("finito", "cvx"),
                                            ("sdca", "smooth")])
    def test_equilibrium_module_agrees_on_the_minimizer(self, method, tag):
        problem = simulate.generate_problem(method, tag, 0.1, 1.0, 6, 3, seed=8)
        eq = models.equilibrium(method, problem)
        assert np.allclose(eq.xstar, problem.xstar, atol=1e-12)

    def test_rejections(self):
        with pytest.raises(simulate.InfeasibleClass):
            simulate.generate_problem("saga", "sc", 0.1, 1.0, 1, 2, seed=0)
        with pytest.raises(ValueError):
            simulate.generate_problem("saga", "sc", 0.0, 1.0, 4, 2, seed=0)
        with pytest.raises(ValueError):
            simulate.generate_problem("saga", "sc", 2.0, 1.0, 4, 2, seed=0)
        with pytest.raises(ValueError):
            simulate.generate_problem("saga", "sc", 0.1, 1.0, 4, 0, seed=0)
        with pytest.raises(ValueError):
            simulate.generate_problem("sdca", "sc", 0.1, 1.0, 4, 2, seed=0)
        with pytest.raises(ValueError):
            simulate.generate_problem("saga", "nonsense", 0.1, 1.0, 4, 2, seed=0)
        with pytest.raises(ValueError):
            # assumption object carrying a different L than requested
            simulate.generate_problem("saga", convex_smooth(2.0), 0.1, 1.0, 4, 2, seed=0)

    def test_generation_is_deterministic_in_the_seed(self):
        a = simulate.generate_problem("saga", "cvx", 0.1, 1.0, 7, 3, seed=21)
        b = simulate.generate_problem("saga", "cvx", 0.1, 1.0, 7, 3, seed=21)
        c = simulate.generate_problem("saga", "cvx", 0.1, 1.0, 7, 3, seed=22)
        assert np.array_equal(a.D, b.D) and np.array_equal(a.b, b.b)
        assert not np.array_equal(a.D, c.D)

    def test_type_validates_membership(self):
        good = simulate.generate_problem("saga", "sc", 0.1, 1.0, 4, 2, seed=5)
        with pytest.raises(simulate.InfeasibleClass):
            simulate.QuadraticFiniteSum(n=4, p=2, D=good.D - 0.2, b=good.b,
                                        m=0.1, L=1.0, assumption=good.assumption,
                                        ell2=0.0, xstar=good.xstar)
        with pytest.raises(ValueError):
            simulate.QuadraticFiniteSum(n=4, p=2, D=good.D, b=good.b,
                                        m=0.1, L=1.0, assumption=good.assumption,
                                        ell2=0.0, xstar=good.xstar + 1.0)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000),
           tag=st.sampled_from(["sc", "cvx", "smooth"]),
           ratio=st.sampled_from([1e-2, 0.1, 0.5, 1.0]),
           n=st.integers(min_value=2, max_value=30),
           p=st.integers(min_value=1, max_value=5))
    def test_generated_instances_always_satisfy_the_class(self, seed, tag, ratio, n, p):
        m, L = ratio, 1.0
        problem = simulate.generate_problem("saga", tag, m, L, n, p, seed=seed)
        dbar = problem.D.mean(axis=0)
        assert abs(dbar.min() - m) <= 1e-12
        if p >= 2:
            assert abs(dbar.max() - L) <= 1e-12
        lo = {"sc": m, "cvx": 0.0, "smooth": -L}[tag]
        assert problem.D.min() >= lo - 1e-12
        assert problem.D.max() <= L + 1e-12


class TestStreams:
    def test_initial_point_sits_on_the_unit_sphere(self):
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 5, 4, seed=2)
        x0, y0 = simulate.initial_state("saga", problem, seed=3, trial=0)
        x1, _ = simulate.initial_state("saga", problem, seed=3, trial=1)
        assert abs(np.linalg.norm(x0 - problem.xstar) - 1.0) <= 1e-12
        assert abs(np.linalg.norm(x1 - problem.xstar) - 1.0) <= 1e-12
        assert not np.allclose(x0, x1)
        assert np.array_equal(y0, np.zeros((5, 4)))

    def test_gradient_table_initialization(self):
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 5, 3, seed=2)
        x0, y0 = simulate.initial_state("saga", problem, 3, 0, y0_mode="gradients")
        assert np.allclose(y0, problem.D * x0[None, :] + problem.b, atol=1e-14)
        reg = simulate.generate_problem("sdca", "cvx", 0.1, 1.0, 5, 3, seed=2)
        x0, y0 = simulate.initial_state("sdca", reg, 3, 0, y0_mode="gradients")
        assert np.allclose(y0, -(reg.D * x0[None, :] + reg.b), atol=1e-14)
        with pytest.raises(ValueError):
            simulate.initial_state("saga", problem, 3, 0, y0_mode="warm")

    def test_component_sequence_is_deterministic_and_in_range(self):
        idx = simulate.component_indices(seed=4, trial=2, iters=200, n=7)
        again = simulate.component_indices(seed=4, trial=2, iters=200, n=7)
        other = simulate.component_indices(seed=4, trial=3, iters=200, n=7)
        assert np.array_equal(idx, again)
        assert not np.array_equal(idx, other)
        assert idx.min() >= 0 and idx.max() <= 6
        assert len(idx) == 200
        # long streams should visit every component
        assert len(np.unique(idx)) == 7


class TestTrajectories:
    def test_one_step_matches_the_matrix_form(self):
        problem = simulate.generate_problem("saga", "sc", 1.0, 1.0, 2, 1, seed=6)
        alpha = 0.1
        trace = simulate.run_method("saga", problem, alpha, iters=1, seed=5, trials=1)
        x0, y0 = simulate.initial_state("saga", problem, 5, 0)
        X0 = simulate.assemble_state("saga", y0, x0)
        idx = simulate.component_indices(5, 0, 1, 2)
        r = models.build_realization("saga", 2, alpha)
        expected = models.step_exact(r, X0, problem, int(idx[0]) + 1)
        assert np.allclose(trace.final_states[0], expected, atol=1e-12)

    @pytest.mark.parametrize("method,tag,alpha", [
        ("saga", "sc", 0.2), ("sag", "sc", 0.2),
        ("finito", "sc", 0.05), ("sdca", "cvx", 0.3)])
    def test_hundred_steps_match_the_matrix_form(self, method, tag, alpha):
        problem = simulate.generate_problem(method, tag, 0.1, 1.0, 7, 3, seed=13)
        trace = simulate.run_method(method, problem, alpha, iters=100, seed=9,
                                    trials=1, y0_mode="gradients")
        x0, y0 = simulate.initial_state(method, problem, 9, 0, y0_mode="gradients")
        if method == "finito":
            X = simulate.assemble_state(method, y0, np.tile(x0, (7, 1)))
        else:
            X = simulate.assemble_state(method, y0, x0)
        r = models.build_realization(method, 7, alpha,
                                     m=problem.ell2 if method == "sdca" else None)
        for i in simulate.component_indices(9, 0, 100, 7):
            X = models.step_exact(r, X, problem, int(i) + 1)
        assert np.max(np.abs(trace.final_states[0] - X)) <= 1e-9

    def test_dual_table_recursion_matches_fresh_resummation(self):
        problem = simulate.generate_problem("sdca", "cvx", 0.1, 1.0, 6, 2, seed=3)
        n, m = 6, problem.ell2
        alpha = 2.0 / (1.0 + 2.0 * m * n)
        trace = simulate.run_method("sdca", problem, alpha, iters=80, seed=12, trials=1)
        _, y = simulate.initial_state("sdca", problem, 12, 0)
        atld = alpha * m * n
        for i in simulate.component_indices(12, 0, 80, n):
            x = y.sum(axis=0) / (m * n)
            g = problem.D[i] * x + problem.b[i]
            y[i] = (1.0 - atld) * y[i] - atld * g
        assert np.max(np.abs(trace.final_states[0] - y)) <= 1e-12

    def test_zero_stepsize_freezes_the_iterate(self):
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 4, 2, seed=1)
        trace = simulate.run_method("saga", problem, 0.0, iters=30, seed=2, trials=3)
        assert np.all(trace.dist2 == trace.dist2[0])
        assert trace.dist2[0] > 0

    def test_zero_stepsize_fits_a_flat_rate(self):
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 4, 2, seed=1)
        trace = simulate.run_method("saga", problem, 0.0, iters=60, seed=2, trials=100)
        fit = simulate.empirical_rate(trace)
        assert abs(fit["decay"]) < 0.01
        assert fit["rho2"] is None and fit["envelope_ok"] is None

    def test_each_iteration_reads_one_component_row(self):
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 10, 2, seed=14)
        eq = models.equilibrium("saga", problem)
        idx = simulate.component_indices(0, 0, 25, 10)
        unused = sorted(set(range(10)) - set(int(i) for i in idx))
        assert unused, "need an unsampled component for this check"
        x0, y0 = simulate.initial_state("saga", problem, 0, 0)
        d = problem.D.copy()
        lin = problem.b.copy()
        d[unused] = np.nan
        lin[unused] = np.nan
        for corr in (1.0, 1.0 / 10.0):
            V, dist2, xi2, xf, yf = saga_trial(d, lin, eq.wstar, eq.xstar, x0,
                                               y0, idx, 0.2, corr, 1.0, 1.0)
            for arr in (V, dist2, xi2, xf):
                assert np.all(np.isfinite(arr))
        # poisoning a sampled row must propagate, proving the row is read
        d_hit = problem.D.copy()
        d_hit[int(idx[0])] = np.nan
        V, _, _, xf, _ = saga_trial(d_hit, problem.b, eq.wstar, eq.xstar, x0,
                                    y0, idx, 0.2, 1.0, 1.0, 1.0)
        assert not np.all(np.isfinite(xf))

    def test_each_iteration_reads_one_row_finito_and_dual(self):
        problem = simulate.generate_problem("finito", "sc", 0.1, 1.0, 10, 2, seed=15)
        eq = models.equilibrium("finito", problem)
        idx = simulate.component_indices(0, 0, 25, 10)
        unused = sorted(set(range(10)) - set(int(i) for i in idx))
        assert unused
        x0, y0 = simulate.initial_state("finito", problem, 0, 0)
        d = problem.D.copy()
        lin = problem.b.copy()
        d[unused] = np.nan
        lin[unused] = np.nan
        out = finito_trial(d, lin, eq.wstar, eq.xstar, np.tile(x0, (10, 1)), y0,
                           idx, 0.05, 1.0, 0.0, 0.0, 1.0, 0.0)
        for arr in out[:4]:
            assert np.all(np.isfinite(arr))
        reg = simulate.generate_problem("sdca", "cvx", 0.1, 1.0, 10, 2, seed=15)
        req = models.equilibrium("sdca", reg)
        _, ry0 = simulate.initial_state("sdca", reg, 0, 0)
        rd = reg.D.copy()
        rlin = reg.b.copy()
        rd[unused] = np.nan
        rlin[unused] = np.nan
        emn = reg.ell2 * 10
        out = sdca_trial(rd, rlin, req.wstar, req.xstar, ry0, idx, 0.3 * emn,
                         emn, 1.0, 0.0)
        for arr in out[:3]:
            assert np.all(np.isfinite(arr))

    def test_trial_batches_merge_associatively(self):
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 5, 2, seed=4)
        full = simulate.run_method("saga", problem, 0.2, iters=40, seed=7, trials=6)
        first = simulate.run_method("saga", problem, 0.2, iters=40, seed=7, trials=3)
        second = simulate.run_method("saga", problem, 0.2, iters=40, seed=7,
                                     trials=3, trial_offset=3)
        assert np.array_equal(full.lyapunov_trials[:3], first.lyapunov_trials)
        assert np.array_equal(full.lyapunov_trials[3:], second.lyapunov_trials)
        merged = 0.5 * (first.lyapunov + second.lyapunov)
        assert np.allclose(full.lyapunov, merged, rtol=0, atol=1e-14)

    def test_trace_shapes_and_nonnegativity(self):
        problem = simulate.generate_problem("finito", "sc", 0.5, 1.0, 8, 2, seed=2)
        trace = simulate.run_method("finito", problem, 0.02, iters=25, seed=1, trials=4)
        assert np.array_equal(trace.k, np.arange(26))
        assert trace.iters == 25 and trace.trials == 4
        assert np.all(trace.lyapunov >= 0)
        assert np.all(trace.lyapunov_trials >= 0)
        assert trace.V0 > 0
        assert np.array_equal(trace.trial_seeds[:, 1], np.arange(4))
        single = simulate.run_method("finito", problem, 0.02, iters=25, seed=1, trials=1)
        assert np.all(single.stderr == 0)

    def test_recorded_lyapunov_equals_the_structured_form(self):
        cert = certs.saga_certificate(strongly_convex(0.1, 1.0), 0.1, 1.0, 10, 1.0 / 3.0)
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 10, 3, seed=19)
        trace = simulate.run_method("saga", problem, cert.alpha, iters=30, seed=6,
                                    trials=2, certificate=cert, y0_mode="gradients")
        for tr in range(2):
            x0, y0 = simulate.initial_state("saga", problem, 6, tr, y0_mode="gradients")
            X0 = simulate.assemble_state("saga", y0, x0)
            v0 = direct_V(cert, problem, X0)
            assert abs(trace.lyapunov_trials[tr, 0] - v0) <= 1e-9 * max(1.0, v0)
            vend = direct_V(cert, problem, trace.final_states[tr])
            assert abs(trace.lyapunov_trials[tr, -1] - vend) <= 1e-9 * max(1.0, vend)

    def test_recorded_lyapunov_includes_the_cross_terms(self):
        cert = certs.finito_certificate(strongly_convex(1.0, 1.0), 1.0, 1.0, 8)
        problem = simulate.generate_problem("finito", "sc", 1.0, 1.0, 8, 2, seed=23)
        trace = simulate.run_method("finito", problem, cert.alpha, iters=40, seed=3,
                                    trials=1, certificate=cert, y0_mode="gradients")
        x0, y0 = simulate.initial_state("finito", problem, 3, 0, y0_mode="gradients")
        X0 = simulate.assemble_state("finito", y0, np.tile(x0, (8, 1)))
        v0 = direct_V(cert, problem, X0)
        assert v0 > 0
        assert abs(trace.lyapunov_trials[0, 0] - v0) <= 1e-9 * max(1.0, v0)
        vend = direct_V(cert, problem, trace.final_states[0])
        assert abs(trace.lyapunov_trials[0, -1] - vend) <= 1e-9 * max(1.0, vend)

    def test_certificate_compatibility_guards(self):
        cert = certs.saga_certificate(strongly_convex(0.1, 1.0), 0.1, 1.0, 10, 1.0 / 3.0)
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 10, 2, seed=1)
        with pytest.raises(ValueError):
            simulate.run_method("sag", problem, cert.alpha, 5, 0, 1, certificate=cert)
        small = simulate.generate_problem("saga", "sc", 0.1, 1.0, 6, 2, seed=1)
        with pytest.raises(ValueError):
            simulate.run_method("saga", small, cert.alpha, 5, 0, 1, certificate=cert)
        with pytest.raises(ValueError):
            simulate.run_method("saga", problem, 0.25, 5, 0, 1, certificate=cert)
        weaker = simulate.generate_problem("saga", "sc", 0.05, 1.0, 10, 2, seed=1)
        with pytest.raises(ValueError):
            simulate.run_method("saga", weaker, cert.alpha, 5, 0, 1, certificate=cert)
        rougher = simulate.generate_problem("saga", "cvx", 0.1, 1.0, 10, 2, seed=1)
        with pytest.raises(ValueError):
            simulate.run_method("saga", rougher, cert.alpha, 5, 0, 1, certificate=cert)
        reg = simulate.generate_problem("sdca", "cvx", 0.1, 1.0, 10, 2, seed=1)
        with pytest.raises(ValueError):
            simulate.run_method("saga", reg, cert.alpha, 5, 0, 1)

    def test_wider_class_certificate_covers_a_narrower_problem(self):
        cert = certs.saga_certificate(convex_smooth(1.0), 0.1, 1.0, 10, 1.0 / 3.0)
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 10, 2, seed=5)
        trace = simulate.run_method("saga", problem, cert.alpha, iters=10, seed=0,
                                    trials=1, certificate=cert)
        assert trace.rho2 == pytest.approx(cert.rho2)

    def test_certified_envelope_holds_along_the_run(self):
        cert = certs.saga_certificate(strongly_convex(0.1, 1.0), 0.1, 1.0, 10, 1.0 / 3.0)
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 10, 3, seed=11)
        trace = simulate.run_method("saga", problem, cert.alpha, iters=60, seed=8,
                                    trials=100, certificate=cert)
        rows = trace.to_rows()
        assert all(row[3] == "ok" for row in rows)
        fit = simulate.empirical_rate(trace)
        assert fit["envelope_ok"] is True and fit["envelope_violations"] == 0
        assert fit["state_envelope_ok"] is True
        assert fit["cond_P"] >= 1.0
        assert fit["decay"] <= fit["log_rho2"] + 0.01

    def test_rows_report_na_without_a_certificate(self):
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 4, 2, seed=1)
        trace = simulate.run_method("saga", problem, 0.2, iters=5, seed=0, trials=2)
        assert all(row[3] == "n/a" for row in trace.to_rows())

    def test_csv_export_roundtrips(self, tmp_path):
        cert = certs.saga_certificate(strongly_convex(0.1, 1.0), 0.1, 1.0, 6, 1.0 / 3.0)
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 6, 2, seed=2)
        trace = simulate.run_method("saga", problem, cert.alpha, iters=12, seed=1,
                                    trials=3, certificate=cert)
        path = tmp_path / "trace.csv"
        simulate.write_trace_csv(trace, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["k", "mean_V", "stderr_V", "envelope", "mean_dist2"]
        assert len(rows) == 14
        assert float(rows[1][1]) == pytest.approx(trace.V0, rel=1e-10)
        assert rows[1][3] in ("ok", "violated")

    def test_rate_fit_preconditions(self):
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 4, 2, seed=1)
        short = simulate.run_method("saga", problem, 0.2, iters=49, seed=0, trials=100)
        with pytest.raises(ValueError):
            simulate.empirical_rate(short)
        thin = simulate.run_method("saga", problem, 0.2, iters=50, seed=0, trials=99)
        with pytest.raises(ValueError):
            simulate.empirical_rate(thin)

    def test_rate_fit_rejects_a_trace_started_at_equilibrium(self):
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 4, 2, seed=1)
        trace = simulate.run_method("saga", problem, 0.2, iters=50, seed=0, trials=100)
        dead = replace(trace, lyapunov=np.zeros_like(trace.lyapunov))
        with pytest.raises(simulate.DegenerateTrace):
            simulate.empirical_rate(dead)


def _contraction_cases():
    sc, cvx, smooth = strongly_convex, convex_smooth, smooth_only
    return [
        ("saga", "sc", certs.saga_certificate(sc(0.1, 1.0), 0.1, 1.0, 10, 1.0 / 3.0)),
        ("saga", "cvx", certs.saga_certificate(cvx(1.0), 0.1, 1.0, 10, 1.0 / 3.0)),
        ("saga", "smooth", certs.saga_certificate(smooth(1.0), 0.5, 1.0, 12,
                                                  0.5 / 8.0)),
        ("sdca", "cvx", certs.sdca_certificate(cvx(1.0), 0.1, 1.0, 10,
                                               2.0 / (1.0 + 2.0))),
        ("sdca", "smooth", certs.sdca_certificate(smooth(1.0), 0.5, 1.0, 8,
                                                  0.5 / (1.0 + 0.25 * 8))),
        ("finito", "sc", certs.finito_certificate(sc(1.0, 1.0), 1.0, 1.0, 8)),
    ]


class TestOnestepContraction:
    @pytest.mark.parametrize("method,tag,cert", _contraction_cases())
    def test_certified_rates_contract_in_exact_expectation(self, method, tag, cert):
        problem = simulate.generate_problem(method, tag, cert.m, cert.L, cert.n,
                                            3, seed=31)
        states = simulate.sample_reachable_states(method, problem, cert.alpha,
                                                  80, seed=2)
        worst = simulate.check_onestep_contraction(cert, problem, states)
        assert worst <= 1e-9

    def test_equilibrium_state_shows_no_violation(self):
        cert = certs.saga_certificate(strongly_convex(0.1, 1.0), 0.1, 1.0, 6, 1.0 / 3.0)
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 6, 2, seed=3)
        eq = models.equilibrium("saga", problem)
        worst = simulate.check_onestep_contraction(cert, problem, [eq.xistar])
        assert worst <= 1e-15

    def test_a_lowered_rate_shows_violations(self):
        cert = certs.saga_certificate(strongly_convex(0.1, 1.0), 0.1, 1.0, 10, 1.0 / 3.0)
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 10, 3, seed=31)
        states = simulate.sample_reachable_states("saga", problem, cert.alpha,
                                                  60, seed=2)
        cheat = replace(cert, rho2=cert.rho2 - 0.05)
        assert simulate.check_onestep_contraction(cheat, problem, states) > 1e-9

    def test_contraction_guards(self):
        cert = certs.saga_certificate(strongly_convex(0.1, 1.0), 0.1, 1.0, 10, 1.0 / 3.0)
        small = simulate.generate_problem("saga", "sc", 0.1, 1.0, 6, 2, seed=3)
        with pytest.raises(ValueError):
            simulate.check_onestep_contraction(cert, small, [np.zeros((7, 2))])
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 10, 2, seed=3)
        with pytest.raises(ValueError):
            simulate.check_onestep_contraction(cert, problem, [])

    def test_state_sampler_is_deterministic_and_counts(self):
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 5, 2, seed=4)
        states = simulate.sample_reachable_states("saga", problem, 0.2, 37, seed=9)
        again = simulate.sample_reachable_states("saga", problem, 0.2, 37, seed=9)
        assert len(states) == 37
        assert all(s.shape == (6, 2) for s in states)
        assert all(np.array_equal(a, b) for a, b in zip(states, again))
        assert not np.array_equal(states[0], states[1])


class TestBackendAgreement:
    def test_numpy_fallback_reproduces_the_trajectory(self):
        problem = simulate.generate_problem("saga", "sc", 0.1, 1.0, 4, 2, seed=5)
        trace = simulate.run_method("saga", problem, 0.2, iters=15, seed=3, trials=2)
        script = (
            "import numpy as np\n"
            "from jumplmi import simulate\n"
            "problem = simulate.generate_problem('saga', 'sc', 0.1, 1.0, 4, 2, seed=5)\n"
            "trace = simulate.run_method('saga', problem, 0.2, iters=15, seed=3, trials=2)\n"
            "print(repr(trace.lyapunov.tolist()))\n"
        )
        out = subprocess.run([sys.executable, "-c", script], capture_output=True,
                             text=True,
                             env={**os.environ, "JUMPLMI_BACKEND": "numpy"})
        assert out.returncode == 0, out.stderr
        values = np.array(eval(out.stdout.strip()))
        assert np.allclose(values, trace.lyapunov, rtol=0, atol=1e-12)
