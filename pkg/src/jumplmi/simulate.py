"""Synthetic finite sums and trajectory simulation for the certified methods.

Problems are finite sums of diagonal quadratics, so every component gradient
costs O(p) and the minimizer is available in closed form. The generator pins
the averaged curvature to [m, L] exactly at both ends (two coordinates
permitting) while keeping each per-component entry inside the sector its
assumption allows. Trajectories run the methods' O(p) incremental updates
and record the certified Lyapunov function through its full structured
quadratic form, never a proxy norm. RNG is counter-based and keyed by
(seed, trial), so any trial is reproducible in isolation and trial batches
can be merged associatively.
"""

import csv

from dataclasses import dataclass

import numpy as np

from . import linalg, models
from ._kernels import finito_trial, saga_trial, sdca_trial
from .functions import (
    CONVEX_SMOOTH,
    SMOOTH_ONLY,
    STRONGLY_CONVEX,
    IndividualAssumption,
    convex_smooth,
    smooth_only,
    strongly_convex,
)
from .models import FINITO, SAG, SAGA, SDCA


class InfeasibleClass(ValueError):
    """No instance of the requested problem class exists."""


class DegenerateTrace(ValueError):
    """The trace starts at (or immediately collapses to) the equilibrium."""


_TAG_ALIASES = {"sc": STRONGLY_CONVEX, "cvx": CONVEX_SMOOTH,
                "smooth": SMOOTH_ONLY}
_TAG_ORDER = {STRONGLY_CONVEX: 0, CONVEX_SMOOTH: 1, SMOOTH_ONLY: 2}

# disjoint Philox key lanes: trials use 2*trial and 2*trial + 1, the
# generators below sit far above any realistic trial count
_PROBLEM_LANE = np.uint64(1) << np.uint64(62)
_STATE_LANE = (np.uint64(1) << np.uint64(62)) + np.uint64(1)

_IDENTITY_PARAMS = {SAGA: (1.0, 1.0), SAG: (1.0, 1.0),
                    FINITO: (1.0, 0.0, 0.0, 1.0, 0.0), SDCA: (1.0, 0.0)}


def _key(seed, lane):
    return np.array([np.uint64(seed), np.uint64(lane)], dtype=np.uint64)


def _rng(seed, lane):
    return np.random.Generator(np.random.Philox(key=_key(seed, lane)))


def assumption_from_tag(tag, m, L):
    """Build the per-component assumption from a tag or short alias."""
    t = str(tag).strip().lower()
    t = _TAG_ALIASES.get(t, t)
    if t == STRONGLY_CONVEX:
        return strongly_convex(m, L)
    if t == CONVEX_SMOOTH:
        return convex_smooth(L)
    if t == SMOOTH_ONLY:
        return smooth_only(L)
    raise ValueError("unknown assumption %r" % (tag,))


def _entry_range(tag, m, L):
    if tag == STRONGLY_CONVEX:
        return m, L
    if tag == CONVEX_SMOOTH:
        return 0.0, L
    return -L, L


@dataclass(frozen=True)
class QuadraticFiniteSum:
    """f_i(x) = 0.5 x' diag(D_i) x + b_i' x, plus an optional l2 term.

    D and b are (n, p); the l2 weight ell2 is positive exactly for problems
    meant for the regularized dual-table method, where the quadratic term
    m/2 ||x||^2 lives outside the f_i. xstar minimizes the full averaged
    objective and is exact by construction.
    """

    n: int
    p: int
    D: np.ndarray
    b: np.ndarray
    m: float
    L: float
    assumption: IndividualAssumption
    ell2: float
    xstar: np.ndarray

    def __post_init__(self):
        n, p = int(self.n), int(self.p)
        if n < 2:
            raise InfeasibleClass("need at least two components")
        if p < 1:
            raise ValueError("dimension p must be at least 1")
        m, L = float(self.m), float(self.L)
        if not m > 0:
            raise ValueError("m must be positive")
        if L < m:
            raise ValueError("need L >= m")
        ell2 = float(self.ell2)
        if ell2 < 0:
            raise ValueError("l2 weight cannot be negative")
        D = np.ascontiguousarray(self.D, dtype=float)
        b = np.ascontiguousarray(self.b, dtype=float)
        xstar = np.ascontiguousarray(self.xstar, dtype=float)
        if D.shape != (n, p) or b.shape != (n, p):
            raise ValueError("D and b must have shape (n, p)")
        if xstar.shape != (p,):
            raise ValueError("xstar must have shape (p,)")
        if not (np.all(np.isfinite(D)) and np.all(np.isfinite(b))
                and np.all(np.isfinite(xstar))):
            raise ValueError("problem data must be finite")
        if not isinstance(self.assumption, IndividualAssumption):
            raise ValueError("assumption must be an IndividualAssumption")
        tol = 1e-9 * max(1.0, L)
        lo, hi = _entry_range(self.assumption.tag, m, L)
        if D.min() < lo - tol or D.max() > hi + tol:
            raise InfeasibleClass("component curvature leaves [%g, %g]" % (lo, hi))
        dbar = D.mean(axis=0)
        if dbar.min() < m - tol or dbar.max() > L + tol:
            raise InfeasibleClass("averaged curvature leaves [m, L]")
        resid = (dbar + ell2) * xstar + b.mean(axis=0)
        scale = max(1.0, float(np.max(np.abs(b))), L * float(np.max(np.abs(xstar))))
        if np.max(np.abs(resid)) > 1e-9 * scale:
            raise ValueError("xstar is not stationary for the averaged objective")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "ell2", ell2)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "xstar", xstar)

    def component_grad(self, i, x):
        """Gradient of f_i at x; i is a 0-based component index."""
        return self.D[i] * np.asarray(x, dtype=float) + self.b[i]

    def average_grad(self, x):
        """Gradient of the full averaged objective, l2 term included."""
        x = np.asarray(x, dtype=float)
        return (self.D.mean(axis=0) + self.ell2) * x + self.b.mean(axis=0)


def _pinned_column(rng, n, lo, hi, target):
    # zero-mean spread around the target, shrunk until every entry fits
    u = rng.uniform(lo, hi, size=n)
    z = u - u.mean()
    cap = np.inf
    for zi in z:
        if zi > 0:
            cap = min(cap, (hi - target) / zi)
        elif zi < 0:
            cap = min(cap, (lo - target) / zi)
    s = min(1.0, cap) if np.isfinite(cap) else 1.0
    if s < 0:
        s = 0.0
    return target + s * z


def generate_problem(method, assumption, m, L, n, p, seed):
    """Random instance whose averaged curvature hits m and L exactly.

    The first coordinate's averaged curvature equals m, the second equals L
    (when p >= 2; p = 1 pins the m end only), all other coordinates land in
    between, and every per-component entry respects the assumption's sector.
    Linear terms come from random component centers, so with equal
    curvatures the minimizer is the mean of the centers.
    """
    method = models.normalize_method(method)
    m, L = float(m), float(L)
    n, p = int(n), int(p)
    if not m > 0:
        raise ValueError("m must be positive")
    if L < m:
        raise ValueError("need L >= m")
    if n < 2:
        raise InfeasibleClass("need at least two components")
    if p < 1:
        raise ValueError("dimension p must be at least 1")
    if isinstance(assumption, IndividualAssumption):
        a = assumption
        if not np.isclose(a.L, L, rtol=1e-9):
            raise ValueError("assumption L disagrees with L")
        if a.tag == STRONGLY_CONVEX and not np.isclose(a.m, m, rtol=1e-9):
            raise ValueError("assumption m disagrees with m")
    else:
        a = assumption_from_tag(assumption, m, L)
    # rejects combinations with no matching analysis (regularized + strongly
    # convex components), keeping generation aligned with the certificates
    models.make_profile(method, a, m, L)
    rng = _rng(int(seed), _PROBLEM_LANE)
    lo, hi = _entry_range(a.tag, m, L)
    targets = np.empty(p)
    targets[0] = m
    if p >= 2:
        targets[1] = L
    if p > 2:
        targets[2:] = rng.uniform(m, L, size=p - 2)
    D = np.empty((n, p))
    for j in range(p):
        D[:, j] = _pinned_column(rng, n, lo, hi, targets[j])
    if a.tag == SMOOTH_ONLY and n >= 3 and D.min() >= 0.0:
        cap = L * (n - 1) - n * m
        if cap > 0:
            # rebuild the m-pinned column with one negative curvature
            eps = 0.5 * min(L, cap)
            D[:, 0] = (n * m + eps) / (n - 1)
            D[0, 0] = -eps
    centers = rng.standard_normal((n, p))
    b = -D * centers
    ell2 = m if method == SDCA else 0.0
    dbar = D.mean(axis=0)
    xstar = (D * centers).mean(axis=0) / (dbar + ell2)
    return QuadraticFiniteSum(n=n, p=p, D=D, b=b, m=m, L=L, assumption=a,
                              ell2=ell2, xstar=xstar)


def component_indices(seed, trial, iters, n):
    """The trial's sampled component sequence, 0-based, from its own lane."""
    rng = _rng(int(seed), 2 * int(trial) + 1)
    return rng.integers(0, int(n), size=int(iters), dtype=np.int64)


def initial_state(method, problem, seed, trial, y0_mode="zeros"):
    """Per-trial start: x0 on the unit sphere around xstar, tables by mode.

    "zeros" leaves every table slot at zero; "gradients" fills slot i with
    the component gradient at x0 (negated for the dual-table method, whose
    equilibrium slots are negated gradients).
    """
    method = models.normalize_method(method)
    rng = _rng(int(seed), 2 * int(trial))
    raw = rng.standard_normal(problem.p)
    nrm = float(np.linalg.norm(raw))
    if nrm == 0.0:
        raw = np.ones(problem.p)
        nrm = float(np.sqrt(problem.p))
    x0 = problem.xstar + raw / nrm
    if y0_mode == "zeros":
        y0 = np.zeros((problem.n, problem.p))
    elif y0_mode == "gradients":
        y0 = problem.D * x0[None, :] + problem.b
        if method == SDCA:
            y0 = -y0
    else:
        raise ValueError("y0_mode must be 'zeros' or 'gradients'")
    return x0, y0


def assemble_state(method, y, xpart):
    """Stack per-method tables into the jump-system state (state_dim, p)."""
    method = models.normalize_method(method)
    y = np.asarray(y, dtype=float)
    if method == SDCA:
        return y.copy()
    xpart = np.asarray(xpart, dtype=float)
    if method == FINITO:
        return np.vstack([y, xpart])
    return np.vstack([y, xpart[None, :]])


def _check_method_problem(method, problem):
    if method != SDCA and problem.ell2 > 0:
        raise ValueError("problem has an l2 term this method does not see")


def _require_in_class(cert, problem):
    if _TAG_ORDER[problem.assumption.tag] > _TAG_ORDER[cert.assumption.tag]:
        raise ValueError("components satisfy %s but the certificate covers %s"
                         % (problem.assumption.tag, cert.assumption.tag))
    slack = 1.0 + 1e-9
    if cert.m > problem.m * slack:
        raise ValueError("averaged curvature sits below the certificate's m")
    if problem.L > cert.L * slack:
        raise ValueError("problem smoothness exceeds the certificate's L")
    if cert.method == SDCA and not np.isclose(problem.ell2, cert.m, rtol=1e-9):
        raise ValueError("l2 weight differs from the certificate's m")


def _weights_and_rate(method, problem, alpha, certificate):
    if certificate is None:
        return _IDENTITY_PARAMS[method], None, 1.0
    if models.normalize_method(certificate.method) != method:
        raise ValueError("certificate is for %s" % certificate.method)
    if int(certificate.n) != problem.n:
        raise ValueError("certificate covers n = %d components" % certificate.n)
    if not np.isclose(certificate.alpha, alpha, rtol=1e-12, atol=0.0):
        raise ValueError("run stepsize differs from the certificate's")
    _require_in_class(certificate, problem)
    Pt = certificate.P_params.expand(problem.n)
    eigs = linalg.eigenvalues_sym(linalg.SymMatrix(Pt))
    if eigs[0] <= 0:
        raise ValueError("certificate Lyapunov matrix is not positive definite")
    params = tuple(float(v) for v in certificate.P_params.params)
    return params, float(certificate.rho2), float(eigs[-1] / eigs[0])


@dataclass(frozen=True)
class SimulationTrace:
    """Aggregated Monte Carlo record of one (method, problem, alpha) run.

    lyapunov is the across-trial mean of the (certificate-weighted) Lyapunov
    value at every state; stderr fields are relative standard errors of the
    corresponding means. dist2 tracks the evaluation point C xi against
    xstar, xi2 the full state against its equilibrium.
    """

    method: str
    alpha: float
    y0_mode: str
    k: np.ndarray
    lyapunov: np.ndarray
    stderr: np.ndarray
    dist2: np.ndarray
    xi2: np.ndarray
    stderr_xi2: np.ndarray
    lyapunov_trials: np.ndarray
    trial_seeds: np.ndarray
    rho2: float = None
    cond_P: float = 1.0
    final_states: np.ndarray = None

    @property
    def iters(self):
        return len(self.k) - 1

    @property
    def trials(self):
        return self.trial_seeds.shape[0]

    @property
    def V0(self):
        return float(self.lyapunov[0])

    def to_rows(self):
        """(k, mean_V, stderr_V, envelope, mean_dist2) rows for export."""
        flags = _envelope_flags(self)
        rows = []
        for j in range(len(self.k)):
            if flags is None:
                env = "n/a"
            else:
                env = "ok" if flags[j] else "violated"
            rows.append((int(self.k[j]), float(self.lyapunov[j]),
                         float(self.stderr[j]), env, float(self.dist2[j])))
        return rows


def _envelope_flags(trace):
    if trace.rho2 is None:
        return None
    powers = trace.rho2 ** trace.k.astype(float)
    bound = powers * trace.V0 * (1.0 + 3.0 * trace.stderr)
    return trace.lyapunov <= bound * (1.0 + 1e-12) + 1e-300


def _relative_stderr(rows, means):
    trials = rows.shape[0]
    if trials < 2:
        return np.zeros_like(means)
    se = rows.std(axis=0, ddof=1) / np.sqrt(trials)
    return se / np.maximum(means, 1e-300)


def run_method(method, problem, alpha, iters, seed, trials, certificate=None,
               y0_mode="zeros", trial_offset=0):
    """Monte Carlo trajectories with exactly one component gradient each step.

    Trials are numbered trial_offset .. trial_offset + trials - 1 and each
    draws from its own keyed streams, so splitting a run into batches and
    averaging the batch means reproduces the single-run aggregate. When a
    certificate is supplied (matching method, n, stepsize, and a problem
    inside its class), the Lyapunov record uses the certificate's structured
    weights and the trace carries its rate for envelope checks.
    """
    method = models.normalize_method(method)
    alpha = float(alpha)
    iters, trials = int(iters), int(trials)
    seed, trial_offset = int(seed), int(trial_offset)
    if alpha < 0:
        raise ValueError("stepsize must be nonnegative")
    if iters < 1:
        raise ValueError("need at least one iteration")
    if trials < 1:
        raise ValueError("need at least one trial")
    if seed < 0 or trial_offset < 0:
        raise ValueError("seed and trial_offset must be nonnegative")
    _check_method_problem(method, problem)
    params, rho2, cond_P = _weights_and_rate(method, problem, alpha, certificate)
    eq = models.equilibrium(method, problem)
    n, p = problem.n, problem.p
    V_rows = np.empty((trials, iters + 1))
    d2_rows = np.empty((trials, iters + 1))
    xi_rows = np.empty((trials, iters + 1))
    dims = {SAGA: n + 1, SAG: n + 1, FINITO: 2 * n, SDCA: n}
    finals = np.empty((trials, dims[method], p))
    seeds = np.empty((trials, 2), dtype=np.int64)
    for tr in range(trials):
        trial = trial_offset + tr
        x0, y0 = initial_state(method, problem, seed, trial, y0_mode)
        idx = component_indices(seed, trial, iters, n)
        if method in (SAGA, SAG):
            corr = 1.0 if method == SAGA else 1.0 / n
            V, d2, xi2, xf, yf = saga_trial(problem.D, problem.b, eq.wstar,
                                            eq.xstar, x0, y0, idx, alpha,
                                            corr, params[0], params[1])
            finals[tr] = assemble_state(method, yf, xf)
        elif method == FINITO:
            xt0 = np.tile(x0, (n, 1))
            V, d2, xi2, xf, yf = finito_trial(problem.D, problem.b, eq.wstar,
                                              eq.xstar, xt0, y0, idx, alpha,
                                              params[0], params[1], params[2],
                                              params[3], params[4])
            finals[tr] = assemble_state(method, yf, xf)
        else:
            emn = problem.ell2 * n
            V, d2, xi2, yf = sdca_trial(problem.D, problem.b, eq.wstar,
                                        eq.xstar, y0, idx, alpha * emn, emn,
                                        params[0], params[1])
            finals[tr] = yf
        V_rows[tr] = V
        d2_rows[tr] = d2
        xi_rows[tr] = xi2
        seeds[tr] = (seed, trial)
    lyap = V_rows.mean(axis=0)
    xi2_mean = xi_rows.mean(axis=0)
    return SimulationTrace(method=method, alpha=alpha, y0_mode=y0_mode,
                           k=np.arange(iters + 1), lyapunov=lyap,
                           stderr=_relative_stderr(V_rows, lyap),
                           dist2=d2_rows.mean(axis=0), xi2=xi2_mean,
                           stderr_xi2=_relative_stderr(xi_rows, xi2_mean),
                           lyapunov_trials=V_rows, trial_seeds=seeds,
                           rho2=rho2, cond_P=cond_P, final_states=finals)


def write_trace_csv(trace, path):
    """Write (k, mean_V, stderr_V, envelope, mean_dist2) rows as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "mean_V", "stderr_V", "envelope", "mean_dist2"])
        for k, mv, se, env, md in trace.to_rows():
            writer.writerow([k, "%.12g" % mv, "%.12g" % se, env, "%.12g" % md])


def empirical_rate(trace):
    """Fitted decay of the mean Lyapunov value plus envelope verdicts.

    Requires at least 50 iterations and 100 trials. decay is the
    least-squares slope of log mean_V over the positive prefix; when the
    trace carries a certified rate the result also reports whether
    mean_V stayed below rho2^k V0 (1 + 3 stderr) at every k, and the same
    check on the state distance against the cond(P)-inflated envelope.
    """
    if trace.iters < 50:
        raise ValueError("need at least 50 iterations to fit a rate")
    if trace.trials < 100:
        raise ValueError("need at least 100 trials to fit a rate")
    vals = trace.lyapunov
    if vals[0] <= 0:
        raise DegenerateTrace("trace starts at the equilibrium")
    nonpos = np.nonzero(vals <= 0)[0]
    upto = int(nonpos[0]) if nonpos.size else len(vals)
    if upto < 2:
        raise DegenerateTrace("Lyapunov record collapsed immediately")
    slope = float(np.polyfit(trace.k[:upto].astype(float),
                             np.log(vals[:upto]), 1)[0])
    out = {"decay": slope, "iters": trace.iters, "trials": trace.trials,
           "V0": trace.V0, "cond_P": trace.cond_P, "rho2": trace.rho2,
           "log_rho2": None, "envelope_ok": None, "envelope_violations": None,
           "state_envelope_ok": None}
    if trace.rho2 is not None:
        flags = _envelope_flags(trace)
        powers = trace.rho2 ** trace.k.astype(float)
        state_bound = powers * trace.cond_P * float(trace.xi2[0]) \
            * (1.0 + 3.0 * trace.stderr_xi2)
        state_ok = trace.xi2 <= state_bound * (1.0 + 1e-12) + 1e-300
        out["log_rho2"] = float(np.log(trace.rho2))
        out["envelope_ok"] = bool(np.all(flags))
        out["envelope_violations"] = int(np.sum(~flags))
        out["state_envelope_ok"] = bool(np.all(state_ok))
    return out


def sample_reachable_states(method, problem, alpha, count, seed, steps=8):
    """States visited by exact matrix steps from random initializations.

    Initial tables alternate between zeros and gradients at x0; every state
    along each short rollout is collected, the initial one included.
    """
    method = models.normalize_method(method)
    _check_method_problem(method, problem)
    count = int(count)
    if count < 1:
        raise ValueError("need at least one state")
    r = models.build_realization(method, problem.n, alpha,
                                 m=problem.ell2 if method == SDCA else None)
    rng = _rng(int(seed), _STATE_LANE)
    out = []
    mode = 0
    while len(out) < count:
        raw = rng.standard_normal(problem.p)
        nrm = float(np.linalg.norm(raw))
        if nrm == 0.0:
            raw = np.ones(problem.p)
            nrm = float(np.sqrt(problem.p))
        x0 = problem.xstar + raw / nrm
        if mode % 2 == 0:
            y0 = np.zeros((problem.n, problem.p))
        else:
            y0 = problem.D * x0[None, :] + problem.b
            if method == SDCA:
                y0 = -y0
        if method == FINITO:
            X = assemble_state(method, y0, np.tile(x0, (problem.n, 1)))
        else:
            X = assemble_state(method, y0, x0)
        out.append(X.copy())
        for _ in range(int(steps)):
            if len(out) >= count:
                break
            i = int(rng.integers(1, problem.n + 1))
            X = models.step_exact(r, X, problem, i)
            out.append(X.copy())
        mode += 1
    return out[:count]


def check_onestep_contraction(certificate, problem, states):
    """Worst normalized one-step violation of E[V+] <= rho2 V over states.

    The conditional expectation is exact: every component's matrix step is
    applied with true gradients at the state's evaluation point, and V is
    the certificate's structured quadratic form. Returns
    max over states of (E[V+] - rho2 V) / max(1, V); a verified certificate
    should keep this below roundoff on any problem inside its class.
    """
    method = models.normalize_method(certificate.method)
    if int(certificate.n) != problem.n:
        raise ValueError("certificate covers n = %d components" % certificate.n)
    _check_method_problem(method, problem)
    _require_in_class(certificate, problem)
    r = models.build_realization(method, problem.n, certificate.alpha,
                                 m=problem.ell2 if method == SDCA else None)
    eq = models.equilibrium(method, problem)
    Pt = certificate.P_params.expand(problem.n)
    stacked = [np.asarray(s, dtype=float).reshape(r.state_dim, problem.p)
               for s in states]
    if not stacked:
        raise ValueError("need at least one state")
    X = np.stack(stacked)
    Xt = X - eq.xistar[None, :, :]
    V = np.sum(Xt * np.matmul(Pt, Xt), axis=(1, 2))
    v = np.tensordot(X, r.C, axes=([1], [0]))
    W = problem.D[None, :, :] * v[:, None, :] + problem.b[None, :, :]
    EV = np.zeros(X.shape[0])
    for i in range(1, problem.n + 1):
        Xp = np.matmul(r.A(i), X) + np.matmul(r.B(i), W)
        Xpt = Xp - eq.xistar[None, :, :]
        EV += np.sum(Xpt * np.matmul(Pt, Xpt), axis=(1, 2))
    EV /= problem.n
    viol = (EV - certificate.rho2 * V) / np.maximum(1.0, V)
    return float(np.max(viol))
