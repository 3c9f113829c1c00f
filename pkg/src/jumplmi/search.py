"""Numerical rate search over the feasibility conditions.

feasible_at asks whether any structured Lyapunov/multiplier point certifies
a given contraction factor, by multi-start Nelder-Mead over the small
scalar parametrization (4 decision scalars for saga/sag/sdca, 7 for
finito). bisect_rate wraps it in a bisection over rho2. Absence of a
witness is a one-sided verdict: the search can prove feasibility by
exhibiting a point but can never prove infeasibility.

Known analytical certificate points are always injected as one of the
restarts, so the bisection result never falls behind the closed-form rate.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import certificates, linalg, lmi
from .functions import strongly_convex
from .models import FINITO, SAG, SAGA, SDCA, build_realization, make_profile, normalize_method

BAD_POINT = 1e6


class Infeasible:
    """Marker value: no contraction witness was found at any rho2 <= 1."""

    __slots__ = ()

    def __repr__(self):
        return "Infeasible"

    def __eq__(self, other):
        return isinstance(other, Infeasible)

    def __hash__(self):
        return hash("Infeasible")


INFEASIBLE = Infeasible()


@dataclass(frozen=True)
class SearchConfig:
    rho2_tol: float = 1e-6
    feas_tol: float = 1e-9
    restarts: int = 16
    max_evals: int = 2000
    seed: int = 0

    def __post_init__(self):
        if self.rho2_tol <= 0 or self.feas_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.restarts < 1:
            raise ValueError("need at least one restart")
        if self.max_evals < self.restarts:
            raise ValueError("need max_evals >= restarts")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass
class FeasibilityOutcome:
    rho2: float
    witness: dict        # None when nothing reached feas_tol
    objective: float     # best normalized objective seen
    evals: int
    restarts: list       # per-restart diagnostics

    @property
    def found(self):
        return self.witness is not None


@dataclass
class SearchResult:
    method: str
    assumption_tag: str
    m: float
    L: float
    n: int
    alpha: float
    rho2_best: object    # float, or INFEASIBLE
    witness: dict
    evals: int
    history: list        # one row per probed rho2
    config: SearchConfig

    @property
    def status(self):
        return "infeasible" if isinstance(self.rho2_best, Infeasible) else "feasible"


def _ndim(method):
    return 7 if method == FINITO else 4


def _z_to_point(method, z, n):
    """Map an unconstrained vector to normalized structured parameters.

    Squared slots keep the sign-constrained scalars in range; the largest
    Lyapunov parameter is scaled to magnitude one, which is free by the
    joint homogeneity of the conditions.
    """
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        return None
    if method == FINITO:
        params = (z[0]**2, z[1], z[2], z[3]**2, z[4])
        lam = (z[5]**2, z[6]**2)
    elif method == SDCA:
        p1 = z[0]**2
        params = (p1, (z[1]**2 - p1) / n)
        lam = (z[2]**2, z[3]**2)
    else:
        params = (z[0]**2, z[1]**2)
        lam = (z[2]**2, z[3]**2)
    scale = max(abs(v) for v in params)
    if not np.isfinite(scale) or scale <= 0:
        return None
    params = tuple(v / scale for v in params)
    lam = (lam[0] / scale, lam[1] / scale)
    try:
        return lmi.StructuredP(method, params), lmi.MultiplierPair(*lam)
    except ValueError:
        return None


def _point_to_z(method, sp, mult, n):
    p = sp.params
    l1, l2 = np.sqrt(mult.lambda1), np.sqrt(mult.lambda2)
    if method == FINITO:
        return np.array([np.sqrt(p[0]), p[1], p[2], np.sqrt(p[3]), p[4], l1, l2])
    if method == SDCA:
        return np.array([np.sqrt(p[0]), np.sqrt(p[0] + n * p[1]), l1, l2])
    return np.array([np.sqrt(p[0]), np.sqrt(p[1]), l1, l2])


def _witness_dict(method, sp, mult, rho2):
    return {"method": method, "rho2": rho2,
            "P_params": list(sp.params),
            "lambdas": [mult.lambda1, mult.lambda2]}


def witness_point(witness):
    """Rebuild (StructuredP, MultiplierPair) from a witness record."""
    sp = lmi.StructuredP(witness["method"], tuple(witness["P_params"]))
    return sp, lmi.MultiplierPair(*witness["lambdas"])


def _margins_at(method, a, n, alpha, rho2, m, point, r):
    sp, mult = point
    if method == SAG:
        full = lmi.full_lmi(r, a, rho2, sp.expand(n), mult)
        nsd_scaled = [linalg.scaled_max_eig(full)]
        nsd_raw = [float(max(linalg.eigenvalues_sym(full)))]
        pd_scaled = [linalg.scaled_min_eig(linalg.SymMatrix(b))
                     for b in sp.pd_constraint_blocks(n)]
    else:
        bundle = lmi.reduced_bundle(method, a, n, alpha, sp, mult, rho2,
                                    m=m if method == SDCA else None)
        mg = lmi.bundle_margins(bundle)
        nsd_scaled = mg["nsd_max_scaled_eig"]
        nsd_raw = [float(max(linalg.eigenvalues_sym(b))) for b in bundle.nsd_blocks]
        pd_scaled = mg["pd_min_scaled_eig"]
    return nsd_scaled, nsd_raw, pd_scaled


def feasible_at(method, assumption, m, L, n, alpha, rho2, config=None, starts=()):
    """Search for a witness certifying rho2; one-sided verdict.

    starts is a sequence of (kind, (StructuredP, MultiplierPair)) pairs
    tried before the random restarts; they count against config.restarts.
    """
    method = normalize_method(method)
    config = config or SearchConfig()
    a = make_profile(method, assumption, m, L)
    r = build_realization(method, n, alpha) if method == SAG else None
    pd_target = 2.0 * config.feas_tol

    def objective(z):
        point = _z_to_point(method, z, n)
        if point is None:
            return BAD_POINT
        try:
            nsd_scaled, _, pd_scaled = _margins_at(method, a, n, alpha, rho2,
                                                   m, point, r)
        except (ValueError, linalg.InvalidMatrix):
            return BAD_POINT
        return max(max(nsd_scaled), max(pd_target - v for v in pd_scaled))

    plan = [(kind, _point_to_z(method, sp, mult, n))
            for kind, (sp, mult) in starts]
    for i in range(len(plan), config.restarts):
        gen = np.random.Generator(
            np.random.Philox(key=np.array([config.seed, i], dtype=np.uint64)))
        plan.append(("random", gen.uniform(-1.5, 1.5, _ndim(method))))
    plan = plan[:config.restarts]

    budget = max(20, config.max_evals // config.restarts)
    best_obj, best_z = BAD_POINT, None
    evals = 0
    diags = []
    witness = None
    for i, (kind, z0) in enumerate(plan):
        v0 = objective(z0)
        evals += 1
        if v0 <= config.feas_tol:
            best_obj, best_z = v0, np.asarray(z0, dtype=float)
            diags.append({"restart": i, "kind": kind, "evals": 1,
                          "objective": float(v0),
                          "objective_raw": _raw_at(method, a, n, alpha, rho2,
                                                   m, best_z, r)})
            witness = best_z
            break
        res = optimize.minimize(objective, z0, method="Nelder-Mead",
                                options={"maxfev": budget, "xatol": 1e-10,
                                         "fatol": 1e-13, "disp": False})
        evals += int(res.nfev)
        diags.append({"restart": i, "kind": kind, "evals": int(res.nfev),
                      "objective": float(res.fun),
                      "objective_raw": _raw_at(method, a, n, alpha, rho2, m,
                                               res.x, r)})
        if res.fun < best_obj:
            best_obj, best_z = float(res.fun), res.x
        if best_obj <= config.feas_tol:
            witness = best_z
            break
    record = None
    if witness is not None:
        sp, mult = _z_to_point(method, witness, n)
        record = _witness_dict(method, sp, mult, rho2)
    return FeasibilityOutcome(rho2=rho2, witness=record,
                              objective=float(best_obj), evals=evals,
                              restarts=diags)


def _raw_at(method, a, n, alpha, rho2, m, z, r):
    point = _z_to_point(method, z, n)
    if point is None:
        return float("inf")
    try:
        _, nsd_raw, _ = _margins_at(method, a, n, alpha, rho2, m, point, r)
    except (ValueError, linalg.InvalidMatrix):
        return float("inf")
    return max(nsd_raw)


def reference_certificate(method, assumption, m, L, n, alpha):
    """The analytical certificate for these inputs, or None."""
    try:
        return certificates.certificate_for(method, assumption, m, L, n,
                                            alpha=alpha)
    except (ValueError, RuntimeError):
        return None


def bisect_rate(method, assumption, m, L, n, alpha, config=None, reference=None):
    """Smallest certifiable rho2, up to rho2_tol, by bisection.

    The upper endpoint must witness or the whole search is Infeasible.
    Witnesses are chained as warm starts, and the analytical certificate
    point (when one exists) rides along as a restart in every probe, so
    rho2_best never exceeds the closed-form rate by more than rho2_tol.
    """
    method = normalize_method(method)
    config = config or SearchConfig()
    if reference is None:
        reference = reference_certificate(method, assumption, m, L, n, alpha)
    inject = []
    if reference is not None:
        inject.append(("injected", (reference.P_params, reference.mult)))

    history = []
    state = {"evals": 0}

    def probe(rho2, warm):
        starts = list(inject)
        if warm is not None:
            starts.append(("warm", witness_point(warm)))
        out = feasible_at(method, assumption, m, L, n, alpha, rho2,
                          config=config, starts=starts)
        state["evals"] += out.evals
        history.append({"rho2": rho2, "found": out.found,
                        "objective": out.objective, "evals": out.evals,
                        "restarts": out.restarts})
        return out

    top = probe(1.0, None)
    if not top.found:
        return SearchResult(method=method, assumption_tag=assumption.tag,
                            m=m, L=L, n=n, alpha=alpha,
                            rho2_best=INFEASIBLE, witness=None,
                            evals=state["evals"], history=history,
                            config=config)
    hi, wit = 1.0, top.witness
    lo = max(0.0, 1.0 - 4.0 / n)
    if lo > 0.0:
        out = probe(lo, wit)
        if out.found:
            hi, wit = lo, out.witness
            lo = 0.0
    while hi - lo > config.rho2_tol:
        mid = 0.5 * (lo + hi)
        out = probe(mid, wit)
        if out.found:
            hi, wit = mid, out.witness
        else:
            lo = mid
    return SearchResult(method=method, assumption_tag=assumption.tag,
                        m=m, L=L, n=n, alpha=alpha, rho2_best=hi,
                        witness=wit, evals=state["evals"], history=history,
                        config=config)


def sag_published_rho2(m, L, n):
    """Contraction factor matching the classical sag analysis."""
    return 1.0 - min(m / (16.0 * L), 1.0 / (8.0 * n))


def sag_probe(m, L, n, alpha=None, rho2_grid=None, config=None):
    """Scan rho2 values for sag witnesses under the block-diagonal shape.

    Uses the full feasibility matrix (sag has no reduced form). A row with
    witness_found False means the search came up empty, not a proof of
    infeasibility; the objective column records how close it got. Warm
    starts chain upward through the grid, so found flags are monotone in
    rho2.
    """
    if not (m > 0 and L >= m and n >= 2):
        raise ValueError("need 0 < m <= L and n >= 2")
    config = config or SearchConfig()
    if alpha is None:
        alpha = 1.0 / (16.0 * L)
    published = sag_published_rho2(m, L, n)
    if rho2_grid is None:
        gap = 1.0 - published
        rho2_grid = [published, published + 0.25 * gap, published + 0.5 * gap,
                     published + 0.9 * gap, 1.0]
    rho2_grid = sorted(float(v) for v in rho2_grid)
    if any(not 0.0 <= v <= 1.0 for v in rho2_grid):
        raise ValueError("rho2 grid values must lie in [0, 1]")
    assumption = strongly_convex(m, L)
    rows = []
    warm = None
    for rho2 in rho2_grid:
        starts = [("warm", witness_point(warm))] if warm is not None else []
        out = feasible_at(SAG, assumption, m, L, n, alpha, rho2,
                          config=config, starts=starts)
        rows.append({"rho2": rho2, "witness_found": out.found,
                     "objective": out.objective, "evals": out.evals,
                     "witness": out.witness})
        if out.found:
            warm = out.witness
    return {"method": SAG, "m": m, "L": L, "n": n, "alpha": alpha,
            "published_rho2": published, "rows": rows}
