"""Closed-form rate certificates.

Each constructor evaluates an analytical contraction-rate formula for one
method under one individual-component assumption, pairs it with the known
feasible Lyapunov/multiplier point, and re-verifies the induced LMI bundle
before returning. A certificate is therefore both a rate claim and a
checkable witness.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import linalg, lmi
from .functions import (CONVEX_SMOOTH, SMOOTH_ONLY, STRONGLY_CONVEX,
                        IndividualAssumption, convex_smooth, smooth_only,
                        strongly_convex)
from .models import FINITO, SAGA, SDCA, build_realization, make_profile, normalize_method


class StepsizeOutOfRange(ValueError):
    """Stepsize outside the statement's admissible range."""


class BOutOfRange(ValueError):
    """Free parameter b outside the statement's admissible range."""


class BigDataConditionViolated(ValueError):
    """n below the statement's component-count threshold."""


class UnsupportedAssumption(ValueError):
    """No certificate exists for this method/assumption combination."""


class DegenerateRate(ValueError):
    """The rate formula gives rho2 >= 1 (or <= 0) at these inputs."""


VERIFY_TOL = 1e-8
UNIT_FRO_TOL = 1e-7


@dataclass(frozen=True)
class RateCertificate:
    method: str
    assumption: IndividualAssumption
    m: float
    L: float
    n: int
    alpha: float
    rho2: float
    P_params: lmi.StructuredP
    mult: lmi.MultiplierPair
    lyapunov_weights: dict
    provenance: str
    free_param_b: float = None
    verified: bool = False

    @property
    def profile(self):
        return make_profile(self.method, self.assumption, self.m, self.L)

    def bundle(self):
        return lmi.reduced_bundle(self.method, self.profile, self.n, self.alpha,
                                  self.P_params, self.mult, self.rho2,
                                  m=self.m if self.method == SDCA else None)


def _normalized(cert):
    """Rescale (P, lambda) so the largest P parameter is 1.

    The feasibility matrices are jointly homogeneous in (P, lambda), so the
    verdict is unchanged; verifying at this scale keeps the roundoff left in
    analytically-cancelling blocks proportional to the tolerances instead of
    to extreme parameter magnitudes (boundary-stepsize points reach 1/alpha^2
    and beyond). The search breaks homogeneity the same way.
    """
    s = max(abs(v) for v in cert.P_params.params)
    if not np.isfinite(s) or s <= 0.0 or s == 1.0:
        return cert
    params = tuple(v / s for v in cert.P_params.params)
    mult = lmi.MultiplierPair(cert.mult.lambda1 / s, cert.mult.lambda2 / s)
    return replace(cert, P_params=lmi.StructuredP(cert.method, params),
                   mult=mult)


def _unit_fro_max_eigs(blocks):
    out = []
    for b in blocks:
        fro = linalg.frobenius(b.entries)
        top = max(linalg.eigenvalues_sym(b))
        if fro <= 1e-9 or top <= 1e-10:
            # boundary-stepsize points cancel whole blocks, or a block's
            # top eigenvalue, analytically; what survives is roundoff from
            # the cancelled intermediates. At the normalized scale (largest
            # P parameter = 1) anything this small is noise, and the scaled
            # test still caps its raw eigenvalue, so calling it compliant
            # loses nothing.
            out.append(0.0)
        else:
            out.append(float(top / fro))
    return out


def verify_certificate(cert, tol=VERIFY_TOL):
    """Re-evaluate the certificate's reduced bundle.

    Returns a report with the scaled extreme eigenvalue of every block;
    feasible means every NSD block passes both the relative test and the
    unit-Frobenius absolute test, and every positivity block passes.
    """
    cert = _normalized(cert)
    bundle = cert.bundle()
    margins = lmi.bundle_margins(bundle)
    unit_fro = _unit_fro_max_eigs(bundle.nsd_blocks)
    feasible = (all(v <= tol for v in margins["nsd_max_scaled_eig"])
                and all(v <= UNIT_FRO_TOL for v in unit_fro)
                and all(v >= tol for v in margins["pd_min_scaled_eig"]))
    return {
        "feasible": bool(feasible),
        "label": bundle.label,
        "nsd_max_scaled_eig": margins["nsd_max_scaled_eig"],
        "nsd_max_eig_unit_fro": unit_fro,
        "pd_min_scaled_eig": margins["pd_min_scaled_eig"],
    }


def verify_certificate_full(cert, tol=VERIFY_TOL):
    """Cross-check against the unreduced feasibility matrix."""
    cert = _normalized(cert)
    r = build_realization(cert.method, cert.n, cert.alpha,
                          cert.m if cert.method == SDCA else None)
    full = lmi.full_lmi(r, cert.profile, cert.rho2,
                        cert.P_params.expand(cert.n), cert.mult)
    pd_blocks = cert.P_params.pd_constraint_blocks(cert.n)
    top = linalg.scaled_max_eig(full)
    pd_ok = all(linalg.is_pd(linalg.SymMatrix(b), tol) for b in pd_blocks)
    return {"feasible": bool(top <= tol and pd_ok),
            "full_max_scaled_eig": top,
            "dimension": full.dim}


def _finish(cert):
    report = verify_certificate(cert)
    if not report["feasible"]:
        raise RuntimeError("certificate failed self-verification: %r" % (report,))
    if cert.method == FINITO:
        # the scalar sufficient conditions must also admit the point
        p = cert.P_params.params
        relaxed = lmi.finito_relaxed(cert.profile, cert.n, cert.alpha,
                                     p[0], p[3], cert.mult, cert.rho2)
        if not lmi.bundle_feasible(relaxed, VERIFY_TOL):
            raise RuntimeError("relaxed conditions rejected a certificate point")
    return replace(cert, verified=True)


def _check_rho2(t):
    rho2 = 1.0 - t
    if not 0.0 < rho2 < 1.0:
        raise DegenerateRate("rate formula gives rho2 = %.6g; pick other inputs"
                             % rho2)
    return rho2


def _validate_common(m, L, n, alpha):
    if not (m > 0 and L >= m):
        raise ValueError("need 0 < m <= L")
    if int(n) != n or n < 2:
        raise ValueError("need integer n >= 2")
    if alpha <= 0:
        raise StepsizeOutOfRange("need alpha > 0")
    return float(m), float(L), int(n), float(alpha)


def saga_statement1_variants(m, L, n, alpha):
    """Both strongly convex rate variants admissible at this stepsize."""
    m, L, n, alpha = _validate_common(m, L, n, alpha)
    if alpha > 1 / (2 * L):
        raise StepsizeOutOfRange("strongly convex case needs alpha <= 1/(2*L)")
    assumption = strongly_convex(m, L)
    out = []
    t_a = min((2 * L * alpha - 1) / ((L * alpha - 1) * n),
              2 * m * alpha - alpha * m**2 / ((1 - L * alpha) * L))
    try:
        rho2 = _check_rho2(t_a)
    except DegenerateRate:
        rho2 = None
    if rho2 is not None:
        p1, p2 = 1 / L, 1 / alpha
        out.append(RateCertificate(
            method=SAGA, assumption=assumption, m=m, L=L, n=n, alpha=alpha,
            rho2=rho2, P_params=lmi.StructuredP(SAGA, (p1, p2)),
            mult=lmi.MultiplierPair(0.0, 1 / L),
            lyapunov_weights={"dist2": 1.0, "gradient_table": p1 / p2},
            provenance="saga strongly-convex, variant a"))
    if alpha <= 4 / (9 * L):
        t_b = min((9 * L * alpha - 4) / ((3 * L * alpha - 4) * n),
                  2 * m * alpha - 3 * alpha * m**2 / ((4 - 3 * L * alpha) * L))
        try:
            rho2 = _check_rho2(t_b)
        except DegenerateRate:
            rho2 = None
        if rho2 is not None:
            p1, p2 = 2 / (3 * L), 1 / alpha
            out.append(RateCertificate(
                method=SAGA, assumption=assumption, m=m, L=L, n=n, alpha=alpha,
                rho2=rho2, P_params=lmi.StructuredP(SAGA, (p1, p2)),
                mult=lmi.MultiplierPair(0.0, 1 / L),
                lyapunov_weights={"dist2": 1.0, "gradient_table": p1 / p2},
                provenance="saga strongly-convex, variant b"))
    if not out:
        raise DegenerateRate("both strongly convex rate variants degenerate "
                             "at alpha = %.6g" % alpha)
    return [_finish(c) for c in out]


def saga_certificate(assumption, m, L, n, alpha, b=None):
    """SAGA rate certificate for the given individual-component assumption.

    For strongly convex components two rate variants exist; the one with
    the smaller rho2 is returned (saga_statement1_variants exposes both).
    """
    m, L, n, alpha = _validate_common(m, L, n, alpha)
    tag = assumption.tag

    if tag == STRONGLY_CONVEX:
        if b is not None:
            raise BOutOfRange("the strongly convex case takes no free parameter b")
        variants = saga_statement1_variants(m, L, n, alpha)
        return min(variants, key=lambda c: c.rho2)

    if tag == CONVEX_SMOOTH:
        if alpha > 1 / (2 * L):
            raise StepsizeOutOfRange("convex-smooth case needs alpha <= 1/(2*L)")
        if b is None:
            b = max(2 * L * alpha, min(1.0, 5.0 / 6.0))
            note = " (default b)"
        else:
            note = ""
        if not 2 * L * alpha <= b <= 1.0:
            raise BOutOfRange("need b in [2*L*alpha, 1], got %.6g" % b)
        t = min((2 * L * alpha - b) / ((L * alpha - b) * n),
                2 * (1 - b) * m * alpha
                - m**2 * (1 - b)**2 * alpha / ((2 - b - L * alpha) * L))
        rho2 = _check_rho2(t)
        p1, p2 = b / L, 1 / alpha
        cert = RateCertificate(
            method=SAGA, assumption=assumption, m=m, L=L, n=n, alpha=alpha,
            rho2=rho2, P_params=lmi.StructuredP(SAGA, (p1, p2)),
            mult=lmi.MultiplierPair((1 - b) / L, b / L),
            lyapunov_weights={"dist2": 1.0, "gradient_table": p1 / p2},
            provenance="saga convex-smooth%s" % note, free_param_b=b)
        return _finish(cert)

    if tag == SMOOTH_ONLY:
        if alpha > 3 * m / (8 * L**2):
            raise StepsizeOutOfRange("smooth-only case needs alpha <= 3*m/(8*L**2)")
        b_max = 3 * m / (4 * alpha * L**2)
        if b is None:
            b = min(3.0, b_max)
            note = " (default b)"
        else:
            note = ""
        if not 2.0 <= b <= b_max:
            raise BOutOfRange("need b in [2, 3*m/(4*alpha*L**2)], got %.6g" % b)
        t = min((b - 2) / ((b - 1) * n),
                1.5 * m * alpha - 2 * b * L**2 * alpha**2)
        rho2 = _check_rho2(t)
        # Lyapunov parameter linear in the stepsize; the quadratic-in-alpha
        # variant fails the trailing diagonal test, while the resulting
        # table weight p1/p2 is still quadratic in alpha.
        p1, p2 = b * alpha, 1 / alpha
        cert = RateCertificate(
            method=SAGA, assumption=assumption, m=m, L=L, n=n, alpha=alpha,
            rho2=rho2, P_params=lmi.StructuredP(SAGA, (p1, p2)),
            mult=lmi.MultiplierPair(1 / L, b * alpha),
            lyapunov_weights={"dist2": 1.0, "gradient_table": p1 / p2},
            provenance="saga smooth-only%s; stepsize-linear Lyapunov weight "
                       "verified against the quadratic candidate" % note,
            free_param_b=b)
        return _finish(cert)

    raise UnsupportedAssumption("unknown assumption tag %r" % tag)


def saga_remark1_certificate(assumption, m, L, n):
    """Recovered literature rates at the classical SAGA stepsizes."""
    m, L, n, _ = _validate_common(m, L, n, 1.0)
    tag = assumption.tag
    s = m * n + L
    if tag == STRONGLY_CONVEX:
        alpha = 1 / (2 * s)
        if L >= 2 * m:
            cert = saga_certificate(assumption, m, L, n, alpha)
            cert = replace(cert, provenance="saga recovered strongly-convex, "
                                            "large-ratio branch")
            bound = 1 - m / s + m**2 / ((L + 2 * m * n) * L)
            if cert.rho2 > bound + 1e-12:
                raise RuntimeError("recovered-rate branch exceeds its bound")
            return _finish(cert)
        t = min((15 * m * n - L) / (n * (15 * m * n + 9 * L)),
                m / s - 2 * m**2 / ((3 * L + 5 * m * n) * L))
        rho2 = _check_rho2(t)
        p2 = 1 / alpha
        lam2 = 1 / L
        p1 = 0.75 * lam2
        cert = RateCertificate(
            method=SAGA, assumption=assumption, m=m, L=L, n=n, alpha=alpha,
            rho2=rho2, P_params=lmi.StructuredP(SAGA, (p1, p2)),
            mult=lmi.MultiplierPair(0.0, lam2),
            lyapunov_weights={"dist2": 1.0, "gradient_table": p1 / p2},
            provenance="saga recovered strongly-convex, small-ratio branch")
        return _finish(cert)
    if tag == CONVEX_SMOOTH:
        alpha = 1 / (3 * s)
        cert = saga_certificate(assumption, m, L, n, alpha, b=2.0 / 3.0)
        return _finish(replace(cert, provenance="saga recovered convex-smooth"))
    raise UnsupportedAssumption("no recovered rate for smooth-only components")


FINITO_THRESHOLDS = {
    STRONGLY_CONVEX: ("n >= sqrt(50*L/m)", lambda m, L: math.sqrt(50 * L / m)),
    CONVEX_SMOOTH: ("n >= sqrt(64*L/m)", lambda m, L: math.sqrt(64 * L / m)),
    SMOOTH_ONLY: ("n >= 48*L**2/m**2", lambda m, L: 48 * L**2 / m**2),
}


def finito_stepsize(tag, m, L, n):
    if tag == STRONGLY_CONVEX:
        return 1 / (5 * L)
    if tag == CONVEX_SMOOTH:
        return 1 / (8 * L)
    return 1 / (2 * n * m)


def finito_certificate(assumption, m, L, n):
    """Finito certificate; the stepsize is fixed by the statement."""
    m, L, n, _ = _validate_common(m, L, n, 1.0)
    tag = assumption.tag
    if tag not in FINITO_THRESHOLDS:
        raise UnsupportedAssumption("unknown assumption tag %r" % tag)
    name, threshold = FINITO_THRESHOLDS[tag]
    if n < threshold(m, L):
        raise BigDataConditionViolated(
            "big data condition %s violated (threshold %.4g, got n=%d)"
            % (name, threshold(m, L), n))
    alpha = finito_stepsize(tag, m, L, n)
    if tag == STRONGLY_CONVEX:
        rho2 = _check_rho2(min(1 / (2 * n), m / (20 * L)))
        p1, p4 = alpha / L, 0.5 * m * alpha
        mult = lmi.MultiplierPair(0.0, alpha / L)
    elif tag == CONVEX_SMOOTH:
        rho2 = _check_rho2(min(1 / (3 * n), 5 * m / (176 * L)))
        p1, p4 = alpha / (2 * L), 0.5 * m * alpha
        mult = lmi.MultiplierPair(alpha / (2 * L), alpha / (2 * L))
    else:
        rho2 = _check_rho2(1 / (3 * n))
        p1, p4 = 4 * alpha**2, 0.75 * m * alpha
        mult = lmi.MultiplierPair(alpha / L, 4 * alpha**2)
    p2, p3, p5 = lmi.finito_slice(alpha, n)
    cert = RateCertificate(
        method=FINITO, assumption=assumption, m=m, L=L, n=n, alpha=alpha,
        rho2=rho2, P_params=lmi.StructuredP(FINITO, (p1, p2, p3, p4, p5)),
        mult=mult,
        lyapunov_weights={"point_dist2": 1.0, "iterate_table": p4,
                          "gradient_table": p1},
        provenance="finito %s big-data rate" % tag)
    return _finish(cert)


def sdca_certificate(assumption, m, L, n, alpha):
    """SDCA certificate; rho2 = 1 - m*alpha on the admissible range."""
    m, L, n, alpha = _validate_common(m, L, n, alpha)
    tag = assumption.tag
    if tag == STRONGLY_CONVEX:
        raise UnsupportedAssumption(
            "individual strong convexity is not modeled for sdca; the "
            "regularizer already carries the strong convexity")
    if tag == CONVEX_SMOOTH:
        cap = 2 / (L + 2 * m * n)
        cap_name = "alpha <= 2/(L + 2*m*n)"
    elif tag == SMOOTH_ONLY:
        cap = m / (L**2 + m**2 * n)
        cap_name = "alpha <= m/(L**2 + m**2*n)"
    else:
        raise UnsupportedAssumption("unknown assumption tag %r" % tag)
    if alpha > cap * (1 + 1e-12):
        raise StepsizeOutOfRange("%s violated (cap %.6g, got %.6g)"
                                 % (cap_name, cap, alpha))
    at = alpha * m * n
    if at >= 1:
        raise StepsizeOutOfRange("need alpha*m*n < 1, got %.6g" % at)
    rho2 = _check_rho2(m * alpha)
    p1, p2 = 1 / at, (1 - at) / at**2
    if tag == CONVEX_SMOOTH:
        mult = lmi.MultiplierPair(0.0, (1 - at) * m * n / (at * L))
        prov = "sdca convex-smooth"
    else:
        mult = lmi.MultiplierPair((1 - at) * m * n / (at * L), 0.5)
        prov = ("sdca smooth-only; smooth-case sector confirmed against the "
                "convex-case alternative")
    cert = RateCertificate(
        method=SDCA, assumption=assumption, m=m, L=L, n=n, alpha=alpha,
        rho2=rho2, P_params=lmi.StructuredP(SDCA, (p1, p2)), mult=mult,
        lyapunov_weights={"dist2": 1.0,
                          "dual_table": p1 / (p2 * m**2 * n**2)},
        provenance=prov)
    return _finish(cert)


def certificate_for(method, assumption, m, L, n, alpha=None, b=None):
    """Dispatch to the method's certificate constructor."""
    method = normalize_method(method)
    if method == SAGA:
        if alpha is None:
            raise ValueError("saga certificates need a stepsize")
        return saga_certificate(assumption, m, L, n, alpha, b=b)
    if method == FINITO:
        cert = finito_certificate(assumption, m, L, n)
        if alpha is not None and not np.isclose(alpha, cert.alpha, rtol=1e-9):
            raise StepsizeOutOfRange(
                "finito rate holds at the statement stepsize %.6g only"
                % cert.alpha)
        return cert
    if method == SDCA:
        if alpha is None:
            raise ValueError("sdca certificates need a stepsize")
        return sdca_certificate(assumption, m, L, n, alpha)
    raise UnsupportedAssumption(
        "no certificate for sag via this condition; see sag-probe")


def iterations_to_eps(rho2, eps=1e-6):
    """Iterations until the certified bound drops below eps."""
    if not 0 < rho2 < 1:
        raise ValueError("need 0 < rho2 < 1")
    if not 0 < eps < 1:
        raise ValueError("need 0 < eps < 1")
    return int(math.ceil(math.log(1.0 / eps) / (-math.log(rho2))))


def certificate_to_json(cert):
    return {
        "method": cert.method,
        "assumption": cert.assumption.tag,
        "m": cert.m,
        "L": cert.L,
        "n": cert.n,
        "alpha": cert.alpha,
        "b": cert.free_param_b,
        "rho2": cert.rho2,
        "P_params": list(cert.P_params.params),
        "lambdas": [cert.mult.lambda1, cert.mult.lambda2],
        "lyapunov_weights": dict(cert.lyapunov_weights),
        "provenance": cert.provenance,
        "verified": cert.verified,
    }


def certificate_from_json(doc):
    tag = doc["assumption"]
    m, L = float(doc["m"]), float(doc["L"])
    if tag == STRONGLY_CONVEX:
        assumption = strongly_convex(m, L)
    elif tag == CONVEX_SMOOTH:
        assumption = convex_smooth(L)
    elif tag == SMOOTH_ONLY:
        assumption = smooth_only(L)
    else:
        raise ValueError("unknown assumption tag %r" % tag)
    method = normalize_method(doc["method"])
    return RateCertificate(
        method=method, assumption=assumption, m=m, L=L, n=int(doc["n"]),
        alpha=float(doc["alpha"]), rho2=float(doc["rho2"]),
        P_params=lmi.StructuredP(method, tuple(doc["P_params"])),
        mult=lmi.MultiplierPair(*doc["lambdas"]),
        lyapunov_weights=dict(doc["lyapunov_weights"]),
        provenance=doc.get("provenance", "imported"),
        free_param_b=doc.get("b"),
        verified=bool(doc.get("verified", False)))
