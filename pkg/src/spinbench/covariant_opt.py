"""Maximizing entanglement fidelity over rotation-covariant channels.

A covariant channel on the program-plus-qubit system is fixed, up to unitary
rotations, by a block form a*P_{j+1} (+) b*P_{j-1} (+) P_j (x) M with M a 2x2
non-negative matrix (gamma_a, gamma_b; gamma_c, gamma_d).  Trace preservation
pins two affine combinations of the parameters, and the entanglement fidelity
becomes A sin^2(t/2) + B cos^2(t/2) + C Jz_mean sin(t/2)cos(t/2)
+ D Jz2_mean sin^2(t/2), linear both in the channel parameters and in the two
program moments.  This module maximizes that expression and locates the angle
at which the optimal program switches character.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .spin_algebra import HalfInteger, as_half_integer

PSD_TOL = 1e-9
TRACE_TOL = 1e-9


@dataclass(frozen=True)
class CovariantChannelParams:
    """Schur-block parameters (alpha, beta, gamma_a, gamma_d, gamma_b).

    gamma_c is not stored: Hermiticity of the 2x2 block forces it to be the
    conjugate of gamma_b.
    """

    alpha: float
    beta: float
    gamma_a: float
    gamma_d: float
    gamma_b: complex

    @property
    def gamma_c(self) -> complex:
        return complex(self.gamma_b).conjugate()


@dataclass(frozen=True)
class ProgramMoments:
    jz_mean: float
    jz2_mean: float


def gamma_a_cap(j) -> float:
    jv = as_half_integer(j).value
    return (2.0 * jv + 2.0) / (2.0 * jv + 1.0)


def gamma_d_cap(j) -> float:
    jv = as_half_integer(j).value
    return 2.0 * jv / (2.0 * jv + 1.0)


def params_from_gammas(j, gamma_a, gamma_d, gamma_b) -> CovariantChannelParams:
    """Fill in alpha, beta from the two trace-preservation constraints.

    For j = 1/2 the lower block is absent: beta = 0 identically and the second
    constraint fixes gamma_d = 1/2, so the supplied gamma_d must be 1/2.
    """
    jv = as_half_integer(j).value
    alpha = ((2.0 * jv + 2.0) - (2.0 * jv + 1.0) * gamma_a) / (2.0 * jv + 3.0)
    if as_half_integer(j).doubled == 1:
        if abs(gamma_d - 0.5) > 1e-12:
            raise ValueError("at j=1/2 trace preservation forces gamma_d = 1/2")
        beta = 0.0
    else:
        beta = (2.0 * jv - (2.0 * jv + 1.0) * gamma_d) / (2.0 * jv - 1.0)
    return CovariantChannelParams(alpha, beta, gamma_a, gamma_d, complex(gamma_b))


def check_params(j, params: CovariantChannelParams, tol=PSD_TOL):
    """Raise ValueError unless params is a feasible covariant channel."""
    j = as_half_integer(j)
    jv = j.value
    if params.alpha < -tol or params.beta < -tol or params.gamma_a < -tol or params.gamma_d < -tol:
        raise ValueError("negative block weight in %r" % (params,))
    if params.gamma_a * params.gamma_d - abs(params.gamma_b) ** 2 < -tol:
        raise ValueError("gamma block is not PSD: gamma_a*gamma_d < |gamma_b|^2")
    c1 = (2 * jv + 3) / (2 * jv + 2) * params.alpha + (2 * jv + 1) / (2 * jv + 2) * params.gamma_a
    if abs(c1 - 1.0) > TRACE_TOL:
        raise ValueError("first trace-preservation constraint violated (%g != 1)" % c1)
    if j.doubled == 1:
        if abs(params.gamma_d - 0.5) > TRACE_TOL or abs(params.beta) > TRACE_TOL:
            raise ValueError("at j=1/2: need beta = 0 and gamma_d = 1/2")
    else:
        c2 = (2 * jv - 1) / (2 * jv) * params.beta + (2 * jv + 1) / (2 * jv) * params.gamma_d
        if abs(c2 - 1.0) > TRACE_TOL:
            raise ValueError("second trace-preservation constraint violated (%g != 1)" % c2)


def moments_lower_bound(j, x: float) -> float:
    """Lower edge of the feasible (Jz_mean, Jz2_mean) region at Jz_mean = x.

    The feasible set is the convex hull of {(m, m^2)}; its lower boundary is
    the chord between the two nearest m values bracketing x.
    """
    jv = as_half_integer(j).value
    # m values are jv - integers; chord between floor/ceil neighbors of x
    offset = jv - math.floor(jv - x) if x < jv else jv
    m_hi = min(offset, jv)
    m_lo = m_hi - 1.0
    if x <= -jv:
        return jv * jv
    if m_hi == x:
        return x * x
    return (m_lo + m_hi) * x - m_lo * m_hi


def check_moments(j, moments: ProgramMoments, tol=1e-9):
    jv = as_half_integer(j).value
    x, y = moments.jz_mean, moments.jz2_mean
    if abs(x) > jv + tol or y > jv * jv + tol or y < moments_lower_bound(j, x) - tol:
        raise ValueError("moments %r are not realizable by any program distribution" % (moments,))
    assert y >= x * x - tol


def abcd_coefficients(j, params: CovariantChannelParams):
    """The four linear coefficients (A, B, C, D) of the fidelity expression."""
    check_params(j, params)
    jv = as_half_integer(j).value
    rt = math.sqrt(jv * (jv + 1.0))
    gb, gc = complex(params.gamma_b), complex(params.gamma_b).conjugate()
    two = 2.0 * (1.0 + 2.0 * jv)
    a_coef = ((jv + 1.0) * params.alpha + jv * params.beta) / two
    b_coef = ((jv + 1.0) * params.gamma_a + jv * params.gamma_d - rt * (gb + gc).real) / two
    c_coef = (1j * (gb - gc) / (2.0 * rt)).real
    d_coef = (
        -params.alpha / (jv + 1.0)
        - params.beta / jv
        + params.gamma_a / (jv + 1.0)
        + params.gamma_d / jv
        + (gb + gc).real / rt
    ) / two
    return a_coef, b_coef, c_coef, d_coef


def covariant_entanglement_fidelity(j, theta, params: CovariantChannelParams,
                                    moments: ProgramMoments) -> float:
    check_moments(j, moments)
    a, b, c, d = abcd_coefficients(j, params)
    s, co = math.sin(theta / 2.0), math.cos(theta / 2.0)
    fe = a * s * s + b * co * co + c * moments.jz_mean * s * co + d * moments.jz2_mean * s * s
    assert -1e-10 <= fe <= 1.0 + 1e-10
    return fe


# ---------------------------------------------------------------------------
# maximization


def _fe_terms(j, theta, x, y):
    """Coefficients of F_e = base(ga, gd) + u*Re(gb) + w*Im(gb).

    Returns (base_fn, u, w) where base_fn(ga, gd) works on arrays.  alpha and
    beta are already eliminated through the trace constraints.
    """
    jv = as_half_integer(j).value
    s, co = math.sin(theta / 2.0), math.cos(theta / 2.0)
    rt = math.sqrt(jv * (jv + 1.0))
    two = 2.0 * (1.0 + 2.0 * jv)
    u = (-2.0 * rt * co * co + (2.0 / rt) * y * s * s) / two
    w = -x * s * co / rt

    def base(ga, gd):
        alpha = ((2 * jv + 2) - (2 * jv + 1) * ga) / (2 * jv + 3)
        beta = 0.0 if jv == 0.5 else ((2 * jv) - (2 * jv + 1) * gd) / (2 * jv - 1)
        a_coef = ((jv + 1) * alpha + jv * beta) / two
        b_coef = ((jv + 1) * ga + jv * gd) / two
        d_coef = (-alpha / (jv + 1) - beta / jv + ga / (jv + 1) + gd / jv) / two
        return a_coef * s * s + b_coef * co * co + d_coef * y * s * s

    return base, u, w


def _maximize_at_moments(j, theta, x, y, grid_points=41, restarts=5, seed=0):
    """Grid + Nelder-Mead maximum of F_e at fixed program moments.

    The chart is (gamma_a, gamma_d, r_frac, phi) with
    gamma_b = r_frac*sqrt(gamma_a*gamma_d)*exp(i*phi); at j=1/2 gamma_d is
    pinned to 1/2 and drops out of the search.
    """
    j = as_half_integer(j)
    base, u, w = _fe_terms(j, theta, x, y)
    cap_a, cap_d = gamma_a_cap(j), gamma_d_cap(j)
    pinned_d = j.doubled == 1

    gas = np.linspace(0.0, cap_a, grid_points)
    gds = np.array([0.5]) if pinned_d else np.linspace(0.0, cap_d, grid_points)
    rfr = np.linspace(0.0, 1.0, grid_points)
    phs = np.linspace(0.0, 2.0 * np.pi, grid_points, endpoint=False)
    GA, GD, RF, PH = np.meshgrid(gas, gds, rfr, phs, indexing="ij")
    R = RF * np.sqrt(GA * GD)
    vals = base(GA, GD) + u * R * np.cos(PH) + w * R * np.sin(PH)
    flat = int(np.argmax(vals))
    idx = np.unravel_index(flat, vals.shape)
    start = np.array([GA[idx], GD[idx], RF[idx], PH[idx]])

    lo = np.array([0.0, 0.5 if pinned_d else 0.0, 0.0, 0.0])
    hi = np.array([cap_a, 0.5 if pinned_d else cap_d, 1.0, 2.0 * np.pi])

    def neg(p):
        ga, gd, rf, ph = p
        r = rf * math.sqrt(max(ga, 0.0) * max(gd, 0.0))
        return -(base(ga, gd) + u * r * math.cos(ph) + w * r * math.sin(ph))

    rng = np.random.default_rng(seed)
    best_val = vals[idx]
    best_p = start
    for trial in range(restarts):
        p0 = start if trial == 0 else np.clip(
            start + rng.normal(scale=0.08, size=4) * (hi - lo), lo, hi
        )
        res = minimize(neg, p0, method="Nelder-Mead",
                       bounds=list(zip(lo, hi)),
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        if -res.fun > best_val:
            best_val = -res.fun
            best_p = res.x
    ga, gd, rf, ph = best_p
    gamma_b = rf * math.sqrt(max(ga, 0.0) * max(gd, 0.0)) * complex(math.cos(ph), math.sin(ph))
    return float(best_val), params_from_gammas(j, float(ga), float(gd), gamma_b)


def maximize_covariant_fidelity(j, theta, grid_points=41, restarts=5, seed=0):
    """Global maximum of the covariant entanglement fidelity.

    The fidelity is linear in (Jz_mean, Jz2_mean), so it suffices to scan the
    vertices (m, m^2) of the moment hull; for each vertex the channel
    parameters are optimized by dense grid plus simplex refinement.  Ties are
    resolved toward larger Jz_mean, except that an exactly tied Jz_mean = 0
    program is preferred at j = 1/2 (that is the form the piecewise optimum
    takes there).

    Returns (fe, params, moments).
    """
    j = as_half_integer(j)
    if j.doubled < 1:
        raise ValueError("maximize_covariant_fidelity needs j >= 1/2")
    jv = j.value
    candidates = [(jv - i, (jv - i) ** 2) for i in range(j.doubled + 1)]
    if j.doubled == 1:
        candidates.append((0.0, 0.25))  # midpoint moments: the central program
    best = None
    for x, y in candidates:
        fe, params = _maximize_at_moments(j, theta, x, y, grid_points, restarts, seed)
        if best is None or fe > best[0] + 1e-10:
            best = (fe, params, ProgramMoments(x, y))
        elif abs(fe - best[0]) <= 1e-10 and j.doubled == 1 and x == 0.0:
            best = (fe, params, ProgramMoments(x, y))
    return best


def _central_moments(j):
    # midpoint of the moment hull's lower edge: (0, 0) for integer j,
    # (0, 1/4) for half-integer j
    j = as_half_integer(j)
    if j.doubled % 2 == 1:
        return (0.0, 0.25)
    return (0.0, 0.0)


def locate_transition(j, n_scan=33, tol=1e-5, grid_points=25, restarts=3):
    """Angle displacement |theta - pi| at which the optimal program switches
    from the maximal-projection (coherent) branch to the central branch.

    The branch indicator is the maximizer itself: for j = 1 (and above) the
    winning moment vertex, for j = 1/2 whether the optimal gamma_a sits at its
    cap (the coherent/boundary branch) or strictly inside.  Bisection runs to
    `tol` in theta; returns None when no switch happens on (0, pi).
    """
    j = as_half_integer(j)
    if j.doubled < 1:
        raise ValueError("locate_transition needs j >= 1/2")

    if j.doubled == 1:
        cap = gamma_a_cap(j)

        def central(theta):
            _, params, _ = maximize_covariant_fidelity(j, theta, grid_points, restarts)
            return params.gamma_a < cap - 1e-5
    else:
        xc, yc = _central_moments(j)
        xj, yj = j.value, j.value**2

        def central(theta):
            f_coh, _ = _maximize_at_moments(j, theta, xj, yj, grid_points, restarts)
            f_cen, _ = _maximize_at_moments(j, theta, xc, yc, grid_points, restarts)
            return f_cen > f_coh

    thetas = np.linspace(0.05, np.pi, n_scan)
    flags = [central(t) for t in thetas]
    if True not in flags:
        return None
    first = flags.index(True)
    if first == 0:
        return float(np.pi - thetas[0])
    lo, hi = thetas[first - 1], thetas[first]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if central(mid):
            hi = mid
        else:
            lo = mid
    return float(np.pi - 0.5 * (lo + hi))
