"""End-to-end gate-programming strategies.

Two families are simulated here.  The coherent strategy couples the program
spin to the target through the isotropic exchange interaction and lets it run
for a tuned time; the measure-and-operate (MO) strategy estimates the rotation
axis from the program by a coherent-state measurement and applies a rotation
about the estimated axis.  Both come in a qubit-target version and a spin-k
generalization.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.special import eval_chebyu

from .channel_lab import (
    ProgramChannel,
    average_fidelity_from_entanglement,
    entanglement_fidelity,
    worst_case_fidelity,
)
from .closed_forms import coupling_angle, mo_optimal_angle
from .spin_algebra import (
    DIM_CAP,
    Z_AXIS,
    Direction,
    as_half_integer,
    make_spin_operators,
    rotation_unitary,
    spin_coherent_state,
    total_spin_projectors,
)


class StrategyFidelities(NamedTuple):
    entanglement: float
    average: float
    worst_case: float


def heisenberg_gate(j, k, f):
    """exp(-i f * 2 J.K / (2j+1)) on the coupled program (x) target space.

    2 J.K = L^2 - J^2 - K^2 is a scalar on each total-spin block, so the
    exponential is assembled directly from the block projectors: eigenvalue
    [l(l+1) - j(j+1) - k(k+1)] / (2j+1) on the spin-l block.
    """
    j = as_half_integer(j)
    k = as_half_integer(k)
    jv, kv = j.value, k.value
    dim = (j.doubled + 1) * (k.doubled + 1)
    if dim > DIM_CAP:
        raise ValueError("joint dimension %d exceeds cap %d" % (dim, DIM_CAP))
    u = np.zeros((dim, dim), dtype=complex)
    for l, proj in total_spin_projectors(j, k):
        lv = l.value
        lam = (lv * (lv + 1.0) - jv * (jv + 1.0) - kv * (kv + 1.0)) / (2.0 * jv + 1.0)
        u += np.exp(-1j * f * lam) * proj
    return u


def _program_channel(j, k, f, program):
    return ProgramChannel(heisenberg_gate(j, k, f), program, as_half_integer(j), as_half_integer(k))


def simulate_optimal_qubit_strategy(j, theta, n: Direction = Z_AXIS,
                                    grid: int = 24) -> StrategyFidelities:
    """Exchange coupling at the tuned interaction angle, program pointing along n.

    Returns entanglement, average and worst-case fidelity with respect to the
    target rotation by theta about n.
    """
    j = as_half_integer(j)
    ch = _program_channel(j, 0.5, coupling_angle(j, theta), spin_coherent_state(j, n))
    v = rotation_unitary(make_spin_operators(0.5), n, theta)
    fe = entanglement_fidelity(ch, v)
    favg = average_fidelity_from_entanglement(fe, 2)
    fw, _ = worst_case_fidelity(ch, v, grid=grid)
    return StrategyFidelities(fe, favg, fw)


def _mo_entanglement_quadrature(j, theta, tau, order):
    """Entanglement fidelity of estimate-then-rotate with conditional angle tau.

    The estimated axis n' is distributed with density (2j+1)/(4pi) times the
    coherent overlap cos^{4j}(phi'/2), phi' the misalignment polar angle.  The
    applied gate is the rotation by tau about n', so with u = cos(phi'),

        |Tr[V_theta^dag V_{tau,n'}]|^2 / 4
            = [cos(theta/2)cos(tau/2) + sin(theta/2)sin(tau/2) u]^2,

    independent of the azimuth of n'.  Gauss-Legendre in u (polynomial degree
    2j+2, exact once order >= j+2) with a uniform trapezoid layer of 2*order
    points in azimuth.
    """
    jv = as_half_integer(j).value
    u_nodes, u_weights = np.polynomial.legendre.leggauss(order)
    ct, st = math.cos(theta / 2.0), math.sin(theta / 2.0)
    cu, su = math.cos(tau / 2.0), math.sin(tau / 2.0)
    overlap = ((1.0 + u_nodes) / 2.0) ** (2.0 * jv)
    trace_term = (ct * cu + st * su * u_nodes) ** 2
    # azimuth layer: 2*order equally weighted points (the integrand carries no
    # azimuth dependence, so the layer averages identical values)
    az_weights = np.full(2 * order, 1.0 / (2 * order))
    polar_integrand = overlap * trace_term
    fe = (2.0 * jv + 1.0) / 2.0 * float(az_weights.sum() * (u_weights @ polar_integrand))
    return min(max(fe, 0.0), 1.0)


def simulate_mo_strategy(j, theta, quadrature_order: int = 64) -> float:
    """Average fidelity of the measure-and-operate strategy.

    Measures the program with the coherent-state POVM and rotates the target
    about the estimated axis by the optimal conditional angle.
    """
    if quadrature_order < 16:
        raise ValueError("quadrature_order must be >= 16")
    tau = mo_optimal_angle(j, theta)
    fe = _mo_entanglement_quadrature(j, theta, tau, quadrature_order)
    return average_fidelity_from_entanglement(fe, 2)


def simulate_spin_k(j, k, theta, f=None, n: Direction = Z_AXIS,
                    grid: int = 16) -> StrategyFidelities:
    """Program a rotation on a spin-k target through the exchange coupling.

    By default the interaction angle equals theta itself, the simple choice
    whose error vanishes as 1/j; pass f explicitly to study other schedules
    (with k = 1/2 and f = coupling_angle this reproduces the tuned qubit
    strategy).
    """
    j = as_half_integer(j)
    k = as_half_integer(k)
    if k.doubled < 1:
        raise ValueError("target spin must be >= 1/2")
    if f is None:
        f = theta
    ch = _program_channel(j, k, f, spin_coherent_state(j, n))
    v = rotation_unitary(make_spin_operators(k), n, theta)
    fe = entanglement_fidelity(ch, v)
    favg = average_fidelity_from_entanglement(fe, k.doubled + 1)
    fw, _ = worst_case_fidelity(ch, v, grid=grid)
    return StrategyFidelities(fe, favg, fw)


def simulate_spin_k_mo(j, k, theta, quadrature_order: int = 64) -> float:
    """Average fidelity of measure-and-operate on a spin-k target.

    The estimated-axis distribution is the same coherent overlap as in the
    qubit case; conditional rotation is by theta about the estimate.  The
    composite rotation V_theta^dag V_{theta,n'} has half-angle cosine

        c(u) = cos^2(theta/2) + sin^2(theta/2) u,       u = cos(phi'),

    and the (2k+1)-dimensional character of a rotation by angle t is
    sin((2k+1) t/2)/sin(t/2) = U_{2k}(cos(t/2)), a Chebyshev polynomial, so
    the entanglement fidelity is a polynomial integral in u handled exactly by
    Gauss-Legendre once order >= j + k + 2.
    """
    if quadrature_order < 16:
        raise ValueError("quadrature_order must be >= 16")
    j = as_half_integer(j)
    k = as_half_integer(k)
    if k.doubled < 1:
        raise ValueError("target spin must be >= 1/2")
    jv = j.value
    dk = k.doubled + 1
    u_nodes, u_weights = np.polynomial.legendre.leggauss(quadrature_order)
    ct2, st2 = math.cos(theta / 2.0) ** 2, math.sin(theta / 2.0) ** 2
    cos_half = ct2 + st2 * u_nodes
    character = eval_chebyu(k.doubled, cos_half)
    overlap = ((1.0 + u_nodes) / 2.0) ** (2.0 * jv)
    az_weights = np.full(2 * quadrature_order, 1.0 / (2 * quadrature_order))
    fe = (2.0 * jv + 1.0) / 2.0 * float(
        az_weights.sum() * (u_weights @ (overlap * (character / dk) ** 2))
    )
    fe = min(max(fe, 0.0), 1.0)
    return average_fidelity_from_entanglement(fe, dk)
