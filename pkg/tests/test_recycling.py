import math

import numpy as np
import pytest

from spinbench.closed_forms import coupling_angle, mo_benchmark, optimal_fidelity
from spinbench.protocols import heisenberg_gate
from spinbench.recycling import (
    EXACT_MODE_MAX_J,
    ProgramDistribution,
    advantage_longevity,
    asymptotic_distribution,
    complementary_step,
    fresh_program,
    kernel_factor,
    per_m_fidelity,
    per_m_fidelity_asymptotic,
    recycling_curve,
)
from spinbench.spin_algebra import (
    Z_AXIS,
    as_half_integer,
    make_spin_operators,
    rotation_unitary,
)

PI = math.pi


def _brute_force_step(j, f, probs):
    """Diagonal of Tr_target[U (diag(p) (x) I/2) U^dag] for the exchange gate."""
    jh = as_half_integer(j)
    dc = jh.doubled + 1
    u = heisenberg_gate(jh, 0.5, f)
    t = u.reshape(dc, 2, dc, 2)
    rho = 0.5 * np.einsum("aiml,m,biml->ab", t, probs, t.conj())
    return np.real(np.diag(rho))


def _chain_step(j, g, probs):
    # independent re-implementation of the hop rates, with a free factor g
    jh = as_half_integer(j)
    jv = jh.value
    m = jv - np.arange(jh.doubled + 1)
    denom = (1.0 + 2.0 * jv) ** 2
    down = (jv + m) * (1.0 + jv - m) / denom * g
    up = (jv - m) * (1.0 + jv + m) / denom * g
    out = (1.0 - down - up) * probs
    out[1:] += down[:-1] * probs[:-1]
    out[:-1] += up[1:] * probs[1:]
    return out


def test_chain_matches_brute_force_at_tuned_angle():
    rng = np.random.default_rng(1)
    for j in (2.5, 4.0):
        for theta in (0.8, 2.0, PI):
            p = rng.dirichlet(np.ones(as_half_integer(j).doubled + 1))
            stepped = complementary_step(j, theta, ProgramDistribution(j, p))
            brute = _brute_force_step(j, coupling_angle(j, theta), p)
            assert np.abs(stepped.probs - brute).max() < 1e-12


def test_chain_matches_brute_force_at_any_angle():
    # the rate structure is a property of the gate, not of the tuning:
    # g = 1 - cos(f) works for every interaction angle f
    rng = np.random.default_rng(2)
    for f in (0.6, 1.9, 4.4):
        p = rng.dirichlet(np.ones(6))
        assert np.abs(_chain_step(2.5, 1.0 - math.cos(f), p) - _brute_force_step(2.5, f, p)).max() < 1e-12


def test_kernel_factor_variants():
    # at theta = pi the tuned angle is pi for every j: both kernels give 2
    for j in (0.5, 3.0, 41.0):
        assert abs(kernel_factor(j, PI, "exact") - 2.0) < 1e-12
        assert abs(kernel_factor(j, PI, "asymptotic") - 2.0) < 1e-12
    # large-j agreement is O(1/j^2)
    for j in (5.0, 20.0, 60.0):
        for theta in np.linspace(0.1, PI, 25):
            diff = kernel_factor(j, theta, "exact") - kernel_factor(j, theta, "asymptotic")
            assert abs(diff) * j * j < 0.5
    # the expansion breaks down at small j and theta
    assert kernel_factor(0.5, 0.3, "asymptotic") < 0.0
    assert kernel_factor(0.5, 0.3, "exact") > 0.0
    with pytest.raises(ValueError):
        kernel_factor(2.0, 1.0, "bogus")


def test_asymptotic_kernel_step_from_fresh():
    # one step from |j,j>: only the down hop fires, rate 2j/(2j+1)^2 * g
    j, theta = 6.0, 2.0
    g = kernel_factor(j, theta, "asymptotic")
    out = complementary_step(j, theta, fresh_program(j), kernel="asymptotic")
    assert abs(out.probs[1] - 12.0 / 169.0 * g) < 1e-15
    assert abs(out.probs[0] - (1.0 - 12.0 / 169.0 * g)) < 1e-15
    assert np.abs(out.probs[2:]).max() == 0.0


def test_distribution_validation():
    with pytest.raises(ValueError):
        ProgramDistribution(1.0, np.array([0.5, 0.5]))  # wrong length
    with pytest.raises(ValueError):
        ProgramDistribution(1.0, np.array([0.8, 0.3, -0.1]))
    with pytest.raises(ValueError):
        ProgramDistribution(1.0, np.array([0.5, 0.4, 0.2]))  # sums to 1.1
    assert fresh_program(3.5).mean_drop() == 0.0


def test_long_run_stays_normalized():
    dist = fresh_program(100.0)
    for _ in range(500):
        dist = complementary_step(100.0, PI, dist)
    assert abs(dist.probs.sum() - 1.0) < 1e-9
    assert dist.probs.min() >= 0.0


def test_per_m_top_state_is_the_tuned_strategy():
    for j, theta in ((3.0, 2.0), (1.5, PI)):
        assert abs(per_m_fidelity(j, theta, j) - optimal_fidelity(j, theta).value) < 1e-12


def test_per_m_rejects_bad_m():
    with pytest.raises(ValueError):
        per_m_fidelity(2.0, 1.0, 2.5)
    with pytest.raises(ValueError):
        per_m_fidelity(2.0, 1.0, 3.0)


def test_per_m_exact_vs_asymptotic_frozen():
    j, theta, m = 100.0, PI, 97.0
    exact = per_m_fidelity(j, theta, m)
    asym = per_m_fidelity_asymptotic(j, theta, m)
    assert abs(exact - 0.9543740666) < 1e-9
    assert abs(asym - 0.9533333333) < 1e-9
    # the gap is O(1/j^2) with a coefficient near 10 at this drop
    assert 8.0 < (exact - asym) * j * j < 12.0
    # same coefficient at doubled j (genuine 1/j^2 scaling)
    gap2 = (per_m_fidelity(200.0, PI, 197.0) - per_m_fidelity_asymptotic(200.0, PI, 197.0))
    assert 8.0 < gap2 * 4.0e4 < 12.0


def test_per_m_decreases_with_drop_near_top():
    from spinbench.recycling import _per_m_exact_all

    v = np.asarray(_per_m_exact_all(40, 2.0))  # j = 20
    assert np.all(np.diff(v[:10]) < 0.0)


def test_recycling_curve_basics():
    curve = recycling_curve(10.0, 2.4, 40)
    assert curve.mode == "exact"
    ns, vals = zip(*curve.points)
    assert ns == tuple(range(1, 41))
    assert abs(vals[0] - optimal_fidelity(10.0, 2.4).value) < 1e-12
    assert np.all(np.diff(vals) <= 1e-12)  # degrades monotonically
    big = recycling_curve(60.0, PI, 40)    # largest spin of the exact regime
    assert big.mode == "exact"
    assert np.all(np.diff([v for _, v in big.points]) <= 1e-12)
    assert recycling_curve(100.0, 2.4, 3).mode == "asymptotic"
    assert recycling_curve(100.0, 2.4, 3, mode="exact").mode == "exact"
    with pytest.raises(ValueError):
        recycling_curve(10.0, 2.4, 0)
    with pytest.raises(ValueError):
        recycling_curve(10.0, 2.4, 5, mode="sideways")


def test_degraded_fidelity_tracks_linear_growth_model():
    # large-j model: F_n ~ 1 - (1-c)/(3j) * (1 + n(1-c)/j)
    j, theta, n = 200.0, PI, 100
    curve = recycling_curve(j, theta, n, mode="asymptotic")
    got = curve.points[-1][1]
    model = 1.0 - (1.0 - math.cos(theta)) / (3.0 * j) * (1.0 + n * (1.0 - math.cos(theta)) / j)
    assert abs((1.0 - got) / (1.0 - model) - 1.0) < 0.05


def test_longevity_frozen_values():
    assert advantage_longevity(40.0, PI).steps == 21           # exact mode
    assert advantage_longevity(100.0, PI).steps == 50          # asymptotic mode
    assert advantage_longevity(100.0, PI, mode="exact").steps == 51
    assert advantage_longevity(100.0, PI / 2).steps == 100
    lon = advantage_longevity(100.0, PI)
    assert abs(lon.asymptotic - 50.0) < 1e-12
    assert advantage_longevity(50.0, 1e-9).steps is None       # no degradation
    assert advantage_longevity(100.0, PI, n_max=10).steps is None


def test_longevity_insensitive_to_per_step_retuning():
    # re-optimizing the interaction angle before every use does not extend the
    # advantage window (frozen: identical step counts at j = 40, 50 and 100)
    for j, n_max in ((40.0, 60), (50.0, 80), (100.0, 80)):
        jh = as_half_integer(j)
        dc = jh.doubled + 1
        vg = rotation_unitary(make_spin_operators(0.5), Z_AXIS, PI)
        f0 = coupling_angle(jh, PI)
        tables, gs = [], []
        for f in np.linspace(f0 - 0.4, min(f0 + 0.4, 2 * PI), 21):
            t = heisenberg_gate(jh, 0.5, f).reshape(dc, 2, dc, 2)
            fe = np.sum(np.abs(np.einsum("il,aiml->am", vg.conj(), t)) ** 2, axis=0) / 4.0
            tables.append((2.0 * fe + 1.0) / 3.0)
            gs.append(1.0 - math.cos(f))
        bench = mo_benchmark(jh, PI).value
        probs = fresh_program(j).probs.copy()
        tuned_steps = None
        for n in range(1, n_max + 1):
            vals = [tab @ probs for tab in tables]
            i = int(np.argmax(vals))
            if vals[i] < bench - 1e-12:
                tuned_steps = n
                break
            probs = _chain_step(j, gs[i], probs)
        fixed_steps = advantage_longevity(j, PI, mode="exact").steps
        assert tuned_steps is not None
        assert abs(tuned_steps - fixed_steps) <= 3
        assert tuned_steps == fixed_steps


def test_asymptotic_distribution_shape():
    with pytest.raises(ValueError):
        asymptotic_distribution(10.0, PI, -1)
    d0 = asymptotic_distribution(10.0, PI, 0)
    assert d0.probs[0] == 1.0
    # after 50 uses at j=200 the geometric shape matches the iterated chain
    j, theta, n = 200.0, PI, 50
    dist = fresh_program(j)
    for _ in range(n):
        dist = complementary_step(j, theta, dist)
    geo = asymptotic_distribution(j, theta, n)
    tv = 0.5 * np.abs(dist.probs - geo.probs).sum()
    assert tv < 0.05
    assert abs(dist.mean_drop() / geo.mean_drop() - 1.0) < 0.05


def test_exact_mode_threshold():
    assert EXACT_MODE_MAX_J == 60
    assert recycling_curve(60.0, 1.0, 2).mode == "exact"
    assert recycling_curve(60.5, 1.0, 2).mode == "asymptotic"
