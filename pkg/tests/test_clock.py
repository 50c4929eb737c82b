import math

import numpy as np
import pytest
import scipy.stats

from trapclock.clock import (
    ClockSimulation,
    InsufficientStepsError,
    clock_from_energies,
    clock_from_log_increments,
    coarse_grain_clock,
    coarse_grain_gap,
    record_point_process,
    rescale_clock,
    simulate_clock,
    truncated_clock,
    truncation_level,
)
from trapclock.core import ModelParams, RngStream
from trapclock.hamiltonian import RemDisorder


def _params(**kw):
    base = dict(N=16, p=3, beta=1.0, gamma=0.5, horizon_T=1.0)
    base.update(kw)
    return ModelParams(**base)


def test_clock_zero_coupling_law_of_large_numbers():
    params = _params(beta=0.0)
    dis = RemDisorder(16, RngStream(1, 1))
    k = 10_000
    _, clock, _ = simulate_clock(dis, params, k, RngStream(1, 2))
    assert abs(clock.values[-1] / k - 1.0) < 3.0 / math.sqrt(k)


def test_clock_from_injected_exponentials():
    params = _params()
    clock = clock_from_energies(np.zeros(3), np.array([0.5, 1.0, 2.0]), params)
    assert np.allclose(clock.values, [0.0, 0.5, 1.5, 3.5])


def test_clock_starts_at_zero_and_strictly_increases():
    params = _params()
    _, clock, _ = simulate_clock(RemDisorder(16, RngStream(5, 1)), params, 200, RngStream(5, 2))
    assert clock.values[0] == 0.0
    assert np.all(np.diff(clock.log_values[1:]) > 0)
    assert np.isneginf(clock.log_values[0])


def test_clock_increments_are_weighted_exponentials():
    """exp(log-increment - beta sqrt(N) X) must be a unit exponential."""
    params = _params()
    _, clock, energies = simulate_clock(
        RemDisorder(16, RngStream(8, 1)), params, 5000, RngStream(8, 2)
    )
    waits = np.exp(clock.log_increments() - params.beta * math.sqrt(params.N) * energies[:-1])
    _, pvalue = scipy.stats.kstest(waits, "expon")
    assert pvalue > 0.01


def test_clock_from_energies_requires_aligned_lengths():
    params = _params()
    with pytest.raises(ValueError):
        clock_from_energies(np.zeros(4), np.ones(3), params)


def test_overflow_switches_to_log_domain():
    params = ModelParams(N=25, p=3, beta=2.0, gamma=0.5)
    clock = clock_from_energies(np.full(3, 500.0), np.ones(3), params)
    assert clock.overflowed
    assert np.isfinite(clock.log_values[1:]).all()
    assert np.isinf(clock.values[1:]).all()


def test_rescale_clock_exact_definition():
    params = _params()
    steps = params.r_steps(1.0) + 1
    _, clock, _ = simulate_clock(RemDisorder(16, RngStream(2, 1)), params, steps, RngStream(2, 2))
    bar = rescale_clock(clock, params)
    assert bar.value_at(0.0) == 0.0
    rate = math.sqrt(params.N) * math.exp(params.N * params.gamma**2 / (2 * params.beta**2))
    for t in (0.11, 0.37, 0.5, 0.93):
        direct = math.exp(-params.gamma * params.N) * clock.values[math.floor(t * rate)]
        assert bar.value_at(t) == pytest.approx(direct, rel=1e-12)
    grid = np.linspace(0.0, 1.0, 64)
    vals = bar.value_at(grid)
    assert np.all(np.diff(vals) >= 0)


def test_rescale_clock_insufficient_steps():
    params = _params()
    _, clock, _ = simulate_clock(RemDisorder(16, RngStream(3, 1)), params, 10, RngStream(3, 2))
    with pytest.raises(InsufficientStepsError):
        rescale_clock(clock, params)


def test_coarse_grain_below_bar_and_equal_on_block_boundaries():
    params = _params()
    steps = params.r_steps(1.0) + 1
    _, clock, _ = simulate_clock(RemDisorder(16, RngStream(4, 1)), params, steps, RngStream(4, 2))
    bar = rescale_clock(clock, params)
    tilde = coarse_grain_clock(clock, params)
    rate = math.sqrt(params.N) * math.exp(params.N * params.gamma**2 / (2 * params.beta**2))
    nu = params.nu()
    grid = np.linspace(0.0, 1.0, 200)
    assert np.all(tilde.value_at(grid) <= bar.value_at(grid) + 1e-15)
    for j in range(1, int(rate / nu)):
        t = j * nu / rate
        # value is flat on [j nu / rate, (j nu + 1) / rate), so nudge inside
        t_in = t + 0.25 / rate
        assert tilde.value_at(t_in) == bar.value_at(t)


def test_coarse_jumps_only_at_block_multiples():
    params = _params()
    steps = params.r_steps(1.0) + 1
    _, clock, _ = simulate_clock(RemDisorder(16, RngStream(6, 1)), params, steps, RngStream(6, 2))
    path = coarse_grain_clock(clock, params).to_step_path(1.0)
    rate = math.sqrt(params.N) * math.exp(params.N * params.gamma**2 / (2 * params.beta**2))
    ids = np.asarray(path.jump_times) * rate / params.nu()
    assert np.allclose(ids, np.round(ids), atol=1e-9)


def test_coarse_grain_gap_is_the_sup_distance():
    params = _params()
    steps = params.r_steps(1.0) + 1
    _, clock, _ = simulate_clock(RemDisorder(16, RngStream(7, 1)), params, steps, RngStream(7, 2))
    gap = coarse_grain_gap(clock, params)
    bar = rescale_clock(clock, params)
    tilde = coarse_grain_clock(clock, params)
    rate = math.sqrt(params.N) * math.exp(params.N * params.gamma**2 / (2 * params.beta**2))
    # sampling just below each step boundary realizes the sup exactly
    ts = (np.arange(1, clock.steps + 1) - 1e-9) / rate
    ts = ts[ts <= 1.0]
    dense_sup = np.max(bar.value_at(ts) - tilde.value_at(ts))
    assert gap == pytest.approx(dense_sup, rel=1e-9)
    assert gap >= 0.0


def test_truncation_level_formula():
    params = _params()
    m = 1.7
    expected = params.gamma * math.sqrt(params.N) / params.beta - m / (
        params.beta * math.sqrt(params.N)
    )
    assert truncation_level(params, m) == pytest.approx(expected)


def test_truncated_clock_sandwich_and_limits():
    params = _params()
    steps = params.r_steps(1.0) + 1
    _, clock, energies = simulate_clock(
        RemDisorder(16, RngStream(9, 1)), params, steps, RngStream(9, 2)
    )
    bar = rescale_clock(clock, params)
    full = truncated_clock(clock, energies, params, m=-1e9)
    grid = np.linspace(0.0, 1.0, 50)
    assert np.allclose(full.value_at(grid), bar.value_at(grid), rtol=1e-12)
    prev = bar.value_at(1.0)
    for m in (-2.0, 0.0, 2.0, 4.0):
        cur = truncated_clock(clock, energies, params, m).value_at(1.0)
        assert cur <= prev + 1e-15  # coupled paths: raising m removes mass
        prev = cur


def test_record_point_process_trivial_cases():
    params = _params()
    nu = params.nu()
    quiet = np.zeros(3 * nu + 1)
    assert record_point_process(quiet, params, m=0.0).size == 0
    level = truncation_level(params, 0.0)
    one = np.zeros(3 * nu + 1)
    one[nu + 2] = level + 1.0  # inside block 1
    pts = record_point_process(one, params, m=0.0)
    rate = math.sqrt(params.N) * math.exp(params.N * params.gamma**2 / (2 * params.beta**2))
    assert pts.shape == (1,)
    assert pts[0] == pytest.approx(nu / rate)


def test_record_point_process_gaps_look_exponential():
    """Poissonity diagnostic on REM exceedance blocks (intensity fitted)."""
    params = _params(horizon_T=135.0)  # 4000 steps cover this horizon
    _, _, energies = simulate_clock(
        RemDisorder(16, RngStream(10, 1)), params, 4000, RngStream(10, 2)
    )
    # m = 0 puts the threshold at gamma sqrt(N) / beta = 2 exactly
    assert truncation_level(params, 0.0) == pytest.approx(2.0)
    pts = record_point_process(energies, params, m=0.0)
    gaps = np.diff(pts)
    assert gaps.size > 30
    _, pvalue = scipy.stats.kstest(gaps, "expon", args=(0.0, gaps.mean()))
    assert pvalue > 0.01


def test_clock_additivity_bit_identical():
    params = _params()
    dis = RemDisorder(16, RngStream(12, 1))
    one = ClockSimulation(dis, params, RngStream(12, 2))
    one.advance(40)
    two = ClockSimulation(dis, params, RngStream(12, 2))
    two.advance(25)
    two.advance(15)
    t1, c1, e1 = one.snapshot()
    t2, c2, e2 = two.snapshot()
    assert t1.flips == t2.flips
    assert np.array_equal(c1.log_values, c2.log_values)
    assert np.array_equal(e1, e2)
    t3, c3, e3 = simulate_clock(dis, params, 40, RngStream(12, 2))
    assert t3.flips == t1.flips
    assert np.array_equal(c3.log_values, c1.log_values)


def test_clock_log_increments_round_trip():
    logs = np.array([-0.5, 1.25, 0.0])
    clock = clock_from_log_increments(logs)
    assert np.allclose(np.exp(clock.log_values[1:]), np.cumsum(np.exp(logs)))
    assert np.allclose(clock.log_increments(), logs)
    assert clock.steps == 3
