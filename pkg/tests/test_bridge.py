import math

import mpmath
import numpy as np
import pytest

from bridgelines import bridge
from bridgelines.core import DomainError, Interval, RngSeed


def test_transition_density_values():
    assert bridge.transition_density(1, 0, 0) == pytest.approx(1 / math.sqrt(2 * math.pi))
    assert bridge.transition_density(2, 0, 2) == pytest.approx(math.exp(-1) / math.sqrt(4 * math.pi))
    assert bridge.transition_density(1, 3, 3) == pytest.approx(1 / math.sqrt(2 * math.pi))
    with pytest.raises(DomainError):
        bridge.transition_density(0, 0, 0)


def test_bridge_max_prob_values():
    assert bridge.bridge_max_prob(1, 0, 1) == pytest.approx(math.exp(-2))
    assert bridge.bridge_max_prob(1, 1, 1) == 1.0  # endpoint attains the level
    assert bridge.bridge_max_prob(2, 0, 1) == pytest.approx(math.exp(-1))
    with pytest.raises(DomainError):
        bridge.bridge_max_prob(0, 0, 1)


def test_midpoint_cdf_single_values():
    assert bridge.midpoint_cdf_single(0, -1, 1, 0, 0) == pytest.approx(0.5)
    phi2 = 0.5 * (1 + math.erf(2 / math.sqrt(2)))
    assert bridge.midpoint_cdf_single(1, 0, 1, 0, 0) == pytest.approx(phi2)
    assert bridge.midpoint_cdf_single(-1, 0, 1, 0, 0) == pytest.approx(1 - phi2)
    with pytest.raises(DomainError):
        bridge.midpoint_cdf_single(0, 1, 1, 0, 0)


def test_midpoint_cdf_single_monotone_and_symmetric():
    rs = np.linspace(-3, 3, 25)
    vals = [bridge.midpoint_cdf_single(r, 0, 2, 0.3, -0.7) for r in rs]
    assert all(0 <= v <= 1 for v in vals)
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    for r in (-1.0, 0.2, 2.5):
        lhs = bridge.midpoint_cdf_single(r, 0, 2, 0.3, -0.7)
        rhs = 1 - bridge.midpoint_cdf_single((0.3 - 0.7) - r, 0, 2, 0.3, -0.7)
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_mills_ratio_against_extended_precision():
    assert bridge.mills_ratio(0.0) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-12)
    mpmath.mp.dps = 40
    for x in (0.3, 1.0, 5.0, 12.0, 25.0, 40.0):
        exact = float(mpmath.erfc(x / mpmath.sqrt(2)) / 2 / (mpmath.exp(-x * x / 2) / mpmath.sqrt(2 * mpmath.pi)))
        assert bridge.mills_ratio(x) == pytest.approx(exact, rel=1e-10)
    v40 = bridge.mills_ratio(40.0) * 41
    assert 1.0 < v40 < 1.1 and math.isfinite(v40)
    with pytest.raises(DomainError):
        bridge.mills_ratio(-0.1)


def test_certify_c0_scan_properties():
    c = bridge.certify_c0(10, 0.01)
    assert 1 < c <= 2
    # two-sided bound holds at x = 0 by construction
    m0 = math.sqrt(math.pi / 2)
    assert 1 / c <= m0 <= c
    # enlarging the scan never decreases the result
    assert bridge.certify_c0(20, 0.01) >= c
    # and the certified bound actually holds on a denser grid
    xs = np.linspace(0, 10, 5001)
    mills = bridge.mills_ratio(xs)
    assert np.all(mills <= c / (1 + xs) + 1e-12)
    assert np.all(mills >= 1 / (c * (1 + xs)) - 1e-12)


def test_sample_bridge_endpoints_exact_and_marginals():
    spec = bridge.BridgeSpec(Interval(0, 1), 0.0, 0.0, 128)
    rng = RngSeed(5).generator()
    paths = bridge.sample_bridge_paths(spec, 100000, rng)
    assert np.all(paths[:, 0] == 0.0) and np.all(paths[:, -1] == 0.0)
    mid = paths[:, 64]
    # midpoint is Normal(0, 1/4)
    assert abs(mid.mean()) < 3 * 0.5 / math.sqrt(100000)
    assert mid.var() == pytest.approx(0.25, rel=0.02)
    # generic interior time: mean (b-t)/(b-a) x + (t-a)/(b-a) y, var (t-a)(b-t)/(b-a)
    spec2 = bridge.BridgeSpec(Interval(0, 2), 0.0, 2.0, 64)
    paths2 = bridge.sample_bridge_paths(spec2, 100000, RngSeed(6).generator())
    t_idx = 16  # t = 0.5
    mean_t = 0.5 / 2 * 2
    var_t = 0.5 * 1.5 / 2
    got = paths2[:, t_idx]
    assert got.mean() == pytest.approx(mean_t, abs=4 * math.sqrt(var_t / 100000))
    assert got.var() == pytest.approx(var_t, rel=0.03)


def test_bridge_variance_against_construction_oracle():
    # independent route: scale a standard bridge built from a discretized
    # Brownian path, W_t - t W_1, instead of the sequential sampler
    rng = RngSeed(7).generator()
    n, m = 200000, 64
    incr = rng.standard_normal((n, m)) / math.sqrt(m)
    w = np.cumsum(incr, axis=1)
    s = 0.5  # looking at t = 1 on [0, 2] -> s = (t-a)/(b-a) = 0.5
    w_s = w[:, m // 2 - 1]
    std_bridge = w_s - s * w[:, -1]
    b_t = math.sqrt(2.0) * std_bridge + s * 2.0  # x = 0, y = 2
    assert b_t.mean() == pytest.approx(1.0, abs=0.02)
    assert b_t.var() == pytest.approx(0.5, rel=0.03)
    # the sequential sampler agrees with the construction
    spec = bridge.BridgeSpec(Interval(0, 2), 0.0, 2.0, 64)
    paths = bridge.sample_bridge_paths(spec, 200000, RngSeed(8).generator())
    assert paths[:, 32].var() == pytest.approx(b_t.var(), rel=0.03)


def test_sample_bridge_at_exact_times():
    iv = Interval(0, 1)
    vals = bridge.sample_bridge_at(iv, 0.0, 0.0, [0.25, 0.5, 0.75], 50000, RngSeed(9).generator())
    assert vals.shape == (50000, 3)
    assert vals[:, 1].var() == pytest.approx(0.25, rel=0.03)
    assert vals[:, 0].var() == pytest.approx(0.25 * 0.75, rel=0.03)
    with pytest.raises(DomainError):
        bridge.sample_bridge_at(iv, 0, 0, [0.0, 0.5], 1, RngSeed(0).generator())


def test_grid_max_exceedance_matches_formula_with_allowance():
    rng = RngSeed(11).generator()
    freq, missed = bridge.grid_max_exceedance(1.0, 0.0, 1.0, 256, 40000, rng)
    target = bridge.bridge_max_prob(1.0, 0.0, 1.0)
    se = math.sqrt(target * (1 - target) / 40000)
    assert abs(freq - target) <= 3 * se + missed
    # bias-corrected estimate is centered on the formula
    assert freq + missed == pytest.approx(target, abs=4 * se)
    assert freq < target  # grid max under-counts


def test_grid_allowance_shrinks_with_grid():
    a_coarse = bridge.grid_max_allowance(1.0, 0.0, 1.0, 256)
    a_fine = bridge.grid_max_allowance(1.0, 0.0, 1.0, 512)
    assert 0 < a_fine < a_coarse


def test_spec_validation():
    with pytest.raises(DomainError):
        bridge.BridgeSpec(Interval(0, 1), 0, 0, 1)
