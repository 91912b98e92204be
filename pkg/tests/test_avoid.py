import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from bridgelines import avoid, bridge, walk
from bridgelines.core import Barrier, DomainError, Interval, LineEnsemble, RngSeed, WeylVector


def _spec(x, y, grid=128, f=None, g=None, iv=None):
    iv = iv or Interval(0, 1)
    return avoid.AvoidSpec(
        iv, WeylVector(x), WeylVector(y),
        Barrier.plus_inf() if f is None else Barrier.constant(f, iv),
        Barrier.minus_inf() if g is None else Barrier.constant(g, iv),
        grid,
    )


def test_spec_validates_barrier_clearance():
    _spec((1.0,), (1.0,), g=0.0)
    with pytest.raises(DomainError):
        _spec((1.0,), (1.0,), g=1.5)
    with pytest.raises(DomainError):
        _spec((1.0,), (1.0,), f=0.5)


def test_unconstrained_single_bridge_accepts_first_try():
    spec = _spec((0.0,), (0.0,))
    ens, attempts = avoid.sample_avoiding(spec, RngSeed(1).generator())
    assert attempts == 1
    assert ens.k == 1


def test_acceptance_rate_matches_reflection_formula():
    # k=1 above a flat barrier: acceptance = 1 - exp(-2 x^2 / T), up to the
    # documented grid over-acceptance (enforced at grid points only)
    spec = _spec((1.0,), (1.0,), g=0.0, grid=512)
    _, drawn, seen = avoid.sample_avoiding_batch(spec, 40000, RngSeed(2).generator(), 10**6)
    rate = seen / drawn
    target = 1 - math.exp(-2.0)
    allowance = bridge.grid_max_allowance(1.0, 0.0, 1.0, 512)
    se = math.sqrt(target * (1 - target) / drawn)
    assert rate >= target - 3 * se  # bias is one-sided: grid only over-accepts
    assert rate <= target + 3 * se + 2 * allowance


def test_grid_over_acceptance_shrinks_with_density():
    rates = []
    for grid in (64, 512):
        spec = _spec((1.0,), (1.0,), g=0.0, grid=grid)
        _, drawn, seen = avoid.sample_avoiding_batch(spec, 20000, RngSeed(3).generator(), 10**6)
        rates.append(seen / drawn)
    assert rates[1] < rates[0]  # finer grid rejects more near-touches


def test_rejection_exhaustion_error():
    spec = _spec((1.0, 0.5), (1.0, 0.5), grid=64)
    bad = avoid.AvoidSpec(spec.interval, spec.x, spec.y, Barrier.plus_inf(),
                          Barrier.constant(0.49, spec.interval), 64)
    with pytest.raises(walk.RejectionExhausted) as exc:
        avoid.sample_avoiding_batch(bad, 50000, RngSeed(4).generator(), max_attempts=2000)
    assert exc.value.attempts == 2000


def test_affine_transform_examples():
    iv = Interval(0, 1)
    ens = LineEnsemble(iv, np.array([[1.0, 2.0, 1.5], [0.0, -1.0, 0.5]]))
    same = avoid.affine_transform(ens, 1.0, 0.0, 0.0)
    assert same.interval == iv and np.array_equal(same.values, ens.values)
    shifted = avoid.affine_transform(ens, 1.0, 0.0, 5.0)
    assert shifted.interval == iv
    assert np.array_equal(shifted.values, ens.values + 5)
    moved = avoid.affine_transform(ens, 2.0, 3.0, -1.0)
    assert moved.interval == Interval(3.0, 7.0)
    assert np.array_equal(moved.values, 2 * ens.values - 1)
    with pytest.raises(DomainError):
        avoid.affine_transform(ens, 0.0, 0.0, 0.0)


def test_flip_transform_involution_and_ordering():
    iv = Interval(0, 1)
    ens = LineEnsemble(iv, np.array([[2.0, 2.0, 2.0]]))
    flipped = avoid.flip_transform(ens)
    assert np.all(flipped.values == -2.0)
    two = LineEnsemble(iv, np.array([[1.0, 2.0, 1.0], [0.0, 0.5, 0.0]]))
    back = avoid.flip_transform(avoid.flip_transform(two))
    assert np.array_equal(back.values, two.values)
    f = avoid.flip_transform(two)
    assert np.all(f.values[0] > f.values[1])


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 3), st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 1000))
def test_affine_flip_commute_with_sampling_shapes(c, u, r, seed):
    rng = np.random.default_rng(seed)
    vals = np.sort(rng.normal(size=(2, 5)), axis=0)[::-1] + np.array([[1.0], [-1.0]])
    ens = LineEnsemble(Interval(0, 1), vals)
    moved = avoid.affine_transform(ens, c, u, r)
    assert moved.values.shape == vals.shape
    assert moved.interval.length == pytest.approx(c * c * 1.0)
    assert np.allclose(avoid.flip_transform(avoid.flip_transform(moved)).values, moved.values)


def test_affine_law_matches_direct_sampling():
    src = _spec((1.0, -1.0), (1.0, -1.0), grid=64)
    svals, _, _ = avoid.sample_avoiding_batch(src, 2500, RngSeed(5).generator())
    c, u, r = 1.5, 2.0, 0.5
    tgt = avoid.AvoidSpec(
        Interval(u, c * c + u),
        WeylVector((c + r, -c + r)), WeylVector((c + r, -c + r)),
        Barrier.plus_inf(), Barrier.minus_inf(), 64,
    )
    tvals, _, _ = avoid.sample_avoiding_batch(tgt, 2500, RngSeed(6).generator())
    moved = c * svals + r
    for i in range(2):
        for col in (16, 32, 48):
            p = stats.ks_2samp(moved[:, i, col], tvals[:, i, col]).pvalue
            assert p > 1e-5


def test_flip_law_matches_direct_sampling():
    src = _spec((2.0, 0.0), (1.0, -1.0), grid=64)
    svals, _, _ = avoid.sample_avoiding_batch(src, 2500, RngSeed(7).generator())
    tgt = _spec((0.0, -2.0), (1.0, -1.0), grid=64)
    tvals, _, _ = avoid.sample_avoiding_batch(tgt, 2500, RngSeed(8).generator())
    flipped = -svals[:, ::-1, :]
    for i in range(2):
        for col in (16, 32, 48):
            p = stats.ks_2samp(flipped[:, i, col], tvals[:, i, col]).pvalue
            assert p > 1e-5


def test_bounds_values_and_ordering():
    assert avoid.bound_inf(1, 0.0) == pytest.approx((1 - 2 / math.e) ** -1)
    assert avoid.bound_inf(1, 0.0) > 1  # vacuous, callers record VACUOUS
    c0 = avoid.default_c0()
    expect = c0 * math.exp(-8) / (math.sqrt(2 * math.pi) * 5)
    assert avoid.bound_bottom_max(2, 2.0, c0) == pytest.approx(expect)
    for r in (0.0, 0.5, 1.0, 2.5):
        assert avoid.bound_bottom_min(3, r, c0) <= avoid.bound_bottom_max(3, r, c0)
    with pytest.raises(DomainError):
        avoid.bound_bottom_max(1, -0.1)
    with pytest.raises(DomainError):
        avoid.bound_inf(0, 1.0)


def test_midpoint_cdf_avoiding_delegates_for_single_curve():
    spec = _spec((0.0,), (0.0,), grid=64)
    est, ci = avoid.midpoint_cdf_avoiding(1.0, spec, 10, RngSeed(9).generator())
    assert est == pytest.approx(bridge.midpoint_cdf_single(1.0, 0, 1, 0, 0))
    assert ci == (est, est)


def test_midpoint_cdf_avoiding_monotone_in_r():
    spec = _spec((1.0, -1.0), (1.0, -1.0), grid=64)
    rng = RngSeed(10)
    lo, _ = avoid.midpoint_cdf_avoiding(-10.0, spec, 4000, rng.derive("a").generator())
    mid, _ = avoid.midpoint_cdf_avoiding(-1.0, spec, 4000, rng.derive("b").generator())
    hi, _ = avoid.midpoint_cdf_avoiding(10.0, spec, 4000, rng.derive("c").generator())
    assert lo <= mid <= hi
    assert lo == 0.0 and hi == 1.0


def test_midpoint_cdf_avoiding_vs_walk_pipeline():
    # dual route: bridge rejection sampling vs the lattice walk sampler
    iv = Interval(0, 1)
    spec = _spec((1.0, -1.0), (1.0, -1.0), grid=64)
    est, ci = avoid.midpoint_cdf_avoiding(-1.0, spec, 60000, RngSeed(11).generator())
    from bridgelines.core import LatticeParams
    lat = LatticeParams.scaled(iv, 16)
    level = round(1.0 / lat.dx) * lat.dx  # endpoints snapped onto the dx-lattice
    x_lat = WeylVector((level, -level))
    wspec = walk.WalkEnsembleSpec(lat, x_lat, x_lat, Barrier.plus_inf(), Barrier.minus_inf())
    samples, _, _ = walk.sample_avoiding_walks_batch(wspec, 50000, RngSeed(12).generator(), 10**7)
    mids = np.array([ens.values[1, lat.n_steps // 2] for ens in samples])
    walk_est = float(np.mean(mids <= -1.0))
    walk_se = math.sqrt(walk_est * (1 - walk_est) / 50000)
    est_se = math.sqrt(est * (1 - est) / 60000)
    # both routes approximate the continuum law; allow their discretization gaps
    assert abs(est - walk_est) <= 3 * (walk_se + est_se) + 0.02


def test_barriered_midpoint_rejected():
    spec = _spec((1.0,), (1.0,), g=0.0)
    with pytest.raises(DomainError):
        avoid.midpoint_cdf_avoiding(0.5, spec, 10, RngSeed(0).generator())


def test_fallback_uses_rejection_when_healthy():
    spec = _spec((1.0, -1.0), (1.0, -1.0), grid=64)
    vals, method = avoid.sample_avoiding_with_fallback(spec, 30, RngSeed(13).generator())
    assert method == "rejection"
    assert vals.shape == (30, 2, 65)


def test_fallback_switches_to_chain_on_collapsed_acceptance():
    # five tightly packed curves: grid acceptance well below the 1e-4 pilot floor
    xs = tuple(0.6 - 0.3 * i for i in range(5))
    spec = _spec(xs, xs, grid=256)
    vals, method = avoid.sample_avoiding_with_fallback(
        spec, 6, RngSeed(14).generator(), lattice_scale=6, burn_streams=4
    )
    assert method == "chain"
    assert vals.shape[0] == 6 and vals.shape[1] == 5
    from bridgelines.core import LineEnsemble
    for v in vals:
        ens = LineEnsemble(Interval(0, 1), v)
        assert np.all(v[:-1] > v[1:])


def test_wilson_ci():
    lo, hi = avoid.wilson_ci(50, 100, z=3.0)
    assert lo < 0.5 < hi
    lo0, hi0 = avoid.wilson_ci(0, 100)
    assert lo0 == 0.0 and hi0 > 0
    with pytest.raises(DomainError):
        avoid.wilson_ci(0, 0)
