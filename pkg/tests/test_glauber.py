import numpy as np
import pytest

from bridgelines import glauber, walk
from bridgelines.core import Barrier, Interval, LatticeParams, RngSeed, WeylVector


def _lat(steps=2):
    return LatticeParams(Interval(0, 1), steps)


def test_maximal_state_examples():
    lat = _lat(2)
    assert glauber.maximal_state(lat, [0], [0], Barrier.minus_inf()).units == ((0, 1, 0),)
    # odd parity inserts the single flat step after the rise
    assert glauber.maximal_state(lat, [0], [1], Barrier.minus_inf()).units == ((0, 1, 1),)
    two = glauber.maximal_state(_lat(4), [2, 0], [2, 0], Barrier.minus_inf())
    assert two.units == ((2, 3, 4, 3, 2), (0, 1, 2, 1, 0))
    assert two.is_feasible()


def test_minimal_state_mirrors_and_respects_barrier():
    lat = _lat(2)
    assert glauber.minimal_state(lat, [0], [0], Barrier.minus_inf()).units == ((0, -1, 0),)
    # a barrier just below zero forbids the dip
    g = Barrier.constant(-0.5 * lat.dx, lat.interval)
    assert glauber.minimal_state(lat, [0], [0], g).units == ((0, 0, 0),)
    lo = glauber.minimal_state(_lat(4), [2, 0], [2, 0], Barrier.minus_inf())
    hi = glauber.maximal_state(_lat(4), [2, 0], [2, 0], Barrier.minus_inf())
    assert all(a <= b for ra, rb in zip(lo.units, hi.units) for a, b in zip(ra, rb))


def test_maximal_state_infeasible_barrier_raises():
    lat = _lat(2)
    with pytest.raises(glauber.InfeasibleState):
        glauber.maximal_state(lat, [0], [0], Barrier.constant(0.5 * lat.dx, lat.interval))


def test_zero_move_is_always_kept_and_peak_moves_rejected():
    lat = _lat(2)
    cfg = glauber.maximal_state(lat, [0], [0], Barrier.minus_inf())  # (0, 1, 0)
    rows = [list(r) for r in cfg.units]
    g_units = glauber._barrier_units_floor(cfg)
    # +1 at the peak would need increments of 2
    assert not glauber._move_ok(rows, g_units, 0, 1, 2)
    # -1 from the peak is fine
    assert glauber._move_ok(rows, g_units, 0, 1, 0)


def test_local_feasibility_matches_full_validation():
    # independent oracle: revalidate the whole configuration from scratch
    def full_ok(trial, lat, g_level):
        arr = np.asarray(trial)
        if np.any(np.abs(np.diff(arr, axis=1)) > 1):
            return False
        if not np.all(arr[:-1] > arr[1:]):
            return False
        return bool(np.all(arr[-1] * lat.dx > g_level))

    rng = np.random.default_rng(0)
    lat = _lat(6)
    g_level = -2.5 * lat.dx
    g = Barrier.constant(g_level, lat.interval)
    cfg = glauber.maximal_state(lat, [2, 0], [2, 0], g)
    rows = [list(r) for r in cfg.units]
    g_units = glauber._barrier_units_floor(cfg)
    for _ in range(500):
        r = int(rng.integers(1, lat.n_steps))
        i = int(rng.integers(0, 2))
        delta = int(rng.integers(-1, 2))
        v_new = rows[i][r] + delta
        local = glauber._move_ok(rows, g_units, i, r, v_new)
        trial = [list(row) for row in rows]
        trial[i][r] = v_new
        assert local == full_ok(trial, lat, g_level)
        if local:
            rows = trial


def test_boundary_columns_never_change():
    lat = _lat(4)
    init = glauber.maximal_state(lat, [2, 0], [2, 0], Barrier.minus_inf())
    final, _ = glauber.simulate_chain(init, 20000, RngSeed(1).generator())
    arr = np.asarray(final.units)
    assert list(arr[:, 0]) == [2, 0] and list(arr[:, -1]) == [2, 0]
    assert final.is_feasible()


def test_three_state_chain_uniform():
    lat = _lat(2)
    init = glauber.maximal_state(lat, [0], [0], Barrier.minus_inf())
    counts = glauber.sample_stationary_keys(init, 500, 30000, 3, RngSeed(2).generator())
    assert set(k[0][1] for k in counts) == {-1, 0, 1}
    total = sum(counts.values())
    tv = 0.5 * sum(abs(v / total - 1 / 3) for v in counts.values())
    assert tv <= 0.02


def test_chain_visits_only_enumerated_states():
    lat = _lat(4)
    g = Barrier.constant(-0.5 * lat.dx, lat.interval)
    x = WeylVector((2 * lat.dx, 0.0))
    spec = walk.WalkEnsembleSpec(lat, x, x, Barrier.plus_inf(), g)
    support = set()
    for ens in walk.enumerate_avoiding_configs(spec):
        units = np.rint(ens.values / lat.dx).astype(int)
        support.add(tuple(tuple(int(v) for v in row) for row in units))
    init = glauber.maximal_state(lat, [2, 0], [2, 0], g)
    counts = glauber.sample_stationary_keys(init, 1000, 20000, 2, RngSeed(3).generator())
    assert set(counts) <= support


def test_coupled_chain_preserves_order():
    lat = _lat(16)
    a = glauber.maximal_state(lat, [1, -1], [1, -1], Barrier.minus_inf())
    b = glauber.maximal_state(lat, [3, 0], [2, 0], Barrier.minus_inf())
    state = glauber.simulate_coupled(a, b, 30000, RngSeed(4).generator(), full_check_every=500)
    for ra, rb in zip(state.a.units, state.b.units):
        assert all(x <= y for x, y in zip(ra, rb))


def test_coupled_identical_inputs_stay_identical():
    lat = _lat(4)
    init = glauber.maximal_state(lat, [2, 0], [2, 0], Barrier.minus_inf())
    state = glauber.simulate_coupled(init, init, 5000, RngSeed(5).generator())
    assert state.a.units == state.b.units


def test_coupled_state_validates_order():
    lat = _lat(2)
    hi = glauber.maximal_state(lat, [0], [0], Barrier.minus_inf())
    lo = glauber.minimal_state(lat, [0], [0], Barrier.minus_inf())
    with pytest.raises(glauber.InfeasibleState):
        glauber.CoupledState(hi, lo)  # hi above lo: wrong order for (a, b)


def test_mixing_diagnostic():
    lat = _lat(2)
    hi = glauber.maximal_state(lat, [0], [0], Barrier.minus_inf())
    lo = glauber.minimal_state(lat, [0], [0], Barrier.minus_inf())
    assert glauber.mixing_diagnostic(hi, hi, RngSeed(6).generator()) == 0
    counts = [
        glauber.mixing_diagnostic(hi, lo, RngSeed(7).derive(i).generator())
        for i in range(16)
    ]
    assert all(0 < c < 10**6 for c in counts)
    seeds = [RngSeed(8).derive(i) for i in range(9)]
    burn = glauber.coalescence_burn_in(lat, [0], [0], Barrier.minus_inf(), seeds)
    replay = sorted(glauber.mixing_diagnostic(hi, lo, s.generator()) for s in seeds)
    assert burn == 4 * replay[4]


def test_clock_event_stream():
    lat = _lat(16)
    cfg = glauber.maximal_state(lat, [2, 0], [2, 0], Barrier.minus_inf())
    events = glauber.draw_clock_events(cfg, 200, RngSeed(10).generator())
    assert len(events) == 200
    assert all(1 <= e.site <= lat.n_steps - 1 for e in events)
    assert all(0 <= e.curve < 2 and e.delta in (-1, 0, 1) for e in events)
    assert all(b.time > a.time for a, b in zip(events, events[1:]))
    with pytest.raises(Exception):
        glauber.ClockEvent(1.0, 3, 0, 2)


def test_marginal_law_matches_enumeration_after_coupling_run():
    # the A-component of a long coupled run is still uniform on its state space
    lat = _lat(2)
    a0 = glauber.minimal_state(lat, [0], [0], Barrier.minus_inf())
    b0 = glauber.maximal_state(lat, [0], [0], Barrier.minus_inf())
    rng = RngSeed(9).generator()
    counts = {}
    state = glauber.simulate_coupled(a0, b0, 2000, rng)
    for _ in range(6000):
        state = glauber.simulate_coupled(state.a, state.b, 5, rng)
        key = state.a.units
        counts[key] = counts.get(key, 0) + 1
    total = sum(counts.values())
    tv = 0.5 * sum(abs(v / total - 1 / 3) for v in counts.values())
    assert tv <= 0.03
