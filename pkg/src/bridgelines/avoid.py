"""Samplers and transforms for avoiding (non-intersecting) Brownian bridge ensembles.

The primary sampler is rejection: draw k independent bridges, accept iff the
strict ordering and barrier constraints hold at every grid point. Closed-form
tail bounds for the bottom curve and the affine/flip distributional identities
live here too.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bridge import certify_c0, midpoint_cdf_single
from .core import Barrier, DomainError, Interval, LineEnsemble, StructuralError, WeylVector
from .walk import RejectionExhausted

SQRT2PI = float(np.sqrt(2.0 * np.pi))


@dataclass(frozen=True)
class AvoidSpec:
    """Avoiding ensemble: k bridges from x to y on interval, squeezed between f and g."""

    interval: Interval
    x: WeylVector
    y: WeylVector
    f: Barrier
    g: Barrier
    grid_points: int = 512

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise StructuralError("entrance and exit vectors must have equal length")
        if self.grid_points < 2:
            raise DomainError("need at least 2 grid points")
        a, b = self.interval.a, self.interval.b
        if self.f.is_finite:
            if not (self.f.at(a)[0] > self.x[0] and self.f.at(b)[0] > self.y[0]):
                raise DomainError("upper barrier must clear the top endpoints")
        if self.g.is_finite:
            if not (self.g.at(a)[0] < self.x[-1] and self.g.at(b)[0] < self.y[-1]):
                raise DomainError("lower barrier must clear the bottom endpoints")
        if self.f.is_finite and self.g.is_finite:
            grid = self.interval.grid(self.grid_points)
            if not np.all(self.f.at(grid) > self.g.at(grid)):
                raise DomainError("barriers must satisfy f > g everywhere")

    @property
    def k(self) -> int:
        return len(self.x)


def sample_avoiding_values(
    interval: Interval,
    x_vec: np.ndarray,
    y_vec: np.ndarray,
    f_vals: np.ndarray,
    g_vals: np.ndarray,
    grid_points: int,
    n_samples: int,
    rng: np.random.Generator,
    max_attempts: int,
    chunk: int = 2048,
) -> tuple[np.ndarray, int, int]:
    """Rejection sampling with barriers given as value arrays on the grid.

    Returns (values (n_out, k, M+1), n_drawn, n_accepted_seen, first_hit) with
    n_out = min(n_samples, n_accepted_seen) and first_hit the 0-based draw index
    of the first acceptance (or -1). Candidates are drawn in whole chunks so the
    acceptance rate n_accepted_seen / n_drawn is unbiased.
    """
    a, b = interval.a, interval.b
    m = grid_points
    grid = interval.grid(m)
    k = len(x_vec)
    out = np.empty((n_samples, k, m + 1))
    got = 0
    drawn = 0
    seen = 0
    first_hit = -1
    check_f = np.any(np.isfinite(f_vals))
    check_g = np.any(np.isfinite(g_vals))
    while got < n_samples and drawn < max_attempts:
        nc = min(chunk, max_attempts - drawn)
        paths = np.empty((nc, k, m + 1))
        paths[:, :, 0] = x_vec
        paths[:, :, -1] = y_vec
        v = paths[:, :, 0].copy()
        z = rng.standard_normal((nc, k, m - 1))
        for j in range(1, m):
            s, t = grid[j - 1], grid[j]
            w = (t - s) / (b - s)
            var = (t - s) * (b - t) / (b - s)
            v = v + w * (y_vec[None, :] - v) + np.sqrt(var) * z[:, :, j - 1]
            paths[:, :, j] = v
        ok = np.ones(nc, dtype=bool)
        if k > 1:
            ok &= np.all(paths[:, :-1, :] > paths[:, 1:, :], axis=(1, 2))
        if check_f:
            ok &= np.all(paths[:, 0, :] < f_vals[None, :], axis=1)
        if check_g:
            ok &= np.all(paths[:, -1, :] > g_vals[None, :], axis=1)
        hits = np.flatnonzero(ok)
        if hits.size and first_hit < 0:
            first_hit = drawn + int(hits[0])
        seen += int(hits.size)
        take = hits[: n_samples - got]
        out[got : got + take.size] = paths[take]
        got += take.size
        drawn += nc
    return out[:got], drawn, seen, first_hit


def sample_avoiding_batch(
    spec: AvoidSpec,
    n_samples: int,
    rng: np.random.Generator,
    max_attempts: int = 10**7,
) -> tuple[np.ndarray, int, int]:
    """Batch of accepted ensembles as an array (n, k, M+1) plus draw statistics."""
    grid = spec.interval.grid(spec.grid_points)
    vals, drawn, seen, _ = sample_avoiding_values(
        spec.interval,
        spec.x.as_array(),
        spec.y.as_array(),
        spec.f.at(grid),
        spec.g.at(grid),
        spec.grid_points,
        n_samples,
        rng,
        max_attempts,
    )
    if vals.shape[0] < n_samples:
        raise RejectionExhausted(drawn, f"{vals.shape[0]}/{n_samples} accepted in {drawn} draws")
    return vals, drawn, seen


def sample_avoiding(
    spec: AvoidSpec,
    rng: np.random.Generator,
    max_attempts: int = 10**6,
) -> tuple[LineEnsemble, int]:
    """First accepted ensemble and the 1-based index of the accepting candidate."""
    grid = spec.interval.grid(spec.grid_points)
    vals, drawn, _, first_hit = sample_avoiding_values(
        spec.interval, spec.x.as_array(), spec.y.as_array(),
        spec.f.at(grid), spec.g.at(grid), spec.grid_points,
        1, rng, max_attempts, chunk=256,
    )
    if not vals.shape[0]:
        raise RejectionExhausted(drawn)
    return LineEnsemble(spec.interval, vals[0]), first_hit + 1


def wilson_ci(successes: int, n: int, z: float = 3.0) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise DomainError("need at least one trial")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def midpoint_cdf_avoiding(
    r: float,
    spec: AvoidSpec,
    num_samples: int,
    rng: np.random.Generator,
    max_attempts: int = 10**7,
) -> tuple[float, tuple[float, float]]:
    """P(bottom curve at the interval midpoint <= r) for a barrier-free ensemble.

    Monte Carlo with a Wilson interval; the k = 1 case is the closed-form
    Gaussian midpoint law and returns a zero-width interval.
    """
    if spec.f.is_finite or spec.g.is_finite:
        raise DomainError("the midpoint CDF observable is defined without barriers")
    if spec.k == 1:
        p = midpoint_cdf_single(
            r, spec.interval.a, spec.interval.b, spec.x[0], spec.y[0]
        )
        return p, (p, p)
    if spec.grid_points % 2:
        raise DomainError("need an even grid so the midpoint is a grid point")
    vals, _, _ = sample_avoiding_batch(spec, num_samples, rng, max_attempts)
    mid = vals[:, -1, spec.grid_points // 2]
    hits = int(np.count_nonzero(mid <= r))
    return hits / num_samples, wilson_ci(hits, num_samples)


def sample_avoiding_with_fallback(
    spec: AvoidSpec,
    n_samples: int,
    rng: np.random.Generator,
    lattice_scale: int = 8,
    pilot_attempts: int = 10**4,
    min_rate: float = 1e-4,
    max_attempts: int = 10**7,
    burn_streams: int = 8,
) -> tuple[np.ndarray, str]:
    """Rejection sampling with a chain-based fallback for collapsing acceptance.

    A pilot of pilot_attempts candidates estimates the acceptance rate; below
    min_rate the sampler switches to the lattice pipeline: endpoints snapped to
    the dx-grid of a scaled lattice, single-site chain run from the maximal
    state past a coalescence burn-in, then thinned snapshots. Chain samples are
    the lattice approximation of the target law (exact only as the scale
    grows; coarser scales mix faster). Returns (values (n, k, cols), method)
    with method one of "rejection" | "chain".
    """
    from . import glauber  # local import: glauber depends on core only

    grid = spec.interval.grid(spec.grid_points)
    f_vals, g_vals = spec.f.at(grid), spec.g.at(grid)
    pilot, drawn, seen, _ = sample_avoiding_values(
        spec.interval, spec.x.as_array(), spec.y.as_array(), f_vals, g_vals,
        spec.grid_points, n_samples, rng, pilot_attempts,
    )
    if seen / drawn >= min_rate:
        if pilot.shape[0] >= n_samples:
            return pilot[:n_samples], "rejection"
        more, drawn2, _, _ = sample_avoiding_values(
            spec.interval, spec.x.as_array(), spec.y.as_array(), f_vals, g_vals,
            spec.grid_points, n_samples - pilot.shape[0], rng, max_attempts,
        )
        out = np.concatenate([pilot, more], axis=0)
        if out.shape[0] < n_samples:
            raise RejectionExhausted(drawn + drawn2)
        return out, "rejection"
    if spec.f.is_finite:
        raise DomainError("the chain fallback supports lower barriers only")
    from .core import LatticeParams

    lat = LatticeParams.scaled(spec.interval, lattice_scale)
    x_units = [round(v / lat.dx) for v in spec.x.values]
    y_units = [round(v / lat.dx) for v in spec.y.values]
    if any(a <= b for a, b in zip(x_units[:-1], x_units[1:])) or any(
        a <= b for a, b in zip(y_units[:-1], y_units[1:])
    ):
        raise DomainError("endpoints collide after lattice snapping; increase lattice_scale")
    seeds = [np.random.default_rng(rng.integers(2**63)) for _ in range(burn_streams)]
    hi = glauber.maximal_state(lat, x_units, y_units, spec.g)
    lo = glauber.minimal_state(lat, x_units, y_units, spec.g)
    coal = sorted(glauber.mixing_diagnostic(hi, lo, s) for s in seeds)
    burn = 4 * coal[len(coal) // 2]
    thin = max(1, burn // 8)
    state, _ = glauber.simulate_chain(hi, burn, rng)
    out = np.empty((n_samples, spec.k, lat.n_steps + 1))
    for i in range(n_samples):
        state, _ = glauber.simulate_chain(state, thin, rng)
        out[i] = np.asarray(state.units, dtype=float) * lat.dx
    return out, "chain"


# ---------------------------------------------------------------------------
# distributional transforms
# ---------------------------------------------------------------------------

def affine_transform(ens: LineEnsemble, c: float, u: float, r: float) -> LineEnsemble:
    """Time grid t -> c^2 t + u, values v -> c v + r; maps avoiding law to avoiding law."""
    if c <= 0:
        raise DomainError("scale c must be positive")
    a, b = ens.interval.a, ens.interval.b
    return LineEnsemble(Interval(c * c * a + u, c * c * b + u), c * ens.values + r)


def flip_transform(ens: LineEnsemble) -> LineEnsemble:
    """Negate values and reverse the curve order; preserves the ordering invariant."""
    return LineEnsemble(ens.interval, -ens.values[::-1, :])


# ---------------------------------------------------------------------------
# closed-form tail bounds for the bottom curve (barrier-free ensembles)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def default_c0(x_max: float = 20.0, step: float = 1e-3) -> float:
    return certify_c0(x_max, step)


def bound_bottom_max(k: int, r: float, c0: float | None = None) -> float:
    """Upper bound on P(bottom curve midpoint >= max(x_k, y_k) + sqrt(b-a) * r)."""
    if r < 0 or k < 1:
        raise DomainError("need r >= 0 and k >= 1")
    c0 = default_c0() if c0 is None else c0
    return float(c0 * np.exp(-2.0 * r * r) / (SQRT2PI * (1.0 + 2.0 * r)))


def bound_bottom_min(k: int, r: float, c0: float | None = None) -> float:
    """Lower bound on P(bottom curve midpoint <= max(x_k, y_k) - sqrt(b-a) * r)."""
    if r < 0 or k < 1:
        raise DomainError("need r >= 0 and k >= 1")
    c0 = default_c0() if c0 is None else c0
    return float(np.exp(-2.0 * r * r) / (c0 * SQRT2PI * (1.0 + 2.0 * r)))


def bound_inf(k: int, r: float) -> float:
    """Upper bound on P(inf of bottom curve <= min(x_k, y_k) - sqrt(2) sqrt(b-a) (k + r - 1))."""
    if r < 0 or k < 1:
        raise DomainError("need r >= 0 and k >= 1")
    return float((1.0 - 2.0 * np.exp(-1.0)) ** (-k) * np.exp(-4.0 * r * r))
