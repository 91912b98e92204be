"""Trinomial random-walk bridges on the (dt, dx) lattice and avoiding-walk samplers.

Steps are iid uniform on {-1, 0, +1}; a walk bridge of N steps is conditioned on
its endpoint sum. Conditioned sampling goes forward through the exact per-step
probabilities count(N-m-1, d-delta) / (3 * count(N-m, d)). The counts live in a
log-space table so N in the thousands stays in memory; count_paths below is the
exact integer oracle for small N.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import (
    Barrier,
    Curve,
    DomainError,
    LatticeParams,
    LineEnsemble,
    StructuralError,
    WeylVector,
)


class RejectionExhausted(RuntimeError):
    """Rejection sampler ran out of attempts; carries the attempt count."""

    def __init__(self, attempts: int, msg: str = ""):
        super().__init__(msg or f"no acceptance in {attempts} attempts")
        self.attempts = attempts


@dataclass(frozen=True)
class WalkBridge:
    """N-step walk with steps in {-1, 0, +1} summing to z."""

    n_steps: int
    z: int
    steps: tuple[int, ...]

    def __post_init__(self):
        if len(self.steps) != self.n_steps or sum(self.steps) != self.z:
            raise StructuralError("steps must have length N and sum to z")

    def positions(self) -> np.ndarray:
        out = np.zeros(self.n_steps + 1, dtype=int)
        out[1:] = np.cumsum(self.steps)
        return out


@lru_cache(maxsize=256)
def _count_row(n: int) -> tuple[int, ...]:
    # exact counts for n steps, indexed by d + n
    row = [0] * (2 * n + 1)
    row[n] = 1
    for _ in range(n):
        row = [
            (row[j - 1] if j > 0 else 0) + row[j] + (row[j + 1] if j < 2 * n else 0)
            for j in range(2 * n + 1)
        ]
    return tuple(row)


def count_paths(n: int, d: int) -> int:
    """Exact number of n-step {-1,0,1} sequences summing to d (arbitrary precision)."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    if abs(d) > n:
        return 0
    return _count_row(n)[d + n]


LOG3 = float(np.log(3.0))


@lru_cache(maxsize=64)
def _log_count_table(n_steps: int) -> np.ndarray:
    """table[m, d + n_steps + 1] = log count(m, d); one -inf padding column each side."""
    size = 2 * n_steps + 3
    table = np.full((n_steps + 1, size), -np.inf)
    table[0, n_steps + 1] = 0.0
    for m in range(1, n_steps + 1):
        prev = table[m - 1]
        stacked = np.full((3, size), -np.inf)
        stacked[0, 1:-1] = prev[:-2]
        stacked[1, 1:-1] = prev[1:-1]
        stacked[2, 1:-1] = prev[2:]
        table[m] = np.logaddexp.reduce(stacked, axis=0)
        table[m, 0] = table[m, -1] = -np.inf
    table.setflags(write=False)
    return table


def sample_walk_steps(
    n_steps: int, z: int, n_samples: int, rng: np.random.Generator
) -> np.ndarray:
    """Batch of conditioned walks: int8 array (n_samples, N) of steps summing to z."""
    if abs(z) > n_steps:
        raise DomainError(f"|z| = {abs(z)} exceeds N = {n_steps}")
    if n_steps == 0:
        return np.empty((n_samples, 0), dtype=np.int8)
    table = _log_count_table(n_steps)
    off = n_steps + 1
    steps = np.empty((n_samples, n_steps), dtype=np.int8)
    d = np.full(n_samples, z, dtype=np.int64)  # displacement still needed
    u = rng.random((n_samples, n_steps))
    with np.errstate(invalid="ignore"):
        for m in range(n_steps):
            rem = n_steps - m
            cur = table[rem][d + off]
            nxt = table[rem - 1]
            # P(step = delta) = count(rem-1, d - delta) / count(rem, d)
            p_dn = np.exp(nxt[d + 1 + off] - cur)
            p_zr = np.exp(nxt[d + off] - cur)
            um = u[:, m]
            choice = np.where(um < p_dn, -1, np.where(um < p_dn + p_zr, 0, 1)).astype(np.int8)
            steps[:, m] = choice
            d -= choice
    return steps


def sample_walk_bridge(n_steps: int, z: int, rng: np.random.Generator) -> WalkBridge:
    """One exact sample of the conditioned walk."""
    steps = sample_walk_steps(n_steps, z, 1, rng)[0]
    return WalkBridge(n_steps, z, tuple(int(s) for s in steps))


def walk_log_prob(bridge: WalkBridge) -> float:
    """Sum of per-step log conditional probabilities along the path.

    Telescopes to -log count(N, z): the sampled path is uniform among the valid
    step sequences.
    """
    table = _log_count_table(bridge.n_steps)
    off = bridge.n_steps + 1
    d = bridge.z
    total = 0.0
    for m, delta in enumerate(bridge.steps):
        rem = bridge.n_steps - m
        total += float(table[rem - 1][d - delta + off] - table[rem][d + off])
        d -= delta
    return total


def sample_walk_midpoints(
    n_steps: int, z: int, n_samples: int, rng: np.random.Generator, chunk: int = 25000
) -> np.ndarray:
    """Positions after N/2 steps for n_samples conditioned walks (N must be even)."""
    if n_steps % 2:
        raise DomainError("need an even number of steps")
    half = n_steps // 2
    out = np.empty(n_samples, dtype=np.int64)
    done = 0
    while done < n_samples:
        nc = min(chunk, n_samples - done)
        steps = sample_walk_steps(n_steps, z, nc, rng)
        out[done : done + nc] = steps[:, :half].sum(axis=1, dtype=np.int64)
        done += nc
    return out


def embed_walk_as_curve(w: WalkBridge, lattice: LatticeParams, x0: float) -> Curve:
    """Lattice curve x0 + dx * (partial sums) on the lattice time grid."""
    if w.n_steps != lattice.n_steps:
        raise StructuralError(
            f"walk has {w.n_steps} steps but lattice expects {lattice.n_steps}"
        )
    return Curve(lattice.interval, x0 + lattice.dx * w.positions())


# ---------------------------------------------------------------------------
# avoiding ensembles of walks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WalkEnsembleSpec:
    """k walk bridges on a lattice with entrance/exit data on the dx-grid and barriers."""

    lattice: LatticeParams
    x: WeylVector
    y: WeylVector
    f: Barrier
    g: Barrier

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise StructuralError("entrance and exit vectors must have equal length")
        for xi, yi in zip(self.x.values, self.y.values):
            zi = self.lattice.snap_units(yi) - self.lattice.snap_units(xi)
            if abs(zi) > self.lattice.n_steps:
                raise DomainError("endpoints not reachable in n^2 steps")

    @property
    def k(self) -> int:
        return len(self.x)


def _accept_mask(spec: WalkEnsembleSpec, vals: np.ndarray, units: np.ndarray,
                 f_vals: np.ndarray, g_vals: np.ndarray) -> np.ndarray:
    ok = np.ones(vals.shape[0], dtype=bool)
    if spec.k > 1:
        ok &= np.all(units[:, :-1, :] > units[:, 1:, :], axis=(1, 2))
    if spec.f.is_finite:
        ok &= np.all(vals[:, 0, :] < f_vals[None, :], axis=1)
    if spec.g.is_finite:
        ok &= np.all(vals[:, -1, :] > g_vals[None, :], axis=1)
    return ok


def sample_avoiding_walks_batch(
    spec: WalkEnsembleSpec,
    n_samples: int,
    rng: np.random.Generator,
    max_attempts: int,
    chunk: int = 4096,
) -> tuple[list[LineEnsemble], int, int]:
    """Accepted ensembles of k independent walk bridges.

    Returns (samples, n_drawn, n_accepted_seen): candidates are drawn in whole
    chunks, so n_accepted_seen / n_drawn is an unbiased acceptance-rate estimate
    even when more than n_samples acceptances landed in the final chunk.
    """
    lat = spec.lattice
    n = lat.n_steps
    x_units = np.array([lat.snap_units(v) for v in spec.x.values])
    z_units = np.array([lat.snap_units(v) for v in spec.y.values]) - x_units
    grid = lat.time_grid
    f_vals = spec.f.at(grid)
    g_vals = spec.g.at(grid)
    accepted: list[LineEnsemble] = []
    drawn = 0
    seen = 0
    while len(accepted) < n_samples and drawn < max_attempts:
        nc = min(chunk, max_attempts - drawn)
        units = np.empty((nc, spec.k, n + 1), dtype=np.int64)
        units[:, :, 0] = 0
        for i in range(spec.k):
            steps = sample_walk_steps(n, int(z_units[i]), nc, rng)
            units[:, i, 1:] = np.cumsum(steps, axis=1, dtype=np.int64)
        units += x_units[None, :, None]
        vals = units * lat.dx
        ok = _accept_mask(spec, vals, units, f_vals, g_vals)
        seen += int(np.count_nonzero(ok))
        for idx in np.flatnonzero(ok):
            if len(accepted) < n_samples:
                accepted.append(LineEnsemble(lat.interval, vals[idx]))
        drawn += nc
    return accepted, drawn, seen


def sample_avoiding_walks(
    spec: WalkEnsembleSpec,
    rng: np.random.Generator,
    max_attempts: int = 100000,
) -> tuple[LineEnsemble, int]:
    """First accepted ensemble plus the candidate count; raises RejectionExhausted."""
    lat = spec.lattice
    n = lat.n_steps
    x_units = np.array([lat.snap_units(v) for v in spec.x.values])
    z_units = np.array([lat.snap_units(v) for v in spec.y.values]) - x_units
    grid = lat.time_grid
    f_vals = spec.f.at(grid)
    g_vals = spec.g.at(grid)
    attempts = 0
    chunk = 512
    while attempts < max_attempts:
        nc = min(chunk, max_attempts - attempts)
        units = np.empty((nc, spec.k, n + 1), dtype=np.int64)
        units[:, :, 0] = 0
        for i in range(spec.k):
            steps = sample_walk_steps(n, int(z_units[i]), nc, rng)
            units[:, i, 1:] = np.cumsum(steps, axis=1, dtype=np.int64)
        units += x_units[None, :, None]
        vals = units * lat.dx
        ok = _accept_mask(spec, vals, units, f_vals, g_vals)
        hits = np.flatnonzero(ok)
        if hits.size:
            return LineEnsemble(lat.interval, vals[hits[0]]), attempts + int(hits[0]) + 1
        attempts += nc
    raise RejectionExhausted(attempts)


def enumerate_avoiding_configs(spec: WalkEnsembleSpec, guard: int = 10**7) -> list[LineEnsemble]:
    """Exhaustive list of avoiding lattice configurations, lexicographic in the step lists."""
    lat = spec.lattice
    n = lat.n_steps
    if 3 ** (spec.k * n) > guard:
        raise DomainError(f"state space 3^{spec.k * n} exceeds the enumeration guard")
    x_units = [lat.snap_units(v) for v in spec.x.values]
    z_units = [lat.snap_units(spec.y.values[i]) - x_units[i] for i in range(spec.k)]
    grid = lat.time_grid
    f_vals = spec.f.at(grid)
    g_vals = spec.g.at(grid)

    per_curve: list[list[np.ndarray]] = []
    for i in range(spec.k):
        paths = []
        for steps in itertools.product((-1, 0, 1), repeat=n):
            if sum(steps) != z_units[i]:
                continue
            pos = np.zeros(n + 1, dtype=np.int64)
            pos[1:] = np.cumsum(steps)
            paths.append(pos + x_units[i])
        per_curve.append(paths)

    out: list[LineEnsemble] = []
    for combo in itertools.product(*per_curve):
        units = np.stack(combo)
        vals = units * lat.dx
        if spec.k > 1 and not np.all(units[:-1] > units[1:]):
            continue
        if spec.f.is_finite and not np.all(vals[0] < f_vals):
            continue
        if spec.g.is_finite and not np.all(vals[-1] > g_vals):
            continue
        out.append(LineEnsemble(lat.interval, vals))
    return out
