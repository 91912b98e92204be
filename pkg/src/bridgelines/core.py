"""Shared domain types: intervals, curves, ensembles, barriers, lattice grids, RNG streams.

Curves live on uniform time grids and are linearly interpolated in between.
All types are immutable values after construction; nothing here mutates in place.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class StructuralError(ValueError):
    """Mismatched grids, intervals, or shapes."""


# ---------------------------------------------------------------------------
# intervals and boundary data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """Time interval [a, b] with a < b."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise DomainError(f"interval needs a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def contains(self, t: float) -> bool:
        return self.a <= t <= self.b

    def grid(self, m: int) -> np.ndarray:
        """Uniform grid of m+1 points from a to b."""
        return np.linspace(self.a, self.b, m + 1)


@dataclass(frozen=True)
class WeylVector:
    """Strictly decreasing k-tuple of spatial positions (valid entrance/exit data)."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 1:
            raise DomainError("need at least one entry")
        if any(vals[i] <= vals[i + 1] for i in range(len(vals) - 1)):
            raise DomainError(f"entries must be strictly decreasing, got {vals}")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def shifted(self, delta: float) -> "WeylVector":
        return WeylVector(tuple(v + delta for v in self.values))


# ---------------------------------------------------------------------------
# curves and ensembles
# ---------------------------------------------------------------------------

def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.asarray(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Curve:
    """Continuous path stored as values on a uniform grid, linear in between."""

    interval: Interval
    values: np.ndarray  # shape (M+1,)

    def __post_init__(self):
        vals = _freeze(self.values)
        if vals.ndim != 1 or vals.size < 2:
            raise StructuralError("curve needs a 1-d array of at least 2 values")
        object.__setattr__(self, "values", vals)

    @property
    def m(self) -> int:
        return self.values.size - 1

    @property
    def grid(self) -> np.ndarray:
        return self.interval.grid(self.m)

    def __call__(self, t) -> float | np.ndarray:
        return eval_curve(self, t)


def eval_curve(c: Curve, t) -> float | np.ndarray:
    """Evaluate a curve at time(s) t by linear interpolation; exact at grid points."""
    t = np.asarray(t, dtype=float)
    if np.any(t < c.interval.a) or np.any(t > c.interval.b):
        raise DomainError(f"t={t} outside [{c.interval.a}, {c.interval.b}]")
    # map to fractional grid index; clamp handles t == b exactly
    u = (t - c.interval.a) / c.interval.length * c.m
    j = np.minimum(np.floor(u).astype(int), c.m - 1)
    frac = u - j
    out = c.values[j] * (1.0 - frac) + c.values[j + 1] * frac
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Barrier:
    """Upper/lower constraint: +inf, -inf, or a sampled curve."""

    kind: str  # "+inf", "-inf", or "curve"
    curve: Curve | None = None

    PLUS_INF = "+inf"
    MINUS_INF = "-inf"
    CURVE = "curve"

    def __post_init__(self):
        if self.kind not in (self.PLUS_INF, self.MINUS_INF, self.CURVE):
            raise DomainError(f"unknown barrier kind {self.kind!r}")
        if (self.kind == self.CURVE) != (self.curve is not None):
            raise StructuralError("curve barrier needs a curve; sentinel barriers do not")

    @classmethod
    def plus_inf(cls) -> "Barrier":
        return cls(cls.PLUS_INF)

    @classmethod
    def minus_inf(cls) -> "Barrier":
        return cls(cls.MINUS_INF)

    @classmethod
    def from_curve(cls, c: Curve) -> "Barrier":
        return cls(cls.CURVE, c)

    @classmethod
    def constant(cls, level: float, interval: Interval) -> "Barrier":
        return cls.from_curve(Curve(interval, np.full(2, float(level))))

    @property
    def is_finite(self) -> bool:
        return self.kind == self.CURVE

    def at(self, times) -> np.ndarray:
        """Barrier values at the given times; sentinels give +/-inf arrays."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self.kind == self.PLUS_INF:
            return np.full(times.shape, np.inf)
        if self.kind == self.MINUS_INF:
            return np.full(times.shape, -np.inf)
        return np.atleast_1d(eval_curve(self.curve, times))


@dataclass(frozen=True)
class LineEnsemble:
    """k ordered curves on a shared interval and grid (index 0 is the top curve)."""

    interval: Interval
    values: np.ndarray  # shape (k, M+1)

    def __post_init__(self):
        vals = _freeze(self.values)
        if vals.ndim != 2 or vals.shape[1] < 2:
            raise StructuralError("ensemble needs a (k, M+1) array with M >= 1")
        object.__setattr__(self, "values", vals)

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1] - 1

    @property
    def grid(self) -> np.ndarray:
        return self.interval.grid(self.m)

    def curve(self, i: int) -> Curve:
        return Curve(self.interval, self.values[i])

    def curves(self) -> list[Curve]:
        return [self.curve(i) for i in range(self.k)]


def check_avoiding(ens: LineEnsemble, f: Barrier, g: Barrier) -> bool:
    """True iff f > curve_0 > ... > curve_{k-1} > g strictly at every grid point."""
    vals = ens.values
    if vals.shape[0] > 1 and not np.all(vals[:-1] > vals[1:]):
        return False
    grid = ens.grid
    if f.is_finite and not np.all(f.at(grid) > vals[0]):
        return False
    if g.is_finite and not np.all(g.at(grid) < vals[-1]):
        return False
    return True


# ---------------------------------------------------------------------------
# lattice parameters (walk discretization grids)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeParams:
    """Walk lattice: dt = (b-a)/n_steps and dx = sqrt(3 dt / 2).

    The scaling parameter n gives n_steps = n^2 via `scaled`; instances on
    sub-ranges of a finer grid (a walk of a few lattice steps) construct with
    the step count directly.
    """

    interval: Interval
    n_steps: int
    dt: float = field(init=False)
    dx: float = field(init=False)

    def __post_init__(self):
        if self.n_steps < 1:
            raise DomainError("n_steps must be a positive integer")
        dt = self.interval.length / self.n_steps
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "dx", float(np.sqrt(1.5 * dt)))

    @classmethod
    def scaled(cls, interval: Interval, n: int) -> "LatticeParams":
        """Standard parameterization: n^2 time steps of size (b-a)/n^2."""
        if n < 1:
            raise DomainError("n must be a positive integer")
        return cls(interval, n * n)

    @property
    def time_grid(self) -> np.ndarray:
        return self.interval.grid(self.n_steps)

    def snap_units(self, x: float) -> int:
        """Nearest lattice index of x; errors if x is off-lattice beyond 1e-12*dx."""
        u = x / self.dx
        r = round(u)
        if abs(u - r) > 1e-12 * max(1.0, abs(u)):
            raise DomainError(f"{x} is not an integer multiple of dx={self.dx}")
        return int(r)

    def snap_window(self, lo: float, hi: float) -> tuple[int, int]:
        """Column indices of the smallest lattice window containing [lo, hi].

        The left edge snaps down (maximal lattice time <= lo) and the right
        edge snaps up (minimal lattice time >= hi), clamped to the grid.
        """
        if not (self.interval.a <= lo < hi <= self.interval.b):
            raise DomainError("window must sit inside the lattice interval")
        j_lo = int(np.floor((lo - self.interval.a) / self.dt + 1e-12))
        j_hi = int(np.ceil((hi - self.interval.a) / self.dt - 1e-12))
        return max(0, j_lo), min(self.n_steps, j_hi)


# ---------------------------------------------------------------------------
# seeded RNG streams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RngSeed:
    """Root seed plus a stream id; equal pairs reproduce identical samples bit-exactly.

    Derived streams are obtained by hashing (stream, label) with blake2b and
    keeping 64 bits, so independently named substreams never collide by
    construction of the hash. This is the single derivation rule used by every
    module and the CLI.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not (0 <= self.seed < 2**64) or not (0 <= self.stream < 2**64):
            raise DomainError("seed and stream must fit in 64 bits")

    def derive(self, label) -> "RngSeed":
        h = hashlib.blake2b(f"{self.stream}/{label}".encode(), digest_size=8)
        return RngSeed(self.seed, int.from_bytes(h.digest(), "little"))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, self.stream]))


# ---------------------------------------------------------------------------
# columnar text serialization (the only on-disk curve format)
# ---------------------------------------------------------------------------

def write_ensembles(path, ensembles: list[LineEnsemble]) -> None:
    """Write ensembles in the columnar format: header `k M a b`, rows `t v_1 ... v_k`."""
    with open(path, "w") as fh:
        for ens in ensembles:
            fh.write(f"{ens.k} {ens.m} {ens.interval.a!r} {ens.interval.b!r}\n")
            grid = ens.grid
            for j in range(ens.m + 1):
                row = " ".join(repr(float(v)) for v in ens.values[:, j])
                fh.write(f"{grid[j]!r} {row}\n")


def read_ensembles(path) -> list[LineEnsemble]:
    """Read back ensembles written by write_ensembles."""
    out = []
    with open(path) as fh:
        lines = [ln for ln in (l.strip() for l in fh) if ln]
    pos = 0
    while pos < len(lines):
        k, m, a, b = lines[pos].split()
        k, m = int(k), int(m)
        vals = np.empty((k, m + 1))
        for j in range(m + 1):
            parts = lines[pos + 1 + j].split()
            vals[:, j] = [float(p) for p in parts[1:]]
        out.append(LineEnsemble(Interval(float(a), float(b)), vals))
        pos += m + 2
    return out
