"""Cesàro averages, index-set densities, and the density-zero decomposition
of a Cesàro-null bounded sequence (both directions, at finite horizon)."""

from __future__ import annotations

import csv
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError


@dataclass(frozen=True, eq=False)
class Series:
    """Finite sequence of nonnegative reals with an optional declared bound."""

    values: np.ndarray
    bound: Optional[float] = None

    @property
    def horizon(self) -> int:
        return len(self.values)

    @property
    def effective_bound(self) -> float:
        if self.bound is not None:
            return self.bound
        return float(self.values.max()) if len(self.values) else 0.0


def series(values, bound: Optional[float] = None) -> Series:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DomainError("series values must be one-dimensional")
    if len(arr) and float(arr.min()) < 0:
        raise DomainError("series values must be nonnegative")
    if bound is not None and len(arr) and float(arr.max()) > bound + 1e-12:
        raise DomainError(f"series exceeds declared bound {bound}")
    arr = arr.copy()
    arr.setflags(write=False)
    return Series(arr, bound)


def harmonic_series(n: int) -> Series:
    """a_i = 1/(i+1)."""
    return series(1.0 / np.arange(1, n + 1), bound=1.0)


def constant_series(n: int, c: float) -> Series:
    return series(np.full(n, float(c)), bound=max(c, 0.0) or None)


def cesaro_average(s: Series, n: int) -> float:
    """(1/n) * sum of the first n values."""
    if not 1 <= n <= s.horizon:
        raise DomainError(f"prefix length {n} outside [1, {s.horizon}]")
    return float(s.values[:n].sum() / n)


def running_average_curve(s: Series) -> Series:
    """Curve c_n = cesaro_average(s, n) for n = 1..horizon."""
    if s.horizon < 1:
        raise DomainError("empty series has no average curve")
    curve = np.cumsum(s.values) / np.arange(1, s.horizon + 1)
    return series(curve)


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing nonnegative integers below a horizon."""

    indices: tuple[int, ...]
    horizon: int

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise DomainError("indices must be strictly increasing")
        if self.indices and (self.indices[0] < 0 or self.indices[-1] >= self.horizon):
            raise DomainError("indices must lie in [0, horizon)")

    def __contains__(self, i: int) -> bool:
        pos = bisect_left(self.indices, i)
        return pos < len(self.indices) and self.indices[pos] == i

    def __len__(self) -> int:
        return len(self.indices)


def index_set(indices: Iterable[int], horizon: int) -> IndexSet:
    return IndexSet(tuple(sorted(set(int(i) for i in indices))), horizon)


def density(j: IndexSet, n: int) -> float:
    """|J intersect [0, n)| / n."""
    if n < 1:
        raise DomainError("density prefix must be >= 1")
    return bisect_left(j.indices, n) / n


def block_saturation(j: IndexSet, k: int) -> IndexSet:
    """Union of all length-k aligned blocks that meet J, clipped to the
    horizon. Saturation multiplies density by at most k (plus k/horizon)."""
    if k < 1:
        raise DomainError("block size must be >= 1")
    blocks = sorted({i // k for i in j.indices})
    out = []
    for b in blocks:
        out.extend(range(b * k, min((b + 1) * k, j.horizon)))
    return IndexSet(tuple(out), j.horizon)


@dataclass(frozen=True)
class LevelCut:
    """One threshold level of the decomposition: indices from `start` onward
    are marked when they exceed `theta`."""

    k: int
    theta: float
    start: int


@dataclass(frozen=True)
class DensityDecomposition:
    index_set: IndexSet
    no_decay: bool
    levels: tuple[LevelCut, ...]
    tail_max: float
    tail_threshold: float


def _level_start(ind: np.ndarray, theta: float) -> int:
    """Smallest m such that every prefix average of `ind` of length > m stays
    strictly below theta (horizon-limited scan)."""
    run = np.cumsum(ind) / np.arange(1, len(ind) + 1)
    bad = np.nonzero(run >= theta)[0]
    return int(bad[-1]) + 1 if len(bad) else 0


def extract_null_density_set(s: Series, max_levels: int = 60) -> DensityDecomposition:
    """Split off a small-density index set J so that the series is small
    outside J.

    Level construction: for k = 1, 2, ... with thresholds theta_k = 2^-k,
    find the first position after which the running fraction of values above
    theta_k stays below theta_k; from there until the next level starts, mark
    exactly the values above theta_k. If the overall average never falls
    below half the bound, the whole prefix is returned with `no_decay` set.
    """
    a = s.values
    horizon = s.horizon
    if horizon < 1:
        raise DomainError("cannot decompose an empty series")
    bound = s.effective_bound
    final_avg = float(a.mean())
    if bound > 0 and final_avg >= bound / 2:
        return DensityDecomposition(
            index_set=IndexSet(tuple(range(horizon)), horizon),
            no_decay=True,
            levels=(),
            tail_max=0.0,
            tail_threshold=bound,
        )

    levels: list[LevelCut] = []
    prev_start = 0
    for k in range(1, max_levels + 1):
        theta = 2.0 ** -k
        start = max(_level_start(a > theta, theta), prev_start)
        if start >= horizon:
            break
        levels.append(LevelCut(k, theta, start))
        prev_start = start

    mask = np.zeros(horizon, dtype=bool)
    for cut, nxt in zip(levels, levels[1:] + [None]):
        end = horizon if nxt is None else nxt.start
        seg = slice(cut.start, end)
        mask[seg] = a[seg] > cut.theta

    half = horizon // 2
    off_tail = a[half:][~mask[half:]]
    tail_max = float(off_tail.max()) if len(off_tail) else 0.0
    tail_threshold = bound
    for cut, nxt in zip(levels, levels[1:] + [None]):
        end = horizon if nxt is None else nxt.start
        if end > half:
            tail_threshold = cut.theta
            break
    return DensityDecomposition(
        index_set=IndexSet(tuple(int(i) for i in np.nonzero(mask)[0]), horizon),
        no_decay=False,
        levels=tuple(levels),
        tail_max=tail_max,
        tail_threshold=tail_threshold,
    )


@dataclass(frozen=True)
class DensityCheck:
    cesaro: float
    density: float
    density_term: float
    tail: float
    verdict: bool


def verify_null_density_implies_average(s: Series, j: IndexSet, tol: float) -> DensityCheck:
    """Check the decomposition bound at full horizon: the average should not
    exceed density(J)*B plus the off-J tail maximum (second half), within
    tol; the tail itself must also be below tol for the verdict to hold."""
    horizon = s.horizon
    if j.horizon != horizon:
        raise DomainError("index set horizon does not match the series")
    avg = cesaro_average(s, horizon)
    dens = density(j, horizon)
    dens_term = dens * s.effective_bound
    mask = np.zeros(horizon, dtype=bool)
    if j.indices:
        mask[np.asarray(j.indices)] = True
    half = horizon // 2
    off_tail = s.values[half:][~mask[half:]]
    tail = float(off_tail.max()) if len(off_tail) else 0.0
    verdict = avg <= dens_term + tail + tol
    return DensityCheck(avg, dens, dens_term, tail, verdict)


# --- exports ----------------------------------------------------------------

def series_to_csv(s: Series, path, index_name: str = "index", value_name: str = "value",
                  start: int = 0, comments: Sequence[str] = ()) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        writer = csv.writer(fh)
        writer.writerow([index_name, value_name])
        for i, v in enumerate(s.values, start=start):
            writer.writerow([i, repr(float(v))])


def series_from_csv(path) -> Series:
    values = []
    with Path(path).open() as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    for row in rows[1:]:
        values.append(float(row[1]))
    return series(values)


def index_set_to_json(j: IndexSet) -> list[int]:
    return list(j.indices)
