"""Compact metric spaces: point representations, metrics, diameters, grids.

Five kinds of space are supported: closed real intervals, the unit circle
(coordinates in [0,1) with wraparound metric), truncated one-sided binary
sequence space, finite discrete sets, and binary products of the above with
the max metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, GuardError, UnsupportedKindError

MAX_PRODUCT_DEPTH = 8

# Slack for accepting float overshoot at interval endpoints before clamping.
_EDGE_SLACK = 1e-9


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval [lo, hi] with the absolute-difference metric."""

    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"interval needs lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True, slots=True)
class Circle:
    """Unit circle, coordinate t in [0,1), metric min(|a-b|, 1-|a-b|)."""


@dataclass(frozen=True, slots=True)
class SymbolSpace:
    """Binary sequences truncated to `depth` bits.

    The metric between distinct points is 1/2^(k-1) where k is the first
    index at which they differ; bits beyond `depth` are treated as equal,
    so distances below 1/2^(depth-2) collapse to zero.
    """

    depth: int = 64

    def __post_init__(self):
        if self.depth < 2:
            raise DomainError(f"symbol space depth must be >= 2, got {self.depth}")


@dataclass(frozen=True, slots=True)
class FiniteDiscrete:
    """{0, ..., n-1} with the 0/1 discrete metric."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"finite space needs n >= 1, got {self.n}")


@dataclass(frozen=True, slots=True)
class Product:
    """Binary product with metric max(d_left, d_right)."""

    left: "SpaceKind"
    right: "SpaceKind"

    def __post_init__(self):
        if nesting_depth(self) > MAX_PRODUCT_DEPTH:
            raise GuardError(f"product nesting depth exceeds {MAX_PRODUCT_DEPTH}")


SpaceKind = Union[Interval, Circle, SymbolSpace, FiniteDiscrete, Product]


def nesting_depth(kind: SpaceKind) -> int:
    if isinstance(kind, Product):
        return 1 + max(nesting_depth(kind.left), nesting_depth(kind.right))
    return 1


@dataclass(frozen=True, slots=True)
class Point:
    """A point tagged with the space it lives in.

    `value` is a float for Interval/Circle, an int for FiniteDiscrete, a bit
    tuple for SymbolSpace, and a pair of Points for Product. Construct via
    `point()`, which validates and canonicalizes the payload.
    """

    kind: SpaceKind
    value: object


def _as_bits(value, depth: int) -> tuple[int, ...]:
    if isinstance(value, str):
        raw = [int(c) for c in value]
    else:
        raw = [int(b) for b in value]
    if len(raw) > depth:
        raise DomainError(f"bit vector longer than depth {depth}")
    if any(b not in (0, 1) for b in raw):
        raise DomainError("bit vector entries must be 0 or 1")
    return tuple(raw) + (0,) * (depth - len(raw))


def point(kind: SpaceKind, value) -> Point:
    """Validate `value` against `kind` and return a canonical Point."""
    if isinstance(kind, Interval):
        v = float(value)
        if v < kind.lo - _EDGE_SLACK or v > kind.hi + _EDGE_SLACK:
            raise DomainError(f"{v} outside interval [{kind.lo}, {kind.hi}]")
        return Point(kind, min(max(v, kind.lo), kind.hi))
    if isinstance(kind, Circle):
        v = float(value) % 1.0
        if v == 1.0:  # guard against -0.0 % 1.0 edge behavior
            v = 0.0
        return Point(kind, v)
    if isinstance(kind, SymbolSpace):
        return Point(kind, _as_bits(value, kind.depth))
    if isinstance(kind, FiniteDiscrete):
        v = int(value)
        if not 0 <= v < kind.n:
            raise DomainError(f"index {v} outside finite space of size {kind.n}")
        return Point(kind, v)
    if isinstance(kind, Product):
        if not (isinstance(value, tuple) and len(value) == 2):
            raise DomainError("product payload must be a pair")
        l, r = value
        pl = l if isinstance(l, Point) and l.kind == kind.left else point(kind.left, l)
        pr = r if isinstance(r, Point) and r.kind == kind.right else point(kind.right, r)
        return Point(kind, (pl, pr))
    raise UnsupportedKindError(f"unknown space kind {kind!r}")


def distance(a: Point, b: Point) -> float:
    """Metric of the common space of `a` and `b`."""
    if a.kind != b.kind:
        raise DomainError(f"kind mismatch: {a.kind!r} vs {b.kind!r}")
    kind = a.kind
    if isinstance(kind, Interval):
        return abs(a.value - b.value)
    if isinstance(kind, Circle):
        d = abs(a.value - b.value)
        return min(d, 1.0 - d)
    if isinstance(kind, SymbolSpace):
        for k, (sa, sb) in enumerate(zip(a.value, b.value)):
            if sa != sb:
                return 2.0 ** (1 - k)
        return 0.0
    if isinstance(kind, FiniteDiscrete):
        return 0.0 if a.value == b.value else 1.0
    if isinstance(kind, Product):
        return max(distance(a.value[0], b.value[0]), distance(a.value[1], b.value[1]))
    raise UnsupportedKindError(f"unknown space kind {kind!r}")


def diameter(kind: SpaceKind) -> float:
    """Exact sup of the metric over the space."""
    if isinstance(kind, Interval):
        return kind.hi - kind.lo
    if isinstance(kind, Circle):
        return 0.5
    if isinstance(kind, SymbolSpace):
        return 2.0  # first-bit disagreement: 1/2^(0-1)
    if isinstance(kind, FiniteDiscrete):
        return 0.0 if kind.n == 1 else 1.0
    if isinstance(kind, Product):
        return max(diameter(kind.left), diameter(kind.right))
    raise UnsupportedKindError(f"unknown space kind {kind!r}")


def grid(kind: SpaceKind, resolution: float) -> list[Point]:
    """Finite net: every point of the space lies within `resolution` of a
    grid point. Ordering is deterministic (ascending coordinates, left
    component outermost for products)."""
    if resolution <= 0:
        raise DomainError("resolution must be positive")
    if isinstance(kind, Interval):
        span = kind.hi - kind.lo
        npts = max(2, math.ceil(span / resolution) + 1)
        step = span / (npts - 1)
        return [point(kind, kind.lo + i * step) for i in range(npts)]
    if isinstance(kind, Circle):
        m = max(1, math.ceil(1.0 / resolution))
        return [point(kind, i / m) for i in range(m)]
    if isinstance(kind, FiniteDiscrete):
        return [point(kind, i) for i in range(kind.n)]
    if isinstance(kind, Product):
        lefts = grid(kind.left, resolution)
        rights = grid(kind.right, resolution)
        return [point(kind, (l, r)) for l in lefts for r in rights]
    if isinstance(kind, SymbolSpace):
        raise UnsupportedKindError("symbol spaces have no coordinate grid")
    raise UnsupportedKindError(f"unknown space kind {kind!r}")


def sample_point(kind: SpaceKind, rng: np.random.Generator) -> Point:
    """Draw a uniform random point (uniform bits / indices for the discrete
    kinds)."""
    if isinstance(kind, Interval):
        return point(kind, kind.lo + (kind.hi - kind.lo) * rng.random())
    if isinstance(kind, Circle):
        return point(kind, rng.random())
    if isinstance(kind, SymbolSpace):
        return point(kind, rng.integers(0, 2, size=kind.depth))
    if isinstance(kind, FiniteDiscrete):
        return point(kind, int(rng.integers(0, kind.n)))
    if isinstance(kind, Product):
        return point(kind, (sample_point(kind.left, rng), sample_point(kind.right, rng)))
    raise UnsupportedKindError(f"unknown space kind {kind!r}")


# --- flattening helpers for grid-backed spaces (used by the chain machinery)

def leaf_kinds(kind: SpaceKind) -> list[SpaceKind]:
    """Non-product factors of `kind`, left to right."""
    if isinstance(kind, Product):
        return leaf_kinds(kind.left) + leaf_kinds(kind.right)
    return [kind]


def leaf_coords(p: Point) -> list[float]:
    """Flattened numeric coordinates of a point of a grid-backed space."""
    kind = p.kind
    if isinstance(kind, Product):
        return leaf_coords(p.value[0]) + leaf_coords(p.value[1])
    if isinstance(kind, SymbolSpace):
        raise UnsupportedKindError("symbol points have no numeric coordinate")
    return [float(p.value)]


def leaf_distances(kind: SpaceKind, q: float, coords: np.ndarray) -> np.ndarray:
    """Vector of distances from coordinate `q` to every entry of `coords`
    under the metric of the (non-product) `kind`."""
    if isinstance(kind, Interval):
        return np.abs(coords - q)
    if isinstance(kind, Circle):
        d = np.abs(coords - q)
        return np.minimum(d, 1.0 - d)
    if isinstance(kind, FiniteDiscrete):
        return (coords != q).astype(float)
    raise UnsupportedKindError(f"no vectorized metric for {kind!r}")


# --- JSON wire format ------------------------------------------------------

def space_to_json(kind: SpaceKind) -> dict:
    if isinstance(kind, Interval):
        return {"type": "interval", "lo": kind.lo, "hi": kind.hi}
    if isinstance(kind, Circle):
        return {"type": "circle"}
    if isinstance(kind, SymbolSpace):
        return {"type": "symbols", "depth": kind.depth}
    if isinstance(kind, FiniteDiscrete):
        return {"type": "finite", "n": kind.n}
    if isinstance(kind, Product):
        return {
            "type": "product",
            "left": space_to_json(kind.left),
            "right": space_to_json(kind.right),
        }
    raise UnsupportedKindError(f"unknown space kind {kind!r}")


def space_from_json(d: dict) -> SpaceKind:
    t = d["type"]
    if t == "interval":
        return Interval(float(d.get("lo", 0.0)), float(d.get("hi", 1.0)))
    if t == "circle":
        return Circle()
    if t == "symbols":
        return SymbolSpace(int(d.get("depth", 64)))
    if t == "finite":
        return FiniteDiscrete(int(d["n"]))
    if t == "product":
        return Product(space_from_json(d["left"]), space_from_json(d["right"]))
    raise DomainError(f"unknown space type {t!r}")


def _value_to_json(p: Point):
    kind = p.kind
    if isinstance(kind, SymbolSpace):
        return "".join(str(b) for b in p.value)
    if isinstance(kind, Product):
        return [_value_to_json(p.value[0]), _value_to_json(p.value[1])]
    return p.value


def point_to_json(p: Point) -> dict:
    return {"kind": space_to_json(p.kind), "value": _value_to_json(p)}


def _value_from_json(kind: SpaceKind, v):
    if isinstance(kind, Product):
        return (_value_from_json(kind.left, v[0]), _value_from_json(kind.right, v[1]))
    return v


def point_from_json(d: dict) -> Point:
    kind = space_from_json(d["kind"])
    return point(kind, _value_from_json(kind, d["value"]))


def value_repr(p: Point) -> str:
    """Compact single-cell text form of a point payload (CSV export)."""
    kind = p.kind
    if isinstance(kind, SymbolSpace):
        return "".join(str(b) for b in p.value)
    if isinstance(kind, Product):
        return value_repr(p.value[0]) + ";" + value_repr(p.value[1])
    return repr(p.value)
