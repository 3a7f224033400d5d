"""IFS definitions, selector sequences, orbits, and the three constructions
(k-fold power, product, conjugacy transport).

Maps are closed-form evaluators described by a small form catalog so that
systems serialize to JSON. The `compose` and `product` forms nest other map
definitions; `conjugate` wraps an arbitrary callable and does not serialize.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    ConjugacyError,
    DomainError,
    GuardError,
    LengthError,
)
from .spaces import (
    Circle,
    FiniteDiscrete,
    Interval,
    Point,
    Product,
    SpaceKind,
    SymbolSpace,
    distance,
    point,
    sample_point,
    space_from_json,
    space_to_json,
)

POWER_GUARD = 4096


@dataclass(frozen=True)
class MapDef:
    """One continuous self-map, given by a named closed form.

    Forms:
      identity                params ()
      affine                  params (a, b): t -> a*t + b on an interval
      twopiece_quadratic      params (c_low, c_high):
                                t -> t + c_low*(1/2 - t)*t        on [0, 1/2]
                                t -> t + c_high*(1 - t)*(t - 1/2) on [1/2, 1]
                              (interval [0,1] or circle coordinates)
      prepend                 params (bit,): push a bit at index 0, drop the
                              last bit of the truncated sequence
      permutation             params (image tuple) on a finite space
      compose                 params: MapDefs applied first-to-last
      product                 params (left MapDef, right MapDef)
      conjugate               fn-backed, produced by conjugate_ifs
    """

    name: str
    form: str
    params: tuple = ()
    fn: Optional[Callable[[Point], Point]] = field(default=None, compare=False)


def _twopiece(c_low: float, c_high: float, t: float) -> float:
    if t <= 0.5:
        return t + c_low * (0.5 - t) * t
    return t + c_high * (1.0 - t) * (t - 0.5)


def apply_map(m: MapDef, x: Point) -> Point:
    kind = x.kind
    if m.form == "identity":
        return x
    if m.form == "affine":
        if not isinstance(kind, Interval):
            raise DomainError("affine maps act on intervals")
        a, b = m.params
        return point(kind, a * x.value + b)
    if m.form == "twopiece_quadratic":
        if not isinstance(kind, (Interval, Circle)):
            raise DomainError("twopiece_quadratic acts on [0,1] or the circle")
        if isinstance(kind, Interval) and (kind.lo, kind.hi) != (0.0, 1.0):
            raise DomainError("twopiece_quadratic needs the unit interval")
        c_low, c_high = m.params
        return point(kind, _twopiece(c_low, c_high, x.value))
    if m.form == "prepend":
        if not isinstance(kind, SymbolSpace):
            raise DomainError("prepend acts on symbol spaces")
        (bit,) = m.params
        return Point(kind, (bit,) + x.value[: kind.depth - 1])
    if m.form == "permutation":
        if not isinstance(kind, FiniteDiscrete):
            raise DomainError("permutations act on finite spaces")
        return point(kind, m.params[x.value])
    if m.form == "compose":
        for sub in m.params:
            x = apply_map(sub, x)
        return x
    if m.form == "product":
        if not isinstance(kind, Product):
            raise DomainError("product maps act on product spaces")
        ml, mr = m.params
        return Point(kind, (apply_map(ml, x.value[0]), apply_map(mr, x.value[1])))
    if m.form == "conjugate":
        return m.fn(x)
    raise DomainError(f"unknown map form {m.form!r}")


@dataclass(frozen=True)
class IFSSpec:
    """A finite indexed family of continuous self-maps of one space."""

    space: SpaceKind
    maps: tuple[MapDef, ...]
    claimed_contraction: Optional[float] = None
    surjective_flags: tuple[bool, ...] = ()
    name: str = ""

    def __post_init__(self):
        if not self.maps:
            raise DomainError("an IFS needs at least one map")
        if self.claimed_contraction is not None and not 0 < self.claimed_contraction < 1:
            raise DomainError("claimed contraction ratio must lie in (0,1)")
        if not self.surjective_flags:
            object.__setattr__(self, "surjective_flags", (False,) * len(self.maps))
        if len(self.surjective_flags) != len(self.maps):
            raise DomainError("one surjectivity flag per map is required")

    @property
    def nmaps(self) -> int:
        return len(self.maps)


@dataclass(frozen=True)
class SelectorSequence:
    """Finite realization of a map-index choice sequence."""

    entries: tuple[int, ...]
    generator: str = "explicit"

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, i: int) -> int:
        if i >= len(self.entries):
            raise LengthError(
                f"selector exhausted: entry {i} requested, {len(self.entries)} realized"
            )
        return self.entries[i]

    def shift(self, n: int) -> "SelectorSequence":
        if n > len(self.entries):
            raise LengthError("shift past end of selector")
        return SelectorSequence(self.entries[n:], f"{self.generator}>>{n}")


def _check_entries(entries: Sequence[int], nmaps: Optional[int]) -> tuple[int, ...]:
    out = tuple(int(e) for e in entries)
    if any(e < 0 for e in out):
        raise DomainError("selector entries must be nonnegative map indices")
    if nmaps is not None and any(e >= nmaps for e in out):
        raise DomainError(f"selector entry out of range for {nmaps} maps")
    return out


def selector_explicit(entries: Sequence[int], nmaps: Optional[int] = None) -> SelectorSequence:
    return SelectorSequence(_check_entries(entries, nmaps), "explicit")


def selector_periodic(pattern: Sequence[int], length: int, nmaps: Optional[int] = None) -> SelectorSequence:
    pat = _check_entries(pattern, nmaps)
    if not pat:
        raise DomainError("periodic selector needs a nonempty pattern")
    reps = -(-length // len(pat))
    return SelectorSequence((pat * reps)[:length], f"periodic:{''.join(map(str, pat))}")


def selector_random(seed: int, length: int, nmaps: int) -> SelectorSequence:
    rng = np.random.default_rng(seed)
    entries = tuple(int(v) for v in rng.integers(0, nmaps, size=length))
    return SelectorSequence(entries, f"random:{seed}")


@dataclass(frozen=True)
class OrbitRecord:
    """A true trajectory: points[i+1] = f_{selector[i]}(points[i])."""

    initial: Point
    selector: SelectorSequence
    points: tuple[Point, ...]


def apply(ifs: IFSSpec, lam: int, x: Point) -> Point:
    """Evaluate the lam-th map of the family at x."""
    if not 0 <= lam < ifs.nmaps:
        raise DomainError(f"map index {lam} out of range for {ifs.nmaps} maps")
    if x.kind != ifs.space:
        raise DomainError("point does not belong to the IFS space")
    return apply_map(ifs.maps[lam], x)


def orbit(ifs: IFSSpec, selector: SelectorSequence, x0: Point, n: int) -> OrbitRecord:
    """Iterate n steps under the selector, keeping every point."""
    if x0.kind != ifs.space:
        raise DomainError("initial point does not belong to the IFS space")
    pts = [x0]
    cur = x0
    for i in range(n):
        cur = apply(ifs, selector.entry(i), cur)
        pts.append(cur)
    return OrbitRecord(x0, selector, tuple(pts))


def compose_apply(ifs: IFSSpec, selector: SelectorSequence, n: int, x: Point) -> Point:
    """n-step composition applied to x; the 0-step composition is the identity."""
    cur = x
    for i in range(n):
        cur = apply(ifs, selector.entry(i), cur)
    return cur


def estimate_contraction_ratio(ifs: IFSSpec, sample_pairs: int, seed: int) -> float:
    """Sampled lower bound on the contraction ratio: max over random distinct
    pairs and all maps of d(f(x), f(y)) / d(x, y).

    Pairs are drawn one at a time, so estimates with the same seed form a
    running max as `sample_pairs` grows.
    """
    if sample_pairs < 1:
        raise DomainError("sample_pairs must be >= 1")
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(sample_pairs):
        a = sample_point(ifs.space, rng)
        b = sample_point(ifs.space, rng)
        d = distance(a, b)
        # Skip near-degenerate pairs: below this floor the ratio noise
        # ~2^-52/d from rounded map evaluations would exceed the 1e-9
        # slack allowed when checking estimates against a claimed ratio.
        if d < 1e-6:
            continue
        for m in ifs.maps:
            ratio = distance(apply_map(m, a), apply_map(m, b)) / d
            if ratio > best:
                best = ratio
    return best


def word_digits(mu: int, base: int, k: int) -> tuple[int, ...]:
    """Decode a word index into (lambda_0, ..., lambda_{k-1}), lambda_0 being
    the most significant base-`base` digit."""
    digits = []
    for _ in range(k):
        digits.append(mu % base)
        mu //= base
    return tuple(reversed(digits))


def word_index(digits: Sequence[int], base: int) -> int:
    mu = 0
    for d in digits:
        mu = mu * base + d
    return mu


def power_ifs(ifs: IFSSpec, k: int) -> IFSSpec:
    """k-fold composition family: one map per length-k word over the index
    set. Word (lambda_0, ..., lambda_{k-1}) composes with lambda_0 applied
    first and is indexed with lambda_0 as the most significant digit."""
    if k < 2:
        raise DomainError("power needs k >= 2")
    count = ifs.nmaps ** k
    if count > POWER_GUARD:
        raise GuardError(f"|maps|^k = {count} exceeds guard {POWER_GUARD}")
    maps = []
    flags = []
    for mu in range(count):
        digits = word_digits(mu, ifs.nmaps, k)
        chain = tuple(ifs.maps[d] for d in digits)
        name = " o ".join(m.name for m in reversed(chain))
        maps.append(MapDef(name, "compose", chain))
        flags.append(all(ifs.surjective_flags[d] for d in digits))
    claimed = None
    if ifs.claimed_contraction is not None:
        claimed = ifs.claimed_contraction ** k
    return IFSSpec(
        space=ifs.space,
        maps=tuple(maps),
        claimed_contraction=claimed,
        surjective_flags=tuple(flags),
        name=f"{ifs.name}^{k}" if ifs.name else f"power{k}",
    )


def pair_index(lam: int, gam: int, nleft: int) -> int:
    return lam + nleft * gam


def pair_split(idx: int, nleft: int) -> tuple[int, int]:
    return idx % nleft, idx // nleft


def product_ifs(left: IFSSpec, right: IFSSpec) -> IFSSpec:
    """Componentwise product family on the product space. The combined index
    encodes (lambda, gamma) with lambda least significant."""
    count = left.nmaps * right.nmaps
    if count > POWER_GUARD:
        raise GuardError(f"|maps| = {count} exceeds guard {POWER_GUARD}")
    space = Product(left.space, right.space)
    maps = []
    flags = []
    for idx in range(count):
        lam, gam = pair_split(idx, left.nmaps)
        ml, mr = left.maps[lam], right.maps[gam]
        maps.append(MapDef(f"{ml.name}x{mr.name}", "product", (ml, mr)))
        flags.append(left.surjective_flags[lam] and right.surjective_flags[gam])
    claimed = None
    if left.claimed_contraction is not None and right.claimed_contraction is not None:
        claimed = max(left.claimed_contraction, right.claimed_contraction)
    return IFSSpec(
        space=space,
        maps=tuple(maps),
        claimed_contraction=claimed,
        surjective_flags=tuple(flags),
        name=f"{left.name}x{right.name}",
    )


def conjugate_ifs(
    ifs: IFSSpec,
    h: Callable[[Point], Point],
    h_inv: Callable[[Point], Point],
    target_space: SpaceKind,
    samples: int = 32,
    seed: int = 0,
    tol: float = 1e-9,
) -> IFSSpec:
    """Transport the family through a homeomorphism h: each map f becomes
    h o f o h_inv on the target space. h/h_inv round trips are validated on
    random samples of both spaces before any map is built."""
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        x = sample_point(ifs.space, rng)
        y = sample_point(target_space, rng)
        hx = h(x)
        if hx.kind != target_space:
            raise ConjugacyError("h does not land in the target space")
        if distance(h_inv(hx), x) > tol or distance(h(h_inv(y)), y) > tol:
            raise ConjugacyError(f"h round trip exceeds tolerance {tol}")

    def _transport(m: MapDef) -> MapDef:
        def g(p: Point, _m=m) -> Point:
            return h(apply_map(_m, h_inv(p)))

        return MapDef(f"{m.name}~h", "conjugate", (), g)

    return IFSSpec(
        space=target_space,
        maps=tuple(_transport(m) for m in ifs.maps),
        claimed_contraction=None,
        surjective_flags=ifs.surjective_flags,
        name=f"{ifs.name}~h" if ifs.name else "conjugated",
    )


def subsystem(ifs: IFSSpec, indices: Sequence[int]) -> IFSSpec:
    """Restriction of the family to a subset of its map indices."""
    idx = tuple(indices)
    if not idx:
        raise DomainError("subsystem needs at least one index")
    if any(not 0 <= i < ifs.nmaps for i in idx):
        raise DomainError("subsystem index out of range")
    return IFSSpec(
        space=ifs.space,
        maps=tuple(ifs.maps[i] for i in idx),
        claimed_contraction=ifs.claimed_contraction,
        surjective_flags=tuple(ifs.surjective_flags[i] for i in idx),
        name=f"{ifs.name}[{','.join(map(str, idx))}]",
    )


def validate_ifs(ifs: IFSSpec, samples: int = 32, seed: int = 0) -> None:
    """Spot-check that every map sends sampled points of the space back into
    the space (raises DomainError otherwise)."""
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        x = sample_point(ifs.space, rng)
        for m in ifs.maps:
            y = apply_map(m, x)
            if y.kind != ifs.space:
                raise DomainError(f"map {m.name} leaves the space")


# --- JSON wire format ------------------------------------------------------

def map_to_json(m: MapDef) -> dict:
    if m.form == "conjugate":
        raise DomainError("conjugate maps carry a closure and do not serialize")
    if m.form in ("compose", "product"):
        params = [map_to_json(sub) for sub in m.params]
    else:
        params = list(m.params)
    return {"name": m.name, "form": m.form, "params": params}


def map_from_json(d: dict) -> MapDef:
    form = d["form"]
    if form in ("compose", "product"):
        params = tuple(map_from_json(sub) for sub in d["params"])
    elif form == "permutation":
        params = tuple(int(v) for v in d["params"])
    elif form == "prepend":
        params = (int(d["params"][0]),)
    else:
        params = tuple(float(v) for v in d["params"])
    return MapDef(d["name"], form, params)


def ifs_to_json(ifs: IFSSpec) -> dict:
    return {
        "name": ifs.name,
        "space": space_to_json(ifs.space),
        "maps": [map_to_json(m) for m in ifs.maps],
        "claimed_contraction": ifs.claimed_contraction,
        "surjective": list(ifs.surjective_flags),
    }


def ifs_from_json(d: dict) -> IFSSpec:
    return IFSSpec(
        space=space_from_json(d["space"]),
        maps=tuple(map_from_json(m) for m in d["maps"]),
        claimed_contraction=d.get("claimed_contraction"),
        surjective_flags=tuple(bool(b) for b in d.get("surjective", [])),
        name=d.get("name", ""),
    )
