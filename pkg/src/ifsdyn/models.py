"""Catalog of concrete systems used throughout the tests and experiments.

binary_affine      two affine halvings of [0,1] (contracting, ratio 1/2)
sigma2_prepend     bit-prepend pair on the truncated sequence space
circle_pair        two degree-one circle homeomorphisms F1, F2 that agree on
                   the lower half; F1 attracts the upper half to 1/2, F2
                   pushes it up to 1
interval_pair      two interval homeomorphisms with f1(x) > f2(x) > x away
                   from the fixed points {0, 1/2, 1}, so both halves of [0,1]
                   are invariant
finite_permutations(n)   all n! permutations of {0..n-1}, n <= 5
affine_family(betas, offsets)   user-chosen contracting affine maps
"""

from __future__ import annotations

from itertools import permutations

from .core import IFSSpec, MapDef, apply_map, validate_ifs
from .errors import BranchError, DomainError, GuardError
from .spaces import (
    Circle,
    FiniteDiscrete,
    Interval,
    Point,
    SymbolSpace,
    distance,
    point,
)

_BISECT_STEPS = 80  # interval shrinks to ~1e-24, far below float resolution

UNIT = Interval(0.0, 1.0)


def _binary_affine() -> IFSSpec:
    return IFSSpec(
        space=UNIT,
        maps=(
            MapDef("half", "affine", (0.5, 0.0)),
            MapDef("half_up", "affine", (0.5, 0.5)),
        ),
        claimed_contraction=0.5,
        surjective_flags=(False, False),
        name="binary_affine",
    )


def _sigma2_prepend(depth: int = 64) -> IFSSpec:
    return IFSSpec(
        space=SymbolSpace(depth),
        maps=(
            MapDef("prepend0", "prepend", (0,)),
            MapDef("prepend1", "prepend", (1,)),
        ),
        claimed_contraction=0.5,
        surjective_flags=(False, False),
        name="sigma2_prepend",
    )


def _circle_pair() -> IFSSpec:
    return IFSSpec(
        space=Circle(),
        maps=(
            MapDef("F1", "twopiece_quadratic", (1.0, -1.0)),
            MapDef("F2", "twopiece_quadratic", (1.0, 1.0)),
        ),
        claimed_contraction=None,
        surjective_flags=(True, True),
        name="circle_pair",
    )


def _interval_pair() -> IFSSpec:
    # f1's coefficient 1.5 is one concrete monotone realization of the
    # ordering constraint f1 > f2 > identity away from {0, 1/2, 1}.
    return IFSSpec(
        space=UNIT,
        maps=(
            MapDef("f1", "twopiece_quadratic", (1.5, 1.5)),
            MapDef("f2", "twopiece_quadratic", (1.0, 1.0)),
        ),
        claimed_contraction=None,
        surjective_flags=(True, True),
        name="interval_pair",
    )


def _finite_permutations(n: int) -> IFSSpec:
    if not 1 <= n <= 5:
        raise GuardError(f"finite_permutations supports n <= 5, got {n}")
    perms = sorted(permutations(range(n)))
    return IFSSpec(
        space=FiniteDiscrete(n),
        maps=tuple(MapDef("p" + "".join(map(str, p)), "permutation", p) for p in perms),
        claimed_contraction=None,
        surjective_flags=(True,) * len(perms),
        name=f"finite_permutations:{n}",
    )


def _affine_family(betas, offsets) -> IFSSpec:
    betas = tuple(float(b) for b in betas)
    offsets = tuple(float(c) for c in offsets)
    if len(betas) != len(offsets) or not betas:
        raise DomainError("betas and offsets must be equal-length and nonempty")
    for b, c in zip(betas, offsets):
        if not abs(b) < 1:
            raise GuardError(f"affine_family slopes must satisfy |beta| < 1, got {b}")
        for endpoint in (c, b + c):
            if not 0.0 <= endpoint <= 1.0:
                raise DomainError(f"map x -> {b}x + {c} leaves [0,1]")
    return IFSSpec(
        space=UNIT,
        maps=tuple(
            MapDef(f"aff{i}", "affine", (b, c)) for i, (b, c) in enumerate(zip(betas, offsets))
        ),
        claimed_contraction=max(abs(b) for b in betas),
        surjective_flags=(False,) * len(betas),
        name="affine_family",
    )


_CATALOG = {
    "binary_affine": (_binary_affine, "two affine halvings of [0,1], ratio 0.5"),
    "sigma2_prepend": (_sigma2_prepend, "bit-prepend pair on the sequence space"),
    "circle_pair": (_circle_pair, "circle homeomorphism pair F1/F2"),
    "interval_pair": (_interval_pair, "interval pair with invariant halves"),
    "finite_permutations": (_finite_permutations, "all permutations of {0..n-1}, n<=5"),
    "affine_family": (_affine_family, "contracting affine maps (betas, offsets)"),
}


def list_models() -> list[tuple[str, str]]:
    return [(name, desc) for name, (_, desc) in _CATALOG.items()]


def parse_model_id(model_id: str) -> tuple[str, dict]:
    """Split 'name' or 'name:arg' CLI form into builder name and kwargs."""
    name, _, arg = model_id.partition(":")
    if name not in _CATALOG:
        raise DomainError(f"unknown model {name!r}; see list-models")
    kwargs = {}
    if arg:
        if name == "finite_permutations":
            kwargs["n"] = int(arg)
        elif name == "sigma2_prepend":
            kwargs["depth"] = int(arg)
        else:
            raise DomainError(f"model {name!r} takes no inline parameter")
    return name, kwargs


def make_system(model_id: str, **params) -> IFSSpec:
    """Instantiate a cataloged system; inline parameters ('name:arg') and
    keyword parameters merge, keywords winning."""
    name, kwargs = parse_model_id(model_id)
    kwargs.update(params)
    ifs = _CATALOG[name][0](**kwargs)
    validate_ifs(ifs)
    return ifs


# --- map inversion and backward branches -------------------------------------

def _invert_monotone(fn, y: float, lo: float, hi: float) -> float:
    """Bisection solve fn(t) = y for fn increasing on [lo, hi]."""
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if fn(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def invert_map(m: MapDef, y: Point) -> Point:
    """Preimage of y under an invertible catalog map. Raises BranchError when
    the map is not invertible at y (or not invertible at all)."""
    kind = y.kind
    if m.form == "identity":
        return y
    if m.form == "affine":
        a, b = m.params
        if a == 0:
            raise BranchError("constant affine map has no inverse")
        t = (y.value - b) / a
        if t < kind.lo - 1e-12 or t > kind.hi + 1e-12:
            raise BranchError(f"preimage {t} of {y.value} leaves the interval")
        return point(kind, t)
    if m.form == "twopiece_quadratic":
        c_low, c_high = m.params

        def fn(t):
            if t <= 0.5:
                return t + c_low * (0.5 - t) * t
            return t + c_high * (1.0 - t) * (t - 0.5)

        v = y.value
        if isinstance(kind, Circle) and v == 0.0:
            return y  # 0 (== 1) is fixed by every twopiece map
        if v <= 0.5:
            t = _invert_monotone(fn, v, 0.0, 0.5)
        else:
            t = _invert_monotone(fn, v, 0.5, 1.0)
        return point(kind, t)
    if m.form == "permutation":
        inv = m.params.index(y.value)
        return point(kind, inv)
    if m.form == "prepend":
        (bit,) = m.params
        if y.value[0] != bit:
            raise BranchError(f"{y.value[0]}... is not in the image of prepend{bit}")
        return Point(kind, y.value[1:] + (0,))
    if m.form == "compose":
        for sub in reversed(m.params):
            y = invert_map(sub, y)
        return y
    if m.form == "product":
        ml, mr = m.params
        return Point(kind, (invert_map(ml, y.value[0]), invert_map(mr, y.value[1])))
    raise BranchError(f"map form {m.form!r} has no inverse rule")


def backward_branch(ifs: IFSSpec, lam: int, y: Point, length: int) -> list[Point]:
    """Reverse orbit [y_{-length}, ..., y_{-1}, y] with f_lam(y_{-j}) =
    y_{-j+1}, each step re-validated forward to 1e-12."""
    if not 0 <= lam < ifs.nmaps:
        raise DomainError(f"map index {lam} out of range")
    if length < 0:
        raise DomainError("branch length must be nonnegative")
    m = ifs.maps[lam]
    pts = [y]
    cur = y
    for _ in range(length):
        cur = invert_map(m, cur)
        if distance(apply_map(m, cur), pts[0]) > 1e-12:
            raise BranchError("inverse step fails forward re-validation")
        pts.insert(0, cur)
    return pts
