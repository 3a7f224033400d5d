"""Finite-horizon shadowing verification and search.

`shadow_verify` measures how well a candidate orbit tracks a pseudo-orbit in
both sup and Cesàro-average senses. For uniformly contracting families the
tracking error admits an explicit inductive bound, realized here by
`contracting_shadow`; for everything else `greedy_shadow_search` hunts for a
candidate over a start grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .averaging import Series, running_average_curve, series
from .core import (
    IFSSpec,
    SelectorSequence,
    apply,
    estimate_contraction_ratio,
    selector_explicit,
)
from .errors import ContractionError, DomainError, LengthError
from .pseudo_orbits import PseudoOrbitRecord
from .spaces import Point, distance, point_to_json


@dataclass(frozen=True, eq=False)
class ShadowReport:
    candidate: Point
    selector: SelectorSequence
    sup_error: float
    cesaro_curve: Series
    final_average: float
    bound: Optional[float]
    verdict_avg: bool
    verdict_sup: bool
    tol_avg: float
    tol_sup: float


def _finish_report(candidate, sel, ds, bound, tol_avg, tol_sup) -> ShadowReport:
    curve = running_average_curve(series(np.asarray(ds)))
    final = float(curve.values[-1])
    sup = float(max(ds))
    return ShadowReport(
        candidate=candidate,
        selector=sel,
        sup_error=sup,
        cesaro_curve=curve,
        final_average=final,
        bound=bound,
        verdict_avg=final <= tol_avg,
        verdict_sup=sup <= tol_sup,
        tol_avg=tol_avg,
        tol_sup=tol_sup,
    )


def shadow_verify(
    ifs: IFSSpec,
    rec: PseudoOrbitRecord,
    z: Point,
    sigma: SelectorSequence,
    n: int,
    tol_avg: float = 1e-2,
    tol_sup: float = math.inf,
) -> ShadowReport:
    """Track the record from start z under selector sigma for n steps,
    measuring d_i = d(F_{sigma_i}(z), x_i). The 0-step composition is the
    identity, so d_0 = d(z, x_0)."""
    if n < 1:
        raise DomainError("horizon must be >= 1")
    if len(rec.points) < n:
        raise LengthError(f"record has {len(rec.points)} points, horizon {n}")
    if len(sigma) < n - 1:
        raise LengthError("selector shorter than the horizon")
    ds = np.empty(n)
    cur = z
    for i in range(n):
        ds[i] = distance(cur, rec.points[i])
        if i < n - 1:
            cur = apply(ifs, sigma.entry(i), cur)
    return _finish_report(z, sigma, ds, None, tol_avg, tol_sup)


def contracting_shadow_bound(beta: float, m0: float, alphas: Series, n: int) -> float:
    """Averaged tracking bound for a contracting family:
    (1/n) * (1/(1-beta)) * (m0 + sum of the first n-1 step errors)."""
    if not 0 < beta < 1:
        raise DomainError("beta must lie in (0, 1)")
    if m0 < 0:
        raise DomainError("initial gap must be nonnegative")
    if n < 1:
        raise DomainError("horizon must be >= 1")
    return (m0 + float(alphas.values[: max(n - 1, 0)].sum())) / ((1.0 - beta) * n)


def contracting_shadow(
    ifs: IFSSpec,
    rec: PseudoOrbitRecord,
    y0: Optional[Point] = None,
    n: Optional[int] = None,
    tol_avg: float = 1e-2,
    validate: bool = True,
    validate_pairs: int = 1000,
) -> ShadowReport:
    """Shadow with the record's own selector from an arbitrary start.

    Requires a claimed contraction ratio; when `validate` is set, a sampled
    ratio estimate must not exceed the claim. Each measured step error is
    checked against the inductive bound
        d_i <= alpha_{i-1} + beta*alpha_{i-2} + ... + beta^{i-1}*alpha_0 + beta^i*M
    and a violation raises, since it falsifies the claimed ratio.
    """
    beta = ifs.claimed_contraction
    if beta is None:
        raise ContractionError("IFS carries no claimed contraction ratio")
    if validate:
        est = estimate_contraction_ratio(ifs, validate_pairs, seed=0)
        if est > beta + 1e-9:
            raise ContractionError(f"sampled ratio {est} exceeds claimed {beta}")
    if y0 is None:
        y0 = rec.points[0]
    if n is None:
        n = rec.steps
    if n < 1 or n > rec.steps:
        raise LengthError(f"horizon {n} outside [1, {rec.steps}]")
    alphas = rec.errors.values
    m0 = distance(y0, rec.points[0])
    ds = np.empty(n)
    cur = y0
    pointwise = m0
    for i in range(n):
        d = distance(cur, rec.points[i])
        if d > pointwise + 1e-9:
            raise ContractionError(
                f"step {i}: tracking error {d} exceeds inductive bound {pointwise}"
            )
        ds[i] = d
        if i < n - 1:
            cur = apply(ifs, rec.selector.entry(i), cur)
        pointwise = float(alphas[i]) + beta * pointwise if i < len(alphas) else beta * pointwise
    bound = contracting_shadow_bound(beta, m0, rec.errors, n)
    return _finish_report(y0, rec.selector, ds, bound, tol_avg, math.inf)


def _greedy_track(ifs: IFSSpec, rec: PseudoOrbitRecord, z: Point, n: int):
    """Distances and selector choices for one greedy start: at each step pick
    the map landing closest to the next pseudo-orbit point (ties to the
    lowest index)."""
    ds = np.empty(n)
    entries = []
    cur = z
    for i in range(n):
        ds[i] = distance(cur, rec.points[i])
        if i < n - 1:
            target = rec.points[i + 1]
            best_lam, best_pt, best_d = 0, None, math.inf
            for lam in range(ifs.nmaps):
                cand = apply(ifs, lam, cur)
                d = distance(cand, target)
                if d < best_d:
                    best_lam, best_pt, best_d = lam, cand, d
            entries.append(best_lam)
            cur = best_pt
    return ds, entries


def greedy_shadow_search(
    ifs: IFSSpec,
    rec: PseudoOrbitRecord,
    initial_grid: Sequence[Point],
    n: int,
    tol_avg: float = 1e-2,
    tol_sup: float = math.inf,
) -> ShadowReport:
    """Best greedy candidate over a start grid, ranked by final Cesàro
    average (first grid point wins ties). Refining the grid can only improve
    the result."""
    starts = list(initial_grid)
    if not starts:
        raise DomainError("initial grid must be nonempty")
    if n < 1 or len(rec.points) < n:
        raise LengthError(f"horizon {n} incompatible with record of {len(rec.points)} points")
    best = None
    for z in starts:
        ds, entries = _greedy_track(ifs, rec, z, n)
        avg = float(ds.mean())
        if best is None or avg < best[0]:
            best = (avg, z, ds, entries)
    _, z, ds, entries = best
    sel = selector_explicit(entries, ifs.nmaps)
    return _finish_report(z, sel, ds, None, tol_avg, tol_sup)


@dataclass(frozen=True, eq=False)
class FiniteShadowingResult:
    found: bool
    sup_achieved: float
    report: ShadowReport


def finite_shadowing_check(
    ifs: IFSSpec,
    rec: PseudoOrbitRecord,
    epsilon: float,
    initial_grid: Sequence[Point],
    n: int,
) -> FiniteShadowingResult:
    """Greedy certifier for sup-norm shadowing at tolerance epsilon.

    A positive answer carries a witness orbit; a negative answer only means
    the grid search found nothing and reports the infimum achieved.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    starts = list(initial_grid)
    if not starts:
        raise DomainError("initial grid must be nonempty")
    best = None
    for z in starts:
        ds, entries = _greedy_track(ifs, rec, z, n)
        sup = float(ds.max())
        if best is None or sup < best[0]:
            best = (sup, z, ds, entries)
    sup, z, ds, entries = best
    sel = selector_explicit(entries, ifs.nmaps)
    report = _finish_report(z, sel, ds, None, 1e-2, epsilon)
    return FiniteShadowingResult(sup <= epsilon, sup, report)


def report_to_json(r: ShadowReport) -> dict:
    return {
        "candidate": point_to_json(r.candidate),
        "selector": {"entries": list(r.selector.entries), "generator": r.selector.generator},
        "sup_error": r.sup_error,
        "final_average": r.final_average,
        "bound": r.bound,
        "verdict_avg": r.verdict_avg,
        "verdict_sup": r.verdict_sup,
        "tol_avg": r.tol_avg,
        "tol_sup": None if math.isinf(r.tol_sup) else r.tol_sup,
        "cesaro_curve": [float(v) for v in r.cesaro_curve.values],
    }


def report_to_json_file(r: ShadowReport, path) -> None:
    Path(path).write_text(json.dumps(report_to_json(r), indent=2))
