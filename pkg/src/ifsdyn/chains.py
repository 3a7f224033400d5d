"""Epsilon-chain analysis on discretized phase spaces.

The chain graph puts one node per grid point and an edge u -> v whenever some
map of the family sends u within epsilon of v. Graph paths are genuine
epsilon-chains (one-sided soundness); completeness holds at the coarser scale
epsilon/2, which the h <= epsilon/4 guard protects.
"""

from __future__ import annotations

import csv
import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import IFSSpec, apply
from .errors import DomainError, GuardError, IFSError
from .spaces import (
    Point,
    distance,
    grid,
    leaf_coords,
    leaf_distances,
    leaf_kinds,
    point_to_json,
)

_WITNESS_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class ChainGraph:
    ifs: IFSSpec
    nodes: tuple[Point, ...]
    epsilon: float
    resolution: float
    out_edges: tuple[np.ndarray, ...]   # per node, ascending target indices
    out_labels: tuple[np.ndarray, ...]  # matching argmin map index per edge

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return sum(len(e) for e in self.out_edges)

    def has_self_loop(self, i: int) -> bool:
        e = self.out_edges[i]
        pos = np.searchsorted(e, i)
        return pos < len(e) and e[pos] == i


def _coord_matrix(nodes: Sequence[Point]) -> np.ndarray:
    return np.asarray([leaf_coords(p) for p in nodes], dtype=float)


def _distances_to_nodes(kinds, coords: np.ndarray, p: Point) -> np.ndarray:
    qs = leaf_coords(p)
    out = leaf_distances(kinds[0], qs[0], coords[:, 0])
    for l in range(1, len(kinds)):
        np.maximum(out, leaf_distances(kinds[l], qs[l], coords[:, l]), out=out)
    return out


def build_chain_graph(ifs: IFSSpec, resolution: float, epsilon: float) -> ChainGraph:
    """Discretize the space at `resolution` and connect u -> v when some map
    image of u lies within `epsilon` of v (edge label = the closest map)."""
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    if resolution > epsilon / 4 + 1e-15:
        raise GuardError(f"grid resolution {resolution} exceeds epsilon/4 = {epsilon / 4}")
    nodes = tuple(grid(ifs.space, resolution))
    kinds = leaf_kinds(ifs.space)
    coords = _coord_matrix(nodes)
    out_edges = []
    out_labels = []
    for node in nodes:
        dmat = np.stack([
            _distances_to_nodes(kinds, coords, apply(ifs, lam, node))
            for lam in range(ifs.nmaps)
        ])
        best = dmat.min(axis=0)
        labels = dmat.argmin(axis=0)
        targets = np.nonzero(best <= epsilon)[0]
        out_edges.append(targets)
        out_labels.append(labels[targets])
    return ChainGraph(ifs, nodes, epsilon, resolution,
                      tuple(out_edges), tuple(out_labels))


def snap_to_node(g: ChainGraph, p: Point) -> tuple[int, float]:
    """Nearest grid node and its distance."""
    kinds = leaf_kinds(g.ifs.space)
    d = _distances_to_nodes(kinds, _coord_matrix(g.nodes), p)
    i = int(np.argmin(d))
    return i, float(d[i])


@dataclass(frozen=True)
class ChainWitness:
    """A validated epsilon-chain over grid nodes."""

    points: tuple[Point, ...]
    labels: tuple[int, ...]


def validate_witness(ifs: IFSSpec, w: ChainWitness, epsilon: float) -> bool:
    if len(w.points) != len(w.labels) + 1 or len(w.labels) < 1:
        return False
    return all(
        distance(apply(ifs, lam, a), b) <= epsilon + _WITNESS_SLACK
        for a, b, lam in zip(w.points, w.points[1:], w.labels)
    )


@dataclass(frozen=True, eq=False)
class ChainSearchResult:
    found: bool
    witness: Optional[ChainWitness]
    snap_from: float
    snap_to: float
    reachable: Optional[tuple[int, ...]]  # diagnostic frontier when not found


def _edge_label(g: ChainGraph, u: int, v: int) -> int:
    e = g.out_edges[u]
    pos = int(np.searchsorted(e, v))
    return int(g.out_labels[u][pos])


def find_chain(g: ChainGraph, x: Point, y: Point) -> ChainSearchResult:
    """Shortest chain between the grid nodes nearest x and y (>= 1 step, so
    x = y asks for a cycle). The witness is re-validated against the raw
    maps, not the graph."""
    src, snap_from = snap_to_node(g, x)
    dst, snap_to = snap_to_node(g, y)
    # src is deliberately left unvisited so that src == dst asks for a cycle
    parent = {}
    queue = deque()
    for v in g.out_edges[src]:
        v = int(v)
        if v not in parent:
            parent[v] = src
            queue.append(v)
    while queue and dst not in parent:
        u = queue.popleft()
        for v in g.out_edges[u]:
            v = int(v)
            if v not in parent:
                parent[v] = u
                queue.append(v)
    if dst not in parent:
        reachable = tuple(sorted(parent.keys()))
        return ChainSearchResult(False, None, snap_from, snap_to, reachable)
    path = [dst]
    while True:
        prev = parent[path[-1]]
        path.append(prev)
        if prev == src:
            break
    path.reverse()
    labels = tuple(_edge_label(g, u, v) for u, v in zip(path, path[1:]))
    witness = ChainWitness(tuple(g.nodes[i] for i in path), labels)
    if not validate_witness(g.ifs, witness, g.epsilon):
        raise IFSError("graph path failed raw-map re-validation")
    return ChainSearchResult(True, witness, snap_from, snap_to, None)


def strongly_connected_components(out_edges: Sequence[np.ndarray]) -> list[list[int]]:
    """Iterative Tarjan over nodes in ascending order (deterministic)."""
    n = len(out_edges)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            edges = out_edges[v]
            while pi < len(edges):
                w = int(edges[pi])
                pi += 1
                if index[w] == -1:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                u, _ = work[-1]
                low[u] = min(low[u], low[v])
    return comps


def chain_recurrent_set(g: ChainGraph) -> tuple[int, ...]:
    """Nodes on some graph cycle: members of a nontrivial strongly connected
    component, or nodes with a self-loop."""
    comps = strongly_connected_components(g.out_edges)
    recurrent = set()
    for comp in comps:
        if len(comp) >= 2:
            recurrent.update(comp)
    for i in range(g.size):
        if g.has_self_loop(i):
            recurrent.add(i)
    return tuple(sorted(recurrent))


@dataclass(frozen=True, eq=False)
class TransitivityReport:
    transitive: bool
    counterexample: Optional[tuple[Point, Point]]


def _reachable_from(out_edges, src: int) -> set[int]:
    seen = {src}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in out_edges[u]:
            v = int(v)
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def is_chain_transitive(g: ChainGraph) -> TransitivityReport:
    """True iff the chain graph is strongly connected; otherwise returns a
    concrete ordered pair with no connecting chain."""
    comps = strongly_connected_components(g.out_edges)
    if len(comps) == 1 and len(comps[0]) == g.size:
        return TransitivityReport(True, None)
    fwd = _reachable_from(g.out_edges, 0)
    if len(fwd) < g.size:
        v = min(set(range(g.size)) - fwd)
        return TransitivityReport(False, (g.nodes[0], g.nodes[v]))
    # everything reachable from node 0, so some node cannot reach it back
    rev: list[list[int]] = [[] for _ in range(g.size)]
    for u in range(g.size):
        for v in g.out_edges[u]:
            rev[int(v)].append(u)
    rev_arrays = [np.asarray(r, dtype=int) for r in rev]
    back = _reachable_from(rev_arrays, 0)
    w = min(set(range(g.size)) - back)
    return TransitivityReport(False, (g.nodes[w], g.nodes[0]))


# --- exports ----------------------------------------------------------------

def edges_to_csv(g: ChainGraph, path, comments: Sequence[str] = ()) -> None:
    with Path(path).open("w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        writer = csv.writer(fh)
        writer.writerow(["u", "v", "lambda"])
        for u in range(g.size):
            for v, lam in zip(g.out_edges[u], g.out_labels[u]):
                writer.writerow([u, int(v), int(lam)])


def witness_to_json(w: ChainWitness) -> dict:
    return {
        "points": [point_to_json(p) for p in w.points],
        "labels": list(w.labels),
    }


def witness_to_json_file(w: ChainWitness, path) -> None:
    Path(path).write_text(json.dumps(witness_to_json(w), indent=2))


def graph_to_dot(g: ChainGraph) -> str:
    lines = ["digraph chains {"]
    for u in range(g.size):
        for v, lam in zip(g.out_edges[u], g.out_labels[u]):
            lines.append(f'  n{u} -> n{int(v)} [label="{int(lam)}"];')
    lines.append("}")
    return "\n".join(lines)
