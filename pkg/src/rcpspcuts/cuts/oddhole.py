"""Odd-hole cuts with wheel-centre strengthening.

An odd cycle C violates sum_C x <= (|C|-1)/2 exactly when the sum over its edges of
(1 - x_u - x_v)/2 is below 1/2, so violated cycles are found as short odd closed
walks: shortest paths from (v, 0) to (v, 1) in the bipartite double cover.
"""

from __future__ import annotations

import heapq
import time
from typing import Optional

import numpy as np

from ..conflict import ConflictGraph
from .pool import MIN_VIOLATION, Cut, top_violated

TOL = 1e-9


def _shortest_odd_walk(graph: ConflictGraph, active: list[int], weight, src: int) -> Optional[list[int]]:
    allowed = set(active)
    dist = {(src, 0): 0.0}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    heap = [(0.0, src, 0)]
    target = (src, 1)
    while heap:
        d, v, side = heapq.heappop(heap)
        if d > dist.get((v, side), np.inf) + TOL:
            continue
        if (v, side) == target:
            break
        if d >= 0.5:
            return None
        for u in graph.neighbors(v):
            if u not in allowed:
                continue
            node = (u, 1 - side)
            nd = d + weight(v, u)
            if nd < dist.get(node, np.inf) - TOL:
                dist[node] = nd
                parent[node] = (v, side)
                heapq.heappush(heap, (nd, u, 1 - side))
    if target not in parent:
        return None
    walk = []
    node = target
    while node != (src, 0):
        walk.append(node[0])
        node = parent[node]
    walk.reverse()
    return walk  # ends at src; src excluded at the start


def is_odd_hole(graph: ConflictGraph, cycle: list[int]) -> bool:
    """Vertex positions forming a chordless cycle of odd length >= 5."""
    k = len(cycle)
    if k < 5 or k % 2 == 0 or len(set(cycle)) != k:
        return False
    for a in range(k):
        for b in range(a + 1, k):
            adjacent = graph.has_edge(cycle[a], cycle[b])
            consecutive = b == a + 1 or (a == 0 and b == k - 1)
            if adjacent != consecutive:
                return False
    return True


def wheel_centres(graph: ConflictGraph, cycle: list[int], x: np.ndarray) -> list[int]:
    """Vertices adjacent to the whole cycle, added greedily by decreasing value while they
    stay pairwise adjacent (two non-adjacent centres could both be 1)."""
    common = -1
    for v in cycle:
        common &= graph.adjacency[v]
    cands = [v for v in range(len(graph)) if common >> v & 1 and v not in cycle]
    cands.sort(key=lambda v: (-float(x[graph.vertices[v]]), v))
    chosen: list[int] = []
    for v in cands:
        if all(graph.has_edge(v, w) for w in chosen):
            chosen.append(v)
    return chosen


def odd_hole_cut(graph: ConflictGraph, cycle: list[int], wheel: list[int], x: Optional[np.ndarray] = None) -> Cut:
    k = len(cycle) // 2
    coefs = {graph.vertices[v]: 1.0 for v in cycle}
    for v in wheel:
        coefs[graph.vertices[v]] = float(k)
    return Cut.make(coefs, float(k), "OH", x)


def separate_odd_holes(graph: ConflictGraph, x: np.ndarray, zeta: Optional[int] = None,
                       min_violation: float = MIN_VIOLATION, wheels: bool = True,
                       deadline: Optional[float] = None) -> list[Cut]:
    vals = np.array([float(x[c]) for c in graph.vertices])
    active = [i for i in range(len(graph)) if TOL < vals[i] < 1 - TOL]

    def weight(a: int, b: int) -> float:
        return max(0.0, (1.0 - vals[a] - vals[b]) / 2.0)

    found: dict[str, Cut] = {}
    for src in active:
        if deadline is not None and time.monotonic() > deadline:
            break
        walk = _shortest_odd_walk(graph, active, weight, src)
        if walk is None:
            continue
        cycle = [src] + walk[:-1]
        if not is_odd_hole(graph, cycle):
            continue
        wheel = wheel_centres(graph, cycle, x) if wheels else []
        cut = odd_hole_cut(graph, cycle, wheel, x)
        if cut.violation > min_violation:
            found.setdefault(cut.key, cut)
    return top_violated(found.values(), zeta)
