"""Clique cuts from the conflict graph: exact maximum-weight clique plus greedy lifting."""

from __future__ import annotations

import itertools
import time
from typing import Optional

import numpy as np

from ..conflict import ConflictGraph
from .pool import MIN_VIOLATION, Cut, top_violated

SCALE = 10 ** 6


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def max_weight_clique(adjacency: list[int], weights, candidates: Optional[int] = None,
                      deadline: Optional[float] = None) -> tuple[float, list[int]]:
    """Exact maximum-weight clique among ``candidates`` (bitset) by branch and bound.

    The bound is the sum over a greedy colouring of the largest weight per colour class.
    Returns (weight, sorted vertex list); weights are compared as scaled integers so the
    search is deterministic.
    """
    n = len(adjacency)
    w = [int(round(float(v) * SCALE)) for v in weights]
    if candidates is None:
        candidates = (1 << n) - 1
    best_w, best = 0, []

    def colour_bound(mask: int) -> list[tuple[int, int]]:
        # vertices in branching order with the bound of the prefix ending at each
        order = []
        uncoloured = mask
        total = 0
        while uncoloured:
            avail = uncoloured
            heaviest = 0
            members = []
            while avail:
                v = max(_bits(avail), key=lambda k: (w[k], -k))
                members.append(v)
                heaviest = max(heaviest, w[v])
                avail &= ~adjacency[v] & ~(1 << v)
            for v in members:
                uncoloured &= ~(1 << v)
            total += heaviest
            order.extend((v, total) for v in members)
        return order

    def expand(mask: int, current: list[int], cw: int):
        nonlocal best_w, best
        if deadline is not None and time.monotonic() > deadline:
            return
        if not mask:
            if cw > best_w:
                best_w, best = cw, list(current)
            return
        order = colour_bound(mask)
        for v, bound in reversed(order):
            if cw + bound <= best_w:
                return
            current.append(v)
            expand(mask & adjacency[v], current, cw + w[v])
            current.pop()
            mask &= ~(1 << v)
        if cw > best_w:
            best_w, best = cw, list(current)

    expand(candidates, [], 0)
    return best_w / SCALE, sorted(best)


def lift_clique(graph: ConflictGraph, cols: list[int], pool_cols: Optional[list[int]] = None) -> list[int]:
    """Extend a clique (column ids) greedily with columns adjacent to all members.

    Candidates come from ``pool_cols`` (all start columns of the model by default) and
    are tried by decreasing degree within the candidate set, then by column id.
    """
    oracle = graph.oracle
    model = oracle.model
    pool_cols = model.index.x_columns() if pool_cols is None else pool_cols
    members = set(cols)
    rest = [c for c in pool_cols if c not in members]
    if not rest:
        return sorted(cols)
    to_clique = oracle.matrix(rest, sorted(cols)) > 0
    cand = [c for c, ok in zip(rest, to_clique.all(axis=1)) if ok]
    if not cand:
        return sorted(cols)
    among = oracle.matrix(cand, cand) > 0
    degree = among.sum(axis=1)
    order = sorted(range(len(cand)), key=lambda i: (-int(degree[i]), cand[i]))
    chosen: list[int] = []
    for i in order:
        if all(among[i, k] for k in chosen):
            chosen.append(i)
    return sorted(list(cols) + [cand[i] for i in chosen])


def is_clique(graph: ConflictGraph, cols: list[int]) -> bool:
    if graph.oracle is None:
        pos = [graph.position(c) for c in cols]
        return all(graph.adjacency[a] >> b & 1 for a, b in itertools.combinations(pos, 2))
    mat = graph.oracle.matrix(cols, cols) > 0
    np.fill_diagonal(mat, True)
    return bool(mat.all())


def separate_cliques(graph: ConflictGraph, x: np.ndarray, zeta: Optional[int] = None,
                     min_violation: float = MIN_VIOLATION, lift: bool = True,
                     deadline: Optional[float] = None) -> list[Cut]:
    """For each fractional vertex (by decreasing value), the heaviest clique containing it
    among vertices of positive value; violated ones are lifted and returned."""
    n = len(graph)
    weights = [float(x[c]) for c in graph.vertices]
    positive = sum(1 << i for i in range(n) if weights[i] > 1e-9)
    seeds = sorted((i for i in range(n) if 1e-9 < weights[i] < 1 - 1e-9), key=lambda i: (-weights[i], i))
    found: dict[str, Cut] = {}
    seen: set[tuple[int, ...]] = set()
    for i in seeds:
        if deadline is not None and time.monotonic() > deadline:
            break
        # every clique among the neighbours extends by i, so this is the best clique through i
        value, rest = max_weight_clique(graph.adjacency, weights, positive & graph.adjacency[i], deadline)
        clique = sorted(rest + [i])
        value += weights[i]
        key = tuple(clique)
        if key in seen or value <= 1 + min_violation:
            continue
        seen.add(key)
        cols = [graph.vertices[k] for k in clique]
        if lift:
            cols = lift_clique(graph, cols)
        if not is_clique(graph, cols):
            continue
        cut = Cut.make({c: 1.0 for c in cols}, 1.0, "CL", x)
        if cut.violation > min_violation:
            found.setdefault(cut.key, cut)
    return top_violated(found.values(), zeta)
