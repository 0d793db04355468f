"""Small directed-graph helpers shared by the automaton and presentation code.

Graphs are given as ``n`` plus a list of ``(src, dst)`` pairs.
"""

from __future__ import annotations

from collections import deque

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


def strong_components(n: int, arcs) -> np.ndarray:
    """Component label per vertex."""
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if not arcs:
        return np.arange(n)
    src, dst = zip(*arcs)
    g = csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(n, n))
    _, labels = connected_components(g, directed=True, connection="strong")
    return labels


def cyclic_vertices(n: int, arcs) -> set[int]:
    """Vertices lying on at least one cycle."""
    labels = strong_components(n, arcs)
    sizes = np.bincount(labels, minlength=1) if n else np.zeros(0)
    out = {v for v in range(n) if sizes[labels[v]] > 1}
    out.update(s for s, d in arcs if s == d)
    return out


def _reach(seeds, succ) -> set[int]:
    seen = set(seeds)
    todo = deque(seen)
    while todo:
        v = todo.popleft()
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def essential_vertices(n: int, arcs) -> set[int]:
    """Vertices on some bi-infinite path: reachable from a cycle and reaching one."""
    core = cyclic_vertices(n, arcs)
    if not core:
        return set()
    succ = [[] for _ in range(n)]
    pred = [[] for _ in range(n)]
    for s, d in arcs:
        succ[s].append(d)
        pred[d].append(s)
    return _reach(core, succ) & _reach(core, pred)


def has_cycle(n: int, arcs) -> bool:
    """Kahn's algorithm: a cycle exists iff some vertex survives source removal."""
    indeg = [0] * n
    succ = [[] for _ in range(n)]
    for s, d in arcs:
        succ[s].append(d)
        indeg[d] += 1
    todo = [v for v in range(n) if indeg[v] == 0]
    removed = 0
    while todo:
        v = todo.pop()
        removed += 1
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                todo.append(w)
    return removed < n


def partial_map_has_cycle(f) -> bool:
    """True iff the partial self-map ``f`` (``-1`` = undefined) has a periodic point."""
    n = len(f)
    mark = [0] * n
    for s in range(n):
        path = []
        v = s
        while v >= 0 and mark[v] == 0:
            mark[v] = 1
            path.append(v)
            v = f[v]
        if v >= 0 and mark[v] == 1:
            return True
        for u in path:
            mark[u] = 2
    return False
