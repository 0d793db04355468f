"""Sofic presentations of tiling systems.

Dropping subscripts from the tiling automaton gives a labeled graph whose
bi-infinite label sequences are the color sequences of tilings.  The
subset construction turns it into a right-resolving presentation, which
is what entropy, periodic-point counts and language enumeration run on.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from tilesys import _graph
from tilesys.automaton import AUTOMATON_FORMAT, AUTOMATON_VERSION, TilingAutomaton

ENTROPY_TOL = 1e-12
EXACT_POLY_MAX = 12


@dataclass(frozen=True)
class LabeledPresentation:
    """Labeled graph; ``edges`` are ``(src, dst, color_index)``."""

    n_states: int
    edges: tuple[tuple[int, int, int], ...]
    colors: tuple[str, ...]

    @property
    def is_empty(self) -> bool:
        return self.n_states == 0


@dataclass(frozen=True)
class DeterministicPresentation:
    """Right-resolving presentation with every state on a bi-infinite path.

    ``subsets[q]`` records which source states ``q`` stands for, and
    ``delta[q]`` maps a color index to the unique successor.
    """

    subsets: tuple[frozenset, ...]
    delta: tuple[dict, ...]
    colors: tuple[str, ...]

    def __len__(self):
        return len(self.subsets)

    @property
    def is_empty(self) -> bool:
        return not self.subsets

    @property
    def edges(self) -> list[tuple[int, int, int]]:
        return [(q, d, c) for q, row in enumerate(self.delta) for c, d in sorted(row.items())]

    def adjacency(self) -> list[list[int]]:
        n = len(self)
        mat = [[0] * n for _ in range(n)]
        for q, row in enumerate(self.delta):
            for d in row.values():
                mat[q][d] += 1
        return mat

    def to_dict(self) -> dict:
        return {
            "format": AUTOMATON_FORMAT,
            "version": AUTOMATON_VERSION,
            "kind": "deterministic",
            "metadata": {"colors": list(self.colors), "state_count": len(self), "edge_count": len(self.edges)},
            "states": [sorted(s) for s in self.subsets],
            "edges": [[q, d, self.colors[c]] for q, d, c in self.edges],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def drop_subscripts(ta: TilingAutomaton) -> LabeledPresentation:
    return LabeledPresentation(
        len(ta.states),
        tuple((s, d, k - 1) for s, d, (k, _) in ta.edges),
        ta.prototiles.colors,
    )


def _prune(subsets, delta, colors) -> DeterministicPresentation:
    n = len(subsets)
    arcs = [(q, d) for q in range(n) for d in delta[q].values()]
    keep = _graph.essential_vertices(n, arcs)
    # canonical BFS order from the first surviving seed
    order: list[int] = []
    seen: set[int] = set()
    for root in range(n):
        if root not in keep or root in seen:
            continue
        seen.add(root)
        todo = deque([root])
        while todo:
            q = todo.popleft()
            order.append(q)
            for c in sorted(delta[q]):
                d = delta[q][c]
                if d in keep and d not in seen:
                    seen.add(d)
                    todo.append(d)
    renum = {old: new for new, old in enumerate(order)}
    return DeterministicPresentation(
        tuple(subsets[q] for q in order),
        tuple({c: renum[d] for c, d in delta[q].items() if d in renum} for q in order),
        tuple(colors),
    )


def determinize(lp: LabeledPresentation, merge: bool = False) -> DeterministicPresentation:
    """Subset construction seeded with every singleton, then pruned.

    Subsets reached from singletons already present the same shift, and
    usually stay much smaller than those reached from the full state set.
    With ``merge=True`` follower-equivalent states are identified afterwards.
    """
    out: list[dict[int, list[int]]] = [{} for _ in range(lp.n_states)]
    for s, d, c in lp.edges:
        out[s].setdefault(c, []).append(d)
    index: dict[frozenset, int] = {}
    subsets: list[frozenset] = []
    delta: list[dict[int, int]] = []
    todo: deque = deque()
    for q in range(lp.n_states):
        s = frozenset((q,))
        if s not in index:
            index[s] = len(subsets)
            subsets.append(s)
            delta.append({})
            todo.append(s)
    while todo:
        s = todo.popleft()
        i = index[s]
        succ: dict[int, set[int]] = {}
        for q in s:
            for c, ds in out[q].items():
                succ.setdefault(c, set()).update(ds)
        for c in sorted(succ):
            t = frozenset(succ[c])
            j = index.get(t)
            if j is None:
                j = index[t] = len(subsets)
                subsets.append(t)
                delta.append({})
                todo.append(t)
            delta[i][c] = j
    dp = _prune(subsets, delta, lp.colors)
    return merge_followers(dp) if merge else dp


def merge_followers(dp: DeterministicPresentation) -> DeterministicPresentation:
    """Quotient by follower-set equivalence (Moore refinement)."""
    n = len(dp)
    if n == 0:
        return dp
    ncol = len(dp.colors)
    block = [0] * n
    while True:
        sig = {}
        new = []
        for q in range(n):
            key = (block[q],) + tuple(block[dp.delta[q][c]] if c in dp.delta[q] else -1 for c in range(ncol))
            new.append(sig.setdefault(key, len(sig)))
        if len(sig) == len(set(block)):
            break
        block = new
    groups: dict[int, list[int]] = {}
    for q in range(n):
        groups.setdefault(block[q], []).append(q)
    reps = sorted(groups.values(), key=lambda g: g[0])
    which = {b: i for i, g in enumerate(reps) for b in [block[g[0]]]}
    subsets = [frozenset().union(*(dp.subsets[q] for q in g)) for g in reps]
    delta = [{c: which[block[d]] for c, d in dp.delta[g[0]].items()} for g in reps]
    return _prune(subsets, delta, dp.colors)


# -- entropy ---------------------------------------------------------------

def characteristic_polynomial(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Integer coefficients of ``det(xI - M)``, highest degree first (Faddeev-LeVerrier)."""
    n = len(matrix)
    M = [[int(x) for x in row] for row in matrix]
    coeffs = [1]
    acc = [[0] * n for _ in range(n)]
    c = 1
    for k in range(1, n + 1):
        acc = [[sum(M[i][t] * acc[t][j] for t in range(n)) + (c if i == j else 0) for j in range(n)] for i in range(n)]
        trace = sum(M[i][t] * acc[t][i] for i in range(n) for t in range(n))
        if trace % k:
            raise ArithmeticError("non-integral Faddeev-LeVerrier step")
        c = -trace // k
        coeffs.append(c)
    return coeffs


def _poly_value(coeffs: Sequence[int], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for a in coeffs:
        acc = acc * x + a
    return acc


def _block_radius(B: np.ndarray, max_iter: int = 200_000) -> tuple[float, float]:
    """Collatz-Wielandt bracket of the Perron root of an irreducible block.

    Power iteration runs on ``I + B``, which is primitive, so the bracket
    always closes; the returned pair is ``(lower, upper)`` for ``rho(B)``.
    """
    M = B + np.eye(len(B))
    x = np.ones(len(B))
    lo, hi = 0.0, np.inf
    for _ in range(max_iter):
        y = M @ x
        ratios = y / x
        lo, hi = max(lo, ratios.min()), min(hi, ratios.max())
        if hi - lo <= ENTROPY_TOL * hi:
            break
        x = y / y.max()
    else:
        vals = np.linalg.eigvals(B)
        r = float(np.max(np.abs(vals)))
        return r, r
    return lo - 1.0, hi - 1.0


def _bisect_root(poly, a: Fraction, b: Fraction, fa: Fraction, steps: int = 60) -> float:
    """Shrink a sign-change bracket of ``poly`` to double precision."""
    if fa == 0:
        return float(a)
    for _ in range(steps):
        mid = (a + b) / 2
        fm = _poly_value(poly, mid)
        if fm == 0:
            return float(mid)
        if (fm < 0) == (fa < 0):
            a, fa = mid, fm
        else:
            b = mid
    return float((a + b) / 2)


@dataclass
class SpectralResult:
    radius: float
    blocks: list[dict] = field(default_factory=list)

    @property
    def entropy(self) -> float:
        return float(np.log(self.radius)) if self.radius > 1.0 else 0.0

    @property
    def certified(self) -> bool:
        return all(b.get("exact_check", True) for b in self.blocks)


def spectral_analysis(matrix: Sequence[Sequence[int]]) -> SpectralResult:
    """Spectral radius of a nonnegative integer matrix, block by block.

    For each irreducible block of size at most 12 the exact characteristic
    polynomial must change sign across the numerical bracket.
    """
    n = len(matrix)
    if n == 0:
        return SpectralResult(0.0)
    arcs = [(i, j) for i in range(n) for j in range(n) if matrix[i][j]]
    labels = _graph.strong_components(n, arcs)
    comps: dict[int, list[int]] = {}
    for v in range(n):
        comps.setdefault(int(labels[v]), []).append(v)
    best = 0.0
    blocks = []
    for members in sorted(comps.values()):
        if len(members) == 1 and not matrix[members[0]][members[0]]:
            continue
        sub = [[matrix[i][j] for j in members] for i in members]
        lo, hi = _block_radius(np.array(sub, dtype=float))
        rho = float(0.5 * (lo + hi))
        info = {"size": len(members), "radius": rho}
        if len(members) <= EXACT_POLY_MAX:
            poly = characteristic_polynomial(sub)
            eps = max(1e-9, 1e-9 * rho)
            a = _poly_value(poly, Fraction(lo - eps))
            b = _poly_value(poly, Fraction(hi + eps))
            info["charpoly"] = poly
            info["exact_check"] = a == 0 or b == 0 or (a < 0) != (b < 0)
            if info["exact_check"]:
                rho = _bisect_root(poly, Fraction(lo - eps), Fraction(hi + eps), a)
                info["radius"] = rho
        blocks.append(info)
        best = max(best, rho)
    return SpectralResult(best, blocks)


def spectral_radius(matrix: Sequence[Sequence[int]]) -> float:
    return spectral_analysis(matrix).radius


def entropy(dp: DeterministicPresentation) -> float:
    """Natural-log topological entropy; 0 for empty or zero-entropy systems."""
    if dp.is_empty:
        return 0.0
    return spectral_analysis(dp.adjacency()).entropy


def matrix_entropy(A: Sequence[Sequence[int]]) -> float:
    """Entropy of the edge shift of ``A``."""
    return spectral_analysis(A).entropy


# -- periodic points -------------------------------------------------------

def periodic_counts(dp: DeterministicPresentation, periods: Iterable[int]) -> dict[int, int]:
    """Number of points ``x`` with ``sigma^p x = x`` for each requested ``p``.

    Counts points, not orbits.  ``w^inf`` is a point iff the partial map of
    states induced by ``w`` has a periodic point, so words of length ``p``
    are aggregated by their induced partial map and never listed.
    """
    periods = sorted(set(periods))
    if not periods:
        return {}
    if periods[0] < 1:
        raise ValueError("period must be positive")
    if dp.is_empty:
        return {p: 0 for p in periods}
    n = len(dp)
    # row c is the action of color c, padded so that -1 stays -1
    ext = np.full((len(dp.colors), n + 1), -1, dtype=np.int64)
    for q, row in enumerate(dp.delta):
        for c, d in row.items():
            ext[c, q] = d
    maps = np.arange(n, dtype=np.int64)[None, :]
    counts = np.array([1], dtype=object)
    result = {}
    wanted = set(periods)
    for step in range(1, periods[-1] + 1):
        stacked = ext[:, maps].reshape(-1, n)
        weights = np.tile(counts, len(dp.colors))
        alive = (stacked >= 0).any(axis=1)
        stacked, weights = stacked[alive], weights[alive]
        if len(stacked) == 0:
            for p in periods:
                result.setdefault(p, 0)
            return result
        maps, inverse = np.unique(stacked, axis=0, return_inverse=True)
        counts = np.zeros(len(maps), dtype=object)
        np.add.at(counts, inverse.reshape(-1), weights)
        if step in wanted:
            result[step] = int(sum(c for f, c in zip(maps.tolist(), counts) if _graph.partial_map_has_cycle(f)))
    return result


def count_periodic(dp: DeterministicPresentation, p: int) -> int:
    """Number of points fixed by ``sigma^p``; see :func:`periodic_counts`."""
    return periodic_counts(dp, [p])[p]


def least_period_counts(dp: DeterministicPresentation, up_to: int) -> dict[int, int]:
    """Number of points of least period ``p`` for ``p = 1..up_to`` (Moebius inversion)."""
    fix = periodic_counts(dp, range(1, up_to + 1))
    least: dict[int, int] = {}
    for p in range(1, up_to + 1):
        least[p] = fix[p] - sum(least[d] for d in range(1, p) if p % d == 0)
    return least


# -- languages -------------------------------------------------------------

def language_up_to(dp: DeterministicPresentation, length: int) -> list[tuple[str, ...]]:
    """Every factor of length ``<= length``, shortest first then by color index.

    The empty word is included whenever the shift is nonempty.
    """
    if length < 0:
        raise ValueError("length must be nonnegative")
    if dp.is_empty:
        return []
    words: set[tuple[int, ...]] = {()}
    layer = {(q, ()) for q in range(len(dp))}
    for _ in range(length):
        layer = {(d, w + (c,)) for q, w in layer for c, d in dp.delta[q].items()}
        words.update(w for _, w in layer)
    return [tuple(dp.colors[c] for c in w) for w in sorted(words, key=lambda w: (len(w), w))]


def renewal_presentation(generators: Iterable[Sequence[str]]) -> DeterministicPresentation:
    """Deterministic presentation of the renewal system on ``generators``.

    A string generator is read one character per color.
    """
    gens = [tuple(g) for g in generators]
    if not gens:
        raise ValueError("need at least one generator")
    if any(len(g) == 0 for g in gens):
        raise ValueError("generators must be nonempty")
    colors = tuple(sorted({a for g in gens for a in g}))
    cidx = {c: i for i, c in enumerate(colors)}
    edges = []
    n = 1
    for g in gens:
        prev = 0
        for j, a in enumerate(g):
            if j == len(g) - 1:
                nxt = 0
            else:
                nxt = n
                n += 1
            edges.append((prev, nxt, cidx[a]))
            prev = nxt
    return determinize(LabeledPresentation(n, tuple(edges), colors))


def presentation_of(ps_or_ta) -> DeterministicPresentation:
    """Shortcut: prototile set or automaton -> deterministic presentation."""
    from tilesys.automaton import build_automaton

    ta = ps_or_ta if isinstance(ps_or_ta, TilingAutomaton) else build_automaton(ps_or_ta)
    return determinize(drop_subscripts(ta))
