"""The subscripted tiling system as an explicit edge shift.

A tiling of Z is read left to right.  At each cut between two cells we
remember only the tiles that started to the left of the cut and still
have cells to the right of it, as ``(age, tile_index)`` pairs, where a
tile of age ``s`` started ``s`` cells before the next cell.  Reading the
next cell is a transition labeled ``(k, l)`` (1-based tile index and
1-based position inside the tile):

* if some active tile has offset ``age`` it covers the cell (at most one
  can, because future footprints are kept disjoint);
* otherwise a new tile must start at the cell, one branch per tile whose
  footprint does not collide with the active ones.

Bi-infinite paths through the pruned graph are exactly the points of the
subscripted system, and their labels record the tiling.
"""

from __future__ import annotations

import itertools
import json
import os
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from tilesys import _graph
from tilesys.prototiles import PrototileSet, Tiling

State = tuple[tuple[int, int], ...]
Label = tuple[int, int]

DEFAULT_MAX_STATES = 10**6
DEFAULT_PERIOD_BOUND = 12

AUTOMATON_FORMAT = "tilesys.automaton"
AUTOMATON_VERSION = 1


class AutomatonBudgetError(RuntimeError):
    """The state space exceeded the configured budget."""


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    return int(raw) if raw else default


class _TileTable:
    """Per-tile data in the form the transition function wants."""

    def __init__(self, ps: PrototileSet):
        self.masks = [t.mask for t in ps]
        self.last = [t.length - 1 for t in ps]
        self.index_of = [t.index_of for t in ps]
        self.offsets = [t.offsets for t in ps]
        self.K = len(ps)
        self.L = ps.longest_length

    def claim(self, state: State) -> int:
        m = 0
        for age, k in state:
            m |= self.masks[k] >> age
        return m

    def step(self, state: State) -> list[tuple[Label, State]]:
        claim = 0
        cover = None
        for age, k in state:
            m = self.masks[k] >> age
            if m & 1:
                cover = (age, k)
            claim |= m
        last = self.last
        if cover is not None:
            age, k = cover
            nxt = tuple((a + 1, j) for a, j in state if last[j] > a)
            return [((k + 1, self.index_of[k][age]), nxt)]
        out = []
        aged = tuple((a + 1, j) for a, j in state if last[j] > a)
        for k in range(self.K):
            if self.masks[k] & claim:
                continue
            nxt = ((1, k),) + aged if last[k] >= 1 else aged
            out.append(((k + 1, 1), nxt))
        return out

    def warm_step(self, state: State, cut: int) -> list[State]:
        """Extra successors at ``cut`` from tiles that started before cell 0."""
        claim = self.claim(state)
        if claim & 1:
            return []
        out = []
        below = (1 << cut) - 1
        for k in range(self.K):
            mask = self.masks[k]
            for p in self.offsets[k]:
                if p <= cut:
                    continue
                if (mask >> (p - cut)) & below:
                    continue
                if (mask >> p) & claim:
                    continue
                entries = [(a + 1, j) for a, j in state if self.last[j] > a]
                if self.last[k] > p:
                    entries.append((p + 1, k))
                out.append(tuple(sorted(entries)))
        return out


class TilingAutomaton:
    """Pruned boundary-state automaton of a prototile set.

    Attributes
    ----------
    prototiles : PrototileSet
    states : tuple of State
        Canonically ordered; each state is a sorted tuple of ``(age, tile_index)``
        with 0-based tile indices.
    edges : tuple of (src, dst, label)
        ``label = (k, l)`` with 1-based ``k`` and ``l``; sorted by ``(src, label)``.
    explored : int
        Number of states visited before pruning.
    """

    def __init__(self, prototiles: PrototileSet, states, edges, explored: int = 0):
        self.prototiles = prototiles
        self.states: tuple[State, ...] = tuple(states)
        self.edges: tuple[tuple[int, int, Label], ...] = tuple(sorted(edges, key=lambda e: (e[0], e[2])))
        self.explored = explored
        self.delta: list[dict[Label, int]] = [{} for _ in self.states]
        for s, d, lab in self.edges:
            if lab in self.delta[s]:
                raise ValueError(f"state {s} has two edges labeled {lab}")
            self.delta[s][lab] = d

    def __len__(self):
        return len(self.states)

    @property
    def is_empty(self) -> bool:
        return not self.states

    @property
    def alphabet(self) -> list[Label]:
        """All subscripted symbols of the prototile set, in order."""
        return [(k + 1, ell) for k, t in enumerate(self.prototiles) for ell in range(1, t.size + 1)]

    def run(self, state: int, word: Iterable[Label]) -> int:
        """Follow ``word`` from ``state``; -1 when the path dies."""
        for lab in word:
            if state < 0:
                return -1
            state = self.delta[state].get(lab, -1)
        return state

    def words(self, length: int) -> set[tuple[Label, ...]]:
        """Subscripted words of the given length labeling paths (all extend bi-infinitely)."""
        layer = {(q, ()) for q in range(len(self.states))}
        for _ in range(length):
            layer = {(d, w + (lab,)) for q, w in layer for lab, d in self.delta[q].items()}
        return {w for _, w in layer}

    def to_dict(self) -> dict:
        return {
            "format": AUTOMATON_FORMAT,
            "version": AUTOMATON_VERSION,
            "kind": "subscripted",
            "metadata": {
                "K": len(self.prototiles),
                "L": self.prototiles.longest_length,
                "colors": list(self.prototiles.colors),
                "state_count": len(self.states),
                "edge_count": len(self.edges),
            },
            "states": [[[age, k + 1] for age, k in s] for s in self.states],
            "edges": [[s, d, list(lab)] for s, d, lab in self.edges],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def to_dot(self) -> str:
        lines = ["digraph tiling {", "  rankdir=LR;"]
        colors = self.prototiles.colors
        for i, s in enumerate(self.states):
            desc = ",".join(f"{colors[k]}@{age}" for age, k in s) or "clean"
            lines.append(f'  q{i} [label="{i}: {desc}"];')
        for s, d, (k, ell) in self.edges:
            lines.append(f'  q{s} -> q{d} [label="{colors[k - 1]}{ell}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _canonical_order(states: Sequence[State], succ: dict[int, list[tuple[Label, int]]]) -> list[int]:
    order: list[int] = []
    seen: set[int] = set()
    for root in sorted(range(len(states)), key=lambda i: states[i]):
        if root in seen:
            continue
        seen.add(root)
        todo = deque([root])
        while todo:
            v = todo.popleft()
            order.append(v)
            for _, w in sorted(succ.get(v, ())):
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
    return order


def build_automaton(ps: PrototileSet, max_states: int | None = None) -> TilingAutomaton:
    """Construct the pruned automaton of ``ps``.

    Candidate states are generated by reading cells ``0 .. L-2`` while also
    admitting tiles that began before cell 0, which yields every boundary
    state that can occur at cut ``L-1`` of some tiling; the forward closure
    of those states is then pruned to vertices on bi-infinite paths.  The
    result is empty exactly when ``ps`` does not tile Z.

    Raises
    ------
    AutomatonBudgetError
        If more than ``max_states`` states are explored (default 10**6,
        overridable through ``TILESYS_MAX_STATES``).
    """
    if max_states is None:
        max_states = _env_int("TILESYS_MAX_STATES", DEFAULT_MAX_STATES)
    table = _TileTable(ps)

    layer: set[State] = {()}
    for cut in range(table.L - 1):
        nxt: set[State] = set()
        for s in layer:
            nxt.update(t for _, t in table.step(s))
            nxt.update(table.warm_step(s, cut))
        layer = nxt
        if len(layer) > max_states:
            raise AutomatonBudgetError(f"warm-up layer exceeded {max_states} states")

    index: dict[State, int] = {}
    states: list[State] = []
    todo = deque()
    for s in sorted(layer):
        index[s] = len(states)
        states.append(s)
        todo.append(s)
    edges = []
    while todo:
        s = todo.popleft()
        i = index[s]
        for lab, t in table.step(s):
            j = index.get(t)
            if j is None:
                if len(states) >= max_states:
                    raise AutomatonBudgetError(f"automaton exceeded {max_states} states")
                j = index[t] = len(states)
                states.append(t)
                todo.append(t)
            edges.append((i, j, lab))

    keep = _graph.essential_vertices(len(states), [(s, d) for s, d, _ in edges])
    kept = sorted(keep)
    renum = {old: new for new, old in enumerate(kept)}
    sub_states = [states[i] for i in kept]
    succ: dict[int, list[tuple[Label, int]]] = {}
    sub_edges = []
    for s, d, lab in edges:
        if s in renum and d in renum:
            sub_edges.append((renum[s], renum[d], lab))
            succ.setdefault(renum[s], []).append((lab, renum[d]))
    order = _canonical_order(sub_states, succ)
    final = {old: new for new, old in enumerate(order)}
    return TilingAutomaton(
        ps,
        [sub_states[i] for i in order],
        [(final[s], final[d], lab) for s, d, lab in sub_edges],
        explored=len(states),
    )


def tiles_integers(ps: PrototileSet | TilingAutomaton) -> bool:
    ta = ps if isinstance(ps, TilingAutomaton) else build_automaton(ps)
    return not ta.is_empty


def membership_periodic(ps: PrototileSet | TilingAutomaton, word: Sequence[str]) -> bool:
    """Is the periodic color sequence ``word^inf`` a point of the tiling system?

    Works on the product of the automaton with the cycle of length ``len(word)``;
    any cycle there spells a power of a rotation of ``word``.
    """
    ta = ps if isinstance(ps, TilingAutomaton) else build_automaton(ps)
    if not word:
        raise ValueError("word must be nonempty")
    ks = [ta.prototiles.index(c) + 1 for c in word]
    p = len(ks)
    nq = len(ta.states)
    arcs = []
    for s, d, (k, _) in ta.edges:
        for j in range(p):
            if ks[j] == k:
                arcs.append((s * p + j, d * p + (j + 1) % p))
    return _graph.has_cycle(nq * p, arcs)


def enumerate_window_tilings(ps: PrototileSet, w: int) -> list[Tiling]:
    """All covers of cells ``0 .. w-1`` by tiles, which may protrude past either end.

    Placements are chosen for the leftmost uncovered cell, trying tiles and
    then positions inside the tile in order, so the output order is fixed.
    """
    if w < 1:
        raise ValueError("window length must be positive")
    out: list[Tiling] = []
    placements: list[tuple[int, int]] = []
    covered: set[int] = set()

    def rec(cell: int):
        while cell < w and cell in covered:
            cell += 1
        if cell == w:
            out.append(Tiling(tuple(sorted(placements)), window=(0, w - 1)))
            return
        for k, tile in enumerate(ps):
            for p in tile.offsets:
                start = cell - p
                cells = [start + q for q in tile.offsets]
                if any(0 <= c < cell or c in covered for c in cells):
                    continue
                placements.append((start, k))
                covered.update(cells)
                rec(cell + 1)
                covered.difference_update(cells)
                placements.pop()

    rec(0)
    return out


@dataclass(frozen=True)
class WindowVerdict:
    """Outcome of :func:`check_window_condition`.

    ``counterexample`` is one period of a subscripted sequence on which the
    local condition and membership disagree, or ``None`` when they agree on
    every periodic sequence up to ``max_period``.
    """

    window: int
    max_period: int
    checked: int
    counterexample: tuple[Label, ...] | None = None

    @property
    def holds(self) -> bool:
        return self.counterexample is None


def check_window_condition(
    ps: PrototileSet | TilingAutomaton, window: int, max_period: int | None = None
) -> WindowVerdict:
    """Compare ``window``-local admissibility with membership on periodic points.

    A periodic sequence over the subscripted alphabet is *locally admissible*
    when each of its factors of length ``window`` labels a path of the
    automaton.  Every sequence of period at most ``max_period`` is examined;
    subtrees where both tests have already failed are counted without being
    expanded.
    """
    if window < 1:
        raise ValueError("window must be positive")
    if max_period is None:
        max_period = _env_int("TILESYS_PERIOD_BOUND", DEFAULT_PERIOD_BOUND)
    ta = ps if isinstance(ps, TilingAutomaton) else build_automaton(ps)
    alphabet = ta.alphabet
    A = len(alphabet)
    allowed = ta.words(window)
    delta = ta.delta
    identity = tuple(range(len(ta.states)))
    checked = 0

    for p in range(1, max_period + 1):
        found = None
        prefix: list[Label] = []

        def leaf(f, local_ok) -> bool:
            if local_ok:
                x = prefix * (window // p + 2)
                local_ok = all(tuple(x[i:i + window]) in allowed for i in range(p))
            return local_ok != _graph.partial_map_has_cycle(f)

        def rec(f, local_ok) -> bool:
            nonlocal checked, found
            depth = len(prefix)
            if depth == p:
                checked += 1
                if leaf(f, local_ok):
                    found = tuple(prefix)
                    return True
                return False
            for a in alphabet:
                g = tuple(delta[q].get(a, -1) if q >= 0 else -1 for q in f)
                ok = local_ok
                if ok and depth + 1 >= window:
                    ok = tuple(prefix[depth + 1 - window:]) + (a,) in allowed
                if not ok and max(g, default=-1) < 0:
                    checked += A ** (p - depth - 1)
                    continue
                prefix.append(a)
                hit = rec(g, ok)
                prefix.pop()
                if hit:
                    return True
            return False

        if rec(identity, True):
            return WindowVerdict(window, max_period, checked, found)
    return WindowVerdict(window, max_period, checked)


def iter_small_prototile_sets(max_tiles: int, max_length: int) -> Iterator[PrototileSet]:
    """Every set of at most ``max_tiles`` prototiles of length at most ``max_length``.

    Shapes may repeat; tiles are colored ``a, b, ...`` in shape order.
    """
    shapes = [
        (0,) + rest
        for n in range(max_length)
        for rest in itertools.combinations(range(1, max_length), n)
    ]
    shapes.sort(key=lambda s: (s[-1], s))
    for count in range(1, max_tiles + 1):
        for combo in itertools.combinations_with_replacement(shapes, count):
            yield PrototileSet.from_shapes(combo)
