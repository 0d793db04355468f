"""Structural and dynamical checks of compiled barbell/rack systems.

Structural checks use exact integers and finite searches only and run at
any scale.  Dynamical checks build the tiling automaton of the compiled
prototiles, so they only run within an explicit budget and report
``skipped`` otherwise.
"""

from __future__ import annotations

import itertools
import math
import os
import random
from dataclasses import dataclass, field

from tilesys.automaton import AutomatonBudgetError, TilingAutomaton, build_automaton
from tilesys.compiler import (
    CompilerOutput,
    RackSpec,
    _parse_rack_color,
    center_runs,
    head_runs,
    mat_pow,
    tail_runs,
    trace,
)
from tilesys.factorial import decode, factorial_table
from tilesys.prototiles import runs_to_offsets
from tilesys.sofic import determinize, drop_subscripts, entropy, matrix_entropy, periodic_counts

ENTROPY_MATCH_TOL = 1e-9


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    witness: object = None


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)
    status: str = "passed"  # passed | failed | skipped
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "passed"

    def add(self, name, passed, detail="", witness=None) -> Check:
        c = Check(name, bool(passed), detail, witness)
        self.checks.append(c)
        if not c.passed:
            self.status = "failed"
        return c

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            line = f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}"
            if not c.passed and c.witness is not None:
                line += f" witness={c.witness}"
            out.append(line)
        if self.status == "skipped":
            out.append(f"SKIP {self.reason}")
        return out


@dataclass(frozen=True)
class Budget:
    alphabet: int = 200
    length: int = 64
    states: int = 10**6

    @classmethod
    def from_env(cls) -> "Budget":
        d = cls()
        return cls(
            int(os.environ.get("TILESYS_MAX_ALPHABET", d.alphabet)),
            int(os.environ.get("TILESYS_MAX_LENGTH", d.length)),
            int(os.environ.get("TILESYS_MAX_STATES", d.states)),
        )


# -- center fillings ---------------------------------------------------------

def center_blanks(offsets, n: int) -> list[int]:
    """Blank cells of the center region ``[2n, 13n)`` of a rack, ascending."""
    solid = set(offsets)
    return [x for x in range(2 * n, 13 * n) if x not in solid]


def center_fillings(blanks: list[int], barbell_offsets: list[tuple[int, ...]]) -> list[tuple[tuple[int, int], ...]]:
    """Every exact cover of ``blanks`` by barbells lying entirely inside them.

    Each filling is a sorted tuple of ``(start, barbell_index)``.  The
    leftmost open blank must be the first cell of whatever barbell covers
    it, because every cell to its left is already taken.
    """
    open_cells = set(blanks)
    out = []
    chosen: list[tuple[int, int]] = []

    def rec():
        if not open_cells:
            out.append(tuple(sorted(chosen)))
            return
        b = min(open_cells)
        for idx, offs in enumerate(barbell_offsets):
            cells = [b + p for p in offs]
            if all(c in open_cells for c in cells):
                open_cells.difference_update(cells)
                chosen.append((b, idx))
                rec()
                chosen.pop()
                open_cells.update(cells)

    rec()
    return out


def filling_permutation(filling, blanks: list[int], barbell_offsets, k: int) -> tuple[int, ...] | None:
    """Read off ``pi`` with ``pi(j) = l`` when a barbell sits on labels
    ``2j-1, 2j, 2(k+l)-1, 2(k+l)``; ``None`` if the filling has another shape."""
    label = {x: t + 1 for t, x in enumerate(blanks)}
    pi = {}
    for start, idx in filling:
        labs = [label[start + p] for p in barbell_offsets[idx]]
        a, b, c, d = labs
        if b != a + 1 or d != c + 1 or a % 2 == 0 or c % 2 == 0:
            return None
        j, ell = (a + 1) // 2, (c + 1) // 2 - k
        if not (1 <= j <= k and 1 <= ell <= k) or j in pi:
            return None
        pi[j] = ell
    if sorted(pi) != list(range(1, k + 1)) or sorted(pi.values()) != list(range(1, k + 1)):
        return None
    return tuple(pi[j] for j in range(1, k + 1))


def check_center_filling(n: int, k: int, i: int = 0, barbell_offsets=None, rack_offsets=None) -> Check:
    """Exhaustive count of barbell fillings of one rack center against ``k!``."""
    if barbell_offsets is None:
        barbell_offsets = [(0, 1, 2 * r + 3, 2 * r + 4) for r in range(2 * n - 1)]
    if rack_offsets is None:
        rack_offsets = runs_to_offsets(head_runs(n, 1) + center_runs(n, k, i, 2 * n) + tail_runs(1, 13 * n))
    blanks = center_blanks(rack_offsets, n)
    fills = center_fillings(blanks, barbell_offsets)
    perms = [filling_permutation(f, blanks, barbell_offsets, k) for f in fills]
    expected = set(itertools.permutations(range(1, k + 1)))
    ok = (
        len(blanks) == 4 * k
        and len(fills) == math.factorial(k)
        and None not in perms
        and set(perms) == expected
        and len(set(perms)) == len(perms)
    )
    detail = f"n={n} k={k} i={i}: {len(fills)} fillings, k!={math.factorial(k)}"
    return Check(f"center-fillings[k={k}]", ok, detail, None if ok else {"fillings": fills[:5], "perms": perms[:5]})


# -- structural ----------------------------------------------------------------

def _head_tail(n: int, I: int, J: int) -> tuple[set[int], set[int], set[int]]:
    head = set(runs_to_offsets(head_runs(n, I)))
    blanks = set(range(2 * n)) - head
    tail = {x - 13 * n for x in runs_to_offsets(tail_runs(J, 13 * n))}
    return head, blanks, tail


def verify_structural(out: CompilerOutput, fill_bound: int = 4, samples: int = 32, seed: int = 0,
                      stream_limit: int = 5_000_000) -> Report:
    """Exact checks of the counting identity and the rack/barbell geometry."""
    rep = Report()
    p = out.params
    n, m, V = p.n, p.m, p.V

    rep.add("parameters", p.n > p.V and p.m == 13 * p.n and len(out.A) == V,
            f"V={V} n={n} m={m} mode={p.mode}")

    rs = sorted(b.r for b in out.barbells)
    rep.add("barbell-count", rs == list(range(2 * n - 1)), f"{len(rs)} barbells, expected {2 * n - 1}",
            None if rs == list(range(2 * n - 1)) else rs)

    recomputed = mat_pow(out.A, m)
    rep.add("matrix-power", recomputed == out.Am, f"A^{m} recomputed by repeated squaring")

    # one pass over the stream: per-(I,J,k) counts, i ranges, first rack per k
    total = out.total_racks()
    first_of_k: dict[int, RackSpec] = {}
    if out.racks is not None or total <= stream_limit:
        counts: dict[tuple[int, int, int], int] = {}
        indices: dict[tuple[int, int, int], set[int]] = {}
        for rack in out.iter_racks():
            key = (rack.I, rack.J, rack.k)
            counts[key] = counts.get(key, 0) + 1
            indices.setdefault(key, set()).add(rack.i)
            if rack.k <= fill_bound and rack.k not in first_of_k:
                first_of_k[rack.k] = rack
        bad_i = [key for key, ids in indices.items() if ids != set(range(counts[key]))]
        source = "rack stream"
    else:
        counts = out.rack_counts()
        bad_i = []
        source = "digits (stream too long to walk)"
        for (I, J) in sorted(out.digits):
            for k, _ in out.digits[(I, J)].nonzero():
                if k <= fill_bound and k not in first_of_k:
                    first_of_k[k] = RackSpec(I, J, k, 0, n)
    table = factorial_table(n + 1)
    bad = []
    for I, J in itertools.product(range(1, V + 1), repeat=2):
        target = recomputed[I - 1][J - 1]
        total_ij = sum(counts.get((I, J, k), 0) * table[k] for k in range(1, n + 1))
        d = out.digits.get((I, J))
        digit_total = decode(d) if d is not None else 0
        digit_match = d is None or all(counts.get((I, J, k), 0) == c for k, c in enumerate(d.digits, 1))
        if total_ij != target or digit_total != target or not digit_match:
            bad.append({"I": I, "J": J, "expected": str(target)[:40], "racks_sum": str(total_ij)[:40]})
    stray = [key for key in counts if not (1 <= key[0] <= V and 1 <= key[1] <= V and 1 <= key[2] <= n)]
    rep.add("counting-identity", not bad and not stray and not bad_i,
            f"sum_k c_k(I,J) k! = (A^{m})_IJ for all {V * V} entries, counted from {source}",
            bad or stray or bad_i or None)

    # head/tail complementarity for every pair, whether or not racks exist for it
    bad = []
    for I, J in itertools.product(range(1, V + 1), repeat=2):
        head, blanks, tail = _head_tail(n, I, J)
        exact = blanks == tail
        if exact != (I == J):
            bad.append((I, J))
        if not exact:
            uncovered = blanks - tail
            collide = tail & head
            if not uncovered and not collide:
                bad.append((I, J, "undetected mismatch"))
    rep.add("head-tail-fill", not bad, "head I is filled exactly by tail J iff I = J", bad or None)

    barbell_offsets = [runs_to_offsets(b.runs) for b in sorted(out.barbells, key=lambda b: b.r)]
    for k in sorted(first_of_k):
        rack = first_of_k[k]
        c = check_center_filling(n, k, rack.i, barbell_offsets, out.rack_prototile(rack).offsets)
        rep.add(c.name, c.passed, c.detail, c.witness)

    # geometry on a deterministic sample of the rack stream
    rng = random.Random(seed)
    picks = set(rng.sample(range(total), min(samples, total))) if total else set()
    picks.update({0, total - 1} if total else set())
    bad = []
    for idx in sorted(picks):
        rack = out.rack_at(idx)
        problem = _rack_geometry_problem(out, rack)
        if problem:
            bad.append((rack.color, problem))
    checked = len(picks)
    for b in out.barbells:
        offs = runs_to_offsets(b.runs)
        if len(offs) != 4 or offs[-1] + 1 != 2 * b.r + 5:
            bad.append((b.color, "barbell shape"))
    rep.add("geometry", not bad, f"{checked} sampled racks of {total}, {len(out.barbells)} barbells", bad or None)
    return rep


def _rack_geometry_problem(out: CompilerOutput, rack: RackSpec) -> str | None:
    n = out.params.n
    tile = out.rack_prototile(rack)
    offs = tile.offsets
    if tile.length != 13 * n + 2 * rack.J:
        return f"length {tile.length} != {13 * n + 2 * rack.J}"
    head = sum(1 for x in offs if x < 2 * n)
    center = sum(1 for x in offs if 2 * n <= x < 13 * n)
    tail = sum(1 for x in offs if x >= 13 * n)
    if (head, center, tail) != (2 * n - rack.I, 11 * n - 4 * rack.k, rack.J):
        return f"solid counts {(head, center, tail)}"
    if not (1 <= rack.k <= n and 0 <= rack.i < rack.k):
        return "parameters out of range"
    if tile.runs != rack.prototile().runs:
        return "shape differs from head/center/tail formula"
    return None


# -- dynamical -----------------------------------------------------------------

def _rack_start_labels(ta: TilingAutomaton) -> dict[tuple[int, int], str]:
    return {(k + 1, 1): t.color for k, t in enumerate(ta.prototiles) if t.color.startswith("rack:")}


def head_spacings(ta: TilingAutomaton) -> tuple[set[int], bool]:
    """Distances between consecutive rack heads along every path.

    Returns ``(distances, rack_free_cycle)``; the flag is set when some
    cycle avoids rack heads entirely.
    """
    starts = _rack_start_labels(ta)
    distances: set[int] = set()
    limit = len(ta.states) + 1
    entry = {d for s, d, lab in ta.edges if lab in starts}
    for q0 in sorted(entry):
        frontier = {q0}
        t = 1
        while frontier:
            if t > limit:
                return distances, True
            nxt = set()
            for q in frontier:
                for lab, d in ta.delta[q].items():
                    if lab in starts:
                        distances.add(t)
                    else:
                        nxt.add(d)
            frontier = nxt
            t += 1
    return distances, False


def head_aligned_blocks(ta: TilingAutomaton, m: int):
    """Color words of length ``m`` starting at a rack head.

    Cells covered by a tile that began before the head (the previous
    rack's tail) are masked as ``None``.  Yields ``(block, subscripted
    labels, start_state, end_state)`` for every such path.
    """
    starts = _rack_start_labels(ta)
    tiles = ta.prototiles
    for s, d0, lab0 in ta.edges:
        if lab0 not in starts:
            continue
        stack = [(d0, [lab0])]
        while stack:
            q, labs = stack.pop()
            if len(labs) == m:
                block = []
                for t, (k, ell) in enumerate(labs):
                    tile = tiles[k - 1]
                    block.append(tile.color if t - tile.offsets[ell - 1] >= 0 else None)
                yield tuple(block), tuple(labs), s, q
                continue
            for lab, d in ta.delta[q].items():
                stack.append((d, labs + [lab]))


def _block_arc(out: CompilerOutput, labs, tiles) -> tuple[str, tuple[int, ...]] | None:
    rack_tile = tiles[labs[0][0] - 1]
    I, J, k, i = _parse_rack_color(rack_tile.color)
    n = out.params.n
    blanks = center_blanks(rack_tile.offsets, n)
    placements = []
    bar_offs = {}
    for t, (kk, ell) in enumerate(labs):
        tile = tiles[kk - 1]
        if tile.color.startswith("barbell:") and ell == 1:
            bar_offs.setdefault(tile.color, tile.offsets)
            placements.append((t, tile.color))
    names = sorted(bar_offs)
    filling = [(t, names.index(c)) for t, c in placements]
    pi = filling_permutation(filling, blanks, [bar_offs[c] for c in names], k)
    if pi is None:
        return None
    return rack_tile.color, pi


def verify_dynamics(out: CompilerOutput, budget: Budget | None = None, periods=(1, 2, 3)) -> Report:
    """Build the tiling system of ``out`` and check it against the edge shift of ``A``.

    (a) rack heads start exactly ``m`` apart along every path;
    (b) ``Fix(sigma^(mp)) = m trace(A^(mp))`` and ``Fix(sigma^q) = 0`` for ``0 < q < m``;
    (c) equal entropies;
    (d) head-aligned ``m``-blocks correspond to arcs ``(rack, pi)`` of ``A^m``,
        and block followability matches arc composability.
    """
    budget = budget or Budget.from_env()
    rep = Report()
    p = out.params
    m = p.m
    if out.racks is None and out.total_racks() > 10_000:
        rep.status, rep.reason = "skipped", f"scale: {out.total_racks()} racks"
        return rep
    ps = out.prototile_set()
    if ps.alphabet_size > budget.alphabet or ps.longest_length > budget.length:
        rep.status = "skipped"
        rep.reason = (f"scale: alphabet {ps.alphabet_size} (budget {budget.alphabet}), "
                      f"L {ps.longest_length} (budget {budget.length})")
        return rep
    try:
        ta = build_automaton(ps, max_states=budget.states)
    except AutomatonBudgetError as exc:
        rep.status, rep.reason = "skipped", f"scale: {exc}"
        return rep

    distances, rack_free = head_spacings(ta)
    ok = not rack_free and distances <= {m}
    rep.add("head-spacing", ok, f"head start gaps {sorted(distances)} (expected {{{m}}})",
            None if ok else {"distances": sorted(distances), "rack_free_cycle": rack_free})

    dp = determinize(drop_subscripts(ta))
    wanted = list(range(1, m)) + [m * q for q in periods]
    fix = periodic_counts(dp, wanted)
    nonzero = {q: fix[q] for q in range(1, m) if fix[q]}
    rep.add("no-short-periods", not nonzero, f"Fix(sigma^q) = 0 for 0 < q < {m}", nonzero or None)
    for q in periods:
        expected = m * trace(mat_pow(out.A, m * q))
        rep.add(f"fixed-points[p={q}]", fix[m * q] == expected,
                f"Fix(sigma^{m * q}) = {fix[m * q]}, m*trace(A^{m * q}) = {expected}")

    h_t, h_a = entropy(dp), matrix_entropy(out.A)
    rep.add("entropy", abs(h_t - h_a) <= ENTROPY_MATCH_TOL, f"h(T) = {h_t:.12f}, h(Sigma_A) = {h_a:.12f}")

    tiles = ps
    block_arcs: dict[tuple, set] = {}
    ends: dict[tuple, set] = {}
    begins: dict[tuple, set] = {}
    bad_blocks = []
    for block, labs, s, e in head_aligned_blocks(ta, m):
        arc = _block_arc(out, labs, tiles)
        if arc is None:
            bad_blocks.append(block)
            continue
        block_arcs.setdefault(block, set()).add(arc)
        begins.setdefault(block, set()).add(s)
        ends.setdefault(block, set()).add(e)
    expected_arcs = {
        (r.color, pi)
        for r in out.iter_racks()
        for pi in itertools.permutations(range(1, r.k + 1))
    }
    found_arcs = set().union(*block_arcs.values()) if block_arcs else set()
    injective = all(len(a) == 1 for a in block_arcs.values()) and len(found_arcs) == len(block_arcs)
    arc_total = sum(sum(row) for row in out.Am)
    ok = not bad_blocks and injective and found_arcs == expected_arcs and len(block_arcs) == arc_total
    rep.add("block-correspondence", ok,
            f"{len(block_arcs)} head-aligned {m}-blocks, {arc_total} arcs in A^{m}",
            None if ok else {"bad": bad_blocks[:3], "missing": sorted(expected_arcs - found_arcs)[:3]})

    bad = []
    arc_of = {b: next(iter(a)) for b, a in block_arcs.items()}
    for b1, b2 in itertools.product(sorted(block_arcs, key=str), repeat=2):
        follows = bool(ends[b1] & begins[b2])
        J = _parse_rack_color(arc_of[b1][0])[1]
        I = _parse_rack_color(arc_of[b2][0])[0]
        if follows != (J == I):
            bad.append((arc_of[b1], arc_of[b2], follows))
    rep.add("block-followability", not bad, "block b' can follow b iff tail(b) = head(b')", bad[:3] or None)
    return rep
