"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line with its runtime; the lines are
printed in the pytest terminal summary.  Run this file directly for the
lines alone: ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from tilesys import _graph  # noqa: E402
from tilesys.automaton import build_automaton, check_window_condition, iter_small_prototile_sets, tiles_integers  # noqa: E402
from tilesys.compiler import RELAXED, STRICT, compile_matrix, mat_pow, trace  # noqa: E402
from tilesys.factorial import decode, encode, factorial_table, max_value  # noqa: E402
from tilesys.prototiles import PrototileSet  # noqa: E402
from tilesys.sofic import (  # noqa: E402
    determinize,
    drop_subscripts,
    entropy,
    language_up_to,
    periodic_counts,
    presentation_of,
    renewal_presentation,
)
from tilesys.verify import check_center_filling, head_aligned_blocks, head_spacings, verify_structural  # noqa: E402

GOLDEN = math.log((1 + math.sqrt(5)) / 2)
ENTROPY_TOL = 1e-9


def shapes(ps):
    return [(t.color, t.offsets) for t in ps]


def even_system():
    ps = PrototileSet.from_broken_words(["R", "BB"])
    dp = determinize(drop_subscripts(build_automaton(ps)))
    h = entropy(dp)
    fix = periodic_counts(dp, [1, 3])
    brute = {p: oracles.count_periodic(shapes(ps), p) for p in (1, 3)}
    ok = abs(h - GOLDEN) <= ENTROPY_TOL and fix[1] == 2 and fix[3] == 5 and brute == {1: 2, 3: 5}
    return ok, f"entropy {h:.12g} vs {GOLDEN:.12g}, Fix(sigma) = {fix[1]}, Fix(sigma^3) = {fix[3]}, brute {brute}"


def renewal_equality():
    ps = PrototileSet.from_broken_words(["R", "B _ B"])
    a = set(language_up_to(presentation_of(ps), 12))
    b = set(language_up_to(renewal_presentation(["R", "BRB", "BBBB"]), 12))
    return a == b, f"{len(a)} words vs {len(b)} words up to length 12, equal={a == b}"


def short_window_regression():
    ps = PrototileSet.from_broken_words(["R", "BB"])
    ta = build_automaton(ps)
    b1 = (ps.index("B") + 1, 1)
    admitted = any(b1 in ta.delta[s] for s in range(len(ta.states)))
    f = [ta.delta[s].get(b1, -1) for s in range(len(ta.states))]
    rejected = not _graph.partial_map_has_cycle(f)
    short = check_window_condition(ta, 1, 12)
    full = check_window_condition(ta, 2, 12)
    ok = admitted and rejected and short.counterexample == (b1,) and full.holds
    return ok, (f"B1 admitted by 1-window: {admitted}, all-B1 in system: {not rejected}, "
                f"2-window agrees on {full.checked} sequences of period <= 12")


def fixed_point_suite():
    period2 = extended = 0
    bad = []
    for ps in iter_small_prototile_sets(2, 5):
        c = periodic_counts(presentation_of(ps), [1, 2, 3, 4])
        fixed = c[1]
        if ps.longest_length <= 4:
            period2 += 1
            if c[2] - c[1] > 0 and fixed < 2:
                bad.append(shapes(ps))
        extended += 1
        if (c[3] - c[1] > 0 or c[4] - c[2] > 0) and fixed < 1:
            bad.append(shapes(ps))
    return not bad, f"{period2} sets for period 2, {extended} sets for periods 3 and 4, counterexamples {bad}"


def compile_single_loop():
    out = compile_matrix([[1]], mode=STRICT)
    n, m = out.params.n, out.params.m
    ta = build_automaton(out.prototile_set())
    dp = determinize(drop_subscripts(ta))
    fix = periodic_counts(dp, range(1, m + 1))
    expected = m * trace(mat_pow(out.A, m))
    blocks = {b for b, *_ in head_aligned_blocks(ta, m)}
    h = entropy(dp)
    ok = ((n, m) == (2, 26) and fix[m] == expected == 26 and all(fix[p] == 0 for p in range(1, m))
          and abs(h) <= ENTROPY_TOL and len(blocks) == 1)
    return ok, f"n={n} m={m} Fix(sigma^26)={fix[m]} m*trace={expected} shorter periods 0: " \
               f"{all(fix[p] == 0 for p in range(1, m))} entropy={h:.3g} blocks={len(blocks)}"


def compile_swap():
    out = compile_matrix([[0, 1], [1, 0]], mode=RELAXED)
    n, m = out.params.n, out.params.m
    ta = build_automaton(out.prototile_set())
    dp = determinize(drop_subscripts(ta))
    fix = periodic_counts(dp, [m, 2 * m])
    expected = m * trace(mat_pow(out.A, 2 * m))
    spacing, rack_free = head_spacings(ta)
    h = entropy(dp)
    ok = ((n, m) == (3, 39) and fix[m] == 0 and fix[2 * m] == expected == 78
          and abs(h) <= ENTROPY_TOL and spacing == {39} and not rack_free)
    return ok, f"n={n} m={m} Fix(sigma^39)={fix[m]} Fix(sigma^78)={fix[2 * m]} entropy={h:.3g} head gaps {sorted(spacing)}"


def golden_structural():
    out = compile_matrix([[1, 1], [1, 0]], mode=RELAXED)
    rep = verify_structural(out)
    table = factorial_table(out.params.n)
    identity = all(
        sum(c * table[k] for k, c in enumerate(out.digits[(I, J)].digits, 1)) == out.Am[I - 1][J - 1]
        for I in (1, 2) for J in (1, 2)
    )
    names = {c.name for c in rep.checks}
    ok = rep.passed and identity and out.racks is None and {"counting-identity", "geometry"} <= names
    digits = max(len(str(x)) for row in out.Am for x in row)
    return ok, (f"n={out.params.n}, {out.total_racks()} racks never listed, entries up to {digits} digits, "
                f"identity exact: {identity}, report: {rep.status}")


def center_fillings():
    c1, c2 = check_center_filling(2, 1), check_center_filling(3, 2)
    return c1.passed and c2.passed, f"{c1.detail}; {c2.detail}"


def oracle_equivalence():
    sets = list(iter_small_prototile_sets(2, 5))
    mismatches = 0
    for ps in sets:
        sh = shapes(ps)
        if tiles_integers(ps) is not oracles.tiles_integers(sh):
            mismatches += 1
        got = periodic_counts(presentation_of(ps), range(1, 7))
        mismatches += sum(got[p] != oracles.count_periodic(sh, p) for p in range(1, 7))
    rng = random.Random(9)
    roundtrips = 0
    for n in range(2, 51):
        table = factorial_table(n + 1)
        for _ in range(10_000):
            v = rng.randint(0, max_value(n))
            if decode(encode(v, n, table)) != v:
                mismatches += 1
            roundtrips += 1
    return mismatches == 0, f"{len(sets)} prototile sets (periods 1..6), {roundtrips} codec roundtrips, mismatches {mismatches}"


CRITERIA = [
    (1, "even system entropy and fixed points", even_system, 1.0),
    (2, "tiling system of R, B_B equals renewal system up to 12", renewal_equality, 5.0),
    (3, "short window regression", short_window_regression, 5.0),
    (4, "fixed-point suite", fixed_point_suite, 60.0),
    (5, "compiler end to end, A = [[1]] strict", compile_single_loop, 30.0),
    (6, "compiler end to end, A = [[0,1],[1,0]] relaxed", compile_swap, 300.0),
    (7, "structural verification at scale, golden mean relaxed", golden_structural, 300.0),
    (8, "k!-fillings of centers for k = 1, 2", center_fillings, 1.0),
    (9, "oracle equivalence and codec roundtrip", oracle_equivalence, 60.0),
]


def evaluate(number, title, fn, limit):
    t0 = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < limit
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({elapsed:.2f}s, limit {limit:g}s) :: {detail}"
    return ok, line


@pytest.mark.parametrize("number, title, fn, limit", CRITERIA, ids=[f"criterion-{c[0]}" for c in CRITERIA])
def test_criterion(number, title, fn, limit):
    from conftest import ACCEPTANCE_LINES

    ok, line = evaluate(number, title, fn, limit)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
