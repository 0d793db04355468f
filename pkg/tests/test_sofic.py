import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from tilesys.automaton import build_automaton, iter_small_prototile_sets, membership_periodic
from tilesys.prototiles import Prototile, PrototileSet
from tilesys.sofic import (
    LabeledPresentation,
    characteristic_polynomial,
    count_periodic,
    determinize,
    drop_subscripts,
    entropy,
    language_up_to,
    least_period_counts,
    matrix_entropy,
    merge_followers,
    periodic_counts,
    presentation_of,
    renewal_presentation,
    spectral_analysis,
)
from tilesys.worked import even_system, renewal_example, third_example

GOLDEN = math.log((1 + math.sqrt(5)) / 2)
EMPTY = PrototileSet.from_shapes([[0, 1, 3]])
SMALL = list(iter_small_prototile_sets(2, 4))


def shapes(ps):
    return [(t.color, t.offsets) for t in ps]


def lang_of_labeled(lp: LabeledPresentation, length: int) -> set:
    """Label words of paths that extend to bi-infinite ones (lp is already essential)."""
    out = {()}
    frontier = {(s, ()) for s in range(lp.n_states)}
    for _ in range(length):
        frontier = {(d, w + (lp.colors[c],)) for s, w in frontier for (a, d, c) in lp.edges if a == s}
        out |= {w for _, w in frontier}
    return out if lp.n_states else set()


def test_drop_subscripts_even():
    lp = drop_subscripts(build_automaton(even_system()))
    assert lp.colors == ("R", "B")
    assert sorted(c for _, _, c in lp.edges) == [0, 1, 1]


def test_empty_edge_cases():
    ta = build_automaton(EMPTY)
    lp = drop_subscripts(ta)
    dp = determinize(lp)
    assert lp.n_states == 0 and dp.is_empty
    assert entropy(dp) == 0.0
    assert count_periodic(dp, 4) == 0
    assert language_up_to(dp, 1) == []


def test_determinize_even_two_states():
    dp = determinize(drop_subscripts(build_automaton(even_system())), merge=True)
    assert len(dp) == 2
    full = determinize(drop_subscripts(build_automaton(PrototileSet.from_shapes([[0]]))))
    assert len(full) == 1


@pytest.mark.parametrize("ps", [even_system(), renewal_example(), third_example()], ids=["even", "renewal", "third"])
def test_language_preserved(ps):
    lp = drop_subscripts(build_automaton(ps))
    dp = determinize(lp)
    merged = merge_followers(dp)
    for n in (4, 8, 12):
        want = lang_of_labeled(lp, n)
        assert set(language_up_to(dp, n)) == want
        assert set(language_up_to(merged, n)) == want


def test_language_examples():
    dp = presentation_of(even_system())
    assert language_up_to(dp, 2) == [(), ("R",), ("B",), ("R", "R"), ("R", "B"), ("B", "R"), ("B", "B")]
    one = presentation_of(PrototileSet.from_shapes([[0]]))
    assert language_up_to(one, 3) == [(), ("a",), ("a", "a"), ("a", "a", "a")]


@pytest.mark.parametrize("ps", SMALL[::2])
def test_language_against_periodic_factors(ps):
    dp = presentation_of(ps)
    lang = {w for w in language_up_to(dp, 4) if len(w) == 4}
    assert oracles.periodic_factors(shapes(ps), 4, 10) <= lang
    for w in itertools.product(ps.colors, repeat=4):
        if w not in lang:
            assert not oracles.member_periodic(shapes(ps), w)


def test_entropy_examples():
    assert abs(entropy(presentation_of(even_system())) - GOLDEN) < 1e-12
    assert entropy(presentation_of(PrototileSet.from_shapes([[0]]))) == 0.0
    two = PrototileSet.from_shapes([[0], [0]], colors=["R", "B"])
    assert abs(entropy(presentation_of(two)) - math.log(2)) < 1e-12


def test_spectral_exact_cross_check():
    res = spectral_analysis([[1, 1], [1, 0]])
    assert res.certified and res.blocks[0]["charpoly"] == [1, -1, -1]
    assert characteristic_polynomial([[2, 1], [1, 1]]) == [1, -3, 1]
    assert abs(matrix_entropy([[3, 1, 0], [1, 2, 1], [0, 1, 1]]) - math.log(2 + math.sqrt(3))) < 1e-12
    assert matrix_entropy([[0, 1], [0, 0]]) == 0.0


@given(st.lists(st.lists(st.integers(0, 3), min_size=4, max_size=4), min_size=4, max_size=4))
def test_spectral_matches_numpy(rows):
    import numpy as np

    want = float(max(abs(np.linalg.eigvals(np.array(rows, dtype=float)))))
    assert abs(spectral_analysis(rows).radius - want) <= 1e-7 * max(1.0, want)


def test_periodic_examples():
    dp = presentation_of(even_system())
    assert count_periodic(dp, 1) == 2
    assert count_periodic(dp, 3) == 5
    assert [count_periodic(dp, p) for p in range(1, 13)] == [2, 2, 5, 6, 12, 17, 30, 46, 77, 122, 200, 321]


@pytest.mark.parametrize("ps", list(iter_small_prototile_sets(2, 5)))
def test_count_periodic_matches_oracle(ps):
    dp = presentation_of(ps)
    got = periodic_counts(dp, range(1, 5))
    for p in range(1, 5):
        assert got[p] == oracles.count_periodic(shapes(ps), p)


@pytest.mark.parametrize("ps", [even_system(), renewal_example(), third_example()], ids=["even", "renewal", "third"])
def test_count_periodic_matches_membership(ps):
    ta = build_automaton(ps)
    dp = presentation_of(ta)
    K = len(ps.colors)
    for p in range(1, 9):
        if K**p > 10**4:
            break
        brute = sum(membership_periodic(ta, w) for w in itertools.product(ps.colors, repeat=p))
        assert count_periodic(dp, p) == brute


def test_least_period_counts():
    dp = presentation_of(even_system())
    least = least_period_counts(dp, 6)
    assert least[1] == 2 and least[2] == 0 and least[3] == 3 and least[6] == 17 - 5 - 2 + 2


def test_renewal_examples():
    assert language_up_to(renewal_presentation(["a"]), 2) == [(), ("a",), ("a", "a")]
    ab = renewal_presentation(["ab"])
    assert count_periodic(ab, 1) == 0 and count_periodic(ab, 2) == 2
    r = renewal_presentation(["R", "BRB", "BBBB"])
    t = presentation_of(renewal_example())
    assert set(language_up_to(r, 12)) == set(language_up_to(t, 12))


def _extend(ps: PrototileSet, offs) -> PrototileSet:
    return PrototileSet(list(ps) + [Prototile.from_offsets("z", offs)])


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SMALL), st.sets(st.integers(1, 3), max_size=3).map(lambda s: sorted(s | {0})))
def test_entropy_monotone(ps, offs):
    assert entropy(presentation_of(_extend(ps, offs))) >= entropy(presentation_of(ps)) - 1e-12
