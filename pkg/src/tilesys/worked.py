"""The small examples: even system, a renewal system, the short-window counterexample,
and the period-2/3/4 fixed-point facts, each as a self-checking routine."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from tilesys.automaton import build_automaton, check_window_condition, iter_small_prototile_sets
from tilesys.prototiles import PrototileSet
from tilesys.sofic import (
    determinize,
    drop_subscripts,
    entropy,
    language_up_to,
    least_period_counts,
    periodic_counts,
    renewal_presentation,
)

GOLDEN_ENTROPY = math.log((1 + math.sqrt(5)) / 2)


@dataclass
class Outcome:
    name: str
    passed: bool
    lines: list[str] = field(default_factory=list)


def even_system() -> PrototileSet:
    return PrototileSet.from_broken_words(["R", "BB"])


def renewal_example() -> PrototileSet:
    return PrototileSet.from_broken_words(["R", "B _ B"])


def third_example() -> PrototileSet:
    return PrototileSet.from_broken_words(["R", "BB _ B", "Y _ _ Y"])


def is_even_system_word(word) -> bool:
    """B-runs strictly between two R's have even length."""
    runs = "".join(word).split("R")
    return all(len(r) % 2 == 0 for r in runs[1:-1])


def check_even_system(max_len: int = 12) -> Outcome:
    dp = determinize(drop_subscripts(build_automaton(even_system())))
    h = entropy(dp)
    fix = periodic_counts(dp, [1, 3])
    lang = set(language_up_to(dp, max_len))
    words = {w for n in range(max_len + 1) for w in _all_words("RB", n) if is_even_system_word(w)}
    ok = abs(h - GOLDEN_ENTROPY) <= 1e-9 and fix[1] == 2 and fix[3] == 5 and lang == words
    return Outcome("even-system", ok, [
        f"entropy {h:.12g} (log golden ratio {GOLDEN_ENTROPY:.12g})",
        f"Fix(sigma) = {fix[1]}, Fix(sigma^3) = {fix[3]}",
        f"language up to length {max_len} equals the even system: {lang == words} ({len(lang)} words)",
    ])


def _all_words(alphabet: str, n: int):
    if n == 0:
        yield ()
        return
    for w in _all_words(alphabet, n - 1):
        for a in alphabet:
            yield w + (a,)


def check_renewal(max_len: int = 12) -> Outcome:
    tiling = determinize(drop_subscripts(build_automaton(renewal_example())))
    renewal = renewal_presentation(["R", "BRB", "BBBB"])
    a, b = set(language_up_to(tiling, max_len)), set(language_up_to(renewal, max_len))
    return Outcome("renewal-R-BRB-BBBB", a == b, [
        f"T(R, B_B) vs renewal system of R, BRB, BBBB up to length {max_len}: "
        f"{len(a)} vs {len(b)} words, equal={a == b}",
    ])


def sample_third_example(max_len: int = 8) -> Outcome:
    """Language sizes for {R, BB_B, Y__Y}; informational only."""
    dp = determinize(drop_subscripts(build_automaton(third_example())))
    lang = language_up_to(dp, max_len)
    sizes = [sum(1 for w in lang if len(w) == n) for n in range(max_len + 1)]
    sample = ["".join(w) for w in lang if len(w) == max_len][:6]
    return Outcome("third-example-sample", True, [
        f"factor counts by length 0..{max_len}: {sizes}",
        f"entropy {entropy(dp):.12g}",
        f"first words of length {max_len}: {' '.join(sample)}",
    ])


def check_short_window(max_period: int = 12) -> Outcome:
    ps = even_system()
    ta = build_automaton(ps)
    L = ps.longest_length
    short = check_window_condition(ta, L - 1, max_period)
    full = check_window_condition(ta, L, max_period)
    b1 = (ps.index("B") + 1, 1)
    ok = short.counterexample == (b1,) and full.holds
    return Outcome("short-window", ok, [
        f"window L-1={L - 1}: counterexample {_fmt_labels(ps, short.counterexample)}",
        f"window L={L}: local condition and membership agree on "
        f"{full.checked} periodic sequences of period <= {max_period}",
    ])


def _fmt_labels(ps, labels) -> str:
    if labels is None:
        return "none"
    return "..." + "".join(f"{ps[k - 1].color}{ell}" for k, ell in labels) * 3 + "..."


@dataclass
class FixedPointSuiteResult:
    sets_checked: int
    extended_checked: int
    counterexamples: list


def fixed_point_suite(max_length: int = 4, extended_length: int = 5, max_tiles: int = 2) -> FixedPointSuiteResult:
    """Least period 2 forces two fixed points; least period 3 or 4 forces one."""
    bad = []
    n1 = n2 = 0
    for ps in iter_small_prototile_sets(max_tiles, extended_length):
        dp = determinize(drop_subscripts(build_automaton(ps)))
        least = least_period_counts(dp, 4)
        fixed = least[1]
        n2 += 1
        if ps.longest_length <= max_length:
            n1 += 1
            if least[2] > 0 and fixed < 2:
                bad.append((ps, "period 2 without two fixed points"))
        if (least[3] > 0 or least[4] > 0) and fixed < 1:
            bad.append((ps, "period 3 or 4 without a fixed point"))
    return FixedPointSuiteResult(n1, n2, bad)


def check_fixed_point_suite() -> Outcome:
    res = fixed_point_suite()
    return Outcome("fixed-point-suite", not res.counterexamples, [
        f"{res.sets_checked} sets (<= 2 tiles, length <= 4): period 2 => >= 2 fixed points",
        f"{res.extended_checked} sets (<= 2 tiles, length <= 5): period 3 or 4 => a fixed point",
        f"counterexamples: {len(res.counterexamples)}",
    ])


def search_period_without_fixed_point(max_tiles: int = 2, max_length: int = 6, max_period: int = 12):
    """Prototile sets with a periodic point but no fixed point, with the least such period.

    Optional exploration; nothing depends on it finding anything.
    """
    found = []
    for ps in iter_small_prototile_sets(max_tiles, max_length):
        dp = determinize(drop_subscripts(build_automaton(ps)))
        if dp.is_empty:
            continue
        least = least_period_counts(dp, max_period)
        if least[1] == 0:
            p = min(q for q, c in least.items() if c)
            found.append((ps, p))
    return found


def run_all() -> list[Outcome]:
    return [check_even_system(), check_renewal(), sample_third_example(), check_short_window(), check_fixed_point_suite()]
