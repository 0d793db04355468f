"""``tilesys`` command line.

Exit codes: 0 pass, 1 input error, 2 empty system, 3 skipped for scale,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from tilesys import prototiles as pt
from tilesys import worked
from tilesys.automaton import AutomatonBudgetError, build_automaton, enumerate_window_tilings, tiles_integers
from tilesys.compiler import COMPILED_FORMAT, RELAXED, STRICT, CompilerError, CompilerOutput, compile_matrix, load_matrix
from tilesys.prototiles import PrototileError, PrototileSet
from tilesys.sofic import determinize, drop_subscripts, language_up_to, periodic_counts, spectral_analysis
from tilesys.verify import Budget, verify_dynamics, verify_structural

EXIT_OK, EXIT_INPUT, EXIT_EMPTY, EXIT_SKIPPED, EXIT_FAILED = 0, 1, 2, 3, 4
CHARPOLY_MAX_DEGREE = 12


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def load_system(path: str) -> PrototileSet:
    """A prototile file, or a compiled file (its full prototile set)."""
    text = _read(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        if isinstance(doc, dict) and doc.get("format") == COMPILED_FORMAT:
            return CompilerOutput.from_dict(doc).prototile_set()
        return pt.prototiles_from_dict(doc)
    except (PrototileError, CompilerError) as exc:
        raise InputError(f"{path}: {exc}") from None


def load_compiled(path: str) -> CompilerOutput:
    try:
        return CompilerOutput.from_json(_read(path))
    except CompilerError as exc:
        raise InputError(f"{path}: {exc}") from None


def format_poly(coeffs: list[int]) -> str:
    deg = len(coeffs) - 1
    terms = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        p = deg - i
        mag = abs(c)
        body = "x" if p == 1 else f"x^{p}" if p else ""
        coef = str(mag) if mag != 1 or not body else ""
        sign = "-" if c < 0 else "+"
        terms.append((sign, coef + body))
    if not terms:
        return "0"
    first_sign, first = terms[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, t in terms[1:]:
        out += f" {sign} {t}"
    return out


def _entropy_text(h: float) -> str:
    return f"{h:.12g}" if h else "0"


def _word_text(word) -> str:
    if not word:
        return "(empty word)"
    sep = "" if all(len(c) == 1 for c in word) else " "
    return sep.join(word)


# -- subcommands


def cmd_analyze(args) -> int:
    ps = load_system(args.file)
    ta = build_automaton(ps)
    print(f"prototiles: {len(ps)}  L = {ps.longest_length}")
    for t in ps:
        print(f"  {t.color}: {pt.render_broken_word(t)}")
    print(f"subscripted automaton: {len(ta.states)} states, {len(ta.edges)} edges ({ta.explored} explored)")
    if args.export_automaton:
        Path(args.export_automaton).write_text(ta.to_json(), encoding="utf-8")
    if args.dot:
        Path(args.dot).write_text(ta.to_dot(), encoding="utf-8")
    tiles = tiles_integers(ta)
    print(f"tiles Z: {'true' if tiles else 'false'}")
    if not tiles:
        print("empty system")
        return EXIT_EMPTY
    dp = determinize(drop_subscripts(ta), merge=args.merge)
    print(f"sofic presentation: {len(dp)} states, {len(dp.edges)} edges")
    spectrum = spectral_analysis(dp.adjacency())
    print(f"entropy: {_entropy_text(spectrum.entropy)}")
    for b in spectrum.blocks:
        if "charpoly" in b and b["size"] <= CHARPOLY_MAX_DEGREE and b["radius"] == spectrum.radius:
            print(f"characteristic polynomial: {format_poly(b['charpoly'])}")
            break
    periods = list(range(1, args.periods + 1))
    counts = periodic_counts(dp, periods)
    print(f"fixed points: {counts[1]}")
    for p in periods[1:]:
        print(f"Fix(sigma^{p}) = {counts[p]}")
    return EXIT_OK


def cmd_compile(args) -> int:
    try:
        A = load_matrix(_read(args.matrix))
        out = compile_matrix(A, mode=args.mode)
    except CompilerError as exc:
        raise InputError(f"{args.matrix}: {exc}") from None
    text = out.to_json()
    summary = [
        f"n = {out.params.n}",
        f"m = {out.params.m}",
        f"barbells: {len(out.barbells)}",
        f"racks: {out.total_racks()}",
        f"prototiles: {len(out.barbells) + out.total_racks()}",
    ]
    if out.total_racks() == 0:
        summary.append("warning: empty system (no racks; barbells alone do not tile)")
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        stream = sys.stdout
    else:
        sys.stdout.write(text)
        stream = sys.stderr
    for line in summary:
        print(line, file=stream)
    return EXIT_OK


def cmd_verify(args) -> int:
    out = load_compiled(args.file)
    print(f"compiled system: n = {out.params.n}, m = {out.params.m}, mode {out.params.mode}")
    print("structural:")
    rep = verify_structural(out)
    for line in rep.lines():
        print("  " + line)
    status = [rep.status]
    if args.dynamic:
        print("dynamic:")
        dyn = verify_dynamics(out, Budget.from_env())
        for line in dyn.lines():
            print("  " + line)
        status.append(dyn.status)
    if "failed" in status:
        return EXIT_FAILED
    if "skipped" in status:
        return EXIT_SKIPPED
    return EXIT_OK


def cmd_periodic(args) -> int:
    ps = load_system(args.file)
    if args.period < 1:
        raise InputError("period must be positive")
    dp = determinize(drop_subscripts(build_automaton(ps)))
    periods = range(1, args.period + 1) if args.all else [args.period]
    counts = periodic_counts(dp, periods)
    for p in periods:
        print(f"Fix(sigma^{p}) = {counts[p]}")
    return EXIT_OK if not dp.is_empty else EXIT_EMPTY


def cmd_language(args) -> int:
    ps = load_system(args.file)
    dp = determinize(drop_subscripts(build_automaton(ps)))
    words = language_up_to(dp, args.length)
    if args.exact:
        words = [w for w in words if len(w) == args.length]
    for w in words:
        print(_word_text(w))
    print(f"# {len(words)} words", file=sys.stderr)
    return EXIT_OK if words else EXIT_EMPTY


def render_tiling(ps: PrototileSet, placements, window: int) -> list[str]:
    """Rows of a window tiling, one per tile, with the window between bars."""
    lo = min(0, *(s for s, _ in placements))
    hi = max(window, *(s + ps[k].length for s, k in placements))
    rows = []
    for s, k in placements:
        t = ps[k]
        mark = t.color if len(t.color) == 1 and t.color.isalnum() else "#"
        cells = [" "] * (hi - lo)
        for x in range(s, s + t.length):
            cells[x - lo] = "_"
        for off in t.offsets:
            cells[s + off - lo] = mark
        rows.append(_frame(cells, lo, window) + f"   {t.color} @ {s}")
    return rows


def _frame(cells, lo: int, window: int) -> str:
    left, right = -lo, window - lo
    return "".join(cells[:left]) + "|" + "".join(cells[left:right]) + "|" + "".join(cells[right:])


def cmd_render(args) -> int:
    ps = load_system(args.file)
    if args.window < 1:
        raise InputError("window must be positive")
    found = 0
    for tiling in enumerate_window_tilings(ps, args.window):
        found += 1
        if found > args.limit:
            break
        print(f"tiling {found}:")
        for row in render_tiling(ps, tiling.placements, args.window):
            print("  " + row)
    if found == 0:
        print(f"no tiling covers a window of {args.window} cells")
        return EXIT_EMPTY
    return EXIT_OK


def cmd_examples(args) -> int:
    ok = True
    for outcome in worked.run_all():
        ok &= outcome.passed
        print(f"{'PASS' if outcome.passed else 'FAIL'} {outcome.name}")
        for line in outcome.lines:
            print("  " + line)
    return EXIT_OK if ok else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tilesys", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="automaton, tileability, entropy and fixed points of a prototile set")
    p.add_argument("file")
    p.add_argument("--periods", type=int, default=1, help="also count Fix(sigma^p) for p up to this")
    p.add_argument("--merge", action="store_true", help="merge states with equal follower sets")
    p.add_argument("--export-automaton", metavar="PATH")
    p.add_argument("--dot", metavar="PATH")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compile", help="barbell/rack prototiles realizing a matrix")
    p.add_argument("matrix")
    p.add_argument("--mode", choices=[STRICT, RELAXED], default=STRICT)
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("verify", help="check a compiled system")
    p.add_argument("file")
    p.add_argument("--dynamic", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("periodic", help="count points of period p")
    p.add_argument("file")
    p.add_argument("-p", "--period", type=int, default=1)
    p.add_argument("--all", action="store_true", help="every period from 1 to p")
    p.set_defaults(func=cmd_periodic)

    p = sub.add_parser("language", help="list words of the tiling system")
    p.add_argument("file")
    p.add_argument("-l", "--length", type=int, default=4)
    p.add_argument("--exact", action="store_true", help="only words of exactly this length")
    p.set_defaults(func=cmd_language)

    p = sub.add_parser("render", help="draw the tilings of a finite window")
    p.add_argument("file")
    p.add_argument("-w", "--window", type=int, default=4)
    p.add_argument("--limit", type=int, default=20)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("examples", help="run the built-in small examples")
    p.set_defaults(func=cmd_examples)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AutomatonBudgetError as exc:
        print(f"skipped: {exc}", file=sys.stderr)
        return EXIT_SKIPPED


if __name__ == "__main__":
    sys.exit(main())
