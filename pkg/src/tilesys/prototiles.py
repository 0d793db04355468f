"""Prototiles, prototile sets and finite tilings of the integers.

A prototile is a finite set of integers normalized to have minimum 0,
paired with a color name.  Offsets are stored as solid runs
``((start, length), ...)`` so that very long, mostly-solid tiles stay
compact.  The broken-word notation writes a tile as a row of solid
markers and ``_`` blanks, e.g. ``"B _ B"`` for ``{0, 2}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

BLANK = "_"

FORMAT_NAME = "tilesys.prototiles"
FORMAT_VERSION = 1


class PrototileError(ValueError):
    """Raised for malformed prototiles, broken words or prototile files."""


def offsets_to_runs(offsets: Iterable[int]) -> tuple[tuple[int, int], ...]:
    """Compress a strictly increasing offset list into ``(start, length)`` runs."""
    runs: list[list[int]] = []
    prev = None
    for x in offsets:
        if prev is not None and x <= prev:
            raise PrototileError(f"offsets must be strictly increasing, got {prev} then {x}")
        if runs and x == prev + 1:
            runs[-1][1] += 1
        else:
            runs.append([x, 1])
        prev = x
    return tuple((s, n) for s, n in runs)


def runs_to_offsets(runs: Iterable[Sequence[int]]) -> tuple[int, ...]:
    out: list[int] = []
    for start, length in runs:
        if length < 1:
            raise PrototileError(f"run length must be positive, got {length}")
        if out and start <= out[-1]:
            raise PrototileError("runs must be increasing and non-overlapping")
        out.extend(range(start, start + length))
    return tuple(out)


def _merge_runs(runs: Iterable[Sequence[int]]) -> tuple[tuple[int, int], ...]:
    merged: list[list[int]] = []
    for start, length in runs:
        if length < 1:
            raise PrototileError(f"run length must be positive, got {length}")
        if merged:
            end = merged[-1][0] + merged[-1][1]
            if start < end:
                raise PrototileError("runs must be increasing and non-overlapping")
            if start == end:
                merged[-1][1] += length
                continue
        merged.append([start, length])
    return tuple((s, n) for s, n in merged)


@dataclass(frozen=True)
class Prototile:
    """A colored prototile.

    Parameters
    ----------
    color : str
        Symbolic name, unique within a :class:`PrototileSet`.
    runs : tuple of (start, length)
        Solid runs; the first run starts at 0.
    """

    color: str
    runs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.color:
            raise PrototileError("prototile color must be a nonempty string")
        runs = _merge_runs(self.runs)
        if not runs:
            raise PrototileError(f"prototile {self.color!r} has no offsets")
        if runs[0][0] != 0:
            raise PrototileError(f"prototile {self.color!r} must have minimum offset 0")
        object.__setattr__(self, "runs", runs)

    @classmethod
    def from_offsets(cls, color: str, offsets: Iterable[int]) -> "Prototile":
        return cls(color, offsets_to_runs(offsets))

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        return runs_to_offsets(self.runs)

    @cached_property
    def index_of(self) -> dict[int, int]:
        """Map offset -> 1-based position ``l`` within the tile."""
        return {p: i + 1 for i, p in enumerate(self.offsets)}

    @cached_property
    def mask(self) -> int:
        """Bitmask with bit ``p`` set for every offset ``p``."""
        m = 0
        for start, length in self.runs:
            m |= ((1 << length) - 1) << start
        return m

    @property
    def length(self) -> int:
        start, n = self.runs[-1]
        return start + n

    @property
    def size(self) -> int:
        return sum(n for _, n in self.runs)

    def shape_key(self) -> tuple:
        return (self.length, self.offsets)

    def __repr__(self) -> str:
        return f"Prototile({self.color!r}, {render_broken_word(self)!r})"


def normalize(raw: Iterable[int], color: str) -> Prototile:
    """Translate a finite integer set so its minimum is 0."""
    values = sorted(set(raw))
    if not values:
        raise PrototileError("cannot normalize an empty set")
    lo = values[0]
    return Prototile.from_offsets(color, [v - lo for v in values])


def parse_broken_word(text: str, color: str) -> Prototile:
    """Parse broken-word notation such as ``"BB _ B"``.

    Whitespace is ignored; ``_`` is a blank cell and any alphanumeric
    character is a solid cell.

    >>> parse_broken_word("BB _ B", "B").offsets
    (0, 1, 3)
    """
    cells = []
    for pos, ch in enumerate(text, 1):
        if ch.isspace():
            continue
        if ch == BLANK:
            cells.append(False)
        elif ch.isalnum():
            cells.append(True)
        else:
            raise PrototileError(f"unknown character {ch!r} at column {pos} in broken word {text!r}")
    if not cells:
        raise PrototileError("empty broken word")
    if not cells[0] or not cells[-1]:
        raise PrototileError(f"broken word {text!r} must start and end with a solid cell")
    return Prototile.from_offsets(color, [i for i, solid in enumerate(cells) if solid])


def render_broken_word(p: Prototile, marker: str | None = None) -> str:
    if marker is None:
        marker = p.color if len(p.color) == 1 and p.color.isalnum() else "a"
    cells = [BLANK] * p.length
    for x in p.offsets:
        cells[x] = marker
    return " ".join(cells)


class PrototileSet:
    """An ordered, immutable collection of prototiles with distinct colors.

    Tiles are kept in canonical order (length, offsets, color), so tile
    indices are independent of input order.  Equal shapes under distinct
    colors are allowed.
    """

    __slots__ = ("tiles", "_by_color")

    def __init__(self, tiles: Iterable[Prototile]):
        tiles = sorted(tiles, key=lambda t: (t.length, t.offsets, t.color))
        if not tiles:
            raise PrototileError("a prototile set needs at least one tile")
        by_color = {}
        for i, t in enumerate(tiles):
            if t.color in by_color:
                raise PrototileError(f"duplicate color {t.color!r}")
            by_color[t.color] = i
        self.tiles: tuple[Prototile, ...] = tuple(tiles)
        self._by_color = by_color

    def __len__(self):
        return len(self.tiles)

    def __iter__(self):
        return iter(self.tiles)

    def __getitem__(self, i: int) -> Prototile:
        return self.tiles[i]

    def __eq__(self, other):
        return isinstance(other, PrototileSet) and self.tiles == other.tiles

    def __hash__(self):
        return hash(self.tiles)

    def __repr__(self):
        inner = ", ".join(f"{t.color}={render_broken_word(t)!r}" for t in self.tiles)
        return f"PrototileSet({inner})"

    @property
    def colors(self) -> tuple[str, ...]:
        return tuple(t.color for t in self.tiles)

    def index(self, color: str) -> int:
        try:
            return self._by_color[color]
        except KeyError:
            raise PrototileError(f"unknown color {color!r}") from None

    @property
    def longest_length(self) -> int:
        return max(t.length for t in self.tiles)

    @property
    def alphabet_size(self) -> int:
        """Number of subscripted symbols ``(k, l)``."""
        return sum(t.size for t in self.tiles)

    @classmethod
    def from_shapes(cls, shapes: Iterable[Iterable[int]], colors: Sequence[str] | None = None):
        """Build a set from raw integer sets; default colors are ``a, b, c, ...``."""
        shapes = list(shapes)
        if colors is None:
            colors = [chr(ord("a") + i) for i in range(len(shapes))]
        return cls(normalize(s, c) for s, c in zip(shapes, colors, strict=True))

    @classmethod
    def from_broken_words(cls, words: dict[str, str] | Iterable[str]):
        """``{"R": "R", "B": "B _ B"}`` or ``["R", "B _ B"]`` (color = first solid char)."""
        if isinstance(words, dict):
            return cls(parse_broken_word(w, c) for c, w in words.items())
        tiles = []
        for w in words:
            solid = [ch for ch in w if ch.isalnum()]
            if not solid:
                raise PrototileError(f"broken word {w!r} has no solid marker")
            tiles.append(parse_broken_word(w, solid[0]))
        return cls(tiles)


def longest_length(ps: PrototileSet) -> int:
    return ps.longest_length


@dataclass(frozen=True)
class Tiling:
    """A tiling restricted to a window or given by one period.

    ``placements`` is a sorted tuple of ``(position, tile_index)``.  With
    ``period`` set, the placements describe one period and repeat; with
    ``window = (lo, hi)`` they cover exactly the cells ``lo..hi`` (tiles
    may protrude past the window).
    """

    placements: tuple[tuple[int, int], ...]
    window: tuple[int, int] | None = None
    period: int | None = None

    def cells(self, ps: PrototileSet) -> dict[int, tuple[int, int]]:
        """Cell -> (tile index, 1-based subscript) for every covered cell."""
        out = {}
        for pos, k in self.placements:
            for ell, p in enumerate(ps[k].offsets, 1):
                out[pos + p] = (k, ell)
        return out

    def colors_in_window(self, ps: PrototileSet) -> tuple[str, ...]:
        if self.window is None:
            raise ValueError("tiling has no window")
        cells = self.cells(ps)
        lo, hi = self.window
        return tuple(ps[cells[i][0]].color for i in range(lo, hi + 1))

    def is_exact_cover(self, ps: PrototileSet) -> bool:
        seen: set[int] = set()
        for pos, k in self.placements:
            for p in ps[k].offsets:
                c = pos + p
                if self.period is not None:
                    c %= self.period
                if c in seen:
                    return False
                seen.add(c)
        if self.period is not None:
            return len(seen) == self.period
        if self.window is not None:
            lo, hi = self.window
            return all(c in seen for c in range(lo, hi + 1))
        return True


# -- file format ---------------------------------------------------------

def _tile_from_record(rec: dict, where: str) -> Prototile:
    if not isinstance(rec, dict) or "name" not in rec:
        raise PrototileError(f"{where}: each tile needs a 'name'")
    name = rec["name"]
    keys = [k for k in ("offsets", "runs", "broken_word") if k in rec]
    if len(keys) != 1:
        raise PrototileError(f"{where}: give exactly one of offsets, runs or broken_word")
    key = keys[0]
    try:
        if key == "broken_word":
            return parse_broken_word(rec["broken_word"], name)
        value = rec[key]
        if not isinstance(value, list) or not value:
            raise PrototileError(f"{where}: {key} must be a nonempty list")
        if key == "runs" or isinstance(value[0], list):
            if not all(isinstance(r, list) and len(r) == 2 for r in value):
                raise PrototileError(f"{where}: runs must be [start, length] pairs")
            raw = runs_to_offsets(value)
        else:
            raw = value
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in raw):
            raise PrototileError(f"{where}: offsets must be integers")
        if sorted(set(raw)) != list(raw):
            raise PrototileError(f"{where}: offsets must be strictly increasing")
        return normalize(raw, name)
    except PrototileError as exc:
        if str(exc).startswith(where):
            raise
        raise PrototileError(f"{where}: {exc}") from None


def tile_record(t: Prototile) -> dict:
    # explicit list unless the run form is shorter
    if 2 * len(t.runs) < t.size:
        return {"name": t.color, "offsets": [list(r) for r in t.runs]}
    return {"name": t.color, "offsets": list(t.offsets)}


def prototiles_from_dict(doc) -> PrototileSet:
    if isinstance(doc, list):
        tiles = doc
    elif isinstance(doc, dict):
        fmt = doc.get("format", FORMAT_NAME)
        if fmt != FORMAT_NAME:
            raise PrototileError(f"unexpected format {fmt!r}")
        if doc.get("version", FORMAT_VERSION) != FORMAT_VERSION:
            raise PrototileError(f"unsupported version {doc.get('version')!r}")
        if "tiles" not in doc:
            raise PrototileError("missing 'tiles'")
        tiles = doc["tiles"]
    else:
        raise PrototileError("prototile document must be a list or an object")
    if not isinstance(tiles, list):
        raise PrototileError("'tiles' must be a list")
    return PrototileSet(_tile_from_record(rec, f"tiles[{i}]") for i, rec in enumerate(tiles))


def prototiles_to_dict(ps: PrototileSet) -> dict:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "tiles": [tile_record(t) for t in ps],
    }


def loads(text: str) -> PrototileSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PrototileError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return prototiles_from_dict(doc)


def dumps(ps: PrototileSet) -> str:
    return json.dumps(prototiles_to_dict(ps), indent=2) + "\n"


def load(path) -> PrototileSet:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dump(ps: PrototileSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(ps))
