"""Compile a nonnegative integer matrix into barbell and rack prototiles.

Given a ``V x V`` matrix ``A`` and ``n > V``, set ``m = 13n`` and expand
every entry of ``A^m`` in the factorial number system with ``n`` digits.
The prototiles are

* barbells ``aa`` + ``2r+1`` blanks + ``aa`` for ``0 <= r <= 2n-2``;
* one rack per ``(I, J, k, i)`` with ``c_k(I, J) > 0`` and
  ``0 <= i < c_k(I, J)``, made of a head ``(a _)^I a^(2n-2I)``, a center
  ``a^(3n+i) _^(2k) a _^(2k) a^(8n-4k-1-i)`` and a tail ``(_ a)^J``.

Rack lists can be quadratic in ``n``, so racks are produced lazily and
only materialized on request.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from tilesys.factorial import FactorialDigits, FactorialOverflow, encode, factorial_table
from tilesys.prototiles import Prototile, PrototileSet, tile_record

COMPILED_FORMAT = "tilesys.compiled"
COMPILED_VERSION = 1
MATRIX_FORMAT = "tilesys.matrix"

STRICT = "strict"
RELAXED = "relaxed"
MODES = (STRICT, RELAXED)

# beyond this the factorials and matrix powers stop being practical
EXACT_N_LIMIT = 200_000
INLINE_RACK_LIMIT = 10_000


class CompilerError(ValueError):
    """Invalid matrix, parameters or compiled document."""


Matrix = tuple[tuple[int, ...], ...]


def as_matrix(rows) -> Matrix:
    """Validate a square matrix of nonnegative integers (ints or decimal strings)."""
    try:
        rows = [list(r) for r in rows]
    except TypeError:
        raise CompilerError("matrix must be a list of rows") from None
    V = len(rows)
    if V == 0:
        raise CompilerError("matrix must be nonempty")
    out = []
    for i, row in enumerate(rows):
        if len(row) != V:
            raise CompilerError(f"row {i} has {len(row)} entries, expected {V}")
        vals = []
        for j, x in enumerate(row):
            if isinstance(x, bool):
                raise CompilerError(f"entry ({i},{j}) is not an integer")
            if isinstance(x, str):
                if not x.strip().isdigit():
                    raise CompilerError(f"entry ({i},{j}) = {x!r} is not a nonnegative decimal integer")
                x = int(x)
            if not isinstance(x, int):
                raise CompilerError(f"entry ({i},{j}) is not an integer")
            if x < 0:
                raise CompilerError(f"entry ({i},{j}) is negative")
            vals.append(x)
        out.append(tuple(vals))
    return tuple(out)


def mat_mul(X: Matrix, Y: Matrix) -> Matrix:
    n = len(X)
    cols = list(zip(*Y))
    return tuple(tuple(sum(a * b for a, b in zip(X[i], cols[j])) for j in range(n)) for i in range(n))


def mat_pow(A: Matrix, e: int) -> Matrix:
    """Exact ``A**e`` by repeated squaring."""
    n = len(A)
    result = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    base = A
    while e:
        if e & 1:
            result = mat_mul(result, base)
        e >>= 1
        if e:
            base = mat_mul(base, base)
    return result


def trace(A: Matrix) -> int:
    return sum(A[i][i] for i in range(len(A)))


@dataclass(frozen=True)
class CompilerParams:
    V: int
    n: int
    mode: str = STRICT

    def __post_init__(self):
        if self.mode not in MODES:
            raise CompilerError(f"unknown mode {self.mode!r}")
        if self.n <= self.V:
            raise CompilerError(f"need n > V, got n={self.n}, V={self.V}")

    @property
    def m(self) -> int:
        return 13 * self.n


def _first_true(lo: int, pred) -> int:
    """Smallest ``n >= lo`` with ``pred(n)``, for predicates that stay true once true."""
    if pred(lo):
        return lo
    hi = lo + 1
    while not pred(hi):
        lo, hi = hi, 2 * hi
        if hi > 10**30:
            raise CompilerError("parameter search diverged")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def choose_parameters(A, mode: str = STRICT) -> CompilerParams:
    """Smallest ``n > V`` meeting the mode's representability inequality.

    strict:  ``(V * max A_ij)^(13n) < (n+1)!``
    relaxed: every entry of ``A^(13n)`` is below ``(n+1)!``

    Both are decided with exact integers.  The strict left side is
    log-linear and ``log (n+1)!`` is convex, so the true set is a ray and a
    float estimate locates it before the exact check.
    """
    A = as_matrix(A)
    if mode not in MODES:
        raise CompilerError(f"unknown mode {mode!r}")
    V = len(A)
    base = V * max(max(r) for r in A)

    if mode == STRICT:
        if base <= 1:
            return CompilerParams(V, V + 1, mode)
        lb = math.log(base)
        guess = _first_true(V + 1, lambda n: math.lgamma(n + 2) - 13 * n * lb > 0)
        if guess > EXACT_N_LIMIT:
            raise CompilerError(
                f"strict mode needs n around {guess}, beyond exact reach; use relaxed mode"
            )

        def exact(n):
            return base ** (13 * n) < math.factorial(n + 1)

        n = guess
        while n - 1 > V and exact(n - 1):
            n -= 1
        while not exact(n):
            n += 1
        return CompilerParams(V, n, mode)

    rho = _rough_radius(A)
    if rho > 1:
        lr = math.log(rho)
        guess = _first_true(V + 1, lambda n: math.lgamma(n + 2) - 13 * n * lr > 0)
        if guess > EXACT_N_LIMIT:
            raise CompilerError(f"relaxed mode needs n around {guess}, beyond exact reach")
    step = mat_pow(A, 13)
    n = V + 1
    power = mat_pow(A, 13 * n)
    fact = math.factorial(n + 1)
    while max(max(r) for r in power) >= fact:
        n += 1
        if n > EXACT_N_LIMIT:
            raise CompilerError("relaxed parameter search exceeded the exact-arithmetic limit")
        power = mat_mul(power, step)
        fact *= n + 1
    return CompilerParams(V, n, mode)


def _rough_radius(A: Matrix) -> float:
    from tilesys.sofic import spectral_radius

    return spectral_radius([[float(x) for x in row] for row in A])


# -- prototile shapes --------------------------------------------------------

@dataclass(frozen=True)
class BarbellSpec:
    r: int

    @property
    def color(self) -> str:
        return f"barbell:{self.r}"

    @property
    def runs(self) -> tuple[tuple[int, int], ...]:
        return ((0, 2), (2 * self.r + 3, 2))

    def prototile(self) -> Prototile:
        return Prototile(self.color, self.runs)


def head_runs(n: int, I: int) -> list[tuple[int, int]]:
    """``(a _)^I a^(2n-2I)``: cells ``0 .. 2n-1``."""
    runs = [(2 * t, 1) for t in range(I)]
    if 2 * n - 2 * I > 0:
        runs.append((2 * I, 2 * n - 2 * I))
    return runs


def center_runs(n: int, k: int, i: int, start: int) -> list[tuple[int, int]]:
    """``a^(3n+i) _^(2k) a _^(2k) a^(8n-4k-1-i)``: ``11n`` cells from ``start``."""
    first = 3 * n + i
    mid = start + first + 2 * k
    last = 8 * n - 4 * k - 1 - i
    return [(start, first), (mid, 1), (mid + 1 + 2 * k, last)]


def tail_runs(J: int, start: int) -> list[tuple[int, int]]:
    """``(_ a)^J``: ``2J`` cells from ``start``."""
    return [(start + 2 * t + 1, 1) for t in range(J)]


@dataclass(frozen=True)
class RackSpec:
    I: int
    J: int
    k: int
    i: int
    n: int

    @property
    def color(self) -> str:
        return f"rack:{self.I}.{self.J}.{self.k}.{self.i}"

    @property
    def length(self) -> int:
        return 13 * self.n + 2 * self.J

    @property
    def runs(self) -> list[tuple[int, int]]:
        n = self.n
        return head_runs(n, self.I) + center_runs(n, self.k, self.i, 2 * n) + tail_runs(self.J, 13 * n)

    def prototile(self) -> Prototile:
        return Prototile(self.color, tuple(self.runs))


def _parse_rack_color(color: str) -> tuple[int, int, int, int]:
    if not color.startswith("rack:"):
        raise CompilerError(f"not a rack color: {color!r}")
    try:
        I, J, k, i = (int(x) for x in color[5:].split("."))
    except ValueError:
        raise CompilerError(f"malformed rack color {color!r}") from None
    return I, J, k, i


# -- compiler output ---------------------------------------------------------

@dataclass
class CompilerOutput:
    """Everything the construction produces for one matrix.

    ``racks`` is ``None`` for counts-only outputs; :meth:`iter_racks` then
    regenerates the deterministic stream from ``digits``.
    """

    params: CompilerParams
    A: Matrix
    Am: Matrix
    digits: dict[tuple[int, int], FactorialDigits]
    barbells: list[BarbellSpec]
    racks: list[RackSpec] | None = None
    rack_shapes: dict[str, tuple] | None = None

    def iter_racks(self) -> Iterator[RackSpec]:
        if self.racks is not None:
            yield from self.racks
            return
        yield from _rack_stream(self.params, self.digits)

    def rack_counts(self) -> dict[tuple[int, int, int], int]:
        """``(I, J, k) -> number of racks``, from the rack stream."""
        counts: dict[tuple[int, int, int], int] = {}
        if self.racks is None:
            for (I, J), d in self.digits.items():
                for k, c in d.nonzero():
                    counts[(I, J, k)] = c
            return counts
        for r in self.racks:
            key = (r.I, r.J, r.k)
            counts[key] = counts.get(key, 0) + 1
        return counts

    def total_racks(self) -> int:
        return sum(self.rack_counts().values())

    def rack_at(self, index: int) -> RackSpec:
        """The ``index``-th rack of the stream, found without walking it."""
        if self.racks is not None:
            return self.racks[index]
        if index < 0:
            raise IndexError(index)
        for (I, J) in sorted(self.digits):
            for k, c in self.digits[(I, J)].nonzero():
                if index < c:
                    return RackSpec(I, J, k, index, self.params.n)
                index -= c
        raise IndexError("rack index out of range")

    def materialize(self) -> "CompilerOutput":
        if self.racks is not None:
            return self
        return CompilerOutput(self.params, self.A, self.Am, self.digits, self.barbells, list(self.iter_racks()))

    def rack_prototile(self, rack: RackSpec) -> Prototile:
        if self.rack_shapes is not None and rack.color in self.rack_shapes:
            return Prototile(rack.color, self.rack_shapes[rack.color])
        return rack.prototile()

    def prototile_set(self) -> PrototileSet:
        tiles = [b.prototile() for b in self.barbells]
        tiles.extend(self.rack_prototile(r) for r in self.iter_racks())
        return PrototileSet(tiles)

    # -- serialization

    def to_dict(self, include_racks: bool | None = None) -> dict:
        p = self.params
        if include_racks is None:
            include_racks = self.racks is not None or self.total_racks() <= INLINE_RACK_LIMIT
        doc = {
            "format": COMPILED_FORMAT,
            "version": COMPILED_VERSION,
            "params": {"V": p.V, "n": p.n, "m": p.m, "mode": p.mode},
            "A": [[str(x) for x in row] for row in self.A],
            "A_m": [[str(x) for x in row] for row in self.Am],
            "digits": [
                {"I": I, "J": J, "c": list(d.digits)} for (I, J), d in sorted(self.digits.items())
            ],
            "barbells": [{"r": b.r, **tile_record(b.prototile())} for b in self.barbells],
            "rack_summary": [
                {"I": I, "J": J, "k": k, "count": c} for (I, J, k), c in sorted(self.rack_counts().items())
            ],
        }
        if include_racks:
            doc["racks"] = [
                {"I": r.I, "J": r.J, "k": r.k, "i": r.i, **tile_record(self.rack_prototile(r))}
                for r in self.iter_racks()
            ]
        else:
            doc["racks"] = None
        return doc

    def to_json(self, include_racks: bool | None = None) -> str:
        return json.dumps(self.to_dict(include_racks), separators=(",", ":")) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "CompilerOutput":
        if not isinstance(doc, dict) or doc.get("format") != COMPILED_FORMAT:
            raise CompilerError("not a compiled tiling document")
        if doc.get("version") != COMPILED_VERSION:
            raise CompilerError(f"unsupported version {doc.get('version')!r}")
        try:
            pd = doc["params"]
            params = CompilerParams(int(pd["V"]), int(pd["n"]), pd["mode"])
            if int(pd["m"]) != params.m:
                raise CompilerError("params.m must equal 13 n")
            A = as_matrix(doc["A"])
            Am = as_matrix(doc["A_m"])
            digits = {(int(e["I"]), int(e["J"])): FactorialDigits(tuple(e["c"])) for e in doc["digits"]}
            barbells = []
            for b in doc["barbells"]:
                spec = BarbellSpec(int(b["r"]))
                shape = _record_runs(b)
                if shape != spec.runs:
                    raise CompilerError(f"barbell r={spec.r} has shape {shape}, expected {spec.runs}")
                barbells.append(spec)
            racks = None
            shapes = None
            if doc.get("racks") is not None:
                racks, shapes = [], {}
                for r in doc["racks"]:
                    spec = RackSpec(int(r["I"]), int(r["J"]), int(r["k"]), int(r["i"]), params.n)
                    if r.get("name", spec.color) != spec.color:
                        raise CompilerError(f"rack name {r['name']!r} does not match its parameters")
                    racks.append(spec)
                    shapes[spec.color] = _record_runs(r)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, CompilerError):
                raise
            raise CompilerError(f"malformed compiled document: {exc}") from None
        return cls(params, A, Am, digits, barbells, racks, shapes)

    @classmethod
    def from_json(cls, text: str) -> "CompilerOutput":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CompilerError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(doc)


def _record_runs(rec: dict) -> tuple:
    from tilesys.prototiles import _tile_from_record

    return _tile_from_record({"name": rec.get("name", "x"), "offsets": rec["offsets"]}, "record").runs


def _rack_stream(params: CompilerParams, digits) -> Iterator[RackSpec]:
    for (I, J) in sorted(digits):
        for k, c in digits[(I, J)].nonzero():
            for i in range(c):
                yield RackSpec(I, J, k, i, params.n)


def compile_matrix(A, params: CompilerParams | None = None, mode: str = STRICT,
                   materialize: bool | None = None) -> CompilerOutput:
    """Run the construction.

    Parameters
    ----------
    A : square matrix of nonnegative integers
    params : CompilerParams, optional
        Chosen with :func:`choose_parameters` when omitted.
    materialize : bool, optional
        Keep an explicit rack list.  By default racks are listed only when
        there are at most ``INLINE_RACK_LIMIT`` of them.

    Raises
    ------
    CompilerError
        If an entry of ``A^m`` does not fit in ``n`` factorial digits.
    """
    A = as_matrix(A)
    if params is None:
        params = choose_parameters(A, mode)
    if params.V != len(A):
        raise CompilerError("params.V does not match the matrix")
    n, m = params.n, params.m
    Am = mat_pow(A, m)
    table = factorial_table(n + 1)
    digits = {}
    for I, J in itertools.product(range(1, params.V + 1), repeat=2):
        value = Am[I - 1][J - 1]
        if value == 0:
            continue
        try:
            digits[(I, J)] = encode(value, n, table)
        except FactorialOverflow:
            raise CompilerError(
                f"(A^{m})[{I},{J}] does not fit in {n} factorial digits; parameters are invalid"
            ) from None
    barbells = [BarbellSpec(r) for r in range(2 * n - 1)]
    out = CompilerOutput(params, A, Am, digits, barbells)
    if materialize is None:
        materialize = out.total_racks() <= INLINE_RACK_LIMIT
    return out.materialize() if materialize else out


def load_matrix(text: str) -> Matrix:
    """Matrix JSON: a bare 2-D array or ``{"format": "tilesys.matrix", "matrix": [...]}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CompilerError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if isinstance(doc, dict):
        if doc.get("format", MATRIX_FORMAT) != MATRIX_FORMAT or "matrix" not in doc:
            raise CompilerError("matrix document needs a 'matrix' field")
        doc = doc["matrix"]
    if not isinstance(doc, list):
        raise CompilerError("matrix must be a JSON array of rows")
    return as_matrix(doc)


def dump_matrix(A: Sequence[Sequence[int]]) -> str:
    return json.dumps({"format": MATRIX_FORMAT, "version": 1, "matrix": [[str(x) for x in r] for r in A]}) + "\n"
