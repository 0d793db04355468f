"""Factorial number system for arbitrary-precision nonnegative integers.

Every ``0 <= v < (n+1)!`` has a unique expansion ``v = sum c_k * k!`` over
``k = 1..n`` with ``0 <= c_k <= k``.  Digits are stored least significant
first: ``digits[0]`` is ``c_1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial


class FactorialOverflow(ValueError):
    """Value too large for the requested number of digits."""


@dataclass(frozen=True)
class FactorialDigits:
    digits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(c) for c in self.digits))
        if not self.digits:
            raise ValueError("need at least one digit")
        for k, c in enumerate(self.digits, 1):
            if not 0 <= c <= k:
                raise ValueError(f"digit c_{k} = {c} outside [0, {k}]")

    @property
    def n(self) -> int:
        return len(self.digits)

    def __getitem__(self, k: int) -> int:
        """``c_k`` with the 1-based index used in the expansion."""
        if not 1 <= k <= self.n:
            raise IndexError(k)
        return self.digits[k - 1]

    def nonzero(self):
        """Yield ``(k, c_k)`` for every nonzero digit, ``k`` ascending."""
        for k, c in enumerate(self.digits, 1):
            if c:
                yield k, c


def factorial_table(n: int) -> list[int]:
    """``[0!, 1!, ..., n!]``."""
    out = [1]
    for k in range(1, n + 1):
        out.append(out[-1] * k)
    return out


def max_value(n: int) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    return factorial(n + 1) - 1


def encode(v: int, n: int, table: list[int] | None = None) -> FactorialDigits:
    """Digits of ``v`` with ``n`` places.

    Digits come out least significant first by dividing by ``2, 3, ...``,
    which costs one small-divisor division per digit; dividing by ``k!``
    from the top is quadratic in the size of ``v`` per digit.  ``table`` may
    pass a precomputed :func:`factorial_table` of length ``>= n+1``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if v < 0:
        raise ValueError("value must be nonnegative")
    if table is None:
        table = factorial_table(n + 1)
    if v >= table[n] * (n + 1):
        raise FactorialOverflow(f"value does not fit in {n} factorial digits")
    digits = []
    for k in range(1, n + 1):
        v, c = divmod(v, k + 1)
        digits.append(c)
    return FactorialDigits(tuple(digits))


def decode(d: FactorialDigits | list[int] | tuple[int, ...]) -> int:
    if not isinstance(d, FactorialDigits):
        d = FactorialDigits(tuple(d))
    total = 0
    fact = 1
    for k, c in enumerate(d.digits, 1):
        fact *= k
        total += c * fact
    return total
