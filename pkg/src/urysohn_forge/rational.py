"""Parsing and formatting of exact rationals (``"p/q"`` strings)."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

RationalLike = Union[int, str, Fraction]


def to_rational(x: RationalLike) -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise TypeError(f"refusing inexact or boolean value {x!r}")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if "." in s or "e" in s.lower():
            raise ValueError(f"rationals must be written as p/q, got {x!r}")
        try:
            return Fraction(s)
        except ZeroDivisionError:
            raise ValueError(f"zero denominator in {x!r}") from None
    raise TypeError(f"cannot read {type(x).__name__} as a rational")


def fmt(x: Fraction | int) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_list(text: str) -> list[Fraction]:
    """Comma separated rationals, e.g. ``"3,5"`` or ``"1/2, 3/4"``."""
    text = text.strip()
    if not text:
        return []
    return [to_rational(part) for part in text.split(",")]


def fmt_list(values: Iterable[Fraction | int]) -> str:
    return ",".join(fmt(v) for v in values)


def is_integral(values: Iterable[Fraction | int]) -> bool:
    return all(Fraction(v).denominator == 1 for v in values)
