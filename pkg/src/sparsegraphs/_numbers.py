from __future__ import annotations

from fractions import Fraction
from numbers import Number
from typing import Iterable, Union

Num = Union[Fraction, float]

DEFAULT_TOL = 1e-9


def parse_number(x) -> Num:
    """Coerce ``x`` to an exact :class:`Fraction` where possible, else to float.

    Strings of the form ``"p/q"`` or integer strings are read exactly; strings that
    only parse as floats (``"0.25"``) become floats.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        s = x.strip()
        try:
            return Fraction(s) if ("." not in s and "e" not in s.lower()) else float(s)
        except ValueError:
            return float(s)
    if isinstance(x, Number):
        return float(x)
    raise TypeError(f"cannot interpret {x!r} as a number")


def all_exact(values: Iterable) -> bool:
    return all(isinstance(v, Fraction) for v in values)


def unify(values: list) -> list:
    """Keep Fractions if every entry is a Fraction, otherwise convert everything to float."""
    if all_exact(values):
        return list(values)
    return [float(v) for v in values]


def close(a, b, tol: float = DEFAULT_TOL) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(float(a) - float(b)) <= tol


def residual(a, b) -> Num:
    """|a - b|, exact when both sides are Fractions."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return abs(a - b)
    return abs(float(a) - float(b))


def format_number(x) -> str | float:
    """JSON-friendly encoding: Fractions as ``"p/q"`` strings (integers as ``"p"``)."""
    if isinstance(x, Fraction):
        return str(x)
    return float(x)
