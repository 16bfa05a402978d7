"""Exact circle arithmetic on a 128-bit dyadic grid.

A point of the circle is stored as an integer ``bits`` with value
``bits / 2**128`` in [0, 1).  Addition wraps modulo 2**128, which is exact
addition mod 1; integer multiples wrap the same way.  The only rounding in
the whole representation happens once, at ingestion, when a decimal string,
a rational, or a binary double is converted to the grid (round to nearest,
ties to even).
"""

from __future__ import annotations

import math
import re

B = 128
ONE = 1 << B
MASK = ONE - 1

_DECIMAL_RE = re.compile(r"(?P<int>\d+)?(?:\.(?P<frac>\d*))?$")
MAX_DECIMAL_DIGITS = 50


def _round_div_nearest_even(num: int, den: int) -> int:
    """Round num/den (num >= 0, den > 0) to the nearest integer, ties to even."""
    q, r = divmod(num, den)
    r2 = 2 * r
    if r2 > den or (r2 == den and q & 1):
        q += 1
    return q


class Frac:
    """A circle point on the 2**-128 grid. Immutable; constructor wraps mod 1."""

    __slots__ = ("bits",)

    def __init__(self, bits: int) -> None:
        if not isinstance(bits, int):
            raise TypeError(f"Frac bits must be int, got {type(bits).__name__}")
        object.__setattr__(self, "bits", bits & MASK)

    def __setattr__(self, name, value):
        raise AttributeError("Frac is immutable")

    def __add__(self, other: "Frac") -> "Frac":
        return Frac(self.bits + other.bits)

    def __sub__(self, other: "Frac") -> "Frac":
        return Frac(self.bits - other.bits)

    def __neg__(self) -> "Frac":
        return Frac(-self.bits)

    def __eq__(self, other) -> bool:
        return isinstance(other, Frac) and self.bits == other.bits

    def __hash__(self) -> int:
        return hash(("Frac", self.bits))

    def __repr__(self) -> str:
        return f"Frac(0x{self.bits:032x})"


FRAC_ZERO = Frac(0)


def frac_from_decimal(s: str) -> Frac:
    """Parse a decimal string in [0, 1) to the grid, ties to even.

    Accepts plain decimal notation ("0", "0.5", ".125") with at most 50
    fractional digits; no sign, no exponent.  Values within 2**-129 of 1
    round up and wrap to 0, which is the same point of the circle.
    """
    if not isinstance(s, str):
        raise TypeError("decimal input must be a string")
    m = _DECIMAL_RE.fullmatch(s.strip())
    if m is None:
        raise ValueError(f"malformed decimal string: {s!r}")
    int_part = m.group("int")
    frac_part = m.group("frac")
    if int_part is None and not frac_part:
        raise ValueError(f"malformed decimal string: {s!r}")
    if frac_part and len(frac_part) > MAX_DECIMAL_DIGITS:
        raise ValueError(
            f"more than {MAX_DECIMAL_DIGITS} fractional digits: {s!r}"
        )
    if int_part is not None and int(int_part) != 0:
        raise ValueError(f"decimal value must lie in [0, 1): {s!r}")
    digits = frac_part or "0"
    num = int(digits)
    den = 10 ** len(digits)
    return Frac(_round_div_nearest_even(num << B, den))


def frac_from_rational(p: int, q: int) -> Frac:
    """Round p/q with 0 <= p < q to the grid, ties to even.

    Exact whenever q divides 2**128, e.g. any q = 2**k with k <= 128.
    """
    if q <= 0:
        raise ValueError(f"denominator must be positive, got {q}")
    if not 0 <= p < q:
        raise ValueError(f"rational {p}/{q} outside [0, 1)")
    return Frac(_round_div_nearest_even(p << B, q))


def frac_from_float(x: float) -> Frac:
    """Place a double in [0, 1) on the grid.

    Exact for x >= 2**-75 (every such double is already a 128-bit dyadic);
    below that the round to nearest is still computed without intermediate
    error because scaling a double by 2**128 is exact.
    """
    if not (isinstance(x, float) and math.isfinite(x)):
        raise ValueError(f"expected a finite float, got {x!r}")
    if not 0.0 <= x < 1.0:
        raise ValueError(f"float value outside [0, 1): {x!r}")
    return Frac(round(x * 2.0**B))


def add(a: Frac, b: Frac) -> Frac:
    """Exact circle addition (wraparound of the bit patterns)."""
    return Frac(a.bits + b.bits)


def sub(a: Frac, b: Frac) -> Frac:
    """Exact circle subtraction."""
    return Frac(a.bits - b.bits)


def neg(a: Frac) -> Frac:
    """Exact additive inverse; neg(0) = 0."""
    return Frac(-a.bits)


def int_mul(a: Frac, n: int) -> Frac:
    """Exact n*a mod 1 for a signed integer n, |n| < 2**63."""
    if not isinstance(n, int):
        raise TypeError(f"multiplier must be int, got {type(n).__name__}")
    if not -(1 << 63) < n < (1 << 63):
        raise ValueError(f"multiplier {n} outside (-2**63, 2**63)")
    return Frac(a.bits * n)


def dist_bits(a: Frac, b: Frac) -> int:
    """Circle distance in grid units: min(d, 2**128 - d) for d = |a - b| mod 1."""
    d = (a.bits - b.bits) & MASK
    return min(d, ONE - d)


def dist(a: Frac, b: Frac) -> float:
    """Circle distance min(|a-b|, 1-|a-b|), one correctly rounded division."""
    return dist_bits(a, b) / ONE


def to_real(a: Frac) -> float:
    """Nearest double to bits/2**128 (single correctly rounded division)."""
    return a.bits / ONE


class TorusPoint:
    """A point of the d-torus: a fixed tuple of Frac coordinates."""

    __slots__ = ("coords",)

    def __init__(self, coords) -> None:
        coords = tuple(coords)
        for c in coords:
            if not isinstance(c, Frac):
                raise TypeError(f"coordinates must be Frac, got {type(c).__name__}")
        if not coords:
            raise ValueError("TorusPoint needs at least one coordinate")
        object.__setattr__(self, "coords", coords)

    def __setattr__(self, name, value):
        raise AttributeError("TorusPoint is immutable")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i) -> Frac:
        return self.coords[i]

    def __add__(self, other: "TorusPoint") -> "TorusPoint":
        if len(other) != len(self):
            raise ValueError("dimension mismatch in point addition")
        return TorusPoint(a + b for a, b in zip(self.coords, other.coords))

    def __eq__(self, other) -> bool:
        return isinstance(other, TorusPoint) and self.coords == other.coords

    def __hash__(self) -> int:
        return hash(self.coords)

    def __repr__(self) -> str:
        inner = ", ".join(f"{to_real(c):.6g}" for c in self.coords)
        return f"TorusPoint({inner})"

    def to_reals(self) -> tuple[float, ...]:
        return tuple(to_real(c) for c in self.coords)


def zero_point(dim: int) -> TorusPoint:
    """The origin of the d-torus."""
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    return TorusPoint(Frac(0) for _ in range(dim))


def frac_to_json(a: Frac):
    """Exact JSON form of a grid point: {"p": bits, "q": 2**128}."""
    return {"p": a.bits, "q": ONE}


def frac_from_json(obj) -> Frac:
    """Parse a config numeric: decimal string or {"p": int, "q": int}.

    Binary floats are rejected so that every ingested value rounds exactly
    once, on a documented path.
    """
    if isinstance(obj, str):
        return frac_from_decimal(obj)
    if isinstance(obj, dict):
        extra = set(obj) - {"p", "q"}
        if extra:
            raise ValueError(f"unexpected rational fields: {sorted(extra)}")
        try:
            p, q = obj["p"], obj["q"]
        except KeyError as e:
            raise ValueError(f"rational object missing field {e}") from None
        if not (isinstance(p, int) and isinstance(q, int)):
            raise ValueError("rational fields p, q must be integers")
        return frac_from_rational(p, q)
    raise ValueError(
        f"numeric must be a decimal string or {{'p':…,'q':…}}, got {obj!r}"
    )
