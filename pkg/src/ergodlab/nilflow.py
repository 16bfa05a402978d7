"""Heisenberg nilmanifold translations and the theta observable.

Group elements are upper-triangular unipotent 3x3 matrices stored by their
three free entries (x, y, z); the integer lattice acts on the right and a
fundamental-domain representative keeps all three entries in [0, 1).
Group coordinates are plain doubles: orbit drift is bounded by one rounding
per step, and every tolerance downstream budgets for it.

The observable is the theta series

    F(x, y, z) = e(z) * sum_m e(m x) exp(-pi (m + y)**2),    e(t) = exp(2 pi i t),

which is invariant under the lattice action, so it is a genuine function on
the quotient.  The Gaussian factor makes truncation trivially controllable.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .torus import B, Frac, frac_from_json, frac_to_json, int_mul, to_real

_TWO_PI = 2.0 * math.pi
MAX_THETA_TOL = 1e-3
MAX_NIL_INDEX = 10**9


@dataclass(frozen=True)
class HeisPoint:
    """Free entries (x, y, z) of a unipotent upper-triangular matrix."""

    x: float
    y: float
    z: float


def heis_identity() -> HeisPoint:
    return HeisPoint(0.0, 0.0, 0.0)


def heis_mul(g: HeisPoint, h: HeisPoint) -> HeisPoint:
    """Matrix product; the corner picks up the cross term x_g * y_h."""
    return HeisPoint(g.x + h.x, g.y + h.y, g.z + h.z + g.x * h.y)


def heis_inv(g: HeisPoint) -> HeisPoint:
    """Group inverse: (-x, -y, xy - z)."""
    return HeisPoint(-g.x, -g.y, g.x * g.y - g.z)


def _fold_unit(v: float) -> float:
    """v - floor(v), folded so the float endpoint 1.0 never leaks out."""
    r = v - math.floor(v)
    return 0.0 if r >= 1.0 else r


def reduce_mod_lattice(g: HeisPoint) -> HeisPoint:
    """Right-multiply by an integer lattice element to land in [0, 1)**3.

    Order matters: the y shift is chosen first (it does not disturb z),
    then the x shift, then the corner correction r which absorbs the cross
    term x * q acquired from the y shift.
    """
    q = -math.floor(g.y)
    p = -math.floor(g.x)
    z_shifted = g.z + g.x * q
    return HeisPoint(
        _fold_unit(g.x + p),
        _fold_unit(g.y + q),
        _fold_unit(z_shifted),
    )


@dataclass(frozen=True)
class NilParams:
    """Translation data (alpha, beta, gamma) and the theta truncation tol."""

    alpha: Frac
    beta: Frac
    gamma: Frac
    theta_tol: float = 1e-12

    def __post_init__(self) -> None:
        if not 0.0 < self.theta_tol <= MAX_THETA_TOL:
            raise ValueError(
                f"theta_tol must lie in (0, {MAX_THETA_TOL}], got {self.theta_tol}"
            )


def translation_element(params: NilParams) -> HeisPoint:
    """The translating group element; its corner entry is gamma + alpha*beta/2."""
    a = to_real(params.alpha)
    b = to_real(params.beta)
    return HeisPoint(a, b, to_real(params.gamma) + 0.5 * a * b)


def nil_step(g: HeisPoint, params: NilParams) -> HeisPoint:
    """One translation step on the quotient: reduce(T * g). g must be reduced."""
    return reduce_mod_lattice(heis_mul(translation_element(params), g))


def _truncation_radius(tol: float) -> int:
    """Smallest window with Gaussian tail mass below tol (plus one for margin)."""
    return math.ceil(math.sqrt(math.log(2.0 / (tol * (1.0 - math.exp(-math.pi)))) / math.pi)) + 1


def theta_eval(g: HeisPoint, tol: float = 1e-12) -> complex:
    """The theta series at g, truncated to |m + y| <= M with tail < tol."""
    if not 0.0 < tol <= MAX_THETA_TOL:
        raise ValueError(f"tol must lie in (0, {MAX_THETA_TOL}], got {tol}")
    M = _truncation_radius(tol)
    m_lo = math.ceil(-g.y - M)
    m_hi = math.floor(-g.y + M)
    re_terms = []
    im_terms = []
    for m in range(m_lo, m_hi + 1):
        w = math.exp(-math.pi * (m + g.y) ** 2)
        ph = _TWO_PI * ((m * g.x) % 1.0)
        re_terms.append(w * math.cos(ph))
        im_terms.append(w * math.sin(ph))
    s = complex(math.fsum(re_terms), math.fsum(im_terms))
    return cmath.exp(complex(0.0, _TWO_PI * g.z)) * s


def nil_function(n: int, params: NilParams) -> complex:
    """F at the n-th translate of the identity, by closed form.

    The n-fold product of the translation element has entries
    (n alpha, n beta, n gamma + n**2 alpha beta / 2).  Reducing the middle
    entry mod 1 is a lattice action that shifts the corner by
    -n alpha * floor(n beta); with that correction every coordinate is
    reduced exactly in integer arithmetic (denominator 2**257) before the
    single conversion to double.
    """
    if not isinstance(n, int):
        raise TypeError(f"index must be int, got {type(n).__name__}")
    if abs(n) > MAX_NIL_INDEX:
        raise ValueError(f"index |n| <= {MAX_NIL_INDEX} required, got {n}")
    x = to_real(int_mul(params.alpha, n))
    y = to_real(int_mul(params.beta, n))
    a, b, c = params.alpha.bits, params.beta.bits, params.gamma.bits
    y_floor = (n * b) >> B
    z_num = (n * n * a * b + ((n * c - n * a * y_floor) << (B + 1))) % (1 << (2 * B + 1))
    z = z_num / (1 << (2 * B + 1))
    return theta_eval(HeisPoint(x, y, z), tol=params.theta_tol)


def nil_params_to_json(params: NilParams) -> dict:
    return {
        "alpha": frac_to_json(params.alpha),
        "beta": frac_to_json(params.beta),
        "gamma": frac_to_json(params.gamma),
        "theta_tol": repr(params.theta_tol),
    }


def nil_params_from_json(obj: dict) -> NilParams:
    if not isinstance(obj, dict):
        raise ValueError(f"nil parameters must be an object, got {obj!r}")
    extra = set(obj) - {"alpha", "beta", "gamma", "theta_tol"}
    if extra:
        raise ValueError(f"unexpected nil fields: {sorted(extra)}")
    missing = {"alpha", "beta", "gamma"} - set(obj)
    if missing:
        raise ValueError(f"nil parameters missing fields: {sorted(missing)}")
    tol_raw = obj.get("theta_tol", "1e-12")
    if isinstance(tol_raw, float):
        raise ValueError("theta_tol must be given as a decimal string, not a float")
    try:
        tol = float(tol_raw)
    except (TypeError, ValueError):
        raise ValueError(f"bad theta_tol: {tol_raw!r}") from None
    return NilParams(
        alpha=frac_from_json(obj["alpha"]),
        beta=frac_from_json(obj["beta"]),
        gamma=frac_from_json(obj["gamma"]),
        theta_tol=tol,
    )
