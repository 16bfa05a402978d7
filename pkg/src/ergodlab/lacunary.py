"""Lacunary trigonometric cocycles over a fast-approximable rotation.

The frequency tower is v_1 = 1, v_{k+1} = 2**v_k + v_k + 1 with n_k = 2**v_k,
and the base rotation number is the truncated sum alpha = sum 1/n_k.  The
tower grows so fast that n_4 = 2**2097174 has no place in any fixed-width
representation, so truncation depth is capped at K = 3; alpha is then a
dyadic rational and sits exactly on the 128-bit grid.

The cocycle data is the symmetric trigonometric pair

    H(x) = sum_{k != 0} c_k e(n_k x),
    h(x) = sum_{k != 0} c_k (e(n_k alpha) - 1) e(n_k x),    e(t) = exp(2 pi i t),

with c_{-k} = c_k, n_{-k} = -n_k, so that h(x) = H(x + alpha) - H(x) holds
term by term at any truncation depth.  Frequency arguments n_k * x are always
reduced exactly on the grid before any trig call.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .torus import (
    Frac,
    TorusPoint,
    add,
    frac_from_float,
    frac_from_json,
    frac_from_rational,
    frac_to_json,
    int_mul,
    to_real,
)

MAX_LEVELS = 3
_TWO_PI = 2.0 * math.pi


class Weights(enum.Enum):
    """Coefficient families for the symmetric sums (index k >= 1)."""

    UNIT = "unit"            # c_k = 1
    ONE_PLUS_INV = "one_plus_inv"  # c_k = 1 + 1/k
    INV = "inv"              # c_k = 1/k

    def coefficient(self, k: int) -> float:
        if k < 1:
            raise ValueError(f"weight index must be >= 1, got {k}")
        if self is Weights.UNIT:
            return 1.0
        if self is Weights.ONE_PLUS_INV:
            return 1.0 + 1.0 / k
        return 1.0 / k


@dataclass(frozen=True)
class LacunarySeq:
    """The truncated frequency tower and its exact rotation number."""

    K: int
    v: tuple[int, ...]
    n: tuple[int, ...]
    alpha_exact: Fraction
    alpha: Frac


def furstenberg_sequence(K: int) -> LacunarySeq:
    """Build the tower to depth K (1 <= K <= 3).

    Depth 4 would need n_4 = 2**2097174, far beyond 64-bit frequencies and
    the 128-bit grid, so larger K is an error rather than an approximation.
    """
    if not isinstance(K, int) or K < 1:
        raise ValueError(f"depth K must be a positive integer, got {K!r}")
    if K > MAX_LEVELS:
        raise ValueError(
            f"depth K={K} not representable: n_4 = 2**2097174 overflows "
            f"every fixed-width type (max supported K is {MAX_LEVELS})"
        )
    v = [1]
    for _ in range(K - 1):
        v.append(2 ** v[-1] + v[-1] + 1)
    n = [2**vk for vk in v]
    alpha_exact = sum((Fraction(1, nk) for nk in n), Fraction(0))
    alpha = frac_from_rational(alpha_exact.numerator, alpha_exact.denominator)
    return LacunarySeq(K=K, v=tuple(v), n=tuple(n), alpha_exact=alpha_exact, alpha=alpha)


def small_divisor_gap(seq: LacunarySeq, k: int) -> Fraction:
    """Exact fractional part of n_k * alpha, for 1 <= k < seq.K.

    The tail sum it equals is what makes alpha fast approximable: the gap
    is below 2**-n_k.  At k = seq.K the tail is empty, hence the precondition.
    """
    if not 1 <= k < seq.K:
        raise ValueError(
            f"gap index k={k} needs 1 <= k < K={seq.K} (the truncated tail is empty at k = K)"
        )
    return (seq.alpha_exact * seq.n[k - 1]) % 1


@dataclass(frozen=True)
class LacunaryParams:
    """Cocycle parameters: tower, coefficient family, scale t, offset beta."""

    seq: LacunarySeq
    weights: Weights = Weights.INV
    t: float = 1.0
    beta: Frac = field(default_factory=lambda: Frac(0))


def _phases(x: Frac, params: LacunaryParams):
    """Exactly reduced phases (n_k x mod 1, n_k alpha mod 1) for k = 1..K."""
    seq = params.seq
    out = []
    for k in range(1, seq.K + 1):
        nk = seq.n[k - 1]
        c = params.weights.coefficient(k)
        rx = to_real(int_mul(x, nk))
        ra = to_real(int_mul(seq.alpha, nk))
        out.append((c, rx, ra))
    return out


def H_eval(x: Frac, params: LacunaryParams) -> float:
    """The symmetric sum H(x); real by the c_{-k} = c_k pairing.

    Conjugate frequency pairs are folded analytically (2 c_k cos), so the
    value is real by construction; the summation itself is exactly rounded
    (math.fsum).
    """
    terms = []
    for c, rx, _ in _phases(x, params):
        terms.append(2.0 * c * math.cos(_TWO_PI * rx))
    return math.fsum(terms)


def h_eval_complex(x: Frac, params: LacunaryParams) -> complex:
    """The coboundary increment before projection to the reals.

    All 2K terms are evaluated as complex exponentials; the imaginary part
    must vanish up to roundoff and is exposed here so tests can watch it.
    """
    re_terms = []
    im_terms = []
    for c, rx, ra in _phases(x, params):
        for sign in (1, -1):
            ex = cmath.exp(complex(0.0, sign * _TWO_PI * rx))
            ea = cmath.exp(complex(0.0, sign * _TWO_PI * ra))
            term = c * (ea - 1.0) * ex
            re_terms.append(term.real)
            im_terms.append(term.imag)
    return complex(math.fsum(re_terms), math.fsum(im_terms))


def h_eval(x: Frac, params: LacunaryParams) -> float:
    """h(x) = H(x + alpha) - H(x), evaluated directly as the factored sum."""
    return h_eval_complex(x, params).real


def _mod1(v: float) -> float:
    r = v % 1.0
    # v slightly below zero can round to 1.0 under %; fold the endpoint back
    return 0.0 if r == 1.0 else r


def phi_eval(x: Frac, params: LacunaryParams) -> float:
    """Cocycle value phi(x) = t h(x) + beta, reduced mod 1 into [0, 1)."""
    return _mod1(params.t * h_eval(x, params) + to_real(params.beta))


def phi_as_frac(x: Frac, params: LacunaryParams) -> Frac:
    """phi(x) placed on the grid; the single rounding of a cocycle step.

    Both skew-product flows must share this exact rounding so their fiber
    coordinates stay bit-identical where they overlap.
    """
    return frac_from_float(phi_eval(x, params))


def j_map(p: TorusPoint, params: LacunaryParams) -> TorusPoint:
    """Fiber shear J(x, y) = (x, y + t H(x)), the conjugation of the skew
    product back to the product rotation. t H(x) is rounded to the grid once."""
    if len(p) != 2:
        raise ValueError(f"j_map acts on the 2-torus, got dimension {len(p)}")
    x, y = p
    shear = frac_from_float(_mod1(params.t * H_eval(x, params)))
    return TorusPoint((x, add(y, shear)))


def lacunary_params_to_json(params: LacunaryParams) -> dict:
    return {
        "K": params.seq.K,
        "weights": params.weights.value,
        "t": repr(params.t),
        "beta": frac_to_json(params.beta),
    }


def lacunary_params_from_json(obj: dict) -> LacunaryParams:
    if not isinstance(obj, dict):
        raise ValueError(f"cocycle parameters must be an object, got {obj!r}")
    extra = set(obj) - {"K", "weights", "t", "beta"}
    if extra:
        raise ValueError(f"unexpected cocycle fields: {sorted(extra)}")
    if "K" not in obj:
        raise ValueError("cocycle parameters need a depth field K")
    seq = furstenberg_sequence(obj["K"])
    try:
        weights = Weights(obj.get("weights", "inv"))
    except ValueError:
        raise ValueError(f"unknown weight family: {obj.get('weights')!r}") from None
    t_raw = obj.get("t", "1.0")
    if isinstance(t_raw, float):
        raise ValueError("scale t must be given as a decimal string, not a float")
    try:
        t = float(t_raw)
    except (TypeError, ValueError):
        raise ValueError(f"bad scale t: {t_raw!r}") from None
    beta = frac_from_json(obj["beta"]) if "beta" in obj else Frac(0)
    return LacunaryParams(seq=seq, weights=weights, t=t, beta=beta)
