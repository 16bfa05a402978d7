"""Vectorized 128-bit arithmetic on pairs of uint64 numpy arrays.

Bulk orbit statistics move 128-bit circle points around as (lo, hi) limb
pairs.  Everything here is exact mod 2**128; the only lossy function is
`to_float01`, which collapses a limb pair to a double and is allowed one
ulp of double rounding (documented at the call sites that care).

numpy uint64 arithmetic wraps silently, which is exactly the mod-2**64
behaviour the carry propagation below relies on.
"""

from __future__ import annotations

import functools

import numpy as np

_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_U1 = np.uint64(1)

TWO64 = float(2.0**64)
INV64 = float(2.0**-64)
INV128 = float(2.0**-128)


def split_bits(bits: int) -> tuple[np.uint64, np.uint64]:
    """128-bit int -> (lo, hi) scalar limbs."""
    return np.uint64(bits & 0xFFFFFFFFFFFFFFFF), np.uint64(bits >> 64)


def join_bits(lo, hi) -> int:
    """(lo, hi) scalar limbs -> 128-bit int."""
    return int(lo) | (int(hi) << 64)


def join_array(lo: np.ndarray, hi: np.ndarray) -> list[int]:
    """Limb arrays -> list of 128-bit ints (test/diagnostic use, not hot)."""
    lo_l = lo.tolist()
    hi_l = hi.tolist()
    return [l | (h << 64) for l, h in zip(lo_l, hi_l)]


def split_array(bits_list) -> tuple[np.ndarray, np.ndarray]:
    """Iterable of 128-bit ints -> (lo, hi) uint64 arrays."""
    m = 0xFFFFFFFFFFFFFFFF
    lo = np.fromiter((b & m for b in bits_list), dtype=np.uint64)
    hi = np.fromiter((b >> 64 for b in bits_list), dtype=np.uint64)
    return lo, hi


def _wrapping(fn):
    # numpy warns on *scalar* uint64 overflow; the wrap is the point here
    @functools.wraps(fn)
    def inner(*args, **kwargs):
        with np.errstate(over="ignore"):
            return fn(*args, **kwargs)

    return inner


@_wrapping
def add128(alo, ahi, blo, bhi):
    """(a + b) mod 2**128, elementwise."""
    lo = alo + blo
    carry = (lo < alo).astype(np.uint64)
    return lo, ahi + bhi + carry


@_wrapping
def neg128(lo, hi):
    """(-a) mod 2**128, elementwise."""
    zero = np.uint64(0)
    borrow = np.not_equal(lo, zero).astype(np.uint64)
    return zero - lo, zero - hi - borrow


@_wrapping
def sub128(alo, ahi, blo, bhi):
    """(a - b) mod 2**128, elementwise."""
    lo = alo - blo
    borrow = (alo < blo).astype(np.uint64)
    return lo, ahi - bhi - borrow


@_wrapping
def mul_u64_full(a, b):
    """Full 64x64 -> 128 product via 32-bit half-limbs. Returns (lo, hi)."""
    a0 = a & _M32
    a1 = a >> _S32
    b0 = b & _M32
    b1 = b >> _S32
    p00 = a0 * b0
    p01 = a0 * b1
    p10 = a1 * b0
    # column sum below stays under 2**64: each term < 2**32 + 2*(2**32 - 1)
    t = (p00 >> _S32) + (p01 & _M32) + (p10 & _M32)
    lo = (p00 & _M32) | ((t & _M32) << _S32)
    hi = (t >> _S32) + (p01 >> _S32) + (p10 >> _S32) + a1 * b1
    return lo, hi


@_wrapping
def mul128_lo(alo, ahi, blo, bhi):
    """Low 128 bits of a*b, elementwise (exact multiplication mod 2**128)."""
    lo, hi = mul_u64_full(alo, blo)
    return lo, hi + alo * bhi + ahi * blo


@_wrapping
def mul128_by_int(lo, hi, n: int):
    """Exact n*a mod 2**128 for signed Python int n, |n| < 2**63."""
    if not -(1 << 63) < n < (1 << 63):
        raise ValueError(f"multiplier {n} outside (-2**63, 2**63)")
    m = np.uint64(abs(n))
    plo, phi = mul_u64_full(lo, m)
    phi = phi + hi * m
    if n < 0:
        return neg128(plo, phi)
    return plo, phi


def to_float01(lo, hi):
    """Limb pair -> double in [0, 1). At most one ulp from the exact round."""
    return hi.astype(np.float64) * INV64 + lo.astype(np.float64) * INV128
