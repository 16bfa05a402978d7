"""Compiled inner loop for exact polynomial orbits.

The difference-table recurrence is inherently sequential, so the bulk path
runs it in a numba kernel over (lo, hi) uint64 limb pairs.  uint64 ops wrap
mod 2**64 in machine arithmetic; a manual carry turns two limbs into exact
mod-2**128 addition, which is exact addition on the circle.

The pure-Python stepper in `flows` is the reference implementation; tests
pin this kernel against it bit for bit.
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def diff_orbit_fill(tab_lo, tab_hi, degs, out_lo, out_hi):
    """Record the current point, then advance, for out.shape[0] steps.

    tab_*: (C, Dmax+1) per-coordinate difference tables, entry 0 the value.
    degs:  (C,) table degrees; entries above degs[c] are ignored.
    out_*: (nsteps, C); row s receives the point at offset s before stepping.
    Tables are mutated in place so consecutive calls continue the orbit.
    """
    nsteps = out_lo.shape[0]
    C = degs.shape[0]
    for s in range(nsteps):
        for c in range(C):
            out_lo[s, c] = tab_lo[c, 0]
            out_hi[s, c] = tab_hi[c, 0]
        for c in range(C):
            d = degs[c]
            for i in range(d):
                a = tab_lo[c, i]
                lo = a + tab_lo[c, i + 1]
                tab_lo[c, i] = lo
                carry = np.uint64(1) if lo < a else np.uint64(0)
                tab_hi[c, i] = tab_hi[c, i] + tab_hi[c, i + 1] + carry


def warm_up() -> None:
    """Force JIT compilation (cached on disk after the first process)."""
    tab_lo = np.zeros((1, 2), dtype=np.uint64)
    tab_hi = np.zeros((1, 2), dtype=np.uint64)
    degs = np.ones(1, dtype=np.int64)
    out = np.zeros((1, 1), dtype=np.uint64)
    diff_orbit_fill(tab_lo, tab_hi, degs, out, out.copy())
