import random

import numpy as np

from ergodlab._kernels import diff_orbit_fill, warm_up
from ergodlab._limbs import (
    add128,
    join_array,
    join_bits,
    mul128_by_int,
    mul128_lo,
    mul_u64_full,
    neg128,
    split_array,
    split_bits,
    sub128,
    to_float01,
)
from ergodlab.flows import WeylSystem, orbit, orbit_blocks, orbit_point_from_block
from ergodlab.torus import MASK, ONE, Frac, frac_from_rational

rng = random.Random(0x11B5)

U64 = (1 << 64) - 1


def rand128():
    return rng.getrandbits(128)


def test_split_join_roundtrip():
    for _ in range(200):
        v = rand128()
        lo, hi = split_bits(v)
        assert join_bits(lo, hi) == v
    lo, hi = split_array(np.array([0, 1, MASK], dtype=object))
    assert list(join_array(lo, hi)) == [0, 1, MASK]


def _pair(v):
    return np.uint64(v & U64), np.uint64(v >> 64)


def _val(lo, hi):
    return (int(hi) << 64) | int(lo)


def test_add128_against_python_ints():
    for _ in range(500):
        a, b = rand128(), rand128()
        lo, hi = add128(*_pair(a), *_pair(b))
        assert _val(lo, hi) == (a + b) % ONE


def test_sub_neg128_against_python_ints():
    for _ in range(500):
        a, b = rand128(), rand128()
        lo, hi = sub128(*_pair(a), *_pair(b))
        assert _val(lo, hi) == (a - b) % ONE
        lo, hi = neg128(*_pair(a))
        assert _val(lo, hi) == (-a) % ONE


def test_mul_u64_full_exact():
    for _ in range(500):
        a, b = rng.getrandbits(64), rng.getrandbits(64)
        lo, hi = mul_u64_full(np.uint64(a), np.uint64(b))
        assert _val(lo, hi) == a * b


def test_mul128_lo_truncates_like_python():
    for _ in range(500):
        a, b = rand128(), rand128()
        lo, hi = mul128_lo(*_pair(a), *_pair(b))
        assert _val(lo, hi) == (a * b) % ONE


def test_mul128_by_int_signed():
    for _ in range(500):
        a = rand128()
        n = rng.getrandbits(62) * (1 if rng.random() < 0.5 else -1)
        lo, hi = mul128_by_int(*_pair(a), n)
        assert _val(lo, hi) == (a * n) % ONE


def test_vectorized_forms_match_scalar():
    a = np.array([rand128() for _ in range(64)], dtype=object)
    b = np.array([rand128() for _ in range(64)], dtype=object)
    alo, ahi = split_array(a)
    blo, bhi = split_array(b)
    lo, hi = add128(alo, ahi, blo, bhi)
    got = join_array(lo, hi)
    assert all(int(g) == (int(x) + int(y)) % ONE for g, x, y in zip(got, a, b))


def test_to_float01_close():
    for _ in range(200):
        v = rand128()
        lo, hi = _pair(v)
        got = float(to_float01(np.uint64(lo), np.uint64(hi)))
        assert abs(got - v / ONE) < 2e-16


# kernel vs pure-python difference tables


def py_diff_orbit(table, nsteps):
    """Reference: same table recurrence on arbitrary-size ints."""
    table = [list(col) for col in table]
    out = []
    for _ in range(nsteps):
        out.append([col[0] for col in table])
        for col in table:
            for i in range(len(col) - 1):
                col[i] = (col[i] + col[i + 1]) & MASK
    return out


def test_kernel_matches_python_reference():
    warm_up()
    for trial in range(5):
        cols = [
            [rand128() for _ in range(deg + 1)]
            for deg in (1, 2, 3, 5)[: 1 + trial % 4]
        ]
        nsteps = 257
        want = py_diff_orbit(cols, nsteps)

        C = len(cols)
        width = max(len(c) for c in cols)
        tab_lo = np.zeros((C, width), dtype=np.uint64)
        tab_hi = np.zeros((C, width), dtype=np.uint64)
        degs = np.zeros(C, dtype=np.int64)
        for ci, col in enumerate(cols):
            degs[ci] = len(col) - 1
            for i, v in enumerate(col):
                tab_lo[ci, i] = v & U64
                tab_hi[ci, i] = v >> 64
        out_lo = np.zeros((nsteps, C), dtype=np.uint64)
        out_hi = np.zeros((nsteps, C), dtype=np.uint64)
        diff_orbit_fill(tab_lo, tab_hi, degs, out_lo, out_hi)
        for s in range(nsteps):
            got = [_val(out_lo[s, c], out_hi[s, c]) for c in range(C)]
            assert got == want[s], f"trial {trial} step {s}"


def test_block_orbit_bit_identical_to_frac_path():
    beta = frac_from_rational(987654321, 2**61)
    spec = WeylSystem(beta, 3)
    N = 1000
    ref = list(orbit(spec, None, N))
    rows = []
    for _, lo, hi in orbit_blocks(spec, None, N, block=192):
        rows.extend(orbit_point_from_block(lo, hi, r) for r in range(lo.shape[0]))
    assert len(rows) == N
    assert all(rows[n] == ref[n] for n in range(N))
