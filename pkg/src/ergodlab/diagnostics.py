"""Equidistribution statistics over exact orbits.

Observables are unimodular characters (their phase is accumulated exactly on
the 128-bit grid and converted to a double once, just before the complex
exponential) or the theta function on the nilmanifold.  Twisted sums reduce
the twist n*theta on the grid as well, so an eigenvalue hit cancels the
phase exactly in integer arithmetic.

Summation policy: the reference path uses running Kahan compensation; the
bulk path over kernel blocks combines per-chunk pairwise sums with an
exactly rounded merge (math.fsum), which is at least as accurate.  Both
paths produce the same statistics within documented tolerances, and the
bulk path is bit-deterministic for a fixed block size.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from ._limbs import add128, mul128_by_int, mul128_lo, sub128, to_float01
from .errors import ResourceLimitError
from .flows import (
    FlowSpec,
    Heisenberg,
    flow_dimension,
    is_polynomial,
    orbit,
    orbit_blocks,
)
from .nilflow import HeisPoint, theta_eval
from .torus import Frac, TorusPoint, add, dist, frac_from_rational, int_mul, to_real

_TWO_PI = 2.0 * math.pi
MAX_STAR_POINTS = 10**7
MAX_BOX_CELLS = 10**8
MAX_BOX_DIM = 4


@dataclass(frozen=True)
class Character:
    """Unimodular character exp(2 pi i <coeffs, x>) on the torus."""

    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise ValueError("character needs at least one coefficient")
        for c in self.coeffs:
            if not isinstance(c, int) or not -(1 << 63) < c < (1 << 63):
                raise ValueError(f"character coefficient out of range: {c!r}")


@dataclass(frozen=True)
class ThetaObservable:
    """The theta series on the Heisenberg quotient, truncated to tol."""

    tol: float = 1e-12


Observable = Union[Character, ThetaObservable]


def observable_for(spec: FlowSpec, obs: Observable) -> None:
    """Validate the observable against the flow's state space."""
    if isinstance(obs, Character):
        if isinstance(spec, Heisenberg):
            raise ValueError("characters act on torus flows, not the nilmanifold")
        if len(obs.coeffs) != flow_dimension(spec):
            raise ValueError(
                f"character has {len(obs.coeffs)} coefficients, flow has "
                f"dimension {flow_dimension(spec)}"
            )
    elif isinstance(obs, ThetaObservable):
        if not isinstance(spec, Heisenberg):
            raise ValueError("theta observable needs the Heisenberg flow")
    else:
        raise TypeError(f"not an observable: {obs!r}")


def character_phase(obs: Character, point: TorusPoint) -> Frac:
    """Exact phase <coeffs, x> mod 1 on the grid."""
    acc = Frac(0)
    for c, x in zip(obs.coeffs, point):
        if c:
            acc = add(acc, int_mul(x, c))
    return acc


def evaluate_observable(obs: Observable, point) -> complex:
    if isinstance(obs, Character):
        if not isinstance(point, TorusPoint):
            raise ValueError("character evaluated off the torus")
        ph = _TWO_PI * to_real(character_phase(obs, point))
        return complex(math.cos(ph), math.sin(ph))
    if isinstance(obs, ThetaObservable):
        if not isinstance(point, HeisPoint):
            raise ValueError("theta observable evaluated off the nilmanifold")
        return theta_eval(point, obs.tol)
    raise TypeError(f"not an observable: {obs!r}")


def observable_bound(obs: Observable) -> float:
    """A uniform bound on |obs|; characters are unimodular."""
    if isinstance(obs, Character):
        return 1.0
    # max_y sum_m exp(-pi (m+y)^2), attained at integer y
    return 1.0 + 2.0 * sum(math.exp(-math.pi * m * m) for m in range(1, 21))


def _kahan_add(s: float, c: float, x: float) -> tuple[float, float]:
    y = x - c
    t = s + y
    return t, (t - s) - y


def _normalize_marks(N: int, marks: Sequence[int] | None) -> list[int]:
    if marks is None:
        marks = [N]
    out = sorted(set(int(m) for m in marks))
    if not out or out[0] < 1 or out[-1] != N:
        raise ValueError(f"marks must be within 1..N and include N, got {marks}")
    return out


def _twisted_prefix_sums_reference(spec, start, obs, theta, N, marks):
    sums = []
    s_re = c_re = s_im = c_im = 0.0
    marks_i = 0
    n = 0
    for pt in orbit(spec, start, N):
        if isinstance(obs, Character):
            ph = character_phase(obs, pt)
            if theta is not None:
                ph = ph - int_mul(theta, n)
            ang = _TWO_PI * to_real(ph)
            v_re, v_im = math.cos(ang), math.sin(ang)
        else:
            v = evaluate_observable(obs, pt)
            if theta is not None:
                tw = _TWO_PI * to_real(int_mul(theta, n))
                v *= complex(math.cos(tw), -math.sin(tw))
            v_re, v_im = v.real, v.imag
        s_re, c_re = _kahan_add(s_re, c_re, v_re)
        s_im, c_im = _kahan_add(s_im, c_im, v_im)
        n += 1
        if n == marks[marks_i]:
            sums.append(complex(s_re, s_im))
            marks_i += 1
    return sums


def _twisted_prefix_sums_bulk(spec, start, obs, theta, N, marks):
    coeffs = obs.coeffs
    if theta is not None:
        t_lo = np.uint64(theta.bits & 0xFFFFFFFFFFFFFFFF)
        t_hi = np.uint64(theta.bits >> 64)
    re_parts: list[float] = []
    im_parts: list[float] = []
    sums = []
    marks_i = 0
    for n0, lo, hi in orbit_blocks(spec, start, N):
        m = lo.shape[0]
        plo = phi = None
        for i, c in enumerate(coeffs):
            if c == 0:
                continue
            tl, th = mul128_by_int(lo[:, i], hi[:, i], c)
            plo, phi = (tl, th) if plo is None else add128(plo, phi, tl, th)
        if plo is None:
            plo = np.zeros(m, dtype=np.uint64)
            phi = np.zeros_like(plo)
        if theta is not None and theta.bits:
            n_arr = np.arange(n0, n0 + m, dtype=np.uint64)
            tl, th = mul128_lo(n_arr, np.uint64(0), t_lo, t_hi)
            plo, phi = sub128(plo, phi, tl, th)
        ang = _TWO_PI * to_float01(plo, phi)
        cos_v = np.cos(ang)
        sin_v = np.sin(ang)
        # chunk against the pending marks so prefix sums land exactly
        w0 = 0
        while w0 < m:
            next_mark = marks[marks_i]
            w1 = min(m, next_mark - n0)
            re_parts.append(float(np.sum(cos_v[w0:w1])))
            im_parts.append(float(np.sum(sin_v[w0:w1])))
            if n0 + w1 == next_mark:
                sums.append(complex(math.fsum(re_parts), math.fsum(im_parts)))
                marks_i += 1
                if marks_i == len(marks):
                    return sums
            w0 = w1
    return sums


def twisted_prefix_sums(
    spec: FlowSpec,
    start,
    obs: Observable,
    theta: Frac | None,
    N: int,
    marks: Sequence[int] | None = None,
) -> list[complex]:
    """Prefix sums sum_{n<m} obs(T^n x) e(-n theta) at each mark m."""
    observable_for(spec, obs)
    if not isinstance(N, int) or N < 1:
        raise ValueError(f"N must be a positive int, got {N!r}")
    marks = _normalize_marks(N, marks)
    if is_polynomial(spec) and isinstance(obs, Character):
        return _twisted_prefix_sums_bulk(spec, start, obs, theta, N, marks)
    return _twisted_prefix_sums_reference(spec, start, obs, theta, N, marks)


def birkhoff_average(spec: FlowSpec, start, obs: Observable, N: int) -> complex:
    """Compensated mean (1/N) sum_{n<N} obs(T^n x)."""
    (s,) = twisted_prefix_sums(spec, start, obs, None, N)
    return s / N


def geometric_mean_bound(step: Frac, N: int) -> float:
    """Closed-form bound for |(1/N) sum e(x0 + n s)|: 1 / (N sin(pi |s|)).

    |s| is the circle distance of the phase step from 0; a zero step means
    constant terms, bound 1.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    s = dist(step, Frac(0))
    if s == 0.0:
        return 1.0
    return min(1.0, 1.0 / (N * math.sin(math.pi * s)))


def default_deviation_starts(dim: int, count: int = 100, q: int = 101) -> list[TorusPoint]:
    """Deterministic diagonal grid: point k is (k/q, ..., k/q), k = 1..count."""
    if count >= q:
        raise ValueError(f"need count < q, got {count} >= {q}")
    return [
        TorusPoint(frac_from_rational(k, q) for _ in range(dim))
        for k in range(1, count + 1)
    ]


def _pairwise_diameter(values: list[complex]) -> float:
    worst = 0.0
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            d = abs(values[i] - values[j])
            if d > worst:
                worst = d
    return worst


def _run_tasks(fn, items, threads: int):
    if threads <= 1:
        return [fn(it) for it in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def uniform_deviation_report(
    spec: FlowSpec,
    starts: Sequence,
    obs: Observable,
    N: int,
    threads: int = 1,
) -> "DiagnosticReport":
    """Max pairwise distance of ergodic averages, tracked at N/4, N/2, N."""
    if len(starts) < 2:
        raise ValueError(f"uniform deviation needs >= 2 starts, got {len(starts)}")
    if not isinstance(N, int) or N < 1:
        raise ValueError(f"N must be a positive int, got {N!r}")
    marks = sorted({max(1, N // 4), max(1, N // 2), N})

    def per_start(s):
        return twisted_prefix_sums(spec, s, obs, None, N, marks)

    all_sums = _run_tasks(per_start, list(starts), threads)
    rows = []
    final = 0.0
    for mi, m in enumerate(marks):
        avgs = [sums[mi] / m for sums in all_sums]
        dev = _pairwise_diameter(avgs)
        rows.append(
            {
                "statistic": "uniform_deviation",
                "N": m,
                "value_re": dev,
                "value_im": 0.0,
                "meta": {"starts": len(starts)},
            }
        )
        if m == N:
            final = dev
    return DiagnosticReport(
        statistic="uniform_deviation",
        N=N,
        rows=rows,
        extras={"final": final},
    )


def uniform_deviation(
    spec: FlowSpec, starts: Sequence, obs: Observable, N: int, threads: int = 1
) -> float:
    """The deviation at time N (see uniform_deviation_report for checkpoints)."""
    rep = uniform_deviation_report(spec, starts, obs, N, threads=threads)
    return rep.extras["final"]


def _as_unit_floats(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=np.float64)
    else:
        rows = []
        for p in points:
            if isinstance(p, Frac):
                rows.append(to_real(p))
            elif isinstance(p, TorusPoint):
                rows.append(p.to_reals())
            elif isinstance(p, (int, float)):
                rows.append(float(p))
            else:
                rows.append(tuple(float(c) for c in p))
        arr = np.asarray(rows, dtype=np.float64)
    return arr


def star_discrepancy_1d(points) -> float:
    """Exact anchored-interval discrepancy of a 1-d sample.

    Uses the sorted-sample identity D* = max_i max(i/N - u_(i), u_(i) - (i-1)/N);
    both extrema of every interval family [0, t) are attained at sample points,
    so the formula is exact, not a grid scan.
    """
    u = _as_unit_floats(points)
    if u.ndim != 1:
        raise ValueError(f"star discrepancy takes a 1-d sample, got shape {u.shape}")
    N = u.shape[0]
    if N < 1:
        raise ValueError("empty sample")
    if N > MAX_STAR_POINTS:
        raise ResourceLimitError(f"sample of {N} exceeds cap {MAX_STAR_POINTS}")
    u = np.sort(u)
    i = np.arange(1, N + 1, dtype=np.float64)
    return float(np.maximum(i / N - u, u - (i - 1.0) / N).max())


def box_discrepancy(points, grid: int) -> float:
    """Max over the grid**d congruent boxes of |empirical mass - volume|."""
    arr = _as_unit_floats(points)
    if arr.ndim == 1:
        arr = arr[:, None]
    N, d = arr.shape
    if N < 1:
        raise ValueError("empty sample")
    if d > MAX_BOX_DIM:
        raise ValueError(f"dimension {d} exceeds {MAX_BOX_DIM}")
    if not isinstance(grid, int) or grid < 1:
        raise ValueError(f"grid must be a positive int, got {grid!r}")
    cells = grid**d
    if cells > MAX_BOX_CELLS:
        raise ResourceLimitError(f"{grid}**{d} = {cells} cells exceeds cap {MAX_BOX_CELLS}")
    idx = np.clip((arr * grid).astype(np.int64), 0, grid - 1)
    flat = np.zeros(N, dtype=np.int64)
    for k in range(d):
        flat = flat * grid + idx[:, k]
    counts = np.bincount(flat, minlength=cells)
    vol = 1.0 / cells
    return float(np.abs(counts / N - vol).max())


def eigen_correlation(spec: FlowSpec, start, obs: Observable, theta: Frac, N: int) -> float:
    """|(1/N) sum obs(T^n x) e(-n theta)|; theta = 0 is the plain average."""
    if not isinstance(theta, Frac):
        raise TypeError("theta must be a Frac (exact twist reduction)")
    (s,) = twisted_prefix_sums(spec, start, obs, theta, N)
    return abs(s / N)


def eigen_scan(
    spec: FlowSpec,
    start,
    obs: Observable,
    thetas: Sequence[Frac],
    N: int,
    peak_threshold: float = 0.5,
    threads: int = 1,
) -> "DiagnosticReport":
    """Twisted correlations over a theta grid, flagging peaks above threshold."""
    thetas = list(thetas)
    if not thetas:
        raise ValueError("eigen_scan needs a nonempty theta grid")
    if not 0.0 < peak_threshold <= 1.0:
        raise ValueError(f"peak threshold must lie in (0, 1], got {peak_threshold}")

    def per_theta(th):
        return eigen_correlation(spec, start, obs, th, N)

    corr = _run_tasks(per_theta, thetas, threads)
    rows = []
    peaks = []
    for th, c in zip(thetas, corr):
        flagged = c > peak_threshold
        if flagged:
            peaks.append(th)
        rows.append(
            {
                "statistic": "eigen_correlation",
                "N": N,
                "value_re": c,
                "value_im": 0.0,
                "meta": {"theta": f"{th.bits}/2^128", "peak": flagged},
            }
        )
    return DiagnosticReport(
        statistic="eigen_scan",
        N=N,
        rows=rows,
        extras={"peaks": peaks, "peak_threshold": peak_threshold},
    )


def orbit_cardinality(spec: FlowSpec, start, N: int) -> int:
    """Distinct points among the first N orbit states (exact bit identity).

    Rational data can close up into a finite orbit; this reports the observed
    count rather than deciding finiteness symbolically.  Memory grows with
    the answer.
    """
    seen = set()
    for pt in orbit(spec, start, N):
        if isinstance(pt, TorusPoint):
            seen.add(tuple(c.bits for c in pt))
        else:
            seen.add((pt.x, pt.y, pt.z))
    return len(seen)


@dataclass
class DiagnosticReport:
    """Rows of one statistic plus deterministic context for serialization.

    runtime_s is measured wall clock and is deliberately excluded from both
    serializations so identical configurations produce identical bytes.
    """

    statistic: str
    N: int
    rows: list[dict]
    flow: dict | None = None
    observable: dict | None = None
    notes: tuple[str, ...] = ()
    extras: dict = field(default_factory=dict)
    runtime_s: float | None = None


def _fmt17(v: float) -> str:
    return f"{float(v):.17g}"


def report_to_json(rep: DiagnosticReport) -> str:
    payload = {
        "statistic": rep.statistic,
        "N": rep.N,
        "flow": rep.flow,
        "observable": rep.observable,
        "notes": list(rep.notes),
        "rows": [
            {
                "statistic": r["statistic"],
                "N": r["N"],
                "value_re": _fmt17(r["value_re"]),
                "value_im": _fmt17(r["value_im"]),
                "meta": r.get("meta", {}),
            }
            for r in rep.rows
        ],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def report_to_csv(rep: DiagnosticReport) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["statistic", "N", "value_re", "value_im", "meta"])
    for r in rep.rows:
        meta = json.dumps(r.get("meta", {}), sort_keys=True, separators=(",", ":"))
        w.writerow([r["statistic"], r["N"], _fmt17(r["value_re"]), _fmt17(r["value_im"]), meta])
    return buf.getvalue()
