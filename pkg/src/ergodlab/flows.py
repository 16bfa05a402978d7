"""Flow specifications and exact orbit iteration.

Polynomial flows (rotations, triangular polynomial systems, the parabolic
two-torus map) advance by forward-difference tables: each coordinate of the
orbit is a polynomial in the step index, so one exact grid addition per
table entry replaces any closed-form evaluation.  A degree-d coordinate
carries a table of d+1 entries whose entry i is the i-th forward difference
of that coordinate at the current index; stepping adds entry i+1 into
entry i.

Skew products driven by the lacunary cocycle evaluate the cocycle in double
precision and round it to the grid exactly once per step.  The Heisenberg
flow delegates to the nilflow module and iterates in doubles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from . import _kernels
from ._limbs import join_bits, split_bits
from .lacunary import (
    LacunaryParams,
    lacunary_params_from_json,
    lacunary_params_to_json,
    phi_as_frac,
)
from .nilflow import (
    HeisPoint,
    NilParams,
    heis_identity,
    nil_step,
    reduce_mod_lattice,
)
from .torus import (
    MASK,
    Frac,
    TorusPoint,
    add,
    frac_from_json,
    frac_to_json,
    int_mul,
    zero_point,
)

MAX_WEYL_DEGREE = 8
DEFAULT_BLOCK = 1 << 17


@dataclass(frozen=True)
class Rotation:
    """Translation by a fixed vector on the d-torus."""

    delta: TorusPoint


@dataclass(frozen=True)
class WeylSystem:
    """Triangular polynomial system of the given degree on the L-torus.

    The time-n map sends the origin to (n b, n**2 b, ..., n**L b); one step
    sends coordinate j to x_j + sum_{i<j} C(j, i) x_i + b.
    """

    beta: Frac
    degree: int

    def __post_init__(self) -> None:
        if not 1 <= self.degree <= MAX_WEYL_DEGREE:
            raise ValueError(
                f"degree must lie in 1..{MAX_WEYL_DEGREE}, got {self.degree}"
            )


@dataclass(frozen=True)
class Anzai:
    """Parabolic two-torus map (x, z) -> (x + alpha, z + x)."""

    alpha: Frac


@dataclass(frozen=True)
class CocycleSkew:
    """Two-torus skew product (x, y) -> (x + alpha, y + phi(x))."""

    alpha: Frac
    cocycle: LacunaryParams


@dataclass(frozen=True)
class SFlow:
    """Three-torus extension (x, y, z) -> (x + alpha, y + phi(x), z + x)."""

    alpha: Frac
    cocycle: LacunaryParams


@dataclass(frozen=True)
class Heisenberg:
    """Left translation on the Heisenberg nilmanifold."""

    alpha: Frac
    beta: Frac
    gamma: Frac

    def nil_params(self, theta_tol: float = 1e-12) -> NilParams:
        return NilParams(self.alpha, self.beta, self.gamma, theta_tol)


@dataclass(frozen=True)
class Product:
    """Cartesian product of torus-valued flows, stepped componentwise."""

    parts: tuple["FlowSpec", ...]

    def __post_init__(self) -> None:
        if len(self.parts) < 1:
            raise ValueError("product needs at least one part")
        for p in self.parts:
            if isinstance(p, Heisenberg):
                raise ValueError(
                    "product parts must be torus-valued; Heisenberg runs standalone"
                )


FlowSpec = Union[Rotation, WeylSystem, Anzai, CocycleSkew, SFlow, Heisenberg, Product]


def flow_dimension(spec: FlowSpec) -> int:
    if isinstance(spec, Rotation):
        return len(spec.delta)
    if isinstance(spec, WeylSystem):
        return spec.degree
    if isinstance(spec, (Anzai, CocycleSkew)):
        return 2
    if isinstance(spec, (SFlow, Heisenberg)):
        return 3
    if isinstance(spec, Product):
        return sum(flow_dimension(p) for p in spec.parts)
    raise TypeError(f"not a flow spec: {spec!r}")


def weyl_affine_step(point: TorusPoint, beta: Frac) -> TorusPoint:
    """The explicit one-step map of the triangular system, degree len(point)."""
    L = len(point)
    out = []
    for j in range(1, L + 1):
        acc = point[j - 1] + beta
        for i in range(1, j):
            acc = acc + int_mul(point[i - 1], math.comb(j, i))
        out.append(acc)
    return TorusPoint(out)


def weyl_closed_form(beta: Frac, degree: int, n: int) -> TorusPoint:
    """Time-n image of the origin: (n b, n**2 b, ..., n**L b), exactly."""
    if not 1 <= degree <= MAX_WEYL_DEGREE:
        raise ValueError(f"degree must lie in 1..{MAX_WEYL_DEGREE}, got {degree}")
    if not isinstance(n, int):
        raise TypeError(f"index must be int, got {type(n).__name__}")
    if abs(n) ** degree >= 1 << 63:
        raise OverflowError(
            f"|n|**degree = {abs(n)}**{degree} does not fit a signed 64-bit multiplier"
        )
    return TorusPoint(int_mul(beta, n**j) for j in range(1, degree + 1))


def anzai_closed_form(alpha: Frac, n: int) -> TorusPoint:
    """Time-n image of the origin under the parabolic map: (n a, C(n,2) a)."""
    if not isinstance(n, int):
        raise TypeError(f"index must be int, got {type(n).__name__}")
    if abs(n) >= 1 << 31:
        raise OverflowError(f"|n| < 2**31 required, got {n}")
    return TorusPoint((int_mul(alpha, n), int_mul(alpha, (n * (n - 1)) // 2)))


def _coerce_start(spec: FlowSpec, start) -> TorusPoint | HeisPoint:
    dim = flow_dimension(spec)
    if isinstance(spec, Heisenberg):
        if start is None:
            return heis_identity()
        if isinstance(start, HeisPoint):
            return reduce_mod_lattice(start)
        if isinstance(start, TorusPoint):
            if len(start) != 3:
                raise ValueError("Heisenberg start must have 3 coordinates")
            return HeisPoint(*start.to_reals())
        raise TypeError(f"bad Heisenberg start: {start!r}")
    if start is None:
        return zero_point(dim)
    if not isinstance(start, TorusPoint):
        raise TypeError(f"start must be a TorusPoint, got {type(start).__name__}")
    if len(start) != dim:
        raise ValueError(f"start has dimension {len(start)}, flow needs {dim}")
    return start


def _forward_difference_tables(columns: list[list[Frac]]) -> list[list[int]]:
    """columns[c] = first deg_c+1 orbit values of coordinate c -> bit tables."""
    tables = []
    for vals in columns:
        row = [v.bits for v in vals]
        table = [row[0]]
        while len(row) > 1:
            row = [(row[i + 1] - row[i]) & MASK for i in range(len(row) - 1)]
            table.append(row[0])
        tables.append(table)
    return tables


def _poly_tables(spec: FlowSpec, start: TorusPoint) -> list[list[int]]:
    """Exact difference tables for a polynomial spec at the given start."""
    if isinstance(spec, Rotation):
        return [[x.bits, d.bits] for x, d in zip(start, spec.delta)]
    if isinstance(spec, Anzai):
        x, z = start
        # x has degree 1; z has degree 2 with first difference x
        return [[x.bits, spec.alpha.bits], [z.bits, x.bits, spec.alpha.bits]]
    if isinstance(spec, WeylSystem):
        L = spec.degree
        if all(c.bits == 0 for c in start):
            pts = [weyl_closed_form(spec.beta, L, n) for n in range(L + 1)]
        else:
            pts = [start]
            for _ in range(L):
                pts.append(weyl_affine_step(pts[-1], spec.beta))
        cols = [[pts[n][j] for n in range(j + 2)] for j in range(L)]
        return _forward_difference_tables(cols)
    if isinstance(spec, Product):
        tables = []
        off = 0
        for p in spec.parts:
            d = flow_dimension(p)
            sub = TorusPoint(start[off + i] for i in range(d))
            tables.extend(_poly_tables(p, sub))
            off += d
        return tables
    raise TypeError(f"not a polynomial spec: {spec!r}")


def is_polynomial(spec: FlowSpec) -> bool:
    """True when orbits are exact polynomials in the step index."""
    if isinstance(spec, (Rotation, WeylSystem, Anzai)):
        return True
    if isinstance(spec, Product):
        return all(is_polynomial(p) for p in spec.parts)
    return False


class OrbitState:
    """Mutable cursor along one orbit; owned by a single worker at a time."""

    __slots__ = ("spec", "step_index", "_kind", "_tables", "_coords", "_g", "_subs", "_params")

    def __init__(self, spec: FlowSpec, start) -> None:
        self.spec = spec
        self.step_index = 0
        start = _coerce_start(spec, start)
        if is_polynomial(spec):
            self._kind = "poly"
            self._tables = _poly_tables(spec, start)
        elif isinstance(spec, CocycleSkew):
            self._kind = "cocycle"
            self._coords = list(start)
            self._params = spec.cocycle
        elif isinstance(spec, SFlow):
            self._kind = "sflow"
            self._coords = list(start)
            self._params = spec.cocycle
        elif isinstance(spec, Heisenberg):
            self._kind = "heis"
            self._g = start
            self._params = spec.nil_params()
        elif isinstance(spec, Product):
            self._kind = "product"
            self._subs = []
            off = 0
            for p in spec.parts:
                d = flow_dimension(p)
                sub_start = TorusPoint(start[off + i] for i in range(d))
                self._subs.append(OrbitState(p, sub_start))
                off += d
        else:
            raise TypeError(f"not a flow spec: {spec!r}")

    @property
    def point(self) -> TorusPoint | HeisPoint:
        """The current state (index self.step_index along the orbit)."""
        if self._kind == "poly":
            return TorusPoint(Frac(t[0]) for t in self._tables)
        if self._kind in ("cocycle", "sflow"):
            return TorusPoint(self._coords)
        if self._kind == "heis":
            return self._g
        return TorusPoint(c for s in self._subs for c in s.point)

    @property
    def diff_table(self) -> list[Frac] | None:
        """Flat view of the difference tables; None for non-polynomial flows."""
        if self._kind != "poly":
            return None
        return [Frac(b) for t in self._tables for b in t]

    def advance(self) -> None:
        if self._kind == "poly":
            for t in self._tables:
                for i in range(len(t) - 1):
                    t[i] = (t[i] + t[i + 1]) & MASK
        elif self._kind == "cocycle":
            x, y = self._coords
            self._coords[1] = add(y, phi_as_frac(x, self._params))
            self._coords[0] = add(x, self.spec.alpha)
        elif self._kind == "sflow":
            x, y, z = self._coords
            self._coords[2] = add(z, x)
            self._coords[1] = add(y, phi_as_frac(x, self._params))
            self._coords[0] = add(x, self.spec.alpha)
        elif self._kind == "heis":
            self._g = nil_step(self._g, self._params)
        else:
            for s in self._subs:
                s.advance()
        self.step_index += 1


def make_flow(spec: FlowSpec, start=None) -> OrbitState:
    """Initial orbit state at index 0. start=None means the origin/identity."""
    return OrbitState(spec, start)


def step(state: OrbitState) -> OrbitState:
    """Advance one step in place and return the state."""
    state.advance()
    return state


def orbit(spec: FlowSpec, start, N: int) -> Iterator[TorusPoint | HeisPoint]:
    """Lazily yield the states at indices 0..N-1. Constant memory."""
    if not isinstance(N, int) or N < 0:
        raise ValueError(f"orbit length must be a nonnegative int, got {N!r}")
    state = make_flow(spec, start)
    for _ in range(N):
        yield state.point
        state.advance()


def orbit_blocks(
    spec: FlowSpec, start, N: int, block: int = DEFAULT_BLOCK
) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Bulk orbit of a polynomial flow as (n0, lo, hi) uint64 limb blocks.

    Yields rows n0..n0+m-1 with lo/hi of shape (m, dim).  Bit-identical to
    `orbit`; the compiled kernel runs the same difference tables two limbs
    at a time.
    """
    if not is_polynomial(spec):
        raise ValueError(f"bulk orbit needs a polynomial flow, got {type(spec).__name__}")
    if not isinstance(N, int) or N < 0:
        raise ValueError(f"orbit length must be a nonnegative int, got {N!r}")
    if block < 1:
        raise ValueError(f"block size must be >= 1, got {block}")
    tables = _poly_tables(spec, _coerce_start(spec, start))
    C = len(tables)
    depth = max(len(t) for t in tables)
    tab_lo = np.zeros((C, depth), dtype=np.uint64)
    tab_hi = np.zeros((C, depth), dtype=np.uint64)
    degs = np.zeros(C, dtype=np.int64)
    for c, t in enumerate(tables):
        degs[c] = len(t) - 1
        for i, bits in enumerate(t):
            tab_lo[c, i], tab_hi[c, i] = split_bits(bits)
    done = 0
    while done < N:
        m = min(block, N - done)
        out_lo = np.empty((m, C), dtype=np.uint64)
        out_hi = np.empty((m, C), dtype=np.uint64)
        _kernels.diff_orbit_fill(tab_lo, tab_hi, degs, out_lo, out_hi)
        yield done, out_lo, out_hi
        done += m


def orbit_point_from_block(lo: np.ndarray, hi: np.ndarray, row: int) -> TorusPoint:
    """Reassemble one block row into an exact TorusPoint."""
    return TorusPoint(
        Frac(join_bits(lo[row, c], hi[row, c])) for c in range(lo.shape[1])
    )


_VARIANTS = {
    "rotation": Rotation,
    "weyl": WeylSystem,
    "anzai": Anzai,
    "cocycle_skew": CocycleSkew,
    "s_flow": SFlow,
    "heisenberg": Heisenberg,
    "product": Product,
}


def flow_to_json(spec: FlowSpec) -> dict:
    if isinstance(spec, Rotation):
        params = {"delta": [frac_to_json(c) for c in spec.delta]}
        return {"variant": "rotation", "params": params}
    if isinstance(spec, WeylSystem):
        return {
            "variant": "weyl",
            "params": {"beta": frac_to_json(spec.beta), "degree": spec.degree},
        }
    if isinstance(spec, Anzai):
        return {"variant": "anzai", "params": {"alpha": frac_to_json(spec.alpha)}}
    if isinstance(spec, CocycleSkew):
        return {
            "variant": "cocycle_skew",
            "params": {
                "alpha": frac_to_json(spec.alpha),
                "cocycle": lacunary_params_to_json(spec.cocycle),
            },
        }
    if isinstance(spec, SFlow):
        return {
            "variant": "s_flow",
            "params": {
                "alpha": frac_to_json(spec.alpha),
                "cocycle": lacunary_params_to_json(spec.cocycle),
            },
        }
    if isinstance(spec, Heisenberg):
        return {
            "variant": "heisenberg",
            "params": {
                "alpha": frac_to_json(spec.alpha),
                "beta": frac_to_json(spec.beta),
                "gamma": frac_to_json(spec.gamma),
            },
        }
    if isinstance(spec, Product):
        return {
            "variant": "product",
            "params": {"parts": [flow_to_json(p) for p in spec.parts]},
        }
    raise TypeError(f"not a flow spec: {spec!r}")


def _require_fields(params: dict, required: set[str], optional: set[str] = frozenset()):
    if not isinstance(params, dict):
        raise ValueError(f"flow params must be an object, got {params!r}")
    missing = required - set(params)
    if missing:
        raise ValueError(f"flow params missing fields: {sorted(missing)}")
    extra = set(params) - required - optional
    if extra:
        raise ValueError(f"unexpected flow params: {sorted(extra)}")


def flow_from_json(obj: dict) -> FlowSpec:
    if not isinstance(obj, dict):
        raise ValueError(f"flow spec must be an object, got {obj!r}")
    variant = obj.get("variant")
    if variant not in _VARIANTS:
        raise ValueError(
            f"unknown flow variant {variant!r}; expected one of {sorted(_VARIANTS)}"
        )
    params = obj.get("params", {})
    if variant == "rotation":
        _require_fields(params, {"delta"})
        delta = params["delta"]
        if not isinstance(delta, list) or not delta:
            raise ValueError("rotation delta must be a nonempty list")
        return Rotation(TorusPoint(frac_from_json(c) for c in delta))
    if variant == "weyl":
        _require_fields(params, {"beta", "degree"})
        degree = params["degree"]
        if not isinstance(degree, int):
            raise ValueError(f"degree must be an integer, got {degree!r}")
        return WeylSystem(frac_from_json(params["beta"]), degree)
    if variant == "anzai":
        _require_fields(params, {"alpha"})
        return Anzai(frac_from_json(params["alpha"]))
    if variant == "cocycle_skew":
        _require_fields(params, {"alpha", "cocycle"})
        return CocycleSkew(
            frac_from_json(params["alpha"]),
            lacunary_params_from_json(params["cocycle"]),
        )
    if variant == "s_flow":
        _require_fields(params, {"alpha", "cocycle"})
        return SFlow(
            frac_from_json(params["alpha"]),
            lacunary_params_from_json(params["cocycle"]),
        )
    if variant == "heisenberg":
        _require_fields(params, {"alpha", "beta", "gamma"})
        return Heisenberg(
            frac_from_json(params["alpha"]),
            frac_from_json(params["beta"]),
            frac_from_json(params["gamma"]),
        )
    # product
    _require_fields(params, {"parts"})
    parts = params["parts"]
    if not isinstance(parts, list) or not parts:
        raise ValueError("product parts must be a nonempty list")
    return Product(tuple(flow_from_json(p) for p in parts))
