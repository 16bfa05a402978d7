"""Experiment runner: every construction and diagnostic behind one binary.

Config files are JSON.  Numeric inputs are decimal strings or {"p": ..., "q":
...} rationals; binary floats are rejected at parse time so a config means the
same orbit on every platform.  Output is CSV or canonical JSON with 17
significant digits and no wall-clock values, so identical configs give
identical bytes regardless of --threads.

Exit codes: 0 success, 1 a demo verification failed, 2 usage or config error,
3 a resource cap was hit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._limbs import to_float01
from .diagnostics import (
    Character,
    DiagnosticReport,
    Observable,
    ThetaObservable,
    _fmt17,
    birkhoff_average,
    box_discrepancy,
    default_deviation_starts,
    eigen_scan,
    star_discrepancy_1d,
    twisted_prefix_sums,
    uniform_deviation_report,
)
from .errors import ConfigError, ResourceLimitError
from .flows import (
    Anzai,
    FlowSpec,
    Product,
    flow_dimension,
    flow_from_json,
    flow_to_json,
    is_polynomial,
    orbit,
    orbit_blocks,
)
from .joinings import (
    JoinSpec,
    anzai_joining_factor,
    join_from_json,
    join_orbit,
    m_joining_demo,
)
from .lacunary import (
    H_eval,
    LacunaryParams,
    Weights,
    furstenberg_sequence,
    h_eval,
    j_map,
    phi_as_frac,
    small_divisor_gap,
)
from .nilflow import HeisPoint, NilParams, heis_identity, heis_mul, nil_function, nil_step, theta_eval
from .torus import (
    Frac,
    TorusPoint,
    add,
    dist,
    frac_from_decimal,
    frac_from_json,
    int_mul,
)

# Shared demo fixtures.  Decimal strings, not float literals, so the ingested
# grid points are identical on every platform.
DEMO_ALPHA = frac_from_decimal("0.6180339887498949")
DEMO_BETA = frac_from_decimal("0.41421356237309515")
DEMO_GAMMA = frac_from_decimal("0.7320508075688773")
THETA_AT_IDENTITY = 1.086434811213308

_CONFIG_KEYS = {
    "flow",
    "join",
    "observable",
    "n",
    "start",
    "starts",
    "thetas",
    "peak_threshold",
    "grid",
    "format",
    "out",
    "checkpoints",
}


def _reject_float(text: str):
    raise ConfigError(
        f"binary float {text!r} in config; use a decimal string or a p/q object"
    )


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh, parse_float=_reject_float)
    except OSError as e:
        raise ConfigError(f"cannot read config {path!r}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path!r} is not valid JSON: {e}") from e


def _as_number(value, what: str) -> float:
    """Config scalars arrive as ints or decimal strings, never floats."""
    if isinstance(value, bool):
        raise ConfigError(f"{what} must be a number, got {value!r}")
    if isinstance(value, int):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value))
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"{what} is not a decimal or fraction: {value!r}") from e
    raise ConfigError(f"{what} must be an int or decimal string, got {value!r}")


@dataclass
class ExperimentConfig:
    flow: FlowSpec | None = None
    join: JoinSpec | None = None
    observable: Observable | None = None
    n: int | None = None
    start: TorusPoint | None = None
    starts: list | None = None
    starts_grid: tuple[int, int] | None = None
    thetas: list[Frac] | None = None
    peak_threshold: float = 0.5
    grid: int = 10
    fmt: str = "csv"
    out: str | None = None
    checkpoints: list[Fraction] = field(default_factory=list)


def _parse_point(raw, what: str) -> TorusPoint:
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{what} must be a nonempty list of coordinates")
    try:
        return TorusPoint(frac_from_json(c) for c in raw)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"bad {what}: {e}") from e


def _parse_observable(raw) -> Observable:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigError(f"observable must be an object with a 'kind', got {raw!r}")
    kind = raw["kind"]
    if kind == "character":
        extra = set(raw) - {"kind", "coeffs"}
        if extra:
            raise ConfigError(f"unexpected observable fields: {sorted(extra)}")
        coeffs = raw.get("coeffs")
        if not isinstance(coeffs, list) or not all(
            isinstance(c, int) and not isinstance(c, bool) for c in coeffs
        ):
            raise ConfigError("character coeffs must be a list of integers")
        try:
            return Character(tuple(coeffs))
        except ValueError as e:
            raise ConfigError(str(e)) from e
    if kind == "theta":
        extra = set(raw) - {"kind", "tol"}
        if extra:
            raise ConfigError(f"unexpected observable fields: {sorted(extra)}")
        tol = _as_number(raw["tol"], "theta tol") if "tol" in raw else 1e-12
        return ThetaObservable(tol=tol)
    raise ConfigError(f"unknown observable kind: {kind!r}")


def _load_config(path: str) -> ExperimentConfig:
    raw = _load_json(path)
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be an object, got {type(raw).__name__}")
    extra = set(raw) - _CONFIG_KEYS
    if extra:
        raise ConfigError(f"unknown config fields: {sorted(extra)}")
    cfg = ExperimentConfig()
    base = os.path.dirname(os.path.abspath(path))

    def indirect(value):
        # A spec given as a string is a path to another JSON file.
        if isinstance(value, str):
            p = value if os.path.isabs(value) else os.path.join(base, value)
            return _load_json(p)
        return value

    try:
        if "flow" in raw:
            cfg.flow = flow_from_json(indirect(raw["flow"]))
        if "join" in raw:
            cfg.join = join_from_json(indirect(raw["join"]))
    except (ValueError, TypeError) as e:
        raise ConfigError(f"bad flow/join spec: {e}") from e
    if "observable" in raw:
        cfg.observable = _parse_observable(raw["observable"])
    if "n" in raw:
        n = raw["n"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ConfigError(f"n must be a positive integer, got {n!r}")
        cfg.n = n
    if "start" in raw:
        cfg.start = _parse_point(raw["start"], "start")
    if "starts" in raw:
        s = raw["starts"]
        if isinstance(s, dict):
            extra = set(s) - {"grid", "q"}
            if extra:
                raise ConfigError(f"unexpected starts fields: {sorted(extra)}")
            count = s.get("grid")
            if not isinstance(count, int) or count < 1:
                raise ConfigError(f"starts.grid must be a positive integer, got {count!r}")
            q = s.get("q", 101)
            if not isinstance(q, int) or q < 1:
                raise ConfigError(f"starts.q must be a positive integer, got {q!r}")
            cfg.starts_grid = (count, q)
        elif isinstance(s, list):
            cfg.starts = [_parse_point(p, "starts entry") for p in s]
        else:
            raise ConfigError(f"starts must be a list or a grid object, got {s!r}")
    if "thetas" in raw:
        if not isinstance(raw["thetas"], list) or not raw["thetas"]:
            raise ConfigError("thetas must be a nonempty list")
        try:
            cfg.thetas = [frac_from_json(t) for t in raw["thetas"]]
        except (ValueError, TypeError) as e:
            raise ConfigError(f"bad theta grid: {e}") from e
    if "peak_threshold" in raw:
        cfg.peak_threshold = _as_number(raw["peak_threshold"], "peak_threshold")
    if "grid" in raw:
        g = raw["grid"]
        if not isinstance(g, int) or isinstance(g, bool) or g < 1:
            raise ConfigError(f"grid must be a positive integer, got {g!r}")
        cfg.grid = g
    if "format" in raw:
        if raw["format"] not in ("csv", "json"):
            raise ConfigError(f"format must be 'csv' or 'json', got {raw['format']!r}")
        cfg.fmt = raw["format"]
    if "out" in raw:
        if not isinstance(raw["out"], str):
            raise ConfigError(f"out must be a path string, got {raw['out']!r}")
        cfg.out = raw["out"]
    if "checkpoints" in raw:
        if not isinstance(raw["checkpoints"], list) or not raw["checkpoints"]:
            raise ConfigError("checkpoints must be a nonempty list of fractions")
        fracs = []
        for c in raw["checkpoints"]:
            if isinstance(c, int) and not isinstance(c, bool):
                f = Fraction(c)
            elif isinstance(c, str):
                try:
                    f = Fraction(c)
                except (ValueError, ZeroDivisionError) as e:
                    raise ConfigError(f"bad checkpoint fraction {c!r}") from e
            else:
                raise ConfigError(f"bad checkpoint fraction {c!r}")
            if not 0 < f <= 1:
                raise ConfigError(f"checkpoint fraction {c!r} outside (0, 1]")
            fracs.append(f)
        cfg.checkpoints = fracs
    return cfg


def _merge_flags(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if getattr(args, "n", None) is not None:
        if args.n < 1:
            raise ConfigError(f"--n must be positive, got {args.n}")
        cfg.n = args.n
    if getattr(args, "out", None) is not None:
        cfg.out = args.out
    if getattr(args, "format", None) is not None:
        cfg.fmt = args.format
    return cfg


def _threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        k = args.threads
    else:
        env = os.environ.get("ERGODLAB_THREADS")
        if env is None:
            return 1
        try:
            k = int(env)
        except ValueError as e:
            raise ConfigError(f"ERGODLAB_THREADS is not an integer: {env!r}") from e
    if k < 1:
        raise ConfigError(f"thread count must be >= 1, got {k}")
    return k


def _write_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as e:
        raise ConfigError(f"cannot write output {out!r}: {e}") from e


def _emit_report(rep: DiagnosticReport, cfg: ExperimentConfig) -> None:
    from .diagnostics import report_to_csv, report_to_json

    text = report_to_csv(rep) if cfg.fmt == "csv" else report_to_json(rep)
    _write_text(text, cfg.out)


def _marks_from_checkpoints(cfg: ExperimentConfig, N: int) -> list[int] | None:
    if not cfg.checkpoints:
        return None
    return sorted({max(1, int(f * N)) for f in cfg.checkpoints})


# ---------------------------------------------------------------------------
# orbit


def _orbit_rows(cfg: ExperimentConfig, N: int):
    if cfg.join is not None:
        for p in join_orbit(cfg.join, N):
            yield p.n, p.left.to_reals() + p.right.to_reals()
        return
    for i, pt in enumerate(orbit(cfg.flow, cfg.start, N)):
        if isinstance(pt, HeisPoint):
            yield i, (pt.x, pt.y, pt.z)
        else:
            yield i, pt.to_reals()


def cmd_orbit(args) -> int:
    cfg = _merge_flags(_load_config(args.config), args)
    if (cfg.flow is None) == (cfg.join is None):
        raise ConfigError("orbit needs exactly one of 'flow' or 'join' in the config")
    if cfg.n is None:
        raise ConfigError("orbit needs n (config field or --n)")
    N = cfg.n
    rows = _orbit_rows(cfg, N)
    first = next(rows, None)
    if first is None:
        raise ConfigError("empty orbit")
    dim = len(first[1])
    header = ["n"] + [f"x{i}" for i in range(dim)]
    if cfg.fmt == "csv":
        lines = [",".join(header)]
        for n, coords in _chain_first(first, rows):
            lines.append(",".join([str(n)] + [_fmt17(c) for c in coords]))
        _write_text("\n".join(lines) + "\n", cfg.out)
    else:
        payload = {
            "columns": header,
            "rows": [
                {"n": n, "coords": [_fmt17(c) for c in coords]}
                for n, coords in _chain_first(first, rows)
            ],
        }
        if cfg.flow is not None:
            payload["flow"] = flow_to_json(cfg.flow)
        _write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n", cfg.out)
    return 0


def _chain_first(first, rest):
    yield first
    yield from rest


# ---------------------------------------------------------------------------
# diag


def _diag_flow(cfg: ExperimentConfig) -> FlowSpec:
    if cfg.flow is not None:
        return cfg.flow
    if cfg.join is None:
        raise ConfigError("diag needs a 'flow' (or a full_product 'join') in the config")
    if cfg.join.mode != "full_product":
        raise ConfigError("diag supports full_product joins only")
    return Product((cfg.join.left, cfg.join.right))


def _diag_start(cfg: ExperimentConfig):
    if cfg.join is not None and cfg.start is None:
        return TorusPoint(cfg.join.left_start.coords + cfg.join.right_start.coords)
    return cfg.start


def cmd_diag(args) -> int:
    cfg = _merge_flags(_load_config(args.config), args)
    spec = _diag_flow(cfg)
    if cfg.n is None:
        raise ConfigError("diag needs n (config field or --n)")
    N = cfg.n
    threads = _threads(args)
    kind = args.kind
    if kind == "birkhoff":
        if cfg.observable is None:
            raise ConfigError("diag birkhoff needs an observable")
        marks = _marks_from_checkpoints(cfg, N)
        if marks is None:
            mean = birkhoff_average(spec, _diag_start(cfg), cfg.observable, N)
            rows = [
                {
                    "statistic": "birkhoff_mean",
                    "N": N,
                    "value_re": mean.real,
                    "value_im": mean.imag,
                    "meta": {},
                }
            ]
        else:
            sums = twisted_prefix_sums(spec, _diag_start(cfg), cfg.observable, None, N, marks)
            rows = [
                {
                    "statistic": "birkhoff_mean",
                    "N": m,
                    "value_re": (s / m).real,
                    "value_im": (s / m).imag,
                    "meta": {},
                }
                for m, s in zip(marks, sums)
            ]
        rep = DiagnosticReport(
            statistic="birkhoff", N=N, rows=rows, flow=flow_to_json(spec)
        )
    elif kind == "deviation":
        if cfg.observable is None:
            raise ConfigError("diag deviation needs an observable")
        if cfg.starts is not None:
            starts = cfg.starts
        elif cfg.starts_grid is not None:
            count, q = cfg.starts_grid
            starts = default_deviation_starts(flow_dimension(spec), count, q)
        else:
            raise ConfigError("diag deviation needs 'starts' (list or grid)")
        try:
            rep = uniform_deviation_report(spec, starts, cfg.observable, N, threads=threads)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        rep.flow = flow_to_json(spec)
    elif kind == "discrepancy":
        rep = _discrepancy_report(cfg, spec, N)
    elif kind == "eigenscan":
        if cfg.observable is None:
            raise ConfigError("diag eigenscan needs an observable")
        if cfg.thetas is None:
            raise ConfigError("diag eigenscan needs a 'thetas' list in the config")
        try:
            rep = eigen_scan(
                spec,
                _diag_start(cfg),
                cfg.observable,
                cfg.thetas,
                N,
                peak_threshold=cfg.peak_threshold,
                threads=threads,
            )
        except ValueError as e:
            raise ConfigError(str(e)) from e
        rep.flow = flow_to_json(spec)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown diag kind {kind!r}")
    _emit_report(rep, cfg)
    return 0


def _orbit_floats(spec: FlowSpec, start, N: int) -> np.ndarray:
    """Orbit coordinates as an (N, dim) float array; bulk path when available."""
    dim = flow_dimension(spec)
    if is_polynomial(spec):
        out = np.empty((N, dim), dtype=np.float64)
        done = 0
        for _, lo, hi in orbit_blocks(spec, start, N):
            out[done : done + lo.shape[0]] = to_float01(lo, hi)
            done += lo.shape[0]
        return out
    rows = np.empty((N, dim), dtype=np.float64)
    for i, pt in enumerate(orbit(spec, start, N)):
        rows[i] = pt.to_reals()
    return rows


def _discrepancy_report(cfg: ExperimentConfig, spec: FlowSpec, N: int) -> DiagnosticReport:
    dim = flow_dimension(spec)
    pts = _orbit_floats(spec, cfg.start, N)
    if dim == 1:
        value = star_discrepancy_1d(pts[:, 0])
        rows = [
            {
                "statistic": "star_discrepancy",
                "N": N,
                "value_re": value,
                "value_im": 0.0,
                "meta": {},
            }
        ]
        stat = "star_discrepancy"
    else:
        value = box_discrepancy(pts, cfg.grid)
        rows = [
            {
                "statistic": "box_discrepancy",
                "N": N,
                "value_re": value,
                "value_im": 0.0,
                "meta": {"grid": cfg.grid},
            }
        ]
        stat = "box_discrepancy"
    return DiagnosticReport(statistic=stat, N=N, rows=rows, flow=flow_to_json(spec))


# ---------------------------------------------------------------------------
# demo


def _say(ok: bool, label: str, detail: str) -> bool:
    print(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
    return ok


def demo_fur_seq(args) -> int:
    K = args.n if args.n is not None else 3
    seq = furstenberg_sequence(K)
    print(f"v = {seq.v}")
    print(f"n = {seq.n}")
    print(f"alpha = {seq.alpha_exact}")
    ok = True
    for k in range(1, K):
        gap = small_divisor_gap(seq, k)
        bound = Fraction(1, 2 ** seq.n[k - 1])
        ok &= _say(gap < bound, f"gap {k}", f"frac({seq.n[k-1]}*alpha) = {gap} < {bound}")
    return 0 if ok else 1


def demo_coboundary(args) -> int:
    import random

    K = 3
    pts = args.n if args.n is not None else 2000
    rng = random.Random(20240811)
    ok = True
    for w in Weights:
        params = LacunaryParams(seq=furstenberg_sequence(K), weights=w)
        alpha = params.seq.alpha
        worst = 0.0
        for _ in range(pts):
            x = Frac(rng.getrandbits(128))
            lhs = h_eval(x, params)
            rhs = H_eval(add(x, alpha), params) - H_eval(x, params)
            worst = max(worst, abs(lhs - rhs))
        ok &= _say(worst <= 1e-12, f"coboundary {w.name.lower()}", f"max residual {worst:.3e}")
    return 0 if ok else 1


def demo_conjugacy(args) -> int:
    import random

    iters = args.n if args.n is not None else 200
    n_starts = 100
    params = LacunaryParams(seq=furstenberg_sequence(3), t=1.0, beta=DEMO_BETA)
    alpha = params.seq.alpha
    rng = random.Random(20240812)
    worst = 0.0
    for _ in range(n_starts):
        base = TorusPoint((Frac(rng.getrandbits(128)), Frac(rng.getrandbits(128))))
        skew = j_map(base, params)
        for _ in range(iters):
            skew = TorusPoint((add(skew[0], alpha), add(skew[1], phi_as_frac(skew[0], params))))
            base = TorusPoint((add(base[0], alpha), add(base[1], params.beta)))
            image = j_map(base, params)
            if skew[0] != image[0]:
                _say(False, "conjugacy base", "base coordinates diverged")
                return 1
            worst = max(worst, dist(skew[1], image[1]))
    ok = _say(worst <= 1e-10, "conjugacy", f"max fiber residual {worst:.3e} over {n_starts}x{iters}")
    return 0 if ok else 1


def demo_theta(args) -> int:
    import random

    pts = args.n if args.n is not None else 200
    params = NilParams(DEMO_ALPHA, DEMO_BETA, DEMO_GAMMA)
    tol = params.theta_tol
    f0 = theta_eval(heis_identity(), tol=tol)
    ok = _say(
        abs(f0 - THETA_AT_IDENTITY) <= 1e-10,
        "theta at identity",
        f"|F(0,0,0) - {THETA_AT_IDENTITY}| = {abs(f0 - THETA_AT_IDENTITY):.3e}",
    )
    gens = [
        HeisPoint(1.0, 0.0, 0.0),
        HeisPoint(-1.0, 0.0, 1.0),
        HeisPoint(0.0, 1.0, 0.0),
        HeisPoint(0.0, -1.0, 0.0),
        HeisPoint(0.0, 0.0, 1.0),
        HeisPoint(0.0, 0.0, -1.0),
    ]
    rng = random.Random(20240813)
    for gi, gen in enumerate(gens):
        worst = 0.0
        for _ in range(pts):
            g = HeisPoint(rng.random(), rng.random(), rng.random())
            worst = max(worst, abs(theta_eval(heis_mul(g, gen), tol=tol) - theta_eval(g, tol=tol)))
        ok &= _say(worst <= 2 * tol, f"automorphy gen {gi}", f"max residual {worst:.3e}")
    n_steps = min(pts * 5, 2000)
    g = heis_identity()
    worst = 0.0
    for n in range(n_steps + 1):
        budget = 10 * tol + 1e-8 * n
        err = abs(theta_eval(g, tol=tol) - nil_function(n, params))
        worst = max(worst, err - budget)
        g = nil_step(g, params)
    ok &= _say(worst <= 0.0, "two-path orbit", f"worst slack {worst:.3e} over n <= {n_steps}")
    return 0 if ok else 1


def demo_joining_anzai(args) -> int:
    N = args.n if args.n is not None else 100000
    beta = DEMO_BETA
    spec = JoinSpec(
        Anzai(DEMO_ALPHA),
        Anzai(DEMO_ALPHA),
        "full_product",
        TorusPoint((Frac(0), Frac(0))),
        TorusPoint((beta, Frac(0))),
    )
    bad = 0
    for n, offset in enumerate(anzai_joining_factor(spec, N)):
        if offset != int_mul(beta, n):
            bad += 1
    ok = _say(bad == 0, "anzai factor", f"{N - bad}/{N} offsets equal n*beta exactly")
    return 0 if ok else 1


def demo_joining_m(args) -> int:
    N = args.n if args.n is not None else 10000
    params = LacunaryParams(seq=furstenberg_sequence(3), t=1.0, beta=DEMO_BETA)
    rep = m_joining_demo(params, DEMO_ALPHA, N)
    ok = _say(rep.extras["x_offset_exact"], "x offset", f"base offset stays beta over {N} steps")
    ok &= _say(rep.extras["z_offset_exact"], "z offset", f"corner offset stays n*beta over {N} steps")
    for r in rep.rows:
        if r["statistic"] in ("y_offset", "birkhoff_spread"):
            print(f"  {r['statistic']} at N={r['N']}: {r['value_re']:.6g}")
    for note in rep.notes:
        print(f"  note: {note}")
    if args.out is not None:
        cfg = ExperimentConfig(fmt=args.format or "csv", out=args.out)
        _emit_report(rep, cfg)
    return 0 if ok else 1


_DEMOS = {
    "fur-seq": demo_fur_seq,
    "coboundary": demo_coboundary,
    "conjugacy": demo_conjugacy,
    "theta": demo_theta,
    "joining-anzai": demo_joining_anzai,
    "joining-m": demo_joining_m,
}


def cmd_demo(args) -> int:
    return _DEMOS[args.name](args)


# ---------------------------------------------------------------------------
# wiring


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ergodlab", description=__doc__.splitlines()[0])

    def common(sp, config_required: bool):
        if config_required:
            sp.add_argument("--config", required=True, help="experiment config JSON")
        sp.add_argument("--out", default=None, help="output path (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=None)
        sp.add_argument("--threads", type=int, default=None, help="worker threads (env ERGODLAB_THREADS)")
        sp.add_argument("--n", type=int, default=None, help="orbit length / demo size override")

    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("orbit", help="write an orbit as n, coordinate columns")
    common(sp, True)
    sp.set_defaults(func=cmd_orbit)

    sp = sub.add_parser("diag", help="run one diagnostic and write its report")
    sp.add_argument("kind", choices=("birkhoff", "deviation", "discrepancy", "eigenscan"))
    common(sp, True)
    sp.set_defaults(func=cmd_diag)

    sp = sub.add_parser("demo", help="run a named verification, print PASS/FAIL lines")
    sp.add_argument("name", choices=sorted(_DEMOS))
    common(sp, False)
    sp.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ResourceLimitError as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return 3
    except (ValueError, TypeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
